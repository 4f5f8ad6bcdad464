//! Worst-case scenario search for a fixed packing.
//!
//! For integral `(y, z)` the adversary's problem splits by bin: bin `j` with
//! nominal load `A_j` and deviation mass `U_j` contributes
//! `c_j (A_j + x_j − V y_j)_+` when it receives `x_j` units of deviation. That
//! is a two-piece convex knapsack with `γ_j = c_j (A_j − V y_j)`, `β_j = c_j`
//! and `u_j = U_j`, capacity `Ω`.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::knapsack::{solve_dp, solve_fptas, KnapsackError};
use crate::model::{
    bin_overflows, overtime_cost, CkInstance, CkItem, CkSolution, ModelError, Packing,
    RebpInstance, Scenario,
};
use crate::rational::Rat;

#[derive(Debug, Error)]
pub enum SeparationError {
    #[error("separation needs integral open/assignment values")]
    FractionalInput,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Knapsack(#[from] KnapsackError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeparationMode {
    Exact,
    /// FPTAS with the given ε; a negative answer is only approximate.
    Approximate(Rat),
}

impl SeparationMode {
    pub fn is_exact(&self) -> bool {
        matches!(self, SeparationMode::Exact)
    }
}

/// Knapsack view of one packing; `bins[k]` is the bin behind knapsack item `k`.
#[derive(Debug, Clone)]
pub struct SepInstance {
    pub knapsack: CkInstance,
    pub bins: Vec<usize>,
}

/// Converts 0/1 rational `y`, `z` values into a packing.
pub fn packing_from_values(y: &[Rat], z: &[Vec<Rat>]) -> Result<Packing, SeparationError> {
    let to_bool = |v: &Rat| -> Result<bool, SeparationError> {
        if v.is_zero() {
            Ok(false)
        } else if *v == Rat::from_integer(1.into()) {
            Ok(true)
        } else {
            Err(SeparationError::FractionalInput)
        }
    };
    let open = y.iter().map(to_bool).collect::<Result<Vec<_>, _>>()?;
    let z = z
        .iter()
        .map(|row| row.iter().map(to_bool).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Packing::from_matrix(open, &z)?)
}

pub fn build_sep_instance(
    instance: &RebpInstance,
    packing: &Packing,
) -> Result<SepInstance, SeparationError> {
    if packing.bin_of().len() != instance.item_count() {
        return Err(ModelError::DimensionMismatch {
            expected: instance.item_count(),
            found: packing.bin_of().len(),
        }
        .into());
    }
    if packing.bin_count() != instance.bin_count() {
        return Err(ModelError::DimensionMismatch {
            expected: instance.bin_count(),
            found: packing.bin_count(),
        }
        .into());
    }
    let mut candidates = Vec::new();
    let mut items = Vec::new();
    for (j, members) in packing.bins().iter().enumerate() {
        let deviation: Rat = members
            .iter()
            .map(|&i| instance.items()[i].deviation.clone())
            .sum();
        if !deviation.is_positive() {
            continue;
        }
        let nominal: Rat = members
            .iter()
            .map(|&i| instance.items()[i].nominal.clone())
            .sum();
        let rate = &instance.rates()[j];
        let room = if packing.open()[j] {
            instance.capacity().clone()
        } else {
            Rat::zero()
        };
        items.push(CkItem::new(rate * (nominal - room), rate.clone(), deviation));
        candidates.push(j);
    }
    let knapsack = CkInstance::new(items, instance.budget().clone())?;
    let bins = (0..knapsack.len())
        .map(|k| candidates[knapsack.source_index(k)])
        .collect();
    Ok(SepInstance { knapsack, bins })
}

#[derive(Debug, Clone)]
pub struct SeparationResult {
    /// Exact overtime cost of `scenario`.
    pub eta: Rat,
    pub scenario: Scenario,
    /// `eta > θ`.
    pub violated: bool,
    /// Weighted overflow `c_j (load_j − V y_j)_+` of every bin under `scenario`.
    pub certificate: Vec<Rat>,
    pub mode: SeparationMode,
    pub knapsack_solution: CkSolution,
}

/// Finds a worst-case scenario for `packing` and compares its cost with `theta`.
pub fn separate(
    instance: &RebpInstance,
    packing: &Packing,
    theta: &Rat,
    mode: &SeparationMode,
) -> Result<SeparationResult, SeparationError> {
    let sep = build_sep_instance(instance, packing)?;
    let solution = match mode {
        SeparationMode::Exact => solve_dp(&sep.knapsack)?,
        SeparationMode::Approximate(eps) => solve_fptas(&sep.knapsack, eps)?,
    };

    // spread each bin's deviation over its items in index order
    let mut values = vec![Rat::zero(); instance.item_count()];
    let members = packing.bins();
    for (k, amount) in solution.x.iter().enumerate() {
        let mut left = amount.clone();
        for &i in &members[sep.bins[k]] {
            if !left.is_positive() {
                break;
            }
            let cap = &instance.items()[i].deviation;
            let take = if &left < cap { left.clone() } else { cap.clone() };
            left -= &take;
            values[i] = take;
        }
    }
    let scenario = Scenario::new(instance, values)?;
    let eta = overtime_cost(instance, packing, &scenario)?;
    let certificate = bin_overflows(instance, packing, &scenario)?
        .into_iter()
        .zip(instance.rates())
        .map(|(o, c)| o * c)
        .collect();
    Ok(SeparationResult {
        violated: &eta > theta,
        eta,
        scenario,
        certificate,
        mode: mode.clone(),
        knapsack_solution: solution,
    })
}

/// A convex, coordinatewise nondecreasing function with right partial derivatives.
pub trait ConvexOracle {
    fn value(&self, a: &[Rat]) -> Rat;
    fn right_derivative(&self, a: &[Rat], i: usize) -> Rat;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoundingError {
    #[error("budget must be an integer between 0 and the dimension")]
    NonIntegerBudget,
    #[error("point must lie in the unit box with total at most the budget")]
    BadBox,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rounding {
    pub point: Vec<Rat>,
    /// Number of pairwise transfers performed.
    pub transfers: usize,
}

/// Rounds a point of `{0 <= a <= 1, Σ a <= Ω}` to a 0/1 point with exactly
/// `Ω` ones without decreasing `g`.
///
/// Missing budget is first filled coordinate by coordinate. Then, while
/// fractional coordinates remain, mass moves from the one with the smallest
/// right derivative to the one with the largest until one of them becomes
/// integral; convexity makes every such move nondecreasing.
pub fn round_to_vertex(
    g: &dyn ConvexOracle,
    point: &[Rat],
    budget: &Rat,
) -> Result<Rounding, RoundingError> {
    let one = Rat::from_integer(1.into());
    if !budget.is_integer()
        || budget.is_negative()
        || *budget > Rat::from_integer(point.len().into())
    {
        return Err(RoundingError::NonIntegerBudget);
    }
    if point.iter().any(|v| v.is_negative() || *v > one) {
        return Err(RoundingError::BadBox);
    }
    let mut a = point.to_vec();
    let mut missing = budget - a.iter().cloned().sum::<Rat>();
    if missing.is_negative() {
        return Err(RoundingError::BadBox);
    }
    for v in a.iter_mut() {
        if !missing.is_positive() {
            break;
        }
        let room = &one - &*v;
        let step = if room < missing { room } else { missing.clone() };
        *v += &step;
        missing -= step;
    }

    let mut transfers = 0;
    loop {
        let fractional: Vec<usize> = (0..a.len())
            .filter(|&i| a[i].is_positive() && a[i] < one)
            .collect();
        if fractional.len() < 2 {
            // the total is an integer, so a lone fractional coordinate cannot occur
            debug_assert!(fractional.is_empty());
            break;
        }
        let slopes: Vec<Rat> = fractional.iter().map(|&i| g.right_derivative(&a, i)).collect();
        let mut up = 0;
        for k in 1..fractional.len() {
            if slopes[k] > slopes[up] {
                up = k;
            }
        }
        let mut down = if up == 0 { 1 } else { 0 };
        for k in 0..fractional.len() {
            if k != up && slopes[k] < slopes[down] {
                down = k;
            }
        }
        let (i_up, i_down) = (fractional[up], fractional[down]);
        let room = &one - &a[i_up];
        let step = if room < a[i_down] {
            room
        } else {
            a[i_down].clone()
        };
        a[i_up] += &step;
        a[i_down] -= step;
        transfers += 1;
    }
    Ok(Rounding {
        point: a,
        transfers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Item;
    use crate::rational::{int, rat};

    fn items(pairs: &[(i64, i64)]) -> Vec<Item> {
        pairs.iter().map(|&(a, d)| Item::new(int(a), int(d))).collect()
    }

    fn one_bin(budget: i64) -> (RebpInstance, Packing) {
        let inst =
            RebpInstance::with_uniform_rate(items(&[(3, 2), (3, 2)]), 1, int(5), int(1), int(budget))
                .unwrap();
        let packing = Packing::from_assignment(1, vec![0, 0]).unwrap();
        (inst, packing)
    }

    #[test]
    fn one_bin_knapsack_item() {
        let (inst, packing) = one_bin(2);
        let sep = build_sep_instance(&inst, &packing).unwrap();
        assert_eq!(sep.knapsack.items(), &[CkItem::new(int(1), int(1), int(4))]);
        assert_eq!(sep.bins, vec![0]);
    }

    #[test]
    fn slack_bin_is_dropped() {
        let inst =
            RebpInstance::with_uniform_rate(items(&[(1, 1), (1, 1)]), 1, int(5), int(1), int(1))
                .unwrap();
        let packing = Packing::from_assignment(1, vec![0, 0]).unwrap();
        assert!(build_sep_instance(&inst, &packing).unwrap().knapsack.is_empty());
    }

    #[test]
    fn empty_bin_is_dropped() {
        let inst =
            RebpInstance::with_uniform_rate(items(&[(3, 2), (3, 2)]), 2, int(5), int(1), int(2))
                .unwrap();
        let packing = Packing::new(vec![true, true], vec![0, 0]).unwrap();
        let sep = build_sep_instance(&inst, &packing).unwrap();
        assert_eq!(sep.knapsack.len(), 1);
        assert_eq!(sep.bins, vec![0]);
    }

    #[test]
    fn violated_and_satisfied() {
        let (inst, packing) = one_bin(2);
        let r = separate(&inst, &packing, &int(2), &SeparationMode::Exact).unwrap();
        assert_eq!(r.eta, int(3));
        assert!(r.violated);
        assert_eq!(r.scenario.values(), &[int(2), int(0)]);
        assert_eq!(r.certificate, vec![int(3)]);
        let r = separate(&inst, &packing, &int(3), &SeparationMode::Exact).unwrap();
        assert!(!r.violated);
    }

    #[test]
    fn zero_budget_gives_nominal_overflow() {
        let (inst, packing) = one_bin(0);
        let r = separate(&inst, &packing, &int(0), &SeparationMode::Exact).unwrap();
        assert_eq!(r.eta, int(1));
        assert!(r.scenario.is_zero());
    }

    #[test]
    fn approximate_mode_is_sound() {
        let (inst, packing) = one_bin(2);
        let r = separate(&inst, &packing, &int(2), &SeparationMode::Approximate(rat(1, 10))).unwrap();
        assert_eq!(r.eta, overtime_cost(&inst, &packing, &r.scenario).unwrap());
        assert!(r.eta >= int(3) * rat(9, 10));
    }

    #[test]
    fn fractional_values_are_rejected() {
        let y = vec![int(1)];
        let z = vec![vec![rat(1, 2)]];
        assert!(matches!(
            packing_from_values(&y, &z),
            Err(SeparationError::FractionalInput)
        ));
        let p = packing_from_values(&y, &[vec![int(1)]]).unwrap();
        assert_eq!(p.bin_of(), &[0]);
    }

    struct SumOfSquares;
    impl ConvexOracle for SumOfSquares {
        fn value(&self, a: &[Rat]) -> Rat {
            a.iter().map(|v| v * v).sum()
        }
        fn right_derivative(&self, a: &[Rat], i: usize) -> Rat {
            &a[i] * int(2)
        }
    }

    struct Linear(Vec<Rat>);
    impl ConvexOracle for Linear {
        fn value(&self, a: &[Rat]) -> Rat {
            a.iter().zip(&self.0).map(|(x, w)| x * w).sum()
        }
        fn right_derivative(&self, _: &[Rat], i: usize) -> Rat {
            self.0[i].clone()
        }
    }

    #[test]
    fn rounds_sum_of_squares() {
        let start = vec![rat(1, 2), rat(1, 2), int(1)];
        let r = round_to_vertex(&SumOfSquares, &start, &int(2)).unwrap();
        let g = SumOfSquares.value(&r.point);
        assert_eq!(g, int(2));
        assert!(g >= SumOfSquares.value(&start));
        assert_eq!(r.transfers, 1);
        assert_eq!(r.point.iter().cloned().sum::<Rat>(), int(2));
    }

    #[test]
    fn binary_points_are_unchanged() {
        let start = vec![int(1), int(0), int(1)];
        let r = round_to_vertex(&SumOfSquares, &start, &int(2)).unwrap();
        assert_eq!(r.point, start);
        assert_eq!(r.transfers, 0);
    }

    #[test]
    fn linear_objective_never_decreases() {
        let g = Linear(vec![int(1), int(3), int(2)]);
        // the missing budget goes to the first coordinates before any transfer
        let start = vec![rat(1, 3), rat(1, 3), rat(1, 3)];
        let r = round_to_vertex(&g, &start, &int(2)).unwrap();
        assert_eq!(r.point, vec![int(1), int(1), int(0)]);
        assert!(g.value(&r.point) >= g.value(&start));
        let start = vec![rat(1, 2), rat(1, 2), int(1)];
        let r = round_to_vertex(&g, &start, &int(2)).unwrap();
        assert_eq!(r.point, vec![int(0), int(1), int(1)]);
        assert!(g.value(&r.point) >= g.value(&start));
    }

    #[test]
    fn rounding_errors() {
        let start = vec![rat(1, 2), rat(1, 2)];
        assert_eq!(
            round_to_vertex(&SumOfSquares, &start, &rat(1, 2)),
            Err(RoundingError::NonIntegerBudget)
        );
        assert_eq!(
            round_to_vertex(&SumOfSquares, &[int(2), int(0)], &int(1)),
            Err(RoundingError::BadBox)
        );
    }
}
