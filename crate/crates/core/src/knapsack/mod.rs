//! Exact and approximate solvers for the two-piece convex knapsack
//!
//! ```text
//! max Σ_j max(0, γ_j + β_j x_j)   s.t.  Σ_j x_j <= Ω,  0 <= x <= u.
//! ```
//!
//! Some optimum sets every item to 0 or its bound except one partial item.
//! The solvers enumerate that structure with a least-weight table over
//! slope-sorted prefixes, so a single table serves every choice of the
//! partial item.
//!
//! Items with `γ_j > 0` have a zero-length flat piece and earn `γ_j` even at
//! `x_j = 0`. That base profit is collected up front; the table packs the
//! remaining gain `p_j(u_j) − p_j(0)`.

mod bounds;
mod brute;
mod dp;
mod fptas;
mod sos2;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::CkInstance;
use crate::rational::{common_denominator, floor_to_u64, Rat};

pub use bounds::{profit_lower_bound, profit_upper_bound};
pub use brute::{brute_force_ck, BRUTE_FORCE_MAX_ITEMS};
pub use dp::{build_dp_table, solve_dp, solve_dp_with, solve_scaled, DpOutcome, DpTable};
pub use fptas::{solve_fptas, solve_fptas_with, FptasOutcome};
pub use sos2::{export_sos2, sos2_model};

#[derive(Debug, Error)]
pub enum KnapsackError {
    #[error("profit scale does not map every item profit to an integer")]
    ScalingNotExact,
    #[error("DP table with {cells} cells exceeds the configured cap of {cap}")]
    ProfitBoundOverflow { cells: u128, cap: u128 },
    #[error("scaled profits do not fit machine integers")]
    ProfitOverflow,
    #[error("item weights do not fit machine integers after clearing denominators")]
    WeightOverflow,
    #[error("epsilon must lie in (0, 1)")]
    EpsilonOutOfRange,
    #[error("brute force supports at most {max} items, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Resource limits for table construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpLimits {
    /// Maximum number of `(profit, prefix)` cells.
    pub max_cells: u128,
}

impl Default for DpLimits {
    fn default() -> Self {
        Self {
            max_cells: 60_000_000,
        }
    }
}

/// Stable ordering by nonincreasing slope, ties by nondecreasing bound.
pub fn sort_for_dp(instance: &CkInstance) -> Vec<usize> {
    let items = instance.items();
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        items[b]
            .beta
            .cmp(&items[a].beta)
            .then_with(|| items[a].upper.cmp(&items[b].upper))
    });
    order
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScalingMode {
    Exact,
    Approximate(Rat),
}

/// Integer profits for the table: `p'_j = ⌊gain_j / K⌋` with profit unit `K`.
///
/// In exact mode `K = 1/S` and the flooring is lossless.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfitScaling {
    pub unit: Rat,
    pub mode: ScalingMode,
    /// Scaled profits indexed like the instance's items.
    pub profits: Vec<u64>,
    /// Largest profit level the table has to represent.
    pub profit_bound: u64,
}

impl ProfitScaling {
    pub fn exact(instance: &CkInstance) -> Result<Self, KnapsackError> {
        let scale = Rat::from_integer(instance.profit_scale().clone());
        let mut profits = Vec::with_capacity(instance.len());
        for item in instance.items() {
            let p = item.gain() * &scale;
            if !p.is_integer() {
                return Err(KnapsackError::ScalingNotExact);
            }
            profits.push(p.to_integer().to_u64().ok_or(KnapsackError::ProfitOverflow)?);
        }
        let twice_min = bounds::gain_lower_bound(instance) * Rat::from_integer(BigInt::from(2)) * &scale;
        let profit_bound = cap_bound(&twice_min, &profits)?;
        Ok(Self {
            unit: Rat::from_integer(BigInt::from(1)) / scale,
            mode: ScalingMode::Exact,
            profits,
            profit_bound,
        })
    }

    /// `K = ε · P^min / n` over the instance's gains.
    pub fn approximate(instance: &CkInstance, epsilon: &Rat) -> Result<Self, KnapsackError> {
        if !epsilon.is_positive() || *epsilon >= Rat::from_integer(BigInt::from(1)) {
            return Err(KnapsackError::EpsilonOutOfRange);
        }
        let p_min = bounds::gain_lower_bound(instance);
        if p_min.is_zero() {
            // nothing beyond the base profit is attainable; a single row suffices
            return Ok(Self {
                unit: Rat::from_integer(BigInt::from(1)),
                mode: ScalingMode::Approximate(epsilon.clone()),
                profits: vec![0; instance.len()],
                profit_bound: 0,
            });
        }
        let n = Rat::from_integer(BigInt::from(instance.len()));
        let unit = epsilon * &p_min / n;
        let mut profits = Vec::with_capacity(instance.len());
        for item in instance.items() {
            profits.push(floor_to_u64(&(item.gain() / &unit)).ok_or(KnapsackError::ProfitOverflow)?);
        }
        let total_gain: Rat = instance.items().iter().map(|it| it.gain()).sum();
        let twice = p_min * Rat::from_integer(BigInt::from(2));
        let upper = if twice < total_gain { twice } else { total_gain };
        let profit_bound = cap_bound(&(upper / &unit), &profits)?;
        Ok(Self {
            unit,
            mode: ScalingMode::Approximate(epsilon.clone()),
            profits,
            profit_bound,
        })
    }
}

fn cap_bound(scaled_bound: &Rat, profits: &[u64]) -> Result<u64, KnapsackError> {
    let bound = floor_to_u64(scaled_bound).ok_or(KnapsackError::ProfitOverflow)?;
    let total: u128 = profits.iter().map(|&p| p as u128).sum();
    Ok((bound as u128).min(total) as u64)
}

/// Weights with denominators cleared: `u_j · W` and `Ω · W` as integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct WeightScaling {
    pub scale: BigInt,
    pub uppers: Vec<u64>,
    pub capacity: u64,
}

impl WeightScaling {
    pub fn new(instance: &CkInstance) -> Result<Self, KnapsackError> {
        let scale = common_denominator(
            instance
                .items()
                .iter()
                .map(|it| &it.upper)
                .chain(std::iter::once(instance.capacity())),
        );
        let s = Rat::from_integer(scale.clone());
        let to_u64 = |r: &Rat| -> Result<u64, KnapsackError> {
            let v = r * &s;
            debug_assert!(v.is_integer());
            v.to_integer().to_u64().ok_or(KnapsackError::WeightOverflow)
        };
        let uppers = instance
            .items()
            .iter()
            .map(|it| to_u64(&it.upper))
            .collect::<Result<Vec<_>, _>>()?;
        let capacity = to_u64(instance.capacity())?;
        // keep sums of two weights inside u64
        if capacity >= u64::MAX / 4 || uppers.iter().any(|&u| u >= u64::MAX / 4) {
            return Err(KnapsackError::WeightOverflow);
        }
        Ok(Self {
            scale,
            uppers,
            capacity,
        })
    }

    pub fn to_rat(&self, w: u64) -> Rat {
        Rat::new(BigInt::from(w), self.scale.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CkItem;
    use crate::rational::{int, rat};

    fn ck(items: &[(i64, i64, i64)], cap: i64) -> CkInstance {
        CkInstance::new(
            items
                .iter()
                .map(|&(g, b, u)| CkItem::new(int(g), int(b), int(u)))
                .collect(),
            int(cap),
        )
        .unwrap()
    }

    #[test]
    fn sort_examples() {
        let inst = ck(&[(0, 1, 1), (0, 3, 1), (0, 2, 1)], 1);
        assert_eq!(sort_for_dp(&inst), vec![1, 2, 0]);
        let inst = ck(&[(0, 2, 5), (0, 2, 1)], 1);
        assert_eq!(sort_for_dp(&inst), vec![1, 0]);
        let inst = ck(&[(0, 3, 1), (0, 2, 1), (0, 2, 2)], 1);
        assert_eq!(sort_for_dp(&inst), vec![0, 1, 2]);
    }

    #[test]
    fn exact_scaling_uses_profit_scale() {
        let inst = CkInstance::new(
            vec![
                CkItem::new(rat(-1, 2), int(1), int(1)),
                CkItem::new(int(0), rat(1, 3), int(1)),
            ],
            int(2),
        )
        .unwrap();
        let s = ProfitScaling::exact(&inst).unwrap();
        assert_eq!(s.profits, vec![3, 2]);
        assert_eq!(s.unit, rat(1, 6));
        // P^min = 5/6 (both fit), 2·P^min·6 = 10, sum = 5
        assert_eq!(s.profit_bound, 5);
    }

    #[test]
    fn overridden_scale_must_be_exact() {
        let inst = CkInstance::new(vec![CkItem::new(rat(-1, 2), int(1), int(1))], int(2))
            .unwrap()
            .with_profit_scale(BigInt::from(1));
        assert!(matches!(
            ProfitScaling::exact(&inst),
            Err(KnapsackError::ScalingNotExact)
        ));
    }

    #[test]
    fn approximate_scaling_floors() {
        let inst = ck(&[(-2, 2, 3), (-1, 1, 4), (0, 1, 2)], 5);
        let s = ProfitScaling::approximate(&inst, &rat(1, 2)).unwrap();
        // K = 0.5 · 6 / 3 = 1
        assert_eq!(s.unit, int(1));
        assert_eq!(s.profits, vec![4, 3, 2]);
        assert_eq!(s.profit_bound, 9);
        assert!(ProfitScaling::approximate(&inst, &int(1)).is_err());
        assert!(ProfitScaling::approximate(&inst, &int(0)).is_err());
    }

    #[test]
    fn weights_clear_denominators() {
        let inst = CkInstance::new(
            vec![CkItem::new(int(0), int(1), rat(3, 2))],
            rat(5, 3),
        )
        .unwrap();
        let w = WeightScaling::new(&inst).unwrap();
        assert_eq!(w.scale, BigInt::from(6));
        assert_eq!(w.uppers, vec![9]);
        assert_eq!(w.capacity, 10);
        assert_eq!(w.to_rat(9), rat(3, 2));
    }
}
