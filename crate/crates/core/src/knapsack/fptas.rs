//! Scaling-and-rounding approximation scheme on top of the table solver.

use super::dp::{solve_scaled, DpOutcome};
use super::{DpLimits, KnapsackError, ProfitScaling};
use crate::model::{CkInstance, CkSolution};
use crate::rational::Rat;

/// Outcome of an approximate solve. `claimed` is the scaled value mapped back
/// to profit units; `solution.value` re-evaluates the returned point exactly.
pub type FptasOutcome = DpOutcome;

/// A solution whose exact value is at least `(1 − ε)` times the optimum.
pub fn solve_fptas(instance: &CkInstance, epsilon: &Rat) -> Result<CkSolution, KnapsackError> {
    Ok(solve_fptas_with(instance, epsilon, DpLimits::default())?.solution)
}

pub fn solve_fptas_with(
    instance: &CkInstance,
    epsilon: &Rat,
    limits: DpLimits,
) -> Result<FptasOutcome, KnapsackError> {
    let scaling = ProfitScaling::approximate(instance, epsilon)?;
    solve_scaled(instance, &scaling, limits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knapsack::solve_dp;
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
    fn half_epsilon_on_three_items() {
        let inst = ck(&[(-2, 2, 3), (-1, 1, 4), (0, 1, 2)], 5);
        let out = solve_fptas_with(&inst, &rat(1, 2), DpLimits::default()).unwrap();
        out.solution.check(&inst).unwrap();
        assert!(out.solution.value >= int(3));
        assert!(out.solution.value >= out.claimed);
        // rows stay within ⌈2n/ε⌉ + 1
        assert!(out.table_rows <= 13);
    }

    #[test]
    fn tiny_epsilon_recovers_optimum() {
        let inst = ck(&[(-2, 2, 3), (-1, 1, 4), (0, 1, 2), (-5, 3, 4)], 7);
        let exact = solve_dp(&inst).unwrap().value;
        assert_eq!(solve_fptas(&inst, &rat(1, 1000)).unwrap().value, exact);
    }

    #[test]
    fn single_item_is_exact() {
        for eps in [rat(1, 2), rat(1, 10), rat(9, 10)] {
            let inst = ck(&[(-3, 2, 5)], 4);
            assert_eq!(solve_fptas(&inst, &eps).unwrap().value, int(5));
        }
    }

    #[test]
    fn rejects_bad_epsilon() {
        let inst = ck(&[(-3, 2, 5)], 4);
        assert!(matches!(
            solve_fptas(&inst, &int(0)),
            Err(KnapsackError::EpsilonOutOfRange)
        ));
    }

    #[test]
    fn unreachable_gain_returns_base() {
        let inst = ck(&[(-9, 1, 10), (3, 1, 1)], 2);
        assert_eq!(solve_fptas(&inst, &rat(1, 2)).unwrap().value, int(4));
    }
}
