//! Brute-force references for tests and for the command line.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::model::Scenario;
use crate::rational::Rat;

pub use crate::knapsack::{brute_force_ck, BRUTE_FORCE_MAX_ITEMS};
pub use crate::rcg::{robust_brute_force, RobustOptimum, ROBUST_MAX_BINS, ROBUST_MAX_ITEMS};

pub const VERTEX_MAX_ITEMS: usize = 12;
pub const SUBSET_SUM_MAX_TOTAL: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} is limited to {max}, got {size}")]
    TooLarge {
        what: &'static str,
        size: u64,
        max: u64,
    },
}

/// Every vertex of `{0 <= a <= â, Σ a <= Ω}`: subsets at their bounds that
/// fit the budget, plus each such subset completed by one partial
/// coordinate that uses the rest of the budget. Sorted and deduplicated.
pub fn enumerate_uomega_vertices(
    deviation: &[Rat],
    budget: &Rat,
) -> Result<Vec<Scenario>, OracleError> {
    let m = deviation.len();
    if m > VERTEX_MAX_ITEMS {
        return Err(OracleError::TooLarge {
            what: "vertex enumeration item count",
            size: m as u64,
            max: VERTEX_MAX_ITEMS as u64,
        });
    }
    let mut found: BTreeSet<Vec<Rat>> = BTreeSet::new();
    for mask in 0u32..(1 << m) {
        let used: Rat = (0..m)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| deviation[i].clone())
            .sum();
        if &used > budget {
            continue;
        }
        let point: Vec<Rat> = (0..m)
            .map(|i| {
                if mask >> i & 1 == 1 {
                    deviation[i].clone()
                } else {
                    Rat::zero()
                }
            })
            .collect();
        let rest = budget - &used;
        if rest.is_positive() {
            for i in (0..m).filter(|&i| mask >> i & 1 == 0) {
                if deviation[i] > rest {
                    let mut partial = point.clone();
                    partial[i] = rest.clone();
                    found.insert(partial);
                }
            }
        }
        found.insert(point);
    }
    Ok(found.into_iter().map(Scenario::from_values_unchecked).collect())
}

/// The vertices that no other point of the set dominates coordinatewise:
/// those using the whole reachable budget. Enough for nondecreasing objectives.
pub fn maximal_vertices(deviation: &[Rat], budget: &Rat) -> Result<Vec<Scenario>, OracleError> {
    let total: Rat = deviation.iter().cloned().sum();
    let reach = if budget < &total { budget.clone() } else { total };
    Ok(enumerate_uomega_vertices(deviation, budget)?
        .into_iter()
        .filter(|s| s.total() == reach)
        .collect())
}

/// Whether some subset of `weights` sums to `target`, with one such subset.
pub fn subset_sum(weights: &[u64], target: u64) -> Result<Option<Vec<usize>>, OracleError> {
    let total: u64 = weights.iter().sum();
    if total > SUBSET_SUM_MAX_TOTAL || target > SUBSET_SUM_MAX_TOTAL {
        return Err(OracleError::TooLarge {
            what: "subset-sum total weight",
            size: total.max(target),
            max: SUBSET_SUM_MAX_TOTAL,
        });
    }
    let t = target as usize;
    // first[s] = index of the item that first reached sum s
    let mut first: Vec<Option<usize>> = vec![None; t + 1];
    let mut reach = vec![false; t + 1];
    reach[0] = true;
    for (k, &w) in weights.iter().enumerate() {
        let w = w as usize;
        if w == 0 || w > t {
            continue;
        }
        for s in (w..=t).rev() {
            if !reach[s] && reach[s - w] {
                reach[s] = true;
                first[s] = Some(k);
            }
        }
    }
    if !reach[t] {
        return Ok(None);
    }
    let mut witness = Vec::new();
    let mut s = t;
    while s > 0 {
        let k = first[s].expect("reachable sums record their last item");
        witness.push(k);
        s -= weights[k] as usize;
    }
    witness.sort_unstable();
    Ok(Some(witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn values(v: &[Scenario]) -> Vec<Vec<Rat>> {
        v.iter().map(|s| s.values().to_vec()).collect()
    }

    #[test]
    fn budget_binds() {
        let v = enumerate_uomega_vertices(&[int(2), int(2)], &int(2)).unwrap();
        assert_eq!(
            values(&v),
            vec![vec![int(0), int(0)], vec![int(0), int(2)], vec![int(2), int(0)]]
        );
    }

    #[test]
    fn partial_coordinates() {
        let v = enumerate_uomega_vertices(&[int(2), int(3)], &int(4)).unwrap();
        let v = values(&v);
        assert!(v.contains(&vec![int(2), int(2)]));
        assert!(v.contains(&vec![int(1), int(3)]));
        assert!(!v.contains(&vec![int(2), int(3)]));
        assert_eq!(v.len(), 5);
    }

    #[test]
    fn slack_budget_gives_box_corners() {
        let v = enumerate_uomega_vertices(&[int(1), rat(1, 2), int(2)], &int(10)).unwrap();
        assert_eq!(v.len(), 8);
    }

    #[test]
    fn zero_budget() {
        let v = enumerate_uomega_vertices(&[int(1), int(2)], &int(0)).unwrap();
        assert_eq!(values(&v), vec![vec![int(0), int(0)]]);
    }

    #[test]
    fn maximal_only() {
        let v = maximal_vertices(&[int(2), int(2)], &int(2)).unwrap();
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn guards() {
        let big = vec![int(1); 13];
        assert!(enumerate_uomega_vertices(&big, &int(1)).is_err());
        assert!(subset_sum(&[2_000_000], 3).is_err());
    }

    #[test]
    fn subset_sum_examples() {
        assert_eq!(subset_sum(&[1, 2, 3], 4).unwrap(), Some(vec![0, 2]));
        assert_eq!(subset_sum(&[2, 4, 5], 3).unwrap(), None);
        assert_eq!(subset_sum(&[2, 4, 5], 0).unwrap(), Some(vec![]));
    }
}
