use num_bigint::BigInt;
use num_traits::Signed;

use crate::model::CkInstance;
use crate::rational::Rat;

/// `(gain, weight)` of every item whose bound is first tightened to
/// `min(u_j, Ω)`; items that gain nothing are left out.
fn clipped_gains(instance: &CkInstance) -> Vec<(Rat, Rat)> {
    let cap = instance.capacity();
    instance
        .items()
        .iter()
        .filter_map(|item| {
            let weight = if &item.upper < cap {
                item.upper.clone()
            } else {
                cap.clone()
            };
            let gain = item.profit(&weight) - item.base_profit();
            gain.is_positive().then_some((gain, weight))
        })
        .collect()
}

/// Greedy knapsack bound: best single item or longest density-ordered prefix.
fn greedy_bound(mut entries: Vec<(Rat, Rat)>, capacity: &Rat) -> Rat {
    let best_single = entries
        .iter()
        .map(|(g, _)| g.clone())
        .max()
        .unwrap_or_else(|| Rat::from_integer(BigInt::from(0)));
    // nonincreasing density g/w, compared as g_a·w_b vs g_b·w_a; stable
    entries.sort_by(|(ga, wa), (gb, wb)| (gb * wa).cmp(&(ga * wb)));
    let mut used = Rat::from_integer(BigInt::from(0));
    let mut prefix = Rat::from_integer(BigInt::from(0));
    for (g, w) in entries {
        used += &w;
        if &used > capacity {
            break;
        }
        prefix += g;
    }
    if prefix > best_single {
        prefix
    } else {
        best_single
    }
}

/// Lower bound on the optimal gain over the base profit.
pub(crate) fn gain_lower_bound(instance: &CkInstance) -> Rat {
    greedy_bound(clipped_gains(instance), instance.capacity())
}

/// `P^min`: a profit some feasible solution attains, with `P* <= 2 P^min`.
pub fn profit_lower_bound(instance: &CkInstance) -> Rat {
    instance.base_value() + gain_lower_bound(instance)
}

/// `P̄ = min(2 P^min, Σ_j p_j(u_j))`.
pub fn profit_upper_bound(instance: &CkInstance) -> Rat {
    let twice = profit_lower_bound(instance) * Rat::from_integer(BigInt::from(2));
    let total: Rat = instance.items().iter().map(|it| it.full_profit()).sum();
    if twice < total {
        twice
    } else {
        total
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

    /// Every prefix of the density order plus every single item, by hand.
    fn reference_lower_bound(inst: &CkInstance) -> Rat {
        let mut idx: Vec<usize> = (0..inst.len()).collect();
        let items = inst.items();
        idx.sort_by(|&a, &b| {
            let da = items[a].full_profit() / &items[a].upper;
            let db = items[b].full_profit() / &items[b].upper;
            db.cmp(&da)
        });
        let mut best = int(0);
        for it in items {
            if &it.upper <= inst.capacity() && it.full_profit() > best {
                best = it.full_profit();
            }
        }
        for k in 1..=idx.len() {
            let w: Rat = idx[..k].iter().map(|&j| items[j].upper.clone()).sum();
            if &w <= inst.capacity() {
                let p: Rat = idx[..k].iter().map(|&j| items[j].full_profit()).sum();
                if p > best {
                    best = p;
                }
            }
        }
        best
    }

    #[test]
    fn three_item_example() {
        let inst = ck(&[(-2, 2, 3), (-1, 1, 4), (0, 1, 2)], 5);
        assert_eq!(reference_lower_bound(&inst), int(6));
        assert_eq!(profit_lower_bound(&inst), int(6));
        assert_eq!(profit_upper_bound(&inst), int(9));
    }

    #[test]
    fn single_item() {
        let inst = ck(&[(-3, 2, 5)], 10);
        assert_eq!(profit_lower_bound(&inst), int(7));
        let ub = profit_upper_bound(&inst);
        assert!(ub >= int(7) && ub <= int(14));
    }

    #[test]
    fn empty_instance() {
        let inst = ck(&[], 3);
        assert_eq!(profit_lower_bound(&inst), int(0));
        assert_eq!(profit_upper_bound(&inst), int(0));
    }

    #[test]
    fn zero_capacity_keeps_only_base_profit() {
        let inst = ck(&[(-2, 2, 3), (4, 1, 2), (1, 3, 1)], 0);
        assert_eq!(profit_lower_bound(&inst), int(5));
    }

    #[test]
    fn oversized_items_are_clipped_to_capacity() {
        // alone the item cannot reach p(u) = 1; p(Ω) = 0
        let inst = CkInstance::new(vec![CkItem::new(int(-9), int(10), int(1))], rat(1, 2)).unwrap();
        assert_eq!(profit_lower_bound(&inst), int(0));
    }
}
