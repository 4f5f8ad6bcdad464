//! Exhaustive search over extreme points, used as a reference.

use num_traits::{Signed, Zero};

use super::KnapsackError;
use crate::model::{CkInstance, CkSolution};
use crate::rational::Rat;

pub const BRUTE_FORCE_MAX_ITEMS: usize = 22;

/// Tries every full set `S` and every partial item `f ∉ S` filled with
/// `min(u_f, Ω − Σ_S u_j)`, evaluating the profit functions directly.
pub fn brute_force_ck(instance: &CkInstance) -> Result<CkSolution, KnapsackError> {
    let n = instance.len();
    if n > BRUTE_FORCE_MAX_ITEMS {
        return Err(KnapsackError::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_ITEMS,
        });
    }
    let mut search = Search {
        instance,
        chosen: vec![false; n],
        best: None,
    };
    let idle: Rat = instance.items().iter().map(|it| it.profit(&Rat::zero())).sum();
    search.descend(0, Rat::zero(), idle);
    let (_, full, partial) = search.best.expect("the empty set is always feasible");
    Ok(CkSolution::from_extreme_point(instance, full, partial))
}

type Candidate = (Rat, Vec<usize>, Option<(usize, Rat)>);

struct Search<'a> {
    instance: &'a CkInstance,
    chosen: Vec<bool>,
    best: Option<Candidate>,
}

impl Search<'_> {
    fn descend(&mut self, j: usize, weight: Rat, value: Rat) {
        let items = self.instance.items();
        if j == items.len() {
            self.evaluate(&weight, &value);
            return;
        }
        self.chosen[j] = false;
        self.descend(j + 1, weight.clone(), value.clone());
        let w = &weight + &items[j].upper;
        if &w <= self.instance.capacity() {
            self.chosen[j] = true;
            let v = value - items[j].profit(&Rat::zero()) + items[j].full_profit();
            self.descend(j + 1, w, v);
            self.chosen[j] = false;
        }
    }

    fn evaluate(&mut self, weight: &Rat, value: &Rat) {
        let items = self.instance.items();
        let n = items.len();
        let room = self.instance.capacity() - weight;
        let full: Vec<usize> = (0..n).filter(|&j| self.chosen[j]).collect();
        self.offer(value.clone(), &full, None);
        for f in 0..n {
            if self.chosen[f] {
                continue;
            }
            let x = if room < items[f].upper {
                room.clone()
            } else {
                items[f].upper.clone()
            };
            if x.is_negative() {
                continue;
            }
            let v = value - items[f].profit(&Rat::zero()) + items[f].profit(&x);
            self.offer(v, &full, Some((f, x)));
        }
    }

    fn offer(&mut self, value: Rat, full: &[usize], partial: Option<(usize, Rat)>) {
        if self.best.as_ref().is_none_or(|(b, _, _)| value > *b) {
            self.best = Some((value, full.to_vec(), partial));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CkItem;
    use crate::rational::int;

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
    fn three_item_example() {
        let inst = ck(&[(-2, 2, 3), (-1, 1, 4), (0, 1, 2)], 5);
        let sol = brute_force_ck(&inst).unwrap();
        assert_eq!(sol.value, int(6));
        sol.check(&inst).unwrap();
    }

    #[test]
    fn zero_budget_keeps_positive_intercepts() {
        let inst = ck(&[(-2, 2, 3), (4, 1, 2), (1, 3, 1)], 0);
        assert_eq!(brute_force_ck(&inst).unwrap().value, int(5));
    }

    #[test]
    fn single_item_endpoints() {
        // p(min(u, Ω)) = max(0, −3 + 2·2) = 1
        let inst = ck(&[(-3, 2, 5)], 2);
        assert_eq!(brute_force_ck(&inst).unwrap().value, int(1));
        let inst = ck(&[(-3, 2, 5)], 1);
        assert_eq!(brute_force_ck(&inst).unwrap().value, int(0));
    }

    #[test]
    fn guard_on_size() {
        let items: Vec<(i64, i64, i64)> = (0..23).map(|_| (0, 1, 1)).collect();
        let inst = ck(&items, 3);
        assert!(matches!(
            brute_force_ck(&inst),
            Err(KnapsackError::TooLarge { n: 23, max: 22 })
        ));
    }
}
