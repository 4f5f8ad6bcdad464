//! Exact depth-first branch and bound over item-to-bin assignments.
//!
//! All data is scaled to integers once: durations by the common denominator
//! `D` of every duration in play, rates by their common denominator `C`, so
//! objective values are integers in units of `1/(C·D)`.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{HintMode, MasterError, MasterModel, MasterSolution};
use crate::model::Packing;
use crate::rational::{common_denominator, scaled_i128, Rat};

/// Largest item count the internal solver accepts by default.
pub const DEFAULT_MAX_ITEMS: usize = 14;

pub fn solve_master_internal(
    model: &MasterModel,
    max_items: usize,
) -> Result<MasterSolution, MasterError> {
    let inst = model.instance();
    let m = inst.item_count();
    if m > max_items {
        return Err(MasterError::TooLargeForInternal {
            items: m,
            max: max_items,
        });
    }
    let data = Scaled::new(model)?;
    let mut search = Search::new(model, &data)?;
    search.run();

    let (best_value, best_assign) = search.best.clone().ok_or(MasterError::Infeasible)?;
    let mut lower = search.min_pruned.min(best_value);
    if search.timed_out {
        lower = lower.min(search.root_bound);
    }
    let gap = Rat::new(BigInt::from(best_value - lower), BigInt::from(best_value));

    let packing = Packing::from_assignment(inst.bin_count(), best_assign)?;
    let mut solution = model.solution_for(packing, gap)?;
    solution.nodes = search.nodes;
    solution.timed_out = search.timed_out;
    // the integer search and the exact re-evaluation must agree
    let scaled = &solution.objective * Rat::from_integer(BigInt::from(data.unit));
    if scaled != Rat::from_integer(BigInt::from(best_value)) {
        return Err(MasterError::Verification(
            "scaled search value differs from the exact objective".into(),
        ));
    }
    solution.verify(model)?;
    Ok(solution)
}

struct Scaled {
    /// `C·D`: cost of one open bin in objective units.
    unit: i128,
    capacity: i128,
    rates: Vec<i128>,
    min_rate: i128,
    /// `[s][i]`: `(ā_i + a_si)·D`.
    sizes: Vec<Vec<i128>>,
    /// `[s]`: total scaled load of all items.
    totals: Vec<i128>,
    /// `[k]`: overtime-cut floor on `θ` with `k` open bins, objective units.
    cut_floor: Vec<i128>,
    /// Rate class of every bin; equal rates share a class.
    class_of: Vec<usize>,
    class_bins: Vec<Vec<usize>>,
}

impl Scaled {
    fn new(model: &MasterModel) -> Result<Self, MasterError> {
        let inst = model.instance();
        let n = inst.bin_count();
        let pool = model.pool().scenarios();
        let durations: Vec<&Rat> = inst
            .items()
            .iter()
            .flat_map(|it| [&it.nominal, &it.deviation])
            .chain(pool.iter().flat_map(|s| s.values().iter()))
            .chain([inst.capacity(), inst.budget()])
            .collect();
        let d = common_denominator(durations);
        let c = common_denominator(inst.rates().iter());
        let of = |r: &Rat, scale: &BigInt| scaled_i128(r, scale).ok_or(MasterError::Overflow);

        let capacity = of(inst.capacity(), &d)?;
        let rates = inst
            .rates()
            .iter()
            .map(|r| of(r, &c))
            .collect::<Result<Vec<_>, _>>()?;
        let unit = of(&Rat::from_integer(c.clone()), &d)?;
        let mut sizes = Vec::with_capacity(pool.len());
        let mut totals = Vec::with_capacity(pool.len());
        for s in pool {
            let row = inst
                .items()
                .iter()
                .zip(s.values())
                .map(|(it, a)| of(&(&it.nominal + a), &d))
                .collect::<Result<Vec<i128>, _>>()?;
            let mut total: i128 = 0;
            for v in &row {
                total = total.checked_add(*v).ok_or(MasterError::Overflow)?;
            }
            totals.push(total);
            sizes.push(row);
        }
        let cd = &c * &d;
        let cut_floor = (0..=n)
            .map(|k| of(&model.overtime_cut_floor(k), &cd))
            .collect::<Result<Vec<_>, _>>()?;

        // every objective value stays below this, so plain arithmetic is safe later
        let max_rate = rates.iter().copied().max().unwrap_or(0);
        let max_total = totals.iter().copied().max().unwrap_or(0);
        let ceiling = max_rate
            .checked_mul(max_total)
            .and_then(|v| v.checked_mul(n as i128 + 1))
            .and_then(|v| v.checked_add(unit.checked_mul(n as i128 + 1)?))
            .and_then(|v| v.checked_add(*cut_floor.iter().max().unwrap_or(&0)))
            .and_then(|v| v.checked_mul(1 << 20));
        if ceiling.is_none() {
            return Err(MasterError::Overflow);
        }

        let mut classes: Vec<Rat> = Vec::new();
        let mut class_of = Vec::with_capacity(n);
        let mut class_bins: Vec<Vec<usize>> = Vec::new();
        for (j, r) in inst.rates().iter().enumerate() {
            let k = match classes.iter().position(|x| x == r) {
                Some(k) => k,
                None => {
                    classes.push(r.clone());
                    class_bins.push(Vec::new());
                    classes.len() - 1
                }
            };
            class_of.push(k);
            class_bins[k].push(j);
        }

        Ok(Self {
            unit,
            capacity,
            min_rate: rates.iter().copied().min().unwrap_or(0),
            rates,
            sizes,
            totals,
            cut_floor,
            class_of,
            class_bins,
        })
    }
}

struct Search<'a> {
    data: &'a Scaled,
    n: usize,
    /// Items in branching order: nominal size nonincreasing, index on ties.
    order: Vec<usize>,
    /// Hinted bin per item (canonical labels), if guiding the search.
    guide: Option<Vec<usize>>,
    gap_num: i128,
    gap_den: i128,
    deadline: Option<Instant>,

    assign: Vec<usize>,
    /// `[s * n + j]`: scaled load of bin `j` under scenario `s`.
    loads: Vec<i128>,
    overtime: Vec<i128>,
    used: Vec<bool>,
    used_count: usize,
    next_in_class: Vec<usize>,

    best: Option<(i128, Vec<usize>)>,
    min_pruned: i128,
    root_bound: i128,
    nodes: u64,
    timed_out: bool,
}

impl<'a> Search<'a> {
    fn new(model: &MasterModel, data: &'a Scaled) -> Result<Self, MasterError> {
        let inst = model.instance();
        let (m, n) = (inst.item_count(), inst.bin_count());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| inst.items()[b].nominal.cmp(&inst.items()[a].nominal));
        let gap = model.gap();
        let one = Rat::from_integer(1.into());
        let gap = if gap > &one { one } else { gap.clone() };
        let mut s = Self {
            data,
            n,
            order,
            guide: None,
            gap_num: gap.numer().to_i128().ok_or(MasterError::Overflow)?,
            gap_den: gap.denom().to_i128().ok_or(MasterError::Overflow)?,
            deadline: model.deadline(),
            assign: vec![usize::MAX; m],
            loads: vec![0; data.sizes.len() * n],
            overtime: vec![0; data.sizes.len()],
            used: vec![false; n],
            used_count: 0,
            next_in_class: vec![0; data.class_bins.len()],
            best: None,
            min_pruned: i128::MAX,
            root_bound: 0,
            nodes: 0,
            timed_out: false,
        };
        if let Some(hint) = model.hint() {
            if let Some(canonical) = s.canonical_hint(hint) {
                let value = s.evaluate_assignment(&canonical);
                s.best = Some((value, canonical.clone()));
                if model.hint_mode() == HintMode::GuideSearch {
                    s.guide = Some(canonical);
                }
            }
        }
        Ok(s)
    }

    /// Relabels the hint's bins within rate classes so the canonical
    /// new-bin rule reproduces it.
    fn canonical_hint(&self, hint: &Packing) -> Option<Vec<usize>> {
        if hint.bin_count() != self.n || hint.bin_of().len() != self.assign.len() {
            return None;
        }
        let mut relabel = vec![usize::MAX; self.n];
        let mut next = vec![0; self.data.class_bins.len()];
        let mut out = vec![0; self.assign.len()];
        for &i in &self.order {
            let b = hint.bin_of()[i];
            if relabel[b] == usize::MAX {
                let class = self.data.class_of[b];
                relabel[b] = self.data.class_bins[class][next[class]];
                next[class] += 1;
            }
            out[i] = relabel[b];
        }
        Some(out)
    }

    fn evaluate_assignment(&self, assign: &[usize]) -> i128 {
        let d = self.data;
        let mut used = vec![false; self.n];
        for &j in assign {
            used[j] = true;
        }
        let k = used.iter().filter(|&&u| u).count();
        let mut theta = d.cut_floor[k];
        for sizes in &d.sizes {
            let mut loads = vec![0i128; self.n];
            for (i, &j) in assign.iter().enumerate() {
                loads[j] += sizes[i];
            }
            let cost: i128 = loads
                .iter()
                .zip(&d.rates)
                .map(|(l, r)| r * (l - d.capacity).max(0))
                .sum();
            theta = theta.max(cost);
        }
        k as i128 * d.unit + theta
    }

    fn theta_partial(&self) -> i128 {
        self.overtime.iter().copied().max().unwrap_or(0)
    }

    /// Lower bound on every completion of the current partial assignment.
    fn bound(&self, placed: usize) -> i128 {
        let d = self.data;
        let remaining = self.assign.len() - placed;
        let lo = self.used_count.max(1);
        let hi = self.n.min(self.used_count + remaining);
        let theta = self.theta_partial();
        let mut best = i128::MAX;
        for k in lo..=hi.max(lo) {
            let spill = d
                .totals
                .iter()
                .map(|t| (t - k as i128 * d.capacity).max(0))
                .max()
                .unwrap_or(0);
            let t = theta.max(d.min_rate * spill).max(d.cut_floor[k.min(self.n)]);
            best = best.min(k as i128 * d.unit + t);
        }
        best
    }

    fn should_prune(&self, lower: i128) -> bool {
        match &self.best {
            None => false,
            Some((ub, _)) => {
                let scaled = lower
                    .checked_mul(self.gap_den)
                    .zip(ub.checked_mul(self.gap_den - self.gap_num));
                match scaled {
                    Some((l, u)) => l >= u,
                    None => lower >= *ub,
                }
            }
        }
    }

    fn run(&mut self) {
        self.root_bound = self.bound(0);
        self.descend(0);
    }

    fn place(&mut self, item: usize, bin: usize) -> bool {
        let d = self.data;
        let opened = !self.used[bin];
        if opened {
            self.used[bin] = true;
            self.used_count += 1;
            self.next_in_class[d.class_of[bin]] += 1;
        }
        self.assign[item] = bin;
        for (s, sizes) in d.sizes.iter().enumerate() {
            let slot = s * self.n + bin;
            let before = (self.loads[slot] - d.capacity).max(0);
            self.loads[slot] += sizes[item];
            let after = (self.loads[slot] - d.capacity).max(0);
            self.overtime[s] += d.rates[bin] * (after - before);
        }
        opened
    }

    fn unplace(&mut self, item: usize, bin: usize, opened: bool) {
        let d = self.data;
        for (s, sizes) in d.sizes.iter().enumerate() {
            let slot = s * self.n + bin;
            let before = (self.loads[slot] - d.capacity).max(0);
            self.loads[slot] -= sizes[item];
            let after = (self.loads[slot] - d.capacity).max(0);
            self.overtime[s] -= d.rates[bin] * (before - after);
        }
        self.assign[item] = usize::MAX;
        if opened {
            self.used[bin] = false;
            self.used_count -= 1;
            self.next_in_class[d.class_of[bin]] -= 1;
        }
    }

    fn candidates(&self, item: usize) -> Vec<usize> {
        let d = self.data;
        let mut out: Vec<usize> = (0..self.n).filter(|&j| self.used[j]).collect();
        let mut fresh: Vec<usize> = d
            .class_bins
            .iter()
            .zip(&self.next_in_class)
            .filter_map(|(bins, &next)| bins.get(next).copied())
            .collect();
        fresh.sort_unstable();
        out.extend(fresh);
        if let Some(guide) = &self.guide {
            let want = guide[item];
            if let Some(pos) = out.iter().position(|&j| j == want) {
                out.remove(pos);
                out.insert(0, want);
            }
        }
        out
    }

    fn descend(&mut self, placed: usize) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline && self.best.is_some() {
                    self.timed_out = true;
                    return;
                }
            }
        }
        if placed == self.assign.len() {
            let k = self.used_count;
            let value = k as i128 * self.data.unit + self.theta_partial().max(self.data.cut_floor[k]);
            match &self.best {
                Some((ub, _)) if value >= *ub => {}
                _ => self.best = Some((value, self.assign.clone())),
            }
            return;
        }
        let lower = self.bound(placed);
        if self.should_prune(lower) {
            self.min_pruned = self.min_pruned.min(lower);
            return;
        }
        let item = self.order[placed];
        for bin in self.candidates(item) {
            let opened = self.place(item, bin);
            self.descend(placed + 1);
            self.unplace(item, bin, opened);
            if self.timed_out {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::master::{build_master, CutSet, ScenarioPool};
    use crate::model::{Item, RebpInstance, Scenario};
    use crate::rational::{int, rat};

    fn inst(pairs: &[(i64, i64)], n: usize, v: i64, budget: i64) -> RebpInstance {
        let items = pairs.iter().map(|&(a, d)| Item::new(int(a), int(d))).collect();
        RebpInstance::with_uniform_rate(items, n, int(v), int(1), int(budget)).unwrap()
    }

    #[test]
    fn single_item() {
        let inst = inst(&[(2, 1)], 1, 5, 1);
        let model = build_master(&inst, ScenarioPool::new(1), CutSet::None).unwrap();
        let sol = solve_master_internal(&model, DEFAULT_MAX_ITEMS).unwrap();
        assert_eq!(sol.objective, int(1));
        assert_eq!(sol.theta, int(0));
        assert_eq!(sol.y(), vec![true]);
    }

    #[test]
    fn three_identical_items() {
        let inst = inst(&[(4, 1), (4, 1), (4, 1)], 2, 6, 1);
        let mut model = build_master(&inst, ScenarioPool::new(3), CutSet::None).unwrap();
        let sol = solve_master_internal(&model, DEFAULT_MAX_ITEMS).unwrap();
        assert_eq!(sol.objective, int(4));
        assert_eq!(sol.theta, int(2));
        // with the first item deviating, it can sit alone: loads 5 and 8
        model
            .add_scenario(Scenario::new(&inst, vec![int(1), int(0), int(0)]).unwrap())
            .unwrap();
        let sol = solve_master_internal(&model, DEFAULT_MAX_ITEMS).unwrap();
        assert_eq!(sol.objective, int(4));
        let alone = sol.packing.bins().into_iter().find(|b| b.len() == 1).unwrap();
        assert_eq!(alone, vec![0]);
    }

    #[test]
    fn too_large() {
        let pairs: Vec<(i64, i64)> = (0..15).map(|_| (1, 1)).collect();
        let inst = inst(&pairs, 2, 6, 1);
        let model = build_master(&inst, ScenarioPool::new(15), CutSet::None).unwrap();
        assert!(matches!(
            solve_master_internal(&model, DEFAULT_MAX_ITEMS),
            Err(MasterError::TooLargeForInternal { items: 15, max: 14 })
        ));
    }

    #[test]
    fn gap_is_respected() {
        let pairs = [(5, 2), (4, 2), (4, 1), (3, 1), (3, 1), (2, 1), (2, 1)];
        let inst = RebpInstance::with_uniform_rate(
            pairs.iter().map(|&(a, d)| Item::new(int(a), int(d))).collect(),
            4,
            int(7),
            rat(1, 2),
            int(3),
        )
        .unwrap();
        let mut model = build_master(&inst, ScenarioPool::new(7), CutSet::None).unwrap();
        let exact = solve_master_internal(&model, DEFAULT_MAX_ITEMS).unwrap();
        assert_eq!(exact.gap, int(0));
        model.set_gap(rat(1, 5));
        let loose = solve_master_internal(&model, DEFAULT_MAX_ITEMS).unwrap();
        assert!(loose.gap <= rat(1, 5));
        assert!(loose.objective * (int(1) - rat(1, 5)) <= exact.objective);
    }

    #[test]
    fn cuts_do_not_change_optimum() {
        let pairs = [(5, 2), (4, 2), (4, 1), (3, 1), (2, 1)];
        let inst = RebpInstance::with_uniform_rate(
            pairs.iter().map(|&(a, d)| Item::new(int(a), int(d))).collect(),
            3,
            int(7),
            rat(1, 2),
            int(2),
        )
        .unwrap();
        let values: Vec<Rat> = [CutSet::None, CutSet::BinOrder, CutSet::BinOrderAndOvertime]
            .into_iter()
            .map(|cuts| {
                let model = build_master(&inst, ScenarioPool::new(5), cuts).unwrap();
                solve_master_internal(&model, DEFAULT_MAX_ITEMS).unwrap().objective
            })
            .collect();
        assert_eq!(values[0], values[1]);
        // the overtime cut already prices the worst case, so it can only be higher
        assert!(values[2] >= values[1]);
    }

    #[test]
    fn unequal_rates_use_cheaper_bins() {
        let data = crate::model::RebpData {
            items: vec![Item::new(int(6), int(1)), Item::new(int(6), int(1))],
            bin_count: 2,
            capacity: int(5),
            rates: vec![int(3), int(1)],
            budget: int(1),
        };
        let inst = RebpInstance::new(data).unwrap();
        let model = build_master(&inst, ScenarioPool::new(2), CutSet::None).unwrap();
        let sol = solve_master_internal(&model, DEFAULT_MAX_ITEMS).unwrap();
        // one bin at rate 1: 1 + 7 = 8; two bins: 2 + 3 + 1 = 6
        assert_eq!(sol.objective, int(6));
    }

    #[test]
    fn hints_seed_the_incumbent() {
        let inst = inst(&[(4, 1), (4, 1), (4, 1)], 2, 6, 1);
        for mode in [HintMode::GuideSearch, HintMode::ConstructStart] {
            let mut model = build_master(&inst, ScenarioPool::new(3), CutSet::None).unwrap();
            model.set_hint(Some(Packing::from_assignment(2, vec![1, 1, 0]).unwrap()), mode);
            let sol = solve_master_internal(&model, DEFAULT_MAX_ITEMS).unwrap();
            assert_eq!(sol.objective, int(4));
        }
    }
}
