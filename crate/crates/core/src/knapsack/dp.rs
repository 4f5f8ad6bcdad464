//! Least-weight table and the fractional-item sweep.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{sort_for_dp, DpLimits, KnapsackError, ProfitScaling, WeightScaling};
use crate::model::{CkInstance, CkSolution};
use crate::rational::{common_denominator, positive_part, Rat};

/// Least weights `ζ(P, k)` over the first `k` items of the slope order.
///
/// Entry `(P, k)` is the least total weight of a subset of the first `k`
/// items whose scaled profit is at least `P`. Weights above the capacity are
/// stored as the infeasible sentinel.
#[derive(Debug, Clone)]
pub struct DpTable {
    rows: usize,
    cols: usize,
    infeasible: u64,
    // column-major: entry (P, k) lives at k * rows + P
    weights: Vec<u64>,
    take: Vec<bool>,
    profits: Vec<u64>,
    uppers: Vec<u64>,
    order: Vec<usize>,
}

impl DpTable {
    /// Builds the table directly from scaled data given in table order.
    pub fn from_scaled(
        profits: &[u64],
        uppers: &[u64],
        capacity: u64,
        profit_bound: u64,
        limits: DpLimits,
    ) -> Result<Self, KnapsackError> {
        assert_eq!(profits.len(), uppers.len(), "one weight per profit");
        let n = profits.len();
        let cells = (profit_bound as u128 + 1) * (n as u128 + 1);
        if cells > limits.max_cells {
            return Err(KnapsackError::ProfitBoundOverflow {
                cells,
                cap: limits.max_cells,
            });
        }
        let rows = profit_bound as usize + 1;
        let cols = n + 1;
        let infeasible = capacity.saturating_add(1);
        let mut weights = vec![infeasible; rows * cols];
        let mut take = vec![false; rows * cols];
        weights[0] = 0;
        for k in 1..cols {
            let (done, rest) = weights.split_at_mut(k * rows);
            let prev = &done[(k - 1) * rows..];
            let cur = &mut rest[..rows];
            let taken = &mut take[k * rows..(k + 1) * rows];
            let p = profits[k - 1];
            let u = uppers[k - 1];
            for level in 0..rows {
                let from = (level as u64).saturating_sub(p) as usize;
                let skip = prev[level];
                let with = match prev[from] {
                    w if w >= infeasible => infeasible,
                    w => {
                        let total = w.saturating_add(u);
                        if total > capacity {
                            infeasible
                        } else {
                            total
                        }
                    }
                };
                // ties keep the item out
                if with < skip {
                    cur[level] = with;
                    taken[level] = true;
                } else {
                    cur[level] = skip;
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            infeasible,
            weights,
            take,
            profits: profits.to_vec(),
            uppers: uppers.to_vec(),
            order: (0..n).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> usize {
        self.cols
    }

    pub fn profit_bound(&self) -> u64 {
        (self.rows - 1) as u64
    }

    /// Table position to instance item index.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `Some(ζ(P, k))`, or `None` when no subset of the prefix reaches `P`
    /// within the capacity.
    pub fn weight(&self, level: u64, k: usize) -> Option<u64> {
        if level as usize >= self.rows || k >= self.cols {
            return None;
        }
        let w = self.weights[k * self.rows + level as usize];
        (w < self.infeasible).then_some(w)
    }

    pub fn took(&self, level: u64, k: usize) -> bool {
        self.take[k * self.rows + level as usize]
    }

    /// Table positions of a least-weight subset behind entry `(P, k)`.
    pub fn reconstruct(&self, level: u64, k: usize) -> Option<Vec<usize>> {
        self.weight(level, k)?;
        let mut chosen = Vec::new();
        let mut p = level;
        for col in (1..=k).rev() {
            if self.took(p, col) {
                chosen.push(col - 1);
                p = p.saturating_sub(self.profits[col - 1]);
            }
        }
        chosen.reverse();
        Some(chosen)
    }

    /// Boundary column, monotonicity in both indices, and the recursion.
    pub fn check_invariants(&self) -> Result<(), String> {
        let w = |p: usize, k: usize| self.weights[k * self.rows + p];
        if w(0, 0) != 0 {
            return Err("entry (0, 0) must be 0".into());
        }
        for p in 1..self.rows {
            if w(p, 0) != self.infeasible {
                return Err(format!("entry ({p}, 0) must be infeasible"));
            }
        }
        for k in 0..self.cols {
            for p in 0..self.rows {
                if p > 0 && w(p, k) < w(p - 1, k) {
                    return Err(format!("column {k} decreases at level {p}"));
                }
                if k == 0 {
                    continue;
                }
                if w(p, k) > w(p, k - 1) {
                    return Err(format!("row {p} increases at column {k}"));
                }
                let from = (p as u64).saturating_sub(self.profits[k - 1]) as usize;
                let with = match w(from, k - 1) {
                    x if x >= self.infeasible => self.infeasible,
                    x => {
                        let t = x.saturating_add(self.uppers[k - 1]);
                        if t >= self.infeasible {
                            self.infeasible
                        } else {
                            t
                        }
                    }
                };
                if w(p, k) != with.min(w(p, k - 1)) {
                    return Err(format!("recursion fails at ({p}, {k})"));
                }
            }
        }
        Ok(())
    }
}

/// Result of one table solve.
#[derive(Debug, Clone)]
pub struct DpOutcome {
    pub solution: CkSolution,
    /// Value implied by the table: base profit plus `K·P` plus the fractional
    /// item's gain. Equals `solution.value` in exact mode, never exceeds it.
    pub claimed: Rat,
    pub table_rows: usize,
    pub unit: Rat,
}

/// Builds the table for `instance` in slope order under `scaling`.
pub fn build_dp_table(
    instance: &CkInstance,
    scaling: &ProfitScaling,
) -> Result<DpTable, KnapsackError> {
    let weights = WeightScaling::new(instance)?;
    build_with(instance, scaling, &weights, DpLimits::default())
}

fn build_with(
    instance: &CkInstance,
    scaling: &ProfitScaling,
    weights: &WeightScaling,
    limits: DpLimits,
) -> Result<DpTable, KnapsackError> {
    let order = sort_for_dp(instance);
    let profits: Vec<u64> = order.iter().map(|&j| scaling.profits[j]).collect();
    let uppers: Vec<u64> = order.iter().map(|&j| weights.uppers[j]).collect();
    let mut table = DpTable::from_scaled(
        &profits,
        &uppers,
        weights.capacity,
        scaling.profit_bound,
        limits,
    )?;
    table.order = order;
    Ok(table)
}

/// Exact optimum with default limits.
pub fn solve_dp(instance: &CkInstance) -> Result<CkSolution, KnapsackError> {
    Ok(solve_dp_with(instance, DpLimits::default())?.solution)
}

pub fn solve_dp_with(instance: &CkInstance, limits: DpLimits) -> Result<DpOutcome, KnapsackError> {
    let scaling = ProfitScaling::exact(instance)?;
    solve_scaled(instance, &scaling, limits)
}

/// Candidate chosen by the sweep: profit level, table column, and the
/// fractional item's table position with its amount in weight units.
#[derive(Debug, Clone, Copy)]
struct Choice {
    level: u64,
    column: usize,
    fractional: Option<(usize, u64)>,
}

/// Builds the table and sweeps every fractional-item candidate against it.
pub fn solve_scaled(
    instance: &CkInstance,
    scaling: &ProfitScaling,
    limits: DpLimits,
) -> Result<DpOutcome, KnapsackError> {
    let weights = WeightScaling::new(instance)?;
    let table = build_with(instance, scaling, &weights, limits)?;
    let n = instance.len();

    // per table position: γ' = min(γ, 0) and β of the fractional candidate
    let items = instance.items();
    let gammas: Vec<Rat> = table
        .order
        .iter()
        .map(|&j| {
            let g = &items[j].gamma;
            if g.is_positive() {
                Rat::zero()
            } else {
                g.clone()
            }
        })
        .collect();
    let w_scale = Rat::from_integer(weights.scale.clone());
    let betas: Vec<Rat> = table
        .order
        .iter()
        .map(|&j| &items[j].beta / &w_scale)
        .collect();

    let choice = sweep_integer(&table, &weights, &scaling.unit, &gammas, &betas)
        .unwrap_or_else(|| sweep_rational(&table, &weights, &scaling.unit, &gammas, &betas));

    let full: Vec<usize> = table
        .reconstruct(choice.level, choice.column)
        .expect("sweep only visits feasible entries")
        .into_iter()
        .map(|t| table.order[t])
        .collect();
    let mut claimed = instance.base_value() + &scaling.unit * Rat::from_integer(choice.level.into());
    let partial = choice.fractional.map(|(t, amount)| {
        claimed += positive_part(&gammas[t] + &betas[t] * Rat::from_integer(amount.into()));
        (table.order[t], weights.to_rat(amount))
    });
    let solution = CkSolution::from_extreme_point(instance, full, partial);
    debug_assert!(solution.value >= claimed);
    debug_assert!(n == 0 || table.columns() == n + 1);
    Ok(DpOutcome {
        solution,
        claimed,
        table_rows: table.rows(),
        unit: scaling.unit.clone(),
    })
}

/// Candidates in sweep order: fractional position from last to "none", and
/// levels ascending until the column runs out of feasible entries.
fn for_each_candidate(
    table: &DpTable,
    weights: &WeightScaling,
    mut visit: impl FnMut(Choice) -> bool,
) -> bool {
    let n = table.columns() - 1;
    for f_pos in (0..=n).rev() {
        let column = f_pos;
        for level in 0..table.rows() as u64 {
            let Some(zeta) = table.weight(level, column) else {
                break;
            };
            let fractional = (f_pos < n).then(|| {
                let room = weights.capacity - zeta;
                (f_pos, table.uppers[f_pos].min(room))
            });
            if !visit(Choice {
                level,
                column,
                fractional,
            }) {
                return false;
            }
        }
    }
    true
}

/// Sweep on `i128` after clearing every denominator; `None` on overflow.
fn sweep_integer(
    table: &DpTable,
    weights: &WeightScaling,
    unit: &Rat,
    gammas: &[Rat],
    betas: &[Rat],
) -> Option<Choice> {
    let denom: BigInt =
        common_denominator(gammas.iter().chain(betas).chain(std::iter::once(unit)));
    let d = Rat::from_integer(denom);
    let to_i128 = |r: &Rat| (r * &d).to_integer().to_i128();
    let kd = to_i128(unit)?;
    let a: Vec<i128> = gammas.iter().map(to_i128).collect::<Option<_>>()?;
    let b: Vec<i128> = betas.iter().map(to_i128).collect::<Option<_>>()?;

    let mut best: Option<(i128, Choice)> = None;
    let completed = for_each_candidate(table, weights, |c| {
        let Some(base) = (c.level as i128).checked_mul(kd) else {
            return false;
        };
        let extra = match c.fractional {
            None => Some(0),
            Some((t, amount)) => b[t]
                .checked_mul(amount as i128)
                .and_then(|v| v.checked_add(a[t]))
                .map(|v| v.max(0)),
        };
        let Some(value) = extra.and_then(|e| e.checked_add(base)) else {
            return false;
        };
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, c));
        }
        true
    });
    if completed {
        best.map(|(_, c)| c)
    } else {
        None
    }
}

fn sweep_rational(
    table: &DpTable,
    weights: &WeightScaling,
    unit: &Rat,
    gammas: &[Rat],
    betas: &[Rat],
) -> Choice {
    let mut best: Option<(Rat, Choice)> = None;
    for_each_candidate(table, weights, |c| {
        let mut value = unit * Rat::from_integer(c.level.into());
        if let Some((t, amount)) = c.fractional {
            value += positive_part(&gammas[t] + &betas[t] * Rat::from_integer(amount.into()));
        }
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, c));
        }
        true
    });
    best.expect("level 0 of the last column is always feasible").1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knapsack::brute_force_ck;
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
    fn single_item_column() {
        let t = DpTable::from_scaled(&[3], &[2], 10, 3, DpLimits::default()).unwrap();
        let col: Vec<_> = (0..4).map(|p| t.weight(p, 1)).collect();
        assert_eq!(col, vec![Some(0), Some(2), Some(2), Some(2)]);
        t.check_invariants().unwrap();
    }

    #[test]
    fn two_item_entries() {
        let t = DpTable::from_scaled(&[2, 2], &[1, 4], 10, 4, DpLimits::default()).unwrap();
        assert_eq!(t.weight(4, 2), Some(5));
        assert_eq!(t.weight(2, 2), Some(1));
        assert_eq!(t.weight(3, 1), None);
        assert_eq!(t.reconstruct(4, 2), Some(vec![0, 1]));
        assert_eq!(t.reconstruct(2, 2), Some(vec![0]));
        t.check_invariants().unwrap();
    }

    #[test]
    fn cell_cap_is_enforced() {
        let err = DpTable::from_scaled(&[5], &[1], 1, 99, DpLimits { max_cells: 100 });
        assert!(matches!(
            err,
            Err(KnapsackError::ProfitBoundOverflow { cells: 200, cap: 100 })
        ));
    }

    #[test]
    fn three_item_example() {
        let inst = ck(&[(-2, 2, 3), (-1, 1, 4), (0, 1, 2)], 5);
        let out = solve_dp_with(&inst, DpLimits::default()).unwrap();
        assert_eq!(out.solution.value, int(6));
        assert_eq!(out.claimed, int(6));
        out.solution.check(&inst).unwrap();
        assert!(out.solution.slope_dominance_holds(&inst));
        assert_eq!(brute_force_ck(&inst).unwrap().value, int(6));
    }

    #[test]
    fn subset_sum_reductions() {
        // yes-instance: 1 + 3 = 4
        let inst = ck(&[(-1, 2, 1), (-2, 2, 2), (-3, 2, 3)], 4);
        assert_eq!(solve_dp(&inst).unwrap().value, int(4));
        // no-instance: nothing sums to 3
        let inst = ck(&[(-2, 2, 2), (-4, 2, 4), (-5, 2, 5)], 3);
        let v = solve_dp(&inst).unwrap().value;
        assert!(v < int(3));
        assert_eq!(v, brute_force_ck(&inst).unwrap().value);
    }

    #[test]
    fn rational_data_and_positive_intercepts() {
        let inst = CkInstance::new(
            vec![
                CkItem::new(rat(1, 3), rat(1, 2), rat(5, 2)),
                CkItem::new(rat(-7, 4), int(3), rat(3, 2)),
                CkItem::new(int(2), rat(2, 3), int(1)),
            ],
            rat(7, 3),
        )
        .unwrap();
        let sol = solve_dp(&inst).unwrap();
        sol.check(&inst).unwrap();
        assert_eq!(sol.value, brute_force_ck(&inst).unwrap().value);
    }

    #[test]
    fn zero_capacity_and_empty() {
        let inst = ck(&[(-2, 2, 3), (4, 1, 2)], 0);
        assert_eq!(solve_dp(&inst).unwrap().value, int(4));
        let inst = ck(&[], 4);
        assert_eq!(solve_dp(&inst).unwrap().value, int(0));
    }

    #[test]
    fn built_tables_satisfy_invariants() {
        let inst = ck(&[(-2, 2, 3), (-1, 1, 4), (0, 1, 2), (-3, 5, 1)], 6);
        let t = build_dp_table(&inst, &ProfitScaling::exact(&inst).unwrap()).unwrap();
        t.check_invariants().unwrap();
        assert_eq!(t.order(), &[3, 0, 2, 1]);
    }
}
