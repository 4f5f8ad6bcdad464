//! Row-and-column generation for the robust problem.
//!
//! The master is solved over a growing scenario pool; each master packing is
//! handed to separation, and a violated worst case joins the pool. Masters
//! are first solved to a loose gap `τ0`; once separation finds nothing the
//! gap is tightened to `τ1` once, and the loop ends at the next clean
//! separation. Separation may start with the approximation scheme; the first
//! time it reports no violation it is repeated exactly, and stays exact.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use thiserror::Error;

use crate::master::{
    build_master, solve_master, CutSet, HintMode, MasterError, MasterSolution, MasterSolver,
    ScenarioPool,
};
use crate::model::{Packing, RebpInstance, Scenario};
use crate::oracles::{maximal_vertices, OracleError};
use crate::rational::{common_denominator, rat, scaled_i128, to_f64, Rat};
use crate::separation::{separate, SeparationError, SeparationMode, SeparationResult};

#[derive(Debug, Error)]
pub enum RcgError {
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeparationSchedule {
    ExactOnly,
    /// Approximate with this ε until the first clean separation, then exact.
    ApproximateThenExact(Rat),
}

#[derive(Debug, Clone)]
pub struct RcgConfig {
    pub tau0: Rat,
    pub tau1: Rat,
    pub separation: SeparationSchedule,
    pub iteration_limit: usize,
    pub time_limit: Option<Duration>,
    pub cuts: CutSet,
    pub solver: MasterSolver,
    pub hint_mode: HintMode,
}

impl Default for RcgConfig {
    fn default() -> Self {
        Self {
            tau0: rat(1, 5),
            tau1: rat(1, 20),
            separation: SeparationSchedule::ApproximateThenExact(rat(1, 10)),
            iteration_limit: 1000,
            time_limit: None,
            cuts: CutSet::None,
            solver: MasterSolver::default(),
            hint_mode: HintMode::GuideSearch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Exact separation found no violated scenario at the final gap.
    Converged,
    IterationLimit,
    TimeLimit,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::IterationLimit => "iteration-limit",
            Termination::TimeLimit => "time-limit",
        }
    }
}

/// One master solve followed by separation.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// 0 while the loose gap is in force, 1 after tightening.
    pub phase: usize,
    pub pool_size: usize,
    pub gap: Rat,
    pub proved_gap: Rat,
    pub master_objective: Rat,
    pub theta: Rat,
    pub eta: Rat,
    pub violated: bool,
    pub exact_separation: bool,
    /// The separated scenario was added to the pool.
    pub added: Option<Scenario>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RcgTrace {
    pub records: Vec<IterationRecord>,
}

impl RcgTrace {
    pub const CSV_HEADER: &'static str =
        "iteration,phase,pool_size,gap,master_objective,theta,eta,violated,separation_mode,elapsed_ms";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.iteration,
                r.phase,
                r.pool_size,
                to_f64(&r.gap),
                to_f64(&r.master_objective),
                to_f64(&r.theta),
                to_f64(&r.eta),
                r.violated,
                if r.exact_separation { "exact" } else { "approximate" },
                r.elapsed.as_millis()
            );
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RcgOutcome {
    pub solution: MasterSolution,
    pub termination: Termination,
    pub trace: RcgTrace,
    pub pool: ScenarioPool,
    /// Worst case found by the last separation of `solution`.
    pub worst_case: Scenario,
    /// `open bins + η*` for the returned packing. It is the robust cost when
    /// the last separation was exact.
    pub robust_objective: Rat,
}

pub fn solve_rebp(instance: &RebpInstance, config: &RcgConfig) -> Result<RcgOutcome, RcgError> {
    let start = Instant::now();
    let deadline = config.time_limit.map(|t| start + t);
    let mut model = build_master(instance, ScenarioPool::new(instance.item_count()), config.cuts)?;
    model.set_deadline(deadline);
    let mut tau = config.tau0.clone();
    let mut phase = 0;
    let mut exact = matches!(config.separation, SeparationSchedule::ExactOnly);
    let mut trace = RcgTrace::default();
    let mut last: Option<(MasterSolution, SeparationResult)> = None;

    let termination = loop {
        if trace.records.len() >= config.iteration_limit {
            break Termination::IterationLimit;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) && last.is_some() {
            break Termination::TimeLimit;
        }
        model.set_gap(tau.clone());
        let solution = solve_master(&model, &config.solver)?;
        let mut sep = run_separation(instance, &solution, exact, &config.separation)?;
        if !sep.violated && !exact {
            exact = true;
            sep = run_separation(instance, &solution, true, &config.separation)?;
        }
        let added = sep.violated.then(|| sep.scenario.clone());
        trace.records.push(IterationRecord {
            iteration: trace.records.len() + 1,
            phase,
            pool_size: model.pool().len(),
            gap: tau.clone(),
            proved_gap: solution.gap.clone(),
            master_objective: solution.objective.clone(),
            theta: solution.theta.clone(),
            eta: sep.eta.clone(),
            violated: sep.violated,
            exact_separation: sep.mode.is_exact(),
            added: added.clone(),
            elapsed: start.elapsed(),
        });
        let timed_out = solution.timed_out;
        let packing = solution.packing.clone();
        last = Some((solution, sep));
        if timed_out {
            break Termination::TimeLimit;
        }
        if let Some(scenario) = added {
            model.add_scenario(scenario)?;
            model.set_hint(Some(packing), config.hint_mode);
        } else if phase == 0 && config.tau0 != config.tau1 {
            tau = config.tau1.clone();
            phase = 1;
            model.set_hint(Some(packing), config.hint_mode);
        } else {
            break Termination::Converged;
        }
    };

    let (solution, sep) = match last {
        Some(pair) => pair,
        None => {
            // the limit struck before any master solve; solve once without it
            model.set_gap(tau);
            let solution = solve_master(&model, &config.solver)?;
            let sep = run_separation(instance, &solution, true, &config.separation)?;
            (solution, sep)
        }
    };
    let robust_objective =
        Rat::from_integer(BigInt::from(solution.packing.open_count())) + &sep.eta;
    Ok(RcgOutcome {
        solution,
        termination,
        trace,
        pool: model.pool().clone(),
        worst_case: sep.scenario,
        robust_objective,
    })
}

fn run_separation(
    instance: &RebpInstance,
    solution: &MasterSolution,
    exact: bool,
    schedule: &SeparationSchedule,
) -> Result<SeparationResult, SeparationError> {
    let mode = match (exact, schedule) {
        (false, SeparationSchedule::ApproximateThenExact(eps)) => {
            SeparationMode::Approximate(eps.clone())
        }
        _ => SeparationMode::Exact,
    };
    separate(instance, &solution.packing, &solution.theta, &mode)
}

pub const ROBUST_MAX_ITEMS: usize = 8;
pub const ROBUST_MAX_BINS: usize = 4;

/// Exact robust optimum found by enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobustOptimum {
    pub objective: Rat,
    pub packing: Packing,
    pub worst_case: Scenario,
}

/// Minimizes `open bins + max_a overtime` over all packings.
///
/// The inner maximum runs over the vertices of the uncertainty set that use
/// the whole reachable budget; the overtime is convex and nondecreasing in
/// `a`, so one of them attains it. Bins with equal rates are interchangeable,
/// so a new bin is only ever the lowest unused one of its rate.
pub fn robust_brute_force(instance: &RebpInstance) -> Result<RobustOptimum, OracleError> {
    let (m, n) = (instance.item_count(), instance.bin_count());
    if m > ROBUST_MAX_ITEMS {
        return Err(OracleError::TooLarge {
            what: "robust enumeration item count",
            size: m as u64,
            max: ROBUST_MAX_ITEMS as u64,
        });
    }
    if n > ROBUST_MAX_BINS {
        return Err(OracleError::TooLarge {
            what: "robust enumeration bin count",
            size: n as u64,
            max: ROBUST_MAX_BINS as u64,
        });
    }
    let deviation: Vec<Rat> = instance.items().iter().map(|it| it.deviation.clone()).collect();
    let vertices = maximal_vertices(&deviation, instance.budget())?;

    let d = common_denominator(
        instance
            .items()
            .iter()
            .flat_map(|it| [&it.nominal, &it.deviation])
            .chain(vertices.iter().flat_map(|v| v.values().iter()))
            .chain([instance.capacity()]),
    );
    let c = common_denominator(instance.rates().iter());
    let scale = |r: &Rat, s: &BigInt| scaled_i128(r, s).expect("oracle data fits 128 bits");
    let sizes: Vec<Vec<i128>> = vertices
        .iter()
        .map(|v| {
            instance
                .items()
                .iter()
                .zip(v.values())
                .map(|(it, a)| scale(&(&it.nominal + a), &d))
                .collect()
        })
        .collect();
    let mut enumerator = Enumerator {
        n,
        capacity: scale(instance.capacity(), &d),
        rates: instance.rates().iter().map(|r| scale(r, &c)).collect(),
        unit: scale(&Rat::from_integer(c.clone()), &d),
        sizes,
        same_rate_before: (0..n)
            .map(|j| (0..j).rev().find(|&k| instance.rates()[k] == instance.rates()[j]))
            .collect(),
        loads: vec![0; vertices.len() * n],
        assign: vec![0; m],
        used: vec![false; n],
        best: None,
    };
    enumerator.descend(0);
    let (value, assign, worst) = enumerator.best.expect("some packing exists");
    let objective = Rat::new(BigInt::from(value), &c * &d);
    let packing = Packing::from_assignment(n, assign).expect("assignment uses valid bins");
    Ok(RobustOptimum {
        objective,
        packing,
        worst_case: vertices[worst].clone(),
    })
}

struct Enumerator {
    n: usize,
    capacity: i128,
    rates: Vec<i128>,
    unit: i128,
    sizes: Vec<Vec<i128>>,
    same_rate_before: Vec<Option<usize>>,
    loads: Vec<i128>,
    assign: Vec<usize>,
    used: Vec<bool>,
    best: Option<(i128, Vec<usize>, usize)>,
}

impl Enumerator {
    fn descend(&mut self, i: usize) {
        if i == self.assign.len() {
            self.evaluate();
            return;
        }
        for j in 0..self.n {
            if !self.used[j] {
                if let Some(k) = self.same_rate_before[j] {
                    if !self.used[k] {
                        continue;
                    }
                }
            }
            let opened = !self.used[j];
            self.used[j] = true;
            self.assign[i] = j;
            for (v, sizes) in self.sizes.iter().enumerate() {
                self.loads[v * self.n + j] += sizes[i];
            }
            self.descend(i + 1);
            for (v, sizes) in self.sizes.iter().enumerate() {
                self.loads[v * self.n + j] -= sizes[i];
            }
            if opened {
                self.used[j] = false;
            }
        }
    }

    fn evaluate(&mut self) {
        let open = self.used.iter().filter(|&&u| u).count() as i128;
        let mut worst = (i128::MIN, 0);
        for v in 0..self.sizes.len() {
            let cost: i128 = (0..self.n)
                .map(|j| self.rates[j] * (self.loads[v * self.n + j] - self.capacity).max(0))
                .sum();
            if cost > worst.0 {
                worst = (cost, v);
            }
        }
        let value = open * self.unit + worst.0;
        if self.best.as_ref().is_none_or(|(b, _, _)| value < *b) {
            self.best = Some((value, self.assign.clone(), worst.1));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Item;
    use crate::rational::int;

    fn inst(pairs: &[(i64, i64)], n: usize, v: i64, budget: i64) -> RebpInstance {
        let items = pairs.iter().map(|&(a, d)| Item::new(int(a), int(d))).collect();
        RebpInstance::with_uniform_rate(items, n, int(v), int(1), int(budget)).unwrap()
    }

    #[test]
    fn three_identical_items() {
        let inst = inst(&[(4, 1), (4, 1), (4, 1)], 2, 6, 1);
        let oracle = robust_brute_force(&inst).unwrap();
        assert_eq!(oracle.objective, int(5));
        let out = solve_rebp(&inst, &RcgConfig::default()).unwrap();
        assert_eq!(out.termination, Termination::Converged);
        assert_eq!(out.robust_objective, int(5));
        assert_eq!(out.solution.objective, int(5));
        let last = out.trace.records.last().unwrap();
        assert!(!last.violated && last.exact_separation);
    }

    #[test]
    fn zero_budget_needs_one_separation() {
        let inst = inst(&[(4, 1), (3, 1)], 2, 6, 0);
        let config = RcgConfig {
            tau0: int(0),
            tau1: int(0),
            ..RcgConfig::default()
        };
        let out = solve_rebp(&inst, &config).unwrap();
        assert_eq!(out.trace.records.len(), 1);
        assert_eq!(out.pool.len(), 1);
        assert_eq!(out.robust_objective, robust_brute_force(&inst).unwrap().objective);
    }

    #[test]
    fn roomy_bins_have_no_overtime() {
        let inst = inst(&[(4, 1), (3, 1), (2, 2)], 2, 100, 3);
        let config = RcgConfig {
            tau1: rat(1, 5),
            ..RcgConfig::default()
        };
        let out = solve_rebp(&inst, &config).unwrap();
        assert_eq!(out.robust_objective, int(1));
        assert_eq!(out.solution.theta, int(0));
        assert_eq!(out.trace.records.len(), 1);
    }

    #[test]
    fn single_item_closed_form() {
        // 1 + c (ā + min(â, Ω) − V)_+ = 1 + (4 + 2 − 5) = 2
        let inst = inst(&[(4, 3)], 1, 5, 2);
        assert_eq!(robust_brute_force(&inst).unwrap().objective, int(2));
    }

    #[test]
    fn iteration_limit_is_reported() {
        let inst = inst(&[(4, 1), (4, 1), (4, 1)], 2, 6, 1);
        let config = RcgConfig {
            iteration_limit: 1,
            ..RcgConfig::default()
        };
        let out = solve_rebp(&inst, &config).unwrap();
        assert_eq!(out.termination, Termination::IterationLimit);
        assert_eq!(out.trace.records.len(), 1);
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let inst = inst(&[(4, 1), (4, 1), (4, 1)], 2, 6, 1);
        let out = solve_rebp(&inst, &RcgConfig::default()).unwrap();
        let csv = out.trace.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], RcgTrace::CSV_HEADER);
        assert_eq!(lines.len(), out.trace.records.len() + 1);
    }

    #[test]
    fn oracle_guards() {
        let pairs: Vec<(i64, i64)> = (0..9).map(|_| (1, 1)).collect();
        assert!(robust_brute_force(&inst(&pairs, 2, 5, 1)).is_err());
        assert!(robust_brute_force(&inst(&[(1, 1)], 5, 5, 1)).is_err());
    }
}
