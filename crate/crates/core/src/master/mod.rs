//! Relaxed master problem over a finite scenario pool.
//!
//! ```text
//! min  Σ_j y_j + θ
//! s.t. Σ_j z_ij = 1                                   every item i
//!      z_ij <= y_j                                    every i, j
//!      Σ_i z_ij (ā_i + a_i) − V y_j <= α_j(a)         every pooled a, bin j
//!      Σ_j c_j α_j(a) <= θ                            every pooled a
//!      y, z binary;  α, θ >= 0
//! ```
//!
//! With equal rates two families of valid cuts may be added: bin ordering
//! `y_j >= y_{j+1}` and the overtime bound
//! `(1 − y_{j+1}) · c (Σ ā + min(Ω, Σ â) − jV) <= θ`.

mod bnb;
mod external;

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::lpfile::{LpModel, Objective, RowSense, VarKind};
use crate::model::{bin_overflows, ModelError, Packing, RebpInstance, Scenario};
use crate::rational::{positive_part, to_f64, Rat};

pub use bnb::{solve_master_internal, DEFAULT_MAX_ITEMS};
pub use external::{
    invoke_solver, parse_solution_file, solve_master_external, ExternalSolver, ParsedSolution,
};

#[derive(Debug, Error)]
pub enum MasterError {
    #[error("symmetry-breaking cuts require equal overtime rates")]
    CutsRequireEqualCosts,
    #[error("scenario is already in the pool")]
    DuplicateScenario,
    #[error("internal solver handles at most {max} items, got {items}")]
    TooLargeForInternal { items: usize, max: usize },
    #[error("master problem has no feasible packing")]
    Infeasible,
    #[error("scaled master data overflow 128-bit integers")]
    Overflow,
    #[error("external solver `{0}` could not be started")]
    SolverNotFound(String),
    #[error("cannot read solver output: {0}")]
    ParseError(String),
    #[error("external solver reported no feasible solution")]
    SolverReportedInfeasible,
    #[error("solution fails verification: {0}")]
    Verification(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSet {
    None,
    BinOrder,
    BinOrderAndOvertime,
}

impl CutSet {
    pub fn bin_order(self) -> bool {
        !matches!(self, CutSet::None)
    }

    pub fn overtime_bound(self) -> bool {
        matches!(self, CutSet::BinOrderAndOvertime)
    }
}

/// How a warm-start packing is handed to the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HintMode {
    /// Steer branching toward the hinted assignment (and use it as incumbent).
    #[default]
    GuideSearch,
    /// Only provide the hint as an initial feasible solution.
    ConstructStart,
}

/// Ordered scenarios; index 0 is always the zero scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioPool {
    scenarios: Vec<Scenario>,
}

impl ScenarioPool {
    pub fn new(item_count: usize) -> Self {
        Self {
            scenarios: vec![Scenario::zero(item_count)],
        }
    }

    /// Appends a scenario and returns its index.
    pub fn add(&mut self, scenario: Scenario) -> Result<usize, MasterError> {
        if self.contains(&scenario) {
            return Err(MasterError::DuplicateScenario);
        }
        self.scenarios.push(scenario);
        Ok(self.scenarios.len() - 1)
    }

    pub fn contains(&self, scenario: &Scenario) -> bool {
        self.scenarios.contains(scenario)
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }
}

/// The master problem for one pool, gap target and optional warm start.
#[derive(Debug, Clone)]
pub struct MasterModel<'a> {
    instance: &'a RebpInstance,
    pool: ScenarioPool,
    cuts: CutSet,
    gap: Rat,
    hint: Option<Packing>,
    hint_mode: HintMode,
    deadline: Option<Instant>,
}

pub fn build_master<'a>(
    instance: &'a RebpInstance,
    pool: ScenarioPool,
    cuts: CutSet,
) -> Result<MasterModel<'a>, MasterError> {
    if cuts != CutSet::None && !instance.has_equal_rates() {
        return Err(MasterError::CutsRequireEqualCosts);
    }
    for s in pool.scenarios() {
        s.check(instance)?;
    }
    Ok(MasterModel {
        instance,
        pool,
        cuts,
        gap: Rat::zero(),
        hint: None,
        hint_mode: HintMode::default(),
        deadline: None,
    })
}

impl<'a> MasterModel<'a> {
    pub fn instance(&self) -> &'a RebpInstance {
        self.instance
    }

    pub fn pool(&self) -> &ScenarioPool {
        &self.pool
    }

    pub fn cuts(&self) -> CutSet {
        self.cuts
    }

    pub fn gap(&self) -> &Rat {
        &self.gap
    }

    pub fn set_gap(&mut self, gap: Rat) {
        assert!(!gap.is_negative(), "gap must be nonnegative");
        self.gap = gap;
    }

    pub fn hint(&self) -> Option<&Packing> {
        self.hint.as_ref()
    }

    pub fn hint_mode(&self) -> HintMode {
        self.hint_mode
    }

    pub fn set_hint(&mut self, packing: Option<Packing>, mode: HintMode) {
        self.hint = packing;
        self.hint_mode = mode;
    }

    pub fn deadline(&self) -> Option<Instant> {
        self.deadline
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn add_scenario(&mut self, scenario: Scenario) -> Result<usize, MasterError> {
        scenario.check(self.instance)?;
        self.pool.add(scenario)
    }

    /// `c (Σ ā + min(Ω, Σ â) − kV)` for `k` open bins; the overtime cut needs
    /// `θ` to be at least this when bin `k + 1` is closed.
    pub fn overtime_cut_coefficient(&self, open_bins: usize) -> Rat {
        let inst = self.instance;
        let reach = inst.reachable_deviation();
        let k = Rat::from_integer(BigInt::from(open_bins));
        &inst.rates()[0] * (inst.total_nominal() + reach - k * inst.capacity())
    }

    /// Lower bound on `θ` from the overtime cut when `open_bins` bins are
    /// open as a prefix; zero when the cut is disabled or all bins are open.
    pub fn overtime_cut_floor(&self, open_bins: usize) -> Rat {
        if !self.cuts.overtime_bound() || open_bins >= self.instance.bin_count() {
            return Rat::zero();
        }
        positive_part(self.overtime_cut_coefficient(open_bins))
    }

    /// The full formulation as a linear model.
    pub fn to_linear_model(&self) -> LpModel {
        let inst = self.instance;
        let (m, n) = (inst.item_count(), inst.bin_count());
        let y = |j: usize| format!("y_{}", j + 1);
        let z = |i: usize, j: usize| format!("z_{}_{}", i + 1, j + 1);
        let alpha = |s: usize, j: usize| format!("alpha_{}_{}", s, j + 1);

        let mut lp = LpModel::new(Objective::Minimize);
        for j in 0..n {
            lp.add_variable(y(j), VarKind::Binary);
        }
        for i in 0..m {
            for j in 0..n {
                lp.add_variable(z(i, j), VarKind::Binary);
            }
        }
        lp.add_variable("theta", VarKind::Continuous);
        for s in 0..self.pool.len() {
            for j in 0..n {
                lp.add_variable(alpha(s, j), VarKind::Continuous);
            }
        }
        lp.objective_terms = (0..n).map(|j| (y(j), 1.0)).collect();
        lp.objective_terms.push(("theta".into(), 1.0));

        for i in 0..m {
            let terms = (0..n).map(|j| (z(i, j), 1.0)).collect();
            lp.add_row(format!("assign_{}", i + 1), terms, RowSense::Eq, 1.0);
        }
        for i in 0..m {
            for j in 0..n {
                lp.add_row(
                    format!("link_{}_{}", i + 1, j + 1),
                    vec![(z(i, j), 1.0), (y(j), -1.0)],
                    RowSense::Le,
                    0.0,
                );
            }
        }
        for (s, scenario) in self.pool.scenarios().iter().enumerate() {
            self.push_scenario_rows(&mut lp, s, scenario);
        }
        if self.cuts.bin_order() {
            for j in 0..n.saturating_sub(1) {
                lp.add_row(
                    format!("order_{}", j + 1),
                    vec![(y(j), 1.0), (y(j + 1), -1.0)],
                    RowSense::Ge,
                    0.0,
                );
            }
        }
        if self.cuts.overtime_bound() {
            for j in 1..n {
                let coef = to_f64(&self.overtime_cut_coefficient(j));
                lp.add_row(
                    format!("otb_{j}"),
                    vec![(y(j), -coef), ("theta".into(), -1.0)],
                    RowSense::Le,
                    -coef,
                );
            }
        }
        lp
    }

    fn push_scenario_rows(&self, lp: &mut LpModel, s: usize, scenario: &Scenario) {
        let inst = self.instance;
        let n = inst.bin_count();
        for j in 0..n {
            let mut terms: Vec<(String, f64)> = inst
                .items()
                .iter()
                .zip(scenario.values())
                .enumerate()
                .map(|(i, (item, a))| {
                    (
                        format!("z_{}_{}", i + 1, j + 1),
                        to_f64(&(&item.nominal + a)),
                    )
                })
                .collect();
            terms.push((format!("y_{}", j + 1), -to_f64(inst.capacity())));
            terms.push((format!("alpha_{}_{}", s, j + 1), -1.0));
            lp.add_row(format!("cap_{}_{}", s, j + 1), terms, RowSense::Le, 0.0);
        }
        let mut terms: Vec<(String, f64)> = (0..n)
            .map(|j| (format!("alpha_{}_{}", s, j + 1), to_f64(&inst.rates()[j])))
            .collect();
        terms.push(("theta".into(), -1.0));
        lp.add_row(format!("rec_{s}"), terms, RowSense::Le, 0.0);
    }

    /// Cheapest `θ`, the `α` columns and the objective of a fixed packing.
    pub fn evaluate(&self, packing: &Packing) -> Result<(Rat, Vec<Vec<Rat>>), MasterError> {
        let mut theta = self.overtime_cut_floor(packing.open_count());
        let mut alpha = Vec::with_capacity(self.pool.len());
        for scenario in self.pool.scenarios() {
            let over = bin_overflows(self.instance, packing, scenario)?;
            let cost: Rat = over
                .iter()
                .zip(self.instance.rates())
                .map(|(o, c)| o * c)
                .sum();
            if cost > theta {
                theta = cost;
            }
            alpha.push(over);
        }
        Ok((theta, alpha))
    }

    /// Completes a packing into a master solution with the given proved gap.
    pub fn solution_for(&self, packing: Packing, gap: Rat) -> Result<MasterSolution, MasterError> {
        let (theta, alpha) = self.evaluate(&packing)?;
        let objective = Rat::from_integer(BigInt::from(packing.open_count())) + &theta;
        Ok(MasterSolution {
            packing,
            theta,
            alpha,
            objective,
            gap,
            nodes: 0,
            timed_out: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasterSolution {
    pub packing: Packing,
    pub theta: Rat,
    /// `alpha[s][j]`: overflow of bin `j` under pooled scenario `s`.
    pub alpha: Vec<Vec<Rat>>,
    pub objective: Rat,
    /// Proved relative gap `(objective − lower bound) / objective`.
    pub gap: Rat,
    /// Search nodes explored (internal solver only).
    pub nodes: u64,
    /// The search stopped at the deadline; `gap` is then a weaker bound.
    pub timed_out: bool,
}

impl MasterSolution {
    pub fn y(&self) -> Vec<bool> {
        self.packing.open().to_vec()
    }

    pub fn z(&self) -> Vec<Vec<bool>> {
        self.packing.z_matrix()
    }

    /// Checks every row of the model, including enabled cuts, in exact arithmetic.
    pub fn verify(&self, model: &MasterModel) -> Result<(), MasterError> {
        let inst = model.instance();
        let fail = |msg: String| Err(MasterError::Verification(msg));
        let n = inst.bin_count();
        if self.packing.bin_count() != n || self.packing.bin_of().len() != inst.item_count() {
            return fail("dimensions differ from the instance".into());
        }
        for (i, &j) in self.packing.bin_of().iter().enumerate() {
            if !self.packing.open()[j] {
                return fail(format!("item {i} sits in closed bin {j}"));
            }
        }
        if self.theta.is_negative() {
            return fail("negative theta".into());
        }
        if self.alpha.len() != model.pool().len() {
            return fail("one alpha block per pooled scenario expected".into());
        }
        for (s, scenario) in model.pool().scenarios().iter().enumerate() {
            let mut loads = vec![Rat::zero(); n];
            for (i, &j) in self.packing.bin_of().iter().enumerate() {
                loads[j] += &inst.items()[i].nominal + &scenario.values()[i];
            }
            let mut recourse = Rat::zero();
            for j in 0..n {
                let a = &self.alpha[s][j];
                if a.is_negative() {
                    return fail(format!("alpha[{s}][{j}] negative"));
                }
                let room = if self.packing.open()[j] {
                    inst.capacity().clone()
                } else {
                    Rat::zero()
                };
                if &loads[j] - room > *a {
                    return fail(format!("capacity row of bin {j} under scenario {s}"));
                }
                recourse += &inst.rates()[j] * a;
            }
            if recourse > self.theta {
                return fail(format!("recourse row of scenario {s}"));
            }
        }
        let open = self.packing.open();
        if model.cuts().bin_order() && open.windows(2).any(|w| !w[0] && w[1]) {
            return fail("open bins are not a prefix".into());
        }
        if model.cuts().overtime_bound() {
            for j in 1..n {
                if !open[j] && model.overtime_cut_coefficient(j) > self.theta {
                    return fail(format!("overtime cut {j}"));
                }
            }
        }
        let expected = Rat::from_integer(BigInt::from(self.packing.open_count())) + &self.theta;
        if expected != self.objective {
            return fail("objective differs from open bins plus theta".into());
        }
        Ok(())
    }
}

/// Which solver handles master problems.
#[derive(Debug, Clone)]
pub enum MasterSolver {
    Internal { max_items: usize },
    External(ExternalSolver),
}

impl Default for MasterSolver {
    fn default() -> Self {
        MasterSolver::Internal {
            max_items: DEFAULT_MAX_ITEMS,
        }
    }
}

pub fn solve_master(model: &MasterModel, solver: &MasterSolver) -> Result<MasterSolution, MasterError> {
    match solver {
        MasterSolver::Internal { max_items } => solve_master_internal(model, *max_items),
        MasterSolver::External(ext) => solve_master_external(model, ext),
    }
}
