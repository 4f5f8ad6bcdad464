//! Domain types: robust extensible bin packing instances, deviation scenarios,
//! packings and the two-piece convex knapsack.
//!
//! Every value is an exact rational. Instances are validated on construction
//! and immutable afterwards.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::{common_denominator, format_compact, positive_part, Rat};

/// One appointment: nominal duration and its maximal deviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub nominal: Rat,
    pub deviation: Rat,
}

impl Item {
    pub fn new(nominal: Rat, deviation: Rat) -> Self {
        Self { nominal, deviation }
    }
}

/// Unvalidated instance data, as read from a file or built by a generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RebpData {
    pub items: Vec<Item>,
    pub bin_count: usize,
    pub capacity: Rat,
    /// Overtime cost per unit, one entry per bin.
    pub rates: Vec<Rat>,
    pub budget: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyInstance,
    NoBins,
    NegativeDuration { item: usize },
    NonPositiveCapacity,
    RateCountMismatch { bins: usize, rates: usize },
    NonPositiveRate { bin: usize },
    BudgetOutOfRange { budget: Rat, max: Rat },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyInstance => write!(f, "EmptyInstance: instance has no items"),
            Violation::NoBins => write!(f, "EmptyInstance: instance has no bins"),
            Violation::NegativeDuration { item } => {
                write!(f, "NegativeDuration: item {item} has a negative duration")
            }
            Violation::NonPositiveCapacity => write!(f, "capacity must be positive"),
            Violation::RateCountMismatch { bins, rates } => {
                write!(f, "expected {bins} overtime rates, found {rates}")
            }
            Violation::NonPositiveRate { bin } => {
                write!(f, "overtime rate of bin {bin} must be positive")
            }
            Violation::BudgetOutOfRange { budget, max } => write!(
                f,
                "BudgetOutOfRange: budget {} not in [0, {}]",
                format_compact(budget),
                format_compact(max)
            ),
        }
    }
}

/// Every invariant violation found by [`validate_rebp`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn contains(&self, pred: impl Fn(&Violation) -> bool) -> bool {
        self.violations.iter().any(pred)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "invalid instance: {}", parts.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Invalid(#[from] ValidationReport),
    #[error("item {item} is not assigned to exactly one open bin")]
    UnassignedItem { item: usize },
    #[error("item {item} is assigned to bin {bin} which is not open")]
    ClosedBin { item: usize, bin: usize },
    #[error("scenario is outside the uncertainty set: {0}")]
    ScenarioInfeasible(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("knapsack item {item}: {reason}")]
    BadKnapsackItem { item: usize, reason: &'static str },
    #[error("knapsack capacity must be nonnegative")]
    NegativeCapacity,
}

/// A validated robust extensible bin packing instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RebpInstance {
    items: Vec<Item>,
    bin_count: usize,
    capacity: Rat,
    rates: Vec<Rat>,
    budget: Rat,
    equal_rates: bool,
}

/// Checks every instance invariant and collects all violations.
pub fn validate_rebp(data: RebpData) -> Result<RebpInstance, ValidationReport> {
    let mut violations = Vec::new();
    if data.items.is_empty() {
        violations.push(Violation::EmptyInstance);
    }
    if data.bin_count == 0 {
        violations.push(Violation::NoBins);
    }
    for (i, item) in data.items.iter().enumerate() {
        if item.nominal.is_negative() || item.deviation.is_negative() {
            violations.push(Violation::NegativeDuration { item: i });
        }
    }
    if !data.capacity.is_positive() {
        violations.push(Violation::NonPositiveCapacity);
    }
    if data.rates.len() != data.bin_count {
        violations.push(Violation::RateCountMismatch {
            bins: data.bin_count,
            rates: data.rates.len(),
        });
    }
    for (j, c) in data.rates.iter().enumerate() {
        if !c.is_positive() {
            violations.push(Violation::NonPositiveRate { bin: j });
        }
    }
    let max_budget: Rat = data.items.iter().map(|it| it.deviation.clone()).sum();
    if data.budget.is_negative() || data.budget > max_budget {
        violations.push(Violation::BudgetOutOfRange {
            budget: data.budget.clone(),
            max: max_budget,
        });
    }
    if !violations.is_empty() {
        return Err(ValidationReport { violations });
    }
    let equal_rates = data.rates.windows(2).all(|w| w[0] == w[1]);
    Ok(RebpInstance {
        items: data.items,
        bin_count: data.bin_count,
        capacity: data.capacity,
        rates: data.rates,
        budget: data.budget,
        equal_rates,
    })
}

impl RebpInstance {
    pub fn new(data: RebpData) -> Result<Self, ValidationReport> {
        validate_rebp(data)
    }

    /// Convenience constructor with the same overtime rate on every bin.
    pub fn with_uniform_rate(
        items: Vec<Item>,
        bin_count: usize,
        capacity: Rat,
        rate: Rat,
        budget: Rat,
    ) -> Result<Self, ValidationReport> {
        validate_rebp(RebpData {
            items,
            bin_count,
            capacity,
            rates: vec![rate; bin_count],
            budget,
        })
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn capacity(&self) -> &Rat {
        &self.capacity
    }

    pub fn rates(&self) -> &[Rat] {
        &self.rates
    }

    pub fn budget(&self) -> &Rat {
        &self.budget
    }

    /// True when every bin has the same overtime rate; gates symmetry cuts.
    pub fn has_equal_rates(&self) -> bool {
        self.equal_rates
    }

    pub fn total_nominal(&self) -> Rat {
        self.items.iter().map(|it| it.nominal.clone()).sum()
    }

    pub fn total_deviation(&self) -> Rat {
        self.items.iter().map(|it| it.deviation.clone()).sum()
    }

    /// Largest total deviation any scenario can realise: `min(Ω, Σ â)`.
    pub fn reachable_deviation(&self) -> Rat {
        let total = self.total_deviation();
        if self.budget < total {
            self.budget.clone()
        } else {
            total
        }
    }

    pub fn to_data(&self) -> RebpData {
        RebpData {
            items: self.items.clone(),
            bin_count: self.bin_count,
            capacity: self.capacity.clone(),
            rates: self.rates.clone(),
            budget: self.budget.clone(),
        }
    }
}

/// A deviation vector `a` with `0 <= a <= â` and `Σ a <= Ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scenario(Vec<Rat>);

impl Scenario {
    pub fn zero(item_count: usize) -> Self {
        Scenario(vec![Rat::zero(); item_count])
    }

    /// Validates against the instance's box and budget.
    pub fn new(instance: &RebpInstance, values: Vec<Rat>) -> Result<Self, ModelError> {
        let s = Scenario(values);
        s.check(instance)?;
        Ok(s)
    }

    /// Wraps values without validation; callers must check membership.
    pub fn from_values_unchecked(values: Vec<Rat>) -> Self {
        Scenario(values)
    }

    pub fn values(&self) -> &[Rat] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> Rat {
        self.0.iter().cloned().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Membership test for the budgeted uncertainty set.
    pub fn check(&self, instance: &RebpInstance) -> Result<(), ModelError> {
        if self.0.len() != instance.item_count() {
            return Err(ModelError::DimensionMismatch {
                expected: instance.item_count(),
                found: self.0.len(),
            });
        }
        for (i, (a, item)) in self.0.iter().zip(instance.items()).enumerate() {
            if a.is_negative() || *a > item.deviation {
                return Err(ModelError::ScenarioInfeasible(format!(
                    "a[{i}] = {} outside [0, {}]",
                    format_compact(a),
                    format_compact(&item.deviation)
                )));
            }
        }
        let total = self.total();
        if &total > instance.budget() {
            return Err(ModelError::ScenarioInfeasible(format!(
                "total deviation {} exceeds budget {}",
                format_compact(&total),
                format_compact(instance.budget())
            )));
        }
        Ok(())
    }
}

/// Binary open/assignment decision: `y_j` and `z_ij` stored as an item-to-bin map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Packing {
    open: Vec<bool>,
    bin_of: Vec<usize>,
}

impl Packing {
    /// Builds a packing where exactly the used bins are open.
    pub fn from_assignment(bin_count: usize, bin_of: Vec<usize>) -> Result<Self, ModelError> {
        let mut open = vec![false; bin_count];
        for (i, &j) in bin_of.iter().enumerate() {
            if j >= bin_count {
                return Err(ModelError::UnassignedItem { item: i });
            }
            open[j] = true;
        }
        Ok(Self { open, bin_of })
    }

    /// Builds a packing from explicit `y` and assignment; every item's bin must be open.
    pub fn new(open: Vec<bool>, bin_of: Vec<usize>) -> Result<Self, ModelError> {
        for (i, &j) in bin_of.iter().enumerate() {
            if j >= open.len() {
                return Err(ModelError::UnassignedItem { item: i });
            }
            if !open[j] {
                return Err(ModelError::ClosedBin { item: i, bin: j });
            }
        }
        Ok(Self { open, bin_of })
    }

    /// From the binary matrix form: each row of `z` must contain exactly one 1.
    pub fn from_matrix(open: Vec<bool>, z: &[Vec<bool>]) -> Result<Self, ModelError> {
        let mut bin_of = Vec::with_capacity(z.len());
        for (i, row) in z.iter().enumerate() {
            if row.len() != open.len() {
                return Err(ModelError::DimensionMismatch {
                    expected: open.len(),
                    found: row.len(),
                });
            }
            let mut ones = row.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j);
            match (ones.next(), ones.next()) {
                (Some(j), None) => bin_of.push(j),
                _ => return Err(ModelError::UnassignedItem { item: i }),
            }
        }
        Self::new(open, bin_of)
    }

    pub fn open(&self) -> &[bool] {
        &self.open
    }

    pub fn bin_of(&self) -> &[usize] {
        &self.bin_of
    }

    pub fn bin_count(&self) -> usize {
        self.open.len()
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&b| b).count()
    }

    pub fn z(&self, item: usize, bin: usize) -> bool {
        self.bin_of[item] == bin
    }

    pub fn z_matrix(&self) -> Vec<Vec<bool>> {
        self.bin_of
            .iter()
            .map(|&j| (0..self.open.len()).map(|k| k == j).collect())
            .collect()
    }

    /// Items of each bin, in item index order.
    pub fn bins(&self) -> Vec<Vec<usize>> {
        let mut bins = vec![Vec::new(); self.open.len()];
        for (i, &j) in self.bin_of.iter().enumerate() {
            bins[j].push(i);
        }
        bins
    }

    fn check_against(&self, instance: &RebpInstance) -> Result<(), ModelError> {
        if self.bin_of.len() != instance.item_count() {
            return Err(ModelError::DimensionMismatch {
                expected: instance.item_count(),
                found: self.bin_of.len(),
            });
        }
        if self.open.len() != instance.bin_count() {
            return Err(ModelError::DimensionMismatch {
                expected: instance.bin_count(),
                found: self.open.len(),
            });
        }
        Ok(())
    }
}

/// `(Σ_{i in B_j} (ā_i + a_i) − V·y_j)_+` for every bin.
pub fn bin_overflows(
    instance: &RebpInstance,
    packing: &Packing,
    scenario: &Scenario,
) -> Result<Vec<Rat>, ModelError> {
    packing.check_against(instance)?;
    scenario.check(instance)?;
    let mut loads = vec![Rat::zero(); instance.bin_count()];
    for (i, &j) in packing.bin_of().iter().enumerate() {
        loads[j] += &instance.items()[i].nominal + &scenario.values()[i];
    }
    Ok(loads
        .into_iter()
        .zip(packing.open())
        .map(|(load, &open)| {
            if open {
                positive_part(load - instance.capacity())
            } else {
                positive_part(load)
            }
        })
        .collect())
}

/// Weighted overtime `Σ_j c_j (load_j − V y_j)_+` under one scenario.
pub fn overtime_cost(
    instance: &RebpInstance,
    packing: &Packing,
    scenario: &Scenario,
) -> Result<Rat, ModelError> {
    let over = bin_overflows(instance, packing, scenario)?;
    Ok(over
        .iter()
        .zip(instance.rates())
        .map(|(o, c)| o * c)
        .sum())
}

/// Full cost `Σ_j y_j + Σ_j c_j (load_j − V y_j)_+` of a packing under one scenario.
pub fn rebp_objective(
    instance: &RebpInstance,
    packing: &Packing,
    scenario: &Scenario,
) -> Result<Rat, ModelError> {
    for (i, &j) in packing.bin_of().iter().enumerate() {
        if j >= packing.bin_count() {
            return Err(ModelError::UnassignedItem { item: i });
        }
        if !packing.open()[j] {
            return Err(ModelError::ClosedBin { item: i, bin: j });
        }
    }
    let overtime = overtime_cost(instance, packing, scenario)?;
    Ok(Rat::from_integer(BigInt::from(packing.open_count())) + overtime)
}

/// One item of the two-piece convex knapsack: `p(x) = max(0, γ + β x)` on `[0, u]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CkItem {
    pub gamma: Rat,
    pub beta: Rat,
    pub upper: Rat,
}

impl CkItem {
    pub fn new(gamma: Rat, beta: Rat, upper: Rat) -> Self {
        Self { gamma, beta, upper }
    }

    pub fn profit(&self, x: &Rat) -> Rat {
        positive_part(&self.gamma + &self.beta * x)
    }

    /// `p(u)`.
    pub fn full_profit(&self) -> Rat {
        self.profit(&self.upper)
    }

    /// `p(0) = max(0, γ)`; nonzero only when the flat piece has zero length.
    pub fn base_profit(&self) -> Rat {
        positive_part(self.gamma.clone())
    }

    /// Profit gained by raising the item from 0 to `u`; this is what the DP packs.
    pub fn gain(&self) -> Rat {
        self.full_profit() - self.base_profit()
    }

    /// `x̄ = max(0, −γ/β)`, where the linear piece starts.
    pub fn breakpoint(&self) -> Rat {
        positive_part(-&self.gamma / &self.beta)
    }
}

/// A validated two-piece convex knapsack instance.
///
/// Items with `p(u) <= 0` are dropped on construction; `source` maps every
/// kept item back to its input position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CkInstance {
    items: Vec<CkItem>,
    capacity: Rat,
    profit_scale: BigInt,
    source: Vec<usize>,
    input_len: usize,
}

impl CkInstance {
    pub fn new(items: Vec<CkItem>, capacity: Rat) -> Result<Self, ModelError> {
        if capacity.is_negative() {
            return Err(ModelError::NegativeCapacity);
        }
        let input_len = items.len();
        let mut kept = Vec::new();
        let mut source = Vec::new();
        for (j, item) in items.into_iter().enumerate() {
            if !item.beta.is_positive() {
                return Err(ModelError::BadKnapsackItem {
                    item: j,
                    reason: "slope must be positive",
                });
            }
            if !item.upper.is_positive() {
                return Err(ModelError::BadKnapsackItem {
                    item: j,
                    reason: "upper bound must be positive",
                });
            }
            if item.full_profit().is_positive() {
                kept.push(item);
                source.push(j);
            }
        }
        let gains: Vec<Rat> = kept.iter().map(CkItem::gain).collect();
        let profit_scale = common_denominator(gains.iter());
        Ok(Self {
            items: kept,
            capacity,
            profit_scale,
            source,
            input_len,
        })
    }

    /// Overrides the integer profit scale. Exact DP solves fail with
    /// `ScalingNotExact` if `scale · gain` is fractional for some item.
    pub fn with_profit_scale(mut self, scale: BigInt) -> Self {
        assert!(scale.is_positive(), "profit scale must be positive");
        self.profit_scale = scale;
        self
    }

    pub fn items(&self) -> &[CkItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> &Rat {
        &self.capacity
    }

    pub fn profit_scale(&self) -> &BigInt {
        &self.profit_scale
    }

    pub fn source_index(&self, kept: usize) -> usize {
        self.source[kept]
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    /// Sum of `p_j(0)`: collected whatever the solution.
    pub fn base_value(&self) -> Rat {
        self.items.iter().map(CkItem::base_profit).sum()
    }

    pub fn objective(&self, x: &[Rat]) -> Rat {
        self.items.iter().zip(x).map(|(it, xj)| it.profit(xj)).sum()
    }

    /// Expands a solution over kept items to the original input positions.
    pub fn x_in_input_order(&self, solution: &CkSolution) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.input_len];
        for (k, v) in solution.x.iter().enumerate() {
            x[self.source[k]] = v.clone();
        }
        x
    }
}

/// An extreme-point knapsack solution: a full set plus at most one partial item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CkSolution {
    pub value: Rat,
    pub x: Vec<Rat>,
    pub full_set: Vec<usize>,
    pub fractional_item: Option<usize>,
}

impl CkSolution {
    /// Builds the solution `x_j = u_j` on `full`, `x_f = amount` on the
    /// partial item, zero elsewhere, then normalises: a partial item that
    /// reaches its bound joins the full set, one that earns nothing beyond
    /// `p_f(0)` is reset to zero.
    pub fn from_extreme_point(
        instance: &CkInstance,
        mut full: Vec<usize>,
        partial: Option<(usize, Rat)>,
    ) -> Self {
        let items = instance.items();
        let mut x = vec![Rat::zero(); items.len()];
        for &j in &full {
            x[j] = items[j].upper.clone();
        }
        let mut fractional_item = None;
        if let Some((f, amount)) = partial {
            let item = &items[f];
            let amount = if amount.is_negative() {
                Rat::zero()
            } else if amount > item.upper {
                item.upper.clone()
            } else {
                amount
            };
            if amount == item.upper {
                x[f] = amount;
                full.push(f);
            } else if item.profit(&amount) > item.base_profit() {
                x[f] = amount;
                fractional_item = Some(f);
            }
        }
        full.sort_unstable();
        let value = instance.objective(&x);
        Self {
            value,
            x,
            full_set: full,
            fractional_item,
        }
    }

    pub fn total_weight(&self) -> Rat {
        self.x.iter().cloned().sum()
    }

    /// Feasibility, value consistency and extreme-point form.
    pub fn check(&self, instance: &CkInstance) -> Result<(), String> {
        if self.x.len() != instance.len() {
            return Err(format!("x has {} entries, expected {}", self.x.len(), instance.len()));
        }
        for (j, (xj, item)) in self.x.iter().zip(instance.items()).enumerate() {
            if xj.is_negative() || *xj > item.upper {
                return Err(format!("x[{j}] outside [0, u]"));
            }
        }
        if &self.total_weight() > instance.capacity() {
            return Err("capacity exceeded".into());
        }
        if self.value != instance.objective(&self.x) {
            return Err("stored value differs from objective".into());
        }
        let interior: Vec<usize> = self
            .x
            .iter()
            .zip(instance.items())
            .enumerate()
            .filter(|(_, (xj, item))| xj.is_positive() && **xj < item.upper)
            .map(|(j, _)| j)
            .collect();
        if interior.len() > 1 {
            return Err(format!("more than one interior coordinate: {interior:?}"));
        }
        if let Some(&j) = interior.first() {
            if self.fractional_item != Some(j) {
                return Err("interior coordinate is not the reported fractional item".into());
            }
        }
        for &j in &self.full_set {
            if self.x[j] != instance.items()[j].upper {
                return Err(format!("full item {j} not at its bound"));
            }
        }
        Ok(())
    }

    /// Every fully selected item has a slope at least that of the partial item.
    pub fn slope_dominance_holds(&self, instance: &CkInstance) -> bool {
        match self.fractional_item {
            None => true,
            Some(f) => {
                let bf = &instance.items()[f].beta;
                self.full_set.iter().all(|&j| &instance.items()[j].beta >= bf)
            }
        }
    }
}
