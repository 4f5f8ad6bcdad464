//! Seeded generators for the two benchmark families.

use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::InstanceError;
use crate::model::{CkInstance, CkItem, Item, RebpData, RebpInstance};
use crate::rational::{int, rat, Rat};

/// Experiments per profit range; experiment `i` uses budget multiplier `5 + 3i`.
pub const CK_EXPERIMENTS: u32 = 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CkGenSpec {
    pub n: usize,
    /// Profits at the upper bound are drawn from `(0, R)`.
    pub r: u64,
    /// Experiment index in `1..=30`.
    pub experiment: u32,
    pub seed: u64,
}

pub fn budget_multiplier(experiment: u32) -> u32 {
    5 + 3 * experiment
}

/// Draws `n` items with `p(u)` uniform on the integers `1..R`, `u = ⌈p(u) + R/10⌉`
/// and breakpoint `u − 1`, so `β = p(u)` and `γ = −(u − 1)·p(u)`. The capacity
/// is `k/101 · Σu` with `k = 5 + 3i`.
pub fn gen_ck(spec: &CkGenSpec) -> Result<CkInstance, InstanceError> {
    if spec.n == 0 {
        return Err(InstanceError::BadSpec("n must be positive".into()));
    }
    if spec.r < 2 {
        return Err(InstanceError::BadSpec("R must be at least 2".into()));
    }
    if !(1..=CK_EXPERIMENTS).contains(&spec.experiment) {
        return Err(InstanceError::BadSpec(format!(
            "experiment index must lie in 1..={CK_EXPERIMENTS}, got {}",
            spec.experiment
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let offset = Rat::new(BigInt::from(spec.r), BigInt::from(10));
    let mut items = Vec::with_capacity(spec.n);
    let mut total_upper = Rat::from_integer(BigInt::from(0));
    for _ in 0..spec.n {
        let p = Rat::from_integer(BigInt::from(rng.gen_range(1..spec.r)));
        let u = (&p + &offset).ceil();
        let breakpoint = &u - int(1);
        let gamma = -(&breakpoint * &p);
        total_upper += &u;
        items.push(CkItem::new(gamma, p, u));
    }
    let k = i64::from(budget_multiplier(spec.experiment));
    let capacity = rat(k, 101) * total_upper;
    Ok(CkInstance::new(items, capacity)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NominalSource {
    Given(Vec<Rat>),
    /// `count` durations drawn uniformly from the integers `1..=a_max`.
    Synthetic { count: usize, a_max: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RebpGenSpec {
    pub nominal: NominalSource,
    /// Defaults to one bin per item.
    pub bin_count: Option<usize>,
    pub deviation_ratio: Rat,
    pub capacity_divisor: Rat,
    pub budget_ratio: Rat,
    pub cost_factor: Rat,
    pub seed: u64,
}

impl RebpGenSpec {
    pub fn new(nominal: NominalSource, seed: u64) -> Self {
        Self {
            nominal,
            bin_count: None,
            deviation_ratio: rat(2, 5),
            capacity_divisor: int(8),
            budget_ratio: rat(1, 10),
            cost_factor: rat(3, 2),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedRebp {
    pub instance: RebpInstance,
    /// Largest nominal duration; separates the easy and hard regimes.
    pub a_max: Rat,
}

/// `â = ρ·ā`, `V = Σ(ā + â)/d`, `Ω = b·Σâ`, and the same rate `c = f/V` on every bin.
pub fn gen_rebp(spec: &RebpGenSpec) -> Result<GeneratedRebp, InstanceError> {
    let nominal: Vec<Rat> = match &spec.nominal {
        NominalSource::Given(values) => values.clone(),
        NominalSource::Synthetic { count, a_max } => {
            if *a_max == 0 {
                return Err(InstanceError::BadSpec("a_max must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            (0..*count)
                .map(|_| Rat::from_integer(BigInt::from(rng.gen_range(1..=*a_max))))
                .collect()
        }
    };
    if nominal.is_empty() {
        return Err(InstanceError::BadSpec("no nominal durations".into()));
    }
    if nominal.iter().any(|a| !a.is_positive()) {
        return Err(InstanceError::BadSpec("nominal durations must be positive".into()));
    }
    for (name, value) in [
        ("capacity divisor", &spec.capacity_divisor),
        ("cost factor", &spec.cost_factor),
    ] {
        if !value.is_positive() {
            return Err(InstanceError::BadSpec(format!("{name} must be positive")));
        }
    }
    for (name, value) in [
        ("deviation ratio", &spec.deviation_ratio),
        ("budget ratio", &spec.budget_ratio),
    ] {
        if value.is_negative() {
            return Err(InstanceError::BadSpec(format!("{name} must be nonnegative")));
        }
    }
    if spec.budget_ratio > int(1) {
        return Err(InstanceError::BadSpec("budget ratio must not exceed 1".into()));
    }
    let bin_count = spec.bin_count.unwrap_or(nominal.len());
    if bin_count == 0 {
        return Err(InstanceError::BadSpec("bin count must be positive".into()));
    }

    let items: Vec<Item> = nominal
        .iter()
        .map(|a| Item::new(a.clone(), a * &spec.deviation_ratio))
        .collect();
    let total: Rat = items.iter().map(|it| &it.nominal + &it.deviation).sum();
    let total_dev: Rat = items.iter().map(|it| it.deviation.clone()).sum();
    let capacity = total / &spec.capacity_divisor;
    let rate = &spec.cost_factor / &capacity;
    let a_max = nominal.iter().max().cloned().expect("nonempty");
    let instance = RebpInstance::new(RebpData {
        items,
        bin_count,
        capacity,
        rates: vec![rate; bin_count],
        budget: total_dev * &spec.budget_ratio,
    })?;
    Ok(GeneratedRebp { instance, a_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ck_formulas() {
        let spec = CkGenSpec {
            n: 40,
            r: 100,
            experiment: 1,
            seed: 7,
        };
        let inst = gen_ck(&spec).unwrap();
        assert_eq!(inst.len(), 40);
        let mut total = int(0);
        for it in inst.items() {
            let p = it.full_profit();
            assert_eq!(it.upper, (&p + int(10)).ceil());
            assert_eq!(it.breakpoint(), &it.upper - int(1));
            assert_eq!(it.beta, p);
            assert!(p >= int(1) && p <= int(99));
            total += &it.upper;
        }
        assert_eq!(inst.capacity(), &(rat(8, 101) * total));
    }

    #[test]
    fn drawn_fifty_gives_sixty() {
        // the item for a draw of 50 at R = 100
        let p = int(50);
        let u = (&p + rat(100, 10)).ceil();
        let item = CkItem::new(-(&u - int(1)) * &p, p.clone(), u.clone());
        assert_eq!(u, int(60));
        assert_eq!(item.gamma, int(-2950));
        assert_eq!(item.full_profit(), p);
    }

    #[test]
    fn ck_is_deterministic() {
        let spec = CkGenSpec {
            n: 10,
            r: 1000,
            experiment: 30,
            seed: 3,
        };
        assert_eq!(gen_ck(&spec).unwrap(), gen_ck(&spec).unwrap());
        let other = CkGenSpec { seed: 4, ..spec.clone() };
        assert_ne!(gen_ck(&spec).unwrap(), gen_ck(&other).unwrap());
    }

    #[test]
    fn ck_bad_specs() {
        let good = CkGenSpec {
            n: 3,
            r: 100,
            experiment: 1,
            seed: 0,
        };
        for bad in [
            CkGenSpec { n: 0, ..good.clone() },
            CkGenSpec { r: 1, ..good.clone() },
            CkGenSpec { experiment: 0, ..good.clone() },
            CkGenSpec { experiment: 31, ..good.clone() },
        ] {
            assert!(matches!(gen_ck(&bad), Err(InstanceError::BadSpec(_))));
        }
    }

    #[test]
    fn rebp_four_tens() {
        let spec = RebpGenSpec::new(NominalSource::Given(vec![int(10); 4]), 0);
        let g = gen_rebp(&spec).unwrap();
        let inst = &g.instance;
        assert!(inst.items().iter().all(|it| it.deviation == int(4)));
        assert_eq!(inst.capacity(), &int(7));
        assert_eq!(inst.budget(), &rat(8, 5));
        assert!(inst.rates().iter().all(|c| c == &rat(3, 14)));
        assert!(inst.has_equal_rates());
        assert_eq!(g.a_max, int(10));
        assert_eq!(inst.bin_count(), 4);
    }

    #[test]
    fn rebp_synthetic_reports_a_max() {
        let spec = RebpGenSpec::new(NominalSource::Synthetic { count: 30, a_max: 20 }, 11);
        let g = gen_rebp(&spec).unwrap();
        let max = g.instance.items().iter().map(|it| it.nominal.clone()).max().unwrap();
        assert_eq!(g.a_max, max);
        assert!(g.a_max <= int(20));
        assert_eq!(gen_rebp(&spec).unwrap(), g);
    }

    #[test]
    fn rebp_empty_is_bad_spec() {
        let spec = RebpGenSpec::new(NominalSource::Given(vec![]), 0);
        assert!(matches!(gen_rebp(&spec), Err(InstanceError::BadSpec(_))));
        let spec = RebpGenSpec::new(NominalSource::Synthetic { count: 0, a_max: 20 }, 0);
        assert!(matches!(gen_rebp(&spec), Err(InstanceError::BadSpec(_))));
    }
}
