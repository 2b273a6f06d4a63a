//! Seeded random instances, the worst-case families for each greedy
//! scheduler, and the gap-removal transform for non-interfering schedules.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Instance, Job, JobId, ModelError, Schedule};
use crate::rational::{frac, int, parse_rational, pow, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Random,
    TwoRelease,
    NonInterferingAdv,
    NonIdlingAdv,
    EctfAdv,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Random,
        Family::TwoRelease,
        Family::NonInterferingAdv,
        Family::NonIdlingAdv,
        Family::EctfAdv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Random => "random",
            Family::TwoRelease => "two-release",
            Family::NonInterferingAdv => "non-interfering-adv",
            Family::NonIdlingAdv => "non-idling-adv",
            Family::EctfAdv => "ectf-adv",
        }
    }

    /// Whether the family ignores the seed.
    pub fn is_deterministic(self) -> bool {
        !matches!(self, Family::Random | Family::TwoRelease)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| {
                let names: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
                format!("unknown family {s:?} (expected one of {})", names.join(", "))
            })
    }
}

/// Parameters for one generated instance.
///
/// `size` is the job count `n` for the random families and the
/// non-interfering family, and the family parameter `k` for the other two
/// worst-case families (which have `k + 1` and `2k` jobs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    pub family: Family,
    pub size: usize,
    pub beta: Rational,
    /// Scale `B` of the worst-case families; `None` picks the family default.
    pub scale: Option<Rational>,
    pub seed: u64,
    pub alpha_max: u64,
    pub r_max: u64,
}

impl FamilySpec {
    pub fn new(family: Family, size: usize, beta: Rational) -> Self {
        FamilySpec {
            family,
            size,
            beta,
            scale: None,
            seed: 0,
            alpha_max: 10,
            r_max: 10,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn scale(mut self, scale: Rational) -> Self {
        self.scale = Some(scale);
        self
    }

    pub fn bounds(mut self, alpha_max: u64, r_max: u64) -> Self {
        self.alpha_max = alpha_max;
        self.r_max = r_max;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("bad family spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn bad(msg: impl Into<String>) -> GenError {
    GenError::BadSpec(msg.into())
}

fn expect_family(spec: &FamilySpec, family: Family) -> Result<(), GenError> {
    if spec.family != family {
        return Err(bad(format!("expected family {family}, got {}", spec.family)));
    }
    if spec.size == 0 {
        return Err(bad("size must be at least 1"));
    }
    Ok(())
}

/// Dispatches on `spec.family`.
pub fn generate(spec: &FamilySpec) -> Result<Instance, GenError> {
    match spec.family {
        Family::Random => gen_random(spec),
        Family::TwoRelease => gen_two_release(spec),
        Family::NonInterferingAdv => gen_noninterfering_adv(spec),
        Family::NonIdlingAdv => gen_nonidling_adv(spec),
        Family::EctfAdv => gen_ectf_adv(spec),
    }
}

fn rng_for(spec: &FamilySpec) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(spec.seed)
}

/// `n` jobs with integer `alpha` uniform in `[0, alpha_max]` and integer
/// release uniform in `[0, r_max]`.
pub fn gen_random(spec: &FamilySpec) -> Result<Instance, GenError> {
    expect_family(spec, Family::Random)?;
    let mut rng = rng_for(spec);
    let jobs = (1..=spec.size as u64)
        .map(|id| {
            let a = rng.gen_range(0..=spec.alpha_max);
            let r = rng.gen_range(0..=spec.r_max);
            Job::new(id, int(a as i64), int(r as i64))
        })
        .collect();
    Ok(Instance::new(spec.beta.clone(), jobs)?)
}

/// Random `alpha` as in [`gen_random`]; each release is `0` or `r_max`, and
/// both values occur.
pub fn gen_two_release(spec: &FamilySpec) -> Result<Instance, GenError> {
    expect_family(spec, Family::TwoRelease)?;
    if spec.r_max == 0 {
        return Err(bad("two-release family needs r_max > 0"));
    }
    if spec.size < 2 {
        return Err(bad("two-release family needs at least two jobs"));
    }
    let mut rng = rng_for(spec);
    let alphas: Vec<u64> = (0..spec.size).map(|_| rng.gen_range(0..=spec.alpha_max)).collect();
    let late = loop {
        let late: Vec<bool> = (0..spec.size).map(|_| rng.gen_bool(0.5)).collect();
        if late.iter().any(|&l| l) && late.iter().any(|&l| !l) {
            break late;
        }
    };
    let jobs = alphas
        .into_iter()
        .zip(late)
        .enumerate()
        .map(|(k, (a, late))| {
            let r = if late { spec.r_max } else { 0 };
            Job::new(k as u64 + 1, int(a as i64), int(r as i64))
        })
        .collect();
    Ok(Instance::new(spec.beta.clone(), jobs)?)
}

/// Geometric partial sums `sum_{i=1..j} (1+b)^(i-1) B` for `j = 1..=count`.
fn geometric_releases(growth: &Rational, scale: &Rational, count: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(count);
    let mut term = scale.clone();
    let mut acc = Rational::zero();
    for _ in 0..count {
        acc += &term;
        out.push(acc.clone());
        term *= growth;
    }
    out
}

/// Worst case for the non-interfering scheduler: job `j` has
/// `alpha_j = B + n - j` and `r_j = sum_{i=1..j} (1+b)^(i-1) B`. Requires
/// `B >= n`; defaults to `B = n^2`.
pub fn gen_noninterfering_adv(spec: &FamilySpec) -> Result<Instance, GenError> {
    expect_family(spec, Family::NonInterferingAdv)?;
    let n = spec.size;
    let scale = spec.scale.clone().unwrap_or_else(|| int((n * n) as i64));
    if scale < int(n as i64) {
        return Err(bad(format!("scale must be at least n = {n}")));
    }
    let growth = Rational::one() + &spec.beta;
    let releases = geometric_releases(&growth, &scale, n);
    let jobs = releases
        .into_iter()
        .enumerate()
        .map(|(k, r)| {
            let j = k + 1;
            Job {
                id: JobId(j as u64),
                alpha: &scale + int((n - j) as i64),
                release: r,
            }
        })
        .collect();
    Ok(Instance::new(spec.beta.clone(), jobs)?)
}

/// Worst case for the non-idling scheduler: one job with `alpha = B`
/// released at 0 and `k` zero-length jobs released at 1. Defaults to
/// `B = (1+b)^(k+1)`.
pub fn gen_nonidling_adv(spec: &FamilySpec) -> Result<Instance, GenError> {
    expect_family(spec, Family::NonIdlingAdv)?;
    let k = spec.size;
    let growth = Rational::one() + &spec.beta;
    let scale = spec.scale.clone().unwrap_or_else(|| pow(&growth, k + 1));
    if scale <= Rational::zero() {
        return Err(bad("scale must be positive"));
    }
    let mut jobs = vec![Job::new(1, scale, int(0))];
    jobs.extend((0..k).map(|i| Job::new(i as u64 + 2, int(0), int(1))));
    Ok(Instance::new(spec.beta.clone(), jobs)?)
}

/// Worst case for ECTF: `k` long jobs (ids `1..=k`, released at 0 with
/// `alpha = (1+b) B`) and `k` zero-length short jobs (ids `k+1..=2k`) with
/// releases `sum_{i=1..j} (1+b)^(i-1) B`. Defaults to `B = 1`.
pub fn gen_ectf_adv(spec: &FamilySpec) -> Result<Instance, GenError> {
    expect_family(spec, Family::EctfAdv)?;
    let k = spec.size;
    let scale = spec.scale.clone().unwrap_or_else(Rational::one);
    if scale <= Rational::zero() {
        return Err(bad("scale must be positive"));
    }
    let growth = Rational::one() + &spec.beta;
    let long_alpha = &growth * &scale;
    let mut jobs: Vec<Job> = (1..=k as u64)
        .map(|id| Job::new(id, long_alpha.clone(), int(0)))
        .collect();
    jobs.extend(
        geometric_releases(&growth, &scale, k)
            .into_iter()
            .enumerate()
            .map(|(i, r)| Job::new((k + i + 1) as u64, int(0), r)),
    );
    Ok(Instance::new(spec.beta.clone(), jobs)?)
}

/// Lowers each release to at most the start it would get in a gap-free run
/// of the non-interfering order: with jobs numbered by their position in
/// `ni_schedule`, `r'_k = min(r_k, sum_{i<k} (1+b)^(k-1-i) alpha_i)`.
///
/// The result is numbered the same way: job `k` of the reduced instance is
/// the `k`-th job of `ni_schedule` (see [`reduction_labels`]), so id-based
/// tie-breaks follow the original order. Fixed parts are unchanged.
pub fn reduce_instance(instance: &Instance, ni_schedule: &Schedule) -> Result<Instance, ModelError> {
    if ni_schedule.order.len() != instance.len() {
        return Err(ModelError::NotAPermutation(format!(
            "expected {} jobs, got {}",
            instance.len(),
            ni_schedule.order.len()
        )));
    }
    let growth = instance.growth();
    let mut clock = Rational::zero();
    let mut jobs = Vec::with_capacity(instance.len());
    for (k, &id) in ni_schedule.order.iter().enumerate() {
        let job = instance.job(id)?;
        let release = if job.release < clock { job.release.clone() } else { clock.clone() };
        jobs.push(Job::new(k as u64 + 1, job.alpha.clone(), release));
        clock = &growth * &clock + &job.alpha;
    }
    Instance::new(instance.beta().clone(), jobs)
}

/// Original ids of the jobs of a reduced instance: entry `k - 1` is the id
/// behind reduced job `k`.
pub fn reduction_labels(ni_schedule: &Schedule) -> &[JobId] {
    &ni_schedule.order
}

/// Rewrites an order over original ids into reduced-instance ids.
pub fn relabel_for_reduction(ni_schedule: &Schedule, order: &[JobId]) -> Result<Vec<JobId>, ModelError> {
    let position: std::collections::HashMap<JobId, u64> = ni_schedule
        .order
        .iter()
        .enumerate()
        .map(|(k, &id)| (id, k as u64 + 1))
        .collect();
    order
        .iter()
        .map(|id| position.get(id).map(|&k| JobId(k)).ok_or(ModelError::UnknownJobId(*id)))
        .collect()
}

/// A deterioration rate, possibly defined relative to the job count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BetaSpec {
    Fixed(Rational),
    /// `1 / (2n)`
    HalfInverseN,
    /// `1 / n`
    InverseN,
    /// `n + 1`
    NPlusOne,
    /// `2n`
    TwiceN,
}

impl BetaSpec {
    pub fn resolve(&self, n: usize) -> Rational {
        let n = n.max(1) as i64;
        match self {
            BetaSpec::Fixed(b) => b.clone(),
            BetaSpec::HalfInverseN => frac(1, 2 * n),
            BetaSpec::InverseN => frac(1, n),
            BetaSpec::NPlusOne => int(n + 1),
            BetaSpec::TwiceN => int(2 * n),
        }
    }

    /// The default sweep `{1/(2n), 1/n, 1/2, 1, 2, n+1, 2n}`.
    pub fn standard_set() -> Vec<BetaSpec> {
        vec![
            BetaSpec::HalfInverseN,
            BetaSpec::InverseN,
            BetaSpec::Fixed(frac(1, 2)),
            BetaSpec::Fixed(int(1)),
            BetaSpec::Fixed(int(2)),
            BetaSpec::NPlusOne,
            BetaSpec::TwiceN,
        ]
    }
}

impl fmt::Display for BetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaSpec::Fixed(b) => write!(f, "{}", crate::rational::Exact(b)),
            BetaSpec::HalfInverseN => f.write_str("1/(2n)"),
            BetaSpec::InverseN => f.write_str("1/n"),
            BetaSpec::NPlusOne => f.write_str("n+1"),
            BetaSpec::TwiceN => f.write_str("2n"),
        }
    }
}

impl FromStr for BetaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "1/(2n)" | "1/2n" => Ok(BetaSpec::HalfInverseN),
            "1/n" => Ok(BetaSpec::InverseN),
            "n+1" => Ok(BetaSpec::NPlusOne),
            "2n" => Ok(BetaSpec::TwiceN),
            other => {
                let b = parse_rational(other).map_err(|e| e.to_string())?;
                if b <= Rational::zero() {
                    return Err(format!("beta must be positive, got {other}"));
                }
                Ok(BetaSpec::Fixed(b))
            }
        }
    }
}
