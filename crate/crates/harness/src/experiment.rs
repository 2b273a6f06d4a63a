//! Ratio experiments: generate instances, run schedulers, compare with the
//! brute-force optimum, emit CSV.

use std::io::Write;
use std::time::Instant;

use detsched::generators::{generate, BetaSpec, Family, FamilySpec, GenError};
use detsched::model::Instance;
use detsched::oracle::{brute_force_capped, lb_fixed, lb_release, ratio, Objective, OracleError, DEFAULT_MAX_BRUTEFORCE_N};
use detsched::rational::{format_rational, to_decimal, Rational};
use detsched::schedulers::SchedulerChoice;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub const RATIO_DIGITS: u32 = 10;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub family: Family,
    /// Instances per (size, beta) pair. Worst-case families are
    /// deterministic and produce one instance whenever this is positive.
    pub trials: usize,
    pub sizes: Vec<usize>,
    pub betas: Vec<BetaSpec>,
    pub seed: u64,
    pub algorithms: Vec<SchedulerChoice>,
    pub objective: Objective,
    pub max_bruteforce_n: usize,
    pub scale: Option<Rational>,
    pub alpha_max: u64,
    pub r_max: u64,
    /// Fill `wall_time_ms`. Off by default so output is byte-reproducible.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn new(family: Family) -> Self {
        ExperimentConfig {
            family,
            trials: 1,
            sizes: vec![5],
            betas: vec![BetaSpec::Fixed(Rational::from_integer(1.into()))],
            seed: 0,
            algorithms: SchedulerChoice::ALL.to_vec(),
            objective: Objective::Makespan,
            max_bruteforce_n: DEFAULT_MAX_BRUTEFORCE_N,
            scale: None,
            alpha_max: 10,
            r_max: 10,
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub instance_id: usize,
    pub n: usize,
    pub beta: Rational,
    pub family: Family,
    pub seed: u64,
    pub algorithm: SchedulerChoice,
    pub objective: Objective,
    pub value: Rational,
    pub opt_value: Option<Rational>,
    pub ratio: Option<Rational>,
    pub lb_release: Rational,
    pub lb_fixed: Rational,
    pub wall_time_ms: Option<f64>,
}

/// Column order of the CSV output.
pub const CSV_HEADER: [&str; 14] = [
    "instance_id",
    "n",
    "beta",
    "family",
    "seed",
    "algorithm",
    "objective",
    "value",
    "opt_value",
    "ratio",
    "ratio_decimal",
    "lb_release",
    "lb_fixed",
    "wall_time_ms",
];

#[derive(Serialize)]
struct CsvRecord {
    instance_id: usize,
    n: usize,
    beta: String,
    family: &'static str,
    seed: u64,
    algorithm: &'static str,
    objective: &'static str,
    value: String,
    opt_value: String,
    ratio: String,
    ratio_decimal: String,
    lb_release: String,
    lb_fixed: String,
    wall_time_ms: String,
}

impl From<&ExperimentRow> for CsvRecord {
    fn from(r: &ExperimentRow) -> Self {
        let exact = |v: &Option<Rational>| v.as_ref().map(format_rational).unwrap_or_default();
        CsvRecord {
            instance_id: r.instance_id,
            n: r.n,
            beta: format_rational(&r.beta),
            family: r.family.name(),
            seed: r.seed,
            algorithm: r.algorithm.name(),
            objective: r.objective.name(),
            value: format_rational(&r.value),
            opt_value: exact(&r.opt_value),
            ratio: exact(&r.ratio),
            ratio_decimal: r
                .ratio
                .as_ref()
                .map(|q| to_decimal(q, RATIO_DIGITS))
                .unwrap_or_default(),
            lb_release: format_rational(&r.lb_release),
            lb_fixed: format_rational(&r.lb_fixed),
            wall_time_ms: r.wall_time_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
        }
    }
}

/// Writes the header and one line per row, LF-terminated.
pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(CsvRecord::from(row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[ExperimentRow]) -> Result<String, ExperimentError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// One generated instance and where it came from.
#[derive(Debug, Clone)]
pub struct Trial {
    pub instance_id: usize,
    pub seed: u64,
    pub instance: Instance,
}

/// Instances in emission order: sizes, then betas, then trials. Each
/// instance gets its own seed drawn from a stream keyed by `config.seed`.
pub fn generate_trials(config: &ExperimentConfig) -> Result<Vec<Trial>, ExperimentError> {
    let mut seeds = ChaCha8Rng::seed_from_u64(config.seed);
    let per_pair = if config.family.is_deterministic() {
        config.trials.min(1)
    } else {
        config.trials
    };
    let mut out = Vec::new();
    for &size in &config.sizes {
        for beta in &config.betas {
            for _ in 0..per_pair {
                let seed = seeds.next_u64();
                let mut spec = FamilySpec::new(config.family, size, beta.resolve(size))
                    .seed(seed)
                    .bounds(config.alpha_max, config.r_max);
                spec.scale = config.scale.clone();
                out.push(Trial {
                    instance_id: out.len(),
                    seed,
                    instance: generate(&spec)?,
                });
            }
        }
    }
    Ok(out)
}

fn run_trial(config: &ExperimentConfig, trial: &Trial) -> Result<Vec<ExperimentRow>, ExperimentError> {
    let inst = &trial.instance;
    let opt = if inst.len() <= config.max_bruteforce_n {
        Some(brute_force_capped(inst, config.objective, config.max_bruteforce_n)?.best_value)
    } else {
        None
    };
    let lb_r = lb_release(inst);
    let lb_f = lb_fixed(inst);
    config
        .algorithms
        .iter()
        .map(|&algorithm| {
            let clock = Instant::now();
            let schedule = algorithm.run(inst);
            let elapsed = clock.elapsed();
            let value = config
                .objective
                .value(inst, &schedule)
                .map_err(OracleError::from)?;
            let ratio = match &opt {
                Some(o) => Some(ratio(&value, o)?),
                None => None,
            };
            Ok(ExperimentRow {
                instance_id: trial.instance_id,
                n: inst.len(),
                beta: inst.beta().clone(),
                family: config.family,
                seed: trial.seed,
                algorithm,
                objective: config.objective,
                value,
                opt_value: opt.clone(),
                ratio,
                lb_release: lb_r.clone(),
                lb_fixed: lb_f.clone(),
                wall_time_ms: config.record_timing.then(|| elapsed.as_secs_f64() * 1e3),
            })
        })
        .collect()
}

/// Runs every configured algorithm on every generated instance. Trials run
/// in parallel; rows come back ordered by instance id, then algorithm as
/// listed in the config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>, ExperimentError> {
    let trials = generate_trials(config)?;
    let rows = trials
        .par_iter()
        .map(|t| run_trial(config, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rows.into_iter().flatten().collect())
}
