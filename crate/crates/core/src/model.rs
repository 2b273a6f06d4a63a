//! Instances, schedules and exact evaluation.
//!
//! A job `i` started at time `s` completes at `alpha_i + (1 + beta) * s`. A
//! schedule fixes an execution order plus start times; for a fixed order the
//! canonical schedule starts each job as early as possible, at the maximum of
//! its release time and the predecessor's completion. Completion is strictly
//! increasing in start time, so the canonical schedule is optimal for its
//! order under both the makespan and the total completion objective.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{is_negative, pow, Exact, Rational};

/// Opaque job identifier. Identifiers are positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JobId(pub u64);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub id: JobId,
    /// Fixed part of the processing time.
    pub alpha: Rational,
    pub release: Rational,
}

impl Job {
    pub fn new(id: u64, alpha: Rational, release: Rational) -> Self {
        Job {
            id: JobId(id),
            alpha,
            release,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("deterioration rate must be positive, got {0}")]
    BetaNonPositive(String),
    #[error("job {id}: {field} must be non-negative, got {value}")]
    NegativeParameter {
        id: JobId,
        field: &'static str,
        value: String,
    },
    #[error("job id {0} is not positive")]
    InvalidId(JobId),
    #[error("duplicate job id {0}")]
    DuplicateId(JobId),
    #[error("instance has no jobs")]
    EmptyInstance,
    #[error("order is not a permutation of the instance's job ids: {0}")]
    NotAPermutation(String),
    #[error("unknown job id {0}")]
    UnknownJobId(JobId),
    #[error("infeasible schedule at position {position} (job {job}): {reason}")]
    InfeasibleSchedule {
        position: usize,
        job: JobId,
        reason: String,
    },
}

/// A validated problem instance: a shared deterioration rate and a nonempty
/// list of jobs with unique positive ids and non-negative parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    beta: Rational,
    jobs: Vec<Job>,
    index: HashMap<JobId, usize>,
}

impl Instance {
    /// Validates and builds an instance.
    pub fn new(beta: Rational, jobs: Vec<Job>) -> Result<Self, ModelError> {
        if beta <= Rational::zero() {
            return Err(ModelError::BetaNonPositive(Exact(&beta).to_string()));
        }
        if jobs.is_empty() {
            return Err(ModelError::EmptyInstance);
        }
        let mut index = HashMap::with_capacity(jobs.len());
        for (pos, job) in jobs.iter().enumerate() {
            if job.id.0 == 0 {
                return Err(ModelError::InvalidId(job.id));
            }
            for (field, value) in [("alpha", &job.alpha), ("release", &job.release)] {
                if is_negative(value) {
                    return Err(ModelError::NegativeParameter {
                        id: job.id,
                        field,
                        value: Exact(value).to_string(),
                    });
                }
            }
            if index.insert(job.id, pos).is_some() {
                return Err(ModelError::DuplicateId(job.id));
            }
        }
        Ok(Instance { beta, jobs, index })
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    /// `1 + beta`, the factor by which a delay propagates through one job.
    pub fn growth(&self) -> Rational {
        Rational::one() + &self.beta
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = JobId> + '_ {
        self.jobs.iter().map(|j| j.id)
    }

    pub fn job(&self, id: JobId) -> Result<&Job, ModelError> {
        self.index
            .get(&id)
            .map(|&i| &self.jobs[i])
            .ok_or(ModelError::UnknownJobId(id))
    }

    /// Position of `id` in [`Instance::jobs`].
    pub fn position(&self, id: JobId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Same jobs with every release replaced by `f(job)`.
    pub fn with_releases(
        &self,
        mut f: impl FnMut(&Job) -> Rational,
    ) -> Result<Instance, ModelError> {
        let jobs = self
            .jobs
            .iter()
            .map(|j| Job {
                id: j.id,
                alpha: j.alpha.clone(),
                release: f(j),
            })
            .collect();
        Instance::new(self.beta.clone(), jobs)
    }

    /// Shifts all releases so the earliest one is zero.
    ///
    /// Processing times depend on absolute start times, so this changes
    /// objective values; it is offered for comparisons against results that
    /// assume `min r = 0`.
    pub fn shifted_to_zero_release(&self) -> Instance {
        let r_min = self
            .jobs
            .iter()
            .map(|j| &j.release)
            .min()
            .cloned()
            .unwrap_or_else(Rational::zero);
        self.with_releases(|j| &j.release - &r_min)
            .expect("shifting releases keeps an instance valid")
    }
}

/// Re-checks the invariants of an already constructed instance.
pub fn validate_instance(instance: &Instance) -> Result<&Instance, ModelError> {
    Instance::new(instance.beta.clone(), instance.jobs.clone())?;
    Ok(instance)
}

/// An execution order with one start time per position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub order: Vec<JobId>,
    pub starts: Vec<Rational>,
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Per-position evaluation of a schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionReport {
    pub job: JobId,
    pub start: Rational,
    pub completion: Rational,
    /// Idle time immediately before this job: `start - previous completion`.
    pub gap: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalReport {
    pub positions: Vec<PositionReport>,
    pub makespan: Rational,
    pub total_completion: Rational,
}

impl EvalReport {
    pub fn completions(&self) -> impl Iterator<Item = &Rational> {
        self.positions.iter().map(|p| &p.completion)
    }

    pub fn gaps(&self) -> impl Iterator<Item = &Rational> {
        self.positions.iter().map(|p| &p.gap)
    }

    pub fn has_gaps(&self) -> bool {
        self.positions.iter().any(|p| !p.gap.is_zero())
    }
}

/// `alpha + (1 + beta) * start`.
pub fn completion_at(growth: &Rational, alpha: &Rational, start: &Rational) -> Rational {
    growth * start + alpha
}

fn check_permutation(instance: &Instance, order: &[JobId]) -> Result<Vec<usize>, ModelError> {
    if order.len() != instance.len() {
        return Err(ModelError::NotAPermutation(format!(
            "expected {} jobs, got {}",
            instance.len(),
            order.len()
        )));
    }
    let mut seen = vec![false; instance.len()];
    order
        .iter()
        .map(|&id| {
            let pos = instance
                .position(id)
                .ok_or_else(|| ModelError::NotAPermutation(format!("unknown job id {id}")))?;
            if std::mem::replace(&mut seen[pos], true) {
                return Err(ModelError::NotAPermutation(format!("job {id} repeated")));
            }
            Ok(pos)
        })
        .collect()
}

/// The earliest-start schedule for `order`: each job starts at the maximum of
/// its release and its predecessor's completion.
pub fn canonical_starts(instance: &Instance, order: &[JobId]) -> Result<Schedule, ModelError> {
    let positions = check_permutation(instance, order)?;
    let growth = instance.growth();
    let mut starts = Vec::with_capacity(order.len());
    let mut clock = Rational::zero();
    for pos in positions {
        let job = &instance.jobs[pos];
        let start = if job.release > clock {
            job.release.clone()
        } else {
            clock
        };
        clock = completion_at(&growth, &job.alpha, &start);
        starts.push(start);
    }
    Ok(Schedule {
        order: order.to_vec(),
        starts,
    })
}

/// Forward simulation of a schedule. Fails if any job starts before its
/// release or before its predecessor completes.
pub fn evaluate(instance: &Instance, schedule: &Schedule) -> Result<EvalReport, ModelError> {
    let positions = check_permutation(instance, &schedule.order)?;
    if schedule.starts.len() != schedule.order.len() {
        return Err(ModelError::NotAPermutation(format!(
            "{} start times for {} jobs",
            schedule.starts.len(),
            schedule.order.len()
        )));
    }
    let growth = instance.growth();
    let mut prev = Rational::zero();
    let mut total = Rational::zero();
    let mut out = Vec::with_capacity(positions.len());
    for (k, (pos, start)) in positions.into_iter().zip(&schedule.starts).enumerate() {
        let job = &instance.jobs[pos];
        if *start < job.release {
            return Err(ModelError::InfeasibleSchedule {
                position: k + 1,
                job: job.id,
                reason: format!(
                    "start {} precedes release {}",
                    Exact(start),
                    Exact(&job.release)
                ),
            });
        }
        if *start < prev {
            return Err(ModelError::InfeasibleSchedule {
                position: k + 1,
                job: job.id,
                reason: format!(
                    "start {} precedes predecessor completion {}",
                    Exact(start),
                    Exact(&prev)
                ),
            });
        }
        let completion = completion_at(&growth, &job.alpha, start);
        total += &completion;
        out.push(PositionReport {
            job: job.id,
            start: start.clone(),
            completion: completion.clone(),
            gap: start - &prev,
        });
        prev = completion;
    }
    Ok(EvalReport {
        positions: out,
        makespan: prev,
        total_completion: total,
    })
}

/// Makespan from gaps and fixed parts:
/// `sum_i (1+b)^(n-i+1) q_i + sum_i (1+b)^(n-i) alpha_i` over positions `i = 1..n`.
pub fn makespan_closed_form(instance: &Instance, schedule: &Schedule) -> Result<Rational, ModelError> {
    let report = evaluate(instance, schedule)?;
    let growth = instance.growth();
    let n = report.positions.len();
    let mut total = Rational::zero();
    for (k, p) in report.positions.iter().enumerate() {
        let i = k + 1;
        let alpha = &instance.job(p.job)?.alpha;
        total += pow(&growth, n - i + 1) * &p.gap;
        total += pow(&growth, n - i) * alpha;
    }
    Ok(total)
}

/// Both sides of the fixed-processing-time cost identity
/// `sum_i (1+b)^(n-i) alpha_i = sum_i alpha_i + sum_{k=2..n} b (1+b)^(n-k) (sum_{i<k} alpha_i)`.
pub fn fixed_cost_identity(
    instance: &Instance,
    schedule: &Schedule,
) -> Result<(Rational, Rational), ModelError> {
    evaluate(instance, schedule)?;
    let growth = instance.growth();
    let beta = instance.beta();
    let alphas = schedule
        .order
        .iter()
        .map(|&id| instance.job(id).map(|j| j.alpha.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let n = alphas.len();

    let lhs = alphas
        .iter()
        .enumerate()
        .fold(Rational::zero(), |acc, (k, a)| acc + pow(&growth, n - (k + 1)) * a);

    let mut rhs: Rational = alphas.iter().sum();
    let mut prefix = Rational::zero();
    for k in 2..=n {
        prefix += &alphas[k - 2];
        rhs += beta * pow(&growth, n - k) * &prefix;
    }
    Ok((lhs, rhs))
}

/// Completion time of `id` if it is the next job started from time `t`:
/// `(1+b) * max(t, r) + alpha`.
pub fn completion_estimate(instance: &Instance, id: JobId, t: &Rational) -> Result<Rational, ModelError> {
    let job = instance.job(id)?;
    let start = if job.release > *t { &job.release } else { t };
    Ok(completion_at(&instance.growth(), &job.alpha, start))
}

pub fn total_completion(instance: &Instance, schedule: &Schedule) -> Result<Rational, ModelError> {
    Ok(evaluate(instance, schedule)?.total_completion)
}

pub fn makespan(instance: &Instance, schedule: &Schedule) -> Result<Rational, ModelError> {
    Ok(evaluate(instance, schedule)?.makespan)
}
