//! Greedy schedulers.
//!
//! Every scheduler returns the canonical schedule of the order it builds, so
//! each job starts at the maximum of its release and its predecessor's
//! completion. Tie-breaking is fixed, which makes all of them pure functions
//! of the instance:
//!
//! * non-idling and non-interfering pick the smallest `alpha`, then the
//!   earliest release, then the smallest id;
//! * ECTF picks the smallest estimated completion, then the smallest `alpha`,
//!   then the smallest id.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::model::{canonical_starts, completion_at, evaluate, Instance, Job, JobId, Schedule};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchedulerChoice {
    NonIdling,
    NonInterfering,
    BestOfTwo,
    Ectf,
}

impl SchedulerChoice {
    pub const ALL: [SchedulerChoice; 4] = [
        SchedulerChoice::NonIdling,
        SchedulerChoice::NonInterfering,
        SchedulerChoice::BestOfTwo,
        SchedulerChoice::Ectf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchedulerChoice::NonIdling => "non-idling",
            SchedulerChoice::NonInterfering => "non-interfering",
            SchedulerChoice::BestOfTwo => "best-of-two",
            SchedulerChoice::Ectf => "ectf",
        }
    }

    pub fn run(self, instance: &Instance) -> Schedule {
        match self {
            SchedulerChoice::NonIdling => non_idling(instance),
            SchedulerChoice::NonInterfering => non_interfering(instance),
            SchedulerChoice::BestOfTwo => best_of_two(instance),
            SchedulerChoice::Ectf => ectf(instance),
        }
    }
}

impl fmt::Display for SchedulerChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "non-idling" | "nonidling" => Ok(SchedulerChoice::NonIdling),
            "non-interfering" | "noninterfering" => Ok(SchedulerChoice::NonInterfering),
            "best-of-two" | "bestoftwo" => Ok(SchedulerChoice::BestOfTwo),
            "ectf" => Ok(SchedulerChoice::Ectf),
            other => Err(format!(
                "unknown algorithm {other:?} (expected non-idling, non-interfering, best-of-two or ectf)"
            )),
        }
    }
}

fn spt_key(a: &Job, b: &Job) -> Ordering {
    a.alpha
        .cmp(&b.alpha)
        .then_with(|| a.release.cmp(&b.release))
        .then_with(|| a.id.cmp(&b.id))
}

/// Bookkeeping shared by the event-driven schedulers.
struct Machine<'a> {
    instance: &'a Instance,
    growth: Rational,
    done: Vec<bool>,
    order: Vec<JobId>,
    clock: Rational,
}

impl<'a> Machine<'a> {
    fn new(instance: &'a Instance) -> Self {
        Machine {
            instance,
            growth: instance.growth(),
            done: vec![false; instance.len()],
            order: Vec::with_capacity(instance.len()),
            clock: Rational::from_integer(0.into()),
        }
    }

    fn finished(&self) -> bool {
        self.order.len() == self.instance.len()
    }

    fn remaining(&self) -> impl Iterator<Item = (usize, &'a Job)> + '_ {
        self.instance
            .jobs()
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.done[*i])
    }

    /// Shortest pending job at the current clock.
    fn shortest_pending(&self) -> Option<(usize, &'a Job)> {
        self.remaining()
            .filter(|(_, j)| j.release <= self.clock)
            .min_by(|(_, a), (_, b)| spt_key(a, b))
    }

    /// Moves the clock to the earliest release among unscheduled jobs.
    fn advance_to_next_release(&mut self) {
        let next = self
            .remaining()
            .map(|(_, j)| &j.release)
            .min()
            .expect("called with unscheduled jobs left")
            .clone();
        debug_assert!(next > self.clock);
        self.clock = next;
    }

    fn start(&mut self, index: usize) {
        let job = &self.instance.jobs()[index];
        let start = if job.release > self.clock {
            job.release.clone()
        } else {
            self.clock.clone()
        };
        self.clock = completion_at(&self.growth, &job.alpha, &start);
        self.done[index] = true;
        self.order.push(job.id);
    }

    fn into_schedule(self) -> Schedule {
        canonical_starts(self.instance, &self.order).expect("scheduler emits a permutation")
    }
}

/// Whenever the machine is free, start the shortest pending job; if nothing
/// is pending, wait for the next release.
pub fn non_idling(instance: &Instance) -> Schedule {
    let mut m = Machine::new(instance);
    while !m.finished() {
        match m.shortest_pending() {
            Some((i, _)) => m.start(i),
            None => m.advance_to_next_release(),
        }
    }
    m.into_schedule()
}

/// If starting `candidate` at `t` would run across the release of a strictly
/// shorter job, returns the earliest such release.
///
/// A job `j` blocks the candidate when `alpha_j < alpha_c` and
/// `t < r_j < (1+b) t + alpha_c`, both inequalities strict.
pub fn is_interfering(instance: &Instance, candidate: JobId, t: &Rational) -> Option<Rational> {
    let cand = instance.job(candidate).ok()?;
    let horizon = completion_at(&instance.growth(), &cand.alpha, t);
    blocking_release(instance.jobs().iter(), cand, t, &horizon)
}

fn blocking_release<'j>(
    others: impl Iterator<Item = &'j Job>,
    cand: &Job,
    t: &Rational,
    horizon: &Rational,
) -> Option<Rational> {
    others
        .filter(|j| j.alpha < cand.alpha && j.release > *t && j.release < *horizon)
        .map(|j| &j.release)
        .min()
        .cloned()
}

/// Like [`non_idling`], but idles instead of starting a job that would delay
/// the release of a shorter job.
///
/// When the shortest pending job is interfering, the clock jumps to the
/// earliest blocking release and the choice is made again from scratch.
pub fn non_interfering(instance: &Instance) -> Schedule {
    let mut m = Machine::new(instance);
    while !m.finished() {
        let Some((i, cand)) = m.shortest_pending() else {
            m.advance_to_next_release();
            continue;
        };
        let horizon = completion_at(&m.growth, &cand.alpha, &m.clock);
        let blocked = blocking_release(m.remaining().map(|(_, j)| j), cand, &m.clock, &horizon);
        match blocked {
            Some(release) => m.clock = release,
            None => m.start(i),
        }
    }
    m.into_schedule()
}

/// Earliest completion time first: start the unscheduled job that would
/// finish first if started next, idling until its release when needed.
pub fn ectf(instance: &Instance) -> Schedule {
    let mut m = Machine::new(instance);
    while !m.finished() {
        let best = m
            .remaining()
            .map(|(i, j)| {
                let start = if j.release > m.clock { &j.release } else { &m.clock };
                (i, j, completion_at(&m.growth, &j.alpha, start))
            })
            .min_by(|(_, a, ca), (_, b, cb)| {
                ca.cmp(cb)
                    .then_with(|| a.alpha.cmp(&b.alpha))
                    .then_with(|| a.id.cmp(&b.id))
            })
            .map(|(i, _, _)| i)
            .expect("unscheduled jobs left");
        m.start(best);
    }
    m.into_schedule()
}

/// The better of [`non_idling`] and [`non_interfering`] by makespan; an exact
/// tie returns the non-idling schedule.
pub fn best_of_two(instance: &Instance) -> Schedule {
    let idle_free = non_idling(instance);
    let careful = non_interfering(instance);
    let t1 = evaluate(instance, &idle_free).expect("canonical").makespan;
    let t2 = evaluate(instance, &careful).expect("canonical").makespan;
    if t2 < t1 {
        careful
    } else {
        idle_free
    }
}

/// Canonical schedule of the earliest-release-first order (ties: smaller
/// `alpha`, then smaller id). Always feasible, so its makespan bounds the
/// optimum from above.
pub fn earliest_release_first(instance: &Instance) -> Schedule {
    let mut jobs: Vec<&Job> = instance.jobs().iter().collect();
    jobs.sort_by(|a, b| {
        a.release
            .cmp(&b.release)
            .then_with(|| a.alpha.cmp(&b.alpha))
            .then_with(|| a.id.cmp(&b.id))
    });
    let order: Vec<JobId> = jobs.iter().map(|j| j.id).collect();
    canonical_starts(instance, &order).expect("sorted ids form a permutation")
}
