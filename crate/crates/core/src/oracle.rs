//! Exact optima by exhaustive search, and lower bounds on the optimal makespan.
//!
//! For a fixed order the canonical schedule minimizes both objectives, since
//! every completion time is strictly increasing in its start time. The optimum
//! is therefore found by enumerating job orders only. Ties are broken towards
//! the lexicographically smallest order of job ids.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{canonical_starts, evaluate, Instance, JobId, ModelError, Schedule};
use crate::rational::Rational;

/// Largest instance [`brute_force`] accepts unless told otherwise.
pub const DEFAULT_MAX_BRUTEFORCE_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Makespan,
    TotalCompletion,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Makespan => "makespan",
            Objective::TotalCompletion => "total-completion",
        }
    }

    /// Value of `schedule` under this objective.
    pub fn value(self, instance: &Instance, schedule: &Schedule) -> Result<Rational, ModelError> {
        let report = evaluate(instance, schedule)?;
        Ok(match self {
            Objective::Makespan => report.makespan,
            Objective::TotalCompletion => report.total_completion,
        })
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "makespan" | "cmax" => Ok(Objective::Makespan),
            "total-completion" | "sum-completion" | "sumc" => Ok(Objective::TotalCompletion),
            other => Err(format!(
                "unknown objective {other:?} (expected makespan or total-completion)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {n} jobs, brute force is capped at {cap}")]
    InstanceTooLarge { n: usize, cap: usize },
    #[error("optimum is zero but the schedule's value is {0}")]
    DegenerateOptimum(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptResult {
    pub objective: Objective,
    pub best_schedule: Schedule,
    pub best_value: Rational,
    pub permutations_examined: u64,
}

/// Exhaustive search with the default size cap.
pub fn brute_force(instance: &Instance, objective: Objective) -> Result<OptResult, OracleError> {
    brute_force_capped(instance, objective, DEFAULT_MAX_BRUTEFORCE_N)
}

/// Enumerates all `n!` orders and returns the best canonical schedule.
pub fn brute_force_capped(
    instance: &Instance,
    objective: Objective,
    cap: usize,
) -> Result<OptResult, OracleError> {
    let n = instance.len();
    if n > cap {
        return Err(OracleError::InstanceTooLarge { n, cap });
    }
    // Enumerate in ascending id order so the first strict minimum found is
    // the lexicographically smallest optimal order.
    let mut by_id: Vec<usize> = (0..n).collect();
    by_id.sort_by_key(|&i| instance.jobs()[i].id);

    let (best, leaves) = match ScaledClock::new(instance) {
        Some(clock) => match search(&clock, &by_id, objective) {
            Some(found) => found,
            None => search(&ExactClock::new(instance), &by_id, objective).expect("exact arithmetic"),
        },
        None => search(&ExactClock::new(instance), &by_id, objective).expect("exact arithmetic"),
    };

    let order: Vec<JobId> = best.iter().map(|&i| instance.jobs()[i].id).collect();
    let best_schedule = canonical_starts(instance, &order)?;
    let best_value = objective.value(instance, &best_schedule)?;
    Ok(OptResult {
        objective,
        best_schedule,
        best_value,
        permutations_examined: leaves,
    })
}

/// Time arithmetic used by the search. `None` signals overflow.
trait Clock {
    type Value: Clone + Ord;
    fn zero(&self) -> Self::Value;
    /// Completion of job `job` started no earlier than `after`.
    fn complete(&self, job: usize, after: &Self::Value) -> Option<Self::Value>;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Option<Self::Value>;
}

struct ExactClock<'a> {
    instance: &'a Instance,
    growth: Rational,
}

impl<'a> ExactClock<'a> {
    fn new(instance: &'a Instance) -> Self {
        ExactClock {
            instance,
            growth: instance.growth(),
        }
    }
}

impl Clock for ExactClock<'_> {
    type Value = Rational;

    fn zero(&self) -> Rational {
        Rational::zero()
    }

    fn complete(&self, job: usize, after: &Rational) -> Option<Rational> {
        let j = &self.instance.jobs()[job];
        let start = if j.release > *after { &j.release } else { after };
        Some(&self.growth * start + &j.alpha)
    }

    fn add(&self, a: &Rational, b: &Rational) -> Option<Rational> {
        Some(a + b)
    }
}

/// Integer time: every quantity multiplied by `lcm(denominators) * q^n`,
/// where `beta = p/q`. After `d` jobs the clock is divisible by `q^(n-d)`, so
/// the division by `q` in each step is exact.
struct ScaledClock {
    growth_num: i128,
    growth_den: i128,
    alpha: Vec<i128>,
    release: Vec<i128>,
}

impl ScaledClock {
    fn new(instance: &Instance) -> Option<Self> {
        let beta = instance.beta();
        let q = beta.denom().clone();
        let p = beta.numer().clone();
        let mut lcm = BigInt::one();
        for j in instance.jobs() {
            lcm = lcm.lcm(j.alpha.denom());
            lcm = lcm.lcm(j.release.denom());
        }
        let scale = lcm * num_traits::pow(q.clone(), instance.len());
        let to_i128 = |r: &Rational| -> Option<i128> {
            let v = r * Rational::from_integer(scale.clone());
            debug_assert!(v.is_integer());
            v.to_integer().to_i128()
        };
        let alpha = instance.jobs().iter().map(|j| to_i128(&j.alpha)).collect::<Option<Vec<_>>>()?;
        let release = instance.jobs().iter().map(|j| to_i128(&j.release)).collect::<Option<Vec<_>>>()?;
        Some(ScaledClock {
            growth_num: (p + &q).to_i128()?,
            growth_den: q.to_i128()?,
            alpha,
            release,
        })
    }
}

impl Clock for ScaledClock {
    type Value = i128;

    fn zero(&self) -> i128 {
        0
    }

    fn complete(&self, job: usize, after: &i128) -> Option<i128> {
        let start = self.release[job].max(*after);
        let grown = start.checked_mul(self.growth_num)?;
        debug_assert_eq!(grown % self.growth_den, 0);
        (grown / self.growth_den).checked_add(self.alpha[job])
    }

    fn add(&self, a: &i128, b: &i128) -> Option<i128> {
        a.checked_add(*b)
    }
}

struct Search<'c, C: Clock> {
    clock: &'c C,
    objective: Objective,
    used: Vec<bool>,
    prefix: Vec<usize>,
    best: Option<(C::Value, Vec<usize>)>,
    leaves: u64,
}

fn search<C: Clock>(clock: &C, by_id: &[usize], objective: Objective) -> Option<(Vec<usize>, u64)> {
    let n = by_id.len();
    let mut s = Search {
        clock,
        objective,
        used: vec![false; n],
        prefix: Vec::with_capacity(n),
        best: None,
        leaves: 0,
    };
    let zero = clock.zero();
    s.descend(by_id, &zero, &zero)?;
    s.best.map(|(_, order)| (order, s.leaves))
}

impl<C: Clock> Search<'_, C> {
    fn descend(&mut self, by_id: &[usize], now: &C::Value, sum: &C::Value) -> Option<()> {
        if self.prefix.len() == by_id.len() {
            self.leaves += 1;
            let value = match self.objective {
                Objective::Makespan => now,
                Objective::TotalCompletion => sum,
            };
            if self.best.as_ref().map_or(true, |(b, _)| value < b) {
                self.best = Some((value.clone(), self.prefix.clone()));
            }
            return Some(());
        }
        for &job in by_id {
            if self.used[job] {
                continue;
            }
            let done = self.clock.complete(job, now)?;
            let total = self.clock.add(sum, &done)?;
            self.used[job] = true;
            self.prefix.push(job);
            let r = self.descend(by_id, &done, &total);
            self.prefix.pop();
            self.used[job] = false;
            r?;
        }
        Some(())
    }
}

/// Weighted fixed cost of running `alphas` back-to-back from `t` in the
/// given order: `(1+b)^k t + sum_i (1+b)^(k-i) alpha_i`.
pub fn chained_cost(beta: &Rational, alphas: &[Rational], t: &Rational) -> Rational {
    let growth = Rational::one() + beta;
    alphas.iter().fold(t.clone(), |acc, a| acc * &growth + a)
}

/// [`chained_cost`] with the jobs sorted by non-decreasing `alpha`, the
/// cheapest way to run them without gaps from `t`. With `t = 0` over all
/// jobs this bounds the optimal makespan from below.
pub fn sorted_subset_cost(beta: &Rational, alphas: &[Rational], t: &Rational) -> Rational {
    let mut sorted = alphas.to_vec();
    sorted.sort();
    chained_cost(beta, &sorted, t)
}

/// Release-time lower bound `sum_i b^(n-i) r_(i)` over ascending releases.
pub fn lb_release(instance: &Instance) -> Rational {
    let mut releases: Vec<&Rational> = instance.jobs().iter().map(|j| &j.release).collect();
    releases.sort();
    let beta = instance.beta();
    releases
        .into_iter()
        .fold(Rational::zero(), |acc, r| acc * beta + r)
}

/// Fixed-cost lower bound: all jobs in SPT order from time zero.
pub fn lb_fixed(instance: &Instance) -> Rational {
    let alphas: Vec<Rational> = instance.jobs().iter().map(|j| j.alpha.clone()).collect();
    sorted_subset_cost(instance.beta(), &alphas, &Rational::zero())
}

pub fn lb_combined(instance: &Instance) -> Rational {
    lb_release(instance).max(lb_fixed(instance))
}

/// `value / optimum`. A zero optimum gives 1 when the value is also zero.
pub fn ratio(value: &Rational, optimum: &Rational) -> Result<Rational, OracleError> {
    if optimum.is_zero() {
        if value.is_zero() {
            Ok(Rational::one())
        } else {
            Err(OracleError::DegenerateOptimum(crate::rational::format_rational(value)))
        }
    } else {
        Ok(value / optimum)
    }
}

/// Ratio of `schedule`'s objective value to the brute-force optimum.
pub fn approximation_ratio(
    instance: &Instance,
    schedule: &Schedule,
    objective: Objective,
    cap: usize,
) -> Result<Rational, OracleError> {
    let value = objective.value(instance, schedule)?;
    let opt = brute_force_capped(instance, objective, cap)?;
    ratio(&value, &opt.best_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Job;
    use crate::rational::{frac, int};
    use crate::schedulers::{ectf, non_idling};

    fn inst(beta: Rational, jobs: &[(u64, i64, i64)]) -> Instance {
        Instance::new(
            beta,
            jobs.iter().map(|&(id, a, r)| Job::new(id, int(a), int(r))).collect(),
        )
        .unwrap()
    }

    fn ids(v: &[u64]) -> Vec<JobId> {
        v.iter().copied().map(JobId).collect()
    }

    #[test]
    fn two_job_optimum() {
        let i = inst(int(1), &[(1, 5, 0), (2, 1, 2)]);
        let opt = brute_force(&i, Objective::Makespan).unwrap();
        assert_eq!(opt.best_schedule.order, ids(&[1, 2]));
        assert_eq!(opt.best_value, int(11));
        assert_eq!(opt.permutations_examined, 2);

        let opt = brute_force(&i, Objective::TotalCompletion).unwrap();
        assert_eq!(opt.best_schedule.order, ids(&[1, 2]));
        assert_eq!(opt.best_value, int(16));
    }

    #[test]
    fn single_job_optimum() {
        let i = inst(frac(1, 2), &[(4, 3, 2)]);
        let opt = brute_force(&i, Objective::Makespan).unwrap();
        assert_eq!(opt.best_value, int(6));
        assert_eq!(opt.permutations_examined, 1);
    }

    #[test]
    fn ectf_family_optimum() {
        let i = inst(int(1), &[(1, 2, 0), (2, 0, 1)]);
        let opt = brute_force(&i, Objective::Makespan).unwrap();
        assert_eq!(opt.best_schedule.order, ids(&[1, 2]));
        assert_eq!(opt.best_value, int(4));
    }

    #[test]
    fn ties_pick_lexicographically_smallest_order() {
        let i = inst(int(1), &[(3, 0, 0), (1, 0, 0), (2, 0, 0)]);
        let opt = brute_force(&i, Objective::Makespan).unwrap();
        assert_eq!(opt.best_schedule.order, ids(&[1, 2, 3]));
        assert_eq!(opt.permutations_examined, 6);
    }

    #[test]
    fn cap_is_enforced() {
        let jobs: Vec<_> = (1..=4).map(|i| (i, 1, 0)).collect();
        let i = inst(int(1), &jobs);
        assert_eq!(
            brute_force_capped(&i, Objective::Makespan, 3),
            Err(OracleError::InstanceTooLarge { n: 4, cap: 3 })
        );
        assert_eq!(brute_force_capped(&i, Objective::Makespan, 4).unwrap().permutations_examined, 24);
    }

    #[test]
    fn scaled_and_exact_search_agree() {
        let i = Instance::new(
            frac(3, 7),
            vec![
                Job::new(1, frac(5, 2), frac(1, 3)),
                Job::new(2, int(1), int(4)),
                Job::new(3, frac(7, 5), int(0)),
                Job::new(4, int(0), frac(9, 4)),
            ],
        )
        .unwrap();
        let mut by_id: Vec<usize> = (0..4).collect();
        by_id.sort_by_key(|&k| i.jobs()[k].id);
        for obj in [Objective::Makespan, Objective::TotalCompletion] {
            let scaled = search(&ScaledClock::new(&i).unwrap(), &by_id, obj).unwrap();
            let exact = search(&ExactClock::new(&i), &by_id, obj).unwrap();
            assert_eq!(scaled, exact);
        }
    }

    #[test]
    fn overflow_falls_back_to_exact_arithmetic() {
        let big = Rational::new(BigInt::from(1) << 100u32, BigInt::from(3));
        let i = Instance::new(
            int(2),
            vec![Job::new(1, big.clone(), int(0)), Job::new(2, int(1), big)],
        )
        .unwrap();
        let opt = brute_force(&i, Objective::Makespan).unwrap();
        assert_eq!(opt.best_value, Objective::Makespan.value(&i, &opt.best_schedule).unwrap());
        let other = canonical_starts(&i, &ids(&[2, 1])).unwrap();
        let first = canonical_starts(&i, &ids(&[1, 2])).unwrap();
        let expect = Objective::Makespan
            .value(&i, &other)
            .unwrap()
            .min(Objective::Makespan.value(&i, &first).unwrap());
        assert_eq!(opt.best_value, expect);
    }

    #[test]
    fn release_bound() {
        let i = inst(int(1), &[(1, 11, 10), (2, 10, 30)]);
        assert_eq!(lb_release(&i), int(40));
        assert_eq!(brute_force(&i, Objective::Makespan).unwrap().best_value, int(72));

        let i = inst(int(1), &[(1, 3, 0), (2, 4, 0)]);
        assert_eq!(lb_release(&i), int(0));

        let i = inst(int(2), &[(1, 3, 1), (2, 4, 1)]);
        assert_eq!(lb_release(&i), int(3));
    }

    #[test]
    fn sorted_subset_costs() {
        let b = int(1);
        assert_eq!(sorted_subset_cost(&b, &[int(1), int(2)], &int(0)), int(4));
        assert_eq!(sorted_subset_cost(&b, &[int(2), int(1)], &int(0)), int(4));
        assert_eq!(sorted_subset_cost(&b, &[], &int(5)), int(5));
        assert_eq!(sorted_subset_cost(&b, &[int(0), int(0)], &int(1)), int(4));
        // descending order is never cheaper
        assert_eq!(chained_cost(&b, &[int(2), int(1)], &int(0)), int(5));
    }

    #[test]
    fn combined_bound() {
        let i = inst(int(1), &[(1, 5, 0), (2, 1, 2)]);
        assert_eq!(lb_release(&i), int(2));
        assert_eq!(lb_fixed(&i), int(7));
        assert_eq!(lb_combined(&i), int(7));

        let zeros = inst(int(1), &[(1, 0, 3), (2, 0, 5)]);
        assert_eq!(lb_combined(&zeros), lb_release(&zeros));

        let single = inst(int(1), &[(1, 4, 3)]);
        assert_eq!(lb_combined(&single), int(4));
        assert!(brute_force(&single, Objective::Makespan).unwrap().best_value >= lb_combined(&single));
    }

    #[test]
    fn ratios() {
        let i = inst(int(1), &[(1, 5, 0), (2, 1, 2)]);
        assert_eq!(
            approximation_ratio(&i, &ectf(&i), Objective::Makespan, 10).unwrap(),
            frac(15, 11)
        );
        let opt = brute_force(&i, Objective::Makespan).unwrap();
        assert_eq!(
            approximation_ratio(&i, &opt.best_schedule, Objective::Makespan, 10).unwrap(),
            int(1)
        );

        let i = inst(int(1), &[(1, 8, 0), (2, 0, 1), (3, 0, 1)]);
        assert_eq!(
            approximation_ratio(&i, &non_idling(&i), Objective::Makespan, 10).unwrap(),
            int(2)
        );
    }

    #[test]
    fn zero_optimum() {
        assert_eq!(ratio(&int(0), &int(0)).unwrap(), int(1));
        assert!(matches!(ratio(&int(1), &int(0)), Err(OracleError::DegenerateOptimum(_))));
        let i = inst(int(1), &[(1, 0, 0), (2, 0, 0)]);
        assert_eq!(approximation_ratio(&i, &ectf(&i), Objective::Makespan, 10).unwrap(), int(1));
    }
}
