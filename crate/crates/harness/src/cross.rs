//! Checks relating the makespan and total-completion-time optima.

use detsched::model::{makespan, total_completion, Instance};
use detsched::oracle::{brute_force_capped, Objective, OracleError};
use detsched::rational::{int, Rational};
use detsched::schedulers::ectf;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequality {
    pub name: &'static str,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl Inequality {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossReport {
    pub makespan_opt: Rational,
    pub total_completion_opt: Rational,
    pub checks: Vec<Inequality>,
}

impl CrossReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(Inequality::holds)
    }
}

/// Brute-forces both objectives and checks:
///
/// * the total-completion optimum has makespan at most `2 T*`;
/// * the makespan optimum has total completion at most `(1 + 1/b) sum C*`;
/// * ECTF has total completion at most `(1 + 1/b)(3 + 1/b) sum C*`.
pub fn cross_objective_check(instance: &Instance, cap: usize) -> Result<CrossReport, OracleError> {
    let by_makespan = brute_force_capped(instance, Objective::Makespan, cap)?;
    let by_sum = brute_force_capped(instance, Objective::TotalCompletion, cap)?;
    let t_star = by_makespan.best_value.clone();
    let sum_star = by_sum.best_value.clone();
    let inv = instance.beta().recip();
    let one_plus = int(1) + &inv;

    let checks = vec![
        Inequality {
            name: "sum-optimal makespan <= 2 T*",
            lhs: makespan(instance, &by_sum.best_schedule)?,
            rhs: int(2) * &t_star,
        },
        Inequality {
            name: "makespan-optimal sum <= (1+1/beta) sum*",
            lhs: total_completion(instance, &by_makespan.best_schedule)?,
            rhs: &one_plus * &sum_star,
        },
        Inequality {
            name: "ectf sum <= (1+1/beta)(3+1/beta) sum*",
            lhs: total_completion(instance, &ectf(instance))?,
            rhs: &one_plus * (int(3) + &inv) * &sum_star,
        },
    ];
    Ok(CrossReport {
        makespan_opt: t_star,
        total_completion_opt: sum_star,
        checks,
    })
}
