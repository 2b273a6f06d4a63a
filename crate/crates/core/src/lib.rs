//! Single-machine scheduling of jobs whose processing time grows linearly
//! with their start time: a job with fixed part `alpha` started at `s`
//! completes at `alpha + (1 + beta) * s`.
//!
//! All arithmetic is exact ([`rational::Rational`]).
//!
//! ```
//! use detsched::prelude::*;
//!
//! let inst = Instance::new(
//!     int(1),
//!     vec![Job::new(1, int(5), int(0)), Job::new(2, int(1), int(2))],
//! )
//! .unwrap();
//! let ni = non_interfering(&inst);
//! assert_eq!(makespan(&inst, &ni).unwrap(), int(15));
//! let opt = brute_force(&inst, Objective::Makespan).unwrap();
//! assert_eq!(opt.best_value, int(11));
//! ```

pub mod generators;
pub mod model;
pub mod oracle;
pub mod pseudomatching;
pub mod rational;
pub mod schedulers;

pub mod prelude {
    pub use crate::generators::{generate, reduce_instance, BetaSpec, Family, FamilySpec, GenError};
    pub use crate::model::{
        canonical_starts, evaluate, makespan, makespan_closed_form, total_completion, EvalReport, Instance, Job,
        JobId, ModelError, Schedule,
    };
    pub use crate::oracle::{brute_force, brute_force_capped, lb_combined, lb_fixed, lb_release, Objective, OptResult};
    pub use crate::rational::{format_rational, frac, int, parse_rational, Rational};
    pub use crate::schedulers::{best_of_two, ectf, non_idling, non_interfering, SchedulerChoice};
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/schedulers.md")]
    mod schedulers {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/generators.md")]
    mod generators {}
    #[doc = include_str!("../../../book/src/pseudomatchings.md")]
    mod pseudomatchings {}
}
