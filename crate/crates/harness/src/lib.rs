//! File formats, the ratio-experiment runner and cross-objective checks
//! behind the `detsched` command-line tool.

pub mod cross;
pub mod experiment;
pub mod io;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book_experiments {}
