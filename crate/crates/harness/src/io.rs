//! JSON documents for instances, schedules and pseudomatchings.
//!
//! Rationals are always quoted strings, `"p"` or `"p/q"`; bare JSON numbers
//! and decimal points are rejected so values stay exact. Job ids are plain
//! JSON integers.

use std::collections::BTreeMap;

use detsched::model::{canonical_starts, evaluate, Instance, Job, JobId, ModelError, Schedule};
use detsched::pseudomatching::{BoundingSets, Edge, Indexed, PmError, Pseudomatching};
use detsched::rational::{format_rational, parse_rational, ParseRationalError, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {source}")]
    Field {
        field: String,
        #[source]
        source: ParseRationalError,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ParseError {
    /// Whether the document parsed but describes an infeasible schedule.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, ParseError::Model(ModelError::InfeasibleSchedule { .. }))
    }
}

fn field(name: impl Into<String>, text: &str) -> Result<Rational, ParseError> {
    parse_rational(text).map_err(|source| ParseError::Field {
        field: name.into(),
        source,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    beta: String,
    jobs: Vec<JobDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobDoc {
    id: u64,
    alpha: String,
    release: String,
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    let beta = field("beta", &doc.beta)?;
    let jobs = doc
        .jobs
        .iter()
        .enumerate()
        .map(|(k, j)| {
            Ok(Job {
                id: JobId(j.id),
                alpha: field(format!("jobs[{k}].alpha"), &j.alpha)?,
                release: field(format!("jobs[{k}].release"), &j.release)?,
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok(Instance::new(beta, jobs)?)
}

pub fn write_instance(instance: &Instance) -> String {
    let doc = InstanceDoc {
        beta: format_rational(instance.beta()),
        jobs: instance
            .jobs()
            .iter()
            .map(|j| JobDoc {
                id: j.id.0,
                alpha: format_rational(&j.alpha),
                release: format_rational(&j.release),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes") + "\n"
}

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    order: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    starts: Option<Vec<String>>,
}

/// Reads `{"order": [...], "starts": [...]}`. Without `starts` the order is
/// timed canonically; with them, the schedule is checked for feasibility.
/// Other fields are ignored, so the output of `solve` can be read back.
pub fn parse_schedule(text: &str, instance: &Instance) -> Result<Schedule, ParseError> {
    let doc: ScheduleDoc = serde_json::from_str(text)?;
    let order: Vec<JobId> = doc.order.iter().map(|&id| JobId(id)).collect();
    match doc.starts {
        None => Ok(canonical_starts(instance, &order)?),
        Some(starts) => {
            if starts.len() != order.len() {
                return Err(ParseError::Invalid(format!(
                    "{} starts for {} jobs",
                    starts.len(),
                    order.len()
                )));
            }
            let starts = starts
                .iter()
                .enumerate()
                .map(|(k, s)| field(format!("starts[{k}]"), s))
                .collect::<Result<Vec<_>, _>>()?;
            let schedule = Schedule { order, starts };
            evaluate(instance, &schedule)?;
            Ok(schedule)
        }
    }
}

pub fn write_schedule(schedule: &Schedule) -> String {
    let doc = ScheduleDoc {
        order: schedule.order.iter().map(|id| id.0).collect(),
        starts: Some(schedule.starts.iter().map(format_rational).collect()),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes") + "\n"
}

/// Which bound a matching document claims.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchingKind {
    Rho(Rational),
    Weak,
}

#[derive(Debug, Clone)]
pub struct MatchingDoc {
    pub kind: MatchingKind,
    pub sets: BoundingSets,
    pub matching: Pseudomatching,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ValuesDoc {
    Listed(Vec<String>),
    Indexed(BTreeMap<String, String>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatchingDoc {
    kind: String,
    #[serde(default)]
    rho: Option<String>,
    #[serde(default)]
    beta: Option<String>,
    #[serde(default)]
    n: Option<usize>,
    a: ValuesDoc,
    o: ValuesDoc,
    edges: Vec<(usize, usize)>,
}

fn indexed(side: &str, values: ValuesDoc) -> Result<Vec<Indexed>, ParseError> {
    let pairs: Vec<(usize, String)> = match values {
        ValuesDoc::Listed(v) => v.into_iter().enumerate().map(|(k, s)| (k + 1, s)).collect(),
        ValuesDoc::Indexed(m) => m
            .into_iter()
            .map(|(k, v)| {
                k.parse::<usize>()
                    .map(|index| (index, v))
                    .map_err(|_| ParseError::Invalid(format!("{side}: index {k:?} is not a positive integer")))
            })
            .collect::<Result<_, _>>()?,
    };
    pairs
        .into_iter()
        .map(|(index, s)| {
            Ok(Indexed {
                index,
                value: field(format!("{side}[{index}]"), &s)?,
            })
        })
        .collect()
}

/// Reads a bounding-graph document:
///
/// ```json
/// {"kind": "rho", "rho": "2", "a": ["1", "2"], "o": ["2", "5"], "edges": [[1, 2], [2, 2]]}
/// {"kind": "weak", "beta": "1", "n": 2, "a": {"2": "1"}, "o": {"1": "2"}, "edges": [[2, 1]]}
/// ```
///
/// `a` and `o` are lists (indexed from 1) or objects keyed by index. `n`
/// defaults to the largest index, `beta` to 1.
pub fn parse_matching(text: &str) -> Result<MatchingDoc, ParseError> {
    let raw: RawMatchingDoc = serde_json::from_str(text)?;
    let kind = match raw.kind.as_str() {
        "rho" => {
            let rho = raw
                .rho
                .as_deref()
                .ok_or_else(|| ParseError::Invalid("rho matching needs a \"rho\" field".into()))?;
            MatchingKind::Rho(field("rho", rho)?)
        }
        "weak" => MatchingKind::Weak,
        other => return Err(ParseError::Invalid(format!("unknown kind {other:?} (expected rho or weak)"))),
    };
    let beta = match raw.beta.as_deref() {
        Some(b) => field("beta", b)?,
        None => Rational::from_integer(1.into()),
    };
    let a = indexed("a", raw.a)?;
    let o = indexed("o", raw.o)?;
    let n = raw
        .n
        .unwrap_or_else(|| a.iter().chain(&o).map(|x| x.index).max().unwrap_or(0));
    let sets = BoundingSets::new(a, o, n, beta).map_err(|e| match e {
        PmError::BadSets(msg) => ParseError::Invalid(msg),
        other => ParseError::Invalid(other.to_string()),
    })?;
    let matching = Pseudomatching {
        edges: raw.edges.into_iter().map(|(a, o)| Edge { a, o }).collect(),
    };
    Ok(MatchingDoc { kind, sets, matching })
}

#[cfg(test)]
mod tests {
    use super::*;
    use detsched::rational::{frac, int};

    const RUNNING: &str = r#"{"beta":"1","jobs":[{"id":1,"alpha":"5","release":"0"},{"id":2,"alpha":"1","release":"2"}]}"#;

    #[test]
    fn instance_examples() {
        let i = parse_instance(RUNNING).unwrap();
        assert_eq!(i.len(), 2);
        assert_eq!(i.job(JobId(2)).unwrap().release, int(2));
        assert_eq!(parse_instance(&write_instance(&i)).unwrap(), i);

        let b = parse_instance(r#"{"beta":"3/2","jobs":[{"id":1,"alpha":"1","release":"0"}]}"#).unwrap();
        assert_eq!(b.beta(), &frac(3, 2));

        let err = parse_instance(r#"{"beta":"0.5","jobs":[{"id":1,"alpha":"1","release":"0"}]}"#).unwrap_err();
        assert!(matches!(err, ParseError::Field { ref field, .. } if field == "beta"));
        let err = parse_instance(r#"{"beta":"1","jobs":[{"id":1,"alpha":"x","release":"0"}]}"#).unwrap_err();
        assert_eq!(err.to_string().split(':').next(), Some("jobs[0].alpha"));
    }

    #[test]
    fn bare_numbers_rejected() {
        let err = parse_instance(r#"{"beta":1,"jobs":[]}"#).unwrap_err();
        assert!(matches!(err, ParseError::Json(_)));
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn invalid_instances_rejected() {
        assert!(matches!(
            parse_instance(r#"{"beta":"0","jobs":[{"id":1,"alpha":"1","release":"0"}]}"#),
            Err(ParseError::Model(ModelError::BetaNonPositive(_)))
        ));
        assert!(matches!(
            parse_instance(r#"{"beta":"1","jobs":[{"id":1,"alpha":"1","release":"0"},{"id":1,"alpha":"1","release":"0"}]}"#),
            Err(ParseError::Model(ModelError::DuplicateId(_)))
        ));
        assert!(parse_instance(r#"{"beta":"1","jobs":[],"extra":1}"#).is_err());
    }

    #[test]
    fn schedule_examples() {
        let i = parse_instance(RUNNING).unwrap();
        let s = parse_schedule(r#"{"order":[2,1]}"#, &i).unwrap();
        assert_eq!(s.starts, vec![int(2), int(5)]);
        let t = parse_schedule(r#"{"order":[2,1],"starts":["2","5"]}"#, &i).unwrap();
        assert_eq!(s, t);
        assert_eq!(parse_schedule(&write_schedule(&s), &i).unwrap(), s);
        let err = parse_schedule(r#"{"order":[2,1],"starts":["1","5"]}"#, &i).unwrap_err();
        assert!(err.is_infeasible());
        assert!(matches!(
            parse_schedule(r#"{"order":[2,2]}"#, &i),
            Err(ParseError::Model(ModelError::NotAPermutation(_)))
        ));
    }

    #[test]
    fn matching_documents() {
        let m = parse_matching(r#"{"kind":"rho","rho":"2","a":["1","2"],"o":["2","5"],"edges":[[1,2],[2,2]]}"#).unwrap();
        assert_eq!(m.kind, MatchingKind::Rho(int(2)));
        assert_eq!(m.sets.n(), 2);
        let w = parse_matching(r#"{"kind":"weak","beta":"1","n":2,"a":{"2":"1"},"o":{"1":"2"},"edges":[[2,1]]}"#).unwrap();
        assert_eq!(w.kind, MatchingKind::Weak);
        assert_eq!(w.sets.a()[0].index, 2);
        assert!(parse_matching(r#"{"kind":"rho","a":[],"o":[],"edges":[]}"#).is_err());
        assert!(parse_matching(r#"{"kind":"weak","a":["1"],"o":[],"edges":[]}"#).is_err());
    }
}
