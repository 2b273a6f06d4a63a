//! Pseudomatchings over bounding graphs.
//!
//! Two indexed families of positive values `A = {a_i}` and `O = {o_j}` of
//! equal size form a complete bipartite "bounding graph". A set of edges in
//! that graph certifies inequalities between the families:
//!
//! * a **rho-pseudomatching** matches every `a_i` exactly once, uses every
//!   `o_j` at most `rho` times, and only joins `a_i <= o_j`; it implies
//!   `sum a_i <= rho * sum o_j`.
//! * a **weak pseudomatching** matches every `a_i` exactly once and only
//!   joins `a_i <= o_j` with `i > j`; it implies
//!   `sum (1+b)^(n-i) a_i <= (1 + 1/b) * sum (1+b)^(n-j) o_j`.
//!
//! The module also builds, position by position, the 2-pseudomatching that
//! bounds the fixed load a non-interfering schedule runs after its last
//! critical position against the load of an optimal schedule.
//!
//! Indices are 1-based throughout, matching schedule positions.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::generators::{reduce_instance, relabel_for_reduction};
use crate::model::{canonical_starts, evaluate, Instance, JobId, ModelError, Schedule};
use crate::rational::{frac, int, pow, Rational};
use crate::schedulers::non_interfering;

/// A value tagged with its index in an indexed set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Indexed {
    pub index: usize,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundingSets {
    a: Vec<Indexed>,
    o: Vec<Indexed>,
    n: usize,
    beta: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// Index into `A`.
    pub a: usize,
    /// Index into `O`.
    pub o: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pseudomatching {
    pub edges: Vec<Edge>,
}

impl Pseudomatching {
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Self {
        Pseudomatching {
            edges: pairs.iter().map(|&(a, o)| Edge { a, o }).collect(),
        }
    }
}

/// First property a candidate edge set fails.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("edge ({a}, {o}) references an index outside the sets")]
    IndexOutOfRange { a: usize, o: usize },
    #[error("a_{a} is not matched")]
    Unmatched { a: usize },
    #[error("a_{a} is matched {count} times")]
    MatchedTwice { a: usize, count: usize },
    #[error("o_{o} is used {uses} times, at most {cap} allowed")]
    Overused { o: usize, uses: usize, cap: usize },
    #[error("edge ({a}, {o}) joins a larger a to a smaller o")]
    ValueOrder { a: usize, o: usize },
    #[error("edge ({a}, {o}) does not point to a strictly earlier index")]
    NotEarlier { a: usize, o: usize },
    #[error("rho must be at least 1")]
    RhoBelowOne,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PmError {
    #[error("bad bounding sets: {0}")]
    BadSets(String),
    #[error("invalid pseudomatching: {0}")]
    InvalidPseudomatching(Violation),
    #[error("2-pseudomatching construction failed at k = {k}: {reason}")]
    ConstructionFailed { k: usize, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Both sides of a bound and whether `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
}

impl BoundCheck {
    fn new(lhs: Rational, rhs: Rational) -> Self {
        let holds = lhs <= rhs;
        BoundCheck { lhs, rhs, holds }
    }
}

impl BoundingSets {
    /// Sets with explicit indices. Indices must be unique per side and lie
    /// in `1..=n`; values must be positive; both sides have equal size.
    pub fn new(a: Vec<Indexed>, o: Vec<Indexed>, n: usize, beta: Rational) -> Result<Self, PmError> {
        if a.len() != o.len() {
            return Err(PmError::BadSets(format!(
                "cardinalities differ: |A| = {}, |O| = {}",
                a.len(),
                o.len()
            )));
        }
        if beta <= Rational::zero() {
            return Err(PmError::BadSets("beta must be positive".into()));
        }
        for (side, items) in [("A", &a), ("O", &o)] {
            let mut seen = std::collections::HashSet::new();
            for it in items.iter() {
                if it.index == 0 || it.index > n {
                    return Err(PmError::BadSets(format!(
                        "{side} index {} outside 1..={n}",
                        it.index
                    )));
                }
                if !seen.insert(it.index) {
                    return Err(PmError::BadSets(format!("{side} index {} repeated", it.index)));
                }
                if it.value <= Rational::zero() {
                    return Err(PmError::BadSets(format!("{side} value at {} is not positive", it.index)));
                }
            }
        }
        Ok(BoundingSets { a, o, n, beta })
    }

    /// Sets indexed `1..=k` with `n = k`.
    pub fn from_values(a: Vec<Rational>, o: Vec<Rational>, beta: Rational) -> Result<Self, PmError> {
        let n = a.len().max(o.len());
        let label = |v: Vec<Rational>| {
            v.into_iter()
                .enumerate()
                .map(|(k, value)| Indexed { index: k + 1, value })
                .collect()
        };
        Self::new(label(a), label(o), n, beta)
    }

    pub fn a(&self) -> &[Indexed] {
        &self.a
    }

    pub fn o(&self) -> &[Indexed] {
        &self.o
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    fn a_value(&self, index: usize) -> Option<&Rational> {
        self.a.iter().find(|x| x.index == index).map(|x| &x.value)
    }

    fn o_value(&self, index: usize) -> Option<&Rational> {
        self.o.iter().find(|x| x.index == index).map(|x| &x.value)
    }
}

/// Range check, then "every `a` exactly once"; returns per-`o` use counts.
fn check_a_side(sets: &BoundingSets, m: &Pseudomatching) -> Result<BTreeMap<usize, usize>, Violation> {
    for e in &m.edges {
        if sets.a_value(e.a).is_none() || sets.o_value(e.o).is_none() {
            return Err(Violation::IndexOutOfRange { a: e.a, o: e.o });
        }
    }
    let mut a_count: BTreeMap<usize, usize> = sets.a.iter().map(|x| (x.index, 0)).collect();
    let mut o_uses: BTreeMap<usize, usize> = sets.o.iter().map(|x| (x.index, 0)).collect();
    for e in &m.edges {
        *a_count.get_mut(&e.a).expect("checked") += 1;
        *o_uses.get_mut(&e.o).expect("checked") += 1;
    }
    for (&a, &count) in &a_count {
        match count {
            0 => return Err(Violation::Unmatched { a }),
            1 => {}
            count => return Err(Violation::MatchedTwice { a, count }),
        }
    }
    Ok(o_uses)
}

fn check_values(sets: &BoundingSets, m: &Pseudomatching) -> Result<(), Violation> {
    for e in &m.edges {
        if sets.a_value(e.a) > sets.o_value(e.o) {
            return Err(Violation::ValueOrder { a: e.a, o: e.o });
        }
    }
    Ok(())
}

/// Checks the rho-pseudomatching properties in order: every `a` matched
/// exactly once, every `o` used at most `floor(rho)` times, `a_i <= o_j` on
/// every edge.
pub fn verify_rho_pm(sets: &BoundingSets, m: &Pseudomatching, rho: &Rational) -> Result<(), Violation> {
    if *rho < Rational::one() {
        return Err(Violation::RhoBelowOne);
    }
    let cap = rho.floor().to_integer().to_usize().unwrap_or(usize::MAX);
    let o_uses = check_a_side(sets, m)?;
    for (&o, &uses) in &o_uses {
        if uses > cap {
            return Err(Violation::Overused { o, uses, cap });
        }
    }
    check_values(sets, m)
}

/// `(sum a, rho * sum o)` for a valid rho-pseudomatching.
pub fn rho_bound_check(sets: &BoundingSets, m: &Pseudomatching, rho: &Rational) -> Result<BoundCheck, PmError> {
    verify_rho_pm(sets, m, rho).map_err(PmError::InvalidPseudomatching)?;
    let lhs: Rational = sets.a.iter().map(|x| &x.value).sum();
    let rhs: Rational = rho * sets.o.iter().map(|x| &x.value).sum::<Rational>();
    Ok(BoundCheck::new(lhs, rhs))
}

/// Checks the weak-pseudomatching properties: every `a` matched exactly
/// once, and every edge `(i, j)` has `i > j` and `a_i <= o_j`.
pub fn verify_weak_pm(sets: &BoundingSets, m: &Pseudomatching) -> Result<(), Violation> {
    check_a_side(sets, m)?;
    for e in &m.edges {
        if e.a <= e.o {
            return Err(Violation::NotEarlier { a: e.a, o: e.o });
        }
    }
    check_values(sets, m)
}

/// Geometrically weighted sums for a valid weak pseudomatching:
/// `sum (1+b)^(n-i) a_i` against `(1 + 1/b) * sum (1+b)^(n-j) o_j`.
pub fn weak_bound_check(sets: &BoundingSets, m: &Pseudomatching) -> Result<BoundCheck, PmError> {
    verify_weak_pm(sets, m).map_err(PmError::InvalidPseudomatching)?;
    let growth = Rational::one() + &sets.beta;
    let weighted = |items: &[Indexed]| -> Rational {
        items
            .iter()
            .map(|x| pow(&growth, sets.n - x.index) * &x.value)
            .sum()
    };
    let lhs = weighted(&sets.a);
    let rhs = (Rational::one() + sets.beta.recip()) * weighted(&sets.o);
    Ok(BoundCheck::new(lhs, rhs))
}

/// Largest position `k` at which the algorithm's `k`-th completion does not
/// exceed the optimal schedule's `k`-th completion; 0 if there is none.
pub fn last_critical_index(
    instance: &Instance,
    algorithm_schedule: &Schedule,
    optimal_schedule: &Schedule,
) -> Result<usize, ModelError> {
    let alg = evaluate(instance, algorithm_schedule)?;
    let opt = evaluate(instance, optimal_schedule)?;
    Ok(alg
        .completions()
        .zip(opt.completions())
        .enumerate()
        .filter(|(_, (c, c_opt))| c <= c_opt)
        .map(|(k, _)| k + 1)
        .last()
        .unwrap_or(0))
}

/// The matching built for one prefix length `k` and its load bound
/// `sum_{i=l+1..k} alpha_i <= 2 * sum_{j=1..k} alpha_opt(j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KStep {
    pub k: usize,
    /// Edges `(position in the non-interfering order, position in the optimal order)`.
    pub matching: Pseudomatching,
    pub lhs: Rational,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmConstructionReport {
    pub last_critical_index: usize,
    pub steps: Vec<KStep>,
    /// Instance the construction ran on when the input schedule had gaps.
    pub reduced_instance: Option<Instance>,
    pub ni_order: Vec<JobId>,
    pub opt_order: Vec<JobId>,
}

/// Builds the 2-pseudomatchings `M_k` for every `k` after the last critical
/// position.
///
/// If `ni_schedule` has idle gaps, the instance is first reduced with
/// [`reduce_instance`]; the non-interfering schedule is recomputed there (it
/// must keep its order and lose its gaps) and the optimal order is
/// re-timed canonically on the reduced instance. The report's orders then
/// use the reduced instance's ids.
pub fn construct_two_pm(
    instance: &Instance,
    ni_schedule: &Schedule,
    optimal_schedule: &Schedule,
) -> Result<PmConstructionReport, PmError> {
    let report = evaluate(instance, ni_schedule)?;
    evaluate(instance, optimal_schedule)?;
    if !report.has_gaps() {
        let opt = canonical_starts(instance, &optimal_schedule.order)?;
        return construct_two_pm_unreduced(instance, ni_schedule, &opt);
    }
    let reduced = reduce_instance(instance, ni_schedule)?;
    let ni = non_interfering(&reduced);
    if ni.order != relabel_for_reduction(ni_schedule, &ni_schedule.order)? {
        return Err(PmError::ConstructionFailed {
            k: 0,
            reason: "non-interfering order changed on the reduced instance".into(),
        });
    }
    if evaluate(&reduced, &ni)?.has_gaps() {
        return Err(PmError::ConstructionFailed {
            k: 0,
            reason: "reduced instance still has gaps".into(),
        });
    }
    let opt_order = relabel_for_reduction(ni_schedule, &optimal_schedule.order)?;
    let opt = canonical_starts(&reduced, &opt_order)?;
    let mut out = construct_two_pm_unreduced(&reduced, &ni, &opt)?;
    out.reduced_instance = Some(reduced);
    Ok(out)
}

/// The inductive construction on the given schedules, without the
/// gap-removal step.
pub fn construct_two_pm_unreduced(
    instance: &Instance,
    ni_schedule: &Schedule,
    optimal_schedule: &Schedule,
) -> Result<PmConstructionReport, PmError> {
    let ell = last_critical_index(instance, ni_schedule, optimal_schedule)?;
    let n = instance.len();
    let ni_order = &ni_schedule.order;
    let opt_order = &optimal_schedule.order;
    // 1-based positions
    let ni_pos: HashMap<JobId, usize> = ni_order.iter().enumerate().map(|(p, &id)| (id, p + 1)).collect();
    let opt_pos: HashMap<JobId, usize> = opt_order.iter().enumerate().map(|(p, &id)| (id, p + 1)).collect();
    let alpha = |id: JobId| instance.job(id).map(|j| j.alpha.clone());
    let ni_alpha = |p: usize| alpha(ni_order[p - 1]);
    let opt_alpha = |q: usize| alpha(opt_order[q - 1]);

    // partner[p] = optimal position matched with non-interfering position p
    let mut partner: Vec<Option<usize>> = vec![None; n + 1];
    let mut steps = Vec::new();
    let mut lhs = Rational::zero();
    let mut opt_load = Rational::zero();
    for j in 1..=ell {
        opt_load += opt_alpha(j)?;
    }

    for k in ell + 1..=n {
        let fail = |reason: String| PmError::ConstructionFailed { k, reason };

        // The job entering the optimal prefix may already sit in A_{k-1}^-,
        // matched elsewhere; rematch it with itself.
        let entering = opt_order[k - 1];
        let p = ni_pos[&entering];
        if p > ell && p < k {
            if partner[p].is_none() {
                return Err(fail(format!("position {p} is unmatched")));
            }
            partner[p] = Some(k);
        }

        // Match the job at non-interfering position k.
        let job = ni_order[k - 1];
        let q = opt_pos[&job];
        if q <= k {
            partner[k] = Some(q);
        } else {
            let taken: Vec<usize> = partner[ell + 1..k].iter().flatten().copied().collect();
            let free = (1..=k).find(|&j| ni_pos[&opt_order[j - 1]] > k && !taken.contains(&j));
            let Some(j) = free else {
                return Err(fail("no unmatched job in the optimal prefix runs later".into()));
            };
            if ni_alpha(k)? > opt_alpha(j)? {
                return Err(fail(format!(
                    "position {k} has a larger fixed part than optimal position {j}"
                )));
            }
            partner[k] = Some(j);
        }

        let matching = Pseudomatching {
            edges: (ell + 1..=k)
                .map(|p| Edge {
                    a: p,
                    o: partner[p].expect("matched above"),
                })
                .collect(),
        };
        check_two_pm_properties(instance, k, ell, ni_order, opt_order, &matching)
            .map_err(|v| fail(v.to_string()))?;

        lhs += ni_alpha(k)?;
        opt_load += opt_alpha(k)?;
        let rhs = Rational::from_integer(2.into()) * &opt_load;
        if lhs > rhs {
            return Err(fail("load bound violated".into()));
        }
        steps.push(KStep {
            k,
            matching,
            lhs: lhs.clone(),
            rhs,
        });
    }

    Ok(PmConstructionReport {
        last_critical_index: ell,
        steps,
        reduced_instance: None,
        ni_order: ni_order.clone(),
        opt_order: opt_order.clone(),
    })
}

/// Property of a prefix 2-pseudomatching that an edge set fails.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TwoPmViolation {
    #[error("edge ({a}, {o}) outside positions 1..={k}")]
    OutOfRange { a: usize, o: usize, k: usize },
    #[error("matched positions are not exactly {first}..={k}")]
    WrongDomain { first: usize, k: usize },
    #[error("position {a} runs in the optimal prefix but is not matched with itself")]
    NotSelfMatched { a: usize },
    #[error("position {a} is matched with optimal position {o}, which is neither earlier nor later-running")]
    BadPartner { a: usize, o: usize },
    #[error("optimal position {o} has {count} partners other than itself")]
    Crowded { o: usize, count: usize },
    #[error("edge ({a}, {o}) joins a larger fixed part to a smaller one")]
    ValueOrder { a: usize, o: usize },
}

/// Checks a prefix matching `M_k` directly from the two orders:
///
/// 1. exactly the positions `l+1..=k` of the non-interfering order are
///    matched, each once;
/// 2. a job that also runs in the first `k` optimal positions is matched
///    with itself;
/// 3. any other job at position `p` is matched with an optimal position
///    `j <= p` whose job runs after position `p` in the non-interfering
///    order;
/// 4. every optimal position has at most one partner other than itself (so
///    at most two in total);
/// 5. every edge joins `alpha_i <= alpha_j`.
pub fn check_two_pm_properties(
    instance: &Instance,
    k: usize,
    ell: usize,
    ni_order: &[JobId],
    opt_order: &[JobId],
    m: &Pseudomatching,
) -> Result<(), TwoPmViolation> {
    for e in &m.edges {
        if e.a == 0 || e.a > k || e.o == 0 || e.o > k {
            return Err(TwoPmViolation::OutOfRange { a: e.a, o: e.o, k });
        }
    }
    let mut sides: Vec<usize> = m.edges.iter().map(|e| e.a).collect();
    sides.sort_unstable();
    if sides != (ell + 1..=k).collect::<Vec<_>>() {
        return Err(TwoPmViolation::WrongDomain { first: ell + 1, k });
    }

    let later_position = |job: JobId| ni_order.iter().position(|&x| x == job).map(|p| p + 1);
    let mut foreign: BTreeMap<usize, usize> = BTreeMap::new();
    for e in &m.edges {
        let job = ni_order[e.a - 1];
        let in_prefix = opt_order[..k].iter().position(|&x| x == job).map(|q| q + 1);
        match in_prefix {
            Some(q) => {
                if e.o != q {
                    return Err(TwoPmViolation::NotSelfMatched { a: e.a });
                }
            }
            None => {
                let partner_runs_at = later_position(opt_order[e.o - 1]).unwrap_or(0);
                if e.o > e.a || partner_runs_at <= e.a {
                    return Err(TwoPmViolation::BadPartner { a: e.a, o: e.o });
                }
                *foreign.entry(e.o).or_default() += 1;
            }
        }
        let alpha_a = instance.job(job).map(|j| &j.alpha).ok();
        let alpha_o = instance.job(opt_order[e.o - 1]).map(|j| &j.alpha).ok();
        if alpha_a > alpha_o {
            return Err(TwoPmViolation::ValueOrder { a: e.a, o: e.o });
        }
    }
    if let Some((&o, &count)) = foreign.iter().find(|(_, &c)| c > 1) {
        return Err(TwoPmViolation::Crowded { o, count });
    }
    Ok(())
}

/// A random valid rho-pseudomatching on `k` values per side, with integer
/// `o` values in `1..=20` and each `a` a fraction of its partner.
pub fn sample_rho_pm(seed: u64, k: usize, rho: &Rational) -> (BoundingSets, Pseudomatching) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = rho.floor().to_integer().to_usize().unwrap_or(usize::MAX).max(1);
    let o: Vec<Rational> = (0..k).map(|_| int(rng.gen_range(1..=20))).collect();
    let mut uses = vec![0usize; k];
    let mut a = Vec::with_capacity(k);
    let mut edges = Vec::with_capacity(k);
    for i in 0..k {
        // every o can absorb one a, so an open slot always exists
        let open: Vec<usize> = (0..k).filter(|&j| uses[j] < cap).collect();
        let j = open[rng.gen_range(0..open.len())];
        uses[j] += 1;
        a.push(&o[j] * frac(rng.gen_range(1..=8), 8));
        edges.push(Edge { a: i + 1, o: j + 1 });
    }
    let sets = BoundingSets::from_values(a, o, Rational::one()).expect("positive values");
    (sets, Pseudomatching { edges })
}

/// A random valid weak pseudomatching with index range `1..=n` (`n >= 2`).
pub fn sample_weak_pm(seed: u64, n: usize, beta: &Rational) -> (BoundingSets, Pseudomatching) {
    assert!(n >= 2, "a weak pseudomatching needs two indices");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..n);
    // smallest O index, leaving room for k A indices above it
    let m = rng.gen_range(1..=n - k);
    let mut above: Vec<usize> = (m + 1..=n).collect();
    above.shuffle(&mut rng);
    let mut o_idx = vec![m];
    o_idx.extend(above.iter().take(k - 1));
    above.shuffle(&mut rng);
    let a_idx: Vec<usize> = above.into_iter().take(k).collect();

    let o: Vec<Indexed> = o_idx
        .iter()
        .map(|&index| Indexed { index, value: int(rng.gen_range(1..=20)) })
        .collect();
    let mut a = Vec::with_capacity(k);
    let mut edges = Vec::with_capacity(k);
    for &i in &a_idx {
        let earlier: Vec<&Indexed> = o.iter().filter(|x| x.index < i).collect();
        let partner = earlier[rng.gen_range(0..earlier.len())];
        a.push(Indexed {
            index: i,
            value: &partner.value * frac(rng.gen_range(1..=8), 8),
        });
        edges.push(Edge { a: i, o: partner.index });
    }
    let sets = BoundingSets::new(a, o, n, beta.clone()).expect("valid by construction");
    (sets, Pseudomatching { edges })
}
