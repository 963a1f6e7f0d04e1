//! Checks of the (B)JN-sequence conditions on finite prefixes, conversions
//! between the signed and the probability forms, and synthesis of
//! witnessing sequences from submeasures.
//!
//! Every check is a desk-scale statement: the conditions are verified for
//! the indices from `tail_start` on, with an explicit tolerance. No report
//! claims the limit itself.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::citation::citation;
use crate::error::{Error, Result};
use crate::ideal::FilterSpec;
use crate::measure::{FinMeasure, Point};
use crate::omega::OmegaSet;
use crate::rational::{self, q, Q};
use crate::scalar::{refine, Scalar};
use crate::submeasure::{Decision, DensitySpec, SubmeasureSpec, Weights};

/// Precision used when membership verdicts compute tail bounds.
const MEMBER_PRECISION: u32 = 64;
/// Upper limit for adaptive refinement of strict comparisons.
const PRECISION_CEILING: u32 = 4096;

pub fn default_tolerance() -> Q {
    q(1, 100)
}

pub fn default_tail_start(len: usize) -> usize {
    len.div_ceil(2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_set: Option<usize>,
    /// One value per sequence index, starting at 0.
    #[serde(with = "rational::vec")]
    pub values: Vec<Q>,
    /// Indices at which the condition fails.
    pub failures: Vec<usize>,
    pub pass: bool,
}

impl ConditionReport {
    fn new(
        condition: &'static str,
        test_set: Option<usize>,
        values: Vec<Q>,
        ok: impl Fn(usize, &Q) -> bool,
    ) -> Self {
        let failures: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(i, v)| !ok(*i, v))
            .map(|(i, _)| i)
            .collect();
        ConditionReport {
            condition,
            test_set,
            pass: failures.is_empty(),
            values,
            failures,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub rule: &'static str,
    pub citation: &'static str,
    pub scope: String,
    #[serde(with = "crate::rational")]
    pub tolerance: Q,
    pub tail_start: usize,
    pub conditions: Vec<ConditionReport>,
    pub pass: bool,
}

impl Report {
    fn new(
        rule: &'static str,
        tolerance: Q,
        tail_start: usize,
        len: usize,
        conditions: Vec<ConditionReport>,
    ) -> Self {
        let scope = format!(
            "conditions checked on indices {tail_start}..{len} with tolerance {tolerance}; the limit over all indices is not asserted"
        );
        Report {
            rule,
            citation: citation(rule),
            scope,
            pass: conditions.iter().all(|c| c.pass),
            tolerance,
            tail_start,
            conditions,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BjnCertificate {
    pub sequence: Vec<FinMeasure>,
    pub filter: FilterSpec,
    pub test_sets: Vec<OmegaSet>,
    pub report: Report,
}

fn check_test_sets(filter: &FilterSpec, test_sets: &[OmegaSet]) -> Result<()> {
    for (i, a) in test_sets.iter().enumerate() {
        if filter.member(a, MEMBER_PRECISION).decision == Decision::Out {
            return Err(Error::TestSetNotInFilter(i));
        }
    }
    Ok(())
}

/// Conditions for a BJN-sequence on N_F: every norm is exactly 1, the
/// positive and negative parts each carry mass within `tol` of 1/2, and the
/// mass on ω ∖ A is at most `tol` for each test set A.
pub fn verify_bjn(
    seq: &[FinMeasure],
    filter: &FilterSpec,
    test_sets: &[OmegaSet],
    tail_start: Option<usize>,
    tol: Option<Q>,
) -> Result<BjnCertificate> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    check_test_sets(filter, test_sets)?;
    let tail_start = tail_start.unwrap_or_else(|| default_tail_start(seq.len()));
    let tol = tol.unwrap_or_else(default_tolerance);
    let half = q(1, 2);

    let norms = seq.iter().map(FinMeasure::norm).collect();
    let mut conditions = vec![ConditionReport::new("norm-one", None, norms, |_, v| {
        v.is_one()
    })];
    let (pos, neg): (Vec<Q>, Vec<Q>) = seq
        .iter()
        .map(|m| {
            let (p, n) = m.split_pos_neg();
            (p.total(), n.total())
        })
        .unzip();
    let near_half = |i: usize, v: &Q| i < tail_start || (v - &half).abs() <= tol;
    conditions.push(ConditionReport::new("positive-half", None, pos, near_half));
    conditions.push(ConditionReport::new("negative-half", None, neg, near_half));
    for (j, a) in test_sets.iter().enumerate() {
        let outside = a.complement();
        let values = seq.iter().map(|m| m.abs().mass_of(&outside)).collect();
        conditions.push(ConditionReport::new(
            "outside-mass",
            Some(j),
            values,
            |i, v| i < tail_start || *v <= tol,
        ));
    }
    Ok(BjnCertificate {
        sequence: seq.to_vec(),
        filter: filter.clone(),
        test_sets: test_sets.to_vec(),
        report: Report::new("bjn-conditions", tol, tail_start, seq.len(), conditions),
    })
}

fn check_probabilities(seq: &[FinMeasure]) -> Result<()> {
    for (i, m) in seq.iter().enumerate() {
        if m.has_star() {
            return Err(Error::SupportHitsStar(i));
        }
        if !m.is_probability() {
            return Err(Error::NotProbability(i));
        }
    }
    Ok(())
}

/// μ_n(A) ≥ 1 − tol for n ≥ tail_start and each test set A.
pub fn verify_prob_form(
    seq: &[FinMeasure],
    filter: &FilterSpec,
    test_sets: &[OmegaSet],
    tail_start: Option<usize>,
    tol: Option<Q>,
) -> Result<Report> {
    check_probabilities(seq)?;
    check_test_sets(filter, test_sets)?;
    let tail_start = tail_start.unwrap_or_else(|| default_tail_start(seq.len()));
    let tol = tol.unwrap_or_else(default_tolerance);
    let floor = Q::one() - &tol;
    let conditions = test_sets
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let values = seq.iter().map(|m| m.mass_of(a)).collect();
            ConditionReport::new("set-mass", Some(j), values, |i, v| {
                i < tail_start || *v >= floor
            })
        })
        .collect();
    Ok(Report::new(
        "prob-form",
        tol,
        tail_start,
        seq.len(),
        conditions,
    ))
}

/// ν_n = ½δ_⋆ − ½μ_n.
pub fn to_bjn_form(seq: &[FinMeasure]) -> Result<Vec<FinMeasure>> {
    check_probabilities(seq)?;
    let half = q(1, 2);
    Ok(seq
        .iter()
        .map(|m| {
            FinMeasure::dirac(Point::Star)
                .scale(&half)
                .sub(&m.scale(&half))
        })
        .collect())
}

/// μ_n = |θ_n| for disjointly supported norm-one measures on ω.
pub fn from_bjn_form(seq: &[FinMeasure]) -> Result<Vec<FinMeasure>> {
    let mut seen = std::collections::BTreeSet::new();
    for (i, m) in seq.iter().enumerate() {
        if m.has_star() {
            return Err(Error::SupportHitsStar(i));
        }
        if !m.norm().is_one() {
            return Err(Error::Precondition(format!(
                "measure {i} does not have norm 1"
            )));
        }
        for x in m.nat_support() {
            if !seen.insert(x) {
                return Err(Error::OverlappingSupports(x.to_string()));
            }
        }
    }
    Ok(seq.iter().map(FinMeasure::abs).collect())
}

fn density_of(phi: &SubmeasureSpec) -> Result<&DensitySpec> {
    match phi {
        SubmeasureSpec::Density(d) => Ok(d),
        other => Err(Error::Precondition(format!(
            "expected a density submeasure, got {}",
            other.kind()
        ))),
    }
}

/// The first `k` blocks of a density submeasure, each normalized.
pub fn synthesize_from_density(phi: &SubmeasureSpec, k: usize) -> Result<Vec<FinMeasure>> {
    let d = density_of(phi)?;
    (0..k)
        .map(|n| {
            let block = d.block(n).ok_or(Error::ZeroMassBlock(n))?;
            let mass = block.total();
            if mass.is_zero() {
                return Err(Error::ZeroMassBlock(n));
            }
            Ok(if mass.is_one() {
                block
            } else {
                block.scale(&mass.recip())
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Window {
    pub interval: [u64; 2],
    /// φ on the closed interval.
    pub value: Scalar,
    /// Dominated measure on the interval before normalization.
    pub witness: FinMeasure,
    #[serde(with = "crate::rational")]
    pub witness_mass: Q,
    pub method: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonpathSynthesis {
    #[serde(with = "crate::rational")]
    pub alpha_lower: Q,
    pub windows: Vec<Window>,
    pub sequence: Vec<FinMeasure>,
    pub rule: &'static str,
    pub citation: &'static str,
}

impl NonpathSynthesis {
    pub fn schedule(&self) -> Vec<[u64; 2]> {
        self.windows.iter().map(|w| w.interval).collect()
    }
}

/// Points of the closed interval on which φ can be evaluated.
fn window_points(domain: &Option<Vec<u64>>, lo: u64, hi: u64) -> Vec<u64> {
    match domain {
        Some(d) => d.iter().copied().filter(|&x| lo <= x && x <= hi).collect(),
        None => (lo..=hi).collect(),
    }
}

fn exceeds(phi: &SubmeasureSpec, points: &[u64], bound: &Q, precision: u32) -> Result<bool> {
    let mut err = None;
    let out = refine(precision, PRECISION_CEILING, |bits| {
        match phi.eval(points, bits) {
            Ok(v) => v.compare(bound).map(|o| o.is_gt()),
            Err(e) => {
                err = Some(e);
                Some(false)
            }
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// A nonnegative measure on the window dominated by φ, with its method.
fn dominated_witness(
    phi: &SubmeasureSpec,
    points: &[u64],
    lp_cap: usize,
    precision: u32,
) -> Result<(FinMeasure, &'static str)> {
    match phi {
        SubmeasureSpec::Summable(Weights::Power(p)) => Ok((
            FinMeasure::from_atoms(
                points
                    .iter()
                    .map(|&i| (Point::Nat(i), p.weight(i, precision).lower().clone())),
            ),
            "summable-lower-weights",
        )),
        SubmeasureSpec::Summable(w) => Ok((
            FinMeasure::from_atoms(
                points
                    .iter()
                    .map(|&i| (Point::Nat(i), w.weight_exact(i).unwrap_or_default())),
            ),
            "summable-restriction",
        )),
        SubmeasureSpec::Density(d) => {
            let (lo, hi) = match (points.first(), points.last()) {
                (Some(&lo), Some(&hi)) => (lo, hi),
                _ => return Ok((FinMeasure::zero(), "density-block")),
            };
            let inside = OmegaSet::interval(lo, hi + 1);
            let candidates: Vec<usize> = match d {
                DensitySpec::Canonical { .. } => {
                    let first = if lo == 0 {
                        0
                    } else {
                        63 - lo.leading_zeros() as usize
                    };
                    let last = if hi == 0 {
                        0
                    } else {
                        63 - hi.leading_zeros() as usize
                    };
                    (first..=last).collect()
                }
                DensitySpec::Explicit(b) => (0..b.len()).collect(),
            };
            let mut best: Option<(Q, FinMeasure)> = None;
            for n in candidates {
                let Some(block) = d.block(n) else { continue };
                let part = block.restrict(&inside, false);
                let mass = part.total();
                if best.as_ref().is_none_or(|(m, _)| mass > *m) {
                    best = Some((mass, part));
                }
            }
            Ok((best.map(|(_, m)| m).unwrap_or_default(), "density-block"))
        }
        _ => {
            let dom = phi.dominated_measure_max(points, points, lp_cap)?;
            Ok((dom.witness, "domination-program"))
        }
    }
}

/// Builds n_0 = 0 < n_1 < … with each n_{k+1} least such that
/// φ([n_k, n_{k+1}]) > α/2, then normalizes a dominated measure of mass
/// > α/4 on each closed window.
pub fn synthesize_from_nonpathological(
    phi: &SubmeasureSpec,
    alpha_lower: &Q,
    k: usize,
    horizon: u64,
    lp_cap: usize,
    precision: u32,
) -> Result<NonpathSynthesis> {
    if !alpha_lower.is_positive() {
        return Err(Error::Precondition("alpha_lower must be positive".into()));
    }
    let half = alpha_lower / Q::from_integer(2.into());
    let quarter = alpha_lower / Q::from_integer(4.into());
    let domain = phi.domain();
    let mut windows = Vec::with_capacity(k);
    let mut sequence = Vec::with_capacity(k);
    let mut start = 0u64;
    for step in 0..k {
        let good = |m: u64| exceeds(phi, &window_points(&domain, start, m), &half, precision);
        // exponential probe, then bisection on the monotone predicate
        let mut bad = start;
        let mut gap = 1u64;
        let found = loop {
            let m = start.saturating_add(gap).min(horizon);
            if m <= bad {
                break None;
            }
            if good(m)? {
                break Some(m);
            }
            bad = m;
            gap = gap.saturating_mul(2);
        };
        let mut hi = found.ok_or(Error::HorizonExhausted(step))?;
        while hi - bad > 1 {
            let mid = bad + (hi - bad) / 2;
            if good(mid)? {
                hi = mid;
            } else {
                bad = mid;
            }
        }
        let points = window_points(&domain, start, hi);
        let value = phi.eval(&points, precision)?;
        let (witness, method) = dominated_witness(phi, &points, lp_cap, precision)?;
        let mass = witness.total();
        if mass <= quarter {
            return Err(Error::WitnessTooSmall {
                start,
                end: hi,
                value: rational::render(&mass),
                bound: rational::render(&quarter),
            });
        }
        sequence.push(witness.scale(&mass.recip()));
        windows.push(Window {
            interval: [start, hi],
            value,
            witness,
            witness_mass: mass,
            method,
        });
        start = hi;
    }
    Ok(NonpathSynthesis {
        alpha_lower: alpha_lower.clone(),
        windows,
        sequence,
        rule: "nonpathological-bjnp",
        citation: citation("nonpathological-bjnp"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extraction {
    pub density: SubmeasureSpec,
    /// Original indices of the kept measures, in block order.
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
}

/// Orders the measures by least support point and keeps each one whose
/// support starts after the previously kept one ends.
pub fn extract_density(seq: &[FinMeasure]) -> Result<Extraction> {
    check_probabilities(seq)?;
    let mut order: Vec<usize> = (0..seq.len()).collect();
    order.sort_by_key(|&i| (seq[i].nat_support().first().copied(), i));
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut last: Option<u64> = None;
    for i in order {
        let support = seq[i].nat_support();
        let (lo, hi) = (support[0], *support.last().unwrap_or(&support[0]));
        if last.is_some_and(|l| lo <= l) {
            dropped.push(i);
        } else {
            kept.push(i);
            last = Some(hi);
        }
    }
    if kept.is_empty() {
        return Err(Error::NothingKept);
    }
    dropped.sort_unstable();
    let blocks: Vec<FinMeasure> = kept.iter().map(|&i| seq[i].clone()).collect();
    let canonical = blocks.len() <= crate::submeasure::MAX_CANONICAL_BLOCKS as usize
        && blocks.iter().enumerate().all(|(n, b)| {
            b.atoms().len() == 1 << n && *b == crate::submeasure::canonical_block(n as u32)
        });
    let density = if canonical {
        SubmeasureSpec::density_truncated(blocks.len() as u32)?
    } else {
        SubmeasureSpec::density_blocks(blocks)?
    };
    Ok(Extraction {
        density,
        kept,
        dropped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportReport {
    pub rule: &'static str,
    pub citation: &'static str,
    pub allowed_exceptions: usize,
    /// Support points outside each test set, per test set.
    pub exceptions: Vec<Vec<u64>>,
    pub pass: bool,
}

/// Counts support points of the whole sequence lying outside each test set.
pub fn jn_support_check(
    seq: &[FinMeasure],
    test_sets: &[OmegaSet],
    allowed_exceptions: usize,
) -> SupportReport {
    let mut support: Vec<u64> = seq.iter().flat_map(|m| m.nat_support()).collect();
    support.sort_unstable();
    support.dedup();
    let exceptions: Vec<Vec<u64>> = test_sets
        .iter()
        .map(|a| {
            support
                .iter()
                .copied()
                .filter(|&x| !a.contains(x))
                .collect()
        })
        .collect();
    SupportReport {
        rule: "jn-support",
        citation: citation("jn-support"),
        allowed_exceptions,
        pass: exceptions.iter().all(|e| e.len() <= allowed_exceptions),
        exceptions,
    }
}

/// μ(A_n ∩ U)/μ(A_n) ≥ 1 − tol for n ≥ tail_start and each U.
pub fn check_dagger(
    mu: &FinMeasure,
    blocks: &[Vec<u64>],
    u_sets: &[OmegaSet],
    tail_start: usize,
    tol: &Q,
) -> Result<Report> {
    let block_sets: Vec<OmegaSet> = blocks
        .iter()
        .map(|b| OmegaSet::finite(b.iter().copied()))
        .collect();
    let masses: Vec<Q> = block_sets.iter().map(|b| mu.mass_of(b)).collect();
    if let Some(n) = masses.iter().position(|m| !m.is_positive()) {
        return Err(Error::ZeroBlockMass(n));
    }
    let floor = Q::one() - tol;
    let conditions = u_sets
        .iter()
        .enumerate()
        .map(|(j, u)| {
            let values = block_sets
                .iter()
                .zip(&masses)
                .map(|(b, m)| mu.mass_of(&b.intersect(u)) / m)
                .collect();
            ConditionReport::new("block-ratio", Some(j), values, |i, v| {
                i < tail_start || *v >= floor
            })
        })
        .collect();
    Ok(Report::new(
        "single-measure",
        tol.clone(),
        tail_start,
        blocks.len(),
        conditions,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::IdealSpec;
    use crate::measure::aggregate;
    use crate::rational::qi;
    use crate::submeasure::{BlockSum, Covering};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn squares_up_to(n: u64) -> OmegaSet {
        OmegaSet::finite((0..).map(|i| i * i).take_while(|&s| s < n))
    }

    fn half_pair(a: Point, b: Point) -> FinMeasure {
        FinMeasure::from_atoms([(a, q(1, 2)), (b, q(-1, 2))])
    }

    #[test]
    fn convergent_sequence_passes_exactly() {
        let seq: Vec<FinMeasure> = (0..8)
            .map(|n| half_pair(Point::Star, Point::Nat(2 * n)))
            .collect();
        let cert = verify_bjn(
            &seq,
            &FilterSpec::Frechet,
            &[OmegaSet::cofinite([0])],
            None,
            Some(qi(0)),
        )
        .unwrap();
        assert!(cert.report.pass, "{:?}", cert.report);
        assert_eq!(cert.report.tail_start, 4);
    }

    #[test]
    fn diracs_fail_balance() {
        let seq: Vec<FinMeasure> = (0..4).map(|n| FinMeasure::dirac(Point::Nat(n))).collect();
        let cert = verify_bjn(&seq, &FilterSpec::Frechet, &[], Some(0), None).unwrap();
        assert!(!cert.report.pass);
        let neg = &cert.report.conditions[2];
        assert_eq!(neg.condition, "negative-half");
        assert!(neg.values.iter().all(|v| v.is_zero()));
        assert_eq!(neg.failures, vec![0, 1, 2, 3]);
    }

    #[test]
    fn quarter_mass_on_odds_fails_outside_condition() {
        // ¼ of the mass sits on an odd point forever
        let seq: Vec<FinMeasure> = (0..6)
            .map(|n| {
                FinMeasure::from_atoms([
                    (Point::Nat(4 * n), q(1, 2)),
                    (Point::Nat(4 * n + 2), q(-1, 4)),
                    (Point::Nat(4 * n + 1), q(-1, 4)),
                ])
            })
            .collect();
        let f = FilterSpec::fr_on(OmegaSet::evens()).unwrap();
        let cert = verify_bjn(&seq, &f, &[OmegaSet::evens()], Some(0), None).unwrap();
        let out = &cert.report.conditions[3];
        assert!(!out.pass);
        assert!(out.values.iter().all(|v| *v == q(1, 4)));
    }

    #[test]
    fn errors() {
        assert_eq!(
            verify_bjn(&[], &FilterSpec::Frechet, &[], None, None).unwrap_err(),
            Error::EmptySequence
        );
        let seq = vec![half_pair(Point::Star, Point::Nat(0))];
        assert_eq!(
            verify_bjn(&seq, &FilterSpec::Frechet, &[OmegaSet::evens()], None, None).unwrap_err(),
            Error::TestSetNotInFilter(0)
        );
        let star = vec![FinMeasure::dirac(Point::Star)];
        assert_eq!(
            verify_prob_form(&star, &FilterSpec::Frechet, &[], None, None).unwrap_err(),
            Error::SupportHitsStar(0)
        );
        let half = vec![FinMeasure::dirac(Point::Nat(0)).scale(&q(1, 2))];
        assert_eq!(
            verify_prob_form(&half, &FilterSpec::Frechet, &[], None, None).unwrap_err(),
            Error::NotProbability(0)
        );
    }

    #[test]
    fn prob_form_examples() {
        let diracs: Vec<FinMeasure> = (0..10).map(|n| FinMeasure::dirac(Point::Nat(n))).collect();
        let r = verify_prob_form(
            &diracs,
            &FilterSpec::Frechet,
            &[OmegaSet::cofinite([0, 1, 2])],
            Some(3),
            Some(qi(0)),
        )
        .unwrap();
        assert!(r.pass);

        let fd = FilterSpec::density();
        let blocks = synthesize_from_density(&SubmeasureSpec::density_canonical(), 13).unwrap();
        let not_squares = squares_up_to(1 << 13).complement();
        let r = verify_prob_form(&blocks, &fd, &[not_squares], Some(10), Some(q(1, 10))).unwrap();
        assert!(r.pass);
        assert_eq!(r.conditions[0].values[10], Q::one() - q(14, 1024));

        let r = verify_prob_form(
            &blocks,
            &FilterSpec::fr_on(OmegaSet::evens()).unwrap(),
            &[OmegaSet::evens()],
            Some(2),
            None,
        )
        .unwrap();
        assert!(!r.pass);
        assert_eq!(r.conditions[0].values[5], q(1, 2));
    }

    #[test]
    fn bjn_form_conversions() {
        let to = to_bjn_form(&[FinMeasure::dirac(Point::Nat(0))]).unwrap();
        assert_eq!(to[0], half_pair(Point::Star, Point::Nat(0)));
        let from = from_bjn_form(&[half_pair(Point::Nat(0), Point::Nat(1))]).unwrap();
        assert_eq!(from[0], FinMeasure::uniform([0, 1]));
        assert!(from_bjn_form(&[half_pair(Point::Star, Point::Nat(1))]).is_err());
    }

    #[test]
    fn density_synthesis() {
        let s = synthesize_from_density(&SubmeasureSpec::density_canonical(), 3).unwrap();
        assert_eq!(
            s,
            vec![
                FinMeasure::uniform([1]),
                FinMeasure::uniform([2, 3]),
                FinMeasure::uniform(4..8)
            ]
        );
        let single = SubmeasureSpec::density_blocks(vec![FinMeasure::from_atoms([
            (Point::Nat(3), q(1, 3)),
            (Point::Nat(4), q(1, 6)),
        ])])
        .unwrap();
        let s = synthesize_from_density(&single, 1).unwrap();
        assert_eq!(s[0].weight(Point::Nat(3)), q(2, 3));
        assert_eq!(
            synthesize_from_density(&single, 2).unwrap_err(),
            Error::ZeroMassBlock(1)
        );
        let zero =
            SubmeasureSpec::density_blocks(vec![FinMeasure::uniform([1]), FinMeasure::zero()])
                .unwrap();
        assert_eq!(
            synthesize_from_density(&zero, 2).unwrap_err(),
            Error::ZeroMassBlock(1)
        );
    }

    #[test]
    fn nonpath_synthesis_on_density() {
        let phi = SubmeasureSpec::density_canonical();
        let r = synthesize_from_nonpathological(&phi, &qi(1), 4, 1 << 16, 12, 128).unwrap();
        // closed windows share endpoints
        assert_eq!(r.schedule(), vec![[0, 1], [1, 2], [2, 3], [3, 6]]);
        for w in &r.windows {
            assert!(w.witness_mass > q(1, 4));
        }
    }

    #[test]
    fn nonpath_synthesis_on_harmonic() {
        let phi = SubmeasureSpec::power(qi(1)).unwrap();
        let r = synthesize_from_nonpathological(&phi, &qi(1), 6, 1 << 16, 12, 128).unwrap();
        for w in &r.windows {
            let [lo, hi] = w.interval;
            let exact: Q = (lo..=hi).map(|i| q(1, i as i64 + 1)).sum();
            assert_eq!(w.value, Scalar::Exact(exact.clone()));
            assert!(exact > q(1, 2));
            // minimality
            if hi > lo + 1 {
                let shorter: Q = (lo..hi).map(|i| q(1, i as i64 + 1)).sum();
                assert!(shorter <= q(1, 2));
            }
            assert_eq!(w.witness_mass, exact);
        }
        assert!(r.sequence.iter().all(FinMeasure::is_probability));
    }

    #[test]
    fn nonpath_synthesis_on_root_weights() {
        let phi = SubmeasureSpec::power(q(1, 2)).unwrap();
        let r = synthesize_from_nonpathological(&phi, &qi(2), 5, 1 << 16, 12, 64).unwrap();
        for w in &r.windows {
            assert_eq!(w.value.compare(&qi(1)), Some(std::cmp::Ordering::Greater));
            assert!(w.witness_mass > q(1, 2));
            assert!(w.value.lower() >= &w.witness_mass);
        }
    }

    #[test]
    fn nonpath_synthesis_flags_pathology() {
        let h0 = Covering::parity(4, 0)
            .unwrap()
            .normalized()
            .to_table()
            .unwrap();
        let h1 = Covering::parity(4, 15)
            .unwrap()
            .normalized()
            .to_table()
            .unwrap();
        let phi = SubmeasureSpec::BlockSum(
            BlockSum::with_contracts(vec![h0, h1], vec![q(1, 2), q(1, 2)]).unwrap(),
        );
        let err = synthesize_from_nonpathological(&phi, &q(15, 8), 2, 1 << 10, 16, 64).unwrap_err();
        assert!(
            matches!(
                err,
                Error::WitnessTooSmall {
                    start: 0,
                    end: 14,
                    ..
                }
            ),
            "{err:?}"
        );
    }

    #[test]
    fn nonpath_horizon() {
        let phi = SubmeasureSpec::power(qi(1)).unwrap();
        let err = synthesize_from_nonpathological(&phi, &qi(1), 10, 20, 12, 64).unwrap_err();
        assert!(matches!(err, Error::HorizonExhausted(_)));
    }

    #[test]
    fn extraction() {
        let ordered = vec![FinMeasure::uniform([0, 1]), FinMeasure::uniform([5])];
        let e = extract_density(&ordered).unwrap();
        assert_eq!(e.kept, vec![0, 1]);
        assert!(e.dropped.is_empty());

        let inter = vec![FinMeasure::uniform([0, 2]), FinMeasure::uniform([1, 3])];
        let e = extract_density(&inter).unwrap();
        assert_eq!(e.kept, vec![0]);
        assert_eq!(e.dropped, vec![1]);
        assert_eq!(extract_density(&[]).unwrap_err(), Error::NothingKept);

        let s = synthesize_from_density(&SubmeasureSpec::density_canonical(), 6).unwrap();
        assert_eq!(
            extract_density(&s).unwrap().density,
            SubmeasureSpec::density_truncated(6).unwrap()
        );
    }

    #[test]
    fn support_check() {
        let seq: Vec<FinMeasure> = (0..5)
            .map(|n| half_pair(Point::Star, Point::Nat(2 * n + 1)))
            .collect();
        assert!(jn_support_check(&seq, &[OmegaSet::odds()], 0).pass);
        assert!(jn_support_check(&seq, &[], 0).pass);
        let blocks = synthesize_from_density(&SubmeasureSpec::density_canonical(), 6).unwrap();
        let r = jn_support_check(&blocks, &[OmegaSet::odds()], 3);
        assert!(!r.pass);
        assert_eq!(r.exceptions[0].len(), 31);
    }

    #[test]
    fn dagger() {
        let blocks = synthesize_from_density(&SubmeasureSpec::density_canonical(), 8).unwrap();
        let agg = aggregate(&blocks).unwrap();
        let r = check_dagger(
            &agg.measure,
            &agg.blocks,
            &[OmegaSet::cofinite(0..10)],
            4,
            &qi(0),
        )
        .unwrap();
        assert!(r.pass);
        let r = check_dagger(
            &agg.measure,
            &agg.blocks,
            &[OmegaSet::evens()],
            4,
            &q(1, 10),
        )
        .unwrap();
        assert!(!r.pass);
        assert_eq!(r.conditions[0].values[5], q(1, 2));
        let one = FinMeasure::uniform([3, 4]);
        let r = check_dagger(&one, &[vec![3, 4]], &[OmegaSet::interval(0, 10)], 0, &qi(0)).unwrap();
        assert_eq!(r.conditions[0].values, vec![qi(1)]);
        assert_eq!(
            check_dagger(&one, &[vec![9]], &[], 0, &qi(0)).unwrap_err(),
            Error::ZeroBlockMass(0)
        );
    }

    #[test]
    fn squares_mass_bound_per_block() {
        // squares in [2^k, 2^{k+1}) number at most 2^{(k+1)/2} + 1
        let blocks = synthesize_from_density(&SubmeasureSpec::density_canonical(), 16).unwrap();
        let sq = squares_up_to(1 << 16);
        for (k, b) in blocks.iter().enumerate() {
            let m = b.mass_of(&sq);
            let root = ((1u64 << (k + 1)) as f64).sqrt().floor() as i64;
            assert!(
                m <= Q::new((root + 1).into(), (1i64 << k).into()),
                "block {k}"
            );
        }
    }

    fn prob_measure() -> impl Strategy<Value = FinMeasure> {
        prop::collection::btree_map(0u64..40, 1i64..6, 1..6).prop_map(|m| {
            let total: i64 = m.values().sum();
            FinMeasure::from_atoms(m.into_iter().map(|(p, w)| (Point::Nat(p), q(w, total))))
        })
    }

    proptest! {
        #[test]
        fn bjn_form_is_balanced(seq in prop::collection::vec(prob_measure(), 1..6)) {
            let nu = to_bjn_form(&seq).unwrap();
            let cert = verify_bjn(&nu, &FilterSpec::Frechet, &[], Some(0), Some(qi(0))).unwrap();
            prop_assert!(cert.report.conditions.iter().take(3).all(|c| c.pass));
        }

        #[test]
        fn pushforward_preserves_preimage_mass(mu in prob_measure(), f in prop::collection::vec(0u64..10, 40), target in prop::collection::btree_set(0u64..10, 0..10)) {
            let map: BTreeMap<Point, Point> = (0..40u64).map(|i| (Point::Nat(i), Point::Nat(f[i as usize]))).collect();
            let image = mu.pushforward(&map).unwrap();
            let b = OmegaSet::finite(target.iter().copied());
            let pre = OmegaSet::finite((0..40u64).filter(|&i| target.contains(&f[i as usize])));
            prop_assert_eq!(image.mass_of(&b), mu.mass_of(&pre));
        }

        #[test]
        fn additive_witness_equals_value(w in prop::collection::vec(1i64..9, 1..5), alpha in 1i64..4) {
            let phi = SubmeasureSpec::summable_table(w.iter().map(|&x| q(x, 8)).collect()).unwrap();
            let r = synthesize_from_nonpathological(&phi, &qi(alpha), 3, 1 << 12, 12, 64).unwrap();
            for win in &r.windows {
                prop_assert_eq!(Scalar::Exact(win.witness_mass.clone()), win.value.clone());
            }
        }
    }

    #[test]
    fn density_filter_spec_is_the_dual() {
        assert_eq!(
            FilterSpec::density(),
            IdealSpec::exh(SubmeasureSpec::density_canonical()).dual()
        );
    }
}
