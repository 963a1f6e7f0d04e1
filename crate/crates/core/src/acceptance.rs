//! The release-gate suite: ten criteria, each recomputing its claims with an
//! independent oracle where one exists. Reports carry no timings so two runs
//! serialize identically.

use std::collections::BTreeMap;

use num_integer::Roots;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bjn::{
    synthesize_from_density, synthesize_from_nonpathological, verify_bjn, verify_prob_form,
};
use crate::citation::citation;
use crate::config::RunConfig;
use crate::construction::{
    contract_level, find_pathological_cover, schachermayer_jn_seq, schachermayer_member,
    schachermayer_obstruction, separation_audit, summable_separation, BijectionSpec,
    HalfMassSearch,
};
use crate::error::{Error, Result};
use crate::ideal::{summable_filter, BjnpStatus, FilterSpec, JnpStatus};
use crate::measure::{FinMeasure, Point};
use crate::omega::OmegaSet;
use crate::rational::{pow2, q, qi, Q};
use crate::reduction::{build_katetov_witness, discrepancy, measure_transfer, verify_katetov};
use crate::submeasure::{BlockSum, Covering, DensitySpec, SubmeasureSpec, LP_HARD_CAP};

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "summable separation"),
    (2, "density synthesis"),
    (3, "non-pathological synthesis"),
    (4, "measure transfer"),
    (5, "Katetov pipeline"),
    (6, "pathology gaps"),
    (7, "half-mass search"),
    (8, "Schachermayer suite"),
    (9, "status engine"),
    (10, "determinism"),
];

/// Deliberate defects for exercising the gate itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Faults {
    /// Generate the density blocks on [0, 2^k) instead of [2^k, 2^(k+1)).
    pub corrupt_density: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub config: RunConfig,
    pub criteria: Vec<CriterionResult>,
    pub pass: bool,
}

/// Accumulates named checks; the first failure becomes the detail.
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks {
            failures: vec![],
            notes: vec![],
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    fn finish(self, id: u8) -> CriterionResult {
        let name = CRITERIA[id as usize - 1].1;
        let pass = self.failures.is_empty();
        let detail = if pass {
            self.notes.join("; ")
        } else {
            let extra = self.failures.len() - 1;
            let mut d = self.failures[0].clone();
            if extra > 0 {
                d.push_str(&format!(" (+{extra} more)"));
            }
            d
        };
        CriterionResult {
            id,
            name,
            pass,
            detail,
        }
    }
}

fn errored(id: u8, e: Error) -> CriterionResult {
    CriterionResult {
        id,
        name: CRITERIA[id as usize - 1].1,
        pass: false,
        detail: format!("{} {}", e.code(), e),
    }
}

pub fn run_criterion(id: u8, cfg: &RunConfig, faults: Faults) -> CriterionResult {
    let r = match id {
        1 => separation(cfg),
        2 => density(faults),
        3 => nonpath(cfg),
        4 => transfer(),
        5 => katetov(),
        6 => gaps(cfg),
        7 => half_mass(),
        8 => schachermayer(),
        9 => status(),
        10 => determinism(cfg, faults),
        _ => Err(Error::InvalidInput(format!("no criterion {id}"))),
    };
    r.unwrap_or_else(|e| errored(id, e))
}

pub fn selftest(cfg: &RunConfig, faults: Faults) -> SelftestReport {
    let criteria: Vec<CriterionResult> = CRITERIA
        .iter()
        .map(|&(id, _)| run_criterion(id, cfg, faults))
        .collect();
    SelftestReport {
        config: cfg.clone(),
        pass: criteria.iter().all(|c| c.pass),
        criteria,
    }
}

fn separation(cfg: &RunConfig) -> Result<CriterionResult> {
    let precision = cfg.precision_bits.max(64);
    let r = summable_separation(&q(1, 2), &qi(1), &BijectionSpec::Identity, 8, precision)?;
    let mut c = Checks::new();
    let width_cap = pow2(-64);
    for b in &r.blocks {
        let n = b.index;
        c.check(b.p_sum.lower() >= &qi(1), || {
            format!("block {n} p-sum below 1")
        });
        c.check(b.p_sum.upper().is_some_and(|u| *u < qi(2)), || {
            format!("block {n} p-sum not below 2")
        });
        c.check(
            b.q_image_sum
                .upper()
                .is_some_and(|u| *u <= pow2(-(n as i64))),
            || format!("block {n} q-image sum above 2^-{n}"),
        );
        for s in [&b.p_sum, &b.q_image_sum] {
            c.check(s.width().is_some_and(|w| w <= width_cap), || {
                format!("block {n} enclosure wider than 2^-64")
            });
        }
        c.check(b.elements.windows(2).all(|w| w[0] < w[1]), || {
            format!("block {n} not increasing")
        });
    }
    for w in r.blocks.windows(2) {
        c.check(w[0].elements.last() < w[1].elements.first(), || {
            "blocks overlap".into()
        });
    }
    for s in &r.trace {
        c.check(s.h_size >= 2 * s.m, || {
            format!("step {} has |H| < 2m", s.index)
        });
        c.check(s.m >= s.l0 && s.m >= s.l1 && s.m >= s.l2, || {
            format!("step {} threshold", s.index)
        });
        // p = 1/2, q = 1: (l0+1)^(1/2) > 2^(n+3) first holds at l0 = 2^(2n+6)
        c.check(s.l0 == 1 << (2 * s.index + 6), || {
            format!("step {} l0 = {}", s.index, s.l0)
        });
    }
    let audit = separation_audit(&r, None);
    c.check(audit.p_sum.lower() >= &qi(8), || {
        "audited p-sum below 8".into()
    });
    c.check(audit.q_sum_at_most_two, || "audited q-sum above 2".into());
    c.note(format!(
        "{} blocks, p-sum >= {}, q-sum <= {}",
        r.blocks.len(),
        approx(audit.p_sum.lower()),
        audit.q_image_sum.upper().map_or("inf".into(), approx)
    ));
    Ok(c.finish(1))
}

fn approx(x: &Q) -> String {
    format!("{:.6}", x.to_f64().unwrap_or(f64::NAN))
}

/// Number of perfect squares in [lo, hi).
fn squares_between(lo: u64, hi: u64) -> u64 {
    let below = |n: u64| if n == 0 { 0 } else { (n - 1).sqrt() + 1 };
    below(hi) - below(lo)
}

fn density_sequence(k: usize, faults: Faults) -> Result<Vec<FinMeasure>> {
    if faults.corrupt_density {
        return Ok((0..k as u32)
            .map(|n| FinMeasure::uniform(0..1u64 << n))
            .collect());
    }
    synthesize_from_density(&SubmeasureSpec::density_canonical(), k)
}

fn density(faults: Faults) -> Result<CriterionResult> {
    const K: usize = 21;
    let seq = density_sequence(K, faults)?;
    let squares = OmegaSet::finite((0..).map(|i: u64| i * i).take_while(|&s| s < 1 << K));
    let mut c = Checks::new();
    for (k, nu) in seq.iter().enumerate() {
        let got = nu.mass_of(&squares);
        let want = Q::new(squares_between(1 << k, 2 << k).into(), (1u64 << k).into());
        c.check(got == want, || {
            format!("nu_{k}(squares) = {got}, expected {want}")
        });
        if k >= 10 {
            c.check(got <= q(1, 10), || {
                format!("nu_{k}(squares) = {got} exceeds 1/10")
            });
        }
    }
    let report = verify_prob_form(
        &seq,
        &FilterSpec::density(),
        &[squares.complement()],
        Some(10),
        Some(q(1, 10)),
    )?;
    c.check(report.pass, || "verify_prob_form failed".into());
    c.note(format!("nu_10(squares) = {}", seq[10].mass_of(&squares)));
    Ok(c.finish(2))
}

fn nonpath(cfg: &RunConfig) -> Result<CriterionResult> {
    let phi = SubmeasureSpec::power(qi(1))?;
    let syn = synthesize_from_nonpathological(
        &phi,
        &qi(1),
        8,
        cfg.horizon,
        cfg.lp_domain_cap,
        cfg.precision_bits,
    )?;
    let mut c = Checks::new();
    for w in &syn.windows {
        let [lo, hi] = w.interval;
        let harmonic: Q = (lo..=hi).map(|i| q(1, i as i64 + 1)).sum();
        c.check(harmonic > q(1, 2), || {
            format!("window [{lo},{hi}] has weight {harmonic}")
        });
        c.check(w.value.exact() == Some(&harmonic), || {
            format!("window [{lo},{hi}] value disagrees")
        });
        c.check(w.witness_mass > q(1, 4), || {
            format!("window [{lo},{hi}] witness {}", w.witness_mass)
        });
        c.check(w.witness.norm() == w.witness_mass, || {
            format!("window [{lo},{hi}] witness norm")
        });
    }
    let h0 = Covering::parity(4, 0)?.normalized().to_table()?;
    let h1 = Covering::parity(4, 15)?.normalized().to_table()?;
    let patho = SubmeasureSpec::BlockSum(BlockSum::with_contracts(
        vec![h0, h1],
        vec![q(1, 2), q(1, 2)],
    )?);
    let outcome = synthesize_from_nonpathological(
        &patho,
        &q(15, 8),
        2,
        1 << 10,
        LP_HARD_CAP,
        cfg.precision_bits,
    );
    c.check(
        matches!(outcome, Err(Error::WitnessTooSmall { .. })),
        || "pathological block spec did not report WITNESS_TOO_SMALL".into(),
    );
    c.note(format!("schedule {:?}", syn.schedule()));
    Ok(c.finish(3))
}

fn random_probability(rng: &mut ChaCha8Rng, points: &[u64], lo: i64, hi: i64) -> FinMeasure {
    let w: Vec<i64> = points.iter().map(|_| rng.gen_range(lo..=hi)).collect();
    let total: i64 = w.iter().sum();
    FinMeasure::from_atoms(
        points
            .iter()
            .zip(&w)
            .map(|(&p, &x)| (Point::Nat(p), q(x, total))),
    )
}

fn distinct(rng: &mut ChaCha8Rng, count: usize, range: std::ops::Range<u64>) -> Vec<u64> {
    let mut v = rand::seq::index::sample(rng, (range.end - range.start) as usize, count)
        .into_iter()
        .map(|i| range.start + i as u64)
        .collect::<Vec<_>>();
    v.sort_unstable();
    v
}

/// max over C ⊆ A of |λ(C) − ν(C)| by enumeration.
fn brute_discrepancy(lambda: &FinMeasure, nu: &FinMeasure, a: &[u64]) -> Q {
    let lam: Vec<Q> = a.iter().map(|&x| lambda.weight(Point::Nat(x))).collect();
    let img: Vec<Q> = a.iter().map(|&x| nu.weight(Point::Nat(x))).collect();
    (0..1usize << a.len())
        .map(|m| {
            let d: Q = (0..a.len())
                .filter(|i| m >> i & 1 == 1)
                .map(|i| &lam[i] - &img[i])
                .sum();
            d.abs()
        })
        .max()
        .unwrap_or_default()
}

fn transfer() -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let eps_choices = [q(1, 2), q(2, 3), q(3, 4), qi(1)];
    let mut c = Checks::new();
    let mut worst = Q::zero();
    for t in 0..200 {
        let na = rng.gen_range(1..=8usize);
        let eps = eps_choices[rng.gen_range(0..eps_choices.len())].clone();
        // atoms at most 12/(10|B|) stay below ε/(2|A|) once |B| > 2.4|A|/ε
        let min_b = (Q::new((24 * na as i64).into(), 10.into()) / &eps)
            .to_integer()
            .try_into()
            .unwrap_or(64usize)
            + 1;
        let nb = rng.gen_range(min_b.min(64)..=64);
        let a = distinct(&mut rng, na, 0..100);
        let b = distinct(&mut rng, nb, 1000..2000);
        let lambda = random_probability(&mut rng, &a, 1, 9);
        let mu = random_probability(&mut rng, &b, 10, 12);
        let slack = &eps / Q::from_integer((2 * na).into());
        c.check(mu.atom_max() < slack, || {
            format!("instance {t}: generator broke the atom bound")
        });
        let map = measure_transfer(&lambda, &mu, &eps)?;
        let f: BTreeMap<Point, Point> = b
            .iter()
            .map(|&x| {
                (
                    Point::Nat(x),
                    Point::Nat(map.map.get(&x).copied().unwrap_or(map.overflow_target)),
                )
            })
            .collect();
        let nu = mu.pushforward(&f)?;
        let fast = discrepancy(&lambda, &nu);
        let brute = brute_discrepancy(&lambda, &nu, &a);
        c.check(fast == brute, || {
            format!("instance {t}: discrepancy {fast} vs enumeration {brute}")
        });
        c.check(map.guarantee == brute, || {
            format!("instance {t}: reported guarantee differs")
        });
        c.check(brute < eps, || {
            format!("instance {t}: discrepancy {brute} not below {eps}")
        });
        worst = worst.max(&brute / &eps);
    }
    c.note(format!(
        "200 instances, worst discrepancy/epsilon = {worst}"
    ));
    Ok(c.finish(4))
}

fn katetov() -> Result<CriterionResult> {
    let lambdas: Vec<FinMeasure> = (0..16)
        .map(|n| FinMeasure::uniform([2 * n, 2 * n + 1]))
        .collect();
    let source = DensitySpec::Canonical { truncate: None };
    let w = build_katetov_witness(&lambdas, &source, 18)?;
    let mut c = Checks::new();
    c.check(w.schedule.first() == Some(&3), || {
        format!("i_0 = {:?}, expected 3", w.schedule.first())
    });
    for (n, b) in w.blocks.iter().enumerate() {
        c.check(b.guarantee < q(1, n as i64 + 1), || {
            format!("block {n} guarantee {}", b.guarantee)
        });
    }
    let sets = [
        OmegaSet::cofinite(0..6),
        OmegaSet::cofinite([0, 2, 4, 6, 8, 10]),
    ];
    let r = verify_katetov(&w, &source, &sets, 6, &q(1, 10), 4)?;
    for s in &r.sets {
        for b in &s.bounds {
            c.check(b.holds && b.m.is_some(), || {
                format!("set {} p = {}: bound not reproduced", s.test_set, b.p)
            });
        }
    }
    c.check(r.pass, || "verify_katetov failed".into());
    c.note(format!("schedule {:?}", w.schedule));
    Ok(c.finish(5))
}

fn gaps(cfg: &RunConfig) -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let table: Vec<Q> = (0..64)
        .map(|_| q(rng.gen_range(1..=20), rng.gen_range(1..=20)))
        .collect();
    let specs = [
        SubmeasureSpec::power(qi(1))?,
        SubmeasureSpec::summable_table(table)?,
        SubmeasureSpec::density_canonical(),
    ];
    let mut c = Checks::new();
    for t in 0..100 {
        let spec = &specs[t % specs.len()];
        let size = rng.gen_range(1..=10usize.min(cfg.lp_domain_cap));
        let x = distinct(&mut rng, size, 0..64);
        let d = spec.dominated_measure_max(&x, &x, cfg.lp_domain_cap)?;
        let v = spec.eval(&x, cfg.precision_bits)?;
        c.check(v.exact() == Some(&d.value), || {
            format!("window {t} on {}: LP {} vs eval", spec.kind(), d.value)
        });
    }
    let tri = SubmeasureSpec::Covering(Covering::triangle(qi(1)));
    let norm = SubmeasureSpec::Covering(Covering::triangle(qi(1)).normalized());
    let g = tri.pathology_gap(&[0, 1, 2], LP_HARD_CAP)?;
    let gn = norm.pathology_gap(&[0, 1, 2], LP_HARD_CAP)?;
    c.check(g == q(1, 2), || format!("triangle gap {g}"));
    c.check(gn == q(1, 4), || format!("normalized triangle gap {gn}"));
    c.note(format!(
        "100 windows with gap 0; triangle gaps {g} and {gn}"
    ));
    Ok(c.finish(6))
}

/// Fewest cover sets whose union contains `a`, times the scale.
fn brute_cover_value(cover: &Covering, a: &[u64]) -> Q {
    let sets = cover.cover();
    let best = (0..1usize << sets.len())
        .filter(|m| {
            a.iter()
                .all(|x| (0..sets.len()).any(|i| m >> i & 1 == 1 && sets[i].contains(x)))
        })
        .map(|m| m.count_ones())
        .min()
        .expect("the cover covers its domain");
    Q::from_integer(best.into()) * cover.scale()
}

fn half_mass() -> Result<CriterionResult> {
    let mut blocks: Vec<Covering> = Vec::new();
    for n in 3..=7 {
        blocks.push(find_pathological_cover(n, 6, n)?.cover);
    }
    blocks.push(Covering::triangle(qi(1)).normalized());
    blocks.push(Covering::parity(3, 0)?.normalized());
    blocks.push(Covering::parity(4, 0)?.normalized());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut c = Checks::new();
    let mut tested = 0;
    let mut strict = 0;
    for (bi, cover) in blocks.iter().enumerate() {
        let eps = contract_level(cover)?;
        let x = cover.domain().to_vec();
        let spec = SubmeasureSpec::Covering(cover.clone());
        let search = HalfMassSearch::new(&spec, &eps)?;
        if search.contract_holds() != Some(true) {
            continue;
        }
        for t in 0..50 {
            let mu = loop {
                let m = FinMeasure::from_atoms(
                    x.iter().map(|&p| (Point::Nat(p), qi(rng.gen_range(0..=9)))),
                );
                if m.total().is_positive() {
                    break m;
                }
            };
            let r = search.find(&mu)?;
            tested += 1;
            if r.method == "maximal-strict-set" {
                strict += 1;
            }
            let half = mu.total() / qi(2);
            c.check(r.mu_mass >= half, || {
                format!("block {bi} measure {t}: mu(A) below half")
            });
            c.check(r.s_value <= qi(2) * &eps, || {
                format!("block {bi} measure {t}: s(A) above 2 eps")
            });
            if x.len() <= 12 {
                let a_mass: Q = r.set.iter().map(|&p| mu.weight(Point::Nat(p))).sum();
                c.check(a_mass == r.mu_mass, || {
                    format!("block {bi} measure {t}: mass mismatch")
                });
                let s = brute_cover_value(cover, &r.set);
                c.check(s == r.s_value, || {
                    format!("block {bi} measure {t}: s(A) {s} by enumeration")
                });
            }
        }
    }
    c.check(tested > 0, || "no block passed the contract".into());
    c.note(format!(
        "{} blocks, {tested} searches, {strict} by the maximal strict set",
        blocks.len()
    ));
    Ok(c.finish(7))
}

/// Pair scan well past prefix and period.
fn brute_pairs(a: &OmegaSet) -> bool {
    let start = a.prefix_len().div_ceil(2);
    (start..start + 4 * a.period() + 8).all(|k| a.contains(2 * k) == a.contains(2 * k + 1))
}

fn schachermayer() -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut c = Checks::new();
    for t in 0..100 {
        let prefix: Vec<bool> = (0..rng.gen_range(0..10)).map(|_| rng.gen()).collect();
        let cycle: Vec<bool> = if rng.gen_bool(0.5) {
            (0..rng.gen_range(1..6))
                .flat_map(|_| {
                    let b = rng.gen();
                    [b, b]
                })
                .collect()
        } else {
            (0..rng.gen_range(1..9)).map(|_| rng.gen()).collect()
        };
        let a = OmegaSet::periodic(prefix, cycle)?;
        c.check(schachermayer_member(&a) == brute_pairs(&a), || {
            format!("EP set {t}: membership disagrees")
        });
    }
    let seq = schachermayer_jn_seq(20);
    let cert = verify_bjn(&seq, &FilterSpec::Frechet, &[], Some(0), Some(Q::zero()))?;
    for cond in &cert.report.conditions {
        c.check(cond.pass, || {
            format!("JN-sequence fails {}", cond.condition)
        });
    }
    let ks: Vec<u64> = (0..13).map(|n| n * n + n).collect();
    let aligned = [
        ks.windows(2)
            .map(|w| FinMeasure::uniform(2 * w[0]..2 * w[1]))
            .collect::<Vec<_>>(),
        ks.windows(2)
            .map(|w| FinMeasure::dirac(Point::Nat(2 * w[1] - 1)))
            .collect(),
        ks.windows(2)
            .map(|w| random_probability(&mut rng, &[2 * w[0], 2 * w[0] + 1], 1, 5))
            .collect(),
    ];
    for (i, seq) in aligned.iter().enumerate() {
        let r = schachermayer_obstruction(seq, &ks)?;
        c.check(r.partition_exact, || {
            format!("sequence {i}: E-mass + O-mass differs from 1")
        });
        c.check(r.e_member && r.o_member, || {
            format!("sequence {i}: E or O outside the algebra")
        });
        c.check(
            r.rows
                .iter()
                .filter(|row| row.index % 2 == 1)
                .all(|row| row.o_mass.is_one()),
            || format!("sequence {i}: an odd-indexed O-mass differs from 1"),
        );
    }
    c.note("100 EP sets, 3 aligned sequences".into());
    Ok(c.finish(8))
}

fn status() -> Result<CriterionResult> {
    let fd = FilterSpec::density();
    let rows: Vec<(&str, FilterSpec, JnpStatus, Option<BjnpStatus>)> = vec![
        ("Frechet", FilterSpec::Frechet, JnpStatus::Jnp, None),
        ("F_d", fd.clone(), JnpStatus::NoJnp, Some(BjnpStatus::Bjnp)),
        (
            "summable 1/2",
            summable_filter(q(1, 2))?,
            JnpStatus::NoJnp,
            Some(BjnpStatus::Bjnp),
        ),
        (
            "F_d + Frechet",
            FilterSpec::free_sum(fd, FilterSpec::Frechet),
            JnpStatus::Jnp,
            None,
        ),
    ];
    let mut c = Checks::new();
    let fallback = citation("");
    for (name, f, jnp, bjnp) in rows {
        let j = f.jnp_status();
        c.check(j.status == jnp, || format!("{name}: jnp {:?}", j.status));
        c.check(
            j.citation == citation(j.rule) && j.citation != fallback,
            || format!("{name}: jnp citation"),
        );
        if let Some(want) = bjnp {
            let b = f.bjnp_status();
            c.check(b.status == want, || format!("{name}: bjnp {:?}", b.status));
            c.check(
                b.citation == citation(b.rule) && b.citation != fallback,
                || format!("{name}: bjnp citation"),
            );
        }
    }
    c.note("4 filters".into());
    Ok(c.finish(9))
}

fn determinism(cfg: &RunConfig, faults: Faults) -> Result<CriterionResult> {
    let render = || -> Result<String> {
        let rows: Vec<CriterionResult> = (1..=9).map(|id| run_criterion(id, cfg, faults)).collect();
        serde_json::to_string(&rows).map_err(|e| Error::Defect(e.to_string()))
    };
    let (a, b) = (render()?, render()?);
    let mut c = Checks::new();
    c.check(a == b, || "two runs serialized differently".into());
    c.note(format!("{} identical bytes", a.len()));
    Ok(c.finish(10))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squares_oracle() {
        assert_eq!(squares_between(1024, 2048), 14);
        assert_eq!(squares_between(0, 1), 1);
        assert_eq!(squares_between(1, 4), 1);
    }

    #[test]
    fn fault_is_named() {
        let r = run_criterion(
            2,
            &RunConfig::default(),
            Faults {
                corrupt_density: true,
            },
        );
        assert!(!r.pass);
        assert_eq!(r.name, "density synthesis");
        assert!(run_criterion(2, &RunConfig::default(), Faults::default()).pass);
    }
}
