//! Explicit constructions: separation of summable filters, the
//! Schachermayer algebra, pathological block submeasures, the half-mass set
//! search, and a search for pathological covering submeasures.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::citation::citation;
use crate::error::{Error, Result};
use crate::measure::{FinMeasure, Point};
use crate::omega::OmegaSet;
use crate::rational::{self, pow2, Q};
use crate::scalar::{refine, PowerExponent, Scalar};
use crate::submeasure::{BlockSum, Covering, FiniteTable, SubmeasureSpec, COVER_CAP, LP_HARD_CAP};

/// Largest index the separation scan will examine.
pub const SEPARATION_SCAN_CAP: u64 = 1 << 26;
const PRECISION_CEILING: u32 = 4096;

/// A bijection of ω that can be evaluated and inverted exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "BijectionRepr")]
pub enum BijectionSpec {
    Identity,
    /// Permutes finitely many points and fixes the rest.
    Permutation {
        pairs: Vec<(u64, u64)>,
    },
    /// Within each block [kP, (k+1)P), sends kP + r to kP + pattern[r].
    BlockSwap {
        period: u64,
        pattern: Vec<u64>,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum BijectionRepr {
    Identity,
    Permutation { pairs: Vec<(u64, u64)> },
    BlockSwap { period: u64, pattern: Vec<u64> },
}

impl TryFrom<BijectionRepr> for BijectionSpec {
    type Error = Error;
    fn try_from(r: BijectionRepr) -> Result<Self> {
        let b = match r {
            BijectionRepr::Identity => BijectionSpec::Identity,
            BijectionRepr::Permutation { pairs } => BijectionSpec::Permutation { pairs },
            BijectionRepr::BlockSwap { period, pattern } => {
                BijectionSpec::BlockSwap { period, pattern }
            }
        };
        b.validate()?;
        Ok(b)
    }
}

impl BijectionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            BijectionSpec::Identity => Ok(()),
            BijectionSpec::Permutation { pairs } => {
                let mut from: Vec<u64> = pairs.iter().map(|p| p.0).collect();
                let mut to: Vec<u64> = pairs.iter().map(|p| p.1).collect();
                from.sort_unstable();
                to.sort_unstable();
                let distinct = from.windows(2).all(|w| w[0] < w[1]);
                if !distinct || from != to {
                    return Err(Error::InvalidInput(
                        "pairs must permute a finite set".into(),
                    ));
                }
                Ok(())
            }
            BijectionSpec::BlockSwap { period, pattern } => {
                let mut sorted = pattern.clone();
                sorted.sort_unstable();
                if *period == 0 || sorted != (0..*period).collect::<Vec<_>>() {
                    return Err(Error::InvalidInput("pattern must permute 0..period".into()));
                }
                Ok(())
            }
        }
    }

    pub fn apply(&self, n: u64) -> u64 {
        match self {
            BijectionSpec::Identity => n,
            BijectionSpec::Permutation { pairs } => {
                pairs.iter().find(|p| p.0 == n).map_or(n, |p| p.1)
            }
            BijectionSpec::BlockSwap { period, pattern } => {
                n - n % period + pattern[(n % period) as usize]
            }
        }
    }

    pub fn inverse(&self, n: u64) -> u64 {
        match self {
            BijectionSpec::Identity => n,
            BijectionSpec::Permutation { pairs } => {
                pairs.iter().find(|p| p.1 == n).map_or(n, |p| p.0)
            }
            BijectionSpec::BlockSwap { period, pattern } => {
                let r = pattern
                    .iter()
                    .position(|&x| x == n % period)
                    .expect("validated pattern") as u64;
                n - n % period + r
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationBlock {
    pub index: usize,
    pub elements: Vec<u64>,
    /// Σ_{i∈A_n} (i+1)^-p, certified in [1, 2).
    pub p_sum: Scalar,
    /// Σ_{j∈f[A_n]} (j+1)^-q, certified ≤ 2^-n.
    pub q_image_sum: Scalar,
    #[serde(with = "crate::rational")]
    pub q_bound: Q,
}

/// Quantities of one inductive step, producing block `index + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationStep {
    pub index: usize,
    pub l0: u64,
    pub l1: u64,
    pub l2: u64,
    pub m: u64,
    pub h_size: u64,
    pub b_size: u64,
    pub block_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationResult {
    #[serde(with = "crate::rational")]
    pub p: Q,
    #[serde(with = "crate::rational")]
    pub q: Q,
    pub bijection: BijectionSpec,
    pub precision: u32,
    pub blocks: Vec<SeparationBlock>,
    pub trace: Vec<SeparationStep>,
    pub rule: &'static str,
    pub citation: &'static str,
}

fn to_u64(x: &BigUint, cap: u64) -> Result<u64> {
    x.to_u64()
        .filter(|&v| v <= cap)
        .ok_or(Error::ScanLimit(cap))
}

/// Least l0 with (l0+1)^(p−q) < 2^-(n+2+q), from the integer form
/// (l0+1)^e > 2^t where D is the common denominator of p and q.
fn threshold_l0(p: &Q, q: &Q, n: usize) -> Result<u64> {
    let d = p.denom() * q.denom();
    let e = ((q - p) * Q::from_integer(d.clone())).to_integer();
    let g = (q * Q::from_integer(d.clone())).to_integer();
    let t = BigInt::from(n + 2) * &d + g;
    let (e, t) = match (e.to_u32(), t.to_u64()) {
        (Some(e), Some(t)) if t <= 1 << 20 => (e, t),
        _ => return Err(Error::ScanLimit(SEPARATION_SCAN_CAP)),
    };
    if t / e as u64 > 64 {
        return Err(Error::ScanLimit(SEPARATION_SCAN_CAP));
    }
    let root = (BigUint::one() << t as usize).nth_root(e);
    to_u64(&root, SEPARATION_SCAN_CAP)
}

/// Least l1 with l1^(1−p) > 4^p, i.e. l1^(b−a) > 4^a for p = a/b.
fn threshold_l1(p: &PowerExponent) -> Result<u64> {
    let (a, b) = (p.numer(), p.denom());
    let root = (BigUint::one() << (2 * a as usize)).nth_root(b - a);
    to_u64(&(root + 1u32), SEPARATION_SCAN_CAP)
}

/// Encloses Σ (i+1)^-p over `idx` until the comparison with `bound` is
/// decided; returns the enclosure and the verdict.
fn decide(
    p: &PowerExponent,
    idx: &[u64],
    precision: u32,
    test: impl Fn(&Scalar) -> Option<bool>,
) -> Result<(Scalar, bool)> {
    refine(precision, PRECISION_CEILING, |bits| {
        let s = p.dyadic_sum(idx, bits);
        test(&s).map(|v| (s, v))
    })
}

/// Builds A_0 = {0} and, for each step, A_{n+1} ⊆ H_{2m} ∖ [0,m) of least
/// cardinality with p-sum ≥ 1, where m = max(l0, l1, l2). Every block is
/// certified: p-sum ∈ [1, 2) and f-image q-sum ≤ 2^-n.
pub fn summable_separation(
    p: &Q,
    q: &Q,
    f: &BijectionSpec,
    steps: usize,
    precision: u32,
) -> Result<SeparationResult> {
    if !(p.is_positive() && p < q && *q <= Q::one()) {
        return Err(Error::Precondition(format!(
            "need 0 < p < q ≤ 1, got p = {p}, q = {q}"
        )));
    }
    if *p >= Q::one() {
        return Err(Error::Precondition("p must be below 1".into()));
    }
    f.validate()?;
    let pe = PowerExponent::new(p.clone())?;
    let qe = PowerExponent::new(q.clone())?;
    let l1 = threshold_l1(&pe)?;
    if l1 <= 1 {
        return Err(Error::Defect(format!("l1 = {l1} is not above 1")));
    }
    let one = Q::one();
    let two = Q::from_integer(2.into());
    let mut elements: Vec<Vec<u64>> = vec![vec![0]];
    let mut trace = Vec::with_capacity(steps);
    for n in 0..steps {
        let l0 = threshold_l0(p, q, n)?;
        let l2 = elements.iter().flatten().max().copied().unwrap_or(0) + 1;
        let m = l0.max(l1).max(l2);
        if m.saturating_mul(4) > SEPARATION_SCAN_CAP {
            return Err(Error::ScanLimit(SEPARATION_SCAN_CAP));
        }
        // H_{2m} = {i < 4m : f(i) ≥ i/2}
        let in_h = |i: u64| 2 * f.apply(i) >= i;
        let h_size = (0..4 * m).filter(|&i| in_h(i)).count() as u64;
        if h_size < 2 * m {
            return Err(Error::CardinalityShortfall {
                step: n,
                found: h_size,
                needed: 2 * m,
            });
        }
        let b: Vec<u64> = (m..4 * m).filter(|&i| in_h(i)).collect();
        let block = least_block(&pe, &b, precision)?;
        trace.push(SeparationStep {
            index: n,
            l0,
            l1,
            l2,
            m,
            h_size,
            b_size: b.len() as u64,
            block_size: block.len(),
        });
        elements.push(block);
    }

    let mut blocks = Vec::with_capacity(elements.len());
    for (n, el) in elements.into_iter().enumerate() {
        let (p_sum, ok) = decide(&pe, &el, precision, |s| {
            let lo_ok = s.lower() >= &one;
            let hi_ok = s.upper().is_some_and(|u| *u < two);
            if lo_ok && hi_ok {
                Some(true)
            } else if s.compare(&one).is_some_and(|o| o.is_lt())
                || s.compare(&two).is_some_and(|o| o.is_ge())
            {
                Some(false)
            } else {
                None
            }
        })?;
        if !ok {
            return Err(Error::Defect(format!("block {n} has p-sum outside [1, 2)")));
        }
        let q_bound = pow2(-(n as i64));
        let image: Vec<u64> = {
            let mut v: Vec<u64> = el.iter().map(|&i| f.apply(i)).collect();
            v.sort_unstable();
            v
        };
        let (q_image_sum, ok) = decide(&qe, &image, precision, |s| {
            if s.upper().is_some_and(|u| *u <= q_bound) {
                Some(true)
            } else if s.lower() > &q_bound {
                Some(false)
            } else {
                None
            }
        })?;
        if !ok {
            return Err(Error::Defect(format!(
                "block {n} has q-image sum above 2^-{n}"
            )));
        }
        blocks.push(SeparationBlock {
            index: n,
            elements: el,
            p_sum,
            q_image_sum,
            q_bound,
        });
    }
    Ok(SeparationResult {
        p: p.clone(),
        q: q.clone(),
        bijection: f.clone(),
        precision,
        blocks,
        trace,
        rule: "separation",
        citation: citation("separation"),
    })
}

/// Shortest prefix of `b` (increasing, so heaviest weights first) whose
/// p-sum is at least 1.
fn least_block(p: &PowerExponent, b: &[u64], precision: u32) -> Result<Vec<u64>> {
    let mut bits = precision + 32;
    'restart: loop {
        let unit = BigUint::one() << bits as usize;
        let mut lo = BigUint::zero();
        let mut slack = 0u64;
        for (j, &i) in b.iter().enumerate() {
            let (s, exact) = p.weight_floor(i, bits);
            lo += s;
            if !exact {
                slack += 1;
            }
            if lo >= unit {
                return Ok(b[..=j].to_vec());
            }
            if &lo + slack < unit {
                continue;
            }
            if bits >= PRECISION_CEILING {
                return Err(Error::UndecidedComparison(bits));
            }
            bits = (bits * 2).min(PRECISION_CEILING);
            continue 'restart;
        }
        return Err(Error::Defect("the candidate set has p-sum below 1".into()));
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationAudit {
    pub blocks: usize,
    /// Σ of all p-sums, with the per-block enclosures added.
    pub p_sum: Scalar,
    pub q_image_sum: Scalar,
    pub p_sum_at_least_blocks: bool,
    pub q_sum_at_most_two: bool,
    pub pass: bool,
}

/// Sums the certified enclosures of the first `n_partial` blocks (all when
/// `None`).
pub fn separation_audit(r: &SeparationResult, n_partial: Option<usize>) -> SeparationAudit {
    let take = n_partial.unwrap_or(r.blocks.len()).min(r.blocks.len());
    let blocks = &r.blocks[..take];
    let p_sum = blocks
        .iter()
        .fold(Scalar::zero(), |acc, b| acc.add(&b.p_sum));
    let q_image_sum = blocks
        .iter()
        .fold(Scalar::zero(), |acc, b| acc.add(&b.q_image_sum));
    let p_ok = p_sum.lower() >= &Q::from_integer(take.into());
    let q_ok = q_image_sum
        .upper()
        .is_some_and(|u| *u <= Q::from_integer(2.into()));
    SeparationAudit {
        blocks: take,
        p_sum,
        q_image_sum,
        p_sum_at_least_blocks: p_ok,
        q_sum_at_most_two: q_ok,
        pass: p_ok && q_ok,
    }
}

/// Does A eventually contain 2k exactly when it contains 2k+1?
pub fn schachermayer_member(a: &OmegaSet) -> bool {
    let k0 = a.prefix_len().div_ceil(2);
    (k0..k0 + a.period()).all(|k| a.contains(2 * k) == a.contains(2 * k + 1))
}

/// μ_n = ½(δ_2n − δ_2n+1).
pub fn schachermayer_jn_seq(count: usize) -> Vec<FinMeasure> {
    let half = rational::q(1, 2);
    (0..count as u64)
        .map(|n| {
            FinMeasure::from_atoms([
                (Point::Nat(2 * n), half.clone()),
                (Point::Nat(2 * n + 1), -half.clone()),
            ])
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionRow {
    pub index: usize,
    #[serde(with = "crate::rational")]
    pub e_mass: Q,
    #[serde(with = "crate::rational")]
    pub o_mass: Q,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub rule: &'static str,
    pub citation: &'static str,
    /// E = ∪ [2k_2n, 2k_2n+1) over the supplied alignment; O = ω ∖ E.
    pub e_set: OmegaSet,
    pub e_member: bool,
    pub o_member: bool,
    pub rows: Vec<ObstructionRow>,
    pub partition_exact: bool,
    /// Every even-indexed measure lives on E and every odd-indexed one on O,
    /// so neither set has masses tending to 1 along the whole sequence.
    pub alternating_full_mass: bool,
}

/// Masses of an aligned probability sequence on the two halves E and O of
/// the alternating block partition given by `ks`.
pub fn schachermayer_obstruction(seq: &[FinMeasure], ks: &[u64]) -> Result<ObstructionReport> {
    if !seq.is_empty() && ks.len() < seq.len() + 1 {
        return Err(Error::InvalidInput(format!(
            "{} measures need {} alignment points",
            seq.len(),
            seq.len() + 1
        )));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "alignment points must increase strictly".into(),
        ));
    }
    for (n, m) in seq.iter().enumerate() {
        if m.has_star() || !m.is_probability() {
            return Err(Error::NotProbability(n));
        }
        let (lo, hi) = (2 * ks[n], 2 * ks[n + 1]);
        if m.nat_support().iter().any(|&x| x < lo || x >= hi) {
            return Err(Error::MisalignedSupports(n));
        }
    }
    let e_points = ks.windows(2).step_by(2).flat_map(|w| 2 * w[0]..2 * w[1]);
    let e_set = OmegaSet::finite(e_points);
    let o_set = e_set.complement();
    let rows: Vec<ObstructionRow> = seq
        .iter()
        .enumerate()
        .map(|(index, m)| ObstructionRow {
            index,
            e_mass: m.mass_of(&e_set),
            o_mass: m.mass_of(&o_set),
        })
        .collect();
    let partition_exact = rows.iter().all(|r| (&r.e_mass + &r.o_mass).is_one());
    let alternating_full_mass = rows.iter().all(|r| {
        if r.index % 2 == 0 {
            r.e_mass.is_one()
        } else {
            r.o_mass.is_one()
        }
    });
    Ok(ObstructionReport {
        rule: "schachermayer",
        citation: citation("schachermayer"),
        e_member: schachermayer_member(&e_set),
        o_member: schachermayer_member(&o_set),
        e_set,
        rows,
        partition_exact,
        alternating_full_mass,
    })
}

/// Validates every block against its contract and returns the block sum.
pub fn pathological_block_submeasure(
    blocks: Vec<FiniteTable>,
    epsilons: Vec<Q>,
) -> Result<SubmeasureSpec> {
    Ok(SubmeasureSpec::BlockSum(BlockSum::with_contracts(
        blocks, epsilons,
    )?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfMass {
    pub set: Vec<u64>,
    #[serde(with = "crate::rational")]
    pub mu_mass: Q,
    #[serde(with = "crate::rational")]
    pub s_value: Q,
    /// s(X) = 1 and every dominated measure has total below ε; `None` when
    /// the domain is too large for the domination program.
    pub contract_holds: Option<bool>,
    pub method: &'static str,
    pub rule: &'static str,
    pub citation: &'static str,
}

/// Domain and a mask-indexed evaluator for the finite variants.
type MaskValue<'a> = Box<dyn Fn(usize) -> Q + 'a>;

fn finite_values(s: &SubmeasureSpec) -> Result<(Vec<u64>, MaskValue<'_>)> {
    match s {
        SubmeasureSpec::Table(t) => {
            Ok((t.domain().to_vec(), Box::new(move |m| t.value(m).clone())))
        }
        SubmeasureSpec::Covering(c) => Ok((c.domain().to_vec(), Box::new(move |m| c.value(m)))),
        other => Err(Error::Precondition(format!(
            "half-mass search needs a table or covering, got {}",
            other.kind()
        ))),
    }
}

/// Finds A ⊆ X with μ(A) ≥ μ(X)/2 and s(A) ≤ 2ε. Tries an inclusion-maximal
/// A with μ(A) > (μ(X)/2ε)·s(A) first, then any qualifying set (least mask).
pub fn hch_half_mass_set(s: &SubmeasureSpec, mu: &FinMeasure, eps: &Q) -> Result<HalfMass> {
    HalfMassSearch::new(s, eps)?.find(mu)
}

/// A half-mass search on one block, with the contract checked once.
pub struct HalfMassSearch<'a> {
    domain: Vec<u64>,
    value: MaskValue<'a>,
    eps: Q,
    contract_holds: Option<bool>,
}

impl<'a> HalfMassSearch<'a> {
    pub fn new(s: &'a SubmeasureSpec, eps: &Q) -> Result<Self> {
        let (domain, value) = finite_values(s)?;
        let n = domain.len();
        if n > COVER_CAP {
            return Err(Error::DomainTooLarge {
                size: n,
                cap: COVER_CAP,
            });
        }
        if !eps.is_positive() {
            return Err(Error::Precondition("epsilon must be positive".into()));
        }
        let contract_holds = if n <= LP_HARD_CAP {
            let full = value((1 << n) - 1);
            let best = s.dominated_measure_max(&domain, &domain, LP_HARD_CAP)?;
            Some(full.is_one() && best.value < *eps)
        } else {
            None
        };
        Ok(HalfMassSearch {
            domain,
            value,
            eps: eps.clone(),
            contract_holds,
        })
    }

    pub fn contract_holds(&self) -> Option<bool> {
        self.contract_holds
    }

    pub fn find(&self, mu: &FinMeasure) -> Result<HalfMass> {
        let (domain, value, eps, contract_holds) =
            (&self.domain, &self.value, &self.eps, self.contract_holds);
        let n = domain.len();
        if mu.has_star() || !mu.is_nonnegative() {
            return Err(Error::Precondition(
                "μ must be a nonnegative measure on X".into(),
            ));
        }
        let mut w = vec![Q::zero(); n];
        for (p, x) in mu.atoms() {
            let i = p
                .nat()
                .and_then(|v| domain.binary_search(&v).ok())
                .ok_or_else(|| Error::Precondition(format!("μ has an atom at {p} outside X")))?;
            w[i] = x.clone();
        }
        let total = rational::sum(&w);
        if !total.is_positive() {
            return Err(Error::Precondition("μ(X) must be positive".into()));
        }
        let mut mass = vec![Q::zero(); 1 << n];
        for m in 1..1usize << n {
            let low = m.trailing_zeros() as usize;
            mass[m] = &mass[m & (m - 1)] + &w[low];
        }
        let half = &total / Q::from_integer(2.into());
        let ratio = &total / (Q::from_integer(2.into()) * eps);
        let two_eps = Q::from_integer(2.into()) * eps;
        let points = |m: usize| {
            (0..n)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| domain[i])
                .collect::<Vec<_>>()
        };
        let good = |m: usize, sv: &Q| mass[m] >= half && *sv <= two_eps;

        // largest cardinality, least mask: inclusion-maximal among the strict sets
        let mut strict: Option<(u32, usize, Q)> = None;
        for m in 0..1usize << n {
            let sv = value(m);
            if mass[m] > &ratio * &sv {
                let c = m.count_ones();
                if strict.as_ref().is_none_or(|(bc, _, _)| c > *bc) {
                    strict = Some((c, m, sv));
                }
            }
        }
        let found = match strict {
            Some((_, m, sv)) if good(m, &sv) => Some((m, sv, "maximal-strict-set")),
            _ => (0..1usize << n).find_map(|m| {
                let sv = value(m);
                good(m, &sv).then_some((m, sv, "exhaustive"))
            }),
        };
        match found {
            Some((m, s_value, method)) => Ok(HalfMass {
                set: points(m),
                mu_mass: mass[m].clone(),
                s_value,
                contract_holds,
                method,
                rule: "half-mass-set",
                citation: citation("half-mass-set"),
            }),
            None => {
                // certificate: the μ-heaviest set among those with s(A) ≤ 2ε
                let (bm, _) = (0..1usize << n)
                    .filter(|&m| value(m) <= two_eps)
                    .map(|m| (m, mass[m].clone()))
                    .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                    .unwrap_or((0, Q::zero()));
                Err(Error::NotFound(format!(
                "every subset with s(A) ≤ {two_eps} has μ(A) < {half}; the heaviest is {:?} with μ = {}",
                points(bm),
                mass[bm]
            )))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverSearch {
    /// Best cover found, normalized to value 1 on the whole domain.
    pub cover: Covering,
    /// 1 − largest dominated mass.
    #[serde(with = "crate::rational")]
    pub gap: Q,
    pub evaluated: usize,
}

fn normalized_gap(c: &Covering) -> Result<Q> {
    let c = c.normalized();
    let domain = c.domain().to_vec();
    SubmeasureSpec::Covering(c).pathology_gap(&domain, LP_HARD_CAP)
}

fn k_subsets(n: u64, k: u64) -> Vec<Vec<u64>> {
    (0..1u64 << n)
        .filter(|m| m.count_ones() as u64 == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Scores complete k-uniform families first, then seeded random k-uniform
/// families, keeping the largest normalized pathology gap. The result is
/// the best seen within the budget, not a proven optimum.
pub fn find_pathological_cover(n: u64, budget: usize, seed: u64) -> Result<CoverSearch> {
    if n == 0 || n > 10 {
        return Err(Error::InvalidInput(format!(
            "domain size {n} outside 1..=10"
        )));
    }
    let domain: Vec<u64> = (0..n).collect();
    let mut best = CoverSearch {
        cover: Covering::new(domain.clone(), vec![domain.clone()], Q::one())?,
        gap: Q::zero(),
        evaluated: 0,
    };
    let consider = |cover: Vec<Vec<u64>>, best: &mut CoverSearch| -> Result<()> {
        let c = Covering::new(domain.clone(), cover, Q::one())?;
        let gap = normalized_gap(&c)?;
        best.evaluated += 1;
        if gap > best.gap {
            best.gap = gap;
            best.cover = c.normalized();
        }
        Ok(())
    };
    let mut spent = 0;
    for k in 2..n {
        if spent >= budget {
            break;
        }
        consider(k_subsets(n, k), &mut best)?;
        spent += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while spent < budget && n >= 3 {
        let k = rng.gen_range(2..n);
        let mut all = k_subsets(n, k);
        all.shuffle(&mut rng);
        let count = rng.gen_range(n.div_ceil(k) as usize..=all.len().min(2 * n as usize));
        let mut cover: Vec<Vec<u64>> = all.into_iter().take(count).collect();
        for x in 0..n {
            if !cover.iter().any(|s| s.contains(&x)) {
                cover.push(vec![x]);
            }
        }
        consider(cover, &mut best)?;
        spent += 1;
    }
    Ok(best)
}

/// Normalized covering blocks with a validated contract level ε = (largest
/// dominated mass) + 1/64, for use as pathological test blocks.
pub fn contract_level(c: &Covering) -> Result<Q> {
    let c = c.normalized();
    let domain = c.domain().to_vec();
    let best = SubmeasureSpec::Covering(c).dominated_measure_max(&domain, &domain, LP_HARD_CAP)?;
    Ok(best.value + rational::q(1, 64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bjn::verify_bjn;
    use crate::ideal::FilterSpec;
    use crate::rational::{q, qi};
    use proptest::prelude::*;

    #[test]
    fn thresholds() {
        // p = 1/2, q = 1: (l+1)^(1/2) > 2^(n+3) gives l0 = 2^(2n+6)
        assert_eq!(threshold_l0(&q(1, 2), &qi(1), 0).unwrap(), 64);
        assert_eq!(threshold_l0(&q(1, 2), &qi(1), 3).unwrap(), 1 << 12);
        assert_eq!(
            threshold_l1(&PowerExponent::new(q(1, 2)).unwrap()).unwrap(),
            5
        );
        // p = 1/3: l^(2/3) > 4^(1/3) ⇔ l^2 > 4 ⇔ l ≥ 3
        assert_eq!(
            threshold_l1(&PowerExponent::new(q(1, 3)).unwrap()).unwrap(),
            3
        );
    }

    #[test]
    fn separation_small() {
        let r = summable_separation(&q(1, 2), &qi(1), &BijectionSpec::Identity, 2, 128).unwrap();
        assert_eq!(r.blocks.len(), 3);
        assert_eq!(r.blocks[0].elements, vec![0]);
        assert_eq!(r.blocks[0].p_sum, Scalar::Exact(qi(1)));
        for b in &r.blocks {
            assert!(b.p_sum.lower() >= &qi(1));
            assert!(b.p_sum.upper().unwrap() < &qi(2));
            assert!(b.q_image_sum.upper().unwrap() <= &b.q_bound);
        }
        assert_eq!(r.blocks[1].q_bound, q(1, 2));
        assert_eq!(r.blocks[2].q_bound, q(1, 4));
        for s in &r.trace {
            assert!(s.h_size >= 2 * s.m);
        }
        let a = separation_audit(&r, None);
        assert!(a.pass);
        let none = summable_separation(&q(1, 2), &qi(1), &BijectionSpec::Identity, 0, 128).unwrap();
        assert_eq!(none.blocks.len(), 1);
        assert!(summable_separation(&q(1, 2), &q(1, 2), &BijectionSpec::Identity, 1, 128).is_err());
    }

    #[test]
    fn separation_with_block_swap() {
        let f = BijectionSpec::BlockSwap {
            period: 4,
            pattern: vec![3, 2, 1, 0],
        };
        let r = summable_separation(&q(1, 3), &q(2, 3), &f, 2, 96).unwrap();
        for b in &r.blocks {
            assert!(b.q_image_sum.upper().unwrap() <= &b.q_bound);
        }
        let audit = separation_audit(&r, Some(1));
        assert_eq!(audit.blocks, 1);
        let empty = separation_audit(&r, Some(0));
        assert_eq!(empty.p_sum, Scalar::zero());
    }

    #[test]
    fn bijections() {
        let f = BijectionSpec::Permutation {
            pairs: vec![(0, 3), (3, 0)],
        };
        f.validate().unwrap();
        assert_eq!(f.apply(0), 3);
        assert_eq!(f.inverse(3), 0);
        assert_eq!(f.apply(9), 9);
        let bad = BijectionSpec::Permutation {
            pairs: vec![(0, 3)],
        };
        assert!(bad.validate().is_err());
        let bad: std::result::Result<BijectionSpec, _> =
            serde_json::from_str(r#"{"kind":"block_swap","period":2,"pattern":[0,0]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn schachermayer_examples() {
        assert!(!schachermayer_member(&OmegaSet::evens()));
        assert!(schachermayer_member(
            &OmegaSet::periodic(vec![], vec![true, true, false, false]).unwrap()
        ));
        assert!(schachermayer_member(&OmegaSet::finite([3, 8, 11])));
        assert!(schachermayer_member(&OmegaSet::cofinite([1])));
        assert!(!schachermayer_member(
            &OmegaSet::periodic(vec![true], vec![true, true, false, false]).unwrap()
        ));

        assert!(schachermayer_jn_seq(0).is_empty());
        let s = schachermayer_jn_seq(3);
        assert_eq!(
            s[0],
            FinMeasure::from_atoms([(Point::Nat(0), q(1, 2)), (Point::Nat(1), q(-1, 2))])
        );
        assert_eq!(s[2].nat_support(), vec![4, 5]);
        let cert = verify_bjn(&s, &FilterSpec::Frechet, &[], Some(0), Some(qi(0))).unwrap();
        assert!(cert.report.pass);
    }

    #[test]
    fn obstruction() {
        let ks: Vec<u64> = (0..7).map(|i| i * i + i).collect();
        let seq: Vec<FinMeasure> = ks
            .windows(2)
            .map(|w| FinMeasure::uniform(2 * w[0]..2 * w[1]))
            .collect();
        let r = schachermayer_obstruction(&seq, &ks).unwrap();
        assert!(r.partition_exact && r.alternating_full_mass);
        assert!(r.e_member && r.o_member);
        assert!(r
            .rows
            .iter()
            .filter(|r| r.index % 2 == 1)
            .all(|r| r.o_mass.is_one()));
        let bad = vec![FinMeasure::uniform([0, 9])];
        assert_eq!(
            schachermayer_obstruction(&bad, &[0, 2]).unwrap_err(),
            Error::MisalignedSupports(0)
        );
        assert!(schachermayer_obstruction(&[], &[]).unwrap().rows.is_empty());
    }

    #[test]
    fn pathological_blocks() {
        let tri = Covering::triangle(q(1, 2)).to_table().unwrap();
        let spec = pathological_block_submeasure(vec![tri], vec![q(3, 4)]).unwrap();
        assert_eq!(spec.kind(), "block_sum");
        let add = FiniteTable::additive(vec![5, 6], &[q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(
            pathological_block_submeasure(vec![add], vec![q(1, 2)]).unwrap_err(),
            Error::ContractFailed {
                block: 0,
                gap: "0".into()
            }
        );
        assert!(pathological_block_submeasure(vec![], vec![]).is_ok());
    }

    #[test]
    fn half_mass_examples() {
        let tri = SubmeasureSpec::Covering(Covering::triangle(q(1, 2)));
        let mu = FinMeasure::uniform([0, 1, 2]);
        let r = hch_half_mass_set(&tri, &mu, &q(3, 8)).unwrap();
        assert_eq!(r.set, vec![0, 1]);
        assert_eq!(r.mu_mass, q(2, 3));
        assert_eq!(r.s_value, q(1, 2));
        assert_eq!(r.contract_holds, Some(false));

        let dirac = FinMeasure::dirac(Point::Nat(1));
        let r = hch_half_mass_set(&tri, &dirac, &q(1, 4)).unwrap();
        assert_eq!(r.set, vec![1]);

        let add = FiniteTable::additive(vec![0, 1, 2, 3], &vec![q(1, 4); 4]).unwrap();
        let mu = FinMeasure::uniform([0, 1, 2, 3]);
        let err = hch_half_mass_set(&SubmeasureSpec::Table(add), &mu, &q(1, 10)).unwrap_err();
        assert!(matches!(err, Error::NotFound(_)));
    }

    #[test]
    fn half_mass_on_parity_cover() {
        let c = Covering::parity(4, 0).unwrap().normalized();
        let eps = contract_level(&c).unwrap();
        let s = SubmeasureSpec::Covering(c);
        let mu = FinMeasure::uniform(0..15);
        let r = hch_half_mass_set(&s, &mu, &eps).unwrap();
        assert_eq!(r.contract_holds, Some(true));
        assert_eq!(r.method, "maximal-strict-set");
        assert!(r.mu_mass >= q(1, 2));
        assert!(r.s_value <= Q::from_integer(2.into()) * eps);
    }

    #[test]
    fn cover_search() {
        let r = find_pathological_cover(3, 4, 1).unwrap();
        assert_eq!(r.gap, q(1, 4));
        assert_eq!(r.cover.cover().len(), 3);
        assert_eq!(find_pathological_cover(2, 10, 1).unwrap().gap, qi(0));
        let trivial = find_pathological_cover(6, 0, 1).unwrap();
        assert_eq!(trivial.gap, qi(0));
        assert_eq!(trivial.cover.cover().len(), 1);
        let r = find_pathological_cover(6, 12, 5).unwrap();
        assert!(r.gap > qi(0));
    }

    fn brute_schachermayer(a: &OmegaSet) -> bool {
        let span = 10 * (a.prefix_len() + 2 * a.period());
        let start = a.prefix_len() + 1;
        (start / 2..span).all(|k| a.contains(2 * k) == a.contains(2 * k + 1))
    }

    proptest! {
        #[test]
        fn schachermayer_matches_pair_scan(p in prop::collection::vec(any::<bool>(), 0..8), c in prop::collection::vec(any::<bool>(), 1..8)) {
            let a = OmegaSet::periodic(p, c).unwrap();
            prop_assert_eq!(schachermayer_member(&a), brute_schachermayer(&a));
        }

        #[test]
        fn half_mass_matches_enumeration(weights in prop::collection::vec(0i64..5, 3), seed in 0u64..50) {
            prop_assume!(weights.iter().any(|&w| w > 0));
            let c = find_pathological_cover(3, 1, seed).unwrap().cover;
            let eps = contract_level(&c).unwrap();
            let mu = FinMeasure::from_atoms(weights.iter().enumerate().map(|(i, &w)| (Point::Nat(i as u64), qi(w))));
            let s = SubmeasureSpec::Covering(c.clone());
            let r = hch_half_mass_set(&s, &mu, &eps).unwrap();
            prop_assert!(r.mu_mass >= mu.total() / qi(2));
            prop_assert!(r.s_value <= qi(2) * &eps);
        }
    }
}
