//! Lower semicontinuous submeasures on ω given by finite descriptions.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp;
use crate::measure::{FinMeasure, Point};
use crate::omega::OmegaSet;
use crate::rational::{self, ceil_log2, pow2, Q};
use crate::scalar::{PowerExponent, Scalar};

/// Largest domain of an explicit value table.
pub const TABLE_CAP: usize = 16;
/// Largest domain of a covering submeasure.
pub const COVER_CAP: usize = 20;
/// Hard ceiling for the domination program, whatever the configured cap.
pub const LP_HARD_CAP: usize = 16;
/// Canonical density blocks beyond this index do not fit in u64 indices.
pub const MAX_CANONICAL_BLOCKS: u32 = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    In,
    Out,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Tallness {
    Tall,
    NotTall,
    Unknown,
}

/// Membership verdict with the rule that produced it and, when available,
/// the computed tail value φ(A).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemberReport {
    pub decision: Decision,
    pub rule: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Scalar>,
}

impl MemberReport {
    pub(crate) fn new(decision: Decision, rule: &'static str, bounds: Option<Scalar>) -> Self {
        MemberReport {
            decision,
            rule,
            bounds,
        }
    }
}

fn is_strictly_increasing(xs: &[u64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

fn normalized(a: &[u64]) -> Vec<u64> {
    let mut v = a.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Checks φ(∅) = 0, nonnegativity, monotonicity and subadditivity of a
/// mask-indexed table. Subadditivity is checked on disjoint pairs, which
/// suffices once monotonicity holds.
pub fn check_submeasure_table(n: usize, values: &[Q]) -> Result<()> {
    if values.len() != 1 << n {
        return Err(Error::InvalidInput(format!(
            "a table over {n} points needs {} values, got {}",
            1usize << n,
            values.len()
        )));
    }
    if !values[0].is_zero() {
        return Err(Error::InvalidInput(
            "table value of the empty set must be 0".into(),
        ));
    }
    if let Some(m) = values.iter().position(|v| v.is_negative()) {
        return Err(Error::InvalidInput(format!(
            "table value at mask {m} is negative"
        )));
    }
    let den = rational::common_denominator(values.iter());
    let big: Vec<BigInt> = values
        .iter()
        .map(|v| (v * Q::from_integer(den.clone())).to_integer())
        .collect();
    let small: Option<Vec<i128>> = big
        .iter()
        .map(|x| x.to_i128().filter(|y| *y < 1 << 120))
        .collect();
    let le = |a: usize, b: usize| match &small {
        Some(s) => s[a] <= s[b],
        None => big[a] <= big[b],
    };
    for m in 1..values.len() {
        for i in 0..n {
            if m >> i & 1 == 1 && !le(m ^ (1 << i), m) {
                return Err(Error::InvalidInput(format!(
                    "table is not monotone at mask {m}"
                )));
            }
        }
    }
    for c in 1..values.len() {
        let low = c & c.wrapping_neg();
        let rest = c ^ low;
        let mut sub = rest;
        loop {
            let part = sub | low;
            if part != c {
                let ok = match &small {
                    Some(s) => s[c] <= s[part] + s[c ^ part],
                    None => big[c] <= &big[part] + &big[c ^ part],
                };
                if !ok {
                    return Err(Error::InvalidInput(format!(
                        "table is not subadditive: masks {part} and {}",
                        c ^ part
                    )));
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    Ok(())
}

/// Submeasure on a finite domain given by its value on every subset,
/// indexed by bit mask over the increasing domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct FiniteTable {
    domain: Vec<u64>,
    values: Vec<Q>,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    domain: Vec<u64>,
    #[serde(with = "crate::rational::vec")]
    values: Vec<Q>,
}

impl TryFrom<TableRepr> for FiniteTable {
    type Error = Error;
    fn try_from(r: TableRepr) -> Result<Self> {
        FiniteTable::new(r.domain, r.values)
    }
}

impl From<FiniteTable> for TableRepr {
    fn from(t: FiniteTable) -> Self {
        TableRepr {
            domain: t.domain,
            values: t.values,
        }
    }
}

impl FiniteTable {
    pub fn new(domain: Vec<u64>, values: Vec<Q>) -> Result<Self> {
        if !is_strictly_increasing(&domain) {
            return Err(Error::InvalidInput(
                "table domain must be strictly increasing".into(),
            ));
        }
        if domain.len() > TABLE_CAP {
            return Err(Error::DomainTooLarge {
                size: domain.len(),
                cap: TABLE_CAP,
            });
        }
        check_submeasure_table(domain.len(), &values)?;
        Ok(FiniteTable { domain, values })
    }

    pub fn from_fn(domain: Vec<u64>, f: impl Fn(usize) -> Q) -> Result<Self> {
        let n = domain.len();
        if n > TABLE_CAP {
            return Err(Error::DomainTooLarge {
                size: n,
                cap: TABLE_CAP,
            });
        }
        FiniteTable::new(domain, (0..1usize << n).map(f).collect())
    }

    /// The measure table of a nonnegative measure on the domain.
    pub fn additive(domain: Vec<u64>, weights: &[Q]) -> Result<Self> {
        let w = weights.to_vec();
        FiniteTable::from_fn(domain, |m| {
            (0..w.len())
                .filter(|i| m >> i & 1 == 1)
                .map(|i| w[i].clone())
                .sum()
        })
    }

    pub fn domain(&self) -> &[u64] {
        &self.domain
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn value(&self, mask: usize) -> &Q {
        &self.values[mask]
    }

    pub fn full_mask(&self) -> usize {
        (1usize << self.domain.len()) - 1
    }

    pub fn full_value(&self) -> &Q {
        &self.values[self.full_mask()]
    }

    pub fn mask_of(&self, a: &[u64]) -> Result<usize> {
        let mut m = 0;
        for &x in a {
            let i = self
                .domain
                .binary_search(&x)
                .map_err(|_| Error::OutOfDomain(x))?;
            m |= 1 << i;
        }
        Ok(m)
    }

    pub fn points_of(&self, mask: usize) -> Vec<u64> {
        (0..self.domain.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.domain[i])
            .collect()
    }

    pub fn is_additive(&self) -> bool {
        (1..self.values.len()).all(|m| {
            let low = m & m.wrapping_neg();
            self.values[m] == &self.values[m ^ low] + &self.values[low]
        })
    }

    /// Same table with every value multiplied by `c > 0`.
    pub fn scaled(&self, c: &Q) -> FiniteTable {
        FiniteTable {
            domain: self.domain.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Scales so that the whole domain has value 1.
    pub fn normalized(&self) -> Result<FiniteTable> {
        let full = self.full_value();
        if full.is_zero() {
            return Err(Error::Precondition(
                "cannot normalize a table with s(X) = 0".into(),
            ));
        }
        Ok(self.scaled(&full.recip()))
    }
}

/// φ(A) = scale · least number of cover sets whose union contains A.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CoveringRepr", into = "CoveringRepr")]
pub struct Covering {
    domain: Vec<u64>,
    cover: Vec<Vec<u64>>,
    scale: Q,
    masks: Vec<usize>,
    tau: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct CoveringRepr {
    domain: Vec<u64>,
    cover: Vec<Vec<u64>>,
    #[serde(with = "crate::rational")]
    scale: Q,
}

impl TryFrom<CoveringRepr> for Covering {
    type Error = Error;
    fn try_from(r: CoveringRepr) -> Result<Self> {
        Covering::new(r.domain, r.cover, r.scale)
    }
}

impl From<Covering> for CoveringRepr {
    fn from(c: Covering) -> Self {
        CoveringRepr {
            domain: c.domain,
            cover: c.cover,
            scale: c.scale,
        }
    }
}

impl Covering {
    pub fn new(domain: Vec<u64>, cover: Vec<Vec<u64>>, scale: Q) -> Result<Self> {
        if !is_strictly_increasing(&domain) {
            return Err(Error::InvalidInput(
                "cover domain must be strictly increasing".into(),
            ));
        }
        if domain.len() > COVER_CAP {
            return Err(Error::DomainTooLarge {
                size: domain.len(),
                cap: COVER_CAP,
            });
        }
        if !scale.is_positive() {
            return Err(Error::InvalidInput("cover scale must be positive".into()));
        }
        let mut masks = Vec::with_capacity(cover.len());
        for set in &cover {
            let mut m = 0usize;
            for x in set {
                let i = domain
                    .binary_search(x)
                    .map_err(|_| Error::OutOfDomain(*x))?;
                m |= 1 << i;
            }
            if m == 0 {
                return Err(Error::InvalidInput("cover sets must be nonempty".into()));
            }
            masks.push(m);
        }
        let full = (1usize << domain.len()) - 1;
        if masks.iter().fold(0, |a, m| a | m) != full {
            return Err(Error::InvalidInput("cover does not span the domain".into()));
        }
        let mut tau = vec![0u8; full + 1];
        for m in 1..=full {
            let low = m & m.wrapping_neg();
            tau[m] = 1 + masks
                .iter()
                .filter(|&&s| s & low != 0)
                .map(|&s| tau[m & !s])
                .min()
                .expect("the cover spans the domain");
        }
        let cover = masks
            .iter()
            .map(|&m| {
                (0..domain.len())
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| domain[i])
                    .collect()
            })
            .collect();
        Ok(Covering {
            domain,
            cover,
            scale,
            masks,
            tau,
        })
    }

    /// The three pairs of a three-point domain.
    pub fn triangle(scale: Q) -> Covering {
        Covering::new(
            vec![0, 1, 2],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
            scale,
        )
        .expect("valid triangle cover")
    }

    /// Points are the nonzero vectors of F_2^dim (as integers 1..2^dim, shifted
    /// down by one), cover sets are {x : <x, y> = 1} for nonzero y.
    pub fn parity(dim: u32, offset: u64) -> Result<Covering> {
        let size = (1u64 << dim) - 1;
        let domain: Vec<u64> = (0..size).map(|i| offset + i).collect();
        let cover = (1..=size)
            .map(|y| {
                (1..=size)
                    .filter(|x| (x & y).count_ones() % 2 == 1)
                    .map(|x| offset + x - 1)
                    .collect()
            })
            .collect();
        Covering::new(domain, cover, Q::one())
    }

    pub fn domain(&self) -> &[u64] {
        &self.domain
    }

    pub fn cover(&self) -> &[Vec<u64>] {
        &self.cover
    }

    pub fn scale(&self) -> &Q {
        &self.scale
    }

    pub fn full_mask(&self) -> usize {
        self.tau.len() - 1
    }

    /// Least number of cover sets containing the subset `mask`.
    pub fn tau(&self, mask: usize) -> u32 {
        self.tau[mask] as u32
    }

    pub fn value(&self, mask: usize) -> Q {
        &self.scale * Q::from_integer(self.tau(mask).into())
    }

    pub fn mask_of(&self, a: &[u64]) -> Result<usize> {
        let mut m = 0;
        for &x in a {
            let i = self
                .domain
                .binary_search(&x)
                .map_err(|_| Error::OutOfDomain(x))?;
            m |= 1 << i;
        }
        Ok(m)
    }

    pub fn with_scale(&self, scale: Q) -> Result<Covering> {
        Covering::new(self.domain.clone(), self.cover.clone(), scale)
    }

    /// Rescaled so the whole domain has value 1.
    pub fn normalized(&self) -> Covering {
        let t = self.tau(self.full_mask());
        let mut c = self.clone();
        c.scale = Q::new(BigInt::one(), BigInt::from(t));
        c
    }

    pub fn to_table(&self) -> Result<FiniteTable> {
        if self.domain.len() > TABLE_CAP {
            return Err(Error::DomainTooLarge {
                size: self.domain.len(),
                cap: TABLE_CAP,
            });
        }
        Ok(FiniteTable {
            domain: self.domain.clone(),
            values: (0..=self.full_mask()).map(|m| self.value(m)).collect(),
        })
    }

    pub fn cover_masks(&self) -> &[usize] {
        &self.masks
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Weights {
    Power(PowerExponent),
    /// One period of weights, repeated along ω.
    Table(Vec<Q>),
}

impl Weights {
    pub fn weight_exact(&self, n: u64) -> Option<Q> {
        match self {
            Weights::Power(p) => p.weight(n, 64).exact().cloned(),
            Weights::Table(w) => Some(w[(n % w.len() as u64) as usize].clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensitySpec {
    /// Block n is uniform with atoms 2^-n on [2^n, 2^(n+1)); optionally only
    /// the first `truncate` blocks are kept.
    Canonical {
        truncate: Option<u32>,
    },
    Explicit(Vec<FinMeasure>),
}

/// Block n of the canonical asymptotic-density generator.
pub fn canonical_block(n: u32) -> FinMeasure {
    let w = pow2(-(n as i64));
    let start = 1u64 << n;
    FinMeasure::from_sorted(
        (start..2 * start)
            .map(|x| (Point::Nat(x), w.clone()))
            .collect(),
    )
}

impl DensitySpec {
    pub fn block_count(&self) -> Option<usize> {
        match self {
            DensitySpec::Canonical { truncate: None } => None,
            DensitySpec::Canonical { truncate: Some(k) } => Some(*k as usize),
            DensitySpec::Explicit(b) => Some(b.len()),
        }
    }

    pub fn block(&self, n: usize) -> Option<FinMeasure> {
        match self {
            DensitySpec::Canonical { truncate } => {
                let limit = truncate.unwrap_or(MAX_CANONICAL_BLOCKS) as usize;
                (n < limit).then(|| canonical_block(n as u32))
            }
            DensitySpec::Explicit(b) => b.get(n).cloned(),
        }
    }

    /// Largest atom of block n without materializing it.
    pub fn block_atom_max(&self, n: usize) -> Option<Q> {
        match self {
            DensitySpec::Canonical { .. } => self
                .block_count()
                .is_none_or(|k| n < k)
                .then(|| pow2(-(n as i64))),
            DensitySpec::Explicit(b) => b.get(n).map(|m| m.atom_max()),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            DensitySpec::Canonical { truncate: Some(k) } if *k > MAX_CANONICAL_BLOCKS => Err(
                Error::InvalidInput(format!("at most {MAX_CANONICAL_BLOCKS} canonical blocks")),
            ),
            DensitySpec::Canonical { .. } => Ok(()),
            DensitySpec::Explicit(blocks) => {
                let mut last: Option<u64> = None;
                for (i, b) in blocks.iter().enumerate() {
                    if b.has_star() || !b.is_nonnegative() {
                        return Err(Error::InvalidInput(format!(
                            "density block {i} must be a nonnegative measure on ω"
                        )));
                    }
                    let support = b.nat_support();
                    if let (Some(&lo), Some(prev)) = (support.first(), last) {
                        if lo <= prev {
                            return Err(Error::InvalidInput(format!(
                                "density block {i} starts before block {} ends",
                                i - 1
                            )));
                        }
                    }
                    if let Some(&hi) = support.last() {
                        last = Some(hi);
                    }
                }
                Ok(())
            }
        }
    }
}

/// Sum of finite-domain blocks, optionally carrying validated pathology
/// contracts: block n has s_n(X_n) = 1 and every nonnegative measure
/// dominated by s_n has total ≤ contracts[n].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSum {
    blocks: Vec<FiniteTable>,
    contracts: Option<Vec<Q>>,
}

impl BlockSum {
    pub fn new(blocks: Vec<FiniteTable>) -> Result<Self> {
        let mut all: Vec<u64> = blocks
            .iter()
            .flat_map(|b| b.domain().iter().copied())
            .collect();
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        if all.len() != total {
            return Err(Error::InvalidInput(
                "block domains must be pairwise disjoint".into(),
            ));
        }
        Ok(BlockSum {
            blocks,
            contracts: None,
        })
    }

    /// Validates every block against its contract, reporting the exact gap
    /// s_n(X_n) − max dominated mass of the first failing block.
    pub fn with_contracts(blocks: Vec<FiniteTable>, epsilons: Vec<Q>) -> Result<Self> {
        if blocks.len() != epsilons.len() {
            return Err(Error::InvalidInput(format!(
                "{} blocks but {} epsilons",
                blocks.len(),
                epsilons.len()
            )));
        }
        let mut sum = BlockSum::new(blocks)?;
        for (n, (b, eps)) in sum.blocks.iter().zip(&epsilons).enumerate() {
            if !b.full_value().is_one() {
                return Err(Error::Precondition(format!(
                    "block {n} is not normalized: s(X) = {}",
                    b.full_value()
                )));
            }
            let phi = SubmeasureSpec::Table(b.clone());
            let best = phi.dominated_measure_max(b.domain(), b.domain(), LP_HARD_CAP)?;
            if best.value > *eps {
                return Err(Error::ContractFailed {
                    block: n,
                    gap: rational::render(&(b.full_value() - &best.value)),
                });
            }
        }
        sum.contracts = Some(epsilons);
        Ok(sum)
    }

    pub fn blocks(&self) -> &[FiniteTable] {
        &self.blocks
    }

    pub fn contracts(&self) -> Option<&[Q]> {
        self.contracts.as_deref()
    }

    pub fn domain(&self) -> Vec<u64> {
        normalized(
            &self
                .blocks
                .iter()
                .flat_map(|b| b.domain().iter().copied())
                .collect::<Vec<_>>(),
        )
    }

    fn eval(&self, a: &[u64]) -> Result<Q> {
        let mut masks = vec![0usize; self.blocks.len()];
        'points: for &x in a {
            for (i, b) in self.blocks.iter().enumerate() {
                if let Ok(j) = b.domain().binary_search(&x) {
                    masks[i] |= 1 << j;
                    continue 'points;
                }
            }
            return Err(Error::OutOfDomain(x));
        }
        Ok(self
            .blocks
            .iter()
            .zip(masks)
            .map(|(b, m)| b.value(m).clone())
            .sum())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SubmeasureRepr", into = "SubmeasureRepr")]
pub enum SubmeasureSpec {
    Summable(Weights),
    Density(DensitySpec),
    BlockSum(BlockSum),
    Covering(Covering),
    Table(FiniteTable),
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SubmeasureRepr {
    Summable {
        #[serde(
            default,
            skip_serializing_if = "Option::is_none",
            with = "crate::rational::opt"
        )]
        power: Option<Q>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<Vec<String>>,
    },
    Density {
        #[serde(default, skip_serializing_if = "is_false")]
        canonical: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncate: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        blocks: Option<Vec<FinMeasure>>,
    },
    BlockSum {
        blocks: Vec<FiniteTable>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilons: Option<Vec<String>>,
    },
    Covering(Covering),
    Table(FiniteTable),
}

impl TryFrom<SubmeasureRepr> for SubmeasureSpec {
    type Error = Error;
    fn try_from(r: SubmeasureRepr) -> Result<Self> {
        match r {
            SubmeasureRepr::Summable { power, table } => match (power, table) {
                (Some(p), None) => Ok(SubmeasureSpec::Summable(Weights::Power(
                    PowerExponent::new(p)?,
                ))),
                (None, Some(t)) => {
                    let w: Vec<Q> = t
                        .iter()
                        .map(|s| rational::parse(s))
                        .collect::<Result<_>>()?;
                    SubmeasureSpec::summable_table(w)
                }
                _ => Err(Error::InvalidInput(
                    "summable needs exactly one of \"power\" or \"table\"".into(),
                )),
            },
            SubmeasureRepr::Density {
                canonical,
                truncate,
                blocks,
            } => {
                let spec = match (canonical, blocks) {
                    (true, None) => DensitySpec::Canonical { truncate },
                    (false, Some(b)) if truncate.is_none() => DensitySpec::Explicit(b),
                    _ => return Err(Error::InvalidInput(
                        "density needs \"canonical\": true (optionally \"truncate\") or \"blocks\""
                            .into(),
                    )),
                };
                spec.validate()?;
                Ok(SubmeasureSpec::Density(spec))
            }
            SubmeasureRepr::BlockSum { blocks, epsilons } => match epsilons {
                None => Ok(SubmeasureSpec::BlockSum(BlockSum::new(blocks)?)),
                Some(e) => {
                    let eps = e
                        .iter()
                        .map(|s| rational::parse(s))
                        .collect::<Result<_>>()?;
                    Ok(SubmeasureSpec::BlockSum(BlockSum::with_contracts(
                        blocks, eps,
                    )?))
                }
            },
            SubmeasureRepr::Covering(c) => Ok(SubmeasureSpec::Covering(c)),
            SubmeasureRepr::Table(t) => Ok(SubmeasureSpec::Table(t)),
        }
    }
}

impl From<SubmeasureSpec> for SubmeasureRepr {
    fn from(s: SubmeasureSpec) -> Self {
        match s {
            SubmeasureSpec::Summable(Weights::Power(p)) => SubmeasureRepr::Summable {
                power: Some(p.value().clone()),
                table: None,
            },
            SubmeasureSpec::Summable(Weights::Table(w)) => SubmeasureRepr::Summable {
                power: None,
                table: Some(w.iter().map(rational::render).collect()),
            },
            SubmeasureSpec::Density(DensitySpec::Canonical { truncate }) => {
                SubmeasureRepr::Density {
                    canonical: true,
                    truncate,
                    blocks: None,
                }
            }
            SubmeasureSpec::Density(DensitySpec::Explicit(b)) => SubmeasureRepr::Density {
                canonical: false,
                truncate: None,
                blocks: Some(b),
            },
            SubmeasureSpec::BlockSum(b) => SubmeasureRepr::BlockSum {
                epsilons: b
                    .contracts
                    .map(|e| e.iter().map(rational::render).collect()),
                blocks: b.blocks,
            },
            SubmeasureSpec::Covering(c) => SubmeasureRepr::Covering(c),
            SubmeasureSpec::Table(t) => SubmeasureRepr::Table(t),
        }
    }
}

/// Result of the domination program on a finite window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dominated {
    #[serde(with = "crate::rational")]
    pub value: Q,
    pub witness: FinMeasure,
    /// Optimal dual multipliers on subsets, certifying optimality.
    pub certificate: Vec<DualTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualTerm {
    pub set: Vec<u64>,
    #[serde(with = "crate::rational")]
    pub multiplier: Q,
}

impl SubmeasureSpec {
    pub fn power(p: Q) -> Result<Self> {
        Ok(SubmeasureSpec::Summable(Weights::Power(
            PowerExponent::new(p)?,
        )))
    }

    pub fn summable_table(w: Vec<Q>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|x| x.is_negative()) {
            return Err(Error::InvalidInput(
                "summable table must be a nonempty list of nonnegative weights".into(),
            ));
        }
        Ok(SubmeasureSpec::Summable(Weights::Table(w)))
    }

    pub fn density_canonical() -> Self {
        SubmeasureSpec::Density(DensitySpec::Canonical { truncate: None })
    }

    pub fn density_truncated(k: u32) -> Result<Self> {
        let d = DensitySpec::Canonical { truncate: Some(k) };
        d.validate()?;
        Ok(SubmeasureSpec::Density(d))
    }

    pub fn density_blocks(blocks: Vec<FinMeasure>) -> Result<Self> {
        let d = DensitySpec::Explicit(blocks);
        d.validate()?;
        Ok(SubmeasureSpec::Density(d))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SubmeasureSpec::Summable(_) => "summable",
            SubmeasureSpec::Density(_) => "density",
            SubmeasureSpec::BlockSum(_) => "block_sum",
            SubmeasureSpec::Covering(_) => "covering",
            SubmeasureSpec::Table(_) => "table",
        }
    }

    /// The finite domain of table-like variants; `None` when φ lives on ω.
    pub fn domain(&self) -> Option<Vec<u64>> {
        match self {
            SubmeasureSpec::Summable(_) | SubmeasureSpec::Density(_) => None,
            SubmeasureSpec::BlockSum(b) => Some(b.domain()),
            SubmeasureSpec::Covering(c) => Some(c.domain().to_vec()),
            SubmeasureSpec::Table(t) => Some(t.domain().to_vec()),
        }
    }

    /// φ(A) for a finite set A.
    pub fn eval(&self, a: &[u64], precision: u32) -> Result<Scalar> {
        let a = normalized(a);
        match self {
            SubmeasureSpec::Summable(Weights::Power(p)) => Ok(p.sum(&a, precision)),
            SubmeasureSpec::Summable(Weights::Table(w)) => Ok(Scalar::Exact(
                a.iter()
                    .map(|&n| w[(n % w.len() as u64) as usize].clone())
                    .sum(),
            )),
            SubmeasureSpec::Density(DensitySpec::Canonical { truncate }) => {
                let limit = truncate.unwrap_or(64);
                let mut counts: Vec<u64> = vec![0; 64];
                for &n in &a {
                    if n >= 1 {
                        let k = 63 - n.leading_zeros();
                        if k < limit {
                            counts[k as usize] += 1;
                        }
                    }
                }
                let best = counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(k, &c)| Q::new(c.into(), BigInt::one() << k))
                    .max()
                    .unwrap_or_else(Q::zero);
                Ok(Scalar::Exact(best))
            }
            SubmeasureSpec::Density(DensitySpec::Explicit(blocks)) => {
                let best = blocks
                    .iter()
                    .map(|b| {
                        b.atoms()
                            .iter()
                            .filter(
                                |(p, _)| matches!(p, Point::Nat(x) if a.binary_search(x).is_ok()),
                            )
                            .map(|(_, w)| w.clone())
                            .sum::<Q>()
                    })
                    .max()
                    .unwrap_or_else(Q::zero);
                Ok(Scalar::Exact(best))
            }
            SubmeasureSpec::BlockSum(b) => Ok(Scalar::Exact(b.eval(&a)?)),
            SubmeasureSpec::Covering(c) => Ok(Scalar::Exact(c.value(c.mask_of(&a)?))),
            SubmeasureSpec::Table(t) => Ok(Scalar::Exact(t.value(t.mask_of(&a)?).clone())),
        }
    }

    /// φ(A ∖ [0, n)), i.e. φ evaluated on the elements of A that are ≥ n.
    pub fn tail(&self, a: &OmegaSet, n: u64, precision: u32) -> Result<Scalar> {
        if let Some(elems) = a.elements() {
            let rest: Vec<u64> = elems.into_iter().filter(|&x| x >= n).collect();
            return self.eval(&rest, precision);
        }
        match self {
            SubmeasureSpec::Summable(Weights::Power(p)) => {
                let first: Vec<u64> = a.iter_from(n).take(64).collect();
                Ok(Scalar::infinite(
                    p.dyadic_sum(&first, precision).lower().clone(),
                    precision,
                ))
            }
            SubmeasureSpec::Summable(Weights::Table(w)) => {
                let len = w.len() as u64;
                let start = n.max(a.prefix_len());
                let span = len.lcm(&a.period());
                let weight = |i: u64| &w[(i % len) as usize];
                let head: Q = a
                    .members_in(n, start)
                    .into_iter()
                    .map(|i| weight(i).clone())
                    .sum();
                let recurring = a
                    .members_in(start, start + span)
                    .into_iter()
                    .any(|i| weight(i).is_positive());
                if recurring {
                    let lower: Q = head
                        + a.members_in(start, start + span)
                            .into_iter()
                            .map(|i| weight(i).clone())
                            .sum::<Q>();
                    Ok(Scalar::infinite(lower, precision))
                } else {
                    Ok(Scalar::Exact(head))
                }
            }
            SubmeasureSpec::Density(DensitySpec::Canonical { truncate: Some(k) }) => {
                Ok(Scalar::Exact(canonical_tail_truncated(a, n, *k)))
            }
            SubmeasureSpec::Density(DensitySpec::Canonical { truncate: None }) => {
                Ok(Scalar::Exact(canonical_tail_sup(a, n)))
            }
            SubmeasureSpec::Density(DensitySpec::Explicit(blocks)) => {
                let best = blocks
                    .iter()
                    .map(|b| {
                        b.atoms()
                            .iter()
                            .filter(
                                |(p, _)| matches!(p, Point::Nat(x) if *x >= n && a.contains(*x)),
                            )
                            .map(|(_, w)| w.clone())
                            .sum::<Q>()
                    })
                    .max()
                    .unwrap_or_else(Q::zero);
                Ok(Scalar::Exact(best))
            }
            _ => Err(Error::NoTailRule(format!(
                "{} submeasure has a finite domain but the set {a} is infinite",
                self.kind()
            ))),
        }
    }

    /// Is A in Exh(φ), i.e. does φ(A ∖ [0,n)) tend to 0?
    pub fn exh_member(&self, a: &OmegaSet, precision: u32) -> MemberReport {
        if a.is_finite() {
            return MemberReport::new(Decision::In, "finite-set", None);
        }
        let tail = self.tail(a, 0, precision).ok();
        match self {
            SubmeasureSpec::Summable(Weights::Power(_)) => {
                MemberReport::new(Decision::Out, "power-divergent-tail", tail)
            }
            SubmeasureSpec::Summable(Weights::Table(_)) => {
                let infinite = tail.as_ref().is_some_and(|t| t.is_infinite());
                let d = if infinite {
                    Decision::Out
                } else {
                    Decision::In
                };
                MemberReport::new(d, "periodic-weights-tail", tail)
            }
            SubmeasureSpec::Density(DensitySpec::Canonical { truncate: None }) => {
                MemberReport::new(Decision::Out, "density-positive-tail", tail)
            }
            SubmeasureSpec::Density(_) => {
                MemberReport::new(Decision::In, "finitely-many-blocks", Some(Scalar::zero()))
            }
            _ => MemberReport::new(Decision::Unknown, "beyond-finite-domain", None),
        }
    }

    /// Is A in Fin(φ), i.e. is φ(A) finite?
    pub fn fin_member(&self, a: &OmegaSet, precision: u32) -> MemberReport {
        if a.is_finite() {
            return MemberReport::new(Decision::In, "finite-set", None);
        }
        match self {
            SubmeasureSpec::Summable(_) => {
                let tail = self.tail(a, 0, precision).ok();
                let infinite = tail.as_ref().is_some_and(|t| t.is_infinite());
                let d = if infinite {
                    Decision::Out
                } else {
                    Decision::In
                };
                MemberReport::new(d, "summable-total", tail)
            }
            SubmeasureSpec::Density(_) => MemberReport::new(
                Decision::In,
                "density-bounded",
                self.tail(a, 0, precision).ok(),
            ),
            _ => MemberReport::new(Decision::Unknown, "beyond-finite-domain", None),
        }
    }

    /// Is Exh(φ) tall, i.e. does φ({n}) tend to 0?
    pub fn is_tall(&self) -> Tallness {
        match self {
            SubmeasureSpec::Summable(Weights::Power(_)) => Tallness::Tall,
            SubmeasureSpec::Summable(Weights::Table(w)) => {
                if w.iter().any(|x| x.is_positive()) {
                    Tallness::NotTall
                } else {
                    Tallness::Tall
                }
            }
            SubmeasureSpec::Density(_) => Tallness::Tall,
            _ => Tallness::Unknown,
        }
    }

    /// Exact values of φ on every subset of X, indexed by mask over the
    /// increasing enumeration of X.
    pub fn subset_values(&self, x: &[u64]) -> Result<Vec<Q>> {
        let n = x.len();
        if let SubmeasureSpec::Summable(w) = self {
            let weights: Vec<Q> = x
                .iter()
                .map(|&i| w.weight_exact(i).ok_or(Error::InexactSubmeasure))
                .collect::<Result<_>>()?;
            let mut v = vec![Q::zero(); 1 << n];
            for m in 1..1usize << n {
                let low = m.trailing_zeros() as usize;
                v[m] = &v[m & (m - 1)] + &weights[low];
            }
            return Ok(v);
        }
        let mut out = Vec::with_capacity(1 << n);
        let mut pts = Vec::with_capacity(n);
        for m in 0..1usize << n {
            pts.clear();
            pts.extend((0..n).filter(|i| m >> i & 1 == 1).map(|i| x[i]));
            match self.eval(&pts, 64)? {
                Scalar::Exact(v) => out.push(v),
                Scalar::Enclosure { .. } => return Err(Error::InexactSubmeasure),
            }
        }
        Ok(out)
    }

    /// max μ(A) over nonnegative measures μ on X with μ(C) ≤ φ(C) for all
    /// C ⊆ X, with a verified primal witness and dual certificate.
    pub fn dominated_measure_max(&self, x: &[u64], a: &[u64], cap: usize) -> Result<Dominated> {
        let x = normalized(x);
        let cap = cap.min(LP_HARD_CAP);
        if x.len() > cap {
            return Err(Error::DomainTooLarge { size: x.len(), cap });
        }
        let mut target = 0usize;
        for p in normalized(a) {
            let i = x
                .binary_search(&p)
                .map_err(|_| Error::Precondition(format!("point {p} of A is not in X")))?;
            target |= 1 << i;
        }
        let values = self.subset_values(&x)?;
        let opt = lp::max_dominated(x.len(), &values, target)?;
        verify_optimum(x.len(), &values, target, &opt)?;
        let witness = FinMeasure::from_atoms(
            x.iter()
                .zip(&opt.weights)
                .map(|(&p, w)| (Point::Nat(p), w.clone())),
        );
        let certificate = opt
            .dual
            .iter()
            .map(|(m, w)| DualTerm {
                set: (0..x.len())
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| x[i])
                    .collect(),
                multiplier: w.clone(),
            })
            .collect();
        Ok(Dominated {
            value: opt.value,
            witness,
            certificate,
        })
    }

    /// φ(X) − max dominated mass on X.
    pub fn pathology_gap(&self, x: &[u64], cap: usize) -> Result<Q> {
        let best = self.dominated_measure_max(x, x, cap)?;
        let full = self.eval(x, 64)?;
        let full = full.exact().ok_or(Error::InexactSubmeasure)?;
        Ok(full - best.value)
    }
}

fn verify_optimum(n: usize, values: &[Q], target: usize, opt: &lp::Optimum) -> Result<()> {
    let defect = |what: &str| Err(Error::Defect(format!("domination optimum failed {what}")));
    if opt.weights.iter().any(|w| w.is_negative()) {
        return defect("nonnegativity");
    }
    if (0..n).any(|i| target >> i & 1 == 0 && !opt.weights[i].is_zero()) {
        return defect("support check");
    }
    let mut sums = vec![Q::zero(); 1 << n];
    for m in 1..1usize << n {
        let low = m.trailing_zeros() as usize;
        sums[m] = &sums[m & (m - 1)] + &opt.weights[low];
        if sums[m] > values[m] {
            return defect("domination");
        }
    }
    if sums[target] != opt.value {
        return defect("objective");
    }
    if opt.dual.iter().any(|(_, w)| w.is_negative()) {
        return defect("dual sign");
    }
    for i in (0..n).filter(|i| target >> i & 1 == 1) {
        let cover: Q = opt
            .dual
            .iter()
            .filter(|(m, _)| m >> i & 1 == 1)
            .map(|(_, w)| w.clone())
            .sum();
        if cover < Q::one() {
            return defect("dual feasibility");
        }
    }
    let dual_value: Q = opt.dual.iter().map(|(m, w)| w * &values[*m]).sum();
    if dual_value != opt.value {
        return defect("strong duality");
    }
    Ok(())
}

fn block_index_of(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        63 - n.leading_zeros()
    }
}

fn count_in_big(a: &OmegaSet, lo: &BigUint, hi: &BigUint) -> BigUint {
    a.count_below_big(hi) - a.count_below_big(lo)
}

/// max over canonical blocks k < limit of |A ∩ [n,∞) ∩ [2^k, 2^(k+1))| / 2^k.
fn canonical_tail_truncated(a: &OmegaSet, n: u64, limit: u32) -> Q {
    (block_index_of(n)..limit)
        .map(|k| canonical_ratio(a, n, k))
        .max()
        .unwrap_or_else(Q::zero)
}

fn canonical_ratio(a: &OmegaSet, n: u64, k: u32) -> Q {
    let lo = (BigUint::one() << k as usize).max(BigUint::from(n));
    let hi = BigUint::one() << (k as usize + 1);
    if lo >= hi {
        return Q::zero();
    }
    let c = count_in_big(a, &lo, &hi);
    Q::new(BigInt::from(c), BigInt::one() << k as usize)
}

/// sup over all canonical blocks. Once 2^k is past the prefix of A and past
/// the pre-period of 2^k mod L, the ratio is d + D_k / 2^k with D_k periodic
/// in k, so one period of k beyond that point decides the supremum.
fn canonical_tail_sup(a: &OmegaSet, n: u64) -> Q {
    let d = a.natural_density();
    let l = a.period();
    let k0 = ceil_log2(n.max(a.prefix_len()).max(1))
        .max(ceil_log2(l))
        .max(block_index_of(n));
    let mut best = d;
    for k in block_index_of(n)..k0 {
        best = best.max(canonical_ratio(a, n, k));
    }
    let mut seen: HashMap<u64, u32> = HashMap::new();
    let mut k = k0;
    let mut residue = (BigUint::one() << k0 as usize) % BigUint::from(l);
    loop {
        let r = residue.to_u64().expect("residue below the period");
        if seen.insert(r, k).is_some() {
            break;
        }
        best = best.max(canonical_ratio(a, n, k));
        residue = (residue * 2u32) % BigUint::from(l);
        k += 1;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ep(prefix: &[u8], cycle: &[u8]) -> OmegaSet {
        OmegaSet::periodic(
            prefix.iter().map(|&b| b == 1).collect(),
            cycle.iter().map(|&b| b == 1).collect(),
        )
        .unwrap()
    }

    fn harmonic() -> SubmeasureSpec {
        SubmeasureSpec::power(qi(1)).unwrap()
    }

    #[test]
    fn eval_examples() {
        let fd = SubmeasureSpec::density_canonical();
        assert_eq!(fd.eval(&[4, 5, 6, 7], 64).unwrap(), Scalar::Exact(qi(1)));
        assert_eq!(
            harmonic().eval(&[0, 1, 3], 64).unwrap(),
            Scalar::Exact(q(7, 4))
        );
        let tri = SubmeasureSpec::Covering(Covering::triangle(qi(1)));
        assert_eq!(tri.eval(&[0, 1, 2], 64).unwrap(), Scalar::Exact(qi(2)));
        assert_eq!(tri.eval(&[5], 64).unwrap_err().code(), "OUT_OF_DOMAIN");
    }

    #[test]
    fn tail_examples() {
        let t = harmonic().tail(&OmegaSet::interval(0, 10), 5, 64).unwrap();
        let expect: Q = (5..10).map(|i| q(1, i + 1)).sum();
        assert_eq!(t, Scalar::Exact(expect));
        let fd = SubmeasureSpec::density_canonical();
        for n in [0, 1, 2, 8, 1000] {
            assert_eq!(
                fd.tail(&OmegaSet::evens(), n, 64).unwrap(),
                Scalar::Exact(q(1, 2))
            );
        }
        assert!(harmonic()
            .tail(&OmegaSet::evens(), 0, 64)
            .unwrap()
            .is_infinite());
        let tri = SubmeasureSpec::Covering(Covering::triangle(qi(1)));
        assert_eq!(
            tri.tail(&OmegaSet::evens(), 0, 64).unwrap_err().code(),
            "NO_TAIL_RULE"
        );
    }

    #[test]
    fn canonical_tail_matches_block_scan() {
        // sup over blocks compared with a direct scan over many blocks
        let fd = SubmeasureSpec::density_canonical();
        let sets = [
            ep(&[1, 1, 1], &[0, 0, 1]),
            ep(&[], &[1, 1, 0, 0, 0]),
            ep(&[0, 1, 1, 1, 1, 1, 1, 1, 1, 1], &[0, 0, 0, 0, 0, 0, 1]),
            OmegaSet::cofinite([3, 9]),
        ];
        for s in &sets {
            for n in [0u64, 3, 17] {
                let direct = (block_index_of(n)..40)
                    .map(|k| canonical_ratio(s, n, k))
                    .max()
                    .unwrap();
                let got = fd.tail(s, n, 64).unwrap();
                let got = got.exact().unwrap().clone();
                assert!(got >= direct, "{s} n={n}: {got} < {direct}");
                assert!(got == direct || got == s.natural_density(), "{s} n={n}");
            }
        }
    }

    #[test]
    fn exh_examples() {
        let fd = SubmeasureSpec::density_canonical();
        assert_eq!(
            fd.exh_member(&OmegaSet::finite([1, 2, 3]), 64).decision,
            Decision::In
        );
        assert_eq!(
            fd.exh_member(&OmegaSet::evens(), 64).decision,
            Decision::Out
        );
        assert_eq!(
            harmonic().exh_member(&OmegaSet::evens(), 64).decision,
            Decision::Out
        );
        let ones = SubmeasureSpec::summable_table(vec![qi(1)]).unwrap();
        assert_eq!(
            ones.exh_member(&OmegaSet::odds(), 64).decision,
            Decision::Out
        );
        let evens_only = SubmeasureSpec::summable_table(vec![qi(1), qi(0)]).unwrap();
        assert_eq!(
            evens_only.exh_member(&OmegaSet::odds(), 64).decision,
            Decision::In
        );
    }

    #[test]
    fn tallness_examples() {
        assert_eq!(
            SubmeasureSpec::power(q(1, 2)).unwrap().is_tall(),
            Tallness::Tall
        );
        assert_eq!(
            SubmeasureSpec::density_canonical().is_tall(),
            Tallness::Tall
        );
        let ones = SubmeasureSpec::summable_table(vec![qi(1)]).unwrap();
        assert_eq!(ones.is_tall(), Tallness::NotTall);
    }

    #[test]
    fn domination_examples() {
        let tri = SubmeasureSpec::Covering(Covering::triangle(qi(1)));
        let d = tri
            .dominated_measure_max(&[0, 1, 2], &[0, 1, 2], 12)
            .unwrap();
        assert_eq!(d.value, q(3, 2));
        assert_eq!(
            d.witness,
            FinMeasure::from_atoms((0..3).map(|i| (Point::Nat(i), q(1, 2))))
        );
        assert_eq!(tri.pathology_gap(&[0, 1, 2], 12).unwrap(), q(1, 2));
        let half = SubmeasureSpec::Covering(Covering::triangle(q(1, 2)));
        assert_eq!(half.pathology_gap(&[0, 1, 2], 12).unwrap(), q(1, 4));
        assert_eq!(
            tri.dominated_measure_max(&[0, 1, 2], &[], 12)
                .unwrap()
                .value,
            qi(0)
        );

        let t = FiniteTable::additive(vec![3, 4], &[q(1, 3), q(2, 3)]).unwrap();
        let add = SubmeasureSpec::Table(t);
        let d = add.dominated_measure_max(&[3, 4], &[3, 4], 12).unwrap();
        assert_eq!(d.value, qi(1));
        assert_eq!(d.witness.weight(Point::Nat(4)), q(2, 3));

        let big: Vec<u64> = (0..13).collect();
        let err = harmonic()
            .dominated_measure_max(&big, &big, 12)
            .unwrap_err();
        assert_eq!(err.code(), "DOMAIN_TOO_LARGE");
        let irr = SubmeasureSpec::power(q(1, 2)).unwrap();
        assert_eq!(
            irr.dominated_measure_max(&[1, 2], &[1], 12)
                .unwrap_err()
                .code(),
            "INEXACT_SUBMEASURE"
        );
    }

    #[test]
    fn density_window_has_no_gap() {
        let fd = SubmeasureSpec::density_canonical();
        let window: Vec<u64> = (8..16).collect();
        assert_eq!(fd.pathology_gap(&window, 12).unwrap(), qi(0));
    }

    #[test]
    fn parity_cover_shape() {
        let c = Covering::parity(4, 0).unwrap();
        assert_eq!(c.tau(c.full_mask()), 4);
        assert_eq!(c.tau(c.full_mask() >> 1), 3);
        assert!(c.cover().iter().all(|s| s.len() == 8));
        let norm = SubmeasureSpec::Covering(c.normalized());
        let all: Vec<u64> = (0..15).collect();
        let d = norm.dominated_measure_max(&all, &all, 16).unwrap();
        assert_eq!(d.value, q(15, 32));
    }

    #[test]
    fn table_validation() {
        assert!(FiniteTable::new(vec![0, 1], vec![qi(0), qi(1), qi(1), qi(3)]).is_err());
        assert!(FiniteTable::new(vec![0, 1], vec![qi(0), qi(2), qi(1), qi(1)]).is_err());
        assert!(FiniteTable::new(vec![0, 1], vec![qi(1), qi(1), qi(1), qi(1)]).is_err());
        assert!(FiniteTable::new(vec![0, 1], vec![qi(0), qi(1), qi(1), qi(2)]).is_ok());
        assert!(FiniteTable::new(vec![1, 0], vec![qi(0), qi(1), qi(1), qi(2)]).is_err());
    }

    #[test]
    fn contracts() {
        let tri = Covering::triangle(q(1, 2)).to_table().unwrap();
        let ok = BlockSum::with_contracts(vec![tri.clone()], vec![q(3, 4)]).unwrap();
        assert_eq!(ok.contracts().unwrap(), &[q(3, 4)]);
        let add = FiniteTable::additive(vec![5, 6], &[q(1, 2), q(1, 2)]).unwrap();
        let err = BlockSum::with_contracts(vec![add], vec![q(1, 2)]).unwrap_err();
        assert_eq!(
            err,
            Error::ContractFailed {
                block: 0,
                gap: "0".into()
            }
        );
        assert!(BlockSum::with_contracts(vec![], vec![])
            .unwrap()
            .blocks()
            .is_empty());
    }

    #[test]
    fn json_round_trips() {
        let specs = vec![
            SubmeasureSpec::power(q(1, 2)).unwrap(),
            SubmeasureSpec::summable_table(vec![qi(1), q(1, 3)]).unwrap(),
            SubmeasureSpec::density_canonical(),
            SubmeasureSpec::density_truncated(3).unwrap(),
            SubmeasureSpec::density_blocks(vec![FinMeasure::uniform([0, 1])]).unwrap(),
            SubmeasureSpec::Covering(Covering::triangle(qi(1))),
            SubmeasureSpec::Table(Covering::triangle(qi(1)).to_table().unwrap()),
            SubmeasureSpec::BlockSum(
                BlockSum::with_contracts(
                    vec![Covering::triangle(q(1, 2)).to_table().unwrap()],
                    vec![q(3, 4)],
                )
                .unwrap(),
            ),
        ];
        for s in specs {
            let text = serde_json::to_string(&s).unwrap();
            let back: SubmeasureSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, s, "{text}");
        }
        let text =
            r#"{"kind":"covering","domain":[0,1,2],"cover":[[0,1],[1,2],[0,2]],"scale":"1"}"#;
        let c: SubmeasureSpec = serde_json::from_str(text).unwrap();
        assert_eq!(serde_json::to_string(&c).unwrap(), text);
    }

    fn brute_cover(c: &Covering, mask: usize) -> u32 {
        let k = c.cover_masks().len();
        (0..1usize << k)
            .filter(|sel| {
                let u = (0..k)
                    .filter(|i| sel >> i & 1 == 1)
                    .fold(0, |a, i| a | c.cover_masks()[i]);
                u & mask == mask
            })
            .map(|sel| sel.count_ones())
            .min()
            .unwrap()
    }

    #[test]
    fn covering_numbers_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(2..7usize);
            let mut cover: Vec<Vec<u64>> = (0..rng.gen_range(1..6))
                .map(|_| {
                    (0..n as u64)
                        .filter(|_| rng.gen_bool(0.5))
                        .collect::<Vec<_>>()
                })
                .filter(|s: &Vec<u64>| !s.is_empty())
                .collect();
            cover.push((0..n as u64).collect());
            let c = Covering::new((0..n as u64).collect(), cover, qi(1)).unwrap();
            for m in 0..1usize << n {
                assert_eq!(c.tau(m), brute_cover(&c, m));
            }
        }
    }

    proptest! {
        #[test]
        fn submeasure_axioms_on_density_and_summable(
            a in proptest::collection::btree_set(0u64..64, 0..12),
            b in proptest::collection::btree_set(0u64..64, 0..12),
        ) {
            let a: Vec<u64> = a.into_iter().collect();
            let b: Vec<u64> = b.into_iter().collect();
            let mut u = a.clone();
            u.extend(&b);
            for phi in [SubmeasureSpec::density_canonical(), harmonic()] {
                let fa = phi.eval(&a, 64).unwrap().exact().unwrap().clone();
                let fb = phi.eval(&b, 64).unwrap().exact().unwrap().clone();
                let fu = phi.eval(&u, 64).unwrap().exact().unwrap().clone();
                prop_assert!(fa <= fu && fb <= fu);
                prop_assert!(fu <= &fa + &fb);
            }
        }

        #[test]
        fn domination_below_eval(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..7usize);
            let cover: Vec<Vec<u64>> = (0..n as u64)
                .map(|i| vec![i, (i + 1) % n as u64, (i + 3) % n as u64])
                .collect();
            let c = Covering::new((0..n as u64).collect(), cover, q(1, 3)).unwrap();
            let phi = SubmeasureSpec::Covering(c);
            let x: Vec<u64> = (0..n as u64).collect();
            let a: Vec<u64> = x.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
            let d = phi.dominated_measure_max(&x, &a, 12).unwrap();
            let fa = phi.eval(&a, 64).unwrap().exact().unwrap().clone();
            prop_assert!(d.value <= fa);
            prop_assert!(phi.pathology_gap(&x, 12).unwrap() >= qi(0));
            // covering values are integer multiples of the scale and ≤ scale·|A|
            let r = fa.clone() / q(1, 3);
            prop_assert!(r.is_integer());
            prop_assert!(fa <= q(a.len() as i64, 3));
        }
    }
}
