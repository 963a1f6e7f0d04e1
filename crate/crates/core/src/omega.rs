//! Finitely describable subsets of the natural numbers.
//!
//! Every [`OmegaSet`] is eventually periodic, so membership, set algebra and
//! natural density are all decidable. `Finite` and `Cofinite` are kept as
//! separate variants for readable JSON and logarithmic membership; the
//! canonical form returned by [`OmegaSet::canonical`] uses them whenever the
//! periodic part is constant.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Q;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Repr", into = "Repr")]
pub enum OmegaSet {
    /// Strictly increasing list of members.
    Finite(Vec<u64>),
    /// Strictly increasing list of non-members.
    Cofinite(Vec<u64>),
    /// `prefix[n]` for `n < prefix.len()`, then `cycle` repeated forever.
    Periodic { prefix: Vec<bool>, cycle: Vec<bool> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Repr {
    Finite { elements: Vec<u64> },
    Cofinite { excluded: Vec<u64> },
    Ep { prefix: Vec<u8>, cycle: Vec<u8> },
}

impl TryFrom<Repr> for OmegaSet {
    type Error = Error;

    fn try_from(r: Repr) -> Result<Self> {
        match r {
            Repr::Finite { elements } => {
                check_increasing(&elements)?;
                Ok(OmegaSet::Finite(elements))
            }
            Repr::Cofinite { excluded } => {
                check_increasing(&excluded)?;
                Ok(OmegaSet::Cofinite(excluded))
            }
            Repr::Ep { prefix, cycle } => OmegaSet::periodic(to_bits(&prefix)?, to_bits(&cycle)?),
        }
    }
}

impl From<OmegaSet> for Repr {
    fn from(s: OmegaSet) -> Self {
        match s {
            OmegaSet::Finite(elements) => Repr::Finite { elements },
            OmegaSet::Cofinite(excluded) => Repr::Cofinite { excluded },
            OmegaSet::Periodic { prefix, cycle } => Repr::Ep {
                prefix: prefix.iter().map(|&b| b as u8).collect(),
                cycle: cycle.iter().map(|&b| b as u8).collect(),
            },
        }
    }
}

fn to_bits(raw: &[u8]) -> Result<Vec<bool>> {
    raw.iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::InvalidInput(format!(
                "bit value {other} is not 0 or 1"
            ))),
        })
        .collect()
}

fn check_increasing(xs: &[u64]) -> Result<()> {
    if xs.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "element lists must be strictly increasing".into(),
        ))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl OmegaSet {
    pub fn finite(elements: impl IntoIterator<Item = u64>) -> Self {
        let mut v: Vec<u64> = elements.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        OmegaSet::Finite(v)
    }

    pub fn cofinite(excluded: impl IntoIterator<Item = u64>) -> Self {
        let mut v: Vec<u64> = excluded.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        OmegaSet::Cofinite(v)
    }

    pub fn periodic(prefix: Vec<bool>, cycle: Vec<bool>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidInput(
                "periodic cycle must be non-empty".into(),
            ));
        }
        Ok(OmegaSet::Periodic { prefix, cycle })
    }

    pub fn empty() -> Self {
        OmegaSet::Finite(Vec::new())
    }

    pub fn all() -> Self {
        OmegaSet::Cofinite(Vec::new())
    }

    pub fn evens() -> Self {
        OmegaSet::Periodic {
            prefix: vec![],
            cycle: vec![true, false],
        }
    }

    pub fn odds() -> Self {
        OmegaSet::Periodic {
            prefix: vec![],
            cycle: vec![false, true],
        }
    }

    /// The half-open interval `[start, end)`.
    pub fn interval(start: u64, end: u64) -> Self {
        OmegaSet::Finite((start..end).collect())
    }

    pub fn contains(&self, n: u64) -> bool {
        match self {
            OmegaSet::Finite(xs) => xs.binary_search(&n).is_ok(),
            OmegaSet::Cofinite(xs) => xs.binary_search(&n).is_err(),
            OmegaSet::Periodic { prefix, cycle } => {
                let p = prefix.len() as u64;
                if n < p {
                    prefix[n as usize]
                } else {
                    cycle[((n - p) % cycle.len() as u64) as usize]
                }
            }
        }
    }

    /// Members below `n`, in increasing order.
    pub fn window(&self, n: u64) -> Vec<u64> {
        self.members_in(0, n)
    }

    /// Members of `[start, end)`, in increasing order.
    pub fn members_in(&self, start: u64, end: u64) -> Vec<u64> {
        if start >= end {
            return Vec::new();
        }
        match self {
            OmegaSet::Finite(xs) => {
                let lo = xs.partition_point(|&x| x < start);
                let hi = xs.partition_point(|&x| x < end);
                xs[lo..hi].to_vec()
            }
            _ => (start..end).filter(|&i| self.contains(i)).collect(),
        }
    }

    /// Length of the non-periodic prefix (one past the last listed element
    /// for `Finite`/`Cofinite`).
    pub fn prefix_len(&self) -> u64 {
        match self {
            OmegaSet::Finite(xs) | OmegaSet::Cofinite(xs) => xs.last().map_or(0, |&m| m + 1),
            OmegaSet::Periodic { prefix, .. } => prefix.len() as u64,
        }
    }

    pub fn period(&self) -> u64 {
        match self {
            OmegaSet::Periodic { cycle, .. } => cycle.len() as u64,
            _ => 1,
        }
    }

    /// Members among the periodic part of one cycle (0 or 1 for the list variants).
    fn cycle_ones(&self) -> u64 {
        match self {
            OmegaSet::Finite(_) => 0,
            OmegaSet::Cofinite(_) => 1,
            OmegaSet::Periodic { cycle, .. } => cycle.iter().filter(|&&b| b).count() as u64,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.cycle_ones() == 0
    }

    pub fn is_cofinite(&self) -> bool {
        self.cycle_ones() == self.period()
    }

    /// Number of members in `[0, n)`.
    pub fn count_below(&self, n: u64) -> u64 {
        match self {
            OmegaSet::Finite(xs) => xs.partition_point(|&x| x < n) as u64,
            OmegaSet::Cofinite(xs) => n - xs.partition_point(|&x| x < n) as u64,
            OmegaSet::Periodic { prefix, cycle } => {
                let p = prefix.len() as u64;
                if n <= p {
                    return prefix[..n as usize].iter().filter(|&&b| b).count() as u64;
                }
                let head = prefix.iter().filter(|&&b| b).count() as u64;
                let l = cycle.len() as u64;
                let rest = n - p;
                let ones = self.cycle_ones();
                let partial = cycle[..(rest % l) as usize].iter().filter(|&&b| b).count() as u64;
                head + (rest / l) * ones + partial
            }
        }
    }

    /// Number of members in `[0, n)` for arbitrarily large `n`.
    pub fn count_below_big(&self, n: &BigUint) -> BigUint {
        if let Some(small) = n.to_u64() {
            return BigUint::from(self.count_below(small));
        }
        let p = self.prefix_len();
        let head = self.count_below(p);
        let l = self.period();
        let rest = n - BigUint::from(p);
        let (full, part) = rest.div_rem(&BigUint::from(l));
        let part = part.to_u64().expect("remainder below period");
        let partial = self.count_below(p + part) - head;
        BigUint::from(head) + full * BigUint::from(self.cycle_ones()) + BigUint::from(partial)
    }

    /// Members in `[start, end)`.
    pub fn count_in(&self, start: u64, end: u64) -> u64 {
        if start >= end {
            0
        } else {
            self.count_below(end) - self.count_below(start)
        }
    }

    /// Expanded `(prefix, cycle)` pair describing the same set.
    pub fn to_periodic(&self) -> (Vec<bool>, Vec<bool>) {
        match self {
            OmegaSet::Periodic { prefix, cycle } => (prefix.clone(), cycle.clone()),
            _ => {
                let p = self.prefix_len();
                let prefix = (0..p).map(|i| self.contains(i)).collect();
                (prefix, vec![self.is_cofinite()])
            }
        }
    }

    /// Minimal period, then shortest prefix; constant cycles collapse to the
    /// `Finite`/`Cofinite` variants.
    pub fn canonical(&self) -> OmegaSet {
        let (mut prefix, cycle) = match self {
            OmegaSet::Finite(_) | OmegaSet::Cofinite(_) => return self.clone(),
            OmegaSet::Periodic { prefix, cycle } => (prefix.clone(), cycle.clone()),
        };
        let l = cycle.len();
        let d = (1..=l)
            .find(|&d| l % d == 0 && (0..l).all(|i| cycle[i] == cycle[i % d]))
            .unwrap_or(l);
        let mut cycle: Vec<bool> = cycle[..d].to_vec();
        while let Some(&last) = prefix.last() {
            if last != cycle[d - 1] {
                break;
            }
            prefix.pop();
            cycle.rotate_right(1);
        }
        if cycle.iter().all(|&b| !b) {
            OmegaSet::Finite(
                prefix
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(i, _)| i as u64)
                    .collect(),
            )
        } else if cycle.iter().all(|&b| b) {
            OmegaSet::Cofinite(
                prefix
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| !b)
                    .map(|(i, _)| i as u64)
                    .collect(),
            )
        } else {
            OmegaSet::Periodic { prefix, cycle }
        }
    }

    pub fn complement(&self) -> OmegaSet {
        match self {
            OmegaSet::Finite(xs) => OmegaSet::Cofinite(xs.clone()),
            OmegaSet::Cofinite(xs) => OmegaSet::Finite(xs.clone()),
            OmegaSet::Periodic { prefix, cycle } => OmegaSet::Periodic {
                prefix: prefix.iter().map(|b| !b).collect(),
                cycle: cycle.iter().map(|b| !b).collect(),
            }
            .canonical(),
        }
    }

    pub fn intersect(&self, other: &OmegaSet) -> OmegaSet {
        self.combine(other, |a, b| a && b)
    }

    pub fn union(&self, other: &OmegaSet) -> OmegaSet {
        self.combine(other, |a, b| a || b)
    }

    pub fn difference(&self, other: &OmegaSet) -> OmegaSet {
        self.combine(other, |a, b| a && !b)
    }

    pub fn is_subset_of(&self, other: &OmegaSet) -> bool {
        self.difference(other) == OmegaSet::empty()
    }

    /// Pointwise combination of two membership predicates.
    pub fn combine(&self, other: &OmegaSet, f: impl Fn(bool, bool) -> bool) -> OmegaSet {
        let list = |s: &OmegaSet| match s {
            OmegaSet::Finite(xs) => Some((false, xs.clone())),
            OmegaSet::Cofinite(xs) => Some((true, xs.clone())),
            OmegaSet::Periodic { .. } => None,
        };
        if let (Some((pa, la)), Some((pb, lb))) = (list(self), list(other)) {
            let polarity = f(pa, pb);
            let mut keys: Vec<u64> = la.iter().chain(lb.iter()).copied().collect();
            keys.sort_unstable();
            keys.dedup();
            let exceptions: Vec<u64> = keys
                .into_iter()
                .filter(|&n| f(self.contains(n), other.contains(n)) != polarity)
                .collect();
            return if polarity {
                OmegaSet::Cofinite(exceptions)
            } else {
                OmegaSet::Finite(exceptions)
            };
        }
        let p = self.prefix_len().max(other.prefix_len());
        let l = lcm(self.period(), other.period());
        let bit = |n: u64| f(self.contains(n), other.contains(n));
        OmegaSet::Periodic {
            prefix: (0..p).map(bit).collect(),
            cycle: (p..p + l).map(bit).collect(),
        }
        .canonical()
    }

    /// The set `{ n : stride·n + offset ∈ self }`.
    pub fn decimate(&self, stride: u64, offset: u64) -> OmegaSet {
        assert!(stride > 0, "stride must be positive");
        match self {
            OmegaSet::Finite(xs) => OmegaSet::Finite(
                xs.iter()
                    .filter(|&&x| x >= offset && (x - offset).is_multiple_of(stride))
                    .map(|&x| (x - offset) / stride)
                    .collect(),
            ),
            OmegaSet::Cofinite(xs) => OmegaSet::Cofinite(
                xs.iter()
                    .filter(|&&x| x >= offset && (x - offset).is_multiple_of(stride))
                    .map(|&x| (x - offset) / stride)
                    .collect(),
            ),
            OmegaSet::Periodic { prefix, cycle } => {
                let p = prefix.len() as u64;
                let start = p.saturating_sub(offset).div_ceil(stride);
                let l = cycle.len() as u64 / gcd(cycle.len() as u64, stride);
                let bit = |n: u64| self.contains(stride * n + offset);
                OmegaSet::Periodic {
                    prefix: (0..start).map(bit).collect(),
                    cycle: (start..start + l).map(bit).collect(),
                }
                .canonical()
            }
        }
    }

    /// Exact asymptotic density (the limit exists for eventually periodic sets).
    pub fn natural_density(&self) -> Q {
        Q::new(self.cycle_ones().into(), self.period().into())
    }

    /// Members in increasing order starting at `from`; infinite unless the set is finite.
    pub fn iter_from(&self, from: u64) -> Box<dyn Iterator<Item = u64> + '_> {
        match self {
            OmegaSet::Finite(xs) => {
                let lo = xs.partition_point(|&x| x < from);
                Box::new(xs[lo..].iter().copied())
            }
            _ if self.is_finite() => {
                let bound = self.prefix_len();
                Box::new((from..bound).filter(move |&n| self.contains(n)))
            }
            _ => Box::new((from..).filter(move |&n| self.contains(n))),
        }
    }

    /// Finite members as a list, or `None` for infinite sets.
    pub fn elements(&self) -> Option<Vec<u64>> {
        if self.is_finite() {
            Some(self.iter_from(0).collect())
        } else {
            None
        }
    }

    pub fn is_empty(&self) -> bool {
        self.canonical() == OmegaSet::empty()
    }
}

impl fmt::Display for OmegaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = |bs: &[bool]| {
            bs.iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect::<String>()
        };
        match self {
            OmegaSet::Finite(xs) => write!(f, "finite{xs:?}"),
            OmegaSet::Cofinite(xs) => write!(f, "cofinite{xs:?}"),
            OmegaSet::Periodic { prefix, cycle } => {
                write!(f, "ep[{}]({})", bits(prefix), bits(cycle))
            }
        }
    }
}
