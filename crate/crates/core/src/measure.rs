//! Finitely supported signed measures on ω ∪ {⋆} with exact rational atoms.
//!
//! The extra point ⋆ stands for the filter point of the space N_F. It sorts
//! after every natural number.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::omega::OmegaSet;
use crate::rational::{self, pow2, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub enum Point {
    Nat(u64),
    Star,
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    nat: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    star: Option<bool>,
}

impl TryFrom<PointRepr> for Point {
    type Error = Error;

    fn try_from(r: PointRepr) -> Result<Self> {
        match (r.nat, r.star) {
            (Some(n), None) => Ok(Point::Nat(n)),
            (None, Some(true)) => Ok(Point::Star),
            _ => Err(Error::InvalidInput(
                "a point is either {\"nat\": n} or {\"star\": true}".into(),
            )),
        }
    }
}

impl From<Point> for PointRepr {
    fn from(p: Point) -> Self {
        match p {
            Point::Nat(n) => PointRepr {
                nat: Some(n),
                star: None,
            },
            Point::Star => PointRepr {
                nat: None,
                star: Some(true),
            },
        }
    }
}

impl Point {
    pub fn nat(self) -> Option<u64> {
        match self {
            Point::Nat(n) => Some(n),
            Point::Star => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Nat(n) => write!(f, "{n}"),
            Point::Star => write!(f, "*"),
        }
    }
}

/// Sorted atom list with nonzero weights. Two measures are equal exactly when
/// their atom lists are equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct FinMeasure {
    atoms: Vec<(Point, Q)>,
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    atoms: Vec<(Point, String)>,
}

impl TryFrom<MeasureRepr> for FinMeasure {
    type Error = Error;

    fn try_from(r: MeasureRepr) -> Result<Self> {
        let mut atoms = Vec::with_capacity(r.atoms.len());
        for (p, w) in r.atoms {
            atoms.push((p, rational::parse(&w)?));
        }
        if atoms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidInput(
                "measure atoms must be listed at strictly increasing points".into(),
            ));
        }
        if atoms.iter().any(|(_, w)| w.is_zero()) {
            return Err(Error::InvalidInput("measure atoms must be nonzero".into()));
        }
        Ok(FinMeasure { atoms })
    }
}

impl From<FinMeasure> for MeasureRepr {
    fn from(m: FinMeasure) -> Self {
        MeasureRepr {
            atoms: m
                .atoms
                .into_iter()
                .map(|(p, w)| (p, rational::render(&w)))
                .collect(),
        }
    }
}

/// Result of collapsing a disjointly supported sequence into one measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub measure: FinMeasure,
    pub blocks: Vec<Vec<u64>>,
    #[serde(with = "crate::rational")]
    pub residual: Q,
}

impl FinMeasure {
    pub fn zero() -> Self {
        FinMeasure::default()
    }

    /// Builds a measure from arbitrary atoms, summing repeated points and
    /// dropping zero weights.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (Point, Q)>) -> Self {
        let mut acc: BTreeMap<Point, Q> = BTreeMap::new();
        for (p, w) in atoms {
            *acc.entry(p).or_insert_with(Q::zero) += w;
        }
        FinMeasure {
            atoms: acc.into_iter().filter(|(_, w)| !w.is_zero()).collect(),
        }
    }

    /// Wraps atoms already sorted by point with nonzero weights.
    pub(crate) fn from_sorted(atoms: Vec<(Point, Q)>) -> Self {
        debug_assert!(atoms.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(atoms.iter().all(|(_, w)| !w.is_zero()));
        FinMeasure { atoms }
    }

    pub fn dirac(p: Point) -> Self {
        FinMeasure {
            atoms: vec![(p, Q::one())],
        }
    }

    /// Uniform probability measure on the given naturals.
    pub fn uniform(points: impl IntoIterator<Item = u64>) -> Self {
        let pts: Vec<u64> = points.into_iter().collect();
        if pts.is_empty() {
            return FinMeasure::zero();
        }
        let w = Q::new(1.into(), (pts.len() as u64).into());
        FinMeasure::from_atoms(pts.into_iter().map(|n| (Point::Nat(n), w.clone())))
    }

    pub fn atoms(&self) -> &[(Point, Q)] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = Point> + '_ {
        self.atoms.iter().map(|(p, _)| *p)
    }

    /// Natural-number support points, increasing.
    pub fn nat_support(&self) -> Vec<u64> {
        self.atoms.iter().filter_map(|(p, _)| p.nat()).collect()
    }

    pub fn has_star(&self) -> bool {
        matches!(self.atoms.last(), Some((Point::Star, _)))
    }

    pub fn weight(&self, p: Point) -> Q {
        self.atoms
            .binary_search_by(|(q, _)| q.cmp(&p))
            .map(|i| self.atoms[i].1.clone())
            .unwrap_or_else(|_| Q::zero())
    }

    /// Total variation ‖μ‖.
    pub fn norm(&self) -> Q {
        let abs: Vec<Q> = self.atoms.iter().map(|(_, w)| w.abs()).collect();
        rational::sum(&abs)
    }

    /// Signed total mass μ(ω ∪ {⋆}).
    pub fn total(&self) -> Q {
        rational::sum(self.atoms.iter().map(|(_, w)| w))
    }

    /// μ(A) for a set of naturals (⋆ never counts).
    pub fn mass_of(&self, s: &OmegaSet) -> Q {
        if let OmegaSet::Cofinite(excluded) = s {
            let nat = rational::sum(
                self.atoms
                    .iter()
                    .filter(|(p, _)| p.nat().is_some())
                    .map(|(_, w)| w),
            );
            let out: Q = excluded.iter().map(|&n| self.weight(Point::Nat(n))).sum();
            return nat - out;
        }
        rational::sum(
            self.atoms
                .iter()
                .filter(|(p, _)| matches!(p, Point::Nat(n) if s.contains(*n)))
                .map(|(_, w)| w),
        )
    }

    /// μ restricted to `s`, keeping ⋆ iff `include_star`.
    pub fn restrict(&self, s: &OmegaSet, include_star: bool) -> FinMeasure {
        self.filter(|p| match p {
            Point::Nat(n) => s.contains(n),
            Point::Star => include_star,
        })
    }

    pub fn filter(&self, keep: impl Fn(Point) -> bool) -> FinMeasure {
        FinMeasure {
            atoms: self
                .atoms
                .iter()
                .filter(|(p, _)| keep(*p))
                .cloned()
                .collect(),
        }
    }

    /// `(positive part, negative part)`; the negative part carries positive
    /// weights, so `μ = pos − neg`.
    pub fn split_pos_neg(&self) -> (FinMeasure, FinMeasure) {
        let pos = self
            .atoms
            .iter()
            .filter(|(_, w)| w.is_positive())
            .cloned()
            .collect();
        let neg = self
            .atoms
            .iter()
            .filter(|(_, w)| w.is_negative())
            .map(|(p, w)| (*p, -w.clone()))
            .collect();
        (FinMeasure { atoms: pos }, FinMeasure { atoms: neg })
    }

    pub fn is_probability(&self) -> bool {
        !self.atoms.is_empty()
            && self.atoms.iter().all(|(_, w)| w.is_positive())
            && self.total().is_one()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|(_, w)| w.is_positive())
    }

    /// Largest single atom weight, 0 for the zero measure.
    pub fn atom_max(&self) -> Q {
        self.atoms
            .iter()
            .map(|(_, w)| w.clone())
            .fold(Q::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn scale(&self, c: &Q) -> FinMeasure {
        if c.is_zero() {
            return FinMeasure::zero();
        }
        FinMeasure {
            atoms: self.atoms.iter().map(|(p, w)| (*p, w * c)).collect(),
        }
    }

    pub fn add(&self, other: &FinMeasure) -> FinMeasure {
        FinMeasure::from_atoms(self.atoms.iter().chain(other.atoms.iter()).cloned())
    }

    pub fn sub(&self, other: &FinMeasure) -> FinMeasure {
        self.add(&other.scale(&-Q::one()))
    }

    /// |μ|, the variation measure.
    pub fn abs(&self) -> FinMeasure {
        FinMeasure {
            atoms: self.atoms.iter().map(|(p, w)| (*p, w.abs())).collect(),
        }
    }

    /// Image measure along a finite point map; colliding atoms are summed.
    pub fn pushforward(&self, f: &BTreeMap<Point, Point>) -> Result<FinMeasure> {
        let mut out = Vec::with_capacity(self.atoms.len());
        for (p, w) in &self.atoms {
            let target = f
                .get(p)
                .ok_or_else(|| Error::UndefinedPoint(p.to_string()))?;
            out.push((*target, w.clone()));
        }
        Ok(FinMeasure::from_atoms(out))
    }
}

/// Σ_{n<K} μ_n / 2^{n+1} over disjointly supported probability measures on ω.
pub fn aggregate(seq: &[FinMeasure]) -> Result<Aggregate> {
    let mut seen: BTreeMap<u64, usize> = BTreeMap::new();
    let mut atoms = Vec::new();
    let mut blocks = Vec::with_capacity(seq.len());
    for (n, mu) in seq.iter().enumerate() {
        if !mu.is_probability() || mu.has_star() {
            return Err(Error::NotProbability(n));
        }
        let support = mu.nat_support();
        for &x in &support {
            if seen.insert(x, n).is_some() {
                return Err(Error::OverlappingSupports(x.to_string()));
            }
        }
        let w = pow2(-(n as i64 + 1));
        atoms.extend(mu.atoms().iter().map(|(p, a)| (*p, a * &w)));
        blocks.push(support);
    }
    Ok(Aggregate {
        measure: FinMeasure::from_atoms(atoms),
        blocks,
        residual: pow2(-(seq.len() as i64)),
    })
}
