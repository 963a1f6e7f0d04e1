//! Exact values and certified dyadic enclosures.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{self, ceil_log2, Q};

/// Upper end of an enclosure; `Infinite` marks a provably divergent sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Upper {
    Finite(Q),
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scalar {
    Exact(Q),
    Enclosure {
        lower: Q,
        upper: Upper,
        precision_bits: u32,
    },
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Q::zero())
    }

    pub fn infinite(lower: Q, precision_bits: u32) -> Self {
        Scalar::Enclosure {
            lower,
            upper: Upper::Infinite,
            precision_bits,
        }
    }

    /// Builds an enclosure, collapsing to `Exact` when the ends agree.
    pub fn enclosure(lower: Q, upper: Q, precision_bits: u32) -> Self {
        debug_assert!(lower <= upper);
        if lower == upper {
            Scalar::Exact(lower)
        } else {
            Scalar::Enclosure {
                lower,
                upper: Upper::Finite(upper),
                precision_bits,
            }
        }
    }

    pub fn exact(&self) -> Option<&Q> {
        match self {
            Scalar::Exact(x) => Some(x),
            Scalar::Enclosure { .. } => None,
        }
    }

    pub fn lower(&self) -> &Q {
        match self {
            Scalar::Exact(x) => x,
            Scalar::Enclosure { lower, .. } => lower,
        }
    }

    /// `None` when the value is infinite.
    pub fn upper(&self) -> Option<&Q> {
        match self {
            Scalar::Exact(x) => Some(x),
            Scalar::Enclosure {
                upper: Upper::Finite(u),
                ..
            } => Some(u),
            Scalar::Enclosure {
                upper: Upper::Infinite,
                ..
            } => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.upper().is_none()
    }

    pub fn width(&self) -> Option<Q> {
        self.upper().map(|u| u - self.lower())
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.lower() <= x && self.upper().is_none_or(|u| x <= u)
    }

    /// Order of the enclosed value against `x`, when the enclosure decides it.
    pub fn compare(&self, x: &Q) -> Option<Ordering> {
        if let Scalar::Exact(v) = self {
            return Some(v.cmp(x));
        }
        if self.lower() > x {
            return Some(Ordering::Greater);
        }
        match self.upper() {
            Some(u) if u < x => Some(Ordering::Less),
            _ => None,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        let lower = self.lower() + other.lower();
        let bits = self.precision().min(other.precision());
        match (self.upper(), other.upper()) {
            (Some(a), Some(b)) => {
                if let (Scalar::Exact(_), Scalar::Exact(_)) = (self, other) {
                    Scalar::Exact(lower)
                } else {
                    Scalar::Enclosure {
                        lower,
                        upper: Upper::Finite(a + b),
                        precision_bits: bits,
                    }
                }
            }
            _ => Scalar::infinite(lower, bits),
        }
    }

    fn precision(&self) -> u32 {
        match self {
            Scalar::Exact(_) => u32::MAX,
            Scalar::Enclosure { precision_bits, .. } => *precision_bits,
        }
    }

    /// Upper end with infinity mapped to `None` and rendered as text.
    pub fn render_upper(&self) -> String {
        self.upper()
            .map_or_else(|| "inf".to_string(), rational::render)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(x) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("exact", &rational::render(x))?;
                m.end()
            }
            Scalar::Enclosure {
                lower,
                precision_bits,
                ..
            } => {
                let mut m = s.serialize_map(Some(3))?;
                m.serialize_entry("lower", &rational::render(lower))?;
                m.serialize_entry("upper", &self.render_upper())?;
                m.serialize_entry("precision_bits", precision_bits)?;
                m.end()
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(x) => write!(f, "{x}"),
            Scalar::Enclosure { lower, .. } => write!(f, "[{lower}, {}]", self.render_upper()),
        }
    }
}

/// An exponent p = a/b in (0, 1] for the weights (n+1)^(-p).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerExponent {
    p: Q,
    a: u32,
    b: u32,
}

impl PowerExponent {
    pub fn new(p: Q) -> Result<Self> {
        if !p.is_positive() || p > Q::one() {
            return Err(Error::Precondition(format!(
                "power exponent {p} outside (0, 1]"
            )));
        }
        let a = p.numer().to_u32();
        let b = p.denom().to_u32();
        match (a, b) {
            (Some(a), Some(b)) if b <= 64 => Ok(PowerExponent { p, a, b }),
            _ => Err(Error::InvalidInput(format!(
                "power exponent {p} needs a denominator of at most 64"
            ))),
        }
    }

    pub fn value(&self) -> &Q {
        &self.p
    }

    pub fn numer(&self) -> u32 {
        self.a
    }

    pub fn denom(&self) -> u32 {
        self.b
    }

    pub fn is_one(&self) -> bool {
        self.a == 1 && self.b == 1
    }

    /// Floor numerator `s` with (n+1)^(-p) ∈ [s/2^k, (s+1)/2^k]; the flag is
    /// set when the lower end is the exact value.
    pub fn weight_floor(&self, n: u64, k: u32) -> (BigUint, bool) {
        let y = BigUint::from(n + 1).pow(self.a);
        let scale = BigUint::one() << (k as usize * self.b as usize);
        let (t, rem) = scale.div_rem(&y);
        let s = t.nth_root(self.b);
        let exact = rem.is_zero() && s.pow(self.b) == t;
        (s, exact)
    }

    /// Enclosure of a single weight with width at most 2^-k.
    pub fn weight(&self, n: u64, k: u32) -> Scalar {
        if self.is_one() {
            return Scalar::Exact(Q::new(BigInt::one(), BigInt::from(n) + 1));
        }
        let (s, exact) = self.weight_floor(n, k);
        let den = BigInt::one() << k as usize;
        let lower = Q::new(BigInt::from(s.clone()), den.clone());
        if exact {
            Scalar::Exact(lower)
        } else {
            Scalar::enclosure(lower, Q::new(BigInt::from(s + 1u32), den), k)
        }
    }

    /// Σ_{n∈idx} (n+1)^(-p) as a dyadic enclosure of width ≤ 2^-precision.
    /// Exact when every term is a dyadic rational.
    pub fn dyadic_sum(&self, idx: &[u64], precision: u32) -> Scalar {
        if idx.is_empty() {
            return Scalar::zero();
        }
        let k = precision + ceil_log2(idx.len() as u64) + 1;
        let mut lo = BigUint::zero();
        let mut inexact = 0u64;
        for &n in idx {
            let (s, exact) = self.weight_floor(n, k);
            lo += s;
            if !exact {
                inexact += 1;
            }
        }
        let den = BigInt::one() << k as usize;
        let lower = Q::new(BigInt::from(lo.clone()), den.clone());
        if inexact == 0 {
            Scalar::Exact(lower)
        } else {
            let upper = Q::new(BigInt::from(lo + inexact), den);
            Scalar::enclosure(lower, upper, precision)
        }
    }

    /// Σ_{n∈idx} (n+1)^(-p): exact rationals for p = 1, dyadic enclosure
    /// otherwise.
    pub fn sum(&self, idx: &[u64], precision: u32) -> Scalar {
        if self.is_one() {
            Scalar::Exact(
                idx.iter()
                    .map(|&n| Q::new(BigInt::one(), BigInt::from(n) + 1))
                    .sum(),
            )
        } else {
            self.dyadic_sum(idx, precision)
        }
    }
}

/// Repeats `decide` with doubled precision until it returns a verdict.
pub fn refine<T>(start: u32, ceiling: u32, mut decide: impl FnMut(u32) -> Option<T>) -> Result<T> {
    let mut bits = start.max(8);
    loop {
        if let Some(v) = decide(bits) {
            return Ok(v);
        }
        if bits >= ceiling {
            return Err(Error::UndecidedComparison(bits));
        }
        bits = (bits * 2).min(ceiling);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow2, q, qi};
    use proptest::prelude::*;

    #[test]
    fn exact_power_weights() {
        let half = PowerExponent::new(q(1, 2)).unwrap();
        assert_eq!(half.weight(3, 64), Scalar::Exact(q(1, 2)));
        assert_eq!(half.weight(0, 64), Scalar::Exact(qi(1)));
        let w = half.weight(1, 64);
        assert!(w.exact().is_none());
        assert!(w.width().unwrap() <= pow2(-64));
        assert_eq!(half.dyadic_sum(&[0, 3, 15], 32), Scalar::Exact(q(7, 4)));
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(PowerExponent::new(qi(0)).is_err());
        assert!(PowerExponent::new(q(3, 2)).is_err());
    }

    #[test]
    fn compare_decides_only_when_separated() {
        let e = Scalar::enclosure(q(1, 3), q(1, 2), 4);
        assert_eq!(e.compare(&q(1, 4)), Some(Ordering::Greater));
        assert_eq!(e.compare(&q(3, 4)), Some(Ordering::Less));
        assert_eq!(e.compare(&q(2, 5)), None);
        assert_eq!(
            Scalar::infinite(qi(5), 8).compare(&qi(4)),
            Some(Ordering::Greater)
        );
    }

    #[test]
    fn json_forms() {
        let s = serde_json::to_string(&Scalar::infinite(qi(3), 16)).unwrap();
        assert_eq!(s, r#"{"lower":"3","upper":"inf","precision_bits":16}"#);
        let s = serde_json::to_string(&Scalar::Exact(q(7, 4))).unwrap();
        assert_eq!(s, r#"{"exact":"7/4"}"#);
    }

    fn sqrt_inv_ok(n: u64, k: u32) -> bool {
        // 1/sqrt(n+1) ∈ [lo, hi]  ⇔  lo² (n+1) ≤ 1 ≤ hi² (n+1)
        let e = PowerExponent::new(q(1, 2)).unwrap().weight(n, k);
        let m = qi(n as i64 + 1);
        let lo = e.lower().clone();
        let hi = e.upper().unwrap().clone();
        &lo * &lo * &m <= qi(1) && &hi * &hi * &m >= qi(1)
    }

    proptest! {
        #[test]
        fn sqrt_enclosures_are_sound(n in 0u64..1_000_000, k in 8u32..200) {
            prop_assert!(sqrt_inv_ok(n, k));
        }

        #[test]
        fn widths_shrink_with_precision(
            idx in proptest::collection::btree_set(0u64..10_000, 1..40),
            bits in 8u32..100,
        ) {
            let idx: Vec<u64> = idx.into_iter().collect();
            let p = PowerExponent::new(q(2, 3)).unwrap();
            let coarse = p.dyadic_sum(&idx, bits);
            let fine = p.dyadic_sum(&idx, bits * 4);
            prop_assert!(coarse.width().unwrap() <= pow2(-(bits as i64)));
            prop_assert!(fine.lower() >= coarse.lower());
            prop_assert!(fine.upper().unwrap() <= coarse.upper().unwrap());
            // cube test of a single term against the fine reference
            let n = idx[0];
            let w = p.weight(n, bits);
            let m = qi(n as i64 + 1);
            let lo = w.lower().clone();
            let hi = w.upper().unwrap().clone();
            prop_assert!(lo.pow(3) * m.pow(2) <= qi(1));
            prop_assert!(hi.pow(3) * m.pow(2) >= qi(1));
        }
    }
}
