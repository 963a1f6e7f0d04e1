//! Exact rational scalars and their `"p/q"` string encoding.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(numer: i64, denom: i64) -> Q {
    Q::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// 2^e for any integer exponent.
pub fn pow2(e: i64) -> Q {
    let base = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Q::from_integer(base)
    } else {
        Q::new(BigInt::one(), base)
    }
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`. Zero denominators are rejected.
pub fn parse(s: &str) -> Result<Q> {
    let bad = || Error::MalformedRational(s.to_string());
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let numer: BigInt = n.parse().map_err(|_| bad())?;
    let denom: BigInt = d.parse().map_err(|_| bad())?;
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(numer, denom))
}

/// Lowest-terms rendering; integers print without a denominator.
pub fn render(x: &Q) -> String {
    x.to_string()
}

pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Sum that adds numerators directly while consecutive terms share a
/// denominator, reducing only when the denominator changes.
pub fn sum<'a>(xs: impl IntoIterator<Item = &'a Q>) -> Q {
    let mut done = Q::zero();
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for x in xs {
        if *x.denom() != den {
            done += Q::new(std::mem::take(&mut num), den);
            den = x.denom().clone();
        }
        num += x.numer();
    }
    done + Q::new(num, den)
}

pub fn to_biguint(x: &BigInt) -> Option<BigUint> {
    if x.is_negative() {
        None
    } else {
        Some(x.magnitude().clone())
    }
}

pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&render(x))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
    let raw = String::deserialize(d)?;
    parse(&raw).map_err(serde::de::Error::custom)
}

/// Serde adapter for `Vec<Q>`.
pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&render(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|r| parse(r).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter for `Option<Q>`.
pub mod opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&render(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Q>, D::Error> {
        let raw = Option::<String>::deserialize(d)?;
        raw.map(|r| parse(&r).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn grouped_sum_matches_plain(xs in prop::collection::vec((-20i64..20, 1i64..5), 0..30)) {
            let v: Vec<Q> = xs.iter().map(|&(n, d)| q(n, d)).collect();
            prop_assert_eq!(sum(&v), v.iter().cloned().sum::<Q>());
        }
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse("1/2").unwrap(), q(1, 2));
        assert_eq!(parse("-3").unwrap(), qi(-3));
        assert_eq!(parse("4/8").unwrap(), q(1, 2));
        assert_eq!(render(&parse("6/4").unwrap()), "3/2");
    }

    #[test]
    fn zero_denominator_rejected() {
        assert_eq!(parse("1/0").unwrap_err().code(), "MALFORMED_RATIONAL");
        assert!(parse("x/2").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn powers_of_two() {
        assert_eq!(pow2(3), qi(8));
        assert_eq!(pow2(-2), q(1, 4));
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(8), 3);
    }
}
