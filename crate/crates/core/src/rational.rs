//! Exact rational helpers shared by every module.
//!
//! Everything here works on [`BigRational`]; hot loops avoid normalising
//! intermediate fractions and compare by cross multiplication instead.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| RationalParseError::Malformed(text.into()))?;
    let den = BigInt::from_str(den).map_err(|_| RationalParseError::Malformed(text.into()))?;
    if den.is_zero() {
        return Err(RationalParseError::ZeroDenominator(text.into()));
    }
    Ok(Rational::new(num, den))
}

/// Canonical `p/q` form; the denominator is always written, even when it is 1.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn ratio(num: u64, den: u64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn half() -> Rational {
    ratio(1, 2)
}

/// `1 / 2^d`.
pub fn inverse_power_of_two(d: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << d)
}

/// Exact `f64` approximation, for reporting only.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// An open interval `(lo, hi)` with rational endpoints, queried with
/// unreduced fractions `num/den` (`den > 0`).
#[derive(Clone, Debug)]
pub struct OpenInterval {
    lo: Rational,
    hi: Rational,
}

impl OpenInterval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Self { lo, hi }
    }

    pub fn around(center: &Rational, radius: &Rational) -> Self {
        Self::new(center - radius, center + radius)
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn contains(&self, r: &Rational) -> bool {
        &self.lo < r && r < &self.hi
    }

    pub fn contains_frac(&self, num: &BigInt, den: &BigInt) -> bool {
        debug_assert!(den.sign() == Sign::Plus);
        cmp_frac(num, den, &self.lo) == Ordering::Greater
            && cmp_frac(num, den, &self.hi) == Ordering::Less
    }

    pub fn contains_counts(&self, num: u64, den: u64) -> bool {
        self.contains_frac(&BigInt::from(num), &BigInt::from(den))
    }
}

/// Compares `num/den` (with `den > 0`) against `r` without normalising.
pub fn cmp_frac(num: &BigInt, den: &BigInt, r: &Rational) -> Ordering {
    (num * r.denom()).cmp(&(r.numer() * den))
}

/// Compares `a/b` against `c/d` for non-negative counts with positive
/// denominators.
pub fn cmp_counts(a: u64, b: u64, c: u64, d: u64) -> Ordering {
    (a as u128 * d as u128).cmp(&(c as u128 * b as u128))
}

/// `|a - b| < tol`.
pub fn abs_diff_lt(a: &Rational, b: &Rational, tol: &Rational) -> bool {
    (a - b).abs() < *tol
}

/// Wrapper that prints as `p/q`.
pub struct Pq<'a>(pub &'a Rational);

impl fmt::Display for Pq<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Serde adapter: rationals as `"p/q"` strings.
pub mod serde_pq {
    use super::*;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }
}

/// Serde adapter for `Option<Rational>`.
pub mod serde_pq_opt {
    use super::*;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let text = Option::<String>::deserialize(d)?;
        text.map(|t| parse_rational(&t).map_err(D::Error::custom))
            .transpose()
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("2/4").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(" 3 ").unwrap(), int(3));
        assert_eq!(format_rational(&int(3)), "3/1");
        assert_eq!(format_rational(&parse_rational("-6/4").unwrap()), "-3/2");
        assert!(matches!(
            parse_rational("1/0"),
            Err(RationalParseError::ZeroDenominator(_))
        ));
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn open_interval_is_strict() {
        let iv = OpenInterval::around(&half(), &ratio(1, 10));
        assert!(iv.contains_counts(1, 2));
        assert!(!iv.contains_counts(3, 5));
        assert!(!iv.contains_counts(2, 5));
        assert!(iv.contains_counts(59, 100));
    }

    #[test]
    fn count_comparison() {
        assert_eq!(cmp_counts(1, 2, 2, 4), Ordering::Equal);
        assert_eq!(cmp_counts(1, 3, 1, 2), Ordering::Less);
    }
}
