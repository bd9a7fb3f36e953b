//! Exact initial densities, windowed lower/upper density surrogates and
//! moderacy.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::rational::{ratio, serde_pq, Rational};
use crate::sets::{SetError, SetSchema};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DensityError {
    #[error("initial density needs n >= 1")]
    ZeroLength,
    #[error("relative density undefined: X has no elements below {0}")]
    EmptyBase(u64),
    #[error("density window needs 1 <= from < to, got [{from}, {to}]")]
    BadWindow { from: u64, to: u64 },
    #[error(transparent)]
    Set(#[from] SetError),
}

pub type Result<T, E = DensityError> = std::result::Result<T, E>;

/// A value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Density(#[serde(with = "serde_pq")] pub Rational);

impl Density {
    pub fn value(&self) -> &Rational {
        &self.0
    }
}

impl std::fmt::Display for Density {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Extremes of `d_n(X)` for `n` in `[from, to]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityWindow {
    pub from: u64,
    pub to: u64,
    #[serde(with = "serde_pq")]
    pub min_seen: Rational,
    pub min_at: u64,
    #[serde(with = "serde_pq")]
    pub max_seen: Rational,
    pub max_at: u64,
    #[serde(with = "serde_pq")]
    pub last: Rational,
}

/// `|X ∩ n| / n`.
pub fn initial_density(x: &SetSchema, n: u64) -> Result<Density> {
    if n == 0 {
        return Err(DensityError::ZeroLength);
    }
    Ok(Density(ratio(x.count_below(n)?, n)))
}

/// `|S ∩ X ∩ n| / |X ∩ n|`.
pub fn relative_density(s: &SetSchema, x: &SetSchema, n: u64) -> Result<Density> {
    let xs = x.indicator(n)?;
    let ss = s.indicator(n)?;
    let base = xs.iter().filter(|&&b| b).count() as u64;
    if base == 0 {
        return Err(DensityError::EmptyBase(n));
    }
    let both = xs.iter().zip(&ss).filter(|(a, b)| **a && **b).count() as u64;
    Ok(Density(ratio(both, base)))
}

/// Scans `d_n(X)` over `n ∈ [from, to]` with exact comparisons.
pub fn density_window(x: &SetSchema, from: u64, to: u64) -> Result<DensityWindow> {
    if from == 0 || from >= to {
        return Err(DensityError::BadWindow { from, to });
    }
    let bits = x.indicator(to)?;
    let mut count = bits[..from as usize].iter().filter(|&&b| b).count() as u64;
    // Track the extremes as raw (count, n) pairs; only build rationals once.
    let mut lo = (u64::MAX, 1u64);
    let mut hi = (0u64, 0u64);
    let mut first = true;
    for n in from..=to {
        if n > from {
            count += bits[(n - 1) as usize] as u64;
        }
        if first || cmp(count, n, lo.0, lo.1) == Ordering::Less {
            lo = (count, n);
        }
        if first || cmp(count, n, hi.0, hi.1) == Ordering::Greater {
            hi = (count, n);
        }
        first = false;
    }
    Ok(DensityWindow {
        from,
        to,
        min_seen: ratio(lo.0, lo.1),
        min_at: lo.1,
        max_seen: ratio(hi.0, hi.1),
        max_at: hi.1,
        last: ratio(count, to),
    })
}

fn cmp(a: u64, b: u64, c: u64, d: u64) -> Ordering {
    crate::rational::cmp_counts(a, b, c, d)
}

/// The asymptotic density, when the schema folds to one eventually periodic
/// pattern.
pub fn exact_density(x: &SetSchema) -> Option<Density> {
    let form = x.periodic_form()?;
    Some(Density(ratio(form.ones_in_period() as u64, form.period.len() as u64)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Moderacy {
    Exact(bool),
    Estimated(bool),
}

impl Moderacy {
    pub fn holds(self) -> bool {
        matches!(self, Moderacy::Exact(true) | Moderacy::Estimated(true))
    }
}

/// Window and margin for estimating moderacy from finite data: the estimate
/// is positive when every `d_n` in the window lies in `(margin, 1 - margin)`.
#[derive(Debug, Clone)]
pub struct ModeracyWindow {
    pub from: u64,
    pub to: u64,
    pub margin: Rational,
}

impl ModeracyWindow {
    pub fn new(from: u64, to: u64) -> Self {
        Self { from, to, margin: ratio(1, 5) }
    }
}

impl Default for ModeracyWindow {
    fn default() -> Self {
        Self::new(10, 10_000)
    }
}

/// Lower density positive and upper density below one.
pub fn is_moderate(x: &SetSchema, window: &ModeracyWindow) -> Result<Moderacy> {
    if let Some(d) = exact_density(x) {
        return Ok(Moderacy::Exact(!d.0.is_zero() && !d.0.is_one()));
    }
    let w = density_window(x, window.from, window.to)?;
    let upper = Rational::from_integer(BigInt::one()) - &window.margin;
    Ok(Moderacy::Estimated(w.min_seen > window.margin && w.max_seen < upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::sets::{BoundaryGenerator, IntervalPartition, Parity};
    use proptest::prelude::*;

    #[test]
    fn initial_density_examples() {
        assert_eq!(initial_density(&SetSchema::evens(), 10).unwrap().0, ratio(1, 2));
        assert_eq!(initial_density(&SetSchema::omega(), 37).unwrap().0, int(1));
        assert_eq!(initial_density(&SetSchema::multiples_of(3), 10).unwrap().0, ratio(2, 5));
        assert!(initial_density(&SetSchema::omega(), 0).is_err());
    }

    #[test]
    fn relative_density_examples() {
        let (evens, omega) = (SetSchema::evens(), SetSchema::omega());
        assert_eq!(relative_density(&evens, &omega, 10).unwrap().0, ratio(1, 2));
        assert_eq!(relative_density(&evens, &evens, 10).unwrap().0, int(1));
        assert_eq!(
            relative_density(&SetSchema::multiples_of(4), &evens, 10).unwrap().0,
            ratio(3, 5)
        );
        assert!(relative_density(&omega, &SetSchema::empty(), 10).is_err());
    }

    #[test]
    fn window_examples() {
        let w = density_window(&SetSchema::evens(), 2, 100).unwrap();
        assert_eq!(w.min_seen, ratio(1, 2));
        assert!(w.max_seen <= ratio(2, 3));
        assert_eq!(w.last, ratio(1, 2));
        let w = density_window(&SetSchema::omega(), 3, 50).unwrap();
        assert_eq!((w.min_seen.clone(), w.max_seen.clone()), (int(1), int(1)));
        let w = density_window(&SetSchema::seeded(42), 100, 10_000).unwrap();
        assert!(w.min_seen > int(0) && w.max_seen < int(1));
        assert!(density_window(&SetSchema::omega(), 0, 5).is_err());
        assert!(density_window(&SetSchema::omega(), 5, 5).is_err());
    }

    #[test]
    fn exact_density_examples() {
        assert_eq!(exact_density(&SetSchema::evens()).unwrap().0, ratio(1, 2));
        let s = SetSchema::evens().intersection(SetSchema::multiples_of(3));
        assert_eq!(exact_density(&s).unwrap().0, ratio(1, 6));
        assert!(exact_density(&SetSchema::seeded(7)).is_none());
    }

    #[test]
    fn moderacy_examples() {
        let w = ModeracyWindow::default();
        assert_eq!(is_moderate(&SetSchema::evens(), &w).unwrap(), Moderacy::Exact(true));
        assert_eq!(is_moderate(&SetSchema::omega(), &w).unwrap(), Moderacy::Exact(false));
        let fact = SetSchema::intervals(
            IntervalPartition::new(BoundaryGenerator::Factorial).unwrap(),
            Parity::Even,
        );
        assert_eq!(is_moderate(&fact, &w).unwrap(), Moderacy::Estimated(false));
        let win = density_window(&fact, 10, 10_000).unwrap();
        assert_eq!(win.min_seen, ratio(101, 720));
        assert!(win.max_seen > ratio(4, 5));
    }

    proptest! {
        #[test]
        fn periodic_convergence_rate(
            prefix in prop::collection::vec(any::<bool>(), 0..5),
            period in prop::collection::vec(any::<bool>(), 1..8),
            extra in 0u64..500,
        ) {
            let p = (prefix.len() + period.len()) as u64;
            let x = SetSchema::periodic(prefix, period).unwrap();
            let d = exact_density(&x).unwrap().0;
            let n = p + extra;
            let dn = initial_density(&x, n).unwrap().0;
            let gap = if dn > d { &dn - &d } else { &d - &dn };
            prop_assert!(gap <= ratio(p, n));
        }

        #[test]
        fn complement_density(x in crate::sets::tests::schema(), n in 1u64..300) {
            let a = initial_density(&x, n).unwrap().0;
            let b = initial_density(&x.clone().complement(), n).unwrap().0;
            prop_assert_eq!(a + b, int(1));
        }

        #[test]
        fn relative_to_omega(s in crate::sets::tests::schema(), n in 1u64..300) {
            prop_assert_eq!(
                relative_density(&s, &SetSchema::omega(), n).unwrap(),
                initial_density(&s, n).unwrap()
            );
        }

        #[test]
        fn window_brackets_samples(x in crate::sets::tests::schema(), from in 1u64..50, len in 1u64..200) {
            let to = from + len;
            let w = density_window(&x, from, to).unwrap();
            for n in from..=to {
                let d = initial_density(&x, n).unwrap().0;
                prop_assert!(w.min_seen <= d && d <= w.max_seen);
            }
            prop_assert!(w.min_seen <= w.last && w.last <= w.max_seen);
        }
    }
}
