//! Closed-form bounds: the Chernoff tail and the block failure bound
//! `N · 16n² · exp(-E / c n²)`, evaluated in log space so large blocks do
//! not underflow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{pre, Result};
use crate::rational::{half, int, ratio, serde_pq, to_f64, Rational};

/// `exp(-a² / 2k)`.
pub fn chernoff_bound(k: u64, a: f64) -> Result<f64> {
    if k == 0 {
        return Err(pre("k must be at least 1"));
    }
    if a.is_nan() || a <= 0.0 {
        return Err(pre("a must be positive"));
    }
    Ok((-(a * a) / (2.0 * k as f64)).exp())
}

/// Denominator constant in the exponent of the block bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Exponent {
    /// `E / 2n²`, as the bound is usually quoted.
    Stated,
    /// `E / 8n²`, what the per-`m` Chernoff step yields.
    Derived,
}

impl Exponent {
    fn constant(self) -> u64 {
        match self {
            Exponent::Stated => 2,
            Exponent::Derived => 8,
        }
    }
}

fn ceil_product(big_n: u64, p: &Rational) -> BigInt {
    let prod = int(big_n) * p;
    let (q, r) = prod.numer().div_rem(prod.denom());
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

fn check_params(big_n: u64, p: &Rational, n: u64) -> Result<()> {
    if n == 0 {
        return Err(pre("n must be at least 1"));
    }
    if big_n == 0 {
        return Err(pre("N must be at least 1"));
    }
    if !p.is_positive() || *p > Rational::one() {
        return Err(pre("P must lie in (0, 1]"));
    }
    Ok(())
}

/// `ln(N · 16n² · exp(-⌈N·P⌉ / c n²))`.
pub fn delta_n_ln(big_n: u64, p: &Rational, n: u64, exponent: Exponent) -> Result<f64> {
    check_params(big_n, p, n)?;
    let e = ceil_product(big_n, p);
    let decay = to_f64(&Rational::new(e, BigInt::from(exponent.constant()) * BigInt::from(n) * BigInt::from(n)));
    Ok((big_n as f64).ln() + 16f64.ln() + 2.0 * (n as f64).ln() - decay)
}

pub fn delta_n(big_n: u64, p: &Rational, n: u64, exponent: Exponent) -> Result<f64> {
    delta_n_ln(big_n, p, n, exponent).map(f64::exp)
}

/// Scientific notation with 12 significant digits for `exp(ln)`.
pub fn decimal_from_ln(ln: f64) -> String {
    if ln.is_nan() {
        return "NaN".into();
    }
    if ln == f64::NEG_INFINITY {
        return "0".into();
    }
    if ln == f64::INFINITY {
        return "inf".into();
    }
    let log10 = ln / std::f64::consts::LN_10;
    let mut exp = log10.floor();
    let mut mant = 10f64.powf(log10 - exp);
    if format!("{mant:.11}").starts_with("10") {
        mant /= 10.0;
        exp += 1.0;
    }
    format!("{mant:.11}e{}", exp as i64)
}

/// One block of the failure estimate: `J_n = [m_n, m_next)`, `N_n`
/// possibilities, target proportion `P_n` and `E_n = ⌈N_n P_n⌉`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockPlan {
    pub n: u64,
    pub m_n: u64,
    pub m_next: u64,
    pub big_n: u64,
    #[serde(with = "serde_pq")]
    pub p: Rational,
    pub e_n: u64,
}

impl BlockPlan {
    pub fn new(n: u64, m_n: u64, m_next: u64, big_n: u64, p: Rational) -> Result<Self> {
        if m_n >= m_next {
            return Err(pre("need m_n < m_next"));
        }
        if big_n == 0 {
            return Err(pre("N must be at least 1"));
        }
        if !p.is_positive() || p > half() {
            return Err(pre("P must lie in (0, 1/2]"));
        }
        let e_n = ceil_product(big_n, &p).to_u64().ok_or_else(|| pre("E overflows"))?;
        Ok(BlockPlan { n, m_n, m_next, big_n, p, e_n })
    }

    /// `P_n = min{1/2, 1/n}`, `N_n = max{n^6, 100}`.
    pub fn standard(n: u64, m_n: u64, m_next: u64) -> Result<Self> {
        let p = if n <= 2 { half() } else { ratio(1, n) };
        let big_n = n.checked_pow(6).ok_or_else(|| pre("n^6 overflows"))?.max(100);
        BlockPlan::new(n, m_n, m_next, big_n, p)
    }

    pub fn block_len(&self) -> u64 {
        self.m_next - self.m_n
    }

    pub fn delta_ln(&self, exponent: Exponent) -> Result<f64> {
        delta_n_ln(self.big_n, &self.p, self.n, exponent)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaRow {
    pub n: u64,
    pub big_n: u64,
    #[serde(with = "serde_pq")]
    pub p: Rational,
    pub e_n: u64,
    pub ln_stated: f64,
    pub stated: String,
    pub stated_below_half: bool,
    pub ln_derived: f64,
    pub derived: String,
    pub derived_below_half: bool,
}

/// `δ_n` under both exponents for the standard parameters, `1 ≤ n ≤ max_n`.
pub fn delta_audit(max_n: u64) -> Result<Vec<DeltaRow>> {
    let ln_half = 0.5f64.ln();
    (1..=max_n)
        .map(|n| {
            let plan = BlockPlan::standard(n, 0, 1)?;
            let ln_stated = plan.delta_ln(Exponent::Stated)?;
            let ln_derived = plan.delta_ln(Exponent::Derived)?;
            Ok(DeltaRow {
                n,
                big_n: plan.big_n,
                p: plan.p.clone(),
                e_n: plan.e_n,
                ln_stated,
                stated: decimal_from_ln(ln_stated),
                stated_below_half: ln_stated < ln_half,
                ln_derived,
                derived: decimal_from_ln(ln_derived),
                derived_below_half: ln_derived < ln_half,
            })
        })
        .collect()
}

/// Smallest `n` from which every audited row is below `1/2`.
pub fn first_delta_below_half(rows: &[DeltaRow], exponent: Exponent) -> Option<u64> {
    let below = |r: &DeltaRow| match exponent {
        Exponent::Stated => r.stated_below_half,
        Exponent::Derived => r.derived_below_half,
    };
    let tail = rows.iter().rev().take_while(|r| below(r)).count();
    (tail > 0).then(|| rows[rows.len() - tail].n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1e-300)
    }

    #[test]
    fn chernoff_values() {
        assert!(close(chernoff_bound(100, 10.0).unwrap(), (-0.5f64).exp()));
        assert!(close(chernoff_bound(1, 1.0).unwrap(), (-0.5f64).exp()));
        assert!(chernoff_bound(0, 1.0).is_err());
        assert!(chernoff_bound(3, 0.0).is_err());
        assert!(chernoff_bound(3, f64::NAN).is_err());
    }

    #[test]
    fn delta_examples() {
        let d = delta_n(64, &half(), 2, Exponent::Stated).unwrap();
        assert!(close(d, 4096.0 * (-4f64).exp()));
        assert!((d - 75.02).abs() < 0.01);
        let d = delta_n(729, &ratio(1, 3), 3, Exponent::Stated).unwrap();
        assert!(close(d, 16.0 * 9.0 * 729.0 * (-13.5f64).exp()));
        assert!(d < 0.5 && d > 0.14);
        assert!(delta_n(0, &half(), 2, Exponent::Stated).is_err());
        assert!(delta_n(1, &int(2), 2, Exponent::Stated).is_err());
        assert!(delta_n(1, &half(), 0, Exponent::Stated).is_err());
    }

    #[test]
    fn standard_plans() {
        let p = BlockPlan::standard(2, 0, 10).unwrap();
        assert_eq!((p.big_n, p.e_n), (100, 50));
        let p = BlockPlan::standard(3, 0, 10).unwrap();
        assert_eq!((p.big_n, p.p.clone(), p.e_n), (729, ratio(1, 3), 243));
        let p = BlockPlan::standard(0, 0, 10).unwrap();
        assert_eq!(p.p, half());
        assert!(BlockPlan::standard(3, 5, 5).is_err());
        assert!(BlockPlan::new(3, 0, 5, 10, int(1)).is_err());
    }

    #[test]
    fn audit_crossovers() {
        let rows = delta_audit(100).unwrap();
        assert!(!rows[1].stated_below_half);
        assert!((rows[1].ln_stated.exp() - 6400.0 * (-6.25f64).exp()).abs() < 1e-9);
        assert_eq!(first_delta_below_half(&rows, Exponent::Stated), Some(3));
        assert_eq!(first_delta_below_half(&rows, Exponent::Derived), Some(6));
        assert!(rows[99].stated.ends_with(&format!("e{}", (rows[99].ln_stated / std::f64::consts::LN_10).floor())));
    }

    #[test]
    fn decreasing_in_big_n_past_crossover() {
        // with P = 1/n, stepping N by n adds one to E, so ln δ moves by
        // ln(1 + n/N) - 1/2n², negative once N > 2n³
        for n in 3u64..20 {
            let p = ratio(1, n);
            let start = 2 * n * n * n + n;
            let mut prev = f64::INFINITY;
            for big_n in (start..start + 5000).step_by(n as usize) {
                let d = delta_n_ln(big_n, &p, n, Exponent::Stated).unwrap();
                assert!(d < prev + 1e-12, "n={n} N={big_n}");
                prev = d;
            }
        }
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal_from_ln(0.0), "1.00000000000e0");
        assert_eq!(decimal_from_ln(100f64.ln()), "1.00000000000e2");
        assert_eq!(decimal_from_ln(0.5f64.ln()), "5.00000000000e-1");
        assert_eq!(decimal_from_ln(f64::NEG_INFINITY), "0");
        let s = decimal_from_ln(-500_000.0);
        assert!(s.ends_with("e-217148"), "{s}");
    }

    proptest! {
        #[test]
        fn chernoff_monotone(k in 1u64..10_000, a in 0.01f64..500.0, step in 0.01f64..10.0) {
            let lo = chernoff_bound(k, a).unwrap();
            let hi = chernoff_bound(k, a + step).unwrap();
            prop_assert!(hi <= lo);
            prop_assert!(chernoff_bound(k + 1, a).unwrap() >= lo);
        }

        #[test]
        fn delta_decreases_in_e(n in 1u64..50, big_n in 1u64..1_000_000, num in 1u64..100) {
            let p = ratio(num, 100);
            let a = delta_n_ln(big_n, &p, n, Exponent::Stated).unwrap();
            let b = delta_n_ln(big_n, &(p.clone() + ratio(1, 100)).min(Rational::one()), n, Exponent::Stated).unwrap();
            prop_assert!(b <= a + 1e-9);
            let d = delta_n_ln(big_n, &p, n, Exponent::Derived).unwrap();
            prop_assert!(d >= a - 1e-9);
        }
    }
}
