//! Chopped reals with factorially growing intervals.

use serde::Serialize;

use super::{pre, ConstructionError, Result};
use crate::rational::{ratio, serde_pq, Rational};
use crate::sets::{ChoppedReal, IntervalPartition, Parity, SetSchema};

/// Search budget used when locating elements of the base set.
pub const DEFAULT_BUDGET: u64 = 1 << 32;

#[derive(Debug, Clone)]
pub struct FactorialChop {
    pub chopped: ChoppedReal,
    /// `b_1, b_2, ...` with `b_0 = 0` omitted.
    pub boundaries: Vec<u64>,
}

/// Chops `s` right after its `n!`-th elements: `b_n = f_S(n! - 1) + 1`,
/// keeping boundaries below `horizon`.
pub fn factorial_chopped_real(s: &SetSchema, horizon: u64) -> Result<FactorialChop> {
    s.require_infinite()?;
    let mut boundaries = Vec::new();
    let mut fact: u64 = 1;
    for n in 1u64.. {
        fact = match fact.checked_mul(n) {
            Some(f) => f,
            None => break,
        };
        let b = match s.kth_element(fact - 1, horizon) {
            Ok(e) => e + 1,
            Err(crate::sets::SetError::BudgetExhausted { .. }) => break,
            Err(e) => return Err(e.into()),
        };
        if b >= horizon {
            break;
        }
        boundaries.push(b);
    }
    if boundaries.is_empty() {
        return Err(ConstructionError::HorizonTooSmall(horizon));
    }
    let mut table = vec![0];
    table.extend(&boundaries);
    let partition = IntervalPartition::from_table(table)?;
    Ok(FactorialChop { chopped: ChoppedReal::new(s.clone(), partition), boundaries })
}

/// Relative density of `y` in `S` at the right end of a matched interval.
#[derive(Debug, Clone, Serialize)]
pub struct GuaranteeRow {
    /// Interval index `k`; the row concerns `b_{k+1}`.
    pub k: usize,
    pub matched: bool,
    pub matched_previous: bool,
    #[serde(with = "serde_pq")]
    pub density: Rational,
    /// `1 - 1/(k+1)`.
    #[serde(with = "serde_pq")]
    pub bound: Rational,
    /// `density >= bound` when matched, strictly when the previous interval
    /// matched too; vacuously true otherwise.
    pub holds: bool,
}

/// For each interval `I_k`, `k >= 1`, of a factorial chop: a `y` agreeing
/// with `S` on `I_k` has at least `1 - 1/(k+1)` of `S ∩ b_{k+1}`, since
/// `I_k` holds all but `k!` of those `(k+1)!` elements.
pub fn factorial_guarantee(chop: &FactorialChop, y: &SetSchema) -> Result<Vec<GuaranteeRow>> {
    let s = &chop.chopped.bits;
    let mut table = vec![0];
    table.extend(&chop.boundaries);
    let end = *table.last().expect("nonempty");
    let ys = y.indicator(end)?;
    let ss = s.indicator(end)?;
    let agrees = |k: usize| {
        let (lo, hi) = (table[k] as usize, table[k + 1] as usize);
        ys[lo..hi] == ss[lo..hi]
    };
    let mut rows = Vec::new();
    for k in 1..table.len() - 1 {
        let b = table[k + 1] as usize;
        let base = ss[..b].iter().filter(|&&x| x).count() as u64;
        let both = ss[..b].iter().zip(&ys[..b]).filter(|(a, c)| **a && **c).count() as u64;
        let density = ratio(both, base);
        let bound = Rational::from_integer(1.into()) - ratio(1, k as u64 + 1);
        let matched = agrees(k);
        let matched_previous = agrees(k - 1);
        let holds = match (matched, matched_previous) {
            (false, _) => true,
            (true, false) => density >= bound,
            (true, true) => density > bound,
        };
        rows.push(GuaranteeRow { k, matched, matched_previous, density, bound, holds });
    }
    Ok(rows)
}

/// A chopped real `(S, Π)` whose matching reals bisect `X` infinitely often.
#[derive(Debug, Clone, Serialize)]
pub struct NonMeagreWitness {
    #[serde(skip)]
    pub chopped: ChoppedReal,
    /// `S` as a schema.
    pub s: SetSchema,
    /// `b_0 = 0, b_1, ..., b_{depth+1}`.
    pub boundaries: Vec<u64>,
    /// For `n >= 1`, the first element of `I_n` kept in `S`.
    pub skip_ends: Vec<u64>,
    /// `|X ∩ I_n|` for each interval.
    pub interval_counts: Vec<u64>,
    /// `|X ∩ I_n| >= (2n-1)! + (2n)!` for every `n >= 1`.
    pub counts_ok: bool,
}

fn factorial(n: u64) -> Option<u64> {
    (1..=n).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

/// `f(n) = 0! + 1! + ... + n!`.
fn factorial_sum(n: u64) -> Option<u64> {
    (0..=n).try_fold(0u64, |acc, k| acc.checked_add(factorial(k)?))
}

/// Boundaries right after the `f(2n)`-th elements of `X`, `n = 0..=depth`,
/// with `f(n) = sum_{k<=n} k!`. In `I_n`, `n >= 1`, `S` skips the first
/// `(2n-1)!` elements of `X` and keeps the rest; on `I_0`, `S` agrees with
/// `X`.
pub fn non_meagre_witness(x: &SetSchema, depth: u64, budget: u64) -> Result<NonMeagreWitness> {
    x.require_infinite()?;
    let overflow = || pre("depth too large for 64-bit counts");
    let mut boundaries = vec![0];
    let mut skip_ends = Vec::new();
    let mut table = vec![0];
    for n in 0..=depth {
        if n >= 1 {
            let before = factorial_sum(2 * n - 2).ok_or_else(overflow)?;
            let skip = factorial(2 * n - 1).ok_or_else(overflow)?;
            let e = x.kth_element(before + skip - 1, budget)? + 1;
            skip_ends.push(e);
            table.push(e);
        }
        let f = factorial_sum(2 * n).ok_or_else(overflow)?;
        let b = x.kth_element(f - 1, budget)? + 1;
        boundaries.push(b);
        table.push(b);
    }
    // table = 0, b_1, s_1, b_2, s_2, ..., b_{depth+1}; even-indexed pieces
    // are kept.
    let kept = SetSchema::intervals(IntervalPartition::from_table(table)?, Parity::Even);
    let s = x.clone().intersection(kept);
    let mut interval_counts = Vec::new();
    for w in boundaries.windows(2) {
        interval_counts.push(x.count_below(w[1])? - x.count_below(w[0])?);
    }
    let counts_ok = interval_counts.iter().enumerate().skip(1).all(|(n, &c)| {
        let n = n as u64;
        let need = factorial(2 * n - 1).zip(factorial(2 * n)).map(|(a, b)| a + b);
        need.is_some_and(|need| c >= need)
    });
    let partition = IntervalPartition::from_table(boundaries.clone())?;
    Ok(NonMeagreWitness {
        chopped: ChoppedReal::new(s.clone(), partition),
        s,
        boundaries,
        skip_ends,
        interval_counts,
        counts_ok,
    })
}
