//! Finite check of the four inductive clauses used when growing a new set
//! that stays independent over a countable family while copying a decided
//! set on dyadic blocks.
//!
//! A pattern `f` is a partial function `n -> {-1, 1}`, stored as a vector
//! over `0..n` with `0` marking indices outside its domain. `B^f` is the
//! intersection of `B_i` for `f(i) = 1` and of the complements for
//! `f(i) = -1`.

use std::collections::BTreeMap;

use num_traits::Signed;
use serde::Serialize;

use super::{pre, ConstructionError, Result};
use crate::rational::{int, inverse_power_of_two, OpenInterval, Rational};
use crate::sets::SetSchema;

/// Largest `k_next` accepted; traces hold `2^k_next` bits per pattern.
pub const MAX_K: u32 = 28;

#[derive(Debug, Clone)]
pub struct RTraces {
    /// Number of family members `n`.
    pub members: usize,
    /// Bits of `B^f` below `len`.
    pub len: u64,
    pub patterns: BTreeMap<Vec<i8>, Vec<bool>>,
}

fn all_patterns(n: usize) -> Vec<Vec<i8>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                [-1i8, 0, 1].into_iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn pattern_text(f: &[i8]) -> String {
    f.iter().map(|&v| match v { -1 => '-', 1 => '+', _ => '.' }).collect()
}

impl RTraces {
    /// Every pattern over `family`, evaluated below `len`.
    pub fn from_family(family: &[SetSchema], len: u64) -> Result<Self> {
        if family.len() > 8 {
            return Err(pre("at most 8 family members"));
        }
        let bits: Vec<Vec<bool>> = family.iter().map(|b| b.indicator(len)).collect::<std::result::Result<_, _>>()?;
        let mut patterns = BTreeMap::new();
        for f in all_patterns(family.len()) {
            let v = (0..len as usize)
                .map(|j| f.iter().zip(&bits).all(|(&s, b)| s == 0 || (s == 1) == b[j]))
                .collect();
            patterns.insert(f, v);
        }
        Ok(RTraces { members: family.len(), len, patterns })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RClause {
    /// Both densities at `2^k_n` against `Z_n`, radius `δ_n / 3`.
    R1Now,
    /// Both densities at `2^k_next` against `Z_next`, radius `δ_next / 3`.
    R1Next,
    /// Against the decided `X` for every `l` in `[2^k_n, 2^k_next]`,
    /// radius `δ_n / 3`.
    R2,
    /// Against `Z_next` for every such `l`, radius `δ_n`.
    R3,
    /// `Z_next` agrees with `X` on `[2^k_n, 2^k_next)`.
    R4,
}

#[derive(Debug, Clone, Serialize)]
pub struct RClauseResult {
    /// Pattern text, `+`, `-` or `.` per member; `None` for `R4`.
    pub f: Option<String>,
    pub clause: RClause,
    pub pass: bool,
    /// First failing `l` (for `R4`, the first disagreement).
    pub witness: Option<u64>,
}

fn to_bits(set: &[u64], len: u64) -> Result<Vec<bool>> {
    let mut v = vec![false; len as usize];
    for &e in set {
        if e >= len {
            return Err(pre(format!("element {e} beyond {len}")));
        }
        v[e as usize] = true;
    }
    Ok(v)
}

/// First `l` in `[from, to]` where one of the two densities of `bf` split by
/// `z` leaves `window`.
fn first_failure(bf: &[bool], z: &[bool], from: u64, to: u64, window: &OpenInterval) -> Option<u64> {
    let (mut inside, mut outside) = (0u64, 0u64);
    for l in 1..=to {
        let j = l as usize - 1;
        if bf[j] {
            if z[j] {
                inside += 1;
            } else {
                outside += 1;
            }
        }
        if l >= from && !(window.contains_counts(inside, l) && window.contains_counts(outside, l)) {
            return Some(l);
        }
    }
    None
}

/// Checks every clause for every pattern. `x` is the decided part of the
/// new set below `2^k_next`; `z_next ∩ 2^k_n` must equal `z_n`.
#[allow(clippy::too_many_arguments)]
pub fn r_conditions_check(
    traces: &RTraces,
    z_n: &[u64],
    z_next: &[u64],
    x: &[u64],
    k_n: u32,
    k_next: u32,
    delta_n: &Rational,
    delta_next: &Rational,
) -> Result<Vec<RClauseResult>> {
    if k_n >= k_next || k_next > MAX_K {
        return Err(pre(format!("need k_n < k_next <= {MAX_K}")));
    }
    if !delta_n.is_positive() || !delta_next.is_positive() {
        return Err(pre("deltas must be positive"));
    }
    let (lo, hi) = (1u64 << k_n, 1u64 << k_next);
    if traces.len < hi {
        return Err(ConstructionError::TraceGap(format!("traces end at {}, need {hi}", traces.len)));
    }
    let zn = to_bits(z_n, lo)?;
    let zx = to_bits(z_next, hi)?;
    let xb = to_bits(x, hi)?;
    if zx[..lo as usize] != zn[..] {
        return Err(pre("Z_next does not extend Z_n"));
    }
    let third = int(3);
    let mut out = Vec::new();
    for f in all_patterns(traces.members) {
        let bf = traces
            .patterns
            .get(&f)
            .ok_or_else(|| ConstructionError::TraceGap(pattern_text(&f)))?;
        let dom = f.iter().filter(|&&v| v != 0).count();
        let center = inverse_power_of_two(dom + 1);
        let narrow = OpenInterval::around(&center, &(delta_n / &third));
        let next = OpenInterval::around(&center, &(delta_next / &third));
        let wide = OpenInterval::around(&center, delta_n);
        let checks = [
            (RClause::R1Now, first_failure(bf, &zn, lo, lo, &narrow)),
            (RClause::R1Next, first_failure(bf, &zx, hi, hi, &next)),
            (RClause::R2, first_failure(bf, &xb, lo, hi, &narrow)),
            (RClause::R3, first_failure(bf, &zx, lo, hi, &wide)),
        ];
        for (clause, witness) in checks {
            out.push(RClauseResult { f: Some(pattern_text(&f)), clause, pass: witness.is_none(), witness });
        }
    }
    let witness = (lo..hi).find(|&j| zx[j as usize] != xb[j as usize]);
    out.push(RClauseResult { f: None, clause: RClause::R4, pass: witness.is_none(), witness });
    Ok(out)
}
