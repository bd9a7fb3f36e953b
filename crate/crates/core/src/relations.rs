//! Finite-horizon deciders for bisection, statistical splitting and
//! independence.
//!
//! Limit statements become three-valued verdicts over a window
//! `[n0, horizon]`: `HoldsAtHorizon` only says nothing went wrong inside the
//! window. Every comparison is exact.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::density::{is_moderate, Moderacy, ModeracyWindow};
use crate::rational::{half, serde_pq, Rational};
use crate::sets::{SetError, SetSchema};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RelationError {
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("eps must lie in (0, 1/2)")]
    EpsOutOfRange,
    #[error("rho must lie in (0, 1)")]
    RhoOutOfRange,
    #[error("{which} has no elements below n0 = {n0}")]
    EmptyBase { which: &'static str, n0: u64 },
    #[error("family is empty")]
    EmptyFamily,
    #[error("family member {index} is not moderate")]
    NotModerate { index: usize },
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Density(#[from] crate::density::DensityError),
}

pub type Result<T, E = RelationError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictStatus {
    HoldsAtHorizon,
    FailsAtHorizon,
    Inconclusive,
}

impl std::fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerdictStatus::HoldsAtHorizon => "HoldsAtHorizon",
            VerdictStatus::FailsAtHorizon => "FailsAtHorizon",
            VerdictStatus::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TracePoint {
    pub n: u64,
    #[serde(with = "serde_pq")]
    pub value: Rational,
}

/// Outcome of a window scan. A failing verdict carries the first violating
/// `n` and the value there; a holding one carries the smallest and largest
/// values seen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationVerdict {
    pub status: VerdictStatus,
    pub witness: Option<u64>,
    pub trace: Option<Vec<TracePoint>>,
}

impl RelationVerdict {
    pub fn holds(&self) -> bool {
        self.status == VerdictStatus::HoldsAtHorizon
    }

    fn inconclusive() -> Self {
        Self { status: VerdictStatus::Inconclusive, witness: None, trace: None }
    }
}

/// Open band `(center - tol, center + tol)` tested against unreduced
/// fractions.
struct Band {
    lo: Rational,
    hi: Rational,
    // lo and hi as i128 fractions when they fit.
    small: Option<(i128, i128, i128, i128)>,
}

impl Band {
    fn new(center: &Rational, tol: &Rational) -> Self {
        let lo = center - tol;
        let hi = center + tol;
        let small = (|| {
            Some((
                lo.numer().to_i128()?,
                lo.denom().to_i128()?,
                hi.numer().to_i128()?,
                hi.denom().to_i128()?,
            ))
        })();
        Self { lo, hi, small }
    }

    fn contains(&self, num: u128, den: u128) -> bool {
        if let (Some((ln, ld, hn, hd)), Ok(n), Ok(d)) =
            (self.small, i128::try_from(num), i128::try_from(den))
        {
            if let (Some(a), Some(b), Some(c), Some(e)) =
                (n.checked_mul(ld), ln.checked_mul(d), n.checked_mul(hd), hn.checked_mul(d))
            {
                return a > b && c < e;
            }
        }
        self.contains_big(&BigInt::from(num), &BigInt::from(den))
    }

    fn contains_big(&self, num: &BigInt, den: &BigInt) -> bool {
        num * self.lo.denom() > self.lo.numer() * den && num * self.hi.denom() < self.hi.numer() * den
    }
}

fn check_tol(tol: &Rational) -> Result<()> {
    if !tol.is_positive() {
        return Err(RelationError::BadTolerance);
    }
    Ok(())
}

/// Prefix counts `c[n] = |A ∩ n|` for `n = 0..=horizon`.
fn prefix_counts(bits: &[bool]) -> Vec<u64> {
    let mut out = Vec::with_capacity(bits.len() + 1);
    let mut c = 0;
    out.push(0);
    for &b in bits {
        c += b as u64;
        out.push(c);
    }
    out
}

fn and_bits(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| *x && *y).collect()
}

/// Scans `n` in `[n0, horizon]`, requiring `value(n)` inside `band`.
fn scan<F>(n0: u64, horizon: u64, band: &Band, mut value: F) -> RelationVerdict
where
    F: FnMut(u64) -> (u128, u128),
{
    if horizon < n0 {
        return RelationVerdict::inconclusive();
    }
    let mut lo: Option<(u64, u128, u128)> = None;
    let mut hi: Option<(u64, u128, u128)> = None;
    for n in n0..=horizon {
        let (num, den) = value(n);
        if !band.contains(num, den) {
            return RelationVerdict {
                status: VerdictStatus::FailsAtHorizon,
                witness: Some(n),
                trace: Some(vec![TracePoint { n, value: big_ratio(num, den) }]),
            };
        }
        let less = |(_, a, b): (u64, u128, u128)| cmp_u128(num, den, a, b) == Ordering::Less;
        let more = |(_, a, b): (u64, u128, u128)| cmp_u128(num, den, a, b) == Ordering::Greater;
        if lo.map_or(true, less) {
            lo = Some((n, num, den));
        }
        if hi.map_or(true, more) {
            hi = Some((n, num, den));
        }
    }
    let point = |(n, a, b): (u64, u128, u128)| TracePoint { n, value: big_ratio(a, b) };
    RelationVerdict {
        status: VerdictStatus::HoldsAtHorizon,
        witness: None,
        trace: Some(vec![point(lo.expect("window nonempty")), point(hi.expect("window nonempty"))]),
    }
}

fn cmp_u128(a: u128, b: u128, c: u128, d: u128) -> Ordering {
    match (a.checked_mul(d), c.checked_mul(b)) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => (BigInt::from(a) * d).cmp(&(BigInt::from(c) * b)),
    }
}

fn big_ratio(a: u128, b: u128) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

struct PairCounts {
    both: Vec<u64>,
    x: Vec<u64>,
}

fn pair_counts(s: &SetSchema, x: &SetSchema, horizon: u64) -> Result<PairCounts> {
    let xb = x.indicator(horizon)?;
    let sb = s.indicator(horizon)?;
    Ok(PairCounts { both: prefix_counts(&and_bits(&sb, &xb)), x: prefix_counts(&xb) })
}

fn ratio_scan(
    s: &SetSchema,
    x: &SetSchema,
    center: &Rational,
    tol: &Rational,
    n0: u64,
    horizon: u64,
) -> Result<RelationVerdict> {
    let n0 = n0.max(1);
    let c = pair_counts(s, x, horizon.max(n0))?;
    if c.x[n0 as usize] == 0 {
        return Err(RelationError::EmptyBase { which: "X", n0 });
    }
    let band = Band::new(center, tol);
    Ok(scan(n0, horizon, &band, |n| (c.both[n as usize] as u128, c.x[n as usize] as u128)))
}

/// `|S ∩ X ∩ n| / |X ∩ n|` stays within `tol` of 1/2 on `[n0, horizon]`.
pub fn bisects_in_limit(
    s: &SetSchema,
    x: &SetSchema,
    tol: &Rational,
    n0: u64,
    horizon: u64,
) -> Result<RelationVerdict> {
    check_tol(tol)?;
    ratio_scan(s, x, &half(), tol, n0, horizon)
}

/// As [`bisects_in_limit`] with `0 < eps < 1/2`.
pub fn almost_bisects(
    s: &SetSchema,
    x: &SetSchema,
    eps: &Rational,
    n0: u64,
    horizon: u64,
) -> Result<RelationVerdict> {
    if !eps.is_positive() || *eps >= half() {
        return Err(RelationError::EpsOutOfRange);
    }
    ratio_scan(s, x, &half(), eps, n0, horizon)
}

/// Every `n <= horizon` with the relative density within `eps` of 1/2.
/// Values of `n` with `X ∩ n` empty are skipped.
pub fn weakly_bisects(s: &SetSchema, x: &SetSchema, eps: &Rational, horizon: u64) -> Result<Vec<u64>> {
    check_tol(eps)?;
    let c = pair_counts(s, x, horizon)?;
    let band = Band::new(&half(), eps);
    Ok((1..=horizon)
        .filter(|&n| {
            let base = c.x[n as usize];
            base > 0 && band.contains(c.both[n as usize] as u128, base as u128)
        })
        .collect())
}

/// Every `n <= horizon` with `2 |S ∩ X ∩ n| = |X ∩ n| > 0`.
pub fn bisects_infinitely_often(s: &SetSchema, x: &SetSchema, horizon: u64) -> Result<Vec<u64>> {
    let c = pair_counts(s, x, horizon)?;
    Ok((1..=horizon)
        .filter(|&n| {
            let base = c.x[n as usize];
            base > 0 && 2 * c.both[n as usize] == base
        })
        .collect())
}

/// `d_n(S ∩ X) / (d_n(S) d_n(X))` stays within `tol` of 1 on `[n0, horizon]`.
pub fn star_splits(
    s: &SetSchema,
    x: &SetSchema,
    tol: &Rational,
    n0: u64,
    horizon: u64,
) -> Result<RelationVerdict> {
    check_tol(tol)?;
    let n0 = n0.max(1);
    let h = horizon.max(n0);
    let sb = s.indicator(h)?;
    let xb = x.indicator(h)?;
    let both = prefix_counts(&and_bits(&sb, &xb));
    let sc = prefix_counts(&sb);
    let xc = prefix_counts(&xb);
    if sc[n0 as usize] == 0 {
        return Err(RelationError::EmptyBase { which: "S", n0 });
    }
    if xc[n0 as usize] == 0 {
        return Err(RelationError::EmptyBase { which: "X", n0 });
    }
    let band = Band::new(&Rational::one(), tol);
    Ok(scan(n0, horizon, &band, |n| {
        let i = n as usize;
        (both[i] as u128 * n as u128, sc[i] as u128 * xc[i] as u128)
    }))
}

/// Nonempty subsets of `0..size` with at most `cap` members, in
/// lexicographic order of their sorted index vectors.
pub fn subfamilies(size: usize, cap: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, size: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for i in start..size {
            cur.push(i);
            out.push(cur.clone());
            if cur.len() < cap {
                go(i + 1, size, cap, cur, out);
            }
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, size, cap, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubfamilyVerdict {
    /// Indices of the members intersected.
    pub members: Vec<usize>,
    /// Indices of the members whose complement is intersected.
    pub complemented: Vec<usize>,
    pub verdict: RelationVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyReport {
    pub moderacy: Vec<Moderacy>,
    /// Set when some member's moderacy is only an estimate.
    pub estimated_moderacy: bool,
    pub subfamilies: Vec<SubfamilyVerdict>,
}

fn family_bits(family: &[SetSchema], horizon: u64) -> Result<Vec<Vec<bool>>> {
    family
        .par_iter()
        .map(|x| x.indicator(horizon).map_err(RelationError::from))
        .collect()
}

fn intersect(bits: &[Vec<bool>], members: &[usize], complemented: &[usize], len: usize) -> Vec<bool> {
    let mut acc = vec![true; len];
    for &i in members {
        acc.iter_mut().zip(&bits[i]).for_each(|(a, b)| *a &= *b);
    }
    for &i in complemented {
        acc.iter_mut().zip(&bits[i]).for_each(|(a, b)| *a &= !*b);
    }
    acc
}

/// For every subfamily `E` up to `cap` members, checks
/// `d_n(⋂E) / ∏ d_n(E)` against `(1 - tol, 1 + tol)` on `[n0, horizon]`.
/// Members must be moderate; estimated moderacy is accepted and flagged.
pub fn statistically_independent(
    family: &[SetSchema],
    cap: usize,
    tol: &Rational,
    n0: u64,
    horizon: u64,
) -> Result<FamilyReport> {
    check_tol(tol)?;
    if family.is_empty() {
        return Err(RelationError::EmptyFamily);
    }
    let n0 = n0.max(1);
    let h = horizon.max(n0);
    let window = ModeracyWindow::new(n0, h.max(n0 + 1));
    let moderacy = family
        .iter()
        .map(|x| is_moderate(x, &window).map_err(RelationError::from))
        .collect::<Result<Vec<_>>>()?;
    if let Some(index) = moderacy.iter().position(|m| *m == Moderacy::Exact(false)) {
        return Err(RelationError::NotModerate { index });
    }
    let estimated_moderacy = moderacy.iter().any(|m| matches!(m, Moderacy::Estimated(_)));
    let bits = family_bits(family, h)?;
    let counts: Vec<Vec<u64>> = bits.iter().map(|b| prefix_counts(b)).collect();
    for (i, c) in counts.iter().enumerate() {
        if c[n0 as usize] == 0 {
            return Err(RelationError::EmptyBase { which: if i == 0 { "first member" } else { "a member" }, n0 });
        }
    }
    let band = Band::new(&Rational::one(), tol);
    let subfamilies = subfamilies(family.len(), cap)
        .into_par_iter()
        .map(|members| {
            let inter = prefix_counts(&intersect(&bits, &members, &[], h as usize));
            let verdict = scan_big(n0, horizon, &band, |n| {
                let i = n as usize;
                let k = members.len() as u32;
                let num = BigInt::from(inter[i]) * BigInt::from(n).pow(k - 1);
                let den = members.iter().fold(BigInt::one(), |acc, &m| acc * counts[m][i]);
                (num, den)
            });
            SubfamilyVerdict { members, complemented: vec![], verdict }
        })
        .collect();
    Ok(FamilyReport { moderacy, estimated_moderacy, subfamilies })
}

fn scan_big<F>(n0: u64, horizon: u64, band: &Band, mut value: F) -> RelationVerdict
where
    F: FnMut(u64) -> (BigInt, BigInt),
{
    if horizon < n0 {
        return RelationVerdict::inconclusive();
    }
    let mut lo: Option<(u64, Rational)> = None;
    let mut hi: Option<(u64, Rational)> = None;
    for n in n0..=horizon {
        let (num, den) = value(n);
        if !band.contains_big(&num, &den) {
            return RelationVerdict {
                status: VerdictStatus::FailsAtHorizon,
                witness: Some(n),
                trace: Some(vec![TracePoint { n, value: Rational::new(num, den) }]),
            };
        }
        let v = Rational::new(num, den);
        if lo.as_ref().map_or(true, |(_, l)| v < *l) {
            lo = Some((n, v.clone()));
        }
        if hi.as_ref().map_or(true, |(_, h)| v > *h) {
            hi = Some((n, v));
        }
    }
    let point = |(n, value): (u64, Rational)| TracePoint { n, value };
    RelationVerdict {
        status: VerdictStatus::HoldsAtHorizon,
        witness: None,
        trace: Some(vec![point(lo.expect("nonempty")), point(hi.expect("nonempty"))]),
    }
}

fn check_rho(rho: &Rational) -> Result<()> {
    if !rho.is_positive() || *rho >= Rational::one() {
        return Err(RelationError::RhoOutOfRange);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn rho_scan(
    bits: &[Vec<bool>],
    members: Vec<usize>,
    complemented: Vec<usize>,
    rho: &Rational,
    tol: &Rational,
    n0: u64,
    horizon: u64,
    len: usize,
) -> SubfamilyVerdict {
    let target = num_traits::pow(rho.clone(), members.len())
        * num_traits::pow(Rational::one() - rho, complemented.len());
    let band = Band::new(&target, tol);
    let c = prefix_counts(&intersect(bits, &members, &complemented, len));
    let verdict = scan(n0, horizon, &band, |n| (c[n as usize] as u128, n as u128));
    SubfamilyVerdict { members, complemented, verdict }
}

/// For every subfamily `A` up to `cap` members, checks
/// `|d_n(⋂A) - rho^|A|| < tol` on `[n0, horizon]`.
pub fn rho_independent(
    family: &[SetSchema],
    rho: &Rational,
    cap: usize,
    tol: &Rational,
    n0: u64,
    horizon: u64,
) -> Result<FamilyReport> {
    check_rho(rho)?;
    check_tol(tol)?;
    if family.is_empty() {
        return Err(RelationError::EmptyFamily);
    }
    let n0 = n0.max(1);
    let h = horizon.max(n0);
    let bits = family_bits(family, h)?;
    let subfamilies = subfamilies(family.len(), cap)
        .into_par_iter()
        .map(|a| rho_scan(&bits, a, vec![], rho, tol, n0, horizon, h as usize))
        .collect();
    Ok(FamilyReport { moderacy: vec![], estimated_moderacy: false, subfamilies })
}

/// The boolean-combination form: for disjoint `A`, `B` with
/// `1 <= |A| + |B| <= cap`, checks
/// `|d_n(⋂A ∩ ⋂(ω \ B)) - rho^|A| (1 - rho)^|B|| < tol` on `[n0, horizon]`.
/// Ordered by the combined index vector, then by which members are
/// complemented.
pub fn rho_independent_combinations(
    family: &[SetSchema],
    rho: &Rational,
    cap: usize,
    tol: &Rational,
    n0: u64,
    horizon: u64,
) -> Result<FamilyReport> {
    check_rho(rho)?;
    check_tol(tol)?;
    if family.is_empty() {
        return Err(RelationError::EmptyFamily);
    }
    let n0 = n0.max(1);
    let h = horizon.max(n0);
    let bits = family_bits(family, h)?;
    let mut jobs = Vec::new();
    for sub in subfamilies(family.len(), cap) {
        for mask in 0u32..(1 << sub.len()) {
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for (j, &i) in sub.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    b.push(i);
                } else {
                    a.push(i);
                }
            }
            jobs.push((a, b));
        }
    }
    let subfamilies = jobs
        .into_par_iter()
        .map(|(a, b)| rho_scan(&bits, a, b, rho, tol, n0, horizon, h as usize))
        .collect();
    Ok(FamilyReport { moderacy: vec![], estimated_moderacy: false, subfamilies })
}

/// Default burn-in for a horizon: one tenth of it, at least 1.
pub fn default_n0(horizon: u64) -> u64 {
    (horizon / 10).max(1)
}
