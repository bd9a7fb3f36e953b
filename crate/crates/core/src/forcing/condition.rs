//! Validity clauses, Boolean traces, the order and restriction.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use super::{Bits, Condition, ForcingError, PartialFn, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Clause {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    D1,
    D2,
    D3,
    D4,
    D5,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub clause: Clause,
    /// The partial function involved, when there is one.
    pub f: Option<String>,
    /// The length `i` at which a (D5) bound fails.
    pub at: Option<u64>,
    pub detail: String,
}

impl Violation {
    fn new(clause: Clause, f: Option<&PartialFn>, detail: impl Into<String>) -> Self {
        Violation { clause, f: f.map(|f| f.to_string()), at: None, detail: detail.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.clause)?;
        if let Some(g) = &self.f {
            write!(f, " at f={{{g}}}")?;
        }
        if let Some(i) = self.at {
            write!(f, " i={i}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BooleanTrace {
    pub f: PartialFn,
    pub members: Vec<u64>,
}

/// `b_f` over `[0, len)` from sets stored at least that long.
pub(crate) fn trace_bits(a: impl Fn(u64) -> Bits, f: &PartialFn, len: u64) -> Bits {
    let mut b = Bits::ones(len);
    for &(id, v) in f.pairs() {
        let s = a(id).resized(len);
        if v {
            b.and_assign(&s);
        } else {
            b.and_not_assign(&s);
        }
    }
    b
}

/// Calls `visit` with `b_f` for every partial `f` over `ids`, sharing the
/// intersections along a depth-first walk.
pub(crate) fn for_each_trace(ids: &[u64], sets: &[Bits], len: u64, mut visit: impl FnMut(&PartialFn, &Bits)) {
    fn walk(
        pos: usize,
        ids: &[u64],
        sets: &[Bits],
        f: &mut Vec<(u64, bool)>,
        cur: &Bits,
        visit: &mut dyn FnMut(&PartialFn, &Bits),
    ) {
        if pos == ids.len() {
            visit(&PartialFn(f.clone()), cur);
            return;
        }
        walk(pos + 1, ids, sets, f, cur, visit);
        for v in [false, true] {
            let mut next = cur.clone();
            if v {
                next.and_assign(&sets[pos]);
            } else {
                next.and_not_assign(&sets[pos]);
            }
            f.push((ids[pos], v));
            walk(pos + 1, ids, sets, f, &next, visit);
            f.pop();
        }
    }
    walk(0, ids, sets, &mut Vec::new(), &Bits::ones(len), &mut visit);
}

pub fn boolean_trace(p: &Condition, f: &PartialFn) -> Result<BooleanTrace> {
    if !f.domain_within(p.ids()) {
        return Err(ForcingError::BadPartialFn(format!("{f} mentions ids outside F")));
    }
    let bits = trace_bits(|id| p.a(id).expect("id in F").clone(), f, p.n());
    Ok(BooleanTrace { f: f.clone(), members: bits.members().collect() })
}

/// `|c / len - 2^-d| < e`, i.e. `den |c 2^d - len| < num 2^d len`.
pub(crate) fn within(c: u64, len: u64, d: usize, e: &Rational) -> bool {
    let t = BigInt::from(1u8) << d;
    let lhs = (BigInt::from(c) * &t - BigInt::from(len)).abs() * e.denom();
    let rhs = e.numer() * t * BigInt::from(len);
    lhs < rhs
}

/// Every violated clause; an empty list means valid.
pub fn validate(p: &Condition) -> Result<Vec<Violation>> {
    let mut out = Vec::new();
    let all = PartialFn::all_over(p.ids());
    for f in &all {
        match p.eps(f) {
            None => out.push(Violation::new(Clause::C4, Some(f), "eps undefined")),
            Some(e) if !e.is_positive() => out.push(Violation::new(Clause::C4, Some(f), "eps not positive")),
            Some(e) => {
                for g in f.predecessors() {
                    if let Some(eg) = p.eps(&g) {
                        if eg > e {
                            out.push(Violation::new(
                                Clause::C4,
                                Some(f),
                                format!("eps({{{g}}}) exceeds eps of its extension"),
                            ));
                        }
                    }
                }
            }
        }
    }
    if !out.is_empty() {
        return Ok(out);
    }
    let n = p.n();
    let sets: Vec<Bits> = p.ids().iter().map(|id| p.a(*id).expect("id in F").clone()).collect();
    let mut c5 = Vec::new();
    for_each_trace(p.ids(), &sets, n, |f, b| {
        let e = p.eps(f).expect("covered") / Rational::from_integer(8.into());
        let c = b.count();
        if !within(c, n, f.dom_len(), &e) {
            c5.push(Violation::new(Clause::C5, Some(f), format!("|b_f| = {c} of {n}")));
        }
    });
    c5.sort_by(|a, b| a.f.cmp(&b.f));
    out.extend(c5);
    let eps0 = p.eps0().expect("covered");
    // 2^(2|F|) / n < eps / 8
    let lhs = (BigInt::from(8u8) << (2 * p.ids().len())) * eps0.denom();
    if lhs >= eps0.numer() * BigInt::from(n) {
        out.push(Violation::new(Clause::C6, None, format!("4^|F| / n not below eps/8 at n = {n}")));
    }
    Ok(out)
}

fn require_valid(p: &Condition, which: &str) -> Result<()> {
    if let Some(v) = validate(p)?.into_iter().next() {
        return Err(ForcingError::Invalid { clause: v.clause, detail: format!("{which}: {v}") });
    }
    Ok(())
}

pub(crate) fn check_valid(p: &Condition, which: &str) -> Result<()> {
    require_valid(p, which)
}

/// `p↾E`.
pub fn restrict(p: &Condition, e: &[u64]) -> Condition {
    let ids: Vec<u64> = p.ids().iter().copied().filter(|id| e.contains(id)).collect();
    let a = p.a_map().iter().filter(|(k, _)| ids.contains(k)).map(|(k, v)| (*k, v.clone())).collect();
    let eps = p
        .eps_map()
        .iter()
        .filter(|(f, _)| f.domain_within(&ids))
        .map(|(f, v)| (f.clone(), v.clone()))
        .collect();
    Condition::new(ids, p.n(), a, eps).expect("restriction keeps shape")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeqResult {
    pub holds: bool,
    pub failed: Option<Violation>,
}

impl LeqResult {
    fn ok() -> Self {
        LeqResult { holds: true, failed: None }
    }

    fn fail(v: Violation) -> Self {
        LeqResult { holds: false, failed: Some(v) }
    }
}

/// First `i` in `[lo, hi]` with `|b ∩ i| / i` at distance `>= e` from
/// `2^-d`, if any. Skips ahead while the slack cannot be used up.
pub(crate) fn first_d5_failure(b: &Bits, d: usize, e: &Rational, lo: u64, hi: u64) -> Option<u64> {
    let prefix = b.word_prefix();
    let fast = (|| {
        let num = e.numer().to_i128()?;
        let den = e.denom().to_i128()?;
        let limit = 1i128 << 40;
        (num < limit && den < limit && hi < (1u64 << 40) && d <= 16).then_some((num, den))
    })();
    let Some((num, den)) = fast else {
        return (lo..=hi).find(|&i| !within(b.count_below_with(&prefix, i), i, d, e));
    };
    let t = 1i128 << d;
    let step = den * (t - 1).max(1);
    let mut i = lo;
    while i <= hi {
        let c = b.count_below_with(&prefix, i) as i128;
        let slack = num * t * i as i128 - den * (c * t - i as i128).abs();
        if slack <= 0 {
            return Some(i);
        }
        let skip = ((slack - 1) / step) as u64;
        i = match i.checked_add(skip + 1) {
            Some(v) => v,
            None => break,
        };
    }
    None
}

/// `q <= p`, with the first failing clause among (D1)-(D5).
pub fn leq(q: &Condition, p: &Condition) -> Result<LeqResult> {
    require_valid(q, "q")?;
    require_valid(p, "p")?;
    if let Some(id) = p.ids().iter().find(|id| !q.ids().contains(id)) {
        return Ok(LeqResult::fail(Violation::new(Clause::D1, None, format!("id {id} missing from q"))));
    }
    if q.n() < p.n() {
        return Ok(LeqResult::fail(Violation::new(Clause::D2, None, format!("n^q = {} < n^p = {}", q.n(), p.n()))));
    }
    for id in p.ids() {
        if q.a(*id).expect("D1").resized(p.n()) != *p.a(*id).expect("in F") {
            return Ok(LeqResult::fail(Violation::new(Clause::D3, None, format!("a_{id} differs below n^p"))));
        }
    }
    for (f, ep) in p.eps_map() {
        if q.eps(f).map_or(true, |eq| eq > ep) {
            return Ok(LeqResult::fail(Violation::new(Clause::D4, Some(f), "eps^q(f) > eps^p(f)")));
        }
    }
    let sets: Vec<Bits> = p.ids().iter().map(|id| q.a(*id).expect("D1").clone()).collect();
    let mut failure: Option<Violation> = None;
    for_each_trace(p.ids(), &sets, q.n(), |f, b| {
        if failure.is_some() {
            return;
        }
        let e = p.eps(f).expect("covered");
        if let Some(i) = first_d5_failure(b, f.dom_len(), e, p.n(), q.n()) {
            let mut v = Violation::new(Clause::D5, Some(f), format!("|b_f ∩ i| = {}", b.count_below(i)));
            v.at = Some(i);
            failure = Some(v);
        }
    });
    Ok(failure.map_or_else(LeqResult::ok, LeqResult::fail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn sample(n: u64) -> Condition {
        let members: Vec<u64> = (0..n).filter(|j| j % 2 == 0).collect();
        Condition::from_members(n, [(5, members)], Condition::uniform_eps(&[5], &int(16))).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&sample(8)).unwrap().is_empty());
        let v = validate(&sample(2)).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].clause, Clause::C6);
        let t = Condition::trivial(1, int(16)).unwrap();
        assert!(validate(&t).unwrap().is_empty());
        // eps(∅) = 2 at n = 1: 1 / 1 < 2 / 8 fails.
        assert_eq!(validate(&Condition::trivial(1, int(2)).unwrap()).unwrap()[0].clause, Clause::C6);
    }

    #[test]
    fn c4_and_c5_detected() {
        let mut eps = Condition::uniform_eps(&[5], &int(16));
        eps.insert(PartialFn::empty(), int(17));
        let c = Condition::from_members(64, [(5, (0..32).collect())], eps).unwrap();
        assert!(validate(&c).unwrap().iter().any(|v| v.clause == Clause::C4));
        let c = Condition::from_members(64, [(5, (0..40).collect())], Condition::uniform_eps(&[5], &int(1))).unwrap();
        let v = validate(&c).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|v| v.clause == Clause::C5));
        let mut partial = Condition::uniform_eps(&[5], &int(1));
        partial.remove(&"5:0".parse().unwrap());
        let c = Condition::from_members(64, [(5, (0..32).collect())], partial).unwrap();
        assert_eq!(validate(&c).unwrap()[0].clause, Clause::C4);
    }

    #[test]
    fn traces() {
        let p = sample(8);
        assert_eq!(boolean_trace(&p, &PartialFn::empty()).unwrap().members, (0..8).collect::<Vec<_>>());
        assert_eq!(boolean_trace(&p, &"5:1".parse().unwrap()).unwrap().members, vec![0, 2, 4, 6]);
        assert_eq!(boolean_trace(&p, &"5:0".parse().unwrap()).unwrap().members, vec![1, 3, 5, 7]);
        assert!(boolean_trace(&p, &"6:0".parse().unwrap()).is_err());
    }

    #[test]
    fn order_examples() {
        let p = sample(8);
        assert!(leq(&p, &p).unwrap().holds);
        let q = sample(16);
        assert!(leq(&q, &p).unwrap().holds);
        let bad = Condition::from_members(16, [(5, vec![1, 2, 4, 6])], Condition::uniform_eps(&[5], &int(16))).unwrap();
        assert_eq!(leq(&bad, &p).unwrap().failed.unwrap().clause, Clause::D3);
        assert_eq!(leq(&p, &q).unwrap().failed.unwrap().clause, Clause::D2);
        let t = Condition::trivial(8, int(16)).unwrap();
        assert_eq!(leq(&t, &p).unwrap().failed.unwrap().clause, Clause::D1);
        assert!(leq(&p, &t).unwrap().holds);
    }

    #[test]
    fn d5_detects_drift() {
        let evens = |lo: u64, hi: u64| (lo..hi).filter(|j| j % 2 == 0).collect::<Vec<_>>();
        let eps = Condition::uniform_eps(&[5], &ratio(1, 4));
        let p = Condition::from_members(1024, [(5, evens(0, 1024))], eps.clone()).unwrap();
        assert!(validate(&p).unwrap().is_empty());
        // a run of ones on [1024, 2048) pushes the density of a_5 to 3/4 at 2048
        let mut members = evens(0, 1024);
        members.extend(1024..2048);
        members.extend(evens(2048, 1 << 16));
        let q = Condition::from_members(1 << 16, [(5, members)], eps).unwrap();
        assert!(validate(&q).unwrap().is_empty());
        let v = leq(&q, &p).unwrap().failed.unwrap();
        assert_eq!((v.clause, v.at), (Clause::D5, Some(2048)));
    }

    #[test]
    fn fast_and_slow_d5_agree() {
        use crate::sets::seeded::SplitMix;
        let mut rng = SplitMix::new(3);
        for _ in 0..200 {
            let len = 64 + rng.below(2000);
            let members: Vec<u64> = (0..len).filter(|_| rng.below(3) == 0).collect();
            let b = Bits::from_members(len, members).unwrap();
            let d = rng.below(3) as usize;
            let e = ratio(1 + rng.below(40), 100);
            let lo = 1 + rng.below(len / 2);
            let slow = (lo..=len).find(|&i| !within(b.count_below(i), i, d, &e));
            assert_eq!(first_d5_failure(&b, d, &e, lo, len), slow);
        }
    }

    #[test]
    fn restriction() {
        let p = sample(8);
        let r = restrict(&p, &[]);
        assert!(r.ids().is_empty());
        assert_eq!(r.n(), 8);
        assert_eq!(r.eps_map().len(), 1);
        assert_eq!(restrict(&p, &[5, 7]), p);
        assert!(leq(&p, &r).unwrap().holds);
    }
}
