//! Extension of a condition by another one living on a subset of ids, and
//! amalgamation of two conditions that agree where they overlap.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use super::condition::{check_valid, for_each_trace, leq, restrict, validate};
use super::{Bits, Condition, ForcingError, PartialFn, Result, FRESH_EPS, MAX_INDICES};
use crate::rational::{int, Rational};

/// Longest condition `extend` will build.
pub const MAX_N: u64 = 1 << 32;

fn hyp(msg: impl Into<String>) -> ForcingError {
    ForcingError::Hypothesis(msg.into())
}

fn sorted_union(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut v: Vec<u64> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Order of ids for the second fill: the ids shared with the restriction,
/// then alternately one id only in `p` and one only in `q'` while both
/// last, then everything left, each group ascending.
pub fn phase_two_order(shared: &[u64], p_only: &[u64], q_only: &[u64]) -> Vec<u64> {
    let mut out: Vec<u64> = shared.to_vec();
    let pairs = p_only.len().min(q_only.len());
    for k in 0..pairs {
        out.push(p_only[k]);
        out.push(q_only[k]);
    }
    let mut rest: Vec<u64> = p_only[pairs..].iter().chain(&q_only[pairs..]).copied().collect();
    rest.sort_unstable();
    out.extend(rest);
    out
}

/// Members of `[start, end)` given to the `ell`-th id by the second fill:
/// `j` with `(j - start) mod 2^(ell+1) < 2^ell`.
pub fn phase_two_members(start: u64, end: u64, ell: usize) -> Vec<u64> {
    let period = 1u64 << (ell + 1);
    let half = 1u64 << ell;
    (start..end).filter(|j| (j - start) % period < half).collect()
}

/// Smallest `n >= max(m, n_q', 1)` with `2^|F|` dividing `n - n_q'` and
/// `8 max(n_q', 4^|F|) < eps n`.
fn choose_n(m: u64, nq: u64, f_len: usize, eps: &Rational) -> Result<u64> {
    let bound = BigInt::from(nq.max(1u64.checked_shl(2 * f_len as u32).ok_or(ForcingError::Overflow)?));
    // n > 8 bound den / num
    let (q, _): (BigInt, BigInt) = (bound * BigInt::from(8u8) * eps.denom()).div_rem(eps.numer());
    let n0 = (q + BigInt::from(1u8)).to_u64().ok_or(ForcingError::Overflow)?;
    let mut n = n0.max(m).max(nq).max(1);
    let step = 1u64 << f_len;
    let r = (n - nq) % step;
    if r != 0 {
        n = n.checked_add(step - r).ok_or(ForcingError::Overflow)?;
    }
    if n > MAX_N {
        return Err(ForcingError::Overflow);
    }
    Ok(n)
}

/// A common extension `q` of `p` and `q'` with `F^q = F^p ∪ F^q'` and
/// `n^q >= m`, given `q' <= p↾E`, `F^q' ⊆ E` and a monotone target eps
/// over `F^p` below `eps^p`. Eps values are combined as: minimum of target
/// and `eps^q'` on functions over `F^p ∩ E`, the target on the rest of
/// `F^p`, `eps^q'` on the rest of `F^q'`, and `FRESH_EPS` elsewhere.
/// The result is validated and checked against both inputs before it is
/// returned.
pub fn extend(
    p: &Condition,
    e: &[u64],
    qprime: &Condition,
    m: u64,
    eps_target: &BTreeMap<PartialFn, Rational>,
) -> Result<Condition> {
    check_valid(p, "p")?;
    check_valid(qprime, "q'")?;
    let mut e = e.to_vec();
    e.sort_unstable();
    e.dedup();
    if let Some(id) = qprime.ids().iter().find(|id| e.binary_search(id).is_err()) {
        return Err(hyp(format!("id {id} of q' lies outside E")));
    }
    let pr = restrict(p, &e);
    let link = leq(qprime, &pr)?;
    if let Some(v) = link.failed {
        return Err(hyp(format!("q' is not below p restricted to E: {v}")));
    }
    let over_p = PartialFn::all_over(p.ids());
    if eps_target.len() != over_p.len() || over_p.iter().any(|f| !eps_target.contains_key(f)) {
        return Err(hyp("target eps must cover exactly the partial functions over F^p"));
    }
    for f in &over_p {
        let v = &eps_target[f];
        if !v.is_positive() {
            return Err(hyp(format!("target eps({{{f}}}) not positive")));
        }
        if v > p.eps(f).expect("valid p") {
            return Err(hyp(format!("target eps({{{f}}}) above eps^p")));
        }
        if f.predecessors().any(|g| eps_target[&g] > *v) {
            return Err(hyp(format!("target eps not monotone at {{{f}}}")));
        }
    }

    let shared = pr.ids().to_vec();
    let ids = sorted_union(p.ids(), qprime.ids());
    if ids.len() > MAX_INDICES {
        return Err(hyp(format!("|F^q| above {MAX_INDICES}")));
    }
    let fresh = int(FRESH_EPS);
    let mut eps = BTreeMap::new();
    for f in PartialFn::all_over(&ids) {
        let v = if f.domain_within(&shared) {
            eps_target[&f].clone().min(qprime.eps(&f).expect("valid q'").clone())
        } else if f.domain_within(p.ids()) {
            eps_target[&f].clone()
        } else if f.domain_within(qprime.ids()) {
            qprime.eps(&f).expect("valid q'").clone()
        } else {
            fresh.clone()
        };
        eps.insert(f, v);
    }
    for (f, v) in &eps {
        if f.predecessors().any(|g| eps[&g] > *v) {
            return Err(hyp(format!("combined eps not monotone at {{{f}}}; inputs above {FRESH_EPS} cannot be combined")));
        }
    }
    let (np, nq) = (p.n(), qprime.n());
    let n = choose_n(m, nq, ids.len(), &eps[&PartialFn::empty()])?;

    let mut a: BTreeMap<u64, Bits> = BTreeMap::new();
    for &id in &ids {
        let base = match qprime.a(id) {
            Some(b) => b.resized(n),
            None => p.a(id).expect("id in F^p").resized(n),
        };
        a.insert(id, base);
    }

    // first fill: [n^p, n^q') split by the traces of q' over the shared ids
    let p_only: Vec<u64> = p.ids().iter().copied().filter(|id| e.binary_search(id).is_err()).collect();
    if nq > np && !p_only.is_empty() {
        let sets: Vec<Bits> = shared.iter().map(|id| qprime.a(*id).expect("shared").clone()).collect();
        let mut blocks: Vec<Vec<u64>> = Vec::new();
        for_each_trace(&shared, &sets, nq, |f, b| {
            if f.dom_len() == shared.len() {
                blocks.push(b.members().filter(|&j| j >= np).collect());
            }
        });
        for block in blocks {
            for (ell, id) in p_only.iter().enumerate() {
                let (period, half) = (1u64 << (ell + 1), 1u64 << ell);
                let target = a.get_mut(id).expect("present");
                for (j, &x) in block.iter().enumerate() {
                    if (j as u64) % period < half {
                        target.set(x, true);
                    }
                }
            }
        }
    }

    // second fill: [n^q', n)
    let q_only: Vec<u64> = qprime.ids().iter().copied().filter(|id| !shared.contains(id)).collect();
    let order = phase_two_order(&shared, &p_only, &q_only);
    debug_assert_eq!(order.len(), ids.len());
    for (ell, id) in order.iter().enumerate() {
        let target = a.get_mut(id).expect("present");
        for j in phase_two_members(nq, n, ell) {
            target.set(j, true);
        }
    }

    let q = Condition::new(ids, n, a, eps)?;
    if let Some(v) = validate(&q)?.into_iter().next() {
        return Err(ForcingError::Postcondition(format!("result invalid: {v}")));
    }
    if let Some(v) = leq(&q, p)?.failed {
        return Err(ForcingError::Postcondition(format!("result not below p: {v}")));
    }
    if let Some(v) = leq(&q, qprime)?.failed {
        return Err(ForcingError::Postcondition(format!("result not below q': {v}")));
    }
    Ok(q)
}

/// A common extension of two conditions of equal length that agree on
/// their shared ids and on the eps of partial functions over those ids.
pub fn amalgamate(p: &Condition, q: &Condition) -> Result<Condition> {
    if p.n() != q.n() {
        return Err(hyp(format!("lengths differ: {} and {}", p.n(), q.n())));
    }
    let shared: Vec<u64> = p.ids().iter().copied().filter(|id| q.ids().contains(id)).collect();
    for id in &shared {
        if p.a(*id) != q.a(*id) {
            return Err(hyp(format!("a_{id} differs")));
        }
    }
    for f in PartialFn::all_over(&shared) {
        if p.eps(&f) != q.eps(&f) {
            return Err(hyp(format!("eps({{{f}}}) differs")));
        }
    }
    extend(p, q.ids(), q, p.n(), p.eps_map())
}
