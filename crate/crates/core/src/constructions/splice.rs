//! Two splicing bounds on densities of unions, as predicates that first
//! verify their hypotheses, plus seeded generators of random instances that
//! satisfy them.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use super::{pre, Result};
use crate::rational::{cmp_frac, half, int, ratio, OpenInterval, Rational};
use crate::sets::seeded::SplitMix;
use crate::sets::SetSchema;

/// `R`, `S` disjoint with `|S| = c|R|`, `A ⊆ R`, `B ⊆ S` and
/// `|B|/|S|` within `eps` of 1/2. Returns whether `|A ∪ B| / |R ∪ S|` lies
/// within `eps + 1/c` of 1/2; hypothesis failures are errors.
pub fn union_splice_conclusion(
    r: &[u64],
    s: &[u64],
    a: &[u64],
    b: &[u64],
    eps: &Rational,
    c: &Rational,
) -> Result<bool> {
    let (rs, ss): (BTreeSet<u64>, BTreeSet<u64>) = (r.iter().copied().collect(), s.iter().copied().collect());
    let (as_, bs): (BTreeSet<u64>, BTreeSet<u64>) = (a.iter().copied().collect(), b.iter().copied().collect());
    if !rs.is_disjoint(&ss) {
        return Err(pre("R and S intersect"));
    }
    if !as_.is_subset(&rs) {
        return Err(pre("A is not a subset of R"));
    }
    if !bs.is_subset(&ss) {
        return Err(pre("B is not a subset of S"));
    }
    if *c <= Rational::one() {
        return Err(pre("c must exceed 1"));
    }
    if rs.is_empty() {
        return Err(pre("R is empty"));
    }
    if int(ss.len() as u64) != c * int(rs.len() as u64) {
        return Err(pre("|S| differs from c|R|"));
    }
    if !eps.is_positive() {
        return Err(pre("eps must be positive"));
    }
    if !OpenInterval::around(&half(), eps).contains_counts(bs.len() as u64, ss.len() as u64) {
        return Err(pre("|B|/|S| outside the eps window"));
    }
    let radius = eps + c.recip();
    let union = as_.len() as u64 + bs.len() as u64;
    let total = rs.len() as u64 + ss.len() as u64;
    Ok(OpenInterval::around(&half(), &radius).contains_counts(union, total))
}

#[derive(Debug, Clone)]
pub struct UnionSpliceInstance {
    pub r: Vec<u64>,
    pub s: Vec<u64>,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub eps: Rational,
    pub c: Rational,
}

fn shuffle(rng: &mut SplitMix, v: &mut [u64]) {
    for i in (1..v.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        v.swap(i, j);
    }
}

/// A random instance with `|R| ∈ [1, 50]`, `c ∈ {2, ..., 10}`, `R` and `S`
/// scattered over a common range, `A` an arbitrary subset of `R` and `B`
/// drawn from the admissible sizes.
pub fn union_splice_instance(seed: u64) -> UnionSpliceInstance {
    let mut rng = SplitMix::new(seed);
    let r_len = 1 + rng.below(50);
    let c = 2 + rng.below(9);
    let s_len = c * r_len;
    let mut pool: Vec<u64> = (0..2 * (r_len + s_len)).collect();
    shuffle(&mut rng, &mut pool);
    let mut r: Vec<u64> = pool[..r_len as usize].to_vec();
    let mut s: Vec<u64> = pool[r_len as usize..(r_len + s_len) as usize].to_vec();
    // A: each element kept with a per-instance probability.
    let keep = rng.below(5);
    let mut a: Vec<u64> = r.iter().copied().filter(|_| rng.below(4) < keep).collect();
    let mut k = 1 + rng.below(50);
    let (eps, sizes) = loop {
        let eps = ratio(k, 100);
        let window = OpenInterval::around(&half(), &eps);
        let sizes: Vec<u64> = (0..=s_len).filter(|&m| window.contains_counts(m, s_len)).collect();
        if !sizes.is_empty() {
            break (eps, sizes);
        }
        k += 1;
    };
    let m = sizes[rng.below(sizes.len() as u64) as usize];
    shuffle(&mut rng, &mut s);
    let mut b = s[..m as usize].to_vec();
    r.sort_unstable();
    s.sort_unstable();
    a.sort_unstable();
    b.sort_unstable();
    UnionSpliceInstance { r, s, a, b, eps, c: int(c) }
}

/// Checks, for every `m <= l <= n`, that `(R ∩ m) ∪ (S ∩ [m, l))` has
/// density within `3 eps` of `r` at `l`, given that `R` has density within
/// `eps` of `r` at `m` and `S` has density within `eps` of `r` at every
/// `l ∈ [m, n]`.
pub fn prefix_splice_conclusion(
    big_r: &SetSchema,
    big_s: &SetSchema,
    r: &Rational,
    eps: &Rational,
    m: u64,
    n: u64,
) -> Result<bool> {
    if !r.is_positive() || *r >= Rational::one() {
        return Err(pre("r must lie in (0, 1)"));
    }
    if !eps.is_positive() {
        return Err(pre("eps must be positive"));
    }
    if m == 0 || m >= n {
        return Err(pre("need 1 <= m < n"));
    }
    let narrow = OpenInterval::around(r, eps);
    let rb = big_r.indicator(m)?;
    let sb = big_s.indicator(n)?;
    let r_m = rb.iter().filter(|&&x| x).count() as u64;
    if !narrow.contains_counts(r_m, m) {
        return Err(pre("|R ∩ m|/m outside the window"));
    }
    let mut s_count = sb[..m as usize].iter().filter(|&&x| x).count() as u64;
    let mut spliced = r_m;
    let wide = OpenInterval::around(r, &(eps * int(3)));
    let mut all = true;
    for l in m..=n {
        if l > m {
            let bit = sb[l as usize - 1] as u64;
            s_count += bit;
            spliced += bit;
        }
        if !narrow.contains_counts(s_count, l) {
            return Err(pre(format!("|S ∩ {l}|/{l} outside the window")));
        }
        all &= wide.contains_counts(spliced, l);
    }
    Ok(all)
}

#[derive(Debug, Clone)]
pub struct PrefixSpliceInstance {
    pub big_r: SetSchema,
    pub big_s: SetSchema,
    pub r: Rational,
    pub eps: Rational,
    pub m: u64,
    pub n: u64,
}

/// Adjusts a random prefix so its count at `len` lands in `window`.
fn fix_count(rng: &mut SplitMix, bits: &mut [bool], window: &OpenInterval) {
    let len = bits.len() as u64;
    let mut count = bits.iter().filter(|&&b| b).count() as u64;
    while !window.contains_counts(count, len) {
        let too_low = cmp_frac(&count.into(), &len.into(), window.lo()) != Ordering::Greater;
        let i = rng.below(len) as usize;
        if too_low && !bits[i] {
            bits[i] = true;
            count += 1;
        } else if !too_low && bits[i] {
            bits[i] = false;
            count -= 1;
        }
    }
}

fn to_set(bits: &[bool]) -> SetSchema {
    SetSchema::finite(bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64).collect())
}

/// A random instance: `r = a/b` with `b <= 16`, `eps = 1/k`, `m` large
/// enough for the windows to admit a count at every step, and `S` steered
/// to stay inside its window while drifting toward a random edge of it.
pub fn prefix_splice_instance(seed: u64) -> PrefixSpliceInstance {
    let mut rng = SplitMix::new(seed);
    let den = 2 + rng.below(15);
    let num = 1 + rng.below(den - 1);
    let r = ratio(num, den);
    let k = 2 + rng.below(39);
    let eps = ratio(1, k);
    // 2 eps (m + 1) > 1 keeps a feasible next count at every step.
    let m = k / 2 + 1 + rng.below(200);
    let n = m + 1 + rng.below(400);
    let window = OpenInterval::around(&r, &eps);
    let scale = 1u64 << 20;
    let p_of = |q: &Rational| -> u64 {
        let v = q * int(scale);
        let v = v.floor().to_integer();
        v.try_into().unwrap_or(0u64).min(scale)
    };
    // random prefixes with probability near r
    let pr = p_of(&r);
    let mut rb: Vec<bool> = (0..m).map(|_| rng.below(scale) < pr).collect();
    fix_count(&mut rng, &mut rb, &window);
    let mut sb: Vec<bool> = (0..m).map(|_| rng.below(scale) < pr).collect();
    fix_count(&mut rng, &mut sb, &window);
    // drift target: somewhere in the window, often near an edge
    let edge = match rng.below(3) {
        0 => &r - &eps,
        1 => &r + &eps,
        _ => r.clone(),
    };
    let edge = edge.max(Rational::zero()).min(Rational::one());
    let pd = p_of(&edge);
    let mut count = sb.iter().filter(|&&b| b).count() as u64;
    for l in m..n {
        let mut bit = rng.below(scale) < pd;
        if !window.contains_counts(count + bit as u64, l + 1) {
            bit = !bit;
        }
        count += bit as u64;
        sb.push(bit);
    }
    PrefixSpliceInstance { big_r: to_set(&rb), big_s: to_set(&sb), r, eps, m, n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::ConstructionError;

    #[test]
    fn union_splice_examples() {
        let r = [0, 1];
        let s = [2, 3, 4, 5, 6, 7];
        assert!(union_splice_conclusion(&r, &s, &r, &[2, 3, 4], &ratio(1, 10), &int(3)).unwrap());
        // A empty, B exactly half of S.
        assert!(union_splice_conclusion(&r, &s, &[], &[2, 3, 4], &ratio(1, 100), &int(3)).unwrap());
        assert!(matches!(
            union_splice_conclusion(&r, &s, &[], &[2], &ratio(1, 10), &int(3)),
            Err(ConstructionError::Precondition(_))
        ));
        assert!(union_splice_conclusion(&r, &s, &[], &[2, 3, 4], &ratio(1, 10), &int(2)).is_err());
        assert!(union_splice_conclusion(&r, &[1, 3, 4, 5, 6, 7], &[], &[3, 4, 5], &ratio(1, 10), &int(3)).is_err());
    }

    #[test]
    fn union_splice_generated_instances() {
        for seed in 0..2000 {
            let i = union_splice_instance(seed);
            assert!(union_splice_conclusion(&i.r, &i.s, &i.a, &i.b, &i.eps, &i.c).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn prefix_splice_examples() {
        let e = SetSchema::evens();
        assert!(prefix_splice_conclusion(&e, &e, &half(), &ratio(1, 8), 16, 64).unwrap());
        assert!(prefix_splice_conclusion(&e, &e, &half(), &ratio(1, 8), 64, 16).is_err());
        assert!(prefix_splice_conclusion(&e, &SetSchema::omega(), &half(), &ratio(1, 8), 16, 64).is_err());
        // R = evens against S = odds: both have density within 1/8 of 1/2
        // from 16 on; the spliced set is evens below 16 then odds.
        assert!(prefix_splice_conclusion(&e, &SetSchema::odds(), &half(), &ratio(1, 8), 16, 64).unwrap());
    }

    #[test]
    fn prefix_splice_generated_instances() {
        for seed in 0..2000 {
            let i = prefix_splice_instance(seed);
            let ok = prefix_splice_conclusion(&i.big_r, &i.big_s, &i.r, &i.eps, i.m, i.n);
            assert!(ok.unwrap(), "seed {seed}");
        }
    }
}
