//! Block traces and the density-ratio bound behind a set that a Cohen-style
//! block family cannot split in the product sense.
//!
//! Blocks are `[0, L_0)` and `[L_{k-1}, L_k)` for `k >= 1`. Each block
//! carries a decided pattern `A_k`; `Y` is the complement of `A_k` inside
//! every block, so a set `X` agreeing with `A_n` on block `n` meets `Y`
//! only below `L_{n-1}` there.

use serde::Serialize;

use super::{pre, ConstructionError, Result};
use crate::rational::{serde_pq, Rational};
use crate::sets::seeded::SplitMix;
use crate::sets::SetSchema;

/// `(7L + Δ) / (3 (3L + Δ))`.
pub fn cohen_block_ratio_bound(l_prev: u64, delta: u64) -> Result<Rational> {
    if l_prev == 0 {
        return Err(pre("L_prev must be at least 1"));
    }
    let (l, d) = (l_prev as u128, delta as u128);
    let num = 7 * l + d;
    let den = 3 * (3 * l + d);
    Ok(Rational::new(num.into(), den.into()))
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockFamilyTrace {
    /// `L_0 < L_1 < ... < L_K`.
    pub boundaries: Vec<u64>,
    /// `A_k` as membership bits over its block.
    pub blocks: Vec<Vec<bool>>,
}

impl BlockFamilyTrace {
    pub fn block_range(&self, k: usize) -> (u64, u64) {
        let lo = if k == 0 { 0 } else { self.boundaries[k - 1] };
        (lo, self.boundaries[k])
    }

    /// Zeros and ones of `A_k`.
    pub fn counts(&self, k: usize) -> (u64, u64) {
        let ones = self.blocks[k].iter().filter(|&&b| b).count() as u64;
        (self.blocks[k].len() as u64 - ones, ones)
    }

    /// Block 0 needs at least one of each bit, block `k >= 1` at least
    /// `3 L_{k-1}` of each, with equality on one side.
    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(pre("empty trace"));
        }
        if self.blocks.len() != self.boundaries.len() {
            return Err(pre("block and boundary counts differ"));
        }
        let bad = |block: usize, detail: String| ConstructionError::TraceInvariant { block, detail };
        for k in 0..self.blocks.len() {
            let (lo, hi) = self.block_range(k);
            if hi <= lo || self.blocks[k].len() as u64 != hi - lo {
                return Err(bad(k, format!("block length does not match [{lo}, {hi})")));
            }
            let need = if k == 0 { 1 } else { 3 * lo };
            let (o, i) = self.counts(k);
            if o < need || i < need {
                return Err(bad(k, format!("{o} zeros and {i} ones, need {need} of each")));
            }
            if o != need && i != need {
                return Err(bad(k, format!("neither count equals {need}")));
            }
        }
        Ok(())
    }

    pub fn end(&self) -> u64 {
        *self.boundaries.last().unwrap_or(&0)
    }

    /// `X` equal to `A_k` on every block.
    pub fn planted(&self) -> Vec<bool> {
        self.blocks.concat()
    }
}

/// A valid trace of `blocks` blocks whose larger count exceeds the smaller
/// by at most `max_delta`.
pub fn random_block_trace(blocks: usize, seed: u64, max_delta: u64) -> Result<BlockFamilyTrace> {
    if blocks == 0 {
        return Err(pre("need at least one block"));
    }
    let mut rng = SplitMix::new(seed);
    let mut boundaries = Vec::with_capacity(blocks);
    let mut out = Vec::with_capacity(blocks);
    let mut lo = 0u64;
    for k in 0..blocks {
        let need = if k == 0 { 1 } else { 3 * lo };
        let more = need + rng.below(max_delta.saturating_add(1).max(1));
        let (o, i) = if rng.below(2) == 0 { (need, more) } else { (more, need) };
        let len = o.checked_add(i).filter(|&l| lo.checked_add(l).is_some()).ok_or_else(|| pre("trace too long"))?;
        let mut bits: Vec<bool> = (0..len).map(|j| j >= o).collect();
        for j in (1..bits.len()).rev() {
            let r = rng.below(j as u64 + 1) as usize;
            bits.swap(j, r);
        }
        lo += len;
        boundaries.push(lo);
        out.push(bits);
    }
    Ok(BlockFamilyTrace { boundaries, blocks: out })
}

#[derive(Debug, Clone, Serialize)]
pub struct AntisplitRow {
    pub n: usize,
    #[serde(rename = "L_n")]
    pub l_n: u64,
    pub zeros: u64,
    pub ones: u64,
    /// `|X ∩ Y ∩ L_n| <= L_{n-1}`.
    pub meet_small: bool,
    /// `|X ∩ L_n| >= I_n`.
    pub x_large: bool,
    /// `|Y ∩ L_n| >= O_n`.
    pub y_large: bool,
    /// `d(X ∩ Y) / (d(X) d(Y))` at `L_n`.
    #[serde(with = "serde_pq")]
    pub ratio: Rational,
    /// `L_{n-1} L_n / (O_n I_n)`.
    #[serde(with = "serde_pq")]
    pub chain: Rational,
    #[serde(with = "serde_pq")]
    pub bound: Rational,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AntisplitReport {
    pub y: SetSchema,
    /// Blocks `n >= 1` on which `X` agrees with `A_n`.
    pub rows: Vec<AntisplitRow>,
}

impl AntisplitReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Builds `Y` from the trace and, for every block `n >= 1` where `x`
/// agrees with `A_n`, checks the three density inequalities at `L_n` and
/// the resulting ratio chain against `cohen_block_ratio_bound`.
pub fn cohen_antisplit_witness(trace: &BlockFamilyTrace, x: &SetSchema) -> Result<AntisplitReport> {
    trace.validate()?;
    let end = trace.end();
    let members: Vec<u64> = trace.planted().iter().enumerate().filter(|(_, &b)| !b).map(|(i, _)| i as u64).collect();
    let y = SetSchema::finite(members);
    let xs = x.indicator(end)?;
    let ys = y.indicator(end)?;
    let mut rows = Vec::new();
    let (mut cx, mut cy, mut cxy) = (0u64, 0u64, 0u64);
    for k in 0..trace.blocks.len() {
        let (lo, hi) = trace.block_range(k);
        for j in lo as usize..hi as usize {
            cx += xs[j] as u64;
            cy += ys[j] as u64;
            cxy += (xs[j] && ys[j]) as u64;
        }
        if k == 0 || xs[lo as usize..hi as usize] != trace.blocks[k][..] {
            continue;
        }
        let (o, i) = trace.counts(k);
        let ratio_val = Rational::new((cxy as u128 * hi as u128).into(), (cx as u128 * cy as u128).into());
        let chain = Rational::new((lo as u128 * hi as u128).into(), (o as u128 * i as u128).into());
        let bound = cohen_block_ratio_bound(lo, o.abs_diff(i))?;
        let (meet_small, x_large, y_large) = (cxy <= lo, cx >= i, cy >= o);
        let holds = meet_small && x_large && y_large && ratio_val <= chain && chain <= bound;
        rows.push(AntisplitRow {
            n: k,
            l_n: hi,
            zeros: o,
            ones: i,
            meet_small,
            x_large,
            y_large,
            ratio: ratio_val,
            chain,
            bound,
            holds,
        });
    }
    Ok(AntisplitReport { y, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn seven_ninths() -> Rational {
        ratio(7, 9)
    }
    use proptest::prelude::*;

    #[test]
    fn bound_values() {
        for l in 1..=100 {
            assert_eq!(cohen_block_ratio_bound(l, 0).unwrap(), seven_ninths());
        }
        assert_eq!(cohen_block_ratio_bound(1, 2).unwrap(), ratio(3, 5));
        assert!(cohen_block_ratio_bound(0, 1).is_err());
        let far = cohen_block_ratio_bound(1, 1 << 40).unwrap();
        assert!(far < seven_ninths() && far > ratio(1, 3));
    }

    #[test]
    fn two_block_equality_case() {
        // block 0: one zero, one one; block 1: six of each.
        let block1 = (0..12).map(|j| j % 2 == 0).collect();
        let t = BlockFamilyTrace { boundaries: vec![2, 14], blocks: vec![vec![true, false], block1] };
        let x = SetSchema::finite(t.planted().iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64).collect());
        let rep = cohen_antisplit_witness(&t, &x).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.rows[0].bound, seven_ninths());
        assert_eq!(rep.rows[0].chain, ratio(2 * 14, 36));
        assert!(rep.all_hold());
    }

    #[test]
    fn rejects_bad_traces() {
        let t = BlockFamilyTrace { boundaries: vec![], blocks: vec![] };
        assert!(cohen_antisplit_witness(&t, &SetSchema::omega()).is_err());
        let t = BlockFamilyTrace { boundaries: vec![2, 6], blocks: vec![vec![true, false], vec![true, false, true, false]] };
        assert!(matches!(
            cohen_antisplit_witness(&t, &SetSchema::omega()),
            Err(ConstructionError::TraceInvariant { block: 1, .. })
        ));
        let t = BlockFamilyTrace { boundaries: vec![3], blocks: vec![vec![true, false, true]] };
        assert!(t.validate().is_ok());
        let t = BlockFamilyTrace { boundaries: vec![4], blocks: vec![vec![true, false, true, false]] };
        assert!(t.validate().is_err());
    }

    #[test]
    fn unplanted_blocks_are_skipped() {
        let t = random_block_trace(4, 9, 5).unwrap();
        let rep = cohen_antisplit_witness(&t, &SetSchema::empty()).unwrap();
        assert!(rep.rows.is_empty());
    }

    proptest! {
        #[test]
        fn bound_decreasing(l in 1u64..10_000, d in 0u64..10_000) {
            let a = cohen_block_ratio_bound(l, d).unwrap();
            let b = cohen_block_ratio_bound(l, d + 1).unwrap();
            prop_assert!(b < a);
            prop_assert!(a <= seven_ninths());
        }

        #[test]
        fn planted_blocks_respect_bound(seed in any::<u64>(), blocks in 2usize..6, delta in 0u64..40, noise in any::<u64>()) {
            let t = random_block_trace(blocks, seed, delta).unwrap();
            // X agrees with A_n on a random subset of blocks, random elsewhere.
            let mut rng = SplitMix::new(noise);
            let mut xs = Vec::new();
            let mut planted = Vec::new();
            for k in 0..blocks {
                let (lo, _) = t.block_range(k);
                let keep = rng.below(2) == 0;
                if keep && k > 0 {
                    planted.push(k);
                }
                for (j, &b) in t.blocks[k].iter().enumerate() {
                    let bit = if keep { b } else { rng.below(2) == 0 };
                    if bit {
                        xs.push(lo + j as u64);
                    }
                }
            }
            let rep = cohen_antisplit_witness(&t, &SetSchema::finite(xs)).unwrap();
            let got: Vec<usize> = rep.rows.iter().map(|r| r.n).collect();
            for n in &planted {
                prop_assert!(got.contains(n));
            }
            for row in &rep.rows {
                prop_assert!(row.holds, "{:?}", row);
                prop_assert_eq!(&row.chain, &row.bound);
            }
        }
    }
}
