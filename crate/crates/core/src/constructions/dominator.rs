//! An infinitely-often bisecting set built from a function dominating the
//! enumeration of `X`.

use serde::Serialize;

use super::{ConstructionError, Result};
use crate::relations::bisects_infinitely_often;
use crate::sets::{IntervalPartition, Parity, SetSchema};

/// Domination `g(n) > f_X(n)` is checked for the arguments with
/// `g(n)` up to this value.
pub const DOMINATION_SCAN: u64 = 1 << 24;

#[derive(Debug, Clone, Serialize)]
pub struct DominatorWitness {
    pub x: SetSchema,
    pub g: Vec<u64>,
    /// `G(n) = g^(n+1)(0)` as far as it was needed.
    pub big_g: Vec<u64>,
    /// `Γ(0) = 0, Γ(1) = g(0), Γ(n+1) = G(Γ(0) + ... + Γ(n))`, up to the
    /// first value reaching the horizon.
    pub gamma: Vec<u64>,
    /// Union of the even-indexed intervals `[Γ(2k), Γ(2k+1))`.
    pub y: SetSchema,
    /// Arguments `n` with `g(n) <= f_X(n)`, among those with
    /// `g(n) <= DOMINATION_SCAN`.
    pub domination_violations: Vec<u64>,
    /// `|X ∩ [Γ(n), Γ(n+1))|` for each complete interval.
    pub interval_counts: Vec<u64>,
    /// Whether every interval `I_n` holds at least `Γ(n)` elements of `X`.
    pub counting_claim: bool,
    /// `n <= horizon` with `2|Y ∩ X ∩ n| = |X ∩ n|`.
    pub hits: Vec<u64>,
}

/// Builds `Y` from `g` given as the table `g(0), g(1), ...`.
pub fn bisect_witness_from_dominator(x: &SetSchema, g: &[u64], horizon: u64) -> Result<DominatorWitness> {
    if g.is_empty() || g[0] == 0 || g.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConstructionError::BadTable);
    }
    if horizon == 0 {
        return Err(ConstructionError::HorizonTooSmall(0));
    }
    let at = |n: u64| -> Result<u64> {
        g.get(n as usize).copied().ok_or(ConstructionError::TableTooShort { needed: n })
    };
    let mut big_g = vec![g[0]];
    let mut gamma = vec![0u64, g[0]];
    let mut sigma: u64 = g[0];
    while *gamma.last().expect("nonempty") < horizon {
        while big_g.len() as u64 <= sigma {
            let prev = *big_g.last().expect("nonempty");
            big_g.push(at(prev)?);
        }
        let next = big_g[sigma as usize];
        gamma.push(next);
        sigma = sigma.checked_add(next).ok_or(ConstructionError::TableTooShort { needed: u64::MAX })?;
    }
    let y = SetSchema::intervals(IntervalPartition::from_table(gamma.clone())?, Parity::Even);

    // g(n) > f_X(n) iff |X ∩ g(n)| > n.
    let reach = g.iter().copied().take_while(|&v| v <= DOMINATION_SCAN).last().unwrap_or(0);
    let bits = x.indicator(reach)?;
    let mut prefix = Vec::with_capacity(bits.len() + 1);
    prefix.push(0u64);
    for b in bits {
        prefix.push(prefix.last().expect("nonempty") + b as u64);
    }
    let domination_violations = g
        .iter()
        .enumerate()
        .take_while(|(_, &v)| v <= reach)
        .filter(|(n, &v)| prefix[v as usize] <= *n as u64)
        .map(|(n, _)| n as u64)
        .collect();

    let mut interval_counts = Vec::new();
    let mut counting_claim = true;
    for (n, w) in gamma.windows(2).enumerate() {
        let c = x.count_below(w[1])? - x.count_below(w[0])?;
        counting_claim &= c >= gamma[n];
        interval_counts.push(c);
    }
    let hits = bisects_infinitely_often(&y, x, horizon).map_err(|e| match e {
        crate::relations::RelationError::Set(s) => ConstructionError::Set(s),
        other => ConstructionError::Precondition(other.to_string()),
    })?;
    Ok(DominatorWitness {
        x: x.clone(),
        g: g.to_vec(),
        big_g,
        gamma,
        y,
        domination_violations,
        interval_counts,
        counting_claim,
        hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(len: u64, f: impl Fn(u64) -> u64) -> Vec<u64> {
        (0..len).map(f).collect()
    }

    #[test]
    fn successor_example() {
        let w = bisect_witness_from_dominator(&SetSchema::omega(), &table(64, |n| n + 1), 8).unwrap();
        assert_eq!(w.gamma, vec![0, 1, 2, 4, 8]);
        let members: Vec<u64> = (0..8).filter(|&n| w.y.contains(n).unwrap()).collect();
        assert_eq!(members, vec![0, 2, 3]);
        assert_eq!(w.hits, vec![2, 6]);
        assert!(w.domination_violations.is_empty());
        assert!(w.counting_claim);
    }

    #[test]
    fn doubling_example() {
        let w = bisect_witness_from_dominator(&SetSchema::omega(), &table(1 << 18, |n| 2 * n + 2), 50).unwrap();
        assert!(!w.hits.is_empty());
        assert!(w.counting_claim);
    }

    #[test]
    fn bad_tables() {
        assert!(matches!(
            bisect_witness_from_dominator(&SetSchema::omega(), &[1, 1, 2], 8),
            Err(ConstructionError::BadTable)
        ));
        assert!(matches!(
            bisect_witness_from_dominator(&SetSchema::omega(), &[0, 1, 2], 8),
            Err(ConstructionError::BadTable)
        ));
        assert!(matches!(
            bisect_witness_from_dominator(&SetSchema::omega(), &[1, 2, 3], 1000),
            Err(ConstructionError::TableTooShort { .. })
        ));
    }

    #[test]
    fn sparse_x_with_dominating_g() {
        // X = multiples of 3, f_X(n) = 3n, g(n) = 3n + 1 dominates.
        let x = SetSchema::multiples_of(3);
        let w = bisect_witness_from_dominator(&x, &table(1 << 12, |n| 3 * n + 1), 300).unwrap();
        assert!(w.domination_violations.is_empty());
        assert!(w.counting_claim);
        assert!(w.hits.len() >= 2);
        // a non-dominating table is reported, not rejected
        let w = bisect_witness_from_dominator(&x, &table(1 << 12, |n| n + 1), 100).unwrap();
        assert!(!w.domination_violations.is_empty());
    }
}
