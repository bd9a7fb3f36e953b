//! A finite condition algebra for growing families of sets whose Boolean
//! combinations keep prescribed densities: validation, order, restriction,
//! extension, amalgamation and a scheduled generic run.
//!
//! A condition is `(F, n, a, eps)`: a finite set of index ids, a length,
//! one subset `a_α ⊆ [0, n)` per id and a positive rational for every
//! partial function `f: F ⇀ {0, 1}`.

mod bitset;
mod condition;
mod extend;
mod run;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use bitset::Bits;
pub use condition::{boolean_trace, leq, restrict, validate, BooleanTrace, Clause, LeqResult, Violation};
pub use extend::{amalgamate, extend, phase_two_members, phase_two_order};
pub use run::{generic_run, replay, rounds_text, schedule, C5Row, RoundReport, RunReport, Step, REPORT_DOMAIN_CAP, SHRINK_LEVELS};

use crate::rational::{format_rational, parse_rational, Rational};

/// Largest `|F|` accepted anywhere; partial-function tables have `3^|F|`
/// entries.
pub const MAX_INDICES: usize = 12;

/// Value given to partial functions that no input constrains.
pub const FRESH_EPS: u64 = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ForcingError {
    #[error("malformed condition: {0}")]
    Malformed(String),
    #[error("invalid condition, clause {clause}: {detail}")]
    Invalid { clause: Clause, detail: String },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("length overflow while choosing n")]
    Overflow,
    #[error("extension failed its own check: {0}")]
    Postcondition(String),
    #[error("round budget of {0} exhausted before every index was added")]
    Budget(usize),
    #[error("bad partial function {0:?}")]
    BadPartialFn(String),
}

pub type Result<T, E = ForcingError> = std::result::Result<T, E>;

/// A partial function from ids to `{0, 1}`, sorted by id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PartialFn(Vec<(u64, bool)>);

impl PartialFn {
    pub fn empty() -> Self {
        PartialFn(Vec::new())
    }

    pub fn new(mut pairs: Vec<(u64, bool)>) -> Result<Self> {
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(ForcingError::BadPartialFn(format!("{pairs:?}")));
        }
        Ok(PartialFn(pairs))
    }

    pub fn pairs(&self) -> &[(u64, bool)] {
        &self.0
    }

    pub fn dom_len(&self) -> usize {
        self.0.len()
    }

    pub fn domain(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().map(|p| p.0)
    }

    pub fn get(&self, id: u64) -> Option<bool> {
        self.0.binary_search_by_key(&id, |p| p.0).ok().map(|i| self.0[i].1)
    }

    pub fn domain_within(&self, ids: &[u64]) -> bool {
        self.domain().all(|d| ids.binary_search(&d).is_ok())
    }

    /// Restriction to `ids` (sorted).
    pub fn restrict(&self, ids: &[u64]) -> Self {
        PartialFn(self.0.iter().copied().filter(|p| ids.binary_search(&p.0).is_ok()).collect())
    }

    pub fn is_subset_of(&self, other: &PartialFn) -> bool {
        self.0.iter().all(|&(k, v)| other.get(k) == Some(v))
    }

    /// Copies with one entry removed.
    pub fn predecessors(&self) -> impl Iterator<Item = PartialFn> + '_ {
        (0..self.0.len()).map(|i| {
            let mut v = self.0.clone();
            v.remove(i);
            PartialFn(v)
        })
    }

    /// Every partial function with domain inside `ids` (sorted).
    pub fn all_over(ids: &[u64]) -> Vec<PartialFn> {
        let mut out = vec![PartialFn::empty()];
        for &id in ids {
            let mut next = Vec::with_capacity(out.len() * 3);
            for f in out {
                for v in [None, Some(false), Some(true)] {
                    let mut g = f.0.clone();
                    if let Some(v) = v {
                        g.push((id, v));
                    }
                    next.push(PartialFn(g));
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// Every total function on `ids`.
    pub fn total_over(ids: &[u64]) -> Vec<PartialFn> {
        let mut out = vec![PartialFn::empty()];
        for &id in ids {
            out = out
                .into_iter()
                .flat_map(|f| {
                    [false, true].into_iter().map(move |v| {
                        let mut g = f.0.clone();
                        g.push((id, v));
                        PartialFn(g)
                    })
                })
                .collect();
        }
        out
    }

    pub fn union(&self, other: &PartialFn) -> Result<PartialFn> {
        let mut v = self.0.clone();
        for &(k, b) in &other.0 {
            match self.get(k) {
                Some(c) if c != b => return Err(ForcingError::BadPartialFn(format!("{self} ∪ {other}"))),
                Some(_) => {}
                None => v.push((k, b)),
            }
        }
        v.sort_unstable();
        Ok(PartialFn(v))
    }
}

impl fmt::Display for PartialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}:{}", *v as u8)?;
        }
        Ok(())
    }
}

impl Serialize for PartialFn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for PartialFn {
    type Err = ForcingError;

    /// `"5:1,9:0"`; the empty string is the empty function.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "{}" {
            return Ok(PartialFn::empty());
        }
        let bad = || ForcingError::BadPartialFn(s.to_string());
        let pairs = s
            .split(',')
            .map(|part| {
                let (k, v) = part.trim().split_once(':').ok_or_else(bad)?;
                let k: u64 = k.trim().parse().map_err(|_| bad())?;
                let v = match v.trim() {
                    "0" => false,
                    "1" => true,
                    _ => return Err(bad()),
                };
                Ok((k, v))
            })
            .collect::<Result<Vec<_>>>()?;
        PartialFn::new(pairs)
    }
}

/// `p = (F, n, a, eps)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    ids: Vec<u64>,
    n: u64,
    a: BTreeMap<u64, Bits>,
    eps: BTreeMap<PartialFn, Rational>,
}

impl Condition {
    /// Checks the shape only: `dom(a) = F`, every `a_α ⊆ [0, n)`, eps
    /// keyed by partial functions over `F`. The density clauses are left to
    /// [`validate`].
    pub fn new(
        ids: Vec<u64>,
        n: u64,
        a: BTreeMap<u64, Bits>,
        eps: BTreeMap<PartialFn, Rational>,
    ) -> Result<Self> {
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != ids.len() {
            return Err(ForcingError::Malformed("duplicate ids in F".into()));
        }
        if sorted.len() > MAX_INDICES {
            return Err(ForcingError::Malformed(format!("|F| above {MAX_INDICES}")));
        }
        if n == 0 {
            return Err(ForcingError::Malformed("n must be at least 1".into()));
        }
        if !a.keys().copied().eq(sorted.iter().copied()) {
            return Err(ForcingError::Malformed("dom(a) differs from F".into()));
        }
        if let Some((k, _)) = a.iter().find(|(_, b)| b.len() != n) {
            return Err(ForcingError::Malformed(format!("a_{k} not stored over [0, {n})")));
        }
        if let Some(f) = eps.keys().find(|f| !f.domain_within(&sorted)) {
            return Err(ForcingError::Malformed(format!("eps key {f} leaves F")));
        }
        Ok(Condition { ids: sorted, n, a, eps })
    }

    /// `F = ∅`, the given `n`, `eps(∅) = eps0`.
    pub fn trivial(n: u64, eps0: Rational) -> Result<Self> {
        let mut eps = BTreeMap::new();
        eps.insert(PartialFn::empty(), eps0);
        Condition::new(Vec::new(), n, BTreeMap::new(), eps)
    }

    /// Builds from member lists.
    pub fn from_members(
        n: u64,
        a: impl IntoIterator<Item = (u64, Vec<u64>)>,
        eps: BTreeMap<PartialFn, Rational>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (id, members) in a {
            let bits = Bits::from_members(n, members)
                .ok_or_else(|| ForcingError::Malformed(format!("a_{id} leaves [0, {n})")))?;
            if map.insert(id, bits).is_some() {
                return Err(ForcingError::Malformed(format!("a_{id} given twice")));
            }
        }
        Condition::new(map.keys().copied().collect(), n, map, eps)
    }

    /// `eps(f) = value` for every partial `f` over `ids`.
    pub fn uniform_eps(ids: &[u64], value: &Rational) -> BTreeMap<PartialFn, Rational> {
        let mut sorted = ids.to_vec();
        sorted.sort_unstable();
        PartialFn::all_over(&sorted).into_iter().map(|f| (f, value.clone())).collect()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn a(&self, id: u64) -> Option<&Bits> {
        self.a.get(&id)
    }

    pub fn a_map(&self) -> &BTreeMap<u64, Bits> {
        &self.a
    }

    pub fn eps(&self, f: &PartialFn) -> Option<&Rational> {
        self.eps.get(f)
    }

    pub fn eps_map(&self) -> &BTreeMap<PartialFn, Rational> {
        &self.eps
    }

    /// `eps(∅)`.
    pub fn eps0(&self) -> Option<&Rational> {
        self.eps.get(&PartialFn::empty())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("condition serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ForcingError::Malformed(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct ConditionJson {
    #[serde(rename = "F")]
    ids: Vec<u64>,
    n: u64,
    a: BTreeMap<String, Vec<u64>>,
    eps: Vec<(String, String)>,
}

impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConditionJson {
            ids: self.ids.clone(),
            n: self.n,
            a: self.a.iter().map(|(k, b)| (k.to_string(), b.members().collect())).collect(),
            eps: self.eps.iter().map(|(f, e)| (f.to_string(), format_rational(e))).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Condition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = ConditionJson::deserialize(d)?;
        let mut eps = BTreeMap::new();
        for (f, e) in raw.eps {
            let f: PartialFn = f.parse().map_err(D::Error::custom)?;
            let e = parse_rational(&e).map_err(D::Error::custom)?;
            if eps.insert(f.clone(), e).is_some() {
                return Err(D::Error::custom(format!("eps given twice for {f:?}")));
            }
        }
        let mut a = Vec::new();
        for (k, v) in raw.a {
            let k: u64 = k.parse().map_err(|_| D::Error::custom(format!("bad id {k:?}")))?;
            a.push((k, v));
        }
        let c = Condition::from_members(raw.n, a, eps).map_err(D::Error::custom)?;
        let mut listed = raw.ids.clone();
        listed.sort_unstable();
        if listed != c.ids {
            return Err(D::Error::custom("F differs from dom(a)"));
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn partial_fn_text() {
        let f: PartialFn = "9:0,5:1".parse().unwrap();
        assert_eq!(f.to_string(), "5:1,9:0");
        assert_eq!(f.get(9), Some(false));
        assert!("".parse::<PartialFn>().unwrap().pairs().is_empty());
        assert!("5:1,5:0".parse::<PartialFn>().is_err());
        assert!("5:2".parse::<PartialFn>().is_err());
        assert_eq!(PartialFn::all_over(&[1, 2, 3]).len(), 27);
        assert_eq!(PartialFn::total_over(&[1, 2, 3]).len(), 8);
        assert_eq!(PartialFn::total_over(&[]).len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let mut eps = Condition::uniform_eps(&[5], &int(16));
        eps.insert("5:1".parse().unwrap(), ratio(33, 2));
        let c = Condition::from_members(8, [(5, vec![0, 2, 4, 6])], eps).unwrap();
        let text = c.to_json();
        assert!(text.contains("\"F\":[5]"));
        assert!(text.contains("[\"5:1\",\"33/2\"]"));
        assert_eq!(Condition::from_json(&text).unwrap(), c);
        assert!(Condition::from_json(r#"{"F":[5],"n":8,"a":{"5":[9]},"eps":[]}"#).is_err());
        assert!(Condition::from_json(r#"{"F":[6],"n":8,"a":{"5":[1]},"eps":[]}"#).is_err());
    }

    #[test]
    fn malformed_shapes() {
        assert!(Condition::from_members(0, [], BTreeMap::new()).is_err());
        let mut eps = BTreeMap::new();
        eps.insert("3:1".parse().unwrap(), int(1));
        assert!(Condition::from_members(4, [(5, vec![])], eps).is_err());
    }
}
