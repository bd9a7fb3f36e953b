//! Finite descriptions of subsets of the naturals.
//!
//! A [`SetSchema`] is a small expression tree whose leaves are finite sets,
//! eventually periodic bit patterns, interval schemes and seeded coin flips.
//! Membership, counting and enumeration are exact; the only failure mode is
//! running out of a horizon budget.

mod parse;
mod partition;
pub mod seeded;

use std::fmt;
use std::str::FromStr;

pub use parse::{generator_text, ParseError};
pub use partition::{matches, BoundaryGenerator, ChoppedReal, IntervalPartition, Parity};

/// Largest combined period accepted when folding boolean combinations of
/// periodic schemas into one pattern.
pub const MAX_COMBINED_PERIOD: usize = 10_000_000;

/// Chunk size used by streaming scans.
const SCAN_CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SetError {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("budget exhausted: {what}")]
    BudgetExhausted { what: String },
    #[error("set has only {available} elements, element #{wanted} requested")]
    FiniteTooSmall { wanted: u64, available: u64 },
    #[error("periodic pattern needs a nonempty period")]
    EmptyPeriod,
    #[error("set must be infinite: {0}")]
    NotInfinite(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = SetError> = std::result::Result<T, E>;

/// A subset of the naturals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetSchema {
    /// Sorted, deduplicated elements.
    ExplicitFinite(Vec<u64>),
    /// `prefix` followed by `period` repeated forever.
    EventuallyPeriodic { prefix: Vec<bool>, period: Vec<bool> },
    /// Union of the intervals of `partition` whose index has the given parity.
    IntervalScheme { partition: IntervalPartition, parity: Parity },
    Complement(Box<SetSchema>),
    Union(Box<SetSchema>, Box<SetSchema>),
    Intersection(Box<SetSchema>, Box<SetSchema>),
    /// Each `n` present iff `seeded::bit(seed, n)`.
    Seeded(u64),
}

/// `prefix` then `period` forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicForm {
    pub prefix: Vec<bool>,
    pub period: Vec<bool>,
}

impl PeriodicForm {
    fn at(&self, n: usize) -> bool {
        if n < self.prefix.len() {
            self.prefix[n]
        } else {
            self.period[(n - self.prefix.len()) % self.period.len()]
        }
    }

    fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Option<Self> {
        let pre = self.prefix.len().max(other.prefix.len());
        let a = self.period.len();
        let b = other.period.len();
        let lcm = a / num_integer::gcd(a, b) * b;
        if lcm > MAX_COMBINED_PERIOD {
            return None;
        }
        let prefix = (0..pre).map(|n| op(self.at(n), other.at(n))).collect();
        let period = (pre..pre + lcm)
            .map(|n| op(self.at(n), other.at(n)))
            .collect();
        Some(Self { prefix, period })
    }

    pub fn ones_in_period(&self) -> usize {
        self.period.iter().filter(|&&b| b).count()
    }
}

impl SetSchema {
    pub fn finite(mut elements: Vec<u64>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        SetSchema::ExplicitFinite(elements)
    }

    pub fn empty() -> Self {
        SetSchema::ExplicitFinite(Vec::new())
    }

    pub fn periodic(prefix: Vec<bool>, period: Vec<bool>) -> Result<Self> {
        if period.is_empty() {
            return Err(SetError::EmptyPeriod);
        }
        Ok(SetSchema::EventuallyPeriodic { prefix, period })
    }

    pub fn omega() -> Self {
        SetSchema::EventuallyPeriodic { prefix: vec![], period: vec![true] }
    }

    pub fn evens() -> Self {
        Self::multiples_of(2)
    }

    pub fn odds() -> Self {
        SetSchema::EventuallyPeriodic { prefix: vec![], period: vec![false, true] }
    }

    /// `{0, k, 2k, ...}`; `k >= 1`.
    pub fn multiples_of(k: usize) -> Self {
        assert!(k >= 1, "multiples_of(0)");
        let mut period = vec![false; k];
        period[0] = true;
        SetSchema::EventuallyPeriodic { prefix: vec![], period }
    }

    /// Naturals congruent to one of `residues` modulo `modulus`.
    pub fn residues(modulus: usize, residues: &[usize]) -> Self {
        assert!(modulus >= 1);
        let mut period = vec![false; modulus];
        for &r in residues {
            period[r % modulus] = true;
        }
        SetSchema::EventuallyPeriodic { prefix: vec![], period }
    }

    pub fn intervals(partition: IntervalPartition, parity: Parity) -> Self {
        SetSchema::IntervalScheme { partition, parity }
    }

    pub fn seeded(seed: u64) -> Self {
        SetSchema::Seeded(seed)
    }

    pub fn complement(self) -> Self {
        SetSchema::Complement(Box::new(self))
    }

    pub fn union(self, other: Self) -> Self {
        SetSchema::Union(Box::new(self), Box::new(other))
    }

    pub fn intersection(self, other: Self) -> Self {
        SetSchema::Intersection(Box::new(self), Box::new(other))
    }

    pub fn contains(&self, n: u64) -> Result<bool> {
        Ok(match self {
            SetSchema::ExplicitFinite(xs) => xs.binary_search(&n).is_ok(),
            SetSchema::EventuallyPeriodic { prefix, period } => {
                let p = prefix.len() as u64;
                if n < p {
                    prefix[n as usize]
                } else {
                    period[((n - p) % period.len() as u64) as usize]
                }
            }
            SetSchema::IntervalScheme { partition, parity } => {
                parity.selects(partition.interval_of(n)?)
            }
            SetSchema::Complement(x) => !x.contains(n)?,
            SetSchema::Union(a, b) => a.contains(n)? || b.contains(n)?,
            SetSchema::Intersection(a, b) => a.contains(n)? && b.contains(n)?,
            SetSchema::Seeded(seed) => seeded::bit(*seed, n),
        })
    }

    /// Characteristic function on `[0, len)`.
    pub fn indicator(&self, len: u64) -> Result<Vec<bool>> {
        self.indicator_range(0, len)
    }

    /// Characteristic function on `[lo, hi)`.
    pub fn indicator_range(&self, lo: u64, hi: u64) -> Result<Vec<bool>> {
        if hi <= lo {
            return Ok(Vec::new());
        }
        let len = usize::try_from(hi - lo).map_err(|_| SetError::BudgetExhausted {
            what: format!("window [{lo}, {hi}) too large"),
        })?;
        Ok(match self {
            SetSchema::ExplicitFinite(xs) => {
                let mut out = vec![false; len];
                let start = xs.partition_point(|&x| x < lo);
                for &x in xs[start..].iter().take_while(|&&x| x < hi) {
                    out[(x - lo) as usize] = true;
                }
                out
            }
            SetSchema::EventuallyPeriodic { .. } | SetSchema::Seeded(_) => {
                (lo..hi).map(|n| self.contains(n)).collect::<Result<_>>()?
            }
            SetSchema::IntervalScheme { partition, parity } => {
                let mut out = Vec::with_capacity(len);
                let mut k = partition.interval_of(lo)?;
                let mut n = lo;
                while n < hi {
                    let (_, b) = partition.interval(k)?;
                    let end = b.min(hi);
                    out.resize(out.len() + (end - n) as usize, parity.selects(k));
                    n = end;
                    k += 1;
                }
                out
            }
            SetSchema::Complement(x) => {
                let mut v = x.indicator_range(lo, hi)?;
                v.iter_mut().for_each(|b| *b = !*b);
                v
            }
            SetSchema::Union(a, b) => {
                let mut v = a.indicator_range(lo, hi)?;
                let w = b.indicator_range(lo, hi)?;
                v.iter_mut().zip(w).for_each(|(x, y)| *x |= y);
                v
            }
            SetSchema::Intersection(a, b) => {
                let mut v = a.indicator_range(lo, hi)?;
                let w = b.indicator_range(lo, hi)?;
                v.iter_mut().zip(w).for_each(|(x, y)| *x &= y);
                v
            }
        })
    }

    /// `|X ∩ [0, n)|`.
    pub fn count_below(&self, n: u64) -> Result<u64> {
        match self {
            SetSchema::ExplicitFinite(xs) => Ok(xs.partition_point(|&x| x < n) as u64),
            SetSchema::EventuallyPeriodic { prefix, period } => {
                let p = prefix.len() as u64;
                if n <= p {
                    return Ok(prefix[..n as usize].iter().filter(|&&b| b).count() as u64);
                }
                let head = prefix.iter().filter(|&&b| b).count() as u64;
                let len = period.len() as u64;
                let ones = period.iter().filter(|&&b| b).count() as u64;
                let rest = n - p;
                let tail = period[..(rest % len) as usize].iter().filter(|&&b| b).count() as u64;
                Ok(head + (rest / len) * ones + tail)
            }
            SetSchema::IntervalScheme { partition, parity } => {
                let mut total = 0;
                let mut k = 0;
                loop {
                    let (a, b) = partition.interval(k)?;
                    if a >= n {
                        return Ok(total);
                    }
                    if parity.selects(k) {
                        total += b.min(n) - a;
                    }
                    k += 1;
                }
            }
            _ => {
                let mut total = 0;
                let mut lo = 0;
                while lo < n {
                    let hi = (lo + SCAN_CHUNK).min(n);
                    total += self.indicator_range(lo, hi)?.iter().filter(|&&b| b).count() as u64;
                    lo = hi;
                }
                Ok(total)
            }
        }
    }

    /// The element of index `k` (0-based) in increasing order, searched
    /// below `budget`.
    pub fn kth_element(&self, k: u64, budget: u64) -> Result<u64> {
        let found = match self {
            SetSchema::ExplicitFinite(xs) => *xs.get(k as usize).ok_or(SetError::FiniteTooSmall {
                wanted: k,
                available: xs.len() as u64,
            })?,
            SetSchema::EventuallyPeriodic { prefix, period } => {
                let head: Vec<u64> = (0..prefix.len() as u64)
                    .filter(|&i| prefix[i as usize])
                    .collect();
                if let Some(&x) = head.get(k as usize) {
                    x
                } else {
                    let ones: Vec<u64> = (0..period.len() as u64)
                        .filter(|&i| period[i as usize])
                        .collect();
                    if ones.is_empty() {
                        return Err(SetError::FiniteTooSmall {
                            wanted: k,
                            available: head.len() as u64,
                        });
                    }
                    let r = k - head.len() as u64;
                    let q = r / ones.len() as u64;
                    (period.len() as u64)
                        .checked_mul(q)
                        .and_then(|v| v.checked_add(prefix.len() as u64 + ones[(r % ones.len() as u64) as usize]))
                        .ok_or_else(|| SetError::BudgetExhausted {
                            what: format!("element #{k} overflows u64"),
                        })?
                }
            }
            _ => return self.scan_for_kth(k, budget),
        };
        if found >= budget {
            return Err(SetError::BudgetExhausted {
                what: format!("element #{k} of {self} is {found}, not below {budget}"),
            });
        }
        Ok(found)
    }

    fn scan_for_kth(&self, k: u64, budget: u64) -> Result<u64> {
        let mut seen = 0;
        let mut lo = 0;
        while lo < budget {
            let hi = lo.saturating_add(SCAN_CHUNK).min(budget);
            let bits = match self.indicator_range(lo, hi) {
                Ok(bits) => bits,
                Err(SetError::BudgetExhausted { .. }) if self.is_finite() == Some(true) => {
                    break;
                }
                Err(e) => return Err(e),
            };
            for (i, b) in bits.into_iter().enumerate() {
                if b {
                    if seen == k {
                        return Ok(lo + i as u64);
                    }
                    seen += 1;
                }
            }
            lo = hi;
        }
        Err(SetError::BudgetExhausted {
            what: format!("element #{k} of {self} not found below {budget}"),
        })
    }

    /// The first `count` elements, searched below `budget`.
    pub fn first_elements(&self, count: u64, budget: u64) -> Result<Vec<u64>> {
        let mut out = Vec::with_capacity(count.min(1 << 20) as usize);
        let mut lo = 0;
        while (out.len() as u64) < count {
            if lo >= budget {
                return Err(SetError::BudgetExhausted {
                    what: format!("only {} elements of {self} below {budget}", out.len()),
                });
            }
            let hi = lo.saturating_add(SCAN_CHUNK).min(budget);
            for (i, b) in self.indicator_range(lo, hi)?.into_iter().enumerate() {
                if b && (out.len() as u64) < count {
                    out.push(lo + i as u64);
                }
            }
            lo = hi;
        }
        Ok(out)
    }

    /// The schema as one eventually periodic pattern, when every leaf is
    /// finite or periodic and the combined period stays below
    /// [`MAX_COMBINED_PERIOD`].
    pub fn periodic_form(&self) -> Option<PeriodicForm> {
        match self {
            SetSchema::ExplicitFinite(xs) => {
                let len = xs.last().map_or(0, |&m| m as usize + 1);
                let mut prefix = vec![false; len];
                for &x in xs {
                    prefix[x as usize] = true;
                }
                Some(PeriodicForm { prefix, period: vec![false] })
            }
            SetSchema::EventuallyPeriodic { prefix, period } => Some(PeriodicForm {
                prefix: prefix.clone(),
                period: period.clone(),
            }),
            SetSchema::Complement(x) => x.periodic_form().map(|f| PeriodicForm {
                prefix: f.prefix.iter().map(|b| !b).collect(),
                period: f.period.iter().map(|b| !b).collect(),
            }),
            SetSchema::Union(a, b) => a.periodic_form()?.combine(&b.periodic_form()?, |x, y| x || y),
            SetSchema::Intersection(a, b) => {
                a.periodic_form()?.combine(&b.periodic_form()?, |x, y| x && y)
            }
            SetSchema::IntervalScheme { .. } | SetSchema::Seeded(_) => None,
        }
    }

    /// `Some(true)` if the set is provably finite, `Some(false)` if provably
    /// (or, for seeded sets, almost surely) infinite, `None` otherwise.
    pub fn is_finite(&self) -> Option<bool> {
        if let Some(f) = self.periodic_form() {
            return Some(f.ones_in_period() == 0);
        }
        match self {
            SetSchema::Seeded(_) => Some(false),
            SetSchema::IntervalScheme { partition, .. } => match partition.generator() {
                BoundaryGenerator::Table(_) => None,
                _ => Some(false),
            },
            SetSchema::Complement(x) => match &**x {
                SetSchema::Seeded(_) => Some(false),
                SetSchema::IntervalScheme { partition, parity } => SetSchema::IntervalScheme {
                    partition: partition.clone(),
                    parity: match parity {
                        Parity::Even => Parity::Odd,
                        Parity::Odd => Parity::Even,
                    },
                }
                .is_finite(),
                _ => None,
            },
            SetSchema::Union(a, b) => match (a.is_finite(), b.is_finite()) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            SetSchema::Intersection(a, b) => match (a.is_finite(), b.is_finite()) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                _ => None,
            },
            _ => None,
        }
    }

    /// Rejects provably finite sets.
    pub fn require_infinite(&self) -> Result<()> {
        if self.is_finite() == Some(true) {
            return Err(SetError::NotInfinite(self.to_string()));
        }
        Ok(())
    }
}

impl fmt::Display for SetSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn bits(f: &mut fmt::Formatter<'_>, bs: &[bool]) -> fmt::Result {
            for (i, b) in bs.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                f.write_str(if *b { "1" } else { "0" })?;
            }
            Ok(())
        }
        match self {
            SetSchema::ExplicitFinite(xs) => {
                f.write_str("finite(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            SetSchema::EventuallyPeriodic { prefix, period } => {
                f.write_str("periodic(")?;
                bits(f, prefix)?;
                f.write_str(";")?;
                bits(f, period)?;
                f.write_str(")")
            }
            SetSchema::IntervalScheme { partition, parity } => {
                let parity = match parity {
                    Parity::Even => "even",
                    Parity::Odd => "odd",
                };
                write!(f, "intervals({},{parity})", generator_text(partition.generator()))
            }
            SetSchema::Complement(x) => write!(f, "not({x})"),
            SetSchema::Union(a, b) => write!(f, "or({a},{b})"),
            SetSchema::Intersection(a, b) => write!(f, "and({a},{b})"),
            SetSchema::Seeded(s) => write!(f, "seeded({s})"),
        }
    }
}

impl FromStr for SetSchema {
    type Err = SetError;

    fn from_str(s: &str) -> Result<Self> {
        parse::parse_schema(s)
    }
}

impl serde::Serialize for SetSchema {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for SetSchema {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
