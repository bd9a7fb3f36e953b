//! Interval partitions of the naturals and chopped reals.

use std::fmt;
use std::sync::{Arc, RwLock};

use super::{SetError, SetSchema};

/// Rule producing the boundaries `b_0 = 0 < b_1 < b_2 < ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundaryGenerator {
    /// `b_k = k!` for `k >= 1`.
    Factorial,
    /// `b_k = base^(k-1)` for `k >= 1`; `base >= 2`.
    Power { base: u64 },
    /// `b_k = step * k`; `step >= 1`.
    Linear { step: u64 },
    /// Explicit finite boundary list starting at 0. Queries past the last
    /// boundary exhaust the table.
    Table(Vec<u64>),
}

impl BoundaryGenerator {
    fn validate(&self) -> Result<(), SetError> {
        match self {
            BoundaryGenerator::Factorial => Ok(()),
            BoundaryGenerator::Power { base } if *base >= 2 => Ok(()),
            BoundaryGenerator::Linear { step } if *step >= 1 => Ok(()),
            BoundaryGenerator::Table(t) => {
                if t.first() != Some(&0) {
                    return Err(SetError::InvalidPartition("table must start at 0".into()));
                }
                if t.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(SetError::InvalidPartition(
                        "table must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
            other => Err(SetError::InvalidPartition(format!("bad generator {other:?}"))),
        }
    }

    /// Boundary `k` given the previous one; `None` once the rule cannot go on.
    fn next(&self, k: usize, prev: u64) -> Option<u64> {
        match self {
            BoundaryGenerator::Factorial => {
                if k == 1 {
                    Some(1)
                } else {
                    prev.checked_mul(k as u64)
                }
            }
            BoundaryGenerator::Power { base } => {
                if k == 1 {
                    Some(1)
                } else {
                    prev.checked_mul(*base)
                }
            }
            BoundaryGenerator::Linear { step } => step.checked_mul(k as u64),
            BoundaryGenerator::Table(t) => t.get(k).copied(),
        }
    }
}

/// Interval partition `I_k = [b_k, b_{k+1})` with memoised boundaries.
///
/// Clones share the memo; the memo only ever grows and is guarded by a
/// read-write lock, so concurrent readers are fine.
#[derive(Clone)]
pub struct IntervalPartition {
    generator: BoundaryGenerator,
    memo: Arc<RwLock<Vec<u64>>>,
}

impl fmt::Debug for IntervalPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntervalPartition")
            .field("generator", &self.generator)
            .finish()
    }
}

impl PartialEq for IntervalPartition {
    fn eq(&self, other: &Self) -> bool {
        self.generator == other.generator
    }
}

impl Eq for IntervalPartition {}

impl IntervalPartition {
    pub fn new(generator: BoundaryGenerator) -> Result<Self, SetError> {
        generator.validate()?;
        Ok(Self {
            generator,
            memo: Arc::new(RwLock::new(vec![0])),
        })
    }

    pub fn from_table(boundaries: Vec<u64>) -> Result<Self, SetError> {
        Self::new(BoundaryGenerator::Table(boundaries))
    }

    pub fn generator(&self) -> &BoundaryGenerator {
        &self.generator
    }

    /// `b_k`.
    pub fn boundary(&self, k: usize) -> Result<u64, SetError> {
        if let Some(&b) = self.memo.read().expect("memo poisoned").get(k) {
            return Ok(b);
        }
        let mut memo = self.memo.write().expect("memo poisoned");
        while memo.len() <= k {
            self.push_next(&mut memo)?;
        }
        Ok(memo[k])
    }

    fn push_next(&self, memo: &mut Vec<u64>) -> Result<(), SetError> {
        let k = memo.len();
        let prev = *memo.last().expect("memo starts with b_0");
        match self.generator.next(k, prev) {
            Some(b) => {
                debug_assert!(b > prev);
                memo.push(b);
                Ok(())
            }
            None => Err(SetError::BudgetExhausted {
                what: format!("boundary {k} of {}", super::parse::generator_text(&self.generator)),
            }),
        }
    }

    /// Index `k` of the interval containing `n`.
    pub fn interval_of(&self, n: u64) -> Result<usize, SetError> {
        {
            let memo = self.memo.read().expect("memo poisoned");
            if *memo.last().expect("nonempty") > n {
                return Ok(memo.partition_point(|&b| b <= n) - 1);
            }
        }
        let mut memo = self.memo.write().expect("memo poisoned");
        while *memo.last().expect("nonempty") <= n {
            self.push_next(&mut memo)?;
        }
        Ok(memo.partition_point(|&b| b <= n) - 1)
    }

    /// `[b_k, b_{k+1})`.
    pub fn interval(&self, k: usize) -> Result<(u64, u64), SetError> {
        Ok((self.boundary(k)?, self.boundary(k + 1)?))
    }

    /// All intervals `[b_k, b_{k+1})` with `b_{k+1} < horizon`.
    pub fn intervals_below(&self, horizon: u64) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut k = 0;
        while let Ok((lo, hi)) = self.interval(k) {
            if hi >= horizon {
                break;
            }
            out.push((lo, hi));
            k += 1;
        }
        out
    }
}

/// Selects the even- or odd-indexed intervals of a partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn selects(self, k: usize) -> bool {
        match self {
            Parity::Even => k % 2 == 0,
            Parity::Odd => k % 2 == 1,
        }
    }
}

/// A bit source paired with an interval partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoppedReal {
    pub bits: SetSchema,
    pub partition: IntervalPartition,
}

impl ChoppedReal {
    pub fn new(bits: SetSchema, partition: IntervalPartition) -> Self {
        Self { bits, partition }
    }
}

/// Indices `k` of the intervals `I_k` with `b_{k+1} < horizon` on which `y`
/// agrees with the chopped real's bits.
pub fn matches(y: &SetSchema, c: &ChoppedReal, horizon: u64) -> Result<Vec<usize>, SetError> {
    let intervals = c.partition.intervals_below(horizon);
    let end = intervals.last().map_or(0, |&(_, hi)| hi);
    let ys = y.indicator(end)?;
    let xs = c.bits.indicator(end)?;
    Ok(intervals
        .iter()
        .enumerate()
        .filter(|(_, &(lo, hi))| ys[lo as usize..hi as usize] == xs[lo as usize..hi as usize])
        .map(|(k, _)| k)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_and_power_boundaries() {
        let p = IntervalPartition::new(BoundaryGenerator::Factorial).unwrap();
        let b: Vec<u64> = (0..6).map(|k| p.boundary(k).unwrap()).collect();
        assert_eq!(b, [0, 1, 2, 6, 24, 120]);
        let p = IntervalPartition::new(BoundaryGenerator::Power { base: 2 }).unwrap();
        let b: Vec<u64> = (0..5).map(|k| p.boundary(k).unwrap()).collect();
        assert_eq!(b, [0, 1, 2, 4, 8]);
        assert!(p.boundary(70).is_err());
    }

    #[test]
    fn interval_lookup() {
        let p = IntervalPartition::new(BoundaryGenerator::Factorial).unwrap();
        assert_eq!(p.interval_of(0).unwrap(), 0);
        assert_eq!(p.interval_of(1).unwrap(), 1);
        assert_eq!(p.interval_of(5).unwrap(), 2);
        assert_eq!(p.interval_of(6).unwrap(), 3);
        assert_eq!(p.interval_of(119).unwrap(), 4);
        let t = IntervalPartition::from_table(vec![0, 2, 4]).unwrap();
        assert_eq!(t.interval_of(3).unwrap(), 1);
        assert!(matches!(t.interval_of(4), Err(SetError::BudgetExhausted { .. })));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(IntervalPartition::from_table(vec![1, 2]).is_err());
        assert!(IntervalPartition::from_table(vec![0, 2, 2]).is_err());
        assert!(IntervalPartition::new(BoundaryGenerator::Power { base: 1 }).is_err());
    }

    #[test]
    fn matching_intervals() {
        let zeros = SetSchema::finite(vec![]);
        let omega = SetSchema::omega();
        let evens_blocks = IntervalPartition::new(BoundaryGenerator::Linear { step: 2 }).unwrap();
        let c = ChoppedReal::new(zeros.clone(), evens_blocks.clone());
        assert_eq!(matches(&zeros, &c, 10).unwrap(), vec![0, 1, 2, 3]);
        assert!(matches(&omega, &c, 10).unwrap().is_empty());

        // y agrees with x only on [2, 4).
        let x = SetSchema::finite(vec![0, 4]);
        let y = SetSchema::finite(vec![1, 5]);
        let part = IntervalPartition::from_table(vec![0, 2, 4, 6]).unwrap();
        let c = ChoppedReal::new(x, part);
        assert_eq!(matches(&y, &c, 6).unwrap(), vec![1]);
    }

    #[test]
    fn shared_memo_is_thread_safe() {
        let p = IntervalPartition::new(BoundaryGenerator::Factorial).unwrap();
        std::thread::scope(|s| {
            for t in 0..4 {
                let p = p.clone();
                s.spawn(move || {
                    for n in (t..5000).step_by(7) {
                        let k = p.interval_of(n).unwrap();
                        let (lo, hi) = p.interval(k).unwrap();
                        assert!(lo <= n && n < hi);
                    }
                });
            }
        });
    }
}
