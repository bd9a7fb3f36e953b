//! Seeded trials for the probabilistic steps: walk recurrence, the law of
//! large numbers for random halves, and block failure rates against their
//! Chernoff-type bounds.
//!
//! Trial `t` of a run with seed `s` draws its bits from
//! `seeded::derive_seed(s, t)`, so reports do not depend on thread count.

mod bounds;
mod fail;
mod walks;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::rational::{serde_pq, Rational};
use crate::sets::SetError;

pub use bounds::{
    chernoff_bound, decimal_from_ln, delta_audit, delta_n, delta_n_ln, first_delta_below_half, BlockPlan,
    DeltaRow, Exponent,
};
pub use fail::{
    binomial_tail_brute, binomial_tail_exact, fail_rate_vs_bound, single_m_fail, FailRateReport, SingleMReport,
    BRUTE_FORCE_MAX_K, EXACT_MAX_K,
};
pub use walks::{estimate_recurrence, lln_density, lln_failure_bound, recurrence_probability, walk_zero_hits};

/// Search budget for the elements of `X`.
pub const MC_BUDGET: u64 = 1 << 32;

#[derive(Debug, thiserror::Error)]
pub enum MonteCarloError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("target has {have} elements, need at least {need}")]
    TargetTooSmall { have: usize, need: u64 },
    #[error(transparent)]
    Set(#[from] SetError),
}

pub type Result<T> = std::result::Result<T, MonteCarloError>;

fn pre(msg: impl Into<String>) -> MonteCarloError {
    MonteCarloError::Precondition(msg.into())
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub trials: u64,
    pub successes: u64,
    #[serde(with = "serde_pq")]
    pub estimate: Rational,
    /// Analytic reference for the success frequency; its meaning is fixed
    /// by the experiment that produced the report.
    pub bound: f64,
    pub seed: u64,
}

impl TrialReport {
    fn new(trials: u64, successes: u64, bound: f64, seed: u64) -> Self {
        let estimate = Rational::new(BigInt::from(successes), BigInt::from(trials));
        TrialReport { trials, successes, estimate, bound, seed }
    }

    pub fn estimate_f64(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Runs `trial(t, derive_seed(seed, t))` for every `t < trials` and counts
/// the successes.
fn count_trials<F>(trials: u64, seed: u64, trial: F) -> u64
where
    F: Fn(u64) -> bool + Sync,
{
    let outcomes: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| trial(crate::sets::seeded::derive_seed(seed, t)))
        .collect();
    outcomes.iter().filter(|&&b| b).count() as u64
}

/// `3 * sqrt(p (1 - p) / trials)`.
pub fn three_sigma(p: f64, trials: u64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}
