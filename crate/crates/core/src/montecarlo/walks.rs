//! The bisection walk `g(n) = |X ∩ S ∩ f_X(n)| - n/2` and the density of a
//! random subset of `X`.

use num_traits::Signed;

use super::{count_trials, pre, Result, TrialReport, MC_BUDGET};
use crate::rational::{half, to_f64, OpenInterval, Rational};
use crate::sets::seeded::bit;
use crate::sets::SetSchema;

fn walk_hits(s: &SetSchema, xs: &[u64]) -> Result<Vec<u64>> {
    let mut inside = 0u64;
    let mut hits = Vec::new();
    for (i, &e) in xs.iter().enumerate() {
        if s.contains(e)? {
            inside += 1;
        }
        let n = i as u64 + 1;
        if 2 * inside == n {
            hits.push(n);
        }
    }
    Ok(hits)
}

/// Every `1 ≤ n ≤ steps` with `2 |X ∩ S ∩ f_X(n)| = n`, where `f_X(n)` is
/// the set of the first `n` elements of `X`.
pub fn walk_zero_hits(s: &SetSchema, x: &SetSchema, steps: u64) -> Result<Vec<u64>> {
    let xs = x.first_elements(steps, MC_BUDGET)?;
    walk_hits(s, &xs)
}

/// `1 - C(2m, m) / 4^m` with `m = ⌊steps / 2⌋`: the chance that a fair walk
/// returns to zero within `steps` steps.
pub fn recurrence_probability(steps: u64) -> f64 {
    let mut stay = 1.0f64;
    for j in 1..=steps / 2 {
        stay *= (2 * j - 1) as f64 / (2 * j) as f64;
    }
    1.0 - stay
}

/// Fraction of trials whose seeded `S` has a zero of the walk within
/// `steps`; the bound is [`recurrence_probability`].
pub fn estimate_recurrence(x: &SetSchema, steps: u64, trials: u64, seed: u64) -> Result<TrialReport> {
    if trials == 0 {
        return Err(pre("trials must be at least 1"));
    }
    let xs = x.first_elements(steps, MC_BUDGET)?;
    let successes = count_trials(trials, seed, |s| {
        let mut inside = 0u64;
        xs.iter().enumerate().any(|(i, &e)| {
            inside += bit(s, e) as u64;
            2 * inside == i as u64 + 1
        })
    });
    Ok(TrialReport::new(trials, successes, recurrence_probability(steps), seed))
}

/// Hoeffding: `Pr[|count/h - 1/2| ≥ eps] ≤ 2 exp(-2 h eps²)`.
pub fn lln_failure_bound(horizon: u64, eps: &Rational) -> f64 {
    let e = to_f64(eps);
    (2.0 * (-2.0 * horizon as f64 * e * e).exp()).min(1.0)
}

/// Fraction of seeded `Y` whose relative density in `X`, measured up to
/// and including the `horizon`-th element of `X`, lies strictly within
/// `eps` of `1/2`. The bound is the Hoeffding lower bound on that chance.
pub fn lln_density(x: &SetSchema, horizon: u64, trials: u64, eps: &Rational, seed: u64) -> Result<TrialReport> {
    if trials == 0 {
        return Err(pre("trials must be at least 1"));
    }
    if horizon == 0 {
        return Err(pre("horizon must be at least 1"));
    }
    if !eps.is_positive() {
        return Err(pre("eps must be positive"));
    }
    let xs = x.first_elements(horizon, MC_BUDGET)?;
    let window = OpenInterval::around(&half(), eps);
    let successes = count_trials(trials, seed, |s| {
        let count = xs.iter().filter(|&&e| bit(s, e)).count() as u64;
        window.contains_counts(count, horizon)
    });
    Ok(TrialReport::new(trials, successes, 1.0 - lln_failure_bound(horizon, eps), seed))
}
