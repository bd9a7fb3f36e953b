//! Scheduled runs: start from the trivial condition and apply a list of
//! extension steps, reporting the density errors of the final condition.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::condition::{for_each_trace, restrict, within};
use super::extend::extend;
use super::{Bits, Condition, ForcingError, PartialFn, Result, FRESH_EPS, MAX_INDICES};
use crate::rational::{format_rational, int, inverse_power_of_two, parse_rational, serde_pq, Rational};
use crate::sets::seeded::{derive_seed, SplitMix};

/// Eps levels applied after every index is present, largest first.
pub const SHRINK_LEVELS: [(u64, u64); 5] = [(8, 1), (4, 1), (2, 1), (1, 1), (1, 2)];

/// Default cap on `|dom f|` for the final report.
pub const REPORT_DOMAIN_CAP: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Step {
    /// Put an id into `F`, seeding its initial pattern.
    Add { id: u64 },
    /// Lower every eps value to at most `level`.
    Shrink {
        #[serde(with = "serde_pq")]
        level: Rational,
    },
    /// Lengthen to at least `m`; a no-op when already that long.
    Horizon { m: u64 },
}

impl Step {
    pub fn shrink(text: &str) -> Result<Step> {
        let level = parse_rational(text).map_err(|e| ForcingError::Malformed(e.to_string()))?;
        Ok(Step::Shrink { level })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundReport {
    pub round: usize,
    pub step: Step,
    pub n: u64,
    #[serde(rename = "F")]
    pub ids: Vec<u64>,
    #[serde(with = "serde_pq")]
    pub eps0: Rational,
}

/// `| |b_f|/n - 2^-|dom f| |` against `eps(f)/8` for one partial function.
#[derive(Debug, Clone, Serialize)]
pub struct C5Row {
    pub f: String,
    pub count: u64,
    #[serde(with = "serde_pq")]
    pub error: Rational,
    #[serde(with = "serde_pq")]
    pub bound: Rational,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub rounds: Vec<RoundReport>,
    /// Whether every scheduled step ran within the round budget.
    pub complete: bool,
    #[serde(rename = "F")]
    pub ids: Vec<u64>,
    pub n: u64,
    pub domain_cap: usize,
    pub c5: Vec<C5Row>,
    #[serde(skip)]
    pub condition: Condition,
}

impl RunReport {
    pub fn all_ok(&self) -> bool {
        self.c5.iter().all(|r| r.ok)
    }

    pub fn row(&self, f: &str) -> Option<&C5Row> {
        self.c5.iter().find(|r| r.f == f)
    }
}

/// A one-index condition below `p↾{id}` carrying a seeded pattern.
fn seeded_single(p: &Condition, id: u64, seed: u64) -> Result<Condition> {
    let eps0 = p.eps0().expect("valid").clone();
    // C6 for one id: 4 / n < eps / 8
    let floor = (int(32) / &eps0).floor().to_integer();
    let floor: u64 = floor.try_into().map_err(|_| ForcingError::Overflow)?;
    let n = p.n().max(floor + 1);
    let mut rng = SplitMix::new(derive_seed(seed, id));
    let members: Vec<u64> = (0..n).filter(|_| rng.next_u64() & 1 == 1).collect();
    let mut eps = Condition::uniform_eps(&[id], &int(FRESH_EPS));
    eps.insert(PartialFn::empty(), eps0);
    let bits = Bits::from_members(n, members).expect("in range");
    Condition::new(vec![id], n, [(id, bits)].into_iter().collect(), eps)
}

fn apply(p: &Condition, step: &Step, seed: u64) -> Result<Condition> {
    match step {
        Step::Add { id } => {
            if p.ids().contains(id) {
                return Ok(p.clone());
            }
            if p.ids().len() >= MAX_INDICES {
                return Err(ForcingError::Hypothesis(format!("|F| would exceed {MAX_INDICES}")));
            }
            let qp = seeded_single(p, *id, seed)?;
            extend(p, &[*id], &qp, 0, p.eps_map())
        }
        Step::Shrink { level } => {
            let target = p.eps_map().iter().map(|(f, e)| (f.clone(), e.clone().min(level.clone()))).collect();
            extend(p, &[], &restrict(p, &[]), 0, &target)
        }
        Step::Horizon { m } if *m <= p.n() => Ok(p.clone()),
        Step::Horizon { m } => extend(p, &[], &restrict(p, &[]), *m, p.eps_map()),
    }
}

fn c5_rows(p: &Condition, cap: usize) -> Vec<C5Row> {
    let n = p.n();
    let sets: Vec<Bits> = p.ids().iter().map(|id| p.a(*id).expect("in F").clone()).collect();
    let mut rows = Vec::new();
    for_each_trace(p.ids(), &sets, n, |f, b| {
        if f.dom_len() > cap {
            return;
        }
        let count = b.count();
        let eps = p.eps(f).expect("valid");
        let bound = eps / int(8);
        let error = (Rational::new(count.into(), n.into()) - inverse_power_of_two(f.dom_len())).abs();
        let ok = within(count, n, f.dom_len(), &bound);
        rows.push(C5Row { f: f.to_string(), count, error, bound, ok });
    });
    rows.sort_by(|a, b| {
        let key = |s: &str| s.parse::<PartialFn>().map(|f| (f.dom_len(), f)).ok();
        key(&a.f).cmp(&key(&b.f))
    });
    rows
}

/// Runs `steps` from the trivial condition (`n = 1`, eps `16`), at most
/// `rounds` of them. Running out of rounds before every `Add` has run is an
/// error; otherwise an unfinished schedule is reported as incomplete.
pub fn replay(steps: &[Step], rounds: usize, seed: u64, domain_cap: usize) -> Result<RunReport> {
    let mut p = Condition::trivial(1, int(FRESH_EPS))?;
    let mut log = Vec::new();
    for (round, step) in steps.iter().enumerate() {
        if round >= rounds {
            if steps[round..].iter().any(|s| matches!(s, Step::Add { id } if !p.ids().contains(id))) {
                return Err(ForcingError::Budget(rounds));
            }
            break;
        }
        p = apply(&p, step, seed)?;
        log.push(RoundReport {
            round,
            step: step.clone(),
            n: p.n(),
            ids: p.ids().to_vec(),
            eps0: p.eps0().expect("valid").clone(),
        });
    }
    let complete = log.len() == steps.len();
    Ok(RunReport {
        seed,
        rounds: log,
        complete,
        ids: p.ids().to_vec(),
        n: p.n(),
        domain_cap,
        c5: c5_rows(&p, domain_cap),
        condition: p,
    })
}

/// The standard schedule: add ids `0..index_count`, shrink eps through
/// `SHRINK_LEVELS`, then lengthen to `min_horizon`.
pub fn schedule(index_count: usize, min_horizon: u64) -> Vec<Step> {
    let mut steps: Vec<Step> = (0..index_count as u64).map(|id| Step::Add { id }).collect();
    for (a, b) in SHRINK_LEVELS {
        steps.push(Step::Shrink { level: Rational::new(a.into(), b.into()) });
    }
    steps.push(Step::Horizon { m: min_horizon });
    steps
}

pub fn generic_run(index_count: usize, rounds: usize, min_horizon: u64, seed: u64) -> Result<RunReport> {
    if index_count == 0 {
        return Err(ForcingError::Hypothesis("index_count must be at least 1".into()));
    }
    if index_count > MAX_INDICES {
        return Err(ForcingError::Hypothesis(format!("index_count above {MAX_INDICES}")));
    }
    // shrink levels at or above the current eps(∅) would not spend a round
    // usefully
    let mut steps = Vec::new();
    let mut eps0 = int(FRESH_EPS);
    for step in schedule(index_count, min_horizon) {
        if let Step::Shrink { level } = &step {
            if *level >= eps0 {
                continue;
            }
            eps0 = level.clone();
        }
        steps.push(step);
    }
    replay(&steps, rounds, seed, REPORT_DOMAIN_CAP)
}

/// Canonical text of a run's rounds, for determinism checks.
pub fn rounds_text(report: &RunReport) -> String {
    report
        .rounds
        .iter()
        .map(|r| format!("{} {:?} n={} eps={}", r.round, r.step, r.n, format_rational(&r.eps0)))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::validate;
    use crate::rational::ratio;
    use num_traits::Zero;

    #[test]
    fn one_index() {
        let r = generic_run(1, 2, 16, 1).unwrap();
        assert!(r.row("").unwrap().error.is_zero());
        assert!(r.all_ok());
        assert!(validate(&r.condition).unwrap().is_empty());
    }

    #[test]
    fn two_indices() {
        let r = generic_run(2, 20, 1 << 12, 7).unwrap();
        assert!(r.complete);
        assert!(r.n >= 1 << 12);
        assert!(r.all_ok(), "{:?}", r.c5);
        assert_eq!(r.c5.len(), 9);
        assert_eq!(r.condition.eps0(), Some(&ratio(1, 2)));
    }

    #[test]
    fn budget() {
        assert!(matches!(generic_run(3, 2, 16, 0), Err(ForcingError::Budget(2))));
        let r = generic_run(2, 3, 16, 0).unwrap();
        assert!(!r.complete);
        assert!(generic_run(0, 3, 16, 0).is_err());
    }

    #[test]
    fn seeds_change_patterns_not_shape() {
        let a = generic_run(2, 20, 64, 1).unwrap();
        let b = generic_run(2, 20, 64, 2).unwrap();
        assert_eq!(a.n, b.n);
        assert_ne!(a.condition, b.condition);
        let a2 = generic_run(2, 20, 64, 1).unwrap();
        assert_eq!(a.condition, a2.condition);
        assert_eq!(rounds_text(&a), rounds_text(&a2));
    }

    #[test]
    fn replayed_rounds_descend() {
        let steps = vec![
            Step::Add { id: 4 },
            Step::Horizon { m: 100 },
            Step::Add { id: 2 },
            Step::shrink("3").unwrap(),
            Step::Add { id: 4 },
        ];
        let r = replay(&steps, 10, 5, 2).unwrap();
        assert_eq!(r.ids, vec![2, 4]);
        assert!(r.complete);
        assert!(r.rounds[1].n >= 100);
        let json = serde_json::to_string(&steps).unwrap();
        assert!(json.contains(r#"{"op":"shrink","level":"3/1"}"#));
        let back: Vec<Step> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, steps);
    }
}
