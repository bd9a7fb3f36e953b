//! One function per subcommand. Each returns the rendered report body.
//!
//! CSV columns:
//! - density: `set,horizon,count,density,min,min_at,max,max_at,exact,moderacy,relative`
//! - relate: `relation,subject,status,witness,detail`
//! - construct: per kind, the row type's fields
//! - forge: `round,op,argument,n,F,eps0`
//! - mc: `kind,trials,successes,estimate,bound,seed,pass`, or the audit rows

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{rational, required, schema, ExperimentConfig};
use super::{CliError, Report, REPORT_SCHEMA_VERSION};
use crate::constructions::{self as con, DEFAULT_BUDGET};
use crate::density::{self, Density, DensityWindow, Moderacy, ModeracyWindow};
use crate::forcing::{self, Step};
use crate::montecarlo::{self as mc, BlockPlan, Exponent, TrialReport};
use crate::rational::{format_rational, serde_pq_opt, serde_pq, Rational};
use crate::relations::{self as rel, RelationVerdict};
use crate::sets::seeded::derive_seed;
use crate::sets::SetSchema;

fn json_body(experiment: &str, config: &ExperimentConfig, report: impl Serialize) -> Result<String, CliError> {
    let config = super::config_value(config);
    // serde_json's default map sorts keys, which fixes the field order
    let value = json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "experiment": experiment,
        "config": config,
        "report": report,
    });
    let value: Value = serde_json::from_str(&value.to_string()).map_err(internal)?;
    Ok(serde_json::to_string_pretty(&value).map_err(internal)? + "\n")
}

fn csv_body<R: Serialize>(rows: &[R]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(internal)?;
    }
    String::from_utf8(w.into_inner().map_err(internal)?).map_err(internal)
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

fn render<R: Serialize>(
    experiment: &str,
    config: &ExperimentConfig,
    rows: &[R],
    full: impl Serialize,
) -> Result<Report, CliError> {
    let body = if config.csv() { csv_body(rows)? } else { json_body(experiment, config, full)? };
    Ok(Report { body, seeds: vec![config.seed()] })
}

fn schemas(texts: &[String]) -> Result<Vec<SetSchema>, CliError> {
    texts.iter().map(|t| schema(t)).collect()
}

#[derive(Serialize)]
struct DensityRow {
    set: String,
    horizon: u64,
    count: u64,
    density: Density,
    #[serde(with = "serde_pq_opt")]
    min: Option<Rational>,
    min_at: Option<u64>,
    #[serde(with = "serde_pq_opt")]
    max: Option<Rational>,
    max_at: Option<u64>,
    exact: Option<Density>,
    moderacy: String,
    relative: Option<Density>,
}

pub fn density(config: &ExperimentConfig) -> Result<Report, CliError> {
    let p = &config.params;
    if p.sets.is_empty() {
        return Err(CliError::Parse("missing --set".into()));
    }
    let sets = schemas(&p.sets)?;
    let x = p.x.as_deref().map(schema).transpose()?;
    let horizon = config.horizon();
    let from = p.from.unwrap_or(1);
    let rows: Vec<DensityRow> = sets
        .par_iter()
        .map(|s| -> Result<DensityRow, CliError> {
            let d = density::initial_density(s, horizon)?;
            let window: Option<DensityWindow> =
                if from < horizon { Some(density::density_window(s, from, horizon)?) } else { None };
            let moderacy = match density::is_moderate(s, &ModeracyWindow::new((horizon / 10).max(1), horizon)) {
                Ok(Moderacy::Exact(b)) => format!("exact:{b}"),
                Ok(Moderacy::Estimated(b)) => format!("estimated:{b}"),
                Err(e) => return Err(e.into()),
            };
            let relative = x.as_ref().map(|x| density::relative_density(s, x, horizon)).transpose()?;
            Ok(DensityRow {
                set: s.to_string(),
                horizon,
                count: s.count_below(horizon)?,
                density: d,
                min: window.as_ref().map(|w| w.min_seen.clone()),
                min_at: window.as_ref().map(|w| w.min_at),
                max: window.as_ref().map(|w| w.max_seen.clone()),
                max_at: window.as_ref().map(|w| w.max_at),
                exact: density::exact_density(s),
                moderacy,
                relative,
            })
        })
        .collect::<Result<_, _>>()?;
    render("density", config, &rows, &rows)
}

#[derive(Serialize)]
struct RelateRow {
    relation: String,
    subject: String,
    status: String,
    witness: Option<u64>,
    detail: String,
}

fn trace_text(v: &RelationVerdict) -> String {
    v.trace
        .iter()
        .flatten()
        .map(|t| format!("{}:{}", t.n, format_rational(&t.value)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn verdict_row(relation: &str, subject: String, v: &RelationVerdict) -> RelateRow {
    RelateRow {
        relation: relation.into(),
        subject,
        status: v.status.to_string(),
        witness: v.witness,
        detail: trace_text(v),
    }
}

fn hits_row(relation: &str, subject: String, hits: &[u64]) -> RelateRow {
    let status = if hits.is_empty() { "FailsAtHorizon" } else { "HoldsAtHorizon" };
    RelateRow {
        relation: relation.into(),
        subject,
        status: status.into(),
        witness: hits.last().copied(),
        detail: format!("hits={}", hits.len()),
    }
}

fn index_list(v: &[usize]) -> String {
    v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn relate(config: &ExperimentConfig) -> Result<Report, CliError> {
    let p = &config.params;
    let relation = required(&p.relation, "relation")?.as_str();
    let horizon = config.horizon();
    let n0 = p.n0.unwrap_or_else(|| rel::default_n0(horizon));
    let tol = config.tol()?;
    let pair = || -> Result<(SetSchema, SetSchema, String), CliError> {
        let s = schema(required(&p.s, "s")?)?;
        let x = schema(required(&p.x, "x")?)?;
        let subject = format!("S={s} X={x}");
        Ok((s, x, subject))
    };
    let family = || -> Result<Vec<SetSchema>, CliError> {
        if p.sets.is_empty() {
            return Err(CliError::Parse("missing --set".into()));
        }
        schemas(&p.sets)
    };
    let cap = p.cap.unwrap_or(3);
    let (rows, family_report) = match relation {
        "bisects_in_limit" | "almost_bisects" | "star_splits" => {
            let (s, x, subject) = pair()?;
            let v = match relation {
                "bisects_in_limit" => rel::bisects_in_limit(&s, &x, &tol, n0, horizon)?,
                "almost_bisects" => rel::almost_bisects(&s, &x, &tol, n0, horizon)?,
                _ => rel::star_splits(&s, &x, &tol, n0, horizon)?,
            };
            (vec![verdict_row(relation, subject, &v)], None)
        }
        "weakly_bisects" | "bisects_infinitely_often" => {
            let (s, x, subject) = pair()?;
            let hits = if relation == "weakly_bisects" {
                rel::weakly_bisects(&s, &x, &tol, horizon)?
            } else {
                rel::bisects_infinitely_often(&s, &x, horizon)?
            };
            (vec![hits_row(relation, subject, &hits)], None)
        }
        "statistically_independent" | "rho_independent" | "rho_independent_combinations" => {
            let fam = family()?;
            let report = match relation {
                "statistically_independent" => rel::statistically_independent(&fam, cap, &tol, n0, horizon)?,
                _ => {
                    let rho = rational(required(&p.rho, "rho")?, "rho")?;
                    if relation == "rho_independent" {
                        rel::rho_independent(&fam, &rho, cap, &tol, n0, horizon)?
                    } else {
                        rel::rho_independent_combinations(&fam, &rho, cap, &tol, n0, horizon)?
                    }
                }
            };
            let rows = report
                .subfamilies
                .iter()
                .map(|sub| {
                    let subject =
                        format!("members={} complemented={}", index_list(&sub.members), index_list(&sub.complemented));
                    verdict_row(relation, subject, &sub.verdict)
                })
                .collect();
            (rows, Some(report))
        }
        other => return Err(CliError::Parse(format!("unknown relation {other:?}"))),
    };
    let full = json!({ "rows": rows, "family": family_report });
    render("relate", config, &rows, full)
}

#[derive(Serialize)]
struct SweepRow {
    kind: String,
    trials: u64,
    holds: u64,
    failures: u64,
    errors: u64,
}

#[derive(Serialize)]
struct SweepReport {
    summary: SweepRow,
    /// Instance seeds whose conclusion failed.
    failing_seeds: Vec<u64>,
    /// Instance seeds whose hypotheses were rejected, with the reason.
    rejected: Vec<(u64, String)>,
}

fn sweep(kind: &str, trials: u64, seed: u64, check: impl Fn(u64) -> con::Result<bool> + Sync) -> SweepReport {
    let outcomes: Vec<(u64, con::Result<bool>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i);
            (s, check(s))
        })
        .collect();
    let failing_seeds: Vec<u64> = outcomes.iter().filter(|(_, r)| matches!(r, Ok(false))).map(|o| o.0).collect();
    let rejected: Vec<(u64, String)> =
        outcomes.iter().filter_map(|(s, r)| r.as_ref().err().map(|e| (*s, e.to_string()))).collect();
    let summary = SweepRow {
        kind: kind.into(),
        trials,
        holds: trials - failing_seeds.len() as u64 - rejected.len() as u64,
        failures: failing_seeds.len() as u64,
        errors: rejected.len() as u64,
    };
    SweepReport { summary, failing_seeds, rejected }
}

#[derive(Serialize)]
struct IntervalRow {
    n: usize,
    start: u64,
    end: u64,
    skip_end: Option<u64>,
    count: u64,
}

pub fn construct(config: &ExperimentConfig) -> Result<Report, CliError> {
    let p = &config.params;
    let kind = required(&p.kind, "kind")?.as_str();
    let horizon = config.horizon();
    let base = || -> Result<SetSchema, CliError> {
        let text = p.x.as_ref().or(p.sets.first()).ok_or_else(|| CliError::Parse("missing --x".into()))?;
        schema(text)
    };
    match kind {
        "factorial" => {
            let s = base()?;
            let y = schema(required(&p.y, "y")?)?;
            let chop = con::factorial_chopped_real(&s, horizon)?;
            let rows = con::factorial_guarantee(&chop, &y)?;
            let full = json!({ "s": s, "boundaries": chop.boundaries, "rows": rows });
            render("construct", config, &rows, full)
        }
        "non-meagre" => {
            let x = base()?;
            let w = con::non_meagre_witness(&x, p.depth.unwrap_or(3), DEFAULT_BUDGET)?;
            let rows: Vec<IntervalRow> = w
                .interval_counts
                .iter()
                .enumerate()
                .map(|(n, &count)| IntervalRow {
                    n,
                    start: w.boundaries[n],
                    end: w.boundaries[n + 1],
                    skip_end: n.checked_sub(1).map(|i| w.skip_ends[i]),
                    count,
                })
                .collect();
            render("construct", config, &rows, &w)
        }
        "dominator" => {
            let x = base()?;
            let table: Vec<u64> = required(&p.table, "table")?
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| CliError::Parse(format!("bad table entry {t:?}"))))
                .collect::<Result<_, _>>()?;
            let w = con::bisect_witness_from_dominator(&x, &table, horizon)?;
            let rows: Vec<IntervalRow> = w
                .interval_counts
                .iter()
                .enumerate()
                .map(|(n, &count)| IntervalRow { n, start: w.gamma[n], end: w.gamma[n + 1], skip_end: None, count })
                .collect();
            render("construct", config, &rows, &w)
        }
        "cohen" => {
            let trace = con::random_block_trace(p.blocks.unwrap_or(4), config.seed(), p.max_delta.unwrap_or(8))?;
            let x = match p.x.as_deref() {
                Some(t) => schema(t)?,
                None => SetSchema::finite(
                    trace.planted().iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64).collect(),
                ),
            };
            let report = con::cohen_antisplit_witness(&trace, &x)?;
            let full = json!({
                "boundaries": trace.boundaries,
                "y": report.y,
                "rows": report.rows,
                "all_hold": report.all_hold(),
            });
            render("construct", config, &report.rows, full)
        }
        "union-splice" | "prefix-splice" => {
            let trials = p.trials.unwrap_or(10_000);
            let report = if kind == "union-splice" {
                sweep(kind, trials, config.seed(), |s| {
                    let i = con::union_splice_instance(s);
                    con::union_splice_conclusion(&i.r, &i.s, &i.a, &i.b, &i.eps, &i.c)
                })
            } else {
                sweep(kind, trials, config.seed(), |s| {
                    let i = con::prefix_splice_instance(s);
                    con::prefix_splice_conclusion(&i.big_r, &i.big_s, &i.r, &i.eps, i.m, i.n)
                })
            };
            render("construct", config, std::slice::from_ref(&report.summary), &report)
        }
        other => Err(CliError::Parse(format!("unknown construction {other:?}"))),
    }
}

#[derive(Serialize)]
struct RoundRow {
    round: usize,
    op: &'static str,
    argument: String,
    n: u64,
    #[serde(rename = "F")]
    ids: String,
    #[serde(with = "serde_pq")]
    eps0: Rational,
}

pub fn forge(config: &ExperimentConfig) -> Result<Report, CliError> {
    let p = &config.params;
    let rounds = p.rounds.unwrap_or(64);
    let report = match &p.schedule {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{path}: {e}")))?;
            let steps: Vec<Step> =
                serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{path}: {e}")))?;
            forcing::replay(&steps, rounds, config.seed(), p.cap.unwrap_or(forcing::REPORT_DOMAIN_CAP))?
        }
        None => forcing::generic_run(p.indices.unwrap_or(3), rounds, config.horizon(), config.seed())?,
    };
    let rows: Vec<RoundRow> = report
        .rounds
        .iter()
        .map(|r| {
            let (op, argument) = match &r.step {
                Step::Add { id } => ("add", id.to_string()),
                Step::Shrink { level } => ("shrink", format_rational(level)),
                Step::Horizon { m } => ("horizon", m.to_string()),
            };
            RoundRow {
                round: r.round,
                op,
                argument,
                n: r.n,
                ids: index_list(&r.ids.iter().map(|&i| i as usize).collect::<Vec<_>>()),
                eps0: r.eps0.clone(),
            }
        })
        .collect();
    // the full condition is only worth printing while it stays small
    let condition: Option<Value> = (report.n <= 1 << 16)
        .then(|| serde_json::from_str(&report.condition.to_json()))
        .transpose()
        .map_err(internal)?;
    let full = json!({ "run": report, "condition": condition });
    render("forge", config, &rows, full)
}

#[derive(Serialize)]
struct McRow {
    kind: String,
    trials: u64,
    successes: u64,
    #[serde(with = "serde_pq")]
    estimate: Rational,
    bound: f64,
    seed: u64,
    pass: bool,
}

fn mc_row(kind: &str, r: &TrialReport, pass: bool) -> McRow {
    McRow {
        kind: kind.into(),
        trials: r.trials,
        successes: r.successes,
        estimate: r.estimate.clone(),
        bound: r.bound,
        seed: r.seed,
        pass,
    }
}

pub fn mc(config: &ExperimentConfig) -> Result<Report, CliError> {
    let p = &config.params;
    let kind = required(&p.kind, "kind")?.as_str();
    let seed = config.seed();
    let x = || p.x.as_deref().map(schema).unwrap_or(Ok(SetSchema::omega()));
    match kind {
        "recurrence" => {
            let trials = p.trials.unwrap_or(1000);
            let r = mc::estimate_recurrence(&x()?, p.steps.unwrap_or(10_000), trials, seed)?;
            let pass = (r.estimate_f64() - r.bound).abs() <= mc::three_sigma(r.bound, trials) + 1e-12;
            let row = mc_row(kind, &r, pass);
            render("mc", config, std::slice::from_ref(&row), json!({ "trial": r, "pass": pass }))
        }
        "lln" => {
            let trials = p.trials.unwrap_or(500);
            let r = mc::lln_density(&x()?, config.horizon(), trials, &config.tol()?, seed)?;
            let pass = r.estimate_f64() >= r.bound - mc::three_sigma(r.bound, trials);
            let row = mc_row(kind, &r, pass);
            render("mc", config, std::slice::from_ref(&row), json!({ "trial": r, "pass": pass }))
        }
        "fail-rate" => {
            let n = p.n.unwrap_or(3);
            let len = p.target_len.unwrap_or(400);
            let plan = BlockPlan::standard(n, 0, len.max(1))?;
            let target: Vec<u64> = (0..len).collect();
            let r = mc::fail_rate_vs_bound(&plan, &target, p.trials.unwrap_or(2000), seed)?;
            let row = mc_row(kind, &r.upper, r.pass);
            render("mc", config, std::slice::from_ref(&row), &r)
        }
        "single-m" => {
            let r = mc::single_m_fail(p.k.unwrap_or(20), p.n.unwrap_or(2), p.trials.unwrap_or(4000), seed)?;
            let row = mc_row(kind, &r.report, r.within_3sigma);
            render("mc", config, std::slice::from_ref(&row), &r)
        }
        "delta-audit" => {
            let rows = mc::delta_audit(p.max_n.unwrap_or(100))?;
            let full = json!({
                "rows": rows,
                "first_below_half_stated": mc::first_delta_below_half(&rows, Exponent::Stated),
                "first_below_half_derived": mc::first_delta_below_half(&rows, Exponent::Derived),
            });
            render("mc", config, &rows, full)
        }
        other => Err(CliError::Parse(format!("unknown mc kind {other:?}"))),
    }
}
