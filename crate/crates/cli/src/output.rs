//! Deterministic text output: trace tables, joined comparison tables,
//! sweep tables, and run summaries. Every float is printed with 17
//! significant digits so the files round-trip exactly and identical
//! runs produce identical bytes.

use anyhow::{Context, Result};
use oco_core::algorithms::RunTrace;
use oco_core::costs::{Estimate, VariationReport};
use oco_core::geometry::Point;
use oco_core::harness::{BoundCheck, RegretReport};
use std::fmt::Write as _;
use std::path::Path;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_point(p: &Point) -> String {
    let mut s = String::new();
    for (i, v) in p.as_slice().iter().enumerate() {
        if i > 0 {
            s.push(';');
        }
        let _ = write!(s, "{v:.16e}");
    }
    s
}

pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))?;
    }
    std::fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

/// Per-round trace table. `evar_partial` carries the running variation
/// the algorithm's analysis tracks: the extended sequential gradient
/// variation for full-information runs (restarting with each doubling
/// epoch), the cost-value variation for bandit runs.
pub fn render_trace(trace: &RunTrace, best_point: &Point, evar_partial: &[f64]) -> String {
    let scenario = trace.scenario();
    assert_eq!(evar_partial.len(), trace.horizon());
    let mut out = String::with_capacity(trace.horizon() * 96);
    out.push_str("t,eta,x,z,cost,cum_cost,cum_regret,evar_partial\n");
    let mut cum_cost = 0.0;
    let mut cum_best = 0.0;
    for (record, evar) in trace.records.iter().zip(evar_partial) {
        cum_cost += record.cost;
        cum_best += scenario.eval(record.t, best_point);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            record.t,
            fmt_f64(record.eta),
            fmt_point(&record.x),
            fmt_point(&record.z),
            fmt_f64(record.cost),
            fmt_f64(cum_cost),
            fmt_f64(cum_cost - cum_best),
            fmt_f64(*evar),
        );
    }
    out
}

fn estimate_lines(out: &mut String, key: &str, est: &Estimate) {
    let _ = writeln!(out, "{key} = {}", fmt_f64(est.value));
    let _ = writeln!(out, "{key}.exact = {}", est.exact);
}

pub fn summary_header(out: &mut String, command: &str) {
    let _ = writeln!(out, "# oco {command} summary");
    let _ = writeln!(out, "version = \"{}\"", oco_core::VERSION);
}

pub fn scenario_lines(out: &mut String, trace: &RunTrace) {
    let sc = trace.scenario();
    let _ = writeln!(out, "scenario.id = \"{}\"", sc.id());
    let _ = writeln!(out, "scenario.dimension = {}", sc.dim());
    let _ = writeln!(out, "scenario.horizon = {}", sc.horizon());
    let _ = writeln!(out, "scenario.l_bound = {}", fmt_f64(sc.l_bound()));
    let _ = writeln!(out, "scenario.g_bound = {}", fmt_f64(sc.g_bound()));
}

pub fn eta_lines(out: &mut String, trace: &RunTrace) {
    match trace.constant_eta() {
        Some(eta) => {
            let _ = writeln!(out, "eta.constant = {}", fmt_f64(eta));
        }
        None => {
            let mut etas = Vec::new();
            for &start in &trace.epoch_starts {
                etas.push(fmt_f64(trace.records[start - 1].eta));
            }
            let _ = writeln!(out, "eta.schedule = \"{}\"", etas.join(";"));
        }
    }
    let starts: Vec<String> = trace.epoch_starts.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "eta.epoch_starts = \"{}\"", starts.join(";"));
    if let Some(seed) = trace.seed {
        let _ = writeln!(out, "run_seed = {seed}");
    }
    if let Some(params) = trace.bandit {
        let _ = writeln!(out, "bandit.delta = {}", fmt_f64(params.delta));
        let _ = writeln!(out, "bandit.eta = {}", fmt_f64(params.eta));
        let _ = writeln!(out, "bandit.alpha = {}", fmt_f64(params.alpha));
        let _ = writeln!(out, "bandit.r = {}", fmt_f64(params.r));
        if let Some(g) = params.g_weight {
            let _ = writeln!(out, "bandit.g_weight = {}", fmt_f64(g));
        }
    }
}

pub fn regret_lines(out: &mut String, report: &RegretReport) {
    let _ = writeln!(out, "regret.cumulative_cost = {}", fmt_f64(report.cumulative_cost));
    let _ = writeln!(out, "regret.best_fixed_cost = {}", fmt_f64(report.best_fixed_cost));
    let _ = writeln!(out, "regret.value = {}", fmt_f64(report.regret));
    let _ = writeln!(out, "regret.best_point = \"{}\"", fmt_point(&report.best_point));
    let _ = writeln!(out, "regret.certificate = {}", fmt_f64(report.certificate));
}

pub fn variation_lines(out: &mut String, report: &VariationReport) {
    let _ = writeln!(out, "variation.total = {}", fmt_f64(report.total_var));
    let _ = writeln!(out, "variation.total.realized_gradients = {}", report.total_var_realized);
    estimate_lines(out, "variation.sequential", &report.seq_var);
    let _ = writeln!(out, "variation.evar_sequential = {}", fmt_f64(report.evar_seq));
    let _ = writeln!(out, "variation.evar_sequential.exact = true");
    estimate_lines(out, "variation.evar_cost", &report.evar_cost);
    match (report.var1, report.var2) {
        (Some(v1), Some(v2)) => {
            let _ = writeln!(out, "variation.var1 = {}", fmt_f64(v1));
            let _ = writeln!(out, "variation.var2 = {}", fmt_f64(v2));
        }
        _ => {
            let _ = writeln!(out, "# var1/var2 skipped: horizon above the quadratic-pass cap");
        }
    }
}

pub fn check_lines(out: &mut String, checks: &[(String, BoundCheck)]) {
    for (name, check) in checks {
        let _ = writeln!(out, "check.{name}.lhs = {}", fmt_f64(check.lhs));
        let _ = writeln!(out, "check.{name}.rhs = {}", fmt_f64(check.rhs));
        let _ = writeln!(out, "check.{name}.margin = {}", fmt_f64(check.margin));
        let _ = writeln!(out, "check.{name}.satisfied = {}", check.satisfied);
    }
    let all = checks.iter().all(|(_, c)| c.satisfied);
    let _ = writeln!(out, "checks_passed = {all}");
}

pub fn config_echo(out: &mut String, raw: &str) {
    let _ = writeln!(out, "# --- config echo ---");
    for line in raw.lines() {
        let _ = writeln!(out, "# {line}");
    }
}
