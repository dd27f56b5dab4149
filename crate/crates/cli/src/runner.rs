//! Command execution: run one algorithm, compare several on a shared
//! scenario, sweep a parameter grid, and re-check a stored trace.
//!
//! Exit codes are threaded back as integers: 0 means every requested
//! check passed, 1 means at least one failed, and errors bubble up as
//! `Err` for the caller to turn into exit 2.

use crate::config::{AlgorithmSpec, LoadedConfig, SweepSpec};
use crate::output::{self, fmt_f64};
use anyhow::{bail, Context, Result};
use oco_core::algorithms::{
    run_bandit, run_ftrl_linear, run_ftrl_on_gradients, run_general_prox, run_improved_ftrl,
    run_prox, AlgorithmId, RunRecord, RunTrace, SharedScenario,
};
use oco_core::costs::{evar_cost_values_prefix, variation_report};
use oco_core::geometry::Point;
use oco_core::harness::{
    check_bandit_estimator, check_theorem4, check_theorem_bound, regret, BoundCheck, TheoremId,
    EVAR_COST_SAMPLES,
};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;

/// Runs one algorithm spec on a scenario. `seed_override` replaces the
/// configured bandit run seed; deterministic methods reject it.
pub fn execute(
    scenario: &SharedScenario,
    spec: &AlgorithmSpec,
    seed_override: Option<u64>,
) -> Result<RunTrace> {
    let id = spec.algorithm_id()?;
    if seed_override.is_some() && id != AlgorithmId::Bandit {
        bail!("--seed only applies to bandit runs; {} is deterministic", spec.id);
    }
    let trace = match id {
        AlgorithmId::FtrlLinear => run_ftrl_linear(scenario.clone(), spec.step_rule()?)?,
        AlgorithmId::FtrlOnGradients => run_ftrl_on_gradients(scenario.clone(), spec.step_rule()?)?,
        AlgorithmId::ImprovedFtrl => run_improved_ftrl(scenario.clone(), spec.step_rule()?)?,
        AlgorithmId::Prox => run_prox(scenario.clone(), spec.step_rule()?)?,
        AlgorithmId::GeneralProx(map) => run_general_prox(scenario.clone(), map, spec.step_rule()?)?,
        AlgorithmId::Bandit => {
            let params = spec.bandit_params(scenario)?;
            let seed = seed_override.or(spec.seed).unwrap_or(0);
            run_bandit(scenario.clone(), params, seed)?
        }
    };
    Ok(trace)
}

/// Running prefix of the variation quantity the method's analysis
/// tracks: gradient change along the search points for full-information
/// runs, worst-case value change for bandit runs.
fn evar_partial_column(trace: &RunTrace) -> Vec<f64> {
    let scenario = trace.scenario();
    if trace.algorithm == AlgorithmId::Bandit {
        return evar_cost_values_prefix(scenario, EVAR_COST_SAMPLES)
            .into_iter()
            .map(|e| e.value)
            .collect();
    }
    let mut out = Vec::with_capacity(trace.horizon());
    let mut running = 0.0;
    for t in 0..trace.horizon() {
        let z = trace.z_at(t);
        let diff = scenario.grad(t + 1, z).sub(&scenario.grad(t, z));
        running += diff.norm_sq();
        out.push(running);
    }
    out
}

/// Whether a named bound is stated for the given method.
fn check_applies(id: TheoremId, alg: AlgorithmId) -> bool {
    match id {
        TheoremId::Eq2 => alg == AlgorithmId::FtrlLinear,
        TheoremId::Thm1 | TheoremId::Lemma1 => alg == AlgorithmId::ImprovedFtrl,
        TheoremId::Thm2 => alg == AlgorithmId::Prox,
        TheoremId::Thm3 => matches!(alg, AlgorithmId::GeneralProx(_)),
        TheoremId::Lemma2Step => {
            matches!(alg, AlgorithmId::Prox | AlgorithmId::GeneralProx(_))
        }
        TheoremId::Thm4 | TheoremId::EstimatorBias => alg == AlgorithmId::Bandit,
    }
}

/// Runs the requested checks against one finished trace. With `strict`
/// a check that is not stated for the trace's method is an error;
/// otherwise it is skipped (compare mixes methods on purpose).
fn run_checks(
    scenario: &SharedScenario,
    trace: &RunTrace,
    spec: &AlgorithmSpec,
    ids: &[TheoremId],
    strict: bool,
) -> Result<Vec<(String, BoundCheck)>> {
    let alg = spec.algorithm_id()?;
    let mut out = Vec::new();
    for &id in ids {
        if !check_applies(id, alg) {
            if strict {
                bail!("check {:?} is not stated for algorithm {:?}", id.name(), spec.id);
            }
            continue;
        }
        let check = match id {
            TheoremId::Thm4 => {
                let seeds = spec.seeds.as_deref().unwrap_or(&[]);
                if seeds.len() < 2 {
                    bail!(
                        "the bandit bound is an expectation; give at least two run \
                         seeds in [algorithm] `seeds`"
                    );
                }
                let params = spec.bandit_params(scenario)?;
                check_theorem4(scenario, params, seeds, |_, _| {})?
            }
            TheoremId::EstimatorBias => {
                let params = spec.bandit_params(scenario)?;
                let origin = Point::zeros(scenario.dim());
                check_bandit_estimator(scenario, &origin, params.delta)?
            }
            other => check_theorem_bound(trace, other)?,
        };
        out.push((id.name().to_string(), check));
    }
    Ok(out)
}

/// Fails before any compute happens if outputs cannot land anywhere.
fn ensure_out_dir(out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("output directory {} is not writable", out_dir.display()))
}

fn exit_for(checks: &[(String, BoundCheck)]) -> i32 {
    if checks.iter().all(|(_, c)| c.satisfied) {
        0
    } else {
        1
    }
}

fn algorithm_lines(out: &mut String, spec: &AlgorithmSpec) {
    let _ = writeln!(out, "algorithm.id = \"{}\"", spec.id);
    let _ = writeln!(out, "algorithm.step = \"{}\"", spec.step_label());
}

pub fn cmd_run(loaded: &LoadedConfig, out_dir: &Path, seed_override: Option<u64>) -> Result<i32> {
    let cfg = &loaded.config;
    if cfg.sweep.is_some() {
        bail!("config has a [sweep] section; use the sweep command");
    }
    let specs = cfg.algorithm_specs();
    if specs.len() != 1 {
        bail!("run takes exactly one [algorithm]; use compare for several");
    }
    let spec = specs[0];
    ensure_out_dir(out_dir)?;
    let scenario = cfg.scenario.build()?;
    let trace = execute(&scenario, spec, seed_override)?;
    let report = regret(&trace)?;
    let variation = variation_report(&trace, EVAR_COST_SAMPLES)?;
    let checks = run_checks(&scenario, &trace, spec, &cfg.check_ids(), true)?;

    let evar_partial = evar_partial_column(&trace);
    let csv = output::render_trace(&trace, &report.best_point, &evar_partial);
    output::write_file(&out_dir.join(cfg.output.trace_name()), &csv)?;

    let mut summary = String::new();
    output::summary_header(&mut summary, "run");
    output::scenario_lines(&mut summary, &trace);
    algorithm_lines(&mut summary, spec);
    output::eta_lines(&mut summary, &trace);
    output::regret_lines(&mut summary, &report);
    output::variation_lines(&mut summary, &variation);
    output::check_lines(&mut summary, &checks);
    output::config_echo(&mut summary, &loaded.raw);
    output::write_file(&out_dir.join(cfg.output.summary_name()), &summary)?;

    Ok(exit_for(&checks))
}

/// Writes each line of `body` under a section label, leaving comment
/// lines alone.
fn labeled_lines(out: &mut String, label: &str, body: &str) {
    for line in body.lines() {
        if line.starts_with('#') || line.is_empty() {
            let _ = writeln!(out, "{line}");
        } else {
            let _ = writeln!(out, "{label}.{line}");
        }
    }
}

/// Section labels for a compare table: the algorithm id, with a
/// counter appended when the same id appears more than once.
fn compare_labels(specs: &[&AlgorithmSpec]) -> Vec<String> {
    let mut labels = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let total = specs.iter().filter(|s| s.id == spec.id).count();
        if total == 1 {
            labels.push(spec.id.clone());
        } else {
            let nth = specs[..i].iter().filter(|s| s.id == spec.id).count() + 1;
            labels.push(format!("{}_{nth}", spec.id));
        }
    }
    labels
}

pub fn cmd_compare(
    loadeds: &[LoadedConfig],
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<i32> {
    let first = &loadeds[0].config;
    for other in &loadeds[1..] {
        if other.config.scenario != first.scenario {
            bail!("compare runs on one shared scenario; the [scenario] sections disagree");
        }
        if other.config.sweep.is_some() {
            bail!("config has a [sweep] section; use the sweep command");
        }
    }
    if first.sweep.is_some() {
        bail!("config has a [sweep] section; use the sweep command");
    }

    // (config index, spec) pairs so each algorithm keeps its own
    // config's check list.
    let mut entries: Vec<(usize, &AlgorithmSpec)> = Vec::new();
    for (i, loaded) in loadeds.iter().enumerate() {
        for spec in loaded.config.algorithm_specs() {
            entries.push((i, spec));
        }
    }
    if entries.is_empty() {
        bail!("compare needs at least one [algorithm]");
    }
    if entries.len() == 1 && loadeds.len() == 1 {
        // A single algorithm is just a run.
        return cmd_run(&loadeds[0], out_dir, seed_override);
    }

    ensure_out_dir(out_dir)?;
    let scenario = first.scenario.build()?;
    let specs: Vec<&AlgorithmSpec> = entries.iter().map(|(_, s)| *s).collect();
    let labels = compare_labels(&specs);

    let mut traces = Vec::with_capacity(entries.len());
    let mut reports = Vec::with_capacity(entries.len());
    let mut all_checks = Vec::with_capacity(entries.len());
    for (cfg_idx, spec) in &entries {
        let trace = execute(&scenario, spec, seed_override)?;
        let report = regret(&trace)?;
        let checks = run_checks(
            &scenario,
            &trace,
            spec,
            &loadeds[*cfg_idx].config.check_ids(),
            false,
        )?;
        traces.push(trace);
        reports.push(report);
        all_checks.push(checks);
    }

    // Joined table: one cumulative-regret column per algorithm. The
    // offline comparator is shared, so one best point serves them all.
    let best_point = &reports[0].best_point;
    let horizon = scenario.horizon();
    let mut table = String::from("t");
    for label in &labels {
        let _ = write!(table, ",cum_regret_{label}");
    }
    table.push('\n');
    let mut cum_costs = vec![0.0; traces.len()];
    let mut cum_best = 0.0;
    for t in 1..=horizon {
        cum_best += scenario.eval(t, best_point);
        let _ = write!(table, "{t}");
        for (i, trace) in traces.iter().enumerate() {
            cum_costs[i] += trace.records[t - 1].cost;
            let _ = write!(table, ",{}", fmt_f64(cum_costs[i] - cum_best));
        }
        table.push('\n');
    }
    output::write_file(&out_dir.join(first.output.table_name()), &table)?;

    let mut summary = String::new();
    output::summary_header(&mut summary, "compare");
    output::scenario_lines(&mut summary, &traces[0]);
    for (i, spec) in specs.iter().enumerate() {
        let variation = variation_report(&traces[i], EVAR_COST_SAMPLES)?;
        let mut body = String::new();
        algorithm_lines(&mut body, spec);
        output::eta_lines(&mut body, &traces[i]);
        output::regret_lines(&mut body, &reports[i]);
        output::variation_lines(&mut body, &variation);
        output::check_lines(&mut body, &all_checks[i]);
        let _ = writeln!(summary, "# --- {} ---", labels[i]);
        labeled_lines(&mut summary, &labels[i], &body);
    }
    for loaded in loadeds {
        output::config_echo(&mut summary, &loaded.raw);
    }
    output::write_file(&out_dir.join(first.output.summary_name()), &summary)?;

    let flat: Vec<(String, BoundCheck)> = all_checks.into_iter().flatten().collect();
    Ok(exit_for(&flat))
}

#[derive(Clone, Copy)]
struct Combo {
    t: Option<usize>,
    d: Option<usize>,
    drift: Option<f64>,
    spread: Option<f64>,
    seed: Option<u64>,
}

struct SweepRow {
    line: String,
    group: String,
    regret: f64,
    satisfied: bool,
}

fn axis<T: Copy>(values: &Option<Vec<T>>, name: &str) -> Result<Vec<Option<T>>> {
    match values {
        None => Ok(vec![None]),
        Some(v) if v.is_empty() => bail!("sweep axis `{name}` is an empty range"),
        Some(v) => Ok(v.iter().map(|x| Some(*x)).collect()),
    }
}

fn combo_id(c: &Combo, spec: &SweepSpec) -> String {
    let mut parts = Vec::new();
    if spec.t.is_some() {
        parts.push(format!("t{}", c.t.unwrap()));
    }
    if spec.d.is_some() {
        parts.push(format!("d{}", c.d.unwrap()));
    }
    if spec.drift.is_some() {
        parts.push(format!("drift{}", c.drift.unwrap()));
    }
    if spec.spread.is_some() {
        parts.push(format!("spread{}", c.spread.unwrap()));
    }
    if spec.seeds.is_some() {
        parts.push(format!("seed{}", c.seed.unwrap()));
    }
    parts.join("-")
}

fn group_id(c: &Combo, spec: &SweepSpec) -> String {
    let no_seed = Combo { seed: None, ..*c };
    let base = combo_id(&no_seed, &SweepSpec { seeds: None, ..spec.clone() });
    if base.is_empty() {
        "all".to_string()
    } else {
        base
    }
}

fn eta_cell(trace: &RunTrace) -> String {
    match trace.constant_eta() {
        Some(eta) => fmt_f64(eta),
        None => {
            let per_epoch: Vec<String> = trace
                .epoch_starts
                .iter()
                .map(|&s| fmt_f64(trace.records[s - 1].eta))
                .collect();
            per_epoch.join(";")
        }
    }
}

pub fn cmd_sweep(
    loaded: &LoadedConfig,
    out_dir: &Path,
    seed_override: Option<u64>,
    jobs: Option<usize>,
) -> Result<i32> {
    let cfg = &loaded.config;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("sweep needs a [sweep] section"))?;
    let specs = cfg.algorithm_specs();
    if specs.len() != 1 {
        bail!("sweep takes exactly one [algorithm]");
    }
    let spec = specs[0];
    let alg = spec.algorithm_id()?;
    let seeds_are_run_seeds = alg == AlgorithmId::Bandit;

    if sweep.t.is_none()
        && sweep.d.is_none()
        && sweep.seeds.is_none()
        && sweep.drift.is_none()
        && sweep.spread.is_none()
    {
        bail!("sweep needs at least one axis (t, d, seeds, drift, spread)");
    }
    if sweep.drift.is_some() && cfg.scenario.drift.is_none() {
        bail!(
            "family {:?} does not take a drift parameter; remove the drift axis",
            cfg.scenario.family
        );
    }
    if sweep.spread.is_some() && cfg.scenario.spread.is_none() {
        bail!(
            "family {:?} does not take a spread parameter; remove the spread axis",
            cfg.scenario.family
        );
    }
    if sweep.seeds.is_some() && !seeds_are_run_seeds && cfg.scenario.seed.is_none() {
        bail!(
            "family {:?} does not take a scenario seed; a seeds axis needs a seeded \
             family or a bandit run",
            cfg.scenario.family
        );
    }

    let ts = axis(&sweep.t, "t")?;
    let ds = axis(&sweep.d, "d")?;
    let drifts = axis(&sweep.drift, "drift")?;
    let spreads = axis(&sweep.spread, "spread")?;
    let seeds = axis(&sweep.seeds, "seeds")?;
    ensure_out_dir(out_dir)?;

    let mut combos = Vec::new();
    for &t in &ts {
        for &d in &ds {
            for &drift in &drifts {
                for &spread in &spreads {
                    for &seed in &seeds {
                        combos.push(Combo { t, d, drift, spread, seed });
                    }
                }
            }
        }
    }

    let ids = cfg.check_ids();
    let run_one = |combo: &Combo| -> Result<SweepRow> {
        let scenario_seed = if seeds_are_run_seeds { None } else { combo.seed };
        let scen_spec = cfg.scenario.with(
            combo.t,
            combo.d,
            scenario_seed,
            combo.drift,
            combo.spread,
        );
        let scenario = scen_spec.build()?;
        let run_seed = if seeds_are_run_seeds {
            combo.seed.or(seed_override).or(spec.seed)
        } else {
            seed_override
        };
        let trace = execute(&scenario, spec, run_seed)?;
        let report = regret(&trace)?;
        let checks = run_checks(&scenario, &trace, spec, &ids, true)?;

        let run_id = combo_id(combo, sweep);
        let mut line = String::new();
        let _ = write!(
            line,
            "{run_id},{},{},{},{}",
            spec.id,
            scen_spec.family,
            scenario.horizon(),
            scenario.dim()
        );
        let _ = write!(
            line,
            ",{}",
            scen_spec.seed.map(|s| s.to_string()).unwrap_or_default()
        );
        let _ = write!(
            line,
            ",{}",
            trace.seed.map(|s| s.to_string()).unwrap_or_default()
        );
        let _ = write!(
            line,
            ",{}",
            scen_spec.drift.map(fmt_f64).unwrap_or_default()
        );
        let _ = write!(
            line,
            ",{}",
            scen_spec.spread.map(fmt_f64).unwrap_or_default()
        );
        let _ = write!(line, ",{},{}", eta_cell(&trace), fmt_f64(report.regret));
        for (_, check) in &checks {
            let _ = write!(
                line,
                ",{},{},{},{}",
                fmt_f64(check.lhs),
                fmt_f64(check.rhs),
                fmt_f64(check.margin),
                check.satisfied
            );
        }
        line.push('\n');
        Ok(SweepRow {
            line,
            group: group_id(combo, sweep),
            regret: report.regret,
            satisfied: checks.iter().all(|(_, c)| c.satisfied),
        })
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("cannot build the worker pool")?;
    let rows: Vec<SweepRow> =
        pool.install(|| combos.par_iter().map(run_one).collect::<Result<Vec<_>>>())?;

    // All writes happen here, in combo order, after every run finished.
    let mut csv = String::from("run_id,algorithm,family,t,d,scenario_seed,run_seed,drift,spread,eta,regret");
    for id in &ids {
        let name = id.name();
        let _ = write!(csv, ",{name}_lhs,{name}_rhs,{name}_margin,{name}_satisfied");
    }
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.line);
    }
    output::write_file(&out_dir.join(cfg.output.sweep_name()), &csv)?;

    let mut summary = String::new();
    output::summary_header(&mut summary, "sweep");
    let _ = writeln!(summary, "sweep.file = \"{}\"", cfg.output.sweep_name());
    let _ = writeln!(summary, "sweep.rows = {}", rows.len());
    let seed_count = sweep.seeds.as_ref().map_or(0, |s| s.len());
    if seed_count >= 2 {
        // Group rows that differ only in the seed, in first-seen order.
        let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
        for row in &rows {
            match groups.iter_mut().find(|(g, _)| *g == row.group) {
                Some((_, v)) => v.push(row.regret),
                None => groups.push((row.group.clone(), vec![row.regret])),
            }
        }
        for (group, regrets) in &groups {
            let n = regrets.len() as f64;
            let mean = regrets.iter().sum::<f64>() / n;
            let var = regrets.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let stderr = (var / n).sqrt();
            let _ = writeln!(summary, "aggregate.{group}.n = {}", regrets.len());
            let _ = writeln!(summary, "aggregate.{group}.regret_mean = {}", fmt_f64(mean));
            let _ = writeln!(summary, "aggregate.{group}.regret_stderr = {}", fmt_f64(stderr));
        }
    }
    let all_ok = rows.iter().all(|r| r.satisfied);
    let _ = writeln!(summary, "checks_passed = {all_ok}");
    output::config_echo(&mut summary, &loaded.raw);
    output::write_file(&out_dir.join(cfg.output.summary_name()), &summary)?;

    Ok(if all_ok { 0 } else { 1 })
}

fn parse_point(cell: &str) -> Result<Point> {
    let coords: Result<Vec<f64>, _> = cell.split(';').map(str::parse).collect();
    let coords = coords.with_context(|| format!("bad point cell {cell:?}"))?;
    Ok(Point::new(coords)?)
}

fn parse_trace_csv(csv: &str, scenario: &SharedScenario) -> Result<Vec<RunRecord>> {
    let mut lines = csv.lines();
    let header = lines.next().context("trace file is empty")?;
    let expected = "t,eta,x,z,cost,cum_cost,cum_regret,evar_partial";
    if header != expected {
        bail!("unexpected trace header {header:?} (expected {expected:?})");
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row = i + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 8 {
            bail!("trace row {row} has {} columns, expected 8", cells.len());
        }
        let t: usize = cells[0].parse().with_context(|| format!("bad round index in row {row}"))?;
        if t != records.len() + 1 {
            bail!("trace rows out of order at row {row} (t = {t})");
        }
        let eta: f64 = cells[1].parse().with_context(|| format!("bad eta in row {row}"))?;
        let x = parse_point(cells[2]).with_context(|| format!("bad x in row {row}"))?;
        let z = parse_point(cells[3]).with_context(|| format!("bad z in row {row}"))?;
        let cost: f64 = cells[4].parse().with_context(|| format!("bad cost in row {row}"))?;
        if x.dim() != scenario.dim() || z.dim() != scenario.dim() {
            bail!("row {row} has dimension {}, scenario has {}", x.dim(), scenario.dim());
        }
        records.push(RunRecord { t, x, z, cost, eta, queries: Vec::new() });
    }
    if records.len() != scenario.horizon() {
        bail!(
            "trace has {} rounds; the scenario expects {}",
            records.len(),
            scenario.horizon()
        );
    }
    Ok(records)
}

/// Rebuilds a run trace from a stored CSV so checkers can replay it.
/// The starting point and epoch boundaries are recovered from the
/// method (they are not stored): epochs begin wherever the recorded
/// step size changes.
fn rebuild_trace(
    scenario: &SharedScenario,
    spec: &AlgorithmSpec,
    seed_override: Option<u64>,
    csv: &str,
) -> Result<RunTrace> {
    let records = parse_trace_csv(csv, scenario)?;
    let id = spec.algorithm_id()?;
    let z0 = match id {
        AlgorithmId::GeneralProx(map) => map.argmin_omega(scenario.set())?,
        _ => Point::zeros(scenario.dim()),
    };
    let mut epoch_starts = vec![1];
    for pair in records.windows(2) {
        if pair[1].eta != pair[0].eta {
            epoch_starts.push(pair[1].t);
        }
    }
    let (seed, bandit) = if id == AlgorithmId::Bandit {
        (
            Some(seed_override.or(spec.seed).unwrap_or(0)),
            Some(spec.bandit_params(scenario)?),
        )
    } else {
        (None, None)
    };
    Ok(RunTrace {
        scenario: scenario.clone(),
        algorithm: id,
        seed,
        z0,
        records,
        epoch_starts,
        bandit,
    })
}

pub fn cmd_check(loaded: &LoadedConfig, out_dir: &Path, seed_override: Option<u64>) -> Result<i32> {
    let cfg = &loaded.config;
    let specs = cfg.algorithm_specs();
    if specs.len() != 1 {
        bail!("check takes exactly one [algorithm]");
    }
    let spec = specs[0];
    let ids = cfg.check_ids();
    if ids.is_empty() {
        bail!("check needs a non-empty `checks` list");
    }
    let scenario = cfg.scenario.build()?;
    let path = out_dir.join(cfg.output.trace_name());
    let csv = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read stored trace {}", path.display()))?;
    let trace = rebuild_trace(&scenario, spec, seed_override, &csv)?;
    let checks = run_checks(&scenario, &trace, spec, &ids, true)?;
    for (name, check) in &checks {
        println!(
            "check {name}: lhs={} rhs={} margin={} satisfied={}",
            fmt_f64(check.lhs),
            fmt_f64(check.rhs),
            fmt_f64(check.margin),
            check.satisfied
        );
    }
    Ok(exit_for(&checks))
}
