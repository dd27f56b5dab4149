//! The online methods and their run traces.
//!
//! Five methods share one trace format:
//!
//! * [`run_ftrl_linear`]: follow-the-regularized-leader on known linear
//!   costs, with the variation-tuned step,
//! * [`run_ftrl_on_gradients`]: the same update fed realized gradients,
//!   a baseline whose step must be tuned to the horizon,
//! * [`run_improved_ftrl`]: FTRL on gradients taken at an auxiliary
//!   search point, with a one-round-lookback played point,
//! * [`run_prox`]: the two-projection proximal variant,
//! * [`run_general_prox`]: the proximal variant under a mirror map,
//! * [`run_bandit`]: the value-queries-only variant with multi-point
//!   gradient estimation on a shrunk set.
//!
//! Step sizes come from a [`StepSizeRule`]: a fixed value, the
//! theorem-prescribed value from a priori extended variation when that
//! quantity is available in closed form, or a doubling schedule that
//! learns the variation online.

use std::sync::Arc;

use crate::costs::{exact_evar_general, exact_evar_sequential, total_variation, Scenario};
use crate::error::Error;
use crate::geometry::{ftrl_solve, linearized_step, MirrorMap, Point, FEASIBILITY_TOL};
use crate::rng::SplitMix64;
use crate::Result;

/// Shared, immutable scenario handle stored inside traces.
pub type SharedScenario = Arc<Scenario>;

/// Stable identifiers for the methods.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlgorithmId {
    FtrlLinear,
    FtrlOnGradients,
    ImprovedFtrl,
    Prox,
    GeneralProx(MirrorMap),
    Bandit,
}

impl AlgorithmId {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::FtrlLinear => "ftrl_linear",
            AlgorithmId::FtrlOnGradients => "ftrl_gradients",
            AlgorithmId::ImprovedFtrl => "improved_ftrl",
            AlgorithmId::Prox => "prox",
            AlgorithmId::GeneralProx(MirrorMap::Euclidean) => "general_prox_euclidean",
            AlgorithmId::GeneralProx(MirrorMap::Entropy) => "general_prox_entropy",
            AlgorithmId::Bandit => "bandit",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "ftrl_linear" => AlgorithmId::FtrlLinear,
            "ftrl_gradients" => AlgorithmId::FtrlOnGradients,
            "improved_ftrl" => AlgorithmId::ImprovedFtrl,
            "prox" => AlgorithmId::Prox,
            "general_prox_euclidean" => AlgorithmId::GeneralProx(MirrorMap::Euclidean),
            "general_prox_entropy" => AlgorithmId::GeneralProx(MirrorMap::Entropy),
            "bandit" => AlgorithmId::Bandit,
            _ => return None,
        })
    }
}

/// How the step size is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSizeRule {
    /// Use this value for the whole run.
    Fixed(f64),
    /// Use the theorem-prescribed value computed from a priori
    /// variation; fails when that quantity has no closed form.
    OracleEvar,
    /// Guess-and-double on the observed extended variation.
    Doubling,
}

/// One round of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    /// 1-based round number.
    pub t: usize,
    /// The point charged with this round's cost.
    pub x: Point,
    /// The search point after this round (z_t).
    pub z: Point,
    /// Loss charged this round; the smoothed two-point loss for bandit
    /// runs, c_t(x_t) otherwise.
    pub cost: f64,
    /// Step size in effect this round.
    pub eta: f64,
    /// Bandit value queries made this round, in query order; empty for
    /// full-information methods.
    pub queries: Vec<(Point, f64)>,
}

/// Parameters of a bandit run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BanditParams {
    /// Probe offset along coordinate directions.
    pub delta: f64,
    /// Step size.
    pub eta: f64,
    /// Radius of a ball around the origin contained in the set.
    pub r: f64,
    /// Shrink factor; must equal delta / r so probes stay feasible.
    pub alpha: f64,
    /// The gain constant in the proximal weight gain/(2 eta); defaults
    /// to the scenario's value-Lipschitz bound.
    pub g_weight: Option<f64>,
}

/// A complete run: the scenario, the method, and every round.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub scenario: SharedScenario,
    pub algorithm: AlgorithmId,
    /// Seed of the method's own randomness (bandit only).
    pub seed: Option<u64>,
    /// Search point before round one.
    pub z0: Point,
    pub records: Vec<RunRecord>,
    /// 1-based first rounds of each doubling epoch; `[1]` for
    /// constant-step runs.
    pub epoch_starts: Vec<usize>,
    pub bandit: Option<BanditParams>,
}

impl RunTrace {
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    /// Played point of round t (1-based).
    pub fn x_at(&self, t: usize) -> &Point {
        assert!(t >= 1 && t <= self.records.len(), "round {t} out of range");
        &self.records[t - 1].x
    }

    /// Search point z_t; t = 0 gives the starting point.
    pub fn z_at(&self, t: usize) -> &Point {
        if t == 0 {
            &self.z0
        } else {
            assert!(t <= self.records.len(), "round {t} out of range");
            &self.records[t - 1].z
        }
    }

    pub fn cumulative_cost(&self) -> f64 {
        self.records.iter().map(|r| r.cost).sum()
    }

    /// The common step size, when every round used the same one.
    pub fn constant_eta(&self) -> Option<f64> {
        let first = self.records.first()?.eta;
        self.records.iter().all(|r| r.eta == first).then_some(first)
    }
}

// ---- Step-size formulas ----

/// Variation-tuned FTRL step: min(2 / sqrt(V), 1/6).
pub fn eq2_eta(total_var: f64) -> f64 {
    assert!(total_var >= 0.0, "variation cannot be negative");
    (2.0 / total_var.sqrt()).min(1.0 / 6.0)
}

/// Step for the improved FTRL method: min(1, L / sqrt(EVAR)).
pub fn theorem1_eta(l: f64, evar_seq: f64) -> f64 {
    assert!(l > 0.0 && evar_seq >= 0.0);
    (l / evar_seq.sqrt()).min(1.0)
}

/// Step for the proximal method: half the improved-FTRL step.
pub fn theorem2_eta(l: f64, evar_seq: f64) -> f64 {
    0.5 * theorem1_eta(l, evar_seq)
}

/// Step for the general proximal method:
/// (1/2) min(sqrt(alpha), L R / sqrt(EVAR)).
pub fn theorem3_eta(l: f64, size_radius: f64, strong_convexity: f64, evar_general: f64) -> f64 {
    assert!(l > 0.0 && size_radius >= 0.0 && strong_convexity > 0.0 && evar_general >= 0.0);
    0.5 * strong_convexity.sqrt().min(l * size_radius / evar_general.sqrt())
}

/// Bandit parameters tuned to the horizon, the smoothness constants,
/// and the cost-value variation.
pub fn theorem4_params(scenario: &Scenario, r: f64, evar_cost: f64) -> Result<BanditParams> {
    let set = scenario.set();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidConfiguration(format!("inscribed radius must be positive, got {r}")));
    }
    if r > set.inner_radius() + FEASIBILITY_TOL {
        return Err(Error::InvalidConfiguration(format!(
            "inscribed radius {r} exceeds the set's inner radius {}",
            set.inner_radius()
        )));
    }
    if !(evar_cost >= 0.0) {
        return Err(Error::InvalidConfiguration(format!(
            "cost-value variation must be nonnegative, got {evar_cost}"
        )));
    }
    let d = scenario.dim() as f64;
    let t = scenario.horizon() as f64;
    let g = scenario.g_bound();
    let l = scenario.l_bound();
    let lead = g.max(evar_cost.sqrt());
    let delta = (4.0 * d * lead / ((d * l + g * (1.0 + 1.0 / r)) * t)).sqrt();
    let eta = delta / (4.0 * d) * (g / evar_cost.sqrt()).min(1.0);
    let alpha = delta / r;
    if !(alpha < 1.0) {
        return Err(Error::InvalidConfiguration(format!(
            "horizon {t} is too short for these constants: shrink factor would be {alpha}"
        )));
    }
    Ok(BanditParams { delta, eta, r, alpha, g_weight: None })
}

// ---- FTRL on known linear costs ----

/// Follow-the-regularized-leader on a known linear sequence:
/// x_t minimizes the past cost sum plus a quadratic regularizer.
///
/// Requires every cost linear with norm at most 1 and the origin in
/// the set. Supports `Fixed` and `OracleEvar` (variation-tuned) rules.
pub fn run_ftrl_linear(scenario: SharedScenario, rule: StepSizeRule) -> Result<RunTrace> {
    for (i, c) in scenario.costs().iter().enumerate() {
        let f = c.linear_coefficient().ok_or(Error::NonLinearCost { index: i + 1 })?;
        if f.norm() > 1.0 + 1e-9 {
            return Err(Error::ContractViolation(format!(
                "cost {} has norm {}, above the unit bound this method requires",
                i + 1,
                f.norm()
            )));
        }
    }
    let eta = match rule {
        StepSizeRule::Fixed(e) => {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::InvalidConfiguration(format!("step size must be positive, got {e}")));
            }
            e
        }
        StepSizeRule::OracleEvar => eq2_eta(total_variation(scenario.costs())?),
        StepSizeRule::Doubling => {
            return Err(Error::InvalidConfiguration(
                "the doubling schedule is not defined for linear-cost FTRL".into(),
            ))
        }
    };
    run_ftrl_core(scenario, AlgorithmId::FtrlLinear, eta)
}

/// The same update fed realized gradients grad c_t(x_t), usable on any
/// cost family. `Fixed` rule only: a variation oracle for realized
/// gradients does not exist before the run.
pub fn run_ftrl_on_gradients(scenario: SharedScenario, rule: StepSizeRule) -> Result<RunTrace> {
    let eta = match rule {
        StepSizeRule::Fixed(e) => {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::InvalidConfiguration(format!("step size must be positive, got {e}")));
            }
            e
        }
        _ => {
            return Err(Error::InvalidConfiguration(
                "gradient FTRL supports only a fixed step size".into(),
            ))
        }
    };
    run_ftrl_core(scenario, AlgorithmId::FtrlOnGradients, eta)
}

fn run_ftrl_core(scenario: SharedScenario, algorithm: AlgorithmId, eta: f64) -> Result<RunTrace> {
    let set = scenario.set();
    if !set.contains_origin() {
        return Err(Error::InvalidConfiguration(
            "this method starts from the origin, which must belong to the set".into(),
        ));
    }
    let d = scenario.dim();
    let stiffness = 1.0 / eta;
    let mut grad_sum = Point::zeros(d);
    let mut records = Vec::with_capacity(scenario.horizon());
    for t in 1..=scenario.horizon() {
        let x = ftrl_solve(set, &grad_sum, stiffness)?;
        let cost = scenario.eval(t, &x);
        let f = match algorithm {
            AlgorithmId::FtrlLinear => scenario
                .cost(t)
                .linear_coefficient()
                .expect("linearity was validated up front"),
            _ => scenario.grad(t, &x),
        };
        grad_sum = grad_sum.add(&f);
        records.push(RunRecord { t, x: x.clone(), z: x, cost, eta, queries: Vec::new() });
    }
    Ok(RunTrace {
        scenario,
        algorithm,
        seed: None,
        z0: Point::zeros(d),
        records,
        epoch_starts: vec![1],
        bandit: None,
    })
}

// ---- Improved FTRL and the proximal method ----

/// Improved FTRL: gradients are taken at a search point z that follows
/// the regularized leader of those gradients, while the played point
/// takes one proximal step from z using the previous round's gradient.
///
/// `Fixed` steps must lie in (0, 1]; `OracleEvar` uses
/// min(1, L / sqrt(EVAR)); `Doubling` learns the variation online.
pub fn run_improved_ftrl(scenario: SharedScenario, rule: StepSizeRule) -> Result<RunTrace> {
    run_epochal(scenario, AlgorithmId::ImprovedFtrl, rule)
}

/// The proximal variant: both the played and the search point step
/// from z_{t-1}, the former with the previous gradient, the latter
/// with the fresh gradient at the played point.
///
/// `Fixed` steps must lie in (0, 1/2]; `OracleEvar` uses
/// (1/2) min(1, L / sqrt(EVAR)); `Doubling` learns the variation.
pub fn run_prox(scenario: SharedScenario, rule: StepSizeRule) -> Result<RunTrace> {
    run_epochal(scenario, AlgorithmId::Prox, rule)
}

/// Runs improved FTRL or prox under the doubling schedule. Exposed
/// separately so callers can name the adaptive variant directly.
pub fn adaptive_eta(base: AlgorithmId, scenario: SharedScenario) -> Result<RunTrace> {
    match base {
        AlgorithmId::ImprovedFtrl | AlgorithmId::Prox => {
            run_epochal(scenario, base, StepSizeRule::Doubling)
        }
        other => Err(Error::InvalidConfiguration(format!(
            "the doubling schedule applies to improved_ftrl and prox, not {}",
            other.name()
        ))),
    }
}

enum StepMode {
    Constant(f64),
    Doubling,
}

fn run_epochal(scenario: SharedScenario, base: AlgorithmId, rule: StepSizeRule) -> Result<RunTrace> {
    let improved = match base {
        AlgorithmId::ImprovedFtrl => true,
        AlgorithmId::Prox => false,
        other => {
            return Err(Error::InvalidConfiguration(format!(
                "internal runner got {}",
                other.name()
            )))
        }
    };
    let set = scenario.set();
    if !set.contains_origin() {
        return Err(Error::InvalidConfiguration(
            "this method starts from the origin, which must belong to the set".into(),
        ));
    }
    let l = scenario.l_bound();
    let d = scenario.dim();
    let eta_cap = if improved { 1.0 } else { 0.5 };
    let mode = match rule {
        StepSizeRule::Fixed(e) => {
            if !(e.is_finite() && e > 0.0 && e <= eta_cap) {
                return Err(Error::ContractViolation(format!(
                    "fixed step size must lie in (0, {eta_cap}], got {e}"
                )));
            }
            StepMode::Constant(e)
        }
        StepSizeRule::OracleEvar => {
            let evar = exact_evar_sequential(&scenario, &Point::zeros(d)).ok_or_else(|| {
                Error::StepSizeUnavailable(
                    "consecutive gradient differences depend on the query point, so extended \
                     variation has no closed form before the run; use a fixed or doubling rule"
                        .into(),
                )
            })?;
            let eta =
                if improved { theorem1_eta(l, evar) } else { theorem2_eta(l, evar) };
            StepMode::Constant(eta)
        }
        StepSizeRule::Doubling => StepMode::Doubling,
    };
    let mut epoch: i32 = 0;
    let (mut eta, mut evar_budget) = match mode {
        StepMode::Constant(e) => (e, f64::INFINITY),
        StepMode::Doubling => {
            let budget = l * l; // 4^0 L^2
            let eta = if improved { theorem1_eta(l, budget) } else { theorem2_eta(l, budget) };
            (eta, budget)
        }
    };
    let mut records = Vec::with_capacity(scenario.horizon());
    let mut epoch_starts = vec![1usize];
    let mut z = Point::zeros(d);
    let mut grad_sum = Point::zeros(d);
    let mut prev_grad = Point::zeros(d);
    let mut epoch_evar = 0.0;
    for t in 1..=scenario.horizon() {
        let stiffness = l / eta;
        let x = linearized_step(set, &z, &prev_grad, stiffness)?;
        let cost = scenario.eval(t, &x);
        let g_at_z = scenario.grad(t, &z);
        epoch_evar += g_at_z.distance_sq(&prev_grad);
        let z_new = if improved {
            grad_sum = grad_sum.add(&g_at_z);
            ftrl_solve(set, &grad_sum, stiffness)?
        } else {
            let g_at_x = scenario.grad(t, &x);
            linearized_step(set, &z, &g_at_x, stiffness)?
        };
        prev_grad = scenario.grad(t, &z_new);
        z = z_new;
        records.push(RunRecord { t, x, z: z.clone(), cost, eta, queries: Vec::new() });
        if matches!(mode, StepMode::Doubling) && epoch_evar > evar_budget && t < scenario.horizon()
        {
            // the triggering round stays in the closing epoch; the next
            // epoch restarts the method with a quadrupled budget
            epoch += 1;
            evar_budget = l * l * 4f64.powi(epoch);
            eta = if improved {
                theorem1_eta(l, evar_budget)
            } else {
                theorem2_eta(l, evar_budget)
            };
            z = Point::zeros(d);
            grad_sum = Point::zeros(d);
            prev_grad = Point::zeros(d);
            epoch_evar = 0.0;
            epoch_starts.push(t + 1);
        }
    }
    Ok(RunTrace {
        scenario,
        algorithm: base,
        seed: None,
        z0: Point::zeros(d),
        records,
        epoch_starts,
        bandit: None,
    })
}

// ---- General proximal method ----

/// The proximal method under a mirror map: steps minimize a linear
/// model plus a scaled divergence, starting from the map's minimizer.
///
/// `Fixed` steps must lie in (0, sqrt(alpha)/2]; `OracleEvar` uses the
/// dual-norm variation. The doubling schedule is not defined here.
pub fn run_general_prox(
    scenario: SharedScenario,
    map: MirrorMap,
    rule: StepSizeRule,
) -> Result<RunTrace> {
    let set = scenario.set();
    map.check_compatible(set)?;
    let l = scenario.l_bound();
    let strong_convexity = map.strong_convexity();
    let cap = 0.5 * strong_convexity.sqrt();
    let z0 = map.argmin_omega(set)?;
    let eta = match rule {
        StepSizeRule::Fixed(e) => {
            if !(e.is_finite() && e > 0.0 && e <= cap) {
                return Err(Error::ContractViolation(format!(
                    "fixed step size must lie in (0, {cap}], got {e}"
                )));
            }
            e
        }
        StepSizeRule::OracleEvar => {
            let evar = exact_evar_general(&scenario, &z0, map).ok_or_else(|| {
                Error::StepSizeUnavailable(
                    "consecutive gradient differences depend on the query point, so extended \
                     variation has no closed form before the run; use a fixed rule"
                        .into(),
                )
            })?;
            let eta = theorem3_eta(l, map.size_radius(set)?, strong_convexity, evar);
            if !(eta > 0.0) {
                return Err(Error::StepSizeUnavailable(format!(
                    "prescribed step size degenerated to {eta}"
                )));
            }
            eta
        }
        StepSizeRule::Doubling => {
            return Err(Error::InvalidConfiguration(
                "the doubling schedule is not defined for the general proximal method".into(),
            ))
        }
    };
    let mut records = Vec::with_capacity(scenario.horizon());
    let mut z = z0.clone();
    let mut prev_grad = Point::zeros(scenario.dim());
    for t in 1..=scenario.horizon() {
        let stiffness = l / eta;
        let x = crate::geometry::bregman_prox_step(set, map, &z, &prev_grad, stiffness)?;
        let cost = scenario.eval(t, &x);
        let g_at_x = scenario.grad(t, &x);
        let z_new = crate::geometry::bregman_prox_step(set, map, &z, &g_at_x, stiffness)?;
        prev_grad = scenario.grad(t, &z_new);
        z = z_new;
        records.push(RunRecord { t, x, z: z.clone(), cost, eta, queries: Vec::new() });
    }
    Ok(RunTrace {
        scenario,
        algorithm: AlgorithmId::GeneralProx(map),
        seed: None,
        z0,
        records,
        epoch_starts: vec![1],
        bandit: None,
    })
}

// ---- Bandit method ----

/// The value-queries-only method. Plays inside the set shrunk by
/// alpha, probes d + 3 points per round, and feeds variance-reduced
/// gradient estimates to the proximal update. The recorded cost is the
/// smoothed two-point loss (c_t(x_t) + c_t(x_t + delta e)) / 2.
pub fn run_bandit(scenario: SharedScenario, params: BanditParams, seed: u64) -> Result<RunTrace> {
    let set = scenario.set();
    let d = scenario.dim();
    if !(params.delta.is_finite() && params.delta > 0.0) {
        return Err(Error::InvalidConfiguration(format!(
            "probe offset must be positive, got {}",
            params.delta
        )));
    }
    if !(params.eta.is_finite() && params.eta > 0.0) {
        return Err(Error::InvalidConfiguration(format!(
            "step size must be positive, got {}",
            params.eta
        )));
    }
    if !(params.r > 0.0 && params.r.is_finite()) {
        return Err(Error::InvalidConfiguration(format!(
            "inscribed radius must be positive, got {}",
            params.r
        )));
    }
    if params.r > set.inner_radius() + FEASIBILITY_TOL {
        return Err(Error::InvalidConfiguration(format!(
            "inscribed radius {} exceeds the set's inner radius {}",
            params.r,
            set.inner_radius()
        )));
    }
    let implied = params.delta / params.r;
    if (params.alpha - implied).abs() > 1e-12 * implied.max(1.0) {
        return Err(Error::ContractViolation(format!(
            "alpha must equal delta/r: got alpha {}, delta/r {}",
            params.alpha, implied
        )));
    }
    if !(params.alpha > 0.0 && params.alpha < 1.0) {
        return Err(Error::InvalidConfiguration(format!(
            "shrink factor must lie in (0, 1), got {}",
            params.alpha
        )));
    }
    let g_weight = params.g_weight.unwrap_or_else(|| scenario.g_bound());
    if !(g_weight.is_finite() && g_weight > 0.0) {
        return Err(Error::InvalidConfiguration(format!(
            "proximal gain must be positive, got {g_weight}"
        )));
    }
    let played = set.shrink(params.alpha)?;
    let stiffness = g_weight / params.eta;
    let scale_single = d as f64 / params.delta;
    let mut rng = SplitMix64::new(seed);
    let mut z = Point::zeros(d);
    let mut g_full_prev = Point::zeros(d);
    let mut probe_diffs_prev = vec![0.0; d];
    let mut records = Vec::with_capacity(scenario.horizon());
    for t in 1..=scenario.horizon() {
        let it = rng.index(d);
        let e_it = Point::basis(d, it);
        let x = linearized_step(&played, &z, &g_full_prev, stiffness)?;
        let x_probe = x.add_scaled(params.delta, &e_it);
        assert!(
            set.is_feasible(&x, FEASIBILITY_TOL) && set.is_feasible(&x_probe, FEASIBILITY_TOL),
            "bandit probe left the feasible set at round {t}"
        );
        let val_x = scenario.eval(t, &x);
        let val_x_probe = scenario.eval(t, &x_probe);
        // single-coordinate estimate at the played point, its stale
        // counterpart at the previous search point, and the full
        // estimate from the previous round's probe sweep
        let ghat = e_it.scale(scale_single * (val_x_probe - val_x));
        let ghat_prev = e_it.scale(scale_single * probe_diffs_prev[it]);
        let gtilde = ghat.add(&g_full_prev).sub(&ghat_prev);
        let z_new = linearized_step(&played, &z, &gtilde, stiffness)?;
        let val_z = scenario.eval(t, &z_new);
        let mut queries = Vec::with_capacity(d + 3);
        queries.push((x.clone(), val_x));
        queries.push((x_probe, val_x_probe));
        queries.push((z_new.clone(), val_z));
        let mut g_full = Point::zeros(d);
        let mut probe_diffs = vec![0.0; d];
        for i in 0..d {
            let p = z_new.add_scaled(params.delta, &Point::basis(d, i));
            assert!(
                set.is_feasible(&p, FEASIBILITY_TOL),
                "bandit probe left the feasible set at round {t}"
            );
            let v = scenario.eval(t, &p);
            probe_diffs[i] = v - val_z;
            g_full = g_full.add_scaled(probe_diffs[i] / params.delta, &Point::basis(d, i));
            queries.push((p, v));
        }
        let cost = 0.5 * (val_x + val_x_probe);
        records.push(RunRecord { t, x, z: z_new.clone(), cost, eta: params.eta, queries });
        z = z_new;
        g_full_prev = g_full;
        probe_diffs_prev = probe_diffs;
    }
    Ok(RunTrace {
        scenario,
        algorithm: AlgorithmId::Bandit,
        seed: Some(seed),
        z0: Point::zeros(d),
        records,
        epoch_starts: vec![1],
        bandit: Some(params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{CostFunction, SymMatrix};
    use crate::geometry::FeasibleSet;

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn linear_scenario(fs: &[&[f64]], set: FeasibleSet) -> SharedScenario {
        let costs: Vec<CostFunction> = fs.iter().map(|f| CostFunction::linear(pt(f))).collect();
        let g = costs.iter().map(|c| c.value_lipschitz()).fold(0.0f64, f64::max).max(0.1);
        Arc::new(Scenario::new("t-linear", costs, set, 1.0, g).unwrap())
    }

    fn identical_quadratic(a: &[f64], t: usize) -> SharedScenario {
        let d = a.len();
        let costs: Vec<CostFunction> = (0..t)
            .map(|_| CostFunction::quadratic(SymMatrix::identity(d), pt(a)).unwrap())
            .collect();
        let g = costs[0].value_lipschitz();
        Arc::new(Scenario::new("t-idq", costs, FeasibleSet::unit_ball(d), 1.0, g).unwrap())
    }

    #[test]
    fn algorithm_names_round_trip() {
        for id in [
            AlgorithmId::FtrlLinear,
            AlgorithmId::FtrlOnGradients,
            AlgorithmId::ImprovedFtrl,
            AlgorithmId::Prox,
            AlgorithmId::GeneralProx(MirrorMap::Euclidean),
            AlgorithmId::GeneralProx(MirrorMap::Entropy),
            AlgorithmId::Bandit,
        ] {
            assert_eq!(AlgorithmId::from_name(id.name()), Some(id));
        }
        assert_eq!(AlgorithmId::from_name("nope"), None);
    }

    #[test]
    fn step_size_formulas() {
        // variation 50: 2/sqrt(50) > 1/6, so the cap wins
        assert!((eq2_eta(50.0) - 1.0 / 6.0).abs() <= 1e-15);
        // large variation: the variation term wins
        assert!((eq2_eta(1e6) - 2e-3).abs() <= 1e-15);
        // zero variation degenerates to the cap
        assert!((eq2_eta(0.0) - 1.0 / 6.0).abs() <= 1e-15);

        assert!((theorem1_eta(1.0, 0.0) - 1.0).abs() <= 1e-15);
        assert!((theorem1_eta(1.0, 4.0) - 0.5).abs() <= 1e-15);
        assert!((theorem2_eta(1.0, 4.0) - 0.25).abs() <= 1e-15);
        assert!((theorem3_eta(1.0, 2.0, 1.0, 64.0) - 0.125).abs() <= 1e-15);
        assert!((theorem3_eta(1.0, 2.0, 1.0, 0.0) - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn ftrl_linear_identical_costs_frozen() {
        let f: &[f64] = &[1.0, 0.0];
        let sc = linear_scenario(&[f; 5], FeasibleSet::unit_ball(2));
        let trace = run_ftrl_linear(sc, StepSizeRule::Fixed(1.0 / 6.0)).unwrap();
        let x1 = trace.x_at(1);
        assert!(x1.norm() <= 1e-15, "first play is the origin");
        let x2 = trace.x_at(2);
        assert!((x2[0] + 1.0 / 6.0).abs() <= 1e-15 && x2[1].abs() <= 1e-15);
    }

    #[test]
    fn ftrl_linear_oracle_uses_the_variation_tuned_step() {
        let mut fs: Vec<&[f64]> = Vec::new();
        for _ in 0..50 {
            fs.push(&[1.0, 0.0]);
        }
        for _ in 0..50 {
            fs.push(&[0.0, 1.0]);
        }
        let sc = linear_scenario(&fs, FeasibleSet::unit_ball(2));
        let trace = run_ftrl_linear(sc, StepSizeRule::OracleEvar).unwrap();
        // variation 50 caps the step at 1/6
        assert_eq!(trace.constant_eta(), Some(1.0 / 6.0));
    }

    #[test]
    fn ftrl_linear_rejects_bad_inputs() {
        let sc = identical_quadratic(&[0.2, 0.0], 3);
        assert!(matches!(
            run_ftrl_linear(sc, StepSizeRule::Fixed(0.1)),
            Err(Error::NonLinearCost { index: 1 })
        ));

        let sc = linear_scenario(&[&[2.0, 0.0]], FeasibleSet::unit_ball(2));
        assert!(matches!(
            run_ftrl_linear(sc, StepSizeRule::Fixed(0.1)),
            Err(Error::ContractViolation(_))
        ));

        let off_center = FeasibleSet::axis_box(vec![0.1, 0.1], vec![0.5, 0.5]).unwrap();
        let sc = linear_scenario(&[&[1.0, 0.0]], off_center);
        assert!(run_ftrl_linear(sc, StepSizeRule::Fixed(0.1)).is_err());
    }

    #[test]
    fn improved_ftrl_two_round_state_order() {
        let sc = linear_scenario(&[&[0.3, 0.0], &[0.0, 0.3]], FeasibleSet::unit_ball(2));
        let trace = run_improved_ftrl(sc, StepSizeRule::Fixed(1.0)).unwrap();
        // round 1: x = 0, z = project(-f1)
        assert!(trace.x_at(1).norm() <= 1e-15);
        assert!((trace.z_at(1)[0] + 0.3).abs() <= 1e-15);
        // round 2: x steps from z_1 with grad c_1 = f1, z = project(-(f1+f2))
        assert!((trace.x_at(2)[0] + 0.6).abs() <= 1e-15);
        let z2 = trace.z_at(2);
        assert!((z2[0] + 0.3).abs() <= 1e-15 && (z2[1] + 0.3).abs() <= 1e-15);
    }

    #[test]
    fn improved_ftrl_locks_onto_an_identical_quadratic() {
        let a = [0.3, -0.2];
        let sc = identical_quadratic(&a, 50);
        let trace = run_improved_ftrl(sc.clone(), StepSizeRule::OracleEvar).unwrap();
        // prescribed step: min(1, L/||a||) = 1
        assert_eq!(trace.constant_eta(), Some(1.0));
        for t in 2..=50 {
            let x = trace.x_at(t);
            assert!((x[0] - a[0]).abs() <= 1e-12 && (x[1] - a[1]).abs() <= 1e-12);
        }
        // total cost is the single round-one miss
        let expected = 0.5 * (a[0] * a[0] + a[1] * a[1]);
        assert!((trace.cumulative_cost() - expected).abs() <= 1e-12);
    }

    #[test]
    fn prox_single_round_identity() {
        let sc = linear_scenario(&[&[1.0, 0.0]], FeasibleSet::unit_ball(2));
        let trace = run_prox(sc, StepSizeRule::Fixed(0.5)).unwrap();
        // x_1 = 0; z_1 = project(z_0 - (eta/L) grad c_1(x_1)) = (-0.5, 0)
        assert!(trace.x_at(1).norm() <= 1e-15);
        let z1 = trace.z_at(1);
        assert!((z1[0] + 0.5).abs() <= 1e-15 && z1[1].abs() <= 1e-15);
    }

    #[test]
    fn step_rule_validation() {
        let sc = identical_quadratic(&[0.1, 0.0], 3);
        assert!(run_improved_ftrl(sc.clone(), StepSizeRule::Fixed(1.5)).is_err());
        assert!(run_improved_ftrl(sc.clone(), StepSizeRule::Fixed(0.0)).is_err());
        assert!(run_prox(sc.clone(), StepSizeRule::Fixed(0.6)).is_err());
        assert!(run_prox(sc.clone(), StepSizeRule::Fixed(0.5)).is_ok());
        assert!(run_ftrl_on_gradients(sc, StepSizeRule::OracleEvar).is_err());
    }

    #[test]
    fn oracle_rule_requires_point_independent_differences() {
        let costs = vec![
            CostFunction::quadratic(SymMatrix::identity(2), Point::zeros(2)).unwrap(),
            CostFunction::quadratic(SymMatrix::scaled_identity(2, 2.0), Point::zeros(2)).unwrap(),
        ];
        let sc =
            Arc::new(Scenario::new("mix", costs, FeasibleSet::unit_ball(2), 2.0, 10.0).unwrap());
        assert!(matches!(
            run_improved_ftrl(sc, StepSizeRule::OracleEvar),
            Err(Error::StepSizeUnavailable(_))
        ));
    }

    #[test]
    fn general_prox_euclidean_matches_prox_bit_for_bit() {
        let sc = linear_scenario(
            &[&[0.4, 0.1], &[-0.2, 0.3], &[0.1, -0.5], &[0.0, 0.2]],
            FeasibleSet::unit_ball(2),
        );
        let a = run_prox(sc.clone(), StepSizeRule::Fixed(0.25)).unwrap();
        let b = run_general_prox(sc, MirrorMap::Euclidean, StepSizeRule::Fixed(0.25)).unwrap();
        for t in 1..=4 {
            assert_eq!(a.x_at(t).as_slice(), b.x_at(t).as_slice());
            assert_eq!(a.z_at(t).as_slice(), b.z_at(t).as_slice());
        }
    }

    #[test]
    fn general_prox_entropy_runs_on_the_simplex() {
        let costs = vec![
            CostFunction::linear(pt(&[1.0, 0.0])),
            CostFunction::linear(pt(&[0.0, 1.0])),
        ];
        let sc =
            Arc::new(Scenario::new("sx", costs, FeasibleSet::simplex(2), 1.0, 1.0).unwrap());
        let trace =
            run_general_prox(sc.clone(), MirrorMap::Entropy, StepSizeRule::Fixed(0.5)).unwrap();
        // starts at the uniform distribution and stays on the simplex
        assert_eq!(trace.z0.as_slice(), &[0.5, 0.5]);
        for t in 1..=2 {
            let x = trace.x_at(t);
            assert!((x.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(x.as_slice().iter().all(|&v| v >= 0.0));
        }
        // entropy on a ball is rejected
        let bad = linear_scenario(&[&[0.1, 0.0]], FeasibleSet::unit_ball(2));
        assert!(run_general_prox(bad, MirrorMap::Entropy, StepSizeRule::Fixed(0.5)).is_err());
    }

    #[test]
    fn doubling_closes_epochs_against_growing_variation() {
        // alternating drift with per-switch gradient jump 0.7^2 = 0.49,
        // about 100 L^2 in total over 200 rounds
        let q = SymMatrix::identity(2);
        let costs: Vec<CostFunction> = (0..200)
            .map(|t| {
                let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
                CostFunction::smooth_plus_drift(q.clone(), pt(&[0.35 * sign, 0.0])).unwrap()
            })
            .collect();
        let g = costs[0].value_lipschitz();
        let sc =
            Arc::new(Scenario::new("alt", costs, FeasibleSet::unit_ball(2), 1.0, g).unwrap());
        let trace = adaptive_eta(AlgorithmId::ImprovedFtrl, sc).unwrap();
        let epochs = trace.epoch_starts.len();
        assert!(epochs >= 2, "variation of this size must trigger at least one close");
        assert!(epochs <= 5, "budgets quadruple, so about 100 L^2 fits in 5 epochs; got {epochs}");
        // each epoch's step is the budgeted prescription, halving as budgets quadruple
        let mut bounds = trace.epoch_starts.clone();
        bounds.push(trace.horizon() + 1);
        for (k, w) in bounds.windows(2).enumerate() {
            let expected = theorem1_eta(1.0, 4f64.powi(k as i32));
            for t in w[0]..w[1] {
                assert_eq!(trace.records[t - 1].eta, expected);
            }
        }
    }

    #[test]
    fn doubling_restarts_from_the_origin() {
        let q = SymMatrix::identity(2);
        let costs: Vec<CostFunction> = (0..20)
            .map(|t| {
                let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
                CostFunction::smooth_plus_drift(q.clone(), pt(&[0.9 * sign, 0.0])).unwrap()
            })
            .collect();
        let g = costs[0].value_lipschitz();
        let sc =
            Arc::new(Scenario::new("alt2", costs, FeasibleSet::unit_ball(2), 1.0, g).unwrap());
        let trace = adaptive_eta(AlgorithmId::Prox, sc).unwrap();
        assert!(trace.epoch_starts.len() >= 2);
        for &start in &trace.epoch_starts[1..] {
            // the first played point of a fresh epoch is the origin
            assert!(trace.x_at(start).norm() <= 1e-15);
        }
    }

    #[test]
    fn theorem4_params_frozen_example() {
        let q = SymMatrix::identity(2);
        let costs: Vec<CostFunction> = (0..10_000)
            .map(|_| CostFunction::quadratic(q.clone(), Point::zeros(2)).unwrap())
            .collect();
        let sc = Scenario::new("bq", costs, FeasibleSet::unit_ball(2), 1.0, 1.0).unwrap();
        let params = theorem4_params(&sc, 1.0, 1.0).unwrap();
        let expected_delta = 2e-4f64.sqrt();
        assert!((params.delta - expected_delta).abs() <= 1e-15);
        assert!((params.eta - expected_delta / 8.0).abs() <= 1e-18);
        assert!((params.alpha - expected_delta).abs() <= 1e-15);
    }

    #[test]
    fn theorem4_params_reject_oversized_radius_and_short_horizons() {
        let costs = vec![CostFunction::quadratic(SymMatrix::identity(2), Point::zeros(2)).unwrap()];
        let sc = Scenario::new("b1", costs, FeasibleSet::unit_ball(2), 1.0, 1.0).unwrap();
        assert!(theorem4_params(&sc, 1.5, 1.0).is_err());
        // T = 1 makes delta > r
        assert!(theorem4_params(&sc, 1.0, 1.0).is_err());
    }

    #[test]
    fn bandit_is_deterministic_per_seed() {
        let sc = linear_scenario(&[&[0.5, 0.1], &[-0.3, 0.2], &[0.1, 0.4]], FeasibleSet::unit_ball(2));
        let params = BanditParams { delta: 0.05, eta: 0.01, r: 1.0, alpha: 0.05, g_weight: None };
        let a = run_bandit(sc.clone(), params, 7).unwrap();
        let b = run_bandit(sc.clone(), params, 7).unwrap();
        assert_eq!(a.records, b.records);
        let c = run_bandit(sc, params, 8).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn bandit_validates_the_shrink_relation() {
        let sc = linear_scenario(&[&[0.5, 0.1]], FeasibleSet::unit_ball(2));
        let params = BanditParams { delta: 0.05, eta: 0.01, r: 1.0, alpha: 0.06, g_weight: None };
        let err = run_bandit(sc, params, 1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("alpha must equal delta/r"), "got: {msg}");
    }

    #[test]
    fn bandit_rejects_sets_without_an_inscribed_ball() {
        let costs = vec![CostFunction::linear(pt(&[0.5, 0.1]))];
        let sc =
            Arc::new(Scenario::new("sx", costs, FeasibleSet::simplex(2), 1.0, 1.0).unwrap());
        let params = BanditParams { delta: 0.05, eta: 0.01, r: 0.1, alpha: 0.5, g_weight: None };
        assert!(run_bandit(sc, params, 1).is_err());
    }

    #[test]
    fn bandit_round_structure() {
        let sc = linear_scenario(&[&[0.5, 0.1], &[-0.3, 0.2]], FeasibleSet::unit_ball(2));
        let params = BanditParams { delta: 0.1, eta: 0.02, r: 1.0, alpha: 0.1, g_weight: None };
        let trace = run_bandit(sc.clone(), params, 3).unwrap();
        for rec in &trace.records {
            // d + 3 value queries per round, all feasible
            assert_eq!(rec.queries.len(), 5);
            for (p, v) in &rec.queries {
                assert!(sc.set().is_feasible(p, FEASIBILITY_TOL));
                assert!((v - sc.eval(rec.t, p)).abs() <= 1e-15);
            }
            // the recorded loss is the smoothed two-point loss
            let expected = 0.5 * (rec.queries[0].1 + rec.queries[1].1);
            assert!((rec.cost - expected).abs() <= 1e-15);
            // play stays in the shrunk set
            assert!(rec.x.norm() <= 1.0 - params.alpha + 1e-9);
        }
        // the first play is the origin
        assert!(trace.x_at(1).norm() <= 1e-15);
    }

    #[test]
    fn bandit_estimator_is_exact_on_linear_costs() {
        // with a linear cost the single-coordinate probe recovers d f_i e_i,
        // whose average over coordinates is exactly f
        let f = pt(&[0.5, -0.3]);
        let c = CostFunction::linear(f.clone());
        let d = 2;
        let delta = 0.05;
        let x = pt(&[0.1, 0.2]);
        let mut avg = Point::zeros(d);
        for i in 0..d {
            let e = Point::basis(d, i);
            let probe = (d as f64 / delta) * (c.eval(&x.add_scaled(delta, &e)) - c.eval(&x));
            avg = avg.add_scaled(1.0 / d as f64, &e.scale(probe));
        }
        assert!(avg.distance(&f) <= 1e-12);
    }

    #[test]
    fn improved_ftrl_played_point_satisfies_step_optimality() {
        // x_t minimizes g'x + (L/2 eta)||x - z_{t-1}||^2, so
        // (u - x_t)'(g + (L/eta)(x_t - z_{t-1})) >= 0 for feasible u
        let mut rng = SplitMix64::new(606);
        let fs: Vec<Vec<f64>> = (0..30)
            .map(|_| Point::new(rng.normal_vec(3)).unwrap().scale(0.3).into_vec())
            .collect();
        let refs: Vec<&[f64]> = fs.iter().map(|f| f.as_slice()).collect();
        let sc = linear_scenario(&refs, FeasibleSet::unit_ball(3));
        let eta = 0.4;
        let trace = run_improved_ftrl(sc.clone(), StepSizeRule::Fixed(eta)).unwrap();
        let stiffness = sc.l_bound() / eta;
        for t in 1..=trace.horizon() {
            let z_prev = trace.z_at(t - 1);
            let g = sc.grad(t - 1, z_prev);
            let x = trace.x_at(t);
            let kkt = g.add(&x.sub(z_prev).scale(stiffness));
            for _ in 0..100 {
                let u = sc.set().sample(&mut rng);
                assert!(u.sub(x).dot(&kkt) >= -1e-8, "optimality violated at round {t}");
            }
        }
    }

    #[test]
    fn bandit_estimator_expectation_identities() {
        // averaging the single-coordinate probe over all coordinates gives
        // the full estimator, and the variance-reduced combination has the
        // same expectation
        let q = SymMatrix::from_rows(vec![vec![1.0, 0.25], vec![0.25, 0.5]]).unwrap();
        let cur = CostFunction::quadratic(q.clone(), pt(&[0.2, -0.1])).unwrap();
        let prev = CostFunction::quadratic(q, pt(&[-0.3, 0.2])).unwrap();
        let d = 2;
        let delta = 0.01;
        let x = pt(&[0.1, 0.3]);
        let z_prev = pt(&[-0.2, 0.1]);

        let full = |c: &CostFunction, p: &Point| {
            let mut g = Point::zeros(d);
            for i in 0..d {
                let e = Point::basis(d, i);
                let diff = c.eval(&p.add_scaled(delta, &e)) - c.eval(p);
                g = g.add_scaled(diff / delta, &e);
            }
            g
        };
        let single = |c: &CostFunction, p: &Point, i: usize| {
            let e = Point::basis(d, i);
            let diff = c.eval(&p.add_scaled(delta, &e)) - c.eval(p);
            e.scale(d as f64 / delta * diff)
        };

        let g_full_cur = full(&cur, &x);
        let g_full_prev = full(&prev, &z_prev);
        let mut mean_single = Point::zeros(d);
        let mut mean_tilde = Point::zeros(d);
        for i in 0..d {
            let ghat = single(&cur, &x, i);
            let gtilde = ghat.add(&g_full_prev).sub(&single(&prev, &z_prev, i));
            mean_single = mean_single.add_scaled(1.0 / d as f64, &ghat);
            mean_tilde = mean_tilde.add_scaled(1.0 / d as f64, &gtilde);
        }
        assert!(mean_single.distance(&g_full_cur) <= 1e-12);
        assert!(mean_tilde.distance(&mean_single) <= 1e-12);
    }

    #[test]
    fn trace_accessors() {
        let sc = linear_scenario(&[&[0.1, 0.0], &[0.0, 0.1]], FeasibleSet::unit_ball(2));
        let trace = run_improved_ftrl(sc, StepSizeRule::Fixed(0.5)).unwrap();
        assert_eq!(trace.horizon(), 2);
        assert_eq!(trace.z_at(0).as_slice(), &[0.0, 0.0]);
        assert_eq!(trace.epoch_starts, vec![1]);
        assert_eq!(trace.constant_eta(), Some(0.5));
        let total: f64 = trace.records.iter().map(|r| r.cost).sum();
        assert!((trace.cumulative_cost() - total).abs() <= 1e-15);
    }
}
