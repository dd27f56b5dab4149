//! Cost families, scenarios, and the variation quantities that drive
//! step sizes and regret bounds.
//!
//! Four quantities measure how much a cost sequence moves:
//!
//! * `total_variation`: deviation of linear cost vectors from their mean,
//! * `sequential_variation`: worst-case gradient change between
//!   consecutive costs over the whole set,
//! * `evar_sequential` / `evar_general_norm`: gradient change evaluated
//!   along the search points an algorithm actually visited, with a
//!   synthetic zero cost before round one,
//! * `evar_cost_values`: worst-case change of the cost values
//!   themselves, the quantity available in the bandit setting.
//!
//! Maxima over the set are computed in closed form whenever the term
//! allows it and otherwise estimated from below by sampling plus
//! projected ascent; every estimated result carries an `exact` flag.

use std::sync::Arc;

use crate::algorithms::RunTrace;
use crate::error::Error;
use crate::geometry::{FeasibleSet, MirrorMap, Point, SetKind};
use crate::rng::SplitMix64;
use crate::Result;

/// Multi-start count for projected-ascent refinement of sampled maxima.
const ASCENT_STARTS: usize = 16;
/// Ascent steps per start.
const ASCENT_STEPS: usize = 200;
/// Fixed stream for the sampling estimators, so reports are reproducible.
const ESTIMATOR_SEED: u64 = 0x5EB0_117E_D000_0001;

// ---- Symmetric matrices ----

/// Small dense symmetric matrix (row-major, full storage).
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds from rows, enforcing squareness and symmetry (tolerance
    /// 1e-12 relative, after which the matrix is symmetrized exactly).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidConfiguration("matrix must be square and nonempty".into()));
        }
        let mut data = vec![0.0; d * d];
        let mut scale: f64 = 1.0;
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::ContractViolation("matrix entries must be finite".into()));
                }
                scale = scale.max(v.abs());
                data[i * d + j] = v;
            }
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let a = data[i * d + j];
                let b = data[j * d + i];
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::InvalidConfiguration(format!(
                        "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
                let m = 0.5 * (a + b);
                data[i * d + j] = m;
                data[j * d + i] = m;
            }
        }
        Ok(SymMatrix { dim: d, data })
    }

    pub fn identity(d: usize) -> Self {
        Self::scaled_identity(d, 1.0)
    }

    pub fn scaled_identity(d: usize, c: f64) -> Self {
        assert!(d >= 1);
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = c;
        }
        SymMatrix { dim: d, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    pub fn matvec(&self, x: &Point) -> Point {
        assert_eq!(x.dim(), self.dim);
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            out[i] = row.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum();
        }
        Point::new(out).expect("matvec of finite inputs is finite")
    }

    /// x' Q x.
    pub fn quad_form(&self, x: &Point) -> f64 {
        self.matvec(x).dot(x)
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix { dim: self.dim, data: self.data.iter().map(|a| c * a).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&a| a == 0.0)
    }

    fn eigen_extremes(&self) -> (f64, f64) {
        let m = nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data);
        let eig = m.symmetric_eigen();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in eig.eigenvalues.iter() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Largest eigenvalue.
    pub fn lambda_max(&self) -> f64 {
        self.eigen_extremes().1
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigen_extremes().0
    }

    /// max(|lambda_min|, |lambda_max|), the operator norm.
    pub fn spectral_radius(&self) -> f64 {
        let (lo, hi) = self.eigen_extremes();
        lo.abs().max(hi.abs())
    }
}

// ---- Cost functions ----

/// The cost families all algorithms and checks understand.
#[derive(Clone, Debug, PartialEq)]
pub enum CostFamily {
    /// The identically-zero cost standing in for "round zero".
    Zero,
    /// f' x.
    Linear { f: Point },
    /// (1/2) (x - a)' Q (x - a) with Q symmetric PSD.
    Quadratic { q: SymMatrix, a: Point },
    /// (1/2) x' Q x + f' x: shared curvature plus a drifting linear term,
    /// giving gradient differences that do not depend on the query point.
    SmoothPlusDrift { q: SymMatrix, f: Point },
}

/// A single round's cost with its smoothness constants.
#[derive(Clone, Debug, PartialEq)]
pub struct CostFunction {
    family: CostFamily,
    dim: usize,
    l: f64,
    g: f64,
}

impl CostFunction {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1);
        CostFunction { family: CostFamily::Zero, dim, l: 0.0, g: 0.0 }
    }

    pub fn linear(f: Point) -> Self {
        let g = f.norm();
        let dim = f.dim();
        CostFunction { family: CostFamily::Linear { f }, dim, l: 0.0, g }
    }

    pub fn quadratic(q: SymMatrix, a: Point) -> Result<Self> {
        if q.dim() != a.dim() {
            return Err(Error::DimensionMismatch { expected: q.dim(), found: a.dim() });
        }
        let (lo, hi) = q.eigen_extremes();
        if lo < -1e-9 * hi.abs().max(1.0) {
            return Err(Error::InvalidConfiguration(format!(
                "quadratic cost requires a PSD matrix; smallest eigenvalue {lo}"
            )));
        }
        let dim = q.dim();
        // value-Lipschitz bound over the unit ball: ||Q(x-a)|| <= |Q| (1 + |a|)
        let g = hi * (1.0 + a.norm());
        Ok(CostFunction { family: CostFamily::Quadratic { q, a }, dim, l: hi, g })
    }

    pub fn smooth_plus_drift(q: SymMatrix, f: Point) -> Result<Self> {
        if q.dim() != f.dim() {
            return Err(Error::DimensionMismatch { expected: q.dim(), found: f.dim() });
        }
        let (lo, hi) = q.eigen_extremes();
        if lo < -1e-9 * hi.abs().max(1.0) {
            return Err(Error::InvalidConfiguration(format!(
                "smooth-plus-drift cost requires a PSD matrix; smallest eigenvalue {lo}"
            )));
        }
        let dim = q.dim();
        let g = hi + f.norm();
        Ok(CostFunction { family: CostFamily::SmoothPlusDrift { q, f }, dim, l: hi, g })
    }

    pub fn family(&self) -> &CostFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Gradient Lipschitz constant (largest Hessian eigenvalue).
    pub fn smoothness(&self) -> f64 {
        self.l
    }

    /// Conservative value-Lipschitz bound over the unit ball.
    pub fn value_lipschitz(&self) -> f64 {
        self.g
    }

    pub fn eval(&self, x: &Point) -> f64 {
        assert_eq!(x.dim(), self.dim);
        match &self.family {
            CostFamily::Zero => 0.0,
            CostFamily::Linear { f } => f.dot(x),
            CostFamily::Quadratic { q, a } => {
                let d = x.sub(a);
                0.5 * q.quad_form(&d)
            }
            CostFamily::SmoothPlusDrift { q, f } => 0.5 * q.quad_form(x) + f.dot(x),
        }
    }

    pub fn grad(&self, x: &Point) -> Point {
        assert_eq!(x.dim(), self.dim);
        match &self.family {
            CostFamily::Zero => Point::zeros(self.dim),
            CostFamily::Linear { f } => f.clone(),
            CostFamily::Quadratic { q, a } => q.matvec(&x.sub(a)),
            CostFamily::SmoothPlusDrift { q, f } => q.matvec(x).add(f),
        }
    }

    /// Hessian when the family has curvature.
    pub fn hessian(&self) -> Option<&SymMatrix> {
        match &self.family {
            CostFamily::Zero | CostFamily::Linear { .. } => None,
            CostFamily::Quadratic { q, .. } | CostFamily::SmoothPlusDrift { q, .. } => Some(q),
        }
    }

    /// Gradient at the origin: the linear part of the quadratic form.
    pub fn grad_at_zero(&self) -> Point {
        match &self.family {
            CostFamily::Zero => Point::zeros(self.dim),
            CostFamily::Linear { f } => f.clone(),
            CostFamily::Quadratic { q, a } => q.matvec(a).scale(-1.0),
            CostFamily::SmoothPlusDrift { f, .. } => f.clone(),
        }
    }

    /// The cost vector for linear (and zero) costs, `None` otherwise.
    pub fn linear_coefficient(&self) -> Option<Point> {
        match &self.family {
            CostFamily::Zero => Some(Point::zeros(self.dim)),
            CostFamily::Linear { f } => Some(f.clone()),
            _ => None,
        }
    }
}

/// Whether two costs share the same Hessian, which makes their gradient
/// difference independent of the query point.
pub fn hessians_match(a: &CostFunction, b: &CostFunction) -> bool {
    match (a.hessian(), b.hessian()) {
        (None, None) => true,
        (Some(p), Some(q)) => p == q,
        (Some(p), None) | (None, Some(p)) => p.is_zero(),
    }
}

fn hessian_diff(next: &CostFunction, cur: &CostFunction) -> Option<SymMatrix> {
    match (next.hessian(), cur.hessian()) {
        (None, None) => None,
        (Some(p), None) => (!p.is_zero()).then(|| p.clone()),
        (None, Some(q)) => (!q.is_zero()).then(|| q.scale(-1.0)),
        (Some(p), Some(q)) => {
            if p == q {
                None
            } else {
                let d = p.sub(q);
                (!d.is_zero()).then_some(d)
            }
        }
    }
}

// ---- Scenarios ----

/// A full problem instance: the cost sequence, the decision set, and
/// the uniform smoothness constants the algorithms are allowed to use.
#[derive(Clone, Debug)]
pub struct Scenario {
    id: String,
    costs: Vec<CostFunction>,
    set: FeasibleSet,
    l_bound: f64,
    g_bound: f64,
}

impl Scenario {
    pub fn new(
        id: impl Into<String>,
        costs: Vec<CostFunction>,
        set: FeasibleSet,
        l_bound: f64,
        g_bound: f64,
    ) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::InvalidConfiguration("scenario needs at least one cost".into()));
        }
        for (i, c) in costs.iter().enumerate() {
            if c.dim() != set.dim() {
                return Err(Error::DimensionMismatch { expected: set.dim(), found: costs[i].dim() });
            }
        }
        if !l_bound.is_finite() || l_bound <= 0.0 {
            return Err(Error::InvalidConfiguration(format!(
                "smoothness bound must be positive, got {l_bound}"
            )));
        }
        if !g_bound.is_finite() || g_bound <= 0.0 {
            return Err(Error::InvalidConfiguration(format!(
                "value-Lipschitz bound must be positive, got {g_bound}"
            )));
        }
        let max_l = costs.iter().map(|c| c.smoothness()).fold(0.0f64, f64::max);
        if max_l > l_bound * (1.0 + 1e-12) {
            return Err(Error::InvalidConfiguration(format!(
                "smoothness bound {l_bound} is below the sequence's actual constant {max_l}"
            )));
        }
        let max_g = costs.iter().map(|c| c.value_lipschitz()).fold(0.0f64, f64::max);
        if max_g > g_bound * (1.0 + 1e-12) {
            return Err(Error::InvalidConfiguration(format!(
                "value-Lipschitz bound {g_bound} is below the sequence's actual constant {max_g}"
            )));
        }
        if !set.contained_in_unit_ball() {
            return Err(Error::InvalidConfiguration(
                "the decision set must be contained in the unit ball".into(),
            ));
        }
        Ok(Scenario { id: id.into(), costs, set, l_bound, g_bound })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Number of rounds T.
    pub fn horizon(&self) -> usize {
        self.costs.len()
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn costs(&self) -> &[CostFunction] {
        &self.costs
    }

    /// 1-based cost accessor.
    pub fn cost(&self, t: usize) -> &CostFunction {
        assert!(t >= 1 && t <= self.costs.len(), "round {t} out of range");
        &self.costs[t - 1]
    }

    pub fn l_bound(&self) -> f64 {
        self.l_bound
    }

    pub fn g_bound(&self) -> f64 {
        self.g_bound
    }

    /// c_t(x) with the convention c_0 = 0.
    pub fn eval(&self, t: usize, x: &Point) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.cost(t).eval(x)
        }
    }

    /// grad c_t(x) with the convention c_0 = 0.
    pub fn grad(&self, t: usize, x: &Point) -> Point {
        if t == 0 {
            Point::zeros(self.dim())
        } else {
            self.cost(t).grad(x)
        }
    }

    pub fn all_linear(&self) -> bool {
        self.costs.iter().all(|c| c.linear_coefficient().is_some())
    }
}

// ---- Variation quantities ----

/// Value plus a flag saying whether it came from a closed form (`true`)
/// or a sampled lower bound (`false`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub exact: bool,
}

/// Deviation of linear cost vectors around their mean:
/// sum_t ||f_t - mean||^2. Errors on any non-linear cost.
pub fn total_variation(costs: &[CostFunction]) -> Result<f64> {
    if costs.is_empty() {
        return Err(Error::InvalidConfiguration("total variation of an empty sequence".into()));
    }
    let mut fs = Vec::with_capacity(costs.len());
    for (i, c) in costs.iter().enumerate() {
        fs.push(c.linear_coefficient().ok_or(Error::NonLinearCost { index: i + 1 })?);
    }
    let d = fs[0].dim();
    let mut mean = Point::zeros(d);
    for f in &fs {
        mean = mean.add(f);
    }
    mean = mean.scale(1.0 / fs.len() as f64);
    Ok(fs.iter().map(|f| f.distance_sq(&mean)).sum())
}

/// Worst-case squared gradient change between consecutive costs,
/// sum_{t=1}^{T-1} max_{x in P} ||grad c_{t+1}(x) - grad c_t(x)||^2.
///
/// Exact whenever consecutive Hessians coincide (linear sequences,
/// shared-curvature quadratics); otherwise a sampled lower bound over
/// `samples` feasible points refined by projected ascent.
pub fn sequential_variation(scenario: &Scenario, samples: usize) -> Estimate {
    let mut rng = SplitMix64::new(ESTIMATOR_SEED);
    let mut value = 0.0;
    let mut exact = true;
    for t in 1..scenario.horizon() {
        let cur = scenario.cost(t);
        let next = scenario.cost(t + 1);
        match hessian_diff(next, cur) {
            None => {
                let diff = next.grad_at_zero().sub(&cur.grad_at_zero());
                value += diff.norm_sq();
            }
            Some(dh) => {
                exact = false;
                let db = next.grad_at_zero().sub(&cur.grad_at_zero());
                value += max_grad_diff_norm_sq(scenario.set(), &dh, &db, samples, &mut rng);
            }
        }
    }
    Estimate { value, exact }
}

/// Sampling-only variant of [`sequential_variation`]; a diagnostic lower
/// bound that never uses the closed forms.
pub fn sequential_variation_sampled(scenario: &Scenario, samples: usize) -> Estimate {
    let mut rng = SplitMix64::new(ESTIMATOR_SEED);
    let d = scenario.dim();
    let zero = SymMatrix::scaled_identity(d, 0.0);
    let mut value = 0.0;
    for t in 1..scenario.horizon() {
        let cur = scenario.cost(t);
        let next = scenario.cost(t + 1);
        let dh = hessian_diff(next, cur).unwrap_or_else(|| zero.clone());
        let db = next.grad_at_zero().sub(&cur.grad_at_zero());
        value += max_grad_diff_norm_sq(scenario.set(), &dh, &db, samples, &mut rng);
    }
    Estimate { value, exact: false }
}

/// max_{x in P} ||A x + b||^2 estimated from below: `samples` feasible
/// draws plus multi-start projected ascent (the objective is convex, so
/// every ascent step is monotone for any step length).
fn max_grad_diff_norm_sq(
    set: &FeasibleSet,
    a: &SymMatrix,
    b: &Point,
    samples: usize,
    rng: &mut SplitMix64,
) -> f64 {
    let h = |x: &Point| a.matvec(x).add(b).norm_sq();
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        best = best.max(h(&set.sample(rng)));
    }
    let diam = 2.0 * set.max_norm();
    for _ in 0..ASCENT_STARTS {
        let mut x = set.sample(rng);
        let mut val = h(&x);
        best = best.max(val);
        for k in 0..ASCENT_STEPS {
            let grad = a.matvec(&a.matvec(&x).add(b)).scale(2.0);
            let n = grad.norm();
            if n < 1e-15 {
                break;
            }
            let step = diam / ((k + 1) as f64).sqrt();
            let cand = set
                .project(&x.add_scaled(step / n, &grad))
                .expect("ascent iterates stay finite");
            let cv = h(&cand);
            if cv >= val {
                x = cand;
                val = cv;
                best = best.max(val);
            } else {
                break;
            }
        }
    }
    best
}

/// Gradient change along the trace's search points,
/// sum_{t=0}^{T-1} ||grad c_{t+1}(z_t) - grad c_t(z_t)||^2 with c_0 = 0.
pub fn evar_sequential(trace: &RunTrace) -> Result<f64> {
    evar_with_norm(trace, |v| v.norm_sq())
}

/// Same as [`evar_sequential`] but measured in the dual norm of the
/// given mirror map (so the entropy map uses the max norm).
pub fn evar_general_norm(trace: &RunTrace, map: MirrorMap) -> Result<f64> {
    evar_with_norm(trace, |v| {
        let n = map.dual_norm(v);
        n * n
    })
}

fn evar_with_norm(trace: &RunTrace, norm_sq: impl Fn(&Point) -> f64) -> Result<f64> {
    let scenario = trace.scenario();
    let t_max = scenario.horizon();
    if trace.records.len() != t_max {
        return Err(Error::ContractViolation(format!(
            "trace has {} records but the scenario has {} rounds",
            trace.records.len(),
            t_max
        )));
    }
    let mut total = 0.0;
    for t in 0..t_max {
        let z = trace.z_at(t);
        let diff = scenario.grad(t + 1, z).sub(&scenario.grad(t, z));
        total += norm_sq(&diff);
    }
    Ok(total)
}

/// Worst-case change of cost values between consecutive rounds,
/// sum_{t=0}^{T-1} max_{x in P} |c_{t+1}(x) - c_t(x)| with c_0 = 0.
///
/// Terms with an affine difference are closed-form on every set kind;
/// centered pure-quadratic differences are closed-form on balls; all
/// other terms are sampled lower bounds.
pub fn evar_cost_values(scenario: &Scenario, samples: usize) -> Estimate {
    let mut rng = SplitMix64::new(ESTIMATOR_SEED ^ 0xC0); // independent stream
    let zero = CostFunction::zero(scenario.dim());
    let mut value = 0.0;
    let mut exact = true;
    for t in 0..scenario.horizon() {
        let cur = if t == 0 { &zero } else { scenario.cost(t) };
        let next = scenario.cost(t + 1);
        let (term, term_exact) = max_abs_value_diff(scenario.set(), next, cur, samples, &mut rng);
        value += term;
        exact &= term_exact;
    }
    Estimate { value, exact }
}

/// Running prefixes of [`evar_cost_values`]: entry t-1 holds the
/// variation accumulated through round t (terms 0..t-1), so the last
/// entry equals the full-horizon value. Exactness flags accumulate.
pub fn evar_cost_values_prefix(scenario: &Scenario, samples: usize) -> Vec<Estimate> {
    let mut rng = SplitMix64::new(ESTIMATOR_SEED ^ 0xC0); // same stream as the total
    let zero = CostFunction::zero(scenario.dim());
    let mut value = 0.0;
    let mut exact = true;
    let mut out = Vec::with_capacity(scenario.horizon());
    for t in 0..scenario.horizon() {
        let cur = if t == 0 { &zero } else { scenario.cost(t) };
        let next = scenario.cost(t + 1);
        let (term, term_exact) = max_abs_value_diff(scenario.set(), next, cur, samples, &mut rng);
        value += term;
        exact &= term_exact;
        out.push(Estimate { value, exact });
    }
    out
}

/// Sampling-only variant of [`evar_cost_values`].
pub fn evar_cost_values_sampled(scenario: &Scenario, samples: usize) -> Estimate {
    let mut rng = SplitMix64::new(ESTIMATOR_SEED ^ 0xC0);
    let zero = CostFunction::zero(scenario.dim());
    let mut value = 0.0;
    for t in 0..scenario.horizon() {
        let cur = if t == 0 { &zero } else { scenario.cost(t) };
        let next = scenario.cost(t + 1);
        value += sampled_max_abs_diff(scenario.set(), next, cur, samples, &mut rng);
    }
    Estimate { value, exact: false }
}

/// max_{x in P} |next(x) - cur(x)| with the exactness flag.
fn max_abs_value_diff(
    set: &FeasibleSet,
    next: &CostFunction,
    cur: &CostFunction,
    samples: usize,
    rng: &mut SplitMix64,
) -> (f64, bool) {
    let dh = hessian_diff(next, cur);
    let b = next.grad_at_zero().sub(&cur.grad_at_zero());
    let zero = Point::zeros(next.dim());
    let c = next.eval(&zero) - cur.eval(&zero);
    match dh {
        None => {
            // affine difference b'x + c: closed form on every kind
            if b.norm_sq() == 0.0 && c == 0.0 {
                return (0.0, true);
            }
            let (lo, hi) = affine_range(set, &b, c);
            (lo.abs().max(hi.abs()), true)
        }
        Some(dh) => {
            if b.norm_sq() == 0.0 && c == 0.0 {
                if let SetKind::Ball { radius } = set.kind() {
                    // |(1/2) x' D x| peaks at the extreme eigenvalue on the sphere
                    return (0.5 * dh.spectral_radius() * radius * radius, true);
                }
            }
            let diff = |x: &Point| 0.5 * dh.quad_form(x) + b.dot(x) + c;
            let grad = |x: &Point| dh.matvec(x).add(&b);
            (sampled_max_abs(set, diff, grad, samples, rng), false)
        }
    }
}

/// Range of b'x + c over the set, in closed form per kind.
fn affine_range(set: &FeasibleSet, b: &Point, c: f64) -> (f64, f64) {
    match set.kind() {
        SetKind::Ball { radius } => {
            let r = radius * b.norm();
            (c - r, c + r)
        }
        SetKind::Box { lo, hi } => {
            let mut min = c;
            let mut max = c;
            for (bi, (l, h)) in b.as_slice().iter().zip(lo.iter().zip(hi)) {
                min += (bi * l).min(bi * h);
                max += (bi * l).max(bi * h);
            }
            (min, max)
        }
        SetKind::Simplex => {
            let lo = b.as_slice().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = b.as_slice().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (c + lo, c + hi)
        }
    }
}

fn sampled_max_abs_diff(
    set: &FeasibleSet,
    next: &CostFunction,
    cur: &CostFunction,
    samples: usize,
    rng: &mut SplitMix64,
) -> f64 {
    let diff = |x: &Point| next.eval(x) - cur.eval(x);
    let grad = |x: &Point| next.grad(x).sub(&cur.grad(x));
    sampled_max_abs(set, diff, grad, samples, rng)
}

/// Lower bound on max |q(x)| by sampling plus sign-following projected
/// ascent; keeps the best value ever visited, so it cannot overshoot.
fn sampled_max_abs(
    set: &FeasibleSet,
    q: impl Fn(&Point) -> f64,
    grad_q: impl Fn(&Point) -> Point,
    samples: usize,
    rng: &mut SplitMix64,
) -> f64 {
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        best = best.max(q(&set.sample(rng)).abs());
    }
    let diam = 2.0 * set.max_norm();
    for _ in 0..ASCENT_STARTS {
        let mut x = set.sample(rng);
        let mut val = q(&x).abs();
        best = best.max(val);
        for k in 0..ASCENT_STEPS {
            let v = q(&x);
            let sign = if v >= 0.0 { 1.0 } else { -1.0 };
            let dir = grad_q(&x).scale(sign);
            let n = dir.norm();
            if n < 1e-15 {
                break;
            }
            let step = diam / ((k + 1) as f64).sqrt();
            let cand = set
                .project(&x.add_scaled(step / n, &dir))
                .expect("ascent iterates stay finite");
            let cv = q(&cand).abs();
            // accept improving moves; otherwise stay put and let the
            // shrinking step recover (|q| is not convex in general)
            if cv >= val {
                x = cand;
                val = cv;
                best = best.max(val);
            }
        }
    }
    best
}

/// Largest horizon accepted by [`var_decomposition`]; the computation
/// is quadratic in T.
pub const VAR_DECOMPOSITION_MAX_T: usize = 5000;

/// The two trace-dependent components of realized-gradient variation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarDecomposition {
    /// (1/T) sum_{t,tau} ||grad c_t(x_t) - grad c_t(x_tau)||^2: movement
    /// of the algorithm's own iterates as seen through each cost.
    pub var1: f64,
    /// (1/T) sum_{t,tau} ||grad c_t(x_tau) - grad c_tau(x_tau)||^2:
    /// disagreement between costs at fixed query points.
    pub var2: f64,
    /// Deviation of the realized gradients grad c_t(x_t) around their
    /// mean, the quantity a gradient-based step-size rule would see.
    pub realized_total_variation: f64,
}

/// Splits realized-gradient variation into the iterate-movement and
/// cost-disagreement parts. Quadratic in T; rejects horizons above
/// [`VAR_DECOMPOSITION_MAX_T`].
pub fn var_decomposition(trace: &RunTrace) -> Result<VarDecomposition> {
    let scenario = trace.scenario();
    let t_max = scenario.horizon();
    if t_max > VAR_DECOMPOSITION_MAX_T {
        return Err(Error::ResourceLimit(format!(
            "variation decomposition is quadratic in T; got T={t_max}, cap {VAR_DECOMPOSITION_MAX_T}"
        )));
    }
    if trace.records.len() != t_max {
        return Err(Error::ContractViolation(format!(
            "trace has {} records but the scenario has {} rounds",
            trace.records.len(),
            t_max
        )));
    }
    let realized: Vec<Point> =
        (1..=t_max).map(|t| scenario.grad(t, trace.x_at(t))).collect();
    let mut var1 = 0.0;
    let mut var2 = 0.0;
    for t in 1..=t_max {
        for tau in 1..=t_max {
            let g_t_xtau = scenario.grad(t, trace.x_at(tau));
            var1 += realized[t - 1].distance_sq(&g_t_xtau);
            var2 += g_t_xtau.distance_sq(&realized[tau - 1]);
        }
    }
    let tf = t_max as f64;
    let mut mean = Point::zeros(scenario.dim());
    for g in &realized {
        mean = mean.add(g);
    }
    mean = mean.scale(1.0 / tf);
    let realized_total = realized.iter().map(|g| g.distance_sq(&mean)).sum();
    Ok(VarDecomposition {
        var1: var1 / tf,
        var2: var2 / tf,
        realized_total_variation: realized_total,
    })
}

/// Everything the diagnostics report about one run's variation.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationReport {
    /// Eq-style total variation: of the cost vectors for all-linear
    /// scenarios, of the realized gradients otherwise.
    pub total_var: f64,
    /// True when `total_var` was computed from realized gradients.
    pub total_var_realized: bool,
    pub seq_var: Estimate,
    pub evar_seq: f64,
    pub evar_cost: Estimate,
    /// Present only when T is small enough for the quadratic pass.
    pub var1: Option<f64>,
    pub var2: Option<f64>,
}

/// Assembles the full variation report for a finished run.
pub fn variation_report(trace: &RunTrace, samples: usize) -> Result<VariationReport> {
    let scenario = trace.scenario();
    let decomposition = if scenario.horizon() <= VAR_DECOMPOSITION_MAX_T {
        Some(var_decomposition(trace)?)
    } else {
        None
    };
    let (total_var, total_var_realized) = if scenario.all_linear() {
        (total_variation(scenario.costs())?, false)
    } else {
        let realized: Vec<Point> =
            (1..=scenario.horizon()).map(|t| scenario.grad(t, trace.x_at(t))).collect();
        let mut mean = Point::zeros(scenario.dim());
        for g in &realized {
            mean = mean.add(g);
        }
        mean = mean.scale(1.0 / realized.len() as f64);
        (realized.iter().map(|g| g.distance_sq(&mean)).sum(), true)
    };
    Ok(VariationReport {
        total_var,
        total_var_realized,
        seq_var: sequential_variation(scenario, samples),
        evar_seq: evar_sequential(trace)?,
        evar_cost: evar_cost_values(scenario, samples),
        var1: decomposition.map(|d| d.var1),
        var2: decomposition.map(|d| d.var2),
    })
}

// ---- A priori extended variation for oracle step sizes ----

/// Extended sequential variation computed before running, available
/// exactly when every consecutive gradient difference is independent of
/// the query point (the round-zero term only needs the known start z_0).
pub fn exact_evar_sequential(scenario: &Scenario, z0: &Point) -> Option<f64> {
    exact_evar_with_norm(scenario, z0, |v| v.norm_sq())
}

/// Dual-norm version of [`exact_evar_sequential`] for the general prox
/// method.
pub fn exact_evar_general(scenario: &Scenario, z0: &Point, map: MirrorMap) -> Option<f64> {
    exact_evar_with_norm(scenario, z0, |v| {
        let n = map.dual_norm(v);
        n * n
    })
}

fn exact_evar_with_norm(
    scenario: &Scenario,
    z0: &Point,
    norm_sq: impl Fn(&Point) -> f64,
) -> Option<f64> {
    for t in 1..scenario.horizon() {
        if !hessians_match(scenario.cost(t), scenario.cost(t + 1)) {
            return None;
        }
    }
    let mut total = norm_sq(&scenario.grad(1, z0));
    for t in 1..scenario.horizon() {
        let diff = scenario.cost(t + 1).grad_at_zero().sub(&scenario.cost(t).grad_at_zero());
        total += norm_sq(&diff);
    }
    Some(total)
}

/// Convenience: a trace-shaped handle some checkers need.
pub type SharedScenario = Arc<Scenario>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{AlgorithmId, RunRecord, RunTrace};

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    /// Power iteration: the independent oracle for lambda_max.
    fn power_iteration(q: &SymMatrix, iters: usize) -> f64 {
        let mut rng = SplitMix64::new(404);
        let mut v = Point::new(rng.normal_vec(q.dim())).unwrap();
        v = v.scale(1.0 / v.norm());
        let mut lambda = 0.0;
        for _ in 0..iters {
            let w = q.matvec(&v);
            let n = w.norm();
            if n < 1e-300 {
                return 0.0;
            }
            lambda = v.dot(&w);
            v = w.scale(1.0 / n);
        }
        lambda
    }

    /// Central finite differences: the oracle for analytic gradients.
    fn finite_diff_grad(c: &CostFunction, x: &Point, h: f64) -> Point {
        let d = x.dim();
        let mut g = vec![0.0; d];
        for i in 0..d {
            let e = Point::basis(d, i);
            let plus = c.eval(&x.add_scaled(h, &e));
            let minus = c.eval(&x.add_scaled(-h, &e));
            g[i] = (plus - minus) / (2.0 * h);
        }
        Point::new(g).unwrap()
    }

    fn random_psd(d: usize, rng: &mut SplitMix64) -> SymMatrix {
        let rows: Vec<Vec<f64>> = (0..d).map(|_| rng.normal_vec(d)).collect();
        // A' A is PSD
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                data[i * d + j] = (0..d).map(|k| rows[k][i] * rows[k][j]).sum();
            }
        }
        SymMatrix { dim: d, data }
    }

    fn linear_scenario(fs: &[&[f64]], set: FeasibleSet) -> Scenario {
        let costs = fs.iter().map(|f| CostFunction::linear(pt(f))).collect();
        Scenario::new("test-linear", costs, set, 1.0, 4.0).unwrap()
    }

    /// Minimal hand-built trace with given x and z sequences.
    fn synthetic_trace(scenario: Scenario, xs: Vec<Point>, zs: Vec<Point>) -> RunTrace {
        let z0 = Point::zeros(scenario.dim());
        let records = xs
            .into_iter()
            .zip(zs)
            .enumerate()
            .map(|(i, (x, z))| RunRecord {
                t: i + 1,
                x,
                z,
                cost: 0.0,
                eta: 1.0,
                queries: Vec::new(),
            })
            .collect();
        RunTrace {
            scenario: Arc::new(scenario),
            algorithm: AlgorithmId::ImprovedFtrl,
            seed: None,
            z0,
            records,
            epoch_starts: vec![1],
            bandit: None,
        }
    }

    #[test]
    fn sym_matrix_rejects_asymmetry_and_symmetrizes_noise() {
        assert!(SymMatrix::from_rows(vec![vec![1.0, 2.0], vec![0.5, 1.0]]).is_err());
        let m = SymMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert!(SymMatrix::from_rows(vec![vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn lambda_max_matches_power_iteration() {
        let mut rng = SplitMix64::new(7);
        for d in 1..=6 {
            for _ in 0..5 {
                let q = random_psd(d, &mut rng);
                let direct = q.lambda_max();
                let oracle = power_iteration(&q, 500);
                assert!(
                    (direct - oracle).abs() <= 1e-6 * direct.max(1.0),
                    "d={d}: eigen {direct} vs power iteration {oracle}"
                );
            }
        }
    }

    #[test]
    fn smooth_plus_drift_frozen_example() {
        let c = CostFunction::smooth_plus_drift(
            SymMatrix::scaled_identity(2, 2.0),
            pt(&[1.0, 0.0]),
        )
        .unwrap();
        let x = pt(&[0.5, 0.0]);
        assert!((c.eval(&x) - 0.75).abs() <= 1e-15);
        let g = c.grad(&x);
        assert!((g[0] - 2.0).abs() <= 1e-15 && g[1].abs() <= 1e-15);
        assert!((c.smoothness() - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn quadratic_frozen_example_and_psd_rejection() {
        let c = CostFunction::quadratic(SymMatrix::identity(2), pt(&[0.3, 0.0])).unwrap();
        assert!((c.eval(&Point::zeros(2)) - 0.045).abs() <= 1e-15);
        let g = c.grad(&Point::zeros(2));
        assert!((g[0] + 0.3).abs() <= 1e-15);

        let indefinite = SymMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(CostFunction::quadratic(indefinite, Point::zeros(2)).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = SplitMix64::new(99);
        for d in [1usize, 3, 5] {
            let q = {
                let raw = random_psd(d, &mut rng);
                raw.scale(1.0 / raw.lambda_max().max(1.0))
            };
            let costs = vec![
                CostFunction::linear(Point::new(rng.normal_vec(d)).unwrap()),
                CostFunction::quadratic(q.clone(), Point::new(rng.normal_vec(d)).unwrap())
                    .unwrap(),
                CostFunction::smooth_plus_drift(q, Point::new(rng.normal_vec(d)).unwrap())
                    .unwrap(),
                CostFunction::zero(d),
            ];
            for c in &costs {
                for _ in 0..20 {
                    let x = Point::new(rng.normal_vec(d)).unwrap();
                    let analytic = c.grad(&x);
                    let numeric = finite_diff_grad(c, &x, 1e-6);
                    assert!(
                        analytic.distance(&numeric) <= 1e-5 * (1.0 + analytic.norm()),
                        "family {:?}",
                        c.family()
                    );
                }
            }
        }
    }

    #[test]
    fn value_lipschitz_bound_holds_on_the_unit_ball() {
        let mut rng = SplitMix64::new(1234);
        let set = FeasibleSet::unit_ball(4);
        let q = {
            let raw = random_psd(4, &mut rng);
            raw.scale(1.0 / raw.lambda_max())
        };
        let costs = vec![
            CostFunction::linear(Point::new(rng.normal_vec(4)).unwrap()),
            CostFunction::quadratic(q.clone(), set.sample(&mut rng)).unwrap(),
            CostFunction::smooth_plus_drift(q, Point::new(rng.normal_vec(4)).unwrap()).unwrap(),
        ];
        for c in &costs {
            let g = c.value_lipschitz();
            for _ in 0..200 {
                let x = set.sample(&mut rng);
                let z = set.sample(&mut rng);
                assert!(
                    (c.eval(&x) - c.eval(&z)).abs() <= g * x.distance(&z) + 1e-12,
                    "value-Lipschitz bound violated for {:?}",
                    c.family()
                );
            }
        }
    }

    #[test]
    fn scenario_validation() {
        let set = FeasibleSet::unit_ball(2);
        let costs = vec![CostFunction::quadratic(
            SymMatrix::scaled_identity(2, 2.0),
            Point::zeros(2),
        )
        .unwrap()];
        // bound below the true smoothness
        assert!(Scenario::new("s", costs.clone(), set.clone(), 1.0, 10.0).is_err());
        assert!(Scenario::new("s", costs.clone(), set.clone(), 2.0, 10.0).is_ok());
        // box poking out of the unit ball
        let big = FeasibleSet::axis_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(Scenario::new("s", costs, big, 2.0, 10.0).is_err());
    }

    #[test]
    fn total_variation_frozen_examples() {
        let set = FeasibleSet::unit_ball(2);
        // 50 copies of e1 then 50 of e2
        let mut fs: Vec<&[f64]> = Vec::new();
        for _ in 0..50 {
            fs.push(&[1.0, 0.0]);
        }
        for _ in 0..50 {
            fs.push(&[0.0, 1.0]);
        }
        let sc = linear_scenario(&fs, set.clone());
        assert!((total_variation(sc.costs()).unwrap() - 50.0).abs() <= 1e-12);

        let sc = linear_scenario(&[&[1.0, 0.0], &[-1.0, 0.0]], set.clone());
        assert!((total_variation(sc.costs()).unwrap() - 2.0).abs() <= 1e-15);

        // identical costs have zero variation
        let f: &[f64] = &[0.3, 0.4];
        let sc = linear_scenario(&[f; 7], set);
        assert!(total_variation(sc.costs()).unwrap().abs() <= 1e-15);
    }

    #[test]
    fn total_variation_rejects_nonlinear_costs() {
        let q = CostFunction::quadratic(SymMatrix::identity(2), Point::zeros(2)).unwrap();
        assert_eq!(
            total_variation(&[q]),
            Err(Error::NonLinearCost { index: 1 })
        );
    }

    #[test]
    fn total_variation_equals_the_pairwise_double_sum() {
        // sum_t ||f_t - mean||^2 == (1/2T) sum_{t,tau} ||f_t - f_tau||^2
        let mut rng = SplitMix64::new(55);
        for _ in 0..20 {
            let t = 2 + rng.index(30);
            let fs: Vec<Point> = (0..t)
                .map(|_| Point::new(rng.normal_vec(3)).unwrap().scale(0.4))
                .collect();
            let costs: Vec<CostFunction> =
                fs.iter().map(|f| CostFunction::linear(f.clone())).collect();
            let direct = total_variation(&costs).unwrap();
            let mut double = 0.0;
            for a in &fs {
                for b in &fs {
                    double += a.distance_sq(b);
                }
            }
            double /= 2.0 * t as f64;
            assert!((direct - double).abs() <= 1e-10 * (1.0 + direct));
        }
    }

    #[test]
    fn sequential_variation_closed_forms() {
        let set = FeasibleSet::unit_ball(2);
        let mut fs: Vec<&[f64]> = Vec::new();
        for _ in 0..50 {
            fs.push(&[1.0, 0.0]);
        }
        for _ in 0..50 {
            fs.push(&[0.0, 1.0]);
        }
        let sc = linear_scenario(&fs, set.clone());
        let est = sequential_variation(&sc, 100);
        assert!(est.exact);
        assert!((est.value - 2.0).abs() <= 1e-12);

        let f: &[f64] = &[0.5, 0.1];
        let sc = linear_scenario(&[f; 9], set);
        let est = sequential_variation(&sc, 10);
        assert!(est.exact && est.value.abs() <= 1e-15);
    }

    #[test]
    fn sequential_variation_sampled_case_reaches_the_true_maximum() {
        // Q1 = I, Q2 = 2I, both centered: gradient difference is x, so the
        // max of ||x||^2 over the unit ball is exactly 1.
        let set = FeasibleSet::unit_ball(2);
        let costs = vec![
            CostFunction::quadratic(SymMatrix::identity(2), Point::zeros(2)).unwrap(),
            CostFunction::quadratic(SymMatrix::scaled_identity(2, 2.0), Point::zeros(2)).unwrap(),
        ];
        let sc = Scenario::new("pair", costs, set, 2.0, 10.0).unwrap();
        let est = sequential_variation(&sc, 64);
        assert!(!est.exact);
        assert!(est.value >= 1.0 - 1e-3, "ascent reached only {}", est.value);
        assert!(est.value <= 1.0 + 1e-12, "estimate overshot the true maximum");
    }

    #[test]
    fn sampled_estimates_never_exceed_closed_forms() {
        let mut rng = SplitMix64::new(31337);
        for _ in 0..10 {
            let t = 2 + rng.index(10);
            let fs: Vec<Vec<f64>> = (0..t).map(|_| {
                Point::new(rng.normal_vec(3)).unwrap().scale(0.4).into_vec()
            }).collect();
            let refs: Vec<&[f64]> = fs.iter().map(|f| f.as_slice()).collect();
            let sc = linear_scenario(&refs, FeasibleSet::unit_ball(3));
            let exact = sequential_variation(&sc, 16);
            let sampled = sequential_variation_sampled(&sc, 16);
            assert!(exact.exact && !sampled.exact);
            assert!(sampled.value <= exact.value + 1e-10);

            let exact_cost = evar_cost_values(&sc, 16);
            let sampled_cost = evar_cost_values_sampled(&sc, 16);
            assert!(exact_cost.exact);
            assert!(sampled_cost.value <= exact_cost.value + 1e-10);
        }
    }

    #[test]
    fn evar_sequential_single_round_is_the_first_gradient_norm() {
        let sc = linear_scenario(&[&[0.6, 0.8]], FeasibleSet::unit_ball(2));
        let trace = synthetic_trace(sc, vec![Point::zeros(2)], vec![Point::zeros(2)]);
        assert!((evar_sequential(&trace).unwrap() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn evar_sequential_identical_costs_reduce_to_the_start_term() {
        let q = SymMatrix::identity(2);
        let a = pt(&[0.3, 0.0]);
        let costs: Vec<CostFunction> =
            (0..5).map(|_| CostFunction::quadratic(q.clone(), a.clone()).unwrap()).collect();
        let sc = Scenario::new("id", costs, FeasibleSet::unit_ball(2), 1.0, 2.0).unwrap();
        let mut rng = SplitMix64::new(8);
        let zs: Vec<Point> = (0..5).map(|_| sc.set().sample(&mut rng)).collect();
        let xs = zs.clone();
        let start = sc.grad(1, &Point::zeros(2)).norm_sq(); // ||a||^2
        let trace = synthetic_trace(sc, xs, zs);
        assert!((evar_sequential(&trace).unwrap() - start).abs() <= 1e-15);
        assert!((start - 0.09).abs() <= 1e-15);
    }

    #[test]
    fn evar_general_norm_frozen_examples() {
        // single linear cost f = (3, -4): max-norm squared is 16
        let costs = vec![CostFunction::linear(pt(&[3.0, -4.0]))];
        let sc2 = Scenario::new("one", costs, FeasibleSet::simplex(2), 1.0, 5.0).unwrap();
        let trace = synthetic_trace(sc2, vec![pt(&[0.5, 0.5])], vec![pt(&[0.5, 0.5])]);
        assert!((evar_general_norm(&trace, MirrorMap::Entropy).unwrap() - 16.0).abs() <= 1e-12);

        // f1 = (1,0), f2 = (1,1): 1 + 1 = 2 in the max norm
        let costs = vec![
            CostFunction::linear(pt(&[1.0, 0.0])),
            CostFunction::linear(pt(&[1.0, 1.0])),
        ];
        let sc3 = Scenario::new("two", costs, FeasibleSet::simplex(2), 1.0, 2.0).unwrap();
        let u = pt(&[0.5, 0.5]);
        let trace = synthetic_trace(sc3, vec![u.clone(), u.clone()], vec![u.clone(), u]);
        assert!((evar_general_norm(&trace, MirrorMap::Entropy).unwrap() - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn evar_cost_values_frozen_examples() {
        // linear on the unit ball: ||f1|| + ||f2 - f1|| = 1 + sqrt(2)
        let sc = linear_scenario(&[&[1.0, 0.0], &[0.0, 1.0]], FeasibleSet::unit_ball(2));
        let est = evar_cost_values(&sc, 32);
        assert!(est.exact);
        assert!((est.value - (1.0 + 2.0f64.sqrt())).abs() <= 1e-12);

        // identical quadratics: only the round-zero term max |c_1| = 1/2 remains
        let q = SymMatrix::identity(2);
        let costs: Vec<CostFunction> =
            (0..3).map(|_| CostFunction::quadratic(q.clone(), Point::zeros(2)).unwrap()).collect();
        let sc = Scenario::new("idq", costs, FeasibleSet::unit_ball(2), 1.0, 1.0).unwrap();
        let est = evar_cost_values(&sc, 32);
        assert!(est.exact);
        assert!((est.value - 0.5).abs() <= 1e-12);

        // quadratic pair with a shifted center: 1/2 + (0.1 + 0.005)
        let costs = vec![
            CostFunction::quadratic(q.clone(), Point::zeros(2)).unwrap(),
            CostFunction::quadratic(q, pt(&[0.1, 0.0])).unwrap(),
        ];
        let sc = Scenario::new("pair", costs, FeasibleSet::unit_ball(2), 1.0, 1.2).unwrap();
        let est = evar_cost_values(&sc, 32);
        assert!(est.exact);
        assert!((est.value - 0.605).abs() <= 1e-12);

        // prefixes are nondecreasing and end at the total
        let prefixes = evar_cost_values_prefix(&sc, 32);
        assert_eq!(prefixes.len(), sc.horizon());
        for pair in prefixes.windows(2) {
            assert!(pair[1].value >= pair[0].value);
        }
        let last = prefixes.last().unwrap();
        assert_eq!(last.value, est.value);
        assert_eq!(last.exact, est.exact);
    }

    #[test]
    fn evar_cost_values_affine_closed_form_on_box_and_simplex() {
        // difference f2 - f1 = (-1, 1): on the simplex max |.| = 1 each way
        let costs = vec![
            CostFunction::linear(pt(&[1.0, 0.0])),
            CostFunction::linear(pt(&[0.0, 1.0])),
        ];
        let sc = Scenario::new("sx", costs, FeasibleSet::simplex(2), 1.0, 1.0).unwrap();
        let est = evar_cost_values(&sc, 16);
        assert!(est.exact);
        // round-zero term: max |f1' x| over simplex = 1; switch term = 1
        assert!((est.value - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn var_decomposition_frozen_example_and_cap() {
        let sc = linear_scenario(&[&[1.0, 0.0], &[0.0, 1.0]], FeasibleSet::unit_ball(2));
        let xs = vec![pt(&[0.1, 0.2]), pt(&[-0.3, 0.4])];
        let zs = xs.clone();
        let trace = synthetic_trace(sc, xs, zs);
        let dec = var_decomposition(&trace).unwrap();
        assert!(dec.var1.abs() <= 1e-15, "linear gradients are constant in x");
        assert!((dec.var2 - 2.0).abs() <= 1e-12);
        assert!((dec.realized_total_variation - 1.0).abs() <= 1e-12);

        let big: Vec<&[f64]> = vec![&[0.1, 0.0]; VAR_DECOMPOSITION_MAX_T + 1];
        let sc = linear_scenario(&big, FeasibleSet::unit_ball(2));
        let n = sc.horizon();
        let trace = synthetic_trace(
            sc,
            vec![Point::zeros(2); n],
            vec![Point::zeros(2); n],
        );
        assert!(matches!(var_decomposition(&trace), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn seq_var_bounded_by_four_times_total_var_for_linear_sequences() {
        let mut rng = SplitMix64::new(4242);
        for _ in 0..100 {
            let t = 2 + rng.index(199);
            let fs: Vec<Vec<f64>> = (0..t)
                .map(|_| Point::new(rng.normal_vec(3)).unwrap().scale(0.3).into_vec())
                .collect();
            let refs: Vec<&[f64]> = fs.iter().map(|f| f.as_slice()).collect();
            let sc = linear_scenario(&refs, FeasibleSet::unit_ball(3));
            let seq = sequential_variation(&sc, 8);
            let total = total_variation(sc.costs()).unwrap();
            assert!(seq.exact);
            assert!(seq.value <= 4.0 * total + 1e-8, "seq {} total {}", seq.value, total);
        }
    }

    #[test]
    fn evar_seq_bounded_by_start_term_plus_seq_var() {
        let mut rng = SplitMix64::new(777);
        for _ in 0..20 {
            let t = 2 + rng.index(20);
            let fs: Vec<Vec<f64>> = (0..t)
                .map(|_| Point::new(rng.normal_vec(2)).unwrap().scale(0.3).into_vec())
                .collect();
            let refs: Vec<&[f64]> = fs.iter().map(|f| f.as_slice()).collect();
            let sc = linear_scenario(&refs, FeasibleSet::unit_ball(2));
            let seq = sequential_variation(&sc, 8).value;
            let start = sc.grad(1, &Point::zeros(2)).norm_sq();
            let xs: Vec<Point> = (0..t).map(|_| sc.set().sample(&mut rng)).collect();
            let trace = synthetic_trace(sc, xs.clone(), xs);
            let evar = evar_sequential(&trace).unwrap();
            assert!(evar <= start + seq + 1e-8);
        }
    }

    #[test]
    fn exact_evar_matches_realized_evar_for_shared_curvature() {
        let mut rng = SplitMix64::new(2022);
        let d = 3;
        let q = {
            let raw = random_psd(d, &mut rng);
            raw.scale(1.0 / raw.lambda_max())
        };
        let costs: Vec<CostFunction> = (0..10)
            .map(|_| {
                CostFunction::smooth_plus_drift(
                    q.clone(),
                    Point::new(rng.normal_vec(d)).unwrap().scale(0.3),
                )
                .unwrap()
            })
            .collect();
        let g_bound = costs.iter().map(|c| c.value_lipschitz()).fold(0.0f64, f64::max);
        let sc = Scenario::new("drift", costs, FeasibleSet::unit_ball(d), 1.0, g_bound).unwrap();
        let z0 = Point::zeros(d);
        let expected = exact_evar_sequential(&sc, &z0).unwrap();
        let zs: Vec<Point> = (0..10).map(|_| sc.set().sample(&mut rng)).collect();
        let trace = synthetic_trace(sc, zs.clone(), zs);
        let realized = evar_sequential(&trace).unwrap();
        assert!((expected - realized).abs() <= 1e-10 * (1.0 + expected));
    }

    #[test]
    fn exact_evar_unavailable_for_point_dependent_differences() {
        let costs = vec![
            CostFunction::quadratic(SymMatrix::identity(2), Point::zeros(2)).unwrap(),
            CostFunction::quadratic(SymMatrix::scaled_identity(2, 2.0), Point::zeros(2)).unwrap(),
        ];
        let sc = Scenario::new("mixed", costs, FeasibleSet::unit_ball(2), 2.0, 10.0).unwrap();
        assert!(exact_evar_sequential(&sc, &Point::zeros(2)).is_none());
    }

    #[test]
    fn variation_report_assembles_all_quantities() {
        let sc = linear_scenario(&[&[1.0, 0.0], &[0.0, 1.0]], FeasibleSet::unit_ball(2));
        let xs = vec![Point::zeros(2), Point::zeros(2)];
        let trace = synthetic_trace(sc, xs.clone(), xs);
        let report = variation_report(&trace, 16).unwrap();
        assert!(!report.total_var_realized);
        assert!((report.total_var - 1.0).abs() <= 1e-12);
        assert!(report.seq_var.exact && (report.seq_var.value - 2.0).abs() <= 1e-12);
        assert!((report.evar_seq - 3.0).abs() <= 1e-12); // 1 + ||f2-f1||^2
        assert!(report.var1.is_some() && report.var2.is_some());
    }
}
