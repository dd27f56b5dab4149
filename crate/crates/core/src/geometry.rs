//! Feasible sets, projections, and the proximal solvers every
//! algorithm's inner argmin reduces to.
//!
//! All sets are convex and compact, and every argmin used by the online
//! algorithms has a closed form here: Euclidean projection per set kind,
//! the linearized quadratic step, the FTRL quadratic solve, and the
//! entropy-map multiplicative step on the simplex.

use crate::error::Error;
use crate::rng::SplitMix64;
use crate::Result;

/// Tolerance for feasibility checks on returned points.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Tolerance on the pivot threshold of the sort-based simplex projection.
const PIVOT_TOL: f64 = 1e-12;

// ---- Points ----

/// Dense point in R^d.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    /// Builds a point, rejecting empty or non-finite input.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidConfiguration("point must have dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::ContractViolation("point coordinates must be finite".into()));
        }
        Ok(Point(coords))
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(d: usize) -> Self {
        Point(vec![0.0; d])
    }

    /// Standard basis vector e_i (0-indexed).
    pub fn basis(d: usize, i: usize) -> Self {
        assert!(i < d, "basis index {i} out of range for dimension {d}");
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        Point(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Point) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|a| a.abs()).sum()
    }

    pub fn linf_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn add(&self, other: &Point) -> Point {
        assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: f64) -> Point {
        Point(self.0.iter().map(|a| c * a).collect())
    }

    /// self + c * other.
    pub fn add_scaled(&self, c: f64, other: &Point) -> Point {
        assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + c * b).collect())
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_sq(other).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

// ---- Feasible sets ----

/// Supported decision-set shapes.
#[derive(Clone, Debug, PartialEq)]
pub enum SetKind {
    /// Euclidean ball of the given radius centered at the origin.
    Ball { radius: f64 },
    /// Axis-aligned box with per-coordinate bounds.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Probability simplex { x >= 0, sum x = 1 }.
    Simplex,
}

/// A convex, compact decision set with closed-form projection.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleSet {
    kind: SetKind,
    dim: usize,
}

impl FeasibleSet {
    pub fn unit_ball(d: usize) -> Self {
        assert!(d >= 1);
        FeasibleSet { kind: SetKind::Ball { radius: 1.0 }, dim: d }
    }

    /// Ball of radius `radius`, which must lie in (0, 1].
    pub fn ball(d: usize, radius: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfiguration("set dimension must be >= 1".into()));
        }
        if !(radius > 0.0 && radius <= 1.0) || !radius.is_finite() {
            return Err(Error::InvalidConfiguration(format!(
                "ball radius must lie in (0, 1], got {radius}"
            )));
        }
        Ok(FeasibleSet { kind: SetKind::Ball { radius }, dim: d })
    }

    pub fn axis_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidConfiguration(
                "box bounds must be nonempty and of equal length".into(),
            ));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !l.is_finite() || !h.is_finite() || l > h {
                return Err(Error::InvalidConfiguration(format!(
                    "box bounds must be finite with lo <= hi, got [{l}, {h}]"
                )));
            }
        }
        let dim = lo.len();
        Ok(FeasibleSet { kind: SetKind::Box { lo, hi }, dim })
    }

    pub fn simplex(d: usize) -> Self {
        assert!(d >= 1);
        FeasibleSet { kind: SetKind::Simplex, dim: d }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn contains_origin(&self) -> bool {
        match &self.kind {
            SetKind::Ball { .. } => true,
            SetKind::Box { lo, hi } => lo.iter().zip(hi).all(|(l, h)| *l <= 0.0 && *h >= 0.0),
            SetKind::Simplex => false,
        }
    }

    /// Radius of the largest origin-centered ball inside the set, zero
    /// when the origin is not interior. For sets inside the unit ball
    /// this never exceeds 1.
    pub fn inner_radius(&self) -> f64 {
        match &self.kind {
            SetKind::Ball { radius } => *radius,
            SetKind::Box { lo, hi } => {
                let mut r = f64::INFINITY;
                for (l, h) in lo.iter().zip(hi) {
                    if !(*l < 0.0 && *h > 0.0) {
                        return 0.0;
                    }
                    r = r.min((-l).min(*h));
                }
                r
            }
            SetKind::Simplex => 0.0,
        }
    }

    /// Largest Euclidean norm attained on the set.
    pub fn max_norm(&self) -> f64 {
        match &self.kind {
            SetKind::Ball { radius } => *radius,
            SetKind::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| l.abs().max(h.abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            SetKind::Simplex => 1.0,
        }
    }

    /// Whether the set sits inside the unit ball (the standing
    /// assumption behind every regret bound in this crate).
    pub fn contained_in_unit_ball(&self) -> bool {
        self.max_norm() <= 1.0 + FEASIBILITY_TOL
    }

    pub fn is_feasible(&self, x: &Point, tol: f64) -> bool {
        if x.dim() != self.dim {
            return false;
        }
        match &self.kind {
            SetKind::Ball { radius } => x.norm() <= radius + tol,
            SetKind::Box { lo, hi } => x
                .as_slice()
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol),
            SetKind::Simplex => {
                x.as_slice().iter().all(|v| *v >= -tol)
                    && (x.as_slice().iter().sum::<f64>() - 1.0).abs() <= tol
            }
        }
    }

    /// Euclidean projection onto the set. Already-feasible points are
    /// returned unchanged.
    pub fn project(&self, y: &Point) -> Result<Point> {
        if y.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: y.dim() });
        }
        if !y.is_finite() {
            return Err(Error::ContractViolation("cannot project a non-finite point".into()));
        }
        Ok(match &self.kind {
            SetKind::Ball { radius } => {
                let n = y.norm();
                if n <= *radius {
                    y.clone()
                } else {
                    y.scale(radius / n)
                }
            }
            SetKind::Box { lo, hi } => Point(
                y.as_slice()
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (l, h))| v.max(*l).min(*h))
                    .collect(),
            ),
            SetKind::Simplex => {
                if self.is_feasible(y, FEASIBILITY_TOL) {
                    y.clone()
                } else {
                    project_simplex(y)
                }
            }
        })
    }

    /// Uniform-ish sample from the set (exact for boxes and balls,
    /// Dirichlet(1,..,1) for the simplex). Deterministic given the rng
    /// state.
    pub fn sample(&self, rng: &mut SplitMix64) -> Point {
        match &self.kind {
            SetKind::Ball { radius } => loop {
                let dir = Point(rng.normal_vec(self.dim));
                let n = dir.norm();
                if n > 1e-12 {
                    let r = radius * rng.next_f64().powf(1.0 / self.dim as f64);
                    return dir.scale(r / n);
                }
            },
            SetKind::Box { lo, hi } => Point(
                lo.iter().zip(hi).map(|(l, h)| l + rng.next_f64() * (h - l)).collect(),
            ),
            SetKind::Simplex => loop {
                let raw: Vec<f64> = (0..self.dim).map(|_| -rng.next_f64_open().ln()).collect();
                let s: f64 = raw.iter().sum();
                if s > 1e-12 {
                    return Point(raw.into_iter().map(|v| v / s).collect());
                }
            },
        }
    }

    /// The set scaled by (1 - alpha) about the origin. Requires the
    /// origin to be interior (inner radius positive).
    pub fn shrink(&self, alpha: f64) -> Result<FeasibleSet> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfiguration(format!(
                "shrink factor must lie in (0, 1), got {alpha}"
            )));
        }
        if self.inner_radius() <= 0.0 {
            return Err(Error::InvalidConfiguration(
                "shrink requires a set with the origin in its interior".into(),
            ));
        }
        let s = 1.0 - alpha;
        Ok(match &self.kind {
            SetKind::Ball { radius } => {
                FeasibleSet { kind: SetKind::Ball { radius: radius * s }, dim: self.dim }
            }
            SetKind::Box { lo, hi } => FeasibleSet {
                kind: SetKind::Box {
                    lo: lo.iter().map(|l| l * s).collect(),
                    hi: hi.iter().map(|h| h * s).collect(),
                },
                dim: self.dim,
            },
            SetKind::Simplex => unreachable!("simplex has inner radius zero"),
        })
    }
}

/// Sort-based simplex projection, O(d log d).
fn project_simplex(y: &Point) -> Point {
    let mut u: Vec<f64> = y.as_slice().to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > -PIVOT_TOL {
            theta = t;
        }
    }
    Point(y.as_slice().iter().map(|v| (v - theta).max(0.0)).collect())
}

// ---- Quadratic proximal solvers ----

/// argmin_{x in set} g'x + (stiffness/2) ||x - z||^2, solved as a
/// projection of z - g / stiffness.
pub fn linearized_step(set: &FeasibleSet, z: &Point, g: &Point, stiffness: f64) -> Result<Point> {
    if z.dim() != set.dim() {
        return Err(Error::DimensionMismatch { expected: set.dim(), found: z.dim() });
    }
    if g.dim() != set.dim() {
        return Err(Error::DimensionMismatch { expected: set.dim(), found: g.dim() });
    }
    if !(stiffness > 0.0) || !stiffness.is_finite() {
        return Err(Error::InvalidConfiguration(format!(
            "stiffness must be positive and finite, got {stiffness}"
        )));
    }
    set.project(&z.add_scaled(-1.0 / stiffness, g))
}

/// argmin_{x in set} grad_sum'x + (stiffness/2) ||x||^2, the FTRL solve;
/// equals the projection of -grad_sum / stiffness.
pub fn ftrl_solve(set: &FeasibleSet, grad_sum: &Point, stiffness: f64) -> Result<Point> {
    linearized_step(set, &Point::zeros(set.dim()), grad_sum, stiffness)
}

// ---- Mirror maps and the Bregman step ----

/// Distance-generating function for the general prox method. Both maps
/// are 1-strongly convex with respect to their own norm (Euclidean: l2;
/// entropy: l1 on the simplex).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MirrorMap {
    Euclidean,
    Entropy,
}

impl MirrorMap {
    /// Strong-convexity modulus with respect to the map's norm.
    pub fn strong_convexity(self) -> f64 {
        1.0
    }

    /// Stable identifier used in serialized output.
    pub fn name(self) -> &'static str {
        match self {
            MirrorMap::Euclidean => "euclidean",
            MirrorMap::Entropy => "entropy",
        }
    }

    pub fn omega(self, x: &Point) -> f64 {
        match self {
            MirrorMap::Euclidean => 0.5 * x.norm_sq(),
            MirrorMap::Entropy => x
                .as_slice()
                .iter()
                .map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 })
                .sum(),
        }
    }

    /// Norm the map is strongly convex in.
    pub fn primal_norm(self, v: &Point) -> f64 {
        match self {
            MirrorMap::Euclidean => v.norm(),
            MirrorMap::Entropy => v.l1_norm(),
        }
    }

    /// Dual of `primal_norm`; variation quantities for gradients are
    /// measured here.
    pub fn dual_norm(self, v: &Point) -> f64 {
        match self {
            MirrorMap::Euclidean => v.norm(),
            MirrorMap::Entropy => v.linf_norm(),
        }
    }

    /// Bregman divergence D(x, z). The entropy map requires z strictly
    /// positive.
    pub fn bregman(self, x: &Point, z: &Point) -> f64 {
        assert_eq!(x.dim(), z.dim());
        match self {
            MirrorMap::Euclidean => 0.5 * x.distance_sq(z),
            MirrorMap::Entropy => {
                let mut d = 0.0;
                for (&xi, &zi) in x.as_slice().iter().zip(z.as_slice()) {
                    assert!(zi > 0.0, "entropy Bregman center must be strictly positive");
                    if xi > 0.0 {
                        d += xi * (xi / zi).ln() - xi + zi;
                    } else {
                        d += zi;
                    }
                }
                d
            }
        }
    }

    /// Rejects map/set pairings the closed-form steps do not cover.
    pub fn check_compatible(self, set: &FeasibleSet) -> Result<()> {
        match (self, set.kind()) {
            (MirrorMap::Entropy, SetKind::Simplex) => Ok(()),
            (MirrorMap::Entropy, _) => Err(Error::InvalidConfiguration(
                "the entropy map is only defined on the simplex".into(),
            )),
            (MirrorMap::Euclidean, _) => Ok(()),
        }
    }

    /// argmin of omega over the set: the projection of the origin for
    /// the Euclidean map, the uniform distribution for entropy.
    pub fn argmin_omega(self, set: &FeasibleSet) -> Result<Point> {
        self.check_compatible(set)?;
        match self {
            MirrorMap::Euclidean => set.project(&Point::zeros(set.dim())),
            MirrorMap::Entropy => {
                Ok(Point::from_raw(vec![1.0 / set.dim() as f64; set.dim()]))
            }
        }
    }

    /// Set width R = sqrt(2 (max omega - min omega)) entering the
    /// general prox step size; sqrt(2 ln d) for entropy on the simplex.
    pub fn size_radius(self, set: &FeasibleSet) -> Result<f64> {
        self.check_compatible(set)?;
        match self {
            MirrorMap::Euclidean => {
                let lo = self.argmin_omega(set)?.norm_sq();
                let hi = set.max_norm().powi(2);
                Ok((hi - lo).max(0.0).sqrt())
            }
            MirrorMap::Entropy => Ok((2.0 * (set.dim() as f64).ln()).sqrt()),
        }
    }
}

/// argmin_{x in set} g'x + stiffness * D(x, z).
///
/// With the Euclidean map this is exactly [`linearized_step`] (same code
/// path, bit-identical result). With the entropy map on the simplex it
/// is the normalized multiplicative update x_i ∝ z_i exp(-g_i/stiffness),
/// computed in log space.
pub fn bregman_prox_step(
    set: &FeasibleSet,
    map: MirrorMap,
    z: &Point,
    g: &Point,
    stiffness: f64,
) -> Result<Point> {
    map.check_compatible(set)?;
    match map {
        MirrorMap::Euclidean => linearized_step(set, z, g, stiffness),
        MirrorMap::Entropy => {
            if z.dim() != set.dim() {
                return Err(Error::DimensionMismatch { expected: set.dim(), found: z.dim() });
            }
            if g.dim() != set.dim() {
                return Err(Error::DimensionMismatch { expected: set.dim(), found: g.dim() });
            }
            if !(stiffness > 0.0) || !stiffness.is_finite() {
                return Err(Error::InvalidConfiguration(format!(
                    "stiffness must be positive and finite, got {stiffness}"
                )));
            }
            if z.as_slice().iter().any(|&v| v <= 0.0) {
                return Err(Error::ContractViolation(
                    "entropy prox step requires a strictly positive center".into(),
                ));
            }
            let w: Vec<f64> = z
                .as_slice()
                .iter()
                .zip(g.as_slice())
                .map(|(&zi, &gi)| zi.ln() - gi / stiffness)
                .collect();
            let m = w.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let e: Vec<f64> = w.iter().map(|&wi| (wi - m).exp()).collect();
            let s: f64 = e.iter().sum();
            Ok(Point::from_raw(e.into_iter().map(|v| v / s).collect()))
        }
    }
}
