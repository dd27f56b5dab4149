//! Reproducible scenario families used by the experiments and tests.
//!
//! Every generator is deterministic in its arguments: the same seed
//! gives the same cost sequence on every platform. Smoothness and
//! value-Lipschitz bounds are computed from the generated costs, so
//! the bound checks see the tightest constants the scenario admits.

use crate::algorithms::SharedScenario;
use crate::costs::{CostFunction, Scenario, SymMatrix};
use crate::error::Error;
use crate::geometry::{FeasibleSet, Point};
use crate::rng::SplitMix64;
use crate::Result;
use std::sync::Arc;

/// Tightest positive value-Lipschitz bound the sequence admits; linear
/// sequences of zero vectors fall back to 1 so step formulas stay finite.
fn value_bound(costs: &[CostFunction]) -> f64 {
    let g = costs.iter().map(|c| c.value_lipschitz()).fold(0.0f64, f64::max);
    if g > 0.0 {
        g
    } else {
        1.0
    }
}

fn require_shape(d: usize, t: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidConfiguration("dimension must be at least 1".into()));
    }
    if t == 0 {
        return Err(Error::InvalidConfiguration("horizon must be at least 1".into()));
    }
    Ok(())
}

/// Uniform point in the centered ball of the given radius.
fn ball_point(rng: &mut SplitMix64, d: usize, radius: f64) -> Point {
    let dir = Point::new(rng.normal_vec(d)).expect("gaussian coordinates are finite");
    let n = dir.norm();
    if n == 0.0 {
        return Point::zeros(d);
    }
    let r = radius * rng.next_f64().powf(1.0 / d as f64);
    dir.scale(r / n)
}

/// Random symmetric matrix with eigenvalues in [min_eig, max_eig] and
/// largest eigenvalue equal to max_eig.
pub fn random_psd(d: usize, rng: &mut SplitMix64, min_eig: f64, max_eig: f64) -> SymMatrix {
    assert!(min_eig >= 0.0 && max_eig > min_eig, "need 0 <= min_eig < max_eig");
    if d == 1 {
        return SymMatrix::scaled_identity(1, max_eig);
    }
    let mut rows = vec![vec![0.0; d]; d];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            if j <= i {
                *v = rng.normal();
            }
        }
    }
    // B B' is positive semidefinite; rescale its spectrum into the band
    let mut gram = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for (bi, bj) in rows[i].iter().zip(rows[j].iter()) {
                s += bi * bj;
            }
            gram[i * d + j] = s;
        }
    }
    let raw = SymMatrix::from_rows(
        (0..d).map(|i| gram[i * d..(i + 1) * d].to_vec()).collect::<Vec<_>>(),
    )
    .expect("gram matrices are symmetric");
    let top = raw.lambda_max().max(1e-12);
    raw.scale((max_eig - min_eig) / top)
        .add(&SymMatrix::scaled_identity(d, min_eig))
}

/// The same quadratic every round: curvature I, center drawn once from
/// the half-radius ball. Smoothness is exactly 1.
pub fn identical_quadratic(d: usize, t: usize, seed: u64) -> Result<SharedScenario> {
    require_shape(d, t)?;
    let mut rng = SplitMix64::new(seed);
    let a = ball_point(&mut rng, d, 0.5);
    let costs: Vec<CostFunction> =
        (0..t).map(|_| CostFunction::quadratic(SymMatrix::identity(d), a.clone())).collect::<Result<_>>()?;
    let g = value_bound(&costs);
    Ok(Arc::new(Scenario::new(
        format!("idq-d{d}-t{t}-seed{seed}"),
        costs,
        FeasibleSet::unit_ball(d),
        1.0,
        g,
    )?))
}

/// The same quadratic every round, centered at the origin: c(x) = |x|^2/2,
/// so both the smoothness and value-Lipschitz bounds are exactly 1.
pub fn identical_centered_quadratic(d: usize, t: usize) -> Result<SharedScenario> {
    require_shape(d, t)?;
    let costs: Vec<CostFunction> = (0..t)
        .map(|_| CostFunction::quadratic(SymMatrix::identity(d), Point::zeros(d)))
        .collect::<Result<_>>()?;
    Ok(Arc::new(Scenario::new(
        format!("idq0-d{d}-t{t}"),
        costs,
        FeasibleSet::unit_ball(d),
        1.0,
        1.0,
    )?))
}

/// One shared curvature, a linear term that drifts by `drift` per round
/// inside the half-radius ball. Consecutive costs share their Hessian,
/// so the extended sequential variation is known in closed form.
pub fn smooth_plus_drift(d: usize, t: usize, seed: u64, drift: f64) -> Result<SharedScenario> {
    require_shape(d, t)?;
    if !(drift.is_finite() && drift >= 0.0) {
        return Err(Error::InvalidConfiguration(format!(
            "drift must be nonnegative, got {drift}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let q = random_psd(d, &mut rng, 0.05, 1.0);
    let mut f = ball_point(&mut rng, d, 0.25);
    let mut costs = Vec::with_capacity(t);
    for _ in 0..t {
        costs.push(CostFunction::smooth_plus_drift(q.clone(), f.clone())?);
        let dir = Point::new(rng.normal_vec(d)).expect("gaussian coordinates are finite");
        let n = dir.norm();
        if n > 0.0 {
            f = f.add_scaled(drift / n, &dir);
        }
        let fn_ = f.norm();
        if fn_ > 0.5 {
            f = f.scale(0.5 / fn_);
        }
    }
    let g = value_bound(&costs);
    Ok(Arc::new(Scenario::new(
        format!("spd-d{d}-t{t}-seed{seed}"),
        costs,
        FeasibleSet::unit_ball(d),
        1.0,
        g,
    )?))
}

/// Linear costs f_t = center + spread * noise, clipped to the unit
/// ball, with the center drawn once from the (1 - spread)-ball. Small
/// spreads give low-variation sequences.
pub fn linear_random(d: usize, t: usize, seed: u64, spread: f64) -> Result<SharedScenario> {
    require_shape(d, t)?;
    if !(0.0..=1.0).contains(&spread) {
        return Err(Error::InvalidConfiguration(format!(
            "spread must lie in [0, 1], got {spread}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let center = ball_point(&mut rng, d, 1.0 - spread);
    let costs: Vec<CostFunction> = (0..t)
        .map(|_| {
            let mut f = center.add(&ball_point(&mut rng, d, spread));
            let n = f.norm();
            if n > 1.0 {
                f = f.scale(1.0 / n);
            }
            CostFunction::linear(f)
        })
        .collect();
    let g = value_bound(&costs);
    Ok(Arc::new(Scenario::new(
        format!("lin-d{d}-t{t}-seed{seed}"),
        costs,
        FeasibleSet::unit_ball(d),
        1.0,
        g,
    )?))
}

/// Deterministic two-phase linear sequence: +0.9 e1 for the first half
/// of the rounds, -0.9 e1 for the rest. Total variation grows linearly
/// with the horizon while the sequential variation stays at the single
/// switch.
pub fn linear_switching(d: usize, t: usize) -> Result<SharedScenario> {
    require_shape(d, t)?;
    let v = Point::basis(d, 0).scale(0.9);
    let half = t.div_ceil(2);
    let costs: Vec<CostFunction> = (0..t)
        .map(|i| CostFunction::linear(if i < half { v.clone() } else { v.scale(-1.0) }))
        .collect();
    let g = value_bound(&costs);
    Ok(Arc::new(Scenario::new(
        format!("switch-d{d}-t{t}"),
        costs,
        FeasibleSet::unit_ball(d),
        1.0,
        g,
    )?))
}

/// Independent random quadratic each round: fresh curvature with
/// eigenvalues in [0.05, 1] and a fresh center in the half-radius ball.
pub fn random_quadratics(d: usize, t: usize, seed: u64) -> Result<SharedScenario> {
    require_shape(d, t)?;
    let mut rng = SplitMix64::new(seed);
    let costs: Vec<CostFunction> = (0..t)
        .map(|_| {
            let q = random_psd(d, &mut rng, 0.05, 1.0);
            let a = ball_point(&mut rng, d, 0.5);
            CostFunction::quadratic(q, a)
        })
        .collect::<Result<_>>()?;
    let g = value_bound(&costs);
    Ok(Arc::new(Scenario::new(
        format!("rq-d{d}-t{t}-seed{seed}"),
        costs,
        FeasibleSet::unit_ball(d),
        1.0,
        g,
    )?))
}

/// Drifting linear costs on the probability simplex, for entropy-map
/// runs. Coordinates stay in [-1, 1], so the sup-norm gradient bound
/// is 1.
pub fn linear_drift_simplex(d: usize, t: usize, seed: u64, drift: f64) -> Result<SharedScenario> {
    require_shape(d, t)?;
    if d < 2 {
        return Err(Error::InvalidConfiguration(
            "the simplex needs at least two coordinates".into(),
        ));
    }
    if !(drift.is_finite() && drift >= 0.0) {
        return Err(Error::InvalidConfiguration(format!(
            "drift must be nonnegative, got {drift}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut f: Vec<f64> = (0..d).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
    let mut costs = Vec::with_capacity(t);
    for _ in 0..t {
        costs.push(CostFunction::linear(Point::new(f.clone()).expect("bounded coordinates")));
        for v in f.iter_mut() {
            *v = (*v + drift * rng.normal()).clamp(-1.0, 1.0);
        }
    }
    let g = value_bound(&costs);
    Ok(Arc::new(Scenario::new(
        format!("simplex-d{d}-t{t}-seed{seed}"),
        costs,
        FeasibleSet::simplex(d),
        1.0,
        g,
    )?))
}
