//! Poincaré ball model `D^{n,α} = {y ∈ ℝⁿ : α‖y‖² < 1}` and its isometry with
//! the hyperboloid, using `α = 1/β` so both models share curvature `−1/β`.
//!
//! This module is an independent oracle: the Möbius operations below are
//! evaluated with ball formulas only, and the tests check that they agree with
//! the hyperboloid operations after mapping through [`hyperboloid_to_ball`].

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::manifold::{Curvature, HyperPoint};

/// Largest argument passed to `artanh`.
const ATANH_MAX: f64 = 1.0 - 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    coords: Vec<f64>,
    alpha: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl BallPoint {
    pub fn new(coords: Vec<f64>, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidCurvature(1.0 / alpha));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let r = alpha * coords.iter().map(|x| x * x).sum::<f64>();
        if r >= 1.0 {
            return Err(Error::OutsideBall(r));
        }
        Ok(Self { coords, alpha })
    }

    pub fn origin(dim: usize, alpha: f64) -> Self {
        Self {
            coords: vec![0.0; dim],
            alpha,
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }
}

/// `tanh(√α‖v‖)·v/(√α‖v‖)`; zero maps to the origin.
pub fn ball_exp_origin(v: &[f64], alpha: f64) -> Result<BallPoint> {
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite);
    }
    let sa = alpha.sqrt();
    let n = norm(v);
    if n == 0.0 {
        return Ok(BallPoint::origin(v.len(), alpha));
    }
    let scale = (sa * n).tanh() / (sa * n);
    let mut coords: Vec<f64> = v.iter().map(|x| x * scale).collect();
    // tanh saturates to 1 in floating point for large arguments
    let r = sa * norm(&coords);
    if r >= 1.0 {
        let shrink = ATANH_MAX / r;
        coords.iter_mut().for_each(|c| *c *= shrink);
    }
    Ok(BallPoint { coords, alpha })
}

/// `artanh(√α‖y‖)·y/(√α‖y‖)`; the origin maps to zero.
pub fn ball_log_origin(y: &BallPoint) -> Vec<f64> {
    let sa = y.alpha.sqrt();
    let n = y.norm();
    if n == 0.0 {
        return vec![0.0; y.dim()];
    }
    let r = (sa * n).min(ATANH_MAX);
    let scale = r.atanh() / (sa * n);
    y.coords.iter().map(|x| x * scale).collect()
}

/// `√β·(x₁…xₙ)/(√β + x₀)`, landing in the ball with `α = 1/β`.
pub fn hyperboloid_to_ball(x: &HyperPoint) -> BallPoint {
    let sb = x.curvature().sqrt_beta();
    let denom = sb + x.coords()[0];
    BallPoint {
        coords: x.spatial().iter().map(|c| sb * c / denom).collect(),
        alpha: 1.0 / x.beta(),
    }
}

/// `(1/√α + √α‖y‖², 2y₁, …, 2yₙ)/(1 − α‖y‖²)` on the hyperboloid with
/// `β = 1/α`.
pub fn ball_to_hyperboloid(y: &BallPoint) -> Result<HyperPoint> {
    let a = y.alpha;
    let sa = a.sqrt();
    let sq: f64 = y.coords.iter().map(|c| c * c).sum();
    let denom = 1.0 - a * sq;
    if denom <= 0.0 {
        return Err(Error::OutsideBall(a * sq));
    }
    let mut coords = Vec::with_capacity(y.dim() + 1);
    coords.push((1.0 / sa + sa * sq) / denom);
    coords.extend(y.coords.iter().map(|c| 2.0 * c / denom));
    HyperPoint::new(coords, Curvature::new(1.0 / a)?)
}

/// Row-major `rows × cols` matrix times vector.
fn matvec(m: &[f64], rows: usize, cols: usize, y: &[f64]) -> Vec<f64> {
    assert_eq!(m.len(), rows * cols, "matrix storage does not match shape");
    assert_eq!(cols, y.len(), "matrix columns do not match vector length");
    (0..rows)
        .map(|r| m[r * cols..(r + 1) * cols].iter().zip(y).map(|(a, b)| a * b).sum())
        .collect()
}

/// Möbius matrix-vector product
/// `(1/√α)·tanh((‖My‖/‖y‖)·artanh(√α‖y‖))·My/‖My‖`, with the origin returned
/// when `y = 0` or `My = 0`.
pub fn mobius_matvec(m: &[f64], rows: usize, cols: usize, y: &BallPoint) -> BallPoint {
    let alpha = y.alpha;
    let yn = y.norm();
    if yn == 0.0 {
        return BallPoint::origin(rows, alpha);
    }
    let my = matvec(m, rows, cols, &y.coords);
    let myn = norm(&my);
    if myn == 0.0 {
        return BallPoint::origin(rows, alpha);
    }
    let sa = alpha.sqrt();
    let t = ((myn / yn) * (sa * yn).min(ATANH_MAX).atanh()).tanh();
    let scale = t / (sa * myn);
    BallPoint {
        coords: my.iter().map(|c| c * scale).collect(),
        alpha,
    }
}

/// Möbius version of a pointwise non-linearity: `exp_0(σ(log_0(y)))`.
pub fn mobius_pointwise(sigma: Activation, y: &BallPoint) -> BallPoint {
    let v: Vec<f64> = ball_log_origin(y).into_iter().map(|x| sigma.apply(x)).collect();
    ball_exp_origin(&v, y.alpha).expect("finite by construction")
}
