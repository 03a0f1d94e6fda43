//! Hyperboloid model of hyperbolic space.
//!
//! Points of `H^{n,β}` are stored with `n + 1` coordinates and satisfy
//! `⟨x, x⟩_L = −β`, `x₀ > 0`, where `⟨x, y⟩_L = −x₀y₀ + Σ xᵢyᵢ` is the
//! Lorentzian scalar product. The sectional curvature is `−1/β`.
//!
//! The generic functions in [`kernel`] operate on coordinate slices over any
//! [`Real`] scalar and are what the network evaluates on the autodiff tape.
//! The typed wrappers ([`HyperPoint`], [`TangentVector`], [`exp_origin`], ...)
//! validate invariants and are the public `f64` API.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance of the manifold membership check `|⟨x,x⟩_L + β|`.
pub const MANIFOLD_TOL: f64 = 1e-9;

/// Tangent norms below this map to the origin exactly.
pub const ZERO_TANGENT_EPS: f64 = 1e-12;

/// Generic hyperboloid kernels on raw coordinate slices.
pub mod kernel {
    use super::ZERO_TANGENT_EPS;
    use crate::real::Real;

    const EPS_SQ: f64 = ZERO_TANGENT_EPS * ZERO_TANGENT_EPS;

    pub fn inner<S: Real>(x: &[S], y: &[S]) -> S {
        assert_eq!(x.len(), y.len(), "lorentz_inner: length mismatch");
        assert!(x.len() >= 2, "lorentz_inner: need at least 2 coordinates");
        if x.len() == 2 {
            return x[1] * y[1] - x[0] * y[0];
        }
        S::dot(&x[1..], &y[1..]) - x[0] * y[0]
    }

    /// Point on `H^{n,β}` with the given spatial coordinates: `x₀ = √(β + ‖x̂‖²)`.
    pub fn complete<S: Real>(spatial: Vec<S>, beta: S) -> Vec<S> {
        let sq = S::dot(&spatial, &spatial);
        let mut out = Vec::with_capacity(spatial.len() + 1);
        out.push((beta + sq).sqrt());
        out.extend(spatial);
        out
    }

    /// `exp_0^β((0, u))`, where `u` holds the spatial tangent coordinates.
    ///
    /// The time coordinate is recomputed from the spatial part, which equals
    /// `√β·cosh(‖u‖/√β)` analytically and keeps the result on the manifold to
    /// rounding. Near `u = 0` the scale factor `√β·sinh(‖u‖/√β)/‖u‖` is replaced
    /// by its limit 1.
    pub fn exp_origin<S: Real>(u: &[S], beta: S) -> Vec<S> {
        let n2 = S::dot(u, u);
        let spatial: Vec<S> = if n2.value() < EPS_SQ {
            u.to_vec()
        } else {
            let n = n2.sqrt();
            let sb = beta.sqrt();
            let scale = (n / sb).sinh() * sb / n;
            u.iter().map(|&ui| ui * scale).collect()
        };
        complete(spatial, beta)
    }

    /// Spatial coordinates of `log_0^β(x)` (the time coordinate is 0).
    ///
    /// Uses `d(0, x) = √β·asinh(‖x̂‖/√β)`, which equals `√β·arcosh(x₀/√β)` on
    /// the manifold and stays well conditioned near the origin.
    pub fn log_origin<S: Real>(x: &[S], beta: S) -> Vec<S> {
        let xs = &x[1..];
        let s2 = S::dot(xs, xs);
        if s2.value() < EPS_SQ {
            return xs.to_vec();
        }
        let s = s2.sqrt();
        let sb = beta.sqrt();
        let scale = (s / sb).asinh() * sb / s;
        xs.iter().map(|&xi| xi * scale).collect()
    }

    /// `−2β − 2⟨x, y⟩_L`, evaluated as `⟨x − y, x − y⟩_L` (equal on the
    /// manifold) so that nearby points do not lose precision to cancellation.
    pub fn sq_lorentz_distance<S: Real>(x: &[S], y: &[S]) -> S {
        let diff: Vec<S> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
        inner(&diff, &diff)
    }

    /// `√β·arcosh(1 + d_L²/(2β))`, written as `2√β·arsinh(d_L/(2√β))`.
    pub fn distance<S: Real>(x: &[S], y: &[S], beta: S) -> S {
        let sq = sq_lorentz_distance(x, y).max(x[0].constant(0.0));
        let sb = beta.sqrt();
        (sq.sqrt() / (sb * 2.0)).asinh() * sb * 2.0
    }
}

/// Curvature parameter `β > 0`; the manifold has curvature `−1/β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Curvature(f64);

impl Curvature {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta > 0.0 {
            Ok(Self(beta))
        } else {
            Err(Error::InvalidCurvature(beta))
        }
    }

    pub fn beta(self) -> f64 {
        self.0
    }

    pub fn sqrt_beta(self) -> f64 {
        self.0.sqrt()
    }
}

impl TryFrom<f64> for Curvature {
    type Error = Error;
    fn try_from(beta: f64) -> Result<Self> {
        Self::new(beta)
    }
}

impl From<Curvature> for f64 {
    fn from(c: Curvature) -> f64 {
        c.0
    }
}

impl Default for Curvature {
    fn default() -> Self {
        Self(1.0)
    }
}

/// A point on `H^{n,β}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperPoint {
    coords: Vec<f64>,
    beta: Curvature,
}

impl HyperPoint {
    /// Validates `|⟨x,x⟩_L + β| ≤ 1e−9` and `x₀ > 0`.
    pub fn new(coords: Vec<f64>, beta: Curvature) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let residual = lorentz_inner(&coords, &coords) + beta.beta();
        // absolute near the origin, relative to x₀² far out where the
        // self-product cancels catastrophically
        let tol = MANIFOLD_TOL * coords[0].powi(2).max(1.0);
        if residual.abs() > tol || coords[0] <= 0.0 {
            return Err(Error::OffManifold { residual });
        }
        Ok(Self { coords, beta })
    }

    /// Wraps coordinates produced by a kernel that guarantees membership.
    pub(crate) fn from_kernel(coords: Vec<f64>, beta: Curvature) -> Self {
        debug_assert!(
            (lorentz_inner(&coords, &coords) + beta.beta()).abs()
                <= 1e-6 * (1.0 + coords[0] * coords[0]),
            "kernel produced an off-manifold point"
        );
        Self { coords, beta }
    }

    /// `(√β, 0, …, 0)` in `H^{dim,β}`.
    pub fn origin(dim: usize, beta: Curvature) -> Self {
        let mut coords = vec![0.0; dim + 1];
        coords[0] = beta.sqrt_beta();
        Self { coords, beta }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn spatial(&self) -> &[f64] {
        &self.coords[1..]
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn curvature(&self) -> Curvature {
        self.beta
    }

    pub fn beta(&self) -> f64 {
        self.beta.beta()
    }

    /// Intrinsic dimension `n`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// `⟨x,x⟩_L + β`.
    pub fn residual(&self) -> f64 {
        lorentz_inner(&self.coords, &self.coords) + self.beta()
    }

    pub fn is_origin(&self) -> bool {
        self.spatial().iter().all(|&c| c == 0.0)
    }
}

/// A tangent vector at the origin of `H^{n,β}`; its first coordinate is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    coords: Vec<f64>,
}

impl TangentVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: coords.len(),
            });
        }
        if coords[0] != 0.0 {
            return Err(Error::NotTangent(coords[0]));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { coords })
    }

    /// `(0, spatial…)`.
    pub fn from_spatial(spatial: &[f64]) -> Self {
        let mut coords = Vec::with_capacity(spatial.len() + 1);
        coords.push(0.0);
        coords.extend_from_slice(spatial);
        Self { coords }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim + 1],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn spatial(&self) -> &[f64] {
        &self.coords[1..]
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Lorentzian norm, which for a tangent vector at the origin is the
    /// Euclidean norm of the spatial part.
    pub fn norm(&self) -> f64 {
        self.spatial().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `⟨x, y⟩_L = −x₀y₀ + Σ_{i≥1} xᵢyᵢ`. Panics on length mismatch or fewer than
/// two coordinates.
pub fn lorentz_inner(x: &[f64], y: &[f64]) -> f64 {
    kernel::inner(x, y)
}

/// `√⟨v, v⟩_L`; errors when the self-product is negative.
pub fn lorentz_norm(v: &[f64]) -> Result<f64> {
    let ip = lorentz_inner(v, v);
    if ip < 0.0 {
        Err(Error::NegativeNorm(ip))
    } else {
        Ok(ip.sqrt())
    }
}

/// Modulus norm `|‖v‖_L| = √|⟨v, v⟩_L|`, defined for every vector.
pub fn lorentz_norm_modulus(v: &[f64]) -> f64 {
    lorentz_inner(v, v).abs().sqrt()
}

/// Exponential map at the origin.
pub fn exp_origin(v: &TangentVector, beta: Curvature) -> HyperPoint {
    if v.norm() < ZERO_TANGENT_EPS {
        return HyperPoint::origin(v.dim(), beta);
    }
    HyperPoint::from_kernel(kernel::exp_origin(v.spatial(), beta.beta()), beta)
}

/// Logarithmic map at the origin; the origin maps to the zero vector.
pub fn log_origin(y: &HyperPoint) -> TangentVector {
    TangentVector::from_spatial(&kernel::log_origin(&y.coords, y.beta()))
}

fn check_pair(x: &HyperPoint, y: &HyperPoint) {
    assert_eq!(x.dim(), y.dim(), "points have different dimensions");
    assert_eq!(
        x.beta(),
        y.beta(),
        "points live on hyperboloids of different curvature"
    );
}

/// Intrinsic geodesic distance.
pub fn distance(x: &HyperPoint, y: &HyperPoint) -> f64 {
    check_pair(x, y);
    kernel::distance(&x.coords, &y.coords, x.beta())
}

/// Squared Lorentzian distance `−2β − 2⟨x, y⟩_L`, clamped at 0 against
/// rounding.
pub fn sq_lorentz_distance(x: &HyperPoint, y: &HyperPoint) -> f64 {
    check_pair(x, y);
    kernel::sq_lorentz_distance(&x.coords, &y.coords).max(0.0)
}

/// Keeps the spatial coordinates and recomputes `x₀ = √(β + ‖x̂‖²)`.
pub fn project_to_manifold(raw: &[f64], beta: Curvature) -> Result<HyperPoint> {
    if raw.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: raw.len(),
        });
    }
    if raw[1..].iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(HyperPoint {
        coords: kernel::complete(raw[1..].to_vec(), beta.beta()),
        beta,
    })
}
