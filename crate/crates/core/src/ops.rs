//! Graph operations on the hyperboloid: feature lifting, curvature change,
//! matrix-vector products, centroid aggregation, distance attention and
//! pointwise non-linearities, plus an iterative Fréchet-mean oracle.

use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::graph::Adjacency;
use crate::manifold::{
    self, kernel as mk, lorentz_inner, sq_lorentz_distance, Curvature, HyperPoint,
};

/// Generic kernels on coordinate slices, shared by the typed API below and
/// the network forward pass on the autodiff tape.
pub mod kernel {
    use super::mk;
    use crate::activation::Activation;
    use crate::real::Real;

    /// Row-major `rows × cols` matrix times vector.
    pub fn mat_mul<S: Real>(m: &[S], rows: usize, cols: usize, v: &[S]) -> Vec<S> {
        assert_eq!(m.len(), rows * cols, "matrix storage does not match shape");
        assert_eq!(v.len(), cols, "matrix columns do not match vector length");
        (0..rows)
            .map(|r| S::dot(&m[r * cols..(r + 1) * cols], v))
            .collect()
    }

    pub fn change_curvature<S: Real>(x: &[S], from: S, to: S) -> Vec<S> {
        mk::exp_origin(&mk::log_origin(x, from), to)
    }

    /// `exp_0((0, M·log_0(x)))`.
    pub fn matvec<S: Real>(m: &[S], rows: usize, cols: usize, x: &[S], beta: S) -> Vec<S> {
        let v = mk::log_origin(x, beta);
        mk::exp_origin(&mat_mul(m, rows, cols, &v), beta)
    }

    /// `−⟨s,s⟩_L` for `s = Σ wⱼhⱼ`, expanded as
    /// `β(Σw)² + Σ_{j<k} wⱼwₖ·d_L²(hⱼ,hₖ)`. Every term is non-negative for
    /// non-negative weights, whereas the direct product cancels
    /// catastrophically once points are far from the origin.
    pub fn weighted_sum_norm_sq<S: Real>(points: &[&[S]], weights: &[S], beta: S) -> S {
        let total = S::sum(weights);
        let mut terms = vec![beta * total * total];
        for j in 0..points.len() {
            for k in j + 1..points.len() {
                let sq = mk::sq_lorentz_distance(points[j], points[k]).max(beta.constant(0.0));
                terms.push(weights[j] * weights[k] * sq);
            }
        }
        S::sum(&terms)
    }

    /// `√β·s/√|⟨s,s⟩_L|` with `s = Σ wⱼhⱼ`; the time coordinate is then
    /// recomputed from the spatial part.
    pub fn centroid<S: Real>(points: &[&[S]], weights: &[S], beta: S) -> Vec<S> {
        assert_eq!(points.len(), weights.len(), "one weight per point");
        let d = points[0].len();
        let s: Vec<S> = (1..d)
            .map(|k| {
                let col: Vec<S> = points.iter().map(|p| p[k]).collect();
                S::dot(weights, &col)
            })
            .collect();
        let scale = beta.sqrt() / weighted_sum_norm_sq(points, weights, beta).sqrt();
        mk::complete(s.into_iter().map(|c| c * scale).collect(), beta)
    }

    /// `exp_0((0, σ(log_0(x))))`.
    pub fn pointwise<S: Real>(sigma: Activation, x: &[S], beta: S) -> Vec<S> {
        let v: Vec<S> = mk::log_origin(x, beta)
            .into_iter()
            .map(|c| sigma.apply(c))
            .collect();
        mk::exp_origin(&v, beta)
    }

    /// Softmax of `−d_L²(zᵢ, zⱼ)` over `j ∈ members`, with the row maximum
    /// subtracted before exponentiating.
    pub fn attention_row<S: Real>(att: &[Vec<S>], i: usize, members: &[usize]) -> Vec<S> {
        let scores: Vec<S> = members
            .iter()
            .map(|&j| -mk::sq_lorentz_distance(&att[i], &att[j]))
            .collect();
        let mx = scores
            .iter()
            .map(|s| s.value())
            .fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<S> = scores.iter().map(|&s| (s - mx).exp()).collect();
        let total = S::sum(&exps);
        exps.into_iter().map(|e| e / total).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixRole {
    Transform,
    Attention,
}

/// Real `rows × cols` matrix acting on spatial tangent coordinates, stored row
/// major. Attention matrices are square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    role: MatrixRole,
}

impl WeightMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>, role: MatrixRole) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if role == MatrixRole::Attention && rows != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: rows,
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            rows,
            cols,
            data,
            role,
        })
    }

    pub fn identity(n: usize, role: MatrixRole) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
            role,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn role(&self) -> MatrixRole {
        self.role
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// Ordinary matrix product `self · other`, keeping `self`'s role.
    pub fn compose(&self, other: &WeightMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                for c in 0..other.cols {
                    data[r * other.cols + c] += a * other.get(k, c);
                }
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            data,
            role: self.role,
        })
    }
}

/// Aggregation weights: for each node, `(j, wᵢⱼ)` over `N(i) ∪ {i}` sorted by
/// `j`. Every row is a probability distribution with positive entries.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights {
    rows: Vec<Vec<(usize, f64)>>,
}

impl AttentionWeights {
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |&(k, _)| k)
            .ok()
            .map(|p| row[p].1)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// `N(i) ∪ {i}` in ascending order.
pub fn closed_neighborhood(adj: &Adjacency, i: usize) -> Vec<usize> {
    let nb = adj.neighbors(i);
    let pos = nb.partition_point(|&j| j < i);
    let mut out = Vec::with_capacity(nb.len() + 1);
    out.extend_from_slice(&nb[..pos]);
    out.push(i);
    out.extend_from_slice(&nb[pos..]);
    out
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Maps a Euclidean feature vector onto the hyperboloid through the
/// exponential map at the origin.
pub fn lift_euclidean(h: &[f64], beta: Curvature) -> Result<HyperPoint> {
    if h.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    check_finite(h)?;
    Ok(HyperPoint::from_kernel(
        mk::exp_origin(h, beta.beta()),
        beta,
    ))
}

/// Moves `x` to the hyperboloid of curvature `−1/β_new` by going through the
/// tangent space at the origin.
pub fn change_curvature(x: &HyperPoint, beta_new: Curvature) -> HyperPoint {
    HyperPoint::from_kernel(
        kernel::change_curvature(x.coords(), x.beta(), beta_new.beta()),
        beta_new,
    )
}

pub fn lorentz_matvec(m: &WeightMatrix, x: &HyperPoint) -> Result<HyperPoint> {
    if m.cols != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.cols,
            got: x.dim(),
        });
    }
    let beta = x.curvature();
    Ok(HyperPoint::from_kernel(
        kernel::matvec(&m.data, m.rows, m.cols, x.coords(), beta.beta()),
        beta,
    ))
}

/// Absolute value of `⟨s,s⟩_L` below which the weighted sum is rejected.
const DEGENERATE_SUM: f64 = 1e-15;

fn check_weighted(points: &[HyperPoint], weights: &[f64]) -> Result<()> {
    let Some(first) = points.first() else {
        return Err(Error::Degenerate("centroid of no points".into()));
    };
    if points.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::Degenerate(format!("centroid weight {w} is not positive")));
    }
    for p in points {
        if p.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                got: p.dim(),
            });
        }
        if p.beta() != first.beta() {
            return Err(Error::Degenerate("points of different curvature".into()));
        }
    }
    Ok(())
}

/// Closed-form minimizer of `Σ wⱼ·d_L²(hⱼ, c)` over the hyperboloid.
pub fn lorentz_centroid(points: &[HyperPoint], weights: &[f64]) -> Result<HyperPoint> {
    check_weighted(points, weights)?;
    let beta = points[0].curvature();
    let refs: Vec<&[f64]> = points.iter().map(HyperPoint::coords).collect();
    let q = kernel::weighted_sum_norm_sq(&refs, weights, beta.beta());
    if q < DEGENERATE_SUM {
        return Err(Error::Degenerate(format!(
            "weighted sum has Lorentzian self-product {:e}",
            -q
        )));
    }
    Ok(HyperPoint::from_kernel(
        kernel::centroid(&refs, weights, beta.beta()),
        beta,
    ))
}

/// Objective minimized by an aggregation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceKind {
    /// `Σ wⱼ·d_L²(hⱼ, c)`.
    SqLorentzian,
    /// `Σ wⱼ·d(hⱼ, c)²` with the geodesic distance.
    Intrinsic,
}

/// `Σ wⱼ·D(hⱼ, c)` for the chosen distance, with weights as given.
pub fn centroid_objective(
    points: &[HyperPoint],
    weights: &[f64],
    c: &HyperPoint,
    kind: DistanceKind,
) -> f64 {
    points
        .iter()
        .zip(weights)
        .map(|(h, w)| {
            w * match kind {
                DistanceKind::SqLorentzian => sq_lorentz_distance(h, c),
                DistanceKind::Intrinsic => manifold::distance(h, c).powi(2),
            }
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrechetResult {
    pub point: HyperPoint,
    /// Objective at `point` with the weights normalized to sum to one.
    pub objective: f64,
    pub steps: usize,
}

/// Iterative minimizer of [`centroid_objective`], started from the first
/// point.
///
/// Each step turns the ambient gradient into a tangent vector (flip the time
/// component to account for the Lorentzian metric, then project onto the
/// tangent space of the iterate), moves against it and projects back onto the
/// manifold. The step size halves whenever a step would increase the
/// objective. Weights are normalized to sum to one.
pub fn frechet_descent_centroid(
    points: &[HyperPoint],
    weights: &[f64],
    kind: DistanceKind,
    steps: usize,
    lr: f64,
) -> Result<FrechetResult> {
    check_weighted(points, weights)?;
    if steps == 0 || !(lr.is_finite() && lr > 0.0) {
        return Err(Error::Config(format!(
            "descent needs steps ≥ 1 and lr > 0, got {steps} and {lr}"
        )));
    }
    let total: f64 = weights.iter().sum();
    let w: Vec<f64> = weights.iter().map(|x| x / total).collect();
    let beta = points[0].curvature();
    let b = beta.beta();

    let mut c = points[0].clone();
    let mut f = centroid_objective(points, &w, &c, kind);
    let mut lr = lr;
    let mut taken = 0;
    for _ in 0..steps {
        // r = −Σ wⱼ aⱼ hⱼ is the metric-adjusted gradient before projection
        let mut r = vec![0.0; c.dim() + 1];
        for (h, wj) in points.iter().zip(&w) {
            let a = match kind {
                DistanceKind::SqLorentzian => 2.0,
                DistanceKind::Intrinsic => {
                    let z = -lorentz_inner(h.coords(), c.coords()) / b;
                    if z - 1.0 < 1e-12 {
                        2.0
                    } else {
                        2.0 * z.acosh() / (z * z - 1.0).sqrt()
                    }
                }
            };
            for (rk, hk) in r.iter_mut().zip(h.coords()) {
                *rk -= wj * a * hk;
            }
        }
        let along = lorentz_inner(c.coords(), &r) / b;
        let grad: Vec<f64> = r
            .iter()
            .zip(c.coords())
            .map(|(rk, ck)| rk + along * ck)
            .collect();

        taken += 1;
        let mut accepted = false;
        while lr > 1e-300 {
            let raw: Vec<f64> = c
                .coords()
                .iter()
                .zip(&grad)
                .map(|(ck, gk)| ck - lr * gk)
                .collect();
            let cand = manifold::project_to_manifold(&raw, beta)?;
            let fc = centroid_objective(points, &w, &cand, kind);
            if fc <= f {
                accepted = cand != c;
                c = cand;
                f = fc;
                break;
            }
            lr *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(FrechetResult {
        point: c,
        objective: f,
        steps: taken,
    })
}

fn check_features(features: &[HyperPoint], adj: &Adjacency) -> Result<()> {
    if features.len() != adj.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: adj.num_nodes(),
            got: features.len(),
        });
    }
    Ok(())
}

/// Softmax over `N(i) ∪ {i}` of `−d_L²(M_att⊗hᵢ, M_att⊗hⱼ)`.
pub fn attention_weights(
    features: &[HyperPoint],
    m_att: &WeightMatrix,
    adj: &Adjacency,
) -> Result<AttentionWeights> {
    check_features(features, adj)?;
    if m_att.rows != m_att.cols {
        return Err(Error::DimensionMismatch {
            expected: m_att.cols,
            got: m_att.rows,
        });
    }
    let att: Vec<Vec<f64>> = features
        .iter()
        .map(|h| lorentz_matvec(m_att, h).map(HyperPoint::into_coords))
        .collect::<Result<_>>()?;
    let rows = (0..features.len())
        .map(|i| {
            let members = closed_neighborhood(adj, i);
            let w = kernel::attention_row(&att, i, &members);
            members.into_iter().zip(w).collect()
        })
        .collect();
    Ok(AttentionWeights { rows })
}

/// Equal weights `1/|N(i) ∪ {i}|`.
pub fn uniform_weights(adj: &Adjacency) -> AttentionWeights {
    let rows = (0..adj.num_nodes())
        .map(|i| {
            let members = closed_neighborhood(adj, i);
            let w = 1.0 / members.len() as f64;
            members.into_iter().map(|j| (j, w)).collect()
        })
        .collect();
    AttentionWeights { rows }
}

pub fn lorentz_pointwise(sigma: Activation, x: &HyperPoint) -> HyperPoint {
    HyperPoint::from_kernel(
        kernel::pointwise(sigma, x.coords(), x.beta()),
        x.curvature(),
    )
}

/// One layer: curvature change, transform, attention (uniform when
/// `m_att` is `None`), centroid aggregation over closed neighborhoods and
/// the non-linearity.
pub fn lgcn_layer_forward(
    features: &[HyperPoint],
    m: &WeightMatrix,
    m_att: Option<&WeightMatrix>,
    sigma: Activation,
    beta_out: Curvature,
    adj: &Adjacency,
) -> Result<Vec<HyperPoint>> {
    check_features(features, adj)?;
    let moved: Vec<HyperPoint> = features
        .iter()
        .map(|h| {
            if h.curvature() == beta_out {
                h.clone()
            } else {
                change_curvature(h, beta_out)
            }
        })
        .collect();
    let transformed: Vec<HyperPoint> = moved
        .iter()
        .map(|h| lorentz_matvec(m, h))
        .collect::<Result<_>>()?;
    let weights = match m_att {
        Some(a) => attention_weights(&transformed, a, adj)?,
        None => uniform_weights(adj),
    };
    (0..transformed.len())
        .map(|i| {
            let row = weights.row(i);
            let pts: Vec<HyperPoint> = row.iter().map(|&(j, _)| transformed[j].clone()).collect();
            let w: Vec<f64> = row.iter().map(|&(_, w)| w).collect();
            lorentz_centroid(&pts, &w).map(|c| lorentz_pointwise(sigma, &c))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::manifold::{distance, exp_origin, log_origin, TangentVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn beta(b: f64) -> Curvature {
        Curvature::new(b).unwrap()
    }

    fn random_point(rng: &mut impl Rng, dim: usize, b: Curvature, radius: f64) -> HyperPoint {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = rng.random_range(0.0..radius);
        let v: Vec<f64> = v.iter().map(|x| x * r / n).collect();
        exp_origin(&TangentVector::from_spatial(&v), b)
    }

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> WeightMatrix {
        let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        WeightMatrix::new(rows, cols, data, MatrixRole::Transform).unwrap()
    }

    fn close(a: &HyperPoint, b: &HyperPoint, tol: f64) -> bool {
        a.coords()
            .iter()
            .zip(b.coords())
            .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs()))
    }

    #[test]
    fn lift_examples() {
        let b = beta(2.0);
        let o = lift_euclidean(&[0.0, 0.0], b).unwrap();
        assert_eq!(o.coords(), &[2f64.sqrt(), 0.0, 0.0]);
        let x = lift_euclidean(&[1.0], beta(1.0)).unwrap();
        assert!((x.coords()[0] - 1f64.cosh()).abs() < 1e-12);
        assert!((x.coords()[1] - 1f64.sinh()).abs() < 1e-12);
        assert!(matches!(
            lift_euclidean(&[f64::NAN], b),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn change_curvature_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = beta(0.8);
        for _ in 0..50 {
            let x = random_point(&mut rng, 3, b, 3.0);
            assert!(close(&change_curvature(&x, b), &x, 1e-10));
            let y = change_curvature(&x, beta(1.7));
            assert!(y.residual().abs() <= 1e-9 * y.coords()[0].powi(2).max(1.0));
            // the tangent image at the origin is shared by both hyperboloids
            let (u, v) = (log_origin(&x), log_origin(&y));
            for (a, c) in u.coords().iter().zip(v.coords()) {
                assert!((a - c).abs() <= 1e-9 * (1.0 + a.abs()));
            }
            let o = HyperPoint::origin(3, b);
            assert!((distance(&o, &x) - distance(&HyperPoint::origin(3, beta(1.7)), &y)).abs() < 1e-9);
        }
        let o = change_curvature(&HyperPoint::origin(2, b), beta(3.0));
        assert_eq!(o.coords(), &[3f64.sqrt(), 0.0, 0.0]);
    }

    #[test]
    fn matvec_identity_origin_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = beta(1.3);
        let x = random_point(&mut rng, 4, b, 2.0);
        let eye = WeightMatrix::identity(4, MatrixRole::Transform);
        assert!(close(&lorentz_matvec(&eye, &x).unwrap(), &x, 1e-10));
        let m = random_matrix(&mut rng, 3, 4);
        let o = lorentz_matvec(&m, &HyperPoint::origin(4, b)).unwrap();
        assert_eq!(o, HyperPoint::origin(3, b));
        let z = WeightMatrix::new(2, 4, vec![0.0; 8], MatrixRole::Transform).unwrap();
        assert_eq!(lorentz_matvec(&z, &x).unwrap(), HyperPoint::origin(2, b));
        assert!(matches!(
            lorentz_matvec(&random_matrix(&mut rng, 3, 5), &x),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn matvec_associativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.random_range(2..8);
            let k = rng.random_range(2..8);
            let m = rng.random_range(2..8);
            let b = beta(rng.random_range(0.5..2.0));
            let x = random_point(&mut rng, n, b, 2.0);
            let inner = random_matrix(&mut rng, k, n);
            let outer = random_matrix(&mut rng, m, k);
            let lhs = lorentz_matvec(&outer.compose(&inner).unwrap(), &x).unwrap();
            let rhs = lorentz_matvec(&outer, &lorentz_matvec(&inner, &x).unwrap()).unwrap();
            assert!(close(&lhs, &rhs, 1e-8), "{lhs:?} vs {rhs:?}");
        }
    }

    #[test]
    fn centroid_single_and_symmetric_pair() {
        let b = beta(1.0);
        let x = HyperPoint::new(vec![0.7f64.cosh(), 0.7f64.sinh()], b).unwrap();
        assert!(close(&lorentz_centroid(std::slice::from_ref(&x), &[1.0]).unwrap(), &x, 1e-14));
        let t = 1.3f64;
        let p = HyperPoint::new(vec![t.cosh(), t.sinh()], b).unwrap();
        let q = HyperPoint::new(vec![t.cosh(), -t.sinh()], b).unwrap();
        let c = lorentz_centroid(&[p, q], &[0.5, 0.5]).unwrap();
        assert!((c.coords()[0] - 1.0).abs() < 1e-14);
        assert!(c.coords()[1].abs() < 1e-14);
    }

    #[test]
    fn centroid_of_far_coincident_points() {
        // ⟨s,s⟩_L computed directly loses every digit at this radius
        let b = beta(0.8);
        let x = lift_euclidean(&[30.0, -12.0], b).unwrap();
        let c = lorentz_centroid(&[x.clone(), x.clone(), x.clone()], &[0.2, 0.3, 0.5]).unwrap();
        assert!(close(&c, &x, 1e-12));
        let y = lift_euclidean(&[30.0, -12.000001], b).unwrap();
        let c = lorentz_centroid(&[x.clone(), y.clone()], &[1.0, 1.0]).unwrap();
        let (dx, dy) = (distance(&c, &x), distance(&c, &y));
        assert!((dx - dy).abs() <= 1e-6 * distance(&x, &y), "{dx} {dy}");
    }

    #[test]
    fn centroid_rejects_bad_input() {
        let b = beta(1.0);
        let o = HyperPoint::origin(2, b);
        assert!(matches!(lorentz_centroid(&[], &[]), Err(Error::Degenerate(_))));
        assert!(matches!(
            lorentz_centroid(std::slice::from_ref(&o), &[0.0]),
            Err(Error::Degenerate(_))
        ));
        assert!(lorentz_centroid(&[o.clone(), HyperPoint::origin(2, beta(2.0))], &[1.0, 1.0]).is_err());
        assert!(lorentz_centroid(&[o], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn centroid_weight_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let b = beta(rng.random_range(0.5..2.0));
            let pts: Vec<_> = (0..5).map(|_| random_point(&mut rng, 3, b, 2.5)).collect();
            let w: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..2.0)).collect();
            let k = rng.random_range(0.01..100.0);
            let scaled: Vec<f64> = w.iter().map(|x| x * k).collect();
            let a = lorentz_centroid(&pts, &w).unwrap();
            let c = lorentz_centroid(&pts, &scaled).unwrap();
            assert!(close(&a, &c, 1e-10));
        }
    }

    #[test]
    fn descent_single_point_and_intrinsic_symmetry() {
        let b = beta(1.0);
        let x = HyperPoint::new(vec![0.4f64.cosh(), 0.4f64.sinh()], b).unwrap();
        let r = frechet_descent_centroid(std::slice::from_ref(&x), &[2.0], DistanceKind::Intrinsic, 10, 0.1)
            .unwrap();
        assert!(close(&r.point, &x, 1e-12));
        assert!(r.objective < 1e-20);

        let t = 0.9f64;
        let p = HyperPoint::new(vec![t.cosh(), t.sinh(), 0.0], b).unwrap();
        let q = HyperPoint::new(vec![t.cosh(), -t.sinh(), 0.0], b).unwrap();
        let r = frechet_descent_centroid(&[p, q], &[1.0, 1.0], DistanceKind::Intrinsic, 5000, 1e-2)
            .unwrap();
        assert!(distance(&r.point, &HyperPoint::origin(2, b)) < 1e-6, "{:?}", r.point);
    }

    #[test]
    fn descent_agrees_with_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let b = beta(rng.random_range(0.5..2.0));
            let dim = rng.random_range(2..6);
            let pts: Vec<_> = (0..5).map(|_| random_point(&mut rng, dim, b, 2.0)).collect();
            let w: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..1.0)).collect();
            let closed = lorentz_centroid(&pts, &w).unwrap();
            let r = frechet_descent_centroid(&pts, &w, DistanceKind::SqLorentzian, 5000, 1e-2)
                .unwrap();
            assert!(distance(&closed, &r.point) < 1e-5);
        }
    }

    #[test]
    fn attention_rows_are_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = beta(1.1);
        let n = 15;
        let edges: Vec<_> = (0..30)
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
            .collect();
        let g = Graph::from_edges(n, edges);
        let feats: Vec<_> = (0..n).map(|_| random_point(&mut rng, 3, b, 2.0)).collect();
        let m_att = WeightMatrix::new(
            3,
            3,
            (0..9).map(|_| rng.random_range(-1.0..1.0)).collect(),
            MatrixRole::Attention,
        )
        .unwrap();
        let w = attention_weights(&feats, &m_att, g.adjacency()).unwrap();
        for i in 0..n {
            let row = w.row(i);
            assert_eq!(row.len(), g.neighbors(i).len() + 1);
            assert!(row.iter().all(|&(_, x)| x > 0.0));
            assert!((row.iter().map(|&(_, x)| x).sum::<f64>() - 1.0).abs() < 1e-12);
            // the self score is the largest possible, −d_L²(z,z) = 0
            let own = w.weight(i, i).unwrap();
            assert!(row.iter().all(|&(_, x)| x <= own + 1e-15));
        }
    }

    #[test]
    fn attention_uniform_when_points_coincide() {
        let b = beta(1.0);
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]);
        let x = lift_euclidean(&[0.3, -0.2], b).unwrap();
        let feats = vec![x; 4];
        let w = attention_weights(
            &feats,
            &WeightMatrix::identity(2, MatrixRole::Attention),
            g.adjacency(),
        )
        .unwrap();
        assert!(w.row(0).iter().all(|&(_, x)| (x - 0.25).abs() < 1e-15));
        assert!(w.row(2).iter().all(|&(_, x)| (x - 0.5).abs() < 1e-15));
    }

    #[test]
    fn attention_invariant_under_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = beta(0.9);
        let n = 10;
        let edges: Vec<(usize, usize)> = (0..18)
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
            .collect();
        let feats: Vec<_> = (0..n).map(|_| random_point(&mut rng, 2, b, 2.0)).collect();
        let m_att = WeightMatrix::new(2, 2, vec![0.8, -0.3, 0.1, 1.2], MatrixRole::Attention)
            .unwrap();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
        let g = Graph::from_edges(n, edges.iter().copied());
        let g2 = Graph::from_edges(n, edges.iter().map(|&(u, v)| (perm[u], perm[v])));
        let mut feats2 = feats.clone();
        for i in 0..n {
            feats2[perm[i]] = feats[i].clone();
        }
        let w = attention_weights(&feats, &m_att, g.adjacency()).unwrap();
        let w2 = attention_weights(&feats2, &m_att, g2.adjacency()).unwrap();
        for i in 0..n {
            for &(j, x) in w.row(i) {
                assert!((w2.weight(perm[i], perm[j]).unwrap() - x).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pointwise_cases() {
        let b = beta(1.4);
        let o = HyperPoint::origin(3, b);
        assert_eq!(lorentz_pointwise(Activation::Relu, &o), o);
        let x = lift_euclidean(&[0.4, 1.1, 0.2], b).unwrap();
        assert!(close(&lorentz_pointwise(Activation::Relu, &x), &x, 1e-12));
        let y = lift_euclidean(&[-0.4, 1.1, -0.2], b).unwrap();
        let z = lorentz_pointwise(Activation::Relu, &y);
        let v = log_origin(&z);
        assert_eq!(v.spatial()[0], 0.0);
        assert!((v.spatial()[1] - 1.1).abs() < 1e-12);
    }

    #[test]
    fn layer_on_edgeless_graph_is_identity() {
        let b = beta(1.0);
        let feats: Vec<_> = [[0.3, 0.5], [1.0, 0.1], [0.0, 2.0]]
            .iter()
            .map(|h| lift_euclidean(h, b).unwrap())
            .collect();
        let g = Graph::from_edges(3, []);
        let eye = WeightMatrix::identity(2, MatrixRole::Transform);
        let out = lgcn_layer_forward(&feats, &eye, None, Activation::Relu, b, g.adjacency())
            .unwrap();
        for (a, c) in out.iter().zip(&feats) {
            assert!(close(a, c, 1e-12));
        }
    }

    #[test]
    fn layer_single_node() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = random_point(&mut rng, 3, beta(0.7), 2.0);
        let m = random_matrix(&mut rng, 4, 3);
        let att = WeightMatrix::identity(4, MatrixRole::Attention);
        let g = Graph::from_edges(1, []);
        let sigma = Activation::LeakyRelu(0.1);
        let out = lgcn_layer_forward(std::slice::from_ref(&h), &m, Some(&att), sigma, beta(1.5), g.adjacency())
            .unwrap();
        let manual = lorentz_pointwise(
            sigma,
            &lorentz_matvec(&m, &change_curvature(&h, beta(1.5))).unwrap(),
        );
        assert!(close(&out[0], &manual, 1e-12));
    }

    #[test]
    fn layer_matches_manual_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 10;
        let (b_in, b_out) = (beta(0.6), beta(1.8));
        let edges: Vec<_> = (0..16)
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
            .collect();
        let g = Graph::from_edges(n, edges);
        let feats: Vec<_> = (0..n).map(|_| random_point(&mut rng, 5, b_in, 2.0)).collect();
        let m = random_matrix(&mut rng, 3, 5);
        let att = WeightMatrix::new(
            3,
            3,
            (0..9).map(|_| rng.random_range(-1.0..1.0)).collect(),
            MatrixRole::Attention,
        )
        .unwrap();
        let sigma = Activation::Relu;
        let out = lgcn_layer_forward(&feats, &m, Some(&att), sigma, b_out, g.adjacency()).unwrap();

        let moved: Vec<_> = feats.iter().map(|h| change_curvature(h, b_out)).collect();
        let mapped: Vec<_> = moved.iter().map(|h| lorentz_matvec(&m, h).unwrap()).collect();
        let w = attention_weights(&mapped, &att, g.adjacency()).unwrap();
        for (i, got) in out.iter().enumerate() {
            let (idx, ws): (Vec<usize>, Vec<f64>) = w.row(i).iter().copied().unzip();
            let pts: Vec<_> = idx.iter().map(|&j| mapped[j].clone()).collect();
            let c = lorentz_centroid(&pts, &ws).unwrap();
            assert_eq!(*got, lorentz_pointwise(sigma, &c));
            assert!(got.residual().abs() <= 1e-9 * got.coords()[0].powi(2).max(1.0));
        }
    }
}
