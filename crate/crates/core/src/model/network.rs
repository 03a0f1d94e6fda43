//! Parameter layout and the forward pass, generic over the scalar type so the
//! same code evaluates plain `f64` embeddings and records gradients.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{Geometry, LgcnConfig};
use super::heads::{binary_cross_entropy, fermi_dirac, softmax_cross_entropy};
use crate::activation::Activation;
use crate::autodiff::{CurvatureParam, Parameter, BETA_FLOOR};
use crate::error::{Error, Result};
use crate::graph::Adjacency;
use crate::manifold::{kernel as mk, Curvature, HyperPoint};
use crate::ops::{closed_neighborhood, kernel as ok};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LayerSlots {
    rows: usize,
    cols: usize,
    transform: Range<usize>,
    attention: Option<Range<usize>>,
    theta: Option<usize>,
}

/// Where each tensor lives in the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Layout {
    layers: Vec<LayerSlots>,
    head: Option<(usize, Range<usize>, Range<usize>)>,
    thetas: Range<usize>,
    len: usize,
}

impl Layout {
    fn new(cfg: &LgcnConfig, input_dim: usize, classes: Option<usize>) -> Self {
        let hyperbolic = cfg.geometry == Geometry::Hyperbolic;
        let n_layers = cfg.num_layers();
        let mut at = 0;
        let mut take = |k: usize| {
            let r = at..at + k;
            at += k;
            r
        };
        let mut layers = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let cols = if l == 0 { input_dim } else { cfg.dims[l] };
            let rows = cfg.dims[l + 1];
            let transform = take(rows * cols);
            let attention = (hyperbolic && cfg.attention).then(|| take(rows * rows));
            layers.push(LayerSlots {
                rows,
                cols,
                transform,
                attention,
                theta: None,
            });
        }
        let out = cfg.output_dim();
        let head = classes.map(|c| (c, take(c * out), take(c)));
        let n_theta = match (hyperbolic, cfg.tie_curvature) {
            (false, _) => 0,
            (true, true) => 1,
            (true, false) => n_layers,
        };
        let thetas = take(n_theta);
        for (l, slots) in layers.iter_mut().enumerate() {
            if hyperbolic {
                slots.theta = Some(thetas.start + if cfg.tie_curvature { 0 } else { l });
            }
        }
        Self {
            layers,
            head,
            thetas,
            len: at,
        }
    }
}

/// Sub-matrix entries that DropConnect may zero.
fn maskable(layout: &Layout) -> impl Iterator<Item = Range<usize>> + '_ {
    layout
        .layers
        .iter()
        .flat_map(|s| std::iter::once(s.transform.clone()).chain(s.attention.clone()))
}

/// Node embeddings produced by a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub enum Embeddings {
    Hyperbolic(Vec<HyperPoint>),
    Euclidean(Vec<Vec<f64>>),
}

impl Embeddings {
    pub fn len(&self) -> usize {
        match self {
            Self::Hyperbolic(p) => p.len(),
            Self::Euclidean(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Geodesic distance on the hyperboloid, Euclidean distance otherwise.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match self {
            Self::Hyperbolic(p) => crate::manifold::distance(&p[i], &p[j]),
            Self::Euclidean(p) => p[i]
                .iter()
                .zip(&p[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Squared distance fed to the decoder.
    pub fn decoder_distance(&self, i: usize, j: usize) -> f64 {
        match self {
            Self::Hyperbolic(p) => crate::manifold::sq_lorentz_distance(&p[i], &p[j]),
            Self::Euclidean(_) => self.distance(i, j).powi(2),
        }
    }

    /// Coordinates used by the classification head: tangent coordinates at
    /// the origin for hyperbolic embeddings.
    pub fn head_inputs(&self) -> Vec<Vec<f64>> {
        match self {
            Self::Hyperbolic(p) => p
                .iter()
                .map(|x| crate::manifold::log_origin(x).spatial().to_vec())
                .collect(),
            Self::Euclidean(p) => p.clone(),
        }
    }

    /// Raw coordinate rows (ambient coordinates for hyperbolic points).
    pub fn rows(&self) -> Vec<Vec<f64>> {
        match self {
            Self::Hyperbolic(p) => p.iter().map(|x| x.coords().to_vec()).collect(),
            Self::Euclidean(p) => p.clone(),
        }
    }
}

/// An LGCN (or its Euclidean ablation) with all parameters in one flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    geometry: Geometry,
    activation: Activation,
    layout: Layout,
    values: Vec<f64>,
}

/// Link-prediction batch: positive and negative node pairs.
#[derive(Debug, Clone, Copy)]
pub struct PairBatch<'a> {
    pub pos: &'a [(usize, usize)],
    pub neg: &'a [(usize, usize)],
}

impl Network {
    /// Glorot-uniform weight matrices, zero head bias and `θ` set so that
    /// every layer starts at `init_beta`.
    pub fn init(
        cfg: &LgcnConfig,
        input_dim: usize,
        classes: Option<usize>,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        cfg.validate()?;
        if input_dim == 0 {
            return Err(Error::Config("input feature width is zero".into()));
        }
        if cfg.dims[0] != 0 && cfg.dims[0] != input_dim {
            return Err(Error::Config(format!(
                "dims[0] = {} but the features have width {input_dim}",
                cfg.dims[0]
            )));
        }
        if classes == Some(0) {
            return Err(Error::Config("classification head needs classes".into()));
        }
        let layout = Layout::new(cfg, input_dim, classes);
        let mut values = vec![0.0; layout.len];
        let mut glorot = |range: Range<usize>, fan_in: usize, fan_out: usize| {
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for v in &mut values[range] {
                *v = rng.random_range(-a..a);
            }
        };
        for s in &layout.layers {
            glorot(s.transform.clone(), s.cols, s.rows);
            if let Some(att) = &s.attention {
                glorot(att.clone(), s.rows, s.rows);
            }
        }
        if let Some((c, w, _)) = &layout.head {
            glorot(w.clone(), cfg.output_dim(), *c);
        }
        let theta = CurvatureParam::from_beta(cfg.init_beta)?.theta;
        values[layout.thetas.clone()].fill(theta);
        Ok(Self {
            geometry: cfg.geometry,
            activation: cfg.activation,
            layout,
            values,
        })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn set_values(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.values.len(), "parameter count mismatch");
        self.values.copy_from_slice(values);
    }

    pub fn num_params(&self) -> usize {
        self.layout.len
    }

    pub fn input_dim(&self) -> usize {
        self.layout.layers[0].cols
    }

    /// Indices of the curvature pre-parameters in [`Network::values`].
    pub fn theta_indices(&self) -> Range<usize> {
        self.layout.thetas.clone()
    }

    /// Indices of weight-matrix entries, the ones subject to weight decay and
    /// DropConnect.
    pub fn matrix_indices(&self) -> Vec<Range<usize>> {
        maskable(&self.layout).collect()
    }

    /// Curvature of each layer.
    pub fn curvatures(&self) -> Vec<f64> {
        self.layout
            .layers
            .iter()
            .filter_map(|s| s.theta)
            .map(|i| CurvatureParam { theta: self.values[i] }.beta())
            .collect()
    }

    /// DropConnect mask over the flat vector: weight-matrix entries are kept
    /// with probability `1 − rate` and rescaled, everything else passes.
    pub fn dropconnect_mask(&self, rate: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
        let mut mask = vec![1.0; self.layout.len];
        for r in maskable(&self.layout) {
            let m = crate::autodiff::dropconnect_mask(r.len(), rate, rng)?;
            mask[r].copy_from_slice(&m);
        }
        Ok(mask)
    }

    /// Named tensors for checkpoints.
    pub fn parameters(&self) -> Vec<Parameter> {
        let mut out = Vec::new();
        for (l, s) in self.layout.layers.iter().enumerate() {
            out.push(Parameter::new(
                format!("layer{l}.transform"),
                vec![s.rows, s.cols],
                self.values[s.transform.clone()].to_vec(),
            ));
            if let Some(a) = &s.attention {
                out.push(Parameter::new(
                    format!("layer{l}.attention"),
                    vec![s.rows, s.rows],
                    self.values[a.clone()].to_vec(),
                ));
            }
        }
        if let Some((c, w, b)) = &self.layout.head {
            let out_dim = w.len() / c;
            out.push(Parameter::new("head.weight", vec![*c, out_dim], self.values[w.clone()].to_vec()));
            out.push(Parameter::new("head.bias", vec![*c], self.values[b.clone()].to_vec()));
        }
        if !self.layout.thetas.is_empty() {
            out.push(Parameter::new(
                "curvature.theta",
                vec![self.layout.thetas.len()],
                self.values[self.layout.thetas.clone()].to_vec(),
            ));
        }
        out
    }

    /// Loads tensors written by [`Network::parameters`] into a network of the
    /// same architecture.
    pub fn load_parameters(&mut self, params: &[Parameter]) -> Result<()> {
        let expected = self.parameters();
        if params.len() != expected.len() {
            return Err(Error::Data(format!(
                "checkpoint has {} tensors, architecture needs {}",
                params.len(),
                expected.len()
            )));
        }
        let mut flat = Vec::with_capacity(self.layout.len);
        for (p, e) in params.iter().zip(&expected) {
            if p.name != e.name || p.shape != e.shape || p.values.len() != e.values.len() {
                return Err(Error::Data(format!(
                    "checkpoint tensor {} {:?} does not match {} {:?}",
                    p.name, p.shape, e.name, e.shape
                )));
            }
            flat.extend_from_slice(&p.values);
        }
        self.values = flat;
        Ok(())
    }

    /// Final-layer coordinates for every node. `params` follows the layout of
    /// [`Network::values`]; `mask`, when given, multiplies it entrywise.
    pub fn forward<S: Real>(
        &self,
        params: &[S],
        mask: Option<&[f64]>,
        features: &[Vec<f64>],
        adj: &Adjacency,
    ) -> Vec<Vec<S>> {
        assert_eq!(params.len(), self.layout.len, "parameter count mismatch");
        assert_eq!(features.len(), adj.num_nodes(), "one feature row per node");
        let p: Vec<S> = match mask {
            Some(m) => params
                .iter()
                .zip(m)
                .map(|(&v, &k)| if k == 1.0 { v } else { v * k })
                .collect(),
            None => params.to_vec(),
        };
        let ctx = p[0];
        let lifted = |row: &[f64]| -> Vec<S> { row.iter().map(|&x| ctx.constant(x)).collect() };
        let neighborhoods: Vec<Vec<usize>> =
            (0..adj.num_nodes()).map(|i| closed_neighborhood(adj, i)).collect();
        match self.geometry {
            Geometry::Euclidean => {
                let mut x: Vec<Vec<S>> = features.iter().map(|r| lifted(r)).collect();
                for s in &self.layout.layers {
                    let m = &p[s.transform.clone()];
                    let t: Vec<Vec<S>> = x.iter().map(|h| ok::mat_mul(m, s.rows, s.cols, h)).collect();
                    x = neighborhoods
                        .iter()
                        .map(|members| {
                            let inv = 1.0 / members.len() as f64;
                            (0..s.rows)
                                .map(|k| {
                                    let col: Vec<S> = members.iter().map(|&j| t[j][k]).collect();
                                    self.activation.apply(S::sum(&col) * inv)
                                })
                                .collect()
                        })
                        .collect();
                }
                x
            }
            Geometry::Hyperbolic => {
                let beta_of = |s: &LayerSlots| p[s.theta.expect("hyperbolic layer")].softplus() + BETA_FLOOR;
                let b0 = beta_of(&self.layout.layers[0]);
                let mut x: Vec<Vec<S>> = features
                    .iter()
                    .map(|r| mk::exp_origin(&lifted(r), b0))
                    .collect();
                let mut prev_theta = self.layout.layers[0].theta;
                let mut prev_beta = b0;
                for s in &self.layout.layers {
                    let beta = beta_of(s);
                    if s.theta != prev_theta {
                        x = x
                            .iter()
                            .map(|h| ok::change_curvature(h, prev_beta, beta))
                            .collect();
                    }
                    let m = &p[s.transform.clone()];
                    let t: Vec<Vec<S>> = x
                        .iter()
                        .map(|h| ok::matvec(m, s.rows, s.cols, h, beta))
                        .collect();
                    let att: Option<Vec<Vec<S>>> = s.attention.as_ref().map(|a| {
                        let ma = &p[a.clone()];
                        t.iter()
                            .map(|h| ok::matvec(ma, s.rows, s.rows, h, beta))
                            .collect()
                    });
                    x = neighborhoods
                        .iter()
                        .enumerate()
                        .map(|(i, members)| {
                            let w: Vec<S> = match &att {
                                Some(a) => ok::attention_row(a, i, members),
                                None => {
                                    let u = 1.0 / members.len() as f64;
                                    vec![ctx.constant(u); members.len()]
                                }
                            };
                            let pts: Vec<&[S]> = members.iter().map(|&j| t[j].as_slice()).collect();
                            let c = ok::centroid(&pts, &w, beta);
                            ok::pointwise(self.activation, &c, beta)
                        })
                        .collect();
                    prev_theta = s.theta;
                    prev_beta = beta;
                }
                x
            }
        }
    }

    /// Squared decoder distance between two output rows.
    fn sq_distance<S: Real>(&self, a: &[S], b: &[S]) -> S {
        match self.geometry {
            Geometry::Hyperbolic => mk::sq_lorentz_distance(a, b),
            Geometry::Euclidean => {
                let d: Vec<S> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
                S::dot(&d, &d)
            }
        }
    }

    /// Mean binary cross-entropy of Fermi-Dirac scores, positives labelled 1.
    pub fn link_loss<S: Real>(&self, emb: &[Vec<S>], batch: PairBatch<'_>, r: f64, t: f64) -> S {
        assert!(
            !batch.pos.is_empty() && !batch.neg.is_empty(),
            "link loss needs positive and negative pairs"
        );
        let terms: Vec<S> = batch
            .pos
            .iter()
            .map(|&(u, v)| (u, v, true))
            .chain(batch.neg.iter().map(|&(u, v)| (u, v, false)))
            .map(|(u, v, label)| {
                let p = fermi_dirac(self.sq_distance(&emb[u], &emb[v]), r, t);
                binary_cross_entropy(p, label)
            })
            .collect();
        S::sum(&terms) / terms.len() as f64
    }

    /// Class logits `W·z + b` where `z` is the tangent image at the origin
    /// (hyperbolic) or the embedding itself (Euclidean).
    pub fn logits<S: Real>(&self, params: &[S], emb_row: &[S]) -> Vec<S> {
        let (c, w, b) = self.layout.head.as_ref().expect("network has no classification head");
        let z = match self.geometry {
            Geometry::Hyperbolic => {
                let s = self.layout.layers.last().expect("at least one layer");
                let beta = params[s.theta.expect("hyperbolic layer")].softplus() + BETA_FLOOR;
                mk::log_origin(emb_row, beta)
            }
            Geometry::Euclidean => emb_row.to_vec(),
        };
        let logits = ok::mat_mul(&params[w.clone()], *c, z.len(), &z);
        logits
            .into_iter()
            .zip(&params[b.clone()])
            .map(|(l, &bias)| l + bias)
            .collect()
    }

    /// Mean softmax cross-entropy over `nodes`.
    pub fn class_loss<S: Real>(
        &self,
        params: &[S],
        emb: &[Vec<S>],
        nodes: &[usize],
        labels: &[usize],
    ) -> S {
        assert!(!nodes.is_empty(), "class loss needs training nodes");
        let terms: Vec<S> = nodes
            .iter()
            .map(|&i| softmax_cross_entropy(&self.logits(params, &emb[i]), labels[i]))
            .collect();
        S::sum(&terms) / terms.len() as f64
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.layout.head.as_ref().map(|(c, _, _)| *c)
    }

    /// Plain evaluation with the current parameters and no masking.
    pub fn embed(&self, features: &[Vec<f64>], adj: &Adjacency) -> Result<Embeddings> {
        let rows = self.forward(&self.values, None, features, adj);
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        match self.geometry {
            Geometry::Euclidean => Ok(Embeddings::Euclidean(rows)),
            Geometry::Hyperbolic => {
                let beta = Curvature::new(*self.curvatures().last().expect("hyperbolic layer"))?;
                rows.into_iter()
                    .map(|c| HyperPoint::new(c, beta))
                    .collect::<Result<_>>()
                    .map(Embeddings::Hyperbolic)
            }
        }
    }

    /// Predicted classes for every node.
    pub fn predict(&self, emb: &Embeddings) -> Vec<usize> {
        let rows = emb.rows();
        rows.iter()
            .map(|r| {
                let l = self.logits(&self.values, r);
                l.iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(k, _)| k)
                    .expect("at least one class")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, Task};
    use crate::manifold::HyperPoint;
    use crate::ops::{lgcn_layer_forward, lift_euclidean, MatrixRole, WeightMatrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(dims: Vec<usize>) -> LgcnConfig {
        LgcnConfig {
            dims,
            ..LgcnConfig::default()
        }
    }

    fn small_graph() -> (Graph, Vec<Vec<f64>>) {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 4)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let feats = (0..6).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        (g, feats)
    }

    #[test]
    fn layout_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = Network::init(&cfg(vec![5, 4, 3]), 5, None, &mut rng).unwrap();
        // 4·5 + 4·4 + 3·4 + 3·3 + two curvatures
        assert_eq!(net.num_params(), 20 + 16 + 12 + 9 + 2);
        assert_eq!(net.curvatures().len(), 2);
        assert!(net.curvatures().iter().all(|b| (b - 1.0).abs() < 1e-12));

        let mut tied = cfg(vec![5, 4, 3]);
        tied.tie_curvature = true;
        tied.attention = false;
        let net = Network::init(&tied, 5, Some(2), &mut rng).unwrap();
        assert_eq!(net.num_params(), 20 + 12 + 6 + 2 + 1);
        assert_eq!(net.curvatures().len(), 2);

        let mut eu = cfg(vec![5, 4]);
        eu.geometry = Geometry::Euclidean;
        let net = Network::init(&eu, 5, None, &mut rng).unwrap();
        assert_eq!(net.num_params(), 20);
        assert!(net.curvatures().is_empty());
    }

    #[test]
    fn input_width_checked() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            Network::init(&cfg(vec![5, 4]), 6, None, &mut rng),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn single_layer_matches_typed_ops() {
        let (g, feats) = small_graph();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut c = cfg(vec![3, 4]);
        c.init_beta = 1.7;
        c.activation = Activation::LeakyRelu(0.2);
        let net = Network::init(&c, 3, None, &mut rng).unwrap();
        let emb = match net.embed(&feats, g.adjacency()).unwrap() {
            Embeddings::Hyperbolic(p) => p,
            _ => unreachable!(),
        };
        let beta = Curvature::new(net.curvatures()[0]).unwrap();
        let s = &net.layout.layers[0];
        let m = WeightMatrix::new(4, 3, net.values[s.transform.clone()].to_vec(), MatrixRole::Transform)
            .unwrap();
        let a = WeightMatrix::new(
            4,
            4,
            net.values[s.attention.clone().unwrap()].to_vec(),
            MatrixRole::Attention,
        )
        .unwrap();
        let lifted: Vec<HyperPoint> = feats.iter().map(|h| lift_euclidean(h, beta).unwrap()).collect();
        let typed = lgcn_layer_forward(&lifted, &m, Some(&a), c.activation, beta, g.adjacency())
            .unwrap();
        for (x, y) in emb.iter().zip(&typed) {
            for (p, q) in x.coords().iter().zip(y.coords()) {
                assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()), "{p} vs {q}");
            }
        }
    }

    #[test]
    fn embeddings_stay_on_manifold() {
        let (g, feats) = small_graph();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = cfg(vec![3, 8, 8, 4]);
        let net = Network::init(&c, 3, None, &mut rng).unwrap();
        if let Embeddings::Hyperbolic(p) = net.embed(&feats, g.adjacency()).unwrap() {
            assert!(p.iter().all(|x| x.residual().abs() <= 1e-9 * x.coords()[0].powi(2).max(1.0)));
        } else {
            unreachable!()
        }
    }

    #[test]
    fn parameters_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut c = cfg(vec![3, 4]);
        c.task = Task::NodeClassification;
        let net = Network::init(&c, 3, Some(3), &mut rng).unwrap();
        let mut other = Network::init(&c, 3, Some(3), &mut rng).unwrap();
        assert_ne!(net, other);
        other.load_parameters(&net.parameters()).unwrap();
        assert_eq!(net, other);
        let mut wrong = net.parameters();
        wrong.pop();
        assert!(other.load_parameters(&wrong).is_err());
    }

    #[test]
    fn mask_touches_only_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = Network::init(&cfg(vec![3, 4]), 3, Some(2), &mut rng).unwrap();
        let mask = net.dropconnect_mask(0.5, &mut rng).unwrap();
        let mats: Vec<usize> = net.matrix_indices().into_iter().flatten().collect();
        for (i, m) in mask.iter().enumerate() {
            if mats.contains(&i) {
                assert!(*m == 0.0 || *m == 2.0);
            } else {
                assert_eq!(*m, 1.0);
            }
        }
    }
}
