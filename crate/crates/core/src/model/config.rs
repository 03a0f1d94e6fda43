use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::graph::Task;

/// Space the network embeds into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// Lorentzian layers on the hyperboloid.
    #[default]
    Hyperbolic,
    /// Plain graph convolution: linear map, mean over the closed
    /// neighborhood, non-linearity, with squared Euclidean distances in the
    /// decoder. Attention and curvature settings are ignored.
    Euclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LgcnConfig {
    /// Layer widths `[k, d₁, …, d_L]`; `k` is the input feature width.
    pub dims: Vec<usize>,
    pub activation: Activation,
    pub attention: bool,
    /// Share one curvature across all layers.
    pub tie_curvature: bool,
    pub init_beta: f64,
    pub train_curvature: bool,
    pub dropconnect: f64,
    pub lr: f64,
    /// L2 penalty coefficient on weight matrices.
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub task: Task,
    /// Fermi-Dirac decoder radius.
    pub r: f64,
    /// Fermi-Dirac decoder temperature.
    pub t: f64,
    pub geometry: Geometry,
}

impl Default for LgcnConfig {
    fn default() -> Self {
        Self {
            dims: vec![0, 16, 16],
            activation: Activation::Relu,
            attention: true,
            tie_curvature: false,
            init_beta: 1.0,
            train_curvature: true,
            dropconnect: 0.0,
            lr: 0.01,
            weight_decay: 0.0,
            max_epochs: 500,
            patience: 100,
            seed: 0,
            task: Task::LinkPrediction,
            r: 2.0,
            t: 1.0,
            geometry: Geometry::Hyperbolic,
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

impl LgcnConfig {
    /// Validates every field; a zero input width is allowed and means "take
    /// it from the data".
    pub fn validate(&self) -> Result<()> {
        check(self.dims.len() >= 2, || {
            format!("dims needs an input width and at least one layer, got {:?}", self.dims)
        })?;
        check(self.dims[1..].iter().all(|&d| d >= 1), || {
            format!("layer widths must be positive, got {:?}", self.dims)
        })?;
        check((0.0..1.0).contains(&self.dropconnect), || {
            format!("dropconnect rate {} outside [0, 1)", self.dropconnect)
        })?;
        check(self.lr.is_finite() && self.lr > 0.0, || {
            format!("learning rate {} must be positive", self.lr)
        })?;
        check(self.weight_decay.is_finite() && self.weight_decay >= 0.0, || {
            format!("weight decay {} must be non-negative", self.weight_decay)
        })?;
        check(self.max_epochs >= 1, || "max_epochs must be at least 1".into())?;
        check(self.patience >= 1, || "patience must be at least 1".into())?;
        check(self.r.is_finite() && self.r > 0.0, || format!("r = {} must be positive", self.r))?;
        check(self.t.is_finite() && self.t > 0.0, || format!("t = {} must be positive", self.t))?;
        check(self.init_beta.is_finite() && self.init_beta > 1e-4, || {
            format!("init_beta = {} must exceed 1e-4", self.init_beta)
        })?;
        Ok(())
    }

    pub fn num_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().expect("validated")
    }
}
