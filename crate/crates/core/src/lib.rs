//! Lorentzian graph convolutions on the hyperboloid model of hyperbolic
//! space, with a Poincaré-ball oracle, a scalar reverse-mode tape for
//! training and graph metrics for evaluating embeddings.

pub mod activation;
pub mod autodiff;
pub mod error;
pub mod graph;
pub mod manifold;
pub mod model;
pub mod ops;
pub mod poincare;
pub mod real;
pub mod rng;

pub use activation::Activation;
pub use error::{Error, Result};
pub use manifold::{Curvature, HyperPoint, TangentVector};
pub use real::Real;
