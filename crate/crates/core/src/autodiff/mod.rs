//! Reverse-mode differentiation over scalar graphs plus the Euclidean
//! parameter machinery trained with it.

mod optim;
mod tape;

pub use optim::{
    adam_step, dropconnect_mask, relative_error, AdamConfig, AdamState, CurvatureParam,
    Parameter, BETA_FLOOR,
};
pub use tape::{Op, Tape, Var};
