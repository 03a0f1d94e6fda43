use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Pointwise non-linearity. Only positively homogeneous maps are offered,
/// since those are the ones whose hyperboloid and ball versions coincide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
#[derive(Default)]
pub enum Activation {
    #[default]
    Relu,
    /// `max(k·x, x)` with `k ∈ (0, 1)`.
    LeakyRelu(f64),
}

impl Activation {
    pub fn leaky_relu(slope: f64) -> Result<Self> {
        if slope > 0.0 && slope < 1.0 {
            Ok(Self::LeakyRelu(slope))
        } else {
            Err(Error::UnsupportedActivation(format!("leaky_relu:{slope}")))
        }
    }

    #[inline]
    pub fn apply<S: Real>(self, x: S) -> S {
        match self {
            Self::Relu => x.relu(),
            Self::LeakyRelu(k) => x.leaky_relu(k),
        }
    }
}


impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Relu => f.write_str("relu"),
            Self::LeakyRelu(k) => write!(f, "leaky_relu:{k}"),
        }
    }
}

/// Accepts `relu`, `leaky_relu` (slope 0.2) and `leaky_relu:<k>`.
impl FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Self::Relu),
            "leaky_relu" => Self::leaky_relu(0.2),
            _ => match s.strip_prefix("leaky_relu:") {
                Some(k) => k
                    .parse::<f64>()
                    .map_err(|_| Error::UnsupportedActivation(s.to_string()))
                    .and_then(Self::leaky_relu),
                None => Err(Error::UnsupportedActivation(s.to_string())),
            },
        }
    }
}

impl TryFrom<String> for Activation {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Activation> for String {
    fn from(a: Activation) -> String {
        a.to_string()
    }
}
