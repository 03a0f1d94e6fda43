use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::softplus_f64;

/// Named Euclidean tensor, stored flat in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
    #[serde(skip)]
    pub grads: Vec<f64>,
    #[serde(default = "yes")]
    pub trainable: bool,
}

fn yes() -> bool {
    true
}

impl Parameter {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, values: Vec<f64>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            values.len(),
            "parameter storage does not match its shape"
        );
        let grads = vec![0.0; values.len()];
        Self {
            name: name.into(),
            shape,
            values,
            grads,
            trainable: true,
        }
    }

    pub fn zeros(name: impl Into<String>, shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self::new(name, shape, vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn zero_grad(&mut self) {
        self.grads.clear();
        self.grads.resize(self.values.len(), 0.0);
    }
}

/// Lower bound added to the softplus so curvature stays strictly positive.
pub const BETA_FLOOR: f64 = 1e-4;

/// Unconstrained pre-parameter `θ` with `β = softplus(θ) + 1e−4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureParam {
    pub theta: f64,
}

impl CurvatureParam {
    /// Inverts the softplus so that `beta()` returns `beta`.
    pub fn from_beta(beta: f64) -> Result<Self> {
        let y = beta - BETA_FLOOR;
        if !(y.is_finite() && y > 0.0) {
            return Err(Error::InvalidCurvature(beta));
        }
        // ln(e^y − 1) = y + ln(1 − e^{−y})
        Ok(Self {
            theta: y + (-(-y).exp()).ln_1p(),
        })
    }

    pub fn beta(&self) -> f64 {
        softplus_f64(self.theta) + BETA_FLOOR
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, cfg: &AdamConfig) {
    assert_eq!(params.len(), grads.len(), "gradient shape mismatch");
    assert_eq!(params.len(), state.m.len(), "optimizer state shape mismatch");
    state.t += 1;
    let c1 = 1.0 - cfg.beta1.powf(state.t as f64);
    let c2 = 1.0 - cfg.beta2.powf(state.t as f64);
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(&mut state.m)
        .zip(&mut state.v)
    {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}

/// Bernoulli keep mask with inverted scaling: entries are `1/(1 − rate)` or 0.
pub fn dropconnect_mask(len: usize, rate: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Config(format!("dropconnect rate {rate} outside [0, 1)")));
    }
    if rate == 0.0 {
        return Ok(vec![1.0; len]);
    }
    let keep = 1.0 - rate;
    Ok((0..len)
        .map(|_| if rng.random_bool(keep) { 1.0 / keep } else { 0.0 })
        .collect())
}

/// `|a − b| / max(|a|, |b|, 1e−8)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tape;
    use crate::real::Real;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn curvature_round_trip_and_positivity() {
        for b in [1e-3, 0.5, 1.0, 2.0, 40.0] {
            let c = CurvatureParam::from_beta(b).unwrap();
            assert!((c.beta() - b).abs() < 1e-12 * b.max(1.0), "{b}");
        }
        assert!(CurvatureParam { theta: -800.0 }.beta() > 0.0);
        assert!(CurvatureParam::from_beta(1e-5).is_err());
    }

    #[test]
    fn curvature_gradient_through_tape() {
        let theta = 0.3;
        let tape = Tape::new();
        let t = tape.var(theta);
        let beta = t.softplus() + BETA_FLOOR;
        let loss = beta.sqrt();
        tape.backward(loss);
        let f = |th: f64| (CurvatureParam { theta: th }.beta()).sqrt();
        let fd = (f(theta + 1e-5) - f(theta - 1e-5)) / 2e-5;
        assert!(relative_error(tape.grad(t), fd) < 1e-8);
    }

    #[test]
    fn adam_zero_gradient_is_noop() {
        let mut p = vec![0.5, -1.0];
        let mut s = AdamState::new(2);
        for _ in 0..5 {
            adam_step(&mut p, &[0.0, 0.0], &mut s, &AdamConfig::with_lr(0.1));
        }
        assert_eq!(p, vec![0.5, -1.0]);
    }

    #[test]
    fn adam_first_step_magnitude() {
        let cfg = AdamConfig::with_lr(0.01);
        for g in [3.0, -0.2, 1e-3] {
            let mut p = vec![0.0];
            let mut s = AdamState::new(1);
            adam_step(&mut p, &[g], &mut s, &cfg);
            // m̂ = g, v̂ = g², so the step is lr·g/(|g| + eps)
            let expected = -0.01 * g / (f64::abs(g) + 1e-8);
            assert!((p[0] - expected).abs() < 1e-15, "{g}: {} vs {expected}", p[0]);
        }
    }

    #[test]
    fn adam_is_deterministic() {
        let run = || {
            let mut p = vec![1.0, 2.0, 3.0];
            let mut s = AdamState::new(3);
            let mut traj = Vec::new();
            for k in 0..20 {
                let g: Vec<f64> = p.iter().map(|x| 2.0 * x + k as f64 * 0.01).collect();
                adam_step(&mut p, &g, &mut s, &AdamConfig::with_lr(0.05));
                traj.extend_from_slice(&p);
            }
            traj
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn dropconnect_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(dropconnect_mask(7, 0.0, &mut rng).unwrap(), vec![1.0; 7]);
        let mask = dropconnect_mask(1_000_000, 0.5, &mut rng).unwrap();
        let kept = mask.iter().filter(|&&x| x > 0.0).count() as f64 / 1e6;
        assert!((kept - 0.5).abs() <= 0.01, "{kept}");
        assert!(mask.iter().all(|&x| x == 0.0 || x == 2.0));
        assert!(dropconnect_mask(3, 1.0, &mut rng).is_err());
        assert!(dropconnect_mask(3, -0.1, &mut rng).is_err());
    }
}
