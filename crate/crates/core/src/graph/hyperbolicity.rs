//! Gromov four-point hyperbolicity.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::DistanceMatrix;
use crate::error::{Error, Result};

/// Largest graph evaluated exhaustively unless the caller raises the cap.
pub const DEFAULT_EXACT_CAP: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HyperbolicityMode {
    Exact,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicityReport {
    pub delta_avg: f64,
    pub delta_worst: f64,
    pub mode: String,
    /// Quadruples that contributed to the average.
    pub samples: usize,
    /// Quadruples dropped because some pair is disconnected.
    pub skipped: usize,
}

/// `(L − M)/2` over the three pairing sums of four nodes, or `None` when a
/// pair is disconnected.
pub fn delta_quadruple(d: &DistanceMatrix, v: [usize; 4]) -> Option<f64> {
    let g = |a: usize, b: usize| d.get(v[a], v[b]).map(f64::from);
    let mut sums = [
        g(0, 1)? + g(2, 3)?,
        g(0, 2)? + g(1, 3)?,
        g(0, 3)? + g(1, 2)?,
    ];
    sums.sort_by(f64::total_cmp);
    Some((sums[2] - sums[1]) / 2.0)
}

#[derive(Default, Clone, Copy)]
struct Acc {
    sum: f64,
    worst: f64,
    count: usize,
    skipped: usize,
}

impl Acc {
    fn push(mut self, delta: Option<f64>) -> Self {
        match delta {
            Some(x) => {
                self.sum += x;
                self.worst = self.worst.max(x);
                self.count += 1;
            }
            None => self.skipped += 1,
        }
        self
    }

    fn merge(self, o: Self) -> Self {
        Self {
            sum: self.sum + o.sum,
            worst: self.worst.max(o.worst),
            count: self.count + o.count,
            skipped: self.skipped + o.skipped,
        }
    }
}

/// Average and worst-case `δ⁺`. Exact mode enumerates all `C(n, 4)`
/// quadruples and refuses graphs above `exact_cap` nodes.
pub fn delta_avg(
    d: &DistanceMatrix,
    mode: HyperbolicityMode,
    exact_cap: usize,
) -> Result<HyperbolicityReport> {
    let n = d.num_nodes();
    if n < 4 {
        return Err(Error::UndefinedMetric(format!(
            "hyperbolicity needs at least 4 nodes, graph has {n}"
        )));
    }
    let (acc, label) = match mode {
        HyperbolicityMode::Exact => {
            if n > exact_cap {
                return Err(Error::Config(format!(
                    "exact hyperbolicity limited to {exact_cap} nodes, graph has {n}; use sampled mode"
                )));
            }
            let acc = (0..n)
                .into_par_iter()
                .map(|a| {
                    let mut acc = Acc::default();
                    for b in a + 1..n {
                        for c in b + 1..n {
                            for e in c + 1..n {
                                acc = acc.push(delta_quadruple(d, [a, b, c, e]));
                            }
                        }
                    }
                    acc
                })
                .reduce(Acc::default, Acc::merge);
            (acc, "exact".to_string())
        }
        HyperbolicityMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::Config("sample count must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = Acc::default();
            for _ in 0..samples {
                let q = sample(&mut rng, n, 4);
                acc = acc.push(delta_quadruple(d, [q.index(0), q.index(1), q.index(2), q.index(3)]));
            }
            (acc, format!("sampled:{samples}"))
        }
    };
    if acc.count == 0 {
        return Err(Error::UndefinedMetric(
            "every quadruple contains a disconnected pair".into(),
        ));
    }
    Ok(HyperbolicityReport {
        delta_avg: acc.sum / acc.count as f64,
        delta_worst: acc.worst,
        mode: label,
        samples: acc.count,
        skipped: acc.skipped,
    })
}
