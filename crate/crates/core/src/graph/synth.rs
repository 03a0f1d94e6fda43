//! Small synthetic datasets: complete trees and two-community block graphs.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Adjacency, Graph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Synthetic {
    /// Complete `branching`-ary tree with `depth` levels below the root.
    Tree { depth: usize, branching: usize },
    /// Two equal communities with in/out edge probabilities.
    Blocks { n: usize, p_in: f64, p_out: f64 },
}

/// Node features attached to a generated graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FeatureKind {
    /// Identity rows.
    OneHot,
    /// Label indicator, replaced by a uniformly random class with
    /// probability `flip`.
    NoisyLabel { flip: f64 },
    /// Gaussian random walk down a breadth-first spanning forest: roots draw
    /// `N(0, σ²)`, every other node adds `N(0, σ²)` to its parent's vector.
    Diffusion { dim: usize, sigma: f64 },
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl Synthetic {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Tree { depth, branching } => {
                if branching == 0 {
                    return Err(bad("tree branching must be at least 1"));
                }
                let n = tree_size(depth, branching).ok_or_else(|| bad("tree too large"))?;
                if n > 1 << 22 {
                    return Err(bad(format!("tree with {n} nodes is too large")));
                }
            }
            Self::Blocks { n, p_in, p_out } => {
                if n < 2 {
                    return Err(bad("blocks need at least 2 nodes"));
                }
                for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(bad(format!("{name} = {p} is not a probability")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn generate(&self, features: FeatureKind, rng: &mut impl Rng) -> Result<Graph> {
        self.validate()?;
        let (n, edges, labels) = match *self {
            Self::Tree { depth, branching } => tree(depth, branching),
            Self::Blocks { n, p_in, p_out } => blocks(n, p_in, p_out, rng),
        };
        let adjacency = Adjacency::from_edges(n, edges);
        let classes = labels.iter().max().map_or(1, |m| m + 1);
        let rows = match features {
            FeatureKind::OneHot => (0..n)
                .map(|i| {
                    let mut r = vec![0.0; n];
                    r[i] = 1.0;
                    r
                })
                .collect(),
            FeatureKind::NoisyLabel { flip } => {
                if !(0.0..=1.0).contains(&flip) {
                    return Err(bad(format!("flip probability {flip} out of range")));
                }
                labels
                    .iter()
                    .map(|&l| {
                        let c = if rng.random_bool(flip) {
                            rng.random_range(0..classes)
                        } else {
                            l
                        };
                        let mut r = vec![0.0; classes];
                        r[c] = 1.0;
                        r
                    })
                    .collect()
            }
            FeatureKind::Diffusion { dim, sigma } => {
                if dim == 0 || !(sigma.is_finite() && sigma > 0.0) {
                    return Err(bad("diffusion features need dim ≥ 1 and σ > 0"));
                }
                diffusion(&adjacency, dim, sigma, rng)
            }
        };
        Graph::new(adjacency, Some(rows), Some(labels))
    }
}

fn tree_size(depth: usize, branching: usize) -> Option<usize> {
    let mut total = 1usize;
    let mut level = 1usize;
    for _ in 0..depth {
        level = level.checked_mul(branching)?;
        total = total.checked_add(level)?;
    }
    Some(total)
}

/// Nodes are numbered breadth first, so the parent of `v > 0` is
/// `(v − 1) / branching`. Labels name the root's child a node descends from;
/// the root itself is labelled 0.
fn tree(depth: usize, branching: usize) -> (usize, Vec<(usize, usize)>, Vec<usize>) {
    let n = tree_size(depth, branching).expect("validated");
    let edges = (1..n).map(|v| ((v - 1) / branching, v)).collect();
    let mut labels = vec![0; n];
    for v in 1..n {
        let p = (v - 1) / branching;
        labels[v] = if p == 0 { v - 1 } else { labels[p] };
    }
    (n, edges, labels)
}

fn blocks(
    n: usize,
    p_in: f64,
    p_out: f64,
    rng: &mut impl Rng,
) -> (usize, Vec<(usize, usize)>, Vec<usize>) {
    let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    (n, edges, labels)
}

fn diffusion(adj: &Adjacency, dim: usize, sigma: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let normal = Normal::new(0.0, sigma).expect("σ validated");
    let n = adj.num_nodes();
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut queue = std::collections::VecDeque::new();
    for root in 0..n {
        if rows[root].is_some() {
            continue;
        }
        rows[root] = Some((0..dim).map(|_| normal.sample(rng)).collect());
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for &v in adj.neighbors(u) {
                if rows[v].is_none() {
                    let base = rows[u].as_ref().expect("visited");
                    rows[v] = Some(base.iter().map(|x| x + normal.sample(rng)).collect());
                    queue.push_back(v);
                }
            }
        }
    }
    rows.into_iter().map(|r| r.expect("all visited")).collect()
}

impl fmt::Display for Synthetic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tree { depth, branching } => write!(f, "tree:{depth},{branching}"),
            Self::Blocks { n, p_in, p_out } => write!(f, "blocks:{n},{p_in},{p_out}"),
        }
    }
}

/// Parses `tree:DEPTH,BRANCHING` and `blocks:N,P_IN,P_OUT`.
impl FromStr for Synthetic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| bad(format!("expected tree:D,B or blocks:N,PIN,POUT, got `{s}`")))?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        let int = |a: &str| a.parse::<usize>().map_err(|_| bad(format!("invalid integer `{a}`")));
        let real = |a: &str| a.parse::<f64>().map_err(|_| bad(format!("invalid number `{a}`")));
        let g = match (kind, args.as_slice()) {
            ("tree", [d, b]) => Self::Tree {
                depth: int(d)?,
                branching: int(b)?,
            },
            ("blocks", [n, pi, po]) => Self::Blocks {
                n: int(n)?,
                p_in: real(pi)?,
                p_out: real(po)?,
            },
            _ => return Err(bad(format!("unrecognized generator `{s}`"))),
        };
        g.validate()?;
        Ok(g)
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OneHot => f.write_str("onehot"),
            Self::NoisyLabel { flip } => write!(f, "noisy:{flip}"),
            Self::Diffusion { dim, sigma } => write!(f, "diffusion:{dim},{sigma}"),
        }
    }
}

/// Parses `onehot`, `noisy:FLIP` and `diffusion:DIM,SIGMA`.
impl FromStr for FeatureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "onehot" {
            return Ok(Self::OneHot);
        }
        let err = || bad(format!("unrecognized feature kind `{s}`"));
        let (kind, args) = s.split_once(':').ok_or_else(err)?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        match (kind, args.as_slice()) {
            ("noisy", [p]) => Ok(Self::NoisyLabel {
                flip: p.parse().map_err(|_| err())?,
            }),
            ("diffusion", [d, s]) => Ok(Self::Diffusion {
                dim: d.parse().map_err(|_| err())?,
                sigma: s.parse().map_err(|_| err())?,
            }),
            _ => Err(err()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{all_pairs_distances, delta_avg, HyperbolicityMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binary_tree_depth_six() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = Synthetic::Tree { depth: 6, branching: 2 }
            .generate(FeatureKind::OneHot, &mut rng)
            .unwrap();
        assert_eq!(g.num_nodes(), 127);
        assert_eq!(g.num_edges(), 126);
        let labels = g.labels().unwrap();
        assert_eq!(g.num_classes(), 2);
        // node 1 heads subtree 0, node 2 heads subtree 1
        assert_eq!(labels[3], 0);
        assert_eq!(labels[6], 1);
        assert_eq!(labels[126], 1);
    }

    #[test]
    fn small_tree_is_hyperbolic() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = Synthetic::Tree { depth: 2, branching: 3 }
            .generate(FeatureKind::NoisyLabel { flip: 0.1 }, &mut rng)
            .unwrap();
        assert_eq!(g.num_nodes(), 13);
        let r = delta_avg(&all_pairs_distances(&g), HyperbolicityMode::Exact, 30).unwrap();
        assert_eq!(r.delta_avg, 0.0);
        assert_eq!(g.feature_dim(), 3);
    }

    #[test]
    fn blocks_are_seed_deterministic() {
        let spec = Synthetic::Blocks { n: 40, p_in: 0.3, p_out: 0.02 };
        let make = |s| {
            spec.generate(FeatureKind::OneHot, &mut ChaCha8Rng::seed_from_u64(s))
                .unwrap()
        };
        assert_eq!(make(5), make(5));
        assert_ne!(make(5), make(6));
        assert_eq!(make(5).labels().unwrap()[25], 1);
    }

    #[test]
    fn diffusion_children_stay_near_parents() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Synthetic::Tree { depth: 4, branching: 2 }
            .generate(FeatureKind::Diffusion { dim: 64, sigma: 1.0 }, &mut rng)
            .unwrap();
        let f = g.features().unwrap();
        let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        // parent-child gap is one increment, siblings two
        let pc = sq(&f[1], &f[3]);
        let sib = sq(&f[15], &f[16]);
        assert!(pc < sib, "{pc} {sib}");
    }

    #[test]
    fn parse_generators() {
        assert_eq!(
            "tree:6,2".parse::<Synthetic>().unwrap(),
            Synthetic::Tree { depth: 6, branching: 2 }
        );
        assert_eq!(
            "blocks:40,0.3,0.02".parse::<Synthetic>().unwrap().to_string(),
            "blocks:40,0.3,0.02"
        );
        for bad in ["tree:6", "blocks:40,1.5,0.1", "ring:5", "tree:3,0"] {
            assert!(matches!(bad.parse::<Synthetic>(), Err(Error::Config(_))), "{bad}");
        }
        assert_eq!(
            "diffusion:16,0.5".parse::<FeatureKind>().unwrap(),
            FeatureKind::Diffusion { dim: 16, sigma: 0.5 }
        );
        assert!("noisy".parse::<FeatureKind>().is_err());
    }
}
