//! Undirected graphs, dataset IO and structural metrics.

mod distances;
mod distortion;
mod hyperbolicity;
mod io;
mod splits;
pub mod synth;

pub use distances::{all_pairs_distances, DistanceMatrix};
pub use distortion::{average_distortion, distortion_from_pairs, hyperbolic_distortion};
pub use hyperbolicity::{
    delta_avg, delta_quadruple, HyperbolicityMode, HyperbolicityReport, DEFAULT_EXACT_CAP,
};
pub use io::{load_features, load_graph, write_edges, write_features, write_labels};
pub use splits::{make_lp_split, make_nc_split, make_splits, EdgeSplit, NcProtocol, NodeSplit, Splits};

use serde::{Deserialize, Serialize};

/// Learning task a split or model is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "lp", alias = "link_prediction")]
    LinkPrediction,
    #[serde(rename = "nc", alias = "node_classification")]
    NodeClassification,
}

/// Symmetric adjacency in compressed sparse row form. Neighbor lists are
/// sorted and deduplicated; self-loops are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Adjacency {
    /// Builds the symmetric closure of `edges`, dropping self-loops and
    /// duplicates. Panics if an endpoint is `>= n`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut lists = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u},{v}) out of range for {n} nodes");
            if u != v {
                lists[u].push(v);
                lists[v].push(u);
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for mut l in lists {
            l.sort_unstable();
            l.dedup();
            targets.extend(l);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| v > u)
                .map(move |&v| (u, v))
        })
    }
}

/// Graph with optional node features and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Adjacency,
    features: Option<Vec<Vec<f64>>>,
    labels: Option<Vec<usize>>,
}

impl Graph {
    pub fn new(
        adjacency: Adjacency,
        features: Option<Vec<Vec<f64>>>,
        labels: Option<Vec<usize>>,
    ) -> crate::Result<Self> {
        let n = adjacency.num_nodes();
        if let Some(f) = &features {
            if f.len() != n {
                return Err(crate::Error::Data(format!(
                    "{} feature rows for {n} nodes",
                    f.len()
                )));
            }
            if let Some(k) = f.first().map(Vec::len) {
                if f.iter().any(|r| r.len() != k) {
                    return Err(crate::Error::Data("ragged feature rows".into()));
                }
            }
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(crate::Error::Data(format!("{} labels for {n} nodes", l.len())));
            }
        }
        Ok(Self {
            adjacency,
            features,
            labels,
        })
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            adjacency: Adjacency::from_edges(n, edges),
            features: None,
            labels: None,
        }
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.num_nodes()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.num_edges()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        self.adjacency.neighbors(i)
    }

    pub fn features(&self) -> Option<&[Vec<f64>]> {
        self.features.as_deref()
    }

    /// Node features, or identity (one-hot) features when none were given.
    pub fn feature_rows(&self) -> Vec<Vec<f64>> {
        match &self.features {
            Some(f) => f.clone(),
            None => {
                let n = self.num_nodes();
                (0..n)
                    .map(|i| {
                        let mut row = vec![0.0; n];
                        row[i] = 1.0;
                        row
                    })
                    .collect()
            }
        }
    }

    pub fn feature_dim(&self) -> usize {
        match &self.features {
            Some(f) => f.first().map_or(0, Vec::len),
            None => self.num_nodes(),
        }
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn num_classes(&self) -> usize {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().max())
            .map_or(0, |m| m + 1)
    }

    /// Same nodes, features and labels over a different edge set.
    pub fn with_edges(&self, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            adjacency: Adjacency::from_edges(self.num_nodes(), edges),
            features: self.features.clone(),
            labels: self.labels.clone(),
        }
    }
}
