use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Graph, Task};
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Link prediction split. Negative sets match their positive counterparts in
/// size and never contain a true edge of the full graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSplit {
    pub train: Vec<(usize, usize)>,
    pub val: Vec<(usize, usize)>,
    pub test: Vec<(usize, usize)>,
    pub val_neg: Vec<(usize, usize)>,
    pub test_neg: Vec<(usize, usize)>,
}

impl EdgeSplit {
    /// Message-passing graph: only the training edges survive.
    pub fn train_graph(&self, graph: &Graph) -> Graph {
        graph.with_edges(self.train.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class training quota and fixed validation/test sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NcProtocol {
    pub per_class: usize,
    pub val: usize,
    pub test: usize,
}

impl Default for NcProtocol {
    fn default() -> Self {
        Self {
            per_class: 20,
            val: 500,
            test: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Splits {
    Edges(EdgeSplit),
    Nodes(NodeSplit),
}

pub fn make_splits(graph: &Graph, task: Task, seed: u64) -> Result<Splits> {
    match task {
        Task::LinkPrediction => make_lp_split(graph, seed).map(Splits::Edges),
        Task::NodeClassification => {
            make_nc_split(graph, seed, NcProtocol::default()).map(Splits::Nodes)
        }
    }
}

fn canonical(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Shuffles the edges and cuts `⌊0.05·m⌋` validation and `⌊0.10·m⌋` test
/// edges; the remainder trains.
pub fn make_lp_split(graph: &Graph, seed: u64) -> Result<EdgeSplit> {
    let mut edges: Vec<_> = graph.adjacency().edges().collect();
    let m = edges.len();
    let n_val = m * 5 / 100;
    let n_test = m * 10 / 100;
    if n_val == 0 || n_test == 0 {
        return Err(Error::Data(format!(
            "{m} edges is too few for a 85/5/10 split (need at least 20)"
        )));
    }
    let n = graph.num_nodes() as u128;
    let non_edges = n * (n - 1) / 2 - m as u128;
    if non_edges < (n_val + n_test) as u128 {
        return Err(Error::Data(format!(
            "graph has {non_edges} non-edges, {} negatives needed",
            n_val + n_test
        )));
    }

    let mut rng = stream(seed, Stream::Split);
    edges.shuffle(&mut rng);
    let test = edges.split_off(m - n_test);
    let val = edges.split_off(m - n_test - n_val);

    let mut taken = HashSet::new();
    let mut draw = |k: usize| {
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let u = rng.random_range(0..graph.num_nodes());
            let v = rng.random_range(0..graph.num_nodes());
            let e = canonical(u, v);
            if u != v && !graph.adjacency().has_edge(u, v) && taken.insert(e) {
                out.push(e);
            }
        }
        out
    };
    let val_neg = draw(n_val);
    let test_neg = draw(n_test);
    Ok(EdgeSplit {
        train: edges,
        val,
        test,
        val_neg,
        test_neg,
    })
}

/// Standard protocol when the graph is large enough for the quota plus the
/// fixed validation/test sizes; otherwise a 30/10/60 proportional split.
pub fn make_nc_split(graph: &Graph, seed: u64, protocol: NcProtocol) -> Result<NodeSplit> {
    let labels = graph
        .labels()
        .ok_or_else(|| Error::Data("node classification needs labels".into()))?;
    let n = labels.len();
    let classes = graph.num_classes();
    let mut rng = stream(seed, Stream::Split);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    if n < protocol.per_class * classes + protocol.val + protocol.test {
        let n_val = n / 10;
        let n_test = n * 6 / 10;
        if n_val == 0 || n_test == 0 || n - n_val - n_test == 0 {
            return Err(Error::Data(format!("{n} labelled nodes is too few to split")));
        }
        let test = order.split_off(n - n_test);
        let val = order.split_off(n - n_test - n_val);
        return Ok(NodeSplit {
            train: order,
            val,
            test,
        });
    }

    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in &order {
        by_class.entry(labels[i]).or_default().push(i);
    }
    let short: Vec<String> = (0..classes)
        .filter_map(|c| {
            let have = by_class.get(&c).map_or(0, Vec::len);
            (have < protocol.per_class).then(|| format!("class {c} has {have}"))
        })
        .collect();
    if !short.is_empty() {
        return Err(Error::Data(format!(
            "need {} training nodes per class: {}",
            protocol.per_class,
            short.join(", ")
        )));
    }
    let mut train: Vec<usize> = by_class
        .values()
        .flat_map(|v| v[..protocol.per_class].iter().copied())
        .collect();
    train.sort_unstable();
    let chosen: HashSet<usize> = train.iter().copied().collect();
    let mut rest = order.into_iter().filter(|i| !chosen.contains(i));
    let val = rest.by_ref().take(protocol.val).collect();
    let test = rest.take(protocol.test).collect();
    Ok(NodeSplit { train, val, test })
}
