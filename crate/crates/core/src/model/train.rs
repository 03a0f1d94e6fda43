use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::LgcnConfig;
use super::heads::{accuracy, evaluate_auc, fermi_dirac};
use super::network::{Embeddings, Network, PairBatch};
use crate::autodiff::{adam_step, AdamConfig, AdamState, Tape};
use crate::error::{Error, Result};
use crate::graph::{make_lp_split, make_nc_split, EdgeSplit, Graph, NcProtocol, NodeSplit, Task};
use crate::rng::{stream, Stream};

/// One line of the metric history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    /// Validation AUC (link prediction) or accuracy (node classification).
    pub val_metric: f64,
    /// Test metric, recorded only on epochs that improve validation.
    pub test_metric: Option<f64>,
    pub curvatures: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskSplit {
    Edges(EdgeSplit),
    Nodes(NodeSplit),
}

/// Network restored to its best validation epoch, with its embeddings.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub config: LgcnConfig,
    pub network: Network,
    pub embeddings: Embeddings,
    pub split: TaskSplit,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub val_metric: f64,
    pub test_metric: f64,
}

/// Scores of `pairs` under the Fermi-Dirac decoder.
pub fn pair_scores(emb: &Embeddings, pairs: &[(usize, usize)], r: f64, t: f64) -> Vec<f64> {
    pairs
        .iter()
        .map(|&(u, v)| fermi_dirac(emb.decoder_distance(u, v), r, t))
        .collect()
}

/// AUC of positives against negatives.
pub fn link_auc(
    emb: &Embeddings,
    pos: &[(usize, usize)],
    neg: &[(usize, usize)],
    r: f64,
    t: f64,
) -> Result<f64> {
    let mut scores = pair_scores(emb, pos, r, t);
    scores.extend(pair_scores(emb, neg, r, t));
    let labels: Vec<bool> = (0..scores.len()).map(|i| i < pos.len()).collect();
    evaluate_auc(&scores, &labels)
}

/// `k` distinct-endpoint pairs that are not edges of `graph`, drawn
/// uniformly with replacement.
pub fn sample_non_edges(graph: &Graph, k: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let n = graph.num_nodes();
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && !graph.adjacency().has_edge(u, v) {
            out.push((u.min(v), u.max(v)));
        }
    }
    out
}

struct Best {
    epoch: usize,
    val: f64,
    val_loss: f64,
    test: f64,
    values: Vec<f64>,
}

/// Splits the graph according to `config.task` and trains.
pub fn train(graph: &Graph, config: &LgcnConfig) -> Result<TrainedModel> {
    let split = match config.task {
        Task::LinkPrediction => TaskSplit::Edges(make_lp_split(graph, config.seed)?),
        Task::NodeClassification => {
            TaskSplit::Nodes(make_nc_split(graph, config.seed, NcProtocol::default())?)
        }
    };
    train_with_split(graph, config, split)
}

/// Adam with coupled L2 on weight matrices and DropConnect during training;
/// early stopping on the validation metric with the best epoch restored.
/// Epochs that tie the best validation metric count as an improvement when
/// their validation loss is lower.
pub fn train_with_split(graph: &Graph, config: &LgcnConfig, split: TaskSplit) -> Result<TrainedModel> {
    config.validate()?;
    let features = graph.feature_rows();
    let input_dim = graph.feature_dim();
    let classes = match (&split, config.task) {
        (TaskSplit::Edges(_), Task::LinkPrediction) => None,
        (TaskSplit::Nodes(_), Task::NodeClassification) => Some(graph.num_classes()),
        _ => return Err(Error::Config("split does not match the configured task".into())),
    };
    let labels = match classes {
        Some(_) => Some(
            graph
                .labels()
                .ok_or_else(|| Error::Data("node classification needs labels".into()))?,
        ),
        None => None,
    };
    let message_graph = match &split {
        TaskSplit::Edges(s) => {
            if s.train.is_empty() || s.val.is_empty() || s.test.is_empty() {
                return Err(Error::Data("empty edge split".into()));
            }
            s.train_graph(graph)
        }
        TaskSplit::Nodes(s) => {
            if s.train.is_empty() || s.val.is_empty() || s.test.is_empty() {
                return Err(Error::Data("empty node split".into()));
            }
            graph.clone()
        }
    };
    let adj = message_graph.adjacency();

    let mut init_rng = stream(config.seed, Stream::Init);
    let mut drop_rng = stream(config.seed, Stream::DropConnect);
    let mut neg_rng = stream(config.seed, Stream::Negatives);
    let mut net = Network::init(config, input_dim, classes, &mut init_rng)?;
    let mut adam = AdamState::new(net.num_params());
    let adam_cfg = AdamConfig::with_lr(config.lr);
    let decay: Vec<usize> = net.matrix_indices().into_iter().flatten().collect();
    let thetas = net.theta_indices();

    // metric and mean loss on the validation or test part of the split
    let evaluate = |net: &Network, test: bool| -> Result<(f64, f64)> {
        let emb = net.embed(&features, adj)?;
        let rows = emb.rows();
        match &split {
            TaskSplit::Edges(s) => {
                let (pos, neg) = if test { (&s.test, &s.test_neg) } else { (&s.val, &s.val_neg) };
                let loss = net.link_loss(&rows, PairBatch { pos, neg }, config.r, config.t);
                Ok((link_auc(&emb, pos, neg, config.r, config.t)?, loss))
            }
            TaskSplit::Nodes(s) => {
                let nodes = if test { &s.test } else { &s.val };
                let labels = labels.expect("labels checked");
                let loss = net.class_loss(net.values(), &rows, nodes, labels);
                Ok((accuracy(&net.predict(&emb), labels, nodes)?, loss))
            }
        }
    };

    let mut history = Vec::new();
    let mut best: Option<Best> = None;
    for epoch in 1..=config.max_epochs {
        let mask = (config.dropconnect > 0.0)
            .then(|| net.dropconnect_mask(config.dropconnect, &mut drop_rng))
            .transpose()?;
        let tape = Tape::new();
        let vars = tape.vars(net.values());
        let emb = net.forward(&vars, mask.as_deref(), &features, adj);
        let loss = match &split {
            TaskSplit::Edges(s) => {
                let neg = sample_non_edges(graph, s.train.len(), &mut neg_rng);
                net.link_loss(&emb, PairBatch { pos: &s.train, neg: &neg }, config.r, config.t)
            }
            TaskSplit::Nodes(s) => {
                net.class_loss(&vars, &emb, &s.train, labels.expect("labels checked"))
            }
        };
        let train_loss = loss.value();
        if !train_loss.is_finite() {
            return Err(Error::NonFinite);
        }
        tape.backward(loss);
        let mut grads = tape.grads(&vars);
        drop(emb);
        drop(vars);
        drop(tape);
        for &k in &decay {
            grads[k] += config.weight_decay * net.values()[k];
        }
        if !config.train_curvature {
            grads[thetas.clone()].fill(0.0);
        }
        let mut values = net.values().to_vec();
        adam_step(&mut values, &grads, &mut adam, &adam_cfg);
        net.set_values(&values);

        let (val, val_loss) = evaluate(&net, false)?;
        let improved = best
            .as_ref()
            .is_none_or(|b| val > b.val || (val == b.val && val_loss < b.val_loss));
        let test_metric = if improved {
            let (test, _) = evaluate(&net, true)?;
            best = Some(Best { epoch, val, val_loss, test, values });
            Some(test)
        } else {
            None
        };
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_metric: val,
            test_metric,
            curvatures: net.curvatures(),
        });
        if epoch - best.as_ref().expect("set on first epoch").epoch >= config.patience {
            break;
        }
    }

    let Best { epoch: best_epoch, val: val_metric, test: test_metric, values, .. } =
        best.expect("at least one epoch");
    net.set_values(&values);
    let embeddings = net.embed(&features, adj)?;
    Ok(TrainedModel {
        config: config.clone(),
        network: net,
        embeddings,
        split,
        history,
        best_epoch,
        val_metric,
        test_metric,
    })
}
