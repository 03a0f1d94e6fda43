use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use lgcn_core::autodiff::Parameter;
use lgcn_core::graph::synth::{FeatureKind, Synthetic};
use lgcn_core::graph::{
    all_pairs_distances, average_distortion, delta_avg, load_features, load_graph, write_edges,
    write_features, write_labels, HyperbolicityMode, HyperbolicityReport, Task, DEFAULT_EXACT_CAP,
};
use lgcn_core::manifold::distance;
use lgcn_core::model::{train, LgcnConfig, TrainedModel};
use lgcn_core::rng::{stream, Stream};
use lgcn_core::{Curvature, Error, HyperPoint, Result};
use serde::{Deserialize, Serialize};

use crate::run_config::RunConfig;

/// Samples drawn when the graph is too large for exact enumeration.
pub const DEFAULT_SAMPLES: usize = 10_000;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
struct TrainReport<'a> {
    task: Task,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_auc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_accuracy: Option<f64>,
    val_metric: f64,
    best_epoch: usize,
    epochs_run: usize,
    seed: u64,
    curvatures: Vec<f64>,
    config: &'a RunConfig,
}

/// Trained parameters with what is needed to rebuild the network.
#[derive(Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: LgcnConfig,
    pub input_dim: usize,
    pub classes: Option<usize>,
    pub best_epoch: usize,
    pub parameters: Vec<Parameter>,
}

/// Trains and writes `metrics.jsonl`, `checkpoint.json`, `embeddings.csv`
/// and `report.json` into the output directory. Returns the report text.
pub fn cmd_train(cfg: &RunConfig) -> Result<String> {
    let (data, out) = cfg.validate()?;
    let graph = load_graph(&data.edges, data.features.as_deref(), data.labels.as_deref())?;
    let model = train(&graph, &cfg.model)?;
    fs::create_dir_all(out).map_err(io_err(out))?;

    let mut metrics = String::new();
    for r in &model.history {
        let _ = writeln!(metrics, "{}", serde_json::to_string(r).expect("plain data serializes"));
    }
    write(&out.join("metrics.jsonl"), &metrics)?;
    write(&out.join("checkpoint.json"), &to_json(&checkpoint(&model, graph.feature_dim())))?;
    write_features(&out.join("embeddings.csv"), &model.embeddings.rows())?;

    let (test_auc, test_accuracy) = match cfg.model.task {
        Task::LinkPrediction => (Some(model.test_metric), None),
        Task::NodeClassification => (None, Some(model.test_metric)),
    };
    let report = to_json(&TrainReport {
        task: cfg.model.task,
        test_auc,
        test_accuracy,
        val_metric: model.val_metric,
        best_epoch: model.best_epoch,
        epochs_run: model.history.len(),
        seed: cfg.model.seed,
        curvatures: model.network.curvatures(),
        config: cfg,
    });
    write(&out.join("report.json"), &report)?;
    Ok(report)
}

fn checkpoint(model: &TrainedModel, input_dim: usize) -> Checkpoint {
    Checkpoint {
        config: model.config.clone(),
        input_dim,
        classes: model.network.num_classes(),
        best_epoch: model.best_epoch,
        parameters: model.network.parameters(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperbolicitySetting {
    /// Exact up to the enumeration cap, sampled beyond it.
    Auto,
    Exact,
    Sampled(usize),
    Off,
}

impl std::str::FromStr for HyperbolicitySetting {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(Self::Auto),
            "exact" => Ok(Self::Exact),
            "none" => Ok(Self::Off),
            _ => s
                .strip_prefix("sampled:")
                .and_then(|m| m.parse().ok())
                .filter(|&m| m > 0)
                .map(Self::Sampled)
                .ok_or_else(|| format!("expected auto, exact, none or sampled:<m>, got `{s}`")),
        }
    }
}

pub struct AnalyzeArgs {
    pub edges: PathBuf,
    pub hyperbolicity: HyperbolicitySetting,
    pub embeddings: Option<PathBuf>,
    /// Curvature of hyperboloid embeddings; Euclidean distances when absent.
    pub beta: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct AnalysisReport {
    nodes: usize,
    edges: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_avg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_worst: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hyperbolicity: Option<HyperbolicityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distortion: Option<f64>,
}

fn embedding_distance(rows: Vec<Vec<f64>>, beta: Option<f64>) -> Result<Box<dyn Fn(usize, usize) -> f64>> {
    match beta {
        Some(b) => {
            let beta = Curvature::new(b)?;
            let points: Vec<HyperPoint> = rows
                .into_iter()
                .map(|r| HyperPoint::new(r, beta))
                .collect::<Result<_>>()
                .map_err(|e| Error::Data(format!("embedding rows are not on the hyperboloid: {e}")))?;
            Ok(Box::new(move |i, j| distance(&points[i], &points[j])))
        }
        None => Ok(Box::new(move |i, j| {
            rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })),
    }
}

/// Hyperbolicity and optional embedding distortion of a graph. Returns the
/// report text, also written to `analysis.json` when an output directory is
/// given.
pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<String> {
    if args.beta.is_some() && args.embeddings.is_none() {
        return Err(Error::Config("--beta only applies with --embeddings".into()));
    }
    let graph = load_graph(&args.edges, None, None)?;
    let n = graph.num_nodes();
    let d = all_pairs_distances(&graph);
    let mode = match args.hyperbolicity {
        HyperbolicitySetting::Auto if n <= DEFAULT_EXACT_CAP => Some(HyperbolicityMode::Exact),
        HyperbolicitySetting::Auto => Some(HyperbolicityMode::Sampled {
            samples: DEFAULT_SAMPLES,
            seed: args.seed,
        }),
        HyperbolicitySetting::Exact => Some(HyperbolicityMode::Exact),
        HyperbolicitySetting::Sampled(samples) => Some(HyperbolicityMode::Sampled {
            samples,
            seed: args.seed,
        }),
        HyperbolicitySetting::Off => None,
    };
    let hyperbolicity = mode.map(|m| delta_avg(&d, m, DEFAULT_EXACT_CAP)).transpose()?;

    let distortion = match &args.embeddings {
        Some(path) => {
            let rows = load_features(path)?;
            if rows.len() < n {
                return Err(Error::Data(format!(
                    "{}: {} embedding rows for {n} nodes",
                    path.display(),
                    rows.len()
                )));
            }
            let dist = embedding_distance(rows, args.beta)?;
            Some(average_distortion(dist, &d)?)
        }
        None => None,
    };

    let report = to_json(&AnalysisReport {
        nodes: n,
        edges: graph.num_edges(),
        delta_avg: hyperbolicity.as_ref().map(|h| h.delta_avg),
        delta_worst: hyperbolicity.as_ref().map(|h| h.delta_worst),
        hyperbolicity,
        distortion,
    });
    if let Some(out) = &args.out {
        fs::create_dir_all(out).map_err(io_err(out))?;
        write(&out.join("analysis.json"), &report)?;
    }
    Ok(report)
}

/// Writes `edges.csv`, `features.csv` and `labels.csv` for a synthetic
/// graph.
pub fn cmd_gen(generator: &str, features: &str, seed: u64, out: &Path) -> Result<()> {
    let generator: Synthetic = generator.parse()?;
    let features: FeatureKind = features.parse()?;
    let graph = generator.generate(features, &mut stream(seed, Stream::Generate))?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    write_edges(&out.join("edges.csv"), &graph)?;
    write_features(&out.join("features.csv"), graph.features().expect("generators attach features"))?;
    write_labels(&out.join("labels.csv"), graph.labels().expect("generators attach labels"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolicity_settings_parse() {
        assert_eq!("exact".parse(), Ok(HyperbolicitySetting::Exact));
        assert_eq!("sampled:500".parse(), Ok(HyperbolicitySetting::Sampled(500)));
        assert_eq!("none".parse(), Ok(HyperbolicitySetting::Off));
        assert!("sampled:0".parse::<HyperbolicitySetting>().is_err());
        assert!("sampled".parse::<HyperbolicitySetting>().is_err());
    }

    #[test]
    fn euclidean_embedding_distance() {
        let f = embedding_distance(vec![vec![0.0, 0.0], vec![3.0, 4.0]], None).unwrap();
        assert_eq!(f(0, 1), 5.0);
    }

    #[test]
    fn off_manifold_embeddings_are_data_errors() {
        let rows = vec![vec![1.0, 1.0]];
        assert!(matches!(embedding_distance(rows, Some(1.0)), Err(Error::Data(_))));
    }
}
