use std::fs;
use std::path::{Path, PathBuf};

use lgcn_core::graph::Task;
use lgcn_core::model::{Geometry, LgcnConfig};
use lgcn_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub edges: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
}

/// Everything a training run needs. Relative paths in a config file are
/// taken relative to the file's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataPaths>,
    #[serde(default)]
    pub model: LgcnConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub edges: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub dim: Option<usize>,
    pub layers: Option<usize>,
    pub lr: Option<f64>,
    pub dropconnect: Option<f64>,
    pub task: Option<Task>,
    pub geometry: Option<Geometry>,
    pub max_epochs: Option<usize>,
    pub patience: Option<usize>,
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(d) = &mut cfg.data {
            rebase(base, &mut d.edges);
            for p in [&mut d.features, &mut d.labels].into_iter().flatten() {
                rebase(base, p);
            }
        }
        if let Some(out) = &mut cfg.out {
            rebase(base, out);
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: Overrides) -> Result<()> {
        match (&mut self.data, o.edges) {
            (Some(d), Some(e)) => d.edges = e,
            (None, Some(edges)) => {
                self.data = Some(DataPaths {
                    edges,
                    features: None,
                    labels: None,
                })
            }
            _ => {}
        }
        if o.features.is_some() || o.labels.is_some() {
            let d = self
                .data
                .as_mut()
                .ok_or_else(|| Error::Config("--features/--labels given without an edge file".into()))?;
            if o.features.is_some() {
                d.features = o.features;
            }
            if o.labels.is_some() {
                d.labels = o.labels;
            }
        }
        if o.out.is_some() {
            self.out = o.out;
        }
        let m = &mut self.model;
        if let Some(layers) = o.layers {
            if layers == 0 {
                return Err(Error::Config("--layers must be at least 1".into()));
            }
            let width = m.dims.last().copied().unwrap_or(16);
            let input = m.dims.first().copied().unwrap_or(0);
            m.dims = std::iter::once(input).chain(std::iter::repeat_n(width, layers)).collect();
        }
        if let Some(dim) = o.dim {
            let layers = m.dims.len().saturating_sub(1).max(1);
            let input = m.dims.first().copied().unwrap_or(0);
            m.dims = std::iter::once(input).chain(std::iter::repeat_n(dim, layers)).collect();
        }
        if let Some(v) = o.seed {
            m.seed = v;
        }
        if let Some(v) = o.lr {
            m.lr = v;
        }
        if let Some(v) = o.dropconnect {
            m.dropconnect = v;
        }
        if let Some(v) = o.task {
            m.task = v;
        }
        if let Some(v) = o.geometry {
            m.geometry = v;
        }
        if let Some(v) = o.max_epochs {
            m.max_epochs = v;
        }
        if let Some(v) = o.patience {
            m.patience = v;
        }
        Ok(())
    }

    /// Checks that the run is fully specified; called before any data is read.
    pub fn validate(&self) -> Result<(&DataPaths, &Path)> {
        self.model.validate()?;
        let data = self
            .data
            .as_ref()
            .ok_or_else(|| Error::Config("no edge file: pass --edges or set data.edges".into()))?;
        let out = self
            .out
            .as_deref()
            .ok_or_else(|| Error::Config("no output directory: pass --out or set out".into()))?;
        if self.model.task == Task::NodeClassification && data.labels.is_none() {
            return Err(Error::Config("node classification needs a label file".into()));
        }
        Ok((data, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected_at_every_level() {
        for doc in [
            r#"{"epochs": 3}"#,
            r#"{"model": {"learning_rate": 0.1}}"#,
            r#"{"data": {"edges": "e.csv", "weights": "w.csv"}}"#,
        ] {
            assert!(serde_json::from_str::<RunConfig>(doc).is_err(), "{doc}");
        }
    }

    #[test]
    fn flags_override_file_values() {
        let mut cfg: RunConfig = serde_json::from_str(
            r#"{"data": {"edges": "e.csv"}, "model": {"lr": 0.5, "seed": 1, "dims": [0, 8, 8, 8]}}"#,
        )
        .unwrap();
        cfg.apply(Overrides {
            lr: Some(0.01),
            dim: Some(4),
            task: Some(Task::NodeClassification),
            ..Overrides::default()
        })
        .unwrap();
        assert_eq!(cfg.model.lr, 0.01);
        assert_eq!(cfg.model.seed, 1);
        assert_eq!(cfg.model.dims, vec![0, 4, 4, 4]);
        assert_eq!(cfg.model.task, Task::NodeClassification);
    }

    #[test]
    fn layers_and_dim_combine() {
        let mut cfg = RunConfig::default();
        cfg.apply(Overrides {
            layers: Some(3),
            dim: Some(5),
            ..Overrides::default()
        })
        .unwrap();
        assert_eq!(cfg.model.dims, vec![0, 5, 5, 5]);
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        fs::write(&p, r#"{"data": {"edges": "e.csv", "labels": "/abs/l.csv"}, "out": "o"}"#).unwrap();
        let cfg = RunConfig::from_file(&p).unwrap();
        let d = cfg.data.unwrap();
        assert_eq!(d.edges, dir.path().join("e.csv"));
        assert_eq!(d.labels.unwrap(), PathBuf::from("/abs/l.csv"));
        assert_eq!(cfg.out.unwrap(), dir.path().join("o"));
    }

    #[test]
    fn incomplete_runs_are_config_errors() {
        let cfg = RunConfig::default();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.apply(Overrides {
            edges: Some("e.csv".into()),
            out: Some("o".into()),
            task: Some(Task::NodeClassification),
            ..Overrides::default()
        })
        .unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
