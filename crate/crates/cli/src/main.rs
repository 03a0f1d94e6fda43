//! `lgcn`: generate synthetic graphs, train Lorentzian GCNs and analyse
//! graphs and embeddings.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data or file error,
//! 3 undefined metric.

mod commands;
mod run_config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lgcn_core::graph::Task;
use lgcn_core::model::Geometry;
use lgcn_core::{Error, Result};

use commands::{AnalyzeArgs, HyperbolicitySetting};
use run_config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "lgcn", version, about = "Lorentzian graph convolutional networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train on a dataset and write metrics, checkpoint, embeddings and report.
    Train(TrainArgs),
    /// Report graph hyperbolicity and, optionally, embedding distortion.
    Analyze(AnalyzeCli),
    /// Write a synthetic dataset as edge, feature and label CSVs.
    Gen(GenArgs),
}

#[derive(Debug, clap::Args)]
struct TrainArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Width of every layer.
    #[arg(long)]
    dim: Option<usize>,
    /// Number of layers.
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    lr: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    dropconnect: Option<f64>,
    /// `lp` (link prediction) or `nc` (node classification).
    #[arg(long, value_parser = parse_task)]
    task: Option<Task>,
    /// `hyperbolic` or `euclidean`.
    #[arg(long, value_parser = parse_geometry)]
    geometry: Option<Geometry>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct AnalyzeCli {
    /// Edge list CSV.
    edges: PathBuf,
    /// `auto`, `exact`, `sampled:<m>` or `none`.
    #[arg(long, default_value = "auto")]
    hyperbolicity: HyperbolicitySetting,
    /// Embedding CSV, one row per node, for the distortion metric.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Curvature of hyperboloid embeddings; without it rows are Euclidean.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for `analysis.json`; the report is printed either way.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct GenArgs {
    /// `tree:DEPTH,BRANCHING` or `blocks:N,P_IN,P_OUT`.
    generator: String,
    /// `onehot`, `noisy:FLIP` or `diffusion:DIM,SIGMA`.
    #[arg(long, default_value = "onehot")]
    features: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    match s {
        "lp" | "link_prediction" => Ok(Task::LinkPrediction),
        "nc" | "node_classification" => Ok(Task::NodeClassification),
        _ => Err(format!("expected lp or nc, got `{s}`")),
    }
}

fn parse_geometry(s: &str) -> std::result::Result<Geometry, String> {
    match s {
        "hyperbolic" => Ok(Geometry::Hyperbolic),
        "euclidean" => Ok(Geometry::Euclidean),
        _ => Err(format!("expected hyperbolic or euclidean, got `{s}`")),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("LGCN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Config(format!("LGCN_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Train(a) => {
            let mut cfg = match &a.config {
                Some(p) => RunConfig::from_file(p)?,
                None => RunConfig::default(),
            };
            cfg.apply(Overrides {
                edges: a.edges,
                features: a.features,
                labels: a.labels,
                out: a.out,
                seed: a.seed,
                dim: a.dim,
                layers: a.layers,
                lr: a.lr,
                dropconnect: a.dropconnect,
                task: a.task,
                geometry: a.geometry,
                max_epochs: a.max_epochs,
                patience: a.patience,
            })?;
            print!("{}", commands::cmd_train(&cfg)?);
        }
        Command::Analyze(a) => {
            print!(
                "{}",
                commands::cmd_analyze(&AnalyzeArgs {
                    edges: a.edges,
                    hyperbolicity: a.hyperbolicity,
                    embeddings: a.embeddings,
                    beta: a.beta,
                    seed: a.seed,
                    out: a.out,
                })?
            );
        }
        Command::Gen(a) => commands::cmd_gen(&a.generator, &a.features, a.seed, &a.out)?,
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Io { .. } | Error::Data(_) => 2,
        Error::UndefinedMetric(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage_error = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage_error { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
