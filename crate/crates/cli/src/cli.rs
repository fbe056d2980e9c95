use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Edge node health: synthetic telemetry, boosted-tree training, baseline
/// comparison, Shapley explanations and report plots.
#[derive(Debug, Parser)]
#[command(name = "edgehealth", version)]
pub struct Cli {
    /// Seed for data generation, splits, background sampling and plot jitter.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML run configuration; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled synthetic telemetry CSV.
    Generate(GenerateArgs),
    /// Train a boosted-tree model.
    Train(TrainArgs),
    /// Write per-sample probabilities and labels.
    Predict(PredictArgs),
    /// Score the model, and optionally baselines, on labeled data.
    Evaluate(EvaluateArgs),
    /// Exact Shapley values per sample.
    Explain(ExplainArgs),
    /// Importance, beeswarm and dependence tables with SVG plots.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Evaluate(_) => "evaluate",
            Command::Explain(_) => "explain",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub samples: Option<usize>,
    /// Fraction of abnormal samples, in [0, 1].
    #[arg(long)]
    pub anomaly_rate: Option<f64>,
    /// Hold out this stratified fraction and write it to --test-out.
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long, value_name = "PATH")]
    pub test_out: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled training CSV.
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// Model JSON to write.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Per-round log-loss CSV; defaults to `<out>` with extension `log.csv`.
    #[arg(long, value_name = "PATH")]
    pub log: Option<PathBuf>,
    /// Number of boosting rounds.
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub min_child_hessian: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Knn,
    Nb,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Labeled test CSV.
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// Training CSV the baselines are fitted on.
    #[arg(long, value_name = "PATH")]
    pub train: Option<PathBuf>,
    /// Comma-separated baselines to add.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub baselines: Vec<Baseline>,
    /// Neighbours used by the KNN baseline.
    #[arg(long)]
    pub k: Option<usize>,
    /// Row name of the boosted model.
    #[arg(long)]
    pub name: Option<String>,
    /// Predictions from another tool as NAME=PATH; the CSV needs a
    /// `prediction` column aligned with the test rows.
    #[arg(long, value_name = "NAME=PATH")]
    pub external: Vec<String>,
    #[arg(long, value_name = "DIR")]
    pub outdir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// Background CSV; defaults to rows sampled from --data.
    #[arg(long, value_name = "PATH")]
    pub background: Option<PathBuf>,
    #[arg(long)]
    pub background_size: Option<usize>,
    /// Explain only this row of --data.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// Explanations from `explain`; computed from --data when absent.
    #[arg(long, value_name = "PATH")]
    pub shap: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub background: Option<PathBuf>,
    #[arg(long)]
    pub background_size: Option<usize>,
    /// Feature of the dependence plot.
    #[arg(long)]
    pub dependence_feature: Option<String>,
    /// Feature coloring the dependence plot; picked automatically when absent.
    #[arg(long)]
    pub color_feature: Option<String>,
    #[arg(long, value_name = "DIR")]
    pub outdir: Option<PathBuf>,
}
