//! Command-line surface.
//!
//! Every value flag is optional at the parser level even when the command
//! cannot run without it: a missing value may still be supplied by the
//! config file, and the merge in [`crate::config`] reports what is truly
//! absent. Defaults therefore live in the config layer, not here.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "sgc", version, about = "Spectral graph clustering pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalFlags,

    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every command.
#[derive(Debug, Args)]
pub struct GlobalFlags {
    /// Base random seed; all per-item seeds are derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory the run writes into (created if missing).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for batch loops; 0 means all available cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log filter written to stderr: error, warn, info, debug, or trace.
    #[arg(long, global = true)]
    pub log_level: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph and labels from a stochastic block model.
    Sample(SampleFlags),
    /// Embed, select models for, and cluster one graph.
    Cluster(ClusterFlags),
    /// Project labeled graphs onto a priori block models.
    Project(ProjectFlags),
    /// Monte Carlo two-truths experiment on a four-block model.
    Experiment(ExperimentFlags),
    /// Chernoff-ratio grid over the two-block plane.
    ChernoffMap(ChernoffMapFlags),
    /// Batch model-selection scatter over a graph manifest.
    Scatter(ScatterFlags),
}

impl Command {
    /// Stable command name used in the resolved-config echo.
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Cluster(_) => "cluster",
            Command::Project(_) => "project",
            Command::Experiment(_) => "experiment",
            Command::ChernoffMap(_) => "chernoff-map",
            Command::Scatter(_) => "scatter",
        }
    }
}

#[derive(Debug, Args)]
pub struct SampleFlags {
    /// Block-model parameter file ({"pi": [...], "B": [[...]]}); defaults
    /// to the built-in four-block two-truths model.
    #[arg(long)]
    pub params: Option<PathBuf>,

    /// Number of vertices to sample.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClusterFlags {
    /// Edge-list file; "# n=<count>" headers and comma or whitespace
    /// separators are accepted.
    #[arg(long)]
    pub graph: Option<PathBuf>,

    /// Optional vertex label file for truth comparisons.
    #[arg(long)]
    pub labels: Option<PathBuf>,

    /// Embedding method: ase, lse, or both.
    #[arg(long)]
    pub method: Option<String>,

    /// Embedding dimension: "auto" (profile-likelihood elbow) or a number.
    #[arg(long)]
    pub d: Option<String>,

    /// Mixture component count: "auto" (BIC) or a number.
    #[arg(long)]
    pub k: Option<String>,

    /// Largest K tried when K is auto.
    #[arg(long)]
    pub k_max: Option<usize>,

    /// Which profile-likelihood elbow picks d when d is auto (1 = first).
    #[arg(long)]
    pub elbow: Option<usize>,

    /// Truth merge as "TAG:NAME=BLOCK,BLOCK;..."; repeatable. "TAG:raw"
    /// scores against the unmerged labels.
    #[arg(long = "merge")]
    pub merges: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ProjectFlags {
    /// Edge-list file (single-graph mode; exclusive with --manifest).
    #[arg(long)]
    pub graph: Option<PathBuf>,

    /// Vertex label file (single-graph mode).
    #[arg(long)]
    pub labels: Option<PathBuf>,

    /// Batch manifest CSV with header graph_path,label_path,graph_id;
    /// paths are relative to the manifest's directory.
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    /// Merge as "TAG:NAME=BLOCK,BLOCK;..."; repeatable; defaults to
    /// "raw:raw", the identity projection.
    #[arg(long = "merge")]
    pub merges: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ExperimentFlags {
    /// Four-block fixture JSON (params, block names, both merges);
    /// defaults to the built-in two-truths model.
    #[arg(long)]
    pub fixture: Option<PathBuf>,

    /// Vertices per sampled graph.
    #[arg(long)]
    pub n: Option<usize>,

    /// Number of Monte Carlo trials.
    #[arg(long)]
    pub trials: Option<usize>,

    /// Success threshold on the adjusted Rand index.
    #[arg(long)]
    pub ari_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ChernoffMapFlags {
    /// Grid range for x = min(a,c)/max(a,c), in (0, 1].
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,

    /// Grid range for y = b/max(a,c), positive.
    #[arg(long)]
    pub y_min: Option<f64>,
    #[arg(long)]
    pub y_max: Option<f64>,

    /// Grid points per axis.
    #[arg(long)]
    pub resolution: Option<usize>,

    /// Base scale: max(a,c) of every grid cell's connectivity matrix.
    #[arg(long)]
    pub scale: Option<f64>,

    /// Graph size used for the large-sample limit at each cell.
    #[arg(long)]
    pub n_big: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScatterFlags {
    /// Manifest CSV with header graph_path,label_path,graph_id.
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    /// Largest K tried by BIC selection.
    #[arg(long)]
    pub k_max: Option<usize>,

    /// Which profile-likelihood elbow picks d (1 = first).
    #[arg(long)]
    pub elbow: Option<usize>,

    /// Merge spec scored in the ari_lr column.
    #[arg(long)]
    pub lr_merge: Option<String>,

    /// Merge spec scored in the ari_gw column.
    #[arg(long)]
    pub gw_merge: Option<String>,
}
