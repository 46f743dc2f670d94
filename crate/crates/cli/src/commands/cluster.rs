//! `cluster`: the full pipeline on one graph, one or both methods.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sgc_core::eval::{permutation_test_ari, AriResult, Partition};
use sgc_core::spectral::Method;
use sgc_core::util::derive_seed;

use crate::cli::ClusterFlags;
use crate::config::{parse_choice, Global};
use crate::out;
use crate::pipeline::{run_pipeline, PipelineResult, PipelineSpec};
use crate::Outcome;

/// Permutation replicates behind each reported ARI p-value.
const ARI_PERMUTATIONS: usize = 200;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterParams {
    pub graph: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// "ase", "lse", or "both".
    pub method: String,
    /// "auto" or an explicit embedding dimension.
    pub d: String,
    /// "auto" or an explicit component count.
    pub k: String,
    pub k_max: usize,
    pub elbow: usize,
    /// Truth merges as "TAG:SPEC" entries; empty means score raw labels.
    pub merges: Vec<String>,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            graph: None,
            labels: None,
            method: "both".to_string(),
            d: "auto".to_string(),
            k: "auto".to_string(),
            k_max: 10,
            elbow: 1,
            merges: Vec::new(),
        }
    }
}

impl ClusterParams {
    pub fn overlay(&mut self, flags: ClusterFlags) {
        if let Some(v) = flags.graph {
            self.graph = Some(v);
        }
        if let Some(v) = flags.labels {
            self.labels = Some(v);
        }
        if let Some(v) = flags.method {
            self.method = v;
        }
        if let Some(v) = flags.d {
            self.d = v;
        }
        if let Some(v) = flags.k {
            self.k = v;
        }
        if let Some(v) = flags.k_max {
            self.k_max = v;
        }
        if let Some(v) = flags.elbow {
            self.elbow = v;
        }
        if !flags.merges.is_empty() {
            self.merges = flags.merges;
        }
    }
}

/// Parse a method flag into the list of methods to run.
///
/// # Errors
///
/// Fails on anything but "ase", "lse", or "both".
pub fn parse_methods(raw: &str) -> Result<Vec<Method>> {
    match raw.to_ascii_lowercase().as_str() {
        "ase" => Ok(vec![Method::Ase]),
        "lse" => Ok(vec![Method::Lse]),
        "both" => Ok(vec![Method::Lse, Method::Ase]),
        other => bail!("method must be ase, lse, or both, got {other:?}"),
    }
}

/// The fixed seed stream for a method's pipeline under a base seed.
pub fn method_seed(base: u64, method: Method) -> u64 {
    match method {
        Method::Lse => derive_seed(base, 1),
        Method::Ase => derive_seed(base, 2),
    }
}

#[derive(Serialize)]
struct MethodSummary<'a> {
    method: &'a str,
    n_original: usize,
    n_used: usize,
    d: usize,
    k: usize,
    log_lik: f64,
    converged: bool,
    iterations: usize,
}

#[derive(Serialize)]
struct AriEntry {
    truth: String,
    k_truth: usize,
    result: AriResult,
}

/// Run the pipeline per method and write each method's artifacts into its
/// own subdirectory.
///
/// # Errors
///
/// Any failure is fatal: a missing graph, a bad flag value, or a pipeline
/// error for either method.
pub fn run(global: &Global, params: &ClusterParams) -> Result<Outcome> {
    let graph_path = params
        .graph
        .as_ref()
        .context("no graph file given (flag --graph or config params.graph)")?;
    let methods = parse_methods(&params.method)?;
    let d = parse_choice(&params.d, "d")?;
    let k = parse_choice(&params.k, "k")?;
    if params.elbow == 0 {
        bail!("elbow index counts from 1, got 0");
    }
    let merges = super::parse_merge_args(&params.merges)?;

    let graph = super::load_graph(graph_path)?;
    let labels = match &params.labels {
        Some(path) => Some(super::load_truth_labels(path, &graph)?),
        None => None,
    };

    out::ensure_dir(&global.out_dir)?;
    for &method in &methods {
        let spec = PipelineSpec {
            method,
            d,
            k,
            k_max: params.k_max,
            elbow_index: params.elbow,
            seed: method_seed(global.seed, method),
        };
        let result = run_pipeline(&graph, labels.as_ref(), &spec)
            .with_context(|| format!("clustering with {method}"))?;
        write_method_outputs(global, method, &result, &merges)?;
        log::info!(
            "{method}: n={} d={} k={} log_lik={:.3}",
            result.n_used,
            result.d,
            result.k,
            result.model.log_lik
        );
    }

    out::write_resolved_config(&global.out_dir, "cluster", global, params)?;
    Ok(Outcome::Success)
}

fn write_method_outputs(
    global: &Global,
    method: Method,
    result: &PipelineResult,
    merges: &[super::MergeArg],
) -> Result<()> {
    let dir = global.out_dir.join(method.to_string());
    out::ensure_dir(&dir)?;

    let partition_rows: Vec<String> = result
        .new_to_old
        .iter()
        .zip(&result.assignments)
        .map(|(&old, &cluster)| format!("{old},{cluster}"))
        .collect();
    out::write_csv(&dir.join("partition.csv"), "vertex,cluster", &partition_rows)?;

    out::write_json(
        &dir.join("summary.json"),
        &MethodSummary {
            method: &method.to_string(),
            n_original: result.n_original,
            n_used: result.n_used,
            d: result.d,
            k: result.k,
            log_lik: result.model.log_lik,
            converged: result.model.converged,
            iterations: result.model.iterations,
        },
    )?;
    out::write_json(&dir.join("model.json"), &result.model)?;
    if let Some(elbow) = &result.elbow {
        out::write_json(&dir.join("elbow.json"), elbow)?;
    }
    if let Some(selection) = &result.selection {
        out::write_json(&dir.join("kselect.json"), selection)?;
    }

    if let Some(truth_labels) = &result.truth_labels {
        let clusters = Partition::new(&result.assignments);
        let mut entries = Vec::with_capacity(merges.len());
        for (i, merge) in merges.iter().enumerate() {
            let truth = merge.truth(truth_labels)?;
            let truth_partition = Partition::new(truth.assignments());
            let ari_seed = derive_seed(method_seed(global.seed, method), 20 + i as u64);
            let result = permutation_test_ari(&clusters, &truth_partition, ARI_PERMUTATIONS, ari_seed)
                .with_context(|| format!("scoring against merge {:?}", merge.tag))?;
            entries.push(AriEntry {
                truth: merge.tag.clone(),
                k_truth: truth_partition.k(),
                result,
            });
        }
        out::write_json(&dir.join("ari.json"), &entries)?;
    }
    Ok(())
}
