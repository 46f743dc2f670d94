//! `scatter`: batch model selection over a manifest of labeled graphs.
//!
//! Each graph runs through the automatic pipeline (profile-likelihood d,
//! BIC K) once per method, and the chosen dimensions plus ARIs against
//! two configured truth merges land as one CSV row per (graph, method).

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sgc_core::eval::{ari, Partition};
use sgc_core::spectral::Method;
use sgc_core::util::derive_seed;

use crate::cli::ScatterFlags;
use crate::commands::cluster::method_seed;
use crate::config::Global;
use crate::out;
use crate::pipeline::{run_pipeline, PipelineSpec};
use crate::pool;
use crate::Outcome;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterParams {
    pub manifest: Option<PathBuf>,
    pub k_max: usize,
    pub elbow: usize,
    /// Merge spec behind the ari_lr column.
    pub lr_merge: String,
    /// Merge spec behind the ari_gw column.
    pub gw_merge: String,
}

impl Default for ScatterParams {
    fn default() -> Self {
        ScatterParams {
            manifest: None,
            k_max: 10,
            elbow: 1,
            lr_merge: "L=LG,LW;R=RG,RW".to_string(),
            gw_merge: "G=LG,RG;W=LW,RW".to_string(),
        }
    }
}

impl ScatterParams {
    pub fn overlay(&mut self, flags: ScatterFlags) {
        if let Some(v) = flags.manifest {
            self.manifest = Some(v);
        }
        if let Some(v) = flags.k_max {
            self.k_max = v;
        }
        if let Some(v) = flags.elbow {
            self.elbow = v;
        }
        if let Some(v) = flags.lr_merge {
            self.lr_merge = v;
        }
        if let Some(v) = flags.gw_merge {
            self.gw_merge = v;
        }
    }
}

#[derive(Clone)]
struct Row {
    graph_id: String,
    method: Method,
    d_hat: Option<usize>,
    k_hat: Option<usize>,
    ari_lr: Option<f64>,
    ari_gw: Option<f64>,
    error: Option<String>,
}

/// Run the batch and write scatter.csv (one row per graph and method).
///
/// # Errors
///
/// Fails on a missing or malformed manifest, bad merge specs, or when
/// every row failed; partial failures produce a failure manifest and
/// exit code 3.
pub fn run(global: &Global, params: &ScatterParams) -> Result<Outcome> {
    let manifest_path = params
        .manifest
        .as_ref()
        .context("no manifest given (flag --manifest or config params.manifest)")?;
    if params.elbow == 0 {
        bail!("elbow index counts from 1, got 0");
    }
    let lr_merge = super::parse_merge_arg(&format!("lr:{}", params.lr_merge))?;
    let gw_merge = super::parse_merge_arg(&format!("gw:{}", params.gw_merge))?;
    let items = super::load_manifest(manifest_path)?;

    out::ensure_dir(&global.out_dir)?;
    let per_item: Vec<Vec<Row>> = pool::run_indexed(items.len(), global.threads, |i| {
        scatter_item(
            &items[i],
            derive_seed(global.seed, i as u64),
            params,
            &lr_merge,
            &gw_merge,
        )
    });
    let rows: Vec<Row> = per_item.into_iter().flatten().collect();

    let csv_rows: Vec<String> = rows.iter().map(render_row).collect();
    out::write_csv(
        &global.out_dir.join("scatter.csv"),
        "graph_id,method,d_hat,k_hat,ari_lr,ari_gw,error",
        &csv_rows,
    )?;
    out::write_resolved_config(&global.out_dir, "scatter", global, params)?;

    let failures: Vec<(String, String)> = rows
        .iter()
        .filter_map(|r| {
            r.error
                .as_ref()
                .map(|e| (format!("{}/{}", r.graph_id, r.method), e.clone()))
        })
        .collect();
    if failures.len() == rows.len() {
        out::write_failures(&global.out_dir, &failures)?;
        bail!("every scatter row failed; see failures.csv");
    }
    if failures.is_empty() {
        Ok(Outcome::Success)
    } else {
        out::write_failures(&global.out_dir, &failures)?;
        log::warn!("{} of {} scatter rows failed", failures.len(), rows.len());
        Ok(Outcome::Partial)
    }
}

fn scatter_item(
    item: &super::ManifestItem,
    item_seed: u64,
    params: &ScatterParams,
    lr_merge: &super::MergeArg,
    gw_merge: &super::MergeArg,
) -> Vec<Row> {
    let blank = |method: Method| Row {
        graph_id: item.graph_id.clone(),
        method,
        d_hat: None,
        k_hat: None,
        ari_lr: None,
        ari_gw: None,
        error: None,
    };

    let loaded = super::load_graph(&item.graph_path).and_then(|graph| {
        let labels = super::load_truth_labels(&item.label_path, &graph)?;
        Ok((graph, labels))
    });
    let (graph, labels) = match loaded {
        Ok(pair) => pair,
        Err(err) => {
            let chain = super::error_chain(&err);
            return [Method::Lse, Method::Ase]
                .map(|m| {
                    let mut row = blank(m);
                    row.error = Some(chain.clone());
                    row
                })
                .to_vec();
        }
    };

    [Method::Lse, Method::Ase]
        .map(|method| {
            let mut row = blank(method);
            let spec = PipelineSpec {
                method,
                d: None,
                k: None,
                k_max: params.k_max,
                elbow_index: params.elbow,
                seed: method_seed(item_seed, method),
            };
            match run_pipeline(&graph, Some(&labels), &spec) {
                Ok(result) => {
                    row.d_hat = Some(result.d);
                    row.k_hat = Some(result.k);
                    let clusters = Partition::new(&result.assignments);
                    if let Some(truth_labels) = &result.truth_labels {
                        // Each ARI column is best-effort: a merge that does
                        // not fit this graph's alphabet leaves its column
                        // empty without failing the row.
                        for (merge, slot) in
                            [(lr_merge, &mut row.ari_lr), (gw_merge, &mut row.ari_gw)]
                        {
                            match merge.truth(truth_labels).and_then(|t| {
                                ari(&clusters, &Partition::new(t.assignments()))
                                    .map_err(anyhow::Error::new)
                            }) {
                                Ok(result) => *slot = Some(result.ari),
                                Err(err) => log::warn!(
                                    "{}/{}: {} column skipped: {err:#}",
                                    item.graph_id,
                                    method,
                                    merge.tag
                                ),
                            }
                        }
                    }
                }
                Err(err) => row.error = Some(super::error_chain(&err)),
            }
            row
        })
        .to_vec()
}

fn render_row(row: &Row) -> String {
    let mut line = String::new();
    let _ = write!(
        line,
        "{},{},{},{},{},{},{}",
        out::csv_escape(&row.graph_id),
        row.method,
        row.d_hat.map(|v| v.to_string()).unwrap_or_default(),
        row.k_hat.map(|v| v.to_string()).unwrap_or_default(),
        out::csv_opt_f64(row.ari_lr),
        out::csv_opt_f64(row.ari_gw),
        row.error.as_deref().map(out::csv_escape).unwrap_or_default(),
    );
    line
}
