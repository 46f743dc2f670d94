//! `project`: a priori block-model projections of labeled graphs.
//!
//! Each (graph, merge) pair yields the block model fitted from the merged
//! labels; two-block projections additionally get the exploratory-plane
//! coordinates and a structure class. Batch mode emits one CSV row per
//! pair, which is exactly the data a ratio-plane scatter plot needs.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sgc_core::labels::VertexLabels;
use sgc_core::sbm::{
    classify_structure, eda_point, fit_block_model, EdaPoint, SbmParams, StructureClass,
    DEFAULT_RATIO_THRESHOLD,
};

use crate::cli::ProjectFlags;
use crate::config::Global;
use crate::out;
use crate::pool;
use crate::Outcome;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectParams {
    /// Single-graph mode input; exclusive with `manifest`.
    pub graph: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// Batch mode manifest; exclusive with `graph`.
    pub manifest: Option<PathBuf>,
    /// "TAG:SPEC" merge entries; empty means the identity projection.
    pub merges: Vec<String>,
}

impl Default for ProjectParams {
    fn default() -> Self {
        ProjectParams {
            graph: None,
            labels: None,
            manifest: None,
            merges: Vec::new(),
        }
    }
}

impl ProjectParams {
    pub fn overlay(&mut self, flags: ProjectFlags) {
        if let Some(v) = flags.graph {
            self.graph = Some(v);
        }
        if let Some(v) = flags.labels {
            self.labels = Some(v);
        }
        if let Some(v) = flags.manifest {
            self.manifest = Some(v);
        }
        if !flags.merges.is_empty() {
            self.merges = flags.merges;
        }
    }
}

/// One projections.csv row; empty cells where the projection failed or
/// the merged model is not two-block.
struct Row {
    graph_id: String,
    tag: String,
    n: Option<usize>,
    k: Option<usize>,
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    x: Option<f64>,
    y: Option<f64>,
    below_sqrt_curve: Option<bool>,
    class: Option<StructureClass>,
    error: Option<String>,
}

#[derive(Serialize)]
struct ProjectionDoc {
    graph_id: String,
    tag: String,
    n: usize,
    block_sizes: Vec<usize>,
    params: SbmParams,
    eda: Option<EdaPoint>,
    class: Option<StructureClass>,
}

struct ItemOutput {
    rows: Vec<Row>,
    docs: Vec<ProjectionDoc>,
    failures: Vec<(String, String)>,
}

fn class_str(class: StructureClass) -> &'static str {
    match class {
        StructureClass::Affinity => "affinity",
        StructureClass::CorePeriphery => "core-periphery",
        StructureClass::Other => "other",
    }
}

/// Project every (graph, merge) pair and write projections.csv; in
/// single-graph mode each merge also gets a full JSON document.
///
/// # Errors
///
/// Fails on invalid input selection or when every projection failed;
/// partial batch failures produce a failure manifest and exit code 3.
pub fn run(global: &Global, params: &ProjectParams) -> Result<Outcome> {
    let merges = super::parse_merge_args(&params.merges)?;
    let (items, single_mode) = match (&params.graph, &params.manifest) {
        (Some(_), Some(_)) => bail!("--graph and --manifest are mutually exclusive"),
        (Some(graph), None) => {
            let labels = params
                .labels
                .as_ref()
                .context("single-graph mode needs --labels")?;
            let graph_id = graph
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "graph".to_string());
            (
                vec![super::ManifestItem {
                    graph_id,
                    graph_path: graph.clone(),
                    label_path: labels.clone(),
                }],
                true,
            )
        }
        (None, Some(manifest)) => (super::load_manifest(manifest)?, false),
        (None, None) => bail!("give either --graph with --labels or --manifest"),
    };

    out::ensure_dir(&global.out_dir)?;
    let outputs = pool::run_indexed(items.len(), global.threads, |i| {
        project_item(&items[i], &merges)
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut n_ok = 0usize;
    for output in outputs {
        for doc in &output.docs {
            if single_mode {
                let path = global.out_dir.join(format!("projection_{}.json", doc.tag));
                out::write_json(&path, doc)?;
            }
        }
        n_ok += output.rows.iter().filter(|r| r.error.is_none()).count();
        rows.extend(output.rows);
        failures.extend(output.failures);
    }

    let csv_rows: Vec<String> = rows.iter().map(render_row).collect();
    out::write_csv(
        &global.out_dir.join("projections.csv"),
        "graph_id,tag,n,k,a,b,c,x,y,below_sqrt_curve,class,error",
        &csv_rows,
    )?;
    out::write_resolved_config(&global.out_dir, "project", global, params)?;

    if n_ok == 0 {
        out::write_failures(&global.out_dir, &failures)?;
        bail!("every projection failed; see failures.csv");
    }
    if failures.is_empty() {
        Ok(Outcome::Success)
    } else {
        out::write_failures(&global.out_dir, &failures)?;
        log::warn!("{} of {} projections failed", failures.len(), rows.len());
        Ok(Outcome::Partial)
    }
}

fn project_item(item: &super::ManifestItem, merges: &[super::MergeArg]) -> ItemOutput {
    let mut output = ItemOutput {
        rows: Vec::new(),
        docs: Vec::new(),
        failures: Vec::new(),
    };
    let loaded = super::load_graph(&item.graph_path).and_then(|graph| {
        let labels = super::load_truth_labels(&item.label_path, &graph)?;
        Ok((graph, labels))
    });
    let (graph, labels) = match loaded {
        Ok(pair) => pair,
        Err(err) => {
            let chain = super::error_chain(&err);
            for merge in merges {
                output.rows.push(failed_row(item, &merge.tag, &chain));
                output
                    .failures
                    .push((format!("{}/{}", item.graph_id, merge.tag), chain.clone()));
            }
            return output;
        }
    };

    for merge in merges {
        match project_merge(item, &graph, &labels, merge) {
            Ok((row, doc)) => {
                output.rows.push(row);
                output.docs.push(doc);
            }
            Err(err) => {
                let chain = super::error_chain(&err);
                output.rows.push(failed_row(item, &merge.tag, &chain));
                output
                    .failures
                    .push((format!("{}/{}", item.graph_id, merge.tag), chain));
            }
        }
    }
    output
}

fn failed_row(item: &super::ManifestItem, tag: &str, error: &str) -> Row {
    Row {
        graph_id: item.graph_id.clone(),
        tag: tag.to_string(),
        n: None,
        k: None,
        a: None,
        b: None,
        c: None,
        x: None,
        y: None,
        below_sqrt_curve: None,
        class: None,
        error: Some(error.to_string()),
    }
}

fn project_merge(
    item: &super::ManifestItem,
    graph: &sgc_core::graph::Graph,
    labels: &VertexLabels,
    merge: &super::MergeArg,
) -> Result<(Row, ProjectionDoc)> {
    let truth = merge.truth(labels)?;
    let params = fit_block_model(graph, &truth)
        .with_context(|| format!("fitting the {:?} projection", merge.tag))?;
    let k = params.k();

    let (eda, class) = if k == 2 {
        let eda = eda_point(&params)?;
        let class = classify_structure(&params, DEFAULT_RATIO_THRESHOLD)?;
        (Some(eda), Some(class))
    } else {
        (None, None)
    };

    let row = Row {
        graph_id: item.graph_id.clone(),
        tag: merge.tag.clone(),
        n: Some(graph.n()),
        k: Some(k),
        a: (k == 2).then(|| params.b(0, 0)),
        b: (k == 2).then(|| params.b(0, 1)),
        c: (k == 2).then(|| params.b(1, 1)),
        x: eda.map(|e| e.x),
        y: eda.map(|e| e.y),
        below_sqrt_curve: eda.map(|e| e.below_sqrt_curve),
        class,
        error: None,
    };
    let doc = ProjectionDoc {
        graph_id: item.graph_id.clone(),
        tag: merge.tag.clone(),
        n: graph.n(),
        block_sizes: truth.counts(),
        params,
        eda,
        class,
    };
    Ok((row, doc))
}

fn render_row(row: &Row) -> String {
    let mut line = String::new();
    let _ = write!(
        line,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        out::csv_escape(&row.graph_id),
        out::csv_escape(&row.tag),
        row.n.map(|v| v.to_string()).unwrap_or_default(),
        row.k.map(|v| v.to_string()).unwrap_or_default(),
        out::csv_opt_f64(row.a),
        out::csv_opt_f64(row.b),
        out::csv_opt_f64(row.c),
        out::csv_opt_f64(row.x),
        out::csv_opt_f64(row.y),
        row.below_sqrt_curve.map(|v| v.to_string()).unwrap_or_default(),
        row.class.map(class_str).unwrap_or_default(),
        row.error.as_deref().map(out::csv_escape).unwrap_or_default(),
    );
    line
}
