//! The six subcommands and their shared input helpers.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sgc_core::graph::{load_edge_list, EdgeListFormat, Graph};
use sgc_core::labels::{load_labels, MergeMap, VertexLabels};

pub mod chernoff_map;
pub mod cluster;
pub mod experiment;
pub mod project;
pub mod sample;
pub mod scatter;

/// A truth labeling to score against: a tag plus either the identity
/// ("raw") or a block merge.
#[derive(Debug, Clone)]
pub struct MergeArg {
    pub tag: String,
    /// `None` is the identity; otherwise a parsed merge map.
    pub merge: Option<MergeMap>,
}

/// Parse a repeatable "TAG:SPEC" merge flag, where SPEC is either "raw"
/// or a merge like "L=LG,LW;R=RG,RW".
///
/// # Errors
///
/// Fails on a missing tag separator, an empty tag, or a bad merge spec.
pub fn parse_merge_arg(raw: &str) -> Result<MergeArg> {
    let (tag, spec) = raw
        .split_once(':')
        .with_context(|| format!("merge {raw:?} is not of the form TAG:SPEC"))?;
    if tag.is_empty() {
        bail!("merge {raw:?} has an empty tag");
    }
    let merge = if spec.eq_ignore_ascii_case("raw") {
        None
    } else {
        Some(MergeMap::parse(spec).with_context(|| format!("parsing merge {tag:?}"))?)
    };
    Ok(MergeArg {
        tag: tag.to_string(),
        merge,
    })
}

/// Parse every merge flag, defaulting to the identity labeling.
///
/// # Errors
///
/// Fails on the first malformed flag or on duplicate tags.
pub fn parse_merge_args(raw: &[String]) -> Result<Vec<MergeArg>> {
    if raw.is_empty() {
        return Ok(vec![MergeArg {
            tag: "raw".to_string(),
            merge: None,
        }]);
    }
    let mut merges = Vec::with_capacity(raw.len());
    for arg in raw {
        merges.push(parse_merge_arg(arg)?);
    }
    for (i, m) in merges.iter().enumerate() {
        if merges[..i].iter().any(|other| other.tag == m.tag) {
            bail!("duplicate merge tag {:?}", m.tag);
        }
    }
    Ok(merges)
}

impl MergeArg {
    /// The truth labeling this argument denotes for `labels`.
    ///
    /// # Errors
    ///
    /// Fails when the merge does not exactly partition the label alphabet.
    pub fn truth(&self, labels: &VertexLabels) -> Result<VertexLabels> {
        match &self.merge {
            None => Ok(labels.clone()),
            Some(m) => m
                .apply(labels)
                .with_context(|| format!("applying merge {:?}", self.tag)),
        }
    }
}

/// Load an edge list, logging what the parser dropped.
///
/// # Errors
///
/// Fails on unreadable or malformed files.
pub fn load_graph(path: &Path) -> Result<Graph> {
    let (graph, stats) = load_edge_list(path, EdgeListFormat::Auto)
        .with_context(|| format!("loading graph {}", path.display()))?;
    if stats.duplicates_dropped > 0 || stats.loops_dropped > 0 {
        log::info!(
            "{}: dropped {} duplicate and {} self-loop edges",
            path.display(),
            stats.duplicates_dropped,
            stats.loops_dropped
        );
    }
    log::debug!(
        "{}: {} vertices, {} edges",
        path.display(),
        graph.n(),
        graph.edge_count()
    );
    Ok(graph)
}

/// Load a label file sized to a graph.
///
/// # Errors
///
/// Fails on unreadable files or a vertex count mismatch.
pub fn load_truth_labels(path: &Path, g: &Graph) -> Result<VertexLabels> {
    load_labels(path, g.n()).with_context(|| format!("loading labels {}", path.display()))
}

/// One entry of a batch manifest.
#[derive(Debug, Clone)]
pub struct ManifestItem {
    pub graph_id: String,
    pub graph_path: PathBuf,
    pub label_path: PathBuf,
}

/// Parse a batch manifest: a CSV with the exact header
/// `graph_path,label_path,graph_id`, paths relative to the manifest's
/// directory. Quoting is not supported; paths must not contain commas.
///
/// # Errors
///
/// Fails on a wrong header, short rows, duplicate ids, or an empty body.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestItem>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading manifest {}", path.display()))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) if line.trim().is_empty() => continue,
            Some((_, line)) => break line.trim(),
            None => bail!("manifest {} is empty", path.display()),
        }
    };
    if header != "graph_path,label_path,graph_id" {
        bail!(
            "manifest {} must start with header graph_path,label_path,graph_id, got {header:?}",
            path.display()
        );
    }
    let mut items: Vec<ManifestItem> = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 || fields.iter().any(|f| f.trim().is_empty()) {
            bail!(
                "manifest {} line {}: expected graph_path,label_path,graph_id",
                path.display(),
                idx + 1
            );
        }
        let item = ManifestItem {
            graph_id: fields[2].trim().to_string(),
            graph_path: base.join(fields[0].trim()),
            label_path: base.join(fields[1].trim()),
        };
        if items.iter().any(|other| other.graph_id == item.graph_id) {
            bail!(
                "manifest {} line {}: duplicate graph_id {:?}",
                path.display(),
                idx + 1,
                item.graph_id
            );
        }
        items.push(item);
    }
    if items.is_empty() {
        bail!("manifest {} has a header but no rows", path.display());
    }
    Ok(items)
}

/// Render an error chain on one line for failure manifests.
pub fn error_chain(err: &anyhow::Error) -> String {
    format!("{err:#}")
}
