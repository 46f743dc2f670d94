//! Undirected simple graphs in compressed sparse row form, plus ingestion
//! and structural preprocessing: largest connected component extraction,
//! label-induced subgraphs, and averaging of graph collections.
//!
//! Vertices are dense 0-based indices. The adjacency is symmetric, hollow,
//! and binary. Both directions of every edge are stored, so neighbor slices
//! and sparse matvecs need no transposition. All types are immutable after
//! construction and safe to share across threads.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::labels::VertexLabels;

/// Undirected simple graph stored as CSR adjacency.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

/// What an edge-list loader dropped or inferred while reading a file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub lines_parsed: usize,
    pub duplicates_dropped: usize,
    pub loops_dropped: usize,
    /// Vertex count declared by an optional "# n=<count>" header line.
    pub declared_n: Option<usize>,
}

/// Column separator accepted by [`load_edge_list`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeListFormat {
    /// Whitespace or comma, decided per line.
    Auto,
    Whitespace,
    Comma,
}

impl Graph {
    /// Build a graph from distinct undirected edges.
    ///
    /// # Arguments
    /// * `n` - vertex count; every endpoint must be < `n`.
    /// * `edges` - unordered pairs; both (i,j) and (j,i) count as one edge.
    ///
    /// # Errors
    /// Out-of-range endpoints, self-loops, and duplicate edges are rejected.
    /// Callers ingesting dirty data should go through [`load_edge_list`],
    /// which cleans and counts instead.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Graph> {
        let mut keys: Vec<u64> = Vec::with_capacity(edges.len() * 2);
        for &(i, j) in edges {
            if i as usize >= n || j as usize >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({i},{j}) out of range for n={n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidInput(format!("self-loop at vertex {i}")));
            }
            keys.push(((i as u64) << 32) | j as u64);
            keys.push(((j as u64) << 32) | i as u64);
        }
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate edge".into()));
        }
        Ok(Self::from_sorted_directed(n, &keys))
    }

    /// Assemble CSR from sorted, deduplicated directed pairs packed as i<<32|j.
    fn from_sorted_directed(n: usize, keys: &[u64]) -> Graph {
        let mut offsets = vec![0usize; n + 1];
        for &k in keys {
            offsets[(k >> 32) as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let neighbors = keys.iter().map(|&k| k as u32).collect();
        Graph {
            n,
            offsets,
            neighbors,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Neighbors of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// Iterate each undirected edge once, as (i, j) with i < j.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .filter(move |&&j| (i as u32) < j)
                .map(move |&j| (i as u32, j))
        })
    }

    /// Edge density |E| / C(n,2).
    ///
    /// # Errors
    /// Needs n >= 2; density of a smaller graph is undefined.
    pub fn density(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::InvalidInput(format!(
                "density undefined for n={}",
                self.n
            )));
        }
        let pairs = self.n as f64 * (self.n as f64 - 1.0) / 2.0;
        Ok(self.edge_count() as f64 / pairs)
    }

    /// y = A x for the binary adjacency. Slices must have length n.
    pub fn adj_matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for &j in self.neighbors(i) {
                acc += x[j as usize];
            }
            y[i] = acc;
        }
    }

    /// Induced subgraph on `keep` (ascending original vertex ids), relabeled
    /// to 0..keep.len().
    fn induce(&self, keep: &[u32]) -> (Graph, Vec<Option<u32>>) {
        let mut old_to_new: Vec<Option<u32>> = vec![None; self.n];
        for (new, &old) in keep.iter().enumerate() {
            old_to_new[old as usize] = Some(new as u32);
        }
        let mut keys: Vec<u64> = Vec::new();
        for (new, &old) in keep.iter().enumerate() {
            for &nb in self.neighbors(old as usize) {
                if let Some(nb_new) = old_to_new[nb as usize] {
                    keys.push(((new as u64) << 32) | nb_new as u64);
                }
            }
        }
        keys.sort_unstable();
        (
            Graph::from_sorted_directed(keep.len(), &keys),
            old_to_new,
        )
    }
}

/// Result of an operation that restricts a graph to a vertex subset.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: Graph,
    pub labels: Option<VertexLabels>,
    /// Old vertex id -> new id, None for dropped vertices.
    pub old_to_new: Vec<Option<u32>>,
    /// New vertex id -> old id, ascending in old id.
    pub new_to_old: Vec<u32>,
}

/// Load an edge list from a text file.
///
/// Each data line holds two vertex ids (an optional third weight column is
/// ignored); `#` starts a comment. A comment of the form `# n=<count>`
/// declares the vertex count, which otherwise defaults to 1 + max id seen.
/// Duplicate edges and self-loops are dropped and counted in the returned
/// stats rather than treated as errors.
///
/// # Arguments
/// * `path` - UTF-8 text file.
/// * `format` - column separator convention.
///
/// # Returns
/// The graph plus ingestion statistics (dropped duplicates/loops, declared n).
///
/// # Errors
/// I/O failure, malformed lines (reported with line number), ids that do not
/// fit in u32, or a declared n smaller than 1 + max id.
pub fn load_edge_list<P: AsRef<Path>>(
    path: P,
    format: EdgeListFormat,
) -> Result<(Graph, IngestStats)> {
    let path_str = path.as_ref().display().to_string();
    let file = File::open(path.as_ref()).map_err(|source| Error::Io {
        path: path_str.clone(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut stats = IngestStats::default();
    let mut keys: Vec<u64> = Vec::new();
    let mut max_id: Option<u32> = None;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: path_str.clone(),
            source,
        })?;
        let data = match line.find('#') {
            Some(pos) => {
                if let Some(decl) = line[pos + 1..].trim().strip_prefix("n=") {
                    let n: usize = decl.trim().parse().map_err(|_| Error::Parse {
                        path: path_str.clone(),
                        line: lineno,
                        msg: format!("bad vertex count declaration {decl:?}"),
                    })?;
                    stats.declared_n = Some(n);
                }
                &line[..pos]
            }
            None => &line[..],
        };
        let data = data.trim();
        if data.is_empty() {
            continue;
        }
        let mut fields: Vec<&str> = match format {
            EdgeListFormat::Comma => data.split(',').map(str::trim).collect(),
            EdgeListFormat::Whitespace => data.split_whitespace().collect(),
            EdgeListFormat::Auto => {
                if data.contains(',') {
                    data.split(',').map(str::trim).collect()
                } else {
                    data.split_whitespace().collect()
                }
            }
        };
        fields.retain(|f| !f.is_empty());
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                path: path_str.clone(),
                line: lineno,
                msg: format!("expected 2 or 3 columns, got {}", fields.len()),
            });
        }
        let parse_id = |s: &str| -> Result<u32> {
            s.parse::<u64>()
                .ok()
                .and_then(|v| u32::try_from(v).ok())
                .ok_or_else(|| Error::Parse {
                    path: path_str.clone(),
                    line: lineno,
                    msg: format!("bad vertex id {s:?}"),
                })
        };
        let i = parse_id(fields[0])?;
        let j = parse_id(fields[1])?;
        stats.lines_parsed += 1;
        // Loop endpoints still count toward the vertex range.
        max_id = Some(max_id.map_or(i.max(j), |m| m.max(i.max(j))));
        if i == j {
            stats.loops_dropped += 1;
            continue;
        }
        keys.push(((i as u64) << 32) | j as u64);
        keys.push(((j as u64) << 32) | i as u64);
    }

    let implied_n = max_id.map_or(0, |m| m as usize + 1);
    let n = match stats.declared_n {
        Some(decl) if decl < implied_n => {
            return Err(Error::Parse {
                path: path_str,
                line: 0,
                msg: format!("declared n={decl} but edges imply n>={implied_n}"),
            });
        }
        Some(decl) => decl,
        None => implied_n,
    };

    keys.sort_unstable();
    let before = keys.len();
    keys.dedup();
    // Each duplicate undirected edge was pushed twice (once per direction).
    stats.duplicates_dropped = (before - keys.len()) / 2;
    Ok((Graph::from_sorted_directed(n, &keys), stats))
}

/// Extract the largest connected component.
///
/// Ties between equal-size components go to the one containing the smallest
/// original vertex id. Kept vertices are relabeled 0..n' preserving their
/// original relative order; labels, when given, are carried over. An empty
/// graph yields an empty result rather than an error.
pub fn largest_connected_component(g: &Graph, labels: Option<&VertexLabels>) -> Subgraph {
    let mut comp = vec![usize::MAX; g.n()];
    let mut best: Option<(usize, usize, usize)> = None; // (size, min_id, comp_id)
    let mut n_comps = 0;
    let mut queue = Vec::new();
    for start in 0..g.n() {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = n_comps;
        n_comps += 1;
        let mut size = 0usize;
        queue.clear();
        queue.push(start);
        comp[start] = id;
        while let Some(v) = queue.pop() {
            size += 1;
            for &nb in g.neighbors(v) {
                let nb = nb as usize;
                if comp[nb] == usize::MAX {
                    comp[nb] = id;
                    queue.push(nb);
                }
            }
        }
        // start is the smallest id in its component (scan order).
        let cand = (size, start, id);
        best = Some(match best {
            None => cand,
            Some(b) if cand.0 > b.0 => cand,
            Some(b) => b,
        });
    }
    let keep: Vec<u32> = match best {
        None => Vec::new(),
        Some((_, _, id)) => (0..g.n() as u32)
            .filter(|&v| comp[v as usize] == id)
            .collect(),
    };
    let (graph, old_to_new) = g.induce(&keep);
    let labels = labels.map(|l| l.select(&keep));
    Subgraph {
        graph,
        labels,
        old_to_new,
        new_to_old: keep,
    }
}

/// Induced subgraph on the vertices whose label is in `keep`.
///
/// # Errors
/// Any name in `keep` missing from the label alphabet is rejected. An empty
/// `keep` yields an empty graph.
pub fn induced_subgraph_by_labels(
    g: &Graph,
    labels: &VertexLabels,
    keep: &[&str],
) -> Result<Subgraph> {
    if labels.len() != g.n() {
        return Err(Error::Label(format!(
            "labels cover {} vertices, graph has {}",
            labels.len(),
            g.n()
        )));
    }
    let mut keep_idx = vec![false; labels.alphabet().len()];
    for name in keep {
        let idx = labels
            .alphabet_index(name)
            .ok_or_else(|| Error::Label(format!("unknown label {name:?}")))?;
        keep_idx[idx] = true;
    }
    let kept: Vec<u32> = (0..g.n() as u32)
        .filter(|&v| keep_idx[labels.label_index(v as usize)])
        .collect();
    let (graph, old_to_new) = g.induce(&kept);
    let labels = labels.select(&kept);
    Ok(Subgraph {
        graph,
        labels: Some(labels),
        old_to_new,
        new_to_old: kept,
    })
}

/// Symmetric hollow adjacency with nonnegative real weights; the composite
/// average of a graph collection before binarization.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    /// Weight per unordered pair, keyed (i,j) with i < j. Zero weights are
    /// not stored.
    weights: BTreeMap<(u32, u32), f64>,
}

impl WeightedGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let key = (i.min(j) as u32, i.max(j) as u32);
        self.weights.get(&key).copied().unwrap_or(0.0)
    }

    /// Pairs with positive weight, ascending, as ((i, j), w) with i < j.
    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.weights.iter().map(|(&k, &w)| (k, w))
    }

    /// Threshold into a simple graph, keeping pairs with weight > threshold.
    pub fn binarize(&self, threshold: f64) -> Graph {
        let edges: Vec<(u32, u32)> = self
            .weights
            .iter()
            .filter(|&(_, &w)| w > threshold)
            .map(|(&k, _)| k)
            .collect();
        Graph::from_edges(self.n, &edges).expect("weighted graph holds valid simple edges")
    }
}

/// Average a collection of graphs on a shared vertex set: each pair's weight
/// is the fraction of graphs containing that edge.
///
/// # Errors
/// The list must be nonempty and all graphs must agree on n.
pub fn average_graphs(gs: &[Graph]) -> Result<WeightedGraph> {
    let first = gs
        .first()
        .ok_or_else(|| Error::InvalidInput("cannot average an empty graph list".into()))?;
    let n = first.n();
    if let Some(bad) = gs.iter().find(|g| g.n() != n) {
        return Err(Error::InvalidInput(format!(
            "graphs disagree on vertex count: {} vs {n}",
            bad.n()
        )));
    }
    let mut counts: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for g in gs {
        for e in g.edges() {
            *counts.entry(e).or_insert(0) += 1;
        }
    }
    let m = gs.len() as f64;
    let weights = counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / m))
        .collect();
    Ok(WeightedGraph { n, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> std::path::PathBuf {
        use std::sync::atomic::{AtomicUsize, Ordering};
        static SEQ: AtomicUsize = AtomicUsize::new(0);
        let path = std::env::temp_dir().join(format!(
            "sgc-graph-test-{}-{}.txt",
            std::process::id(),
            SEQ.fetch_add(1, Ordering::Relaxed)
        ));
        let mut f = File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn builds_symmetric_hollow_binary_adjacency() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 1), (3, 0)]).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 3);
        for i in 0..4 {
            assert!(!g.has_edge(i, i));
            for j in 0..4 {
                assert_eq!(g.has_edge(i, j), g.has_edge(j, i));
            }
        }
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.degrees(), vec![2, 2, 1, 1]);
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(Graph::from_edges(2, &[(0, 2)]).is_err());
        assert!(Graph::from_edges(2, &[(1, 1)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn loads_plain_edge_list() {
        let path = write_temp("0 1\n1 2\n");
        let (g, stats) = load_edge_list(&path, EdgeListFormat::Auto).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(g.n(), 3);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2) && !g.has_edge(0, 2));
        assert_eq!(stats.duplicates_dropped, 0);
        assert_eq!(stats.loops_dropped, 0);
    }

    #[test]
    fn loader_drops_and_counts_duplicates_and_loops() {
        let path = write_temp("0 1\n1 0\n2 2\n");
        let (g, stats) = load_edge_list(&path, EdgeListFormat::Auto).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(stats.duplicates_dropped, 1);
        assert_eq!(stats.loops_dropped, 1);
    }

    #[test]
    fn loader_handles_empty_file_comments_and_commas() {
        let path = write_temp("");
        let (g, _) = load_edge_list(&path, EdgeListFormat::Auto).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(g.n(), 0);
        assert_eq!(g.edge_count(), 0);

        let path = write_temp("# comment\n0,1\n1,2,0.5\n# n=5\n");
        let (g, stats) = load_edge_list(&path, EdgeListFormat::Auto).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(g.n(), 5);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(stats.declared_n, Some(5));
        assert_eq!(g.degree(4), 0);
    }

    #[test]
    fn loader_reports_malformed_lines_with_position() {
        let path = write_temp("0 1\nnot an edge\n");
        let err = load_edge_list(&path, EdgeListFormat::Auto).unwrap_err();
        std::fs::remove_file(&path).ok();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }

        let path = write_temp("0 1\n# n=1\n");
        assert!(load_edge_list(&path, EdgeListFormat::Auto).is_err());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn lcc_picks_largest_component() {
        // Path 0-1-2 plus edge 3-4.
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        let sub = largest_connected_component(&g, None);
        assert_eq!(sub.graph.n(), 3);
        assert_eq!(sub.new_to_old, vec![0, 1, 2]);
        assert_eq!(sub.old_to_new[3], None);
        assert!(sub.graph.has_edge(0, 1) && sub.graph.has_edge(1, 2));
    }

    #[test]
    fn lcc_tie_goes_to_smallest_min_id_and_is_idempotent() {
        let g = Graph::from_edges(4, &[(2, 3), (0, 1)]).unwrap();
        let sub = largest_connected_component(&g, None);
        assert_eq!(sub.new_to_old, vec![0, 1]);

        let again = largest_connected_component(&sub.graph, None);
        assert_eq!(again.graph.n(), sub.graph.n());
        assert_eq!(again.new_to_old, vec![0, 1]);

        let empty = Graph::from_edges(0, &[]).unwrap();
        let sub = largest_connected_component(&empty, None);
        assert_eq!(sub.graph.n(), 0);
    }

    #[test]
    fn induced_subgraph_restricts_edges() {
        // Triangle with labels [X, X, Y].
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let labels =
            VertexLabels::from_names(vec!["X".into(), "X".into(), "Y".into()]).unwrap();
        let sub = induced_subgraph_by_labels(&g, &labels, &["X"]).unwrap();
        assert_eq!(sub.graph.n(), 2);
        assert_eq!(sub.graph.edge_count(), 1);

        let full = induced_subgraph_by_labels(&g, &labels, &["X", "Y"]).unwrap();
        assert_eq!(full.graph.n(), 3);
        assert_eq!(full.graph.edge_count(), 3);

        assert!(induced_subgraph_by_labels(&g, &labels, &["Z"]).is_err());
        let none = induced_subgraph_by_labels(&g, &labels, &[]).unwrap();
        assert_eq!(none.graph.n(), 0);
    }

    #[test]
    fn averaging_and_binarize_follow_edge_counts() {
        let g1 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let g2 = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();

        let same = average_graphs(&[g1.clone(), g1.clone()]).unwrap();
        assert_eq!(same.weight(0, 1), 1.0);
        assert_eq!(same.weight(1, 2), 1.0);
        assert_eq!(same.weight(0, 2), 0.0);

        let avg = average_graphs(&[g1.clone(), g2]).unwrap();
        assert_eq!(avg.weight(0, 1), 1.0);
        assert_eq!(avg.weight(1, 2), 0.5);
        assert_eq!(avg.weight(0, 2), 0.5);

        let shared_only = avg.binarize(0.6);
        assert_eq!(shared_only.edge_count(), 1);
        assert!(shared_only.has_edge(0, 1));

        // Threshold 0 keeps every pair with positive weight.
        let any = avg.binarize(0.0);
        assert_eq!(any.edge_count(), 3);

        let h = Graph::from_edges(2, &[]).unwrap();
        assert!(average_graphs(&[g1, h]).is_err());
        assert!(average_graphs(&[]).is_err());
    }

    #[test]
    fn degrees_and_density_match_closed_forms() {
        let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
            .unwrap();
        assert_eq!(k4.density().unwrap(), 1.0);
        assert_eq!(k4.degrees(), vec![3, 3, 3, 3]);

        let empty5 = Graph::from_edges(5, &[]).unwrap();
        assert_eq!(empty5.density().unwrap(), 0.0);

        let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(p3.degrees(), vec![1, 2, 1]);
        assert!((p3.density().unwrap() - 2.0 / 3.0).abs() < 1e-15);

        let single = Graph::from_edges(1, &[]).unwrap();
        assert!(single.density().is_err());
    }

    #[test]
    fn matvec_agrees_with_dense_multiplication() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3), (1, 3)]).unwrap();
        let x = [0.5, -1.0, 2.0, 0.25];
        let mut y = [0.0; 4];
        g.adj_matvec(&x, &mut y);
        let mut expect = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                if g.has_edge(i, j) {
                    expect[i] += x[j];
                }
            }
        }
        assert_eq!(y, expect);
    }
}
