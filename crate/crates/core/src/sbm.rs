//! Stochastic block model parameters, sampling, estimation, and the
//! block-structure taxonomy used throughout the library.
//!
//! An SBM over K blocks is given by membership probabilities pi and a
//! symmetric K x K connectivity matrix B of edge probabilities. Sampling
//! draws memberships iid from pi, then edges independently per vertex pair.
//! Estimation inverts that: given a graph and a labeling, block densities
//! become probability estimates.
//!
//! Merging blocks collapses a K-block model to a coarser one by
//! pi-weighted averaging, which matches what empirical block densities
//! converge to when the fine blocks are pooled. A 2-block model is then
//! classified as affinity (both within-block densities dominate the
//! between-block density) or core-periphery (one block dominates
//! everything), the two regimes whose clusterability differs between the
//! adjacency and Laplacian embeddings.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labels::{MergeMap, VertexLabels};
use crate::util::{derive_seed, rng_from_seed};

/// Validated stochastic block model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SbmParamsRepr", into = "SbmParamsRepr")]
pub struct SbmParams {
    pi: Vec<f64>,
    b: Vec<Vec<f64>>,
}

/// Raw JSON shape: {"pi": [...], "B": [[...], ...]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SbmParamsRepr {
    pi: Vec<f64>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
}

impl TryFrom<SbmParamsRepr> for SbmParams {
    type Error = Error;
    fn try_from(repr: SbmParamsRepr) -> Result<SbmParams> {
        SbmParams::new(repr.pi, repr.b)
    }
}

impl From<SbmParams> for SbmParamsRepr {
    fn from(p: SbmParams) -> SbmParamsRepr {
        SbmParamsRepr { pi: p.pi, b: p.b }
    }
}

impl SbmParams {
    /// Validate and build model parameters.
    ///
    /// # Arguments
    /// * `pi` - block membership probabilities, nonnegative, summing to 1
    ///   within 1e-12.
    /// * `b` - symmetric K x K matrix of edge probabilities in [0, 1].
    ///
    /// # Errors
    /// Dimension mismatch, probabilities out of range, asymmetry, or a
    /// membership vector that does not sum to 1.
    pub fn new(pi: Vec<f64>, b: Vec<Vec<f64>>) -> Result<SbmParams> {
        let k = pi.len();
        if k == 0 {
            return Err(Error::InvalidInput("pi must be nonempty".into()));
        }
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "pi must sum to 1, got {sum}"
            )));
        }
        if pi.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidInput("pi entries must be nonnegative".into()));
        }
        if b.len() != k || b.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidInput(format!(
                "B must be {k}x{k} to match pi"
            )));
        }
        for i in 0..k {
            for j in 0..k {
                let v = b[i][j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidInput(format!(
                        "B[{i}][{j}]={v} outside [0,1]"
                    )));
                }
                if (v - b[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "B is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(SbmParams { pi, b })
    }

    /// Number of blocks.
    pub fn k(&self) -> usize {
        self.pi.len()
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Edge probability between blocks k and l.
    pub fn b(&self, k: usize, l: usize) -> f64 {
        self.b[k][l]
    }

    /// Connectivity matrix as a dense matrix.
    pub fn b_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.k(), self.k(), |i, j| self.b[i][j])
    }

    /// Overall expected edge probability between two independent vertices.
    pub fn expected_edge_probability(&self) -> f64 {
        let k = self.k();
        let mut acc = 0.0;
        for i in 0..k {
            for j in 0..k {
                acc += self.pi[i] * self.pi[j] * self.b[i][j];
            }
        }
        acc
    }
}

/// Sample a graph from an SBM.
///
/// Memberships are drawn iid from pi, then each unordered vertex pair gets
/// an independent Bernoulli edge with the probability of its block pair.
/// Each vertex row consumes its own derived random stream, so results are
/// reproducible regardless of evaluation order.
///
/// # Arguments
/// * `params` - validated model.
/// * `n` - number of vertices.
/// * `seed` - master seed; memberships and rows use derived streams.
///
/// # Returns
/// The sampled graph and the block labels, named "b0".."b{K-1}".
pub fn sample_sbm(params: &SbmParams, n: usize, seed: u64) -> (Graph, VertexLabels) {
    let k = params.k();
    let mut rng = rng_from_seed(derive_seed(seed, 0));
    // Inverse-CDF membership draws.
    let mut cum = Vec::with_capacity(k);
    let mut acc = 0.0;
    for &p in params.pi() {
        acc += p;
        cum.push(acc);
    }
    let assign: Vec<u32> = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            cum.iter().position(|&c| u < c).unwrap_or(k - 1) as u32
        })
        .collect();

    let mut edges: Vec<(u32, u32)> = Vec::new();
    for i in 0..n {
        let mut row_rng = rng_from_seed(derive_seed(seed, 1 + i as u64));
        let zi = assign[i] as usize;
        for j in (i + 1)..n {
            let p = params.b(zi, assign[j] as usize);
            if row_rng.random::<f64>() < p {
                edges.push((i as u32, j as u32));
            }
        }
    }
    let g = Graph::from_edges(n, &edges).expect("sampled edges are valid by construction");
    let alphabet: Vec<String> = (0..k).map(|b| format!("b{b}")).collect();
    let labels = VertexLabels::from_indices(alphabet, assign)
        .expect("sampled assignments are in range");
    (g, labels)
}

/// Estimate SBM parameters from a graph with known block labels.
///
/// # Returns
/// pi-hat from label frequencies and B-hat from block edge densities:
/// within-block pairs use n_k choose 2, between-block pairs n_k * n_l.
///
/// # Errors
/// `DegenerateBlock` if any label class has fewer than 2 members, or a
/// vertex-count mismatch between graph and labels.
pub fn fit_block_model(g: &Graph, labels: &VertexLabels) -> Result<SbmParams> {
    if labels.len() != g.n() {
        return Err(Error::InvalidInput(format!(
            "labels cover {} vertices but the graph has {}",
            labels.len(),
            g.n()
        )));
    }
    let k = labels.alphabet().len();
    let counts = labels.counts();
    for (b, &c) in counts.iter().enumerate() {
        if c < 2 {
            return Err(Error::DegenerateBlock { block: b, size: c });
        }
    }
    let n = g.n() as f64;
    let pi: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();

    let mut edge_tally = vec![vec![0u64; k]; k];
    for (u, v) in g.edges() {
        let a = labels.label_index(u as usize);
        let b = labels.label_index(v as usize);
        edge_tally[a][b] += 1;
        if a != b {
            edge_tally[b][a] += 1;
        }
    }
    let mut b_hat = vec![vec![0.0; k]; k];
    for a in 0..k {
        for c in a..k {
            let pairs = if a == c {
                (counts[a] as f64) * (counts[a] as f64 - 1.0) / 2.0
            } else {
                (counts[a] as f64) * (counts[c] as f64)
            };
            let v = edge_tally[a][c] as f64 / pairs;
            b_hat[a][c] = v;
            b_hat[c][a] = v;
        }
    }
    SbmParams::new(pi, b_hat)
}

/// Collapse blocks of a model into coarser groups by pi-weighted averaging.
///
/// The collapsed probability between groups u and v is
/// sum_{k in u, l in v} pi_k pi_l B_kl / (pi'_u pi'_v), which preserves the
/// overall expected edge probability exactly.
///
/// # Arguments
/// * `params` - fine model.
/// * `groups` - partition of the block indices 0..K.
///
/// # Errors
/// `groups` failing to partition 0..K exactly, or a group with zero total
/// membership probability.
pub fn collapse_blocks(params: &SbmParams, groups: &[Vec<usize>]) -> Result<SbmParams> {
    let k = params.k();
    let mut seen = vec![false; k];
    for g in groups {
        for &b in g {
            if b >= k {
                return Err(Error::InvalidInput(format!(
                    "group refers to block {b} but the model has {k}"
                )));
            }
            if seen[b] {
                return Err(Error::InvalidInput(format!(
                    "block {b} appears in more than one group"
                )));
            }
            seen[b] = true;
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::InvalidInput(
            "groups must cover every block".into(),
        ));
    }
    let ku = groups.len();
    let mut pi_new = vec![0.0; ku];
    for (u, g) in groups.iter().enumerate() {
        pi_new[u] = g.iter().map(|&b| params.pi()[b]).sum();
        if pi_new[u] <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "collapsed group {u} has zero membership probability"
            )));
        }
    }
    let mut b_new = vec![vec![0.0; ku]; ku];
    for (u, gu) in groups.iter().enumerate() {
        for (v, gv) in groups.iter().enumerate() {
            let mut acc = 0.0;
            for &x in gu {
                for &y in gv {
                    acc += params.pi()[x] * params.pi()[y] * params.b(x, y);
                }
            }
            b_new[u][v] = acc / (pi_new[u] * pi_new[v]);
        }
    }
    SbmParams::new(pi_new, b_new)
}

/// Qualitative shape of a 2-block model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructureClass {
    /// Both within-block probabilities dominate the between-block one.
    Affinity,
    /// One block dominates both the other block and the between level.
    CorePeriphery,
    Other,
}

/// Classify a 2-block model with B = [a, b; b, c] by dominance ratios.
///
/// With threshold t: Affinity iff min(a,c) >= t*b; otherwise CorePeriphery
/// iff max(a,c) >= t*b and max(a,c) >= t*min(a,c); otherwise Other. The
/// result is invariant to swapping the two blocks.
///
/// # Errors
/// K != 2 or an all-zero B.
pub fn classify_structure(params: &SbmParams, ratio_threshold: f64) -> Result<StructureClass> {
    if params.k() != 2 {
        return Err(Error::InvalidInput(format!(
            "structure classification needs K=2, got K={}",
            params.k()
        )));
    }
    let (a, b, c) = (params.b(0, 0), params.b(0, 1), params.b(1, 1));
    if a.max(c) <= 0.0 {
        return Err(Error::InvalidInput(
            "cannot classify an all-zero connectivity matrix".into(),
        ));
    }
    let t = ratio_threshold;
    let (lo, hi) = (a.min(c), a.max(c));
    if lo >= t * b {
        Ok(StructureClass::Affinity)
    } else if hi >= t * b && hi >= t * lo {
        Ok(StructureClass::CorePeriphery)
    } else {
        Ok(StructureClass::Other)
    }
}

/// Default dominance threshold for [`classify_structure`].
pub const DEFAULT_RATIO_THRESHOLD: f64 = 2.0;

/// Location of a 2-block model in the affinity / core-periphery plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdaPoint {
    /// min(a,c) / max(a,c).
    pub x: f64,
    /// b / max(a,c).
    pub y: f64,
    /// Whether y < sqrt(x), the positive-definite side of the rank-1 curve.
    pub below_sqrt_curve: bool,
}

/// Summarize a 2-block model as its (x, y) ratio point.
///
/// # Errors
/// K != 2 or max(a,c) = 0.
pub fn eda_point(params: &SbmParams) -> Result<EdaPoint> {
    if params.k() != 2 {
        return Err(Error::InvalidInput(format!(
            "EDA point needs K=2, got K={}",
            params.k()
        )));
    }
    let (a, b, c) = (params.b(0, 0), params.b(0, 1), params.b(1, 1));
    let hi = a.max(c);
    if hi <= 0.0 {
        return Err(Error::InvalidInput(
            "EDA point undefined for an all-zero connectivity matrix".into(),
        ));
    }
    let x = a.min(c) / hi;
    let y = b / hi;
    Ok(EdaPoint {
        x,
        y,
        below_sqrt_curve: y < x.sqrt(),
    })
}

/// The canonical 4-block two-truths model and its two meaningful merges.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoTruthsFixture {
    pub params: SbmParams,
    /// Block names in model order: left/right hemisphere x gray/white.
    pub block_names: Vec<String>,
    /// Names of the left/right merged classes, parallel to `lr_groups`.
    pub lr_names: Vec<String>,
    /// Index groups of the left/right merge.
    pub lr_groups: Vec<Vec<usize>>,
    /// Names of the gray/white merged classes, parallel to `gw_groups`.
    pub gw_names: Vec<String>,
    /// Index groups of the gray/white merge.
    pub gw_groups: Vec<Vec<usize>>,
}

impl TwoTruthsFixture {
    fn merge_from_groups(&self, names: &[String], groups: &[Vec<usize>]) -> Result<MergeMap> {
        if names.len() != groups.len() {
            return Err(Error::InvalidInput(format!(
                "merge has {} names but {} groups",
                names.len(),
                groups.len()
            )));
        }
        let mut spec = Vec::with_capacity(groups.len());
        for (name, idxs) in names.iter().zip(groups) {
            let mut members = Vec::with_capacity(idxs.len());
            for &i in idxs {
                let block = self.block_names.get(i).ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "merge group references block {i} but only {} blocks exist",
                        self.block_names.len()
                    ))
                })?;
                members.push(block.clone());
            }
            spec.push((name.clone(), members));
        }
        MergeMap::new(spec)
    }

    /// Left/Right merge over the named block alphabet.
    ///
    /// # Errors
    ///
    /// Fails if the group indices fall outside the block list or the groups
    /// do not partition it, which can only happen for hand-edited fixtures.
    pub fn lr_merge(&self) -> Result<MergeMap> {
        self.merge_from_groups(&self.lr_names, &self.lr_groups)
    }

    /// Gray/White merge over the named block alphabet.
    ///
    /// # Errors
    ///
    /// Same conditions as [`TwoTruthsFixture::lr_merge`].
    pub fn gw_merge(&self) -> Result<MergeMap> {
        self.merge_from_groups(&self.gw_names, &self.gw_groups)
    }

    /// Rename sampled block labels ("b0"..) to the fixture's block names.
    pub fn named_labels(&self, sampled: &VertexLabels) -> Result<VertexLabels> {
        let names: Vec<&str> = self.block_names.iter().map(|s| s.as_str()).collect();
        sampled.rename_alphabet(&names)
    }
}

/// Build the canonical 4-block fixture.
///
/// Blocks are ordered [LG, LW, RG, RW] with membership [0.28, 0.22, 0.28,
/// 0.22]. The connectivity is hemisphere-symmetric: white matter is dense
/// both within and across hemispheres while gray matter is sparse, so the
/// left/right merge collapses to an affinity model and the gray/white merge
/// to a core-periphery model. The numbers were tuned so that both merged
/// classifications hold, the Chernoff ratio favors the Laplacian embedding
/// for left/right and the adjacency embedding for gray/white, and a
/// two-dimensional two-component clustering pipeline recovers each merge
/// from samples at n around 4000.
pub fn two_truths_fixture() -> TwoTruthsFixture {
    // (within, cross) probabilities per tissue pair.
    let gg_w = 0.0727;
    let gg_x = 0.0035;
    let gw_w = 0.0805;
    let gw_x = 0.0296;
    let ww_w = 0.3278;
    let ww_x = 0.2185;
    let b = vec![
        vec![gg_w, gw_w, gg_x, gw_x],
        vec![gw_w, ww_w, gw_x, ww_x],
        vec![gg_x, gw_x, gg_w, gw_w],
        vec![gw_x, ww_x, gw_w, ww_w],
    ];
    let pi = vec![0.28, 0.22, 0.28, 0.22];
    TwoTruthsFixture {
        params: SbmParams::new(pi, b).expect("fixture parameters are valid"),
        block_names: vec!["LG".into(), "LW".into(), "RG".into(), "RW".into()],
        lr_names: vec!["L".into(), "R".into()],
        lr_groups: vec![vec![0, 1], vec![2, 3]],
        gw_names: vec!["G".into(), "W".into()],
        gw_groups: vec![vec![0, 2], vec![1, 3]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_block(a: f64, b: f64, c: f64) -> SbmParams {
        SbmParams::new(vec![0.5, 0.5], vec![vec![a, b], vec![b, c]]).unwrap()
    }

    #[test]
    fn params_validation_rejects_bad_inputs() {
        assert!(SbmParams::new(vec![0.6, 0.5], vec![vec![0.1, 0.1], vec![0.1, 0.1]]).is_err());
        assert!(SbmParams::new(vec![0.5, 0.5], vec![vec![0.1, 0.2], vec![0.3, 0.1]]).is_err());
        assert!(SbmParams::new(vec![0.5, 0.5], vec![vec![1.1, 0.1], vec![0.1, 0.1]]).is_err());
        assert!(SbmParams::new(vec![0.5, 0.5], vec![vec![0.1, 0.1]]).is_err());
        assert!(SbmParams::new(vec![1.0], vec![vec![0.3]]).is_ok());
    }

    #[test]
    fn params_json_round_trip_uses_capital_b() {
        let p = two_block(0.4, 0.1, 0.3);
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"B\""));
        assert!(json.contains("\"pi\""));
        let back: SbmParams = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);
        // Validation runs on deserialize too.
        let bad = r#"{"pi":[0.5,0.5],"B":[[0.1,0.9],[0.2,0.1]]}"#;
        assert!(serde_json::from_str::<SbmParams>(bad).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_matches_density() {
        let er = SbmParams::new(vec![1.0], vec![vec![0.3]]).unwrap();
        let n = 400;
        let (g1, l1) = sample_sbm(&er, n, 42);
        let (g2, _) = sample_sbm(&er, n, 42);
        assert_eq!(g1.edge_count(), g2.edge_count());
        assert_eq!(l1.len(), n);
        // Density within 3 standard errors of p.
        let pairs = (n * (n - 1) / 2) as f64;
        let se = (0.3 * 0.7 / pairs).sqrt();
        assert!((g1.density().unwrap() - 0.3).abs() < 3.0 * se);
    }

    #[test]
    fn sampling_respects_membership_probabilities() {
        let p = SbmParams::new(
            vec![0.7, 0.3],
            vec![vec![0.1, 0.1], vec![0.1, 0.1]],
        )
        .unwrap();
        let (_, labels) = sample_sbm(&p, 2000, 11);
        let counts = labels.counts();
        let se = (0.7f64 * 0.3 * 2000.0).sqrt();
        assert!((counts[0] as f64 - 1400.0).abs() < 4.0 * se);
        assert_eq!(labels.alphabet(), &["b0".to_string(), "b1".to_string()]);
    }

    #[test]
    fn fit_recovers_sampling_parameters() {
        let truth = two_block(0.30, 0.05, 0.20);
        let n = 1200;
        let (g, labels) = sample_sbm(&truth, n, 7);
        let fitted = fit_block_model(&g, &labels).unwrap();
        let counts = labels.counts();
        for a in 0..2 {
            for c in a..2 {
                let pairs = if a == c {
                    counts[a] as f64 * (counts[a] as f64 - 1.0) / 2.0
                } else {
                    counts[a] as f64 * counts[c] as f64
                };
                let p = truth.b(a, c);
                let se = (p * (1.0 - p) / pairs).sqrt();
                assert!(
                    (fitted.b(a, c) - p).abs() < 4.0 * se,
                    "B[{a}][{c}] off: {} vs {p}",
                    fitted.b(a, c)
                );
            }
        }
    }

    #[test]
    fn fit_rejects_blocks_smaller_than_two() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let labels = VertexLabels::from_indices(
            vec!["a".into(), "b".into()],
            vec![0, 0, 1],
        )
        .unwrap();
        match fit_block_model(&g, &labels) {
            Err(Error::DegenerateBlock { block: 1, size: 1 }) => {}
            other => panic!("expected degenerate block, got {other:?}"),
        }
    }

    #[test]
    fn collapse_preserves_expected_edge_probability() {
        let fx = two_truths_fixture();
        let before = fx.params.expected_edge_probability();
        for groups in [&fx.lr_groups, &fx.gw_groups] {
            let merged = collapse_blocks(&fx.params, groups).unwrap();
            assert_abs_diff_eq!(
                merged.expected_edge_probability(),
                before,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn collapse_validates_partition() {
        let fx = two_truths_fixture();
        assert!(collapse_blocks(&fx.params, &[vec![0, 1], vec![2]]).is_err());
        assert!(collapse_blocks(&fx.params, &[vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(collapse_blocks(&fx.params, &[vec![0, 1], vec![2, 4]]).is_err());
    }

    #[test]
    fn classify_matches_dominance_rules() {
        let t = DEFAULT_RATIO_THRESHOLD;
        assert_eq!(
            classify_structure(&two_block(0.4, 0.05, 0.4), t).unwrap(),
            StructureClass::Affinity
        );
        assert_eq!(
            classify_structure(&two_block(0.4, 0.05, 0.06), t).unwrap(),
            StructureClass::CorePeriphery
        );
        assert_eq!(
            classify_structure(&two_block(0.2, 0.2, 0.2), t).unwrap(),
            StructureClass::Other
        );
    }

    #[test]
    fn classify_is_invariant_to_block_swap() {
        let t = DEFAULT_RATIO_THRESHOLD;
        let p = two_block(0.06, 0.05, 0.4);
        let q = two_block(0.4, 0.05, 0.06);
        assert_eq!(
            classify_structure(&p, t).unwrap(),
            classify_structure(&q, t).unwrap()
        );
    }

    #[test]
    fn eda_point_matches_ratio_definitions() {
        let er = eda_point(&two_block(0.2, 0.2, 0.2)).unwrap();
        assert_abs_diff_eq!(er.x, 1.0);
        assert_abs_diff_eq!(er.y, 1.0);
        assert!(!er.below_sqrt_curve);

        let p = eda_point(&two_block(0.4, 0.1, 0.2)).unwrap();
        assert_abs_diff_eq!(p.x, 0.5);
        assert_abs_diff_eq!(p.y, 0.25);
        assert!(p.below_sqrt_curve);

        let z = eda_point(&two_block(0.3, 0.0, 0.1)).unwrap();
        assert_abs_diff_eq!(z.y, 0.0);
    }

    #[test]
    fn eda_point_is_scale_invariant() {
        let p = eda_point(&two_block(0.4, 0.1, 0.2)).unwrap();
        let q = eda_point(&two_block(0.2, 0.05, 0.1)).unwrap();
        assert_eq!(p.x, q.x);
        assert_eq!(p.y, q.y);
    }

    #[test]
    fn fixture_merges_classify_as_designed() {
        let fx = two_truths_fixture();
        assert_eq!(fx.params.pi(), &[0.28, 0.22, 0.28, 0.22]);
        let lr = collapse_blocks(&fx.params, &fx.lr_groups).unwrap();
        let gw = collapse_blocks(&fx.params, &fx.gw_groups).unwrap();
        assert_eq!(
            classify_structure(&lr, DEFAULT_RATIO_THRESHOLD).unwrap(),
            StructureClass::Affinity
        );
        assert_eq!(
            classify_structure(&gw, DEFAULT_RATIO_THRESHOLD).unwrap(),
            StructureClass::CorePeriphery
        );
    }

    #[test]
    fn fixture_merge_maps_apply_to_named_labels() {
        let fx = two_truths_fixture();
        let (_, sampled) = sample_sbm(&fx.params, 200, 3);
        let named = fx.named_labels(&sampled).unwrap();
        let names: Vec<String> = ["LG", "LW", "RG", "RW"].iter().map(|s| s.to_string()).collect();
        assert_eq!(named.alphabet(), names.as_slice());
        let lr = fx.lr_merge().unwrap().apply(&named).unwrap();
        assert_eq!(lr.alphabet(), &["L".to_string(), "R".to_string()]);
        let gw = fx.gw_merge().unwrap().apply(&named).unwrap();
        assert_eq!(gw.alphabet(), &["G".to_string(), "W".to_string()]);
        // The two merges agree with the index groups.
        for v in 0..200 {
            let fine = sampled.label_index(v);
            let want_lr = fx.lr_groups.iter().position(|g| g.contains(&fine)).unwrap();
            assert_eq!(lr.label_index(v), want_lr);
        }
    }

    #[test]
    fn fixture_round_trips_through_json() {
        let fx = two_truths_fixture();
        let json = serde_json::to_string_pretty(&fx).unwrap();
        let back: TwoTruthsFixture = serde_json::from_str(&json).unwrap();
        assert_eq!(back.params, fx.params);
        assert_eq!(back.block_names, fx.block_names);
        assert_eq!(back.lr_groups, fx.lr_groups);
        assert_eq!(back.gw_groups, fx.gw_groups);
        assert!(back.lr_merge().is_ok());
        // Out-of-range group indices are caught when building the merge.
        let mut bad = fx.clone();
        bad.gw_groups = vec![vec![0, 7], vec![1, 3]];
        assert!(bad.gw_merge().is_err());
    }
}
