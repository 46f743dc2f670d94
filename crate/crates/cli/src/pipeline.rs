//! The shared clustering pipeline: largest component, spectral embedding,
//! dimension and component selection, mixture fit, hard assignment.
//!
//! `cluster`, `experiment`, and `scatter` all run graphs through this one
//! path so their numbers agree. Randomness is split into fixed streams
//! off the pipeline seed: stream 5 feeds the eigensolver and stream 7 the
//! mixture fits, so changing one stage's consumption never shifts
//! another's.

use anyhow::{bail, Context, Result};
use sgc_core::gmm::{self, GmmModel, GmmOpts};
use sgc_core::graph::{largest_connected_component, Graph};
use sgc_core::labels::VertexLabels;
use sgc_core::model_selection::{profile_likelihood_d, select_k_bic, ElbowReport, KSelectionReport};
use sgc_core::spectral::{
    ase_embed, lse_embed, top_eigenpairs, AdjacencyOp, Embedding, Method, NormalizedAdjacencyOp,
    SolverOpts,
};
use sgc_core::util::derive_seed;

/// Scree length requested when d is chosen automatically.
const SCREE_LEN: usize = 100;

/// What to run: method, manual or automatic d and K, and the seed.
#[derive(Debug, Clone)]
pub struct PipelineSpec {
    pub method: Method,
    /// Embedding dimension; `None` selects by profile likelihood.
    pub d: Option<usize>,
    /// Component count; `None` selects by BIC.
    pub k: Option<usize>,
    /// Largest K tried when selecting automatically.
    pub k_max: usize,
    /// Which elbow of the scree picks d (1 = first).
    pub elbow_index: usize,
    pub seed: u64,
}

/// Everything a command needs to report one pipeline run.
pub struct PipelineResult {
    pub method: Method,
    pub n_original: usize,
    pub n_used: usize,
    pub d: usize,
    pub k: usize,
    /// Present when d was selected automatically.
    pub elbow: Option<ElbowReport>,
    /// Present when K was selected automatically.
    pub selection: Option<KSelectionReport>,
    pub model: GmmModel,
    /// Cluster index per component vertex, aligned with `new_to_old`.
    pub assignments: Vec<u32>,
    /// Component vertex -> original vertex id.
    pub new_to_old: Vec<u32>,
    /// Truth labels restricted to the component, when supplied.
    pub truth_labels: Option<VertexLabels>,
}

/// Run the full pipeline on one graph.
///
/// The graph is restricted to its largest connected component first (a
/// notice is logged when that drops vertices), which the Laplacian
/// embedding needs and which keeps both methods on identical vertex sets.
///
/// # Errors
///
/// Fails when the component is too small to embed, when a manual d or K
/// is out of range, or when any stage of the pipeline fails.
pub fn run_pipeline(
    g: &Graph,
    labels: Option<&VertexLabels>,
    spec: &PipelineSpec,
) -> Result<PipelineResult> {
    let lcc = largest_connected_component(g, labels);
    let n = lcc.graph.n();
    if n < g.n() {
        log::info!(
            "restricted to the largest connected component: {} of {} vertices",
            n,
            g.n()
        );
    }
    if n < 3 {
        bail!("largest connected component has {n} vertices; need at least 3");
    }

    let solver = SolverOpts {
        seed: derive_seed(spec.seed, 5),
        ..SolverOpts::default()
    };

    let (embedding, elbow) = embed_stage(&lcc.graph, spec, &solver)?;
    let d = embedding.d;

    let gmm_opts = GmmOpts {
        seed: derive_seed(spec.seed, 7),
        ..GmmOpts::default()
    };
    let (model, selection) = fit_stage(&embedding, spec, &gmm_opts)?;
    let k = model.k();

    let assignments = gmm::hard_assign(&model, &embedding.x).context("assigning clusters")?;

    Ok(PipelineResult {
        method: spec.method,
        n_original: g.n(),
        n_used: n,
        d,
        k,
        elbow,
        selection,
        model,
        assignments,
        new_to_old: lcc.new_to_old,
        truth_labels: lcc.labels,
    })
}

fn embed_stage(
    g: &Graph,
    spec: &PipelineSpec,
    solver: &SolverOpts,
) -> Result<(Embedding, Option<ElbowReport>)> {
    if let Some(d) = spec.d {
        if d >= g.n() {
            bail!("embedding dimension {d} must be below the component size {}", g.n());
        }
        let embedding = match spec.method {
            Method::Ase => ase_embed(g, d, solver),
            Method::Lse => lse_embed(g, d, solver),
        }
        .with_context(|| format!("embedding ({})", spec.method))?;
        return Ok((embedding, None));
    }

    // Automatic d: one eigensolve covers both the scree and the embedding.
    let m = SCREE_LEN.min(g.n() - 1);
    let pairs = match spec.method {
        Method::Ase => top_eigenpairs(&AdjacencyOp(g), m, solver),
        Method::Lse => {
            let op = NormalizedAdjacencyOp::new(g).context("normalizing the adjacency")?;
            top_eigenpairs(&op, m, solver)
        }
    }
    .with_context(|| format!("computing the scree ({})", spec.method))?;

    let scree: Vec<f64> = pairs.values.iter().map(|v| v.abs()).collect();
    let report = profile_likelihood_d(&scree, spec.elbow_index).context("selecting d")?;
    let embedding = Embedding::from_eigenpairs(&pairs, report.chosen_d, spec.method)
        .context("assembling the embedding")?;
    Ok((embedding, Some(report)))
}

fn fit_stage(
    embedding: &Embedding,
    spec: &PipelineSpec,
    opts: &GmmOpts,
) -> Result<(GmmModel, Option<KSelectionReport>)> {
    if let Some(k) = spec.k {
        let model = gmm::fit(&embedding.x, k, opts).context("fitting the mixture")?;
        return Ok((model, None));
    }
    let k_hi = spec.k_max.min(embedding.x.nrows());
    let report = select_k_bic(&embedding.x, 1..=k_hi, opts).context("selecting K")?;
    let model = report.chosen_fit().clone();
    Ok((model, Some(report)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sgc_core::sbm::{sample_sbm, SbmParams};

    fn affinity_graph(n: usize, seed: u64) -> (Graph, VertexLabels) {
        let params = SbmParams::new(
            vec![0.5, 0.5],
            vec![vec![0.30, 0.05], vec![0.05, 0.30]],
        )
        .unwrap();
        sample_sbm(&params, n, seed)
    }

    #[test]
    fn manual_d_and_k_skip_selection_reports() {
        let (g, labels) = affinity_graph(300, 11);
        let spec = PipelineSpec {
            method: Method::Ase,
            d: Some(2),
            k: Some(2),
            k_max: 10,
            elbow_index: 1,
            seed: 5,
        };
        let result = run_pipeline(&g, Some(&labels), &spec).unwrap();
        assert_eq!(result.d, 2);
        assert_eq!(result.k, 2);
        assert!(result.elbow.is_none());
        assert!(result.selection.is_none());
        assert_eq!(result.assignments.len(), result.n_used);
        assert_eq!(result.new_to_old.len(), result.n_used);
        assert!(result.truth_labels.is_some());
    }

    #[test]
    fn auto_selection_produces_reports_and_consistent_shapes() {
        let (g, _) = affinity_graph(300, 12);
        let spec = PipelineSpec {
            method: Method::Lse,
            d: None,
            k: None,
            k_max: 4,
            elbow_index: 1,
            seed: 6,
        };
        let result = run_pipeline(&g, None, &spec).unwrap();
        let elbow = result.elbow.as_ref().unwrap();
        assert_eq!(elbow.chosen_d, result.d);
        let sel = result.selection.as_ref().unwrap();
        assert_eq!(sel.chosen_k, result.k);
        assert!(result.k >= 1 && result.k <= 4);
        assert!(result.truth_labels.is_none());
    }

    #[test]
    fn pipeline_is_deterministic_for_a_fixed_seed() {
        let (g, _) = affinity_graph(250, 13);
        let spec = PipelineSpec {
            method: Method::Ase,
            d: Some(2),
            k: Some(2),
            k_max: 10,
            elbow_index: 1,
            seed: 77,
        };
        let a = run_pipeline(&g, None, &spec).unwrap();
        let b = run_pipeline(&g, None, &spec).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.model.log_lik, b.model.log_lik);
    }

    #[test]
    fn oversized_manual_d_is_rejected() {
        let (g, _) = affinity_graph(50, 14);
        let spec = PipelineSpec {
            method: Method::Ase,
            d: Some(60),
            k: Some(2),
            k_max: 10,
            elbow_index: 1,
            seed: 1,
        };
        assert!(run_pipeline(&g, None, &spec).is_err());
    }
}
