//! Sparse symmetric eigendecomposition and the two spectral embeddings.
//!
//! The solver is a thick-restart Lanczos iteration with full
//! reorthogonalization, driven purely through matrix-vector products on a
//! [`SymOp`]. Memory stays at O(n * krylov_dim); the projected problem is
//! solved densely at each restart, which is cheap because the Krylov
//! dimension is small. For operators of dimension at most
//! [`SolverOpts::dense_cutoff`] (or whenever the Krylov basis would reach the
//! full dimension) a dense eigendecomposition is used instead; the dense path
//! also serves as the test oracle for the iterative one.
//!
//! Both embeddings map vertex i to row i of X = U_d |S_d|^{1/2}, where the
//! d eigenpairs are chosen by largest eigenvalue magnitude: ASE decomposes
//! the adjacency A, LSE the degree-normalized adjacency D^{-1/2} A D^{-1/2}
//! (applied on the fly, never materialized).

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::util::rng_from_seed;

/// Which spectral embedding produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ase,
    Lse,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Ase => "ase",
            Method::Lse => "lse",
        })
    }
}

/// Symmetric linear operator exposed through matvecs.
///
/// Symmetry is the caller's contract; the solver never checks it.
pub trait SymOp {
    fn dim(&self) -> usize;
    /// y = M x. Both slices have length `dim()`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Dense symmetric operator, mainly for tests and small problems.
pub struct DenseOp(pub DMatrix<f64>);

impl SymOp for DenseOp {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.0[(i, j)] * x[j];
            }
            y[i] = acc;
        }
    }
}

/// Binary adjacency of a graph.
pub struct AdjacencyOp<'a>(pub &'a Graph);

impl SymOp for AdjacencyOp<'_> {
    fn dim(&self) -> usize {
        self.0.n()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.adj_matvec(x, y);
    }
}

/// Degree-normalized adjacency D^{-1/2} A D^{-1/2}, applied via rescaling.
pub struct NormalizedAdjacencyOp<'a> {
    g: &'a Graph,
    inv_sqrt_deg: Vec<f64>,
}

impl<'a> NormalizedAdjacencyOp<'a> {
    /// # Errors
    /// Any isolated vertex makes the normalization undefined; callers should
    /// extract the largest connected component first.
    pub fn new(g: &'a Graph) -> Result<NormalizedAdjacencyOp<'a>> {
        let mut inv_sqrt_deg = Vec::with_capacity(g.n());
        for v in 0..g.n() {
            let d = g.degree(v);
            if d == 0 {
                return Err(Error::IsolatedVertex(v));
            }
            inv_sqrt_deg.push(1.0 / (d as f64).sqrt());
        }
        Ok(NormalizedAdjacencyOp { g, inv_sqrt_deg })
    }
}

impl SymOp for NormalizedAdjacencyOp<'_> {
    fn dim(&self) -> usize {
        self.g.n()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.g.n();
        let mut scaled = vec![0.0; n];
        for i in 0..n {
            scaled[i] = x[i] * self.inv_sqrt_deg[i];
        }
        self.g.adj_matvec(&scaled, y);
        for i in 0..n {
            y[i] *= self.inv_sqrt_deg[i];
        }
    }
}

/// Iterative solver configuration.
#[derive(Debug, Clone)]
pub struct SolverOpts {
    /// Residual tolerance: each returned pair satisfies
    /// ||Mv - lambda v|| <= tol * max(1, |lambda|).
    pub tol: f64,
    /// Restart budget per requested eigenpair; total restarts allowed are
    /// `restarts_per_pair * m`.
    pub restarts_per_pair: usize,
    /// Krylov basis size; None picks max(2m+10, m+2).
    pub krylov_dim: Option<usize>,
    /// Problems of dimension <= this are solved densely.
    pub dense_cutoff: usize,
    /// Seed for the random start vector.
    pub seed: u64,
}

impl Default for SolverOpts {
    fn default() -> Self {
        SolverOpts {
            tol: 1e-8,
            restarts_per_pair: 20,
            krylov_dim: None,
            dense_cutoff: 256,
            seed: 0,
        }
    }
}

/// Eigenpairs ordered by descending eigenvalue magnitude.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// n x m; column j pairs with values[j]. Columns have unit norm and the
    /// sign convention that each column's largest-magnitude entry (lowest
    /// index on exact ties) is positive.
    pub vectors: DMatrix<f64>,
    /// Explicit residual norms ||Mv - lambda v|| per returned pair.
    pub residuals: Vec<f64>,
    pub restarts: usize,
}

/// Order eigenvalue indices by descending magnitude. Magnitudes within a
/// relative 1e-12 of each other count as tied; ties prefer the positive
/// eigenvalue, then original order.
fn magnitude_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(a.cmp(&b))
    });
    // Settle near-ties: within each run of near-equal magnitudes, place
    // positive eigenvalues first (stable within sign).
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() {
            let a = values[idx[end - 1]].abs();
            let b = values[idx[end]].abs();
            if (a - b).abs() <= 1e-12 * a.max(b).max(1.0) {
                end += 1;
            } else {
                break;
            }
        }
        idx[start..end].sort_by_key(|&i| values[i] < 0.0);
        start = end;
    }
    idx
}

/// Flip a vector's sign so its largest-magnitude entry is positive; exact
/// magnitude ties go to the lowest index.
fn fix_sign(col: &mut [f64]) {
    let mut best = 0usize;
    let mut best_abs = f64::NEG_INFINITY;
    for (i, &v) in col.iter().enumerate() {
        if v.abs() > best_abs {
            best_abs = v.abs();
            best = i;
        }
    }
    if !col.is_empty() && col[best] < 0.0 {
        for v in col.iter_mut() {
            *v = -*v;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Dense full decomposition, used below the cutoff and as the oracle.
fn dense_top_eigenpairs(op: &dyn SymOp, m: usize) -> EigenPairs {
    let n = op.dim();
    let mut mat = DMatrix::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            mat[(i, j)] = col[i];
        }
    }
    // Symmetrize away accumulation noise before decomposing.
    let mat = (&mat + mat.transpose()) * 0.5;
    let se = mat.clone().symmetric_eigen();
    let vals: Vec<f64> = se.eigenvalues.iter().cloned().collect();
    let order = magnitude_order(&vals);

    let mut values = Vec::with_capacity(m);
    let mut vectors = DMatrix::<f64>::zeros(n, m);
    let mut residuals = Vec::with_capacity(m);
    for (out, &src) in order.iter().take(m).enumerate() {
        let mut v: Vec<f64> = se.eigenvectors.column(src).iter().cloned().collect();
        fix_sign(&mut v);
        let mut mv = vec![0.0; n];
        op.apply(&v, &mut mv);
        let lambda = vals[src];
        let res = (0..n)
            .map(|i| (mv[i] - lambda * v[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        for i in 0..n {
            vectors[(i, out)] = v[i];
        }
        values.push(lambda);
        residuals.push(res);
    }
    EigenPairs {
        values,
        vectors,
        residuals,
        restarts: 0,
    }
}

/// Compute the m eigenpairs of largest magnitude of a symmetric operator.
///
/// # Arguments
/// * `op` - symmetric operator (symmetry is the caller's contract).
/// * `m` - number of eigenpairs, 1 <= m <= dim.
/// * `opts` - tolerances, restart budget, Krylov size, seed.
///
/// # Returns
/// Eigenpairs sorted by descending |lambda| with residual diagnostics.
///
/// # Errors
/// `m` out of range, or failure to reach the residual tolerance within the
/// restart budget (the achieved residuals are reported in the error).
pub fn top_eigenpairs(op: &dyn SymOp, m: usize, opts: &SolverOpts) -> Result<EigenPairs> {
    let n = op.dim();
    if m == 0 || m > n {
        return Err(Error::InvalidInput(format!(
            "requested {m} eigenpairs from an operator of dimension {n}"
        )));
    }
    let p = opts.krylov_dim.unwrap_or((2 * m + 10).max(m + 2)).min(n);
    if n <= opts.dense_cutoff || p >= n {
        return Ok(dense_top_eigenpairs(op, m));
    }

    let max_restarts = opts.restarts_per_pair.saturating_mul(m).max(1);
    let mut rng = rng_from_seed(opts.seed);

    // Krylov basis columns (length n each) and the projected matrix
    // P = V^T M V, built column by column from reorthogonalization
    // coefficients.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(p + 1);
    let mut proj = DMatrix::<f64>::zeros(p, p);

    let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let s = norm(&start);
    for v in start.iter_mut() {
        *v /= s;
    }
    basis.push(start);

    let mut restarts = 0usize;
    loop {
        // Expand the basis to p vectors, recording projections.
        for j in basis.len() - 1..p {
            let mut w = vec![0.0; n];
            op.apply(&basis[j], &mut w);
            for _pass in 0..2 {
                for (i, b) in basis.iter().enumerate().take(j + 1) {
                    let c = dot(b, &w);
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= c * bi;
                    }
                    proj[(i, j)] += c;
                }
            }
            for i in 0..j {
                proj[(j, i)] = proj[(i, j)];
            }
            let mut beta = norm(&w);
            if beta < 1e-14 {
                // Invariant subspace found: continue with a fresh random
                // direction, coupled to nothing.
                beta = 0.0;
                let mut fresh: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
                for _pass in 0..2 {
                    for b in basis.iter() {
                        let c = dot(b, &fresh);
                        for (fi, bi) in fresh.iter_mut().zip(b) {
                            *fi -= c * bi;
                        }
                    }
                }
                let s = norm(&fresh);
                w = fresh.into_iter().map(|x| x / s).collect();
            } else {
                for x in w.iter_mut() {
                    *x /= beta;
                }
            }
            basis.push(w);
        }

        // Ritz pairs of the projected matrix.
        let se = proj.clone().symmetric_eigen();
        let theta: Vec<f64> = se.eigenvalues.iter().cloned().collect();
        let order = magnitude_order(&theta);

        let n_keep = (m + (p - m) / 2).min(p.saturating_sub(1)).max(m);
        let mut ritz: Vec<Vec<f64>> = Vec::with_capacity(n_keep);
        for &src in order.iter().take(n_keep) {
            let w_col = se.eigenvectors.column(src);
            let mut y = vec![0.0; n];
            for (i, b) in basis.iter().enumerate().take(p) {
                let wi = w_col[i];
                if wi != 0.0 {
                    for (yi, bi) in y.iter_mut().zip(b) {
                        *yi += wi * bi;
                    }
                }
            }
            ritz.push(y);
        }

        // Explicit residual check on the m requested pairs.
        let mut worst = 0.0f64;
        let mut converged = true;
        let mut residuals = Vec::with_capacity(m);
        for i in 0..m {
            let lambda = theta[order[i]];
            let mut mv = vec![0.0; n];
            op.apply(&ritz[i], &mut mv);
            let res = (0..n)
                .map(|r| (mv[r] - lambda * ritz[i][r]).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(res);
            if res > opts.tol * lambda.abs().max(1.0) {
                converged = false;
            }
            residuals.push(res);
        }

        if converged {
            let mut values = Vec::with_capacity(m);
            let mut vectors = DMatrix::<f64>::zeros(n, m);
            for (out, y) in ritz.iter_mut().take(m).enumerate() {
                let s = norm(y);
                for v in y.iter_mut() {
                    *v /= s;
                }
                fix_sign(y);
                for (r, &v) in y.iter().enumerate() {
                    vectors[(r, out)] = v;
                }
                values.push(theta[order[out]]);
            }
            return Ok(EigenPairs {
                values,
                vectors,
                residuals,
                restarts,
            });
        }
        restarts += 1;
        if restarts >= max_restarts {
            return Err(Error::NoConvergence {
                restarts,
                worst_residual: worst,
            });
        }

        // Thick restart: keep the best Ritz vectors plus the residual
        // direction. Diagonal Ritz values are preset; the couplings between
        // the kept block and the next basis vector reappear through the
        // recorded reorthogonalization coefficients when expansion resumes.
        let residual_dir = basis.pop().expect("basis holds p+1 vectors");
        basis.truncate(0);
        proj.fill(0.0);
        for (i, mut y) in ritz.into_iter().enumerate() {
            proj[(i, i)] = theta[order[i]];
            let s = norm(&y);
            for v in y.iter_mut() {
                *v /= s;
            }
            basis.push(y);
        }
        basis.push(residual_dir);
    }
}

/// A spectral embedding: row i of `x` is the position of vertex i.
#[derive(Debug, Clone)]
pub struct Embedding {
    /// n x d matrix U_d |S_d|^{1/2}.
    pub x: DMatrix<f64>,
    /// The d retained eigenvalues, descending by magnitude.
    pub eigenvalues: Vec<f64>,
    pub method: Method,
    pub d: usize,
}

impl Embedding {
    /// Build an embedding from already-computed eigenpairs, keeping the
    /// leading d columns. Lets callers that need both a long scree and an
    /// embedding pay for one eigensolve.
    ///
    /// # Errors
    /// `InvalidInput` when d is 0 or exceeds the available pairs.
    pub fn from_eigenpairs(pairs: &EigenPairs, d: usize, method: Method) -> Result<Embedding> {
        if d == 0 || d > pairs.values.len() {
            return Err(Error::InvalidInput(format!(
                "embedding dimension {d} out of range for {} computed pairs",
                pairs.values.len()
            )));
        }
        let n = pairs.vectors.nrows();
        let mut x = DMatrix::<f64>::zeros(n, d);
        for j in 0..d {
            let scale = pairs.values[j].abs().sqrt();
            for i in 0..n {
                x[(i, j)] = pairs.vectors[(i, j)] * scale;
            }
        }
        Ok(Embedding {
            x,
            eigenvalues: pairs.values[..d].to_vec(),
            method,
            d,
        })
    }

    /// CSV with a commented header carrying method and eigenvalues.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let evs: Vec<String> = self.eigenvalues.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!(
            "# method={} d={}\n# eigenvalues={}\n",
            self.method,
            self.d,
            evs.join(";")
        ));
        let cols: Vec<String> = (0..self.d).map(|j| format!("x{j}")).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
        for i in 0..self.x.nrows() {
            let row: Vec<String> = (0..self.d).map(|j| self.x[(i, j)].to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Adjacency spectral embedding: X = U_d |S_d|^{1/2} from the top-d
/// magnitude eigenpairs of A.
///
/// # Errors
/// Empty graph, d out of range, or solver failure.
pub fn ase_embed(g: &Graph, d: usize, opts: &SolverOpts) -> Result<Embedding> {
    if g.n() == 0 {
        return Err(Error::InvalidInput("cannot embed an empty graph".into()));
    }
    if d == 0 || d > g.n() {
        return Err(Error::InvalidInput(format!(
            "embedding dimension {d} out of range for n={}",
            g.n()
        )));
    }
    let op = AdjacencyOp(g);
    let pairs = top_eigenpairs(&op, d, opts)?;
    Embedding::from_eigenpairs(&pairs, d, Method::Ase)
}

/// Laplacian spectral embedding: X = U_d |S_d|^{1/2} from the top-d
/// magnitude eigenpairs of D^{-1/2} A D^{-1/2}.
///
/// # Errors
/// Isolated vertices (run on the largest connected component), empty graph,
/// d out of range, or solver failure.
pub fn lse_embed(g: &Graph, d: usize, opts: &SolverOpts) -> Result<Embedding> {
    if g.n() == 0 {
        return Err(Error::InvalidInput("cannot embed an empty graph".into()));
    }
    if d == 0 || d > g.n() {
        return Err(Error::InvalidInput(format!(
            "embedding dimension {d} out of range for n={}",
            g.n()
        )));
    }
    let op = NormalizedAdjacencyOp::new(g)?;
    let pairs = top_eigenpairs(&op, d, opts)?;
    Embedding::from_eigenpairs(&pairs, d, Method::Lse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn random_sym(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_from_seed(seed);
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.random::<f64>() * 2.0 - 1.0;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    fn iterative_opts(seed: u64) -> SolverOpts {
        SolverOpts {
            dense_cutoff: 0,
            seed,
            ..SolverOpts::default()
        }
    }

    #[test]
    fn identity_operator_has_unit_spectrum() {
        let op = DenseOp(DMatrix::identity(6, 6));
        let pairs = top_eigenpairs(&op, 3, &SolverOpts::default()).unwrap();
        for v in &pairs.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn diagonal_operator_orders_by_magnitude_with_sign() {
        let op = DenseOp(DMatrix::from_diagonal(&nalgebra::dvector![5.0, -4.0, 1.0]));
        let pairs = top_eigenpairs(&op, 2, &SolverOpts::default()).unwrap();
        assert_abs_diff_eq!(pairs.values[0], 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pairs.values[1], -4.0, epsilon = 1e-12);
    }

    #[test]
    fn magnitude_tie_prefers_positive_eigenvalue() {
        let op = DenseOp(DMatrix::from_diagonal(&nalgebra::dvector![-2.0, 2.0, 0.5]));
        let pairs = top_eigenpairs(&op, 3, &SolverOpts::default()).unwrap();
        assert_eq!(pairs.values[0], 2.0);
        assert_eq!(pairs.values[1], -2.0);
    }

    #[test]
    fn iterative_solver_matches_dense_oracle() {
        let n = 50;
        let m = 10;
        for seed in [1u64, 2, 3] {
            let mat = random_sym(n, seed);
            let op = DenseOp(mat.clone());
            let pairs = top_eigenpairs(&op, m, &iterative_opts(seed)).unwrap();
            assert!(pairs.restarts < 200);

            let dense = dense_top_eigenpairs(&op, m);
            for j in 0..m {
                assert_abs_diff_eq!(pairs.values[j], dense.values[j], epsilon = 1e-8);
                for i in 0..n {
                    assert_abs_diff_eq!(
                        pairs.vectors[(i, j)],
                        dense.vectors[(i, j)],
                        epsilon = 1e-6
                    );
                }
            }
            for (j, &res) in pairs.residuals.iter().enumerate() {
                assert!(res <= 1e-8 * pairs.values[j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn solver_is_deterministic_per_seed() {
        let mat = random_sym(60, 9);
        let op = DenseOp(mat);
        let a = top_eigenpairs(&op, 4, &iterative_opts(5)).unwrap();
        let b = top_eigenpairs(&op, 4, &iterative_opts(5)).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn exhausted_restart_budget_reports_residuals() {
        let mat = random_sym(80, 4);
        let op = DenseOp(mat);
        let opts = SolverOpts {
            tol: 1e-30,
            restarts_per_pair: 1,
            dense_cutoff: 0,
            seed: 1,
            ..SolverOpts::default()
        };
        match top_eigenpairs(&op, 3, &opts) {
            Err(Error::NoConvergence { worst_residual, .. }) => {
                assert!(worst_residual > 0.0)
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_requests() {
        let op = DenseOp(DMatrix::identity(4, 4));
        assert!(top_eigenpairs(&op, 0, &SolverOpts::default()).is_err());
        assert!(top_eigenpairs(&op, 5, &SolverOpts::default()).is_err());
    }

    #[test]
    fn complete_graph_ase_matches_known_spectrum() {
        // K_5: top adjacency eigenvalue is 4 with the constant eigenvector,
        // so the first embedding column is sqrt(4)/sqrt(5) everywhere.
        let mut edges = Vec::new();
        for i in 0..5u32 {
            for j in i + 1..5 {
                edges.push((i, j));
            }
        }
        let g = Graph::from_edges(5, &edges).unwrap();
        let emb = ase_embed(&g, 1, &SolverOpts::default()).unwrap();
        assert_abs_diff_eq!(emb.eigenvalues[0], 4.0, epsilon = 1e-10);
        for i in 0..5 {
            assert_abs_diff_eq!(emb.x[(i, 0)], 2.0 / 5.0f64.sqrt(), epsilon = 1e-10);
        }
    }

    #[test]
    fn empty_graph_embeds_to_zero() {
        let g = Graph::from_edges(4, &[]).unwrap();
        let emb = ase_embed(&g, 2, &SolverOpts::default()).unwrap();
        for v in &emb.eigenvalues {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(emb.x.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn lse_leading_column_is_scaled_root_degree() {
        // Kite-ish connected graph; the top normalized-adjacency pair is
        // (1, D^{1/2} 1 / sqrt(2|E|)).
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (3, 4)])
            .unwrap();
        let emb = lse_embed(&g, 2, &SolverOpts::default()).unwrap();
        assert_abs_diff_eq!(emb.eigenvalues[0], 1.0, epsilon = 1e-10);
        let two_m = (2 * g.edge_count()) as f64;
        for v in 0..g.n() {
            let expect = (g.degree(v) as f64 / two_m).sqrt();
            assert_abs_diff_eq!(emb.x[(v, 0)], expect, epsilon = 1e-8);
        }
    }

    #[test]
    fn lse_rejects_isolated_vertices() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        match lse_embed(&g, 1, &SolverOpts::default()) {
            Err(Error::IsolatedVertex(2)) => {}
            other => panic!("expected isolated-vertex error, got {other:?}"),
        }
    }

    #[test]
    fn path_graph_normalized_spectrum_and_tie_rule() {
        // P3 normalized adjacency has eigenvalues {1, 0, -1}; the magnitude
        // tie at 1 resolves to the positive eigenvalue first.
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let emb = lse_embed(&g, 3, &SolverOpts::default()).unwrap();
        assert_abs_diff_eq!(emb.eigenvalues[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(emb.eigenvalues[1], -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(emb.eigenvalues[2], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn normalized_spectrum_lies_in_unit_interval() {
        let mut rng = rng_from_seed(3);
        let mut edges = Vec::new();
        let n = 40u32;
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < 0.15 {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::from_edges(n as usize, &edges).unwrap();
        let lcc = crate::graph::largest_connected_component(&g, None);
        let emb = lse_embed(&lcc.graph, lcc.graph.n(), &SolverOpts::default()).unwrap();
        for v in &emb.eigenvalues {
            assert!(*v >= -1.0 - 1e-8 && *v <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn embedding_is_permutation_equivariant() {
        let mut rng = rng_from_seed(11);
        let n = 12u32;
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < 0.5 {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::from_edges(n as usize, &edges).unwrap();
        // A fixed permutation of the vertices.
        let perm: Vec<u32> = vec![3, 7, 0, 11, 4, 1, 9, 2, 10, 5, 8, 6];
        let p_edges: Vec<(u32, u32)> = edges
            .iter()
            .map(|&(i, j)| (perm[i as usize], perm[j as usize]))
            .collect();
        let gp = Graph::from_edges(n as usize, &p_edges).unwrap();

        let a = ase_embed(&g, 3, &SolverOpts::default()).unwrap();
        let b = ase_embed(&gp, 3, &SolverOpts::default()).unwrap();
        for v in 0..n as usize {
            for j in 0..3 {
                assert_abs_diff_eq!(
                    a.x[(v, j)],
                    b.x[(perm[v] as usize, j)],
                    epsilon = 1e-8
                );
            }
        }
    }

    #[test]
    fn low_rank_operator_reconstructs_from_embedding() {
        // Rank-2 SPD operator: U S U^T with S = diag(3, 1).
        let n = 30;
        let mat = random_sym(n, 21);
        let se = mat.symmetric_eigen();
        let mut rebuilt = DMatrix::<f64>::zeros(n, n);
        let s = [3.0, 1.0];
        for (k, &sv) in s.iter().enumerate() {
            let u = se.eigenvectors.column(k);
            for i in 0..n {
                for j in 0..n {
                    rebuilt[(i, j)] += sv * u[i] * u[j];
                }
            }
        }
        let op = DenseOp(rebuilt.clone());
        let pairs = top_eigenpairs(&op, 2, &SolverOpts::default()).unwrap();
        let mut recon = DMatrix::<f64>::zeros(n, n);
        for k in 0..2 {
            for i in 0..n {
                for j in 0..n {
                    recon[(i, j)] +=
                        pairs.values[k] * pairs.vectors[(i, k)] * pairs.vectors[(j, k)];
                }
            }
        }
        assert!((recon - rebuilt).norm() < 1e-8);
    }

    #[test]
    fn csv_export_carries_method_and_values() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let emb = ase_embed(&g, 2, &SolverOpts::default()).unwrap();
        let csv = emb.to_csv();
        assert!(csv.starts_with("# method=ase d=2\n"));
        assert!(csv.contains("# eigenvalues="));
        assert!(csv.contains("x0,x1"));
        assert_eq!(csv.lines().count(), 3 + 3);
    }
}
