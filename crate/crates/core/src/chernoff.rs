//! Chernoff information between multivariate Gaussians and the analysis
//! built on it: the adjacency/Laplacian Chernoff ratio for 2-block models,
//! empirical estimation of large-sample embedding mixture parameters, Monte
//! Carlo KL divergence between Gaussian mixtures, and the exhaustive
//! bipartition scan that ranks the meaningful merges of a 4-block model.
//!
//! The Chernoff exponent between two Gaussians is sup over t in (0,1) of
//!
//! h(t) = t(1-t)/2 (mu1-mu2)' Sigma_t^{-1} (mu1-mu2)
//!        + 1/2 log(|Sigma_t| / (|Sigma1|^t |Sigma2|^{1-t}))
//!
//! with Sigma_t = t Sigma1 + (1-t) Sigma2. All determinants go through
//! Cholesky factors, so the routine never forms an explicit inverse and
//! fails loudly when a blend is numerically singular. The maximization runs
//! a coarse 101-point grid followed by golden-section refinement, which
//! handles the mild multimodality unequal covariances can produce.
//!
//! Limit mixture parameters are estimated empirically: sample one large
//! graph, embed it, and take per-block sample moments. Covariances are kept
//! at the raw scale of the embedded rows for both methods (they shrink like
//! 1/n as the graph grows) and the common scale factor is recorded, so
//! ratios between methods compare like with like.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sbm::{sample_sbm, SbmParams};
use crate::spectral::{ase_embed, lse_embed, Method, SolverOpts};
use crate::util::{derive_seed, log_sum_exp, rng_from_seed};

/// Stopping width for the golden-section search over t.
pub const DEFAULT_OPT_TOL: f64 = 1e-8;
/// Diagonal added to a sample covariance that fails to factor, before the
/// block is declared degenerate.
pub const COV_REG_FLOOR: f64 = 1e-12;
/// Default Monte Carlo sample count for mixture KL estimates.
pub const DEFAULT_KL_SAMPLES: usize = 200_000;
/// Log-densities below this are clamped during KL estimation; hitting the
/// clamp is reported as a warning on the estimate.
pub const LOG_DENSITY_FLOOR: f64 = -700.0;

/// Multivariate normal distribution with a symmetric positive-definite
/// covariance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl Gaussian {
    /// Validate dimensions, symmetry, and positive-definiteness. The stored
    /// covariance is symmetrized exactly as (C + C')/2 after the check, so
    /// downstream blends stay symmetric to the bit.
    ///
    /// # Errors
    /// `InvalidInput` on shape mismatch or asymmetry; `DegenerateGaussian`
    /// when the covariance has no Cholesky factorization.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Gaussian> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::InvalidInput(format!(
                "covariance is {}x{} but the mean has dimension {d}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let scale = 1.0 + cov.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..d {
            for j in (i + 1)..d {
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-9 * scale {
                    return Err(Error::InvalidInput(format!(
                        "covariance is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let sym = (&cov + cov.transpose()) * 0.5;
        if Cholesky::new(sym.clone()).is_none() {
            return Err(Error::DegenerateGaussian(
                "covariance is not positive definite".to_string(),
            ));
        }
        Ok(Gaussian { mean, cov: sym })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

fn spd_factor(cov: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(cov.clone())
        .ok_or_else(|| Error::DegenerateGaussian(format!("{what} is numerically singular")))
}

fn log_det(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|v| v.ln())
        .sum::<f64>()
}

/// h(t) without the open-interval check, so grid endpoints can be sampled;
/// the formula itself is well defined on [0,1] and vanishes at both ends.
fn h_raw(t: f64, f1: &Gaussian, f2: &Gaussian) -> Result<f64> {
    let s = 1.0 - t;
    let sigma_t = &f1.cov * t + &f2.cov * s;
    let chol_t = spd_factor(&sigma_t, "blended covariance")?;
    let chol_1 = spd_factor(&f1.cov, "first covariance")?;
    let chol_2 = spd_factor(&f2.cov, "second covariance")?;
    let dmu = &f1.mean - &f2.mean;
    let quad = dmu.dot(&chol_t.solve(&dmu));
    let log_det_mix = t * log_det(&chol_1) + s * log_det(&chol_2);
    Ok(t * s / 2.0 * quad + 0.5 * (log_det(&chol_t) - log_det_mix))
}

/// Chernoff exponent integrand h(t) between two Gaussians.
///
/// # Arguments
/// * `t` - blend parameter, strictly inside (0,1)
///
/// # Returns
/// A nonnegative value; zero for all t exactly when the distributions
/// coincide. Swapping the two distributions mirrors the curve around 1/2.
///
/// # Errors
/// `InvalidInput` for t outside (0,1) or mismatched dimensions;
/// `DegenerateGaussian` when a covariance or the blend fails to factor.
pub fn h_t(t: f64, f1: &Gaussian, f2: &Gaussian) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidInput(format!(
            "blend parameter must lie in (0,1), got {t}"
        )));
    }
    if f1.dim() != f2.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            f1.dim(),
            f2.dim()
        )));
    }
    h_raw(t, f1, f2)
}

/// Chernoff information together with the argmax location.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChernoffResult {
    /// sup over t of h(t); at least every sampled h value.
    pub value: f64,
    /// Location of the maximum in (0,1).
    pub t_star: f64,
    /// The coarse grid samples (t, h(t)) when requested.
    pub h_curve: Option<Vec<(f64, f64)>>,
}

/// Chernoff information with the default tolerance and no sampled curve.
pub fn chernoff_information(f1: &Gaussian, f2: &Gaussian) -> Result<ChernoffResult> {
    chernoff_information_with(f1, f2, DEFAULT_OPT_TOL, false)
}

/// Chernoff information sup_t h(t) by grid seeding plus golden-section
/// refinement.
///
/// # Arguments
/// * `opt_tol` - final bracket width for the search over t
/// * `keep_curve` - retain the 101-point grid in the result
///
/// # Returns
/// The maximum found, guaranteed to dominate every h evaluation made,
/// including the whole seeding grid.
///
/// # Errors
/// `InvalidInput` on bad tolerance or dimension mismatch;
/// `DegenerateGaussian` when h is non-finite anywhere on the grid.
pub fn chernoff_information_with(
    f1: &Gaussian,
    f2: &Gaussian,
    opt_tol: f64,
    keep_curve: bool,
) -> Result<ChernoffResult> {
    if !(opt_tol.is_finite() && opt_tol > 0.0 && opt_tol < 0.5) {
        return Err(Error::InvalidInput(format!(
            "optimization tolerance must lie in (0, 0.5), got {opt_tol}"
        )));
    }
    if f1.dim() != f2.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            f1.dim(),
            f2.dim()
        )));
    }
    let grid_n = 100usize;
    let mut curve = Vec::with_capacity(grid_n + 1);
    let mut best_t = 0.5;
    let mut best_h = f64::NEG_INFINITY;
    let mut best_i = 1;
    for i in 0..=grid_n {
        let t = i as f64 / grid_n as f64;
        let h = h_raw(t, f1, f2)?;
        if !h.is_finite() {
            return Err(Error::DegenerateGaussian(format!(
                "h(t) is non-finite at t={t}"
            )));
        }
        // The argmax must stay inside (0,1), so the endpoints seed the
        // bracket but never the best point.
        if i >= 1 && i <= grid_n - 1 && h > best_h {
            best_h = h;
            best_t = t;
            best_i = i;
        }
        curve.push((t, h));
    }
    let mut a = curve[best_i - 1].0;
    let mut b = curve[best_i + 1].0;
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let eval = |t: f64, best_t: &mut f64, best_h: &mut f64| -> Result<f64> {
        let h = h_raw(t, f1, f2)?;
        if h > *best_h {
            *best_h = h;
            *best_t = t;
        }
        Ok(h)
    };
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut hc = eval(c, &mut best_t, &mut best_h)?;
    let mut hd = eval(d, &mut best_t, &mut best_h)?;
    while b - a > opt_tol {
        if hc >= hd {
            b = d;
            d = c;
            hd = hc;
            c = b - phi * (b - a);
            hc = eval(c, &mut best_t, &mut best_h)?;
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + phi * (b - a);
            hd = eval(d, &mut best_t, &mut best_h)?;
        }
    }
    // Value comparisons cannot place the argmax better than the square root
    // of the floating-point noise, so polish with one parabolic fit at a
    // spacing where h differences are far above that noise.
    let delta = 1e-5;
    if best_t > delta && best_t < 1.0 - delta {
        let h_m = h_raw(best_t - delta, f1, f2)?;
        let h_p = h_raw(best_t + delta, f1, f2)?;
        let denom = h_m - 2.0 * best_h + h_p;
        if denom < 0.0 {
            let shift = 0.5 * delta * (h_m - h_p) / denom;
            if shift.abs() <= delta {
                let t_v = best_t + shift;
                let h_v = h_raw(t_v, f1, f2)?;
                if h_v >= best_h - 1e-12 * (1.0 + best_h.abs()) {
                    best_t = t_v;
                    best_h = h_v.max(best_h);
                }
            }
        }
    }
    Ok(ChernoffResult {
        value: best_h,
        t_star: best_t,
        h_curve: if keep_curve { Some(curve) } else { None },
    })
}

/// Per-block Gaussian parameters of a large-sample embedding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingLimit {
    pub method: Method,
    /// Size of the graph the moments were estimated from.
    pub n_big: usize,
    /// Embedding dimension.
    pub d: usize,
    /// One component per block, in block order.
    pub gaussians: Vec<Gaussian>,
    /// Block membership probabilities.
    pub weights: Vec<f64>,
    /// Covariances are raw sample covariances of the embedded rows, which
    /// carry an implicit 1/n_big; this records n_big so either method's
    /// covariances can be mapped to any other convention. Both methods use
    /// the same convention, which is what cross-method ratios require.
    pub cov_scale: f64,
    /// Realized block sizes in the sampled graph.
    pub block_sizes: Vec<usize>,
}

fn embed_graph(g: &Graph, method: Method, d: usize, seed: u64) -> Result<DMatrix<f64>> {
    let opts = SolverOpts {
        seed,
        ..SolverOpts::default()
    };
    let emb = match method {
        Method::Ase => ase_embed(g, d, &opts)?,
        Method::Lse => lse_embed(g, d, &opts)?,
    };
    Ok(emb.x)
}

/// Estimate the limiting per-block Gaussians of an embedding by sampling one
/// large graph and taking per-block sample moments of the embedded rows.
///
/// # Arguments
/// * `n_big` - graph size; every expected block must hold at least 50*d rows
/// * `d` - embedding dimension
///
/// # Returns
/// One Gaussian per block plus the block weights pi. Covariances that fail
/// to factor get a diagonal bump of `COV_REG_FLOOR` once before the block is
/// declared degenerate.
///
/// # Errors
/// `InvalidInput` when a block's expected size is below 50*d; embedding
/// failures propagate; `DegenerateBlock` when a sampled block has fewer than
/// two rows.
pub fn empirical_limit_params(
    params: &SbmParams,
    method: Method,
    n_big: usize,
    d: usize,
    seed: u64,
) -> Result<EmbeddingLimit> {
    if d == 0 {
        return Err(Error::InvalidInput(
            "embedding dimension must be positive".to_string(),
        ));
    }
    for (k, &pik) in params.pi().iter().enumerate() {
        let expected = pik * n_big as f64;
        if expected < 50.0 * d as f64 {
            return Err(Error::InvalidInput(format!(
                "expected size {expected:.1} of block {k} is below 50*d = {}",
                50 * d
            )));
        }
    }
    let (g, labels) = sample_sbm(params, n_big, seed);
    let x = embed_graph(&g, method, d, derive_seed(seed, 1))?;
    let k = params.k();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for v in 0..n_big {
        members[labels.label_index(v)].push(v);
    }
    let mut gaussians = Vec::with_capacity(k);
    let mut block_sizes = Vec::with_capacity(k);
    for (block, rows) in members.iter().enumerate() {
        let m = rows.len();
        if m < 2 {
            return Err(Error::DegenerateBlock { block, size: m });
        }
        let mut mean = DVector::<f64>::zeros(d);
        for &v in rows {
            for j in 0..d {
                mean[j] += x[(v, j)];
            }
        }
        mean /= m as f64;
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for &v in rows {
            for i in 0..d {
                let ci = x[(v, i)] - mean[i];
                for j in i..d {
                    cov[(i, j)] += ci * (x[(v, j)] - mean[j]);
                }
            }
        }
        cov /= (m - 1) as f64;
        for i in 0..d {
            for j in (i + 1)..d {
                cov[(j, i)] = cov[(i, j)];
            }
        }
        if Cholesky::new(cov.clone()).is_none() {
            for i in 0..d {
                cov[(i, i)] += COV_REG_FLOOR;
            }
        }
        let gaussian = Gaussian::new(mean, cov).map_err(|_| {
            Error::DegenerateGaussian(format!(
                "block {block} sample covariance is singular even after regularization"
            ))
        })?;
        gaussians.push(gaussian);
        block_sizes.push(m);
    }
    Ok(EmbeddingLimit {
        method,
        n_big,
        d,
        gaussians,
        weights: params.pi().to_vec(),
        cov_scale: n_big as f64,
        block_sizes,
    })
}

/// Chernoff ratio of a 2-block model with both components.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhoResult {
    /// chernoff_ase / chernoff_lse; above 1 favors the adjacency embedding,
    /// below 1 the Laplacian embedding.
    pub rho: f64,
    pub chernoff_ase: f64,
    pub chernoff_lse: f64,
    pub t_star_ase: f64,
    pub t_star_lse: f64,
    pub n_big: usize,
}

/// Chernoff ratio between the adjacency and Laplacian embeddings of a
/// 2-block model, from empirical limit Gaussians at dimension 2.
///
/// Blocks are put in a canonical order (larger within-block probability
/// first, then larger weight) before sampling, so relabeling the two blocks
/// cannot change the estimate.
///
/// # Errors
/// `InvalidInput` unless K=2 with some block signal (a flat connectivity
/// matrix is excluded); `DegenerateGaussian` when a limit covariance stays
/// singular after the regularization floor or the Laplacian side carries no
/// separation to divide by.
pub fn chernoff_ratio(params: &SbmParams, n_big: usize, seed: u64) -> Result<RhoResult> {
    if params.k() != 2 {
        return Err(Error::InvalidInput(format!(
            "Chernoff ratio is defined for K=2, got K={}",
            params.k()
        )));
    }
    let (b00, b01, b11) = (params.b(0, 0), params.b(0, 1), params.b(1, 1));
    if b00 == b01 && b01 == b11 {
        return Err(Error::InvalidInput(
            "connectivity matrix is flat; no block signal to compare".to_string(),
        ));
    }
    let swap = b11 > b00 || (b11 == b00 && params.pi()[1] > params.pi()[0]);
    let canonical = if swap {
        SbmParams::new(
            vec![params.pi()[1], params.pi()[0]],
            vec![vec![b11, b01], vec![b01, b00]],
        )?
    } else {
        params.clone()
    };
    let lim_a = empirical_limit_params(&canonical, Method::Ase, n_big, 2, derive_seed(seed, 10))?;
    let lim_l = empirical_limit_params(&canonical, Method::Lse, n_big, 2, derive_seed(seed, 11))?;
    let ca = chernoff_information(&lim_a.gaussians[0], &lim_a.gaussians[1])?;
    let cl = chernoff_information(&lim_l.gaussians[0], &lim_l.gaussians[1])?;
    if !(cl.value.is_finite() && cl.value > 0.0) {
        return Err(Error::DegenerateGaussian(
            "Laplacian limit Gaussians carry no separation".to_string(),
        ));
    }
    Ok(RhoResult {
        rho: ca.value / cl.value,
        chernoff_ase: ca.value,
        chernoff_lse: cl.value,
        t_star_ase: ca.t_star,
        t_star_lse: cl.t_star,
        n_big,
    })
}

/// Weighted Gaussian mixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mixture {
    pub components: Vec<Gaussian>,
    pub weights: Vec<f64>,
}

impl Mixture {
    /// # Errors
    /// `InvalidInput` unless components are nonempty with one shared
    /// dimension and the positive weights sum to 1 within 1e-6 (they are
    /// renormalized exactly afterwards).
    pub fn new(components: Vec<Gaussian>, weights: Vec<f64>) -> Result<Mixture> {
        if components.is_empty() || components.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} components with {} weights",
                components.len(),
                weights.len()
            )));
        }
        let d = components[0].dim();
        if components.iter().any(|c| c.dim() != d) {
            return Err(Error::InvalidInput(
                "mixture components have mixed dimensions".to_string(),
            ));
        }
        if weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(Error::InvalidInput(
                "mixture weights must be positive and finite".to_string(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        let weights = weights.iter().map(|w| w / total).collect();
        Ok(Mixture {
            components,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }
}

struct PreparedComponent {
    mean: DVector<f64>,
    /// Lower Cholesky factor with a clean upper triangle.
    l: DMatrix<f64>,
    /// log weight + Gaussian normalization constant.
    log_scale: f64,
}

struct PreparedMixture {
    comps: Vec<PreparedComponent>,
    cum_weights: Vec<f64>,
}

impl PreparedMixture {
    fn new(m: &Mixture) -> Result<PreparedMixture> {
        let d = m.dim() as f64;
        let mut comps = Vec::with_capacity(m.components.len());
        let mut cum_weights = Vec::with_capacity(m.components.len());
        let mut acc = 0.0;
        for (g, &w) in m.components.iter().zip(&m.weights) {
            let chol = spd_factor(&g.cov, "mixture component covariance")?;
            let half_log_det = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
            comps.push(PreparedComponent {
                mean: g.mean.clone(),
                l: chol.l(),
                log_scale: w.ln() - half_log_det - 0.5 * d * (2.0 * std::f64::consts::PI).ln(),
            });
            acc += w;
            cum_weights.push(acc);
        }
        Ok(PreparedMixture {
            comps,
            cum_weights,
        })
    }

    fn log_density(&self, x: &DVector<f64>) -> f64 {
        let terms: Vec<f64> = self
            .comps
            .iter()
            .map(|c| {
                let z = c
                    .l
                    .solve_lower_triangular(&(x - &c.mean))
                    .expect("factor has positive diagonal");
                c.log_scale - 0.5 * z.norm_squared()
            })
            .collect();
        log_sum_exp(&terms)
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        let u: f64 = rng.random();
        let idx = self
            .cum_weights
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.comps.len() - 1);
        let comp = &self.comps[idx];
        let z = DVector::from_fn(comp.mean.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &comp.mean + &comp.l * z
    }
}

/// Monte Carlo KL estimate with its sampling uncertainty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KlEstimate {
    pub kl: f64,
    /// Standard error of the Monte Carlo mean.
    pub se: f64,
    pub n_samples: usize,
    /// Samples where log q underflowed and was clamped to the floor.
    pub floored_samples: usize,
    /// Present when any sample hit the log-density floor.
    pub warning: Option<String>,
}

/// Monte Carlo estimate of KL(p || q) = E_{x~p}[log p(x) - log q(x)].
///
/// Samples are drawn from p in fixed-size chunks whose generators are
/// seeded per chunk, so the estimate does not depend on how chunks are
/// scheduled. log q is clamped at `LOG_DENSITY_FLOOR` to keep far-tail
/// samples finite; any clamping is flagged in the result.
///
/// # Arguments
/// * `n_samples` - Monte Carlo draws, at least 10^4 (`DEFAULT_KL_SAMPLES`
///   is the conventional choice)
///
/// # Errors
/// `InvalidInput` on dimension mismatch or too few samples;
/// `DegenerateGaussian` when a component covariance fails to factor.
pub fn mixture_kl(p: &Mixture, q: &Mixture, n_samples: usize, seed: u64) -> Result<KlEstimate> {
    if p.dim() != q.dim() {
        return Err(Error::InvalidInput(format!(
            "mixture dimensions differ: {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    if n_samples < 10_000 {
        return Err(Error::InvalidInput(format!(
            "KL estimation needs at least 10000 samples, got {n_samples}"
        )));
    }
    let pp = PreparedMixture::new(p)?;
    let pq = PreparedMixture::new(q)?;
    const CHUNK: usize = 8192;
    let n_chunks = n_samples.div_ceil(CHUNK);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut floored = 0usize;
    for chunk in 0..n_chunks {
        let quota = CHUNK.min(n_samples - chunk * CHUNK);
        let mut rng = rng_from_seed(derive_seed(seed, chunk as u64));
        let mut c_sum = 0.0;
        let mut c_sq = 0.0;
        for _ in 0..quota {
            let x = pp.sample(&mut rng);
            let lp = pp.log_density(&x);
            let mut lq = pq.log_density(&x);
            if lq < LOG_DENSITY_FLOOR {
                lq = LOG_DENSITY_FLOOR;
                floored += 1;
            }
            let diff = lp - lq;
            c_sum += diff;
            c_sq += diff * diff;
        }
        sum += c_sum;
        sum_sq += c_sq;
    }
    let n = n_samples as f64;
    let kl = sum / n;
    let var = ((sum_sq - n * kl * kl) / (n - 1.0)).max(0.0);
    Ok(KlEstimate {
        kl,
        se: (var / n).sqrt(),
        n_samples,
        floored_samples: floored,
        warning: (floored > 0).then(|| {
            format!("{floored} of {n_samples} samples hit the log-density floor")
        }),
    })
}

/// One scored bipartition of the 4 components.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupingScore {
    pub group_a: Vec<usize>,
    pub group_b: Vec<usize>,
    /// KL(A || B) between the weight-renormalized sub-mixtures.
    pub kl_ab: f64,
    /// KL(B || A).
    pub kl_ba: f64,
    /// Symmetrized score: the average of the two directions.
    pub score: f64,
    pub se: f64,
    pub floored_samples: usize,
}

/// Ranked bipartition scores for one embedding method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupingReport {
    /// Caller-supplied tag naming the parameter source (e.g. "ase", "lse").
    pub method: String,
    pub n_samples: usize,
    pub seed: u64,
    /// All 7 unordered bipartitions, best score first.
    pub groupings: Vec<GroupingScore>,
    pub best: GroupingScore,
}

fn sub_mixture(components: &[Gaussian], weights: &[f64], idx: &[usize]) -> Result<Mixture> {
    let total: f64 = idx.iter().map(|&i| weights[i]).sum();
    Mixture::new(
        idx.iter().map(|&i| components[i].clone()).collect(),
        idx.iter().map(|&i| weights[i] / total).collect(),
    )
}

/// Score every unordered bipartition of 4 mixture components into two
/// nonempty groups by the symmetrized KL divergence between the two
/// weight-renormalized sub-mixtures.
///
/// There are 7 such bipartitions (four 1-vs-3 and three 2-vs-2); all of
/// them are reported so any grouping convention can be audited against the
/// full ranking.
///
/// # Arguments
/// * `method` - tag recorded in the report, naming where the components
///   came from
/// * `n_samples` - Monte Carlo draws per KL direction
///
/// # Errors
/// `InvalidInput` unless exactly 4 components with positive weights are
/// given; `DegenerateGaussian` on a degenerate component or a non-finite
/// score.
pub fn two_truths_grouping(
    components: &[Gaussian],
    weights: &[f64],
    method: &str,
    n_samples: usize,
    seed: u64,
) -> Result<GroupingReport> {
    if components.len() != 4 || weights.len() != 4 {
        return Err(Error::InvalidInput(format!(
            "grouping analysis needs exactly 4 components, got {} with {} weights",
            components.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
        return Err(Error::InvalidInput(
            "component weights must be positive and finite".to_string(),
        ));
    }
    // Masks over {0,1,2,3} that contain component 0: one representative per
    // unordered bipartition.
    let masks: [u8; 7] = [0b0001, 0b0011, 0b0101, 0b1001, 0b0111, 0b1011, 0b1101];
    let mut groupings = Vec::with_capacity(7);
    for (bi, &mask) in masks.iter().enumerate() {
        let group_a: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).collect();
        let group_b: Vec<usize> = (0..4).filter(|i| mask & (1 << i) == 0).collect();
        let ma = sub_mixture(components, weights, &group_a)?;
        let mb = sub_mixture(components, weights, &group_b)?;
        let ab = mixture_kl(&ma, &mb, n_samples, derive_seed(seed, 2 * bi as u64))?;
        let ba = mixture_kl(&mb, &ma, n_samples, derive_seed(seed, 2 * bi as u64 + 1))?;
        let score = 0.5 * (ab.kl + ba.kl);
        if !score.is_finite() {
            return Err(Error::DegenerateGaussian(format!(
                "bipartition {group_a:?} | {group_b:?} scored non-finite"
            )));
        }
        groupings.push(GroupingScore {
            group_a,
            group_b,
            kl_ab: ab.kl,
            kl_ba: ba.kl,
            score,
            se: 0.5 * (ab.se * ab.se + ba.se * ba.se).sqrt(),
            floored_samples: ab.floored_samples + ba.floored_samples,
        });
    }
    groupings.sort_by(|a, b| b.score.partial_cmp(&a.score).expect("scores are finite"));
    let best = groupings[0].clone();
    Ok(GroupingReport {
        method: method.to_string(),
        n_samples,
        seed,
        groupings,
        best,
    })
}
