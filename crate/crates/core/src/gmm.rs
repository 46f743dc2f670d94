//! Gaussian mixture fitting by expectation-maximization with full
//! covariances.
//!
//! Fitting runs several k-means++-seeded EM attempts and keeps the best
//! final log-likelihood. The E-step works entirely in log space (log-sum-exp
//! over components), so widely separated clusters with tiny covariances do
//! not underflow. Covariances are kept positive definite by shifting the
//! diagonal whenever the smallest eigenvalue falls below a regularization
//! floor derived from the data scale; a component whose total responsibility
//! collapses to zero aborts the attempt and a fresh seeded attempt takes its
//! place, keeping the requested K fixed.
//!
//! Per-iteration log-likelihoods are recorded on the model so monotonicity
//! is externally checkable.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{derive_seed, log_sum_exp, rng_from_seed};

/// EM configuration.
#[derive(Debug, Clone)]
pub struct GmmOpts {
    pub max_iter: usize,
    /// Relative log-likelihood improvement below which EM stops.
    pub ll_tol: f64,
    /// Covariance eigenvalue floor; None derives 1e-6 times the mean data
    /// variance.
    pub reg_floor: Option<f64>,
    /// Number of successful EM attempts to compare.
    pub n_init: usize,
    pub seed: u64,
}

impl Default for GmmOpts {
    fn default() -> Self {
        GmmOpts {
            max_iter: 500,
            ll_tol: 1e-8,
            reg_floor: None,
            n_init: 5,
            seed: 0,
        }
    }
}

/// A fitted Gaussian mixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmmModel {
    pub weights: Vec<f64>,
    pub means: Vec<DVector<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
    pub log_lik: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Log-likelihood after each EM iteration of the winning attempt.
    pub ll_trace: Vec<f64>,
    /// Eigenvalue floor that was applied to the covariances.
    pub reg_floor: f64,
}

impl GmmModel {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        if self.means.is_empty() {
            0
        } else {
            self.means[0].len()
        }
    }

    /// Free parameter count for full-covariance mixtures:
    /// (K-1) + K*d + K*d(d+1)/2.
    pub fn parameter_count(&self) -> usize {
        let k = self.k();
        let d = self.dim();
        (k - 1) + k * d + k * d * (d + 1) / 2
    }
}

/// Cholesky factor plus log-determinant for density evaluation.
struct CompDensity {
    chol: Cholesky<f64, nalgebra::Dyn>,
    log_det: f64,
}

fn comp_density(cov: &DMatrix<f64>) -> Option<CompDensity> {
    let chol = Cholesky::new(cov.clone())?;
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    Some(CompDensity { chol, log_det })
}

/// log N(x; mu, Sigma) given the prepared factorization.
fn log_gauss(x: &DVector<f64>, mean: &DVector<f64>, dens: &CompDensity) -> f64 {
    let d = x.len() as f64;
    let diff = x - mean;
    let solved = dens.chol.solve(&diff);
    let mah = diff.dot(&solved);
    -0.5 * (d * (2.0 * std::f64::consts::PI).ln() + dens.log_det + mah)
}

fn validate_data(x: &DMatrix<f64>) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("data contains non-finite values".into()));
    }
    Ok(())
}

/// 1e-6 times the mean per-coordinate variance, the default floor.
fn default_reg_floor(x: &DMatrix<f64>) -> f64 {
    let n = x.nrows() as f64;
    let d = x.ncols();
    let mut total = 0.0;
    for j in 0..d {
        let col = x.column(j);
        let mean = col.sum() / n;
        total += col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    }
    1e-6 * (total / d as f64)
}

/// Shift a symmetric matrix's diagonal until its smallest eigenvalue
/// reaches the floor. Adding c to the diagonal shifts every eigenvalue by
/// exactly c, so one eigen decomposition suffices.
fn regularize(cov: &mut DMatrix<f64>, floor: f64) {
    if floor <= 0.0 {
        // No floor to enforce; singular covariances surface later as
        // factorization failures.
        return;
    }
    let min_eig = cov
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_eig < floor {
        let shifts = ((floor - min_eig) / floor).ceil().max(1.0);
        let add = shifts * floor;
        for i in 0..cov.nrows() {
            cov[(i, i)] += add;
        }
    }
}

struct MStepOut {
    weights: Vec<f64>,
    means: Vec<DVector<f64>>,
    covariances: Vec<DMatrix<f64>>,
}

/// M-step from soft responsibilities; None signals a collapsed component.
fn m_step(x: &DMatrix<f64>, resp: &DMatrix<f64>, floor: f64) -> Option<MStepOut> {
    let (n, d) = (x.nrows(), x.ncols());
    let k = resp.ncols();
    let mut weights = Vec::with_capacity(k);
    let mut means = Vec::with_capacity(k);
    let mut covariances = Vec::with_capacity(k);
    for c in 0..k {
        let nk: f64 = resp.column(c).sum();
        if nk < 1e-6 {
            return None;
        }
        weights.push(nk / n as f64);
        let mut mu = DVector::<f64>::zeros(d);
        for i in 0..n {
            let r = resp[(i, c)];
            for j in 0..d {
                mu[j] += r * x[(i, j)];
            }
        }
        mu /= nk;
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for i in 0..n {
            let r = resp[(i, c)];
            if r == 0.0 {
                continue;
            }
            for a in 0..d {
                let da = x[(i, a)] - mu[a];
                for b in a..d {
                    cov[(a, b)] += r * da * (x[(i, b)] - mu[b]);
                }
            }
        }
        for a in 0..d {
            for b in a + 1..d {
                cov[(a, b)] /= nk;
                cov[(b, a)] = cov[(a, b)];
            }
            cov[(a, a)] /= nk;
        }
        regularize(&mut cov, floor);
        means.push(mu);
        covariances.push(cov);
    }
    Some(MStepOut {
        weights,
        means,
        covariances,
    })
}

/// k-means++ seeding followed by one-hot assignment to the chosen centers.
fn init_responsibilities(
    x: &DMatrix<f64>,
    k: usize,
    rng: &mut impl Rng,
) -> Option<DMatrix<f64>> {
    let n = x.nrows();
    let mut centers: Vec<usize> = Vec::with_capacity(k);
    centers.push(rng.random_range(0..n));
    let mut dist2 = vec![0.0f64; n];
    for i in 0..n {
        dist2[i] = (x.row(i) - x.row(centers[0])).norm_squared();
    }
    while centers.len() < k {
        let total: f64 = dist2.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in dist2.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push(next);
        for i in 0..n {
            let d2 = (x.row(i) - x.row(next)).norm_squared();
            if d2 < dist2[i] {
                dist2[i] = d2;
            }
        }
    }
    let mut resp = DMatrix::<f64>::zeros(n, k);
    for i in 0..n {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (c, &ctr) in centers.iter().enumerate() {
            let d2 = (x.row(i) - x.row(ctr)).norm_squared();
            if d2 < best_d {
                best_d = d2;
                best = c;
            }
        }
        resp[(i, best)] = 1.0;
    }
    // Every component must start nonempty.
    for c in 0..k {
        if resp.column(c).sum() < 0.5 {
            return None;
        }
    }
    Some(resp)
}

struct EmRun {
    model: GmmModel,
}

/// One full EM attempt; None signals component collapse or a failed init.
fn em_attempt(x: &DMatrix<f64>, k: usize, floor: f64, opts: &GmmOpts, seed: u64) -> Option<EmRun> {
    let n = x.nrows();
    let mut rng = rng_from_seed(seed);
    let resp0 = init_responsibilities(x, k, &mut rng)?;
    let mut params = m_step(x, &resp0, floor)?;

    let rows: Vec<DVector<f64>> = (0..n).map(|i| x.row(i).transpose()).collect();
    let mut ll_trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut resp = DMatrix::<f64>::zeros(n, k);

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        // E-step.
        let dens: Option<Vec<CompDensity>> =
            params.covariances.iter().map(comp_density).collect();
        let dens = dens?;
        let log_w: Vec<f64> = params.weights.iter().map(|w| w.ln()).collect();
        let mut ll = 0.0;
        let mut scratch = vec![0.0f64; k];
        for i in 0..n {
            for c in 0..k {
                scratch[c] = log_w[c] + log_gauss(&rows[i], &params.means[c], &dens[c]);
            }
            let lse = log_sum_exp(&scratch);
            ll += lse;
            for c in 0..k {
                resp[(i, c)] = (scratch[c] - lse).exp();
            }
        }
        let improved = match ll_trace.last() {
            Some(&prev) => (ll - prev).abs() > opts.ll_tol * prev.abs().max(1.0),
            None => true,
        };
        ll_trace.push(ll);
        if !improved {
            converged = true;
            break;
        }
        // M-step.
        params = m_step(x, &resp, floor)?;
    }

    let log_lik = *ll_trace.last()?;
    Some(EmRun {
        model: GmmModel {
            weights: params.weights,
            means: params.means,
            covariances: params.covariances,
            log_lik,
            converged,
            iterations,
            ll_trace,
            reg_floor: floor,
        },
    })
}

/// Fit a K-component full-covariance Gaussian mixture.
///
/// # Arguments
/// * `x` - n x d data, rows are observations.
/// * `k` - number of components, 1 <= k <= n.
/// * `opts` - EM controls; `opts.seed` derives one stream per attempt.
///
/// # Returns
/// The best model over `n_init` successful attempts (highest final
/// log-likelihood). `converged` is false when the winner hit `max_iter`.
///
/// # Errors
/// Invalid K or data, or every attempt failing (component collapse or
/// singular covariances throughout).
pub fn fit(x: &DMatrix<f64>, k: usize, opts: &GmmOpts) -> Result<GmmModel> {
    let n = x.nrows();
    validate_data(x)?;
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "cannot fit {k} components to {n} points"
        )));
    }
    let floor = opts.reg_floor.unwrap_or_else(|| default_reg_floor(x));

    if k == 1 {
        // Closed form: one M-step with unit responsibilities.
        let resp = DMatrix::<f64>::from_element(n, 1, 1.0);
        let params = m_step(x, &resp, floor)
            .ok_or_else(|| Error::DegenerateGaussian("empty data".into()))?;
        let dens = comp_density(&params.covariances[0]).ok_or_else(|| {
            Error::DegenerateGaussian("singular covariance after regularization".into())
        })?;
        let rows: Vec<DVector<f64>> = (0..n).map(|i| x.row(i).transpose()).collect();
        let ll: f64 = rows
            .iter()
            .map(|r| log_gauss(r, &params.means[0], &dens))
            .sum();
        return Ok(GmmModel {
            weights: params.weights,
            means: params.means,
            covariances: params.covariances,
            log_lik: ll,
            converged: true,
            iterations: 1,
            ll_trace: vec![ll],
            reg_floor: floor,
        });
    }

    let mut best: Option<GmmModel> = None;
    let mut successes = 0usize;
    let max_attempts = opts.n_init.saturating_mul(4).max(1);
    let mut attempts = 0usize;
    while successes < opts.n_init && attempts < max_attempts {
        let seed = derive_seed(opts.seed, attempts as u64);
        attempts += 1;
        if let Some(run) = em_attempt(x, k, floor, opts, seed) {
            successes += 1;
            if best
                .as_ref()
                .map(|b| run.model.log_lik > b.log_lik)
                .unwrap_or(true)
            {
                best = Some(run.model);
            }
        }
    }
    best.ok_or(Error::AllInitsFailed { attempts })
}

/// Per-row posterior responsibilities under a fitted model.
///
/// # Errors
/// Dimension mismatch or a singular component covariance.
pub fn responsibilities(model: &GmmModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, k) = (x.nrows(), model.k());
    check_dims(model, x)?;
    let dens = prepare(model)?;
    let log_w: Vec<f64> = model.weights.iter().map(|w| w.ln()).collect();
    let mut resp = DMatrix::<f64>::zeros(n, k);
    let mut scratch = vec![0.0f64; k];
    for i in 0..n {
        let xi = x.row(i).transpose();
        for c in 0..k {
            scratch[c] = log_w[c] + log_gauss(&xi, &model.means[c], &dens[c]);
        }
        let lse = log_sum_exp(&scratch);
        for c in 0..k {
            resp[(i, c)] = (scratch[c] - lse).exp();
        }
    }
    Ok(resp)
}

fn check_dims(model: &GmmModel, x: &DMatrix<f64>) -> Result<()> {
    if model.dim() != x.ncols() {
        return Err(Error::InvalidInput(format!(
            "model dimension {} does not match data dimension {}",
            model.dim(),
            x.ncols()
        )));
    }
    Ok(())
}

fn prepare(model: &GmmModel) -> Result<Vec<CompDensity>> {
    model
        .covariances
        .iter()
        .map(|c| {
            comp_density(c).ok_or_else(|| {
                Error::DegenerateGaussian("singular component covariance".into())
            })
        })
        .collect()
}

/// Mixture log-likelihood of a dataset under a model.
///
/// # Errors
/// Dimension mismatch or singular covariance.
pub fn log_likelihood(model: &GmmModel, x: &DMatrix<f64>) -> Result<f64> {
    check_dims(model, x)?;
    let dens = prepare(model)?;
    let log_w: Vec<f64> = model.weights.iter().map(|w| w.ln()).collect();
    let k = model.k();
    let mut scratch = vec![0.0f64; k];
    let mut ll = 0.0;
    for i in 0..x.nrows() {
        let xi = x.row(i).transpose();
        for c in 0..k {
            scratch[c] = log_w[c] + log_gauss(&xi, &model.means[c], &dens[c]);
        }
        ll += log_sum_exp(&scratch);
    }
    Ok(ll)
}

/// BIC under the maximization convention: 2*logLik - dim(theta)*ln(n).
///
/// # Errors
/// Dimension mismatch or singular covariance.
pub fn bic(model: &GmmModel, x: &DMatrix<f64>) -> Result<f64> {
    let ll = log_likelihood(model, x)?;
    let n = x.nrows() as f64;
    Ok(2.0 * ll - model.parameter_count() as f64 * n.ln())
}

/// Hard cluster assignment by maximum posterior responsibility, ties to the
/// lowest component index.
///
/// # Errors
/// Dimension mismatch or singular covariance.
pub fn hard_assign(model: &GmmModel, x: &DMatrix<f64>) -> Result<Vec<u32>> {
    check_dims(model, x)?;
    let dens = prepare(model)?;
    let log_w: Vec<f64> = model.weights.iter().map(|w| w.ln()).collect();
    let k = model.k();
    let mut out = Vec::with_capacity(x.nrows());
    for i in 0..x.nrows() {
        let xi = x.row(i).transpose();
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for c in 0..k {
            let s = log_w[c] + log_gauss(&xi, &model.means[c], &dens[c]);
            if s > best_score {
                best_score = s;
                best = c;
            }
        }
        out.push(best as u32);
    }
    Ok(out)
}
