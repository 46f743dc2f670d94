//! Order selection for the clustering pipeline: embedding dimension and
//! number of mixture components.
//!
//! The embedding dimension is chosen from the eigenvalue scree by profile
//! likelihood: each candidate split d models the top d magnitudes and the
//! remaining ones as two Gaussian groups with separate means and a pooled
//! variance, and the split with the highest profile log-likelihood wins.
//! Later elbows are found by re-running the procedure on the tail beyond the
//! previous elbow. The number of components is chosen by fitting a Gaussian
//! mixture for each candidate K and maximizing BIC under the convention
//! BIC = 2 log L - dim(theta) ln n, so larger is better.
//!
//! Both procedures are deterministic given the options seed; per-K fits use
//! seeds derived from the candidate K so inserting or removing candidates
//! does not perturb the others.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::gmm::{self, GmmModel, GmmOpts};
use crate::util::derive_seed;

/// Outcome of profile-likelihood scree splitting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElbowReport {
    /// Scree the decision was made on (descending magnitudes).
    pub scree: Vec<f64>,
    /// Profile log-likelihood per candidate split at the final stage.
    ///
    /// For `elbow_index` e the entries correspond to cumulative dimensions
    /// `prev + 1 ..= len - 1` where `prev` is the (e-1)-th elbow (0 for
    /// e = 1). A perfect two-level split has likelihood +infinity, which
    /// serializes to JSON null.
    pub profile_ll: Vec<f64>,
    /// Selected dimension, in `[1, scree.len() - 1]`.
    pub chosen_d: usize,
    /// Which elbow was requested (1 = first).
    pub elbow_index: usize,
}

/// Profile log-likelihood of every split of `values` into a head group and a
/// tail group, plus the argmax split size. Ties go to the smaller split.
fn profile_stage(values: &[f64]) -> (usize, Vec<f64>) {
    let m = values.len();
    let mf = m as f64;
    let total: f64 = values.iter().sum();
    let mut ll = Vec::with_capacity(m - 1);
    let mut best_q = 1usize;
    let mut best_ll = f64::NEG_INFINITY;
    let mut head_sum = 0.0;
    for q in 1..m {
        head_sum += values[q - 1];
        let mu1 = head_sum / q as f64;
        let mu2 = (total - head_sum) / (m - q) as f64;
        let ss: f64 = values[..q].iter().map(|v| (v - mu1).powi(2)).sum::<f64>()
            + values[q..].iter().map(|v| (v - mu2).powi(2)).sum::<f64>();
        let var = ss / mf;
        // A zero pooled variance means both groups are constant: the split
        // explains the scree exactly and dominates every finite candidate.
        let l = if var == 0.0 {
            f64::INFINITY
        } else {
            -0.5 * mf * ((2.0 * std::f64::consts::PI * var).ln() + 1.0)
        };
        ll.push(l);
        if l > best_ll {
            best_ll = l;
            best_q = q;
        }
    }
    (best_q, ll)
}

fn validate_stage(values: &[f64], label: &str) -> Result<()> {
    if values.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "{label} has {} values; need at least 3 to locate an elbow",
            values.len()
        )));
    }
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() || *v < 0.0 {
            return Err(Error::InvalidInput(format!(
                "{label}[{i}] = {v} is not a nonnegative finite value"
            )));
        }
        if i > 0 && values[i - 1] < *v {
            return Err(Error::InvalidInput(format!(
                "{label} is not nonincreasing at index {i}"
            )));
        }
    }
    // Nonincreasing, so equal extremes force every value equal.
    if values[0] == values[values.len() - 1] {
        return Err(Error::DegenerateScree);
    }
    Ok(())
}

/// Choose an embedding dimension from a descending eigenvalue scree by
/// two-group profile likelihood.
///
/// Each candidate dimension d splits the scree into its top d values and the
/// rest; both groups get MLE means and a pooled MLE variance, and d-hat
/// maximizes the resulting log-likelihood. `elbow_index` = e > 1 repeats the
/// procedure on the values beyond the previous elbow and reports the
/// cumulative index. The selection is invariant to rescaling the scree by
/// any positive constant.
///
/// # Arguments
/// * `scree` - nonincreasing, nonnegative magnitudes, at least 3 of them
/// * `elbow_index` - which elbow to return, counted from 1
///
/// # Returns
/// Report with the scree, final-stage profile likelihoods, and the chosen
/// cumulative dimension.
///
/// # Errors
/// `InvalidInput` if the scree (or the tail a later elbow is sought in) is
/// shorter than 3, increasing anywhere, negative, or non-finite, or if
/// `elbow_index` is 0; `DegenerateScree` if all values under consideration
/// are identical.
pub fn profile_likelihood_d(scree: &[f64], elbow_index: usize) -> Result<ElbowReport> {
    if elbow_index == 0 {
        return Err(Error::InvalidInput(
            "elbow_index counts from 1".to_string(),
        ));
    }
    let mut offset = 0usize;
    let mut last_ll = Vec::new();
    for stage in 0..elbow_index {
        let tail = &scree[offset..];
        let label = if stage == 0 {
            "scree".to_string()
        } else {
            format!("scree tail beyond elbow {stage}")
        };
        validate_stage(tail, &label)?;
        let (q, ll) = profile_stage(tail);
        offset += q;
        last_ll = ll;
    }
    Ok(ElbowReport {
        scree: scree.to_vec(),
        profile_ll: last_ll,
        chosen_d: offset,
        elbow_index,
    })
}

/// Outcome of BIC-based selection of the number of mixture components.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KSelectionReport {
    /// Candidate counts that produced a fit, in ascending order.
    pub ks: Vec<usize>,
    /// BIC per entry of `ks` (2 log L - dim(theta) ln n).
    pub bics: Vec<f64>,
    /// Whether each fit converged; only converged fits compete for the argmax.
    pub converged: Vec<bool>,
    /// Argmax of BIC among converged fits, ties to the smallest K.
    pub chosen_k: usize,
    /// Candidates that were dropped (fit failure or no convergence) and why.
    pub warnings: Vec<String>,
    /// Fitted models aligned with `ks`; omitted from serialized reports.
    #[serde(skip)]
    pub fits: Vec<GmmModel>,
}

impl KSelectionReport {
    /// Fitted model for the chosen K.
    pub fn chosen_fit(&self) -> &GmmModel {
        let idx = self
            .ks
            .iter()
            .position(|&k| k == self.chosen_k)
            .expect("chosen_k is always one of ks");
        &self.fits[idx]
    }
}

/// Choose the number of mixture components by maximizing BIC over a range
/// of candidate K.
///
/// Fits a full-covariance Gaussian mixture for every K in `k_range` (each
/// with a seed derived from K, so candidates are independent) and scores
/// each converged fit with BIC = 2 log L - dim(theta) ln n where
/// dim(theta) = (K-1) + Kd + Kd(d+1)/2. Candidates whose fit errors or does
/// not converge are excluded from the argmax and recorded as warnings.
///
/// # Arguments
/// * `x` - n x d data matrix, rows are observations
/// * `k_range` - inclusive candidate range, within `[1, n]`
/// * `opts` - mixture options; the seed namespaces the per-K seeds
///
/// # Returns
/// Report with per-K BIC values, the winning K, and the fitted models.
///
/// # Errors
/// `InvalidInput` if the range is empty or outside `[1, n]` or `x` has a
/// non-finite entry; `NoUsableFit` if no candidate produced a converged fit.
pub fn select_k_bic(
    x: &DMatrix<f64>,
    k_range: RangeInclusive<usize>,
    opts: &GmmOpts,
) -> Result<KSelectionReport> {
    let n = x.nrows();
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo > hi {
        return Err(Error::InvalidInput(format!(
            "candidate range {lo}..={hi} is empty"
        )));
    }
    if lo < 1 || hi > n {
        return Err(Error::InvalidInput(format!(
            "candidate range {lo}..={hi} must lie within [1, {n}]"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "data matrix has a non-finite entry".to_string(),
        ));
    }

    // Candidates are independent; fit them on scoped threads and collect by
    // slot so the report does not depend on completion order.
    let candidates: Vec<usize> = (lo..=hi).collect();
    let mut results: Vec<Option<Result<GmmModel>>> = Vec::new();
    results.resize_with(candidates.len(), || None);
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(candidates.len());
        for &k in &candidates {
            let k_opts = GmmOpts {
                seed: derive_seed(opts.seed, k as u64),
                ..opts.clone()
            };
            handles.push(scope.spawn(move || gmm::fit(x, k, &k_opts)));
        }
        for (slot, handle) in results.iter_mut().zip(handles) {
            *slot = Some(handle.join().expect("gmm fit does not panic"));
        }
    });

    let mut report = KSelectionReport {
        ks: Vec::new(),
        bics: Vec::new(),
        converged: Vec::new(),
        chosen_k: 0,
        warnings: Vec::new(),
        fits: Vec::new(),
    };
    let mut best: Option<(f64, usize)> = None;
    for (k, outcome) in candidates.iter().zip(results) {
        let model = match outcome.expect("every slot is filled") {
            Ok(m) => m,
            Err(e) => {
                report.warnings.push(format!("K={k}: fit failed: {e}"));
                continue;
            }
        };
        let bic = 2.0 * model.log_lik - model.parameter_count() as f64 * (n as f64).ln();
        if model.converged {
            if best.is_none_or(|(b, _)| bic > b) {
                best = Some((bic, *k));
            }
        } else {
            report
                .warnings
                .push(format!("K={k}: EM did not converge; excluded from selection"));
        }
        report.ks.push(*k);
        report.bics.push(bic);
        report.converged.push(model.converged);
        report.fits.push(model);
    }
    match best {
        Some((_, k)) => {
            report.chosen_k = k;
            Ok(report)
        }
        None => Err(Error::NoUsableFit {
            tried: candidates.len(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::rng_from_seed;
    use nalgebra::DVector;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn perfect_two_level_scree_picks_the_gap() {
        let report = profile_likelihood_d(&[10.0, 10.0, 10.0, 1.0, 1.0, 1.0, 1.0], 1).unwrap();
        assert_eq!(report.chosen_d, 3);
        assert_eq!(report.profile_ll.len(), 6);
        assert!(report.profile_ll[2].is_infinite() && report.profile_ll[2] > 0.0);
    }

    #[test]
    fn dominant_leading_value_picks_one() {
        let report = profile_likelihood_d(&[100.0, 1.0, 1.0, 1.0], 1).unwrap();
        assert_eq!(report.chosen_d, 1);
    }

    #[test]
    fn second_elbow_accumulates_indices() {
        let scree = [100.0, 100.0, 10.0, 10.0, 10.0, 1.0, 1.0, 1.0, 1.0];
        let first = profile_likelihood_d(&scree, 1).unwrap();
        assert_eq!(first.chosen_d, 2);
        let second = profile_likelihood_d(&scree, 2).unwrap();
        assert_eq!(second.chosen_d, 5);
        // Final stage ranks splits of the 7-value tail.
        assert_eq!(second.profile_ll.len(), 6);
    }

    #[test]
    fn constant_scree_is_degenerate() {
        match profile_likelihood_d(&[5.0, 5.0, 5.0, 5.0], 1) {
            Err(Error::DegenerateScree) => {}
            other => panic!("expected DegenerateScree, got {other:?}"),
        }
    }

    #[test]
    fn invalid_screes_are_rejected() {
        assert!(profile_likelihood_d(&[3.0, 1.0], 1).is_err());
        assert!(profile_likelihood_d(&[1.0, 2.0, 3.0], 1).is_err());
        assert!(profile_likelihood_d(&[3.0, 2.0, -1.0], 1).is_err());
        assert!(profile_likelihood_d(&[3.0, 2.0, f64::NAN], 1).is_err());
        assert!(profile_likelihood_d(&[3.0, 2.0, 1.0], 0).is_err());
        // Tail beyond the first elbow is too short for another stage.
        assert!(profile_likelihood_d(&[9.0, 1.0, 0.5], 2).is_err());
    }

    #[test]
    fn selection_is_scale_invariant() {
        let mut rng = rng_from_seed(31);
        for _ in 0..30 {
            let mut scree: Vec<f64> = (0..12).map(|_| rng.random::<f64>() * 10.0).collect();
            scree.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let base = profile_likelihood_d(&scree, 1).unwrap().chosen_d;
            for c in [1e-3, 37.0, 1e6] {
                let scaled: Vec<f64> = scree.iter().map(|v| v * c).collect();
                assert_eq!(profile_likelihood_d(&scaled, 1).unwrap().chosen_d, base);
            }
        }
    }

    #[test]
    fn recovers_rank_four_spectra() {
        let n = 80;
        let mut hits = 0;
        for seed in 0..20u64 {
            let mut rng = rng_from_seed(seed);
            // Random symmetric noise around a rank-4 signal spectrum. The
            // two-group model expects comparable signal magnitudes, so the
            // four signals are drawn from a common band well above the noise.
            let mut m = DMatrix::zeros(n, n);
            for _ in 0..4 {
                let signal = 8.0 + 4.0 * rng.random::<f64>();
                let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
                    .normalize();
                m += signal * &v * v.transpose();
            }
            for i in 0..n {
                for j in i..n {
                    let e: f64 = rng.sample::<f64, _>(StandardNormal);
                    m[(i, j)] += 0.05 * e;
                    if j > i {
                        m[(j, i)] = m[(i, j)];
                    }
                }
            }
            let mut scree: Vec<f64> = m
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .map(|v| v.abs())
                .collect();
            scree.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if profile_likelihood_d(&scree, 1).unwrap().chosen_d == 4 {
                hits += 1;
            }
        }
        assert!(hits >= 19, "rank 4 recovered in only {hits}/20 trials");
    }

    /// Two spherical clusters at the given separation, n points, d dims.
    fn two_clusters(n: usize, d: usize, sep: f64, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_from_seed(seed);
        DMatrix::from_fn(n, d, |i, j| {
            let center = if i < n / 2 { 0.0 } else { sep };
            let noise: f64 = rng.sample(StandardNormal);
            if j == 0 {
                center + noise
            } else {
                noise
            }
        })
    }

    #[test]
    fn bic_selects_two_well_separated_clusters() {
        let x = two_clusters(400, 2, 10.0, 7);
        let report = select_k_bic(&x, 1..=4, &GmmOpts::default()).unwrap();
        assert_eq!(report.chosen_k, 2);
        assert_eq!(report.ks, vec![1, 2, 3, 4]);
        assert_eq!(report.chosen_fit().k(), 2);
    }

    #[test]
    fn bic_selects_one_cluster_for_a_single_cloud() {
        let x = two_clusters(300, 2, 0.0, 11);
        let report = select_k_bic(&x, 1..=3, &GmmOpts::default()).unwrap();
        assert_eq!(report.chosen_k, 1);
    }

    #[test]
    fn bic_value_matches_the_direct_formula() {
        let x = two_clusters(120, 2, 6.0, 3);
        let opts = GmmOpts::default();
        let report = select_k_bic(&x, 2..=2, &opts).unwrap();
        let refit = gmm::fit(
            &x,
            2,
            &GmmOpts {
                seed: derive_seed(opts.seed, 2),
                ..opts.clone()
            },
        )
        .unwrap();
        let expected =
            2.0 * refit.log_lik - refit.parameter_count() as f64 * (120f64).ln();
        assert!((report.bics[0] - expected).abs() < 1e-9);
    }

    #[test]
    fn degenerate_ranges_are_rejected() {
        let x = two_clusters(20, 2, 5.0, 1);
        assert!(select_k_bic(&x, 2..=1, &GmmOpts::default()).is_err());
        assert!(select_k_bic(&x, 0..=3, &GmmOpts::default()).is_err());
        assert!(select_k_bic(&x, 1..=21, &GmmOpts::default()).is_err());
        let single = DMatrix::from_row_slice(1, 2, &[0.5, 0.5]);
        assert!(select_k_bic(&single, 1..=1, &GmmOpts::default()).is_err());
    }

    #[test]
    fn non_converged_candidates_are_excluded_with_warnings() {
        let x = two_clusters(200, 2, 8.0, 5);
        let opts = GmmOpts {
            max_iter: 1,
            ll_tol: 1e-300,
            ..GmmOpts::default()
        };
        let report = select_k_bic(&x, 1..=3, &opts).unwrap();
        // K=1 is an exact closed form and always converges; EM capped at one
        // iteration cannot meet the tolerance for K>1.
        assert_eq!(report.chosen_k, 1);
        assert_eq!(report.warnings.len(), 2);
        assert_eq!(report.converged, vec![true, false, false]);
    }

    #[test]
    fn selection_is_deterministic() {
        let x = two_clusters(150, 3, 7.0, 9);
        let a = select_k_bic(&x, 1..=4, &GmmOpts::default()).unwrap();
        let b = select_k_bic(&x, 1..=4, &GmmOpts::default()).unwrap();
        assert_eq!(a.chosen_k, b.chosen_k);
        assert_eq!(a.bics, b.bics);
    }
}
