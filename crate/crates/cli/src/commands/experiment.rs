//! `experiment`: Monte Carlo two-truths runs on a four-block model.
//!
//! Each trial samples a graph, runs both embeddings with d = K = 2, and
//! scores each against the two merged truths. The report and the delta
//! CSV contain no clocks, so a repeated run with the same resolved config
//! reproduces them byte for byte; wall times land in a timing.json
//! sidecar instead.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sgc_core::eval::{ari, Partition};
use sgc_core::labels::MergeMap;
use sgc_core::sbm::{sample_sbm, two_truths_fixture, TwoTruthsFixture};
use sgc_core::spectral::Method;
use sgc_core::util::derive_seed;

use crate::cli::ExperimentFlags;
use crate::commands::cluster::method_seed;
use crate::config::Global;
use crate::out;
use crate::pipeline::{run_pipeline, PipelineSpec};
use crate::pool;
use crate::Outcome;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    /// Fixture JSON path; the built-in two-truths model when absent.
    pub fixture: Option<PathBuf>,
    /// Vertices per sampled graph.
    pub n: usize,
    pub trials: usize,
    /// ARI level that counts as recovering a truth.
    pub ari_threshold: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            fixture: None,
            n: 4000,
            trials: 50,
            ari_threshold: 0.95,
        }
    }
}

impl ExperimentParams {
    pub fn overlay(&mut self, flags: ExperimentFlags) {
        if let Some(v) = flags.fixture {
            self.fixture = Some(v);
        }
        if let Some(v) = flags.n {
            self.n = v;
        }
        if let Some(v) = flags.trials {
            self.trials = v;
        }
        if let Some(v) = flags.ari_threshold {
            self.ari_threshold = v;
        }
    }
}

/// One (trial, method) outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// The trial's derived seed (graph sample and both pipelines).
    pub seed: u64,
    pub method: String,
    pub d: usize,
    pub k: usize,
    /// ARI against the left/right merged truth.
    pub ari_lr: Option<f64>,
    /// ARI against the gray/white merged truth.
    pub ari_gw: Option<f64>,
    /// ari_lr - ari_gw; positive means the left/right truth fit better.
    pub delta_ari: Option<f64>,
    pub error: Option<String>,
}

/// Per-method success rates over the trials that completed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodAggregate {
    pub method: String,
    pub trials_ok: usize,
    pub trials_failed: usize,
    /// Fraction of completed trials with ari_lr above the threshold.
    pub frac_lr_success: f64,
    /// Fraction of completed trials with ari_gw above the threshold.
    pub frac_gw_success: f64,
    pub mean_ari_lr: f64,
    pub mean_ari_gw: f64,
    pub mean_delta_ari: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub d: usize,
    pub k: usize,
    pub ari_threshold: f64,
    pub lr_classes: Vec<String>,
    pub gw_classes: Vec<String>,
    /// Two records per trial, Laplacian first.
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<MethodAggregate>,
}

#[derive(Serialize)]
struct Timing {
    total_seconds: f64,
    trial_seconds: Vec<f64>,
}

/// Load the fixture or fall back to the built-in model.
///
/// # Errors
///
/// Fails on unreadable or structurally invalid fixture files.
pub fn load_fixture(path: Option<&PathBuf>) -> Result<TwoTruthsFixture> {
    let fixture = match path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading fixture {}", path.display()))?;
            let fixture: TwoTruthsFixture = serde_json::from_str(&text)
                .with_context(|| format!("parsing fixture {}", path.display()))?;
            fixture
        }
        None => two_truths_fixture(),
    };
    if fixture.params.k() != fixture.block_names.len() {
        bail!(
            "fixture has {} blocks but {} block names",
            fixture.params.k(),
            fixture.block_names.len()
        );
    }
    Ok(fixture)
}

/// Run the experiment and write experiment_report.json, delta_ari.csv,
/// and the timing sidecar.
///
/// # Errors
///
/// Fails fatally when the fixture is unusable or more than 10% of trials
/// error; fewer failures yield a failure manifest and exit code 3.
pub fn run(global: &Global, params: &ExperimentParams) -> Result<Outcome> {
    if params.trials == 0 {
        bail!("trials must be at least 1");
    }
    let fixture = load_fixture(params.fixture.as_ref())?;
    let lr_merge = fixture.lr_merge().context("building the left/right merge")?;
    let gw_merge = fixture.gw_merge().context("building the gray/white merge")?;

    out::ensure_dir(&global.out_dir)?;
    let started = Instant::now();
    let trials: Vec<(Vec<TrialRecord>, f64)> =
        pool::run_indexed(params.trials, global.threads, |trial| {
            let trial_start = Instant::now();
            let records = run_trial(trial, global.seed, params.n, &fixture, &lr_merge, &gw_merge);
            (records, trial_start.elapsed().as_secs_f64())
        });

    let mut records = Vec::with_capacity(2 * params.trials);
    let mut trial_seconds = Vec::with_capacity(params.trials);
    for (trial_records, seconds) in trials {
        records.extend(trial_records);
        trial_seconds.push(seconds);
    }

    let aggregates = [Method::Lse, Method::Ase]
        .iter()
        .map(|m| aggregate(&records, &m.to_string(), params.ari_threshold))
        .collect();

    let report = ExperimentReport {
        n: params.n,
        trials: params.trials,
        seed: global.seed,
        d: 2,
        k: 2,
        ari_threshold: params.ari_threshold,
        lr_classes: fixture.lr_names.clone(),
        gw_classes: fixture.gw_names.clone(),
        records,
        aggregates,
    };
    out::write_json(&global.out_dir.join("experiment_report.json"), &report)?;

    let delta_rows: Vec<String> = report
        .records
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{}",
                r.trial,
                r.method,
                out::csv_opt_f64(r.ari_lr),
                out::csv_opt_f64(r.ari_gw),
                out::csv_opt_f64(r.delta_ari),
            )
        })
        .collect();
    out::write_csv(
        &global.out_dir.join("delta_ari.csv"),
        "trial,method,ari_lr,ari_gw,delta_ari",
        &delta_rows,
    )?;

    out::write_json(
        &global.out_dir.join("timing.json"),
        &Timing {
            total_seconds: started.elapsed().as_secs_f64(),
            trial_seconds,
        },
    )?;
    out::write_resolved_config(&global.out_dir, "experiment", global, params)?;

    for agg in &report.aggregates {
        log::info!(
            "{}: {}/{} trials ok, frac(ari_lr > {}) = {:.3}, frac(ari_gw > {}) = {:.3}",
            agg.method,
            agg.trials_ok,
            params.trials,
            params.ari_threshold,
            agg.frac_lr_success,
            params.ari_threshold,
            agg.frac_gw_success
        );
    }

    let failures: Vec<(String, String)> = report
        .records
        .iter()
        .filter_map(|r| {
            r.error
                .as_ref()
                .map(|e| (format!("trial{}/{}", r.trial, r.method), e.clone()))
        })
        .collect();
    let failed_trials: std::collections::BTreeSet<usize> = report
        .records
        .iter()
        .filter(|r| r.error.is_some())
        .map(|r| r.trial)
        .collect();
    if !failures.is_empty() {
        out::write_failures(&global.out_dir, &failures)?;
    }
    if failed_trials.len() * 10 > params.trials {
        bail!(
            "{} of {} trials failed (over 10%); see failures.csv",
            failed_trials.len(),
            params.trials
        );
    }
    if failed_trials.is_empty() {
        Ok(Outcome::Success)
    } else {
        log::warn!("{} of {} trials failed", failed_trials.len(), params.trials);
        Ok(Outcome::Partial)
    }
}

fn run_trial(
    trial: usize,
    base_seed: u64,
    n: usize,
    fixture: &TwoTruthsFixture,
    lr_merge: &MergeMap,
    gw_merge: &MergeMap,
) -> Vec<TrialRecord> {
    let seed = derive_seed(base_seed, trial as u64);
    let blank = |method: Method| TrialRecord {
        trial,
        seed,
        method: method.to_string(),
        d: 2,
        k: 2,
        ari_lr: None,
        ari_gw: None,
        delta_ari: None,
        error: None,
    };

    let (graph, sampled) = sample_sbm(&fixture.params, n, seed);
    let named = match fixture.named_labels(&sampled) {
        Ok(named) => named,
        Err(err) => {
            let msg = format!("naming sampled blocks: {err:#}");
            return [Method::Lse, Method::Ase]
                .map(|m| {
                    let mut rec = blank(m);
                    rec.error = Some(msg.clone());
                    rec
                })
                .to_vec();
        }
    };

    [Method::Lse, Method::Ase]
        .map(|method| {
            let mut record = blank(method);
            let spec = PipelineSpec {
                method,
                d: Some(2),
                k: Some(2),
                k_max: 2,
                elbow_index: 1,
                seed: method_seed(seed, method),
            };
            let scored = run_pipeline(&graph, Some(&named), &spec).and_then(|result| {
                let truth = result
                    .truth_labels
                    .as_ref()
                    .context("pipeline dropped the truth labels")?;
                let clusters = Partition::new(&result.assignments);
                let lr = Partition::new(lr_merge.apply(truth)?.assignments());
                let gw = Partition::new(gw_merge.apply(truth)?.assignments());
                let ari_lr = ari(&clusters, &lr)?.ari;
                let ari_gw = ari(&clusters, &gw)?.ari;
                Ok((ari_lr, ari_gw))
            });
            match scored {
                Ok((ari_lr, ari_gw)) => {
                    record.ari_lr = Some(ari_lr);
                    record.ari_gw = Some(ari_gw);
                    record.delta_ari = Some(ari_lr - ari_gw);
                }
                Err(err) => record.error = Some(super::error_chain(&err)),
            }
            record
        })
        .to_vec()
}

fn aggregate(records: &[TrialRecord], method: &str, threshold: f64) -> MethodAggregate {
    let mut agg = MethodAggregate {
        method: method.to_string(),
        trials_ok: 0,
        trials_failed: 0,
        frac_lr_success: 0.0,
        frac_gw_success: 0.0,
        mean_ari_lr: 0.0,
        mean_ari_gw: 0.0,
        mean_delta_ari: 0.0,
    };
    for record in records.iter().filter(|r| r.method == method) {
        let (Some(lr), Some(gw), Some(delta)) = (record.ari_lr, record.ari_gw, record.delta_ari)
        else {
            agg.trials_failed += 1;
            continue;
        };
        agg.trials_ok += 1;
        if lr > threshold {
            agg.frac_lr_success += 1.0;
        }
        if gw > threshold {
            agg.frac_gw_success += 1.0;
        }
        agg.mean_ari_lr += lr;
        agg.mean_ari_gw += gw;
        agg.mean_delta_ari += delta;
    }
    if agg.trials_ok > 0 {
        let count = agg.trials_ok as f64;
        agg.frac_lr_success /= count;
        agg.frac_gw_success /= count;
        agg.mean_ari_lr /= count;
        agg.mean_ari_gw /= count;
        agg.mean_delta_ari /= count;
    }
    agg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(method: &str, trial: usize, lr: Option<f64>, gw: Option<f64>) -> TrialRecord {
        TrialRecord {
            trial,
            seed: 0,
            method: method.to_string(),
            d: 2,
            k: 2,
            ari_lr: lr,
            ari_gw: gw,
            delta_ari: lr.zip(gw).map(|(a, b)| a - b),
            error: if lr.is_none() { Some("boom".into()) } else { None },
        }
    }

    #[test]
    fn aggregates_count_only_completed_trials() {
        let records = vec![
            record("lse", 0, Some(1.0), Some(0.2)),
            record("lse", 1, Some(0.9), Some(0.3)),
            record("lse", 2, None, None),
            record("ase", 0, Some(0.1), Some(0.99)),
        ];
        let agg = aggregate(&records, "lse", 0.95);
        assert_eq!(agg.trials_ok, 2);
        assert_eq!(agg.trials_failed, 1);
        assert!((agg.frac_lr_success - 0.5).abs() < 1e-12);
        assert!((agg.mean_ari_lr - 0.95).abs() < 1e-12);
        assert!((agg.mean_delta_ari - ((0.8 + 0.6) / 2.0)).abs() < 1e-12);

        let ase = aggregate(&records, "ase", 0.95);
        assert_eq!(ase.trials_ok, 1);
        assert!((ase.frac_gw_success - 1.0).abs() < 1e-12);
    }

    #[test]
    fn built_in_fixture_loads_and_custom_fixture_is_validated() {
        let fixture = load_fixture(None).unwrap();
        assert_eq!(fixture.params.k(), 4);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fixture.json");
        let mut bad = two_truths_fixture();
        bad.block_names.pop();
        std::fs::write(&path, serde_json::to_string(&bad).unwrap()).unwrap();
        assert!(load_fixture(Some(&path)).is_err());
    }
}
