//! Replicated simulation experiments, selection on external datasets, and
//! report I/O.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data::{split, Dataset, Grid, TimeRescale};
use crate::error::{Error, Result};
use crate::estimators::{estimate_moments, MomentEstimates};
use crate::metrics::score_selection;
use crate::order::{estimate_p, OrderMethod, QmaxSeries};
use crate::processes::{gen_response, grid_cov_factor, sample_with_factor, ProcessSpec, RegressionModelSpec};
use crate::regressor::{fit, rmse, LinearPredictor};
use crate::selector::{greedy_select, SelectionConstraints, SelectionPath};
use crate::derive_seed;

pub const SOFTWARE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest tolerated fraction of failed replications.
pub const MAX_FAILURE_FRACTION: f64 = 0.10;

/// `Q̂max(P)` at or below this fraction of the response variance counts as
/// no explained variation at all.
const NEGLIGIBLE_EXPLAINED: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub process: ProcessSpec,
    pub model: RegressionModelSpec,
    pub n_train: usize,
    pub n_test: usize,
    pub grid_size: usize,
    pub reps: usize,
    pub constraints: SelectionConstraints,
    pub order_method: OrderMethod,
    pub rho: f64,
    pub base_seed: u64,
}

impl Default for ExperimentConfig {
    /// Bm, model 1, 100 train / 50 test, 100 grid points, σ = 0.2, at most
    /// 10 points, 100 replications.
    fn default() -> Self {
        Self {
            process: ProcessSpec::Bm,
            model: RegressionModelSpec::model1(0.2),
            n_train: 100,
            n_test: 50,
            grid_size: 100,
            reps: 100,
            constraints: SelectionConstraints {
                delta: 0.01,
                max_p: 10,
                denom_tol: None,
            },
            order_method: OrderMethod::Kmeans,
            rho: 0.01,
            base_seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn new(process: ProcessSpec, model: RegressionModelSpec) -> Self {
        Self {
            process,
            model,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.process.validate()?;
        self.model.validate()?;
        self.constraints.validate()?;
        if self.reps < 1 {
            return Err(Error::InvalidArgument("reps must be >= 1".into()));
        }
        if self.n_train < 2 || self.n_test < 1 || self.n_train + self.n_test < 4 {
            return Err(Error::InvalidArgument(format!(
                "need n_train >= 2, n_test >= 1 and n_train + n_test >= 4, got {} + {}",
                self.n_train, self.n_test
            )));
        }
        if self.grid_size < self.constraints.max_p + 1 {
            return Err(Error::InvalidArgument(format!(
                "grid_size {} must exceed max_p {}",
                self.grid_size, self.constraints.max_p
            )));
        }
        if self.order_method == OrderMethod::Threshold && !(self.rho > 0.0) {
            return Err(Error::InvalidArgument("rho must be > 0".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::equispaced(self.grid_size)
    }

    pub fn label(&self) -> String {
        format!("{} / model {}", self.process.label(), self.model.model_id)
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep_index: usize,
    pub seed: u64,
    pub rmse: f64,
    /// Only for models with true impact points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hausdorff: Option<f64>,
    pub p_hat: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_star: Option<usize>,
    pub selected_times: Vec<f64>,
    pub qmax_series: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub wall_time_secs: f64,
}

impl ReplicationRecord {
    /// Equality on everything except timing.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let mut a = self.clone();
        a.wall_time_secs = other.wall_time_secs;
        &a == other
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedReplication {
    pub rep_index: usize,
    pub error: String,
}

/// Mean and sample standard deviation (divisor `count − 1`, zero for a
/// single value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                mean: f64::NAN,
                sd: f64::NAN,
                count,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, sd, count }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub label: String,
    pub software_version: String,
    pub config: ExperimentConfig,
    pub records: Vec<ReplicationRecord>,
    pub failures: Vec<FailedReplication>,
    pub rmse: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hausdorff: Option<Summary>,
    pub p_hat: Summary,
}

/// Result of the estimate → select → order steps on one training sample.
#[derive(Debug, Clone)]
pub struct FittedSelection {
    pub path: SelectionPath,
    pub series: Option<QmaxSeries>,
    pub p_hat: usize,
    pub predictor: LinearPredictor,
    pub warnings: Vec<String>,
}

/// Greedy selection, order estimation, truncation and fit.
pub fn fit_selection(
    est: &MomentEstimates,
    grid: &Grid,
    constraints: &SelectionConstraints,
    order_method: OrderMethod,
    rho: f64,
) -> Result<FittedSelection> {
    let path = greedy_select(est, grid, constraints)?;
    let mut warnings = Vec::new();
    if path.is_empty() {
        warnings.push("no admissible candidate; empty selection".into());
        let predictor = fit(est, grid, &[])?;
        return Ok(FittedSelection {
            path,
            series: None,
            p_hat: 0,
            predictor,
            warnings,
        });
    }
    let series = QmaxSeries::from_values(path.qmax_after.clone())?;
    let response_var = est.centered_response().iter().map(|y| y * y).sum::<f64>() / est.n() as f64;
    let explained = series.values[series.len() - 1];
    let p_hat = if explained <= NEGLIGIBLE_EXPLAINED * response_var {
        warnings.push("no explained variation; keeping one point".into());
        1
    } else {
        let order = estimate_p(&series, order_method, rho)?;
        if let Some(note) = order.note {
            warnings.push(note);
        }
        order.p_hat
    };
    let predictor = fit(est, grid, &path.selected[..p_hat])?;
    Ok(FittedSelection {
        path,
        series: Some(series),
        p_hat,
        predictor,
        warnings,
    })
}

/// Runs one replication with a precomputed covariance factor for the grid.
fn replicate(
    config: &ExperimentConfig,
    grid: &Grid,
    factor: &[f64],
    rep_index: usize,
) -> Result<ReplicationRecord> {
    let start = Instant::now();
    let seed = config.base_seed.wrapping_add(rep_index as u64);
    let n = config.n_train + config.n_test;
    let paths = sample_with_factor(&config.process, grid, factor, n, derive_seed(seed, 0));
    let responses = gen_response(&config.model, &paths, grid, derive_seed(seed, 1))?;
    let data = Dataset::new(grid.clone(), paths, responses)?;
    let parts = split(&data, config.n_train, derive_seed(seed, 2))?;
    let est = estimate_moments(&parts.train)?;
    let sel = fit_selection(&est, grid, &config.constraints, config.order_method, config.rho)?;
    let predicted = sel.predictor.predict(grid, parts.test.trajectories())?;
    let err = rmse(&predicted, parts.test.responses())?;
    let selected_times = sel.predictor.times.clone();
    let (hausdorff, p_star) = match config.model.sparse_points() {
        Some(truth) => {
            let score = score_selection(&selected_times, truth)?;
            (Some(score.hausdorff), Some(score.p_star))
        }
        None => (None, None),
    };
    Ok(ReplicationRecord {
        rep_index,
        seed,
        rmse: err,
        hausdorff,
        p_hat: sel.p_hat,
        p_star,
        selected_times,
        qmax_series: sel.path.qmax_after,
        warnings: sel.warnings,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// One replication: simulate, split, select, estimate `p̂`, fit, score.
/// Seeded by `base_seed + rep_index`.
pub fn run_replication(config: &ExperimentConfig, rep_index: usize) -> Result<ReplicationRecord> {
    config.validate()?;
    let grid = config.grid()?;
    let factor = grid_cov_factor(&config.process, &grid)?;
    replicate(config, &grid, &factor, rep_index)
}

/// All replications, in parallel on the current rayon pool, then summaries.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let grid = config.grid()?;
    let factor = grid_cov_factor(&config.process, &grid)?;
    let outcomes: Vec<Result<ReplicationRecord>> = (0..config.reps)
        .into_par_iter()
        .map(|r| replicate(config, &grid, &factor, r))
        .collect();
    assemble_report(config, outcomes)
}

/// Same as [`run_experiment`] without any threading.
pub fn run_experiment_serial(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let grid = config.grid()?;
    let factor = grid_cov_factor(&config.process, &grid)?;
    let outcomes = (0..config.reps)
        .map(|r| replicate(config, &grid, &factor, r))
        .collect();
    assemble_report(config, outcomes)
}

/// Runs `f` on a dedicated pool with `jobs` threads.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn assemble_report(
    config: &ExperimentConfig,
    outcomes: Vec<Result<ReplicationRecord>>,
) -> Result<ExperimentReport> {
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (rep_index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => failures.push(FailedReplication {
                rep_index,
                error: e.to_string(),
            }),
        }
    }
    if failures.len() as f64 > MAX_FAILURE_FRACTION * config.reps as f64 {
        return Err(Error::TooManyFailures {
            failed: failures.len(),
            reps: config.reps,
        });
    }
    let rmse = Summary::of(&records.iter().map(|r| r.rmse).collect::<Vec<_>>());
    let p_hat = Summary::of(&records.iter().map(|r| r.p_hat as f64).collect::<Vec<_>>());
    let hausdorff = config.model.sparse_points().map(|_| {
        Summary::of(&records.iter().filter_map(|r| r.hausdorff).collect::<Vec<_>>())
    });
    Ok(ExperimentReport {
        label: config.label(),
        software_version: SOFTWARE_VERSION.to_string(),
        config: config.clone(),
        records,
        failures,
        rmse,
        hausdorff,
        p_hat,
    })
}

/// JSON emitted by the `select` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub selected_indices: Vec<usize>,
    pub selected_times: Vec<f64>,
    pub qmax_series: Vec<f64>,
    pub log_gaps: Vec<f64>,
    pub p_hat: usize,
    pub order_method: OrderMethod,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub warnings: Vec<String>,
    /// Full greedy path, including points beyond `p_hat`.
    #[serde(default)]
    pub path_indices: Vec<usize>,
    #[serde(default)]
    pub train_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_rescale: Option<TimeRescale>,
}

impl SelectionReport {
    pub fn predictor(&self) -> LinearPredictor {
        LinearPredictor {
            indices: self.selected_indices.clone(),
            times: self.selected_times.clone(),
            coefficients: self.coefficients.clone(),
            intercept: self.intercept,
            train_n: self.train_n,
        }
    }
}

/// Runs estimation, selection, order estimation and the fit on the whole
/// dataset.
pub fn select_on_dataset(
    dataset: &Dataset,
    constraints: &SelectionConstraints,
    order_method: OrderMethod,
    rho: f64,
) -> Result<SelectionReport> {
    let est = estimate_moments(dataset)?;
    let sel = fit_selection(&est, dataset.grid(), constraints, order_method, rho)?;
    let mut warnings = sel.warnings;
    if let Some(r) = dataset.rescale() {
        warnings.push(format!(
            "grid times rescaled to (0, 1]: original = {} + {} * t",
            r.origin, r.span
        ));
    }
    Ok(SelectionReport {
        selected_indices: sel.predictor.indices.clone(),
        selected_times: sel.predictor.times.clone(),
        qmax_series: sel.path.qmax_after.clone(),
        log_gaps: sel.series.map(|s| s.log_gaps).unwrap_or_default(),
        p_hat: sel.p_hat,
        order_method,
        coefficients: sel.predictor.coefficients,
        intercept: sel.predictor.intercept,
        warnings,
        path_indices: sel.path.selected,
        train_n: est.n(),
        time_rescale: dataset.rescale(),
    })
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_report(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    write_json(report, path)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ExperimentReport> {
    read_json(path)
}

/// Several experiments rendered as one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSuite {
    pub experiments: Vec<ExperimentConfig>,
    /// Display scale for the RMSE column, e.g. `0.01`.
    #[serde(default)]
    pub rmse_scale: Option<f64>,
    #[serde(default)]
    pub hausdorff_scale: Option<f64>,
}

/// Accepted shapes of a benchmark config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BenchmarkConfig {
    Suite(BenchmarkSuite),
    Single(ExperimentConfig),
}

impl BenchmarkConfig {
    pub fn into_suite(self) -> BenchmarkSuite {
        match self {
            BenchmarkConfig::Suite(s) => s,
            BenchmarkConfig::Single(c) => BenchmarkSuite {
                experiments: vec![c],
                rmse_scale: None,
                hausdorff_scale: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub software_version: String,
    pub rmse_scale: Option<f64>,
    pub hausdorff_scale: Option<f64>,
    pub reports: Vec<ExperimentReport>,
}

pub fn run_suite(suite: &BenchmarkSuite) -> Result<BenchmarkReport> {
    let reports = suite
        .experiments
        .iter()
        .map(run_experiment)
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkReport {
        software_version: SOFTWARE_VERSION.to_string(),
        rmse_scale: suite.rmse_scale,
        hausdorff_scale: suite.hausdorff_scale,
        reports,
    })
}

fn scale_label(scale: f64) -> String {
    format!("{scale:e}")
}

fn cell(s: &Summary, scale: Option<f64>) -> String {
    let k = scale.unwrap_or(1.0);
    format!("{:.4} ({:.4})", s.mean / k, s.sd / k)
}

/// Table text: one row per experiment, `mean (sd)` per column.
pub fn render_table_csv(report: &BenchmarkReport) -> String {
    let col = |name: &str, scale: Option<f64>| match scale {
        Some(s) => format!("{name} (scale {})", scale_label(s)),
        None => name.to_string(),
    };
    let mut out = format!(
        "process,model,{},{},p_hat,failed\n",
        col("rmse", report.rmse_scale),
        col("hausdorff", report.hausdorff_scale)
    );
    for r in &report.reports {
        let haus = r
            .hausdorff
            .as_ref()
            .map(|h| cell(h, report.hausdorff_scale))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.config.process.label(),
            r.config.model.model_id,
            cell(&r.rmse, report.rmse_scale),
            haus,
            cell(&r.p_hat, None),
            r.failures.len()
        ));
    }
    out
}

pub fn write_table_csv(report: &BenchmarkReport, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render_table_csv(report))?;
    Ok(())
}
