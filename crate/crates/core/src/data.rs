//! Grids, trajectory samples, CSV ingestion and train/test splitting.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeded_rng;

/// Strictly increasing evaluation times in (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    times: Vec<f64>,
    step: f64,
}

impl Grid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                times.len()
            )));
        }
        if let Some(bad) = times.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite time {bad}")));
        }
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::GridNotIncreasing {
                    position: i + 1,
                    previous: w[0],
                    current: w[1],
                });
            }
        }
        if times[0] <= 0.0 || times[times.len() - 1] > 1.0 {
            return Err(Error::InvalidGrid(format!(
                "times must lie in (0, 1], got [{}, {}]",
                times[0],
                times[times.len() - 1]
            )));
        }
        let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        Ok(Self { times, step })
    }

    /// `m` equispaced points `1/m, 2/m, …, 1`.
    pub fn equispaced(m: usize) -> Result<Self> {
        Self::new((1..=m).map(|i| i as f64 / m as f64).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Nominal spacing `(t_m - t_1) / (m - 1)`.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn time(&self, index: usize) -> f64 {
        self.times[index]
    }

    /// Index of the grid time nearest to `t`, if it lies within half a step.
    pub fn snap(&self, t: f64) -> Option<usize> {
        let idx = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return Some(i),
            Err(i) => i,
        };
        let mut best: Option<(usize, f64)> = None;
        for cand in [idx.wrapping_sub(1), idx] {
            if let Some(&x) = self.times.get(cand) {
                let d = (x - t).abs();
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((cand, d));
                }
            }
        }
        let tol = 0.5 * self.step * (1.0 + 1e-9);
        best.filter(|&(_, d)| d <= tol).map(|(i, _)| i)
    }
}

/// Affine map applied at ingestion: `original = origin + span * t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeRescale {
    pub origin: f64,
    pub span: f64,
}

impl TimeRescale {
    pub fn to_original(&self, t: f64) -> f64 {
        self.origin + self.span * t
    }
}

/// `n` trajectories sampled on a common grid plus their scalar responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    grid: Grid,
    trajectories: DMatrix<f64>,
    responses: Vec<f64>,
    rescale: Option<TimeRescale>,
}

impl Dataset {
    pub fn new(grid: Grid, trajectories: DMatrix<f64>, responses: Vec<f64>) -> Result<Self> {
        if trajectories.ncols() != grid.len() {
            return Err(Error::InvalidDataset(format!(
                "trajectories have {} columns, grid has {} points",
                trajectories.ncols(),
                grid.len()
            )));
        }
        if responses.len() != trajectories.nrows() {
            return Err(Error::InvalidDataset(format!(
                "{} responses for {} trajectories",
                responses.len(),
                trajectories.nrows()
            )));
        }
        if trajectories.iter().chain(&responses).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite entry".into()));
        }
        Ok(Self {
            grid,
            trajectories,
            responses,
            rescale: None,
        })
    }

    pub fn with_rescale(mut self, rescale: Option<TimeRescale>) -> Self {
        self.rescale = rescale;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Row `i` is trajectory `X_i` on the grid.
    pub fn trajectories(&self) -> &DMatrix<f64> {
        &self.trajectories
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    /// Time map applied when the file's grid was outside (0, 1].
    pub fn rescale(&self) -> Option<TimeRescale> {
        self.rescale
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn m(&self) -> usize {
        self.grid.len()
    }

    /// New dataset holding the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let traj = self.trajectories.select_rows(rows);
        let resp = rows.iter().map(|&r| self.responses[r]).collect();
        Dataset {
            grid: self.grid.clone(),
            trajectories: traj,
            responses: resp,
            rescale: self.rescale,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: Dataset,
    pub test: Dataset,
}

/// Random partition: a seeded permutation, first `n_train` rows to train.
pub fn split(dataset: &Dataset, n_train: usize, seed: u64) -> Result<SplitDataset> {
    let n = dataset.n();
    if n_train == 0 || n_train >= n {
        return Err(Error::InvalidArgument(format!(
            "n_train must be in (0, {n}), got {n_train}"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seeded_rng(seed));
    Ok(SplitDataset {
        train: dataset.select_rows(&perm[..n_train]),
        test: dataset.select_rows(&perm[n_train..]),
    })
}

/// Parsed CSV contents before assembly into a [`Dataset`].
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub grid: Grid,
    pub trajectories: DMatrix<f64>,
    pub responses: Option<Vec<f64>>,
    pub rescale: Option<TimeRescale>,
}

/// Reads a dataset file: header `t_1,…,t_m,Y`, then one row per curve.
pub fn load_dataset_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let table = read_csv_table(path, true)?;
    let responses = table.responses.expect("response column required");
    Ok(Dataset::new(table.grid, table.trajectories, responses)?.with_rescale(table.rescale))
}

/// Reads a CSV whose trailing `Y` column is optional.
pub fn read_csv_table(path: impl AsRef<Path>, require_response: bool) -> Result<CsvTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_csv(path, &text, require_response)
}

fn parse_csv(path: &Path, text: &str, require_response: bool) -> Result<CsvTable> {
    let err = |line: usize, column: usize, message: String| Error::Csv {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };

    let mut lines = text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());

    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, 1, "empty file".into()))?;
    let mut tokens: Vec<&str> = header.split(',').map(str::trim).collect();
    let has_response = tokens.last() == Some(&"Y");
    if has_response {
        tokens.pop();
    } else if require_response {
        return Err(err(
            1,
            tokens.len(),
            "malformed header: last column must be \"Y\"".into(),
        ));
    }
    let mut raw_times = Vec::with_capacity(tokens.len());
    for (c, tok) in tokens.iter().enumerate() {
        let t: f64 = tok
            .parse()
            .map_err(|_| err(1, c + 1, format!("malformed header: grid time {tok:?}")))?;
        if !t.is_finite() {
            return Err(err(1, c + 1, format!("malformed header: grid time {tok:?}")));
        }
        raw_times.push(t);
    }
    if raw_times.len() < 2 {
        return Err(err(1, 1, "malformed header: need at least 2 grid times".into()));
    }
    for (i, w) in raw_times.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(err(1, i + 2, "grid not strictly increasing".into()));
        }
    }
    let (times, rescale) = normalize_times(&raw_times);
    let grid = Grid::new(times)?;

    let m = grid.len();
    let width = m + usize::from(has_response);
    let mut values = Vec::new();
    let mut responses = Vec::new();
    let mut n = 0;
    for (lineno, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != width {
            return Err(err(
                lineno + 1,
                cells.len().min(width) + 1,
                format!("ragged row: expected {width} cells, found {}", cells.len()),
            ));
        }
        for (c, cell) in cells.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| err(lineno + 1, c + 1, format!("non-numeric cell {cell:?}")))?;
            if c < m {
                values.push(v);
            } else {
                responses.push(v);
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(err(2, 1, "no data rows".into()));
    }
    Ok(CsvTable {
        grid,
        trajectories: DMatrix::from_row_slice(n, m, &values),
        responses: has_response.then_some(responses),
        rescale,
    })
}

/// Maps times outside (0, 1] affinely so the last time is 1 and the first
/// sits one nominal step above 0.
fn normalize_times(raw: &[f64]) -> (Vec<f64>, Option<TimeRescale>) {
    let first = raw[0];
    let last = raw[raw.len() - 1];
    if first > 0.0 && last <= 1.0 {
        return (raw.to_vec(), None);
    }
    let step = (last - first) / (raw.len() - 1) as f64;
    let origin = first - step;
    let span = last - origin;
    let mut times: Vec<f64> = raw.iter().map(|t| (t - origin) / span).collect();
    let n = times.len();
    times[n - 1] = 1.0;
    (times, Some(TimeRescale { origin, span }))
}

/// Writes the dataset in the same layout [`load_dataset_csv`] reads.
pub fn write_dataset_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    let header: Vec<String> = dataset.grid.times().iter().map(|t| t.to_string()).collect();
    writeln!(out, "{},Y", header.join(","))?;
    let traj = dataset.trajectories();
    for (i, y) in dataset.responses().iter().enumerate() {
        let row: Vec<String> = traj.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{},{}", row.join(","), y)?;
    }
    out.flush()?;
    Ok(())
}
