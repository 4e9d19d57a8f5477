//! Result records, per-cell summaries and their CSV / JSON emission.
//!
//! CSV columns, one record per row:
//!
//! `dataset,sweep,method,params,horizon,multiplier,seed,mse,mae,relative_improvement,wall_time_s,error`
//!
//! `method` is `none` for the baseline. Failed cells leave `mse`, `mae` and
//! `relative_improvement` empty and carry the message in `error`.
//! `relative_improvement` is `(baseline_mse - mse) / baseline_mse`, where
//! `baseline_mse` is the mean baseline MSE over seeds for the same dataset
//! and horizon.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use domshuffle_core::augment::Method;
use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;
use crate::error::{BenchError, Result};
use crate::runner::Sweep;

pub const CSV_HEADER: [&str; 12] = [
    "dataset",
    "sweep",
    "method",
    "params",
    "horizon",
    "multiplier",
    "seed",
    "mse",
    "mae",
    "relative_improvement",
    "wall_time_s",
    "error",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub sweep: Sweep,
    pub method: Option<Method>,
    pub params: String,
    pub horizon: usize,
    pub multiplier: usize,
    pub seed: u64,
    pub mse: Option<f64>,
    pub mae: Option<f64>,
    pub relative_improvement: Option<f64>,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

/// Mean and sample standard deviation across seeds of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub dataset: String,
    pub sweep: Sweep,
    pub method: Option<Method>,
    pub params: String,
    pub horizon: usize,
    pub multiplier: usize,
    pub runs: usize,
    pub failures: usize,
    pub mse_mean: Option<f64>,
    pub mse_std: Option<f64>,
    pub mae_mean: Option<f64>,
    pub mae_std: Option<f64>,
    pub relative_improvement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub summary: Vec<CellSummary>,
}

fn relative(baseline: f64, mse: f64) -> Option<f64> {
    (baseline > 0.0).then(|| (baseline - mse) / baseline)
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}

impl ExperimentResult {
    /// Fills relative improvements and builds the per-cell summary.
    pub fn from_records(mut records: Vec<RunRecord>) -> Self {
        let mut baseline: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
        for r in records.iter().filter(|r| r.sweep == Sweep::Baseline) {
            if let Some(mse) = r.mse {
                baseline.entry((r.dataset.clone(), r.horizon)).or_default().push(mse);
            }
        }
        let baseline: BTreeMap<(String, usize), f64> = baseline
            .into_iter()
            .map(|(key, v)| (key, v.iter().sum::<f64>() / v.len() as f64))
            .collect();
        for r in &mut records {
            let base = baseline.get(&(r.dataset.clone(), r.horizon));
            r.relative_improvement = match (base, r.mse) {
                (Some(&b), Some(mse)) => relative(b, mse),
                _ => None,
            };
        }

        // summary in first-appearance order
        let mut order: Vec<(String, Sweep, Option<Method>, String, usize, usize)> = Vec::new();
        let mut groups: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
        for r in &records {
            let key = (r.dataset.clone(), r.sweep, r.method, r.params.clone(), r.horizon, r.multiplier);
            let idx = match order.iter().position(|k| *k == key) {
                Some(i) => i,
                None => {
                    order.push(key);
                    order.len() - 1
                }
            };
            groups.entry(idx).or_default().push(r);
        }
        let summary = order
            .into_iter()
            .enumerate()
            .map(|(i, (dataset, sweep, method, params, horizon, multiplier))| {
                let rs = &groups[&i];
                let mses: Vec<f64> = rs.iter().filter_map(|r| r.mse).collect();
                let maes: Vec<f64> = rs.iter().filter_map(|r| r.mae).collect();
                let (mse_mean, mse_std) = mean_std(&mses);
                let (mae_mean, mae_std) = mean_std(&maes);
                let relative_improvement = match (baseline.get(&(dataset.clone(), horizon)), mse_mean) {
                    (Some(&b), Some(m)) => relative(b, m),
                    _ => None,
                };
                CellSummary {
                    dataset,
                    sweep,
                    method,
                    params,
                    horizon,
                    multiplier,
                    runs: rs.len(),
                    failures: rs.len() - mses.len(),
                    mse_mean,
                    mse_std,
                    mae_mean,
                    mae_std,
                    relative_improvement,
                }
            })
            .collect();
        Self { records, summary }
    }

    pub fn failures(&self) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(|r| r.error.is_some())
    }

    /// Summary rows of one sweep.
    pub fn sweep(&self, sweep: Sweep) -> impl Iterator<Item = &CellSummary> {
        self.summary.iter().filter(move |s| s.sweep == sweep)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `result` to `path` in `format`.
pub fn emit_results(result: &ExperimentResult, path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| BenchError::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| BenchError::io(path, e))?;
    match format {
        OutputFormat::Json => serde_json::to_writer_pretty(file, result)?,
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(file);
            w.write_record(CSV_HEADER)?;
            for r in &result.records {
                w.write_record([
                    r.dataset.clone(),
                    r.sweep.name().to_string(),
                    r.method.map_or_else(|| "none".to_string(), |m| m.name().to_string()),
                    r.params.clone(),
                    r.horizon.to_string(),
                    r.multiplier.to_string(),
                    r.seed.to_string(),
                    opt(r.mse),
                    opt(r.mae),
                    opt(r.relative_improvement),
                    r.wall_time_s.to_string(),
                    r.error.clone().unwrap_or_default(),
                ])?;
            }
            w.flush().map_err(|e| BenchError::io(path, e))?;
        }
    }
    Ok(())
}

/// Writes `results.<ext>` for every format into `dir`.
pub fn emit_all(result: &ExperimentResult, dir: impl AsRef<Path>, formats: &[OutputFormat]) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    formats
        .iter()
        .map(|&f| {
            let path = dir.join(format!("results.{}", f.extension()));
            emit_results(result, &path, f).map(|()| path)
        })
        .collect()
}

pub fn read_json(path: impl AsRef<Path>) -> Result<ExperimentResult> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| BenchError::io(path, e))?;
    Ok(serde_json::from_reader(file)?)
}
