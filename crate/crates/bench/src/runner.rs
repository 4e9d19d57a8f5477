//! Experiment grid execution.

use std::collections::BTreeMap;
use std::time::Instant;

use domshuffle_core::augment::{augment_copy, AugmentSpec, Band, Method};
use domshuffle_core::dataset::{self, DatasetSplits, Part, RawDataset, WindowSampler, WindowView};
use domshuffle_core::forecaster::{evaluate, Metrics, RidgeAccumulator};
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ModelConfig, BAND_GRID_K};
use crate::error::{BenchError, Result};
use crate::results::{ExperimentResult, RunRecord};

/// Augmented windows produced in parallel before being folded, in order,
/// into the normal equations.
const AUGMENT_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    Baseline,
    Main,
    KSweep,
    BandGrid,
    SizeSweep,
}

impl Sweep {
    pub fn name(self) -> &'static str {
        match self {
            Sweep::Baseline => "baseline",
            Sweep::Main => "main",
            Sweep::KSweep => "k_sweep",
            Sweep::BandGrid => "band_grid",
            Sweep::SizeSweep => "size_sweep",
        }
    }
}

/// One unit of work: train on (possibly augmented) windows, score on test.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub sweep: Sweep,
    /// `None` for the no-augmentation baseline.
    pub spec: Option<AugmentSpec>,
    pub horizon: usize,
    pub multiplier: usize,
    pub seed: u64,
    pub auto_k: bool,
}

impl Cell {
    pub fn params(&self) -> String {
        match &self.spec {
            None => String::new(),
            Some(spec) if self.auto_k => {
                let d = spec.describe();
                d.replacen(&format!("k={}", spec.k), "k=auto", 1)
            }
            Some(spec) => spec.describe(),
        }
    }
}

fn base_shuffle(config: &ExperimentConfig) -> AugmentSpec {
    config
        .methods
        .iter()
        .find(|m| m.method == Method::DominantShuffle)
        .cloned()
        .unwrap_or_else(|| AugmentSpec::new(Method::DominantShuffle))
}

/// Every cell of the configured grid, in output order.
pub fn plan(config: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    let primary_multiplier = config.size_multipliers[0];
    let mut push = |sweep: Sweep, spec: Option<&AugmentSpec>, multiplier: usize, auto_k: bool| {
        for &horizon in &config.horizons {
            for &seed in &config.seeds {
                cells.push(Cell {
                    sweep,
                    spec: spec.map(|s| s.clone().with_seed(seed)),
                    horizon,
                    multiplier,
                    seed,
                    auto_k,
                });
            }
        }
    };

    push(Sweep::Baseline, None, 1, false);
    for spec in &config.methods {
        for &m in &config.size_multipliers {
            let auto = config.auto_k && spec.method == Method::DominantShuffle;
            push(Sweep::Main, Some(spec), m, auto);
        }
    }
    if config.run_k_sweep {
        let base = base_shuffle(config);
        for &k in &config.k_sweep {
            push(Sweep::KSweep, Some(&base.clone().with_k(k)), primary_multiplier, false);
        }
    }
    if config.band_grid {
        for method in [Method::DominantShuffle, Method::FreqMask, Method::FreqNoise, Method::FreqRandom] {
            for band in [Band::Dominant, Band::Minor, Band::Full] {
                let spec = AugmentSpec::new(method).with_k(BAND_GRID_K).with_band(band);
                push(Sweep::BandGrid, Some(&spec), primary_multiplier, false);
            }
        }
    }
    if !config.size_sweep.is_empty() {
        let base = base_shuffle(config);
        for &m in &config.size_sweep {
            push(Sweep::SizeSweep, Some(&base), m, false);
        }
    }
    cells
}

/// Normalized data and splits for one horizon.
pub struct Prepared {
    values: Array2<f64>,
    splits: DatasetSplits,
    sampler: WindowSampler,
}

impl Prepared {
    pub fn new(dataset: &RawDataset, config: &ExperimentConfig, horizon: usize) -> Result<Self> {
        let sampler = WindowSampler::new(config.lookback, horizon).with_stride(config.dataset.stride);
        let splits = dataset::split(dataset, config.dataset.split, &sampler)?;
        let values = splits.normalizer.apply(dataset.values.view())?;
        Ok(Self {
            values,
            splits,
            sampler,
        })
    }

    pub fn splits(&self) -> &DatasetSplits {
        &self.splits
    }

    pub fn view(&self, part: Part) -> Result<WindowView<'_>> {
        let range = self.splits.window_range(part, self.sampler.lookback);
        Ok(WindowView::new(self.values.view(), range, self.sampler)?)
    }

    /// Fits on train windows plus `multiplier - 1` augmented copies each,
    /// then scores on `eval`.
    pub fn train_and_evaluate(
        &self,
        spec: Option<&AugmentSpec>,
        multiplier: usize,
        model: ModelConfig,
        eval: Part,
    ) -> Result<Metrics> {
        let ModelConfig::Ridge { lambda } = model;
        let train = self.view(Part::Train)?;
        let n = train.len();
        let mut acc = RidgeAccumulator::new(self.sampler.lookback, self.sampler.horizon);
        for i in 0..n {
            acc.push(&train.get(i)?)?;
        }
        if let Some(spec) = spec {
            for copy in 1..multiplier {
                for chunk_start in (0..n).step_by(AUGMENT_CHUNK) {
                    let chunk_end = (chunk_start + AUGMENT_CHUNK).min(n);
                    let augmented = (chunk_start..chunk_end)
                        .into_par_iter()
                        .map(|i| augment_copy(&train, i, copy, spec))
                        .collect::<domshuffle_core::Result<Vec<_>>>()?;
                    for aug in &augmented {
                        acc.push(&aug.window)?;
                    }
                }
            }
        }
        let model = acc.solve(lambda)?;
        Ok(evaluate(&model, &self.view(eval)?)?)
    }
}

fn run_cell(prepared: &std::result::Result<Prepared, String>, cell: &Cell, config: &ExperimentConfig) -> (Result<Metrics>, Option<usize>) {
    let prepared = match prepared {
        Ok(p) => p,
        Err(msg) => return (Err(BenchError::Stage(msg.clone())), None),
    };
    let Some(spec) = &cell.spec else {
        return (prepared.train_and_evaluate(None, 1, config.model, Part::Test), None);
    };
    if !cell.auto_k {
        return (prepared.train_and_evaluate(Some(spec), cell.multiplier, config.model, Part::Test), None);
    }
    // choose k on validation, never on test
    let mut best: Option<(f64, usize)> = None;
    for &k in &config.k_sweep {
        let candidate = spec.clone().with_k(k);
        match prepared.train_and_evaluate(Some(&candidate), cell.multiplier, config.model, Part::Validation) {
            Ok(m) if best.is_none_or(|(mse, _)| m.mse < mse) => best = Some((m.mse, k)),
            Ok(_) => {}
            Err(e) => return (Err(e), None),
        }
    }
    let (_, k) = best.expect("k_sweep is non-empty");
    let chosen = spec.clone().with_k(k);
    (
        prepared.train_and_evaluate(Some(&chosen), cell.multiplier, config.model, Part::Test),
        Some(k),
    )
}

/// Loads the configured dataset and runs the full grid.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let dataset = dataset::load_csv(&config.dataset.path)?;
    run_on_dataset(config, &dataset)
}

/// Runs the grid on an already loaded dataset.
///
/// Cells run in parallel on `config.workers` threads. Each cell depends only
/// on its own (horizon, spec, multiplier, seed), so the numbers do not depend
/// on the worker count or on which other cells are configured.
pub fn run_on_dataset(config: &ExperimentConfig, dataset: &RawDataset) -> Result<ExperimentResult> {
    config.validate()?;
    let cells = plan(config);
    let prepared: BTreeMap<usize, std::result::Result<Prepared, String>> = config
        .horizons
        .iter()
        .map(|&h| (h, Prepared::new(dataset, config, h).map_err(|e| e.to_string())))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| BenchError::Config(format!("cannot start {} workers: {e}", config.workers)))?;
    let records: Vec<RunRecord> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let started = Instant::now();
                let (outcome, chosen_k) = run_cell(&prepared[&cell.horizon], cell, config);
                let wall = started.elapsed().as_secs_f64();
                let mut params = cell.params();
                if let Some(k) = chosen_k {
                    params = params.replacen("k=auto", &format!("k=auto:{k}"), 1);
                }
                if let Err(e) = &outcome {
                    log::warn!("cell {} {} H={} seed={} failed: {e}", cell.sweep.name(), params, cell.horizon, cell.seed);
                }
                RunRecord {
                    dataset: dataset.name.clone(),
                    sweep: cell.sweep,
                    method: cell.spec.as_ref().map(|s| s.method),
                    params,
                    horizon: cell.horizon,
                    multiplier: cell.multiplier,
                    seed: cell.seed,
                    mse: outcome.as_ref().ok().map(|m| m.mse),
                    mae: outcome.as_ref().ok().map(|m| m.mae),
                    relative_improvement: None,
                    wall_time_s: wall,
                    error: outcome.err().map(|e| e.to_string()),
                }
            })
            .collect()
    });
    Ok(ExperimentResult::from_records(records))
}
