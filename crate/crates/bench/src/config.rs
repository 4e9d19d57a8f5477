use std::fs;
use std::path::{Path, PathBuf};

use domshuffle_core::augment::AugmentSpec;
use domshuffle_core::dataset::SplitPolicy;
use domshuffle_core::forecaster::DEFAULT_LAMBDA;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

pub const LONG_HORIZONS: [usize; 4] = [96, 192, 336, 720];
pub const SHORT_HORIZONS: [usize; 4] = [12, 24, 36, 48];
pub const DEFAULT_K_SWEEP: [usize; 7] = [1, 2, 3, 4, 5, 8, 10];
pub const DEFAULT_LOOKBACK: usize = 96;
/// k used for the dominant band in the band x operator grid.
pub const BAND_GRID_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub split: SplitPolicy,
    #[serde(default = "one")]
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Ridge { lambda: f64 },
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::Ridge {
            lambda: DEFAULT_LAMBDA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            formats: default_formats(),
        }
    }
}

/// One experiment grid over a single dataset.
///
/// Besides the main `methods x horizons x size_multipliers x seeds` grid, a
/// run can include a k sweep of dominant shuffle, the band x operator grid
/// and an augmentation-size sweep. A no-augmentation baseline is always run
/// for every (horizon, seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    #[serde(default = "default_lookback")]
    pub lookback: usize,
    #[serde(default = "default_horizons")]
    pub horizons: Vec<usize>,
    #[serde(default)]
    pub methods: Vec<AugmentSpec>,
    #[serde(default = "default_multipliers")]
    pub size_multipliers: Vec<usize>,
    /// k values for the dominant-shuffle sweep; also the candidates for `auto_k`.
    #[serde(default = "default_k_sweep")]
    pub k_sweep: Vec<usize>,
    #[serde(default)]
    pub run_k_sweep: bool,
    /// Pick k for dominant-shuffle methods by validation MSE over `k_sweep`.
    #[serde(default)]
    pub auto_k: bool,
    #[serde(default)]
    pub band_grid: bool,
    /// Multipliers for the dominant-shuffle size sweep; empty disables it.
    #[serde(default)]
    pub size_sweep: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default = "one")]
    pub workers: usize,
}

fn one() -> usize {
    1
}
fn default_lookback() -> usize {
    DEFAULT_LOOKBACK
}
fn default_horizons() -> Vec<usize> {
    LONG_HORIZONS.to_vec()
}
fn default_multipliers() -> Vec<usize> {
    vec![2]
}
fn default_k_sweep() -> Vec<usize> {
    DEFAULT_K_SWEEP.to_vec()
}
fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}
fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

impl ExperimentConfig {
    /// Defaults for everything but the dataset path.
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            dataset: DatasetConfig {
                path: path.into(),
                split: SplitPolicy::Auto,
                stride: 1,
            },
            lookback: DEFAULT_LOOKBACK,
            horizons: default_horizons(),
            methods: Vec::new(),
            size_multipliers: default_multipliers(),
            k_sweep: default_k_sweep(),
            run_k_sweep: false,
            auto_k: false,
            band_grid: false,
            size_sweep: Vec::new(),
            seeds: default_seeds(),
            model: ModelConfig::default(),
            output: OutputConfig::default(),
            workers: 1,
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let config: Self = serde_json::from_str(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.lookback == 0 {
            return bad("lookback must be at least 1".into());
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return bad("horizons must be a non-empty list of positive lengths".into());
        }
        if self.size_multipliers.is_empty() || self.size_multipliers.contains(&0) {
            return bad("size_multipliers must be a non-empty list of values >= 1".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if (self.run_k_sweep || self.auto_k) && (self.k_sweep.is_empty() || self.k_sweep.contains(&0)) {
            return bad("k_sweep must be a non-empty list of values >= 1".into());
        }
        if self.size_sweep.contains(&0) {
            return bad("size_sweep values must be >= 1".into());
        }
        if self.dataset.stride == 0 {
            return bad("dataset.stride must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        let ModelConfig::Ridge { lambda } = self.model;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return bad(format!("ridge lambda must be finite and >= 0, got {lambda}"));
        }
        for spec in &self.methods {
            spec.validate().map_err(|e| BenchError::Config(format!("method {}: {e}", spec.method)))?;
        }
        Ok(())
    }
}
