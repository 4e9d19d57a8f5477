//! Benchmark CSV ingestion, chronological splits, z-score normalization and
//! sliding-window sampling.

use std::borrow::Cow;
use std::fs::File;
use std::io::Read;
use std::ops::Range;
use std::path::Path;

use ndarray::{s, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::augment::{SeriesWindow, WindowSource};
use crate::error::{Error, Result};

/// A multivariate series as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub name: String,
    pub timestamps: Vec<String>,
    /// `rows x D`
    pub values: Array2<f64>,
    pub variate_names: Vec<String>,
}

impl RawDataset {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn variates(&self) -> usize {
        self.values.ncols()
    }
}

/// Loads a CSV whose first column is a timestamp and whose remaining columns
/// are numeric variates. The dataset is named after the file stem.
pub fn load_csv(path: impl AsRef<Path>) -> Result<RawDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, name)
}

pub fn read_csv<R: Read>(reader: R, name: impl Into<String>) -> Result<RawDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .clone();
    if header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: format!("need a timestamp column and at least one variate, found {} columns", header.len()),
        });
    }
    let variate_names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let d = variate_names.len();

    let mut timestamps = Vec::new();
    let mut flat = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let fallback_line = i as u64 + 2;
        let record = record.map_err(|e| csv_error(e, fallback_line))?;
        let line = record.position().map_or(fallback_line, |p| p.line());
        timestamps.push(record[0].to_owned());
        for (j, field) in record.iter().skip(1).enumerate() {
            let missing = || Error::MissingValue {
                line,
                column: variate_names[j].clone(),
            };
            if field.is_empty() {
                return Err(missing());
            }
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column '{}': cannot parse '{field}' as a number", variate_names[j]),
            })?;
            if !v.is_finite() {
                return Err(missing());
            }
            flat.push(v);
        }
    }
    let values = Array2::from_shape_vec((timestamps.len(), d), flat)
        .expect("every record contributed D values");
    Ok(RawDataset {
        name: name.into(),
        timestamps,
        values,
        variate_names,
    })
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Parse {
            line,
            message: e.to_string(),
        },
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Parse {
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        _ => Error::Parse {
            line,
            message: e.to_string(),
        },
    }
}

/// Named benchmarks with fixed `(train, validation, test)` row counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    /// ETTh1, ETTh2
    EttHourly,
    /// ETTm1, ETTm2
    EttMinute,
    Exchange,
    Weather,
    Electricity,
    Traffic,
    Pems03,
    Pems04,
    Pems07,
    Pems08,
}

impl Benchmark {
    pub fn counts(self) -> (usize, usize, usize) {
        match self {
            Benchmark::EttHourly => (8545, 2881, 2881),
            Benchmark::EttMinute => (34465, 11521, 11521),
            Benchmark::Exchange => (5120, 665, 1422),
            Benchmark::Weather => (36792, 5271, 10540),
            Benchmark::Electricity => (18317, 2633, 5261),
            Benchmark::Traffic => (12185, 1757, 3509),
            Benchmark::Pems03 => (15617, 5135, 5135),
            Benchmark::Pems04 => (10172, 3375, 3375),
            Benchmark::Pems07 => (16911, 5622, 5622),
            Benchmark::Pems08 => (10690, 3548, 3548),
        }
    }

    /// Recognizes the usual file stems, case-insensitively.
    pub fn from_name(name: &str) -> Option<Self> {
        let n = name.to_ascii_lowercase();
        Some(match n.as_str() {
            "etth1" | "etth2" => Benchmark::EttHourly,
            "ettm1" | "ettm2" => Benchmark::EttMinute,
            "exchange" | "exchange_rate" => Benchmark::Exchange,
            "weather" => Benchmark::Weather,
            "electricity" | "ecl" => Benchmark::Electricity,
            "traffic" => Benchmark::Traffic,
            "pems03" => Benchmark::Pems03,
            "pems04" => Benchmark::Pems04,
            "pems07" => Benchmark::Pems07,
            "pems08" => Benchmark::Pems08,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitPolicy {
    /// Named benchmark counts if the dataset name is recognized, otherwise 7:1:2.
    Auto,
    Benchmark(Benchmark),
    /// Relative weights; validation and test are floored, train takes the rest.
    Ratio([f64; 3]),
    Counts([usize; 3]),
}

impl Default for SplitPolicy {
    fn default() -> Self {
        SplitPolicy::Auto
    }
}

impl SplitPolicy {
    pub const ETT: SplitPolicy = SplitPolicy::Ratio([6.0, 2.0, 2.0]);
    pub const LONG: SplitPolicy = SplitPolicy::Ratio([7.0, 1.0, 2.0]);

    fn resolve(self, name: &str, rows: usize) -> Result<(usize, usize, usize)> {
        match self {
            SplitPolicy::Auto => match Benchmark::from_name(name) {
                Some(b) => SplitPolicy::Benchmark(b).resolve(name, rows),
                None => SplitPolicy::LONG.resolve(name, rows),
            },
            SplitPolicy::Benchmark(b) => Ok(b.counts()),
            SplitPolicy::Counts([a, b, c]) => Ok((a, b, c)),
            SplitPolicy::Ratio(r) => {
                if r.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || r[0] <= 0.0 {
                    return Err(Error::Parameter(format!("invalid split ratio {r:?}")));
                }
                let total: f64 = r.iter().sum();
                let val = (rows as f64 * r[1] / total).floor() as usize;
                let test = (rows as f64 * r[2] / total).floor() as usize;
                Ok((rows - val - test, val, test))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowRange {
    pub start: usize,
    pub end: usize,
}

impl RowRange {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn as_range(&self) -> Range<usize> {
        self.start..self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSampler {
    pub lookback: usize,
    pub horizon: usize,
    pub stride: usize,
}

impl WindowSampler {
    pub fn new(lookback: usize, horizon: usize) -> Self {
        Self {
            lookback,
            horizon,
            stride: 1,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lookback == 0 || self.horizon == 0 || self.stride == 0 {
            return Err(Error::Parameter(format!(
                "lookback, horizon and stride must be at least 1, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn span(&self) -> usize {
        self.lookback + self.horizon
    }

    /// `floor((rows - L - T) / stride) + 1`, or 0 when the range is too short.
    pub fn count(&self, rows: usize) -> usize {
        if rows < self.span() {
            0
        } else {
            (rows - self.span()) / self.stride + 1
        }
    }
}

/// Per-variate z-score statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    /// Population mean and standard deviation over `range` rows of `values`.
    pub fn fit(values: ArrayView2<'_, f64>, range: RowRange, names: &[String]) -> Result<Self> {
        if range.is_empty() || range.end > values.nrows() {
            return Err(Error::Size(format!(
                "cannot fit a normalizer on rows {}..{} of {}",
                range.start,
                range.end,
                values.nrows()
            )));
        }
        let rows = values.slice(s![range.as_range(), ..]);
        let n = rows.nrows() as f64;
        let mut mean = Vec::with_capacity(rows.ncols());
        let mut std = Vec::with_capacity(rows.ncols());
        for (j, col) in rows.axis_iter(Axis(1)).enumerate() {
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            let sd = var.sqrt();
            if !(sd > 0.0) {
                let name = names.get(j).map_or_else(|| format!("#{j}"), Clone::clone);
                return Err(Error::Data(format!(
                    "variate '{name}' is constant on the training rows (zero standard deviation)"
                )));
            }
            mean.push(m);
            std.push(sd);
        }
        Ok(Self { mean, std })
    }

    pub fn apply(&self, values: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check(values.ncols())?;
        let mut out = values.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|v| (v - self.mean[j]) / self.std[j]);
        }
        Ok(out)
    }

    pub fn invert(&self, values: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check(values.ncols())?;
        let mut out = values.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|v| v * self.std[j] + self.mean[j]);
        }
        Ok(out)
    }

    fn check(&self, d: usize) -> Result<()> {
        if d != self.mean.len() {
            return Err(Error::Size(format!(
                "normalizer fitted on {} variates, got {d}",
                self.mean.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Train,
    Validation,
    Test,
}

/// Chronological partitions (label rows) plus the train-fitted normalizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplits {
    pub train: RowRange,
    pub validation: RowRange,
    pub test: RowRange,
    pub normalizer: Normalizer,
}

impl DatasetSplits {
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }

    pub fn range(&self, part: Part) -> RowRange {
        match part {
            Part::Train => self.train,
            Part::Validation => self.validation,
            Part::Test => self.test,
        }
    }

    /// Rows from which windows of `part` are cut. Validation and test borrow
    /// the last `lookback - 1` rows of the preceding split as history.
    pub fn window_range(&self, part: Part, lookback: usize) -> RowRange {
        let r = self.range(part);
        match part {
            Part::Train => r,
            _ => RowRange::new(r.start.saturating_sub(lookback.saturating_sub(1)), r.end),
        }
    }
}

/// Splits `dataset` chronologically and fits the normalizer on train rows.
pub fn split(dataset: &RawDataset, policy: SplitPolicy, sampler: &WindowSampler) -> Result<DatasetSplits> {
    sampler.validate()?;
    let rows = dataset.rows();
    let (tr, va, te) = policy.resolve(&dataset.name, rows)?;
    if tr + va + te > rows {
        return Err(Error::Size(format!(
            "split ({tr}, {va}, {te}) needs {} rows, '{}' has {rows}",
            tr + va + te,
            dataset.name
        )));
    }
    let train = RowRange::new(0, tr);
    let validation = RowRange::new(tr, tr + va);
    let test = RowRange::new(tr + va, tr + va + te);
    let normalizer = Normalizer::fit(dataset.values.view(), train, &dataset.variate_names)?;
    let splits = DatasetSplits {
        train,
        validation,
        test,
        normalizer,
    };
    for part in [Part::Train, Part::Validation, Part::Test] {
        let r = splits.window_range(part, sampler.lookback);
        if sampler.count(r.len()) == 0 {
            return Err(Error::Size(format!(
                "{part:?} split has {} usable rows, a window needs {}",
                r.len(),
                sampler.span()
            )));
        }
    }
    Ok(splits)
}

/// Lazily materialized windows over a row range of a value matrix.
#[derive(Debug, Clone, Copy)]
pub struct WindowView<'a> {
    values: ArrayView2<'a, f64>,
    range: RowRange,
    sampler: WindowSampler,
}

impl<'a> WindowView<'a> {
    pub fn new(values: ArrayView2<'a, f64>, range: RowRange, sampler: WindowSampler) -> Result<Self> {
        sampler.validate()?;
        if range.end > values.nrows() || range.start > range.end {
            return Err(Error::Size(format!(
                "row range {}..{} outside a matrix of {} rows",
                range.start,
                range.end,
                values.nrows()
            )));
        }
        if sampler.count(range.len()) == 0 {
            return Err(Error::Size(format!(
                "{} rows cannot hold a window of {}",
                range.len(),
                sampler.span()
            )));
        }
        Ok(Self {
            values,
            range,
            sampler,
        })
    }

    pub fn len(&self) -> usize {
        self.sampler.count(self.range.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sampler(&self) -> WindowSampler {
        self.sampler
    }

    /// First row of window `i`.
    pub fn start(&self, i: usize) -> usize {
        self.range.start + i * self.sampler.stride
    }

    pub fn get(&self, i: usize) -> Result<SeriesWindow> {
        if i >= self.len() {
            return Err(Error::Size(format!("window index {i} out of range")));
        }
        let s0 = self.start(i);
        let block = self.values.slice(s![s0..s0 + self.sampler.span(), ..]);
        SeriesWindow::from_concatenated(block, self.sampler.lookback)
    }
}

impl WindowSource for WindowView<'_> {
    fn len(&self) -> usize {
        WindowView::len(self)
    }

    fn window(&self, index: usize) -> Result<Cow<'_, SeriesWindow>> {
        self.get(index).map(Cow::Owned)
    }
}

/// All windows of `range`, materialized.
pub fn windows(values: ArrayView2<'_, f64>, range: RowRange, sampler: &WindowSampler) -> Result<Vec<SeriesWindow>> {
    let view = WindowView::new(values, range, *sampler)?;
    (0..view.len()).map(|i| view.get(i)).collect()
}

/// Audit record of how a dataset was split and normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub dataset: String,
    pub rows: usize,
    pub variates: Vec<String>,
    pub policy: SplitPolicy,
    pub sampler: WindowSampler,
    pub splits: DatasetSplits,
    pub window_counts: [usize; 3],
}

impl SplitManifest {
    pub fn new(dataset: &RawDataset, policy: SplitPolicy, sampler: WindowSampler, splits: DatasetSplits) -> Self {
        let window_counts = [Part::Train, Part::Validation, Part::Test]
            .map(|p| sampler.count(splits.window_range(p, sampler.lookback).len()));
        Self {
            dataset: dataset.name.clone(),
            rows: dataset.rows(),
            variates: dataset.variate_names.clone(),
            policy,
            sampler,
            splits,
            window_counts,
        }
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }
}
