use std::borrow::Cow;

use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::spec::Method;
use crate::error::{Error, Result};

/// One training pair: `history` is `L x D`, `future` is `T x D`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesWindow {
    history: Array2<f64>,
    future: Array2<f64>,
}

impl SeriesWindow {
    pub fn new(history: Array2<f64>, future: Array2<f64>) -> Result<Self> {
        let (l, d) = history.dim();
        let (t, d2) = future.dim();
        if l == 0 || t == 0 || d == 0 {
            return Err(Error::Size(format!(
                "window needs L, T, D >= 1, got L={l}, T={t}, D={d}"
            )));
        }
        if d != d2 {
            return Err(Error::Size(format!(
                "history has {d} variates but future has {d2}"
            )));
        }
        if history.iter().chain(future.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("window contains non-finite values".into()));
        }
        Ok(Self { history, future })
    }

    /// Splits an `N x D` block after its first `lookback` rows.
    pub fn from_concatenated(block: ArrayView2<'_, f64>, lookback: usize) -> Result<Self> {
        if lookback == 0 || lookback >= block.nrows() {
            return Err(Error::Size(format!(
                "lookback {lookback} must lie strictly inside a block of {} rows",
                block.nrows()
            )));
        }
        Self::new(
            block.slice(s![..lookback, ..]).to_owned(),
            block.slice(s![lookback.., ..]).to_owned(),
        )
    }

    /// Builds a window from per-variate concatenated columns of equal length.
    pub(crate) fn from_columns(lookback: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        let mut block = Array2::zeros((n, columns.len()));
        for (d, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Size("ragged columns".into()));
            }
            for (t, &v) in col.iter().enumerate() {
                block[[t, d]] = v;
            }
        }
        Self::from_concatenated(block.view(), lookback)
    }

    pub fn history(&self) -> &Array2<f64> {
        &self.history
    }

    pub fn future(&self) -> &Array2<f64> {
        &self.future
    }

    pub fn lookback(&self) -> usize {
        self.history.nrows()
    }

    pub fn horizon(&self) -> usize {
        self.future.nrows()
    }

    pub fn variates(&self) -> usize {
        self.history.ncols()
    }

    /// `N = L + T`.
    pub fn len(&self) -> usize {
        self.lookback() + self.horizon()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.lookback(), self.horizon(), self.variates())
    }

    /// History and future stacked along time, `N x D`.
    pub fn concatenated(&self) -> Array2<f64> {
        concatenate(Axis(0), &[self.history.view(), self.future.view()])
            .expect("history and future share a column count")
    }

    /// Variate `d` of the concatenated window.
    pub fn column(&self, d: usize) -> Vec<f64> {
        self.history
            .column(d)
            .iter()
            .chain(self.future.column(d).iter())
            .copied()
            .collect()
    }

    /// Sum of squares over all entries.
    pub fn energy(&self) -> f64 {
        self.history
            .iter()
            .chain(self.future.iter())
            .map(|v| v * v)
            .sum()
    }
}

/// Where an output window of the batch driver came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Index of the source window in the input sequence.
    pub source: usize,
    /// Second source for mixing operators.
    pub partner: Option<usize>,
    /// `None` for passthrough originals.
    pub method: Option<Method>,
    /// 0 for the original, `1..multiplier` for augmented copies.
    pub copy: usize,
    /// Derived seed the copy was drawn with.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedWindow {
    pub window: SeriesWindow,
    pub provenance: Provenance,
}

impl AugmentedWindow {
    pub fn history(&self) -> &Array2<f64> {
        self.window.history()
    }

    pub fn future(&self) -> &Array2<f64> {
        self.window.future()
    }
}

/// Random access to a sequence of windows, possibly built on demand.
pub trait WindowSource: Sync {
    fn len(&self) -> usize;

    fn window(&self, index: usize) -> Result<Cow<'_, SeriesWindow>>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl WindowSource for [SeriesWindow] {
    fn len(&self) -> usize {
        <[SeriesWindow]>::len(self)
    }

    fn window(&self, index: usize) -> Result<Cow<'_, SeriesWindow>> {
        self.get(index)
            .map(Cow::Borrowed)
            .ok_or_else(|| Error::Size(format!("window index {index} out of range")))
    }
}

impl WindowSource for Vec<SeriesWindow> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn window(&self, index: usize) -> Result<Cow<'_, SeriesWindow>> {
        self.as_slice().window(index)
    }
}
