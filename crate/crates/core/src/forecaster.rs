//! Channel-independent ridge regression forecaster and error metrics.
//!
//! One linear map `y = W x + b` (`W` is `T x L`) is shared by all variates and
//! fitted in closed form from accumulated normal equations.

use std::fs::File;
use std::path::Path;

use nalgebra::{Cholesky, DMatrix};
use ndarray::{linalg::general_mat_mul, s, Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::augment::{SeriesWindow, WindowSource};
use crate::error::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 1e-3;

/// Rows buffered before each Gram update.
const CHUNK_ROWS: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearForecaster {
    weights: Array2<f64>,
    bias: Array1<f64>,
}

impl LinearForecaster {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        if weights.nrows() != bias.len() || weights.ncols() == 0 || bias.is_empty() {
            return Err(Error::Size(format!(
                "weights {:?} do not match bias of length {}",
                weights.dim(),
                bias.len()
            )));
        }
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("model parameters must be finite".into()));
        }
        Ok(Self { weights, bias })
    }

    pub fn zeros(lookback: usize, horizon: usize) -> Self {
        Self {
            weights: Array2::zeros((horizon, lookback)),
            bias: Array1::zeros(horizon),
        }
    }

    pub fn lookback(&self) -> usize {
        self.weights.ncols()
    }

    pub fn horizon(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }

    /// Forecast `T x D` from a history of `L x D`.
    pub fn predict(&self, history: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if history.nrows() != self.lookback() {
            return Err(Error::Size(format!(
                "model expects {} history rows, got {}",
                self.lookback(),
                history.nrows()
            )));
        }
        let mut out = self.weights.dot(&history);
        for (mut row, b) in out.rows_mut().into_iter().zip(self.bias.iter()) {
            row += *b;
        }
        Ok(out)
    }

    /// Flat JSON array: `[T, L, W (row-major T x L)..., b (T)...]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(2 + self.weights.len() + self.bias.len());
        flat.push(self.horizon() as f64);
        flat.push(self.lookback() as f64);
        flat.extend(self.weights.iter());
        flat.extend(self.bias.iter());
        flat
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        let bad = |msg: &str| Error::Size(format!("malformed model array: {msg}"));
        if flat.len() < 2 {
            return Err(bad("missing shape header"));
        }
        let dim = |v: f64| (v >= 1.0 && v.fract() == 0.0).then_some(v as usize);
        let (t, l) = match (dim(flat[0]), dim(flat[1])) {
            (Some(t), Some(l)) => (t, l),
            _ => return Err(bad("shape header must hold two positive integers")),
        };
        if flat.len() != 2 + t * l + t {
            return Err(bad(&format!("expected {} values, found {}", 2 + t * l + t, flat.len())));
        }
        let weights = Array2::from_shape_vec((t, l), flat[2..2 + t * l].to_vec()).expect("length checked");
        let bias = Array1::from(flat[2 + t * l..].to_vec());
        Self::new(weights, bias)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(file, &self.to_flat())?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let flat: Vec<f64> = serde_json::from_reader(file)?;
        Self::from_flat(&flat)
    }
}

/// Streaming accumulator of the ridge normal equations.
///
/// Each variate of each window contributes one regression row
/// `[x_d, 1] -> y_d`. Rows are folded into the Gram matrix in fixed-size
/// chunks in push order, so the fit is bit-reproducible for a given window
/// sequence.
#[derive(Debug, Clone)]
pub struct RidgeAccumulator {
    lookback: usize,
    horizon: usize,
    gram: Array2<f64>,
    cross: Array2<f64>,
    design: Array2<f64>,
    targets: Array2<f64>,
    buffered: usize,
    rows: usize,
}

impl RidgeAccumulator {
    pub fn new(lookback: usize, horizon: usize) -> Self {
        let p = lookback + 1;
        Self {
            lookback,
            horizon,
            gram: Array2::zeros((p, p)),
            cross: Array2::zeros((p, horizon)),
            design: Array2::zeros((CHUNK_ROWS, p)),
            targets: Array2::zeros((CHUNK_ROWS, horizon)),
            buffered: 0,
            rows: 0,
        }
    }

    /// Regression rows seen so far.
    pub fn rows(&self) -> usize {
        self.rows + self.buffered
    }

    pub fn push(&mut self, window: &SeriesWindow) -> Result<()> {
        if window.lookback() != self.lookback || window.horizon() != self.horizon {
            return Err(Error::Size(format!(
                "window (L={}, T={}) does not fit a model with L={}, T={}",
                window.lookback(),
                window.horizon(),
                self.lookback,
                self.horizon
            )));
        }
        for d in 0..window.variates() {
            if self.buffered == CHUNK_ROWS {
                self.flush();
            }
            let r = self.buffered;
            self.design
                .slice_mut(s![r, ..self.lookback])
                .assign(&window.history().column(d));
            self.design[[r, self.lookback]] = 1.0;
            self.targets.row_mut(r).assign(&window.future().column(d));
            self.buffered += 1;
        }
        Ok(())
    }

    fn flush(&mut self) {
        if self.buffered == 0 {
            return;
        }
        let z = self.design.slice(s![..self.buffered, ..]);
        let y = self.targets.slice(s![..self.buffered, ..]);
        general_mat_mul(1.0, &z.t(), &z, 1.0, &mut self.gram);
        general_mat_mul(1.0, &z.t(), &y, 1.0, &mut self.cross);
        self.rows += self.buffered;
        self.buffered = 0;
    }

    /// Solves `(Z'Z + lambda * diag(1..1, 0)) theta = Z'Y`; the bias is not penalized.
    pub fn solve(mut self, lambda: f64) -> Result<LinearForecaster> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        self.flush();
        if self.rows == 0 {
            return Err(Error::Size("ridge fit needs at least one window".into()));
        }
        let p = self.lookback + 1;
        let mut gram = DMatrix::from_fn(p, p, |i, j| self.gram[[i, j]]);
        for i in 0..self.lookback {
            gram[(i, i)] += lambda;
        }
        let singular = || {
            Error::Numeric(if lambda == 0.0 {
                "normal equations are singular; use a ridge penalty lambda > 0".to_string()
            } else {
                format!("normal equations are singular even with lambda = {lambda}")
            })
        };
        let scale = (0..p).map(|i| gram[(i, i)]).fold(0.0, f64::max);
        let chol = Cholesky::new(gram).ok_or_else(singular)?;
        let l = chol.l_dirty();
        let min_pivot = (0..p).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if !(min_pivot > scale * 1e-13) {
            return Err(singular());
        }
        let rhs = DMatrix::from_fn(p, self.horizon, |i, j| self.cross[[i, j]]);
        let theta = chol.solve(&rhs);
        let weights = Array2::from_shape_fn((self.horizon, self.lookback), |(t, i)| theta[(i, t)]);
        let bias = Array1::from_shape_fn(self.horizon, |t| theta[(self.lookback, t)]);
        LinearForecaster::new(weights, bias)
    }
}

/// Fits a ridge forecaster on every window (all variates share the map).
pub fn fit_ridge<S: WindowSource + ?Sized>(windows: &S, lambda: f64) -> Result<LinearForecaster> {
    if windows.is_empty() {
        return Err(Error::Size("ridge fit needs at least one window".into()));
    }
    let first = windows.window(0)?;
    let mut acc = RidgeAccumulator::new(first.lookback(), first.horizon());
    drop(first);
    for i in 0..windows.len() {
        acc.push(windows.window(i)?.as_ref())?;
    }
    acc.solve(lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub mae: f64,
    /// Windows evaluated.
    pub count: usize,
}

/// Mean squared and absolute error over every (window, step, variate).
pub fn evaluate<S: WindowSource + ?Sized>(model: &LinearForecaster, windows: &S) -> Result<Metrics> {
    let mut sq = 0.0;
    let mut abs = 0.0;
    let mut cells = 0usize;
    for i in 0..windows.len() {
        let w = windows.window(i)?;
        if w.horizon() != model.horizon() {
            return Err(Error::Size(format!(
                "model predicts {} steps, window has {}",
                model.horizon(),
                w.horizon()
            )));
        }
        let pred = model.predict(w.history().view())?;
        for (p, y) in pred.iter().zip(w.future().iter()) {
            let e = p - y;
            sq += e * e;
            abs += e.abs();
        }
        cells += pred.len();
    }
    if cells == 0 {
        return Err(Error::Size("no windows to evaluate".into()));
    }
    Ok(Metrics {
        mse: sq / cells as f64,
        mae: abs / cells as f64,
        count: windows.len(),
    })
}
