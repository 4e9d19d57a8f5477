//! Flat-array entry point for foreign callers.
//!
//! Input is a contiguous row-major `(B, N, D)` buffer; output is a freshly
//! allocated `(B * multiplier, N, D)` buffer laid out in the same order as
//! [`augment_batch`](super::augment_batch) returns its windows.

use ndarray::ArrayView2;

use super::batch::augment_batch;
use super::spec::AugmentSpec;
use super::window::SeriesWindow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct BatchDescriptor<'a> {
    pub data: &'a [f64],
    pub batch: usize,
    pub length: usize,
    pub variates: usize,
    pub lookback: usize,
    pub horizon: usize,
}

impl<'a> BatchDescriptor<'a> {
    pub fn new(
        data: &'a [f64],
        (batch, length, variates): (usize, usize, usize),
        lookback: usize,
        horizon: usize,
    ) -> Result<Self> {
        let desc = Self {
            data,
            batch,
            length,
            variates,
            lookback,
            horizon,
        };
        desc.validate()?;
        Ok(desc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 || self.length == 0 || self.variates == 0 {
            return Err(Error::Size(format!(
                "B, N, D must be at least 1, got ({}, {}, {})",
                self.batch, self.length, self.variates
            )));
        }
        if self.lookback == 0 || self.horizon == 0 || self.lookback + self.horizon != self.length {
            return Err(Error::Size(format!(
                "L={} and T={} must be positive and sum to N={}",
                self.lookback, self.horizon, self.length
            )));
        }
        let expected = self.batch * self.length * self.variates;
        if self.data.len() != expected {
            return Err(Error::Size(format!(
                "array holds {} values, shape ({}, {}, {}) needs {expected}",
                self.data.len(),
                self.batch,
                self.length,
                self.variates
            )));
        }
        Ok(())
    }

    pub fn windows(&self) -> Result<Vec<SeriesWindow>> {
        self.validate()?;
        self.data
            .chunks_exact(self.length * self.variates)
            .map(|chunk| {
                let block = ArrayView2::from_shape((self.length, self.variates), chunk)
                    .expect("chunk length matches shape");
                SeriesWindow::from_concatenated(block, self.lookback)
            })
            .collect()
    }
}

/// Augments a flat batch; see the module docs for the layout.
pub fn augment_array(desc: &BatchDescriptor<'_>, spec: &AugmentSpec, multiplier: usize) -> Result<Vec<f64>> {
    let windows = desc.windows()?;
    let augmented = augment_batch(&windows, spec, multiplier)?;
    let mut out = Vec::with_capacity(augmented.len() * desc.length * desc.variates);
    for aug in &augmented {
        out.extend(aug.window.history().iter());
        out.extend(aug.window.future().iter());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplier_one_returns_input() {
        let data: Vec<f64> = (0..2 * 8 * 3).map(|v| (v as f64 * 0.37).sin()).collect();
        let desc = BatchDescriptor::new(&data, (2, 8, 3), 5, 3).unwrap();
        assert_eq!(augment_array(&desc, &AugmentSpec::dominant_shuffle(2), 1).unwrap(), data);
    }

    #[test]
    fn shape_errors() {
        let data = vec![0.0; 10];
        assert!(matches!(BatchDescriptor::new(&data, (1, 5, 2), 3, 3), Err(Error::Size(_))));
        assert!(matches!(BatchDescriptor::new(&data, (1, 5, 3), 3, 2), Err(Error::Size(_))));
        assert!(matches!(BatchDescriptor::new(&data, (0, 5, 2), 3, 2), Err(Error::Size(_))));
        assert!(BatchDescriptor::new(&data, (1, 5, 2), 3, 2).is_ok());
    }
}
