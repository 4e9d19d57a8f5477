//! Real-input discrete Fourier transforms and dominant-bin selection.
//!
//! Conventions: the forward transform is unnormalized,
//! `X[k] = sum_n x[n] * exp(-2*pi*i*k*n/N)` for `k = 0..=N/2`, and the inverse
//! is scaled by `1/N`. A [`HalfSpectrum`] always carries the length of the
//! series it came from so that even and odd lengths invert unambiguously.

use std::cell::RefCell;
use std::cmp::Ordering;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Number of half-spectrum bins for a real series of length `n`.
pub fn half_len(n: usize) -> usize {
    n / 2 + 1
}

/// A finite real-valued series of at least two samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSeries(Vec<f64>);

impl RealSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_series(&values)?;
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }
}

impl AsRef<[f64]> for RealSeries {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn check_series(values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::Size(format!(
            "series needs at least 2 samples, got {}",
            values.len()
        )));
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite sample {} at position {pos}",
            values[pos]
        )));
    }
    Ok(())
}

/// The `floor(N/2) + 1` complex coefficients of a real series of length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpectrum {
    coefficients: Vec<Complex64>,
    original_length: usize,
}

impl HalfSpectrum {
    pub fn new(coefficients: Vec<Complex64>, original_length: usize) -> Result<Self> {
        if original_length < 2 {
            return Err(Error::Size(format!(
                "original length must be at least 2, got {original_length}"
            )));
        }
        if coefficients.len() != half_len(original_length) {
            return Err(Error::Size(format!(
                "{} coefficients cannot describe a series of length {original_length} (expected {})",
                coefficients.len(),
                half_len(original_length)
            )));
        }
        Ok(Self {
            coefficients,
            original_length,
        })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    pub fn original_length(&self) -> usize {
        self.original_length
    }

    /// Number of bins, `M`.
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Index of the Nyquist bin, present only for even lengths.
    pub fn nyquist(&self) -> Option<usize> {
        (self.original_length % 2 == 0).then(|| self.coefficients.len() - 1)
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        magnitudes(self)
    }

    /// Time-domain energy of the series this spectrum represents (Parseval).
    pub fn time_energy(&self) -> f64 {
        let nyq = self.nyquist();
        let weighted: f64 = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k == 0 || Some(k) == nyq {
                    c.norm_sqr()
                } else {
                    2.0 * c.norm_sqr()
                }
            })
            .sum();
        weighted / self.original_length as f64
    }
}

/// Forward real DFT.
pub fn rfft(series: impl AsRef<[f64]>) -> Result<HalfSpectrum> {
    let values = series.as_ref();
    check_series(values)?;
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));
    buf.truncate(half_len(n));
    // DC and Nyquist of a real series are real; drop rounding residue.
    buf[0].im = 0.0;
    if n % 2 == 0 {
        buf[n / 2].im = 0.0;
    }
    Ok(HalfSpectrum {
        coefficients: buf,
        original_length: n,
    })
}

/// Inverse real DFT with Hermitian extension.
///
/// Imaginary parts of the DC bin and, for even lengths, the Nyquist bin are
/// ignored.
pub fn irfft(spectrum: &HalfSpectrum) -> RealSeries {
    let n = spectrum.original_length;
    let m = spectrum.coefficients.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[0] = Complex64::new(spectrum.coefficients[0].re, 0.0);
    for k in 1..m {
        let c = spectrum.coefficients[k];
        if 2 * k == n {
            buf[k] = Complex64::new(c.re, 0.0);
        } else {
            buf[k] = c;
            buf[n - k] = c.conj();
        }
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut buf));
    let scale = 1.0 / n as f64;
    RealSeries(buf.iter().map(|c| c.re * scale).collect())
}

pub fn magnitudes(spectrum: &HalfSpectrum) -> Vec<f64> {
    spectrum.coefficients.iter().map(|c| c.norm()).collect()
}

/// Which bins may be considered "dominant".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CandidatePolicy {
    pub include_dc: bool,
    pub include_nyquist: bool,
}

impl CandidatePolicy {
    /// Candidate bins, ascending, for a spectrum of `original_length` samples.
    pub fn candidates(&self, original_length: usize) -> std::ops::Range<usize> {
        let m = half_len(original_length);
        let start = if self.include_dc { 0 } else { 1 };
        let end = if original_length % 2 == 0 && !self.include_nyquist {
            m - 1
        } else {
            m
        };
        start..end.max(start)
    }
}

/// Distinct bin indices ordered by descending source magnitude, ties by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinIndexSet {
    indices: Vec<usize>,
    clamped: bool,
}

impl BinIndexSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// True when fewer bins than requested were available.
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    pub(crate) fn from_ranked(indices: Vec<usize>, clamped: bool) -> Self {
        Self { indices, clamped }
    }
}

fn by_rank(mags: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| match mags[b].total_cmp(&mags[a]) {
        Ordering::Equal => a.cmp(&b),
        ord => ord,
    }
}

/// All candidate bins ranked by descending magnitude, ties by ascending index.
pub fn rank_bins(spectrum: &HalfSpectrum, policy: CandidatePolicy) -> Vec<usize> {
    let mags = magnitudes(spectrum);
    let mut ranked: Vec<usize> = policy.candidates(spectrum.original_length).collect();
    ranked.sort_unstable_by(by_rank(&mags));
    ranked
}

/// The `k` candidate bins of largest magnitude, in rank order.
pub fn top_k_bins(spectrum: &HalfSpectrum, k: usize, policy: CandidatePolicy) -> Result<BinIndexSet> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let mags = magnitudes(spectrum);
    let mut ranked: Vec<usize> = policy.candidates(spectrum.original_length).collect();
    if ranked.is_empty() {
        return Err(Error::Parameter(format!(
            "no candidate bins in a spectrum of length {}",
            spectrum.original_length
        )));
    }
    let clamped = k > ranked.len();
    let cmp = by_rank(&mags);
    if k < ranked.len() {
        ranked.select_nth_unstable_by(k - 1, &cmp);
        ranked.truncate(k);
    }
    ranked.sort_unstable_by(&cmp);
    Ok(BinIndexSet::from_ranked(ranked, clamped))
}
