//! Spectral augmentation operators.
//!
//! Every operator works on the concatenation of history and future, one
//! variate at a time: forward transform, perturb the half spectrum, invert,
//! split back at the original lookback.

use num_complex::Complex64;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use super::spec::{AugmentSpec, BandPolicy, Method, NoiseScale, MINOR_CUTOFF};
use super::window::SeriesWindow;
use crate::error::{Error, Result};
use crate::seed::SeededRng;
use crate::spectral::{self, rank_bins, top_k_bins, BinIndexSet, CandidatePolicy, HalfSpectrum};

/// Bins an operator may touch under `band`.
pub fn band_select(
    spectrum: &HalfSpectrum,
    band: BandPolicy,
    policy: CandidatePolicy,
) -> Result<BinIndexSet> {
    match band {
        BandPolicy::Dominant(k) => top_k_bins(spectrum, k, policy),
        BandPolicy::Full => {
            let ranked = rank_bins(spectrum, policy);
            if ranked.is_empty() {
                return Err(Error::EmptyBand(format!(
                    "no candidate bins in a spectrum of length {}",
                    spectrum.original_length()
                )));
            }
            Ok(BinIndexSet::from_ranked(ranked, false))
        }
        BandPolicy::Minor => {
            let ranked = rank_bins(spectrum, policy);
            if ranked.len() <= MINOR_CUTOFF {
                return Err(Error::EmptyBand(format!(
                    "minor band is empty: only {} candidate bins, the top {MINOR_CUTOFF} are dominant",
                    ranked.len()
                )));
            }
            Ok(BinIndexSet::from_ranked(ranked[MINOR_CUTOFF..].to_vec(), false))
        }
    }
}

fn spectra(window: &SeriesWindow) -> Result<Vec<HalfSpectrum>> {
    (0..window.variates())
        .map(|d| spectral::rfft(window.column(d)))
        .collect()
}

fn rebuild(window: &SeriesWindow, spectra: &[HalfSpectrum]) -> Result<SeriesWindow> {
    let columns: Vec<Vec<f64>> = spectra
        .iter()
        .map(|s| spectral::irfft(s).into_vec())
        .collect();
    SeriesWindow::from_columns(window.lookback(), &columns)
}

fn band_of(spec: &AugmentSpec, default: BandPolicy) -> BandPolicy {
    spec.band_policy().unwrap_or(default)
}

fn with_magnitude(c: Complex64, magnitude: f64) -> Complex64 {
    let norm = c.norm();
    if norm > 0.0 {
        c * (magnitude / norm)
    } else {
        Complex64::new(magnitude, 0.0)
    }
}

/// Number of bins a rate selects out of `n`; at least one.
fn rate_count(rate: f64, n: usize) -> usize {
    // shave off representation error so 0.1 * 30 selects 3, not 4
    let raw = rate * n as f64;
    ((raw - raw * 1e-12).ceil() as usize).clamp(1, n)
}

fn require_method(spec: &AugmentSpec, method: Method) -> Result<()> {
    if spec.method != method {
        return Err(Error::Parameter(format!(
            "spec is for {}, not {method}",
            spec.method
        )));
    }
    spec.validate()
}

/// Randomly permutes the complex coefficients of the dominant bins.
pub fn dominant_shuffle(
    window: &SeriesWindow,
    spec: &AugmentSpec,
    rng: &mut SeededRng,
) -> Result<SeriesWindow> {
    require_method(spec, Method::DominantShuffle)?;
    let mut spectra = spectra(window)?;
    shuffle_spectra(&mut spectra, spec, rng)?;
    rebuild(window, &spectra)
}

/// The spectral step of [`dominant_shuffle`]: permutes each spectrum's
/// dominant coefficients in place and returns the bins it permuted.
pub fn shuffle_spectra(
    spectra: &mut [HalfSpectrum],
    spec: &AugmentSpec,
    rng: &mut SeededRng,
) -> Result<Vec<BinIndexSet>> {
    let band = band_of(spec, BandPolicy::Dominant(spec.k));
    let policy = spec.candidate_policy();
    let sets = spectra
        .iter()
        .map(|s| band_select(s, band, policy))
        .collect::<Result<Vec<_>>>()?;
    if sets.iter().any(BinIndexSet::clamped) {
        log::warn!(
            "k={} exceeds the {} candidate bins; shuffling all of them",
            spec.k,
            sets[0].len()
        );
    }

    let draw = |n: usize, rng: &mut SeededRng| {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        perm
    };
    let shared = (!spec.per_variate_independent && sets.iter().all(|s| s.len() == sets[0].len()))
        .then(|| draw(sets.first().map_or(0, BinIndexSet::len), rng));

    for (spectrum, set) in spectra.iter_mut().zip(&sets) {
        let perm = match &shared {
            Some(p) => p.clone(),
            None => draw(set.len(), rng),
        };
        let idx = set.indices();
        let original: Vec<Complex64> = idx.iter().map(|&i| spectrum.coefficients()[i]).collect();
        let coeffs = spectrum.coefficients_mut();
        for (j, &target) in idx.iter().enumerate() {
            coeffs[target] = original[perm[j]];
        }
    }
    Ok(sets)
}

fn pick_bins(set: &BinIndexSet, rate: f64, rng: &mut SeededRng) -> Vec<usize> {
    let count = rate_count(rate, set.len());
    index::sample(rng, set.len(), count)
        .into_iter()
        .map(|i| set.indices()[i])
        .collect()
}

/// Zeroes a random fraction of the band's coefficients.
pub fn freq_mask(window: &SeriesWindow, spec: &AugmentSpec, rng: &mut SeededRng) -> Result<SeriesWindow> {
    require_method(spec, Method::FreqMask)?;
    let band = band_of(spec, BandPolicy::Full);
    let policy = spec.candidate_policy();
    let mut spectra = spectra(window)?;
    for spectrum in &mut spectra {
        let set = band_select(spectrum, band, policy)?;
        for bin in pick_bins(&set, spec.mask_rate, rng) {
            spectrum.coefficients_mut()[bin] = Complex64::new(0.0, 0.0);
        }
    }
    rebuild(window, &spectra)
}

/// Replaces a random fraction of `a`'s band coefficients with `b`'s.
pub fn freq_mix(
    a: &SeriesWindow,
    b: &SeriesWindow,
    spec: &AugmentSpec,
    rng: &mut SeededRng,
) -> Result<SeriesWindow> {
    require_method(spec, Method::FreqMix)?;
    if a.shape() != b.shape() {
        return Err(Error::Size(format!(
            "cannot mix windows of shapes {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let band = band_of(spec, BandPolicy::Full);
    let policy = spec.candidate_policy();
    let mut spectra = spectra(a)?;
    let donors = self::spectra(b)?;
    for (spectrum, donor) in spectra.iter_mut().zip(&donors) {
        let set = band_select(spectrum, band, policy)?;
        for bin in pick_bins(&set, spec.mask_rate, rng) {
            spectrum.coefficients_mut()[bin] = donor.coefficients()[bin];
        }
    }
    rebuild(a, &spectra)
}

/// Sets one random low-frequency bin to half the largest candidate magnitude.
pub fn freq_add(window: &SeriesWindow, spec: &AugmentSpec, rng: &mut SeededRng) -> Result<SeriesWindow> {
    require_method(spec, Method::FreqAdd)?;
    let policy = spec.candidate_policy();
    let mut spectra = spectra(window)?;
    for spectrum in &mut spectra {
        let m = spectrum.len();
        if m < 3 {
            return Err(Error::Size(format!(
                "freq_add needs at least 3 bins, window of length {} has {m}",
                window.len()
            )));
        }
        let bin = rng.random_range(1..=(m - 1) / 2);
        let max = policy
            .candidates(spectrum.original_length())
            .map(|k| spectrum.coefficients()[k].norm())
            .fold(0.0, f64::max);
        let c = &mut spectrum.coefficients_mut()[bin];
        *c = with_magnitude(*c, 0.5 * max);
    }
    rebuild(window, &spectra)
}

/// Max-pools magnitudes over consecutive groups of bins, keeping each phase.
pub fn freq_pool(window: &SeriesWindow, spec: &AugmentSpec) -> Result<SeriesWindow> {
    require_method(spec, Method::FreqPool)?;
    let mut spectra = spectra(window)?;
    for spectrum in &mut spectra {
        for group in spectrum.coefficients_mut().chunks_mut(spec.pool_size) {
            let max = group.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for c in group.iter_mut() {
                *c = with_magnitude(*c, max);
            }
        }
    }
    rebuild(window, &spectra)
}

/// Adds complex Gaussian noise to the band's coefficients.
pub fn freq_noise(window: &SeriesWindow, spec: &AugmentSpec, rng: &mut SeededRng) -> Result<SeriesWindow> {
    require_method(spec, Method::FreqNoise)?;
    let band = band_of(spec, BandPolicy::Full);
    let policy = spec.candidate_policy();
    let mut spectra = spectra(window)?;
    for spectrum in &mut spectra {
        let n = spectrum.original_length();
        let std = match spec.noise_scale {
            NoiseScale::Absolute => spec.sigma,
            NoiseScale::Relative => {
                let cands = policy.candidates(n);
                let count = cands.len().max(1);
                let total: f64 = cands.map(|k| spectrum.coefficients()[k].norm()).sum();
                spec.sigma * total / count as f64
            }
        };
        let normal = Normal::new(0.0, std)
            .map_err(|e| Error::Parameter(format!("noise std {std}: {e}")))?;
        let set = band_select(spectrum, band, policy)?;
        let nyquist = spectrum.nyquist();
        for &bin in set.indices() {
            // DC and Nyquist must stay real
            if bin == 0 || Some(bin) == nyquist {
                continue;
            }
            let re = normal.sample(rng);
            let im = normal.sample(rng);
            spectrum.coefficients_mut()[bin] += Complex64::new(re, im);
        }
    }
    rebuild(window, &spectra)
}

/// Redraws band magnitudes uniformly within the band's magnitude range.
pub fn freq_random(window: &SeriesWindow, spec: &AugmentSpec, rng: &mut SeededRng) -> Result<SeriesWindow> {
    require_method(spec, Method::FreqRandom)?;
    let band = band_of(spec, BandPolicy::Dominant(spec.k));
    let policy = spec.candidate_policy();
    let mut spectra = spectra(window)?;
    for spectrum in &mut spectra {
        let set = band_select(spectrum, band, policy)?;
        let mags: Vec<f64> = set
            .indices()
            .iter()
            .map(|&k| spectrum.coefficients()[k].norm())
            .collect();
        let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = mags.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let dist = Uniform::new_inclusive(lo, hi)
            .map_err(|e| Error::Numeric(format!("magnitude range [{lo}, {hi}]: {e}")))?;
        for &bin in set.indices() {
            let c = &mut spectrum.coefficients_mut()[bin];
            *c = with_magnitude(*c, dist.sample(rng));
        }
    }
    rebuild(window, &spectra)
}

/// Linear interpolation to `factor * N` samples followed by a random crop of
/// length `N`. Sample `j` of the upsampled series sits at `j / factor`; past
/// the last original sample the value is held.
pub fn upsample_aug(window: &SeriesWindow, spec: &AugmentSpec, rng: &mut SeededRng) -> Result<SeriesWindow> {
    require_method(spec, Method::Upsample)?;
    let f = spec.upsample_factor;
    let n = window.len();
    let offset = rng.random_range(0..=(f - 1) * n);
    upsample_crop(window, f, offset)
}

pub(crate) fn upsample_crop(window: &SeriesWindow, factor: usize, offset: usize) -> Result<SeriesWindow> {
    let n = window.len();
    if offset + n > factor * n {
        return Err(Error::Parameter(format!(
            "crop offset {offset} too large for upsampled length {}",
            factor * n
        )));
    }
    let columns: Vec<Vec<f64>> = (0..window.variates())
        .map(|d| {
            let col = window.column(d);
            (offset..offset + n)
                .map(|j| {
                    let lo = j / factor;
                    if lo + 1 >= n {
                        return col[n - 1];
                    }
                    let frac = (j % factor) as f64 / factor as f64;
                    col[lo] + (col[lo + 1] - col[lo]) * frac
                })
                .collect()
        })
        .collect();
    SeriesWindow::from_columns(window.lookback(), &columns)
}

/// Applies `spec` to `window`. `partner` is required for [`Method::FreqMix`]
/// and ignored otherwise.
pub fn apply(
    window: &SeriesWindow,
    partner: Option<&SeriesWindow>,
    spec: &AugmentSpec,
    rng: &mut SeededRng,
) -> Result<SeriesWindow> {
    match spec.method {
        Method::DominantShuffle => dominant_shuffle(window, spec, rng),
        Method::FreqMask => freq_mask(window, spec, rng),
        Method::FreqMix => {
            let b = partner.ok_or_else(|| Error::Parameter("freq_mix needs a partner window".into()))?;
            freq_mix(window, b, spec, rng)
        }
        Method::FreqAdd => freq_add(window, spec, rng),
        Method::FreqPool => freq_pool(window, spec),
        Method::FreqNoise => freq_noise(window, spec, rng),
        Method::FreqRandom => freq_random(window, spec, rng),
        Method::Upsample => upsample_aug(window, spec, rng),
    }
}
