use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::CandidatePolicy;

/// Bins left out of the top of the ranking when selecting minor frequencies.
pub const MINOR_CUTOFF: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DominantShuffle,
    FreqMask,
    FreqMix,
    FreqAdd,
    FreqPool,
    FreqNoise,
    FreqRandom,
    Upsample,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::DominantShuffle,
        Method::FreqMask,
        Method::FreqMix,
        Method::FreqAdd,
        Method::FreqPool,
        Method::FreqNoise,
        Method::FreqRandom,
        Method::Upsample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::DominantShuffle => "dominant_shuffle",
            Method::FreqMask => "freq_mask",
            Method::FreqMix => "freq_mix",
            Method::FreqAdd => "freq_add",
            Method::FreqPool => "freq_pool",
            Method::FreqNoise => "freq_noise",
            Method::FreqRandom => "freq_random",
            Method::Upsample => "upsample",
        }
    }

    /// Band used when the spec does not name one. `None` for operators that
    /// do not select bins by band.
    pub fn default_band(self) -> Option<Band> {
        match self {
            Method::DominantShuffle | Method::FreqRandom => Some(Band::Dominant),
            Method::FreqMask | Method::FreqMix | Method::FreqNoise => Some(Band::Full),
            Method::FreqAdd | Method::FreqPool | Method::Upsample => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .or(match norm.as_str() {
                "shuffle" => Some(Method::DominantShuffle),
                "mask" => Some(Method::FreqMask),
                "mix" => Some(Method::FreqMix),
                "noise" | "robusttad" => Some(Method::FreqNoise),
                "random" => Some(Method::FreqRandom),
                _ => None,
            })
            .ok_or_else(|| Error::Parameter(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// Every candidate bin.
    Full,
    /// The top-k candidate bins by magnitude.
    Dominant,
    /// Candidates outside the top [`MINOR_CUTOFF`].
    Minor,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Band::Full => "full",
            Band::Dominant => "dominant",
            Band::Minor => "minor",
        })
    }
}

impl FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(Band::Full),
            "dominant" => Ok(Band::Dominant),
            "minor" => Ok(Band::Minor),
            _ => Err(Error::Parameter(format!("unknown band '{s}'"))),
        }
    }
}

/// Band with its size parameter resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandPolicy {
    Full,
    Dominant(usize),
    Minor,
}

impl BandPolicy {
    pub fn new(band: Band, k: usize) -> Self {
        match band {
            Band::Full => BandPolicy::Full,
            Band::Dominant => BandPolicy::Dominant(k),
            Band::Minor => BandPolicy::Minor,
        }
    }
}

/// How the noise standard deviation is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScale {
    /// `sigma` times the mean candidate magnitude of each variate.
    #[default]
    Relative,
    /// `sigma` used as is.
    Absolute,
}

fn default_k() -> usize {
    4
}
fn default_mask_rate() -> f64 {
    0.1
}
fn default_sigma() -> f64 {
    0.1
}
fn default_pool_size() -> usize {
    4
}
fn default_upsample_factor() -> usize {
    2
}
fn default_true() -> bool {
    true
}

/// Operator choice plus every parameter any operator reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentSpec {
    pub method: Method,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<Band>,
    #[serde(default = "default_mask_rate")]
    pub mask_rate: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub noise_scale: NoiseScale,
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
    #[serde(default = "default_upsample_factor")]
    pub upsample_factor: usize,
    #[serde(default = "default_true")]
    pub per_variate_independent: bool,
    #[serde(default)]
    pub include_dc: bool,
    #[serde(default)]
    pub include_nyquist: bool,
    #[serde(default)]
    pub seed: u64,
}

impl AugmentSpec {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            k: default_k(),
            band: None,
            mask_rate: default_mask_rate(),
            sigma: default_sigma(),
            noise_scale: NoiseScale::Relative,
            pool_size: default_pool_size(),
            upsample_factor: default_upsample_factor(),
            per_variate_independent: true,
            include_dc: false,
            include_nyquist: false,
            seed: 0,
        }
    }

    pub fn dominant_shuffle(k: usize) -> Self {
        Self::new(Method::DominantShuffle).with_k(k)
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_band(mut self, band: Band) -> Self {
        self.band = Some(band);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mask_rate(mut self, rate: f64) -> Self {
        self.mask_rate = rate;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_pool_size(mut self, size: usize) -> Self {
        self.pool_size = size;
        self
    }

    pub fn with_upsample_factor(mut self, factor: usize) -> Self {
        self.upsample_factor = factor;
        self
    }

    pub fn candidate_policy(&self) -> CandidatePolicy {
        CandidatePolicy {
            include_dc: self.include_dc,
            include_nyquist: self.include_nyquist,
        }
    }

    /// The band actually used by this spec's operator.
    pub fn effective_band(&self) -> Option<Band> {
        self.method.default_band().map(|b| self.band.unwrap_or(b))
    }

    pub fn band_policy(&self) -> Option<BandPolicy> {
        self.effective_band().map(|b| BandPolicy::new(b, self.k))
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if !(self.mask_rate > 0.0 && self.mask_rate < 1.0) {
            return Err(Error::Parameter(format!(
                "mask_rate must lie in (0, 1), got {}",
                self.mask_rate
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Parameter(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.pool_size == 0 {
            return Err(Error::Parameter("pool_size must be at least 1".into()));
        }
        if self.upsample_factor < 2 {
            return Err(Error::Parameter(format!(
                "upsample_factor must be at least 2, got {}",
                self.upsample_factor
            )));
        }
        Ok(())
    }

    /// Short parameter summary for result tables, e.g. `k=4;band=dominant`.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        match self.method {
            Method::DominantShuffle => parts.push(format!("k={}", self.k)),
            Method::FreqMask | Method::FreqMix => parts.push(format!("rate={}", self.mask_rate)),
            Method::FreqNoise => parts.push(format!("sigma={}", self.sigma)),
            Method::FreqPool => parts.push(format!("pool={}", self.pool_size)),
            Method::Upsample => parts.push(format!("factor={}", self.upsample_factor)),
            Method::FreqAdd | Method::FreqRandom => {}
        }
        if let Some(band) = self.effective_band() {
            if band == Band::Dominant && self.method != Method::DominantShuffle {
                parts.push(format!("k={}", self.k));
            }
            parts.push(format!("band={band}"));
        }
        parts.join(";")
    }
}
