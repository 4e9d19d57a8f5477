//! Frequency-domain augmentation of `(history, future)` windows.

mod batch;
pub mod flat;
mod ops;
mod spec;
mod window;

pub use batch::{augment_batch, augment_copy};
pub use flat::{augment_array, BatchDescriptor};
pub use ops::{
    apply, band_select, dominant_shuffle, freq_add, freq_mask, freq_mix, freq_noise, freq_pool,
    freq_random, shuffle_spectra, upsample_aug,
};
pub use spec::{AugmentSpec, Band, BandPolicy, Method, NoiseScale, MINOR_CUTOFF};
pub use window::{AugmentedWindow, Provenance, SeriesWindow, WindowSource};
