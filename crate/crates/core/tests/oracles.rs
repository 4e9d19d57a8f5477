//! Operators checked against a from-scratch O(N^2) DFT pipeline that shares
//! nothing with the library except the random draws.

use std::f64::consts::PI;

use domshuffle_core::augment::{self, augment_batch, AugmentSpec, Method, SeriesWindow};
use domshuffle_core::seed::{derive_seed, seeded_rng, SeededRng};
use ndarray::Array2;
use num_complex::Complex64;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};

fn dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n / 2 + 1)
        .map(|k| {
            x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (t, &v)| {
                acc + v * Complex64::from_polar(1.0, -2.0 * PI * (k * t) as f64 / n as f64)
            })
        })
        .collect()
}

fn idft(half: &[Complex64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|t| {
            let mut s = 0.0;
            for k in 0..n {
                let c = if k < half.len() { half[k] } else { half[n - k].conj() };
                // the real part of DC and Nyquist only
                let c = if k == 0 || 2 * k == n { Complex64::new(c.re, 0.0) } else { c };
                s += (c * Complex64::from_polar(1.0, 2.0 * PI * (k * t) as f64 / n as f64)).re;
            }
            s / n as f64
        })
        .collect()
}

/// Candidates exclude DC and the even-length Nyquist bin.
fn top_k(half: &[Complex64], n: usize, k: usize) -> Vec<usize> {
    let end = if n % 2 == 0 { half.len() - 1 } else { half.len() };
    let mut idx: Vec<usize> = (1..end).collect();
    // stable sort keeps ascending index among equal magnitudes
    idx.sort_by(|&a, &b| half[b].norm().partial_cmp(&half[a].norm()).unwrap());
    idx.truncate(k);
    idx
}

fn random_window(rng: &mut SeededRng, l: usize, t: usize, d: usize) -> SeriesWindow {
    let mut gen = |rows| Array2::from_shape_fn((rows, d), |_| rng.random_range(-2.0..2.0));
    let h = gen(l);
    let f = gen(t);
    SeriesWindow::new(h, f).unwrap()
}

fn from_columns(cols: &[Vec<f64>]) -> Array2<f64> {
    let n = cols[0].len();
    Array2::from_shape_fn((n, cols.len()), |(t, d)| cols[d][t])
}

fn max_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn oracle_shuffle(w: &SeriesWindow, k: usize, rng: &mut SeededRng) -> Array2<f64> {
    let n = w.len();
    let cols: Vec<Vec<f64>> = (0..w.variates())
        .map(|d| {
            let mut half = dft(&w.column(d));
            let top = top_k(&half, n, k);
            let mut perm: Vec<usize> = (0..top.len()).collect();
            perm.shuffle(rng);
            let orig: Vec<Complex64> = top.iter().map(|&i| half[i]).collect();
            for (j, &bin) in top.iter().enumerate() {
                half[bin] = orig[perm[j]];
            }
            idft(&half, n)
        })
        .collect();
    from_columns(&cols)
}

fn oracle_mix(a: &SeriesWindow, b: &SeriesWindow, rate: f64, rng: &mut SeededRng) -> Array2<f64> {
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..a.variates())
        .map(|d| {
            let mut half = dft(&a.column(d));
            let donor = dft(&b.column(d));
            let end = if n % 2 == 0 { half.len() - 1 } else { half.len() };
            let mut band: Vec<usize> = (1..end).collect();
            band.sort_by(|&x, &y| half[y].norm().partial_cmp(&half[x].norm()).unwrap());
            let count = ((rate * band.len() as f64 - 1e-9).ceil() as usize).clamp(1, band.len());
            for i in index::sample(rng, band.len(), count) {
                half[band[i]] = donor[band[i]];
            }
            idft(&half, n)
        })
        .collect();
    from_columns(&cols)
}

#[test]
fn dominant_shuffle_matches_naive_pipeline() {
    let mut gen = SeededRng::seed_from_u64(11);
    for case in 0..40u64 {
        let l = gen.random_range(4..40);
        let t = gen.random_range(1..20);
        let d = gen.random_range(1..4);
        let k = gen.random_range(1..6);
        let w = random_window(&mut gen, l, t, d);
        let spec = AugmentSpec::dominant_shuffle(k);
        let got = augment::dominant_shuffle(&w, &spec, &mut seeded_rng(case)).unwrap();
        let want = oracle_shuffle(&w, k, &mut seeded_rng(case));
        let err = max_diff(&got.concatenated(), &want);
        assert!(err < 1e-9, "case {case} (N={}, k={k}): {err}", l + t);
    }
}

#[test]
fn freq_mix_matches_naive_pipeline() {
    let mut gen = SeededRng::seed_from_u64(12);
    for case in 0..40u64 {
        let l = gen.random_range(4..40);
        let t = gen.random_range(1..20);
        let d = gen.random_range(1..4);
        let a = random_window(&mut gen, l, t, d);
        let b = random_window(&mut gen, l, t, d);
        let rate = [0.1, 0.25, 0.5][case as usize % 3];
        let spec = AugmentSpec::new(Method::FreqMix).with_mask_rate(rate);
        let got = augment::freq_mix(&a, &b, &spec, &mut seeded_rng(case)).unwrap();
        let want = oracle_mix(&a, &b, rate, &mut seeded_rng(case));
        let err = max_diff(&got.concatenated(), &want);
        assert!(err < 1e-9, "case {case}: {err}");
    }
}

#[test]
fn batch_copies_use_derived_seeds() {
    let mut gen = SeededRng::seed_from_u64(13);
    let windows: Vec<SeriesWindow> = (0..5).map(|_| random_window(&mut gen, 24, 8, 3)).collect();
    let spec = AugmentSpec::dominant_shuffle(3).with_seed(2024);
    let out = augment_batch(&windows, &spec, 3).unwrap();
    assert_eq!(out.len(), 15);
    for (pos, aug) in out.iter().enumerate() {
        let (copy, i) = (pos / 5, pos % 5);
        assert_eq!((aug.provenance.copy, aug.provenance.source), (copy, i));
        let want = if copy == 0 {
            windows[i].concatenated()
        } else {
            oracle_shuffle(&windows[i], 3, &mut seeded_rng(derive_seed(2024, i as u64, copy as u64)))
        };
        assert!(max_diff(&aug.window.concatenated(), &want) < 1e-9);
    }
}

// Values produced by the naive pipeline above for a fixed input, frozen so
// that a change in seeding or draw order shows up as a diff here.
#[test]
fn frozen_shuffle_output() {
    let h = Array2::from_shape_fn((12, 1), |(t, _)| (t as f64 * 0.7).sin() + 0.3 * (t as f64 * 2.1).cos());
    let f = Array2::from_shape_fn((4, 1), |(t, _)| ((t + 12) as f64 * 0.7).sin() + 0.3 * ((t + 12) as f64 * 2.1).cos());
    let w = SeriesWindow::new(h, f).unwrap();
    let spec = AugmentSpec::dominant_shuffle(3).with_seed(42);
    let out = augment_batch(std::slice::from_ref(&w), &spec, 2).unwrap();
    let got = out[1].window.column(0);
    let frozen = FROZEN_SHUFFLE;
    for (t, (g, want)) in got.iter().zip(frozen).enumerate() {
        assert!((g - want).abs() < 1e-10, "t={t}: {g} vs {want}");
    }
}

const FROZEN_SHUFFLE: [f64; 16] = [
    0.2999999999999991,
    0.04098710521358773,
    0.04391889206568268,
    0.5317400734658045,
    0.310730797399015,
    0.7087463609556658,
    1.477762067826237,
    1.0575240579110092,
    0.7423869219645981,
    0.5821986013261208,
    -0.48779521084448574,
    -0.8382111883206957,
    -0.4894657770328248,
    -0.865597647483652,
    -0.7702435922578769,
    -0.4567080680541209,
];
