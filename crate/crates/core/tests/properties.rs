use domshuffle_core::augment::{
    self, augment_array, augment_batch, AugmentSpec, Band, BatchDescriptor, Method, NoiseScale, SeriesWindow,
};
use domshuffle_core::seed::{seeded_rng, SeededRng};
use domshuffle_core::spectral::{rfft, top_k_bins, CandidatePolicy};
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn window_from(values: &[f64], l: usize, t: usize, d: usize) -> SeriesWindow {
    let block = Array2::from_shape_vec((l + t, d), values.to_vec()).unwrap();
    SeriesWindow::from_concatenated(block.view(), l).unwrap()
}

fn arb_window() -> impl Strategy<Value = SeriesWindow> {
    (2usize..40, 1usize..30, 1usize..4).prop_flat_map(|(l, t, d)| {
        prop::collection::vec(-100.0f64..100.0, (l + t) * d).prop_map(move |v| window_from(&v, l, t, d))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn shuffle_permutes_dominant_bins_only(w in arb_window(), k in 1usize..9, seed: u64) {
        let spec = AugmentSpec::dominant_shuffle(k);
        let out = augment::dominant_shuffle(&w, &spec, &mut seeded_rng(seed)).unwrap();
        prop_assert_eq!(out.shape(), w.shape());
        let policy = CandidatePolicy::default();
        for d in 0..w.variates() {
            let before = rfft(w.column(d)).unwrap();
            let after = rfft(out.column(d)).unwrap();
            let top = top_k_bins(&before, k, policy).unwrap();
            let scale = before.magnitudes().iter().copied().fold(1.0, f64::max);
            // re-transforming the output reproduces the permuted coefficients up to rounding
            let mut permuted: Vec<Complex64> = top.indices().iter().map(|&i| after.coefficients()[i]).collect();
            let mut original: Vec<Complex64> = top.indices().iter().map(|&i| before.coefficients()[i]).collect();
            let key = |c: &Complex64| (c.re, c.im);
            permuted.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
            original.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
            for (a, b) in permuted.iter().zip(&original) {
                prop_assert!((a - b).norm() < 1e-9 * scale);
            }
            for bin in 0..before.len() {
                if !top.indices().contains(&bin) {
                    prop_assert!((after.coefficients()[bin] - before.coefficients()[bin]).norm() < 1e-9 * scale);
                }
            }
        }
        let e0 = w.energy();
        prop_assert!((out.energy() - e0).abs() <= 1e-8 * e0.max(1e-300));
    }

    #[test]
    fn mask_never_adds_energy(w in arb_window(), rate in 0.01f64..1.0, seed: u64) {
        let spec = AugmentSpec::new(Method::FreqMask).with_mask_rate(rate);
        let out = augment::freq_mask(&w, &spec, &mut seeded_rng(seed)).unwrap();
        prop_assert!(out.energy() <= w.energy() * (1.0 + 1e-12) + 1e-9);
    }

    #[test]
    fn pool_of_one_is_identity(w in arb_window()) {
        let spec = AugmentSpec::new(Method::FreqPool).with_pool_size(1);
        let out = augment::freq_pool(&w, &spec).unwrap();
        let scale = w.concatenated().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in out.concatenated().iter().zip(w.concatenated().iter()) {
            prop_assert!((a - b).abs() < 1e-9 * scale);
        }
    }
}

/// Each noisy bin gains 2·std² of squared magnitude on average.
#[test]
fn noise_energy_matches_expectation() {
    let n = 64;
    let mut gen = SeededRng::seed_from_u64(5);
    let w = window_from(&(0..n).map(|_| gen.random_range(-1.0..1.0)).collect::<Vec<_>>(), 48, 16, 1);
    let half_energy = |w: &SeriesWindow| rfft(w.column(0)).unwrap().magnitudes().iter().map(|m| m * m).sum::<f64>();
    let sigma = 0.3;
    let spec = AugmentSpec::new(Method::FreqNoise).with_sigma(sigma);
    let spec = AugmentSpec {
        noise_scale: NoiseScale::Absolute,
        ..spec
    };
    // full band over bins 1..=31 (Nyquist excluded)
    let band = 31.0;
    let expected = 2.0 * band * sigma * sigma;
    let base = half_energy(&w);
    let draws = 10_000;
    let mean: f64 = (0..draws)
        .map(|i| half_energy(&augment::freq_noise(&w, &spec, &mut seeded_rng(i)).unwrap()) - base)
        .sum::<f64>()
        / draws as f64;
    assert!((mean - expected).abs() < 0.05 * expected, "{mean} vs {expected}");
}

#[test]
fn random_magnitudes_stay_in_band_range() {
    let mut gen = SeededRng::seed_from_u64(6);
    for case in 0..200 {
        let w = window_from(&(0..96 * 2).map(|_| gen.random_range(-3.0..3.0)).collect::<Vec<_>>(), 64, 32, 2);
        for band in [Band::Dominant, Band::Minor, Band::Full] {
            let spec = AugmentSpec::new(Method::FreqRandom).with_k(6).with_band(band);
            let out = augment::freq_random(&w, &spec, &mut seeded_rng(case)).unwrap();
            for d in 0..2 {
                let before = rfft(w.column(d)).unwrap();
                let after = rfft(out.column(d)).unwrap();
                let set = augment::band_select(&before, spec.band_policy().unwrap(), spec.candidate_policy()).unwrap();
                let mags: Vec<f64> = set.indices().iter().map(|&i| before.coefficients()[i].norm()).collect();
                let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = mags.iter().copied().fold(0.0, f64::max);
                for &i in set.indices() {
                    let m = after.coefficients()[i].norm();
                    assert!(m >= lo - 1e-9 && m <= hi + 1e-9, "{band}: {m} outside [{lo}, {hi}]");
                }
            }
        }
    }
}

#[test]
fn batch_is_reproducible_and_order_free() {
    let mut gen = SeededRng::seed_from_u64(7);
    let windows: Vec<SeriesWindow> = (0..50)
        .map(|_| window_from(&(0..40 * 3).map(|_| gen.random_range(-1.0..1.0)).collect::<Vec<_>>(), 30, 10, 3))
        .collect();
    for method in Method::ALL {
        let spec = AugmentSpec::new(method).with_seed(99);
        let a = augment_batch(&windows, &spec, 4).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| augment_batch(&windows, &spec, 4).unwrap());
        assert_eq!(a, b, "{method}");
        // a prefix of the input yields a prefix-consistent batch for non-mixing methods
        if method != Method::FreqMix {
            let c = augment_batch(&windows[..10], &spec, 4).unwrap();
            for copy in 0..4 {
                for i in 0..10 {
                    assert_eq!(c[copy * 10 + i], a[copy * 50 + i]);
                }
            }
        }
    }
}

#[test]
fn flat_array_matches_batch_driver() {
    let mut gen = SeededRng::seed_from_u64(8);
    for case in 0..200u64 {
        let b = gen.random_range(1..6);
        let l = gen.random_range(2..30);
        let t = gen.random_range(1..12);
        let d = gen.random_range(1..4);
        let n = l + t;
        let method = Method::ALL[case as usize % Method::ALL.len()];
        let mult = gen.random_range(1..4);
        let mut spec = AugmentSpec::new(method).with_seed(gen.random()).with_k(gen.random_range(1..5));
        if n < 6 && method == Method::FreqAdd {
            spec = AugmentSpec::new(Method::FreqPool);
        }
        let data: Vec<f64> = (0..b * n * d).map(|_| gen.random_range(-5.0..5.0)).collect();
        let copy = data.clone();
        let desc = BatchDescriptor::new(&data, (b, n, d), l, t).unwrap();
        let windows = desc.windows().unwrap();
        let flat = augment_array(&desc, &spec, mult);
        let core = augment_batch(&windows, &spec, mult);
        match (flat, core) {
            (Ok(flat), Ok(core)) => {
                assert_eq!(flat.len(), b * mult * n * d);
                let expected: Vec<f64> = core.iter().flat_map(|w| w.window.concatenated().into_iter()).collect();
                assert_eq!(
                    flat.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                    expected.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                    "case {case}"
                );
                if mult == 1 {
                    assert_eq!(flat, data);
                }
            }
            (Err(a), Err(b)) => assert_eq!(a.to_string(), b.to_string()),
            (a, b) => panic!("case {case}: flat {a:?} vs batch {:?}", b.map(|v| v.len())),
        }
        assert_eq!(data, copy, "input mutated in case {case}");
    }
}

#[test]
fn singleton_shuffle_on_flat_array() {
    let data: Vec<f64> = (0..16).map(|i| (i as f64 * 0.9).sin()).collect();
    let desc = BatchDescriptor::new(&data, (2, 8, 1), 6, 2).unwrap();
    let out = augment_array(&desc, &AugmentSpec::dominant_shuffle(1), 2).unwrap();
    for (i, v) in out.iter().enumerate() {
        assert!((v - data[i % 16]).abs() < 1e-9);
    }
}
