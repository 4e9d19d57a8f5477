use rand::Rng;
use rayon::prelude::*;

use super::ops;
use super::spec::{AugmentSpec, Method};
use super::window::{AugmentedWindow, Provenance, SeriesWindow, WindowSource};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, seeded_rng};

/// Produces augmented copy `copy` (>= 1) of window `index`.
///
/// The result depends only on the source windows, the spec and the
/// `(spec.seed, index, copy)` triple.
pub fn augment_copy<S: WindowSource + ?Sized>(
    source: &S,
    index: usize,
    copy: usize,
    spec: &AugmentSpec,
) -> Result<AugmentedWindow> {
    let seed = derive_seed(spec.seed, index as u64, copy as u64);
    let mut rng = seeded_rng(seed);
    let window = source.window(index)?;
    let (window, partner) = if spec.method == Method::FreqMix {
        let n = source.len();
        let j = if n > 1 {
            let j = rng.random_range(0..n - 1);
            if j >= index {
                j + 1
            } else {
                j
            }
        } else {
            index
        };
        let b = source.window(j)?;
        (ops::apply(&window, Some(&b), spec, &mut rng)?, Some(j))
    } else {
        (ops::apply(&window, None, spec, &mut rng)?, None)
    };
    Ok(AugmentedWindow {
        window,
        provenance: Provenance {
            source: index,
            partner,
            method: Some(spec.method),
            copy,
            seed: Some(seed),
        },
    })
}

fn original(window: SeriesWindow, index: usize) -> AugmentedWindow {
    AugmentedWindow {
        window,
        provenance: Provenance {
            source: index,
            partner: None,
            method: None,
            copy: 0,
            seed: None,
        },
    }
}

/// Originals followed by `multiplier - 1` augmented copies of each window.
///
/// Output order is all originals, then copy 1 of every window, then copy 2,
/// and so on. Copies are computed in parallel; the result is identical to a
/// sequential run.
pub fn augment_batch(
    windows: &[SeriesWindow],
    spec: &AugmentSpec,
    multiplier: usize,
) -> Result<Vec<AugmentedWindow>> {
    if multiplier == 0 {
        return Err(Error::Parameter("size multiplier must be at least 1".into()));
    }
    if multiplier > 1 {
        spec.validate()?;
    }
    let n = windows.len();
    let mut out: Vec<AugmentedWindow> = windows
        .iter()
        .enumerate()
        .map(|(i, w)| original(w.clone(), i))
        .collect();
    let copies = n * (multiplier - 1);
    let augmented = (0..copies)
        .into_par_iter()
        .map(|job| augment_copy(windows, job % n, 1 + job / n, spec))
        .collect::<Result<Vec<_>>>()?;
    out.extend(augmented);
    Ok(out)
}
