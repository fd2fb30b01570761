use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::model::{Component, GmmModel};
use crate::{Error, Result};

pub const DEFAULT_OVERLAP_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of ∫ min(f_g, f_h) dx over the unweighted
/// component densities. Half the samples come from each component.
pub fn overlap(model: &GmmModel, g: usize, h: usize, n_samples: usize, seed: u64) -> Result<OverlapEstimate> {
    if g == h {
        return Err(Error::config("overlap needs two distinct components"));
    }
    let (Some(cg), Some(ch)) = (model.components.get(g), model.components.get(h)) else {
        return Err(Error::config(format!("components {g} and {h} are not both in a {}-component model", model.g())));
    };
    if n_samples < 4 {
        return Err(Error::config("overlap needs at least 4 samples"));
    }
    Ok(component_overlap(cg, ch, n_samples, seed))
}

pub fn component_overlap(a: &Component, b: &Component, n_samples: usize, seed: u64) -> OverlapEstimate {
    let half = n_samples / 2;
    let (ma, va) = stream(a, b, half, seed, 0);
    let (mb, vb) = stream(b, a, n_samples - half, seed, 1);
    OverlapEstimate {
        value: 0.5 * (ma + mb),
        std_error: 0.5 * (va / half as f64 + vb / (n_samples - half) as f64).sqrt(),
    }
}

/// Mean and sample variance of min(1, f_other / f_source) under f_source.
fn stream(source: &Component, other: &Component, n: usize, seed: u64, id: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let x = source.sample(&mut rng);
        let r = (other.log_pdf(&x) - source.log_pdf(&x)).min(0.0).exp();
        sum += r;
        sum_sq += r * r;
    }
    let mean = sum / n as f64;
    let var = ((sum_sq - n as f64 * mean * mean) / (n as f64 - 1.0)).max(0.0);
    (mean, var)
}

/// Overlaps of every component pair, `(g, h, estimate)` with g < h.
pub fn overlap_table(model: &GmmModel, n_samples: usize, seed: u64) -> Vec<(usize, usize, OverlapEstimate)> {
    let mut out = Vec::new();
    for g in 0..model.g() {
        for h in g + 1..model.g() {
            let est = component_overlap(&model.components[g], &model.components[h], n_samples, seed);
            out.push((g, h, est));
        }
    }
    out
}
