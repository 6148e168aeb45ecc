use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{concurrence, fidelity, Reconstructor, TomographyData};
use crate::error::{Result, SwapError};
use crate::measurement::poisson;

/// A value with its one-sigma uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub fidelity: Estimate,
    pub concurrence: Estimate,
}

pub const MIN_RESAMPLES: usize = 100;

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Singlet fidelity and concurrence of the reconstruction of `data`, with
/// sample standard deviations over Poisson resamples of the counts.
///
/// Resample `i` draws from ChaCha stream `i` under `seed`.
pub fn error_bars(
    data: &TomographyData,
    reconstructor: &dyn Reconstructor,
    n_resamples: usize,
    seed: u64,
) -> Result<EntanglementReport> {
    if n_resamples < MIN_RESAMPLES {
        return Err(SwapError::InvalidArgument(format!(
            "need at least {MIN_RESAMPLES} resamples, got {n_resamples}"
        )));
    }
    let singlet = data.subspace.singlet_density();
    let measure = |d: &TomographyData| -> Result<(f64, f64)> {
        let r = reconstructor.reconstruct(d)?;
        Ok((fidelity(&r.rho, &singlet)?, concurrence(&r.rho)?))
    };
    let (f0, c0) = measure(data)?;
    let samples: Vec<(f64, f64)> = (0..n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let counts = data.counts.map(|n| poisson(n, &mut rng) as f64);
            measure(&TomographyData::new(data.subspace, counts)?)
        })
        .collect::<Result<_>>()?;
    let fs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let cs: Vec<f64> = samples.iter().map(|s| s.1).collect();
    Ok(EntanglementReport {
        fidelity: Estimate { value: f0, sigma: sample_std(&fs) },
        concurrence: Estimate { value: c0, sigma: sample_std(&cs) },
    })
}
