//! Simulation and reconstruction shared by the subcommands.

use oamswap::circuit::{analytic_swapped_density, swap_weights};
use oamswap::measurement::{
    apply_visibility_noise, derive_seed, ideal_probability, settings_for, simulate_counts, CountRecord,
    NoiseModel, Subspace,
};
use oamswap::state::{DensityMatrix, SpiralSpectrum};
use oamswap::tomography::{
    concurrence, error_bars, fidelity, EntanglementReport, ReconstructionResult, Reconstructor,
    ReconstructorRegistry, TomographyData,
};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Stream tags separating the random draws of different stages.
pub mod streams {
    pub const COUNTS: u64 = 1 << 32;
    pub const BOOTSTRAP: u64 = 2 << 32;
    pub const SWEEP: u64 = 3 << 32;
    pub const HOM: u64 = 4 << 32;
}

/// What gets measured on one subspace.
#[derive(Clone, Debug)]
pub struct SubspacePlan {
    pub subspace: Subspace,
    pub visibility: f64,
    pub truth: DensityMatrix,
    pub rate_at_unit_probability: f64,
    pub expected_counts: f64,
}

/// The swapped state restricted to `subspace` under the Werner noise model.
/// Count rates follow the subspace's share of the mixture, with the most
/// populated singlet running at `source.fourfold_rate_hz` per setting.
pub fn plan_subspace(
    cfg: &ExperimentConfig,
    spectrum: &SpiralSpectrum,
    subspace: Subspace,
    visibility: f64,
) -> Result<SubspacePlan, CliError> {
    let weights = swap_weights(spectrum).map_err(CliError::config)?;
    let max = weights.iter().map(|w| w.weight).fold(0.0, f64::max);
    let w = weights
        .iter()
        .find(|w| w.low == subspace.low().0 && w.high == subspace.high().0)
        .map_or(0.0, |w| w.weight);
    if w == 0.0 {
        return Err(CliError::Config(format!("spectrum gives subspace {subspace} no population")));
    }
    let mixture = analytic_swapped_density(spectrum)?;
    let truth = apply_visibility_noise(&subspace.restrict(&mixture)?, visibility)?;
    let settings = settings_for(subspace);
    let mut mean_p = 0.0;
    for s in &settings {
        mean_p += ideal_probability(&truth, s)? / settings.len() as f64;
    }
    let rate_per_setting = cfg.source.fourfold_rate_hz * w / max;
    Ok(SubspacePlan {
        subspace,
        visibility,
        truth,
        rate_at_unit_probability: rate_per_setting / mean_p,
        expected_counts: rate_per_setting * settings.len() as f64 * cfg.source.duration_s,
    })
}

pub fn simulate(cfg: &ExperimentConfig, plan: &SubspacePlan, seed: u64) -> Result<Vec<CountRecord>, CliError> {
    let noise = NoiseModel::new(plan.visibility, cfg.background_rates()?, seed).map_err(CliError::config)?;
    Ok(simulate_counts(
        &plan.truth,
        &settings_for(plan.subspace),
        plan.rate_at_unit_probability,
        cfg.source.duration_s,
        &noise,
    )?)
}

pub fn reconstructor<'a>(
    registry: &'a ReconstructorRegistry,
    cfg: &ExperimentConfig,
) -> Result<&'a dyn Reconstructor, CliError> {
    registry.get(&cfg.method).map_err(CliError::config)
}

/// One simulated and reconstructed subspace.
#[derive(Clone, Debug)]
pub struct SubspaceRun {
    pub plan: SubspacePlan,
    pub records: Vec<CountRecord>,
    pub result: ReconstructionResult,
    pub fidelity: f64,
    pub concurrence: f64,
    pub bars: Option<EntanglementReport>,
}

/// Simulates and reconstructs each subspace concurrently; subspace `k` draws
/// from sub-seeds derived from `(seed, k)`, so results are independent of
/// scheduling and of the other subspaces.
pub fn run_subspaces(
    cfg: &ExperimentConfig,
    subspaces: &[Subspace],
    visibility: f64,
    seed: u64,
    bootstrap: bool,
) -> Result<Vec<SubspaceRun>, CliError> {
    let spectrum = cfg.spectrum()?;
    let registry = ReconstructorRegistry::default();
    let method = reconstructor(&registry, cfg)?;
    let plans = subspaces
        .iter()
        .map(|&s| plan_subspace(cfg, &spectrum, s, visibility))
        .collect::<Result<Vec<_>, _>>()?;
    plans
        .into_par_iter()
        .enumerate()
        .map(|(k, plan)| {
            let records = simulate(cfg, &plan, derive_seed(seed, streams::COUNTS + k as u64))?;
            let data = TomographyData::from_records(&records)?;
            let result = method.reconstruct(&data)?;
            let singlet = plan.subspace.singlet_density();
            let bars = if bootstrap {
                let s = derive_seed(seed, streams::BOOTSTRAP + k as u64);
                Some(error_bars(&data, method, cfg.tomography.bootstrap_resamples, s)?)
            } else {
                None
            };
            Ok(SubspaceRun {
                fidelity: fidelity(&result.rho, &singlet)?,
                concurrence: concurrence(&result.rho)?,
                plan,
                records,
                result,
                bars,
            })
        })
        .collect()
}
