//! Two-qubit tomography on OAM subspaces, entanglement measures and the
//! four-dimensional estimate assembled from the subspace reconstructions.
//!
//! Reconstruction algorithms implement [`Reconstructor`] and are looked up by
//! name in a [`ReconstructorRegistry`]; `linear` and `mle` ship by default.

mod assemble;
mod bootstrap;
mod export;
mod linear;
mod measures;
mod mle;
mod registry;

use nalgebra::Matrix4;
use num_complex::Complex64;

pub use assemble::{assemble_4d, basis_4d, predicted_4d, subspace_weights, Assembled4d};
pub use bootstrap::{error_bars, EntanglementReport, Estimate, MIN_RESAMPLES};
pub use export::{matrix_from_json, matrix_to_json, MatrixFile};
pub use linear::LinearInversion;
pub use measures::{concurrence, fidelity, fidelity_vs_visibility, trace_distance};
pub use mle::{MaximumLikelihood, MleTrace};
pub use registry::{Reconstructor, ReconstructorRegistry};

use crate::error::{Result, SwapError};
use crate::linalg::CMatrix;
use crate::measurement::{
    ideal_probability, settings_for, subtract_background, CountRecord, MeasurementSetting, Subspace,
};
use crate::state::DensityMatrix;

pub(crate) type M4 = Matrix4<Complex64>;

/// Background-corrected counts for the 16 settings of one subspace, indexed
/// by [`MeasurementSetting::index`].
#[derive(Clone, Debug, PartialEq)]
pub struct TomographyData {
    pub subspace: Subspace,
    pub counts: [f64; 16],
}

impl TomographyData {
    pub fn new(subspace: Subspace, counts: [f64; 16]) -> Result<Self> {
        if counts.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(SwapError::InvalidArgument("counts must be finite and non-negative".into()));
        }
        if counts.iter().sum::<f64>() <= 0.0 {
            return Err(SwapError::InvalidArgument("no counts in any setting".into()));
        }
        Ok(Self { subspace, counts })
    }

    /// Collects one record per setting of a single subspace, subtracting the
    /// expected accidentals from each.
    pub fn from_records(records: &[CountRecord]) -> Result<Self> {
        if records.len() != 16 {
            return Err(SwapError::InvalidArgument(format!("expected 16 records, got {}", records.len())));
        }
        let subspace = records[0].setting.subspace;
        let mut counts = [f64::NAN; 16];
        for r in records {
            r.validate()?;
            if r.setting.subspace != subspace {
                return Err(SwapError::InvalidArgument("records span several subspaces".into()));
            }
            let slot = &mut counts[r.setting.index()];
            if !slot.is_nan() {
                return Err(SwapError::InvalidArgument(format!("setting {} repeated", r.setting.id())));
            }
            *slot = subtract_background(r);
        }
        Self::new(subspace, counts)
    }

    /// Expected counts `scale * p(setting)`, without noise.
    pub fn expected(rho: &DensityMatrix, subspace: Subspace, scale: f64) -> Result<Self> {
        let mut counts = [0.0; 16];
        for s in settings_for(subspace) {
            counts[s.index()] = scale * ideal_probability(rho, &s)?;
        }
        Self::new(subspace, counts)
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn settings(&self) -> Vec<MeasurementSetting> {
        settings_for(self.subspace)
    }

    pub(crate) fn projectors(&self) -> [M4; 16] {
        let settings = self.settings();
        std::array::from_fn(|i| {
            let v = settings[i].vector();
            M4::from_fn(|r, c| v[r] * v[c].conj())
        })
    }
}

/// Profile Poisson log-likelihood `sum_s n_s ln(p_s / sum p)`; settings
/// without counts contribute nothing even where `p_s = 0`.
pub fn log_likelihood(rho: &DensityMatrix, data: &TomographyData) -> Result<f64> {
    let m = to_m4(rho)?;
    Ok(log_likelihood_m4(&m, &data.projectors(), &data.counts))
}

pub(crate) fn log_likelihood_m4(rho: &M4, projectors: &[M4; 16], counts: &[f64; 16]) -> f64 {
    let probs: Vec<f64> = projectors.iter().map(|p| (p * rho).trace().re.max(0.0)).collect();
    let total: f64 = probs.iter().sum();
    let mut ll = 0.0;
    for (n, p) in counts.iter().zip(&probs) {
        if *n > 0.0 {
            if *p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ll += n * (p / total).ln();
        }
    }
    ll
}

pub(crate) fn to_m4(rho: &DensityMatrix) -> Result<M4> {
    if rho.dim() != 4 {
        return Err(SwapError::BasisMismatch(format!("expected a 4x4 matrix, got {}", rho.dim())));
    }
    Ok(M4::from_fn(|i, j| rho.matrix()[(i, j)]))
}

pub(crate) fn from_m4(subspace: Subspace, m: &M4) -> Result<DensityMatrix> {
    DensityMatrix::new(subspace.basis(), CMatrix::from_fn(4, 4, |i, j| m[(i, j)]))
}

/// A reconstructed subspace state.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionResult {
    pub rho: DensityMatrix,
    pub method: String,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Linear inversion followed by eigenvalue clipping.
pub fn reconstruct_linear(records: &[CountRecord]) -> Result<ReconstructionResult> {
    LinearInversion.reconstruct(&TomographyData::from_records(records)?)
}

/// Poisson maximum likelihood with default iteration limits.
pub fn reconstruct_mle(records: &[CountRecord]) -> Result<ReconstructionResult> {
    MaximumLikelihood::default().reconstruct(&TomographyData::from_records(records)?)
}
