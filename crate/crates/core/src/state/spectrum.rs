use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwapError};

/// OAM pair amplitudes of a downconversion source: `c0` for the Gaussian
/// `|0>|0>` term and `c_l` for the `Psi+_{-l,l}` term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralSpectrum {
    coeffs: BTreeMap<u32, Complex64>,
}

impl SpiralSpectrum {
    pub fn new(coeffs: impl IntoIterator<Item = (u32, Complex64)>) -> Result<Self> {
        let coeffs: BTreeMap<u32, Complex64> = coeffs.into_iter().collect();
        if coeffs.is_empty() {
            return Err(SwapError::EmptySpectrum);
        }
        if coeffs.values().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(SwapError::InvalidArgument("non-finite spectrum coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    /// Real coefficients indexed by `l`, starting at `c0`.
    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(
            coeffs
                .iter()
                .enumerate()
                .map(|(l, &c)| (l as u32, Complex64::new(c, 0.0))),
        )
    }

    pub fn coefficient(&self, ell: u32) -> Complex64 {
        self.coeffs.get(&ell).copied().unwrap_or_default()
    }

    pub fn coefficients(&self) -> &BTreeMap<u32, Complex64> {
        &self.coeffs
    }

    /// Largest modelled `l`.
    pub fn max_order(&self) -> u32 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(SwapError::EmptySpectrum);
        }
        Ok(Self {
            coeffs: self.coeffs.iter().map(|(&l, &c)| (l, c / n)).collect(),
        })
    }

    /// Amplitude with which one photon of a pair carries `mode`:
    /// `c0` for mode 0 and `c_|l| / sqrt(2)` otherwise.
    pub fn single_mode_amplitude(&self, mode: i32) -> Complex64 {
        if mode == 0 {
            self.coefficient(0)
        } else {
            self.coefficient(mode.unsigned_abs()) * std::f64::consts::FRAC_1_SQRT_2
        }
    }
}
