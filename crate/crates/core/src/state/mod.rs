//! Multi-photon OAM states and the basic operations on them.

mod density;
mod ket;
mod pure;
mod spectrum;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use density::{partial_trace, DensityMatrix, DENSITY_TOL};
pub use ket::{BasisKet, OamMode, PathLabel};
pub use pure::{PureState, PRUNE_EPS};
pub use spectrum::SpiralSpectrum;

use crate::error::{Result, SwapError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellSign {
    Plus,
    Minus,
}

/// `(|l>|k> ± |k>|l>)/sqrt(2)` on the two given paths.
pub fn bell_state(
    ell: impl Into<OamMode>,
    ell2: impl Into<OamMode>,
    sign: BellSign,
    paths: (PathLabel, PathLabel),
) -> Result<PureState> {
    let (l, k) = (ell.into(), ell2.into());
    let (p, q) = paths;
    if p == q {
        return Err(SwapError::RepeatedPath);
    }
    if l == k && sign == BellSign::Minus {
        return Err(SwapError::VanishingState(l.0));
    }
    let s = match sign {
        BellSign::Plus => 1.0,
        BellSign::Minus => -1.0,
    };
    let amp = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let first = BasisKet::vacuum().with(p, l).with(q, k);
    let second = BasisKet::vacuum().with(p, k).with(q, l);
    PureState::from_terms([(first, amp), (second, amp * s)])?.normalized()
}

/// Downconversion pair state `c0|0>|0> + sum_l c_l Psi+_{-l,l}` on two paths.
pub fn spdc_state(
    spectrum: &SpiralSpectrum,
    paths: (PathLabel, PathLabel),
    truncation: u32,
) -> Result<PureState> {
    if truncation == 0 {
        return Err(SwapError::InvalidArgument("truncation must be at least 1".into()));
    }
    if spectrum.max_order() > truncation {
        return Err(SwapError::InvalidArgument(format!(
            "spectrum order {} exceeds truncation {truncation}",
            spectrum.max_order()
        )));
    }
    let (p, q) = paths;
    if p == q {
        return Err(SwapError::RepeatedPath);
    }
    let mut terms = Vec::new();
    for (&ell, &c) in spectrum.coefficients() {
        let l = ell as i32;
        if ell == 0 {
            terms.push((BasisKet::vacuum().with(p, OamMode(0)).with(q, OamMode(0)), c));
        } else {
            for ket in bell_state(-l, l, BellSign::Plus, paths)?.terms() {
                terms.push((ket.0.clone(), ket.1 * c));
            }
        }
    }
    let state = PureState::from_terms(terms)?;
    if state.is_empty() {
        return Err(SwapError::EmptySpectrum);
    }
    state.normalized()
}

/// Product state on disjoint paths.
pub fn tensor(a: &PureState, b: &PureState) -> Result<PureState> {
    let pa = a.occupied_paths();
    if let Some(p) = b.occupied_paths().iter().find(|p| pa.contains(p)) {
        return Err(SwapError::OverlappingPaths(p.to_string()));
    }
    let mut terms = Vec::with_capacity(a.len() * b.len());
    for (ka, xa) in a.terms() {
        for (kb, xb) in b.terms() {
            terms.push((ka.merge(kb)?, xa * xb));
        }
    }
    PureState::from_terms(terms)
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &PureState, b: &PureState) -> Result<Complex64> {
    if a.photon_count() != b.photon_count() || a.occupied_paths() != b.occupied_paths() {
        return Err(SwapError::BasisMismatch(format!(
            "{} photons on {:?} vs {} photons on {:?}",
            a.photon_count(),
            a.occupied_paths(),
            b.photon_count(),
            b.occupied_paths()
        )));
    }
    Ok(overlap(a, b))
}

/// `<a|b>` without checking that both live on the same paths.
pub(crate) fn overlap(a: &PureState, b: &PureState) -> Complex64 {
    a.terms()
        .iter()
        .map(|(k, x)| x.conj() * b.amplitude(k) * k.bosonic_weight())
        .sum()
}
