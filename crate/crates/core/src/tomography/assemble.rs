use std::collections::BTreeSet;

use super::fidelity;
use crate::circuit::{swap_weights, SingletWeight};
use crate::error::{Result, SwapError};
use crate::linalg::CMatrix;
use crate::measurement::Subspace;
use crate::state::{BasisKet, DensityMatrix, PathLabel, SpiralSpectrum};

/// Four-dimensional AD estimate stitched together from subspace tomography.
#[derive(Clone, Debug, PartialEq)]
pub struct Assembled4d {
    pub rho: DensityMatrix,
    /// `unmeasured[i][j]` marks coherences no subspace measurement reaches.
    pub unmeasured: Vec<Vec<bool>>,
    /// Subspace weights after restriction to the six measured subspaces.
    pub weights: Vec<SingletWeight>,
}

const MODES: [i32; 4] = [-2, -1, 1, 2];

/// The 16 kets `|a>_A |d>_D` with `a, d ∈ {±1, ±2}`, in canonical order.
pub fn basis_4d() -> Vec<BasisKet> {
    let mut basis: Vec<BasisKet> = MODES
        .iter()
        .flat_map(|&a| MODES.iter().map(move |&d| BasisKet::from_pairs(&[(PathLabel::A, a), (PathLabel::D, d)])))
        .collect();
    basis.sort();
    basis
}

fn ket_modes(k: &BasisKet) -> [i32; 2] {
    [k.mode(PathLabel::A).map_or(0, |m| m.0), k.mode(PathLabel::D).map_or(0, |m| m.0)]
}

fn unmeasured_mask(basis: &[BasisKet]) -> Vec<Vec<bool>> {
    basis
        .iter()
        .map(|r| {
            basis
                .iter()
                .map(|c| {
                    let set: BTreeSet<i32> = ket_modes(r).into_iter().chain(ket_modes(c)).collect();
                    set.len() > 2
                })
                .collect()
        })
        .collect()
}

/// Swap weights of the six standard subspaces, renormalised over them.
pub fn subspace_weights(spectrum: &SpiralSpectrum) -> Result<Vec<SingletWeight>> {
    let six = Subspace::standard_six();
    let mut weights: Vec<SingletWeight> = swap_weights(spectrum)?
        .into_iter()
        .filter(|w| six.iter().any(|s| s.low().0 == w.low && s.high().0 == w.high))
        .collect();
    let total: f64 = weights.iter().map(|w| w.weight).sum();
    if total <= 0.0 {
        return Err(SwapError::ZeroAmplitude("spectrum puts no weight on the measured subspaces".into()));
    }
    weights.iter_mut().for_each(|w| w.weight /= total);
    Ok(weights)
}

/// Predicted singlet mixture on the 16-ket basis.
pub fn predicted_4d(spectrum: &SpiralSpectrum) -> Result<DensityMatrix> {
    let basis = basis_4d();
    let mut m = CMatrix::zeros(16, 16);
    for w in subspace_weights(spectrum)? {
        let s = Subspace::new(w.low, w.high)?;
        m += s.singlet_density().in_basis(&basis)?.matrix().scale(w.weight);
    }
    DensityMatrix::new(basis, m)
}

/// Embeds the six subspace estimates with the spectrum's weights.
///
/// Kets `|l l>` belong to three subspaces each; every block is conjugated by
/// `diag(1/sqrt(m_k))`, `m_k` being the number of subspaces sharing ket `k`,
/// so the shared populations enter as an average rather than three times.
/// The congruence keeps the sum positive. Cross-subspace coherences stay
/// zero and are flagged in the mask.
pub fn assemble_4d(subspace_rhos: &[(Subspace, DensityMatrix)], spectrum: &SpiralSpectrum) -> Result<Assembled4d> {
    let weights = subspace_weights(spectrum)?;
    let basis = basis_4d();
    let mut m = CMatrix::zeros(16, 16);
    for s in Subspace::standard_six() {
        let mut found = subspace_rhos.iter().filter(|(t, _)| *t == s);
        let (_, rho) = found
            .next()
            .ok_or_else(|| SwapError::InvalidArgument(format!("missing subspace {s}")))?;
        if found.next().is_some() {
            return Err(SwapError::InvalidArgument(format!("subspace {s} given twice")));
        }
        if rho.basis() != s.basis().as_slice() {
            return Err(SwapError::BasisMismatch(format!("matrix for {s} is not over its subspace basis")));
        }
        rho.validate()?;
        let w = weights
            .iter()
            .find(|w| w.low == s.low().0 && w.high == s.high().0)
            .map_or(0.0, |w| w.weight);
        if w == 0.0 {
            continue;
        }
        let kets = s.basis();
        let scale: Vec<f64> = kets
            .iter()
            .map(|k| {
                let [a, d] = ket_modes(k);
                if a == d { 1.0 / 3f64.sqrt() } else { 1.0 }
            })
            .collect();
        let idx: Vec<usize> = kets.iter().map(|k| basis.iter().position(|b| b == k).expect("in 4d basis")).collect();
        for i in 0..4 {
            for j in 0..4 {
                m[(idx[i], idx[j])] += rho.matrix()[(i, j)] * (w * scale[i] * scale[j]);
            }
        }
    }
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    if tr <= 0.0 {
        return Err(SwapError::Numerical("assembled matrix has zero trace".into()));
    }
    let rho = DensityMatrix::new(basis.clone(), m.unscale(tr))?;
    Ok(Assembled4d { rho, unmeasured: unmeasured_mask(&basis), weights })
}

impl Assembled4d {
    /// Fidelity to the predicted singlet mixture. Its support lies inside the
    /// measured elements, so the masked coherences do not enter.
    pub fn fidelity_to_prediction(&self, spectrum: &SpiralSpectrum) -> Result<f64> {
        fidelity(&self.rho, &predicted_4d(spectrum)?)
    }
}
