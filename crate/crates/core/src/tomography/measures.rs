use num_complex::Complex64;

use crate::error::{Result, SwapError};
use crate::linalg::{self, CMatrix};
use crate::measurement::check_visibility;
use crate::state::DensityMatrix;

fn same_basis(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.basis() != sigma.basis() {
        return Err(SwapError::BasisMismatch(format!(
            "operands have dimensions {} and {} or differ in basis order",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(())
}

/// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, clamped to [0, 1].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_basis(rho, sigma)?;
    let s = linalg::psd_sqrt(rho.matrix());
    let inner = &s * sigma.matrix() * &s;
    let root = linalg::trace(&linalg::psd_sqrt(&inner)).re;
    Ok((root * root).clamp(0.0, 1.0))
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_basis(rho, sigma)?;
    Ok(linalg::trace_distance(rho.matrix(), sigma.matrix()))
}

fn spin_flip() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 3)] = Complex64::new(-1.0, 0.0);
    m[(3, 0)] = Complex64::new(-1.0, 0.0);
    m[(1, 2)] = Complex64::new(1.0, 0.0);
    m[(2, 1)] = Complex64::new(1.0, 0.0);
    m
}

/// Wootters concurrence of a two-qubit state written over `|ll>, |lh>, |hl>, |hh>`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(SwapError::BasisMismatch(format!(
            "concurrence needs a two-qubit state, got dimension {}",
            rho.dim()
        )));
    }
    let yy = spin_flip();
    let tilde = &yy * rho.matrix().conjugate() * &yy;
    let s = linalg::psd_sqrt(rho.matrix());
    let r = linalg::psd_sqrt(&(&s * tilde * &s));
    let mut lambda = linalg::hermitian_eigenvalues(&r);
    lambda.sort_by(|a, b| b.total_cmp(a));
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).clamp(0.0, 1.0))
}

/// Singlet fidelity of `V |Ψ-><Ψ-| + (1 - V) I/4`.
pub fn fidelity_vs_visibility(visibility: f64) -> Result<f64> {
    check_visibility(visibility)?;
    Ok(visibility + (1.0 - visibility) / 4.0)
}
