use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{from_m4, log_likelihood_m4, Reconstructor, ReconstructionResult, TomographyData, M4};
use crate::error::{Result, SwapError};
use crate::linalg::{self, CMatrix};

/// Least-squares inversion of the Born-rule system, then eigenvalue clipping
/// and renormalisation.
#[derive(Clone, Copy, Debug, Default)]
pub struct LinearInversion;

fn pauli(k: usize) -> [[Complex64; 2]; 2] {
    let (o, l, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    match k {
        0 => [[l, o], [o, l]],
        1 => [[o, l], [l, o]],
        2 => [[o, -i], [i, o]],
        _ => [[l, o], [o, -l]],
    }
}

/// The 16 two-qubit Pauli products, a real basis of Hermitian 4x4 matrices.
pub(crate) fn pauli_products() -> [M4; 16] {
    std::array::from_fn(|k| {
        let (a, b) = (pauli(k / 4), pauli(k % 4));
        M4::from_fn(|r, c| a[r / 2][c / 2] * b[r % 2][c % 2])
    })
}

/// Unnormalised least-squares estimate `X` with `tr(Π_s X) ≈ n_s`.
pub(crate) fn invert(data: &TomographyData) -> Result<M4> {
    let projectors = data.projectors();
    let basis = pauli_products();
    let design = DMatrix::from_fn(16, 16, |s, k| (projectors[s] * basis[k]).trace().re);
    let svd = design.svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    // Holds for the four-projector product settings; a failure is a bug.
    assert!(min > 1e-10 * max, "tomography design matrix is singular");
    let rhs = DVector::from_column_slice(&data.counts);
    let coeffs = svd
        .solve(&rhs, 1e-12 * max)
        .map_err(|e| SwapError::Numerical(e.to_string()))?;
    Ok(basis.iter().zip(coeffs.iter()).fold(M4::zeros(), |acc, (b, &x)| acc + b * Complex64::new(x, 0.0)))
}

impl Reconstructor for LinearInversion {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn reconstruct(&self, data: &TomographyData) -> Result<ReconstructionResult> {
        let x = invert(data)?;
        let projected = linalg::project_to_density(&CMatrix::from_fn(4, 4, |i, j| x[(i, j)]))
            .ok_or_else(|| SwapError::Numerical("linear estimate has no positive part".into()))?;
        let m = M4::from_fn(|i, j| projected[(i, j)]);
        Ok(ReconstructionResult {
            rho: from_m4(data.subspace, &m)?,
            method: self.name().into(),
            log_likelihood: log_likelihood_m4(&m, &data.projectors(), &data.counts),
            iterations: 1,
            converged: true,
        })
    }
}
