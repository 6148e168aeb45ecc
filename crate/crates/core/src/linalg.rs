//! Small dense helpers on complex Hermitian matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues below this magnitude are treated as round-off when clipping.
pub const EIGEN_CLIP: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let eig = hermitize(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0.iter().copied().collect()
}

/// Rebuilds `V diag(f(λ)) V†`.
pub fn hermitian_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let n = values.len();
    let mut scaled = vectors.clone();
    for j in 0..n {
        let s = f(values[j]);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    scaled * vectors.adjoint()
}

/// Eigenvalues below this fraction of the largest are round-off for [`psd_sqrt`].
pub const SQRT_FLOOR: f64 = 1e-13;

/// Principal square root of a positive semidefinite matrix. Negative
/// eigenvalues and those under `SQRT_FLOOR` relative to the largest are
/// clipped to zero, since their square roots would amplify round-off.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (values, _) = hermitian_eigen(m);
    let floor = SQRT_FLOOR * values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    hermitian_map(m, |x| if x > floor { x.sqrt() } else { 0.0 })
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b)).iter().map(|x| x.abs()).sum::<f64>()
}

/// Clips negative eigenvalues and rescales to unit trace.
pub fn project_to_density(m: &CMatrix) -> Option<CMatrix> {
    let clipped = hermitian_map(m, |x| x.max(0.0));
    let tr = trace(&clipped).re;
    if tr <= 0.0 || !tr.is_finite() {
        return None;
    }
    Some(hermitize(&clipped).unscale(tr))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn outer(v: &[Complex64]) -> CMatrix {
    let col = DVector::from_column_slice(v);
    &col * col.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_squares_back() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.7, 0.0), c(0.1, -0.2), c(0.1, 0.2), c(0.3, 0.0)],
        );
        let r = psd_sqrt(&m);
        assert!(max_abs_diff(&(&r * &r), &m) < 1e-12);
    }

    #[test]
    fn eigenvalues_sorted_ascending() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)]));
        assert_eq!(hermitian_eigenvalues(&m), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn projection_clips_and_renormalizes() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.2, 0.0), c(-0.2, 0.0)]));
        let p = project_to_density(&m).unwrap();
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(p[(1, 1)].norm() < 1e-15);
    }
}
