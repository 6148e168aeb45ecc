use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ket::{BasisKet, PathLabel};
use super::pure::PureState;
use crate::error::{Result, SwapError};
use crate::linalg::{self, CMatrix};

/// Tolerance for the Hermitian, unit-trace and positivity checks.
pub const DENSITY_TOL: f64 = 1e-10;

/// Density matrix over an explicit, ordered list of basis kets.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    basis: Vec<BasisKet>,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Pairs a basis with a matrix. Only shapes are checked here; use
    /// [`DensityMatrix::validate`] for the physical constraints.
    pub fn new(basis: Vec<BasisKet>, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(SwapError::BasisMismatch(format!(
                "{} basis kets for a {}x{} matrix",
                basis.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut seen = basis.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != basis.len() {
            return Err(SwapError::BasisMismatch("repeated basis ket".into()));
        }
        Ok(Self { basis, matrix })
    }

    /// `|ψ⟩⟨ψ|` over the kets of `state`, in canonical ket order, normalised.
    pub fn from_pure(state: &PureState) -> Result<Self> {
        let state = state.normalized()?;
        let basis: Vec<BasisKet> = state.terms().keys().cloned().collect();
        let amps: Vec<Complex64> = state
            .terms()
            .iter()
            .map(|(k, a)| a * k.bosonic_weight().sqrt())
            .collect();
        Self::new(basis, linalg::outer(&amps))
    }

    /// `|ψ⟩⟨ψ|` written in a prescribed basis that must cover the state.
    pub fn from_pure_in_basis(state: &PureState, basis: Vec<BasisKet>) -> Result<Self> {
        let state = state.normalized()?;
        for k in state.terms().keys() {
            if !basis.contains(k) {
                return Err(SwapError::BasisMismatch(format!("{k} outside basis")));
            }
        }
        let amps: Vec<Complex64> = basis
            .iter()
            .map(|k| state.amplitude(k) * k.bosonic_weight().sqrt())
            .collect();
        Self::new(basis, linalg::outer(&amps))
    }

    pub fn maximally_mixed(basis: Vec<BasisKet>) -> Result<Self> {
        let n = basis.len();
        if n == 0 {
            return Err(SwapError::InvalidArgument("empty basis".into()));
        }
        Self::new(basis, CMatrix::identity(n, n).unscale(n as f64))
    }

    pub fn basis(&self) -> &[BasisKet] {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, ket: &BasisKet) -> Option<usize> {
        self.basis.iter().position(|k| k == ket)
    }

    pub fn element(&self, row: &BasisKet, col: &BasisKet) -> Complex64 {
        match (self.index_of(row), self.index_of(col)) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => Complex64::default(),
        }
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// Checks Hermiticity, unit trace and positivity within [`DENSITY_TOL`].
    pub fn validate(&self) -> Result<()> {
        let herm = linalg::max_abs_diff(&self.matrix, &self.matrix.adjoint());
        if herm > DENSITY_TOL {
            return Err(SwapError::Numerical(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = linalg::trace(&self.matrix);
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(SwapError::Numerical(format!("trace {tr} is not 1")));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -DENSITY_TOL {
            return Err(SwapError::Numerical(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Same operator written over `basis`, which must contain the support.
    pub fn in_basis(&self, basis: &[BasisKet]) -> Result<Self> {
        let lookup: Vec<Option<usize>> = basis.iter().map(|k| self.index_of(k)).collect();
        for (i, k) in self.basis.iter().enumerate() {
            if !basis.contains(k) && self.matrix.row(i).iter().any(|z| z.norm() > 0.0) {
                return Err(SwapError::BasisMismatch(format!("{k} has weight outside target basis")));
            }
        }
        let n = basis.len();
        let m = DMatrix::from_fn(n, n, |i, j| match (lookup[i], lookup[j]) {
            (Some(a), Some(b)) => self.matrix[(a, b)],
            _ => Complex64::default(),
        });
        Self::new(basis.to_vec(), m)
    }

    /// Reduced state on `keep`, renormalised to unit trace.
    pub fn partial_trace(&self, keep: &[PathLabel]) -> Result<Self> {
        let occupied: Vec<PathLabel> = PathLabel::ALL
            .into_iter()
            .filter(|&p| self.basis.iter().any(|k| !k.modes(p).is_empty()))
            .collect();
        let (keep, traced) = split_paths(keep, &occupied)?;
        let mut kept_index: BTreeMap<BasisKet, usize> = BTreeMap::new();
        for k in &self.basis {
            let n = kept_index.len();
            kept_index.entry(k.restrict(&keep)).or_insert(n);
        }
        let kept_basis = sorted_keys(&mut kept_index);
        let n = kept_basis.len();
        let mut out = CMatrix::zeros(n, n);
        for (i, ki) in self.basis.iter().enumerate() {
            let (ri, ti) = (ki.restrict(&keep), ki.restrict(&traced));
            for (j, kj) in self.basis.iter().enumerate() {
                if kj.restrict(&traced) == ti {
                    out[(kept_index[&ri], kept_index[&kj.restrict(&keep)])] += self.matrix[(i, j)];
                }
            }
        }
        normalized(kept_basis, out)
    }
}

/// Reduced density matrix of a pure state on the paths in `keep`.
///
/// Kets of the kept subsystem are ordered canonically, which for two paths
/// gives `|l1 l1>, |l1 l2>, |l2 l1>, |l2 l2>` with `l1 < l2`.
pub fn partial_trace(state: &PureState, keep: &[PathLabel]) -> Result<DensityMatrix> {
    let (keep, traced) = split_paths(keep, &state.occupied_paths())?;
    // Group amplitudes by traced environment ket.
    let mut by_env: BTreeMap<BasisKet, Vec<(BasisKet, Complex64)>> = BTreeMap::new();
    let mut kept_index: BTreeMap<BasisKet, usize> = BTreeMap::new();
    for (ket, amp) in state.terms() {
        let kept = ket.restrict(&keep);
        let env = ket.restrict(&traced);
        let physical = amp * ket.bosonic_weight().sqrt();
        let n = kept_index.len();
        kept_index.entry(kept.clone()).or_insert(n);
        by_env.entry(env).or_default().push((kept, physical));
    }
    let basis = sorted_keys(&mut kept_index);
    let n = basis.len();
    let mut m = CMatrix::zeros(n, n);
    for column in by_env.values() {
        for (ki, ai) in column {
            for (kj, aj) in column {
                m[(kept_index[ki], kept_index[kj])] += ai * aj.conj();
            }
        }
    }
    normalized(basis, m)
}

fn split_paths(keep: &[PathLabel], occupied: &[PathLabel]) -> Result<(Vec<PathLabel>, Vec<PathLabel>)> {
    let mut keep = keep.to_vec();
    keep.sort();
    keep.dedup();
    if keep.is_empty() {
        return Err(SwapError::InvalidArgument("nothing to keep in partial trace".into()));
    }
    if let Some(p) = keep.iter().find(|p| !occupied.contains(p)) {
        return Err(SwapError::InvalidArgument(format!("path {p} is not occupied")));
    }
    let traced: Vec<PathLabel> = occupied.iter().copied().filter(|p| !keep.contains(p)).collect();
    if traced.is_empty() {
        return Err(SwapError::InvalidArgument("partial trace must discard at least one path".into()));
    }
    Ok((keep, traced))
}

/// Reassigns indices in canonical ket order and returns the ordered basis.
fn sorted_keys(index: &mut BTreeMap<BasisKet, usize>) -> Vec<BasisKet> {
    let basis: Vec<BasisKet> = index.keys().cloned().collect();
    for (i, k) in basis.iter().enumerate() {
        index.insert(k.clone(), i);
    }
    basis
}

fn normalized(basis: Vec<BasisKet>, m: CMatrix) -> Result<DensityMatrix> {
    let tr = linalg::trace(&m).re;
    if tr <= 0.0 {
        return Err(SwapError::ZeroAmplitude("reduced state has zero trace".into()));
    }
    DensityMatrix::new(basis, linalg::hermitize(&m).unscale(tr))
}
