//! Filtering the swapped state into a pure high-dimensional entangled state
//! by projecting BC onto a superposition of singlets.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::project_onto;
use crate::error::{Result, SwapError};
use crate::state::{bell_state, inner_product, BasisKet, BellSign, DensityMatrix, PathLabel, PureState};

/// Default singular-value cutoff for [`schmidt_rank`].
pub const SCHMIDT_TOL: f64 = 1e-10;

const FILTER_NORM_TOL: f64 = 1e-12;

/// Normalised BC state the coincidence photons are projected onto.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterSpec {
    target: PureState,
}

impl FilterSpec {
    pub fn new(target: PureState) -> Result<Self> {
        if target.occupied_paths() != [PathLabel::B, PathLabel::C] || target.photon_count() != 2 {
            return Err(SwapError::InvalidArgument("filter must hold one photon in each of B and C".into()));
        }
        if (target.norm_sqr() - 1.0).abs() > FILTER_NORM_TOL {
            return Err(SwapError::InvalidArgument(format!(
                "filter norm^2 is {}, expected 1",
                target.norm_sqr()
            )));
        }
        Ok(Self { target })
    }

    /// `|x> = sum_{n=1}^{N} |Ψ-_{n,-n}>_BC / sqrt(N)`.
    pub fn superposition(n_max: u32) -> Result<Self> {
        if n_max == 0 {
            return Err(SwapError::InvalidArgument("filter needs at least one order".into()));
        }
        let mut x = bell_state(1, -1, BellSign::Minus, (PathLabel::B, PathLabel::C))?;
        for n in 2..=n_max as i32 {
            x = x.add_scaled(&bell_state(n, -n, BellSign::Minus, (PathLabel::B, PathLabel::C))?, Complex64::new(1.0, 0.0))?;
        }
        Self::new(x.normalized()?)
    }

    pub fn target(&self) -> &PureState {
        &self.target
    }
}

/// Projects BC of `post_selected` onto the filter. Returns the normalised AD
/// state and the probability of the projection succeeding.
pub fn apply_filter(post_selected: &PureState, filter: &FilterSpec) -> Result<(PureState, f64)> {
    if post_selected.occupied_paths() != PathLabel::ALL {
        return Err(SwapError::InvalidArgument("filter acts on a four-path state".into()));
    }
    let ad = project_onto(post_selected, &filter.target)?;
    let p = ad.norm_sqr() / post_selected.norm_sqr();
    if ad.is_empty() || p <= 1e-24 {
        return Err(SwapError::ZeroAmplitude("filter is orthogonal to the BC state".into()));
    }
    Ok((ad.normalized()?, p))
}

/// `tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    (m * m).trace().re
}

fn amplitude_matrix(state: &PureState, cut: (&[PathLabel], &[PathLabel])) -> Result<DMatrix<Complex64>> {
    let (left, right) = cut;
    if left.is_empty() || right.is_empty() {
        return Err(SwapError::InvalidArgument("trivial cut".into()));
    }
    if left.iter().any(|p| right.contains(p)) {
        return Err(SwapError::OverlappingPaths("cut sides share a path".into()));
    }
    let occupied = state.occupied_paths();
    if occupied.iter().any(|p| !left.contains(p) && !right.contains(p)) {
        return Err(SwapError::InvalidArgument("cut does not cover every occupied path".into()));
    }
    let mut rows: Vec<BasisKet> = state.terms().keys().map(|k| k.restrict(left)).collect();
    let mut cols: Vec<BasisKet> = state.terms().keys().map(|k| k.restrict(right)).collect();
    rows.sort();
    rows.dedup();
    cols.sort();
    cols.dedup();
    let mut m = DMatrix::zeros(rows.len(), cols.len());
    let norm = state.norm();
    for (ket, amp) in state.terms() {
        let i = rows.binary_search(&ket.restrict(left)).expect("row present");
        let j = cols.binary_search(&ket.restrict(right)).expect("column present");
        m[(i, j)] = amp * ket.bosonic_weight().sqrt() / norm;
    }
    Ok(m)
}

/// Schmidt coefficients across the cut, descending, squares summing to 1.
pub fn schmidt_coefficients(state: &PureState, cut: (&[PathLabel], &[PathLabel])) -> Result<Vec<f64>> {
    let m = amplitude_matrix(state, cut)?;
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

pub fn schmidt_rank(state: &PureState, cut: (&[PathLabel], &[PathLabel]), tolerance: f64) -> Result<usize> {
    Ok(schmidt_coefficients(state, cut)?.iter().filter(|&&s| s > tolerance).count())
}

/// Overlaps `<Ψ-_{-n,n}|ψ>` of an AD state with the singlets of orders `1..=n_max`.
pub fn singlet_components(ad: &PureState, n_max: u32) -> Result<Vec<Complex64>> {
    (1..=n_max as i32)
        .map(|n| inner_product(&bell_state(-n, n, BellSign::Minus, (PathLabel::A, PathLabel::D))?, ad))
        .collect()
}

#[cfg(test)]
mod tests;
