//! The swapping circuit: photons B and C meet on a 50:50 beamsplitter and
//! the run is kept only when each output port fires once.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwapError};
use crate::linalg::CMatrix;
use crate::state::{
    bell_state, partial_trace, tensor, BasisKet, BellSign, DensityMatrix, PathLabel, PureState,
    SpiralSpectrum,
};

use PathLabel::{A, B, C, D};

/// Post-selected projections below this squared norm count as zero.
const ZERO_NORM_SQR: f64 = 1e-24;

/// Outcome of conditioning on one photon in each beamsplitter output.
#[derive(Clone, Debug)]
pub struct PostSelectionResult {
    /// Kept component, renormalised.
    pub state: PureState,
    /// Squared norm of the kept component relative to the input.
    pub probability: f64,
    /// Squared norm of the bunched (discarded) component relative to the input.
    pub discarded: f64,
    /// Factor restoring unit norm to the kept component: `1/sqrt(probability)`.
    pub normalization: f64,
}

/// Applies the beamsplitter with the mirror compensation folded in:
/// `|l>_B -> (|l>_C - |l>_B)/sqrt(2)` and `|l>_C -> (|l>_B + |l>_C)/sqrt(2)`.
///
/// Output kets may hold two photons in one path.
pub fn beamsplitter_bc(state: &PureState) -> Result<PureState> {
    let has = |p: PathLabel| state.terms().keys().any(|k| !k.modes(p).is_empty());
    if !has(B) && !has(C) {
        return Err(SwapError::MissingPhoton("B or C"));
    }
    let h = FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for (ket, &amp) in state.terms() {
        let mut partial = vec![(ket.restrict(&[A, D]), amp)];
        let photons = ket
            .modes(B)
            .iter()
            .map(|&m| (B, m))
            .chain(ket.modes(C).iter().map(|&m| (C, m)));
        for (from, mode) in photons {
            let rules: [(PathLabel, f64); 2] = match from {
                B => [(C, h), (B, -h)],
                _ => [(B, h), (C, h)],
            };
            partial = partial
                .into_iter()
                .flat_map(|(k, a)| {
                    rules
                        .iter()
                        .map(move |&(to, s)| (k.clone().with(to, mode), a * s))
                })
                .collect();
        }
        out.extend(partial);
    }
    PureState::from_terms(out)
}

fn is_coincidence(ket: &BasisKet) -> bool {
    ket.modes(B).len() == 1 && ket.modes(C).len() == 1
}

/// Keeps kets with exactly one photon in each of B and C and renormalises.
pub fn postselect_coincidence(state: &PureState) -> Result<PostSelectionResult> {
    let total = state.norm_sqr();
    if total <= 0.0 {
        return Err(SwapError::ZeroAmplitude("empty input state".into()));
    }
    let kept = state.filter(is_coincidence);
    let dropped = state.filter(|k| !is_coincidence(k));
    let probability = kept.norm_sqr() / total;
    if probability <= ZERO_NORM_SQR {
        return Err(SwapError::ZeroAmplitude(
            "no coincidence between B and C: input fully bunches".into(),
        ));
    }
    let normalization = 1.0 / probability.sqrt();
    Ok(PostSelectionResult {
        state: kept.normalized()?,
        probability,
        discarded: dropped.norm_sqr() / total,
        normalization,
    })
}

/// Reduced AD state after the beamsplitter and coincidence post-selection.
pub fn swapped_density_matrix(input: &PureState) -> Result<DensityMatrix> {
    let post = postselect_coincidence(&beamsplitter_bc(input)?)?;
    partial_trace(&post.state, &[A, D])
}

/// Number of antisymmetric two-photon states over `d` modes.
pub fn antisymmetric_dimension(d: u64) -> Result<u64> {
    if d < 2 {
        return Err(SwapError::InvalidArgument(format!(
            "need at least two modes, got {d}"
        )));
    }
    Ok(d * (d - 1) / 2)
}

/// Source state of the two crystals: the same spectrum on AB and on CD.
pub fn two_pair_input(spectrum: &SpiralSpectrum, truncation: u32) -> Result<PureState> {
    let ab = crate::state::spdc_state(spectrum, (A, B), truncation)?;
    let cd = crate::state::spdc_state(spectrum, (C, D), truncation)?;
    tensor(&ab, &cd)
}

/// One singlet `Psi-_{low,high}` of the swapped mixture and its weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingletWeight {
    pub low: i32,
    pub high: i32,
    pub weight: f64,
}

/// Closed-form weights of the swapped AD mixture.
///
/// Conditioned on the BC outcome `(x, y)`, AD is left in the singlet on
/// modes `{-x, -y}` with amplitude proportional to `a_x a_y`, where a single
/// photon carries `a_0 = c0` and `a_{±n} = c_n/sqrt(2)`. Summing both
/// orderings, every unordered pair `{p, q}` enters with weight
/// `|a_p|^2 |a_q|^2`; weights are normalised to sum to 1.
pub fn swap_weights(spectrum: &SpiralSpectrum) -> Result<Vec<SingletWeight>> {
    let n = spectrum.max_order() as i32;
    let modes: Vec<i32> = (-n..=n)
        .filter(|&m| spectrum.single_mode_amplitude(m).norm() > 0.0)
        .collect();
    let mut out = Vec::new();
    for (i, &p) in modes.iter().enumerate() {
        for &q in &modes[i + 1..] {
            let w = spectrum.single_mode_amplitude(p).norm_sqr()
                * spectrum.single_mode_amplitude(q).norm_sqr();
            if w > 0.0 {
                out.push(SingletWeight { low: p, high: q, weight: w });
            }
        }
    }
    let total: f64 = out.iter().map(|s| s.weight).sum();
    if total <= 0.0 {
        return Err(SwapError::ZeroAmplitude(
            "spectrum populates fewer than two modes; nothing survives post-selection".into(),
        ));
    }
    out.iter_mut().for_each(|s| s.weight /= total);
    Ok(out)
}

/// The swapped AD mixture built from [`swap_weights`], in canonical ket order.
pub fn analytic_swapped_density(spectrum: &SpiralSpectrum) -> Result<DensityMatrix> {
    let weights = swap_weights(spectrum)?;
    let mut basis: Vec<BasisKet> = weights
        .iter()
        .flat_map(|s| {
            [
                BasisKet::from_pairs(&[(A, s.low), (D, s.high)]),
                BasisKet::from_pairs(&[(A, s.high), (D, s.low)]),
            ]
        })
        .collect();
    basis.sort();
    basis.dedup();
    let n = basis.len();
    let mut m = CMatrix::zeros(n, n);
    for s in &weights {
        let singlet = DensityMatrix::from_pure_in_basis(
            &bell_state(s.low, s.high, BellSign::Minus, (A, D))?,
            basis.clone(),
        )?;
        m += singlet.matrix().scale(s.weight);
    }
    DensityMatrix::new(basis, m)
}

/// Projects the photons of `projector` onto it, returning the
/// unnormalised conditional state of the remaining photons.
pub fn project_onto(state: &PureState, projector: &PureState) -> Result<PureState> {
    let paths = projector.occupied_paths();
    if paths.is_empty() {
        return Err(SwapError::InvalidArgument("projector occupies no path".into()));
    }
    let rest: Vec<PathLabel> = state
        .occupied_paths()
        .into_iter()
        .filter(|p| !paths.contains(p))
        .collect();
    let mut terms = Vec::new();
    for (ket, &amp) in state.terms() {
        let part = ket.restrict(&paths);
        let p = projector.amplitude(&part);
        if p.norm() > 0.0 {
            terms.push((ket.restrict(&rest), p.conj() * amp * part.bosonic_weight()));
        }
    }
    PureState::from_terms(terms)
}

fn check_normalized(state: &PureState, what: &str) -> Result<()> {
    if (state.norm_sqr() - 1.0).abs() > 1e-12 {
        return Err(SwapError::InvalidArgument(format!("{what} is not normalised")));
    }
    Ok(())
}

/// Conditional AD state when BC is found in `projector_bc`.
///
/// Both crystals are pumped coherently and are indistinguishable, so the
/// source term `ab ⊗ cd` always comes with its exchange partner in which the
/// first crystal emitted `cd` and the second `ab`. The exchange term is what
/// lets modes of different orders meet in AD.
pub fn transcription_trace(
    input_ab: &PureState,
    input_cd: &PureState,
    projector_bc: &PureState,
) -> Result<PureState> {
    check_normalized(projector_bc, "BC projector")?;
    if projector_bc.occupied_paths() != [B, C] || projector_bc.photon_count() != 2 {
        return Err(SwapError::InvalidArgument("projector must hold one photon in each of B and C".into()));
    }
    let to_cd = |p: PathLabel| match p {
        A => C,
        B => D,
        other => other,
    };
    let to_ab = |p: PathLabel| match p {
        C => A,
        D => B,
        other => other,
    };
    if input_ab.occupied_paths() != [A, B] || input_cd.occupied_paths() != [C, D] {
        return Err(SwapError::InvalidArgument("pair states must occupy AB and CD".into()));
    }
    let direct = tensor(input_ab, input_cd)?;
    let exchanged = tensor(&input_cd.map_paths(to_ab)?, &input_ab.map_paths(to_cd)?)?;
    let source = direct.add_scaled(&exchanged, Complex64::new(1.0, 0.0))?;
    let post = postselect_coincidence(&beamsplitter_bc(&source.normalized()?)?)?;
    let ad = project_onto(&post.state, projector_bc)?;
    if ad.norm_sqr() <= ZERO_NORM_SQR {
        return Err(SwapError::ZeroAmplitude(
            "BC never lands in the requested projector".into(),
        ));
    }
    ad.normalized()
}

/// Total OAM of every ket, used for conservation checks.
pub fn ket_total_oam(state: &PureState) -> Vec<i64> {
    state.terms().keys().map(BasisKet::total_oam).collect()
}
