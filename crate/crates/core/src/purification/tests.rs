use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::circuit::{analytic_swapped_density, postselect_coincidence, beamsplitter_bc, two_pair_input};
use crate::state::{tensor, SpiralSpectrum};

const A: PathLabel = PathLabel::A;
const B: PathLabel = PathLabel::B;
const C: PathLabel = PathLabel::C;
const D: PathLabel = PathLabel::D;

fn post_selected(spectrum: &SpiralSpectrum) -> PureState {
    let input = two_pair_input(spectrum, spectrum.max_order()).unwrap();
    postselect_coincidence(&beamsplitter_bc(&input).unwrap()).unwrap().state
}

fn random_spectrum(rng: &mut ChaCha8Rng, n: u32, with_c0: bool) -> SpiralSpectrum {
    let mut coeffs = Vec::new();
    if with_c0 {
        coeffs.push((0, Complex64::new(rng.gen_range(0.1..1.0), 0.0)));
    }
    for k in 1..=n {
        coeffs.push((k, Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..6.28))));
    }
    SpiralSpectrum::new(coeffs).unwrap().normalized().unwrap()
}

/// `c_n^2 / sqrt(sum |c_n^2|^2)`.
fn alpha_tilde(spectrum: &SpiralSpectrum, n_max: u32) -> Vec<Complex64> {
    let sq: Vec<Complex64> = (1..=n_max).map(|n| spectrum.coefficient(n).powi(2)).collect();
    let norm = sq.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    sq.iter().map(|z| z / norm).collect()
}

/// Aligns the global phase of `got` with `want` and returns the largest deviation.
fn phase_aligned_diff(got: &[Complex64], want: &[Complex64]) -> f64 {
    let overlap: Complex64 = got.iter().zip(want).map(|(g, w)| g.conj() * w).sum();
    let phase = overlap / overlap.norm();
    got.iter().zip(want).map(|(g, w)| (g * phase - w).norm()).fold(0.0, f64::max)
}

#[test]
fn filter_targets_are_validated() {
    let x = FilterSpec::superposition(3).unwrap();
    assert_abs_diff_eq!(x.target().norm_sqr(), 1.0, epsilon = 1e-12);
    assert!(FilterSpec::superposition(0).is_err());
    let unnormalised = bell_state(1, -1, BellSign::Minus, (B, C)).unwrap().scaled(Complex64::new(2.0, 0.0));
    assert!(FilterSpec::new(unnormalised).is_err());
    assert!(FilterSpec::new(bell_state(1, -1, BellSign::Minus, (A, D)).unwrap()).is_err());
}

#[test]
fn two_order_filter_gives_c_squared_superposition() {
    let spectrum = SpiralSpectrum::from_real(&[0.0, 0.8, 0.6]).unwrap();
    let (ad, p) = apply_filter(&post_selected(&spectrum), &FilterSpec::superposition(2).unwrap()).unwrap();
    assert!(p > 0.0 && p <= 1.0);
    let comps = singlet_components(&ad, 2).unwrap();
    let want = [Complex64::new(0.64, 0.0), Complex64::new(0.36, 0.0)];
    let norm = (0.64f64.powi(2) + 0.36f64.powi(2)).sqrt();
    assert!(phase_aligned_diff(&comps, &want.map(|z| z / norm)) < 1e-12);
    // nothing outside the two singlets
    assert_abs_diff_eq!(comps.iter().map(|z| z.norm_sqr()).sum::<f64>(), 1.0, epsilon = 1e-12);
}

#[test]
fn single_singlet_filter_on_first_order_pairs() {
    let spectrum = SpiralSpectrum::from_real(&[0.0, 1.0]).unwrap();
    let filter = FilterSpec::new(bell_state(-1, 1, BellSign::Minus, (B, C)).unwrap()).unwrap();
    let (ad, _) = apply_filter(&post_selected(&spectrum), &filter).unwrap();
    let singlet = bell_state(-1, 1, BellSign::Minus, (A, D)).unwrap();
    assert_abs_diff_eq!(inner_product(&singlet, &ad).unwrap().norm(), 1.0, epsilon = 1e-12);
    assert_eq!(schmidt_rank(&ad, (&[A], &[D]), SCHMIDT_TOL).unwrap(), 2);
}

#[test]
fn orthogonal_filter_is_rejected() {
    let spectrum = SpiralSpectrum::from_real(&[0.0, 1.0]).unwrap();
    let filter = FilterSpec::new(bell_state(-2, 2, BellSign::Minus, (B, C)).unwrap()).unwrap();
    assert!(matches!(apply_filter(&post_selected(&spectrum), &filter), Err(SwapError::ZeroAmplitude(_))));
}

#[test]
fn purity_examples() {
    let singlet = bell_state(-1, 1, BellSign::Minus, (A, D)).unwrap();
    assert_abs_diff_eq!(purity(&DensityMatrix::from_pure(&singlet).unwrap()), 1.0, epsilon = 1e-12);
    let basis = crate::measurement::Subspace::new(-1, 1).unwrap().basis();
    assert_abs_diff_eq!(purity(&DensityMatrix::maximally_mixed(basis).unwrap()), 0.25, epsilon = 1e-15);
    let six = analytic_swapped_density(&SpiralSpectrum::from_real(&[0.0, 1.0, 1.0]).unwrap()).unwrap();
    assert_abs_diff_eq!(purity(&six), 1.0 / 6.0, epsilon = 1e-12);
}

#[test]
fn schmidt_rank_examples() {
    let product = tensor(
        &PureState::from_terms([(BasisKet::from_pairs(&[(A, 1)]), Complex64::new(1.0, 0.0))]).unwrap(),
        &PureState::from_terms([(BasisKet::from_pairs(&[(D, -1)]), Complex64::new(1.0, 0.0))]).unwrap(),
    )
    .unwrap();
    assert_eq!(schmidt_rank(&product, (&[A], &[D]), SCHMIDT_TOL).unwrap(), 1);
    let singlet = bell_state(-1, 1, BellSign::Minus, (A, D)).unwrap();
    assert_eq!(schmidt_rank(&singlet, (&[A], &[D]), SCHMIDT_TOL).unwrap(), 2);
    assert!(schmidt_rank(&singlet, (&[A, D], &[]), SCHMIDT_TOL).is_err());
    assert!(schmidt_rank(&singlet, (&[A], &[A]), SCHMIDT_TOL).is_err());
    assert!(schmidt_rank(&singlet, (&[A], &[B]), SCHMIDT_TOL).is_err());
}

#[test]
fn filtered_state_schmidt_structure() {
    // every singlet |n, -n> - |-n, n> contributes two equal Schmidt terms across A|D
    let spectrum = SpiralSpectrum::from_real(&[0.0, 0.8, 0.6]).unwrap();
    let (ad, _) = apply_filter(&post_selected(&spectrum), &FilterSpec::superposition(2).unwrap()).unwrap();
    let sv = schmidt_coefficients(&ad, (&[A], &[D])).unwrap();
    let norm = (0.64f64.powi(2) + 0.36f64.powi(2)).sqrt();
    let want = [0.64 / norm, 0.64 / norm, 0.36 / norm, 0.36 / norm].map(|x| x / 2f64.sqrt());
    assert_eq!(sv.len(), 4);
    for (g, w) in sv.iter().zip(want) {
        assert_abs_diff_eq!(*g, w, epsilon = 1e-12);
    }
    assert_eq!(schmidt_rank(&ad, (&[A], &[D]), SCHMIDT_TOL).unwrap(), 4);
}

#[test]
fn post_selected_state_cut_ad_bc() {
    // Schmidt decomposition with photon pairs as Schmidt bases: one term per
    // antisymmetric BC state, d(d-1)/2 for d = 4 modes
    let spectrum = SpiralSpectrum::from_real(&[0.0, 1.0, 1.0]).unwrap();
    let sv = schmidt_coefficients(&post_selected(&spectrum), (&[A, D], &[B, C])).unwrap();
    let rank = sv.iter().filter(|&&s| s > SCHMIDT_TOL).count();
    assert_eq!(rank, 6);
    for s in sv.iter().take(6) {
        assert_abs_diff_eq!(*s, 1.0 / 6f64.sqrt(), epsilon = 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn superposition_filter_matches_closed_form(seed in any::<u64>(), n in 2u32..=4, with_c0 in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spectrum = random_spectrum(&mut rng, n, with_c0);
        let post = post_selected(&spectrum);
        let (ad, p) = apply_filter(&post, &FilterSpec::superposition(n).unwrap()).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0 + 1e-12);
        prop_assert!((purity(&DensityMatrix::from_pure(&ad).unwrap()) - 1.0).abs() < 1e-10);
        let comps = singlet_components(&ad, n).unwrap();
        prop_assert!(phase_aligned_diff(&comps, &alpha_tilde(&spectrum, n)) < 1e-10);
        let occupied = comps.iter().filter(|z| z.norm() > SCHMIDT_TOL).count();
        prop_assert_eq!(occupied as u32, n);
        prop_assert_eq!(schmidt_rank(&ad, (&[A], &[D]), SCHMIDT_TOL).unwrap() as u32, 2 * n);

        // brute force: probability from the overlap of the post-selected state
        let x = FilterSpec::superposition(n).unwrap();
        let direct = crate::circuit::project_onto(&post, x.target()).unwrap().norm_sqr() / post.norm_sqr();
        prop_assert!((p - direct).abs() < 1e-14);

        // global phase on the input leaves the output state unchanged
        let phase = Complex64::from_polar(1.0, rng.gen_range(0.0..6.28));
        let (ad2, p2) = apply_filter(&post.scaled(phase), &x).unwrap();
        prop_assert!((inner_product(&ad, &ad2).unwrap().norm() - 1.0).abs() < 1e-12);
        prop_assert!((p - p2).abs() < 1e-14);
    }
}
