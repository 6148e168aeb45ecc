use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use super::*;

fn singlet() -> DensityMatrix {
    Subspace::new(-1, 1).unwrap().singlet_density()
}

fn setting(sub: (i32, i32), a: ProjectorSpec, d: ProjectorSpec) -> MeasurementSetting {
    MeasurementSetting { subspace: Subspace::new(sub.0, sub.1).unwrap(), arm_a: a, arm_d: d }
}

fn silent() -> NoiseModel {
    NoiseModel::new(1.0, BackgroundRates::silent(8e7), 11).unwrap()
}

#[test]
fn sixteen_settings_in_fixed_order() {
    let s = tomography_settings((-1, 1)).unwrap();
    assert_eq!(s.len(), 16);
    assert_eq!((s[0].arm_a, s[0].arm_d), (ProjectorSpec::Low, ProjectorSpec::Low));
    assert_eq!(s[0].subspace.basis()[0].label(), "A=-1,D=-1");
    for (i, st) in s.iter().enumerate() {
        assert_eq!(st.index(), i);
        assert_eq!(MeasurementSetting::parse_id(&st.id()).unwrap(), *st);
    }
    let t = tomography_settings((2, -1)).unwrap();
    assert_eq!(t.len(), 16);
    assert_eq!(t[0].subspace, Subspace::new(-1, 2).unwrap());
    assert!(tomography_settings((1, 1)).is_err());
}

#[test]
fn projector_vectors_are_normalised() {
    for p in ProjectorSpec::ALL {
        let n: f64 = p.vector().iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(n, 1.0, epsilon = 1e-15);
    }
}

#[test]
fn singlet_probabilities() {
    use ProjectorSpec::*;
    assert_abs_diff_eq!(ideal_probability(&singlet(), &setting((-1, 1), Low, High)).unwrap(), 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(ideal_probability(&singlet(), &setting((-1, 1), Low, Low)).unwrap(), 0.0, epsilon = 1e-15);
    // <++|Psi-> = (1/2)(1 - 1)/sqrt(2) = 0 by direct expansion.
    assert_abs_diff_eq!(
        ideal_probability(&singlet(), &setting((-1, 1), Diagonal, Diagonal)).unwrap(),
        0.0,
        epsilon = 1e-15
    );
    assert!(matches!(
        ideal_probability(&singlet(), &setting((-2, 2), Low, Low)),
        Err(SwapError::BasisMismatch(_))
    ));
}

#[test]
fn visibility_noise_endpoints() {
    let rho = singlet();
    let same = apply_visibility_noise(&rho, 1.0).unwrap();
    assert_eq!(same.matrix(), rho.matrix());
    let mixed = apply_visibility_noise(&rho, 0.0).unwrap();
    assert!(linalg::max_abs_diff(mixed.matrix(), &CMatrix::identity(4, 4).unscale(4.0)) < 1e-15);
    assert!(apply_visibility_noise(&rho, 1.2).is_err());
    assert!(apply_visibility_noise(&rho, -0.1).is_err());
}

#[test]
fn werner_singlet_overlap() {
    let w = werner(Subspace::new(-1, 1).unwrap(), 0.71).unwrap();
    let f = (w.matrix() * singlet().matrix()).trace().re;
    assert_abs_diff_eq!(f, 0.7825, epsilon = 1e-12);
}

#[test]
fn fourfold_rate_arithmetic() {
    let p = |ab, cd, ac, bd| PairRates { ab_hz: ab, cd_hz: cd, ac_hz: ac, bd_hz: bd };
    assert_abs_diff_eq!(genuine_fourfold_rate(&p(100.0, 100.0, 0.0, 0.0), 8e7).unwrap(), 1.25e-4, epsilon = 1e-18);
    assert_eq!(genuine_fourfold_rate(&p(0.0, 0.0, 0.0, 0.0), 8e7).unwrap(), 0.0);
    assert_abs_diff_eq!(genuine_fourfold_rate(&p(100.0, 100.0, 100.0, 100.0), 8e7).unwrap(), 2.5e-4, epsilon = 1e-18);
    assert!(genuine_fourfold_rate(&p(1.0, 1.0, 1.0, 1.0), 0.0).is_err());
}

#[test]
fn background_arithmetic() {
    let none = PairRates::default();
    assert_eq!(background_rate(&none, &[0.0; 4], 8e7).unwrap(), 0.0);
    let r = background_rate(&none, &[1e4; 4], 8e7).unwrap();
    assert_abs_diff_eq!(r, 1e16 / 5.12e23, epsilon = 1e-22);
    assert_abs_diff_eq!(r, 1.953125e-8, epsilon = 1e-20);
    let ab = PairRates { ab_hz: 100.0, ..PairRates::default() };
    let r = background_rate(&ab, &[0.0, 0.0, 1e4, 1e4], 8e7).unwrap();
    assert_abs_diff_eq!(r, 1.5625e-6, epsilon = 1e-18);
    assert!(background_rate(&none, &[0.0; 4], -1.0).is_err());
}

fn record(raw: u64, duration_s: f64, rates: BackgroundRates) -> CountRecord {
    CountRecord {
        setting: setting((-1, 1), ProjectorSpec::Low, ProjectorSpec::High),
        fourfold_raw: raw,
        duration_s,
        rates,
    }
}

#[test]
fn background_subtraction_examples() {
    // C_AB S_C S_D / R^2 = 10 * 1 * 1 / 4 = 2.5 counts in one second.
    let rates = BackgroundRates {
        singles_hz: [0.0, 0.0, 1.0, 1.0],
        pairs: PairRates { ab_hz: 10.0, ..PairRates::default() },
        rep_rate_hz: 2.0,
    };
    assert_eq!(subtract_background(&record(10, 1.0, rates)), 7.5);
    // 3 expected accidentals against 1 observed clips to zero.
    let rates3 = BackgroundRates { pairs: PairRates { ab_hz: 12.0, ..PairRates::default() }, ..rates };
    assert_eq!(subtract_background(&record(1, 1.0, rates3)), 0.0);
    assert_eq!(subtract_background(&record(42, 3.0, BackgroundRates::silent(8e7))), 42.0);
}

#[test]
fn noiseless_zero_probability_gives_zero_counts() {
    let s = setting((-1, 1), ProjectorSpec::Low, ProjectorSpec::Low);
    let recs = simulate_counts(&singlet(), &[s], 1e6, 1e3, &silent()).unwrap();
    assert_eq!(recs[0].fourfold_raw, 0);
    assert!(simulate_counts(&singlet(), &[s], 1.0, 0.0, &silent()).is_err());
}

#[test]
fn simulated_counts_are_deterministic_and_match_expected_total() {
    let settings = tomography_settings((-1, 1)).unwrap();
    let rho = werner(Subspace::new(-1, 1).unwrap(), 0.71).unwrap();
    let a = simulate_counts(&rho, &settings, 0.04, 1e5, &silent()).unwrap();
    let b = simulate_counts(&rho, &settings, 0.04, 1e5, &silent()).unwrap();
    assert_eq!(a, b);
    let expected: f64 = settings
        .iter()
        .map(|s| 0.04 * 1e5 * ideal_probability(&rho, s).unwrap())
        .sum();
    let observed: u64 = a.iter().map(|r| r.fourfold_raw).sum();
    // Sum of Poisson draws: within 4 sigma of the mean.
    assert!((observed as f64 - expected).abs() < 4.0 * expected.sqrt(), "{observed} vs {expected}");
}

#[test]
fn seed_average_converges_to_rate() {
    let s = setting((-1, 1), ProjectorSpec::Low, ProjectorSpec::High);
    let mean = 0.5 * 2.0 * 10.0;
    let n = 400;
    let total: u64 = (0..n)
        .map(|seed| {
            let noise = NoiseModel::new(1.0, BackgroundRates::silent(8e7), seed).unwrap();
            simulate_counts(&singlet(), &[s], 2.0, 10.0, &noise).unwrap()[0].fourfold_raw
        })
        .sum();
    let avg = total as f64 / n as f64;
    assert!((avg - mean).abs() < 3.0 * (mean / n as f64).sqrt(), "{avg}");
}

#[test]
fn record_lines_round_trip() {
    let rates = BackgroundRates {
        singles_hz: [1.0e4, 12345.678901234567, 0.1, 3e-9],
        pairs: PairRates { ab_hz: 100.0, cd_hz: 0.3, ac_hz: 1e-300, bd_hz: 7.0 },
        rep_rate_hz: 8e7,
    };
    let recs: Vec<CountRecord> = tomography_settings((-2, 1))
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, s)| CountRecord { setting: s, fourfold_raw: i as u64 * 7, duration_s: 1.0 / 3.0, rates })
        .collect();
    let text = format_records(&recs);
    let back = parse_records(&format!("# header\n\n{text}")).unwrap();
    assert_eq!(back, recs);
    for (a, b) in back.iter().zip(&recs) {
        assert_eq!(a.duration_s.to_bits(), b.duration_s.to_bits());
        assert_eq!(a.rates.singles_hz[1].to_bits(), b.rates.singles_hz[1].to_bits());
    }
    assert_eq!(format_records(&back), text);
    assert!(CountRecord::from_line("setting=-1,1/00 raw=3").is_err());
    assert!(CountRecord::from_line(&text.lines().next().unwrap().replace("duration_s=0.3333333333333333", "duration_s=-1")).is_err());
}

#[test]
fn dip_model_examples() {
    assert_abs_diff_eq!(hom_dip_model(11.42, 11.42, 5.0, 0.71, 100.0).unwrap(), 29.0, epsilon = 1e-12);
    assert_abs_diff_eq!(hom_dip_model(1e6, 11.42, 5.0, 0.71, 100.0).unwrap(), 100.0, epsilon = 1e-12);
    assert_abs_diff_eq!(hom_dip_model(-1e6, 11.42, 5.0, 0.71, 100.0).unwrap(), 100.0, epsilon = 1e-12);
    assert_eq!(hom_dip_model(3.0, 11.42, 5.0, 0.0, 100.0).unwrap(), 100.0);
    assert!(hom_dip_model(0.0, 0.0, 0.0, 0.5, 1.0).is_err());
}

fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn noiseless_dip_recovered() {
    let truth = HomParams { center_um: 11.42, width_um: 8.0, visibility: 0.71, baseline: 400.0 };
    let scan = synthesize_hom_scan(&truth, &grid(50, -30.0, 50.0), None).unwrap();
    let fit = fit_hom_dip(&scan.positions_um, &scan.counts).unwrap();
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    assert!(rel(fit.params.center_um, 11.42) < 1e-6);
    assert!(rel(fit.params.width_um, 8.0) < 1e-6);
    assert!(rel(fit.params.visibility, 0.71) < 1e-6);
    assert!(rel(fit.params.baseline, 400.0) < 1e-6);
}

#[test]
fn flat_scan_has_no_dip() {
    let xs = grid(30, -20.0, 40.0);
    let ys = vec![250.0; 30];
    let fit = fit_hom_dip(&xs, &ys).unwrap();
    assert!(fit.params.visibility < 1e-6);
    assert_abs_diff_eq!(fit.params.baseline, 250.0, epsilon = 1e-6);
}

#[test]
fn fit_rejects_short_scans() {
    assert!(fit_hom_dip(&[0.0, 1.0, 2.0, 3.0], &[1.0, 1.0, 1.0, 1.0]).is_err());
    assert!(fit_hom_dip(&[0.0; 6], &[1.0; 5]).is_err());
}

#[test]
fn poisson_scan_visibility_calibration() {
    // 50 points, 400 counts off the dip and 116 at its centre.
    let truth = HomParams { center_um: 11.42, width_um: 8.0, visibility: 0.71, baseline: 400.0 };
    let xs = grid(50, -30.0, 50.0);
    let hits = (0..100u64)
        .filter(|&seed| {
            let scan = synthesize_hom_scan(&truth, &xs, Some(seed)).unwrap();
            let fit = fit_hom_dip(&scan.positions_um, &scan.counts).unwrap();
            (fit.params.visibility - 0.71).abs() <= 0.05
        })
        .count();
    assert!(hits >= 90, "{hits}/100");
}

proptest! {
    #[test]
    fn probabilities_bounded_and_complementary(
        re in prop::collection::vec(-1.0f64..1.0, 16),
        im in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let g = CMatrix::from_fn(4, 4, |i, j| Complex64::new(re[4 * i + j], im[4 * i + j]));
        let m = &g * g.adjoint();
        let tr = linalg::trace(&m).re;
        prop_assume!(tr > 1e-6);
        let sub = Subspace::new(-2, 1).unwrap();
        let rho = DensityMatrix::new(sub.basis(), m.unscale(tr)).unwrap();
        for s in settings_for(sub) {
            let p = ideal_probability(&rho, &s).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }
        // |l1>, |l2> on both arms is a complete orthonormal set: sums to the trace.
        use ProjectorSpec::*;
        let total: f64 = [Low, High].iter().flat_map(|&a| [Low, High].map(move |d| (a, d)))
            .map(|(a, d)| ideal_probability(&rho, &MeasurementSetting { subspace: sub, arm_a: a, arm_d: d }).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for v in [0.0, 0.3, 0.71, 1.0] {
            let noisy = apply_visibility_noise(&rho, v).unwrap();
            prop_assert!(noisy.validate().is_ok());
        }
    }

    #[test]
    fn subtraction_monotone_and_non_negative(raw in 0u64..10_000, extra in 0u64..100, s in 0.0f64..1e5) {
        let rates = BackgroundRates { singles_hz: [s; 4], pairs: PairRates::default(), rep_rate_hz: 1e4 };
        let lo = subtract_background(&record(raw, 2.0, rates));
        let hi = subtract_background(&record(raw + extra, 2.0, rates));
        prop_assert!(lo >= 0.0);
        prop_assert!(hi >= lo);
    }
}
