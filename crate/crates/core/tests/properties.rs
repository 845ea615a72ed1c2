use isospec_core::framework::{
    density_determinant, identity_suite, make_perturbed, match_spectra, random_admissible_model, spectra_match,
    RandomModelSpec,
};
use isospec_core::laplace2d::{
    bilinear_interpolate, closed_form_spectrum_check, laplace_pair, HarmonicKind, HarmonicWeight, KernelG, RectGrid,
};
use isospec_core::numcore::{c, norm_2, Complex64};
use isospec_core::tolerances::{IDENTITY_TOL, MATCH_TOL};
use isospec_core::volterra1d::{
    build_cauchy_model, volterra_certificate, Grid1D, Scheme, SigmaFamily, SigmaKind, SigmaSpec,
};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn random_models_are_isospectral(n in 2usize..40, seed in any::<u64>()) {
        let model = random_admissible_model(&RandomModelSpec::new(n, seed)).unwrap();
        let pair = make_perturbed(&model).unwrap();
        let reference = pair.reference_l.as_ref().unwrap();
        let report = spectra_match(reference, pair.bk.as_ref().unwrap(), MATCH_TOL).unwrap();
        prop_assert!(report.passed, "max diff {} at n={n}", report.max_abs_diff);
        prop_assert_eq!(report.pairs.len(), n);
    }

    #[test]
    fn random_models_satisfy_every_identity(n in 2usize..40, seed in any::<u64>()) {
        let model = random_admissible_model(&RandomModelSpec::new(n, seed)).unwrap();
        for r in identity_suite(&model).unwrap() {
            prop_assert!(r.residual <= IDENTITY_TOL, "{} = {}", r.name, r.residual);
        }
    }

    #[test]
    fn random_models_are_reproducible(n in 2usize..12, seed in any::<u64>()) {
        let a = random_admissible_model(&RandomModelSpec::new(n, seed)).unwrap();
        let b = random_admissible_model(&RandomModelSpec::new(n, seed)).unwrap();
        prop_assert_eq!(a.l_inv, b.l_inv);
        prop_assert_eq!(a.k, b.k);
    }

    #[test]
    fn matching_ignores_ordering(values in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..20), shift in 0usize..20) {
        let a: Vec<Complex64> = values.iter().map(|&(x, y)| c(x, y)).collect();
        let mut b = a.clone();
        let len = b.len();
        b.rotate_left(shift % len);
        let res = vec![0.0; len];
        let report = match_spectra(&a, &b, &res, 0.0, 0.0, 1e-12);
        prop_assert!(report.passed);
        prop_assert_eq!(report.max_abs_diff, 0.0);
    }
}

proptest! {
    #![proptest_config(config(50))]

    // σ = (1 − x)(a + b·x): vanishes at x = 1 with σ(0) = a kept away from −1
    #[test]
    fn perturbed_cauchy_inverse_stays_nilpotent(a in -0.9f64..3.0, b in -2.0f64..2.0) {
        let grid = Grid1D::new(128, Scheme::LeftRectangle).unwrap();
        let family = SigmaFamily::Polynomial(vec![a, b - a, -b]);
        let spec = SigmaSpec::from_family(&grid, &family, SigmaKind::Cauchy).unwrap();
        let cert = volterra_certificate(&grid, &spec).unwrap();
        prop_assert!(cert.certified(), "{cert:?}");
        prop_assert_eq!(cert.first_zero_step, Some(128));
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn cauchy_density_determinant_is_one_plus_sigma0(a in -3.0f64..3.0, b in -2.0f64..2.0, n in 8usize..64) {
        prop_assume!((1.0 + a).abs() > 1e-3);
        let grid = Grid1D::new(n, Scheme::LeftRectangle).unwrap();
        let family = SigmaFamily::Polynomial(vec![a, b - a, -b]);
        let spec = SigmaSpec::from_family(&grid, &family, SigmaKind::Cauchy).unwrap();
        let model = build_cauchy_model(&grid, &spec).unwrap();
        let det = density_determinant(&model).unwrap();
        prop_assert!((det - c(1.0 + a, 0.0)).norm() <= 1e-12 * (1.0 + a.abs()), "{det}");
    }

    #[test]
    fn laplace_perturbations_keep_the_dirichlet_spectrum(
        n in 3usize..9,
        amp in -0.5f64..0.5,
        kind in prop_oneof![
            Just(HarmonicKind::Constant),
            (1u32..4).prop_map(HarmonicKind::RePower),
            (1u32..4).prop_map(HarmonicKind::ImPower),
        ],
    ) {
        let grid = RectGrid::new(n).unwrap();
        let w = HarmonicWeight::new(&grid, kind);
        let k = KernelG::explicit_sine(&grid, amp);
        if let Ok((_, pair)) = laplace_pair(&grid, &w, &k) {
            let bk = pair.bk.as_ref().unwrap();
            let report = closed_form_spectrum_check(bk, &grid, MATCH_TOL).unwrap();
            prop_assert!(report.passed, "max diff {} vs norm {}", report.max_abs_diff, norm_2(bk).unwrap());
        }
    }

    #[test]
    fn interpolation_stays_within_sample_bounds(n in 3usize..12, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let grid = RectGrid::new(n).unwrap();
        let u: Vec<Complex64> = grid.points().map(|(p, q)| c((3.0 * p).sin() + q * q, 0.0)).collect();
        let hi = u.iter().map(|v| v.re).fold(0.0, f64::max);
        let lo = u.iter().map(|v| v.re).fold(0.0, f64::min);
        let v = bilinear_interpolate(&grid, &u, c(x, y)).unwrap().re;
        prop_assert!(v <= hi + 1e-15 && v >= lo - 1e-15);
    }
}
