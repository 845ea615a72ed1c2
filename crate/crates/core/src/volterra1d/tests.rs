use super::*;
use crate::framework::{density_check, make_perturbed, spectra_match};
use crate::numcore::{eig_general, re, Complex64, DenseMatrix};
use crate::tolerances::DENSITY_TOL;

fn lr(n: usize) -> Grid1D {
    Grid1D::new(n, Scheme::LeftRectangle).unwrap()
}

fn tr(n: usize) -> Grid1D {
    Grid1D::new(n, Scheme::Trapezoid).unwrap()
}

fn cauchy(grid: &Grid1D, family: &str) -> SigmaSpec {
    SigmaSpec::from_family(grid, &family.parse().unwrap(), SigmaKind::Cauchy).unwrap()
}

fn antiperiodic(grid: &Grid1D, family: &str) -> SigmaSpec {
    SigmaSpec::from_family(grid, &family.parse().unwrap(), SigmaKind::Antiperiodic).unwrap()
}

#[test]
fn small_grids_are_rejected() {
    assert!(Grid1D::new(3, Scheme::LeftRectangle).is_err());
}

#[test]
fn left_rectangle_integrates_constants_exactly() {
    let g = lr(4);
    let j = build_integration_matrix(&g);
    let y = j.mat_vec(&[re(1.0); 4]);
    for (yi, xi) in y.iter().zip(&g.nodes) {
        assert_eq!(yi.re, *xi);
    }
}

#[test]
fn left_rectangle_matrix_is_nilpotent() {
    let g = lr(8);
    let j = build_integration_matrix(&g);
    assert!(j.is_strictly_lower_triangular());
    let mut p = j.clone();
    for _ in 1..8 {
        p = crate::numcore::mat_mul(&p, &j).unwrap();
    }
    assert_eq!(p.max_abs(), 0.0);
}

#[test]
fn trapezoid_integrates_linear_function() {
    let g = tr(1025);
    let j = build_integration_matrix(&g);
    let f: Vec<Complex64> = g.nodes.iter().map(|&t| re(t)).collect();
    let y = j.mat_vec(&f);
    let err = y.iter().zip(&g.nodes).map(|(yi, t)| (yi.re - t * t / 2.0).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-6, "{err:e}");
}

#[test]
fn sigma_family_parsing_round_trips() {
    for s in ["affine(1,-1)", "sine(2,0.5)", "cosine(1,0.25)", "polynomial(1,-2,1)"] {
        let fam: SigmaFamily = s.parse().unwrap();
        assert_eq!(fam.to_string().parse::<SigmaFamily>().unwrap(), fam);
    }
    assert_eq!("affine(1,\u{2212}1)".parse::<SigmaFamily>().unwrap(), SigmaFamily::Affine { a: 1.0, b: -1.0 });
    assert!("affine(1)".parse::<SigmaFamily>().is_err());
    assert!("wave(1,2)".parse::<SigmaFamily>().is_err());
    assert!("sine(1,x)".parse::<SigmaFamily>().is_err());
}

#[test]
fn polynomial_derivative_matches_hand_computation() {
    let p = SigmaFamily::Polynomial(vec![1.0, -2.0, 3.0]);
    assert!((p.value(0.5) - (1.0 - 1.0 + 0.75)).abs() < 1e-15);
    assert!((p.derivative(0.5) - (-2.0 + 3.0)).abs() < 1e-15);
}

#[test]
fn zero_sigma_gives_zero_k() {
    let g = lr(16);
    let m = build_cauchy_model(&g, &cauchy(&g, "affine(0,0)")).unwrap();
    assert_eq!(m.k.max_abs(), 0.0);
    assert_eq!(m.l_inv, build_integration_matrix(&g));
}

#[test]
fn affine_sigma_kl_is_plus_integral() {
    // σ = 1 − x: KL f = −∫ f σ̄′ = +∫ f
    let g = lr(64);
    let spec = cauchy(&g, "affine(1,-1)");
    let pair = make_perturbed(&build_cauchy_model(&g, &spec).unwrap()).unwrap();
    for z in pair.kl.row(0) {
        assert!((z - re(g.h)).norm() < 1e-15);
    }
    assert!(kl_closed_form_discrepancy(&g, &spec).unwrap() < 1e-12);
}

#[test]
fn kl_closure_is_consistent_with_k() {
    let g = lr(32);
    let m = build_cauchy_model(&g, &cauchy(&g, "sine(3,0.7)")).unwrap();
    let kl = m.kl_closure.clone().unwrap();
    let prod = crate::numcore::mat_mul(&kl, &m.l_inv).unwrap();
    assert!(prod.max_abs_diff(&m.k) < 1e-15);
}

#[test]
fn kl_closed_form_gap_is_first_order() {
    let d1 = kl_closed_form_discrepancy(&lr(64), &cauchy(&lr(64), "sine(1,1)")).unwrap();
    let d2 = kl_closed_form_discrepancy(&lr(128), &cauchy(&lr(128), "sine(1,1)")).unwrap();
    assert!(d2 < 0.6 * d1, "{d1:e} {d2:e}");
}

#[test]
fn cauchy_critical_sigma_is_refused() {
    let g = lr(256);
    let fam: SigmaFamily = "affine(-1,1)".parse().unwrap();
    let err = SigmaSpec::from_family(&g, &fam, SigmaKind::Cauchy).unwrap_err();
    assert!(matches!(err, VolterraError::Inadmissible { .. }), "{err}");
    // the unchecked assembly fails the density test at the same point
    let raw = SigmaSpec::sample(&g, &fam, SigmaKind::Cauchy);
    let model = assemble_cauchy(&g, &raw).unwrap();
    assert!(!density_check(&model, DENSITY_TOL).unwrap().passed);
    let ok = assemble_cauchy(&g, &SigmaSpec::sample(&g, &"affine(-0.9,0.9)".parse().unwrap(), SigmaKind::Cauchy)).unwrap();
    assert!(density_check(&ok, DENSITY_TOL).unwrap().passed);
}

#[test]
fn cauchy_boundary_condition_is_enforced() {
    let g = lr(16);
    let err = SigmaSpec::from_family(&g, &"affine(1,0)".parse().unwrap(), SigmaKind::Cauchy).unwrap_err();
    assert!(matches!(err, VolterraError::BoundaryCondition { .. }));
}

#[test]
fn inconsistent_derivative_is_refused() {
    let g = lr(64);
    let mut spec = SigmaSpec::sample(&g, &"affine(1,-1)".parse().unwrap(), SigmaKind::Cauchy);
    spec.sigma_prime = vec![re(3.0); spec.sigma_prime.len()];
    assert!(matches!(spec.validate(&g), Err(VolterraError::DerivativeMismatch { .. })));
}

#[test]
fn sampled_sigma_gets_differenced_derivative() {
    let g = lr(128);
    let fam: SigmaFamily = "sine(1,1)".parse().unwrap();
    let samples = g.closure_nodes().iter().map(|&x| re(fam.value(x))).collect();
    let spec = SigmaSpec::from_samples(&g, samples, SigmaKind::Cauchy).unwrap();
    let err = spec
        .sigma_prime
        .iter()
        .zip(g.closure_nodes())
        .map(|(d, x)| (d.re - fam.derivative(x)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-3, "{err:e}");
}

#[test]
fn cauchy_scheme_must_be_left_rectangle() {
    let g = tr(17);
    let spec = SigmaSpec::sample(&g, &"affine(1,-1)".parse().unwrap(), SigmaKind::Cauchy);
    assert!(matches!(build_cauchy_model(&g, &spec), Err(VolterraError::SchemeMismatch { .. })));
    assert!(matches!(volterra_certificate(&g, &spec), Err(VolterraError::SchemeMismatch { .. })));
}

#[test]
fn certificate_unperturbed_n64() {
    let g = lr(64);
    let cert = volterra_certificate(&g, &cauchy(&g, "affine(0,0)")).unwrap();
    assert!(cert.certified());
    assert_eq!(cert.certified_max_modulus, 0.0);
    // K = 0 leaves the strictly triangular J, so the dense path is exact too
    assert!(cert.dense_confirms());
    assert_eq!(cert.first_zero_step, Some(64));
}

#[test]
fn certificate_affine_sigma_n256() {
    let g = lr(256);
    let cert = volterra_certificate(&g, &cauchy(&g, "affine(1,-1)")).unwrap();
    assert!(cert.certified(), "{:e}", cert.similarity_residual);
    assert_eq!(cert.first_zero_step, Some(256));
    assert!(cert.factored_power_norms[254] > 0.0);
}

#[test]
fn factored_power_norms_decrease_over_first_32_steps() {
    let g = lr(256);
    let cert = volterra_certificate(&g, &cauchy(&g, "affine(1,-1)")).unwrap();
    let r = &cert.factored_power_norms[..32];
    assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
}

#[test]
fn boundary_residual_on_range_of_inverse() {
    for fam in ["affine(1,-1)", "sine(2,0.3)", "polynomial(0.5,-0.5)"] {
        let g = lr(128);
        let r = cauchy_boundary_residual(&g, &cauchy(&g, fam)).unwrap();
        assert!(r <= 1e-6, "{fam}: {r:e}");
    }
}

#[test]
fn forward_action_matches_closed_form() {
    let fam = "sine(1,0.8)";
    let r1 = forward_action_residual(&lr(128), &cauchy(&lr(128), fam)).unwrap();
    let r2 = forward_action_residual(&lr(256), &cauchy(&lr(256), fam)).unwrap();
    assert!(r1 < 0.05 && r2 < 0.6 * r1, "{r1:e} {r2:e}");
}

#[test]
fn adjoint_action_matches_closed_form_cauchy() {
    let fam = "sine(1,0.8)";
    let a = adjoint_action_residual(&lr(128), &cauchy(&lr(128), fam)).unwrap();
    let b = adjoint_action_residual(&lr(256), &cauchy(&lr(256), fam)).unwrap();
    assert!(a.with_boundary_term < 0.05 && b.with_boundary_term < 0.6 * a.with_boundary_term, "{a:?} {b:?}");
    assert!(a.vanishing_trace < 0.1 && b.vanishing_trace < 0.6 * a.vanishing_trace, "{a:?} {b:?}");
    // without the boundary term the error does not shrink under refinement
    assert!(b.derivative_only > 0.1, "{b:?}");
}

#[test]
fn adjoint_of_unperturbed_cauchy_is_conjugate_transpose() {
    let g = lr(16);
    let m = build_adjoint_example(&g, &cauchy(&g, "affine(0,0)")).unwrap();
    let adj = crate::framework::make_perturbed_adjoint(&m).unwrap();
    assert_eq!(adj.bk_inv, m.l_inv.adjoint());
}

#[test]
fn antiperiodic_constant_source() {
    let g = tr(65);
    let (_, l_inv) = build_antiperiodic_operator(&g).unwrap();
    let y = l_inv.mat_vec(&vec![re(1.0); 64]);
    // trapezoid solution y = x − 1/2 + h/2 on the unknown nodes
    for (yi, x) in y.iter().zip(&g.nodes) {
        assert!((yi.re - (x - 0.5 + g.h / 2.0)).abs() < 1e-12);
        assert!((yi.re - (x - 0.5)).abs() <= g.h);
    }
    // the scheme extends f anti-periodically as well, so y_N = y_{N−1} = −y_0
    assert!((y[0] + y[63]).norm() < 1e-12);
}

#[test]
fn antiperiodic_needs_odd_node_count() {
    assert!(build_antiperiodic_operator(&tr(64)).is_err());
}

#[test]
fn antiperiodic_sine_is_accepted_and_critical_value_refused() {
    let g = tr(129);
    assert!(build_antiperiodic_model(&g, &antiperiodic(&g, "sine(2,1)")).is_ok());
    let err = SigmaSpec::from_family(&g, &"cosine(1,-0.5)".parse().unwrap(), SigmaKind::Antiperiodic).unwrap_err();
    assert!(matches!(err, VolterraError::Inadmissible { .. }));
    let raw = SigmaSpec::sample(&g, &"cosine(1,-0.5)".parse().unwrap(), SigmaKind::Antiperiodic);
    let model = assemble_antiperiodic(&g, &raw).unwrap();
    let d = density_check(&model, DENSITY_TOL).unwrap();
    assert!(d.sigma_min < 1e-3 * d.sigma_max, "{d:?}");
}

#[test]
fn antiperiodic_operator_is_normal() {
    let g = tr(129);
    let (_, l_inv) = build_antiperiodic_operator(&g).unwrap();
    assert!(normality_defect(&l_inv).unwrap() <= g.h);
}

#[test]
fn antiperiodic_leading_eigenvalues_small_grid() {
    let g = tr(257);
    let r = normal_case_check(&g, &antiperiodic(&g, "sine(2,1)"), 4, 1e-8).unwrap();
    for (exact, got, rel) in &r.top {
        assert!(*rel < 5e-3, "{exact} vs {got}");
    }
    assert!(r.spectra.passed, "{:e}", r.spectra.max_abs_diff);
}

#[test]
fn antiperiodic_identity_suite_closure_factor() {
    let g = tr(65);
    let m = build_antiperiodic_model(&g, &antiperiodic(&g, "sine(2,1)")).unwrap();
    let suite = crate::framework::identity_suite(&m).unwrap();
    let closure = suite.iter().find(|r| r.name == "closure_factor_inverse").unwrap();
    assert!(closure.residual < 1e-9);
}

#[test]
fn adjoint_action_matches_closed_form_antiperiodic() {
    let fam = "cosine(1,0.3)";
    let a = adjoint_action_residual(&tr(129), &antiperiodic(&tr(129), fam)).unwrap();
    let b = adjoint_action_residual(&tr(257), &antiperiodic(&tr(257), fam)).unwrap();
    assert!(a.with_boundary_term < 0.05 && b.with_boundary_term < 0.6 * a.with_boundary_term, "{a:?} {b:?}");
    assert!(a.vanishing_trace < 0.1 && b.vanishing_trace < 0.6 * a.vanishing_trace, "{a:?} {b:?}");
    // without the boundary term the error does not shrink under refinement
    assert!(b.derivative_only > 0.1, "{b:?}");
}

#[test]
fn forward_action_matches_closed_form_antiperiodic() {
    let fam = "cosine(1,0.3)";
    let r1 = forward_action_residual(&tr(129), &antiperiodic(&tr(129), fam)).unwrap();
    let r2 = forward_action_residual(&tr(257), &antiperiodic(&tr(257), fam)).unwrap();
    assert!(r1 < 0.05 && r2 < 0.6 * r1, "{r1:e} {r2:e}");
}

#[test]
fn adjoint_spectrum_is_conjugate() {
    let g = tr(65);
    let m = build_adjoint_example(&g, &antiperiodic(&g, "sine(2,0.4)")).unwrap();
    let fwd = make_perturbed(&m).unwrap();
    let adj = crate::framework::make_perturbed_adjoint(&m).unwrap();
    let conj = DenseMatrix::from_fn(64, 64, |i, j| fwd.bk.as_ref().unwrap()[(j, i)].conj());
    let r = spectra_match(&conj, adj.bk.as_ref().unwrap(), 1e-8 * 400.0).unwrap();
    assert!(r.passed, "{:e}", r.max_abs_diff);
    let values = eig_general(adj.bk.as_ref().unwrap()).unwrap().values;
    assert_eq!(values.len(), 64);
}
