use std::f64::consts::PI;

use super::*;
use crate::framework::{density_check, make_perturbed, spectra_match};
use crate::numcore::{c, eig_general, re, singular_values, vec_norm, Complex64, DenseMatrix};
use crate::tolerances::{DENSITY_TOL, MATCH_TOL, TRANSFER_TOL};

fn grid(n: usize) -> RectGrid {
    RectGrid::new(n).unwrap()
}

fn center_zero() -> ZeroSet {
    ZeroSet::new(vec![(c(0.5, 0.5), 1)]).unwrap()
}

fn default_setup(n: usize) -> (RectGrid, HarmonicWeight, KernelG) {
    let g = grid(n);
    let w = HarmonicWeight::constant(&g);
    let k = solve_poisson_log_f(&g, &center_zero()).unwrap();
    (g, w, k)
}

#[test]
fn stencil_on_two_by_two_grid() {
    let g = grid(2);
    let a = assemble_dirichlet_fd(&g);
    let inv_h2 = 1.0 / (g.h * g.h);
    let expected = [[4.0, -1.0, -1.0, 0.0], [-1.0, 4.0, 0.0, -1.0], [-1.0, 0.0, 4.0, -1.0], [0.0, -1.0, -1.0, 4.0]];
    for (i, row) in expected.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert_eq!(a[(i, j)], re(v * inv_h2));
        }
    }
}

#[test]
fn stencil_eigenvalues_match_closed_form() {
    let g = grid(9);
    let a = assemble_dirichlet_fd(&g);
    let mut computed: Vec<f64> = eig_general(&a).unwrap().values.iter().map(|z| z.re).collect();
    computed.sort_by(f64::total_cmp);
    let exact = dirichlet_spectrum(&g);
    let scale = exact.last().unwrap();
    for (x, y) in computed.iter().zip(&exact) {
        assert!((x - y).abs() <= 1e-9 * scale, "{x} vs {y}");
    }
}

#[test]
fn sine_modes_are_orthonormal_eigenvectors() {
    let g = grid(7);
    let a = assemble_dirichlet_fd(&g);
    let modes = lowest_sine_modes(&g, 10);
    for m in &modes {
        let v: Vec<Complex64> = m.vector.iter().map(|x| re(*x)).collect();
        assert!((vec_norm(&v) - 1.0).abs() < 1e-12);
        let av = a.mat_vec(&v);
        let r: f64 = av.iter().zip(&v).map(|(x, y)| (x - y * m.eigenvalue).norm()).fold(0.0, f64::max);
        assert!(r < 1e-10 * m.eigenvalue);
    }
    assert!(modes.windows(2).all(|w| w[0].eigenvalue <= w[1].eigenvalue));
}

#[test]
fn smallest_eigenvalue_approaches_continuum() {
    let g = grid(40);
    let lambda = dirichlet_spectrum(&g)[0];
    assert!((lambda - 2.0 * PI * PI).abs() / (2.0 * PI * PI) < 0.01);
}

#[test]
fn log_abs_f_is_zero_at_unit_distance_and_additive() {
    let z1 = c(0.3, 0.4);
    let z2 = c(0.7, 0.6);
    let single = ZeroSet::new(vec![(z1, 1)]).unwrap();
    assert_eq!(single.log_abs(z1 + 1.0), 0.0);
    let both = ZeroSet::new(vec![(z1, 1), (z2, 1)]).unwrap();
    let other = ZeroSet::new(vec![(z2, 1)]).unwrap();
    let p = c(0.11, 0.83);
    assert!((both.log_abs(p) - single.log_abs(p) - other.log_abs(p)).abs() < 1e-15);
    let double = ZeroSet::new(vec![(z1, 2)]).unwrap();
    assert!((double.log_abs(p) - 2.0 * single.log_abs(p)).abs() < 1e-15);
}

#[test]
fn log_abs_f_mean_value_on_enclosing_circle() {
    let zeros = ZeroSet::new(vec![(c(0.55, 0.45), 1)]).unwrap();
    let center = c(0.5, 0.5);
    let r = 0.3;
    let mean: f64 = (0..360)
        .map(|k| zeros.log_abs(center + Complex64::from_polar(r, k as f64 * PI / 180.0)))
        .sum::<f64>()
        / 360.0;
    assert!((mean - r.ln()).abs() < 1e-3, "{mean} vs {}", r.ln());
}

#[test]
fn zero_near_node_is_refused_with_the_offending_pair() {
    let g = grid(9);
    let z = c(0.5 + 0.01, 0.5);
    match eval_log_abs_f(&g, &ZeroSet::new(vec![(z, 1)]).unwrap()) {
        Err(LaplaceError::ZeroNearNode { zero, distance, limit }) => {
            assert_eq!(zero, z);
            assert!(distance < limit);
        }
        other => panic!("expected refusal, got {other:?}"),
    }
}

#[test]
fn zero_near_boundary_is_refused() {
    let g = grid(20);
    let z = ZeroSet::new(vec![(c(0.07, 0.5), 1)]).unwrap();
    assert!(matches!(z.validate(&g), Err(LaplaceError::InvalidZeros(_))));
}

#[test]
fn invalid_multiplicity_is_refused() {
    assert!(ZeroSet::new(vec![(c(0.5, 0.5), 0)]).is_err());
}

#[test]
fn poisson_with_no_zeros_is_zero() {
    let g = grid(8);
    let k = solve_poisson_log_f(&g, &ZeroSet::empty()).unwrap();
    assert!(k.values.iter().all(|v| *v == re(0.0)));
    assert!(k.laplacian_values.iter().all(|v| *v == re(0.0)));
}

#[test]
fn poisson_solution_has_dihedral_symmetry_and_small_residual() {
    let g = grid(32);
    let zeros = center_zero();
    let k = solve_poisson_log_f(&g, &zeros).unwrap();
    let n = g.n;
    let at = |i: usize, j: usize| k.values[g.index(i, j)];
    let scale = k.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for j in 1..=n {
        for i in 1..=n {
            let v = at(i, j);
            for w in [at(n + 1 - i, j), at(i, n + 1 - j), at(j, i), at(n + 1 - j, n + 1 - i)] {
                worst = worst.max((v - w).norm());
            }
        }
    }
    assert!(worst <= 1e-10 * scale.max(1.0), "symmetry defect {worst}");

    let log_f = eval_log_abs_f(&g, &zeros).unwrap();
    let a_g = assemble_dirichlet_fd(&g).mat_vec(&k.values);
    let res = a_g.iter().zip(&log_f).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let ref_norm = log_f.iter().map(|v| v.abs()).fold(0.0, f64::max);
    assert!(res <= 1e-9 * ref_norm, "residual {res}");
    for (lap, lf) in k.laplacian_values.iter().zip(&log_f) {
        assert_eq!(*lap, re(-lf));
    }
}

#[test]
fn zero_kernel_gives_zero_k() {
    let g = grid(5);
    let k = build_k_2d(&g, &HarmonicWeight::constant(&g), &KernelG::zero(&g)).unwrap();
    assert_eq!(k.max_abs(), 0.0);
}

#[test]
fn k_acts_as_constant_times_inner_product() {
    let g = grid(6);
    let kernel = KernelG::explicit_sine(&g, 0.7);
    let k = build_k_2d(&g, &HarmonicWeight::constant(&g), &kernel).unwrap();
    let f: Vec<Complex64> = g.points().map(|(x, y)| c(x * y, x - y)).collect();
    let inner: Complex64 = f.iter().zip(&kernel.values).map(|(a, b)| a * b.conj()).sum::<Complex64>() * (g.h * g.h);
    for v in k.mat_vec(&f) {
        assert!((v - inner).norm() < 1e-14);
    }
}

#[test]
fn k_has_rank_one() {
    let (g, _, kernel) = default_setup(10);
    let w = HarmonicWeight::new(&g, HarmonicKind::RePower(2));
    let s = singular_values(&build_k_2d(&g, &w, &kernel).unwrap()).unwrap();
    assert!(s[1] <= 1e-12 * s[0]);
}

#[test]
fn harmonic_weights_meet_their_defect_bound() {
    let g = grid(16);
    for kind in [
        HarmonicKind::Constant,
        HarmonicKind::RePower(1),
        HarmonicKind::ImPower(3),
        HarmonicKind::RePower(5),
        HarmonicKind::ImPower(6),
    ] {
        let w = HarmonicWeight::new(&g, kind);
        assert!(w.harmonic_defect(&g) <= w.harmonic_defect_bound(&g), "{kind}");
    }
}

#[test]
fn harmonic_kind_strings_round_trip() {
    for s in ["constant", "re_power(2)", "im_power(5)"] {
        assert_eq!(s.parse::<HarmonicKind>().unwrap().to_string(), s);
    }
    for bad in ["re_power(0)", "power(2)", "im_power", "re_power(x)"] {
        assert!(bad.parse::<HarmonicKind>().is_err(), "{bad}");
    }
}

#[test]
fn zero_kernel_is_admissible_with_zero_scalar() {
    let g = grid(6);
    let a = admissibility_2d(&g, &HarmonicWeight::constant(&g), &KernelG::zero(&g), None).unwrap();
    assert_eq!(a.s_delta, re(0.0));
    assert!(a.admissible);
}

#[test]
fn default_single_zero_configuration_is_admissible() {
    let (g, w, k) = default_setup(32);
    let a = admissibility_2d(&g, &w, &k, Some(&center_zero())).unwrap();
    assert!(a.admissible);
    // regression value frozen at bring-up
    assert!((a.s_delta.re - 1.0266933).abs() < 1e-6, "{}", a.s_delta);
    assert_eq!(a.s_delta.im, 0.0);
    let s_log = a.s_log.unwrap();
    assert!((s_log + a.s_delta).norm() < 1e-12);
}

#[test]
fn critical_scaling_flips_density_within_one_step() {
    let (g, w, k) = default_setup(12);
    let model = assemble_laplace_model(&g, &w, &k).unwrap();
    let a = admissibility_2d(&g, &w, &k, None).unwrap();
    let cs = critical_scaling(&model, a.s_delta, 200).unwrap();
    assert!(cs.flips(), "{cs:?}");
    assert!(cs.lower <= cs.t_critical && cs.t_critical <= cs.upper);
    assert!((cs.t_critical - cs.predicted).abs() <= (cs.upper - cs.lower));
    // the scaled kernel at t_critical is refused
    let scaled = k.scaled(cs.t_critical);
    assert!(matches!(build_laplace_model(&g, &w, &scaled), Err(LaplaceError::Inadmissible { .. })));
    // the reported scalar sits at the critical value 1
    let s = admissibility_2d(&g, &w, &scaled, None).unwrap().s_delta;
    assert!((s.re - 1.0).abs() < 1e-6, "{s}");
}

#[test]
fn zero_kernel_leaves_the_laplacian_unchanged() {
    let g = grid(6);
    let (_, pair) = laplace_pair(&g, &HarmonicWeight::constant(&g), &KernelG::zero(&g)).unwrap();
    assert_eq!(pair.bk.unwrap(), assemble_dirichlet_fd(&g));
}

#[test]
fn single_zero_spectrum_matches_closed_form() {
    let (g, w, k) = default_setup(24);
    let (model, pair) = laplace_pair(&g, &w, &k).unwrap();
    let bk = pair.bk.as_ref().unwrap();
    let report = closed_form_spectrum_check(bk, &g, MATCH_TOL).unwrap();
    assert!(report.passed, "max diff {}", report.max_abs_diff);
    assert_eq!(report.pairs.len(), g.len());
    let generic = spectra_match(model.operator.as_ref().unwrap(), bk, MATCH_TOL).unwrap();
    assert!(generic.passed);
    // B_K is genuinely non-Hermitian
    assert!(bk.max_abs_diff(&bk.adjoint()) > 1e-3 * bk.max_abs());
}

#[test]
fn sine_basis_transfers_to_eigenvectors() {
    let (g, w, k) = default_setup(24);
    let (_, pair) = laplace_pair(&g, &w, &k).unwrap();
    let report = sine_basis_transfer_check(&pair, &g, 20, TRANSFER_TOL).unwrap();
    assert!(report.passed);
    assert_eq!(report.pairs.len(), 20);
}

#[test]
fn resolved_signs_are_stable() {
    let (g, w, k) = default_setup(16);
    let (model, pair) = laplace_pair(&g, &w, &k).unwrap();
    let ts = resolve_transfer_sign(&pair, &model, &g, &w, &k, 20).unwrap();
    assert_eq!(ts.sign, -1.0);
    assert!(ts.max_residual_minus < 1e-8 * 8.0 / (g.h * g.h));
    assert!(ts.max_residual_plus > 1.0);
    assert!(ts.assembly_gap < 1e-12);
    for field in [TestField::Bubble, TestField::SineProduct { p: 2, q: 1 }] {
        let fa = forward_action_check(&pair, &model, &g, &w, &k, &field.sample(&g)).unwrap();
        assert_eq!(fa.sign(), 1.0);
        assert!(fa.best() < 1e-8, "{fa:?}");
    }
}

#[test]
fn polynomial_weight_also_preserves_the_spectrum() {
    let g = grid(10);
    let w = HarmonicWeight::new(&g, HarmonicKind::ImPower(2));
    let k = KernelG::explicit_sine(&g, 0.3);
    let (_, pair) = laplace_pair(&g, &w, &k).unwrap();
    let report = closed_form_spectrum_check(pair.bk.as_ref().unwrap(), &g, MATCH_TOL).unwrap();
    assert!(report.passed);
    assert!(density_check(&assemble_laplace_model(&g, &w, &k).unwrap(), DENSITY_TOL).unwrap().passed);
    assert!(make_perturbed(&assemble_laplace_model(&g, &w, &k).unwrap()).is_ok());
}

#[test]
fn boundary_operator_vanishes_without_zeros() {
    let g = grid(8);
    let t = build_boundary_t(&g, &HarmonicWeight::constant(&g), &ZeroSet::empty()).unwrap();
    assert_eq!(t.matrix().max_abs(), 0.0);
}

#[test]
fn boundary_operator_ignores_flat_fields() {
    let zeros = ZeroSet::new(vec![(c(0.4, 0.6), 2)]).unwrap();
    let mut prev = f64::INFINITY;
    for n in [16, 32] {
        let g = grid(n);
        let t = build_boundary_t(&g, &HarmonicWeight::constant(&g), &zeros).unwrap();
        let s = t.apply_functional(&TestField::FlatBubble.sample(&g)).norm();
        assert!(s < 10.0 * g.h * g.h, "n={n}: {s}");
        assert!(s < prev);
        prev = s;
    }
}

#[test]
fn boundary_operator_has_rank_one() {
    let g = grid(16);
    let zeros = ZeroSet::new(vec![(c(0.62, 0.41), 1)]).unwrap();
    let t = build_boundary_t(&g, &HarmonicWeight::new(&g, HarmonicKind::RePower(1)), &zeros).unwrap();
    let s = singular_values(&t.matrix()).unwrap();
    assert!(s[0] > 0.0);
    assert!(s[1] <= 1e-12 * s[0]);
}

#[test]
fn boundary_stencil_matches_exact_normal_derivative() {
    let zeros = ZeroSet::new(vec![(c(0.37, 0.58), 1), (c(0.62, 0.41), 2)]).unwrap();
    let field = TestField::SineProduct { p: 1, q: 1 };
    let exact = boundary_functional_exact(&zeros, field, 4000);
    let mut errors = Vec::new();
    for n in [16, 32, 64] {
        let g = grid(n);
        let t = build_boundary_t(&g, &HarmonicWeight::constant(&g), &zeros).unwrap();
        errors.push((t.apply_functional(&field.sample(&g)).re - exact).abs());
    }
    assert!(errors[1] < 0.35 * errors[0] && errors[2] < 0.35 * errors[1], "{errors:?}");
}

#[test]
fn log_flux_through_boundary_counts_zeros() {
    let zeros = ZeroSet::new(vec![(c(0.3, 0.7), 1), (c(0.6, 0.35), 3)]).unwrap();
    let t = boundary_functional_exact(&zeros, TestField::One, 4000);
    assert!((t - 2.0 * PI * 4.0).abs() < 1e-5, "{t}");
}

#[test]
fn bilinear_interpolation_is_exact_at_nodes_and_for_bilinear_data() {
    let g = grid(6);
    let u: Vec<Complex64> = g.points().map(|(x, y)| c(x * y, 0.0)).collect();
    let (x, y) = g.point(g.index(3, 4));
    assert_eq!(bilinear_interpolate(&g, &u, c(x, y)).unwrap(), u[g.index(3, 4)]);
    let z = c(2.3 * g.h, 4.6 * g.h);
    assert!((bilinear_interpolate(&g, &u, z).unwrap().re - z.re * z.im).abs() < 1e-14);
    assert!(bilinear_interpolate(&g, &u, c(1.2, 0.5)).is_err());
}

#[test]
fn greens_split_is_trivial_without_zeros() {
    let g = grid(16);
    let r = greens_split_check(&g, &ZeroSet::empty(), TestField::SineProduct { p: 1, q: 1 }).unwrap();
    assert_eq!(r.lhs, 0.0);
    assert_eq!(r.point_term, 0.0);
    assert_eq!(r.boundary_term, 0.0);
    assert_eq!(r.discrepancy, 0.0);
}

#[test]
fn greens_split_converges_for_sine_product() {
    let zeros = center_zero();
    let field = TestField::SineProduct { p: 1, q: 1 };
    let d: Vec<GreensSplit> = [32, 64, 128].iter().map(|&n| greens_split_check(&grid(n), &zeros, field).unwrap()).collect();
    for r in &d {
        assert!((r.point_term - 2.0 * PI).abs() < 2.0 * PI * 1e-2, "u(z1) should be close to 1");
    }
    assert!(d[1].discrepancy <= 0.67 * d[0].discrepancy);
    assert!(d[2].discrepancy <= 0.67 * d[1].discrepancy);
}

#[test]
fn greens_split_decreases_for_every_built_in_field() {
    let zeros = ZeroSet::new(vec![(c(0.5, 0.5), 1), (c(0.35, 0.7), 2)]).unwrap();
    for field in TestField::BUILT_IN {
        let d: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| greens_split_check(&grid(n), &zeros, field).unwrap().discrepancy)
            .collect();
        assert!(d[1] < d[0] && d[2] < d[1], "{field:?}: {d:?}");
    }
}

#[test]
fn weight_and_kernel_must_share_the_grid() {
    let g = grid(5);
    let other = grid(6);
    assert!(build_k_2d(&g, &HarmonicWeight::constant(&other), &KernelG::zero(&g)).is_err());
}

#[test]
fn tiny_grid_is_rejected() {
    assert!(RectGrid::new(1).is_err());
    let _ = DenseMatrix::zeros(1, 1);
}
