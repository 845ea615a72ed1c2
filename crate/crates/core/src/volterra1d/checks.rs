use std::f64::consts::{FRAC_PI_2, PI};

use crate::framework::{
    make_perturbed, make_perturbed_adjoint, quasinilpotence_report, spectra_match, PerturbedPair, SpectralPair,
    SpectralReport,
};
use crate::numcore::{c, eig_general, mat_mul, norm_2, re, vec_norm, Complex64, DenseMatrix};
use crate::tolerances::ZERO_TOL;

use super::grid::{Grid1D, Scheme};
use super::models::{build_antiperiodic_model, build_cauchy_model};
use super::sigma::{SigmaFamily, SigmaKind, SigmaSpec};
use super::VolterraError;

/// Nilpotence evidence for the perturbed Cauchy problem.
///
/// `B_K⁻¹ = T·J·T⁻¹` with `T = I + KL` and `J` strictly lower triangular.
/// The certified quantities go through that factorization, where `Jᵖ` is
/// computed without rounding (products of strictly triangular matrices keep
/// their zero pattern). The dense quantities come from the assembled matrix
/// and are limited by the conditioning of a single size-`n` Jordan block:
/// a backward error `ε` moves its eigenvalues by about `ε^{1/n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolterraCertificate {
    /// Dense eigenvalues of `B_K⁻¹` (as `lambda_pert`) against the certified
    /// value 0, with the factored power-norm sequence attached.
    pub report: SpectralReport,
    pub core_strictly_lower: bool,
    /// Largest eigenvalue modulus of the similarity core `J`.
    pub certified_max_modulus: f64,
    /// `‖B_K⁻¹ − T·J·T⁻¹‖` relative.
    pub similarity_residual: f64,
    pub factored_power_norms: Vec<f64>,
    /// First `p` with `‖(B_K⁻¹)ᵖ‖ = 0` through the factorization.
    pub first_zero_step: Option<usize>,
    pub dense_max_modulus: f64,
    pub dense_power_norms: Vec<f64>,
    pub dense_first_zero_step: Option<usize>,
    pub eig_tol: f64,
}

impl VolterraCertificate {
    /// Nilpotence established through the exact similarity.
    pub fn certified(&self) -> bool {
        self.core_strictly_lower
            && self.certified_max_modulus <= self.eig_tol
            && self.similarity_residual <= 1e-9
            && self.first_zero_step.is_some_and(|p| p <= self.factored_power_norms.len())
    }

    /// Nilpotence visible directly in the dense eigenvalues and powers.
    pub fn dense_confirms(&self) -> bool {
        self.dense_max_modulus <= self.eig_tol && self.dense_first_zero_step.is_some()
    }
}

fn first_zero(seq: &[f64]) -> Option<usize> {
    seq.iter().position(|r| *r == 0.0).map(|p| p + 1)
}

pub fn volterra_certificate(grid: &Grid1D, spec: &SigmaSpec) -> Result<VolterraCertificate, VolterraError> {
    if grid.scheme != Scheme::LeftRectangle {
        return Err(VolterraError::SchemeMismatch { expected: Scheme::LeftRectangle, got: grid.scheme });
    }
    let model = build_cauchy_model(grid, spec)?;
    let pair = make_perturbed(&model)?;
    let n = grid.n;
    let q = quasinilpotence_report(&pair, n)?;
    let conj = mat_mul(&mat_mul(&pair.transfer, &pair.reference_l_inv)?, &pair.transfer_inv)?;
    let similarity_residual = crate::framework::relative_diff(&pair.bk_inv, &conj);
    let dense = eig_general(&pair.bk_inv)?;
    let mut pairs: Vec<SpectralPair> = dense
        .values
        .iter()
        .zip(&dense.residuals)
        .map(|(lambda, res)| SpectralPair {
            lambda_ref: re(0.0),
            lambda_pert: *lambda,
            abs_diff: lambda.norm(),
            vec_residual: *res,
        })
        .collect();
    pairs.sort_by(|a, b| crate::numcore::canonical_cmp(&a.lambda_pert, &b.lambda_pert));
    let dense_max_modulus = dense.spectral_radius();
    let eig_tol = 1e-10;
    let mut cert = VolterraCertificate {
        report: SpectralReport {
            pairs,
            max_abs_diff: dense_max_modulus,
            riesz_condition: None,
            quasinilpotence: Some(q.factored.clone()),
            passed: false,
            unmatched_ref: 0,
            unmatched_pert: 0,
            clamped: false,
        },
        core_strictly_lower: pair.reference_l_inv.is_strictly_lower_triangular(),
        certified_max_modulus: q.core_spectral_radius,
        similarity_residual,
        first_zero_step: first_zero(&q.factored),
        factored_power_norms: q.factored,
        dense_max_modulus,
        dense_first_zero_step: first_zero(&q.dense),
        dense_power_norms: q.dense,
        eig_tol,
    };
    cert.report.passed = cert.certified();
    Ok(cert)
}

/// `max |u_0 − h·Σ_{j≤n−2} (Du)_j σ̄(x_{j+1})| / ‖u‖_h` over `u = B_K⁻¹f`
/// for a fixed set of smooth and oscillating `f`. This is the discrete form
/// of `u(0) = ∫ u′σ̄` for the right-endpoint quadrature used by `K`.
pub fn cauchy_boundary_residual(grid: &Grid1D, spec: &SigmaSpec) -> Result<f64, VolterraError> {
    let model = build_cauchy_model(grid, spec)?;
    let pair = make_perturbed(&model)?;
    Ok(boundary_residual_on_range(grid, spec, &pair.bk_inv))
}

pub(crate) fn boundary_residual_on_range(grid: &Grid1D, spec: &SigmaSpec, bk_inv: &DenseMatrix) -> f64 {
    let n = grid.n;
    let h = grid.h;
    let mut worst: f64 = 0.0;
    for q in 0..6 {
        let f: Vec<Complex64> = grid
            .nodes
            .iter()
            .enumerate()
            .map(|(j, &x)| match q {
                0 => re(1.0),
                1 => re(x),
                2 => c((PI * x).cos(), (3.0 * x).sin()),
                3 => re((7.0 * PI * x).sin()),
                4 => c(x * x, -x),
                _ => re(if j % 2 == 0 { 1.0 } else { -1.0 }),
            })
            .collect();
        let u = bk_inv.mat_vec(&f);
        let integral: Complex64 = (0..n - 1).map(|j| (u[j + 1] - u[j]) * spec.sigma[j + 1].conj()).sum();
        let norm = vec_norm(&u) * h.sqrt();
        if norm > 0.0 {
            worst = worst.max((u[0] - integral).norm() / norm);
        }
    }
    worst
}

/// Largest entrywise gap between the assembled `KL` row and the closed form
/// `f ↦ −∫ f σ̄′`, relative to the closed form's largest entry.
pub fn kl_closed_form_discrepancy(grid: &Grid1D, spec: &SigmaSpec) -> Result<f64, VolterraError> {
    let model = match spec.kind {
        SigmaKind::Cauchy => build_cauchy_model(grid, spec)?,
        SigmaKind::Antiperiodic => build_antiperiodic_model(grid, spec)?,
    };
    let pair = make_perturbed(&model)?;
    let row = pair.kl.row(0);
    let closed: Vec<Complex64> = (0..row.len()).map(|j| -spec.sigma_prime[j].conj() * grid.h).collect();
    let scale = closed.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    Ok(row.iter().zip(&closed).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale)
}

fn simpson(f: impl Fn(f64) -> f64) -> f64 {
    let m = 4000;
    let h = 1.0 / m as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}

fn family_of(spec: &SigmaSpec) -> Result<&SigmaFamily, VolterraError> {
    spec.family
        .as_ref()
        .ok_or_else(|| VolterraError::InvalidSigma("closed-form checks need an analytic family".into()))
}

fn unknowns(grid: &Grid1D) -> usize {
    match grid.scheme {
        Scheme::LeftRectangle => grid.n,
        Scheme::Trapezoid => grid.n - 1,
    }
}

/// Checks `B_K u = u′ − ∫u′σ̄′` for a smooth `u` in the perturbed domain by
/// applying the assembled `B_K⁻¹` to the closed-form right-hand side.
/// Returns the max error at the nodes relative to `max |u|` (first order in `h`).
pub fn forward_action_residual(grid: &Grid1D, spec: &SigmaSpec) -> Result<f64, VolterraError> {
    let sigma = family_of(spec)?;
    let model = match spec.kind {
        SigmaKind::Cauchy => build_cauchy_model(grid, spec)?,
        SigmaKind::Antiperiodic => build_antiperiodic_model(grid, spec)?,
    };
    let pair = make_perturbed(&model)?;
    let p = |x: f64| x.sin() + 0.5 * x * x;
    let dp = |x: f64| x.cos() + x;
    let dp_sigma = simpson(|x| dp(x) * sigma.value(x));
    let dp_dsigma = simpson(|x| dp(x) * sigma.derivative(x));
    // shift so that u satisfies the perturbed boundary condition
    let shift = match spec.kind {
        SigmaKind::Cauchy => dp_sigma - p(0.0),
        SigmaKind::Antiperiodic => (2.0 * dp_sigma - p(0.0) - p(1.0)) / 2.0,
    };
    let m = unknowns(grid);
    let x = &grid.nodes[..m];
    let f: Vec<Complex64> = x.iter().map(|&t| re(dp(t) - dp_dsigma)).collect();
    let u_exact: Vec<f64> = x.iter().map(|&t| p(t) + shift).collect();
    Ok(relative_node_error(&pair.bk_inv.mat_vec(&f), &u_exact))
}

/// Residuals of two closed forms for the adjoint action, each measured by
/// applying the assembled `(B_K*)⁻¹` to the closed-form right-hand side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdjointActionCheck {
    /// `B_K* v = −w′` with `w = v − σ′·∫v ∈ D(L*)` and `w(0) ≠ 0`.
    pub derivative_only: f64,
    /// `B_K* v = L_K* w = −w′ + σ′·w(0)/(c₀ + σ(0))`, same `v`
    /// (`c₀ = 1` for Cauchy data, `1/2` for anti-periodic data).
    pub with_boundary_term: f64,
    /// `−w′` again, for a `w` vanishing at both ends where the two forms agree.
    pub vanishing_trace: f64,
}

/// Checks the adjoint action `B_K* = L_K*(I + L*K*)` against closed forms.
/// All residuals are max node errors relative to `max |v|`.
///
/// For anti-periodic data the discrete derivative of `σ` is only accurate
/// when `σ` also extends smoothly, i.e. `σ′(0) + σ′(1) = 0`; otherwise the
/// trapezoid derivative carries an O(1) sawtooth at the wrap-around.
pub fn adjoint_action_residual(grid: &Grid1D, spec: &SigmaSpec) -> Result<AdjointActionCheck, VolterraError> {
    let sigma = family_of(spec)?;
    let model = match spec.kind {
        SigmaKind::Cauchy => build_cauchy_model(grid, spec)?,
        SigmaKind::Antiperiodic => build_antiperiodic_model(grid, spec)?,
    };
    let pair = make_perturbed_adjoint(&model)?;
    let c0 = match spec.kind {
        SigmaKind::Cauchy => 1.0,
        SigmaKind::Antiperiodic => 0.5,
    };
    let m = unknowns(grid);
    let x = &grid.nodes[..m];
    let run = |w: &dyn Fn(f64) -> f64, dw: &dyn Fn(f64) -> f64, boundary_term: bool| {
        // v = w + σ′·c with c = ∫v, i.e. c = ∫w / (1 + σ(0) − σ(1))
        let c = simpson(w) / (1.0 + sigma.value(0.0) - sigma.value(1.0));
        let extra = if boundary_term { w(0.0) / (c0 + sigma.value(0.0)) } else { 0.0 };
        let f: Vec<Complex64> = x.iter().map(|&t| re(-dw(t) + sigma.derivative(t) * extra)).collect();
        let v_exact: Vec<f64> = x.iter().map(|&t| w(t) + sigma.derivative(t) * c).collect();
        relative_node_error(&pair.bk_inv.mat_vec(&f), &v_exact)
    };
    // w in the domain of L*: w(1) = 0, resp. w(0) + w(1) = 0
    let (w, dw): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) = match spec.kind {
        SigmaKind::Cauchy => (
            Box::new(|x: f64| (FRAC_PI_2 * x).cos() * (1.0 + x)),
            Box::new(|x: f64| -FRAC_PI_2 * (FRAC_PI_2 * x).sin() * (1.0 + x) + (FRAC_PI_2 * x).cos()),
        ),
        SigmaKind::Antiperiodic => (
            Box::new(|x: f64| (PI * x).cos() + x * x - x),
            Box::new(|x: f64| -PI * (PI * x).sin() + 2.0 * x - 1.0),
        ),
    };
    let w0 = |x: f64| (PI * x).sin() * (1.0 + x);
    let dw0 = |x: f64| PI * (PI * x).cos() * (1.0 + x) + (PI * x).sin();
    Ok(AdjointActionCheck {
        derivative_only: run(&w, &dw, false),
        with_boundary_term: run(&w, &dw, true),
        vanishing_trace: run(&w0, &dw0, false),
    })
}

fn relative_node_error(computed: &[Complex64], exact: &[f64]) -> f64 {
    let scale = exact.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    computed.iter().zip(exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
}

/// `‖AᴴA − AAᴴ‖₂ / ‖A‖₂²`.
pub fn normality_defect(a: &DenseMatrix) -> Result<f64, VolterraError> {
    let ah = a.adjoint();
    let comm = mat_mul(&ah, a)?.sub(&mat_mul(a, &ah)?)?;
    let na = norm_2(a)?;
    if na == 0.0 {
        return Ok(0.0);
    }
    Ok(norm_2(&comm)? / (na * na))
}

/// Eigenvalues of the anti-periodic `L⁻¹` in the continuum: `1/λ` with
/// `1 + e^λ = 0`, i.e. `∓i/((2k+1)π)`. Returns the `count` largest in modulus.
pub fn antiperiodic_inverse_eigenvalues(count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|j| {
            let k = (j / 2) as f64;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            c(0.0, sign / ((2.0 * k + 1.0) * PI))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct NormalCaseReport {
    /// `(continuum value, nearest computed eigenvalue of L⁻¹, relative error)`.
    pub top: Vec<(Complex64, Complex64, f64)>,
    /// `σ(B_K⁻¹)` against `σ(L⁻¹)`.
    pub spectra: SpectralReport,
    pub normality_defect: f64,
    pub pair: PerturbedPair,
}

/// Leading eigenvalues of the anti-periodic `L⁻¹` and the spectrum of the
/// perturbed inverse against it.
pub fn normal_case_check(grid: &Grid1D, spec: &SigmaSpec, top: usize, match_tol: f64) -> Result<NormalCaseReport, VolterraError> {
    let model = build_antiperiodic_model(grid, spec)?;
    let pair = make_perturbed(&model)?;
    let eref = eig_general(&model.l_inv)?;
    let mut by_modulus = eref.values.clone();
    by_modulus.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let leading = &by_modulus[..top.min(by_modulus.len())];
    let top = antiperiodic_inverse_eigenvalues(top)
        .into_iter()
        .map(|exact| {
            let nearest = leading
                .iter()
                .copied()
                .min_by(|a, b| (a - exact).norm().total_cmp(&(b - exact).norm()))
                .unwrap_or(re(f64::NAN));
            (exact, nearest, (nearest - exact).norm() / exact.norm())
        })
        .collect();
    let scale = norm_2(&model.l_inv)?;
    let spectra = spectra_match(&model.l_inv, &pair.bk_inv, match_tol * scale.max(ZERO_TOL))?;
    let normality_defect = normality_defect(&model.l_inv)?;
    Ok(NormalCaseReport { top, spectra, normality_defect, pair })
}
