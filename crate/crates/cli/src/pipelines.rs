use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::{Context, Result};
use log::{debug, info};
use serde::Serialize;
use serde_json::Value;

use isospec_core::framework::{
    eigvec_transfer_check, identity_suite, make_perturbed, match_spectra, random_admissible_model, riesz_diagnostic,
    spectra_match, RandomModelSpec, SpectralPair,
};
use isospec_core::laplace2d::{
    admissibility_for_model, assemble_dirichlet_fd, assemble_laplace_model, dirichlet_spectrum,
    forward_action_check, greens_split_check, resolve_transfer_sign, sine_basis_transfer_check,
    solve_poisson_log_f, HarmonicKind, HarmonicWeight, KernelG, KernelSource, LaplaceError, RectGrid, TestField,
    ZeroSet,
};
use isospec_core::numcore::{eig_general, norm_2, re, singular_values, vec_norm, Complex64, DenseMatrix};
use isospec_core::tolerances::{Tolerances, EIG_TOL, ZERO_TOL};
use isospec_core::volterra1d::{
    build_antiperiodic_model, build_cauchy_model, cauchy_boundary_residual, normal_case_check, volterra_certificate,
    Grid1D, Scheme, SigmaFamily, SigmaKind, SigmaSpec, VolterraError,
};

use crate::config::{Plan, Setup, LAPLACE_DENSE_MAX_N};
use crate::InvalidInput;

/// Relative error allowed for the leading anti-periodic eigenvalues.
pub const TOP_EIGENVALUE_TOL: f64 = 5e-3;
/// Smallest singular value of the unit-column eigenvector matrix.
pub const RIESZ_MIN_SINGULAR: f64 = 1e-3;
/// Forward action of `B_K` against its closed form, relative.
pub const FORWARD_ACTION_TOL: f64 = 1e-8;
/// `u₀` against the boundary functional on the range of `B_K⁻¹`, relative.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Relative similarity residual accepted by the nilpotence certificate.
pub const SIMILARITY_TOL: f64 = 1e-9;
/// Modes used by the eigenvector transfer checks.
pub const TRANSFER_MODES: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Value,
    pub threshold: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

/// Outcome of one experiment at one grid size.
#[derive(Clone, Debug, Serialize)]
pub struct EntryResult {
    pub n: usize,
    #[serde(skip)]
    pub pairs: Vec<SpectralPair>,
    pub max_abs_diff: Option<f64>,
    pub riesz_condition: Option<f64>,
    pub greens_discrepancy: Option<f64>,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Value>,
    pub stages: Vec<Stage>,
}

impl EntryResult {
    fn new(n: usize) -> Self {
        Self {
            n,
            pairs: Vec::new(),
            max_abs_diff: None,
            riesz_condition: None,
            greens_discrepancy: None,
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            stages: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).and_then(Value::as_f64)
    }

    fn timed<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        let seconds = start.elapsed().as_secs_f64();
        debug!("n={} stage {name}: {seconds:.3}s", self.n);
        self.stages.push(Stage { name: name.to_string(), seconds });
        out
    }

    /// `value ≤ threshold`.
    fn check_le(&mut self, name: &str, value: f64, threshold: f64) {
        self.push_check(name, value <= threshold, value, threshold);
    }

    fn push_check(&mut self, name: &str, passed: bool, value: f64, threshold: f64) {
        info!("n={} {name}: {} (value {value:.3e}, threshold {threshold:.3e})", self.n, verdict(passed));
        self.checks.push(Check { name: name.to_string(), passed, value: num(value), threshold: num(threshold) });
    }

    fn metric_set(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), num(value));
    }
}

pub fn verdict(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "fail"
    }
}

/// JSON number, or `null` for non-finite values.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn invalid_volterra(e: VolterraError) -> anyhow::Error {
    match e {
        VolterraError::Framework(inner) => anyhow::Error::new(inner),
        other => InvalidInput(format!("sigma: {other}")).into(),
    }
}

pub fn run_entry(plan: &Plan, n: usize) -> Result<EntryResult> {
    let tol = plan.tolerances;
    info!("{} n={n}: start", plan.experiment);
    match &plan.setup {
        Setup::FrameworkRandom { seed, count } => framework_random(n, *seed, *count, &tol),
        Setup::D1Cauchy { family } => d1_cauchy(n, family, &tol),
        Setup::D1Antiperiodic { family } => d1_antiperiodic(n, family, &tol),
        Setup::Laplace2d { omega, zeros, source, amplitude } => {
            laplace2d(n, *omega, zeros, *source, *amplitude, &tol, n <= LAPLACE_DENSE_MAX_N)
        }
    }
}

pub fn framework_random(n: usize, seed: u64, count: usize, tol: &Tolerances) -> Result<EntryResult> {
    let mut out = EntryResult::new(n);
    let mut worst_rel = 0.0f64;
    let mut worst_abs = 0.0f64;
    let mut worst_identity = 0.0f64;
    let mut worst_transfer = 0.0f64;
    let mut all_matched = true;
    let mut all_transferred = true;
    for i in 0..count {
        let spec = RandomModelSpec::new(n, seed.wrapping_add(i as u64));
        let model = out.timed("model", || random_admissible_model(&spec)).context("random model")?;
        let pair = out.timed("perturbed_pair", || make_perturbed(&model))?;
        let reference = pair.reference_l.as_ref().context("random models carry L")?;
        let bk = pair.bk.as_ref().context("random models carry B_K")?;
        let report = out.timed("spectra", || spectra_match(reference, bk, tol.match_tol))?;
        let norm = norm_2(reference)?;
        worst_rel = worst_rel.max(report.max_abs_diff / norm);
        worst_abs = worst_abs.max(report.max_abs_diff);
        all_matched &= report.passed;
        let ids = out.timed("identities", || identity_suite(&model))?;
        worst_identity = ids.iter().map(|r| r.residual).fold(worst_identity, f64::max);
        let transfer = out.timed("transfer", || eigvec_transfer_check(&pair, TRANSFER_MODES.min(n), tol.transfer_tol))?;
        let bk_norm = norm_2(bk)?;
        worst_transfer = transfer.pairs.iter().map(|p| p.vec_residual / bk_norm).fold(worst_transfer, f64::max);
        all_transferred &= transfer.passed;
        if i == 0 {
            out.riesz_condition = Some(out.timed("riesz", || riesz_diagnostic(&pair))?);
            out.pairs = report.pairs;
        }
    }
    out.max_abs_diff = Some(worst_abs);
    out.push_check("isospectral", all_matched, worst_rel, tol.match_tol);
    out.check_le("identities", worst_identity, tol.identity_tol);
    out.push_check("eigvec_transfer", all_transferred, worst_transfer, tol.transfer_tol);
    out.metric_set("models", count as f64);
    Ok(out)
}

pub fn d1_cauchy(n: usize, family: &SigmaFamily, tol: &Tolerances) -> Result<EntryResult> {
    let mut out = EntryResult::new(n);
    let grid = Grid1D::new(n, Scheme::LeftRectangle).map_err(invalid_volterra)?;
    let spec = SigmaSpec::from_family(&grid, family, SigmaKind::Cauchy).map_err(invalid_volterra)?;
    let cert = out.timed("certificate", || volterra_certificate(&grid, &spec)).map_err(invalid_volterra)?;
    let model = build_cauchy_model(&grid, &spec).map_err(invalid_volterra)?;
    let ids = out.timed("identities", || identity_suite(&model))?;
    let boundary = out.timed("boundary", || cauchy_boundary_residual(&grid, &spec)).map_err(invalid_volterra)?;

    out.push_check("nilpotence_certificate", cert.certified(), cert.certified_max_modulus, cert.eig_tol);
    out.check_le("similarity_residual", cert.similarity_residual, SIMILARITY_TOL);
    let first = cert.first_zero_step.map(|p| p as f64).unwrap_or(f64::INFINITY);
    out.check_le("power_norms_vanish", first, n as f64);
    out.check_le("identities", ids.iter().map(|r| r.residual).fold(0.0, f64::max), tol.identity_tol);
    out.check_le("boundary_condition", boundary, BOUNDARY_TOL);
    out.metric_set("dense_max_modulus", cert.dense_max_modulus);
    out.metric_set("dense_first_zero_step", cert.dense_first_zero_step.map(|p| p as f64).unwrap_or(f64::NAN));
    out.metric_set("sigma0", spec.sigma0().re);
    out.max_abs_diff = Some(cert.report.max_abs_diff);
    out.pairs = cert.report.pairs;
    Ok(out)
}

pub fn d1_antiperiodic(n: usize, family: &SigmaFamily, tol: &Tolerances) -> Result<EntryResult> {
    let mut out = EntryResult::new(n);
    let grid = Grid1D::new(n, Scheme::Trapezoid).map_err(invalid_volterra)?;
    let spec = SigmaSpec::from_family(&grid, family, SigmaKind::Antiperiodic).map_err(invalid_volterra)?;
    let report = out.timed("normal_case", || normal_case_check(&grid, &spec, 4, tol.match_tol)).map_err(invalid_volterra)?;
    let model = build_antiperiodic_model(&grid, &spec).map_err(invalid_volterra)?;
    let ids = out.timed("identities", || identity_suite(&model))?;
    let top_err = report.top.iter().map(|t| t.2).fold(0.0, f64::max);
    let norm = norm_2(&model.l_inv)?;
    out.check_le("top_eigenvalues", top_err, TOP_EIGENVALUE_TOL);
    out.push_check("isospectral", report.spectra.passed, report.spectra.max_abs_diff / norm, tol.match_tol);
    out.check_le("identities", ids.iter().map(|r| r.residual).fold(0.0, f64::max), tol.identity_tol);
    out.metric_set("top_eigenvalue_error", top_err);
    out.metric_set("normality_defect", report.normality_defect);
    out.metric_set("sigma0", spec.sigma0().re);
    out.max_abs_diff = Some(report.spectra.max_abs_diff);
    out.pairs = report.spectra.pairs;
    Ok(out)
}

fn kernel_for(grid: &RectGrid, zeros: &ZeroSet, source: KernelSource, amplitude: f64) -> Result<KernelG, LaplaceError> {
    match source {
        KernelSource::Explicit => Ok(KernelG::explicit_sine(grid, amplitude)),
        KernelSource::PoissonLogF => solve_poisson_log_f(grid, zeros),
    }
}

fn unit_columns(m: &DenseMatrix) -> DenseMatrix {
    let mut out = m.clone();
    for j in 0..m.cols() {
        let col = m.col_vec(j);
        let norm = vec_norm(&col);
        out.set_col(j, &col.iter().map(|v| v / norm).collect::<Vec<_>>());
    }
    out
}

/// The 2D pipeline. Without `dense`, only the Green split and the weight
/// are examined (no `n² × n²` matrices are formed).
pub fn laplace2d(
    n: usize,
    omega_kind: HarmonicKind,
    zeros: &ZeroSet,
    source: KernelSource,
    amplitude: f64,
    tol: &Tolerances,
    dense: bool,
) -> Result<EntryResult> {
    let mut out = EntryResult::new(n);
    let grid = RectGrid::new(n)?;
    let omega = HarmonicWeight::new(&grid, omega_kind);
    out.check_le("harmonic_weight", omega.harmonic_defect(&grid), omega.harmonic_defect_bound(&grid));

    let split = out.timed("greens_split", || greens_split_check(&grid, zeros, TestField::SineProduct { p: 1, q: 1 }))?;
    out.greens_discrepancy = Some(split.discrepancy);
    out.metric_set("greens_volume", split.lhs);
    out.metric_set("greens_point", split.point_term);
    out.metric_set("greens_boundary", split.boundary_term);
    if !dense {
        return Ok(out);
    }

    let kernel = out.timed("kernel", || kernel_for(&grid, zeros, source, amplitude))?;
    let model = out.timed("model", || assemble_laplace_model(&grid, &omega, &kernel))?;
    let adm = out.timed("admissibility", || admissibility_for_model(&grid, &omega, &kernel, Some(zeros), &model))?;
    out.metric_set("s_delta_re", adm.s_delta.re);
    out.metric_set("s_delta_im", adm.s_delta.im);
    if let Some(s) = adm.s_log {
        out.metric_set("s_log_re", s.re);
        out.metric_set("s_log_im", s.im);
    }
    out.metric_set("density_sigma_min", adm.density.sigma_min);
    if !adm.admissible {
        return Err(InvalidInput(format!(
            "kernel: inadmissible configuration, I + L*K* is singular (sigma_min {:.3e}, quadrature scalar {})",
            adm.density.sigma_min, adm.s_delta
        ))
        .into());
    }
    let pair = out.timed("perturbed_pair", || make_perturbed(&model))?;
    let bk = pair.bk.as_ref().context("Laplace models carry B_K")?;
    let a_d = model.operator.clone().unwrap_or_else(|| assemble_dirichlet_fd(&grid));

    let e_bk = out.timed("eig_bk", || eig_general(bk))?;
    let e_ad = out.timed("eig_reference", || eig_general(&a_d))?;
    let exact: Vec<Complex64> = dirichlet_spectrum(&grid).into_iter().map(re).collect();
    let norm = exact.last().map(|z| z.re).unwrap_or(1.0);
    let cut = ZERO_TOL * norm;
    let report = match_spectra(&e_ad.values, &e_bk.values, &e_bk.residuals, cut, cut, tol.match_tol * norm);
    let closed = match_spectra(&exact, &e_bk.values, &e_bk.residuals, cut, cut, tol.match_tol * norm);
    out.push_check("isospectral", report.passed, report.max_abs_diff / norm, tol.match_tol);
    out.push_check("closed_form_spectrum", closed.passed, closed.max_abs_diff / norm, tol.match_tol);
    out.check_le("eigen_residual", e_bk.max_residual() / e_bk.scale.max(f64::MIN_POSITIVE), EIG_TOL);

    let transfer = out.timed("transfer", || sine_basis_transfer_check(&pair, &grid, TRANSFER_MODES, tol.transfer_tol))?;
    let bk_norm = norm_2(bk)?;
    let worst = transfer.pairs.iter().map(|p| p.vec_residual / bk_norm).fold(0.0, f64::max);
    out.push_check("eigvec_transfer", transfer.passed, worst, tol.transfer_tol);

    let sign = out.timed("transfer_sign", || resolve_transfer_sign(&pair, &model, &grid, &omega, &kernel, TRANSFER_MODES))?;
    out.metric_set("transfer_sign", sign.sign);
    out.metric_set("transfer_sign_residual", sign.max_residual_plus.min(sign.max_residual_minus));
    let fa = forward_action_check(&pair, &model, &grid, &omega, &kernel, &TestField::Bubble.sample(&grid))?;
    out.metric_set("forward_sign", fa.sign());
    out.check_le("forward_action", fa.best(), FORWARD_ACTION_TOL);

    let sv = out.timed("riesz", || singular_values(&unit_columns(&e_bk.vectors)))?;
    let (s_max, s_min) = (sv[0], *sv.last().unwrap_or(&0.0));
    let cond = if e_bk.is_defective_suspect() || s_min == 0.0 { f64::INFINITY } else { s_max / s_min };
    out.riesz_condition = Some(cond);
    out.push_check("riesz_basis", s_min >= RIESZ_MIN_SINGULAR && cond.is_finite(), s_min, RIESZ_MIN_SINGULAR);

    out.max_abs_diff = Some(report.max_abs_diff);
    out.pairs = report.pairs;
    Ok(out)
}
