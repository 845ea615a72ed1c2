use crate::framework::{
    density_check, density_determinant, make_perturbed, match_spectra, transfer_check_with_basis, DensityCheck,
    PerturbedPair, RestrictionModel, SpectralReport,
};
use crate::numcore::{eig_general, inverse, re, vec_norm, Complex64, DenseMatrix};
use crate::tolerances::{DENSITY_TOL, ZERO_TOL};

use super::fields::{HarmonicWeight, KernelG, KernelSource, ZeroSet};
use super::grid::{assemble_dirichlet_fd, dirichlet_spectrum, lowest_sine_modes, RectGrid};
use super::LaplaceError;

/// `K = ω·(h²·gᴴ)`, so `Kf = ω·∬ f ḡ` under the node quadrature.
pub fn build_k_2d(grid: &RectGrid, omega: &HarmonicWeight, kernel: &KernelG) -> Result<DenseMatrix, LaplaceError> {
    let n2 = grid.len();
    if omega.values.len() != n2 || kernel.values.len() != n2 {
        return Err(LaplaceError::InvalidGrid("weight or kernel sampled on a different grid".into()));
    }
    let h2 = grid.h * grid.h;
    let row: Vec<Complex64> = kernel.values.iter().map(|g| g * h2).collect();
    Ok(DenseMatrix::outer(&omega.values, &row))
}

/// Scalars entering the density condition, next to the density check itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Admissibility2d {
    /// `h²·Σ (Δg)·ω̄`; the density condition fails where this equals 1.
    pub s_delta: Complex64,
    /// `h²·Σ ln|F|·ω̄` for Poisson kernels. With `−Δg = ln|F|` this is
    /// `−s_delta`, so its critical value is −1.
    pub s_log: Option<Complex64>,
    pub density: DensityCheck,
    pub admissible: bool,
}

fn weighted_sum(grid: &RectGrid, a: &[Complex64], omega: &HarmonicWeight) -> Complex64 {
    let h2 = grid.h * grid.h;
    a.iter().zip(&omega.values).map(|(v, w)| v * w.conj()).sum::<Complex64>() * h2
}

/// Model with `L = A_D` (given exactly) and `L⁻¹` from a dense inverse.
pub fn assemble_laplace_model(grid: &RectGrid, omega: &HarmonicWeight, kernel: &KernelG) -> Result<RestrictionModel, LaplaceError> {
    let a_d = assemble_dirichlet_fd(grid);
    let l_inv = inverse(&a_d)?;
    let k = build_k_2d(grid, omega, kernel)?;
    Ok(RestrictionModel::new(l_inv, k, grid.h * grid.h, "laplace2d")?.with_operator(a_d)?)
}

pub fn admissibility_2d(
    grid: &RectGrid,
    omega: &HarmonicWeight,
    kernel: &KernelG,
    zeros: Option<&ZeroSet>,
) -> Result<Admissibility2d, LaplaceError> {
    let model = assemble_laplace_model(grid, omega, kernel)?;
    admissibility_for_model(grid, omega, kernel, zeros, &model)
}

/// As [`admissibility_2d`], reusing an already assembled model.
pub fn admissibility_for_model(
    grid: &RectGrid,
    omega: &HarmonicWeight,
    kernel: &KernelG,
    zeros: Option<&ZeroSet>,
    model: &RestrictionModel,
) -> Result<Admissibility2d, LaplaceError> {
    let s_delta = weighted_sum(grid, &kernel.laplacian_values, omega);
    let s_log = match (kernel.source, zeros) {
        (KernelSource::PoissonLogF, Some(z)) => {
            let log_f: Vec<Complex64> = grid.points().map(|(x, y)| re(z.log_abs(Complex64::new(x, y)))).collect();
            Some(weighted_sum(grid, &log_f, omega))
        }
        _ => None,
    };
    let density = density_check(model, DENSITY_TOL)?;
    Ok(Admissibility2d { s_delta, s_log, density, admissible: density.passed })
}

/// Refuses inadmissible data, then returns the model.
pub fn build_laplace_model(grid: &RectGrid, omega: &HarmonicWeight, kernel: &KernelG) -> Result<RestrictionModel, LaplaceError> {
    let model = assemble_laplace_model(grid, omega, kernel)?;
    let adm = admissibility_for_model(grid, omega, kernel, None, &model)?;
    if !adm.admissible {
        return Err(LaplaceError::Inadmissible { s_delta: adm.s_delta, sigma_min: adm.density.sigma_min });
    }
    Ok(model)
}

/// Outcome of bisecting `t ↦ det(I + L*K*(t))` for `K(t) = t·K`.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalScaling {
    pub t_critical: f64,
    /// Final bracket; the density check passed at both ends.
    pub lower: f64,
    pub upper: f64,
    pub steps: usize,
    pub density_lower: DensityCheck,
    pub density_critical: DensityCheck,
    pub density_upper: DensityCheck,
    /// `1 / Re s_delta`, where the rank-one determinant `1 − t·s̄` vanishes.
    pub predicted: f64,
}

impl CriticalScaling {
    /// Density holds at both bracket ends and fails at the reported value.
    pub fn flips(&self) -> bool {
        self.density_lower.passed && self.density_upper.passed && !self.density_critical.passed
    }
}

/// Bisection on the sign of the real part of `det(I + L*K*(t))`, stopping as
/// soon as the density check fails at the midpoint.
pub fn critical_scaling(model: &RestrictionModel, s_delta: Complex64, max_steps: usize) -> Result<CriticalScaling, LaplaceError> {
    let det = |t: f64| -> Result<f64, LaplaceError> { Ok(density_determinant(&model.scaled(t))?.re) };
    let dens = |t: f64| -> Result<DensityCheck, LaplaceError> { Ok(density_check(&model.scaled(t), DENSITY_TOL)?) };
    let predicted = 1.0 / s_delta.re;
    let d0 = det(0.0)?;
    // expand outward until the determinant changes sign
    let mut far = None;
    'search: for k in 0..64 {
        for sign in [1.0, -1.0] {
            let t = sign * 2f64.powi(k - 8);
            if det(t)?.signum() != d0.signum() {
                far = Some(t);
                break 'search;
            }
        }
    }
    let far = far.ok_or(LaplaceError::NoCriticalScaling)?;
    let (mut lo, mut hi) = if far > 0.0 { (0.0, far) } else { (far, 0.0) };
    let d_lo_sign = det(lo)?.signum();
    for step in 1..=max_steps {
        let mid = 0.5 * (lo + hi);
        let dc = dens(mid)?;
        if !dc.passed {
            return Ok(CriticalScaling {
                t_critical: mid,
                lower: lo,
                upper: hi,
                steps: step,
                density_lower: dens(lo)?,
                density_critical: dc,
                density_upper: dens(hi)?,
                predicted,
            });
        }
        if det(mid)?.signum() == d_lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(LaplaceError::NoCriticalScaling)
}

/// Residuals of `B_K u = −Δ_h u + s·ω·h²·Σ (Δ_h u)(Δ_h ḡ)` for `s = ±1`,
/// relative to `‖B_K u‖`. `u` is first projected onto `{u : gᴴA_D u = 0}`,
/// the set on which `L_K u = A_D u` and the formula is exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForwardAction {
    pub residual_plus: f64,
    pub residual_minus: f64,
}

impl ForwardAction {
    pub fn sign(&self) -> f64 {
        if self.residual_plus <= self.residual_minus { 1.0 } else { -1.0 }
    }

    pub fn best(&self) -> f64 {
        self.residual_plus.min(self.residual_minus)
    }
}

pub fn forward_action_check(
    pair: &PerturbedPair,
    model: &RestrictionModel,
    grid: &RectGrid,
    omega: &HarmonicWeight,
    kernel: &KernelG,
    u: &[Complex64],
) -> Result<ForwardAction, LaplaceError> {
    let bk = pair.bk.as_ref().ok_or_else(|| LaplaceError::InvalidGrid("forward operator missing".into()))?;
    let a_d = model.operator.as_ref().ok_or_else(|| LaplaceError::InvalidGrid("model lacks A_D".into()))?;
    let h2 = grid.h * grid.h;
    let a_g = a_d.mat_vec(&kernel.values);
    // project u so that gᴴ A_D u = (A_D g)ᴴ u = 0 (A_D is real symmetric)
    let dot = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>();
    let mut u = u.to_vec();
    let denom = dot(&a_g, &a_g);
    if denom.norm() > 0.0 {
        let coef = dot(&a_g, &u) / denom;
        for (ui, ai) in u.iter_mut().zip(&a_g) {
            *ui -= coef * ai;
        }
    }
    let a_u = a_d.mat_vec(&u);
    let bu = bk.mat_vec(&u);
    // Δ_h u = −A_D u, Δ_h ḡ = −conj(A_D g)
    let functional: Complex64 = a_u.iter().zip(&a_g).map(|(au, ag)| au * ag.conj()).sum::<Complex64>() * h2;
    let scale = vec_norm(&bu).max(f64::MIN_POSITIVE);
    let residual = |s: f64| {
        let diff: Vec<Complex64> =
            (0..u.len()).map(|i| bu[i] - a_u[i] - omega.values[i] * functional * s).collect();
        vec_norm(&diff) / scale
    };
    Ok(ForwardAction { residual_plus: residual(1.0), residual_minus: residual(-1.0) })
}

/// Which sign `s` makes `u_k = v_k + s·ω·⟨v_k, Δ_h g⟩` an eigenvector of `B_K`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferSign {
    pub sign: f64,
    pub max_residual_plus: f64,
    pub max_residual_minus: f64,
    /// Largest gap between the closed-form `u_k` (with `sign`) and `(I+KL)v_k`.
    pub assembly_gap: f64,
}

pub fn resolve_transfer_sign(
    pair: &PerturbedPair,
    model: &RestrictionModel,
    grid: &RectGrid,
    omega: &HarmonicWeight,
    kernel: &KernelG,
    modes: usize,
) -> Result<TransferSign, LaplaceError> {
    let bk = pair.bk.as_ref().ok_or_else(|| LaplaceError::InvalidGrid("forward operator missing".into()))?;
    let a_d = model.operator.as_ref().ok_or_else(|| LaplaceError::InvalidGrid("model lacks A_D".into()))?;
    let h2 = grid.h * grid.h;
    let lap_g: Vec<Complex64> = a_d.mat_vec(&kernel.values).into_iter().map(|v| -v).collect();
    let mut worst = [0.0f64; 2];
    let mut gap: [f64; 2] = [0.0; 2];
    for mode in lowest_sine_modes(grid, modes) {
        let v: Vec<Complex64> = mode.vector.iter().map(|x| re(*x)).collect();
        let inner: Complex64 = v.iter().zip(&lap_g).map(|(a, b)| a * b.conj()).sum::<Complex64>() * h2;
        let assembled = pair.transfer.mat_vec(&v);
        for (slot, s) in [1.0, -1.0].into_iter().enumerate() {
            let u: Vec<Complex64> = (0..v.len()).map(|i| v[i] + omega.values[i] * inner * s).collect();
            let bu = bk.mat_vec(&u);
            let diff: Vec<Complex64> = (0..u.len()).map(|i| bu[i] - u[i] * mode.eigenvalue).collect();
            worst[slot] = worst[slot].max(vec_norm(&diff) / vec_norm(&u));
            let d: Vec<Complex64> = (0..u.len()).map(|i| u[i] - assembled[i]).collect();
            gap[slot] = gap[slot].max(vec_norm(&d) / vec_norm(&assembled));
        }
    }
    let slot = if worst[0] <= worst[1] { 0 } else { 1 };
    Ok(TransferSign {
        sign: if slot == 0 { 1.0 } else { -1.0 },
        max_residual_plus: worst[0],
        max_residual_minus: worst[1],
        assembly_gap: gap[slot],
    })
}

/// `σ(B_K)` from the general eigensolver against the closed-form Dirichlet
/// spectrum, with `match_tol` relative to `‖A_D‖₂`.
pub fn closed_form_spectrum_check(bk: &DenseMatrix, grid: &RectGrid, match_tol: f64) -> Result<SpectralReport, LaplaceError> {
    let exact: Vec<Complex64> = dirichlet_spectrum(grid).into_iter().map(re).collect();
    let norm = exact.last().map(|z| z.re).unwrap_or(0.0);
    let e = eig_general(bk)?;
    let bk_norm = crate::numcore::norm_2(bk)?;
    Ok(match_spectra(&exact, &e.values, &e.residuals, ZERO_TOL * norm, ZERO_TOL * bk_norm, match_tol * norm))
}

/// Transfer of the closed-form sine eigenbasis through `I + KL`.
pub fn sine_basis_transfer_check(pair: &PerturbedPair, grid: &RectGrid, modes: usize, transfer_tol: f64) -> Result<SpectralReport, LaplaceError> {
    let bk = pair.bk.as_ref().ok_or_else(|| LaplaceError::InvalidGrid("forward operator missing".into()))?;
    let sine = lowest_sine_modes(grid, modes);
    let lambdas: Vec<Complex64> = sine.iter().map(|m| re(m.eigenvalue)).collect();
    let vectors: Vec<Vec<Complex64>> = sine.iter().map(|m| m.vector.iter().map(|x| re(*x)).collect()).collect();
    let mut report = transfer_check_with_basis(bk, &pair.transfer, &lambdas, &vectors, transfer_tol)?;
    report.clamped = modes > grid.len();
    Ok(report)
}

/// Convenience: admissible model and its perturbed pair.
pub fn laplace_pair(grid: &RectGrid, omega: &HarmonicWeight, kernel: &KernelG) -> Result<(RestrictionModel, PerturbedPair), LaplaceError> {
    let model = build_laplace_model(grid, omega, kernel)?;
    let pair = make_perturbed(&model)?;
    Ok((model, pair))
}
