use super::{mat_mul, DenseMatrix, LinalgError};
use crate::tolerances::PIVOT_TOL;

/// Singular values, nonincreasing.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    a.check_finite("singular_values")?;
    a.to_faer()
        .singular_values()
        .map_err(|_| LinalgError::NoConvergence { sweeps: 0 })
}

/// Spectral norm `‖A‖₂`.
pub fn norm_2(a: &DenseMatrix) -> Result<f64, LinalgError> {
    if a.max_abs() == 0.0 {
        return Ok(0.0);
    }
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// `σ_max / σ_min`, or `+inf` when `σ_min` falls below the pivot tolerance
/// relative to `σ_max`.
pub fn condition_number_2(a: &DenseMatrix) -> Result<f64, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { op: "condition_number_2", shape: a.shape() });
    }
    let s = singular_values(a)?;
    let max = s.first().copied().unwrap_or(0.0);
    let min = s.last().copied().unwrap_or(0.0);
    if max == 0.0 || min < PIVOT_TOL * max {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

/// `r_p = ‖Aᵖ‖₂^{1/p}` for `p = 1..=n_max`.
///
/// Powers are renormalized at every step and the log of the norm is
/// accumulated, so neither overflow nor underflow of `Aᵖ` itself occurs.
/// Once a power is exactly zero every later entry is zero.
pub fn power_norm_sequence(a: &DenseMatrix, n_max: usize) -> Result<Vec<f64>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { op: "power_norm_sequence", shape: a.shape() });
    }
    conjugated_power_norms(a, None, n_max)
}

/// `r_p = ‖S Cᵖ S⁻¹‖₂^{1/p}` evaluated through the factors, for operators
/// known as a similarity transform of `core`.
pub fn similar_power_norm_sequence(
    core: &DenseMatrix,
    s: &DenseMatrix,
    s_inv: &DenseMatrix,
    n_max: usize,
) -> Result<Vec<f64>, LinalgError> {
    if !core.is_square() {
        return Err(LinalgError::NotSquare { op: "similar_power_norm_sequence", shape: core.shape() });
    }
    conjugated_power_norms(core, Some((s, s_inv)), n_max)
}

fn conjugated_power_norms(
    core: &DenseMatrix,
    similarity: Option<(&DenseMatrix, &DenseMatrix)>,
    n_max: usize,
) -> Result<Vec<f64>, LinalgError> {
    if n_max == 0 {
        return Err(LinalgError::InvalidArgument("n_max must be at least 1".into()));
    }
    core.check_finite("power_norm_sequence")?;
    let mut out = Vec::with_capacity(n_max);
    // `unit` holds core^p / ‖core^p‖ (spectral norm), `log_norm` = ln ‖core^p‖
    let mut unit = core.clone();
    let mut log_norm = 0.0;
    let mut vanished = false;
    for p in 1..=n_max {
        if vanished {
            out.push(0.0);
            continue;
        }
        if p > 1 {
            unit = mat_mul(core, &unit)?;
        }
        let s = norm_2(&unit)?;
        if s == 0.0 {
            vanished = true;
            out.push(0.0);
            continue;
        }
        log_norm += s.ln();
        unit = unit.scale_real(1.0 / s);
        let total_log = match similarity {
            None => log_norm,
            Some((left, right)) => {
                let t = mat_mul(&mat_mul(left, &unit)?, right)?;
                let tn = norm_2(&t)?;
                if tn == 0.0 {
                    out.push(0.0);
                    continue;
                }
                log_norm + tn.ln()
            }
        };
        out.push((total_log / p as f64).exp());
    }
    Ok(out)
}
