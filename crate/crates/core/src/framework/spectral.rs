use crate::numcore::{
    canonical_cmp, condition_number_2, eig_general, mat_mul, norm_2, power_norm_sequence,
    similar_power_norm_sequence, vec_norm, Complex64, DenseMatrix, EigenDecomposition,
};
use crate::tolerances::ZERO_TOL;

use super::perturbed::PerturbedPair;
use super::FrameworkError;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPair {
    pub lambda_ref: Complex64,
    pub lambda_pert: Complex64,
    pub abs_diff: f64,
    pub vec_residual: f64,
}

/// Matched reference/perturbed spectra with diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    /// Sorted by the canonical order of `lambda_ref`.
    pub pairs: Vec<SpectralPair>,
    pub max_abs_diff: f64,
    pub riesz_condition: Option<f64>,
    pub quasinilpotence: Option<Vec<f64>>,
    pub passed: bool,
    /// Nonzero eigenvalues left without a partner on either side.
    pub unmatched_ref: usize,
    pub unmatched_pert: usize,
    /// Set when more modes were requested than the dimension allows.
    pub clamped: bool,
}

impl SpectralReport {
    fn from_pairs(pairs: Vec<SpectralPair>, tol: f64, unmatched_ref: usize, unmatched_pert: usize) -> Self {
        let max_abs_diff = pairs.iter().map(|p| p.abs_diff).fold(0.0, f64::max);
        let passed = unmatched_ref == 0 && unmatched_pert == 0 && pairs.iter().all(|p| p.abs_diff <= tol);
        Self {
            pairs,
            max_abs_diff,
            riesz_condition: None,
            quasinilpotence: None,
            passed,
            unmatched_ref,
            unmatched_pert,
            clamped: false,
        }
    }
}

/// Greedy nearest-neighbour matching of two spectra after dropping values
/// below the respective zero cutoffs. `pert_residuals[k]` is reported as the
/// vector residual of `pert[k]`.
pub fn match_spectra(
    reference: &[Complex64],
    pert: &[Complex64],
    pert_residuals: &[f64],
    zero_cut_ref: f64,
    zero_cut_pert: f64,
    match_tol: f64,
) -> SpectralReport {
    let mut ref_idx: Vec<usize> = (0..reference.len()).filter(|&k| reference[k].norm() > zero_cut_ref).collect();
    ref_idx.sort_by(|&a, &b| canonical_cmp(&reference[a], &reference[b]).then(a.cmp(&b)));
    let pert_idx: Vec<usize> = (0..pert.len()).filter(|&k| pert[k].norm() > zero_cut_pert).collect();
    let mut used = vec![false; pert_idx.len()];
    let mut pairs = Vec::with_capacity(ref_idx.len());
    let mut unmatched_ref = 0;
    for &r in &ref_idx {
        let mut best: Option<(usize, f64)> = None;
        for (slot, &p) in pert_idx.iter().enumerate() {
            if used[slot] {
                continue;
            }
            let d = (reference[r] - pert[p]).norm();
            // strict comparison: ties go to the lower index
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((slot, d));
            }
        }
        match best {
            Some((slot, d)) => {
                used[slot] = true;
                let p = pert_idx[slot];
                pairs.push(SpectralPair {
                    lambda_ref: reference[r],
                    lambda_pert: pert[p],
                    abs_diff: d,
                    vec_residual: pert_residuals.get(p).copied().unwrap_or(f64::NAN),
                });
            }
            None => unmatched_ref += 1,
        }
    }
    let unmatched_pert = used.iter().filter(|u| !**u).count();
    SpectralReport::from_pairs(pairs, match_tol, unmatched_ref, unmatched_pert)
}

/// Compares the nonzero spectra of `a` (reference) and `b`.
pub fn spectra_match(a: &DenseMatrix, b: &DenseMatrix, match_tol: f64) -> Result<SpectralReport, FrameworkError> {
    if !a.is_square() || !b.is_square() || a.shape() != b.shape() {
        return Err(crate::numcore::LinalgError::ShapeMismatch {
            op: "spectra_match",
            left: a.shape(),
            right: b.shape(),
        }
        .into());
    }
    let ea = eig_general(a)?;
    let eb = eig_general(b)?;
    Ok(match_decompositions(&ea, &eb, norm_2(a)?, norm_2(b)?, match_tol))
}

/// Nonzero-spectrum comparison of two square matrices of possibly different
/// sizes (e.g. `RS` against `SR`).
pub fn nonzero_spectra_match(a: &DenseMatrix, b: &DenseMatrix, match_tol: f64) -> Result<SpectralReport, FrameworkError> {
    let ea = eig_general(a)?;
    let eb = eig_general(b)?;
    Ok(match_decompositions(&ea, &eb, norm_2(a)?, norm_2(b)?, match_tol))
}

pub(crate) fn match_decompositions(
    ea: &EigenDecomposition,
    eb: &EigenDecomposition,
    norm_a: f64,
    norm_b: f64,
    match_tol: f64,
) -> SpectralReport {
    match_spectra(&ea.values, &eb.values, &eb.residuals, ZERO_TOL * norm_a, ZERO_TOL * norm_b, match_tol)
}

/// Maps reference eigenvectors through `T = I + KL` and checks they are
/// eigenvectors of `B_K` for the same eigenvalue.
///
/// Uses `bk`/`reference_l` when they exist; for inverse-only pairs the check
/// runs on `bk_inv` against the nonzero eigenpairs of `reference_l_inv`.
pub fn eigvec_transfer_check(
    pair: &PerturbedPair,
    modes: usize,
    transfer_tol: f64,
) -> Result<SpectralReport, FrameworkError> {
    let (op, reference) = match (&pair.bk, &pair.reference_l) {
        (Some(bk), Some(l)) => (bk, l),
        _ => (&pair.bk_inv, &pair.reference_l_inv),
    };
    let n = pair.dim();
    let clamped = modes > n;
    let modes = modes.min(n);
    let eref = eig_general(reference)?;
    let zero_cut = ZERO_TOL * norm_2(reference)?;
    let selected: Vec<usize> = (0..n).filter(|&k| eref.values[k].norm() > zero_cut).take(modes).collect();
    let lambdas: Vec<Complex64> = selected.iter().map(|&k| eref.values[k]).collect();
    let vectors: Vec<Vec<Complex64>> = selected.iter().map(|&k| eref.vectors.col_vec(k)).collect();
    let mut report = transfer_check_with_basis(op, &pair.transfer, &lambdas, &vectors, transfer_tol)?;
    report.clamped = clamped;
    Ok(report)
}

/// Transfer check against a supplied reference eigenbasis `(λ_k, v_k)` of
/// the reference operator: residual `‖op·u_k − λ_k·u_k‖ / ‖u_k‖` with
/// `u_k = transfer·v_k`, passing when every residual is at most
/// `transfer_tol·‖op‖₂`.
pub fn transfer_check_with_basis(
    op: &DenseMatrix,
    transfer: &DenseMatrix,
    lambdas: &[Complex64],
    vectors: &[Vec<Complex64>],
    transfer_tol: f64,
) -> Result<SpectralReport, FrameworkError> {
    let n = op.rows();
    let mut v = DenseMatrix::zeros(n, vectors.len());
    for (col, vk) in vectors.iter().enumerate() {
        v.set_col(col, vk);
    }
    let u = mat_mul(transfer, &v)?;
    let bu = mat_mul(op, &u)?;
    let mut pairs = Vec::with_capacity(vectors.len());
    for (col, &lambda) in lambdas.iter().enumerate() {
        let uk = u.col_vec(col);
        let diff: Vec<Complex64> = (0..n).map(|i| bu[(i, col)] - lambda * uk[i]).collect();
        pairs.push(SpectralPair {
            lambda_ref: lambda,
            lambda_pert: lambda,
            abs_diff: 0.0,
            vec_residual: vec_norm(&diff) / vec_norm(&uk),
        });
    }
    let bound = transfer_tol * norm_2(op)?;
    let passed = pairs.iter().all(|p| p.vec_residual <= bound);
    Ok(SpectralReport {
        max_abs_diff: 0.0,
        riesz_condition: None,
        quasinilpotence: None,
        passed,
        unmatched_ref: 0,
        unmatched_pert: 0,
        clamped: false,
        pairs,
    })
}

/// Condition number of the column-normalized eigenvector matrix of `B_K`
/// (of `B_K⁻¹` for inverse-only pairs). Returns `+inf` when the
/// decomposition looks defective.
pub fn riesz_diagnostic(pair: &PerturbedPair) -> Result<f64, FrameworkError> {
    let op = pair.bk.as_ref().unwrap_or(&pair.bk_inv);
    let e = eig_general(op)?;
    Ok(eigenvector_condition(&e)?)
}

/// `cond₂` of the unit-column eigenvector matrix, `+inf` for flagged decompositions.
pub fn eigenvector_condition(e: &EigenDecomposition) -> Result<f64, crate::numcore::LinalgError> {
    if e.is_defective_suspect() {
        return Ok(f64::INFINITY);
    }
    condition_number_2(&e.vectors)
}

/// Power norms of `B_K⁻¹` together with its spectral radius.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasinilpotenceReport {
    /// `‖(B_K⁻¹)ᵖ‖^{1/p}` from the assembled dense matrix.
    pub dense: Vec<f64>,
    /// Same quantity evaluated through `B_K⁻¹ = T·L⁻¹·T⁻¹`.
    pub factored: Vec<f64>,
    /// Spectral radius of the dense `B_K⁻¹` from the general eigensolver.
    pub dense_spectral_radius: f64,
    /// Spectral radius of the similarity core `L⁻¹`.
    pub core_spectral_radius: f64,
}

pub fn quasinilpotence_report(pair: &PerturbedPair, n_max: usize) -> Result<QuasinilpotenceReport, FrameworkError> {
    let dense = power_norm_sequence(&pair.bk_inv, n_max)?;
    let factored = similar_power_norm_sequence(&pair.reference_l_inv, &pair.transfer, &pair.transfer_inv, n_max)?;
    let dense_spectral_radius = eig_general(&pair.bk_inv)?.spectral_radius();
    let core_spectral_radius = eig_general(&pair.reference_l_inv)?.spectral_radius();
    Ok(QuasinilpotenceReport {
        dense,
        factored,
        dense_spectral_radius,
        core_spectral_radius,
    })
}
