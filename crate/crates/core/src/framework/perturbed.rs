use crate::numcore::{mat_mul, DenseMatrix};

use super::model::{checked_inverse, density_check, RestrictionModel};
use super::FrameworkError;

/// The perturbed operator `B_K` together with everything it was assembled from.
///
/// When the reference inverse is singular (a nilpotent Volterra
/// discretization) only the inverse side exists: `bk`, `lk` and
/// `reference_l` are `None`.
#[derive(Clone, Debug)]
pub struct PerturbedPair {
    pub bk: Option<DenseMatrix>,
    pub bk_inv: DenseMatrix,
    pub lk: Option<DenseMatrix>,
    pub lk_inv: DenseMatrix,
    /// Bounded closure of `K·L` (for the adjoint pair: `L*K*`).
    pub kl: DenseMatrix,
    pub reference_l: Option<DenseMatrix>,
    pub reference_l_inv: DenseMatrix,
    /// `T` with `B = T·L·T⁻¹`; reference eigenvectors map to perturbed ones by `T`.
    pub transfer: DenseMatrix,
    pub transfer_inv: DenseMatrix,
}

impl PerturbedPair {
    pub fn dim(&self) -> usize {
        self.bk_inv.rows()
    }

    pub fn is_inverse_only(&self) -> bool {
        self.bk.is_none()
    }

    /// Residuals of the structural invariants, each relative to the size of
    /// the compared matrices: `bk_inv = T·L⁻¹·T⁻¹`, `bk_inv·bk = I`,
    /// `bk = lk_inv·L·lk`.
    pub fn invariant_residuals(&self) -> Result<Vec<(&'static str, f64)>, FrameworkError> {
        let mut out = Vec::new();
        let conj = mat_mul(&mat_mul(&self.transfer, &self.reference_l_inv)?, &self.transfer_inv)?;
        out.push(("bk_inv_similarity", relative_diff(&self.bk_inv, &conj)));
        if let (Some(bk), Some(lk), Some(l)) = (&self.bk, &self.lk, &self.reference_l) {
            let n = self.dim();
            let prod = mat_mul(&self.bk_inv, bk)?;
            out.push(("bk_inv_times_bk", relative_diff(&prod, &DenseMatrix::identity(n))));
            let sim = mat_mul(&mat_mul(&self.lk_inv, l)?, lk)?;
            out.push(("bk_similarity", relative_diff(bk, &sim)));
        }
        Ok(out)
    }
}

/// `max|a − b| / max(1, max|a|, max|b|)`.
pub fn relative_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let scale = 1.0f64.max(a.max_abs()).max(b.max_abs());
    a.max_abs_diff(b) / scale
}

fn require_density(model: &RestrictionModel) -> Result<(), FrameworkError> {
    let check = density_check(model, crate::tolerances::DENSITY_TOL)?;
    if check.passed {
        Ok(())
    } else {
        Err(FrameworkError::DensityViolated { sigma_min: check.sigma_min })
    }
}

/// Assembles `B_K = (I + KL)·L_K` and `B_K⁻¹ = (L⁻¹ + K)·(I + KL)⁻¹`.
pub fn make_perturbed(model: &RestrictionModel) -> Result<PerturbedPair, FrameworkError> {
    require_density(model)?;
    let n = model.dim();
    let (l, kl) = model.operator_and_kl()?;
    let lk_inv = model.l_inv.add(&model.k)?;
    let transfer = kl.plus_identity();
    let transfer_inv = checked_inverse(&transfer, FrameworkError::DensityViolated { sigma_min: 0.0 })?;
    let bk_inv = mat_mul(&lk_inv, &transfer_inv)?;
    let (bk, lk) = match &l {
        // L_K⁻¹ = (I + KL)·L⁻¹, so L_K = L·(I + KL)⁻¹ without a second inversion;
        // with K = 0 this returns L itself
        Some(l) => {
            let lk = mat_mul(l, &transfer_inv)?;
            let bk = mat_mul(&transfer, &lk)?;
            (Some(bk), Some(lk))
        }
        None => (None, None),
    };
    debug_assert_eq!(bk_inv.rows(), n);
    Ok(PerturbedPair {
        bk,
        bk_inv,
        lk,
        lk_inv,
        kl,
        reference_l: l,
        reference_l_inv: model.l_inv.clone(),
        transfer,
        transfer_inv,
    })
}

/// Assembles the adjoint `B_K* = L_K*·(I + L*K*)` against the reference `L*`.
pub fn make_perturbed_adjoint(model: &RestrictionModel) -> Result<PerturbedPair, FrameworkError> {
    require_density(model)?;
    let (l, kl) = model.operator_and_kl()?;
    let lstar_kstar = kl.adjoint();
    let factor = lstar_kstar.plus_identity();
    let factor_inv = checked_inverse(&factor, FrameworkError::DensityViolated { sigma_min: 0.0 })?;
    let lk_inv_adj = model.l_inv.add(&model.k)?.adjoint();
    let bk_inv = mat_mul(&factor_inv, &lk_inv_adj)?;
    let (bk, lk_adj) = match &l {
        Some(_) => {
            let lk_adj = checked_inverse(&lk_inv_adj, FrameworkError::LkNotCorrect)?;
            (Some(mat_mul(&lk_adj, &factor)?), Some(lk_adj))
        }
        None => (None, None),
    };
    Ok(PerturbedPair {
        bk,
        bk_inv,
        lk: lk_adj,
        lk_inv: lk_inv_adj,
        kl: lstar_kstar,
        reference_l: l.map(|m| m.adjoint()),
        reference_l_inv: model.l_inv.adjoint(),
        // B* = (I + L*K*)⁻¹ L* (I + L*K*)
        transfer: factor_inv,
        transfer_inv: factor,
    })
}
