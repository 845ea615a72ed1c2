use crate::numcore::{mat_mul, DenseMatrix};

use super::model::{checked_inverse, RestrictionModel};
use super::perturbed::{make_perturbed, relative_diff};
use super::FrameworkError;

/// One operator identity evaluated as a matrix equation.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityResidual {
    pub name: &'static str,
    /// `max|lhs − rhs| / max(1, max|lhs|, max|rhs|)`.
    pub residual: f64,
}

/// Evaluates the restriction/extension identities for `model`.
///
/// `K·L_K` is formed as `I − (I + KL)⁻¹`, which exists for inverse-only
/// models too; identities that need `L` or `L_K` themselves are skipped there.
pub fn identity_suite(model: &RestrictionModel) -> Result<Vec<IdentityResidual>, FrameworkError> {
    let pair = make_perturbed(model)?;
    let n = model.dim();
    let id = DenseMatrix::identity(n);
    let mut out = Vec::new();
    let mut push = |name, lhs: &DenseMatrix, rhs: &DenseMatrix| {
        out.push(IdentityResidual {
            name,
            residual: relative_diff(lhs, rhs),
        });
    };

    let kl = &pair.kl;
    let k_lk = pair.transfer_inv.identity_minus();
    let lstar_kstar = kl.adjoint();
    let lkstar_kstar = k_lk.adjoint();

    // the closure really is K·L on the range of L⁻¹
    push("k_equals_kl_l_inv", &model.k, &mat_mul(kl, &model.l_inv)?);

    // (L_K*)⁻¹ = (L*)⁻¹ (I + L*K*)
    let rhs = mat_mul(&model.l_inv.adjoint(), &lstar_kstar.plus_identity())?;
    push("adjoint_inverse_factorization", &pair.lk_inv.adjoint(), &rhs);

    // (L*)⁻¹ = (L_K*)⁻¹ (I − L_K*K*)
    let rhs = mat_mul(&pair.lk_inv.adjoint(), &lkstar_kstar.identity_minus())?;
    push("reference_adjoint_inverse_factorization", &model.l_inv.adjoint(), &rhs);

    // (I − L_K*K*)⁻¹ = I + L*K*
    let prod = mat_mul(&lkstar_kstar.identity_minus(), &lstar_kstar.plus_identity())?;
    push("adjoint_factor_inverse", &prod, &id);

    // (I − KL_K)⁻¹ = I + KL
    let prod = mat_mul(&k_lk.identity_minus(), &kl.plus_identity())?;
    push("closure_factor_inverse", &prod, &id);

    // (I − KL_K) L_K⁻¹ = L⁻¹
    let lhs = mat_mul(&k_lk.identity_minus(), &pair.lk_inv)?;
    push("restriction_inverse_reduction", &lhs, &model.l_inv);

    // B_K⁻¹ = L_K⁻¹ (I − KL_K)
    let rhs = mat_mul(&pair.lk_inv, &k_lk.identity_minus())?;
    push("perturbed_inverse_factorization", &pair.bk_inv, &rhs);

    if let (Some(bk), Some(lk), Some(l)) = (&pair.bk, &pair.lk, &pair.reference_l) {
        // K L_K computed directly from L_K agrees with the closure route
        push("k_lk_direct", &mat_mul(&model.k, lk)?, &k_lk);

        // B_K* = L_K* (I + L*K*)
        let rhs = mat_mul(&lk.adjoint(), &lstar_kstar.plus_identity())?;
        push("adjoint_product_form", &bk.adjoint(), &rhs);

        // B_K = L_K⁻¹ L L_K
        let rhs = mat_mul(&mat_mul(&pair.lk_inv, l)?, lk)?;
        push("similarity", bk, &rhs);

        // forward and inverse assemblies agree
        let bk_inv_direct = checked_inverse(bk, FrameworkError::LkNotCorrect)?;
        push("inverse_consistency", &pair.bk_inv, &bk_inv_direct);
    }
    Ok(out)
}
