use crate::numcore::{inverse, mat_mul, singular_values, DenseMatrix, LinalgError, LuFactor};

use super::FrameworkError;

/// A fixed correct operator (given through its inverse) together with the
/// bounded operator `K` that selects the restriction `L_K⁻¹ = L⁻¹ + K`.
#[derive(Clone, Debug)]
pub struct RestrictionModel {
    pub l_inv: DenseMatrix,
    pub k: DenseMatrix,
    /// Uniform quadrature weight `h`; the discrete inner product is `h·gᴴf`,
    /// so adjoints are plain conjugate transposes.
    pub weight: f64,
    pub label: String,
    /// Bounded closure of `K·L`, required when `l_inv` is singular (nilpotent
    /// Volterra discretizations). Must satisfy `k = kl_closure · l_inv`.
    pub kl_closure: Option<DenseMatrix>,
    /// `L` itself when the builder knows it exactly (e.g. the stencil matrix);
    /// otherwise it is recovered by inverting `l_inv`.
    pub operator: Option<DenseMatrix>,
}

impl RestrictionModel {
    pub fn new(
        l_inv: DenseMatrix,
        k: DenseMatrix,
        weight: f64,
        label: impl Into<String>,
    ) -> Result<Self, FrameworkError> {
        if !l_inv.is_square() {
            return Err(LinalgError::NotSquare { op: "RestrictionModel", shape: l_inv.shape() }.into());
        }
        if k.shape() != l_inv.shape() {
            return Err(LinalgError::ShapeMismatch {
                op: "RestrictionModel",
                left: l_inv.shape(),
                right: k.shape(),
            }
            .into());
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(FrameworkError::InvalidModel(format!("weight must be positive, got {weight}")));
        }
        l_inv.check_finite("RestrictionModel")?;
        k.check_finite("RestrictionModel")?;
        Ok(Self {
            l_inv,
            k,
            weight,
            label: label.into(),
            kl_closure: None,
            operator: None,
        })
    }

    /// Attaches the exactly known `L`. It must be the inverse of `l_inv`.
    pub fn with_operator(mut self, l: DenseMatrix) -> Result<Self, FrameworkError> {
        if l.shape() != self.l_inv.shape() {
            return Err(LinalgError::ShapeMismatch {
                op: "with_operator",
                left: self.l_inv.shape(),
                right: l.shape(),
            }
            .into());
        }
        l.check_finite("with_operator")?;
        self.operator = Some(l);
        Ok(self)
    }

    pub fn with_kl_closure(mut self, kl: DenseMatrix) -> Result<Self, FrameworkError> {
        if kl.shape() != self.l_inv.shape() {
            return Err(LinalgError::ShapeMismatch {
                op: "with_kl_closure",
                left: self.l_inv.shape(),
                right: kl.shape(),
            }
            .into());
        }
        kl.check_finite("with_kl_closure")?;
        self.kl_closure = Some(kl);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.l_inv.rows()
    }

    /// Same model with `K` replaced by `t·K` (and the closure scaled alike).
    pub fn scaled(&self, t: f64) -> Self {
        Self {
            l_inv: self.l_inv.clone(),
            k: self.k.scale_real(t),
            weight: self.weight,
            label: self.label.clone(),
            kl_closure: self.kl_closure.as_ref().map(|m| m.scale_real(t)),
            operator: self.operator.clone(),
        }
    }

    /// `(L, K·L)` when `l_inv` is invertible; `(None, closure)` otherwise.
    pub(crate) fn operator_and_kl(&self) -> Result<(Option<DenseMatrix>, DenseMatrix), FrameworkError> {
        if let Some(l) = &self.operator {
            let kl = mat_mul(&self.k, l)?;
            return Ok((Some(l.clone()), kl));
        }
        match LuFactor::new(&self.l_inv) {
            Ok(lu) => {
                let l = lu.solve(&DenseMatrix::identity(self.dim()))?;
                let kl = mat_mul(&self.k, &l)?;
                Ok((Some(l), kl))
            }
            Err(LinalgError::Singular { .. }) => match &self.kl_closure {
                Some(kl) => Ok((None, kl.clone())),
                None => Err(FrameworkError::LInvSingular),
            },
            Err(e) => Err(e.into()),
        }
    }
}

/// `L_K⁻¹ = L⁻¹ + K`.
pub fn make_lk_inv(model: &RestrictionModel) -> Result<DenseMatrix, FrameworkError> {
    Ok(model.l_inv.add(&model.k)?)
}

/// Outcome of the density-of-domain test `Ker(I + L*K*) = {0}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityCheck {
    pub passed: bool,
    /// Smallest singular value of `I + L*K*`.
    pub sigma_min: f64,
    /// Largest singular value of `I + L*K*`.
    pub sigma_max: f64,
}

/// Checks that `I + L*K*` is invertible: its smallest singular value must be
/// at least `density_tol · ‖I + L*K*‖₂`.
pub fn density_check(model: &RestrictionModel, density_tol: f64) -> Result<DensityCheck, FrameworkError> {
    let (_, kl) = model.operator_and_kl()?;
    // L*K* = (KL)* under the scalar-weight inner product
    let m = kl.adjoint().plus_identity();
    let s = singular_values(&m)?;
    let sigma_max = s.first().copied().unwrap_or(0.0);
    let sigma_min = s.last().copied().unwrap_or(0.0);
    Ok(DensityCheck {
        passed: sigma_min >= density_tol * sigma_max,
        sigma_min,
        sigma_max,
    })
}

/// Determinant of `I + L*K*`; changes sign (for real data) where the density
/// condition breaks down along a one-parameter family.
pub fn density_determinant(model: &RestrictionModel) -> Result<num_complex::Complex64, FrameworkError> {
    let (_, kl) = model.operator_and_kl()?;
    let m = kl.adjoint().plus_identity();
    match LuFactor::new(&m) {
        Ok(lu) => Ok(lu.determinant()),
        Err(LinalgError::Singular { .. }) => Ok(num_complex::Complex64::new(0.0, 0.0)),
        Err(e) => Err(e.into()),
    }
}

pub(crate) fn checked_inverse(a: &DenseMatrix, on_singular: FrameworkError) -> Result<DenseMatrix, FrameworkError> {
    match inverse(a) {
        Ok(m) => Ok(m),
        Err(LinalgError::Singular { .. }) => Err(on_singular),
        Err(e) => Err(e.into()),
    }
}
