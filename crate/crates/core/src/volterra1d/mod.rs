//! Discretized first-order differentiation on `(0, 1)`: the Cauchy problem
//! (a Volterra inverse) and the anti-periodic problem (a normal operator),
//! each perturbed by `Kf = 𝟙·∫ f σ̄`.

mod checks;
mod grid;
mod models;
mod sigma;

use thiserror::Error;

use crate::framework::FrameworkError;
use crate::numcore::{Complex64, LinalgError};

pub use checks::{
    adjoint_action_residual, antiperiodic_inverse_eigenvalues, cauchy_boundary_residual, forward_action_residual,
    kl_closed_form_discrepancy, normal_case_check, normality_defect, volterra_certificate, AdjointActionCheck,
    NormalCaseReport, VolterraCertificate,
};
pub use grid::{build_integration_matrix, Grid1D, Scheme};
pub use models::{
    assemble_antiperiodic, assemble_cauchy, build_adjoint_example, build_antiperiodic_model,
    build_antiperiodic_operator, build_cauchy_model,
};
pub use sigma::{SigmaFamily, SigmaKind, SigmaSpec, FD_CONSISTENCY_C};

#[derive(Debug, Error)]
pub enum VolterraError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid sigma: {0}")]
    InvalidSigma(String),
    #[error("{kind:?} boundary condition on sigma violated by {residual:.3e}")]
    BoundaryCondition { kind: SigmaKind, residual: f64 },
    #[error("inadmissible sigma(0) = {sigma0} for {kind:?} data (excluded value {})", kind.critical_sigma0())]
    Inadmissible { kind: SigmaKind, sigma0: Complex64 },
    #[error("sigma' inconsistent with finite differences of sigma: defect {defect:.3e} > {tol:.3e}")]
    DerivativeMismatch { defect: f64, tol: f64 },
    #[error("scheme {got:?} not supported here, expected {expected:?}")]
    SchemeMismatch { expected: Scheme, got: Scheme },
    #[error(transparent)]
    Framework(#[from] FrameworkError),
}

impl From<LinalgError> for VolterraError {
    fn from(e: LinalgError) -> Self {
        Self::Framework(e.into())
    }
}

#[cfg(test)]
mod tests;
