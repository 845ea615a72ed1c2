//! Correct restrictions `L_K⁻¹ = L⁻¹ + K`, the perturbed operators
//! `B_K = (I + KL)·L_K`, their adjoints, and the checks run on them.

mod identities;
mod model;
mod perturbed;
mod random;
mod spectral;

use thiserror::Error;

use crate::numcore::LinalgError;

pub use identities::{identity_suite, IdentityResidual};
pub use model::{density_check, density_determinant, make_lk_inv, DensityCheck, RestrictionModel};
pub use perturbed::{make_perturbed, make_perturbed_adjoint, relative_diff, PerturbedPair};
pub use random::{random_admissible_model, RandomModelSpec};
pub use spectral::{
    eigenvector_condition, eigvec_transfer_check, match_spectra, nonzero_spectra_match, quasinilpotence_report,
    riesz_diagnostic, spectra_match, transfer_check_with_basis, QuasinilpotenceReport, SpectralPair, SpectralReport,
};

#[derive(Debug, Error)]
pub enum FrameworkError {
    #[error("L⁻¹ is singular and the model carries no closure of K·L")]
    LInvSingular,
    #[error("L_K is not correct: L⁻¹ + K is singular")]
    LkNotCorrect,
    #[error("density condition violated: smallest singular value of I + L*K* is {sigma_min:.3e}")]
    DensityViolated { sigma_min: f64 },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
