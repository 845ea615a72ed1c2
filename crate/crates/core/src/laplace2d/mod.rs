//! The five-point Dirichlet Laplacian on the unit square, perturbed by
//! `Kf = ω·∬ f ḡ` with `g` solving `−Δg = ln|F|`.

mod fields;
mod greens;
mod grid;
mod model;

use thiserror::Error;

use crate::framework::FrameworkError;
use crate::numcore::{Complex64, LinalgError};

pub use fields::{
    eval_log_abs_f, solve_poisson_log_f, HarmonicKind, HarmonicWeight, KernelG, KernelSource, ZeroSet,
};
pub use greens::{
    bilinear_interpolate, boundary_functional_exact, build_boundary_t, greens_split_check, BoundaryOperator,
    GreensSplit, TestField,
};
pub use grid::{assemble_dirichlet_fd, dirichlet_eigenvalue, dirichlet_spectrum, lowest_sine_modes, RectGrid, SineMode};
pub use model::{
    admissibility_2d, admissibility_for_model, assemble_laplace_model, build_k_2d, build_laplace_model, closed_form_spectrum_check,
    critical_scaling, forward_action_check, laplace_pair, resolve_transfer_sign, sine_basis_transfer_check,
    Admissibility2d, CriticalScaling, ForwardAction, TransferSign,
};

#[derive(Debug, Error)]
pub enum LaplaceError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("invalid zeros: {0}")]
    InvalidZeros(String),
    #[error("zero {zero} lies {distance:.3e} from a grid node, closer than {limit:.3e}")]
    ZeroNearNode { zero: Complex64, distance: f64, limit: f64 },
    #[error("inadmissible kernel: density check failed (sigma_min {sigma_min:.3e}, quadrature scalar {s_delta})")]
    Inadmissible { s_delta: Complex64, sigma_min: f64 },
    #[error("no sign change of the density determinant along the scaling family")]
    NoCriticalScaling,
    #[error(transparent)]
    Framework(#[from] FrameworkError),
}

impl From<LinalgError> for LaplaceError {
    fn from(e: LinalgError) -> Self {
        Self::Framework(e.into())
    }
}

#[cfg(test)]
mod tests;
