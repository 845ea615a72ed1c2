//! Central tolerance record. All values are relative unless noted.

/// Eigenpair residual bound, relative to `‖A‖₂`.
pub const EIG_TOL: f64 = 1e-10;
/// Smallest admissible LU pivot, relative to the largest entry of the matrix.
pub const PIVOT_TOL: f64 = 1e-13;
/// Default eigenvalue matching tolerance (scaled by the reference norm by callers).
pub const MATCH_TOL: f64 = 1e-8;
/// Eigenvalues below `ZERO_TOL * ‖A‖` are treated as zero when comparing nonzero spectra.
pub const ZERO_TOL: f64 = 1e-10;
/// Smallest singular value of `I + L*K*` accepted by the density check, relative to its norm.
pub const DENSITY_TOL: f64 = 1e-10;
/// Eigenvector transfer residual, relative to `‖B_K‖`.
pub const TRANSFER_TOL: f64 = 1e-8;
/// Residual budget for the operator identity suite.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Boundary-condition tolerance for sigma constraints (absolute).
pub const BC_TOL: f64 = 1e-12;
/// Distance from the excluded sigma(0) values that is still accepted (absolute).
pub const ADM_TOL: f64 = 1e-6;
/// Eigensolver sweep cap per matrix dimension.
pub const EIG_MAX_SWEEPS_PER_N: usize = 100;

/// Run-time tolerances that experiments may override.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub match_tol: f64,
    pub transfer_tol: f64,
    pub identity_tol: f64,
    pub density_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            match_tol: MATCH_TOL,
            transfer_tol: TRANSFER_TOL,
            identity_tol: IDENTITY_TOL,
            density_tol: DENSITY_TOL,
        }
    }
}
