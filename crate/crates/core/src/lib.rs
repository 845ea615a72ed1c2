//! Spectrum-preserving perturbations `B_K = (I + KL) L_K` of correct
//! restrictions, assembled at finite discretization and checked numerically.

pub mod framework;
pub mod laplace2d;
pub mod numcore;
pub mod tolerances;
pub mod volterra1d;
