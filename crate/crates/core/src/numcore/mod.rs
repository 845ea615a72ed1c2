//! Dense complex linear algebra: products, LU solves, general eigenpairs,
//! singular values and power-norm sequences.

mod eigen;
mod lu;
mod matrix;
mod norms;

pub use eigen::{canonical_cmp, eig_general, eigenvalues, normalize_phase, sort_canonical, EigenDecomposition};
pub use lu::{inverse, solve, LuFactor};
pub use matrix::{mat_mul, DenseMatrix};
pub use norms::{condition_number_2, norm_2, power_norm_sequence, similar_power_norm_sequence, singular_values};

pub use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("{op}: shape mismatch {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op}: expected a square matrix, got {shape:?}")]
    NotSquare { op: &'static str, shape: (usize, usize) },
    #[error("matrix is numerically singular: pivot {pivot} has magnitude {magnitude:e}")]
    Singular { pivot: usize, magnitude: f64 },
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("{op}: non-finite entries")]
    NonFinite { op: &'static str },
    #[error("{0}")]
    InvalidArgument(String),
}

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Euclidean norm of a vector.
pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `yᴴx`.
pub fn dot(y: &[Complex64], x: &[Complex64]) -> Complex64 {
    y.iter().zip(x).map(|(a, b)| a.conj() * b).sum()
}
