use faer::linalg::solvers::Solve;
use num_complex::Complex64;

use super::{DenseMatrix, LinalgError};
use crate::tolerances::PIVOT_TOL;

/// LU factorization with partial pivoting, validated against the pivot tolerance.
pub struct LuFactor {
    inner: faer::linalg::solvers::PartialPivLu<Complex64>,
    n: usize,
}

impl LuFactor {
    pub fn new(a: &DenseMatrix) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare { op: "lu", shape: a.shape() });
        }
        a.check_finite("lu")?;
        let n = a.rows();
        let inner = a.to_faer().partial_piv_lu();
        let threshold = PIVOT_TOL * a.max_abs();
        let u = inner.U();
        for k in 0..n {
            let pivot = u[(k, k)].norm();
            if pivot <= threshold || !pivot.is_finite() {
                return Err(LinalgError::Singular { pivot: k, magnitude: pivot });
            }
        }
        Ok(Self { inner, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if rhs.rows() != self.n {
            return Err(LinalgError::ShapeMismatch {
                op: "solve",
                left: (self.n, self.n),
                right: rhs.shape(),
            });
        }
        let x = self.inner.solve(rhs.to_faer().as_ref());
        let out = DenseMatrix::from_faer(x.as_ref());
        out.check_finite("solve")?;
        Ok(out)
    }

    /// Determinant from the LU factors.
    pub fn determinant(&self) -> Complex64 {
        let u = self.inner.U();
        let mut det = Complex64::new(1.0, 0.0);
        for k in 0..self.n {
            det *= u[(k, k)];
        }
        // parity of the row permutation
        let fwd = self.inner.P().arrays().0;
        let mut seen = vec![false; self.n];
        let mut transpositions = 0usize;
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = fwd[j];
                len += 1;
            }
            transpositions += len - 1;
        }
        if transpositions % 2 == 1 {
            -det
        } else {
            det
        }
    }
}

/// Solves `a x = rhs`. Fails with the failing pivot index when `a` is
/// numerically singular.
pub fn solve(a: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    LuFactor::new(a)?.solve(rhs)
}

pub fn inverse(a: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let lu = LuFactor::new(a)?;
    lu.solve(&DenseMatrix::identity(a.rows()))
}
