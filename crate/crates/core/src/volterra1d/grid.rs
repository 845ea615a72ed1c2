use crate::numcore::DenseMatrix;

use super::VolterraError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Nodes `x_j = j/n`, `j = 0..n−1`; integrals by the left-endpoint rule.
    LeftRectangle,
    /// Nodes `x_j = j/(n−1)`, `j = 0..n−1`; integrals by the trapezoid rule.
    Trapezoid,
}

/// Uniform grid on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D {
    pub n: usize,
    pub h: f64,
    pub nodes: Vec<f64>,
    pub scheme: Scheme,
}

impl Grid1D {
    pub fn new(n: usize, scheme: Scheme) -> Result<Self, VolterraError> {
        if n < 4 {
            return Err(VolterraError::InvalidGrid(format!("need at least 4 nodes, got {n}")));
        }
        let h = match scheme {
            Scheme::LeftRectangle => 1.0 / n as f64,
            Scheme::Trapezoid => 1.0 / (n - 1) as f64,
        };
        let nodes = (0..n).map(|j| j as f64 * h).collect();
        Ok(Self { n, h, nodes, scheme })
    }

    /// Points where the perturbation data is sampled: the nodes, plus `x = 1`
    /// for the left-rectangle grid (whose last node is `1 − h`).
    pub fn closure_nodes(&self) -> Vec<f64> {
        match self.scheme {
            Scheme::LeftRectangle => (0..=self.n).map(|j| j as f64 * self.h).collect(),
            Scheme::Trapezoid => self.nodes.clone(),
        }
    }
}

/// `(Jf)_i ≈ ∫₀^{x_i} f`. The left-rectangle matrix is `h` times the
/// strictly lower triangular ones matrix, hence nilpotent.
pub fn build_integration_matrix(grid: &Grid1D) -> DenseMatrix {
    let h = grid.h;
    match grid.scheme {
        Scheme::LeftRectangle => DenseMatrix::from_real_fn(grid.n, grid.n, |i, j| if j < i { h } else { 0.0 }),
        Scheme::Trapezoid => DenseMatrix::from_real_fn(grid.n, grid.n, |i, j| {
            if i == 0 || j > i {
                0.0
            } else if j == 0 || j == i {
                0.5 * h
            } else {
                h
            }
        }),
    }
}
