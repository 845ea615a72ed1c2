use std::f64::consts::PI;

use crate::numcore::DenseMatrix;

use super::LaplaceError;

/// Interior nodes `(i·h, j·h)`, `i, j = 1..n`, `h = 1/(n+1)`, of the unit
/// square, flattened with `i` (the `x` index) fastest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectGrid {
    pub n: usize,
    pub h: f64,
}

impl RectGrid {
    pub fn new(n: usize) -> Result<Self, LaplaceError> {
        if n < 2 {
            return Err(LaplaceError::InvalidGrid(format!("need at least 2 interior nodes per axis, got {n}")));
        }
        Ok(Self { n, h: 1.0 / (n + 1) as f64 })
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Flat index of node `(i, j)`, both in `1..=n`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        (j - 1) * self.n + (i - 1)
    }

    /// `(x, y)` of flat index `k`.
    pub fn point(&self, k: usize) -> (f64, f64) {
        let i = k % self.n + 1;
        let j = k / self.n + 1;
        (i as f64 * self.h, j as f64 * self.h)
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    /// Samples `f` on the interior nodes.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.points().map(|(x, y)| f(x, y)).collect()
    }
}

/// Five-point `−Δ` with homogeneous Dirichlet data eliminated.
pub fn assemble_dirichlet_fd(grid: &RectGrid) -> DenseMatrix {
    let n = grid.n;
    let inv_h2 = 1.0 / (grid.h * grid.h);
    let mut a = DenseMatrix::zeros(grid.len(), grid.len());
    for j in 1..=n {
        for i in 1..=n {
            let k = grid.index(i, j);
            a[(k, k)] = (4.0 * inv_h2).into();
            if i > 1 {
                a[(k, grid.index(i - 1, j))] = (-inv_h2).into();
            }
            if i < n {
                a[(k, grid.index(i + 1, j))] = (-inv_h2).into();
            }
            if j > 1 {
                a[(k, grid.index(i, j - 1))] = (-inv_h2).into();
            }
            if j < n {
                a[(k, grid.index(i, j + 1))] = (-inv_h2).into();
            }
        }
    }
    a
}

/// One mode of the discrete sine basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SineMode {
    pub m: usize,
    pub k: usize,
    pub eigenvalue: f64,
    /// Unit 2-norm samples `sin(mπx)·sin(kπy)`.
    pub vector: Vec<f64>,
}

/// `(4/h²)(sin²(mπh/2) + sin²(kπh/2))`.
pub fn dirichlet_eigenvalue(grid: &RectGrid, m: usize, k: usize) -> f64 {
    let s = |p: usize| (p as f64 * PI * grid.h / 2.0).sin().powi(2);
    4.0 / (grid.h * grid.h) * (s(m) + s(k))
}

/// All `n²` eigenvalues of the five-point operator, ascending.
pub fn dirichlet_spectrum(grid: &RectGrid) -> Vec<f64> {
    let mut v: Vec<f64> = (1..=grid.n)
        .flat_map(|m| (1..=grid.n).map(move |k| (m, k)))
        .map(|(m, k)| dirichlet_eigenvalue(grid, m, k))
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// The `count` lowest sine modes, ordered by eigenvalue then `(m, k)`.
pub fn lowest_sine_modes(grid: &RectGrid, count: usize) -> Vec<SineMode> {
    let mut idx: Vec<(usize, usize)> = (1..=grid.n).flat_map(|m| (1..=grid.n).map(move |k| (m, k))).collect();
    idx.sort_by(|a, b| {
        dirichlet_eigenvalue(grid, a.0, a.1)
            .total_cmp(&dirichlet_eigenvalue(grid, b.0, b.1))
            .then(a.cmp(b))
    });
    let norm = 2.0 / (grid.n + 1) as f64;
    idx.into_iter()
        .take(count)
        .map(|(m, k)| SineMode {
            m,
            k,
            eigenvalue: dirichlet_eigenvalue(grid, m, k),
            vector: grid
                .sample(|x, y| norm * (m as f64 * PI * x).sin() * (k as f64 * PI * y).sin()),
        })
        .collect()
}
