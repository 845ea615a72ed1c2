use std::f64::consts::PI;

use crate::numcore::{c, re, Complex64, DenseMatrix};

use super::fields::{HarmonicWeight, ZeroSet};
use super::grid::RectGrid;
use super::LaplaceError;

/// `T u = ω · t(u)` with the scalar functional
/// `t(u) = ∮ [∂u/∂ν · ln|F| − u · ∂ln|F|/∂ν] ds` taken along the inward
/// normal `ν`. For Dirichlet fields only the first term survives, and
/// `∂u/∂ν ≈ (−3u_b + 4u₁ − u₂)/(2h)` with `u_b = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryOperator {
    /// Row vector of `t` acting on interior samples.
    pub functional: Vec<f64>,
    pub omega: Vec<Complex64>,
}

impl BoundaryOperator {
    pub fn apply_functional(&self, u: &[Complex64]) -> Complex64 {
        self.functional.iter().zip(u).map(|(t, v)| v * *t).sum()
    }

    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        let s = self.apply_functional(u);
        self.omega.iter().map(|w| w * s).collect()
    }

    /// Dense `ω·tᵀ`.
    pub fn matrix(&self) -> DenseMatrix {
        let row: Vec<Complex64> = self.functional.iter().map(|t| re(*t)).collect();
        DenseMatrix::outer(&self.omega, &row)
    }
}

/// The boundary nodes of each edge with their two inward neighbours, as
/// `(boundary point, first interior index, second interior index)`.
fn edge_stencils(grid: &RectGrid) -> Vec<((f64, f64), usize, usize)> {
    let n = grid.n;
    let h = grid.h;
    let mut out = Vec::with_capacity(4 * n);
    for t in 1..=n {
        let s = t as f64 * h;
        out.push(((0.0, s), grid.index(1, t), grid.index(2, t)));
        out.push(((1.0, s), grid.index(n, t), grid.index(n - 1, t)));
        out.push(((s, 0.0), grid.index(t, 1), grid.index(t, 2)));
        out.push(((s, 1.0), grid.index(t, n), grid.index(t, n - 1)));
    }
    out
}

/// Assembles `T`. Corner nodes carry zero normal derivative for Dirichlet
/// fields (both stencil neighbours lie on the boundary), so the trapezoid
/// rule reduces to weight `h` at the remaining boundary nodes.
pub fn build_boundary_t(grid: &RectGrid, omega: &HarmonicWeight, zeros: &ZeroSet) -> Result<BoundaryOperator, LaplaceError> {
    zeros.validate(grid)?;
    if grid.n < 2 {
        return Err(LaplaceError::InvalidGrid("one-sided normal differences need n ≥ 2".into()));
    }
    let h = grid.h;
    let mut functional = vec![0.0; grid.len()];
    if !zeros.is_empty() {
        for ((x, y), k1, k2) in edge_stencils(grid) {
            let w = h * zeros.log_abs(c(x, y)) / (2.0 * h);
            functional[k1] += 4.0 * w;
            functional[k2] -= w;
        }
    }
    Ok(BoundaryOperator { functional, omega: omega.values.clone() })
}

/// A test field with an analytic Laplacian and gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestField {
    /// `sin(pπx)·sin(qπy)`
    SineProduct { p: u32, q: u32 },
    /// `x(1−x)·y(1−y)`
    Bubble,
    /// `x²(1−x)²·y²(1−y)²`, with vanishing trace and normal derivative.
    FlatBubble,
    /// `1`, not a Dirichlet field; used by the flux identity.
    One,
}

impl TestField {
    pub const BUILT_IN: [TestField; 3] =
        [TestField::SineProduct { p: 1, q: 1 }, TestField::SineProduct { p: 1, q: 3 }, TestField::Bubble];

    pub fn value(self, x: f64, y: f64) -> f64 {
        match self {
            Self::SineProduct { p, q } => (p as f64 * PI * x).sin() * (q as f64 * PI * y).sin(),
            Self::Bubble => x * (1.0 - x) * y * (1.0 - y),
            Self::FlatBubble => (x * (1.0 - x) * y * (1.0 - y)).powi(2),
            Self::One => 1.0,
        }
    }

    pub fn laplacian(self, x: f64, y: f64) -> f64 {
        match self {
            Self::SineProduct { p, q } => -PI * PI * ((p * p + q * q) as f64) * self.value(x, y),
            Self::Bubble => -2.0 * (y * (1.0 - y) + x * (1.0 - x)),
            Self::FlatBubble => {
                let (a, b) = (x * (1.0 - x), y * (1.0 - y));
                // (a²)'' = 2a'² + 2a·a'' with a' = 1 − 2x, a'' = −2
                let d2 = |a: f64, t: f64| 2.0 * (1.0 - 2.0 * t).powi(2) - 4.0 * a;
                d2(a, x) * b * b + a * a * d2(b, y)
            }
            Self::One => 0.0,
        }
    }

    pub fn gradient(self, x: f64, y: f64) -> (f64, f64) {
        match self {
            Self::SineProduct { p, q } => {
                let (kp, kq) = (p as f64 * PI, q as f64 * PI);
                (kp * (kp * x).cos() * (kq * y).sin(), kq * (kp * x).sin() * (kq * y).cos())
            }
            Self::Bubble => ((1.0 - 2.0 * x) * y * (1.0 - y), x * (1.0 - x) * (1.0 - 2.0 * y)),
            Self::FlatBubble => {
                let (a, b) = (x * (1.0 - x), y * (1.0 - y));
                (2.0 * a * (1.0 - 2.0 * x) * b * b, a * a * 2.0 * b * (1.0 - 2.0 * y))
            }
            Self::One => (0.0, 0.0),
        }
    }

    pub fn sample(self, grid: &RectGrid) -> Vec<Complex64> {
        grid.points().map(|(x, y)| re(self.value(x, y))).collect()
    }
}

/// `t(u)` from exact boundary data of an analytic field, by the trapezoid
/// rule with `samples` intervals per edge. Includes the `u·∂ln|F|/∂ν` term,
/// so it also applies to fields with a nonzero trace.
pub fn boundary_functional_exact(zeros: &ZeroSet, field: TestField, samples: usize) -> f64 {
    let step = 1.0 / samples as f64;
    let mut total = 0.0;
    // (point on the edge, inward normal) as functions of the edge parameter
    let edges: [(fn(f64) -> (f64, f64), (f64, f64)); 4] = [
        (|s| (0.0, s), (1.0, 0.0)),
        (|s| (1.0, s), (-1.0, 0.0)),
        (|s| (s, 0.0), (0.0, 1.0)),
        (|s| (s, 1.0), (0.0, -1.0)),
    ];
    for (at, (nx, ny)) in edges {
        for q in 0..=samples {
            let (x, y) = at(q as f64 * step);
            let wq = if q == 0 || q == samples { 0.5 } else { 1.0 } * step;
            let (ux, uy) = field.gradient(x, y);
            let (lx, ly) = zeros.grad_log_abs(c(x, y));
            let du = ux * nx + uy * ny;
            let dl = lx * nx + ly * ny;
            total += wq * (du * zeros.log_abs(c(x, y)) - field.value(x, y) * dl);
        }
    }
    total
}

/// Bilinear interpolation of interior samples, with zero boundary values.
pub fn bilinear_interpolate(grid: &RectGrid, u: &[Complex64], z: Complex64) -> Result<Complex64, LaplaceError> {
    if !(0.0..=1.0).contains(&z.re) || !(0.0..=1.0).contains(&z.im) {
        return Err(LaplaceError::InvalidZeros(format!("cannot interpolate at {z}, outside the unit square")));
    }
    let n = grid.n;
    let h = grid.h;
    let at = |i: usize, j: usize| -> Complex64 {
        if i == 0 || j == 0 || i > n || j > n {
            re(0.0)
        } else {
            u[grid.index(i, j)]
        }
    };
    let fx = z.re / h;
    let fy = z.im / h;
    let i0 = (fx.floor() as usize).min(n);
    let j0 = (fy.floor() as usize).min(n);
    let tx = fx - i0 as f64;
    let ty = fy - j0 as f64;
    Ok(at(i0, j0) * ((1.0 - tx) * (1.0 - ty))
        + at(i0 + 1, j0) * (tx * (1.0 - ty))
        + at(i0, j0 + 1) * ((1.0 - tx) * ty)
        + at(i0 + 1, j0 + 1) * (tx * ty))
}

/// Both sides of `h²·Σ (Δu)·ln|F| = 2π·Σ m_k·u(z_k) − t(u)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreensSplit {
    pub n: usize,
    pub lhs: f64,
    pub point_term: f64,
    pub boundary_term: f64,
    pub discrepancy: f64,
}

pub fn greens_split_check(grid: &RectGrid, zeros: &ZeroSet, field: TestField) -> Result<GreensSplit, LaplaceError> {
    zeros.validate(grid)?;
    let h2 = grid.h * grid.h;
    let lhs: f64 = grid.points().map(|(x, y)| field.laplacian(x, y) * zeros.log_abs(c(x, y))).sum::<f64>() * h2;
    let u = field.sample(grid);
    let mut point_term = 0.0;
    for &(zk, m) in &zeros.zeros {
        point_term += 2.0 * PI * m as f64 * bilinear_interpolate(grid, &u, zk)?.re;
    }
    let t = build_boundary_t(grid, &HarmonicWeight::constant(grid), zeros)?;
    let boundary_term = t.apply_functional(&u).re;
    Ok(GreensSplit {
        n: grid.n,
        lhs,
        point_term,
        boundary_term,
        discrepancy: (lhs - (point_term - boundary_term)).abs(),
    })
}
