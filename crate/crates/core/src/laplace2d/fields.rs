use std::fmt;
use std::str::FromStr;

use crate::numcore::{c, re, solve, Complex64, DenseMatrix};

use super::grid::{assemble_dirichlet_fd, RectGrid};
use super::LaplaceError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HarmonicKind {
    Constant,
    /// `Re zᵖ`
    RePower(u32),
    /// `Im zᵖ`
    ImPower(u32),
}

impl HarmonicKind {
    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            Self::Constant => 1.0,
            Self::RePower(p) => c(x, y).powu(p).re,
            Self::ImPower(p) => c(x, y).powu(p).im,
        }
    }

    /// Bound on `max|∂⁴_x ω| + max|∂⁴_y ω|` over the unit square, which
    /// controls the five-point defect `(h²/12)(ω_xxxx + ω_yyyy)`.
    fn fourth_derivative_bound(self) -> f64 {
        match self {
            Self::Constant => 0.0,
            Self::RePower(p) | Self::ImPower(p) if p < 4 => 0.0,
            Self::RePower(p) | Self::ImPower(p) => {
                let p = p as f64;
                2.0 * p * (p - 1.0) * (p - 2.0) * (p - 3.0) * 2f64.sqrt().powf(p - 4.0)
            }
        }
    }
}

impl fmt::Display for HarmonicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant => write!(f, "constant"),
            Self::RePower(p) => write!(f, "re_power({p})"),
            Self::ImPower(p) => write!(f, "im_power({p})"),
        }
    }
}

impl FromStr for HarmonicKind {
    type Err = LaplaceError;

    /// `constant`, `re_power(p)` or `im_power(p)` with `p ≥ 1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "constant" {
            return Ok(Self::Constant);
        }
        let bad = || LaplaceError::InvalidWeight(format!("{s:?}: expected constant, re_power(p) or im_power(p)"));
        let open = s.find('(').ok_or_else(bad)?;
        let p: u32 = s[open + 1..].strip_suffix(')').ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        if p == 0 {
            return Err(bad());
        }
        match &s[..open] {
            "re_power" => Ok(Self::RePower(p)),
            "im_power" => Ok(Self::ImPower(p)),
            _ => Err(bad()),
        }
    }
}

/// Samples of a harmonic `ω` on the interior nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicWeight {
    pub kind: HarmonicKind,
    pub values: Vec<Complex64>,
}

impl HarmonicWeight {
    pub fn new(grid: &RectGrid, kind: HarmonicKind) -> Self {
        Self { kind, values: grid.sample(|x, y| kind.eval(x, y)).into_iter().map(re).collect() }
    }

    pub fn constant(grid: &RectGrid) -> Self {
        Self::new(grid, HarmonicKind::Constant)
    }

    /// `max |Δ_h ω|` over interior nodes, with the stencil reaching the exact
    /// boundary values of `ω`.
    pub fn harmonic_defect(&self, grid: &RectGrid) -> f64 {
        let h = grid.h;
        let w = |x: f64, y: f64| self.kind.eval(x, y);
        grid.points()
            .map(|(x, y)| ((w(x + h, y) + w(x - h, y) + w(x, y + h) + w(x, y - h) - 4.0 * w(x, y)) / (h * h)).abs())
            .fold(0.0, f64::max)
    }

    /// `C·h²` with `C` from the fourth-derivative bound, plus round-off of
    /// the stencil itself.
    pub fn harmonic_defect_bound(&self, grid: &RectGrid) -> f64 {
        let h = grid.h;
        let scale = self.values.iter().map(|v| v.norm()).fold(1.0, f64::max);
        self.kind.fourth_derivative_bound() / 12.0 * h * h + 64.0 * f64::EPSILON * scale / (h * h)
    }
}

/// Zeros `z_k` of the monic polynomial `F(z) = Π (z − z_k)^{m_k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSet {
    pub zeros: Vec<(Complex64, u32)>,
}

impl ZeroSet {
    pub fn new(zeros: Vec<(Complex64, u32)>) -> Result<Self, LaplaceError> {
        for &(z, m) in &zeros {
            if m == 0 {
                return Err(LaplaceError::InvalidZeros(format!("multiplicity of {z} must be positive")));
            }
            if !z.is_finite() {
                return Err(LaplaceError::InvalidZeros("zeros must be finite".into()));
            }
        }
        Ok(Self { zeros })
    }

    pub fn empty() -> Self {
        Self { zeros: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Smallest distance of any zero to `∂Ω` and to any interior node.
    pub fn margins(&self, grid: &RectGrid) -> (f64, f64) {
        let mut to_boundary = f64::INFINITY;
        let mut to_node = f64::INFINITY;
        for &(z, _) in &self.zeros {
            to_boundary = to_boundary.min(z.re.min(1.0 - z.re).min(z.im).min(1.0 - z.im));
            to_node = to_node.min(nearest_node_distance(grid, z));
        }
        (to_boundary, to_node)
    }

    /// Every zero at least `4h` inside and at least `h/4` from every node.
    pub fn validate(&self, grid: &RectGrid) -> Result<(), LaplaceError> {
        for &(z, _) in &self.zeros {
            let boundary = z.re.min(1.0 - z.re).min(z.im).min(1.0 - z.im);
            if boundary < 4.0 * grid.h {
                return Err(LaplaceError::InvalidZeros(format!(
                    "zero {z} lies {boundary:.3e} from the boundary, less than 4h = {:.3e}",
                    4.0 * grid.h
                )));
            }
            let d = nearest_node_distance(grid, z);
            if d < grid.h / 4.0 {
                return Err(LaplaceError::ZeroNearNode { zero: z, distance: d, limit: grid.h / 4.0 });
            }
        }
        Ok(())
    }

    /// `ln|F(z)| = Σ m_k ln|z − z_k|`.
    pub fn log_abs(&self, z: Complex64) -> f64 {
        self.zeros.iter().map(|&(zk, m)| m as f64 * (z - zk).norm().ln()).sum()
    }

    /// `∇ ln|F| = (Re(F′/F), −Im(F′/F))` with `F′/F = Σ m_k/(z − z_k)`.
    pub fn grad_log_abs(&self, z: Complex64) -> (f64, f64) {
        let r: Complex64 = self.zeros.iter().map(|&(zk, m)| re(m as f64) / (z - zk)).sum();
        (r.re, -r.im)
    }
}

fn nearest_node_distance(grid: &RectGrid, z: Complex64) -> f64 {
    let h = grid.h;
    let clamp = |t: f64| ((t / h).round() as i64).clamp(1, grid.n as i64) as f64 * h;
    let mut best = f64::INFINITY;
    // the nearest node is the rounded one or a neighbour of it after clamping
    for di in -1..=1 {
        for dj in -1..=1 {
            let x = (clamp(z.re) + di as f64 * h).clamp(h, grid.n as f64 * h);
            let y = (clamp(z.im) + dj as f64 * h).clamp(h, grid.n as f64 * h);
            best = best.min((c(x, y) - z).norm());
        }
    }
    best
}

/// `ln|F|` on the interior nodes.
pub fn eval_log_abs_f(grid: &RectGrid, zeros: &ZeroSet) -> Result<Vec<f64>, LaplaceError> {
    zeros.validate(grid)?;
    Ok(grid.points().map(|(x, y)| zeros.log_abs(c(x, y))).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelSource {
    /// `g = sin(πx)·sin(πy)` scaled, with analytic `Δg`.
    Explicit,
    /// `A_D g = ln|F|`.
    PoissonLogF,
}

/// Kernel `g` (zero on `∂Ω`) and samples of `Δg`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelG {
    pub values: Vec<Complex64>,
    pub laplacian_values: Vec<Complex64>,
    pub source: KernelSource,
}

impl KernelG {
    pub fn zero(grid: &RectGrid) -> Self {
        Self {
            values: vec![re(0.0); grid.len()],
            laplacian_values: vec![re(0.0); grid.len()],
            source: KernelSource::Explicit,
        }
    }

    /// `g = amp·sin(πx)·sin(πy)`, `Δg = −2π²g`.
    pub fn explicit_sine(grid: &RectGrid, amp: f64) -> Self {
        let pi2 = std::f64::consts::PI.powi(2);
        let g = grid.sample(|x, y| amp * (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin());
        Self {
            laplacian_values: g.iter().map(|v| re(-2.0 * pi2 * v)).collect(),
            values: g.into_iter().map(re).collect(),
            source: KernelSource::Explicit,
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * t).collect(),
            laplacian_values: self.laplacian_values.iter().map(|v| v * t).collect(),
            source: self.source,
        }
    }
}

/// Solves `A_D g = ln|F|` (the discrete form of `−Δg = ln|F|`, `g = 0` on `∂Ω`).
pub fn solve_poisson_log_f(grid: &RectGrid, zeros: &ZeroSet) -> Result<KernelG, LaplaceError> {
    solve_poisson_with(grid, zeros, &assemble_dirichlet_fd(grid))
}

pub(crate) fn solve_poisson_with(grid: &RectGrid, zeros: &ZeroSet, a_d: &DenseMatrix) -> Result<KernelG, LaplaceError> {
    let log_f = eval_log_abs_f(grid, zeros)?;
    if zeros.is_empty() {
        return Ok(KernelG { source: KernelSource::PoissonLogF, ..KernelG::zero(grid) });
    }
    let rhs = DenseMatrix::column(&log_f.iter().map(|v| re(*v)).collect::<Vec<_>>());
    let g = solve(a_d, &rhs)?.col_vec(0);
    Ok(KernelG {
        values: g,
        laplacian_values: log_f.iter().map(|v| re(-v)).collect(),
        source: KernelSource::PoissonLogF,
    })
}
