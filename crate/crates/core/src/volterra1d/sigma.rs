use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::numcore::{re, Complex64};
use crate::tolerances::{ADM_TOL, BC_TOL};

use super::grid::Grid1D;
use super::VolterraError;

/// Slope constant in the finite-difference consistency bound
/// `‖Dσ − σ′‖∞ ≤ FD_CONSISTENCY_C · h · (1 + ‖σ′‖∞)`.
pub const FD_CONSISTENCY_C: f64 = 10.0;

/// Built-in perturbation profiles with analytic derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum SigmaFamily {
    /// `a + b·x`
    Affine { a: f64, b: f64 },
    /// `Σ c_k x^k`
    Polynomial(Vec<f64>),
    /// `amp·sin(kπx)`
    Sine { k: f64, amp: f64 },
    /// `amp·cos(kπx)`
    Cosine { k: f64, amp: f64 },
}

impl SigmaFamily {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Affine { a, b } => a + b * x,
            Self::Polynomial(c) => c.iter().rev().fold(0.0, |acc, ck| acc * x + ck),
            Self::Sine { k, amp } => amp * (k * PI * x).sin(),
            Self::Cosine { k, amp } => amp * (k * PI * x).cos(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Self::Affine { b, .. } => *b,
            Self::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, ck)| acc * x + k as f64 * ck),
            Self::Sine { k, amp } => amp * k * PI * (k * PI * x).cos(),
            Self::Cosine { k, amp } => -amp * k * PI * (k * PI * x).sin(),
        }
    }
}

impl fmt::Display for SigmaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Affine { a, b } => write!(f, "affine({a},{b})"),
            Self::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "polynomial({})", parts.join(","))
            }
            Self::Sine { k, amp } => write!(f, "sine({k},{amp})"),
            Self::Cosine { k, amp } => write!(f, "cosine({k},{amp})"),
        }
    }
}

impl FromStr for SigmaFamily {
    type Err = VolterraError;

    /// Parses `name(p1,p2,...)`, e.g. `affine(1,-1)` or `sine(2,0.5)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| VolterraError::InvalidSigma(format!("{s:?}: {why}"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| bad("expected name(params)"))?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(|| bad("missing closing parenthesis"))?;
        let name = s[..open].trim().to_ascii_lowercase();
        let params = inner
            .split(',')
            .map(|p| p.trim().replace('\u{2212}', "-").parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|_| bad("parameters must be numbers"))?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(bad("parameters must be finite"));
        }
        let two = |params: &[f64]| -> Result<(f64, f64), VolterraError> {
            match params {
                [p, q] => Ok((*p, *q)),
                _ => Err(bad("expected two parameters")),
            }
        };
        match name.as_str() {
            "affine" => two(&params).map(|(a, b)| Self::Affine { a, b }),
            "polynomial" => Ok(Self::Polynomial(params)),
            "sine" => two(&params).map(|(k, amp)| Self::Sine { k, amp }),
            "cosine" => two(&params).map(|(k, amp)| Self::Cosine { k, amp }),
            _ => Err(bad("unknown family (affine, polynomial, sine, cosine)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaKind {
    /// `σ(1) = 0`, `σ(0) ≠ −1`.
    Cauchy,
    /// `σ(0) + σ(1) = 0`, `σ(0) ≠ −1/2`.
    Antiperiodic,
}

impl SigmaKind {
    /// The excluded value of `σ(0)`.
    pub fn critical_sigma0(self) -> f64 {
        match self {
            Self::Cauchy => -1.0,
            Self::Antiperiodic => -0.5,
        }
    }
}

/// Samples of `σ` and `σ′` on [`Grid1D::closure_nodes`].
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaSpec {
    pub sigma: Vec<Complex64>,
    pub sigma_prime: Vec<Complex64>,
    pub kind: SigmaKind,
    pub family: Option<SigmaFamily>,
}

impl SigmaSpec {
    /// Samples a family without validating it.
    pub fn sample(grid: &Grid1D, family: &SigmaFamily, kind: SigmaKind) -> Self {
        let x = grid.closure_nodes();
        Self {
            sigma: x.iter().map(|&t| re(family.value(t))).collect(),
            sigma_prime: x.iter().map(|&t| re(family.derivative(t))).collect(),
            kind,
            family: Some(family.clone()),
        }
    }

    pub fn from_family(grid: &Grid1D, family: &SigmaFamily, kind: SigmaKind) -> Result<Self, VolterraError> {
        let spec = Self::sample(grid, family, kind);
        spec.validate(grid)?;
        Ok(spec)
    }

    /// User-supplied samples on the closure nodes; `σ′` comes from
    /// second-order differences (centered inside, one-sided at the ends).
    pub fn from_samples(grid: &Grid1D, samples: Vec<Complex64>, kind: SigmaKind) -> Result<Self, VolterraError> {
        let m = grid.closure_nodes().len();
        if samples.len() != m {
            return Err(VolterraError::InvalidSigma(format!("expected {m} samples, got {}", samples.len())));
        }
        if samples.iter().any(|z| !z.is_finite()) {
            return Err(VolterraError::InvalidSigma("samples must be finite".into()));
        }
        let h = grid.h;
        let s = &samples;
        let sigma_prime = (0..m)
            .map(|i| {
                if i == 0 {
                    (s[0] * -3.0 + s[1] * 4.0 - s[2]) / (2.0 * h)
                } else if i == m - 1 {
                    (s[m - 1] * 3.0 - s[m - 2] * 4.0 + s[m - 3]) / (2.0 * h)
                } else {
                    (s[i + 1] - s[i - 1]) / (2.0 * h)
                }
            })
            .collect();
        let spec = Self { sigma: samples, sigma_prime, kind, family: None };
        spec.validate(grid)?;
        Ok(spec)
    }

    pub fn sigma0(&self) -> Complex64 {
        self.sigma[0]
    }

    pub fn sigma1(&self) -> Complex64 {
        *self.sigma.last().expect("non-empty samples")
    }

    /// Boundary condition, admissibility, and derivative consistency.
    pub fn validate(&self, grid: &Grid1D) -> Result<(), VolterraError> {
        let (bc, adm) = match self.kind {
            SigmaKind::Cauchy => (self.sigma1().norm(), (self.sigma0() + 1.0).norm()),
            SigmaKind::Antiperiodic => ((self.sigma0() + self.sigma1()).norm(), (self.sigma0() + 0.5).norm()),
        };
        if bc > BC_TOL {
            return Err(VolterraError::BoundaryCondition { kind: self.kind, residual: bc });
        }
        if adm < ADM_TOL {
            return Err(VolterraError::Inadmissible { kind: self.kind, sigma0: self.sigma0() });
        }
        let defect = self.fd_defect(grid);
        let tol = self.fd_tolerance(grid);
        if defect > tol {
            return Err(VolterraError::DerivativeMismatch { defect, tol });
        }
        Ok(())
    }

    /// `max |(σ_{i+1} − σ_{i−1})/2h − σ′_i|` over interior closure nodes.
    pub fn fd_defect(&self, grid: &Grid1D) -> f64 {
        let h = grid.h;
        let s = &self.sigma;
        (1..s.len() - 1)
            .map(|i| ((s[i + 1] - s[i - 1]) / (2.0 * h) - self.sigma_prime[i]).norm())
            .fold(0.0, f64::max)
    }

    pub fn fd_tolerance(&self, grid: &Grid1D) -> f64 {
        let dmax = self.sigma_prime.iter().map(|z| z.norm()).fold(0.0, f64::max);
        FD_CONSISTENCY_C * grid.h * (1.0 + dmax)
    }
}
