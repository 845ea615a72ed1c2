use crate::framework::RestrictionModel;
use crate::numcore::{inverse, mat_mul, re, Complex64, DenseMatrix};

use super::grid::{build_integration_matrix, Grid1D, Scheme};
use super::sigma::{SigmaKind, SigmaSpec};
use super::VolterraError;

fn ones(n: usize) -> Vec<Complex64> {
    vec![re(1.0); n]
}

fn require(grid: &Grid1D, spec: &SigmaSpec, scheme: Scheme, kind: SigmaKind) -> Result<(), VolterraError> {
    if grid.scheme != scheme {
        return Err(VolterraError::SchemeMismatch { expected: scheme, got: grid.scheme });
    }
    if spec.kind != kind {
        return Err(VolterraError::InvalidSigma(format!("expected {kind:?} data, got {:?}", spec.kind)));
    }
    if spec.sigma.len() != grid.closure_nodes().len() {
        return Err(VolterraError::InvalidSigma("samples do not belong to this grid".into()));
    }
    Ok(())
}

/// Cauchy problem `y′ = f, y(0) = 0` perturbed by `Kf = 𝟙·∫ f σ̄`.
///
/// `L⁻¹ = J` is singular (nilpotent), so the model carries the closure of
/// `K·L` explicitly: with `m_i = σ(x_i) − σ(x_{i+1})` the row functional
/// `f ↦ Σ m̄_i f_i` (a discrete `−∫ f σ̄′`) satisfies `K = KL·J` exactly when
/// `K` samples `σ` at right endpoints.
pub fn build_cauchy_model(grid: &Grid1D, spec: &SigmaSpec) -> Result<RestrictionModel, VolterraError> {
    require(grid, spec, Scheme::LeftRectangle, SigmaKind::Cauchy)?;
    spec.validate(grid)?;
    assemble_cauchy(grid, spec)
}

/// Assembly without the admissibility checks, for probing excluded data.
pub fn assemble_cauchy(grid: &Grid1D, spec: &SigmaSpec) -> Result<RestrictionModel, VolterraError> {
    require(grid, spec, Scheme::LeftRectangle, SigmaKind::Cauchy)?;
    let n = grid.n;
    let h = grid.h;
    let s = &spec.sigma;
    let k_row: Vec<Complex64> = (0..n).map(|j| s[j + 1] * h).collect();
    let m: Vec<Complex64> = (0..n).map(|i| s[i] - s[i + 1]).collect();
    let k = DenseMatrix::outer(&ones(n), &k_row);
    let kl = DenseMatrix::outer(&ones(n), &m);
    let model = RestrictionModel::new(build_integration_matrix(grid), k, h, "cauchy")?.with_kl_closure(kl)?;
    Ok(model)
}

/// Anti-periodic shift: `(Sy)_i = y_{i+1}` with `y_N = −y_0`.
fn antiperiodic_shift(n: usize) -> DenseMatrix {
    DenseMatrix::from_real_fn(n, n, |i, j| {
        if j == i + 1 {
            1.0
        } else if i == n - 1 && j == 0 {
            -1.0
        } else {
            0.0
        }
    })
}

/// `y′ = f` with `y(0) + y(1) = 0`, trapezoid rule.
///
/// Unknowns are `y_0..y_{N−1}` at the first `N = n − 1` nodes (`y_N = −y_0`
/// is eliminated). The recurrence `y_{i+1} − y_i = h(f_i + f_{i+1})/2` gives
/// `L = (2/h)(S − I)(S + I)⁻¹`, a normal matrix.
pub fn build_antiperiodic_operator(grid: &Grid1D) -> Result<(DenseMatrix, DenseMatrix), VolterraError> {
    if grid.scheme != Scheme::Trapezoid {
        return Err(VolterraError::SchemeMismatch { expected: Scheme::Trapezoid, got: grid.scheme });
    }
    let nn = grid.n - 1;
    if nn % 2 == 1 {
        // S + I is singular when N is odd (S^N = −I has eigenvalue −1)
        return Err(VolterraError::InvalidGrid(format!("anti-periodic grid needs an odd node count, got {}", grid.n)));
    }
    let s = antiperiodic_shift(nn);
    let plus = s.plus_identity();
    let minus = s.sub(&DenseMatrix::identity(nn))?;
    let l = mat_mul(&minus, &inverse(&plus)?)?.scale_real(2.0 / grid.h);
    let l_inv = mat_mul(&plus, &inverse(&minus)?)?.scale_real(grid.h / 2.0);
    Ok((l, l_inv))
}

pub fn build_antiperiodic_model(grid: &Grid1D, spec: &SigmaSpec) -> Result<RestrictionModel, VolterraError> {
    require(grid, spec, Scheme::Trapezoid, SigmaKind::Antiperiodic)?;
    spec.validate(grid)?;
    assemble_antiperiodic(grid, spec)
}

pub fn assemble_antiperiodic(grid: &Grid1D, spec: &SigmaSpec) -> Result<RestrictionModel, VolterraError> {
    require(grid, spec, Scheme::Trapezoid, SigmaKind::Antiperiodic)?;
    let (l, l_inv) = build_antiperiodic_operator(grid)?;
    let nn = grid.n - 1;
    let k_row: Vec<Complex64> = spec.sigma[..nn].iter().map(|z| z * grid.h).collect();
    let k = DenseMatrix::outer(&ones(nn), &k_row);
    Ok(RestrictionModel::new(l_inv, k, grid.h, "antiperiodic")?.with_operator(l)?)
}

/// The model whose adjoint pair (through
/// [`make_perturbed_adjoint`](crate::framework::make_perturbed_adjoint))
/// realizes `B_K* v = −d/dx[v − σ′·∫v]`.
pub fn build_adjoint_example(grid: &Grid1D, spec: &SigmaSpec) -> Result<RestrictionModel, VolterraError> {
    match spec.kind {
        SigmaKind::Cauchy => build_cauchy_model(grid, spec),
        SigmaKind::Antiperiodic => build_antiperiodic_model(grid, spec),
    }
}
