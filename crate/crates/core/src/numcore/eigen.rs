use std::cmp::Ordering;

use num_complex::Complex64;

use super::{mat_mul, DenseMatrix, LinalgError};
use crate::tolerances::EIG_TOL;

/// Eigenpairs of a general square matrix in canonical order.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Sorted lexicographically by (real, imaginary).
    pub values: Vec<Complex64>,
    /// Column k is a unit eigenvector for `values[k]`, phase-normalized so its
    /// largest-magnitude entry is real and positive.
    pub vectors: DenseMatrix,
    /// `‖A v_k − λ_k v_k‖₂` per pair.
    pub residuals: Vec<f64>,
    /// Norm scale the residual contract was checked against.
    pub scale: f64,
}

impl EigenDecomposition {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Pairs whose residual exceeds `eig_tol * scale`; non-empty typically
    /// means a defective (Jordan) structure.
    pub fn flagged(&self) -> Vec<usize> {
        let bound = EIG_TOL * self.scale.max(f64::MIN_POSITIVE);
        self.residuals
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > bound)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn is_defective_suspect(&self) -> bool {
        !self.flagged().is_empty()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Lexicographic (re, im) order used for every reported spectrum.
pub fn canonical_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

pub fn sort_canonical(values: &mut [Complex64]) {
    values.sort_by(canonical_cmp);
}

/// Eigenvalues and eigenvectors of a general complex matrix.
///
/// The matrix is first permuted to isolate eigenvalues that sit on a
/// triangular border (so triangular inputs get their diagonal back exactly),
/// then radix-2 scaled, then handed to a Hessenberg/Schur solver.
pub fn eig_general(a: &DenseMatrix) -> Result<EigenDecomposition, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { op: "eig_general", shape: a.shape() });
    }
    a.check_finite("eig_general")?;
    let n = a.rows();
    let perm = isolating_permutation(a);
    let mut work = DenseMatrix::from_fn(n, n, |i, j| a[(perm.order[i], perm.order[j])]);
    let scaling = balance_scaling(&mut work, perm.ilo, perm.ihi);

    let (raw_values, raw_vectors) = if is_upper_triangular(&work) {
        // nothing left to iterate on; diagonal is the spectrum
        triangular_eigenpairs(&work)
    } else {
        let evd = work.to_faer().eigen().map_err(|_| LinalgError::NoConvergence {
            sweeps: crate::tolerances::EIG_MAX_SWEEPS_PER_N * n,
        })?;
        let s = evd.S();
        let u = evd.U();
        let values: Vec<Complex64> = (0..n).map(|k| s[k]).collect();
        (values, DenseMatrix::from_faer(u))
    };

    // undo scaling and permutation
    let mut vectors = DenseMatrix::zeros(n, n);
    for k in 0..n {
        for i in 0..n {
            vectors[(perm.order[i], k)] = raw_vectors[(i, k)] * scaling[i];
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| canonical_cmp(&raw_values[x], &raw_values[y]).then(x.cmp(&y)));
    let values: Vec<Complex64> = order.iter().map(|&k| raw_values[k]).collect();
    let mut sorted = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut v = vectors.col_vec(src);
        normalize_phase(&mut v);
        sorted.set_col(dst, &v);
    }

    for v in &values {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(LinalgError::NoConvergence {
                sweeps: crate::tolerances::EIG_MAX_SWEEPS_PER_N * n,
            });
        }
    }

    let av = mat_mul(a, &sorted)?;
    let residuals = (0..n)
        .map(|k| {
            (0..n)
                .map(|i| (av[(i, k)] - values[k] * sorted[(i, k)]).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();

    Ok(EigenDecomposition {
        values,
        vectors: sorted,
        residuals,
        scale: a.norm_2_lower_bound(),
    })
}

/// Eigenvalues only, canonical order.
pub fn eigenvalues(a: &DenseMatrix) -> Result<Vec<Complex64>, LinalgError> {
    Ok(eig_general(a)?.values)
}

/// Scales `v` to unit 2-norm and rotates its largest entry onto the positive real axis.
pub fn normalize_phase(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return;
    }
    let mut pivot = 0;
    let mut best = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        // strict comparison keeps the first index among exact ties
        if m > best {
            best = m;
            pivot = i;
        }
    }
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z = *z * phase / norm;
    }
    v[pivot] = Complex64::new(v[pivot].norm(), 0.0);
}

struct Isolation {
    order: Vec<usize>,
    ilo: usize,
    ihi: usize,
}

/// Permutation bringing `a` to block upper-triangular form
/// `[[T1, *, *], [0, B, *], [0, 0, T2]]` with `T1`, `T2` upper triangular.
/// `ilo..ihi` is the range of the central block `B`.
fn isolating_permutation(a: &DenseMatrix) -> Isolation {
    let n = a.rows();
    let zero = Complex64::new(0.0, 0.0);
    let mut active = vec![true; n];
    let mut row_cnt = vec![0usize; n];
    let mut col_cnt = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] != zero {
                row_cnt[i] += 1;
                col_cnt[j] += 1;
            }
        }
    }
    let mut top = Vec::new();
    let mut bottom = Vec::new();
    let deactivate = |k: usize, active: &mut [bool], row_cnt: &mut [usize], col_cnt: &mut [usize]| {
        active[k] = false;
        for m in 0..n {
            if !active[m] {
                continue;
            }
            if a[(m, k)] != zero {
                row_cnt[m] -= 1;
            }
            if a[(k, m)] != zero {
                col_cnt[m] -= 1;
            }
        }
    };
    loop {
        if let Some(i) = (0..n).rev().find(|&i| active[i] && row_cnt[i] == 0) {
            bottom.push(i);
            deactivate(i, &mut active, &mut row_cnt, &mut col_cnt);
            continue;
        }
        if let Some(j) = (0..n).find(|&j| active[j] && col_cnt[j] == 0) {
            top.push(j);
            deactivate(j, &mut active, &mut row_cnt, &mut col_cnt);
            continue;
        }
        break;
    }
    let ilo = top.len();
    let mut order = top;
    order.extend((0..n).filter(|&k| active[k]));
    let ihi = order.len();
    order.extend(bottom.into_iter().rev());
    Isolation { order, ilo, ihi }
}

/// Radix-2 diagonal scaling of the central block, in place. Returns the
/// diagonal `d` with `work = D⁻¹ A D`, so eigenvectors map back as `D y`.
fn balance_scaling(work: &mut DenseMatrix, ilo: usize, ihi: usize) -> Vec<f64> {
    let n = work.rows();
    let mut d = vec![1.0f64; n];
    if ihi <= ilo + 1 {
        return d;
    }
    const RADIX: f64 = 2.0;
    let mut converged = false;
    let mut iterations = 0;
    while !converged && iterations < 64 {
        converged = true;
        iterations += 1;
        for i in ilo..ihi {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in ilo..ihi {
                if j != i {
                    c += work[(j, i)].norm();
                    r += work[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / RADIX {
                cc *= RADIX;
                rr /= RADIX;
                f *= RADIX;
            }
            while cc >= rr * RADIX {
                cc /= RADIX;
                rr *= RADIX;
                f /= RADIX;
            }
            if (cc + rr) < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    work[(j, i)] *= f;
                }
                for j in 0..n {
                    work[(i, j)] /= f;
                }
            }
        }
    }
    d
}

fn is_upper_triangular(a: &DenseMatrix) -> bool {
    let zero = Complex64::new(0.0, 0.0);
    (1..a.rows()).all(|i| (0..i).all(|j| a[(i, j)] == zero))
}

/// Eigenpairs of an upper-triangular matrix by back substitution.
fn triangular_eigenpairs(t: &DenseMatrix) -> (Vec<Complex64>, DenseMatrix) {
    let n = t.rows();
    let values: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let small = f64::EPSILON * t.max_abs().max(f64::MIN_POSITIVE);
    let mut vectors = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = values[k];
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        x[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * x[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            x[i] = -s / denom;
        }
        let m = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m.is_finite() && m > 0.0 {
            for z in x.iter_mut() {
                *z /= m;
            }
        } else {
            x = vec![Complex64::new(0.0, 0.0); n];
            x[k] = Complex64::new(1.0, 0.0);
        }
        vectors.set_col(k, &x);
    }
    (values, vectors)
}
