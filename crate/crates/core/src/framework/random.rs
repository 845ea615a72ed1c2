use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numcore::{dot, mat_mul, norm_2, vec_norm, Complex64, DenseMatrix};

use super::model::{density_check, RestrictionModel};
use super::FrameworkError;

/// Parameters of the seeded random model family.
///
/// `L⁻¹ = U·(diag(μ) + εN)·Uᴴ` with `U` unitary, `|μ_k| ∈ [0.5, 2]`, `N`
/// strictly upper triangular with unit-scale entries, and `K = a·bᴴ`
/// rescaled to `‖K‖₂ = k_ratio·‖L⁻¹‖₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomModelSpec {
    pub n: usize,
    pub seed: u64,
    pub nonnormality: f64,
    pub k_ratio: f64,
}

impl RandomModelSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        Self { n, seed, nonnormality: 0.05, k_ratio: 0.1 }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

/// Unitary matrix from modified Gram–Schmidt (applied twice) on Gaussian columns.
pub(crate) fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = gaussian_vec(rng, n);
        for _ in 0..2 {
            for q in &cols {
                let p = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let norm = vec_norm(&v);
        if norm < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    DenseMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Draws one model from the seeded family. The draw is repeated (with the
/// same generator stream) until the density condition holds, which for the
/// default `k_ratio` happens on the first attempt.
pub fn random_admissible_model(spec: &RandomModelSpec) -> Result<RestrictionModel, FrameworkError> {
    let n = spec.n;
    if n == 0 {
        return Err(FrameworkError::InvalidModel("random model needs n ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..16 {
        let u = random_unitary(&mut rng, n);
        let mut core = DenseMatrix::zeros(n, n);
        for i in 0..n {
            let modulus: f64 = 0.5 * 4f64.powf(rng.random::<f64>());
            let angle: f64 = std::f64::consts::TAU * rng.random::<f64>();
            core[(i, i)] = Complex64::from_polar(modulus, angle);
            for j in i + 1..n {
                core[(i, j)] = gaussian(&mut rng) * (spec.nonnormality / (n as f64).sqrt());
            }
        }
        let l_inv = mat_mul(&mat_mul(&u, &core)?, &u.adjoint())?;
        let a = gaussian_vec(&mut rng, n);
        let b = gaussian_vec(&mut rng, n);
        let k_raw = DenseMatrix::outer(&a, &b);
        let scale = spec.k_ratio * norm_2(&l_inv)? / norm_2(&k_raw)?;
        let k = k_raw.scale_real(scale);
        let model = RestrictionModel::new(l_inv, k, 1.0 / n as f64, format!("random(n={n},seed={})", spec.seed))?;
        if density_check(&model, crate::tolerances::DENSITY_TOL)?.passed {
            return Ok(model);
        }
    }
    Err(FrameworkError::InvalidModel(format!("no admissible draw for seed {}", spec.seed)))
}
