//! Seeded samplers for randomized verification.
//!
//! Every trial draws from its own ChaCha8 stream, selected by the trial index,
//! so sweeps give the same numbers however the trials are scheduled.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::clifford::CliffordAlgebra;
use crate::error::Result;
use crate::gaussian::{gaussian_from_covariance, CovarianceMatrix, DensityMatrix};
use crate::linalg::{c, Operator};

/// Upper end of the sampled `λ_j`, which keeps sampled Gaussians full rank.
pub const DEFAULT_MAX_LAMBDA: f64 = 0.95;

pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// signs of `diag R` fixed).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| normal(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn random_antisymmetric<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| normal(rng));
    &g - g.transpose()
}

pub fn random_complex_antisymmetric<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(normal(rng), normal(rng)));
    &g - g.transpose()
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(normal(rng), normal(rng)));
    (&g + g.adjoint()) * c(0.5)
}

/// `Oᵀ (⊕_j λ_j J) O` with Haar `O` and `λ_j` uniform on `[0, max_lambda]`.
pub fn random_covariance<R: Rng + ?Sized>(rng: &mut R, n_modes: usize, max_lambda: f64) -> Result<CovarianceMatrix> {
    let lambdas: Vec<f64> = (0..n_modes).map(|_| rng.random_range(0.0..=max_lambda)).collect();
    rotated_covariance(rng, &lambdas)
}

/// Random pure Gaussian covariance (`λ_j = 1`).
pub fn random_pure_covariance<R: Rng + ?Sized>(rng: &mut R, n_modes: usize) -> Result<CovarianceMatrix> {
    rotated_covariance(rng, &vec![1.0; n_modes])
}

fn rotated_covariance<R: Rng + ?Sized>(rng: &mut R, lambdas: &[f64]) -> Result<CovarianceMatrix> {
    let base = CovarianceMatrix::from_lambdas(lambdas)?;
    let o = random_orthogonal(rng, 2 * lambdas.len());
    let g = o.transpose() * base.matrix() * &o;
    CovarianceMatrix::new((&g - g.transpose()) * 0.5)
}

/// Full-rank Gaussian state together with its covariance.
pub fn random_gaussian_state<R: Rng + ?Sized>(
    alg: &CliffordAlgebra,
    rng: &mut R,
    max_lambda: f64,
) -> Result<(CovarianceMatrix, DensityMatrix)> {
    let gamma = random_covariance(rng, alg.n_modes(), max_lambda)?;
    let rho = gaussian_from_covariance(alg, &gamma)?;
    Ok((gamma, rho))
}

/// Even-parity state from the Ginibre ensemble: `WW*` restricted to its even
/// part, normalized. Generically full rank and not Gaussian.
pub fn random_even_state<R: Rng + ?Sized>(alg: &CliffordAlgebra, rng: &mut R) -> Result<DensityMatrix> {
    let d = alg.dim();
    let w = DMatrix::from_fn(d, d, |_, _| Complex64::new(normal(rng), normal(rng)));
    let mut m = &w * w.adjoint();
    for i in 0..d {
        for j in 0..d {
            if (i ^ j).count_ones() % 2 == 1 {
                m[(i, j)] = c(0.0);
            }
        }
    }
    let tr = m.trace();
    let m = m / tr;
    DensityMatrix::new((&m + m.adjoint()) * c(0.5))
}

/// Mixture `p ρ₁ + (1 − p) ρ₂` of two random Gaussians,
/// with `p` uniform on `[0.2, 0.8]`.
pub fn random_gaussian_mixture<R: Rng + ?Sized>(alg: &CliffordAlgebra, rng: &mut R) -> Result<DensityMatrix> {
    let (_, a) = random_gaussian_state(alg, rng, DEFAULT_MAX_LAMBDA)?;
    let (_, b) = random_gaussian_state(alg, rng, DEFAULT_MAX_LAMBDA)?;
    let p = rng.random_range(0.2..=0.8);
    a.mix(p, &b)
}

/// Random density matrix of the given rank (not parity restricted).
pub fn random_state_of_rank<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let w = DMatrix::from_fn(dim, rank, |_, _| Complex64::new(normal(rng), normal(rng)));
    let m = &w * w.adjoint();
    let tr = m.trace();
    let m = m / tr;
    DensityMatrix::new((&m + m.adjoint()) * c(0.5))
}

/// Uniform `λ` on `[lo, hi]`.
pub fn random_lambda<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..=hi)
}
