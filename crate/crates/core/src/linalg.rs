//! Dense complex matrix helpers shared by the operator-level modules.
//!
//! Operators are `nalgebra` matrices over `Complex64`. Hermitian inputs go
//! through an eigendecomposition; everything else uses scaling and squaring
//! of the Taylor series.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense square complex matrix acting on a 2^N dimensional space.
pub type Operator = DMatrix<Complex64>;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> Operator {
    Operator::identity(dim, dim)
}

pub fn zeros(dim: usize) -> Operator {
    Operator::zeros(dim, dim)
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

pub fn anticommutator(a: &Operator, b: &Operator) -> Operator {
    a * b + b * a
}

/// Largest entry modulus.
pub fn max_abs(a: &Operator) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &Operator, b: &Operator) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn hermitian_defect(a: &Operator) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

/// Normalized trace `Tr(A) / dim`.
pub fn normalized_trace(a: &Operator) -> Complex64 {
    a.trace() / c(a.nrows() as f64)
}

/// Hilbert–Schmidt inner product with the normalized trace, antilinear in
/// the first slot.
pub fn hs_inner(a: &Operator, b: &Operator) -> Complex64 {
    // tr(A* B) = (1/d) sum_ij conj(A_ij) B_ij
    let s: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    s / c(a.nrows() as f64)
}

pub fn ensure_square(a: &Operator) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

pub fn ensure_dim(a: &Operator, dim: usize) -> Result<()> {
    let d = ensure_square(a)?;
    if d != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: d,
        });
    }
    Ok(())
}

pub fn ensure_finite(a: &Operator) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Eigendecomposition of the Hermitian part of `a`; eigenvalues ascending.
pub fn hermitian_eigen(a: &Operator) -> (Vec<f64>, Operator) {
    let h = (a + a.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let n = a.nrows();
    let mut vecs = Operator::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[k]);
        vecs.set_column(col, &eig.eigenvectors.column(k));
    }
    (vals, vecs)
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn hermitian_eigenvalues(a: &Operator) -> Vec<f64> {
    hermitian_eigen(a).0
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(a: &Operator, f: impl Fn(f64) -> f64) -> Operator {
    let (vals, vecs) = hermitian_eigen(a);
    spectral_rebuild(&vals.iter().map(|&x| c(f(x))).collect::<Vec<_>>(), &vecs)
}

pub(crate) fn spectral_rebuild(vals: &[Complex64], vecs: &Operator) -> Operator {
    let mut scaled = vecs.clone();
    for (k, v) in vals.iter().enumerate() {
        for x in scaled.column_mut(k).iter_mut() {
            *x *= v;
        }
    }
    scaled * vecs.adjoint()
}

fn one_norm(a: &Operator) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential.
///
/// Hermitian input is exponentiated through its eigendecomposition. Other
/// input is scaled by `2^-s` so that the 1-norm is at most 1/2, the Taylor
/// series is summed until a term falls below `1e-16` relative to the
/// partial sum, and the result is squared `s` times.
pub fn expm(a: &Operator) -> Result<Operator> {
    ensure_square(a)?;
    ensure_finite(a)?;
    let scale = max_abs(a).max(1.0);
    if hermitian_defect(a) <= 1e-14 * scale {
        return Ok(hermitian_function_complex(a, |x| c(x.exp())));
    }
    // Anti-Hermitian input gives a unitary; use the Hermitian route on iA.
    let ia = a * I;
    if hermitian_defect(&ia) <= 1e-14 * scale {
        let (vals, vecs) = hermitian_eigen(&(-ia));
        let phases: Vec<Complex64> = vals.iter().map(|&x| (I * x).exp()).collect();
        return Ok(spectral_rebuild(&phases, &vecs));
    }
    Ok(expm_series(a))
}

fn hermitian_function_complex(a: &Operator, f: impl Fn(f64) -> Complex64) -> Operator {
    let (vals, vecs) = hermitian_eigen(a);
    spectral_rebuild(&vals.iter().map(|&x| f(x)).collect::<Vec<_>>(), &vecs)
}

/// Scaling-and-squaring Taylor exponential, usable for any square input.
pub fn expm_series(a: &Operator) -> Operator {
    let n = a.nrows();
    let norm = one_norm(a);
    let mut s = 0u32;
    while norm / f64::from(1u32 << s.min(30)) > 0.5 && s < 60 {
        s += 1;
    }
    let scaled = a * c(0.5f64.powi(s as i32));
    let mut sum = identity(n);
    let mut term = identity(n);
    for k in 1..200 {
        term = &term * &scaled * c(1.0 / k as f64);
        sum += &term;
        if max_abs(&term) <= 1e-16 * max_abs(&sum) {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

/// Largest singular value.
pub fn operator_norm(a: &Operator) -> f64 {
    a.clone().singular_values().iter().copied().fold(0.0, f64::max)
}
