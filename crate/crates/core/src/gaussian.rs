//! Fermionic Gaussian states described by their Majorana covariance matrix.
//!
//! Convention: `Γ_ij = (i/2) Tr(ρ [R_i, R_j])`. In the Jordan–Wigner chain
//! the single-mode vacuum `|0⟩⟨0|` has `Γ_12 = −1`, and the product form
//! `½(𝟙 + iλ R_1 R_2)` has `Γ_12 = λ`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{self, c, Operator, I};

const ANTISYMMETRY_TOL: f64 = 1e-10;

fn antisymmetric_part(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() % 2 == 1 {
        return Err(Error::OddDimension(m.nrows()));
    }
    let defect = linalg::max_abs(&(m + m.transpose()));
    if defect > ANTISYMMETRY_TOL * linalg::max_abs(m).max(1.0) {
        return Err(Error::NotAntisymmetric(defect));
    }
    Ok((m - m.transpose()) * c(0.5))
}

/// Pfaffian of an antisymmetric matrix.
///
/// Matrices up to 4×4 use the permutation sum; larger ones use skew
/// elimination with pivoting. Input is antisymmetrized first.
pub fn pfaffian(m: &DMatrix<Complex64>) -> Result<Complex64> {
    let a = antisymmetric_part(m)?;
    if a.nrows() <= 4 {
        Ok(permutation_sum(&a))
    } else {
        Ok(skew_elimination(a))
    }
}

/// Pfaffian by Parlett–Reid style elimination (`A = L T Lᵗ`) with pivoting.
pub fn pfaffian_elimination(m: &DMatrix<Complex64>) -> Result<Complex64> {
    Ok(skew_elimination(antisymmetric_part(m)?))
}

/// Pfaffian by the defining sum over all permutations of `2n` indices with
/// weight `1/(2^n n!)`. Cost grows like `(2n)!`; limited to 12×12.
pub fn pfaffian_permutation_sum(m: &DMatrix<Complex64>) -> Result<Complex64> {
    let a = antisymmetric_part(m)?;
    if a.nrows() > 12 {
        return Err(Error::DimensionMismatch {
            expected: 12,
            found: a.nrows(),
        });
    }
    Ok(permutation_sum(&a))
}

/// Pfaffian of a real antisymmetric matrix.
pub fn pfaffian_real(m: &DMatrix<f64>) -> Result<f64> {
    Ok(pfaffian(&m.map(c))?.re)
}

fn permutation_sum(a: &DMatrix<Complex64>) -> Complex64 {
    let dim = a.nrows();
    if dim == 0 {
        return c(1.0);
    }
    let n = dim / 2;
    let mut perm: Vec<usize> = (0..dim).collect();
    let term = |p: &[usize]| -> Complex64 { (0..n).map(|j| a[(p[2 * j], p[2 * j + 1])]).product() };
    // Heap's algorithm: every swap flips the sign.
    let mut sum = term(&perm);
    let mut sign = 1.0;
    let mut counters = vec![0usize; dim];
    let mut i = 1;
    while i < dim {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign = -sign;
            sum += term(&perm) * sign;
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    let norm: f64 = (1..=n).map(|k| 2.0 * k as f64).product();
    sum / norm
}

fn skew_elimination(mut a: DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    let mut pf = c(1.0);
    let mut k = 0;
    while k + 1 < n {
        let (offset, _) = (k + 1..n)
            .map(|r| (r, a[(r, k)].norm()))
            .fold((k + 1, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if offset != k + 1 {
            a.swap_rows(k + 1, offset);
            a.swap_columns(k + 1, offset);
            pf = -pf;
        }
        let pivot = a[(k, k + 1)];
        if pivot == c(0.0) {
            return c(0.0);
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<Complex64> = (k + 2..n).map(|j| a[(k, j)] / pivot).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// Real antisymmetric `2N×2N` Majorana covariance with operator norm ≤ 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceMatrix {
    gamma: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(gamma: DMatrix<f64>) -> Result<Self> {
        if gamma.nrows() != gamma.ncols() {
            return Err(Error::NotSquare {
                rows: gamma.nrows(),
                cols: gamma.ncols(),
            });
        }
        if gamma.nrows() == 0 || gamma.nrows() % 2 == 1 {
            return Err(Error::OddDimension(gamma.nrows()));
        }
        let defect = (&gamma + gamma.transpose()).amax();
        if defect > 1e-12 {
            return Err(Error::NotAntisymmetric(defect));
        }
        let gamma = (&gamma - gamma.transpose()) * 0.5;
        let norm = gamma.clone().singular_values().max();
        if norm > 1.0 + 1e-10 {
            return Err(Error::InvalidCovariance(norm));
        }
        Ok(Self { gamma })
    }

    pub fn zero(n_modes: usize) -> Self {
        Self {
            gamma: DMatrix::zeros(2 * n_modes, 2 * n_modes),
        }
    }

    /// Covariance with the given normal-form values in the standard frame.
    pub fn from_lambdas(lambdas: &[f64]) -> Result<Self> {
        let n = lambdas.len();
        let mut g = DMatrix::zeros(2 * n, 2 * n);
        for (k, &l) in lambdas.iter().enumerate() {
            g[(2 * k, 2 * k + 1)] = l;
            g[(2 * k + 1, 2 * k)] = -l;
        }
        Self::new(g)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn n_modes(&self) -> usize {
        self.gamma.nrows() / 2
    }

    pub fn operator_norm(&self) -> f64 {
        self.gamma.clone().singular_values().max()
    }

    /// `‖ΓᵗΓ − 𝟙‖_∞`, zero exactly for pure states.
    pub fn purity_defect(&self) -> f64 {
        let g = &self.gamma;
        (g.transpose() * g - DMatrix::identity(g.nrows(), g.nrows())).amax()
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.gamma.nrows(), other.gamma.nrows());
        let mut g = DMatrix::zeros(a + b, a + b);
        g.view_mut((0, 0), (a, a)).copy_from(&self.gamma);
        g.view_mut((a, a), (b, b)).copy_from(&other.gamma);
        Self { gamma: g }
    }

    /// `λ·Γ_A + (1 − λ)·Γ_B`.
    pub fn mix(lambda: f64, a: &Self, b: &Self) -> Result<Self> {
        Self::new(&a.gamma * lambda + &b.gamma * (1.0 - lambda))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.gamma * factor)
    }

    pub fn block_diagonal(&self) -> BlockDiagonalForm {
        block_diagonalize(self)
    }

    /// Normal-form values `λ_j ≥ 0`, sorted descending.
    pub fn lambdas(&self) -> Vec<f64> {
        let mut l = self.block_diagonal().lambdas;
        l.sort_by(|a, b| b.total_cmp(a));
        l
    }
}

/// `O Γ Oᵗ = ⊕_j [[0, λ_j], [−λ_j, 0]]` with `λ_j ≥ 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockDiagonalForm {
    pub rotation: DMatrix<f64>,
    pub lambdas: Vec<f64>,
    pub det: f64,
}

impl BlockDiagonalForm {
    /// Largest entry of `OΓOᵗ` minus the block-diagonal normal form.
    pub fn residual(&self, gamma: &CovarianceMatrix) -> f64 {
        let o = &self.rotation;
        let mut r = o * gamma.matrix() * o.transpose();
        for (k, &l) in self.lambdas.iter().enumerate() {
            r[(2 * k, 2 * k + 1)] -= l;
            r[(2 * k + 1, 2 * k)] += l;
        }
        r.amax()
    }
}

/// Block-diagonalizes `Γ` through the Hermitian eigenproblem of `iΓ`.
///
/// An eigenvector `x + iy` of `iΓ` with eigenvalue `μ > 0` gives
/// `Γx = μy`, `Γy = −μx`, so the rows `(√2 y, √2 x)` carry the block
/// `[[0, μ], [−μ, 0]]`. Null directions are completed by Gram–Schmidt.
pub fn block_diagonalize(gamma: &CovarianceMatrix) -> BlockDiagonalForm {
    let g = gamma.matrix();
    let dim = g.nrows();
    let n = dim / 2;
    let ig: DMatrix<Complex64> = g.map(|x| I * x);
    let (vals, vecs) = linalg::hermitian_eigen(&ig);

    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(dim);
    for k in (0..dim).rev().take(n) {
        if vals[k] <= 1e-10 {
            break;
        }
        let v = vecs.column(k);
        let x = DVector::from_iterator(dim, v.iter().map(|z| z.re * std::f64::consts::SQRT_2));
        let y = DVector::from_iterator(dim, v.iter().map(|z| z.im * std::f64::consts::SQRT_2));
        rows.push(y);
        rows.push(x);
    }
    let mut basis = gram_schmidt(rows);
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = DVector::zeros(dim);
        v[e] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let p = b.dot(&v);
                v -= b * p;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / norm);
        }
    }

    let mut o = DMatrix::zeros(dim, dim);
    for (r, b) in basis.iter().enumerate() {
        o.set_row(r, &b.transpose());
    }
    let mut lambdas = Vec::with_capacity(n);
    for k in 0..n {
        let l = o.row(2 * k).dot(&(g * o.row(2 * k + 1).transpose()).transpose());
        if l < 0.0 {
            o.swap_rows(2 * k, 2 * k + 1);
            lambdas.push(-l);
        } else {
            lambdas.push(l);
        }
    }
    let det = o.determinant();
    BlockDiagonalForm {
        rotation: o,
        lambdas: lambdas.into_iter().map(|l| l.min(1.0)).collect(),
        det,
    }
}

fn gram_schmidt(vs: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vs.len());
    for mut v in vs {
        for _ in 0..2 {
            for b in &out {
                let p = b.dot(&v);
                v -= b * p;
            }
        }
        let norm = v.norm();
        out.push(v / norm);
    }
    out
}

/// Hermitian, positive semidefinite, unit-trace matrix on `2^N` dimensions.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: Operator,
    even_parity: bool,
}

fn parity_commutator_defect(m: &Operator) -> f64 {
    // The parity operator is diagonal with entries (−1)^{popcount}.
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if (i.count_ones() + j.count_ones()) % 2 == 1 {
                worst = worst.max(2.0 * m[(i, j)].norm());
            }
        }
    }
    worst
}

impl DensityMatrix {
    /// Validates and Hermitizes a candidate state.
    pub fn new(matrix: Operator) -> Result<Self> {
        let d = linalg::ensure_square(&matrix)?;
        linalg::ensure_finite(&matrix)?;
        if d < 2 || !d.is_power_of_two() {
            return Err(Error::InvalidState(format!("dimension {d} is not 2^N with N ≥ 1")));
        }
        let herm = linalg::hermitian_defect(&matrix);
        if herm > 1e-12 {
            return Err(Error::NotHermitian(herm));
        }
        let matrix = (&matrix + matrix.adjoint()) * c(0.5);
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = linalg::hermitian_eigenvalues(&matrix)[0];
        if min < -1e-12 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        let even_parity = parity_commutator_defect(&matrix) < 1e-12;
        Ok(Self { matrix, even_parity })
    }

    pub fn maximally_mixed(n_modes: usize) -> Self {
        let d = 1usize << n_modes;
        Self {
            matrix: linalg::identity(d) * c(1.0 / d as f64),
            even_parity: true,
        }
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn into_matrix(self) -> Operator {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn is_even(&self) -> bool {
        self.even_parity
    }

    pub fn parity_defect(&self) -> f64 {
        parity_commutator_defect(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Convex combination `p·self + (1 − p)·other`.
    pub fn mix(&self, p: f64, other: &Self) -> Result<Self> {
        linalg::ensure_dim(other.matrix(), self.dim())?;
        Self::new(&self.matrix * c(p) + &other.matrix * c(1.0 - p))
    }
}

/// `Γ_ij = (i/2) Tr(ρ [R_i, R_j])`.
pub fn covariance_of(alg: &CliffordAlgebra, rho: &DensityMatrix) -> Result<CovarianceMatrix> {
    alg.check(rho.matrix())?;
    let g = alg.generators();
    let rho_r: Vec<Operator> = alg.majoranas().iter().map(|r| rho.matrix() * r).collect();
    let mut gamma = DMatrix::zeros(g, g);
    for i in 0..g {
        for j in (i + 1)..g {
            let tij = trace_of_product(&rho_r[i], alg.majorana(j));
            let tji = trace_of_product(&rho_r[j], alg.majorana(i));
            let v = (I * 0.5 * (tij - tji)).re;
            gamma[(i, j)] = v;
            gamma[(j, i)] = -v;
        }
    }
    CovarianceMatrix::new(gamma)
}

/// `Tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: &Operator, b: &Operator) -> Complex64 {
    let mut s = c(0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

/// Rotated Majoranas `R'_a = Σ_b O_ab R_b`.
fn rotated_majoranas(alg: &CliffordAlgebra, o: &DMatrix<f64>) -> Vec<Operator> {
    (0..alg.generators())
        .map(|a| {
            let mut acc = linalg::zeros(alg.dim());
            for b in 0..alg.generators() {
                if o[(a, b)] != 0.0 {
                    acc += alg.majorana(b) * c(o[(a, b)]);
                }
            }
            acc
        })
        .collect()
}

/// Gaussian state `∏_j ½(𝟙 + iλ_j R'_{2j−1} R'_{2j})` with the given covariance.
pub fn gaussian_from_covariance(alg: &CliffordAlgebra, gamma: &CovarianceMatrix) -> Result<DensityMatrix> {
    if gamma.n_modes() != alg.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: alg.generators(),
            found: gamma.matrix().nrows(),
        });
    }
    let form = gamma.block_diagonal();
    let rp = rotated_majoranas(alg, &form.rotation);
    let mut rho = alg.identity().clone();
    for (k, &l) in form.lambdas.iter().enumerate() {
        let factor = (alg.identity() + &rp[2 * k] * &rp[2 * k + 1] * (I * l)) * c(0.5);
        rho *= factor;
    }
    DensityMatrix::new(rho)
}

/// The same state written as `exp(i Σ_j artanh(λ_j) R'_{2j−1} R'_{2j})`,
/// normalized. Only defined when every `λ_j < 1`.
pub fn gaussian_exp_form(alg: &CliffordAlgebra, gamma: &CovarianceMatrix) -> Result<DensityMatrix> {
    let form = gamma.block_diagonal();
    if form.lambdas.iter().any(|&l| l >= 1.0 - 1e-12) {
        return Err(Error::Singular);
    }
    let g = alg.generators();
    let mut d = DMatrix::zeros(g, g);
    for (k, &l) in form.lambdas.iter().enumerate() {
        d[(2 * k, 2 * k + 1)] = l.atanh();
        d[(2 * k + 1, 2 * k)] = -l.atanh();
    }
    let k = form.rotation.transpose() * d * &form.rotation;
    // Σ H_ij R_j R_i = (i/2) Σ K_ab R_a R_b with β = 2.
    let h = k.map(|x| -I * 0.5 * x);
    gibbs_state(alg, &h, 2.0)
}

/// Thermal state `e^{(β/2)⟨R,HR⟩} / Tr(·)` of a Hermitian self-dual `H`.
///
/// In the Majorana frame the antiunitary involution is complex conjugation,
/// so self-duality of a Hermitian `H` reads `Hᵗ = −H`.
pub fn gibbs_state(alg: &CliffordAlgebra, h: &DMatrix<Complex64>, beta: f64) -> Result<DensityMatrix> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidState(format!(
            "inverse temperature {beta} must be positive"
        )));
    }
    let scale = linalg::max_abs(h).max(1.0);
    let herm = linalg::hermitian_defect(h);
    if herm > 1e-12 * scale {
        return Err(Error::NotHermitian(herm));
    }
    let dual = linalg::max_abs(&(h + h.transpose()));
    if dual > 1e-12 * scale {
        return Err(Error::NotSelfDual(dual));
    }
    let bil = alg.bilinear_element(h)? * c(beta / 2.0);
    let (vals, vecs) = linalg::hermitian_eigen(&bil);
    let top = vals.last().copied().unwrap_or(0.0);
    let weights: Vec<Complex64> = vals.iter().map(|&v| c((v - top).exp())).collect();
    let z: f64 = weights.iter().map(|w| w.re).sum();
    let rho = crate::linalg::spectral_rebuild(&weights, &vecs) * c(1.0 / z);
    DensityMatrix::new(rho)
}

/// Sorts a Majorana word with anticommutation signs and cancels equal
/// neighbours through `R_j² = 𝟙`. Returns the sign and the reduced,
/// strictly increasing word.
pub fn reduce_word(indices: &[usize]) -> (f64, Vec<usize>) {
    let mut w = indices.to_vec();
    let mut sign = 1.0;
    // insertion sort; each transposition of distinct generators flips the sign
    for i in 1..w.len() {
        let mut k = i;
        while k > 0 && w[k - 1] > w[k] {
            w.swap(k - 1, k);
            sign = -sign;
            k -= 1;
        }
    }
    let mut out: Vec<usize> = Vec::with_capacity(w.len());
    for x in w {
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    (sign, out)
}

/// Pair matrix `𝕆_kl = ω(R_{i_k} R_{i_l})` for `k < l`, antisymmetrized.
/// For a Gaussian state `ω(R_a R_b) = δ_ab − iΓ_ab`.
pub fn pair_matrix(gamma: &CovarianceMatrix, indices: &[usize]) -> DMatrix<Complex64> {
    let m = indices.len();
    let g = gamma.matrix();
    DMatrix::from_fn(m, m, |k, l| {
        let two_point = |a: usize, b: usize| {
            if a == b {
                c(1.0)
            } else {
                -I * g[(a, b)]
            }
        };
        match k.cmp(&l) {
            std::cmp::Ordering::Less => two_point(indices[k], indices[l]),
            std::cmp::Ordering::Greater => -two_point(indices[l], indices[k]),
            std::cmp::Ordering::Equal => c(0.0),
        }
    })
}

/// Pfaffian prediction for `Tr(ρ R_{i_1} ⋯ R_{i_k})` from covariance data.
///
/// Repeated generators are first removed with `R_j² = 𝟙` after sorting the
/// word (tracking anticommutation signs); the Pfaffian of the pair matrix of
/// the remaining distinct generators is returned. Odd words give zero.
pub fn wick_from_covariance(gamma: &CovarianceMatrix, indices: &[usize]) -> Result<Complex64> {
    let g = gamma.matrix().nrows();
    if let Some(&bad) = indices.iter().find(|&&j| j >= g) {
        return Err(Error::MajoranaIndex {
            index: bad,
            n_modes: gamma.n_modes(),
        });
    }
    if indices.len() % 2 == 1 {
        return Ok(c(0.0));
    }
    let (sign, reduced) = reduce_word(indices);
    Ok(pfaffian(&pair_matrix(gamma, &reduced))? * sign)
}

/// Pfaffian prediction for a Gaussian state (covariance read off `ρ`).
pub fn wick_moment(alg: &CliffordAlgebra, rho: &DensityMatrix, indices: &[usize]) -> Result<Complex64> {
    let gamma = covariance_of(alg, rho)?;
    wick_from_covariance(&gamma, indices)
}

/// Direct evaluation of `Tr(ρ R_{i_1} ⋯ R_{i_k})`.
pub fn direct_moment(alg: &CliffordAlgebra, rho: &DensityMatrix, indices: &[usize]) -> Result<Complex64> {
    alg.check(rho.matrix())?;
    let word = alg.product(indices)?;
    Ok(trace_of_product(rho.matrix(), &word))
}

/// Largest Wick defect over every strictly increasing word of the given
/// lengths.
pub fn wick_defect(alg: &CliffordAlgebra, rho: &DensityMatrix, lengths: &[usize]) -> Result<f64> {
    let gamma = covariance_of(alg, rho)?;
    let g = alg.generators();
    let mut worst: f64 = 0.0;
    for mask in 0u64..(1 << g) {
        if !lengths.contains(&(mask.count_ones() as usize)) {
            continue;
        }
        let word: Vec<usize> = (0..g).filter(|j| mask >> j & 1 == 1).collect();
        let predicted = wick_from_covariance(&gamma, &word)?;
        let direct = trace_of_product(rho.matrix(), &alg.monomial(mask));
        worst = worst.max((predicted - direct).norm());
    }
    Ok(worst)
}

/// One-particle symbol together with its constraint defects.
#[derive(Clone, Debug)]
pub struct SymbolReport {
    pub matrix: DMatrix<Complex64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// `max(0, −min, max − 1)`: violation of `0 ≤ S ≤ 𝟙`.
    pub bounds_defect: f64,
    /// `‖S + 𝔄S𝔄 − 𝟙‖_∞`.
    pub complement_defect: f64,
}

/// Field operator `B(e_k)` for the one-particle basis
/// `(ψ_1, …, ψ_N, 𝔄ψ_1, …, 𝔄ψ_N)`: `a_k = (R_{2k−1} + iR_{2k})/2` for the
/// first half and `a_k*` for the second.
pub fn field_operator(alg: &CliffordAlgebra, k: usize) -> Operator {
    let n = alg.n_modes();
    let (mode, phase) = if k < n { (k, I) } else { (k - n, -I) };
    (alg.majorana(2 * mode) + alg.majorana(2 * mode + 1) * phase) * c(0.5)
}

/// Coefficients `T` with `B(e_k) = Σ_j T_kj R_j`.
pub fn field_coefficients(n_modes: usize) -> DMatrix<Complex64> {
    let mut t = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        t[(k, 2 * k)] = c(0.5);
        t[(k, 2 * k + 1)] = I * 0.5;
        t[(n_modes + k, 2 * k)] = c(0.5);
        t[(n_modes + k, 2 * k + 1)] = -I * 0.5;
    }
    t
}

/// Matrix of `𝔄 S 𝔄`, where `𝔄` conjugates coordinates and swaps the two
/// halves of the one-particle basis.
pub fn involution_conjugate(s: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = s.nrows() / 2;
    let swap = |k: usize| if k < n { k + n } else { k - n };
    DMatrix::from_fn(s.nrows(), s.ncols(), |i, j| s[(swap(i), swap(j))].conj())
}

/// Symbol `⟨e_k, S e_l⟩ = ω(B(e_k) B(𝔄e_l))` evaluated directly from `ρ`.
pub fn symbol_of(alg: &CliffordAlgebra, rho: &DensityMatrix) -> Result<SymbolReport> {
    alg.check(rho.matrix())?;
    let g = alg.generators();
    let n = alg.n_modes();
    let fields: Vec<Operator> = (0..g).map(|k| field_operator(alg, k)).collect();
    let swap = |k: usize| if k < n { k + n } else { k - n };
    let s = DMatrix::from_fn(g, g, |k, l| {
        trace_of_product(&(rho.matrix() * &fields[k]), &fields[swap(l)])
    });
    Ok(symbol_report(s))
}

fn symbol_report(s: DMatrix<Complex64>) -> SymbolReport {
    let eig = linalg::hermitian_eigenvalues(&s);
    let (min, max) = (eig[0], *eig.last().unwrap());
    let id = DMatrix::<Complex64>::identity(s.nrows(), s.ncols());
    let complement_defect = linalg::max_abs_diff(&(&s + involution_conjugate(&s)), &id);
    SymbolReport {
        min_eigenvalue: min,
        max_eigenvalue: max,
        bounds_defect: 0.0f64.max(-min).max(max - 1.0),
        complement_defect,
        matrix: s,
    }
}

/// Affine map from covariance to symbol: `S = ½𝟙 − i T Γ T*`.
pub fn symbol_from_covariance(gamma: &CovarianceMatrix) -> DMatrix<Complex64> {
    let n = gamma.n_modes();
    let t = field_coefficients(n);
    let g = gamma.matrix().map(c);
    DMatrix::<Complex64>::identity(2 * n, 2 * n) * c(0.5) - &t * g * t.adjoint() * I
}
