//! Matrix representation of the Clifford algebra on `N` fermionic modes.
//!
//! The 2N Majorana operators are built along a Jordan–Wigner chain with
//! interleaved ordering: flat offset `2k` is `Z^{⊗k} ⊗ X ⊗ 𝟙…` and flat
//! offset `2k+1` is `Z^{⊗k} ⊗ Y ⊗ 𝟙…`. Mode 1 is the most significant tensor
//! factor. Offsets in this API are zero-based; [`MajoranaIndex`] converts to
//! the one-based `(mode, sign)` labelling.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, Operator, I};

pub const MAX_MODES: usize = 6;

/// Number of fermionic modes, `1 ≤ N ≤ 6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeCount(usize);

impl ModeCount {
    pub fn new(n: usize) -> Result<Self> {
        if (1..=MAX_MODES).contains(&n) {
            Ok(Self(n))
        } else {
            Err(Error::ModeCount(n))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Hilbert space dimension `2^N`.
    pub fn dim(self) -> usize {
        1 << self.0
    }

    /// Number of Majorana generators `2N`.
    pub fn generators(self) -> usize {
        2 * self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// One-based Majorana label: `R_{mode,+}` has flat index `2·mode − 1`,
/// `R_{mode,−}` has flat index `2·mode`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MajoranaIndex {
    mode: usize,
    sign: Sign,
}

impl MajoranaIndex {
    pub fn new(mode: usize, sign: Sign) -> Self {
        assert!(mode >= 1, "modes are numbered from 1");
        Self { mode, sign }
    }

    pub fn from_flat(flat: usize) -> Self {
        assert!(flat >= 1, "flat indices are numbered from 1");
        let mode = flat.div_ceil(2);
        let sign = if flat % 2 == 1 { Sign::Plus } else { Sign::Minus };
        Self { mode, sign }
    }

    pub fn mode(self) -> usize {
        self.mode
    }

    pub fn sign(self) -> Sign {
        self.sign
    }

    pub fn flat(self) -> usize {
        match self.sign {
            Sign::Plus => 2 * self.mode - 1,
            Sign::Minus => 2 * self.mode,
        }
    }

    /// Zero-based offset into [`CliffordAlgebra::majoranas`].
    pub fn offset(self) -> usize {
        self.flat() - 1
    }
}

fn pauli_x() -> Operator {
    DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

fn pauli_y() -> Operator {
    DMatrix::from_row_slice(2, 2, &[c(0.0), -I, I, c(0.0)])
}

fn pauli_z() -> Operator {
    DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

fn chain(factors: &[Operator]) -> Operator {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| linalg::kron(&acc, f))
}

/// Majorana operators, identity and parity for a fixed number of modes.
#[derive(Clone, Debug)]
pub struct CliffordAlgebra {
    n: ModeCount,
    majoranas: Vec<Operator>,
    identity: Operator,
    parity: Operator,
}

impl CliffordAlgebra {
    pub fn new(n: usize) -> Result<Self> {
        let n = ModeCount::new(n)?;
        let modes = n.get();
        let id2 = linalg::identity(2);
        let mut majoranas = Vec::with_capacity(n.generators());
        for k in 0..modes {
            for local in [pauli_x(), pauli_y()] {
                let factors: Vec<Operator> = (0..modes)
                    .map(|m| match m.cmp(&k) {
                        std::cmp::Ordering::Less => pauli_z(),
                        std::cmp::Ordering::Equal => local.clone(),
                        std::cmp::Ordering::Greater => id2.clone(),
                    })
                    .collect();
                majoranas.push(chain(&factors));
            }
        }
        let parity = chain(&vec![pauli_z(); modes]);
        Ok(Self {
            n,
            majoranas,
            identity: linalg::identity(n.dim()),
            parity,
        })
    }

    pub fn modes(&self) -> ModeCount {
        self.n
    }

    pub fn n_modes(&self) -> usize {
        self.n.get()
    }

    pub fn dim(&self) -> usize {
        self.n.dim()
    }

    pub fn generators(&self) -> usize {
        self.n.generators()
    }

    pub fn majoranas(&self) -> &[Operator] {
        &self.majoranas
    }

    /// `R_{j+1}` for the zero-based offset `j`.
    pub fn majorana(&self, j: usize) -> &Operator {
        &self.majoranas[j]
    }

    pub fn identity(&self) -> &Operator {
        &self.identity
    }

    pub fn parity(&self) -> &Operator {
        &self.parity
    }

    pub(crate) fn check(&self, a: &Operator) -> Result<()> {
        linalg::ensure_dim(a, self.dim())
    }

    pub(crate) fn check_index(&self, j: usize) -> Result<()> {
        if j < self.generators() {
            Ok(())
        } else {
            Err(Error::MajoranaIndex {
                index: j,
                n_modes: self.n_modes(),
            })
        }
    }

    /// `max_{i,j} ‖R_iR_j + R_jR_i − 2δ_{ij}𝟙‖_∞`.
    pub fn car_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, ri) in self.majoranas.iter().enumerate() {
            for (j, rj) in self.majoranas.iter().enumerate() {
                let mut ac = linalg::anticommutator(ri, rj);
                if i == j {
                    ac -= &self.identity * c(2.0);
                }
                worst = worst.max(linalg::max_abs(&ac));
            }
        }
        worst
    }

    /// Ordered product `R_{i_1} R_{i_2} ⋯` over the set bits of `mask`,
    /// lowest offset first. The empty product is the identity.
    pub fn monomial(&self, mask: u64) -> Operator {
        let mut out = self.identity.clone();
        for j in 0..self.generators() {
            if mask >> j & 1 == 1 {
                out *= &self.majoranas[j];
            }
        }
        out
    }

    /// Product `R_{i_1} ⋯ R_{i_k}` for an arbitrary list of offsets.
    pub fn product(&self, offsets: &[usize]) -> Result<Operator> {
        let mut out = self.identity.clone();
        for &j in offsets {
            self.check_index(j)?;
            out *= &self.majoranas[j];
        }
        Ok(out)
    }

    /// `χ(A) = P A P`.
    pub fn parity_automorphism(&self, a: &Operator) -> Result<Operator> {
        self.check(a)?;
        // P is diagonal with entries ±1, so PAP only flips signs.
        let d = self.dim();
        Ok(Operator::from_fn(d, d, |i, j| {
            if (i.count_ones() + j.count_ones()) % 2 == 0 {
                a[(i, j)]
            } else {
                -a[(i, j)]
            }
        }))
    }

    pub fn even_part(&self, a: &Operator) -> Result<Operator> {
        Ok((a + self.parity_automorphism(a)?) * c(0.5))
    }

    pub fn odd_part(&self, a: &Operator) -> Result<Operator> {
        Ok((a - self.parity_automorphism(a)?) * c(0.5))
    }

    /// Skew-derivation `∇_j(A) = ½(R_j A − χ(A) R_j)`.
    pub fn skew_derivation(&self, j: usize, a: &Operator) -> Result<Operator> {
        self.check_index(j)?;
        let r = &self.majoranas[j];
        let chi = self.parity_automorphism(a)?;
        Ok((r * a - chi * r) * c(0.5))
    }

    /// Hilbert–Schmidt adjoint of the skew-derivation, `½(R_j A + χ(A) R_j)`.
    pub fn skew_derivation_adjoint(&self, j: usize, a: &Operator) -> Result<Operator> {
        self.check_index(j)?;
        let r = &self.majoranas[j];
        let chi = self.parity_automorphism(a)?;
        Ok((r * a + chi * r) * c(0.5))
    }

    /// Number operator `½ Σ_j (A − R_j χ(A) R_j)`.
    pub fn number_operator(&self, a: &Operator) -> Result<Operator> {
        let chi = self.parity_automorphism(a)?;
        let mut acc = a * c(self.generators() as f64);
        for r in &self.majoranas {
            acc -= r * &chi * r;
        }
        Ok(acc * c(0.5))
    }

    /// Bilinear element `⟨R, H R⟩ = Σ_{i,j} H_{ij} R_j R_i`.
    pub fn bilinear_element(&self, h: &DMatrix<Complex64>) -> Result<Operator> {
        let g = self.generators();
        if h.nrows() != g || h.ncols() != g {
            return Err(Error::DimensionMismatch {
                expected: g,
                found: h.nrows().max(h.ncols()),
            });
        }
        let mut out = linalg::zeros(self.dim());
        for j in 0..g {
            let mut inner = linalg::zeros(self.dim());
            for i in 0..g {
                if h[(i, j)] != Complex64::new(0.0, 0.0) {
                    inner += &self.majoranas[i] * h[(i, j)];
                }
            }
            out += &self.majoranas[j] * inner;
        }
        Ok(out)
    }

    /// Liouvillean `L A = 2 Σ_j (R_j A R_j − A)`.
    pub fn liouvillean(&self, a: &Operator) -> Result<Operator> {
        self.check(a)?;
        let mut acc = a * c(-(self.generators() as f64));
        for r in &self.majoranas {
            acc += r * a * r;
        }
        Ok(acc * c(2.0))
    }

    /// Normalized-trace Hilbert–Schmidt inner product `tr(A* B)`.
    pub fn hs_inner(&self, a: &Operator, b: &Operator) -> Result<Complex64> {
        self.check(a)?;
        self.check(b)?;
        Ok(linalg::hs_inner(a, b))
    }
}

/// Builds the Jordan–Wigner representation on `n` modes.
pub fn build_algebra(n: usize) -> Result<CliffordAlgebra> {
    CliffordAlgebra::new(n)
}

/// Matrix exponential of an operator.
pub fn operator_exp(a: &Operator) -> Result<Operator> {
    linalg::expm(a)
}
