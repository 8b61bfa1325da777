//! Finite Grassmann algebras over labelled copies of a one-particle basis.
//!
//! The one-particle space has orthonormal basis `ψ_1, …, ψ_N, 𝔄ψ_1, …, 𝔄ψ_N`.
//! Copy `k` of a generator is written `ψ_i^(k)`. Monomials are stored as bit
//! masks; the bit of a label is `copy·2N + 2(base − 1) + starred`, so the
//! canonical order is lexicographic in `(copy, base, starred)` and copies can
//! be added without re-indexing existing elements.
//!
//! On top of the wedge product the module provides the Berezin derivative and
//! integral, the circle product `∘_P` (evaluated directly through an auxiliary
//! copy), the involution, the canonical isomorphism `κ_P` with the matrix
//! algebra of `N` fermionic modes, Gaussian Berezin integrals and Weyl
//! displacements.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use num_rational::Rational64;

use crate::clifford::CliffordAlgebra;
use crate::error::{Error, Result};
use crate::gaussian;
use crate::linalg::{self, Operator};

/// Scalar field of a multivector: exact complex rationals or `Complex64`.
pub trait Coefficient:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Div<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn imag_unit() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn conjugate(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_complex(&self) -> Complex64;
    /// Exact conversion from a float; `None` if the value is not representable.
    fn from_complex(z: Complex64) -> Option<Self>;
}

/// Exact complex rational coefficient.
pub type Exact = Complex<Rational64>;

impl Coefficient for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn conjugate(&self) -> Self {
        self.conj()
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn from_complex(z: Complex64) -> Option<Self> {
        Some(z)
    }
}

fn dyadic(x: f64) -> Option<Rational64> {
    const SCALE: f64 = (1u64 << 20) as f64;
    let scaled = x * SCALE;
    if (scaled - scaled.round()).abs() > 1e-9 || scaled.abs() > 9.0e15 {
        return None;
    }
    Some(Rational64::new(scaled.round() as i64, 1 << 20))
}

impl Coefficient for Exact {
    fn zero() -> Self {
        Complex::new(Rational64::from_integer(0), Rational64::from_integer(0))
    }
    fn one() -> Self {
        Complex::new(Rational64::from_integer(1), Rational64::from_integer(0))
    }
    fn imag_unit() -> Self {
        Complex::new(Rational64::from_integer(0), Rational64::from_integer(1))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(Rational64::new(num, den), Rational64::from_integer(0))
    }
    fn conjugate(&self) -> Self {
        Complex::new(self.re, -self.im)
    }
    fn is_zero(&self) -> bool {
        *self.re.numer() == 0 && *self.im.numer() == 0
    }
    fn to_complex(&self) -> Complex64 {
        let f = |r: &Rational64| *r.numer() as f64 / *r.denom() as f64;
        Complex64::new(f(&self.re), f(&self.im))
    }
    fn from_complex(z: Complex64) -> Option<Self> {
        Some(Complex::new(dyadic(z.re)?, dyadic(z.im)?))
    }
}

/// `ψ_base^(copy)` when `starred` is false, `(𝔄ψ_base)^(copy)` otherwise.
/// `base` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorLabel {
    pub copy: usize,
    pub base: usize,
    pub starred: bool,
}

impl GeneratorLabel {
    pub fn new(copy: usize, base: usize, starred: bool) -> Self {
        Self { copy, base, starred }
    }

    /// The label of `𝔄` applied to this generator.
    pub fn dual(self) -> Self {
        Self {
            starred: !self.starred,
            ..self
        }
    }
}

impl fmt::Display for GeneratorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = if self.starred { "𝔄" } else { "" };
        write!(f, "{a}ψ{}^({})", self.base, self.copy)
    }
}

/// Number of modes `N` shared by every copy; copies are allocated on demand
/// up to `64 / 2N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Universe {
    n_modes: usize,
}

impl Universe {
    pub const MAX_MODES: usize = 6;

    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 || n_modes > Self::MAX_MODES {
            return Err(Error::ModeCount(n_modes));
        }
        Ok(Self { n_modes })
    }

    pub fn n_modes(self) -> usize {
        self.n_modes
    }

    /// Generators per copy, `2N`.
    pub fn copy_width(self) -> usize {
        2 * self.n_modes
    }

    pub fn max_copies(self) -> usize {
        64 / self.copy_width()
    }

    pub fn label(self, copy: usize, base: usize, starred: bool) -> Result<GeneratorLabel> {
        let l = GeneratorLabel::new(copy, base, starred);
        self.bit(l)?;
        Ok(l)
    }

    pub fn bit(self, l: GeneratorLabel) -> Result<usize> {
        if l.base == 0 || l.base > self.n_modes || l.copy >= self.max_copies() {
            return Err(Error::UnknownLabel(l.to_string()));
        }
        Ok(l.copy * self.copy_width() + 2 * (l.base - 1) + usize::from(l.starred))
    }

    pub fn label_of_bit(self, bit: usize) -> GeneratorLabel {
        let w = self.copy_width();
        GeneratorLabel::new(bit / w, (bit % w) / 2 + 1, bit % 2 == 1)
    }

    pub fn copy_mask(self, copy: usize) -> u64 {
        let w = self.copy_width();
        let block = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
        block << (copy * w)
    }

    fn check_copy(self, copy: usize) -> Result<()> {
        if copy >= self.max_copies() {
            return Err(Error::UnknownLabel(format!("copy {copy}")));
        }
        Ok(())
    }
}

/// Sign of moving the generators of `b` past those of `a` in `a ∧ b`:
/// odd when the number of pairs `(i ∈ a, j ∈ b, i > j)` is odd.
fn merge_sign(a: u64, b: u64) -> bool {
    let mut parity = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        if j < 63 {
            parity += (a >> (j + 1)).count_ones();
        }
    }
    parity % 2 == 1
}

/// Mask and sign of the product of generators given as bits in the written
/// order. `None` if a generator repeats.
fn ordered_product(bits: &[usize]) -> Option<(u64, bool)> {
    let mut mask = 0u64;
    let mut odd = false;
    for &b in bits {
        if mask >> b & 1 == 1 {
            return None;
        }
        if b < 63 {
            odd ^= (mask >> (b + 1)).count_ones() % 2 == 1;
        }
        mask |= 1 << b;
    }
    Some((mask, odd))
}

fn bits_of(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut rest = mask;
    while rest != 0 {
        out.push(rest.trailing_zeros() as usize);
        rest &= rest - 1;
    }
    out
}

/// Element of the Grassmann algebra: a finite sum of monomials in canonical
/// order with coefficients in `T`.
#[derive(Clone, PartialEq)]
pub struct Multivector<T: Coefficient> {
    universe: Universe,
    terms: BTreeMap<u64, T>,
}

impl<T: Coefficient> Multivector<T> {
    pub fn zero(universe: Universe) -> Self {
        Self {
            universe,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(universe: Universe, z: T) -> Self {
        let mut out = Self::zero(universe);
        out.add_term(0, z);
        out
    }

    pub fn one(universe: Universe) -> Self {
        Self::scalar(universe, T::one())
    }

    pub fn generator(universe: Universe, label: GeneratorLabel) -> Result<Self> {
        let bit = universe.bit(label)?;
        let mut out = Self::zero(universe);
        out.add_term(1 << bit, T::one());
        Ok(out)
    }

    /// Ordered product `g_1 ∧ g_2 ∧ ⋯` of generators.
    pub fn monomial(universe: Universe, labels: &[GeneratorLabel]) -> Result<Self> {
        let bits = labels.iter().map(|&l| universe.bit(l)).collect::<Result<Vec<_>>>()?;
        let mut out = Self::zero(universe);
        if let Some((mask, odd)) = ordered_product(&bits) {
            out.add_term(mask, if odd { -T::one() } else { T::one() });
        }
        Ok(out)
    }

    /// Builds an element from canonical masks.
    pub fn from_terms(universe: Universe, terms: impl IntoIterator<Item = (u64, T)>) -> Self {
        let mut out = Self::zero(universe);
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    fn add_term(&mut self, mask: u64, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mask) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&mask);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(mask, c);
            }
        }
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &T)> {
        self.terms.iter().map(|(&m, c)| (m, c))
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, mask: u64) -> T {
        self.terms.get(&mask).cloned().unwrap_or_else(T::zero)
    }

    pub fn scalar_part(&self) -> T {
        self.coefficient(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 1)
    }

    /// Union of all generator bits that occur.
    pub fn support(&self) -> u64 {
        self.terms.keys().fold(0, |acc, m| acc | m)
    }

    /// Whether every monomial lives in the given copy.
    pub fn lives_in(&self, copy: usize) -> bool {
        self.support() & !self.universe.copy_mask(copy) == 0
    }

    fn copies_used(&self) -> Vec<bool> {
        let s = self.support();
        (0..self.universe.max_copies())
            .map(|c| s & self.universe.copy_mask(c) != 0)
            .collect()
    }

    fn same_universe(&self, other: &Self) -> Result<()> {
        if self.universe != other.universe {
            return Err(Error::UniverseMismatch(self.universe.n_modes, other.universe.n_modes));
        }
        Ok(())
    }

    pub fn scale(&self, z: &T) -> Self {
        Self::from_terms(
            self.universe,
            self.terms.iter().map(|(&m, c)| (m, c.clone() * z.clone())),
        )
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_universe(other)?;
        let mut out = self.clone();
        for (&m, c) in &other.terms {
            out.add_term(m, c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    /// Wedge product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.same_universe(other)?;
        let mut out = Self::zero(self.universe);
        for (&ma, ca) in &self.terms {
            for (&mb, cb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                let c = ca.clone() * cb.clone();
                out.add_term(ma | mb, if merge_sign(ma, mb) { -c } else { c });
            }
        }
        Ok(out)
    }

    /// Left Berezin derivative `δ/δφ` for a generator `φ`.
    pub fn derivative(&self, label: GeneratorLabel) -> Result<Self> {
        let bit = self.universe.bit(label)?;
        Ok(self.derivative_bit(bit))
    }

    fn derivative_bit(&self, bit: usize) -> Self {
        let below = (1u64 << bit) - 1;
        let mut out = Self::zero(self.universe);
        for (&m, c) in &self.terms {
            if m >> bit & 1 == 1 {
                let odd = (m & below).count_ones() % 2 == 1;
                out.add_term(m ^ (1 << bit), if odd { -c.clone() } else { c.clone() });
            }
        }
        out
    }

    /// `∏_i (δ/δψ_i^(copy))(δ/δ(𝔄ψ_i)^(copy))`; the `𝔄ψ_i` derivative acts first.
    pub fn berezin_integral(&self, copy: usize) -> Result<Self> {
        self.universe.check_copy(copy)?;
        let mut out = self.clone();
        for base in 1..=self.universe.n_modes {
            out = out.integrate_mode(copy, base);
        }
        Ok(out)
    }

    fn integrate_mode(&self, copy: usize, base: usize) -> Self {
        let plain = self.universe.bit(GeneratorLabel::new(copy, base, false)).unwrap();
        self.derivative_bit(plain + 1).derivative_bit(plain)
    }

    /// Antilinear involution: reverses each monomial, maps `ψ ↔ 𝔄ψ` and
    /// conjugates coefficients, so `(ξ₀ ∧ ξ₁)* = ξ₁* ∧ ξ₀*`.
    pub fn star(&self) -> Self {
        let mut out = Self::zero(self.universe);
        for (&m, c) in &self.terms {
            let bits: Vec<usize> = bits_of(m).into_iter().rev().map(|b| b ^ 1).collect();
            let (mask, odd) = ordered_product(&bits).expect("toggling is injective");
            let c = c.conjugate();
            out.add_term(mask, if odd { -c } else { c });
        }
        out
    }

    /// Renames generators through `f`, keeping the written order of each
    /// monomial. Monomials in which two generators collide vanish.
    pub fn relabel(&self, f: impl Fn(GeneratorLabel) -> GeneratorLabel) -> Result<Self> {
        let mut out = Self::zero(self.universe);
        for (&m, c) in &self.terms {
            let bits = bits_of(m)
                .into_iter()
                .map(|b| self.universe.bit(f(self.universe.label_of_bit(b))))
                .collect::<Result<Vec<_>>>()?;
            if let Some((mask, odd)) = ordered_product(&bits) {
                out.add_term(mask, if odd { -c.clone() } else { c.clone() });
            }
        }
        Ok(out)
    }

    /// Moves every generator of copy `from` to copy `to`.
    pub fn move_copy(&self, from: usize, to: usize) -> Result<Self> {
        self.relabel(|l| {
            if l.copy == from {
                GeneratorLabel { copy: to, ..l }
            } else {
                l
            }
        })
    }

    /// Exponential by the terminating wedge power series. Requires a vanishing
    /// scalar part.
    pub fn exp_wedge(&self) -> Result<Self> {
        if !self.scalar_part().is_zero() {
            return Err(Error::NotNilpotent);
        }
        let mut sum = Self::one(self.universe);
        let mut term = Self::one(self.universe);
        for k in 1..=65 {
            term = term.wedge(self)?.scale(&T::from_ratio(1, k));
            if term.is_zero() {
                return Ok(sum);
            }
            sum = sum.try_add(&term)?;
        }
        Err(Error::NotNilpotent)
    }

    /// Circle product `∘_P` acting on copy 0.
    pub fn circle(&self, other: &Self) -> Result<Self> {
        self.circle_on(0, other)
    }

    /// Circle product `∘_P^(k)` acting on copy `k`; generators of other copies
    /// are carried along as Grassmann-valued coefficients.
    ///
    /// With an auxiliary copy `x` not used by either factor:
    /// `ξ₀ ∘ ξ₁ = (−1)^N ∫dH^(x) ϰ(ξ₀) ϰ(ξ₁) e^{−⟨h^k,h^k⟩} e^{⟨h^k,h^x⟩} e^{−⟨h^x,h^x⟩} e^{⟨h^x,h^k⟩}`,
    /// where `ϰ(ξ₀)` moves the plain generators of copy `k` to copy `x` and
    /// `ϰ(ξ₁)` moves the starred ones.
    pub fn circle_on(&self, copy: usize, other: &Self) -> Result<Self> {
        self.same_universe(other)?;
        let u = self.universe;
        u.check_copy(copy)?;
        let (used_a, used_b) = (self.copies_used(), other.copies_used());
        let aux = (0..u.max_copies())
            .find(|&c| c != copy && !used_a[c] && !used_b[c])
            .ok_or_else(|| Error::CopyCollision(format!("no free copy besides {copy}")))?;

        let left = self.relabel(|l| {
            if l.copy == copy && !l.starred {
                GeneratorLabel { copy: aux, ..l }
            } else {
                l
            }
        })?;
        let right = other.relabel(|l| {
            if l.copy == copy && l.starred {
                GeneratorLabel { copy: aux, ..l }
            } else {
                l
            }
        })?;
        let mut acc = left.wedge(&right)?;
        // The kernel factorizes over modes, so each auxiliary pair is
        // integrated as soon as its factor has been multiplied in.
        for base in 1..=u.n_modes {
            let ak = Self::generator(u, GeneratorLabel::new(copy, base, true))?;
            let bk = Self::generator(u, GeneratorLabel::new(copy, base, false))?;
            let ax = Self::generator(u, GeneratorLabel::new(aux, base, true))?;
            let bx = Self::generator(u, GeneratorLabel::new(aux, base, false))?;
            let q = (ak.wedge(&bx)? + ax.wedge(&bk)?) - (ak.wedge(&bk)? + ax.wedge(&bx)?);
            acc = acc.wedge(&q.exp_wedge()?)?.integrate_mode(aux, base);
        }
        Ok(if u.n_modes % 2 == 1 { -acc } else { acc })
    }

    /// Exponential in the circle product on copy `k`, `Σ_n ξ^{∘n}/n!`.
    /// Requires a vanishing scalar part; the series then terminates.
    pub fn exp_circle(&self, copy: usize) -> Result<Self> {
        if !self.scalar_part().is_zero() {
            return Err(Error::NotNilpotent);
        }
        let mut sum = Self::one(self.universe);
        let mut term = Self::one(self.universe);
        for k in 1..=65 {
            term = term.circle_on(copy, self)?.scale(&T::from_ratio(1, k));
            if term.is_zero() {
                return Ok(sum);
            }
            sum = sum.try_add(&term)?;
        }
        Err(Error::NotNilpotent)
    }

    pub fn map_coefficients<U: Coefficient>(&self, f: impl Fn(&T) -> U) -> Multivector<U> {
        Multivector::from_terms(self.universe, self.terms.iter().map(|(&m, c)| (m, f(c))))
    }

    pub fn to_float(&self) -> Multivector<Complex64> {
        self.map_coefficients(|c| c.to_complex())
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.to_complex().norm()).fold(0.0, f64::max)
    }
}

impl Multivector<Complex64> {
    /// Drops coefficients with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self::from_terms(
            self.universe,
            self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(&m, &c)| (m, c)),
        )
    }
}

impl<T: Coefficient> Add for Multivector<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("universe mismatch in addition")
    }
}

impl<T: Coefficient> Sub for Multivector<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(&rhs).expect("universe mismatch in subtraction")
    }
}

impl<T: Coefficient> Neg for &Multivector<T> {
    type Output = Multivector<T>;
    fn neg(self) -> Multivector<T> {
        self.map_coefficients(|c| -c.clone())
    }
}

impl<T: Coefficient> Neg for Multivector<T> {
    type Output = Multivector<T>;
    fn neg(self) -> Multivector<T> {
        -&self
    }
}

impl<T: Coefficient> fmt::Display for Multivector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            if m == 0 {
                write!(f, "·1")?;
            }
            for (j, b) in bits_of(m).into_iter().enumerate() {
                let sep = if j == 0 { "·" } else { "∧" };
                write!(f, "{sep}{}", self.universe.label_of_bit(b))?;
            }
        }
        Ok(())
    }
}

impl<T: Coefficient> fmt::Debug for Multivector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multivector[N={}]({self})", self.universe.n_modes)
    }
}

/// Free-function form of [`Multivector::wedge`].
pub fn wedge<T: Coefficient>(a: &Multivector<T>, b: &Multivector<T>) -> Result<Multivector<T>> {
    a.wedge(b)
}

pub fn berezin_derivative<T: Coefficient>(phi: GeneratorLabel, xi: &Multivector<T>) -> Result<Multivector<T>> {
    xi.derivative(phi)
}

pub fn berezin_integral<T: Coefficient>(copy: usize, xi: &Multivector<T>) -> Result<Multivector<T>> {
    xi.berezin_integral(copy)
}

/// Direct circle product on copy 0.
pub fn circle_product<T: Coefficient>(a: &Multivector<T>, b: &Multivector<T>) -> Result<Multivector<T>> {
    a.circle(b)
}

/// Basis vector `e_i` of the one-particle space in copy `copy`:
/// `ψ_{i+1}` for `i < N`, `𝔄ψ_{i−N+1}` otherwise.
pub fn basis_label(universe: Universe, copy: usize, i: usize) -> GeneratorLabel {
    let n = universe.n_modes();
    if i < n {
        GeneratorLabel::new(copy, i + 1, false)
    } else {
        GeneratorLabel::new(copy, i - n + 1, true)
    }
}

/// Bilinear element `⟨H, H H⟩ = Σ_{ij} H_ij (𝔄e_j) ∧ e_i` on copy `copy`.
pub fn bilinear<T: Coefficient>(universe: Universe, copy: usize, h: &SquareMatrix<T>) -> Result<Multivector<T>> {
    let g = universe.copy_width();
    if h.dim() != g {
        return Err(Error::DimensionMismatch {
            expected: g,
            found: h.dim(),
        });
    }
    let mut out = Multivector::zero(universe);
    for i in 0..g {
        for j in 0..g {
            let c = h.get(i, j);
            if c.is_zero() {
                continue;
            }
            let m = Multivector::monomial(
                universe,
                &[basis_label(universe, copy, j).dual(), basis_label(universe, copy, i)],
            )?;
            out = out.try_add(&m.scale(c))?;
        }
    }
    Ok(out)
}

/// Cross-copy pairing `⟨h^(k), h^(l)⟩ = Σ_j (𝔄ψ_j)^(k) ∧ ψ_j^(l)`.
pub fn copy_pairing<T: Coefficient>(universe: Universe, k: usize, l: usize) -> Result<Multivector<T>> {
    let mut out = Multivector::zero(universe);
    for j in 1..=universe.n_modes() {
        let m = Multivector::monomial(
            universe,
            &[GeneratorLabel::new(k, j, true), GeneratorLabel::new(l, j, false)],
        )?;
        out = out.try_add(&m)?;
    }
    Ok(out)
}

/// Small dense square matrix over a [`Coefficient`] field, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T: Coefficient> {
    n: usize,
    data: Vec<T>,
}

impl<T: Coefficient> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Exact conversion of a float matrix whose entries are dyadic rationals.
    pub fn from_operator(a: &Operator) -> Result<Self> {
        let n = linalg::ensure_square(a)?;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(T::from_complex(a[(i, j)]).ok_or(Error::NonFinite)?);
            }
        }
        Ok(Self { n, data })
    }

    pub fn to_operator(&self) -> Operator {
        Operator::from_fn(self.n, self.n, |i, j| self.get(i, j).to_complex())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn scale(&self, z: &T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| x.clone() * z.clone()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).conjugate())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * n + j;
                    out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    /// Gauss–Jordan inverse with largest-modulus pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .filter(|&r| !a.get(r, col).is_zero())
                .max_by(|&r, &s| {
                    a.get(r, col)
                        .to_complex()
                        .norm()
                        .total_cmp(&a.get(s, col).to_complex().norm())
                })
                .ok_or(Error::Singular)?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a.get(col, col).clone();
            for j in 0..n {
                a.data[col * n + j] = a.data[col * n + j].clone() / p.clone();
                inv.data[col * n + j] = inv.data[col * n + j].clone() / p.clone();
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a.data[col * n + j].clone(), inv.data[col * n + j].clone());
                    a.data[r * n + j] = a.data[r * n + j].clone() - f.clone() * ac;
                    inv.data[r * n + j] = inv.data[r * n + j].clone() - f.clone() * ic;
                }
            }
        }
        Ok(inv)
    }
}

/// Canonical isomorphism `κ_P` between the matrix algebra of `N` modes and
/// copy 0 of the Grassmann algebra with the circle product.
///
/// `κ_P(B(φ)) = φ*`, so `a_i ↦ 𝔄ψ_i` and `a_i* ↦ ψ_i`. A monomial with its
/// starred generators written first maps back to the anti-normally ordered
/// product: `κ_P⁻¹((𝔄ψ)_I ∧ ψ_J) = a_I a*_J`. The forward map solves the
/// linear system over this basis of `4^N` operators.
pub struct KappaMap<T: Coefficient> {
    universe: Universe,
    fields: Vec<SquareMatrix<T>>,
    basis: Vec<SquareMatrix<T>>,
    solve: SquareMatrix<T>,
}

/// Largest mode count for which `κ_P` is tabulated.
pub const KAPPA_MAX_MODES: usize = 4;

impl<T: Coefficient> KappaMap<T> {
    pub fn new(universe: Universe) -> Result<Self> {
        let n = universe.n_modes();
        if n > KAPPA_MAX_MODES {
            return Err(Error::ModeCount(n));
        }
        let alg = CliffordAlgebra::new(n)?;
        let fields = (0..2 * n)
            .map(|k| SquareMatrix::from_operator(&gaussian::field_operator(&alg, k)))
            .collect::<Result<Vec<_>>>()?;
        let d = 1usize << n;
        let basis: Vec<SquareMatrix<T>> = (0..(1u64 << (2 * n)))
            .map(|mask| anti_normal_operator(universe, &fields, mask))
            .collect();
        // Column `mask` of the system holds the entries of κ⁻¹(monomial).
        let size = d * d;
        let system = SquareMatrix::from_fn(size, |row, col| basis[col].entries()[row].clone());
        let solve = system.inverse()?;
        Ok(Self {
            universe,
            fields,
            basis,
            solve,
        })
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    /// Field operator `B(e_k)`: `a_{k+1}` for `k < N`, `a*_{k−N+1}` otherwise.
    pub fn field(&self, k: usize) -> &SquareMatrix<T> {
        &self.fields[k]
    }

    /// Image of the canonical monomial `mask` of copy 0.
    pub fn basis_operator(&self, mask: u64) -> &SquareMatrix<T> {
        &self.basis[mask as usize]
    }

    /// `κ_P(A)`.
    pub fn kappa(&self, a: &SquareMatrix<T>) -> Result<Multivector<T>> {
        let d = 1usize << self.universe.n_modes();
        if a.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: a.dim(),
            });
        }
        let size = d * d;
        let mut out = Multivector::zero(self.universe);
        for mask in 0..size {
            let mut c = T::zero();
            for (j, x) in a.entries().iter().enumerate() {
                if !x.is_zero() {
                    c = c + self.solve.get(mask, j).clone() * x.clone();
                }
            }
            out.add_term(mask as u64, c);
        }
        Ok(out)
    }

    /// `κ_P⁻¹(ξ)` for `ξ` in copy 0.
    pub fn kappa_inv(&self, xi: &Multivector<T>) -> Result<SquareMatrix<T>> {
        if xi.universe() != self.universe {
            return Err(Error::UniverseMismatch(
                xi.universe().n_modes(),
                self.universe.n_modes(),
            ));
        }
        if !xi.lives_in(0) {
            return Err(Error::UnknownLabel("element outside copy 0".into()));
        }
        let d = 1usize << self.universe.n_modes();
        let mut out = SquareMatrix::zeros(d);
        for (m, c) in xi.terms() {
            out = out.plus(&self.basis[m as usize].scale(c));
        }
        Ok(out)
    }

    /// Circle product through the isomorphism, `κ_P(κ_P⁻¹(a) κ_P⁻¹(b))`.
    pub fn pullback_product(&self, a: &Multivector<T>, b: &Multivector<T>) -> Result<Multivector<T>> {
        self.kappa(&self.kappa_inv(a)?.matmul(&self.kappa_inv(b)?))
    }

    /// Operator bilinear element `⟨B, H B⟩ = Σ_{ij} H_ij B(e_j) B(e_i)*`.
    pub fn bilinear_operator(&self, h: &SquareMatrix<T>) -> Result<SquareMatrix<T>> {
        let g = self.universe.copy_width();
        if h.dim() != g {
            return Err(Error::DimensionMismatch {
                expected: g,
                found: h.dim(),
            });
        }
        let d = 1usize << self.universe.n_modes();
        let mut out = SquareMatrix::zeros(d);
        for i in 0..g {
            let fi_adj = self.fields[i].adjoint();
            for j in 0..g {
                let c = h.get(i, j);
                if !c.is_zero() {
                    out = out.plus(&self.fields[j].matmul(&fi_adj).scale(c));
                }
            }
        }
        Ok(out)
    }
}

fn anti_normal_operator<T: Coefficient>(universe: Universe, fields: &[SquareMatrix<T>], mask: u64) -> SquareMatrix<T> {
    let n = universe.n_modes();
    let bits = bits_of(mask);
    // Sort key: starred generators first, then plain ones, each by base.
    let key = |b: usize| {
        let l = universe.label_of_bit(b);
        if l.starred {
            l.base - 1
        } else {
            n + l.base - 1
        }
    };
    let keys: Vec<usize> = bits.iter().map(|&b| key(b)).collect();
    let inversions = (0..keys.len())
        .flat_map(|i| (i + 1..keys.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| keys[i] > keys[j])
        .count();
    let mut sorted = keys;
    sorted.sort_unstable();
    let d = 1usize << n;
    let mut out = SquareMatrix::identity(d);
    for k in sorted {
        // key k < N is 𝔄ψ_{k+1} ↦ a_{k+1} = B(e_k); key N + j is ψ_{j+1} ↦ a*_{j+1}.
        out = out.matmul(&fields[k]);
    }
    if inversions % 2 == 1 {
        out.scale(&-T::one())
    } else {
        out
    }
}

/// Norm pulled back through the isomorphism, `‖κ_P⁻¹(ξ)‖`.
pub fn grassmann_norm<T: Coefficient>(kappa: &KappaMap<T>, xi: &Multivector<T>) -> Result<f64> {
    Ok(linalg::operator_norm(&kappa.kappa_inv(xi)?.to_operator()))
}

/// Invertible self-dual covariance for Gaussian Berezin integrals, given in
/// the basis `(ψ_1..ψ_N, 𝔄ψ_1..𝔄ψ_N)` and diagonalized by the basis
/// projection: `C = diag(c, −cᵗ)`.
#[derive(Clone, Debug)]
pub struct GrassmannCovariance {
    matrix: DMatrix<Complex64>,
    condition_number: f64,
}

impl GrassmannCovariance {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let g = linalg::ensure_square(&matrix)?;
        if g % 2 == 1 {
            return Err(Error::OddDimension(g));
        }
        let n = g / 2;
        let scale = linalg::max_abs(&matrix).max(1.0);
        let off = matrix
            .view((0, n), (n, n))
            .iter()
            .chain(matrix.view((n, 0), (n, n)).iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if off > 1e-12 * scale {
            return Err(Error::NotDiagonalized(off));
        }
        let upper = matrix.view((0, 0), (n, n)).clone_owned();
        let lower = matrix.view((n, n), (n, n)).clone_owned();
        let dual = linalg::max_abs(&(lower + upper.transpose()));
        if dual > 1e-12 * scale {
            return Err(Error::NotSelfDual(dual));
        }
        let sv = matrix.clone().singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        if !(smin > 1e-12 * smax) {
            return Err(Error::Singular);
        }
        Ok(Self {
            matrix,
            condition_number: smax / smin,
        })
    }

    /// `diag(c, −cᵗ)`.
    pub fn from_block(c: &DMatrix<Complex64>) -> Result<Self> {
        let n = c.nrows();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(c);
        m.view_mut((n, n), (n, n)).copy_from(&(-c.transpose()));
        Self::new(m)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    /// Restriction `C_P` to the range of the basis projection.
    pub fn block(&self) -> DMatrix<Complex64> {
        let n = self.n_modes();
        self.matrix.view((0, 0), (n, n)).clone_owned()
    }

    /// Pair kernel `⟨𝔄e_a, C e_b⟩` for basis indices `a, b`.
    pub fn pair_kernel(&self, a: usize, b: usize) -> Complex64 {
        let n = self.n_modes();
        let swap = if a < n { a + n } else { a - n };
        self.matrix[(swap, b)]
    }
}

fn float_square(m: &DMatrix<Complex64>) -> SquareMatrix<Complex64> {
    SquareMatrix::from_fn(m.nrows(), |i, j| m[(i, j)])
}

/// Gaussian Berezin integral `∫dμ_C(H) ξ = det(C_P) ∫_P dH e^{½⟨H,C⁻¹H⟩} ∧ ξ`
/// for `ξ` in copy 0.
///
/// With the bilinear element `⟨H,KH⟩ = Σ K_ij (𝔄e_j) ∧ e_i` one has
/// `∫_P dH e^{⟨H,HH⟩} = det(2H_P)` for `P`-diagonal self-dual `H`, so the
/// prefactor `det(C_P)` is the one that makes `∫dμ_C 𝟙 = 1`.
pub fn gaussian_berezin_integral(c: &GrassmannCovariance, xi: &Multivector<Complex64>) -> Result<Complex64> {
    let u = xi.universe();
    if u.n_modes() != c.n_modes() {
        return Err(Error::UniverseMismatch(u.n_modes(), c.n_modes()));
    }
    if !xi.lives_in(0) {
        return Err(Error::UnknownLabel("element outside copy 0".into()));
    }
    let inv = c.matrix().clone().try_inverse().ok_or(Error::Singular)?;
    let kernel = bilinear(u, 0, &float_square(&(inv * Complex64::new(0.5, 0.0))))?.exp_wedge()?;
    let value = kernel.wedge(xi)?.berezin_integral(0)?.scalar_part();
    Ok(value * c.block().determinant())
}

/// Pfaffian side `Pf[⟨𝔄φ_k, C φ_l⟩]` for basis generators `φ_k = e_{indices[k]}`.
pub fn gaussian_pfaffian(c: &GrassmannCovariance, indices: &[usize]) -> Result<Complex64> {
    if indices.len() % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let m = indices.len();
    let kernel = DMatrix::from_fn(m, m, |k, l| c.pair_kernel(indices[k], indices[l]));
    gaussian::pfaffian(&kernel)
}

/// Displacement family `(η_j, η̄_j)_{j=1..N}` of odd elements playing the
/// role of `ψ_j^(l)` and `(𝔄ψ_j)^(l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementFamily<T: Coefficient> {
    pub eta: Vec<Multivector<T>>,
    pub eta_bar: Vec<Multivector<T>>,
}

impl<T: Coefficient> DisplacementFamily<T> {
    /// The generators of copy `l` themselves.
    pub fn copy(universe: Universe, l: usize) -> Result<Self> {
        let n = universe.n_modes();
        let eta = (1..=n)
            .map(|j| Multivector::generator(universe, GeneratorLabel::new(l, j, false)))
            .collect::<Result<Vec<_>>>()?;
        let eta_bar = (1..=n)
            .map(|j| Multivector::generator(universe, GeneratorLabel::new(l, j, true)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { eta, eta_bar })
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        let add = |a: &[Multivector<T>], b: &[Multivector<T>]| {
            a.iter().zip(b).map(|(x, y)| x.try_add(y)).collect::<Result<Vec<_>>>()
        };
        Ok(Self {
            eta: add(&self.eta, &other.eta)?,
            eta_bar: add(&self.eta_bar, &other.eta_bar)?,
        })
    }

    pub fn negated(&self) -> Self {
        Self {
            eta: self.eta.iter().map(|x| -x).collect(),
            eta_bar: self.eta_bar.iter().map(|x| -x).collect(),
        }
    }

    /// `(η, 𝒥ζ) = Σ_j η_j ∧ ζ̄_j + η̄_j ∧ ζ_j`.
    pub fn pairing(&self, other: &Self) -> Result<Multivector<T>> {
        let u = self.eta[0].universe();
        let mut out = Multivector::zero(u);
        for j in 0..self.eta.len() {
            out = out.try_add(&self.eta[j].wedge(&other.eta_bar[j])?)?;
            out = out.try_add(&self.eta_bar[j].wedge(&other.eta[j])?)?;
        }
        Ok(out)
    }
}

/// Generator `Σ_j (𝔄ψ_j)^(k) ∧ η_j − η̄_j ∧ ψ_j^(k)`, which for the copy-`l`
/// family equals `⟨h^(k),h^(l)⟩ − ⟨h^(l),h^(k)⟩`.
pub fn displacement_generator<T: Coefficient>(k: usize, family: &DisplacementFamily<T>) -> Result<Multivector<T>> {
    let u = family.eta[0].universe();
    let mut out = Multivector::zero(u);
    for j in 0..u.n_modes() {
        let a = Multivector::generator(u, GeneratorLabel::new(k, j + 1, true))?;
        let b = Multivector::generator(u, GeneratorLabel::new(k, j + 1, false))?;
        out = out.try_add(&a.wedge(&family.eta[j])?)?;
        out = out.try_sub(&family.eta_bar[j].wedge(&b)?)?;
    }
    Ok(out)
}

/// Weyl displacement `𝕋_k(η) = exp(Σ_j (𝔄ψ_j)^(k) ∧ η_j − η̄_j ∧ ψ_j^(k))`,
/// exponentiated in the circle product of copy `k`.
pub fn grassmann_displacement<T: Coefficient>(k: usize, family: &DisplacementFamily<T>) -> Result<Multivector<T>> {
    let u = family.eta[0].universe();
    let family_support = family
        .eta
        .iter()
        .chain(&family.eta_bar)
        .fold(0u64, |acc, x| acc | x.support());
    if family_support & u.copy_mask(k) != 0 {
        return Err(Error::CopyCollision(format!("displacement family uses copy {k}")));
    }
    displacement_generator(k, family)?.exp_circle(k)
}
