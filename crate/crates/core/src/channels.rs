//! Two-register systems, the fermionic beam splitter and the dissipative
//! semigroup.
//!
//! Both registers live in one Jordan–Wigner chain on `2N` modes: register A
//! holds modes `1..=N` (Majoranas `R_j`), register B the modes `N+1..=2N`
//! (Majoranas `S_j`). Cross-register anticommutation is then automatic, and
//! for even states the graded tensor product is the ordinary Kronecker
//! product.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::clifford::CliffordAlgebra;
use crate::error::{Error, Result};
use crate::gaussian::{covariance_of, CovarianceMatrix, DensityMatrix};
use crate::linalg::{self, c, Operator};
use crate::report::{CheckRecord, ExperimentReport};

/// Largest register size: the composite chain has `2N ≤ 6` modes.
pub const MAX_REGISTER_MODES: usize = 3;

/// Largest algebra on which the semigroup superoperator is formed.
pub const MAX_SEMIGROUP_MODES: usize = 4;

#[derive(Clone, Debug)]
pub struct CompositeSystem {
    register: CliffordAlgebra,
    total: CliffordAlgebra,
}

impl CompositeSystem {
    pub fn new(register_modes: usize) -> Result<Self> {
        if register_modes == 0 || register_modes > MAX_REGISTER_MODES {
            return Err(Error::ModeCount(register_modes));
        }
        Ok(Self {
            register: CliffordAlgebra::new(register_modes)?,
            total: CliffordAlgebra::new(2 * register_modes)?,
        })
    }

    pub fn register_modes(&self) -> usize {
        self.register.n_modes()
    }

    /// The algebra of a single register, used for the reduced states.
    pub fn register(&self) -> &CliffordAlgebra {
        &self.register
    }

    pub fn total(&self) -> &CliffordAlgebra {
        &self.total
    }

    /// `R_j`, 0-based offset into register A.
    pub fn r_op(&self, j: usize) -> &Operator {
        self.total.majorana(j)
    }

    /// `S_j`, 0-based offset into register B.
    pub fn s_op(&self, j: usize) -> &Operator {
        self.total.majorana(self.register.generators() + j)
    }

    /// `max_{i,j} ‖R_j S_i + S_i R_j‖`.
    pub fn cross_anticommutation_defect(&self) -> f64 {
        let g = self.register.generators();
        let mut worst: f64 = 0.0;
        for j in 0..g {
            for i in 0..g {
                worst = worst.max(linalg::max_abs(&linalg::anticommutator(self.r_op(j), self.s_op(i))));
            }
        }
        worst
    }
}

/// Transmissivity `λ` and the mixing angle with `cos θ = √λ`,
/// `sin θ = √(1 − λ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterParams {
    lambda: f64,
    theta: f64,
}

impl BeamSplitterParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidLambda(lambda));
        }
        // atan2 keeps the λ = 0 end finite where arctan(√((1−λ)/λ)) is not.
        let theta = (1.0 - lambda).sqrt().atan2(lambda.sqrt());
        Ok(Self { lambda, theta })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn cos_theta(&self) -> f64 {
        self.lambda.sqrt()
    }

    pub fn sin_theta(&self) -> f64 {
        (1.0 - self.lambda).sqrt()
    }

    /// `cos(θ/2)` and `sin(θ/2)` from the half-angle formulas, so that the
    /// endpoints come out without trigonometric round-off.
    fn half_angle(&self) -> (f64, f64) {
        let cos = self.cos_theta();
        (((1.0 + cos) / 2.0).sqrt(), ((1.0 - cos) / 2.0).sqrt())
    }
}

/// `U = exp((θ/2) Σ_j R_j S_j) = ∏_j (cos(θ/2) + sin(θ/2) R_j S_j)`.
///
/// Each `R_j S_j` squares to `−𝟙` and the factors commute, which gives the
/// product form. The Heisenberg action is `U* R_j U = cos θ R_j + sin θ S_j`
/// and `U* S_j U = cos θ S_j − sin θ R_j`.
pub fn beam_splitter_unitary(sys: &CompositeSystem, p: &BeamSplitterParams) -> Operator {
    let (ch, sh) = p.half_angle();
    let total = sys.total();
    if sh == 0.0 {
        return total.identity().clone();
    }
    let mut u = total.identity().clone();
    for j in 0..sys.register().generators() {
        let factor = total.identity() * c(ch) + sys.r_op(j) * sys.s_op(j) * c(sh);
        u *= factor;
    }
    u
}

/// The same unitary from the matrix exponential of its generator.
pub fn beam_splitter_unitary_exp(sys: &CompositeSystem, p: &BeamSplitterParams) -> Result<Operator> {
    let mut gen = linalg::zeros(sys.total().dim());
    for j in 0..sys.register().generators() {
        gen += sys.r_op(j) * sys.s_op(j);
    }
    linalg::expm(&(gen * c(p.theta() / 2.0)))
}

/// `ρ_A ⊗ ρ_B` on the composite chain. Both inputs must be even.
pub fn embed(rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Result<DensityMatrix> {
    if rho_a.dim() != rho_b.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho_a.dim(),
            found: rho_b.dim(),
        });
    }
    for rho in [rho_a, rho_b] {
        if !rho.is_even() {
            return Err(Error::OddParity(rho.parity_defect()));
        }
    }
    DensityMatrix::new(linalg::kron(rho_a.matrix(), rho_b.matrix()))
}

/// Trace over the last `n_traced` qubits of the chain:
/// `out[i, j] = Σ_k m[i·2^n + k, j·2^n + k]`.
pub fn partial_trace_last(m: &Operator, n_traced: usize) -> Result<Operator> {
    let d = linalg::ensure_square(m)?;
    let db = 1usize << n_traced;
    if d % db != 0 || d < db {
        return Err(Error::DimensionMismatch { expected: db, found: d });
    }
    let da = d / db;
    Ok(DMatrix::from_fn(da, da, |i, j| {
        (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
    }))
}

/// Reduced state of register A, renormalized to unit trace.
pub fn partial_trace_b(sys: &CompositeSystem, rho: &DensityMatrix) -> Result<DensityMatrix> {
    linalg::ensure_dim(rho.matrix(), sys.total().dim())?;
    let reduced = partial_trace_last(rho.matrix(), sys.register_modes())?;
    let tr = reduced.trace();
    DensityMatrix::new(reduced / tr)
}

/// Beam splitter with its unitary built once.
#[derive(Clone, Debug)]
pub struct BeamSplitter {
    sys: CompositeSystem,
    params: BeamSplitterParams,
    unitary: Operator,
}

impl BeamSplitter {
    pub fn new(register_modes: usize, lambda: f64) -> Result<Self> {
        let sys = CompositeSystem::new(register_modes)?;
        let params = BeamSplitterParams::new(lambda)?;
        let unitary = beam_splitter_unitary(&sys, &params);
        Ok(Self { sys, params, unitary })
    }

    pub fn system(&self) -> &CompositeSystem {
        &self.sys
    }

    pub fn params(&self) -> &BeamSplitterParams {
        &self.params
    }

    pub fn unitary(&self) -> &Operator {
        &self.unitary
    }

    /// `U ρ U*`, the Schrödinger-picture dual of `X ↦ U* X U`.
    pub fn conjugate(&self, rho: &Operator) -> Operator {
        &self.unitary * rho * self.unitary.adjoint()
    }

    /// Output `ρ_I = tr_B(U (ρ_A ⊗ ρ_B) U*)`.
    pub fn apply(&self, rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Result<DensityMatrix> {
        if rho_a.n_modes() != self.sys.register_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.sys.register().dim(),
                found: rho_a.dim(),
            });
        }
        let joint = embed(rho_a, rho_b)?;
        let out = self.conjugate(joint.matrix());
        partial_trace_b(&self.sys, &DensityMatrix::new((&out + out.adjoint()) * c(0.5))?)
    }

    /// The linear map `X ↦ tr_B(U (X ⊗ ρ_B) U*)` on arbitrary register
    /// operators, used for the Choi matrix.
    pub fn map_with_environment(&self, x: &Operator, rho_b: &DensityMatrix) -> Result<Operator> {
        linalg::ensure_dim(x, self.sys.register().dim())?;
        let joint = linalg::kron(x, rho_b.matrix());
        partial_trace_last(&self.conjugate(&joint), self.sys.register_modes())
    }
}

pub fn apply_beam_splitter_channel(rho_a: &DensityMatrix, rho_b: &DensityMatrix, lambda: f64) -> Result<DensityMatrix> {
    BeamSplitter::new(rho_a.n_modes(), lambda)?.apply(rho_a, rho_b)
}

/// Channel output with the quantities that are checked on every run.
#[derive(Clone, Debug)]
pub struct ChannelReport {
    pub lambda: f64,
    pub covariance_a: CovarianceMatrix,
    pub covariance_b: CovarianceMatrix,
    pub output: DensityMatrix,
    pub output_covariance: CovarianceMatrix,
    /// `‖Γ_I − (λΓ_A + (1 − λ)Γ_B)‖_max`.
    pub mixing_defect: f64,
    /// Trace of the unnormalized reduced state minus one.
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
}

pub fn beam_splitter_report(rho_a: &DensityMatrix, rho_b: &DensityMatrix, lambda: f64) -> Result<ChannelReport> {
    let bs = BeamSplitter::new(rho_a.n_modes(), lambda)?;
    let alg = bs.system().register();
    let joint = embed(rho_a, rho_b)?;
    let raw = partial_trace_last(&bs.conjugate(joint.matrix()), bs.system().register_modes())?;
    let trace_defect = (raw.trace() - c(1.0)).norm();
    let output = bs.apply(rho_a, rho_b)?;
    let covariance_a = covariance_of(alg, rho_a)?;
    let covariance_b = covariance_of(alg, rho_b)?;
    let output_covariance = covariance_of(alg, &output)?;
    let predicted = CovarianceMatrix::mix(lambda, &covariance_a, &covariance_b)?;
    let mixing_defect = (output_covariance.matrix() - predicted.matrix()).abs().max();
    let min_eigenvalue = output.eigenvalues()[0];
    Ok(ChannelReport {
        lambda,
        covariance_a,
        covariance_b,
        output,
        output_covariance,
        mixing_defect,
        trace_defect,
        min_eigenvalue,
    })
}

/// Largest defect of `U* R_j U = √λ R_j + √(1 − λ) S_j` over all `j`, and
/// of the partner relation `U* S_j U = √λ S_j − √(1 − λ) R_j`.
pub fn heisenberg_defect(sys: &CompositeSystem, p: &BeamSplitterParams, u: &Operator) -> f64 {
    let (cs, sn) = (p.cos_theta(), p.sin_theta());
    let mut worst: f64 = 0.0;
    for j in 0..sys.register().generators() {
        let (r, s) = (sys.r_op(j), sys.s_op(j));
        let r_out = u.adjoint() * r * u;
        let s_out = u.adjoint() * s * u;
        worst = worst.max(linalg::max_abs_diff(&r_out, &(r * c(cs) + s * c(sn))));
        worst = worst.max(linalg::max_abs_diff(&s_out, &(s * c(cs) - r * c(sn))));
    }
    worst
}

/// Checks `U* D_j U = M_λ D_j` for the annihilation operators
/// `D_j = (B(ψ_j), C(ψ_j))` of both registers, with
/// `M_λ = [[√λ, √(1−λ)], [−√(1−λ), √λ]]`.
pub fn field_mode_mixing_check(sys: &CompositeSystem, lambda: f64) -> Result<ExperimentReport> {
    let p = BeamSplitterParams::new(lambda)?;
    let u = beam_splitter_unitary(sys, &p);
    let m = [[p.cos_theta(), p.sin_theta()], [-p.sin_theta(), p.cos_theta()]];
    let half_i = Complex64::new(0.0, 0.5);
    let mut worst: f64 = 0.0;
    for k in 0..sys.register_modes() {
        let b = sys.r_op(2 * k) * c(0.5) + sys.r_op(2 * k + 1) * half_i;
        let cc = sys.s_op(2 * k) * c(0.5) + sys.s_op(2 * k + 1) * half_i;
        let fields = [b, cc];
        for (row, coeffs) in m.iter().enumerate() {
            let evolved = u.adjoint() * &fields[row] * &u;
            let predicted = &fields[0] * c(coeffs[0]) + &fields[1] * c(coeffs[1]);
            worst = worst.max(linalg::max_abs_diff(&evolved, &predicted));
        }
    }
    let mut report = ExperimentReport::new("field-mode-mixing")
        .param("modes", sys.register_modes())
        .param("lambda", lambda);
    report.push(CheckRecord::within("mode mixing U*DU = M D", worst, 1e-10));
    report.push(CheckRecord::within(
        "Heisenberg relation",
        heisenberg_defect(sys, &p, &u),
        1e-10,
    ));
    Ok(report)
}

/// Superoperator of `L A = 2 Σ_j (R_j A R_j − A)` on column-major `vec(A)`:
/// `𝕃 = 2 Σ_j (R_jᵀ ⊗ R_j) − 4N·𝟙`. It is Hermitian because every `R_j`
/// is.
pub fn liouvillean_superoperator(alg: &CliffordAlgebra) -> Operator {
    let d = alg.dim();
    let mut l = linalg::identity(d * d) * c(-2.0 * alg.generators() as f64);
    for r in alg.majoranas() {
        l += linalg::kron(&r.transpose(), r) * c(2.0);
    }
    l
}

fn vectorize(a: &Operator) -> DVector<Complex64> {
    DVector::from_column_slice(a.as_slice())
}

fn unvectorize(v: &DVector<Complex64>, d: usize) -> Operator {
    DMatrix::from_column_slice(d, d, v.as_slice())
}

/// `e^{tL}` from the eigendecomposition of the Hermitian superoperator.
#[derive(Clone, Debug)]
pub struct Semigroup {
    dim: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: Operator,
}

impl Semigroup {
    pub fn new(alg: &CliffordAlgebra) -> Result<Self> {
        if alg.n_modes() > MAX_SEMIGROUP_MODES {
            return Err(Error::ModeCount(alg.n_modes()));
        }
        let (eigenvalues, eigenvectors) = linalg::hermitian_eigen(&liouvillean_superoperator(alg));
        Ok(Self {
            dim: alg.dim(),
            eigenvalues,
            eigenvectors,
        })
    }

    /// Spectrum of `L`, ascending.
    pub fn spectrum(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `e^{t𝕃}` as a `d² × d²` matrix.
    pub fn propagator(&self, t: f64) -> Result<Operator> {
        check_time(t)?;
        let vals: Vec<Complex64> = self.eigenvalues.iter().map(|&x| c((t * x).exp())).collect();
        Ok(linalg::spectral_rebuild(&vals, &self.eigenvectors))
    }

    pub fn evolve_operator(&self, a: &Operator, t: f64) -> Result<Operator> {
        linalg::ensure_dim(a, self.dim)?;
        check_time(t)?;
        let v = vectorize(a);
        let coeffs = self.eigenvectors.adjoint() * v;
        let scaled = DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(&self.eigenvalues).map(|(z, &x)| z * (t * x).exp()),
        );
        Ok(unvectorize(&(&self.eigenvectors * scaled), self.dim))
    }

    pub fn evolve(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        let out = self.evolve_operator(rho.matrix(), t)?;
        DensityMatrix::new((&out + out.adjoint()) * c(0.5))
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// `ρ_t = e^{tL} ρ`.
pub fn semigroup_evolve(alg: &CliffordAlgebra, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    Semigroup::new(alg)?.evolve(rho, t)
}

/// Fixed-step classical Runge–Kutta integration of `dρ/dt = Lρ`.
pub fn semigroup_evolve_rk4(alg: &CliffordAlgebra, rho: &DensityMatrix, t: f64, steps: usize) -> Result<Operator> {
    check_time(t)?;
    if steps == 0 {
        return Err(Error::InvalidStep(0.0));
    }
    let dt = t / steps as f64;
    let mut x = rho.matrix().clone();
    for _ in 0..steps {
        let k1 = alg.liouvillean(&x)?;
        let k2 = alg.liouvillean(&(&x + &k1 * c(dt / 2.0)))?;
        let k3 = alg.liouvillean(&(&x + &k2 * c(dt / 2.0)))?;
        let k4 = alg.liouvillean(&(&x + &k3 * c(dt)))?;
        x += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(dt / 6.0);
    }
    Ok(x)
}

/// Compares `E(e^{t_A L}ρ_A ⊗ e^{t_B L}ρ_B)` with `e^{t_I L} E(ρ_A ⊗ ρ_B)`,
/// `t_I = λ t_A + (1 − λ) t_B`.
///
/// Covariances decay as `e^{−8t}`, so the two sides have covariances
/// `λe^{−8t_A}Γ_A + (1−λ)e^{−8t_B}Γ_B` and `e^{−8t_I}(λΓ_A + (1−λ)Γ_B)`.
/// These agree for `t_A = t_B` and differ in general otherwise; the
/// analytic difference is reported next to the measured one.
pub fn semigroup_time_compatibility(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    lambda: f64,
    t_a: f64,
    t_b: f64,
) -> Result<ExperimentReport> {
    check_time(t_a)?;
    check_time(t_b)?;
    let bs = BeamSplitter::new(rho_a.n_modes(), lambda)?;
    let alg = bs.system().register();
    let semigroup = Semigroup::new(alg)?;
    let t_i = lambda * t_a + (1.0 - lambda) * t_b;

    let lhs = bs.apply(&semigroup.evolve(rho_a, t_a)?, &semigroup.evolve(rho_b, t_b)?)?;
    let rhs = semigroup.evolve(&bs.apply(rho_a, rho_b)?, t_i)?;
    let gl = covariance_of(alg, &lhs)?;
    let gr = covariance_of(alg, &rhs)?;
    let cov_defect = (gl.matrix() - gr.matrix()).abs().max();
    let full_defect = linalg::max_abs_diff(lhs.matrix(), rhs.matrix());

    let ga = covariance_of(alg, rho_a)?;
    let gb = covariance_of(alg, rho_b)?;
    let decay = |t: f64| (-8.0 * t).exp();
    let analytic =
        ga.matrix() * (lambda * (decay(t_a) - decay(t_i))) + gb.matrix() * ((1.0 - lambda) * (decay(t_b) - decay(t_i)));

    let mut report = ExperimentReport::new("semigroup-time-compatibility")
        .param("modes", alg.n_modes())
        .param("lambda", lambda)
        .param("t_a", t_a)
        .param("t_b", t_b)
        .param("t_i", t_i);
    report.push(CheckRecord::within("covariance intertwining", cov_defect, 1e-9));
    report.push(CheckRecord::informational("full matrix defect", full_defect));
    report.push(CheckRecord::informational(
        "analytic covariance defect",
        analytic.abs().max(),
    ));
    Ok(report)
}

/// Choi matrix `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|) / d` of a linear map on `d × d`
/// matrices.
pub fn choi_matrix(dim: usize, channel: &dyn Fn(&Operator) -> Result<Operator>) -> Result<Operator> {
    let mut choi: Option<Operator> = None;
    for i in 0..dim {
        for j in 0..dim {
            let mut unit = linalg::zeros(dim);
            unit[(i, j)] = c(1.0);
            let image = channel(&unit)?;
            let block = linalg::kron(&unit, &image) * c(1.0 / dim as f64);
            choi = Some(match choi {
                Some(acc) => acc + block,
                None => block,
            });
        }
    }
    choi.ok_or(Error::ModeCount(0))
}

/// Complete positivity and trace preservation from the Choi matrix.
pub fn choi_cptp_check(n_modes: usize, channel: &dyn Fn(&Operator) -> Result<Operator>) -> Result<ExperimentReport> {
    let dim = 1usize << n_modes;
    let choi = choi_matrix(dim, channel)?;
    let herm = linalg::hermitian_defect(&choi);
    let min = linalg::hermitian_eigenvalues(&choi)[0];
    // Tracing the output factor must give 𝟙/d on the input factor.
    let mut tp: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let tr: Complex64 = (0..dim).map(|k| choi[(i * dim + k, j * dim + k)]).sum();
            let target = if i == j { 1.0 / dim as f64 } else { 0.0 };
            tp = tp.max((tr - c(target)).norm() * dim as f64);
        }
    }
    let mut report = ExperimentReport::new("cptp").param("modes", n_modes);
    report.push(CheckRecord::with_value(
        "choi min eigenvalue",
        min,
        (-min).max(0.0),
        1e-10,
    ));
    report.push(CheckRecord::within("choi hermiticity", herm, 1e-10));
    report.push(CheckRecord::within("trace preservation", tp, 1e-10));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_transmissivity_angle() {
        let p = BeamSplitterParams::new(0.5).unwrap();
        assert!((p.theta() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((p.theta().cos() - p.cos_theta()).abs() < 1e-12);
        assert!((p.theta().sin() - p.sin_theta()).abs() < 1e-12);
        assert!(BeamSplitterParams::new(1.5).is_err());
        assert!(BeamSplitterParams::new(-0.1).is_err());
    }

    #[test]
    fn product_and_exponential_unitaries_agree() {
        let sys = CompositeSystem::new(2).unwrap();
        for lambda in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let p = BeamSplitterParams::new(lambda).unwrap();
            let a = beam_splitter_unitary(&sys, &p);
            let b = beam_splitter_unitary_exp(&sys, &p).unwrap();
            assert!(linalg::max_abs_diff(&a, &b) < 1e-12, "λ = {lambda}");
        }
    }

    #[test]
    fn liouvillean_superoperator_matches_operator_form() {
        let alg = CliffordAlgebra::new(2).unwrap();
        let l = liouvillean_superoperator(&alg);
        let a = alg.majorana(0) * alg.majorana(3) + alg.majorana(1) * c(0.3);
        let direct = alg.liouvillean(&a).unwrap();
        let via = unvectorize(&(&l * vectorize(&a)), alg.dim());
        assert!(linalg::max_abs_diff(&direct, &via) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = DMatrix::from_fn(2, 2, |i, j| c((i + 2 * j) as f64));
        let b = DMatrix::from_fn(4, 4, |i, j| c(if i == j { 0.25 } else { 0.0 }));
        let m = linalg::kron(&a, &b);
        assert!(linalg::max_abs_diff(&partial_trace_last(&m, 2).unwrap(), &a) < 1e-15);
    }
}
