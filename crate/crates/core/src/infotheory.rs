//! Entropies, quantum Fisher information and the entropy power inequality
//! experiments.
//!
//! Entropies are in nats. The entropy power of an `N`-mode state is
//! `E = e^{S/N}`, so it runs from 1 (pure) to 2 (maximally mixed).
//!
//! The Fisher information of a generator `R_j` is the second derivative at
//! zero of `θ ↦ S(ρ‖ρ_θ)`. For the unitary displacement
//! `ρ_θ = e^{iθR_j} ρ e^{−iθR_j}` this equals
//! `J_j = Tr(ρ [R_j, [R_j, ln ρ]]) = 2 S(R_jρR_j ‖ ρ) ≥ 0`, and it is the
//! quantity for which `dS(ρ_t)/dt = Σ_j J_j` along the semigroup. The
//! similarity displacement `e^{θR_j} ρ e^{−θR_j}` gives `−J_j` instead; both
//! displacements are available through [`DisplacementKind`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channels::{embed, BeamSplitter, Semigroup};
use crate::clifford::CliffordAlgebra;
use crate::error::{Error, Result};
use crate::gaussian::{covariance_of, trace_of_product, CovarianceMatrix, DensityMatrix};
use crate::linalg::{self, c, Operator, I};
use crate::report::{CheckRecord, ExperimentReport};

/// Eigenvalues at or below this contribute nothing to `−Σ p ln p`.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// Floor applied to eigenvalues before taking logarithms of a state.
pub const LOG_CLIP: f64 = 1e-12;

/// Default finite-difference step in the displacement angle.
pub const DEFAULT_THETA_STEP: f64 = 1e-3;

/// Default finite-difference step in semigroup time.
pub const DEFAULT_TIME_STEP: f64 = 1e-4;

pub fn entropy_from_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&p| p > ENTROPY_CUTOFF)
        .map(|&p| -p * p.ln())
        .sum()
}

/// `S(ρ) = −Tr(ρ ln ρ)`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_from_spectrum(&rho.eigenvalues())
}

/// Binary entropy `h(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_from_spectrum(&[p, 1.0 - p])
}

/// `Σ_j h((1 + λ_j)/2)`, the entropy of the Gaussian state with covariance `Γ`.
pub fn gaussian_entropy(gamma: &CovarianceMatrix) -> f64 {
    gamma
        .lambdas()
        .iter()
        .map(|&l| binary_entropy((1.0 + l.min(1.0)) / 2.0))
        .sum()
}

/// `J = 8 Σ_j λ_j artanh λ_j` for a full-rank Gaussian state.
pub fn gaussian_fisher(gamma: &CovarianceMatrix) -> f64 {
    gamma.lambdas().iter().map(|&l| 8.0 * l * l.atanh()).sum()
}

pub fn entropy_power_from_entropy(entropy: f64, n_modes: usize) -> f64 {
    (entropy / n_modes as f64).exp()
}

/// `E = e^{S(ρ)/N}`.
pub fn entropy_power(rho: &DensityMatrix, n_modes: usize) -> Result<f64> {
    if n_modes == 0 {
        return Err(Error::ModeCount(0));
    }
    if rho.n_modes() != n_modes {
        return Err(Error::DimensionMismatch {
            expected: 1 << n_modes,
            found: rho.dim(),
        });
    }
    Ok(entropy_power_from_entropy(von_neumann_entropy(rho), n_modes))
}

/// `ln ρ` with eigenvalues floored at [`LOG_CLIP`] and renormalized.
#[derive(Clone, Debug)]
pub struct StateLog {
    pub log: Operator,
    /// Number of eigenvalues that were raised to the floor.
    pub clipped: usize,
}

pub fn state_log(rho: &DensityMatrix) -> StateLog {
    let (vals, vecs) = linalg::hermitian_eigen(rho.matrix());
    let clipped = vals.iter().filter(|&&v| v < LOG_CLIP).count();
    let floored: Vec<f64> = vals.iter().map(|&v| v.max(LOG_CLIP)).collect();
    let total: f64 = floored.iter().sum();
    let logs: Vec<Complex64> = floored.iter().map(|&v| c((v / total).ln())).collect();
    StateLog {
        log: linalg::spectral_rebuild(&logs, &vecs),
        clipped,
    }
}

/// `S(ρ₁‖ρ₂) = Tr(ρ₁(ln ρ₁ − ln ρ₂))`, or `+∞` when the support of `ρ₁`
/// is not contained in that of `ρ₂`.
pub fn relative_entropy(rho1: &DensityMatrix, rho2: &DensityMatrix) -> f64 {
    if rho1.dim() != rho2.dim() {
        return f64::NAN;
    }
    let (p, u) = linalg::hermitian_eigen(rho1.matrix());
    for (k, &pk) in p.iter().enumerate() {
        if pk > 1e-12 {
            let v = u.column(k);
            let expectation = (v.adjoint() * rho2.matrix() * v)[(0, 0)].re;
            if expectation <= 1e-12 {
                return f64::INFINITY;
            }
        }
    }
    let (q, w) = linalg::hermitian_eigen(rho2.matrix());
    let mut cross = 0.0;
    for (k, &qk) in q.iter().enumerate() {
        let v = w.column(k);
        let weight = (v.adjoint() * rho1.matrix() * v)[(0, 0)].re;
        if weight <= 1e-15 {
            continue;
        }
        if qk <= 0.0 {
            return f64::INFINITY;
        }
        cross += weight * qk.ln();
    }
    let own: f64 = p.iter().filter(|&&x| x > ENTROPY_CUTOFF).map(|&x| x * x.ln()).sum();
    own - cross
}

/// How a generator displaces a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DisplacementKind {
    /// `e^{θR} ρ e^{−θR}` with `e^{θR} = cosh θ + sinh θ R`.
    #[default]
    Similarity,
    /// `e^{iθR} ρ e^{−iθR}` with `e^{iθR} = cos θ + i sin θ R`.
    Unitary,
}

/// Displaced state together with its logarithm, obtained by conjugating
/// `ln ρ` with the same transformation.
#[derive(Clone, Debug)]
pub struct DisplacedState {
    pub generator: usize,
    pub theta: f64,
    pub kind: DisplacementKind,
    pub matrix: Operator,
    pub log: Operator,
    pub clipped: usize,
}

fn displacement_pair(alg: &CliffordAlgebra, j: usize, theta: f64, kind: DisplacementKind) -> (Operator, Operator) {
    let r = alg.majorana(j);
    let id = alg.identity();
    match kind {
        DisplacementKind::Similarity => {
            let (ch, sh) = (theta.cosh(), theta.sinh());
            (id * c(ch) + r * c(sh), id * c(ch) - r * c(sh))
        }
        DisplacementKind::Unitary => {
            let (cs, sn) = (theta.cos(), theta.sin());
            (id * c(cs) + r * (I * sn), id * c(cs) - r * (I * sn))
        }
    }
}

pub fn displaced_state(alg: &CliffordAlgebra, rho: &DensityMatrix, j: usize, theta: f64) -> Result<DisplacedState> {
    displaced_state_with(alg, rho, j, theta, DisplacementKind::Similarity)
}

pub fn displaced_state_with(
    alg: &CliffordAlgebra,
    rho: &DensityMatrix,
    j: usize,
    theta: f64,
    kind: DisplacementKind,
) -> Result<DisplacedState> {
    alg.check(rho.matrix())?;
    alg.check_index(j)?;
    let log = state_log(rho);
    displaced_with_log(alg, rho, &log, j, theta, kind)
}

fn displaced_with_log(
    alg: &CliffordAlgebra,
    rho: &DensityMatrix,
    log: &StateLog,
    j: usize,
    theta: f64,
    kind: DisplacementKind,
) -> Result<DisplacedState> {
    if !theta.is_finite() {
        return Err(Error::NonFinite);
    }
    let (d, d_inv) = displacement_pair(alg, j, theta, kind);
    Ok(DisplacedState {
        generator: j,
        theta,
        kind,
        matrix: &d * rho.matrix() * &d_inv,
        log: &d * &log.log * &d_inv,
        clipped: log.clipped,
    })
}

/// `Tr(ρ(ln ρ − ln ρ_θ))` for a displaced `ρ_θ`; real part.
pub fn relative_entropy_to_displaced(rho: &DensityMatrix, log: &StateLog, displaced: &DisplacedState) -> f64 {
    trace_of_product(rho.matrix(), &(&log.log - &displaced.log)).re
}

/// `Tr(ρ [X, [X, ln ρ]])` for an arbitrary Hermitian generator `X`.
pub fn fisher_info_for(rho: &DensityMatrix, log: &StateLog, x: &Operator) -> f64 {
    let inner = linalg::commutator(x, &log.log);
    trace_of_product(rho.matrix(), &linalg::commutator(x, &inner)).re
}

/// Fisher information `J_j = Tr(ρ [R_j, [R_j, ln ρ]])` of generator `j`
/// (0-based offset).
pub fn fisher_info(alg: &CliffordAlgebra, rho: &DensityMatrix, j: usize) -> Result<f64> {
    alg.check(rho.matrix())?;
    alg.check_index(j)?;
    Ok(fisher_info_for(rho, &state_log(rho), alg.majorana(j)))
}

/// Central second difference of `θ ↦ S(ρ‖ρ_θ)` under the unitary
/// displacement, the route that matches [`fisher_info`].
pub fn fisher_info_fd(alg: &CliffordAlgebra, rho: &DensityMatrix, j: usize, h: f64) -> Result<f64> {
    fisher_info_fd_with(alg, rho, j, h, DisplacementKind::Unitary)
}

pub fn fisher_info_fd_with(
    alg: &CliffordAlgebra,
    rho: &DensityMatrix,
    j: usize,
    h: f64,
    kind: DisplacementKind,
) -> Result<f64> {
    if !(1e-5..=1e-2).contains(&h) {
        return Err(Error::InvalidStep(h));
    }
    alg.check(rho.matrix())?;
    alg.check_index(j)?;
    let log = state_log(rho);
    let plus = displaced_with_log(alg, rho, &log, j, h, kind)?;
    let minus = displaced_with_log(alg, rho, &log, j, -h, kind)?;
    let sp = relative_entropy_to_displaced(rho, &log, &plus);
    let sm = relative_entropy_to_displaced(rho, &log, &minus);
    if !sp.is_finite() || !sm.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok((sp + sm) / (h * h))
}

/// Richardson extrapolation `(4 D(h/2) − D(h)) / 3` of the second difference.
pub fn fisher_info_richardson(alg: &CliffordAlgebra, rho: &DensityMatrix, j: usize, h: f64) -> Result<f64> {
    let coarse = fisher_info_fd(alg, rho, j, h)?;
    let fine = fisher_info_fd(alg, rho, j, h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Entropy variation rate `J(ω) = Σ_j J_j`.
pub fn entropy_variation_rate(alg: &CliffordAlgebra, rho: &DensityMatrix) -> Result<f64> {
    alg.check(rho.matrix())?;
    let log = state_log(rho);
    Ok(alg.majoranas().iter().map(|r| fisher_info_for(rho, &log, r)).sum())
}

/// `−Tr(Lρ · ln ρ)`, the same rate written through the Liouvillean.
pub fn entropy_variation_rate_liouvillean(alg: &CliffordAlgebra, rho: &DensityMatrix) -> Result<f64> {
    let l_rho = alg.liouvillean(rho.matrix())?;
    Ok(-trace_of_product(&l_rho, &state_log(rho).log).re)
}

#[derive(Clone, Debug)]
pub struct EntropyReport {
    pub entropy: f64,
    pub entropy_power: f64,
    pub per_generator_fisher: Vec<f64>,
    pub total_fisher: f64,
    pub clipped_eigenvalues: usize,
}

pub fn entropy_report(alg: &CliffordAlgebra, rho: &DensityMatrix) -> Result<EntropyReport> {
    alg.check(rho.matrix())?;
    let log = state_log(rho);
    let per: Vec<f64> = alg.majoranas().iter().map(|r| fisher_info_for(rho, &log, r)).collect();
    let entropy = von_neumann_entropy(rho);
    Ok(EntropyReport {
        entropy,
        entropy_power: entropy_power_from_entropy(entropy, alg.n_modes()),
        total_fisher: per.iter().sum(),
        per_generator_fisher: per,
        clipped_eigenvalues: log.clipped,
    })
}

/// de Bruijn identity `dS(ω_t)/dt = J(ω_t)` at one time, with the time
/// derivative from a central difference of step `h` (one-sided second
/// order when `t < h`).
pub fn debruijn_check(alg: &CliffordAlgebra, rho: &DensityMatrix, t: f64, h: f64) -> Result<ExperimentReport> {
    let semigroup = Semigroup::new(alg)?;
    debruijn_check_with(alg, &semigroup, rho, t, h)
}

pub fn debruijn_check_with(
    alg: &CliffordAlgebra,
    semigroup: &Semigroup,
    rho: &DensityMatrix,
    t: f64,
    h: f64,
) -> Result<ExperimentReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidStep(h));
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let s_at = |tau: f64| semigroup.evolve(rho, tau).map(|r| von_neumann_entropy(&r));
    let derivative = if t >= h {
        (s_at(t + h)? - s_at(t - h)?) / (2.0 * h)
    } else {
        (-3.0 * s_at(t)? + 4.0 * s_at(t + h)? - s_at(t + 2.0 * h)?) / (2.0 * h)
    };
    let rho_t = semigroup.evolve(rho, t)?;
    let j = entropy_variation_rate(alg, &rho_t)?;
    let rel = (derivative - j).abs() / j.max(1e-6);
    let mut report = ExperimentReport::new("debruijn")
        .param("modes", alg.n_modes())
        .param("t", t)
        .param("h", h);
    report.push(CheckRecord::informational("dS/dt", derivative));
    report.push(CheckRecord::informational("J", j));
    report.push(CheckRecord::with_value("relative defect", rel, rel, 1e-4));
    Ok(report)
}

/// Stam inequality `η² J_I ≤ α² J_A + β² J_B`, `η = √λ α + √(1−λ) β`, and
/// the harmonic form `λ/J_A + (1−λ)/J_B ≤ 1/J_I`.
pub fn stam_check(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    lambda: f64,
    alpha: f64,
    beta: f64,
) -> Result<ExperimentReport> {
    let bs = BeamSplitter::new(rho_a.n_modes(), lambda)?;
    let alg = bs.system().register();
    let out = bs.apply(rho_a, rho_b)?;
    let ja = entropy_variation_rate(alg, rho_a)?;
    let jb = entropy_variation_rate(alg, rho_b)?;
    let ji = entropy_variation_rate(alg, &out)?;
    let eta = lambda.sqrt() * alpha + (1.0 - lambda).sqrt() * beta;
    let mut report = ExperimentReport::new("stam")
        .param("modes", alg.n_modes())
        .param("lambda", lambda)
        .param("alpha", alpha)
        .param("beta", beta);
    report.push(CheckRecord::informational("J_A", ja));
    report.push(CheckRecord::informational("J_B", jb));
    report.push(CheckRecord::informational("J_I", ji));
    let slack = alpha * alpha * ja + beta * beta * jb - eta * eta * ji;
    report.push(CheckRecord::with_value(
        "eta form slack",
        slack,
        (-slack).max(0.0),
        1e-9,
    ));
    if ja.min(jb).min(ji) <= 1e-12 {
        report.push(CheckRecord::skipped(
            "harmonic form slack",
            "a Fisher information vanishes",
        ));
    } else {
        let slack = 1.0 / ji - lambda / ja - (1.0 - lambda) / jb;
        report.push(CheckRecord::with_value(
            "harmonic form slack",
            slack,
            (-slack).max(0.0),
            1e-9,
        ));
    }
    Ok(report)
}

/// The weights `α ∝ 1/J_A`, `β ∝ 1/J_B` (summing to one) used in the
/// entropy power argument. `None` when either information vanishes.
pub fn theorem_weights(ja: f64, jb: f64) -> Option<(f64, f64)> {
    if ja <= 1e-12 || jb <= 1e-12 {
        return None;
    }
    let s = 1.0 / ja + 1.0 / jb;
    Some((1.0 / ja / s, 1.0 / jb / s))
}

/// Entropy powers along the coupled time reparametrization used in the
/// monotonicity argument.
///
/// `t_A`, `t_B` solve `dt_C/dt = E_C(t_C)`, `t_C(0) = 0`, and
/// `t_I = λ t_A + (1 − λ) t_B`. Each `E_C(τ)` is the entropy power of the
/// Gaussian state with covariance `e^{−8τ}Γ_C`.
#[derive(Clone, Debug, Default)]
pub struct EpiTrace {
    pub times: Vec<f64>,
    pub t_a: Vec<f64>,
    pub t_b: Vec<f64>,
    pub t_i: Vec<f64>,
    pub e_a: Vec<f64>,
    pub e_b: Vec<f64>,
    pub e_i: Vec<f64>,
    pub f: Vec<f64>,
}

impl EpiTrace {
    /// Largest single-step decrease of `f` (zero if nondecreasing).
    pub fn max_decrease(&self) -> f64 {
        self.f.windows(2).map(|w| (w[0] - w[1]).max(0.0)).fold(0.0, f64::max)
    }
}

fn decayed_entropy_power(lambdas: &[f64], tau: f64) -> f64 {
    let decay = (-8.0 * tau).exp();
    let s: f64 = lambdas.iter().map(|&l| binary_entropy((1.0 + decay * l) / 2.0)).sum();
    entropy_power_from_entropy(s, lambdas.len())
}

pub fn epi_trace(
    gamma_a: &CovarianceMatrix,
    gamma_b: &CovarianceMatrix,
    gamma_i: &CovarianceMatrix,
    lambda: f64,
    horizon: f64,
    dt: f64,
) -> Result<EpiTrace> {
    if !(dt > 0.0 && horizon > 0.0) {
        return Err(Error::InvalidStep(dt));
    }
    let (la, lb, li) = (gamma_a.lambdas(), gamma_b.lambdas(), gamma_i.lambdas());
    let ea = |tau: f64| decayed_entropy_power(&la, tau);
    let eb = |tau: f64| decayed_entropy_power(&lb, tau);
    let steps = (horizon / dt).round() as usize;
    let mut trace = EpiTrace::default();
    let (mut ta, mut tb) = (0.0_f64, 0.0_f64);
    for step in 0..=steps {
        let ti = lambda * ta + (1.0 - lambda) * tb;
        let (a, b, i) = (ea(ta), eb(tb), decayed_entropy_power(&li, ti));
        trace.times.push(step as f64 * dt);
        trace.t_a.push(ta);
        trace.t_b.push(tb);
        trace.t_i.push(ti);
        trace.e_a.push(a);
        trace.e_b.push(b);
        trace.e_i.push(i);
        trace.f.push((lambda * a + (1.0 - lambda) * b) / i);
        // The two clocks are uncoupled, so each takes its own RK4 step.
        ta = rk4_clock(&ea, ta, dt);
        tb = rk4_clock(&eb, tb, dt);
    }
    Ok(trace)
}

fn rk4_clock(rate: &impl Fn(f64) -> f64, t: f64, dt: f64) -> f64 {
    let k1 = rate(t);
    let k2 = rate(t + dt / 2.0 * k1);
    let k3 = rate(t + dt / 2.0 * k2);
    let k4 = rate(t + dt * k3);
    t + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Horizon and step of the trace emitted by [`epi_check`].
pub const EPI_TRACE_HORIZON: f64 = 3.0;
pub const EPI_TRACE_STEP: f64 = 0.01;

/// Outcome of [`epi_check`] with the data behind it.
#[derive(Clone, Debug)]
pub struct EpiOutcome {
    pub report: ExperimentReport,
    pub e_a: f64,
    pub e_b: f64,
    pub e_i: f64,
    pub trace: EpiTrace,
}

/// Entropy power inequality `E(ω_I) ≥ λE(ω_A) + (1−λ)E(ω_B)` for the
/// beam-splitter output, plus the monotone trace `f(t)`.
pub fn epi_check(rho_a: &DensityMatrix, rho_b: &DensityMatrix, lambda: f64) -> Result<EpiOutcome> {
    let bs = BeamSplitter::new(rho_a.n_modes(), lambda)?;
    epi_check_with(&bs, rho_a, rho_b)
}

pub fn epi_check_with(bs: &BeamSplitter, rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Result<EpiOutcome> {
    let lambda = bs.params().lambda();
    let alg = bs.system().register();
    let n = alg.n_modes();
    let out = bs.apply(rho_a, rho_b)?;
    let e_a = entropy_power(rho_a, n)?;
    let e_b = entropy_power(rho_b, n)?;
    let e_i = entropy_power(&out, n)?;
    let mixture = lambda * e_a + (1.0 - lambda) * e_b;

    let gamma_a = covariance_of(alg, rho_a)?;
    let gamma_b = covariance_of(alg, rho_b)?;
    let gamma_i = covariance_of(alg, &out)?;
    let trace = epi_trace(&gamma_a, &gamma_b, &gamma_i, lambda, EPI_TRACE_HORIZON, EPI_TRACE_STEP)?;

    let mut report = ExperimentReport::new("epi").param("modes", n).param("lambda", lambda);
    report.push(CheckRecord::informational("E_A", e_a));
    report.push(CheckRecord::informational("E_B", e_b));
    report.push(CheckRecord::informational("E_I", e_i));
    let slack = e_i - mixture;
    report.push(CheckRecord::with_value("epi slack", slack, (-slack).max(0.0), 1e-10));
    // The covariance route of the trace must reproduce the dense entropies.
    let route = (trace.e_i[0] - e_i)
        .abs()
        .max((trace.e_a[0] - e_a).abs())
        .max((trace.e_b[0] - e_b).abs());
    report.push(CheckRecord::within("trace start matches dense entropies", route, 1e-9));
    report.push(CheckRecord::within("f(t) nondecreasing", trace.max_decrease(), 1e-9));
    let last = trace.f.last().copied().unwrap_or(f64::NAN);
    report.push(CheckRecord::with_value(
        "f at saturation",
        last,
        (last - 1.0).abs(),
        1e-6,
    ));
    Ok(EpiOutcome {
        report,
        e_a,
        e_b,
        e_i,
        trace,
    })
}

/// Samples the trace's output entropy power against dense semigroup
/// evolution of the channel output at the given grid indices.
pub fn epi_trace_dense_defect(
    alg: &CliffordAlgebra,
    output: &DensityMatrix,
    trace: &EpiTrace,
    indices: &[usize],
) -> Result<f64> {
    let semigroup = Semigroup::new(alg)?;
    let mut worst: f64 = 0.0;
    for &k in indices {
        let evolved = semigroup.evolve(output, trace.t_i[k])?;
        worst = worst.max((entropy_power(&evolved, alg.n_modes())? - trace.e_i[k]).abs());
    }
    Ok(worst)
}

/// `J(ρ_A ⊗ ρ_B)` on the composite algebra.
pub fn composite_fisher(rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Result<f64> {
    let total = CliffordAlgebra::new(2 * rho_a.n_modes())?;
    entropy_variation_rate(&total, &embed(rho_a, rho_b)?)
}

/// Gauss–Kronrod 7/15 nodes and weights on `[−1, 1]`.
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod(f: &dyn Fn(f64) -> Operator, a: f64, b: f64) -> (Operator, f64) {
    let mid = (a + b) / 2.0;
    let half = (b - a) / 2.0;
    let centre = f(mid);
    let mut kronrod = &centre * c(GK_WEIGHTS[7]);
    let mut gauss = &centre * c(GAUSS_WEIGHTS[3]);
    for k in 0..7 {
        let pair = f(mid - half * GK_NODES[k]) + f(mid + half * GK_NODES[k]);
        kronrod += &pair * c(GK_WEIGHTS[k]);
        if k % 2 == 1 {
            gauss += &pair * c(GAUSS_WEIGHTS[k / 2]);
        }
    }
    let kronrod = kronrod * c(half);
    let gauss = gauss * c(half);
    let err = linalg::max_abs_diff(&kronrod, &gauss);
    (kronrod, err)
}

/// Adaptive Gauss–Kronrod integral of a matrix-valued function, bisecting
/// any panel whose Gauss/Kronrod gap exceeds its share of `tol`.
pub fn integrate_matrix(f: &dyn Fn(f64) -> Operator, a: f64, b: f64, tol: f64) -> Operator {
    let mut stack = vec![(a, b, 0u32)];
    let mut total: Option<Operator> = None;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = gauss_kronrod(f, lo, hi);
        let share = tol * (hi - lo) / (b - a);
        if err <= share.max(1e-15) || depth >= 40 {
            total = Some(match total {
                Some(acc) => acc + value,
                None => value,
            });
        } else {
            let mid = (lo + hi) / 2.0;
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    total.unwrap_or_else(|| linalg::zeros(0))
}

fn resolvent(rho: &Operator, x: f64) -> Operator {
    let shifted = rho + linalg::identity(rho.nrows()) * c(x);
    shifted
        .try_inverse()
        .unwrap_or_else(|| DMatrix::from_element(rho.nrows(), rho.ncols(), c(f64::NAN)))
}

/// `∫_X^∞ ((x + a)^{−1} − (x + b)^{−1}) dx = Σ_{k≥1} (−1)^k (aᵏ − bᵏ) / (k Xᵏ)`,
/// valid for `‖a‖, ‖b‖ < X`.
fn resolvent_tail(a: &Operator, b: &Operator, x: f64) -> Operator {
    let n = a.nrows();
    let mut pa = linalg::identity(n);
    let mut pb = linalg::identity(n);
    let mut sum = linalg::zeros(n);
    for k in 1..60 {
        pa = &pa * a * c(1.0 / x);
        pb = &pb * b * c(1.0 / x);
        let term = (&pa - &pb) * c(if k % 2 == 0 { 1.0 } else { -1.0 } / k as f64);
        sum += &term;
        if linalg::max_abs(&term) < 1e-18 {
            break;
        }
    }
    sum
}

/// Cut-off of the resolvent integrals; the remainder is added in closed form.
pub const RESOLVENT_CUTOFF: f64 = 50.0;

/// `ln ρ = ∫_0^∞ ((x + 1)^{−1} − (x + ρ)^{−1}) dx`.
pub fn log_by_quadrature(rho: &Operator, tol: f64) -> Operator {
    let id = linalg::identity(rho.nrows());
    let f = |x: f64| id.clone() * c(1.0 / (x + 1.0)) - resolvent(rho, x);
    integrate_matrix(&f, 0.0, RESOLVENT_CUTOFF, tol) + resolvent_tail(&id, rho, RESOLVENT_CUTOFF)
}

/// `ln ρ₂ − ln ρ₁ = ∫_0^∞ (x + ρ₁)^{−1} (ρ₂ − ρ₁) (x + ρ₂)^{−1} dx`.
pub fn log_difference_by_quadrature(rho1: &Operator, rho2: &Operator, tol: f64) -> Operator {
    let diff = rho2 - rho1;
    let f = |x: f64| resolvent(rho1, x) * &diff * resolvent(rho2, x);
    integrate_matrix(&f, 0.0, RESOLVENT_CUTOFF, tol) + resolvent_tail(rho1, rho2, RESOLVENT_CUTOFF)
}

/// Resolvent representations of `ln ρ₁`, `ln ρ₂` and `ln ρ₂ − ln ρ₁`
/// against eigendecomposition logarithms.
pub fn functional_identity_check(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<ExperimentReport> {
    linalg::ensure_dim(rho2.matrix(), rho1.dim())?;
    for rho in [rho1, rho2] {
        let min = rho.eigenvalues()[0];
        if min <= LOG_CLIP {
            return Err(Error::InvalidState(format!("not full rank (eigenvalue {min:e})")));
        }
    }
    let tol = 1e-9;
    let log1 = linalg::hermitian_function(rho1.matrix(), f64::ln);
    let log2 = linalg::hermitian_function(rho2.matrix(), f64::ln);
    let q1 = log_by_quadrature(rho1.matrix(), tol);
    let q2 = log_by_quadrature(rho2.matrix(), tol);
    let qd = log_difference_by_quadrature(rho1.matrix(), rho2.matrix(), tol);
    let mut report = ExperimentReport::new("functional-calculus").param("modes", rho1.n_modes());
    report.push(CheckRecord::within("ln rho1", linalg::max_abs_diff(&q1, &log1), 1e-6));
    report.push(CheckRecord::within("ln rho2", linalg::max_abs_diff(&q2, &log2), 1e-6));
    report.push(CheckRecord::within(
        "ln rho2 - ln rho1",
        linalg::max_abs_diff(&qd, &(&log2 - &log1)),
        1e-6,
    ));
    Ok(report)
}
