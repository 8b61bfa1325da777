use fermion_epi::channels::{
    apply_beam_splitter_channel, beam_splitter_report, beam_splitter_unitary, beam_splitter_unitary_exp,
    choi_cptp_check, embed, field_mode_mixing_check, heisenberg_defect, liouvillean_superoperator, partial_trace_b,
    partial_trace_last, semigroup_evolve, semigroup_evolve_rk4, semigroup_time_compatibility, BeamSplitter,
    BeamSplitterParams, CompositeSystem, Semigroup,
};
use fermion_epi::clifford::CliffordAlgebra;
use fermion_epi::error::Error;
use fermion_epi::gaussian::{covariance_of, wick_defect, CovarianceMatrix, DensityMatrix};
use fermion_epi::infotheory::von_neumann_entropy;
use fermion_epi::linalg::{self, c, max_abs_diff, Operator};
use fermion_epi::random::{random_even_state, random_gaussian_state, random_hermitian, trial_rng, DEFAULT_MAX_LAMBDA};
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::Config;

fn config() -> Config {
    Config {
        cases: 16,
        failure_persistence: None,
        ..Config::default()
    }
}

fn gaussian_pair(n: usize, seed: u64) -> (CliffordAlgebra, DensityMatrix, DensityMatrix) {
    let alg = CliffordAlgebra::new(n).unwrap();
    let mut rng = trial_rng(seed, 0);
    let (_, a) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA).unwrap();
    let (_, b) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA).unwrap();
    (alg, a, b)
}

#[test]
fn registers_anticommute() {
    for n in 1..=3 {
        assert!(CompositeSystem::new(n).unwrap().cross_anticommutation_defect() < 1e-12);
    }
    assert!(CompositeSystem::new(4).is_err());
}

#[test]
fn beam_splitter_is_unitary_with_heisenberg_action() {
    for n in 1..=2 {
        let sys = CompositeSystem::new(n).unwrap();
        for lambda in [0.0, 0.13, 0.5, 0.77, 1.0] {
            let p = BeamSplitterParams::new(lambda).unwrap();
            let u = beam_splitter_unitary(&sys, &p);
            let unitarity = max_abs_diff(&(&u * u.adjoint()), sys.total().identity());
            assert!(unitarity < 1e-10);
            assert!(heisenberg_defect(&sys, &p, &u) < 1e-12, "N = {n}, λ = {lambda}");
            let via_exp = beam_splitter_unitary_exp(&sys, &p).unwrap();
            assert!(max_abs_diff(&u, &via_exp) < 1e-12);
        }
    }
}

#[test]
fn half_transmissivity_mixes_evenly() {
    let sys = CompositeSystem::new(1).unwrap();
    let p = BeamSplitterParams::new(0.5).unwrap();
    let u = beam_splitter_unitary(&sys, &p);
    let r_out = u.adjoint() * sys.r_op(0) * &u;
    let expected = (sys.r_op(0) + sys.s_op(0)) * c(std::f64::consts::FRAC_1_SQRT_2);
    assert!(max_abs_diff(&r_out, &expected) < 1e-14);
}

#[test]
fn embedding_examples() {
    let mixed = DensityMatrix::maximally_mixed(2);
    let joint = embed(&mixed, &mixed).unwrap();
    assert!(max_abs_diff(joint.matrix(), DensityMatrix::maximally_mixed(4).matrix()) < 1e-16);
    let (alg, a, b) = gaussian_pair(2, 1);
    let joint = embed(&a, &b).unwrap();
    assert!((joint.matrix().trace() - c(1.0)).norm() < 1e-14);
    let total = CliffordAlgebra::new(4).unwrap();
    let gamma = covariance_of(&total, &joint).unwrap();
    let expected = covariance_of(&alg, &a)
        .unwrap()
        .direct_sum(&covariance_of(&alg, &b).unwrap());
    assert!((gamma.matrix() - expected.matrix()).abs().max() < 1e-12);
}

#[test]
fn embedding_rejects_odd_states() {
    // |+⟩⟨+| on one mode mixes parity sectors.
    let plus = DensityMatrix::new(DMatrix::from_element(2, 2, c(0.5))).unwrap();
    let mixed = DensityMatrix::maximally_mixed(1);
    assert!(matches!(embed(&plus, &mixed), Err(Error::OddParity(_))));
    assert!(matches!(embed(&mixed, &plus), Err(Error::OddParity(_))));
    assert!(embed(&mixed, &DensityMatrix::maximally_mixed(2)).is_err());
}

#[test]
fn partial_trace_examples() {
    let sys = CompositeSystem::new(2).unwrap();
    let (_, a, b) = gaussian_pair(2, 2);
    let reduced = partial_trace_b(&sys, &embed(&a, &b).unwrap()).unwrap();
    assert!(max_abs_diff(reduced.matrix(), a.matrix()) < 1e-14);
    let mixed = partial_trace_b(&sys, &DensityMatrix::maximally_mixed(4)).unwrap();
    assert!(max_abs_diff(mixed.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-16);
    assert!(partial_trace_b(&sys, &a).is_err());
}

#[test]
fn partial_trace_duality_on_operator_basis() {
    // Tr((A ⊗ 𝟙) ρ) = Tr(A tr_B ρ) for A running over the matrix units.
    let mut rng = trial_rng(3, 0);
    let h = random_hermitian(&mut rng, 16);
    let rho = h.adjoint() * &h;
    let tr = rho.trace();
    let rho = rho / tr;
    let reduced = partial_trace_last(&rho, 2).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let mut unit = linalg::zeros(4);
            unit[(i, j)] = c(1.0);
            let lifted = linalg::kron(&unit, &linalg::identity(4));
            let lhs = (&lifted * &rho).trace();
            let rhs = (&unit * &reduced).trace();
            worst = worst.max((lhs - rhs).norm());
        }
    }
    assert!(worst < 1e-12);
}

#[test]
fn channel_endpoints() {
    let (_, a, b) = gaussian_pair(2, 4);
    let one = apply_beam_splitter_channel(&a, &b, 1.0).unwrap();
    assert!(max_abs_diff(one.matrix(), a.matrix()) < 1e-14);
    let zero = apply_beam_splitter_channel(&a, &b, 0.0).unwrap();
    assert!(max_abs_diff(zero.matrix(), b.matrix()) < 1e-12);
    assert!(matches!(
        apply_beam_splitter_channel(&a, &b, 1.2),
        Err(Error::InvalidLambda(_))
    ));
}

#[test]
fn channel_mixes_covariances() {
    let (alg, a, b) = gaussian_pair(2, 5);
    let report = beam_splitter_report(&a, &b, 0.3).unwrap();
    assert!(report.mixing_defect < 1e-9);
    assert!(report.trace_defect < 1e-10);
    assert!(report.min_eigenvalue > -1e-10);
    assert!(wick_defect(&alg, &report.output, &[4]).unwrap() < 1e-9);
}

#[test]
fn channel_on_non_gaussian_even_inputs() {
    let alg = CliffordAlgebra::new(2).unwrap();
    let mut rng = trial_rng(6, 0);
    let a = random_even_state(&alg, &mut rng).unwrap();
    let b = random_even_state(&alg, &mut rng).unwrap();
    let report = beam_splitter_report(&a, &b, 0.6).unwrap();
    // The two-point data still mixes linearly.
    assert!(report.mixing_defect < 1e-9);
    assert!(report.output.is_even());
}

#[test]
fn field_modes_rotate() {
    for n in 1..=2 {
        let sys = CompositeSystem::new(n).unwrap();
        for lambda in [0.0, 0.5, 0.31, 1.0] {
            let report = field_mode_mixing_check(&sys, lambda).unwrap();
            assert!(report.pass, "{report}");
        }
    }
}

#[test]
fn semigroup_examples() {
    let (alg, a, _) = gaussian_pair(2, 7);
    let semigroup = Semigroup::new(&alg).unwrap();
    assert!(max_abs_diff(semigroup.evolve(&a, 0.0).unwrap().matrix(), a.matrix()) < 1e-13);
    let late = semigroup.evolve(&a, 3.0).unwrap();
    assert!(max_abs_diff(late.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-8);
    assert!(matches!(semigroup.evolve(&a, -0.1), Err(Error::NegativeTime(_))));
}

#[test]
fn superoperator_spectrum_is_minus_four_times_word_length_on_even_words() {
    let alg = CliffordAlgebra::new(2).unwrap();
    let semigroup = Semigroup::new(&alg).unwrap();
    let mut expected: Vec<f64> = (0u64..16)
        .map(|mask| {
            let k = mask.count_ones() as f64;
            if mask.count_ones() % 2 == 0 {
                -4.0 * k
            } else {
                4.0 * k - 8.0 * 2.0
            }
        })
        .collect();
    expected.sort_by(f64::total_cmp);
    for (a, b) in semigroup.spectrum().iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(linalg::hermitian_defect(&liouvillean_superoperator(&alg)) == 0.0);
}

#[test]
fn eigen_route_matches_integrator() {
    let (alg, a, _) = gaussian_pair(2, 8);
    let exact = semigroup_evolve(&alg, &a, 0.4).unwrap();
    let rk4 = semigroup_evolve_rk4(&alg, &a, 0.4, 400).unwrap();
    assert!(max_abs_diff(exact.matrix(), &rk4) < 1e-9);
}

#[test]
fn covariance_decay_rate_from_dense_evolution() {
    for n in 1..=2 {
        let (alg, a, _) = gaussian_pair(n, 9 + n as u64);
        let gamma0 = covariance_of(&alg, &a).unwrap();
        let semigroup = Semigroup::new(&alg).unwrap();
        for t in [0.05, 0.2, 0.5] {
            let gamma_t = covariance_of(&alg, &semigroup.evolve(&a, t).unwrap()).unwrap();
            let (i, j) = (0, 1);
            let rate = -(gamma_t.matrix()[(i, j)] / gamma0.matrix()[(i, j)]).ln() / t;
            assert!((rate - 8.0).abs() < 1e-6, "rate {rate}");
            let predicted = gamma0.scaled((-8.0 * t).exp()).unwrap();
            assert!((gamma_t.matrix() - predicted.matrix()).abs().max() < 1e-12);
        }
    }
}

#[test]
fn time_compatibility_at_equal_times() {
    let (_, a, b) = gaussian_pair(1, 12);
    let zero = semigroup_time_compatibility(&a, &b, 0.4, 0.0, 0.0).unwrap();
    assert!(zero.check("covariance intertwining").unwrap().defect < 1e-12);
    let equal = semigroup_time_compatibility(&a, &b, 0.4, 0.3, 0.3).unwrap();
    assert!(equal.pass, "{equal}");
    assert!(equal.check("full matrix defect").unwrap().value < 1e-9);
}

#[test]
fn time_compatibility_fails_for_unequal_times_as_predicted() {
    // With Γ_t = e^{−8t}Γ the covariance identity requires t_A = t_B; the
    // measured defect must equal the analytic one.
    let (_, a, b) = gaussian_pair(1, 13);
    let report = semigroup_time_compatibility(&a, &b, 0.4, 0.05, 0.2).unwrap();
    let measured = report.check("covariance intertwining").unwrap().defect;
    let analytic = report.check("analytic covariance defect").unwrap().value;
    assert!((measured - analytic).abs() < 1e-10);
    assert!(analytic > 1e-3);
    assert!(!report.pass);
}

#[test]
fn identity_channel_choi_is_maximally_entangled() {
    let identity = |x: &Operator| Ok(x.clone());
    let report = choi_cptp_check(2, &identity).unwrap();
    assert!(report.pass, "{report}");
    let min = report.check("choi min eigenvalue").unwrap().value;
    assert!(min.abs() < 1e-12);
}

#[test]
fn beam_splitter_and_semigroup_are_cptp() {
    let bs = BeamSplitter::new(1, 0.5).unwrap();
    let env = DensityMatrix::maximally_mixed(1);
    let channel = |x: &Operator| bs.map_with_environment(x, &env);
    assert!(choi_cptp_check(1, &channel).unwrap().pass);

    let alg = CliffordAlgebra::new(2).unwrap();
    let semigroup = Semigroup::new(&alg).unwrap();
    let evolve = |x: &Operator| semigroup.evolve_operator(x, 0.1);
    assert!(choi_cptp_check(2, &evolve).unwrap().pass);
}

#[test]
fn transposition_is_not_completely_positive() {
    let transpose = |x: &Operator| Ok(x.transpose());
    let report = choi_cptp_check(1, &transpose).unwrap();
    assert!(!report.pass);
    assert!(report.check("choi min eigenvalue").unwrap().value < -0.4);
}

#[test]
fn entropy_increases_along_semigroup() {
    let alg = CliffordAlgebra::new(2).unwrap();
    let mut rng = trial_rng(14, 0);
    let rho = random_even_state(&alg, &mut rng).unwrap();
    let semigroup = Semigroup::new(&alg).unwrap();
    let mut last = von_neumann_entropy(&rho);
    for k in 1..=30 {
        let s = von_neumann_entropy(&semigroup.evolve(&rho, 0.02 * k as f64).unwrap());
        assert!(s >= last - 1e-12);
        last = s;
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn semigroup_law(seed in any::<u64>(), s in 0.0f64..0.5, t in 0.0f64..0.5) {
        let alg = CliffordAlgebra::new(2).unwrap();
        let mut rng = trial_rng(seed, 0);
        let rho = random_even_state(&alg, &mut rng).unwrap();
        let semigroup = Semigroup::new(&alg).unwrap();
        let stepwise = semigroup.evolve(&semigroup.evolve(&rho, t).unwrap(), s).unwrap();
        let direct = semigroup.evolve(&rho, s + t).unwrap();
        prop_assert!(max_abs_diff(stepwise.matrix(), direct.matrix()) < 1e-9);
        prop_assert!(direct.eigenvalues()[0] > -1e-10);
    }

    #[test]
    fn channel_output_is_a_state(seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let (_, a, b) = gaussian_pair(2, seed);
        let report = beam_splitter_report(&a, &b, lambda).unwrap();
        prop_assert!(report.trace_defect < 1e-10);
        prop_assert!(report.min_eigenvalue > -1e-10);
        let predicted = CovarianceMatrix::mix(lambda, &report.covariance_a, &report.covariance_b).unwrap();
        prop_assert!((report.output_covariance.matrix() - predicted.matrix()).abs().max() < 1e-9);
    }

    #[test]
    fn semigroup_preserves_gaussianity(seed in any::<u64>(), t in 0.0f64..1.0) {
        let (alg, a, _) = gaussian_pair(2, seed);
        let evolved = semigroup_evolve(&alg, &a, t).unwrap();
        prop_assert!(wick_defect(&alg, &evolved, &[4]).unwrap() < 1e-9);
    }
}
