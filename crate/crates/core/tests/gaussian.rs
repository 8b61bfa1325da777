use fermion_epi::clifford::CliffordAlgebra;
use fermion_epi::gaussian::{
    block_diagonalize, covariance_of, direct_moment, gaussian_exp_form, gaussian_from_covariance, gibbs_state,
    pfaffian, pfaffian_elimination, pfaffian_permutation_sum, symbol_from_covariance, symbol_of, wick_defect,
    wick_from_covariance, wick_moment, CovarianceMatrix, DensityMatrix,
};
use fermion_epi::infotheory::{binary_entropy, von_neumann_entropy};
use fermion_epi::linalg::{self, c, max_abs_diff};
use fermion_epi::random::{
    random_antisymmetric, random_complex_antisymmetric, random_covariance, random_gaussian_state, random_orthogonal,
    random_pure_covariance, trial_rng, DEFAULT_MAX_LAMBDA,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::Config;

fn config() -> Config {
    Config {
        cases: 24,
        failure_persistence: None,
        ..Config::default()
    }
}

#[test]
fn pfaffian_squared_is_determinant() {
    let mut rng = trial_rng(100, 0);
    for size in (2..=10).step_by(2) {
        for _ in 0..5 {
            let m = random_complex_antisymmetric(&mut rng, size);
            let pf = pfaffian(&m).unwrap();
            let det = m.determinant();
            assert!((pf * pf - det).norm() <= 1e-8 * det.norm().max(1.0), "size {size}");
        }
    }
}

#[test]
fn elimination_matches_permutation_sum() {
    let mut rng = trial_rng(101, 0);
    for size in [2, 4, 6, 8] {
        for _ in 0..10 {
            let m = random_complex_antisymmetric(&mut rng, size);
            let a = pfaffian_elimination(&m).unwrap();
            let b = pfaffian_permutation_sum(&m).unwrap();
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0), "size {size}");
        }
    }
}

#[test]
fn pfaffian_of_rotated_matrix() {
    let mut rng = trial_rng(102, 0);
    for size in [4, 6, 8] {
        let m = random_antisymmetric(&mut rng, size);
        let mut q = random_orthogonal(&mut rng, size);
        // Flip one column so that both signs of det Q are exercised.
        if size == 6 {
            q.column_mut(0).neg_mut();
        }
        let det_q = q.determinant();
        let rotated = &q * &m * q.transpose();
        let lhs = pfaffian(&rotated.map(c)).unwrap();
        let rhs = pfaffian(&m.map(c)).unwrap() * det_q;
        assert!((lhs - rhs).norm() < 1e-9 * rhs.norm().max(1.0));
    }
}

#[test]
fn block_diagonal_form_reconstructs_covariance() {
    let mut rng = trial_rng(103, 0);
    for n in 1..=4 {
        let gamma = random_covariance(&mut rng, n, 1.0).unwrap();
        let form = block_diagonalize(&gamma);
        assert!(form.residual(&gamma) < 1e-12);
        assert!(form.lambdas.iter().all(|&l| l >= 0.0));
        assert!((form.det.abs() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn covariance_round_trip() {
    let mut rng = trial_rng(104, 0);
    for n in 1..=3 {
        let alg = CliffordAlgebra::new(n).unwrap();
        for _ in 0..5 {
            let gamma = random_covariance(&mut rng, n, 1.0).unwrap();
            let rho = gaussian_from_covariance(&alg, &gamma).unwrap();
            let back = covariance_of(&alg, &rho).unwrap();
            assert!((back.matrix() - gamma.matrix()).abs().max() < 1e-10);
            let again = gaussian_from_covariance(&alg, &back).unwrap();
            assert!(max_abs_diff(again.matrix(), rho.matrix()) < 1e-10);
        }
    }
}

#[test]
fn maximally_mixed_and_pure_limits() {
    let alg = CliffordAlgebra::new(2).unwrap();
    let mixed = gaussian_from_covariance(&alg, &CovarianceMatrix::zero(2)).unwrap();
    assert!(max_abs_diff(mixed.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    let mut rng = trial_rng(105, 0);
    let pure = gaussian_from_covariance(&alg, &random_pure_covariance(&mut rng, 2).unwrap()).unwrap();
    assert!(max_abs_diff(&(pure.matrix() * pure.matrix()), pure.matrix()) < 1e-10);
}

#[test]
fn spectrum_is_product_of_block_factors() {
    let alg = CliffordAlgebra::new(2).unwrap();
    let mut rng = trial_rng(106, 0);
    let gamma = random_covariance(&mut rng, 2, 1.0).unwrap();
    let rho = gaussian_from_covariance(&alg, &gamma).unwrap();
    let l = gamma.lambdas();
    let mut expected = Vec::new();
    for s0 in [-1.0, 1.0] {
        for s1 in [-1.0, 1.0] {
            expected.push((1.0 + s0 * l[0]) / 2.0 * (1.0 + s1 * l[1]) / 2.0);
        }
    }
    expected.sort_by(f64::total_cmp);
    let got = rho.eigenvalues();
    for (a, b) in got.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn exponential_form_matches_product_form() {
    let mut rng = trial_rng(107, 0);
    for n in 1..=3 {
        let alg = CliffordAlgebra::new(n).unwrap();
        let gamma = random_covariance(&mut rng, n, DEFAULT_MAX_LAMBDA).unwrap();
        let a = gaussian_from_covariance(&alg, &gamma).unwrap();
        let b = gaussian_exp_form(&alg, &gamma).unwrap();
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-10);
    }
}

#[test]
fn two_point_moment_matches_direct_trace() {
    let alg = CliffordAlgebra::new(2).unwrap();
    let mut rng = trial_rng(108, 0);
    let (gamma, rho) = random_gaussian_state(&alg, &mut rng, 1.0).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let direct = direct_moment(&alg, &rho, &[i, j]).unwrap();
            let wick = wick_from_covariance(&gamma, &[i, j]).unwrap();
            assert!((direct - wick).norm() < 1e-12);
            if i != j {
                assert!((direct - Complex64::new(0.0, -gamma.matrix()[(i, j)])).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn wick_theorem_on_random_gaussians() {
    let mut rng = trial_rng(109, 0);
    for n in 1..=3 {
        let alg = CliffordAlgebra::new(n).unwrap();
        for _ in 0..4 {
            let (_, rho) = random_gaussian_state(&alg, &mut rng, 1.0).unwrap();
            assert!(wick_defect(&alg, &rho, &[1, 3, 5]).unwrap() < 1e-12);
            assert!(wick_defect(&alg, &rho, &[4, 6]).unwrap() < 1e-10);
        }
    }
}

#[test]
fn repeated_indices_reduce_before_pairing() {
    let alg = CliffordAlgebra::new(2).unwrap();
    let mut rng = trial_rng(110, 0);
    let (_, rho) = random_gaussian_state(&alg, &mut rng, 1.0).unwrap();
    for word in [vec![0, 2, 0, 1], vec![3, 1, 2, 1, 3, 0], vec![2, 2, 2, 2]] {
        let direct = direct_moment(&alg, &rho, &word).unwrap();
        let wick = wick_moment(&alg, &rho, &word).unwrap();
        assert!((direct - wick).norm() < 1e-12, "{word:?}");
    }
}

fn random_self_dual_hamiltonian(n: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = trial_rng(seed, 0);
    random_antisymmetric(&mut rng, 2 * n).map(|x| Complex64::new(0.0, 0.3 * x))
}

#[test]
fn gibbs_states_are_gaussian_and_even() {
    let alg = CliffordAlgebra::new(2).unwrap();
    for seed in 0..5 {
        let h = random_self_dual_hamiltonian(2, 200 + seed);
        let rho = gibbs_state(&alg, &h, 1.0).unwrap();
        assert!(rho.is_even());
        assert!(rho.parity_defect() < 1e-12);
        assert!(wick_defect(&alg, &rho, &[4]).unwrap() < 1e-9);
    }
}

#[test]
fn gibbs_state_limits() {
    let alg = CliffordAlgebra::new(2).unwrap();
    let mixed = DensityMatrix::maximally_mixed(2);
    let zero = gibbs_state(&alg, &DMatrix::zeros(4, 4), 1.0).unwrap();
    assert!(max_abs_diff(zero.matrix(), mixed.matrix()) < 1e-15);
    let h = random_self_dual_hamiltonian(2, 300);
    let hot = gibbs_state(&alg, &h, 1e-9).unwrap();
    assert!(max_abs_diff(hot.matrix(), mixed.matrix()) < 1e-8);
}

#[test]
fn gibbs_rejects_non_self_dual_input() {
    let alg = CliffordAlgebra::new(1).unwrap();
    let mut h = DMatrix::zeros(2, 2);
    h[(0, 0)] = c(1.0);
    assert!(gibbs_state(&alg, &h, 1.0).is_err());
    h[(0, 0)] = c(0.0);
    h[(0, 1)] = Complex64::new(0.0, 1.0);
    assert!(gibbs_state(&alg, &h, 1.0).is_err());
}

#[test]
fn symbol_is_affine_in_covariance() {
    let mut rng = trial_rng(111, 0);
    for n in 1..=3 {
        let alg = CliffordAlgebra::new(n).unwrap();
        for _ in 0..3 {
            let (gamma, rho) = random_gaussian_state(&alg, &mut rng, 1.0).unwrap();
            let direct = symbol_of(&alg, &rho).unwrap();
            let predicted = symbol_from_covariance(&gamma);
            assert!(max_abs_diff(&direct.matrix, &predicted) < 1e-12);
            assert!(direct.bounds_defect < 1e-12);
            assert!(direct.complement_defect < 1e-12);
        }
    }
}

#[test]
fn gaussian_entropy_from_lambdas() {
    let mut rng = trial_rng(112, 0);
    for n in 1..=3 {
        let alg = CliffordAlgebra::new(n).unwrap();
        let (gamma, rho) = random_gaussian_state(&alg, &mut rng, 1.0).unwrap();
        let expected: f64 = gamma.lambdas().iter().map(|&l| binary_entropy((1.0 + l) / 2.0)).sum();
        assert!((von_neumann_entropy(&rho) - expected).abs() < 1e-10);
    }
}

#[test]
fn covariance_validation() {
    let mut bad = DMatrix::zeros(2, 2);
    bad[(0, 1)] = 1.5;
    bad[(1, 0)] = -1.5;
    assert!(CovarianceMatrix::new(bad).is_err());
    let mut skew = DMatrix::zeros(2, 2);
    skew[(0, 1)] = 0.5;
    skew[(1, 0)] = 0.4;
    assert!(CovarianceMatrix::new(skew).is_err());
    assert!(CovarianceMatrix::new(DMatrix::zeros(3, 3)).is_err());
}

#[test]
fn density_matrix_validation() {
    let not_unit = linalg::identity(4);
    assert!(DensityMatrix::new(not_unit).is_err());
    let mut negative = linalg::identity(2) * c(0.5);
    negative[(0, 0)] = c(1.5);
    negative[(1, 1)] = c(-0.5);
    assert!(DensityMatrix::new(negative).is_err());
    assert!(DensityMatrix::new(linalg::identity(3) * c(1.0 / 3.0)).is_err());
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn mixing_covariances_stays_valid(seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let mut rng = trial_rng(seed, 0);
        let a = random_covariance(&mut rng, 2, 1.0).unwrap();
        let b = random_covariance(&mut rng, 2, 1.0).unwrap();
        let m = CovarianceMatrix::mix(lambda, &a, &b).unwrap();
        prop_assert!(m.operator_norm() <= 1.0 + 1e-10);
    }

    #[test]
    fn covariance_of_gaussian_is_its_parameter(seed in any::<u64>()) {
        let alg = CliffordAlgebra::new(2).unwrap();
        let mut rng = trial_rng(seed, 0);
        let (gamma, rho) = random_gaussian_state(&alg, &mut rng, 1.0).unwrap();
        let back = covariance_of(&alg, &rho).unwrap();
        prop_assert!((back.matrix() - gamma.matrix()).abs().max() < 1e-10);
    }

    #[test]
    fn pfaffian_is_multiplicative_on_direct_sums(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let a = random_complex_antisymmetric(&mut rng, 4);
        let b = random_complex_antisymmetric(&mut rng, 2);
        let mut sum = DMatrix::zeros(6, 6);
        sum.view_mut((0, 0), (4, 4)).copy_from(&a);
        sum.view_mut((4, 4), (2, 2)).copy_from(&b);
        let lhs = pfaffian(&sum).unwrap();
        let rhs = pfaffian(&a).unwrap() * pfaffian(&b).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0));
    }
}
