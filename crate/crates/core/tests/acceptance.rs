//! Acceptance suite: one line per criterion, then a summary.
//!
//! Criteria listed in `KNOWN_FAILURES` still print FAIL. They only stop
//! failing the process while they keep failing; an unexpected pass is
//! reported so the list gets updated.

use std::process::ExitCode;
use std::time::Instant;

use fermion_epi::channels::{beam_splitter_report, choi_cptp_check, BeamSplitter, CompositeSystem, Semigroup};
use fermion_epi::clifford::CliffordAlgebra;
use fermion_epi::error::Result;
use fermion_epi::gaussian::{
    covariance_of, pfaffian, pfaffian_elimination, pfaffian_permutation_sum, wick_defect, DensityMatrix,
};
use fermion_epi::grassmann::{
    basis_label, gaussian_berezin_integral, gaussian_pfaffian, grassmann_displacement, Coefficient, DisplacementFamily,
    Exact, GeneratorLabel, GrassmannCovariance, KappaMap, Multivector, Universe,
};
use fermion_epi::infotheory::{
    composite_fisher, debruijn_check_with, entropy_power, entropy_variation_rate, epi_check_with, fisher_info,
    fisher_info_fd, fisher_info_for, fisher_info_richardson, functional_identity_check, stam_check, state_log,
    theorem_weights,
};
use fermion_epi::linalg::{c, max_abs_diff};
use fermion_epi::random::{
    random_complex_antisymmetric, random_even_state, random_gaussian_mixture, random_gaussian_state, random_lambda,
    random_state_of_rank, trial_rng, DEFAULT_MAX_LAMBDA,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

const KNOWN_FAILURES: &[usize] = &[9];

struct Outcome {
    pass: bool,
    detail: String,
}

/// Worst observed defect against a tolerance, per named quantity.
#[derive(Default)]
struct Tally {
    items: Vec<(String, f64, f64)>,
}

impl Tally {
    fn record(&mut self, name: &str, defect: f64, tol: f64) {
        match self.items.iter_mut().find(|(n, _, _)| n == name) {
            Some(item) => {
                if !(defect <= item.1) {
                    item.1 = defect;
                }
            }
            None => self.items.push((name.to_string(), defect, tol)),
        }
    }

    fn flag(&mut self, name: &str, ok: bool) {
        self.record(name, if ok { 0.0 } else { 1.0 }, 0.0);
    }

    fn outcome(self) -> Outcome {
        let pass = self.items.iter().all(|(_, d, t)| *d <= *t);
        let detail = self
            .items
            .iter()
            .map(|(n, d, t)| {
                if *t == 0.0 {
                    format!("{n} {}", if *d == 0.0 { "ok" } else { "broken" })
                } else {
                    format!("{n} {d:.1e} (tol {t:.0e})")
                }
            })
            .collect::<Vec<_>>()
            .join("; ");
        Outcome { pass, detail }
    }
}

fn car_suite() -> Result<Outcome> {
    let mut tally = Tally::default();
    for n in 1..=4 {
        tally.record("majorana CAR", CliffordAlgebra::new(n)?.car_defect(), 1e-12);
    }
    for n in 1..=2 {
        tally.record(
            "cross-register",
            CompositeSystem::new(n)?.cross_anticommutation_defect(),
            1e-12,
        );
    }
    Ok(tally.outcome())
}

fn pfaffian_suite() -> Result<Outcome> {
    let mut tally = Tally::default();
    for dim in (2..=10).step_by(2) {
        for trial in 0..20 {
            let mut rng = trial_rng(200 + dim as u64, trial);
            let m = random_complex_antisymmetric(&mut rng, dim);
            let pf = pfaffian(&m)?;
            let det = m.clone().determinant();
            tally.record(
                "Pf^2 = det (relative)",
                (pf * pf - det).norm() / det.norm().max(1e-300),
                1e-8,
            );
        }
    }
    for dim in [4, 6] {
        for trial in 0..50 {
            let mut rng = trial_rng(210 + dim as u64, trial);
            let m = random_complex_antisymmetric(&mut rng, dim);
            let d = (pfaffian_elimination(&m)? - pfaffian_permutation_sum(&m)?).norm();
            tally.record("elimination vs permutation sum", d, 1e-10);
        }
    }
    Ok(tally.outcome())
}

fn wick_suite() -> Result<Outcome> {
    let mut tally = Tally::default();
    for n in [2, 3] {
        let alg = CliffordAlgebra::new(n)?;
        for trial in 0..100 {
            let mut rng = trial_rng(300 + n as u64, trial);
            let (_, rho) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
            tally.record("odd moments", wick_defect(&alg, &rho, &[1, 3, 5])?, 1e-12);
            tally.record("4-/6-point Pfaffian", wick_defect(&alg, &rho, &[4, 6])?, 1e-10);
        }
    }
    Ok(tally.outcome())
}

fn grassmann_suite() -> Result<Outcome> {
    let mut tally = Tally::default();
    for n in 1..=2 {
        let u = Universe::new(n)?;
        let kappa = KappaMap::<Exact>::new(u)?;
        let basis: Vec<Multivector<Exact>> = (0..(1u64 << u.copy_width()))
            .map(|m| Multivector::from_terms(u, [(m, Exact::one())]))
            .collect();
        let mut dual_ok = true;
        for a in &basis {
            for b in &basis {
                dual_ok &= a.circle(b)? == kappa.pullback_product(a, b)?;
            }
        }
        tally.flag("circle product routes", dual_ok);

        let mut car_ok = true;
        for i in 0..u.copy_width() {
            for j in 0..u.copy_width() {
                let p1 = Multivector::<Exact>::generator(u, basis_label(u, 0, i))?.star();
                let p2 = Multivector::<Exact>::generator(u, basis_label(u, 0, j))?;
                let anti = p1.circle(&p2)? + p2.circle(&p1)?;
                let expected = if i == j {
                    Multivector::one(u)
                } else {
                    Multivector::zero(u)
                };
                car_ok &= anti == expected;
            }
        }
        tally.flag("circle CAR", car_ok);

        let gen = |copy: usize, base: usize, starred: bool| {
            Multivector::<Exact>::generator(u, GeneratorLabel::new(copy, base, starred))
        };
        let l = DisplacementFamily::<Exact>::copy(u, 1)?;
        let t = grassmann_displacement(0, &l)?;
        let mut weyl_ok = true;
        for base in 1..=n {
            for starred in [false, true] {
                let x = gen(0, base, starred)?;
                let moved = t.star().circle_on(0, &x)?.circle_on(0, &t)?;
                weyl_ok &= moved == x + gen(1, base, starred)?;
            }
        }
        tally.flag("Weyl covariance", weyl_ok);

        let m = DisplacementFamily::<Exact>::copy(u, 2)?;
        let joint = grassmann_displacement(0, &l.plus(&m)?)?;
        let product = t.circle_on(0, &grassmann_displacement(0, &m)?)?;
        let factor = l.pairing(&m)?.scale(&Exact::from_ratio(1, 2)).exp_wedge()?;
        tally.flag("Weyl composition", joint == product.wedge(&factor)?);
    }

    for n in 1..=3 {
        let u = Universe::new(n)?;
        for trial in 0..10 {
            let mut rng = trial_rng(400 + n as u64, trial);
            let block = loop {
                let b = DMatrix::from_fn(n, n, |_, _| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                if b.clone().singular_values().min() > 0.2 {
                    break b;
                }
            };
            let cov = GrassmannCovariance::from_block(&block)?;
            for len in 0..=2 * n {
                let idx: Vec<usize> = (0..len).map(|_| rng.random_range(0..2 * n)).collect();
                let labels: Vec<GeneratorLabel> = idx.iter().map(|&i| basis_label(u, 0, i)).collect();
                let xi = Multivector::<Complex64>::monomial(u, &labels)?;
                let direct = gaussian_berezin_integral(&cov, &xi)?;
                let pf = if len == 0 {
                    c(1.0)
                } else {
                    gaussian_pfaffian(&cov, &idx)?
                };
                tally.record("Berezin vs Pfaffian", (direct - pf).norm(), 1e-12);
            }
        }
    }
    Ok(tally.outcome())
}

fn beam_splitter_suite() -> Result<Outcome> {
    let mut tally = Tally::default();
    for n in 1..=2 {
        for k in 0..=8 {
            let lambda = k as f64 / 8.0;
            let bs = BeamSplitter::new(n, lambda)?;
            let d = fermion_epi::channels::heisenberg_defect(bs.system(), bs.params(), bs.unitary());
            tally.record("Heisenberg relation", d, 1e-10);
        }
        let alg = CliffordAlgebra::new(n)?;
        let mut rng = trial_rng(500 + n as u64, 0);
        let a = random_even_state(&alg, &mut rng)?;
        let b = random_even_state(&alg, &mut rng)?;
        let one = BeamSplitter::new(n, 1.0)?;
        tally.record(
            "lambda = 1 unitary",
            max_abs_diff(one.unitary(), one.system().total().identity()),
            0.0,
        );
        tally.record(
            "lambda = 1 output",
            max_abs_diff(one.apply(&a, &b)?.matrix(), a.matrix()),
            1e-12,
        );
        let zero = BeamSplitter::new(n, 0.0)?;
        tally.record(
            "lambda = 0 output",
            max_abs_diff(zero.apply(&a, &b)?.matrix(), b.matrix()),
            1e-12,
        );
    }
    let alg = CliffordAlgebra::new(2)?;
    for trial in 0..50 {
        let mut rng = trial_rng(510, trial);
        let (_, a) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
        let (_, b) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
        let lambda = random_lambda(&mut rng, 0.0, 1.0);
        tally.record(
            "covariance mixing",
            beam_splitter_report(&a, &b, lambda)?.mixing_defect,
            1e-9,
        );
    }
    for n in 1..=2 {
        let alg = CliffordAlgebra::new(n)?;
        let mut rng = trial_rng(520 + n as u64, 0);
        let env = random_even_state(&alg, &mut rng)?;
        let bs = BeamSplitter::new(n, 0.37)?;
        let report = choi_cptp_check(n, &|x| bs.map_with_environment(x, &env))?;
        let min = report.check("choi min eigenvalue").map_or(f64::NAN, |r| r.value);
        tally.record("Choi min eigenvalue deficit", (-min).max(0.0), 1e-10);
        tally.flag("Choi report", report.pass);
    }
    Ok(tally.outcome())
}

fn semigroup_suite() -> Result<Outcome> {
    let mut tally = Tally::default();
    let alg = CliffordAlgebra::new(2)?;
    let semigroup = Semigroup::new(&alg)?;
    let times = [0.0, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 3.0];

    // Rate confirmation from dense evolution before the closed form is used.
    let mut rng = trial_rng(600, 0);
    let (gamma0, rho0) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
    let t_probe = 0.1;
    let probe = covariance_of(&alg, &semigroup.evolve(&rho0, t_probe)?)?;
    let ratio = probe.matrix().norm() / gamma0.matrix().norm();
    let rate = -ratio.ln() / t_probe;
    tally.record("dense decay rate vs 8", (rate - 8.0).abs(), 1e-8);

    for trial in 0..10 {
        let mut rng = trial_rng(601, trial);
        let rho = if trial % 2 == 0 {
            random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?.1
        } else {
            random_even_state(&alg, &mut rng)?
        };
        let (s, t) = (0.13, 0.29);
        let twice = semigroup.evolve(&semigroup.evolve(&rho, s)?, t)?;
        tally.record(
            "semigroup law",
            max_abs_diff(twice.matrix(), semigroup.evolve(&rho, s + t)?.matrix()),
            1e-9,
        );
    }

    for trial in 0..10 {
        let mut rng = trial_rng(602, trial);
        let (gamma, rho) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
        let mut previous = entropy_power(&rho, 2)?;
        for &t in &times {
            let rho_t = semigroup.evolve(&rho, t)?;
            tally.record("4-point Wick defect", wick_defect(&alg, &rho_t, &[4])?, 1e-9);
            let expected = gamma.matrix() * (-8.0 * t).exp();
            let measured = covariance_of(&alg, &rho_t)?;
            tally.record("covariance decay", (measured.matrix() - expected).amax(), 1e-8);
            let e = entropy_power(&rho_t, 2)?;
            tally.record("entropy power decrease", (previous - e).max(0.0), 1e-12);
            previous = e;
        }
        tally.record("|E(t=3) - 2|", (previous - 2.0).abs(), 1e-6);
    }
    Ok(tally.outcome())
}

fn fisher_suite() -> Result<Outcome> {
    let mut tally = Tally::default();
    let alg = CliffordAlgebra::new(2)?;
    for trial in 0..50 {
        let mut rng = trial_rng(700, trial);
        let (_, rho) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
        for j in 0..alg.generators() {
            let exact = fisher_info(&alg, &rho, j)?;
            let fd = fisher_info_fd(&alg, &rho, j, 1e-3)?;
            tally.record(
                "commutator vs finite difference (relative)",
                (fd - exact).abs() / exact.abs(),
                1e-4,
            );
        }
        if trial < 5 {
            let exact = fisher_info(&alg, &rho, 0)?;
            let coarse = (fisher_info_fd(&alg, &rho, 0, 1e-2)? - exact).abs();
            let fine = (fisher_info_fd(&alg, &rho, 0, 5e-3)? - exact).abs();
            let extrapolated = (fisher_info_richardson(&alg, &rho, 0, 1e-2)? - exact).abs();
            tally.record("halving ratio minus 4", (coarse / fine - 4.0).abs(), 0.5);
            tally.flag("Richardson improves", extrapolated < fine);
        }
    }

    for trial in 0..20 {
        let mut rng = trial_rng(710, trial);
        let (_, a) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
        let (_, b) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
        let log = state_log(&a);
        let alpha = rng.random_range(-3.0..3.0);
        let j = trial as usize % alg.generators();
        let scaled = fisher_info_for(&a, &log, &(alg.majorana(j) * c(alpha)));
        let base = fisher_info(&alg, &a, j)?;
        tally.record("alpha^2 scaling", (scaled - alpha * alpha * base).abs(), 1e-9);
        let ja = entropy_variation_rate(&alg, &a)?;
        let jb = entropy_variation_rate(&alg, &b)?;
        tally.record("nonnegativity", (-ja.min(jb)).max(0.0), 1e-9);
        let joint = composite_fisher(&a, &b)?;
        tally.record("additivity", (joint - ja - jb).abs(), 1e-9);
        let lambda = random_lambda(&mut rng, 0.0, 1.0);
        let out = BeamSplitter::new(2, lambda)?.apply(&a, &b)?;
        let ji = entropy_variation_rate(&alg, &out)?;
        tally.record("channel monotonicity", (ji - joint).max(0.0), 1e-9);
    }
    Ok(tally.outcome())
}

fn debruijn_suite() -> Result<Outcome> {
    let mut tally = Tally::default();
    let alg = CliffordAlgebra::new(2)?;
    let semigroup = Semigroup::new(&alg)?;
    let times = [0.0, 0.05, 0.1, 0.2, 0.4];
    for trial in 0..25 {
        let mut rng = trial_rng(800, trial);
        let rho = if trial < 20 {
            random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?.1
        } else {
            random_gaussian_mixture(&alg, &mut rng)?
        };
        let label = if trial < 20 { "Gaussian" } else { "non-Gaussian" };
        for &t in &times {
            let report = debruijn_check_with(&alg, &semigroup, &rho, t, 1e-4)?;
            let defect = report.check("relative defect").map_or(f64::NAN, |r| r.defect);
            tally.record(label, defect, 1e-4);
        }
    }
    Ok(tally.outcome())
}

fn stam_suite() -> Result<Outcome> {
    let alg = CliffordAlgebra::new(2)?;
    let (mut eta_bad, mut harmonic_bad, mut skipped) = (0, 0, 0);
    let (mut eta_worst, mut harmonic_worst) = (0.0f64, 0.0f64);
    let trials = 100;
    for trial in 0..trials {
        let mut rng = trial_rng(900, trial);
        let (_, a) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
        let (_, b) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
        let lambda = random_lambda(&mut rng, 0.0, 1.0);
        let ja = entropy_variation_rate(&alg, &a)?;
        let jb = entropy_variation_rate(&alg, &b)?;
        let Some((alpha, beta)) = theorem_weights(ja, jb) else {
            skipped += 1;
            continue;
        };
        let report = stam_check(&a, &b, lambda, alpha, beta)?;
        for (name, count, worst) in [
            ("eta form slack", &mut eta_bad, &mut eta_worst),
            ("harmonic form slack", &mut harmonic_bad, &mut harmonic_worst),
        ] {
            match report.check(name) {
                Some(r) if r.is_skipped() => skipped += 1,
                Some(r) if !r.pass => {
                    *count += 1;
                    *worst = worst.min(r.value);
                }
                _ => {}
            }
        }
    }
    Ok(Outcome {
        pass: eta_bad == 0 && harmonic_bad == 0,
        detail: format!(
            "eta form violations {eta_bad}/{trials} (worst slack {eta_worst:.3e}); \
             harmonic form violations {harmonic_bad}/{trials} (worst slack {harmonic_worst:.3e}); skipped {skipped}"
        ),
    })
}

fn epi_suite() -> Result<Outcome> {
    let mut tally = Tally::default();
    let mut cells = 0;
    for n in 1..=3 {
        let alg = CliffordAlgebra::new(n)?;
        for k in 1..=9 {
            let lambda = k as f64 / 10.0;
            let bs = BeamSplitter::new(n, lambda)?;
            for trial in 0..50 {
                let mut rng = trial_rng(1000 + 10 * n as u64 + k, trial);
                let (_, a) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
                let (_, b) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
                let outcome = epi_check_with(&bs, &a, &b)?;
                let defect = |name: &str| outcome.report.check(name).map_or(f64::NAN, |r| r.defect);
                tally.record("EPI deficit", defect("epi slack"), 1e-10);
                tally.record("f(t) decrease", defect("f(t) nondecreasing"), 1e-9);
                tally.record("|f - 1| at saturation", defect("f at saturation"), 1e-6);
            }
            cells += 1;
        }
    }
    let mut out = tally.outcome();
    out.detail = format!("{cells} cells x 50 pairs; {}", out.detail);
    Ok(out)
}

fn functional_calculus_suite() -> Result<Outcome> {
    let mut tally = Tally::default();
    for trial in 0..10 {
        let mut rng = trial_rng(1100, trial);
        let a = random_state_of_rank(4, 4, &mut rng)?;
        let b = random_state_of_rank(4, 4, &mut rng)?;
        let report = functional_identity_check(&a, &b)?;
        for name in ["ln rho1", "ln rho2", "ln rho2 - ln rho1"] {
            tally.record(name, report.check(name).map_or(f64::NAN, |r| r.defect), 1e-6);
        }
    }
    let alg = CliffordAlgebra::new(2)?;
    let mut rng = trial_rng(1101, 0);
    let (_, g) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
    let report = functional_identity_check(&g, &DensityMatrix::maximally_mixed(2))?;
    tally.flag("Gaussian vs maximally mixed", report.pass);
    Ok(tally.outcome())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("CAR suite", car_suite),
        ("Pfaffian suite", pfaffian_suite),
        ("Wick / quasi-free suite", wick_suite),
        ("Grassmann suite", grassmann_suite),
        ("beam-splitter suite", beam_splitter_suite),
        ("semigroup suite", semigroup_suite),
        ("Fisher information suite", fisher_suite),
        ("de Bruijn suite", debruijn_suite),
        ("Stam suite", stam_suite),
        ("entropy power inequality suite", epi_suite),
        ("functional calculus suite", functional_calculus_suite),
    ];
    let started = Instant::now();
    let (mut passed, mut unexpected) = (0, Vec::new());
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        let clock = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("error: {e}"),
        });
        let known = KNOWN_FAILURES.contains(&id);
        let status = match (outcome.pass, known) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as known failure)",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!(
            "criterion {id:>2} {status:<5} {name} [{:.1}s]: {}",
            clock.elapsed().as_secs_f64(),
            outcome.detail
        );
        if outcome.pass {
            passed += 1;
        }
        if outcome.pass == known {
            unexpected.push(id);
        }
    }
    println!(
        "acceptance: {passed}/{} criteria pass in {:.1}s; known failures {:?}",
        criteria.len(),
        started.elapsed().as_secs_f64(),
        KNOWN_FAILURES
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
