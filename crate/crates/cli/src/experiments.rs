//! One function per subcommand. Trials run on the rayon pool and are
//! collected in trial order before aggregation, so reports do not depend on
//! scheduling.

use std::time::Instant;

use anyhow::Result;
use fermion_epi::channels::{
    beam_splitter_report, beam_splitter_unitary_exp, choi_cptp_check, field_mode_mixing_check, heisenberg_defect,
    semigroup_evolve_rk4, semigroup_time_compatibility, BeamSplitter, CompositeSystem, Semigroup, MAX_REGISTER_MODES,
};
use fermion_epi::clifford::CliffordAlgebra;
use fermion_epi::gaussian::{
    covariance_of, gaussian_from_covariance, pfaffian, pfaffian_elimination, pfaffian_permutation_sum, pfaffian_real,
    wick_defect, DensityMatrix,
};
use fermion_epi::grassmann::{
    basis_label, gaussian_berezin_integral, gaussian_pfaffian, grassmann_displacement, Coefficient, DisplacementFamily,
    Exact, GeneratorLabel, GrassmannCovariance, KappaMap, Multivector, Universe,
};
use fermion_epi::infotheory::{
    composite_fisher, debruijn_check_with, entropy_power, entropy_variation_rate, epi_check_with, fisher_info,
    fisher_info_fd, fisher_info_for, fisher_info_richardson, stam_check, state_log, theorem_weights,
    von_neumann_entropy,
};
use fermion_epi::linalg::{anticommutator, c, max_abs, max_abs_diff};
use fermion_epi::random::{
    random_antisymmetric, random_complex_antisymmetric, random_even_state, random_gaussian_mixture,
    random_gaussian_state, random_orthogonal, trial_rng, DEFAULT_MAX_LAMBDA,
};
use fermion_epi::report::{CheckRecord, ExperimentReport};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Command, RunConfig};
use crate::output::{Aggregator, PlotTable, RunReport};

type Records = Vec<CheckRecord>;

/// Runs the configured subcommand.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let clock = Instant::now();
    let (report, table) = match config.command {
        Command::CarCheck => (car_check(config)?, None),
        Command::PfaffianCheck => (pfaffian_check(config)?, None),
        Command::WickCheck => (wick_check(config)?, None),
        Command::GrassmannCheck => (grassmann_check(config)?, None),
        Command::BeamsplitterCheck => beamsplitter_check(config)?,
        Command::SemigroupCheck => semigroup_check(config)?,
        Command::CptpCheck => cptp_check(config)?,
        Command::FisherCheck => fisher_check(config)?,
        Command::Debruijn => debruijn(config)?,
        Command::Stam => stam(config)?,
        Command::EpiSweep => epi_sweep(config)?,
    };
    Ok(RunReport::new(
        config.clone(),
        report,
        table,
        clock.elapsed().as_secs_f64(),
    ))
}

fn base_report(cfg: &RunConfig) -> ExperimentReport {
    ExperimentReport::new(cfg.command.name())
        .param("modes", cfg.modes)
        .param("seed", cfg.seed)
        .param("trials", cfg.trials)
}

fn grid_text(points: &[f64]) -> String {
    points.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn rng(cfg: &RunConfig, cell: usize, trial: usize) -> ChaCha8Rng {
    trial_rng(cfg.seed, cfg.stream(cell, trial))
}

fn trials<T: Send>(cfg: &RunConfig, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..cfg.trials).into_par_iter().map(f).collect()
}

fn finish(
    cfg: &RunConfig,
    report: ExperimentReport,
    records: impl IntoIterator<Item = CheckRecord>,
) -> ExperimentReport {
    let mut report = report;
    let mut agg = Aggregator::new(&cfg.tolerances);
    agg.add_all(records);
    agg.finish_into(&mut report);
    report
}

fn exact(name: &str, mismatches: usize) -> CheckRecord {
    CheckRecord::within(name, mismatches as f64, 0.0).noted("exact")
}

fn prefixed(prefix: &str, report: ExperimentReport) -> impl Iterator<Item = CheckRecord> + '_ {
    report.checks.into_iter().map(move |mut r| {
        r.name = format!("{prefix}: {}", r.name);
        r
    })
}

fn gaussian(alg: &CliffordAlgebra, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    Ok(random_gaussian_state(alg, rng, DEFAULT_MAX_LAMBDA)?.1)
}

fn car_check(cfg: &RunConfig) -> Result<ExperimentReport> {
    let alg = CliffordAlgebra::new(cfg.modes)?;
    let mut records = vec![CheckRecord::within("majorana CAR", alg.car_defect(), 1e-12)];
    let parity = alg
        .majoranas()
        .iter()
        .map(|r| max_abs(&anticommutator(alg.parity(), r)))
        .fold(0.0, f64::max);
    records.push(CheckRecord::within(
        "parity anticommutes with generators",
        parity,
        1e-12,
    ));
    records.push(if cfg.modes <= MAX_REGISTER_MODES {
        let sys = CompositeSystem::new(cfg.modes)?;
        CheckRecord::within(
            "cross-register anticommutation",
            sys.cross_anticommutation_defect(),
            1e-12,
        )
    } else {
        CheckRecord::skipped(
            "cross-register anticommutation",
            format!("composite registers hold at most {MAX_REGISTER_MODES} modes"),
        )
    });
    Ok(finish(cfg, base_report(cfg), records))
}

fn pfaffian_check(cfg: &RunConfig) -> Result<ExperimentReport> {
    let per_trial = trials(cfg, |k| -> Result<Records> {
        let mut rng = rng(cfg, 0, k);
        let mut out = Vec::new();
        for dim in (2..=2 * cfg.modes).step_by(2) {
            let m = random_complex_antisymmetric(&mut rng, dim);
            let pf = pfaffian(&m)?;
            let det = m.clone().determinant();
            out.push(CheckRecord::within(
                "Pf^2 = det (relative)",
                (pf * pf - det).norm() / det.norm(),
                1e-8,
            ));
            if dim <= 8 {
                let d = (pfaffian_elimination(&m)? - pfaffian_permutation_sum(&m)?).norm();
                out.push(CheckRecord::within("elimination vs permutation sum", d, 1e-10));
            }
            let real = random_antisymmetric(&mut rng, dim);
            let q = random_orthogonal(&mut rng, dim);
            let pf_real = pfaffian_real(&real)?;
            let rotated = pfaffian_real(&(&q * &real * q.transpose()))?;
            let expected = q.determinant() * pf_real;
            out.push(CheckRecord::within(
                "Pf(Q M Q^T) = det Q Pf M (relative)",
                (rotated - expected).abs() / pf_real.abs().max(1e-300),
                1e-10,
            ));
            let as_complex = pfaffian(&real.map(c))?;
            out.push(CheckRecord::within(
                "real vs complex route",
                (as_complex - c(pf_real)).norm(),
                1e-12,
            ));
        }
        Ok(out)
    })?;
    Ok(finish(cfg, base_report(cfg), per_trial.into_iter().flatten()))
}

fn wick_check(cfg: &RunConfig) -> Result<ExperimentReport> {
    let alg = CliffordAlgebra::new(cfg.modes)?;
    let g = alg.generators();
    let odd: Vec<usize> = (1..=g).step_by(2).collect();
    let even: Vec<usize> = (2..=g).step_by(2).collect();
    let per_trial = trials(cfg, |k| -> Result<Records> {
        let mut rng = rng(cfg, 0, k);
        let (gamma, rho) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
        let back = covariance_of(&alg, &gaussian_from_covariance(&alg, &gamma)?)?;
        Ok(vec![
            CheckRecord::within("odd moments vanish", wick_defect(&alg, &rho, &odd)?, 1e-12),
            CheckRecord::within("even moments match Pfaffians", wick_defect(&alg, &rho, &even)?, 1e-10),
            CheckRecord::within("covariance round trip", (back.matrix() - gamma.matrix()).amax(), 1e-12),
        ])
    })?;
    Ok(finish(cfg, base_report(cfg), per_trial.into_iter().flatten()))
}

fn small_exact(rng: &mut ChaCha8Rng) -> Exact {
    Exact::from_ratio(rng.random_range(-3..=3), 1) + Exact::imag_unit() * Exact::from_ratio(rng.random_range(-2..=2), 2)
}

fn random_element(u: Universe, rng: &mut ChaCha8Rng, density: f64) -> Multivector<Exact> {
    let size = 1u64 << u.copy_width();
    Multivector::from_terms(
        u,
        (0..size).filter_map(|m| rng.random_bool(density).then(|| (m, small_exact(rng)))),
    )
}

fn grassmann_check(cfg: &RunConfig) -> Result<ExperimentReport> {
    let n = cfg.modes;
    let u = Universe::new(n)?;
    let kappa = KappaMap::<Exact>::new(u)?;
    let mut records = Vec::new();

    let mut mismatches = 0;
    let pairs: Vec<(Multivector<Exact>, Multivector<Exact>)> = if n <= 2 {
        let basis: Vec<_> = (0..(1u64 << u.copy_width()))
            .map(|m| Multivector::from_terms(u, [(m, Exact::one())]))
            .collect();
        basis
            .iter()
            .flat_map(|a| basis.iter().map(move |b| (a.clone(), b.clone())))
            .collect()
    } else {
        let mut rng = rng(cfg, 0, 0);
        (0..cfg.trials)
            .map(|_| (random_element(u, &mut rng, 0.15), random_element(u, &mut rng, 0.15)))
            .collect()
    };
    for (a, b) in &pairs {
        mismatches += usize::from(a.circle(b)? != kappa.pullback_product(a, b)?);
    }
    records.push(exact("circle product: direct vs pullback", mismatches).noted(format!("{} pairs", pairs.len())));

    let mut car = 0;
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
            car += usize::from(anti != expected);
        }
    }
    records.push(exact("circle product CAR", car));

    let gen = |copy: usize, base: usize, starred: bool| {
        Multivector::<Exact>::generator(u, GeneratorLabel::new(copy, base, starred))
    };
    let l = DisplacementFamily::<Exact>::copy(u, 1)?;
    let m = DisplacementFamily::<Exact>::copy(u, 2)?;
    let t = grassmann_displacement(0, &l)?;
    let mut shifted = 0;
    for base in 1..=n {
        for starred in [false, true] {
            let x = gen(0, base, starred)?;
            let moved = t.star().circle_on(0, &x)?.circle_on(0, &t)?;
            shifted += usize::from(moved != x + gen(1, base, starred)?);
        }
    }
    records.push(exact("displacement shifts generators", shifted));
    let joint = grassmann_displacement(0, &l.plus(&m)?)?;
    let product = t.circle_on(0, &grassmann_displacement(0, &m)?)?;
    let factor = l.pairing(&m)?.scale(&Exact::from_ratio(1, 2)).exp_wedge()?;
    records.push(exact(
        "displacement composition law",
        usize::from(joint != product.wedge(&factor)?),
    ));

    let per_trial = trials(cfg, |k| -> Result<Records> {
        let mut rng = rng(cfg, 1, k);
        let block = loop {
            let b = DMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            if b.clone().singular_values().min() > 0.2 {
                break b;
            }
        };
        let cov = GrassmannCovariance::from_block(&block)?;
        let mut out = Vec::new();
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
            out.push(CheckRecord::within(
                "Gaussian Berezin integral vs Pfaffian",
                (direct - pf).norm(),
                1e-12,
            ));
        }
        Ok(out)
    })?;
    records.extend(per_trial.into_iter().flatten());
    Ok(finish(cfg, base_report(cfg), records))
}

fn beamsplitter_check(cfg: &RunConfig) -> Result<(ExperimentReport, Option<PlotTable>)> {
    let n = cfg.modes;
    let alg = CliffordAlgebra::new(n)?;
    let mut records = Vec::new();
    let mut table = PlotTable::new(&[
        "lambda",
        "heisenberg_defect",
        "unitary_route_defect",
        "max_mixing_defect",
        "min_output_eigenvalue",
    ]);
    let grid = cfg.lambda_grid.points();
    for (cell, &lambda) in grid.iter().enumerate() {
        let bs = BeamSplitter::new(n, lambda)?;
        let heis = heisenberg_defect(bs.system(), bs.params(), bs.unitary());
        let route = max_abs_diff(bs.unitary(), &beam_splitter_unitary_exp(bs.system(), bs.params())?);
        records.push(CheckRecord::within("Heisenberg relation", heis, 1e-10));
        records.push(CheckRecord::within("unitary: product vs exponential", route, 1e-10));
        records.extend(field_mode_mixing_check(bs.system(), lambda)?.checks);
        let per_trial = trials(cfg, |k| -> Result<Records> {
            let mut rng = rng(cfg, cell, k);
            let a = gaussian(&alg, &mut rng)?;
            let b = gaussian(&alg, &mut rng)?;
            let r = beam_splitter_report(&a, &b, lambda)?;
            Ok(vec![
                CheckRecord::within("covariance mixing", r.mixing_defect, 1e-9),
                CheckRecord::within("output trace", r.trace_defect, 1e-12),
                CheckRecord::with_value(
                    "output positivity",
                    r.min_eigenvalue,
                    (-r.min_eigenvalue).max(0.0),
                    1e-10,
                ),
            ])
        })?;
        let worst = |name: &str| {
            per_trial
                .iter()
                .flatten()
                .filter(|r| r.name == name)
                .map(|r| r.value)
                .fold(f64::NAN, |acc, v| {
                    if name == "output positivity" {
                        v.min(acc)
                    } else {
                        v.max(acc)
                    }
                })
        };
        table.push(vec![
            lambda,
            heis,
            route,
            worst("covariance mixing"),
            worst("output positivity"),
        ]);
        records.extend(per_trial.into_iter().flatten());
    }

    let mut rng = rng(cfg, grid.len(), 0);
    let a = random_even_state(&alg, &mut rng)?;
    let b = random_even_state(&alg, &mut rng)?;
    let one = BeamSplitter::new(n, 1.0)?.apply(&a, &b)?;
    let zero = BeamSplitter::new(n, 0.0)?.apply(&a, &b)?;
    records.push(CheckRecord::within(
        "lambda = 1 returns rho_A",
        max_abs_diff(one.matrix(), a.matrix()),
        1e-12,
    ));
    records.push(CheckRecord::within(
        "lambda = 0 returns rho_B",
        max_abs_diff(zero.matrix(), b.matrix()),
        1e-12,
    ));

    let report = base_report(cfg).param("lambda_grid", grid_text(grid));
    Ok((finish(cfg, report, records), Some(table)))
}

fn semigroup_check(cfg: &RunConfig) -> Result<(ExperimentReport, Option<PlotTable>)> {
    let alg = CliffordAlgebra::new(cfg.modes)?;
    let semigroup = Semigroup::new(&alg)?;
    let times = cfg.time_grid.points();
    let t_last = times.iter().copied().fold(0.0, f64::max);
    let mut records = Vec::new();

    // The decay rate is measured on a dense evolution before the closed form is trusted.
    let mut aux = rng(cfg, 1, 0);
    let (gamma0, rho0) = random_gaussian_state(&alg, &mut aux, DEFAULT_MAX_LAMBDA)?;
    let probe = 0.1;
    let ratio = covariance_of(&alg, &semigroup.evolve(&rho0, probe)?)?.matrix().norm() / gamma0.matrix().norm();
    let rate = -ratio.ln() / probe;
    records.push(CheckRecord::with_value(
        "dense covariance decay rate",
        rate,
        (rate - 8.0).abs(),
        1e-8,
    ));

    let t_rk = t_last.clamp(0.1, 1.0);
    let steps = (1000.0 * t_rk).ceil() as usize;
    let rk = semigroup_evolve_rk4(&alg, &rho0, t_rk, steps)?;
    records.push(CheckRecord::within(
        "spectral propagator vs RK4",
        max_abs_diff(&rk, semigroup.evolve(&rho0, t_rk)?.matrix()),
        1e-9,
    ));

    if cfg.modes <= MAX_REGISTER_MODES {
        let a = gaussian(&alg, &mut aux)?;
        let b = gaussian(&alg, &mut aux)?;
        let lambda = cfg.lambda_grid.points()[0];
        let compat = semigroup_time_compatibility(&a, &b, lambda, t_rk, t_rk)?;
        records.extend(prefixed("equal-time compatibility", compat));
    }

    let per_trial = trials(cfg, |k| -> Result<(Records, Vec<Vec<f64>>)> {
        let mut rng = rng(cfg, 0, k);
        let (gamma, rho) = random_gaussian_state(&alg, &mut rng, DEFAULT_MAX_LAMBDA)?;
        let even = random_even_state(&alg, &mut rng)?;
        let mut out = Vec::new();
        let mut rows = Vec::new();
        for state in [&rho, &even] {
            let twice = semigroup.evolve(&semigroup.evolve(state, 0.13)?, 0.29)?;
            let once = semigroup.evolve(state, 0.42)?;
            out.push(CheckRecord::within(
                "semigroup law",
                max_abs_diff(twice.matrix(), once.matrix()),
                1e-9,
            ));
        }
        let mut previous = f64::NEG_INFINITY;
        let mut last = f64::NAN;
        let mut sorted = times.to_vec();
        sorted.sort_by(f64::total_cmp);
        for &t in &sorted {
            let rho_t = semigroup.evolve(&rho, t)?;
            let gamma_t = covariance_of(&alg, &rho_t)?;
            let expected = gamma.matrix() * (-8.0 * t).exp();
            out.push(CheckRecord::within(
                "covariance decay e^(-8t)",
                (gamma_t.matrix() - expected).amax(),
                1e-8,
            ));
            out.push(CheckRecord::within(
                "Gaussianity (4-point Wick defect)",
                wick_defect(&alg, &rho_t, &[4])?,
                1e-9,
            ));
            let e = entropy_power(&rho_t, cfg.modes)?;
            out.push(CheckRecord::within(
                "entropy power nondecreasing",
                (previous - e).max(0.0),
                1e-12,
            ));
            previous = e;
            last = e;
            let j = entropy_variation_rate(&alg, &rho_t)?;
            rows.push(vec![
                k as f64,
                t,
                e,
                von_neumann_entropy(&rho_t),
                j,
                gamma_t.operator_norm(),
            ]);
        }
        out.push(if t_last >= 3.0 {
            CheckRecord::with_value("entropy power saturates at 2", last, (last - 2.0).abs(), 1e-6)
        } else {
            CheckRecord::informational("entropy power at last time", last)
        });
        Ok((out, rows))
    })?;
    let mut table = PlotTable::new(&["trial", "t", "entropy_power", "entropy", "fisher", "covariance_norm"]);
    for (recs, rows) in per_trial {
        records.extend(recs);
        for row in rows {
            table.push(row);
        }
    }
    let report = base_report(cfg).param("time_grid", grid_text(times));
    Ok((finish(cfg, report, records), Some(table)))
}

fn cptp_check(cfg: &RunConfig) -> Result<(ExperimentReport, Option<PlotTable>)> {
    let n = cfg.modes;
    let alg = CliffordAlgebra::new(n)?;
    let mut records = Vec::new();
    let mut table = PlotTable::new(&["channel", "parameter", "choi_min_eigenvalue"]);
    let min_eig = |r: &ExperimentReport| r.check("choi min eigenvalue").map_or(f64::NAN, |c| c.value);
    for (cell, &lambda) in cfg.lambda_grid.points().iter().enumerate() {
        let bs = BeamSplitter::new(n, lambda)?;
        let env = random_even_state(&alg, &mut rng(cfg, cell, 0))?;
        let report = choi_cptp_check(n, &|x| bs.map_with_environment(x, &env))?;
        table.push(vec![0.0, lambda, min_eig(&report)]);
        records.extend(prefixed("beam splitter", report));
    }
    let semigroup = Semigroup::new(&alg)?;
    for &t in cfg.time_grid.points() {
        let report = choi_cptp_check(n, &|x| semigroup.evolve_operator(x, t))?;
        table.push(vec![1.0, t, min_eig(&report)]);
        records.extend(prefixed("semigroup", report));
    }
    let report = base_report(cfg)
        .param("lambda_grid", grid_text(cfg.lambda_grid.points()))
        .param("time_grid", grid_text(cfg.time_grid.points()))
        .param("channel codes", "0 beam splitter, 1 semigroup");
    Ok((finish(cfg, report, records), Some(table)))
}

fn fisher_check(cfg: &RunConfig) -> Result<(ExperimentReport, Option<PlotTable>)> {
    let alg = CliffordAlgebra::new(cfg.modes)?;
    let grid = cfg.lambda_grid.points();
    let h = cfg.h;
    let per_trial = trials(cfg, |k| -> Result<(Records, Vec<f64>)> {
        let mut rng = rng(cfg, 0, k);
        let a = gaussian(&alg, &mut rng)?;
        let b = gaussian(&alg, &mut rng)?;
        let mut out = Vec::new();
        let mut per_generator = Vec::new();
        let mut fd_total = 0.0;
        for j in 0..alg.generators() {
            let exact = fisher_info(&alg, &a, j)?;
            let fd = fisher_info_fd(&alg, &a, j, h)?;
            per_generator.push(exact);
            fd_total += fd;
            out.push(CheckRecord::within(
                "finite difference agreement (relative)",
                (fd - exact).abs() / exact.abs(),
                1e-4,
            ));
        }
        let min = per_generator.iter().copied().fold(f64::INFINITY, f64::min);
        out.push(CheckRecord::with_value("nonnegativity", min, (-min).max(0.0), 1e-9));

        let exact = per_generator[0];
        let coarse = (fisher_info_fd(&alg, &a, 0, 1e-2)? - exact).abs();
        let fine = (fisher_info_fd(&alg, &a, 0, 5e-3)? - exact).abs();
        let extrapolated = (fisher_info_richardson(&alg, &a, 0, 1e-2)? - exact).abs();
        let ratio = coarse / fine;
        out.push(CheckRecord::with_value(
            "error ratio under step halving",
            ratio,
            (ratio - 4.0).abs(),
            0.5,
        ));
        out.push(CheckRecord::within(
            "Richardson error relative to h/2",
            extrapolated / fine,
            0.1,
        ));

        let alpha = rng.random_range(-3.0..3.0);
        let j = k % alg.generators();
        let scaled = fisher_info_for(&a, &state_log(&a), &(alg.majorana(j) * c(alpha)));
        let expected = alpha * alpha * per_generator[j];
        out.push(CheckRecord::within(
            "alpha^2 scaling",
            (scaled - expected).abs() / expected.max(1.0),
            1e-9,
        ));

        let ja = entropy_variation_rate(&alg, &a)?;
        let jb = entropy_variation_rate(&alg, &b)?;
        let joint = composite_fisher(&a, &b)?;
        out.push(CheckRecord::within(
            "additivity",
            (joint - ja - jb).abs() / joint.max(1.0),
            1e-9,
        ));
        let lambda = grid[k % grid.len()];
        let ji = entropy_variation_rate(&alg, &BeamSplitter::new(cfg.modes, lambda)?.apply(&a, &b)?)?;
        out.push(CheckRecord::with_value(
            "channel monotonicity",
            joint - ji,
            (ji - joint).max(0.0),
            1e-9,
        ));
        Ok((out, vec![k as f64, lambda, ja, fd_total, jb, ji]))
    })?;
    let mut table = PlotTable::new(&["trial", "lambda", "j_a", "j_a_finite_difference", "j_b", "j_i"]);
    let mut records = Vec::new();
    for (recs, row) in per_trial {
        records.extend(recs);
        table.push(row);
    }
    let report = base_report(cfg).param("h", h).param("lambda_grid", grid_text(grid));
    Ok((finish(cfg, report, records), Some(table)))
}

fn debruijn(cfg: &RunConfig) -> Result<(ExperimentReport, Option<PlotTable>)> {
    let alg = CliffordAlgebra::new(cfg.modes)?;
    let semigroup = Semigroup::new(&alg)?;
    let times = cfg.time_grid.points();
    let per_trial = trials(cfg, |k| -> Result<(Records, Vec<Vec<f64>>)> {
        let mut rng = rng(cfg, 0, k);
        // Every fifth trial starts from a non-Gaussian mixture of two Gaussians.
        let gaussian_start = k % 5 != 4;
        let rho = if gaussian_start {
            gaussian(&alg, &mut rng)?
        } else {
            random_gaussian_mixture(&alg, &mut rng)?
        };
        let name = if gaussian_start {
            "relative defect (Gaussian)"
        } else {
            "relative defect (non-Gaussian)"
        };
        let mut out = Vec::new();
        let mut rows = Vec::new();
        for &t in times {
            let report = debruijn_check_with(&alg, &semigroup, &rho, t, cfg.h)?;
            let value = |n: &str| report.check(n).map_or(f64::NAN, |r| r.value);
            let defect = report.check("relative defect").map_or(f64::NAN, |r| r.defect);
            out.push(CheckRecord::within(name, defect, 1e-4));
            rows.push(vec![
                k as f64,
                f64::from(u8::from(gaussian_start)),
                t,
                value("dS/dt"),
                value("J"),
                defect,
            ]);
        }
        Ok((out, rows))
    })?;
    let mut table = PlotTable::new(&["trial", "gaussian", "t", "dS_dt", "J", "relative_defect"]);
    let mut records = Vec::new();
    for (recs, rows) in per_trial {
        records.extend(recs);
        for row in rows {
            table.push(row);
        }
    }
    let report = base_report(cfg).param("h", cfg.h).param("time_grid", grid_text(times));
    Ok((finish(cfg, report, records), Some(table)))
}

fn stam(cfg: &RunConfig) -> Result<(ExperimentReport, Option<PlotTable>)> {
    let alg = CliffordAlgebra::new(cfg.modes)?;
    let grid = cfg.lambda_grid.points();
    let mut table = PlotTable::new(&[
        "lambda",
        "trial",
        "j_a",
        "j_b",
        "j_i",
        "alpha",
        "beta",
        "eta_form_slack",
        "harmonic_form_slack",
    ]);
    let mut records = Vec::new();
    for (cell, &lambda) in grid.iter().enumerate() {
        let per_trial = trials(cfg, |k| -> Result<(Records, Vec<f64>)> {
            let mut rng = rng(cfg, cell, k);
            let a = gaussian(&alg, &mut rng)?;
            let b = gaussian(&alg, &mut rng)?;
            let ja = entropy_variation_rate(&alg, &a)?;
            let jb = entropy_variation_rate(&alg, &b)?;
            let Some((alpha, beta)) = theorem_weights(ja, jb) else {
                let reason = "an input Fisher information vanishes";
                let out = vec![
                    CheckRecord::skipped("eta form slack", reason),
                    CheckRecord::skipped("harmonic form slack", reason),
                ];
                return Ok((
                    out,
                    vec![
                        lambda,
                        k as f64,
                        ja,
                        jb,
                        f64::NAN,
                        f64::NAN,
                        f64::NAN,
                        f64::NAN,
                        f64::NAN,
                    ],
                ));
            };
            let report = stam_check(&a, &b, lambda, alpha, beta)?;
            let value = |n: &str| report.check(n).map_or(f64::NAN, |r| r.value);
            let row = vec![
                lambda,
                k as f64,
                ja,
                jb,
                value("J_I"),
                alpha,
                beta,
                value("eta form slack"),
                value("harmonic form slack"),
            ];
            let out = report
                .checks
                .into_iter()
                .filter(|r| r.tolerance.is_some() || r.is_skipped())
                .collect();
            Ok((out, row))
        })?;
        for (recs, row) in per_trial {
            records.extend(recs);
            table.push(row);
        }
    }
    let report = base_report(cfg)
        .param("lambda_grid", grid_text(grid))
        .param("weights", "alpha, beta proportional to 1/J_A, 1/J_B");
    Ok((finish(cfg, report, records), Some(table)))
}

fn epi_sweep(cfg: &RunConfig) -> Result<(ExperimentReport, Option<PlotTable>)> {
    let alg = CliffordAlgebra::new(cfg.modes)?;
    let grid = cfg.lambda_grid.points();
    let mut table = PlotTable::new(&[
        "lambda", "trial", "e_a", "e_b", "e_i", "mixture", "j_a", "j_b", "j_i", "f_start", "f_end",
    ]);
    let mut records = Vec::new();
    for (cell, &lambda) in grid.iter().enumerate() {
        let bs = BeamSplitter::new(cfg.modes, lambda)?;
        let per_trial = trials(cfg, |k| -> Result<(Records, Vec<f64>)> {
            let mut rng = rng(cfg, cell, k);
            let a = gaussian(&alg, &mut rng)?;
            let b = gaussian(&alg, &mut rng)?;
            let outcome = epi_check_with(&bs, &a, &b)?;
            let out = bs.apply(&a, &b)?;
            let f = &outcome.trace.f;
            let row = vec![
                lambda,
                k as f64,
                outcome.e_a,
                outcome.e_b,
                outcome.e_i,
                lambda * outcome.e_a + (1.0 - lambda) * outcome.e_b,
                entropy_variation_rate(&alg, &a)?,
                entropy_variation_rate(&alg, &b)?,
                entropy_variation_rate(&alg, &out)?,
                f.first().copied().unwrap_or(f64::NAN),
                f.last().copied().unwrap_or(f64::NAN),
            ];
            let recs = outcome
                .report
                .checks
                .into_iter()
                .filter(|r| r.tolerance.is_some())
                .collect();
            Ok((recs, row))
        })?;
        for (recs, row) in per_trial {
            records.extend(recs);
            table.push(row);
        }
    }
    let report = base_report(cfg).param("lambda_grid", grid_text(grid));
    Ok((finish(cfg, report, records), Some(table)))
}
