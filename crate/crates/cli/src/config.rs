use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, ensure, Context};
use clap::{Args, Subcommand};
use fermion_epi::channels::{MAX_REGISTER_MODES, MAX_SEMIGROUP_MODES};
use fermion_epi::clifford::MAX_MODES;
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FEPI_OUT_DIR";

const MAX_TRIALS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Majorana and cross-register anticommutation relations
    CarCheck,
    /// Pfaffian routes against determinants and the permutation sum
    PfaffianCheck,
    /// Wick moments of random Gaussian states
    WickCheck,
    /// Circle product, Berezin integrals and Grassmann displacements
    GrassmannCheck,
    /// Beam-splitter unitary, Heisenberg relation and covariance mixing
    BeamsplitterCheck,
    /// Dissipative semigroup: law, decay, Gaussianity and saturation
    SemigroupCheck,
    /// Choi positivity of the beam-splitter and semigroup channels
    CptpCheck,
    /// Fisher information against relative-entropy finite differences
    FisherCheck,
    /// Entropy production along the semigroup against the Fisher information
    Debruijn,
    /// Stam inequality in the weighted and harmonic forms
    Stam,
    /// Entropy power inequality over a transmissivity grid
    EpiSweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CarCheck => "car-check",
            Command::PfaffianCheck => "pfaffian-check",
            Command::WickCheck => "wick-check",
            Command::GrassmannCheck => "grassmann-check",
            Command::BeamsplitterCheck => "beamsplitter-check",
            Command::SemigroupCheck => "semigroup-check",
            Command::CptpCheck => "cptp-check",
            Command::FisherCheck => "fisher-check",
            Command::Debruijn => "debruijn",
            Command::Stam => "stam",
            Command::EpiSweep => "epi-sweep",
        }
    }

    fn default_modes(self) -> usize {
        match self {
            Command::CarCheck => 4,
            _ => 2,
        }
    }

    fn max_modes(self) -> usize {
        match self {
            Command::CarCheck => MAX_MODES,
            Command::PfaffianCheck | Command::WickCheck | Command::Debruijn => 4,
            Command::SemigroupCheck => MAX_SEMIGROUP_MODES,
            Command::GrassmannCheck
            | Command::BeamsplitterCheck
            | Command::CptpCheck
            | Command::FisherCheck
            | Command::Stam
            | Command::EpiSweep => MAX_REGISTER_MODES,
        }
    }

    fn default_h(self) -> f64 {
        match self {
            Command::FisherCheck => 1e-3,
            _ => 1e-4,
        }
    }

    fn default_times(self) -> Grid {
        match self {
            Command::SemigroupCheck => Grid::range(0.0, 3.0, 0.25),
            Command::CptpCheck => Grid(vec![0.1, 1.0]),
            _ => Grid(vec![0.0, 0.05, 0.1, 0.2, 0.4]),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A list of grid points written as `start:stop:step` or `a,b,c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

impl Grid {
    fn range(start: f64, stop: f64, step: f64) -> Self {
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        // Rounding keeps 0.1:0.9:0.1 printing as 0.3 rather than 0.30000000000000004.
        Grid(
            (0..=count)
                .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
                .collect(),
        )
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }
}

impl FromStr for Grid {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let number = |t: &str| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {t:?} in grid {s:?}"))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            [start, stop, step] => {
                let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
                ensure!(step > 0.0 && step.is_finite(), "grid step must be positive, got {step}");
                ensure!(stop >= start, "grid stop {stop} lies below start {start}");
                ensure!((stop - start) / step <= 1e6, "grid {s:?} has too many points");
                Grid::range(start, stop, step)
            }
            [_] => Grid(s.split(',').map(number).collect::<anyhow::Result<_>>()?),
            _ => bail!("grid {s:?} is neither start:stop:step nor a comma list"),
        };
        ensure!(!grid.0.is_empty(), "grid {s:?} is empty");
        ensure!(
            grid.0.iter().all(|x| x.is_finite()),
            "grid {s:?} has a non-finite point"
        );
        Ok(grid)
    }
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default, Args)]
pub struct Options {
    /// Modes per register
    #[arg(long, global = true)]
    pub modes: Option<usize>,
    /// Random trials per grid cell
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Transmissivities, as start:stop:step or a comma list
    #[arg(long, global = true, value_name = "GRID")]
    pub lambda_grid: Option<Grid>,
    /// Evolution times, as start:stop:step or a comma list
    #[arg(long, global = true, value_name = "GRID")]
    pub time_grid: Option<Grid>,
    /// Single evolution time (replaces the time grid)
    #[arg(long, global = true)]
    pub t: Option<f64>,
    /// Finite-difference step
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Master seed; trial k draws from stream k of this seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tolerance override for a named check, as NAME=VALUE (repeatable)
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE", value_parser = parse_tolerance)]
    pub tolerances: Vec<(String, f64)>,
    /// Key-value config file (TOML) with the same keys as the flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory for the report and sweep table
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of the text summary
    #[arg(long, global = true)]
    pub json: bool,
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .rsplit_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|e| format!("bad tolerance {value:?}: {e}"))?;
    Ok((name.trim().to_string(), value))
}

/// Config file layout. Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub modes: Option<usize>,
    pub trials: Option<usize>,
    pub lambda_grid: Option<String>,
    pub time_grid: Option<String>,
    pub t: Option<f64>,
    pub h: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Fully resolved settings of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub modes: usize,
    pub trials: usize,
    pub lambda_grid: Grid,
    pub time_grid: Grid,
    pub h: f64,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Flags over config file over environment over defaults.
    pub fn resolve(command: Command, opts: &Options, env_out: Option<PathBuf>) -> anyhow::Result<Self> {
        let file = match &opts.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let lambda_grid = match (&opts.lambda_grid, &file.lambda_grid) {
            (Some(g), _) => g.clone(),
            (None, Some(s)) => s.parse()?,
            (None, None) => Grid::range(0.1, 0.9, 0.1),
        };
        let single_t = opts.t.or(file.t);
        let time_grid = match (single_t, &opts.time_grid, &file.time_grid) {
            (_, Some(g), _) if opts.t.is_none() => g.clone(),
            (Some(t), _, _) => Grid(vec![t]),
            (None, _, Some(s)) => s.parse()?,
            _ => command.default_times(),
        };
        let mut tolerances = file.tolerances;
        tolerances.extend(opts.tolerances.iter().cloned());
        let config = Self {
            command,
            modes: opts.modes.or(file.modes).unwrap_or(command.default_modes()),
            trials: opts.trials.or(file.trials).unwrap_or(20),
            lambda_grid,
            time_grid,
            h: opts.h.or(file.h).unwrap_or(command.default_h()),
            seed: opts.seed.or(file.seed).unwrap_or(0),
            tolerances,
            out_dir: opts.out.clone().or(file.out).or(env_out),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let max = self.command.max_modes();
        ensure!(
            (1..=max).contains(&self.modes),
            "{} supports 1 to {max} modes, got {}",
            self.command,
            self.modes
        );
        ensure!(
            (1..=MAX_TRIALS).contains(&self.trials),
            "trials must lie in 1..={MAX_TRIALS}"
        );
        for &l in self.lambda_grid.points() {
            ensure!((0.0..=1.0).contains(&l), "transmissivity {l} lies outside [0, 1]");
        }
        for &t in self.time_grid.points() {
            ensure!(t >= 0.0 && t.is_finite(), "time {t} must be finite and nonnegative");
        }
        ensure!(
            (1e-5..=1e-2).contains(&self.h),
            "step h = {} lies outside [1e-5, 1e-2]",
            self.h
        );
        for (name, tol) in &self.tolerances {
            ensure!(
                tol.is_finite() && *tol >= 0.0,
                "tolerance for {name:?} must be finite and nonnegative"
            );
        }
        Ok(())
    }

    /// Seeds are split per grid cell and trial so parallel runs stay reproducible.
    pub fn stream(&self, cell: usize, trial: usize) -> u64 {
        (cell * self.trials + trial) as u64
    }
}
