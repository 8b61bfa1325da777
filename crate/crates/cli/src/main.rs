use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fepi::{Command, Options, RunConfig, OUT_DIR_ENV};

/// Verification experiments for fermionic Gaussian states and the entropy
/// power inequality.
#[derive(Parser)]
#[command(name = "fepi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_out = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let config = match RunConfig::resolve(cli.command, &cli.options, env_out) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let run = match fepi::run(&config) {
        Ok(run) => run,
        Err(e) => {
            eprintln!("error: {} failed: {e:#}", config.command);
            return ExitCode::from(2);
        }
    };
    if cli.options.json {
        match run.to_json() {
            Ok(json) => println!("{json}"),
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        }
    } else {
        print!("{run}");
    }
    if let Some(dir) = &config.out_dir {
        match run.write_to(dir) {
            Ok(paths) => {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        }
    }
    if run.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
