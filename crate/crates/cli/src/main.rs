//! Command-line driver for the singularly perturbed solvers.

mod config;
mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Experiment, RunConfig};
use experiments::RunError;

#[derive(Debug, Parser)]
#[command(name = "singpert", version, about = "Solve -eps^2 Lap u + q u = f(u) on a periodic box")]
struct Args {
    /// TOML run configuration; without it the experiment's preset is used.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Experiment to run; replaces the one named in the config file.
    #[arg(long, value_name = "NAME")]
    experiment: Option<Experiment>,

    /// Output directory [default: out/<experiment>].
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Run even when the grid violates the discretization guards.
    #[arg(long)]
    override_guards: bool,

    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    dump_config: bool,
}

fn resolve(args: &Args) -> Result<RunConfig, RunError> {
    let mut cfg = match (&args.config, args.experiment) {
        (Some(path), exp) => {
            let mut cfg = RunConfig::load(path).map_err(|e| RunError::Config(e.0))?;
            if let Some(e) = exp {
                cfg.experiment = e;
            }
            cfg
        }
        (None, Some(e)) => RunConfig::preset(e),
        (None, None) => return Err(RunError::Config("one of --config or --experiment is required".into())),
    };
    if args.override_guards {
        cfg.override_guards = true;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate().map_err(|e| RunError::Config(e.0))?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let cfg = match resolve(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("singpert: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    if args.dump_config {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }
    let out_dir = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.name()));
    match experiments::run(&cfg, &out_dir) {
        Ok(outcome) => {
            print!("{}", outcome.render());
            println!("wrote {} files to {}", outcome.files.len(), out_dir.display());
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("singpert: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
