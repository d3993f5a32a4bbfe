use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use inf_eigen::cli::{parse_domain_arg, run_solve, RunConfig};
use inf_eigen::experiments::{self, Experiment, ExperimentOptions};
use inf_eigen::io::{to_json_string, write_field_csv};
use inf_eigen::{build_grid, distance_transform, lambda1, Execution, Result};

/// Infinity Laplacian eigenfunctions on planar domains.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem described by a JSON run file.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a named experiment and write its fields and summary.
    Experiment {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        stencil: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the grid distance to the boundary as a field CSV.
    Distance {
        /// Domain JSON, inline or as a file path.
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 97)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        stencil: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Worker pool from `INF_EIGEN_THREADS`; `0` runs serially.
fn execution() -> Result<Execution> {
    let Ok(raw) = std::env::var("INF_EIGEN_THREADS") else {
        return Ok(Execution::Parallel);
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        inf_eigen::Error::InvalidConfig(format!("INF_EIGEN_THREADS must be an integer, got {raw:?}"))
    })?;
    if threads == 0 {
        return Ok(Execution::Serial);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| inf_eigen::Error::InvalidConfig(e.to_string()))?;
    Ok(Execution::Parallel)
}

fn run(cli: Cli) -> Result<bool> {
    let execution = execution()?;
    match cli.command {
        Command::Solve { config } => {
            let config = RunConfig::read(config)?;
            let (_, _, output) = run_solve(&config, execution)?;
            print!("{}", to_json_string(&output)?);
            Ok(output.report.converged)
        }
        Command::Experiment {
            name,
            out,
            n,
            stencil,
            seed,
        } => {
            let exp: Experiment = name.parse()?;
            let opts = ExperimentOptions {
                n,
                stencil,
                seed,
                execution,
            };
            experiments::run(exp, &opts, Some(&out))?;
            println!("{exp}: wrote {}", out.join("summary.json").display());
            Ok(true)
        }
        Command::Distance {
            domain,
            n,
            stencil,
            out,
        } => {
            let grid = build_grid(&parse_domain_arg(&domain)?, n, stencil)?;
            let d = distance_transform(&grid)?;
            write_field_csv(&out, &grid, &d)?;
            println!("lambda1 = {:.16e}", lambda1(&d)?.lambda);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
