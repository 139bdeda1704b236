//! exvortex: boundary-integral solvers for 2D ideal flow past an obstacle.
//!
//! Every subcommand reads a JSON run configuration and writes into an existing
//! output directory. Exit codes: 0 success, 2 configuration error, 3 solver
//! error, 4 I/O error.

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};
use config::Overrides;
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "exvortex", version, about = "Boundary vortex and fluid charge solvers for flow outside an obstacle")]
struct Cli {
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (must exist)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Mesh perturbation seed, overrides mesh.seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Default)]
struct SolverArgs {
    /// vortex, charge or charge-lambda
    #[arg(long)]
    method: Option<String>,
    /// disk or point:x,y
    #[arg(long)]
    hstar: Option<String>,
    /// const:c or sigma:s
    #[arg(long)]
    lambda: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the curve and mesh
    Geom {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Solve for the boundary density and evaluate the velocity
    Static {
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Error against the exact disk flow over a list of mesh sizes
    Converge {
        #[command(flatten)]
        solver: SolverArgs,
        /// comma separated, e.g. 16,32,64
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Kernel identities, conditioning, dominance and geometric radii
    Diagnose {
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Advect the blobs with RK4
    Dynamics {
        /// vortex, charge, charge-lambda, exact-disk or free-space
        #[arg(long)]
        method: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let mut ov = Overrides { seed: cli.seed, ..Default::default() };
    let solver = |ov: &mut Overrides, s: &SolverArgs| {
        ov.method = s.method.clone();
        ov.hstar = s.hstar.clone();
        ov.lambda = s.lambda.clone();
    };
    match &cli.command {
        Command::Geom { samples } => ov.samples = *samples,
        Command::Static { solver: s } => solver(&mut ov, s),
        Command::Converge { solver: s, n_list } => {
            solver(&mut ov, s);
            ov.n_list = n_list.clone();
        }
        Command::Diagnose { solver: s, samples } => {
            solver(&mut ov, s);
            ov.samples = *samples;
        }
        Command::Dynamics { method } => ov.method = method.clone(),
    }
    let resolved = config::load(cli.config.as_deref(), &ov)?;
    let out = output::out_dir(cli.out.as_deref())?;
    match cli.command {
        Command::Geom { .. } => commands::geom(&resolved, &out),
        Command::Static { .. } => commands::run_static(&resolved, &out),
        Command::Converge { .. } => commands::converge(&resolved, &out),
        Command::Diagnose { .. } => commands::diagnose(&resolved, &out),
        Command::Dynamics { .. } => commands::dynamics(&resolved, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("exvortex: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
