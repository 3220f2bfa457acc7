//! `bcn`: verification, simulation, involution and limit workflows.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, Gradient, Method, RunConfig, Stepper};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bcn_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("tolerance breached: {0}")]
    Breach(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_validation() => 1,
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Core(_) | CliError::Breach(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bcn", version, about = "Reduced BC(n) Ruijsenaars-type model on the Heisenberg double")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Assemble random admissible points and report constraint residuals.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Number of random points.
        #[arg(long)]
        samples: Option<usize>,
        /// Largest acceptable constraint residual.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Integrate the reduced flow and/or project the exact flow.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Initial positions, comma separated and decreasing.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q: Option<Vec<f64>>,
        /// Initial momenta, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        p: Option<Vec<f64>>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long, value_enum)]
        integrator: Option<Stepper>,
        /// Largest acceptable deviation between the two flows.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Poisson brackets of the trace Hamiltonians at random points.
    Involution {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
        /// Brackets of Phi_1 .. Phi_max_order.
        #[arg(long)]
        max_order: Option<u32>,
        #[arg(long, value_enum)]
        gradient: Option<Gradient>,
        /// Base step of the finite-difference gradient.
        #[arg(long)]
        fd_step: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Convergence of the linearised Hamiltonian to the Sutherland form.
    Limit {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        eta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        zeta: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pi: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON file with the same field names as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    y: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl Common {
    fn into_config(self) -> (Option<PathBuf>, RunConfig) {
        let cfg = RunConfig {
            n: self.n,
            alpha: self.alpha,
            x: self.x,
            y: self.y,
            seed: self.seed,
            format: self.format,
            output: self.output,
            ..RunConfig::default()
        };
        (self.config, cfg)
    }
}

fn resolve(command: Command) -> Result<(commands::Task, RunConfig), CliError> {
    let (task, common, flags) = match command {
        Command::Verify { common, samples, tol } => {
            (commands::Task::Verify, common, RunConfig { samples, tol, ..Default::default() })
        }
        Command::Simulate { common, q, p, t_max, dt, method, integrator, tol } => (
            commands::Task::Simulate,
            common,
            RunConfig { q, p, t_max, dt, method, integrator, tol, ..Default::default() },
        ),
        Command::Involution { common, samples, max_order, gradient, fd_step, tol } => (
            commands::Task::Involution,
            common,
            RunConfig { samples, max_order, gradient, fd_step, tol, ..Default::default() },
        ),
        Command::Limit { common, xi, eta, zeta, q, pi, t_grid } => {
            (commands::Task::Limit, common, RunConfig { xi, eta, zeta, q, pi, t_grid, ..Default::default() })
        }
    };
    let (file, shared) = common.into_config();
    let flags = flags.over(shared);
    let cfg = match file {
        Some(path) => flags.over(RunConfig::load(&path)?),
        None => flags,
    };
    Ok((task, cfg))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BCN_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match resolve(cli.command).and_then(|(task, cfg)| commands::run(task, &cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bcn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
