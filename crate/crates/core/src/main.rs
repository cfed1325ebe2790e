use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use visco_galerkin::commands;

#[derive(Parser)]
#[command(
    name = "visco-galerkin",
    about = "Pseudo-spectral Galerkin solver for shear-thinning flow on the torus",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check conditions (C1)-(C4) for catalog or tabulated viscosity models
    Models {
        /// Model names, or "all" for the whole catalog
        #[arg(default_value = "all")]
        names: Vec<String>,
        /// Custom tabulated model as two-column CSV (t, F)
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Execute one simulation from a config file
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Stopping-time sweep over a regularization list
    Stoptime {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Decay exponent of the viscosity law, in (0, 4/(N+2)]
        #[arg(long)]
        alpha: f64,
        /// Regularization values, finest last
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        eps: Vec<f64>,
    },
    /// Double-limit convergence study over (eps, m) refinement lists
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Regularization values, strictly decreasing, at least 3
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        eps: Vec<f64>,
        /// Galerkin cutoffs, strictly increasing, at least 3
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        m: Vec<i64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // keep clap's rendered message but normalize the usage exit code;
            // --help and --version still exit 0
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let code = match cli.command {
        Command::Models { names, table } => commands::cmd_models(&names, table.as_deref()),
        Command::Run { config, out } => commands::cmd_run(&config, &out),
        Command::Stoptime { config, out, alpha, eps } => {
            commands::cmd_stoptime(&config, &out, alpha, &eps)
        }
        Command::Converge { config, out, eps, m } => {
            commands::cmd_converge(&config, &out, &eps, &m)
        }
    };
    ExitCode::from(code as u8)
}
