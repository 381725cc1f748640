//! Command-line driver for the band point-vortex library.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mobius_vortex::VortexError;

#[derive(Parser)]
#[command(
    name = "mobius-vortex",
    version,
    about = "Point-vortex dynamics on the Möbius band",
    propagate_version = true
)]
pub struct Cli {
    /// Directory for generated files.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Format for tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Base tolerance handed to integrators and solvers.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
pub enum Command {
    /// Integrate a vortex system and record the trajectory, seam crossings,
    /// and conservation diagnostics.
    Simulate(SimulateArgs),
    /// Compute steady and rigidly drifting configurations.
    Equilibria {
        #[command(subcommand)]
        which: EquilibriaCommand,
    },
    /// Work with the reduced two-vortex system.
    Reduced {
        #[command(subcommand)]
        which: ReducedCommand,
    },
    /// Sample the stream function of a configuration over a grid.
    Streamfield(StreamfieldArgs),
    /// Run the self-check suite and emit a pass/fail report.
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Input system (JSON: {"vortices": [{"x", "y", "gamma", "label"?}]}).
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.1)]
    pub sample_dt: f64,
    /// Override the global --tol for the relative tolerance.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Override the global --tol for the absolute tolerance.
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub collision_radius: f64,
    /// Cap on the adaptive step size.
    #[arg(long)]
    pub max_step: Option<f64>,
}

#[derive(Subcommand)]
pub enum EquilibriaCommand {
    /// Closed-form fixed equilibria of a same-sign, unequal pair.
    Fixed {
        #[arg(long, allow_negative_numbers = true)]
        g1: f64,
        #[arg(long, allow_negative_numbers = true)]
        g2: f64,
    },
    /// Newton-solved alternating equilibrium on the equator.
    Equatorial {
        /// Comma-separated strengths (odd count, alternating signs).
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        strengths: Vec<f64>,
        /// Convergence threshold (defaults to the global --tol, floored at 1e-12).
        #[arg(long)]
        solver_tol: Option<f64>,
        #[arg(long, default_value_t = 60)]
        max_iterations: usize,
    },
    /// Equally spaced ring and its analytic drift.
    Nring {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, allow_negative_numbers = true)]
        y: f64,
    },
}

#[derive(Subcommand)]
pub enum ReducedCommand {
    /// Critical points of the reduced energy on the symmetry lines.
    Critical {
        #[arg(long, allow_negative_numbers = true)]
        g1: f64,
        #[arg(long, allow_negative_numbers = true)]
        g2: f64,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
    },
    /// Classify the orbit through a reduced state and trace one period.
    Orbit {
        #[arg(long, allow_negative_numbers = true)]
        g1: f64,
        #[arg(long, allow_negative_numbers = true)]
        g2: f64,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, allow_negative_numbers = true)]
        dx: f64,
        #[arg(long, allow_negative_numbers = true)]
        y1: f64,
        #[arg(long, default_value_t = 1e5)]
        t_max: f64,
    },
    /// Phase-portrait grid of the reduced energy, optionally swept over C.
    Scan {
        #[arg(long, allow_negative_numbers = true)]
        g1: f64,
        #[arg(long, allow_negative_numbers = true)]
        g2: f64,
        /// Single impulse value (exclusive with --c-sweep).
        #[arg(long, conflicts_with = "c_sweep", allow_negative_numbers = true)]
        c: Option<f64>,
        /// Sweep start:stop:count over the impulse.
        #[arg(long, allow_hyphen_values = true)]
        c_sweep: Option<String>,
        /// Grid shape NXxNY.
        #[arg(long, default_value = "400x300")]
        grid: String,
        /// Δx range as min:max (defaults to one full period).
        #[arg(long, allow_hyphen_values = true)]
        dx_range: Option<String>,
        /// y₁ range as min:max.
        #[arg(long, default_value = "-3:3", allow_hyphen_values = true)]
        y_range: String,
        /// Mask cells whose reconstructed pair is closer than this.
        #[arg(long, default_value_t = 0.05)]
        mask_radius: f64,
    },
}

#[derive(Args)]
pub struct StreamfieldArgs {
    #[arg(long)]
    pub system: PathBuf,
    /// Grid shape NXxNY.
    #[arg(long, default_value = "200x100")]
    pub grid: String,
    /// x range as min:max (defaults to the fundamental chart width).
    #[arg(long, allow_hyphen_values = true)]
    pub x_range: Option<String>,
    #[arg(long, default_value = "-2:2", allow_hyphen_values = true)]
    pub y_range: String,
    #[arg(long, default_value_t = 1e-3)]
    pub mask_radius: f64,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Number of random systems in the symmetry checks.
    #[arg(long, default_value_t = 100)]
    pub systems: usize,
    /// Integration horizon of the conservation checks.
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    /// Multiply every pass threshold by this factor (< 1 tightens).
    #[arg(long, default_value_t = 1.0)]
    pub tol_scale: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Stable exit codes: 2 invalid input/domain, 3 collision, 4 non-convergence,
/// 5 I/O, 1 failed verification or unexpected failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(v) = cause.downcast_ref::<VortexError>() {
            return match v {
                VortexError::Collision { .. } => 3,
                VortexError::Domain(_)
                | VortexError::Validation(_)
                | VortexError::SingularState(_) => 2,
                VortexError::Convergence { .. }
                | VortexError::OrderingViolation { .. }
                | VortexError::StepSizeUnderflow { .. }
                | VortexError::StepBudgetExhausted { .. }
                | VortexError::SeparatrixTimeout { .. } => 4,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 5;
        }
        if cause.downcast_ref::<commands::verify::VerifyFailed>().is_some() {
            return 1;
        }
    }
    1
}
