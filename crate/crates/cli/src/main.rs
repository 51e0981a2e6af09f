//! `pls`: solve Dirichlet ground states on convex domains and check their
//! power-logconcavity.
//!
//! Exit codes: 0 success, 2 I/O, 3 solver failure, 4 bad configuration,
//! 5 a check failed.

mod commands;
mod expr;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "pls", version, about = "Dirichlet ground states and their power-logconcavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Domain description (JSON).
    #[arg(long)]
    pub domain: PathBuf,
    /// Grid spacing; expressions such as `1/128` are accepted.
    #[arg(long)]
    pub h: String,
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Read `u` from a PLSF file written by `solve` instead of solving.
    #[arg(long)]
    pub field: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the first eigenpair and write `u` as PLSF plus a JSON sidecar.
    Solve {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
        /// Also extrapolate λ₁ from the spacings 2h and h.
        #[arg(long)]
        richardson: bool,
    },
    /// Print κ̄ and, per κ, the superlevel data w̄_κ, ū_κ and |Ω_κ|.
    Threshold {
        #[command(flatten)]
        input: FieldArgs,
        /// Comma-separated κ values in (0, 1).
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the convex envelope of w_κ and write its facets as CSV.
    Envelope {
        #[command(flatten)]
        input: FieldArgs,
        #[arg(long, default_value = "kbar")]
        kappa: String,
        /// Exclusion band; defaults to max(2h, 0.02·D).
        #[arg(long)]
        band: Option<String>,
        /// Facet CSV.
        #[arg(long)]
        out: PathBuf,
        /// Optional PLSF output of the envelope values.
        #[arg(long)]
        field_out: Option<PathBuf>,
    },
    /// Run the selected checks for every (κ, α) and write a JSON report.
    Verify {
        #[command(flatten)]
        input: FieldArgs,
        #[arg(long, default_value = "kbar")]
        kappa: String,
        #[arg(long, default_value = "0.5")]
        alpha: String,
        /// Check band; defaults to max(4h, 0.02·D).
        #[arg(long)]
        band: Option<String>,
        /// Comma-separated check names, or `all`.
        #[arg(long, default_value = "all")]
        checks: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Sampled pairs per segment-type check.
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        /// Interpolation parameters of the segment checks.
        #[arg(long, default_value = "0.5")]
        t_values: String,
        /// Random SPD pairs for the trace check.
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long)]
        richardson: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Emit Ψ_κ(s) curves as CSV.
    Psi {
        #[arg(long, default_value = "1/2,1/sqrt(2),sqrt(2)/sqrt(3),1")]
        kappa: String,
        #[arg(long, default_value = "2.5")]
        s_max: String,
        #[arg(long, default_value_t = 500)]
        n_points: usize,
        /// Constant π²/(λ₁D²); defaults to the unit disc value π²/(4j₀₁²).
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bisect κ ∈ [κ̄, 1) for the largest κ at which w_κ tests convex.
    Sweep {
        #[command(flatten)]
        input: FieldArgs,
        #[arg(long)]
        band: Option<String>,
        #[arg(long, default_value_t = 12)]
        iterations: usize,
        /// CSV log of probed κ values.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), commands::Failure> {
    let Ok(text) = std::env::var("PLS_THREADS") else { return Ok(()) };
    let threads: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| commands::Failure::config(format!("PLS_THREADS must be a positive integer, got `{text}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| commands::Failure::config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), commands::Failure> {
    configure_threads()?;
    match cli.command {
        Command::Solve { grid, out, richardson } => commands::solve(&grid, &out, richardson),
        Command::Threshold { input, kappa, out } => commands::threshold(&input, kappa.as_deref(), out.as_deref()),
        Command::Envelope { input, kappa, band, out, field_out } => {
            commands::envelope(&input, &kappa, band.as_deref(), &out, field_out.as_deref())
        }
        Command::Verify { input, kappa, alpha, band, checks, seed, pairs, t_values, trials, richardson, report } => {
            let options = commands::VerifyOptions {
                kappa,
                alpha,
                band,
                checks,
                seed,
                pairs,
                t_values,
                trials,
                richardson,
            };
            commands::verify(&input, &options, report.as_deref())
        }
        Command::Psi { kappa, s_max, n_points, target, out } => {
            commands::psi(&kappa, &s_max, n_points, target.as_deref(), out.as_deref())
        }
        Command::Sweep { input, band, iterations, out, report } => {
            commands::sweep(&input, band.as_deref(), iterations, out.as_deref(), report.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(commands::EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("pls: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
