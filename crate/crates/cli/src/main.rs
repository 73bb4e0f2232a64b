mod commands;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Compile Turing machines into planar gradient flows, simulate and verify them.
#[derive(Parser, Debug)]
#[command(name = "flowtm", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Run settings. Precedence: defaults, then `--config`, then environment, then flags.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Machine file, or a preset name (instant, incrementer, countdown, loop, bounce, runaway)
    #[arg(long, global = true, env = "FLOWTM_MACHINE")]
    pub machine: Option<String>,
    #[arg(long, global = true, env = "FLOWTM_INPUTS")]
    pub inputs: Option<usize>,
    /// Height budget L_max
    #[arg(long, global = true, env = "FLOWTM_LMAX")]
    pub lmax: Option<usize>,
    /// Window radius N for bounded runs
    #[arg(long, global = true, env = "FLOWTM_WINDOW")]
    pub window: Option<f64>,
    #[arg(long, global = true, env = "FLOWTM_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "FLOWTM_EPS0")]
    pub eps0: Option<f64>,
    /// Λ as a fraction of Λ₀
    #[arg(long, global = true, env = "FLOWTM_LAMBDA_FRAC")]
    pub lambda_frac: Option<f64>,
    #[arg(long, global = true, env = "FLOWTM_OUT", default_value = "flowtm-out")]
    pub out: PathBuf,
    /// Flat `key = value` config file
    #[arg(long, global = true, env = "FLOWTM_CONFIG")]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Build curves and field; dump curve and field grids
    Compile {
        /// Field grid points per side
        #[arg(long, default_value_t = 41)]
        grid: usize,
    },
    /// Verdict, trajectory, events and plot per input
    Simulate {
        /// Output window t* (odd number of digits, head in the middle)
        #[arg(long, default_value = "000")]
        target: String,
        /// Tape bounds `lo:hi` for the bounded classification
        #[arg(long, allow_hyphen_values = true)]
        bounds: Option<String>,
        /// Exit 1 when a row is UNRESOLVED
        #[arg(long)]
        fail_on_unresolved: bool,
    },
    /// Compare flow verdicts with direct execution over all inputs
    Verify {
        #[arg(long, default_value = "000")]
        target: String,
        #[arg(long, allow_hyphen_values = true)]
        bounds: Option<String>,
    },
    /// Robustness sweep over scheduled perturbations
    Perturb {
        #[arg(long, default_value = "000")]
        target: String,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Fit a window polynomial, lift it to a Beltrami field, report residuals
    Extend3d {
        /// `fit` (fit the field on box K^band_height), or one of `0`, `x`, `xy`
        #[arg(long, default_value = "fit")]
        datum: String,
        #[arg(long, default_value_t = 0)]
        band: usize,
        #[arg(long, default_value_t = 0)]
        height: usize,
        /// Beltrami eigenvalue λ
        #[arg(long, default_value_t = 1.0)]
        beltrami_lambda: f64,
        /// Truncation order K
        #[arg(long)]
        order: Option<usize>,
        /// Grid points per axis on [-1, 1]³
        #[arg(long, default_value_t = 11)]
        grid: usize,
    },
    /// Discrete time-δ orbits of the damped field against the continuous flow
    Sphere {
        #[arg(long, default_value = "000")]
        target: String,
        /// δ as a fraction of δ₀
        #[arg(long)]
        delta_frac: Option<f64>,
    },
    /// Nested-exponential robustness and energy bounds
    Estimate {
        #[arg(long)]
        sb: Option<u32>,
        #[arg(long = "C", alias = "c")]
        c: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(&cli.common, &cli.cmd) {
        Ok(commands::Status::Pass) => ExitCode::SUCCESS,
        Ok(commands::Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("flowtm: {e}");
            ExitCode::from(2)
        }
    }
}
