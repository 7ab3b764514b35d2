mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "nanokit", version, about = "Traveling nanopterons of the diatomic FPUT lattice")]
struct Cli {
    /// Output directory; defaults to $NANOKIT_OUTPUT_DIR, then ./nanokit-out.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Resonant frequency and perturbed eigenvalues.
    Dispersion(DispersionArgs),
    /// Build the wave and write its profile and summary.
    Construct(WaveArgs),
    /// Launch the constructed wave on a finite chain.
    Simulate(SimulateArgs),
    /// Run the invariant checks and write a pass/fail report.
    Verify(VerifyArgs),
    /// Construct and verify over a list of eps values.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DispersionArgs {
    /// Mass ratio, must exceed 1.
    #[arg(long, default_value_t = 2.0)]
    pub w: f64,
    /// Comma-separated eps values for the eigenvalue table.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.05, 0.02, 0.01])]
    pub eps: Vec<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct WaveArgs {
    #[arg(long, default_value_t = 2.0)]
    pub w: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Ripple amplitude scale, `I = eps^4 I0`.
    #[arg(long = "I0", alias = "i0", default_value_t = 1.0)]
    pub i0: f64,
    /// Fourier harmonics of the periodic orbit.
    #[arg(long, default_value_t = 7)]
    pub harmonics: usize,
    /// Solver horizon `T`; defaults to 25 over the decay rate.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Largest solver grid step.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pub picard_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub jump_tol: f64,
    /// Higher normal-form coefficients, zero for the dominant truncation.
    #[arg(long, default_value_t = 0.0)]
    pub c33: f64,
    #[arg(long, default_value_t = 0.0)]
    pub c34: f64,
    #[arg(long, default_value_t = 0.0)]
    pub e31: f64,
    #[arg(long, default_value_t = 0.0)]
    pub e32: f64,
    #[arg(long, default_value_t = 0.0)]
    pub e33: f64,
    #[arg(long, default_value_t = 0.0)]
    pub e34: f64,
    /// Profile samples are written on `[-tau_max, tau_max]`.
    #[arg(long, default_value_t = 100.0)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    #[arg(long, default_value_t = 2048)]
    pub sites: usize,
    /// Site placed at `tau = 0` initially.
    #[arg(long, default_value_t = 512)]
    pub launch: i64,
    #[arg(long, default_value_t = 0.005)]
    pub dt: f64,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    /// Time between trajectory snapshots.
    #[arg(long, default_value_t = 1.0)]
    pub snapshot: f64,
    /// Sponge width in sites; 0 leaves the ends free.
    #[arg(long, default_value_t = 40)]
    pub sponge: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sponge_strength: f64,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    /// Allowed first-integral drift between 0 and 10/eps; defaults to 1e-6 eps^2.
    #[arg(long)]
    pub fi_tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub verify: VerifyArgs,
    /// Comma-separated eps values; overrides --eps.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.05])]
    pub eps_list: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli
        .out
        .or_else(|| std::env::var_os("NANOKIT_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("nanokit-out"));
    let result = match &cli.command {
        Command::Dispersion(a) => commands::dispersion(a, &out),
        Command::Construct(a) => commands::construct(a, &out),
        Command::Simulate(a) => commands::simulate(a, &out),
        Command::Verify(a) => commands::verify(a, &out),
        Command::Sweep(a) => commands::sweep(a, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = commands::exit_code(&e);
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
