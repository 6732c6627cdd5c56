mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bnf", version, about = "Birkhoff normal forms, resonance lattices and potential recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normal form of a potential spec (scaled, unscaled, generating chain).
    Bnf(BnfArgs),
    /// Leading-order resonance lattice of a normal form at one or more h.
    Resonances(ResonancesArgs),
    /// Recover Taylor coefficients from resonance lists.
    Invert(InvertArgs),
    /// Resonances of the complex-scaled operator in a truncated basis.
    Oracle(OracleArgs),
    /// Spec -> normal form -> recovered spec, with coefficient differences.
    Roundtrip(RoundtripArgs),
    /// Random even potential with rational data.
    RandomSpec(RandomSpecArgs),
}

#[derive(Args, Debug)]
pub struct BnfArgs {
    pub spec: PathBuf,
    #[arg(long)]
    pub order: u32,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ResonancesArgs {
    pub normal_form: PathBuf,
    #[arg(long = "h", required = true, num_args = 1.., value_delimiter = ',')]
    pub h: Vec<f64>,
    #[arg(long)]
    pub kmax: u32,
    /// One `resonances_h<h>.json` per h; stdout bundle otherwise.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InvertArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub order: u32,
    /// Action degree of the fit (default: --order).
    #[arg(long)]
    pub fit_degree: Option<u32>,
    #[arg(long)]
    pub kmax: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    pub tol_factor: f64,
    /// Dimension, for unlabeled data.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1e-2)]
    pub imag_tol: f64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    pub spec: PathBuf,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub basis: Option<usize>,
    #[arg(long)]
    pub increment: Option<usize>,
    #[arg(long)]
    pub re_window: Option<f64>,
    #[arg(long)]
    pub im_window: Option<f64>,
    #[arg(long)]
    pub stability_tol: Option<f64>,
    #[arg(long)]
    pub max_dim: Option<usize>,
    /// OracleConfig JSON; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RoundtripArgs {
    pub spec: PathBuf,
    #[arg(long)]
    pub order: u32,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RandomSpecArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub max_degree: u32,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Bnf(a) => commands::bnf(&a),
        Command::Resonances(a) => commands::resonances(&a),
        Command::Invert(a) => commands::invert(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::Roundtrip(a) => commands::roundtrip(&a),
        Command::RandomSpec(a) => commands::random_spec(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
