//! `proxima`: batch front-end to the typicality, synthesis and spectral
//! experiments of `proxima-core`.
//!
//! Exit status is 0 on success, 2 when the experiment answers in the
//! negative (a failed certificate, no domination evidence, a non-constant
//! exponent difference) and 1 when the run could not be carried out.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use proxima_core::DEFAULT_TOL;

#[derive(Parser, Debug)]
#[command(name = "proxima", version, about = "Typicality certificates and proximal periodic orbits for matrix cocycles")]
pub struct Cli {
    /// Worker threads for the parallel enumerations (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file, written atomically. Standard output if omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Certify typicality with respect to a fixed point and a homoclinic loop.
    Check(CheckArgs),
    /// Build a periodic orbit shadowing a word with proximal products.
    Synthesize(SynthesizeArgs),
    /// Estimate the shadowing constants on random words.
    VerifyBound(VerifyArgs),
    /// Look for evidence of a dominated splitting of index i.
    Dominate(DominateArgs),
    /// Lyapunov spectra of all periodic orbits up to a period.
    Spectrum(SpectrumArgs),
    /// Singular value pressure P(s).
    Pressure(PressureArgs),
    /// Compare the top exponents of two cocycles over the same shift.
    Compare(CompareArgs),
    /// Write a built-in example cocycle file.
    Demo(DemoArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    /// Cocycle file (JSON).
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct Certify {
    /// Typicality tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Longest excursion tried when searching for a typical pair.
    #[arg(long, default_value_t = 4)]
    pub max_excursion: usize,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub certify: Certify,
    /// Fixed symbol of the pair to check (instead of searching).
    #[arg(long, requires = "excursion")]
    pub symbol: Option<u8>,
    /// Excursion word of the pair to check.
    #[arg(long, requires = "symbol")]
    pub excursion: Option<String>,
}

#[derive(Args, Debug)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub certify: Certify,
    /// The word to shadow, as symbol digits.
    #[arg(long)]
    pub word: String,
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    /// Cap on the loop length ℓ.
    #[arg(long)]
    pub ell_cap: Option<usize>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub certify: Certify,
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 4)]
    pub n_min: usize,
    #[arg(long, default_value_t = 40)]
    pub n_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub ell_cap: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DominateArgs {
    #[command(flatten)]
    pub input: Input,
    #[command(flatten)]
    pub certify: Certify,
    /// Index of the splitting, 1 <= i < d.
    #[arg(long, default_value_t = 1)]
    pub index: usize,
    #[arg(long, default_value_t = 8)]
    pub max_period: usize,
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    /// Sample this many words per length instead of enumerating them all.
    #[arg(long, requires = "seed")]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, default_value_t = 6)]
    pub max_period: usize,
}

#[derive(Args, Debug)]
pub struct PressureArgs {
    #[command(flatten)]
    pub input: Input,
    /// Exponent of the singular value function.
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// First cocycle A.
    #[command(flatten)]
    pub input: Input,
    /// Second cocycle B.
    #[arg(long)]
    pub other: PathBuf,
    #[command(flatten)]
    pub certify: Certify,
    #[arg(long, default_value_t = 8)]
    pub max_period: usize,
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    /// Spread allowed in λ₁(A, q) − λ₁(B, q) across orbits.
    #[arg(long, default_value_t = 1e-9)]
    pub spread_tol: f64,
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    /// Paired proximal approximations to build.
    #[arg(long, default_value_t = 8)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub ell_cap: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    /// One of the built-in names; `--list` prints them.
    #[arg(required_unless_present = "list")]
    pub name: Option<String>,
    #[arg(long)]
    pub list: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(output::Status::Pass) => ExitCode::SUCCESS,
        Ok(output::Status::Negative) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
