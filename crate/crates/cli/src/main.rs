mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use divchain::Error;

use output::{Format, Style};

/// Markov chains on the divisibility poset: sieves, weights, hitting masses,
/// Monte Carlo samplers and interval certificates.
#[derive(Parser, Debug)]
#[command(name = "divchain", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true, env = "DIVCHAIN_THREADS")]
    pub threads: Option<usize>,
    /// Seed for every stochastic command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Print floats as hexadecimal float strings.
    #[arg(long, global = true)]
    pub hexfloat: bool,
}

impl Global {
    pub fn style(&self) -> Style {
        Style { format: self.format, hexfloat: self.hexfloat }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Smallest prime factor, Ω, ω and Λ for a range of integers.
    Sieve(commands::SieveArgs),
    /// Evaluate a weight on a range of integers.
    Weight(commands::WeightCmd),
    /// Print the downward (or adjoint upward) transition list of a state.
    Chain(commands::ChainCmd),
    /// Sub-invariance margins of a chain/weight pair.
    Subinv(commands::SubinvArgs),
    /// Exact downward hitting masses from a single start.
    Hitdown(commands::HitdownArgs),
    /// Exact upward hitting masses of the adjoint chain.
    Hitup(commands::HitupArgs),
    /// The initial mass b on [x, X] for the von Mangoldt chain.
    Mass1196(commands::RangeXArgs),
    /// Upper bound for Erdős sums of primitive sets in [x, X].
    Bound1196(commands::RangeXArgs),
    /// Exact LYM hitting masses below a squarefree integer.
    Lym(commands::LymArgs),
    /// Cut-capacity inequality for a state set and a primitive set.
    Cut(commands::CutArgs),
    /// Flow divergence of the von Mangoldt chain weighted by ν₀.
    Flowdiv(commands::FlowdivArgs),
    /// Generate, validate or peel primitive sets.
    Prim(commands::PrimCmd),
    /// Monte Carlo simulation.
    Simulate(commands::SimulateCmd),
    /// Interval certificates and grid checks.
    Certify(commands::CertifyCmd),
    /// Figure data as CSV.
    Figure(commands::FigureArgs),
}

/// A command outcome that is not an error but still fails verification.
#[derive(Debug)]
pub struct Unverified(pub String);

pub enum Failure {
    Lib(Error),
    Io(std::io::Error),
    Unverified(Unverified),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<Unverified> for Failure {
    fn from(e: Unverified) -> Self {
        Failure::Unverified(e)
    }
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Lib(Error::Domain(_) | Error::Parse(_) | Error::Unsupported(_)) => 1,
        Failure::Lib(Error::SubinvarianceViolation { .. } | Error::Internal(_)) => 2,
        Failure::Unverified(_) => 2,
        Failure::Lib(Error::Resource(_)) | Failure::Io(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Io(e) => eprintln!("error: {e}"),
                Failure::Unverified(Unverified(msg)) => eprintln!("verification failed: {msg}"),
            }
            ExitCode::from(exit_code(&f))
        }
    }
}
