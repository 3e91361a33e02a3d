mod commands;
mod manifest;
mod parse;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rcs_lab::Error;
use std::path::PathBuf;

/// Exit code for bad arguments, unreadable inputs and resource-cap
/// violations.
pub const EXIT_USAGE: i32 = 64;
/// Exit code for I/O failures on output files.
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(
    name = "rcs-lab",
    version,
    about = "Random circuit sampling laboratory"
)]
pub struct Cli {
    /// Global seed; each command derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a circuit file.
    Generate(GenerateArgs),
    /// Draw (noisy) samples of a circuit.
    Sample(SampleArgs),
    /// Linear XEB of a sample file against a circuit.
    Xeb(XebArgs),
    /// XEB and fidelity decay over depth, as CSV.
    Sweep(SweepArgs),
    /// Bipartition spoofer: exact XEB and fidelity, optional samples.
    Spoof(SpoofArgs),
    /// Loschmidt echo of a circuit.
    Echo(EchoArgs),
    /// Extrapolate ln F in n·d from sweep CSVs.
    Extrapolate(ExtrapolateArgs),
    /// Sample-based fidelity checks and planted-secret verification.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Run a prover that answers challenges on an endpoint.
    Serve(ServeArgs),
    /// Challenge a prover once and print the verdict.
    Challenge(ChallengeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenerateKind {
    Grid,
    RrGraph,
    Iqp,
    Graph,
    Planted,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub kind: GenerateKind,
    /// Register size (rr-graph, iqp, graph, planted).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Cycles (grid) or layers (rr-graph).
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    /// IQP phase gates as `θ:bits`, e.g. `pi/4:1011`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gates: Vec<String>,
    /// CNOT layer placed after phase gate i (repeatable), e.g. `0-1,2-3`.
    #[arg(long)]
    pub cnots: Vec<String>,
    /// Random IQP gate count when `--gates` is absent.
    #[arg(long)]
    pub n_gates: Option<usize>,
    /// Graph edges, e.g. `0-1,1-2`; a ring by default.
    #[arg(long)]
    pub edges: Option<String>,
    /// Per-vertex Z rotation angles; random by default.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub angles: Vec<String>,
    /// Planted secret as a bitstring; random by default.
    #[arg(long)]
    pub secret: Option<String>,
    /// Key file for `planted`.
    #[arg(long)]
    pub key: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub circuit: PathBuf,
    #[arg(long)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 100)]
    pub traj: usize,
    /// Readout flip probability.
    #[arg(long)]
    pub readout: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct XebArgs {
    pub circuit: PathBuf,
    pub samples: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SweepEnsemble {
    Grid,
    RrGraph,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EngineArg {
    Trajectories,
    Exact,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "grid")]
    pub ensemble: SweepEnsemble,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    /// Cycle counts, e.g. `2,4,6,8`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub depth: Vec<usize>,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 10)]
    pub circuits: usize,
    #[arg(long, default_value_t = 200)]
    pub traj: usize,
    /// Finite samples per trajectory instead of exact per-trajectory XEB.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub echo: bool,
    #[arg(long, value_enum, default_value = "trajectories")]
    pub engine: EngineArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpoofArgs {
    pub circuit: PathBuf,
    /// Block A is qubits 0..cut; half the register by default.
    #[arg(long)]
    pub cut: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EchoArgs {
    pub circuit: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 500)]
    pub traj: usize,
    /// Evolve the density matrix instead of sampling trajectories.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct ExtrapolateArgs {
    /// Sweep CSV files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// n·d at which to predict.
    #[arg(long)]
    pub target: f64,
    #[arg(long, default_value = "fidelity")]
    pub quantity: String,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Fidelity from Bell-sampling purity.
    Bell(BellArgs),
    /// Fidelity of a rotated graph state from its symmetries.
    Graph(GraphArgs),
    /// Check samples against a planted-secret key.
    Planted(PlantedArgs),
}

#[derive(Debug, Args)]
pub struct BellArgs {
    pub circuit: PathBuf,
    /// Existing Bell sample file; drawn afresh when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 10)]
    pub shots_per_pair: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub edges: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub angles: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Stabilizers drawn (or trajectories per generator).
    #[arg(long, default_value_t = 2000)]
    pub circuits: usize,
    /// Shots per stabilizer.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Lower bound from the n generators only.
    #[arg(long)]
    pub generators: bool,
}

#[derive(Debug, Args)]
pub struct PlantedArgs {
    pub samples: PathBuf,
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Honest,
    Spoofer,
    Uniform,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub endpoint: String,
    #[arg(long, value_enum, default_value = "honest")]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 100)]
    pub traj: usize,
    /// Stop after this many sessions.
    #[arg(long)]
    pub sessions: Option<usize>,
    /// Seconds to wait for the verifier.
    #[arg(long, default_value_t = 60)]
    pub timeout: u64,
}

#[derive(Debug, Args)]
pub struct ChallengeArgs {
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub endpoint: String,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub circuits: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Seconds to wait for the prover.
    #[arg(long, default_value_t = 60)]
    pub timeout: u64,
    /// Save the keys of this session (never sent to the prover).
    #[arg(long)]
    pub keys: Option<PathBuf>,
}

/// Process exit code for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::Protocol { code, .. }) => code.exit_code(),
        Some(Error::Io(_)) => EXIT_IO,
        Some(_) => EXIT_USAGE,
        None if err.downcast_ref::<std::io::Error>().is_some() => EXIT_IO,
        None => EXIT_USAGE,
    }
}

pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
