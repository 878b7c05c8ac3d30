use std::path::PathBuf;

use clap::{Args, Parser};

use crate::cli::config::{BellMethod, ConserveMode, OutputFormat, Parameters, Subcommand};
use crate::evolution::Branch;

#[derive(Debug, Parser)]
#[command(name = "ontic", version, about = "Experiments on finite deterministic universes")]
pub struct Cli {
    /// JSON experiment config; flags given here override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub out: Option<OutputFormat>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Orbit of a basis state under the N-state cogwheel.
    Cogwheel(CogwheelArgs),
    /// Eigenphases and emergent Hamiltonian of a permutation universe.
    Spectrum(SpectrumArgs),
    /// Seeded conservation trials over random permutations.
    Conserve(ConserveArgs),
    /// Whether a set of observables commutes at all times.
    Beables(BeablesArgs),
    /// Commutator map of site probes on the bit-shift ring.
    Lightcone(LightconeArgs),
    /// CHSH experiment under the mousedrop density; angles in degrees.
    Bell(BellArgs),
}

#[derive(Debug, Args)]
pub struct CogwheelArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Defaults to n.
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub start: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Cogwheel size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Universe description file, instead of n.
    #[arg(long)]
    pub universe: Option<PathBuf>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// zero2pi or minuspi2pi.
    #[arg(long)]
    pub branch: Option<Branch>,
}

#[derive(Debug, Args)]
pub struct ConserveArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ConserveMode>,
    /// Deviation tolerance; detection threshold in control mode.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BeablesArgs {
    /// Bit-shift ring with this many sites.
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub universe: Option<PathBuf>,
    /// `diagonal`, or a comma-separated probe list such as `X@0,Z@0`.
    #[arg(long)]
    pub ops: Option<String>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LightconeArgs {
    #[arg(long)]
    pub l: Option<usize>,
    /// Defaults to l.
    #[arg(long)]
    pub tmax: Option<i64>,
    /// Probe kind pairs such as `XZ,ZZ`.
    #[arg(long)]
    pub probes: Option<String>,
}

#[derive(Debug, Args)]
pub struct BellArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub aprime: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub bprime: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<BellMethod>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub grid: Option<usize>,
}

impl Command {
    pub fn subcommand(&self) -> Subcommand {
        match self {
            Command::Cogwheel(_) => Subcommand::Cogwheel,
            Command::Spectrum(_) => Subcommand::Spectrum,
            Command::Conserve(_) => Subcommand::Conserve,
            Command::Beables(_) => Subcommand::Beables,
            Command::Lightcone(_) => Subcommand::Lightcone,
            Command::Bell(_) => Subcommand::Bell,
        }
    }

    pub fn parameters(&self) -> Parameters {
        let mut p = Parameters::default();
        match self {
            Command::Cogwheel(a) => {
                p.n = a.n;
                p.steps = a.steps;
                p.start = a.start;
            }
            Command::Spectrum(a) => {
                p.n = a.n;
                p.universe = a.universe.clone();
                p.dt = a.dt;
                p.branch = a.branch;
            }
            Command::Conserve(a) => {
                p.dim = a.dim;
                p.steps = a.steps;
                p.trials = a.trials;
                p.mode = a.mode;
                p.tol = a.tol;
            }
            Command::Beables(a) => {
                p.l = a.l;
                p.universe = a.universe.clone();
                p.ops = a.ops.clone();
                p.horizon = a.horizon;
                p.tol = a.tol;
            }
            Command::Lightcone(a) => {
                p.l = a.l;
                p.tmax = a.tmax;
                p.probes = a.probes.clone();
            }
            Command::Bell(a) => {
                p.a = a.a;
                p.b = a.b;
                p.aprime = a.aprime;
                p.bprime = a.bprime;
                p.method = a.method;
                p.samples = a.samples;
                p.grid = a.grid;
            }
        }
        p
    }
}
