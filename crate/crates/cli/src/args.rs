use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use meander_sojourn::fkpde::DriftScheme;
use meander_sojourn::{CampaignLaw, LawKind, ProcessParams, SimConfig};
use serde::{Deserialize, Serialize};

/// Sojourn-time laws of drifted Brownian meanders and excursions.
#[derive(Debug, Parser)]
#[command(name = "meander-sojourn", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Tabulate the density and CDF of a law.
    Eval(EvalArgs),
    /// Simulate occupation times and dump them.
    Sample(SampleArgs),
    /// Test simulated occupation times against a law.
    Validate(ValidateArgs),
    /// Compare the Feynman–Kac solver with the Laplace transform of the law.
    FkCheck(FkArgs),
    /// Export families of curves in long format.
    Sweep(SweepArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Sample(_) => "sample",
            Command::Validate(_) => "validate",
            Command::FkCheck(_) => "fk-check",
            Command::Sweep(_) => "sweep",
            Command::Replay(_) => "replay",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Sample(a) => Some(a.sim.seed),
            Command::Validate(a) => Some(a.sim.seed),
            _ => None,
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            Command::Eval(a) => a.out.out = Some(out),
            Command::Sample(a) => a.out.out = Some(out),
            Command::Validate(a) => a.out = Some(out),
            Command::FkCheck(a) => a.out = Some(out),
            Command::Sweep(a) => a.out.out = Some(out),
            Command::Replay(_) => {}
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Args, Serialize, Deserialize)]
pub struct ProcessArgs {
    /// Drift μ.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    /// Horizon t.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Start of the observation window.
    #[arg(long, default_value_t = 0.0)]
    pub l: f64,
    /// Starting point of the meander, excursion or bridge.
    #[arg(long, default_value_t = 0.0)]
    pub u: f64,
    /// Starting point of the free motion.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
}

impl ProcessArgs {
    pub fn params(&self) -> ProcessParams {
        ProcessParams { mu: self.mu, t: self.t, l: self.l, u: self.u, x: self.x }
    }
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct OutArgs {
    /// Output file. A `.manifest.json` sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, Args, Serialize, Deserialize)]
pub struct SimArgs {
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 4096)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent random streams; capped by MEANDER_SOJOURN_THREADS.
    #[arg(long, default_value_t = 8)]
    pub streams: usize,
}

impl SimArgs {
    /// Applies the stream cap from the environment.
    pub fn capped(mut self) -> Self {
        let cap = std::env::var("MEANDER_SOJOURN_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
        if let Some(cap) = cap.filter(|&c| c > 0) {
            self.streams = self.streams.min(cap);
        }
        self
    }

    pub fn config(&self) -> SimConfig {
        SimConfig { n_paths: self.paths, n_steps: self.steps, seed: self.seed, streams: self.streams }
    }
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub law: LawKind,
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    /// Number of grid points over the support, endpoints included.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub law: CampaignLaw,
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    /// Reference law.
    #[arg(long)]
    pub law: LawKind,
    /// Path sampler; defaults to the one matching the reference law.
    #[arg(long)]
    pub sampler: Option<CampaignLaw>,
    /// Validate a `gamma,atom_event` dump instead of simulating.
    #[arg(long, conflicts_with = "sampler")]
    pub samples: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    /// Report file; the report is printed to stdout either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct FkArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = Drift::Upwind)]
    pub drift: Drift,
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    /// Also write the final slice `x,w` to this CSV.
    #[arg(long)]
    pub slice: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Drift {
    Upwind,
    Central,
}

impl From<Drift> for DriftScheme {
    fn from(d: Drift) -> Self {
        match d {
            Drift::Upwind => DriftScheme::Upwind,
            Drift::Central => DriftScheme::Central,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// CDF of Γ/t for the excursion over growing horizons, with the gap to uniform.
    Asymptotic,
    /// Excursion density and CDF over window ratios l/t.
    Excursion,
    /// Limit-meander density, CDF and atom over window ratios l/t.
    Meander,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Horizon for the ratio families.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Window start for the asymptotic family.
    #[arg(long, default_value_t = 1.0)]
    pub l: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 0.75])]
    pub ratios: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [10.0, 100.0, 1000.0])]
    pub horizons: Vec<f64>,
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Clone, Debug, Args)]
pub struct ReplayArgs {
    /// Manifest sidecar or JSON report.
    pub manifest: PathBuf,
    /// Write the reproduced output here instead of the recorded path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
