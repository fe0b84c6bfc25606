//! Argument parsing and dispatch for the `pinch` binary.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands;
use crate::error::{SimError, SimResult};
use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "pinch", version, about = "Pinching-antenna placement search, learning agents and edge-AI co-simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Root seed; every random stream of the run derives from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for CSVs, checkpoints and the run manifest.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Preset scenario a..f, drawn from --seed.
    #[arg(long)]
    pub scenario: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Brute,
    Grid,
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    SumRate,
    MinRate,
    EnergyEfficiency,
    Penalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AgentArg {
    /// Pick the learner the scenario was built for.
    Auto,
    Supervised,
    Dqn,
    Madqn,
    Ddpg,
    Maddpg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    NoPa,
    FixedPa,
    OptimizedPa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Static,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrackingArg {
    None,
    Grid,
    Ddpg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file and list every violated invariant.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Per-user rates for one activation state.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// One coordinate per waveguide, comma separated; defaults to the
        /// scenario's own state or the midpoints.
        #[arg(long, value_delimiter = ',')]
        coords: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Place antennas by exhaustive, coordinate or alternating search.
    Optimize {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = Method::Grid)]
        method: Method,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::SumRate)]
        objective: ObjectiveArg,
        /// QoS penalty weight for the penalized objective.
        #[arg(long, default_value_t = 10.0)]
        mu: f64,
        #[arg(long, default_value_t = 3)]
        passes: usize,
        /// Largest exhaustive search allowed.
        #[arg(long, default_value_t = 1e8)]
        budget: f64,
        #[arg(long, default_value_t = 1)]
        pas_per_waveguide: usize,
        #[arg(long, default_value_t = 8)]
        power_levels: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Train a learner on a preset scenario.
    Train {
        #[arg(long)]
        scenario: String,
        /// Agent configuration JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = AgentArg::Auto)]
        agent: AgentArg,
        #[arg(long, default_value_t = 300)]
        episodes: usize,
        /// Labelled training instances for the supervised positioner.
        #[arg(long, default_value_t = 2000)]
        instances: usize,
        /// Held-out instances for the supervised positioner.
        #[arg(long, default_value_t = 500)]
        test_instances: usize,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Search complexity table: evaluation counts and time at a fixed cost
    /// per evaluation.
    Benchmark {
        /// Cost of one objective evaluation, milliseconds.
        #[arg(long, default_value_t = 1.0)]
        tau_ms: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Federated learning with straggler rescue.
    Fl {
        /// FL options JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Device layout JSON (defaults to the built-in hall).
        #[arg(long)]
        layout: Option<PathBuf>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SchemeArg::NoPa, SchemeArg::FixedPa, SchemeArg::OptimizedPa])]
        schemes: Vec<SchemeArg>,
        /// Independent runs with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        replicates: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Over-the-air aggregation error with and without antennas.
    Aircomp {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        layout: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Antenna placement under moving demand hotspots.
    Hotspot {
        /// Traffic map JSON (`{"demands": [[...], ...]}`).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        layout: Option<PathBuf>,
        /// Slots of the built-in moving hotspot.
        #[arg(long, default_value_t = 8)]
        slots: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [PolicyArg::Static, PolicyArg::Adaptive])]
        policies: Vec<PolicyArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Handover, outage and staleness of a walking device.
    Mobility {
        /// Tracking options JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        layout: Option<PathBuf>,
        /// Agent configuration JSON for the learned tracker.
        #[arg(long)]
        agent_config: Option<PathBuf>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [TrackingArg::None, TrackingArg::Grid])]
        tracking: Vec<TrackingArg>,
        /// Training episodes for the learned tracker.
        #[arg(long, default_value_t = 200)]
        episodes: usize,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Simulate { .. } => "simulate",
            Command::Optimize { .. } => "optimize",
            Command::Train { .. } => "train",
            Command::Benchmark { .. } => "benchmark",
            Command::Fl { .. } => "fl",
            Command::Aircomp { .. } => "aircomp",
            Command::Hotspot { .. } => "hotspot",
            Command::Mobility { .. } => "mobility",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Validate { common, .. }
            | Command::Simulate { common, .. }
            | Command::Optimize { common, .. }
            | Command::Train { common, .. }
            | Command::Benchmark { common, .. }
            | Command::Fl { common, .. }
            | Command::Aircomp { common, .. }
            | Command::Hotspot { common, .. }
            | Command::Mobility { common, .. } => common,
        }
    }

    fn config_path(&self) -> Option<&PathBuf> {
        match self {
            Command::Validate { scenario, .. } | Command::Simulate { scenario, .. } | Command::Optimize { scenario, .. } => {
                scenario.config.as_ref()
            }
            Command::Train { config, .. }
            | Command::Fl { config, .. }
            | Command::Aircomp { config, .. }
            | Command::Hotspot { config, .. }
            | Command::Mobility { config, .. } => config.as_ref(),
            Command::Benchmark { .. } => None,
        }
    }
}

/// Parses `args`, runs the command inside a manifest and maps the outcome to
/// an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli.command, args.iter().map(|a| a.to_string_lossy().into_owned()).collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn execute(command: &Command, args: Vec<String>) -> SimResult<()> {
    let common = command.common();
    let manifest = RunManifest::begin(command.name(), args, command.config_path().map(|p| p.as_path()), common.seed, &common.out)?;
    let outcome = commands::dispatch(command);
    manifest.finish(&outcome)?;
    outcome.map(|_| ())
}

impl From<SchemeArg> for pinch_core::edgeai::Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::NoPa => Self::NoPa,
            SchemeArg::FixedPa => Self::FixedPa,
            SchemeArg::OptimizedPa => Self::OptimizedPa,
        }
    }
}

impl From<PolicyArg> for pinch_core::edgeai::HotspotPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Static => Self::Static,
            PolicyArg::Adaptive => Self::Adaptive,
        }
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> SimError {
    SimError::Usage(msg.into())
}
