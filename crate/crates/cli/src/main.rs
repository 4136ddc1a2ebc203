use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dutycycle::coverage::Objective;

mod commands;
mod experiments;
mod instance;
mod output;

/// Activation scheduling for battery-bounded monitoring devices.
#[derive(Parser, Debug)]
#[command(name = "dutycycle", version, about)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the bipartite device/target coverage graph of an instance.
    BuildCoverage(commands::CoverageArgs),
    /// Label every device with its active slots.
    Schedule(commands::ScheduleArgs),
    /// Choose device locations among candidate sites and schedule them.
    PlaceAndSchedule(commands::PlaceArgs),
    /// Complete-coverage lifetime through dominating sets.
    Lifetime(experiments::LifetimeArgs),
    /// Random scheduling on random graphs against the closed form.
    RandExperiment(experiments::RandArgs),
    /// Run the randomized self-check suites.
    Verify(experiments::VerifyArgs),
    /// Convert a whitespace-separated edge list into an instance file.
    ImportEdgelist(experiments::ImportArgs),
    /// Generate a random network as an instance file.
    Generate(experiments::GenerateArgs),
}

/// Instance-level settings that override the file.
#[derive(Args, Debug, Clone, Default)]
pub struct InstanceFlags {
    /// Number of time slots.
    #[arg(long)]
    pub k: Option<usize>,
    /// Slots each device may be active in.
    #[arg(long)]
    pub sigma: Option<usize>,
    /// Sensing range in hops.
    #[arg(long)]
    pub lambda: Option<usize>,
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ObjectiveArg {
    Detection,
    Isolation,
}

impl InstanceFlags {
    pub fn overrides(&self) -> instance::Overrides {
        instance::Overrides {
            k: self.k,
            sigma: self.sigma,
            lambda: self.lambda,
            objective: self.objective.map(|o| match o {
                ObjectiveArg::Detection => Objective::Detection,
                ObjectiveArg::Isolation => Objective::Isolation,
            }),
        }
    }
}

/// Where a command writes its main output.
#[derive(Args, Debug, Clone, Default)]
pub struct OutFlag {
    /// Output file (default: standard output).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Verification(String),
    Refusal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Verification(_) => 2,
            Failure::Refusal(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "error: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::Refusal(m) => write!(f, "refused: {m}"),
        }
    }
}

impl From<dutycycle::Error> for Failure {
    fn from(e: dutycycle::Error) -> Self {
        if e.is_refusal() {
            Failure::Refusal(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Input(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::BuildCoverage(a) => commands::build_coverage(&a),
        Command::Schedule(a) => commands::schedule(&a),
        Command::PlaceAndSchedule(a) => commands::place_and_schedule(&a),
        Command::Lifetime(a) => experiments::lifetime(&a),
        Command::RandExperiment(a) => experiments::rand_experiment(&a),
        Command::Verify(a) => experiments::verify(&a),
        Command::ImportEdgelist(a) => experiments::import_edgelist(&a),
        Command::Generate(a) => experiments::generate(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{failure}");
            ExitCode::from(failure.code())
        }
    }
}
