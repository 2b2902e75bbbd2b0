//! `eventsampling`: compute sampling policies, simulate them, and emit comparison tables.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eventsampling_core::{SamplingError, SimConfig};

use config::FileConfig;
use output::{Format, Output};

/// Bad input from the user: exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "eventsampling", version, about = "Finite-horizon sampling policies for Brownian and OU signals")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
pub struct Global {
    /// Base seed for all random streams
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo paths
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Simulation time step
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Use antithetic path pairs
    #[arg(long, global = true)]
    antithetic: bool,
    /// Directory for output files
    #[arg(long, global = true, default_value = "results")]
    out_dir: PathBuf,
    /// Format of tabular outputs
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// TOML file with defaults for simulation, series, optimizer and grid settings
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Process {
    Bm,
    Ou,
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Process::Bm => "bm",
            Process::Ou => "ou",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Tabulated,
    Exact,
}

#[derive(Subcommand)]
enum Command {
    /// Multiple Delta sampling coefficients with series and Monte Carlo sample counts
    Table1(commands::table1::Table1Args),
    /// Deterministic, Delta and optimal distortions for budgets 1..N
    Compare(commands::compare::CompareArgs),
    /// Compute one policy and write it as JSON
    Policy(commands::policy::PolicyArgs),
    /// Simulate a policy file
    Simulate(commands::simulate::SimulateArgs),
    /// Jump-triggered versus periodic sampling of a Poisson counter
    PoissonDemo(commands::poisson::PoissonArgs),
    /// Series against Monte Carlo for exit-time statistics of Brownian motion
    HittingStats(commands::hitting::HittingArgs),
}

pub struct Context {
    pub file: FileConfig,
    pub sim: SimConfig,
    pub out: Output,
}

impl Context {
    fn new(g: &Global) -> anyhow::Result<Self> {
        let file = FileConfig::load(g.config.as_deref())?;
        let sim = file.sim(g.seed, g.paths, g.dt, g.antithetic);
        let mut out = Output::new(&g.out_dir, g.format)?;
        out.param("seed", sim.seed);
        out.param("paths", sim.n_paths);
        out.param("dt", sim.dt);
        out.param("antithetic", sim.antithetic);
        if let Some(c) = &g.config {
            out.param("config", c.display());
        }
        Ok(Self { file, sim, out })
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut ctx = Context::new(&cli.global)?;
    let name = match &cli.command {
        Command::Table1(a) => commands::table1::run(a, &mut ctx)?,
        Command::Compare(a) => commands::compare::run(a, &mut ctx)?,
        Command::Policy(a) => commands::policy::run(a, &mut ctx)?,
        Command::Simulate(a) => commands::simulate::run(a, &mut ctx)?,
        Command::PoissonDemo(a) => commands::poisson::run(a, &mut ctx)?,
        Command::HittingStats(a) => commands::hitting::run(a, &mut ctx)?,
    };
    let seed = ctx.sim.seed;
    let manifest = ctx.out.finish(name, seed)?;
    println!("manifest: {}", manifest.display());
    Ok(())
}

fn exit_status(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<SamplingError>() {
            return match e {
                SamplingError::InvalidArgument(_)
                | SamplingError::InvalidPolicy(_)
                | SamplingError::IncompatiblePolicy { .. } => 2,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
