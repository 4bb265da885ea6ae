//! Command-line front end: experiment configs in, JSON and CSV reports out.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod reference;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use iforge_core::Species;

use commands::table2::{Format, Table2Args};
use commands::verify::{Fault, Sizes};
use commands::CommandOutput;
use config::ExperimentConfig;
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "iforge", version, about = "Post-selected multi-particle scattering experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed for every random draw; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; defaults to the config's `output_path`, then stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_species)]
    pub species: Option<Species>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate an input through a setup and analyse the post-selected state.
    Simulate,
    /// Sweep the four-photon family and compare with its closed form.
    Family,
    /// Entanglement swapping of three pairs into a three-photon GHZ state.
    GhzSwap,
    /// Rank of the coefficient map over a grid of (d, N).
    Table2(Table2Cli),
    /// Run the cross-module property suites.
    Verify(VerifyCli),
}

#[derive(Debug, Args)]
pub struct Table2Cli {
    /// Internal dimensions: `3`, `2,4` or `2..5`.
    #[arg(long, value_parser = parse_list)]
    pub d: Option<IndexList>,
    /// Particle numbers, same syntax as `--d`.
    #[arg(long = "N", value_parser = parse_list)]
    pub particles: Option<IndexList>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Fill the `seconds` column (makes output non-deterministic).
    #[arg(long)]
    pub timings: bool,
    /// Cells whose Jacobian has more entries are skipped.
    #[arg(long, default_value_t = 4_000_000)]
    pub max_entries: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct VerifyCli {
    #[arg(long, value_enum, default_value_t = SizesArg::Small)]
    pub sizes: SizesArg,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<FaultArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SizesArg {
    Small,
    Large,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    DetSign,
}

fn parse_species(s: &str) -> Result<Species, String> {
    s.parse().map_err(|e: iforge_core::Error| e.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexList(pub Vec<usize>);

/// `a`, `a,b,c` or the inclusive range `a..b`.
pub fn parse_list(s: &str) -> Result<IndexList, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range {s}"));
        }
        return Ok(IndexList((a..=b).collect()));
    }
    s.split(',').map(num).collect::<Result<_, _>>().map(IndexList)
}

/// Loaded configuration plus the settings resolved from flags and config.
pub struct Resolved {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub fn resolve(global: &GlobalArgs) -> CliResult<Resolved> {
    let config = match &global.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    Ok(Resolved {
        seed: global.seed.or(config.seed).unwrap_or(0),
        out: global.out.clone().or_else(|| config.output_path.clone()),
        config,
    })
}

pub fn run(cli: &Cli, resolved: &Resolved) -> CliResult<CommandOutput> {
    let config = &resolved.config;
    let species = cli.global.species.or(config.species);
    match &cli.command {
        Command::Simulate => {
            if cli.global.config.is_none() {
                return Err(CliError::Config("simulate needs --config".into()));
            }
            commands::simulate::run(config, species.unwrap_or(Species::Boson))
        }
        Command::Family => commands::family::run(config, species.unwrap_or(Species::Boson)),
        Command::GhzSwap => commands::ghz_swap::run(config, species.unwrap_or(Species::Boson)),
        Command::Table2(t) => {
            let args = Table2Args {
                species: species.map_or_else(|| vec![Species::Boson, Species::Fermion], |s| vec![s]),
                d: t.d.clone().map(|l| l.0),
                particles: t.particles.clone().map(|l| l.0),
                trials: t.trials,
                seed: resolved.seed,
                max_jacobian_entries: t.max_entries,
                timings: t.timings,
                format: match t.format {
                    FormatArg::Csv => Format::Csv,
                    FormatArg::Json => Format::Json,
                },
            };
            if args.trials == 0 {
                return Err(CliError::Config("--trials must be positive".into()));
            }
            commands::table2::run(&args)
        }
        Command::Verify(v) => {
            let sizes = match v.sizes {
                SizesArg::Small => Sizes::Small,
                SizesArg::Large => Sizes::Large,
            };
            let fault = v.inject_fault.map(|FaultArg::DetSign| Fault::DetSign);
            commands::verify::run(sizes, resolved.seed, fault)
        }
    }
}
