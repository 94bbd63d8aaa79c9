//! `nldr`: sample manifolds, build bias operators, embed, and run the
//! diagnostic experiments.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O error.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Figure, Run};
use config::Config;

#[derive(Parser)]
#[command(name = "nldr", version, about = "Local spectral dimensionality reduction as bias operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a manifold; writes cloud.csv and cloud.json.
    Generate(Common),
    /// Build an operator; writes coo.csv and meta.json.
    Operator(Common),
    /// Embed with the bottom eigenvectors; writes embedding.csv and embedding.json.
    Embed(Common),
    /// Run one diagnostic (--check); writes report.json.
    Diagnose(Common),
    /// Regenerate a figure or table with its pinned defaults.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(clap::Args)]
struct Common {
    /// JSON config; flags override its keys.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    #[command(flatten)]
    flags: Config,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Core(nldr::Error),
}

impl From<nldr::Error> for CliError {
    fn from(e: nldr::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 3,
            CliError::Core(e) => match e.kind() {
                nldr::ErrorKind::Validation => 1,
                nldr::ErrorKind::Numerical => 2,
                nldr::ErrorKind::Io => 3,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(s) | CliError::Io(s) => f.write_str(s),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn resolve(common: &Common) -> Result<Config, CliError> {
    let base = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    Ok(base.merged(&common.flags))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (name, common) = match &cli.command {
        Command::Generate(c) => ("generate", c),
        Command::Operator(c) => ("operator", c),
        Command::Embed(c) => ("embed", c),
        Command::Diagnose(c) => ("diagnose", c),
        Command::Reproduce { common, .. } => ("reproduce", common),
    };
    let cfg = resolve(common)?;
    let tag = match &cli.command {
        Command::Reproduce { figure, .. } => format!("{name} {figure:?}"),
        _ => name.to_string(),
    };
    let run = Run::new(&tag, cfg)?;
    match cli.command {
        Command::Generate(_) => commands::generate(&run),
        Command::Operator(_) => commands::operator(&run),
        Command::Embed(_) => commands::embed_cmd(&run),
        Command::Diagnose(_) => commands::diagnose(&run),
        Command::Reproduce { figure, .. } => commands::reproduce(&run, figure),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
