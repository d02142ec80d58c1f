use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use supertime::config::parse_config;
use supertime::run::{self, RunOptions, Subcommand};
use supertime::{Error, Result};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Bound,
    Echo,
    Causality,
    Radiation,
    Vacuum,
    Interference,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Bound => Subcommand::Bound,
            Command::Echo => Subcommand::Echo,
            Command::Causality => Subcommand::Causality,
            Command::Radiation => Subcommand::Radiation,
            Command::Vacuum => Subcommand::Vacuum,
            Command::Interference => Subcommand::Interference,
        }
    }
}

/// Minimum discrimination times for superposed gravitating and charged bodies.
#[derive(Debug, Parser)]
#[command(name = "supertime", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; metadata goes to `<output>.meta.json`. Stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Cross-check closed forms against the numerical propagator.
    #[arg(long)]
    oracle: bool,
}

fn meta_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn execute(cli: Cli) -> Result<u8> {
    let text = fs::read_to_string(&cli.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut cfg = parse_config(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", cli.config.display())),
        other => other,
    })?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let opts = RunOptions {
        oracle: cli.oracle,
        base_dir: cli.config.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let sub = Subcommand::from(cli.command);
    let out = run::run(sub, &cfg, &opts)?;
    let csv = out.to_csv()?;
    let meta = serde_json::to_string_pretty(&run::metadata(sub, &cfg, &opts, &out)?)?;
    match cli.output.or_else(|| cfg.output.clone()) {
        Some(path) => {
            fs::write(&path, csv)?;
            fs::write(meta_path(&path), meta + "\n")?;
        }
        None => {
            std::io::stdout().write_all(csv.as_bytes())?;
            eprintln!("{meta}");
        }
    }
    for f in &out.failures {
        eprintln!("supertime: {f}");
    }
    Ok(out.exit_code)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("supertime: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
