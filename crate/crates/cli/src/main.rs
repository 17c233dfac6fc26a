//! `tomokit` command-line front end.
//!
//! Every run is driven by a JSON manifest; flags override single fields.

mod commands;
mod error;
mod manifest;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult, Context};
use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "tomokit", version, about = "Symplectic tomography toolkit")]
struct Cli {
    /// JSON run manifest.
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,

    /// Output path, overriding the manifest.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Machine-readable output on stdout and stderr.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads.
    #[arg(long, global = true, env = "TOMOKIT_THREADS", value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Sample a phase-space state onto a grid.
    GenState,
    /// Forward tomogram of a field.
    Tomo,
    /// Filtered back-projection of a tomogram.
    Invert,
    /// Time evolution with checkpoints.
    Evolve,
    /// Completeness entropy of a frame distribution.
    Entropy,
    /// Partial-scaling separability test.
    Separability,
    /// Render a field or tomogram to PNG.
    Plot,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::GenState => "gen-state",
            Command::Tomo => "tomo",
            Command::Invert => "invert",
            Command::Evolve => "evolve",
            Command::Entropy => "entropy",
            Command::Separability => "separability",
            Command::Plot => "plot",
        }
    }
}

fn load_manifest(cli: &Cli) -> CliResult<RunManifest> {
    let path = cli
        .manifest
        .as_ref()
        .ok_or_else(|| CliError::Validation("--manifest is required".into()))?;
    let text = std::fs::read_to_string(path).ctx(&format!("reading {}", path.display()))?;
    let mut manifest = RunManifest::from_json(&text)?;
    if manifest.command() != cli.command.name() {
        return Err(CliError::Validation(format!(
            "manifest is for `{}`, not `{}`",
            manifest.command(),
            cli.command.name()
        )));
    }
    if let Some(out) = &cli.out {
        manifest.set_output(out.clone());
    }
    Ok(manifest)
}

fn check_paths(manifest: &RunManifest) -> CliResult<()> {
    if manifest.requires_output() && manifest.output().is_none() {
        return Err(CliError::Validation("an output path is required (manifest `output` or --out)".into()));
    }
    for input in manifest.inputs() {
        if !input.is_file() {
            return Err(CliError::Io(format!("input {} not found", input.display())));
        }
    }
    if let Some(out) = manifest.output() {
        let parent = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(CliError::Io(format!("output directory {} does not exist", parent.display())));
        }
    }
    Ok(())
}

fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    match threads {
        None => Ok(()),
        Some(0) => Err(CliError::Validation("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}"))),
    }
}

fn execute(cli: &Cli) -> CliResult<commands::Outcome> {
    let manifest = load_manifest(cli)?;
    manifest.validate()?;
    check_paths(&manifest)?;
    configure_threads(cli.threads)?;
    log::info!("running {}", manifest.command());
    commands::run(&manifest)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(&cli) {
        Ok(outcome) => {
            if cli.json {
                println!("{}", outcome.summary);
            } else {
                println!("{}", outcome.text);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if cli.json {
                let report = serde_json::to_string(&e.report(Some(cli.command.name()))).expect("report serializes");
                eprintln!("{report}");
            } else {
                eprintln!("error[{}]: {e}", e.kind());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
