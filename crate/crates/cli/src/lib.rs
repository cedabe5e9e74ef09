//! `optocool` command-line driver: configuration parsing, subcommand
//! dispatch and result serialization.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use optocool_core::FigureId;

pub use config::{parse_config, RunConfig};
pub use error::CliError;

use config::Format;
use output::Meta;

#[derive(Debug, Parser)]
#[command(name = "optocool", version, about = "Sideband cooling and hybrid-mode squeezing of an optomechanical resonator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Report steady states of unstable systems instead of refusing them.
    #[arg(long, global = true)]
    pub allow_unstable: bool,
    /// Override the mechanical bath occupation.
    #[arg(long, global = true)]
    pub n_bar: Option<f64>,
    /// Squeezing tolerance in normalized variance units.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Steady state at one parameter point.
    Steady,
    /// Parameter grid from `[command.sweep]`.
    Sweep,
    /// Time evolution of the moments from `[command.evolve]`.
    Evolve,
    /// Dataset behind one of the standard figures.
    Figure {
        #[arg(value_parser = parse_figure)]
        id: FigureId,
    },
    /// Oracle and invariant self-checks.
    Check,
}

fn parse_figure(s: &str) -> Result<FigureId, String> {
    s.parse::<FigureId>().map_err(|e| e.to_string())
}

impl Command {
    fn label(&self) -> String {
        match self {
            Command::Steady => "steady".into(),
            Command::Sweep => "sweep".into(),
            Command::Evolve => "evolve".into(),
            Command::Figure { id } => format!("figure {}", id.name()),
            Command::Check => "check".into(),
        }
    }

    fn needs_config(&self) -> bool {
        matches!(self, Command::Steady | Command::Sweep | Command::Evolve)
    }
}

/// Loads the configuration and applies command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigIo {
                path: path.display().to_string(),
                source,
            })?;
            parse_config(&text)?
        }
        None if cli.command.needs_config() => {
            return Err(CliError::Schema {
                path: "--config".into(),
                reason: format!("`{}` requires a configuration file", cli.command.label()),
            })
        }
        None => RunConfig::default_point(),
    };
    if let Some(n) = cli.n_bar {
        cfg.set_n_bar(n)?;
    }
    if let Some(tol) = cli.tol {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(CliError::range("--tol", format!("{tol} must be >= 0")));
        }
        cfg.command.tol = tol;
    }
    if cli.allow_unstable {
        cfg.command.allow_unstable = true;
    }
    if let Some(path) = &cli.out {
        cfg.output.path = Some(path.display().to_string());
    }
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    Ok(cfg)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("OPTOCOOL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::range("OPTOCOOL_THREADS", format!("`{raw}` is not a positive integer")))?;
    // A second initialization in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Executes one parsed invocation.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = resolve_config(cli)?;
    let (artifact, summary) = match &cli.command {
        Command::Steady => (commands::steady(&cfg)?, None),
        Command::Sweep => (commands::sweep(&cfg)?, None),
        Command::Evolve => (commands::evolve(&cfg)?, None),
        Command::Figure { id } => (commands::figure(&cfg, *id)?, None),
        Command::Check => {
            let results = commands::self_check(&cfg)?;
            let lines: Vec<String> = results
                .iter()
                .map(|r| {
                    format!(
                        "{} {:<28} value {:.3e}  bound {:.1e}  {}",
                        if r.pass { "PASS" } else { "FAIL" },
                        r.name,
                        r.value,
                        r.bound,
                        r.note
                    )
                })
                .collect();
            let failed = results.iter().filter(|r| !r.pass).count();
            (
                commands::Artifact {
                    table: commands::check_table(&results),
                    extra: Default::default(),
                },
                Some((lines, failed)),
            )
        }
    };
    let meta = Meta {
        schema_version: output::SCHEMA_VERSION,
        command: cli.command.label(),
        git_describe: output::GIT_DESCRIBE.to_string(),
        config: cfg.clone(),
        extra: artifact.extra,
    };
    let text = output::render(&artifact.table, &meta, cfg.output.format);
    match (&cfg.output.path, &summary) {
        (Some(path), _) => output::write_output(path.as_ref(), &text)?,
        (None, None) => print!("{text}"),
        (None, Some(_)) => {}
    }
    if let Some((lines, failed)) = summary {
        for l in lines {
            println!("{l}");
        }
        if failed > 0 {
            return Err(CliError::CheckFailed { failed });
        }
    }
    Ok(())
}

/// Parses `args`, runs, reports errors on standard error and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { error::EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}::{}]: {e}", e.module(), e.name());
            e.exit_code()
        }
    }
}
