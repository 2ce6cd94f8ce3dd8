//! Command-line driver for the `casimir` library: config ingestion, sweeps,
//! CSV/JSON emission and the golden `verify` suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

pub use commands::Output;
pub use config::{Command, Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] casimir::Error),

    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("verification failed: {failed} of {total} checks")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use casimir::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Core(E::InvalidArgument(_) | E::InsufficientGrid(_) | E::RegimeViolation { .. }) => 1,
            CliError::Core(_) => 2,
            CliError::VerifyFailed { .. } => 3,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub slow: bool,
}

/// Load the config, applying command-line overrides.
pub fn load_config(options: &Options) -> Result<RunConfig, CliError> {
    let mut config = match &options.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(f) = options.format {
        config.format = f;
    }
    if let Some(p) = &options.output {
        config.output_path = Some(p.display().to_string());
    }
    config.validate()?;
    Ok(config)
}

/// Compute `command` without writing anything.
pub fn compute(command: Command, config: &RunConfig, slow: bool) -> Result<Output, CliError> {
    match command {
        Command::Nu => commands::nu(config),
        Command::Regimes => commands::regimes(config),
        Command::FreeEnergy => commands::free_energy(config),
        Command::Entropy => commands::entropy(config),
        Command::Fit => commands::fit(config),
        Command::Verify => verify::run(config, slow).map(|r| r.output(config)),
    }
}

pub fn render(output: &Output, format: Format) -> String {
    match format {
        Format::Csv => output.csv.clone(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&output.json).expect("json values serialise");
            s.push('\n');
            s
        }
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    output.with_extension("verdict.json")
}

/// Run a subcommand end to end. Output goes to the configured path, or to
/// `stdout` when none is set. A failed `verify` still writes its report.
pub fn execute(command: Command, options: &Options, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = load_config(options)?;
    let output = compute(command, &config, options.slow)?;
    let text = render(&output, config.format);
    match &config.output_path {
        Some(p) => {
            let path = PathBuf::from(p);
            write_atomic(&path, &text)?;
            if let (Some(side), Format::Csv) = (&output.sidecar, config.format) {
                let mut s = serde_json::to_string_pretty(side).expect("json values serialise");
                s.push('\n');
                write_atomic(&sidecar_path(&path), &s)?;
            }
        }
        None => {
            stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
        }
    }
    if command == Command::Verify {
        verify::status_from(&output)?;
    }
    Ok(())
}
