use casimir_cli::{execute, Command, Format, Options};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

/// Thermal Casimir free energy and entropy between gold plates.
#[derive(Parser)]
#[command(name = "casimir", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML file of dotted keys, e.g. `material.omega_p_mev = 9000`
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write to this file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Include the best-sample checks in `verify`
    #[arg(long, global = true)]
    slow: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Relaxation frequency ν(T)
    Nu,
    /// ν(T) against the Matsubara ladder, and crossover temperatures
    Regimes,
    /// Free energy per unit area F(T)
    FreeEnergy,
    /// Entropy S(T) and the Nernst verdict
    Entropy,
    /// Fit ΔF = C₁T²(1 − C₂√T) at low temperature
    Fit,
    /// Run the golden suite
    Verify,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let command = match cli.command {
        Cmd::Nu => Command::Nu,
        Cmd::Regimes => Command::Regimes,
        Cmd::FreeEnergy => Command::FreeEnergy,
        Cmd::Entropy => Command::Entropy,
        Cmd::Fit => Command::Fit,
        Cmd::Verify => Command::Verify,
    };
    let options = Options {
        config: cli.config,
        output: cli.output,
        format: cli.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
        slow: cli.slow,
    };
    match execute(command, &options, &mut std::io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("casimir: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
