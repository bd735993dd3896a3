//! Command-line front end: run one experiment per invocation from a TOML
//! configuration and write CSV or JSON results.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use molspec::config::{parse_config, ExperimentKind, OutputFormat};
use molspec::runner::{self, RunOverrides};

#[derive(Parser)]
#[command(
    name = "molspec",
    about = "Vibronic spectra, cavity transmission and energy-transfer rates for molecular emitters",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output path; defaults to `<kind>.<ext>` next to the working directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Cap on worker threads for oracle sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the series tail-mass bound.
    #[arg(long)]
    epsilon: Option<f64>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(format!("unknown format `{other}`, expected csv or json")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state excited population versus probe frequency.
    Absorption(CommonArgs),
    /// Fluorescence spectrum of an initially excited molecule.
    EmissionTransient(CommonArgs),
    /// Fluorescence spectrum under continuous weak driving.
    EmissionSteady(CommonArgs),
    /// Complex cavity transmission amplitude over a probe sweep.
    CavityTransmission(CommonArgs),
    /// Polariton frequencies, linewidths and the cross-talk rate.
    PolaritonRates(CommonArgs),
    /// Zero-phonon branching ratio, bare and cavity-enhanced.
    Branching(CommonArgs),
    /// Direct donor-acceptor transfer rate.
    FretDirect(CommonArgs),
    /// Cavity-assisted transfer channel coefficients.
    FretCavity(CommonArgs),
    /// Donor/acceptor populations after pulsed donor excitation.
    PumpProbe(CommonArgs),
    /// Analytic absorption peaks versus master-equation steady states.
    OracleCompare(CommonArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Absorption(_) => ExperimentKind::Absorption,
            Command::EmissionTransient(_) => ExperimentKind::EmissionTransient,
            Command::EmissionSteady(_) => ExperimentKind::EmissionSteady,
            Command::CavityTransmission(_) => ExperimentKind::CavityTransmission,
            Command::PolaritonRates(_) => ExperimentKind::PolaritonRates,
            Command::Branching(_) => ExperimentKind::Branching,
            Command::FretDirect(_) => ExperimentKind::FretDirect,
            Command::FretCavity(_) => ExperimentKind::FretCavity,
            Command::PumpProbe(_) => ExperimentKind::PumpProbe,
            Command::OracleCompare(_) => ExperimentKind::OracleCompare,
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Absorption(a)
            | Command::EmissionTransient(a)
            | Command::EmissionSteady(a)
            | Command::CavityTransmission(a)
            | Command::PolaritonRates(a)
            | Command::Branching(a)
            | Command::FretDirect(a)
            | Command::FretCavity(a)
            | Command::PumpProbe(a)
            | Command::OracleCompare(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let kind = cli.command.kind();
    let args = cli.command.args();

    let text = match std::fs::read_to_string(&args.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(runner::EXIT_CONFIG as u8);
        }
    };
    let config = match parse_config(&text) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(runner::EXIT_CONFIG as u8);
        }
    };
    if config.kind != kind {
        eprintln!(
            "error: config declares kind `{}` but the `{}` subcommand was invoked",
            config.kind.as_str(),
            kind.as_str()
        );
        return ExitCode::from(runner::EXIT_CONFIG as u8);
    }

    let overrides = RunOverrides {
        output: args.output.clone(),
        format: args.format,
        epsilon: args.epsilon,
        jobs: args.jobs,
    };
    let artifact = match runner::run(&config, &overrides) {
        Ok(artifact) => artifact,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(runner::exit_code_for(&e) as u8);
        }
    };
    for warning in &artifact.warnings {
        eprintln!("note: {warning}");
    }
    match runner::write_artifact(&artifact, &overrides) {
        Ok(path) => {
            eprintln!("wrote {}", path.display());
            ExitCode::from(runner::EXIT_OK as u8)
        }
        Err(e) => {
            eprintln!("error: writing output failed: {e}");
            ExitCode::from(runner::EXIT_NUMERICAL as u8)
        }
    }
}
