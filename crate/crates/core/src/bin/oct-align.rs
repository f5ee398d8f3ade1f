use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::LevelFilter;

use oct_align::config::{preset_names, ExperimentConfig};
use oct_align::runner;
use oct_align::spectral::FrequencyUnit;

#[derive(Parser)]
#[command(name = "oct-align", version, about = "Optimal control of rotational alignment under spectral constraints")]
struct Cli {
    /// Print per-iteration progress on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// TOML experiment file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment (see `constants --list-presets`).
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> oct_align::Result<ExperimentConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::from_file(path),
            (None, Some(name)) => ExperimentConfig::preset(name),
            (None, None) => Err(oct_align::Error::Config("give --config PATH or --preset NAME".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    Cm,
    Thz,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a field and write logs, fields, ⟨cos²θ⟩ and spectrum.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the iteration cap of the configuration.
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Apply the configured filter once to a `t,E` table.
    FilterField {
        field: PathBuf,
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print rotational period, transition frequencies and band positions.
    Constants {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        list_presets: bool,
    },
    /// Normalized power spectrum of a `t,E` table.
    Spectrum {
        field: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "cm")]
        unit: Unit,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { LevelFilter::Info } else { LevelFilter::Warn })
        .format_timestamp(None)
        .init();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> oct_align::Result<ExitCode> {
    match command {
        Command::Run { source, out, max_iters } => {
            let mut config = source.load()?;
            if let Some(n) = max_iters {
                config.optimizer.max_iters = n;
            }
            let result = runner::run(&config, &out)?;
            println!("{}", result.summary());
            Ok(if result.error.is_some() { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::FilterField { field, source, out } => {
            let spec = source.load()?.resolve()?.filter;
            let report = runner::filter_field_file(&field, &spec, &out)?;
            println!("{report}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Constants { source, list_presets } => {
            if list_presets {
                for name in preset_names() {
                    println!("{name}");
                }
                return Ok(ExitCode::SUCCESS);
            }
            let params = if source.config.is_some() || source.preset.is_some() {
                source.load()?.resolve()?.params
            } else {
                oct_align::rotor::MoleculeParams::carbon_monoxide()
            };
            print!("{}", runner::derived_constants(&params));
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum { field, out, unit } => {
            let unit = match unit {
                Unit::Cm => FrequencyUnit::Wavenumber,
                Unit::Thz => FrequencyUnit::Terahertz,
            };
            runner::spectrum_file(&field, &out, unit)?;
            println!("wrote {}", out.join("spectrum.csv").display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
