//! Command-line front end: run configurations, expand figure presets,
//! sweep parameter axes, and run the built-in validation suite.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use optomech::config::{CliOverrides, RunConfig, RunMode, SweepAxis, PRESET_NAMES};
use optomech::runner::{execute, run_figure, validate, RunOutcome};

#[derive(Parser)]
#[command(
    name = "optomech",
    about = "Gaussian entanglement dynamics of a driven optomechanical cavity",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Default)]
struct Overrides {
    /// Configuration file (flat TOML key-value document).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV files and the run manifest.
    #[arg(long)]
    out: Option<String>,
    /// Quadrature grid spacing in units of 1/κ.
    #[arg(long)]
    grid_dt: Option<f64>,
    /// Number of trace sample times.
    #[arg(long)]
    samples: Option<usize>,
    /// Seed for the stochastic validation checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Evolution mode: full, noise-free, baseline, or compare.
    #[arg(long)]
    mode: Option<RunMode>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a run configuration (defaults when no --config is given).
    Run {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Expand a named figure preset and execute it.
    Figure {
        /// Preset name, e.g. fig2a. Use --list to enumerate.
        name: Option<String>,
        /// List the available preset names and exit.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Execute a configuration that sweeps a parameter axis.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Axis to sweep: detuning or intensity.
        #[arg(long)]
        axis: Option<SweepAxis>,
        /// Lower end of the sweep range.
        #[arg(long, allow_negative_numbers = true)]
        min: Option<f64>,
        /// Upper end of the sweep range.
        #[arg(long, allow_negative_numbers = true)]
        max: Option<f64>,
        /// Number of axis samples.
        #[arg(long)]
        steps: Option<usize>,
        /// Space the samples logarithmically.
        #[arg(long)]
        log: bool,
    },
    /// Run the built-in validation suite and report PASS/FAIL per check.
    Validate {
        /// Seed for the stochastic checks.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

impl Overrides {
    fn cli_overrides(&self) -> CliOverrides {
        CliOverrides {
            mode: self.mode,
            out_dir: self.out.clone(),
            grid_dt: self.grid_dt,
            samples: self.samples,
            seed: self.seed,
        }
    }

    fn load_config(&self) -> Result<RunConfig, optomech::Error> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        config.apply_overrides(&self.cli_overrides());
        Ok(config)
    }
}

fn report(outcome: &RunOutcome) {
    print!("{}", outcome.summary);
    println!("wrote {} files to {}", outcome.files.len(), outcome.out_dir.display());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { overrides } => overrides.load_config().and_then(|c| execute(&c)),
        Command::Figure { name, list, overrides } => {
            if list {
                for name in PRESET_NAMES {
                    println!("{name}");
                }
                return ExitCode::SUCCESS;
            }
            let Some(name) = name else {
                eprintln!("error: give a preset name or --list");
                return ExitCode::FAILURE;
            };
            run_figure(&name, &overrides.cli_overrides())
        }
        Command::Sweep { overrides, axis, min, max, steps, log } => {
            overrides.load_config().and_then(|mut config| {
                if let Some(axis) = axis {
                    config.sweep = axis;
                }
                if let Some(min) = min {
                    config.sweep_min = min;
                }
                if let Some(max) = max {
                    config.sweep_max = max;
                }
                if let Some(steps) = steps {
                    config.sweep_steps = steps;
                }
                if log {
                    config.sweep_log = true;
                }
                if config.sweep == SweepAxis::None {
                    return Err(optomech::Error::Config {
                        field: "sweep".into(),
                        reason: "sweep subcommand needs an axis (--axis or config `sweep`)".into(),
                    });
                }
                execute(&config)
            })
        }
        Command::Validate { seed } => {
            let (text, ok) = validate(seed);
            print!("{text}");
            return if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
    };

    match result {
        Ok(outcome) => {
            report(&outcome);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
