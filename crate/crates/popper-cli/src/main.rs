//! `popper` — simulate the two-arm entangled-pair bench, fit observed
//! pattern widths, sweep slit sizes, and run the numeric cross-check suite.
//!
//! Machine-readable payloads (CSV, or JSON for `oracle`) go to stdout and
//! are byte-deterministic; human-readable tables go to stderr. Exit codes:
//! 0 success, 1 physics/domain error, 2 configuration or usage error,
//! 3 numeric cross-check failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use popper_core::app::{
    cmd_fit, cmd_oracle, cmd_simulate, cmd_sweep, load_scenario, parse_widths, report, Preset,
    Scenario,
};
use popper_core::quantities::Length;
use popper_core::{ConfigError, OracleError, PhysicsError};

#[derive(Parser)]
#[command(
    name = "popper",
    version,
    about = "Entangled-pair slit bench: exact Gaussian simulation and analysis",
    after_help = "Scenarios are TOML files (every length carries a unit) or preset names: \
                  popper-nolens, kim-shih, strekalov. CSV/JSON goes to stdout, tables to stderr."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and report detector-plane widths, spreads, and
    /// invariant verdicts.
    Simulate {
        /// Scenario file or preset name.
        scenario: String,
        /// Also write the CSV payload to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invert an observed pattern FWHM back to the waist parameter and
    /// correlation length, under both width conventions.
    Fit {
        /// Scenario file or preset name.
        scenario: String,
        /// Observed pattern FWHM in millimeters.
        #[arg(long, value_name = "MM")]
        fwhm: f64,
        /// Also write the CSV payload to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate pattern FWHM against slit full width.
    Sweep {
        /// Scenario file or preset name.
        scenario: String,
        /// Widths in mm: a comma list ("0.1,0.2,0.4") or a range
        /// ("start:stop:step").
        #[arg(long)]
        widths: String,
        /// Convolve with a detector aperture of this full width (mm),
        /// overriding the scenario's detector, if any.
        #[arg(long, value_name = "MM")]
        detector_mm: Option<f64>,
        /// Also write the CSV payload to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the independent numeric cross-check suite and report each
    /// comparison.
    Oracle {
        /// Run a single named check instead of the whole suite.
        #[arg(long, value_name = "NAME")]
        suite: Option<String>,
        /// Judge at half of each stated tolerance.
        #[arg(long)]
        strict: bool,
        /// Base grid size (power of two; the suite refines from here).
        #[arg(long, default_value_t = popper_core::oracle::DEFAULT_GRID_N)]
        grid_n: usize,
        /// Also write the JSON payload to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit-code classes: physics 1, config 2, oracle 3.
enum CliError {
    Physics(PhysicsError),
    Config(ConfigError),
    Oracle(OracleError),
    /// Cross-checks ran but at least one failed its tolerance.
    OracleVerdict,
}

impl From<PhysicsError> for CliError {
    fn from(e: PhysicsError) -> Self {
        CliError::Physics(e)
    }
}
impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}
impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Oracle(e)
    }
}

fn resolve_scenario(arg: &str) -> Result<Scenario, ConfigError> {
    if let Ok(preset) = Preset::from_name(arg) {
        return Ok(preset.scenario());
    }
    load_scenario(Path::new(arg))
}

fn emit(payload: &str, out: Option<&PathBuf>) -> Result<(), ConfigError> {
    print!("{payload}");
    if let Some(path) = out {
        std::fs::write(path, payload).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Simulate { scenario, out } => {
            let sc = resolve_scenario(&scenario)?;
            let result = cmd_simulate(&sc)?;
            eprint!("{}", report::simulate_table(&result));
            emit(&report::simulate_csv(&result), out.as_ref())?;
            Ok(())
        }
        Cmd::Fit {
            scenario,
            fwhm,
            out,
        } => {
            if !(fwhm.is_finite() && fwhm > 0.0) {
                return Err(CliError::Config(ConfigError::BadQuantity {
                    field: "--fwhm".into(),
                    value: fwhm.to_string(),
                }));
            }
            let sc = resolve_scenario(&scenario)?;
            let result = cmd_fit(&sc, Length::from_mm(fwhm))?;
            eprint!("{}", report::fit_table(&result));
            emit(&report::fit_csv(&result), out.as_ref())?;
            if !result.any_branch_ok() {
                // Both conventions rejected the observation; surface the
                // reproduction branch's reason as the command's failure.
                return Err(CliError::Physics(result.paper.unwrap_err()));
            }
            Ok(())
        }
        Cmd::Sweep {
            scenario,
            widths,
            detector_mm,
            out,
        } => {
            let mut sc = resolve_scenario(&scenario)?;
            if let Some(w) = detector_mm {
                if !(w.is_finite() && w > 0.0) {
                    return Err(CliError::Config(ConfigError::BadQuantity {
                        field: "--detector-mm".into(),
                        value: w.to_string(),
                    }));
                }
                sc.detector_width = Some(Length::from_mm(w));
            }
            let widths = parse_widths(&widths)?;
            let result = cmd_sweep(&sc, &widths)?;
            eprint!("{}", report::sweep_table(&result));
            emit(&report::sweep_csv(&result), out.as_ref())?;
            Ok(())
        }
        Cmd::Oracle {
            suite,
            strict,
            grid_n,
            out,
        } => {
            if !(grid_n.is_power_of_two() && (64..=8192).contains(&grid_n)) {
                return Err(CliError::Config(ConfigError::BadQuantity {
                    field: "--grid-n".into(),
                    value: format!("{grid_n} (need a power of two in 64..=8192)"),
                }));
            }
            if let Some(name) = suite.as_deref() {
                // A misspelled check name is a usage error, not a numeric
                // verdict; keep exit code 3 for actual cross-check outcomes.
                if !popper_core::oracle::SUITE_CHECKS.contains(&name) {
                    return Err(CliError::Config(ConfigError::Invariant {
                        field: "--suite".into(),
                        message: format!(
                            "unknown check {name:?} (known: {})",
                            popper_core::oracle::SUITE_CHECKS.join(", ")
                        ),
                    }));
                }
            }
            let result = cmd_oracle(suite.as_deref(), strict, grid_n)?;
            eprint!("{}", report::oracle_table(&result));
            emit(&report::oracle_json(&result), out.as_ref())?;
            if !result.all_passed {
                return Err(CliError::OracleVerdict);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Physics(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Oracle(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(CliError::OracleVerdict) => {
            eprintln!("error: at least one numeric cross-check failed");
            ExitCode::from(3)
        }
    }
}
