//! Command-line front end for the robot-convergence simulator.
//!
//! Exit codes: 0 converged (or all scenario assertions passed), 1 failed
//! scenario assertions, 2 configuration errors, 3 cycle limit reached,
//! 4 engine errors.

mod config;
mod report;
mod sweep;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use byzsim_core::engine::{run, Terminal};
use byzsim_core::scenario::{build_scenario_with, run_scenario, ScenarioOverrides};
use byzsim_core::trace_io::trace_to_string;
use byzsim_core::{SimError, TrimmedMidrange};

use config::{load_run, ConfigError, RawConfig};

pub(crate) const EXIT_OK: u8 = 0;
pub(crate) const EXIT_ASSERTION_FAILED: u8 = 1;
pub(crate) const EXIT_CONFIG: u8 = 2;
pub(crate) const EXIT_CYCLE_LIMIT: u8 = 3;
pub(crate) const EXIT_ENGINE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "byzsim",
    about = "Simulate and check Byzantine-resilient robot convergence on a line",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the run described by a config file.
    Run {
        /// Path to a `key = value` config file.
        config: PathBuf,
    },
    /// Run a named scenario from the catalogue and check its assertions.
    Scenario {
        /// Scenario name; see `--list`.
        #[arg(required_unless_present = "list")]
        name: Option<String>,
        /// Override a scenario knob (seed, k, phases, epsilon, max_cycles).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Also write the trace to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// List catalogue scenarios and exit.
        #[arg(long)]
        list: bool,
    },
    /// Run a config once per value of a varied parameter and summarize.
    Sweep {
        /// Path to the base config file.
        config: PathBuf,
        /// Parameter to vary: n, f, k, delta or epsilon.
        #[arg(long)]
        vary: String,
        /// Comma-separated values for the varied parameter.
        #[arg(long)]
        values: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::Scenario {
            name,
            set,
            trace,
            list,
        } => cmd_scenario(name.as_deref(), &set, trace.as_deref(), list),
        Command::Sweep {
            config,
            vary,
            values,
        } => sweep::cmd_sweep(&config, &vary, &values),
    };
    ExitCode::from(code)
}

fn config_error(error: &ConfigError) -> u8 {
    eprintln!("error: {error}");
    EXIT_CONFIG
}

pub(crate) fn read_config(path: &std::path::Path) -> Result<RawConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError {
        key: path.display().to_string(),
        message: format!("cannot read config: {e}"),
    })?;
    RawConfig::parse(&text)
}

fn cmd_run(path: &std::path::Path) -> u8 {
    let raw = match read_config(path) {
        Ok(raw) => raw,
        Err(e) => return config_error(&e),
    };
    let loaded = match load_run(&raw) {
        Ok(loaded) => loaded,
        Err(e) => return config_error(&e),
    };
    let mut scheduler = loaded.scheduler;
    let mut adversary = loaded.adversary;
    let trace = run(
        &loaded.initial,
        &mut scheduler,
        &mut adversary,
        &TrimmedMidrange,
    );

    if let Some(trace_path) = &loaded.trace_path {
        if let Err(e) = report::write_atomic(trace_path, trace_to_string(&trace).as_bytes()) {
            eprintln!("error: cannot write {}: {e}", trace_path.display());
            return EXIT_CONFIG;
        }
        println!("trace: {}", trace_path.display());
    }
    if let Some(csv_path) = &loaded.csv_path {
        if let Err(e) = report::write_atomic(csv_path, report::diameter_csv(&trace).as_bytes()) {
            eprintln!("error: cannot write {}: {e}", csv_path.display());
            return EXIT_CONFIG;
        }
        println!("csv: {}", csv_path.display());
    }

    let final_diameter = trace
        .diameter_at(trace.horizon() - 1)
        .expect("nonempty run");
    match &trace.terminal {
        Terminal::Converged { t_epsilon } => {
            println!("converged at cycle {t_epsilon}; final diameter {final_diameter}");
            EXIT_OK
        }
        Terminal::CycleLimit => {
            println!(
                "cycle limit {} reached; final diameter {final_diameter}",
                trace.params.max_cycles
            );
            EXIT_CYCLE_LIMIT
        }
        Terminal::Error { error } => {
            eprintln!("engine error: {error}");
            EXIT_ENGINE
        }
    }
}

fn parse_overrides(set: &[String]) -> Result<ScenarioOverrides, String> {
    let mut overrides = ScenarioOverrides::default();
    for entry in set {
        let Some((key, value)) = entry.split_once('=') else {
            return Err(format!("expected KEY=VALUE, got {entry:?}"));
        };
        let (key, value) = (key.trim(), value.trim());
        let parse_int = |value: &str| -> Result<u64, String> {
            value
                .parse()
                .map_err(|e| format!("override {key}: not an integer: {e}"))
        };
        match key {
            "seed" => overrides.seed = Some(parse_int(value)?),
            "k" => overrides.k = Some(parse_int(value)?),
            "phases" => {
                overrides.phases = Some(
                    parse_int(value)?
                        .try_into()
                        .map_err(|_| format!("override {key}: too large"))?,
                )
            }
            "max_cycles" => overrides.max_cycles = Some(parse_int(value)?),
            "epsilon" => {
                overrides.epsilon = Some(
                    value
                        .parse()
                        .map_err(|e| format!("override epsilon: {e}"))?,
                )
            }
            other => return Err(format!("unknown override key {other:?}")),
        }
    }
    Ok(overrides)
}

fn cmd_scenario(
    name: Option<&str>,
    set: &[String],
    trace_path: Option<&std::path::Path>,
    list: bool,
) -> u8 {
    if list {
        for name in byzsim_core::SCENARIO_NAMES {
            println!("{name}");
        }
        return EXIT_OK;
    }
    let name = name.expect("clap requires a name unless --list is given");
    let overrides = match parse_overrides(set) {
        Ok(o) => o,
        Err(message) => {
            eprintln!("error: {message}");
            return EXIT_CONFIG;
        }
    };
    let scenario = match build_scenario_with(name, &overrides) {
        Ok(s) => s,
        Err(SimError::UnknownScenario(name)) => {
            eprintln!("error: unknown scenario {name:?}; try --list");
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    println!("scenario {name}: {}", scenario.description);
    let (trace, results) = run_scenario(&scenario);
    if let Some(path) = trace_path {
        if let Err(e) = report::write_atomic(path, trace_to_string(&trace).as_bytes()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_CONFIG;
        }
        println!("trace: {}", path.display());
    }
    let width = results
        .iter()
        .map(|r| r.name.len())
        .max()
        .unwrap_or(0)
        .max("assertion".len());
    println!("  {:width$}  result  details", "assertion");
    let mut all_passed = true;
    for result in &results {
        all_passed &= result.passed;
        println!(
            "  {:width$}  {}    {}",
            result.name,
            if result.passed { "PASS" } else { "FAIL" },
            result.details
        );
    }
    if all_passed {
        EXIT_OK
    } else {
        EXIT_ASSERTION_FAILED
    }
}
