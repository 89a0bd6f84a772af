//! Run configuration files: flat `key = value` text with dotted sections.
//!
//! ```text
//! n = 4
//! f = 1
//! delta = 1/10
//! epsilon = 1/100
//! max_cycles = 10000
//! seed = 42
//! scheduler = k-bounded
//! k = 2
//! adversary.byzantine = track-max
//! adversary.stop = random
//! initial.correct = 0, 40, 100
//! initial.byzantine = 101
//! output.trace = out/trace.jsonl
//! output.csv = out/run.csv
//! ```
//!
//! Scalars use the exact `p/q` (or integer) form. Lists are comma separated;
//! the scripted scheduler's `script` key separates activation sets with
//! semicolons. `initial.spread = <d>` may replace `initial.correct` to place
//! the correct robots evenly over `[0, d]`, which is what parameter sweeps
//! over `n` or `f` rely on.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use byzsim_core::adversary::{oscillation_controller, Adversary, ByzantineStrategy, StopPolicy};
use byzsim_core::scheduler::SchedulerPolicy;
use byzsim_core::state::{Configuration, RobotId, SimulationParams};
use byzsim_core::Scalar;

/// A configuration problem, always naming the offending key.
#[derive(Debug)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        message: message.into(),
    }
}

const KNOWN_KEYS: &[&str] = &[
    "n",
    "f",
    "delta",
    "epsilon",
    "max_cycles",
    "seed",
    "scheduler",
    "k",
    "script",
    "adversary.byzantine",
    "adversary.stop",
    "adversary.offset",
    "adversary.fixed_positions",
    "adversary.phases",
    "initial.correct",
    "initial.byzantine",
    "initial.spread",
    "output.trace",
    "output.csv",
];

/// Raw key/value view of a config file.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (number, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(
                    &format!("line {}", number + 1),
                    format!("expected `key = value`, got {line:?}"),
                ));
            };
            let key = key.trim().to_string();
            let value = value.trim().trim_matches('"').to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(err(&key, "unknown key"));
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(err(&key, "duplicate key"));
            }
        }
        Ok(RawConfig { values })
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(err(key, "unknown key"));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn scheduler_kind(&self) -> Option<&str> {
        self.get("scheduler")
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key)
            .ok_or_else(|| err(key, "missing required key"))
    }

    fn parse_usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.require(key)?
            .parse()
            .map_err(|e| err(key, format!("not a nonnegative integer: {e}")))
    }

    fn parse_u64_opt(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| err(key, format!("not an integer: {e}")))
            })
            .transpose()
    }

    fn parse_scalar(&self, key: &str) -> Result<Scalar, ConfigError> {
        self.require(key)?
            .parse()
            .map_err(|e| err(key, format!("{e}")))
    }

    fn parse_scalar_opt(&self, key: &str) -> Result<Option<Scalar>, ConfigError> {
        self.get(key)
            .map(|v| v.parse().map_err(|e| err(key, format!("{e}"))))
            .transpose()
    }

    fn parse_scalar_list(&self, key: &str) -> Result<Vec<Scalar>, ConfigError> {
        let raw = self.require(key)?;
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| err(key, format!("{e}"))))
            .collect()
    }
}

/// Everything needed to execute one run.
#[derive(Debug)]
pub struct LoadedRun {
    pub initial: Configuration,
    pub scheduler: SchedulerPolicy,
    pub adversary: Adversary,
    pub trace_path: Option<PathBuf>,
    pub csv_path: Option<PathBuf>,
}

pub fn load_run(raw: &RawConfig) -> Result<LoadedRun, ConfigError> {
    let n = raw.parse_usize("n")?;
    let f = raw.parse_usize("f")?;
    if f >= n {
        return Err(err("f", format!("f = {f} must be smaller than n = {n}")));
    }
    let m = n - f;
    let byz_kind = raw.get("adversary.byzantine").unwrap_or("track-max");
    let oscillation = byz_kind == "oscillation";

    // Initial positions.
    let correct: Vec<Scalar> = match (raw.get("initial.correct"), raw.get("initial.spread")) {
        (Some(_), Some(_)) => {
            return Err(err(
                "initial.spread",
                "give either initial.correct or initial.spread, not both",
            ))
        }
        (Some(_), None) => {
            let list = raw.parse_scalar_list("initial.correct")?;
            if list.len() != m {
                return Err(err(
                    "initial.correct",
                    format!("{} positions given, but n - f = {m}", list.len()),
                ));
            }
            list
        }
        (None, Some(_)) => {
            let spread = raw.parse_scalar("initial.spread")?;
            if spread.is_negative() {
                return Err(err("initial.spread", "must be nonnegative"));
            }
            (0..m)
                .map(|i| {
                    if m == 1 {
                        Scalar::zero()
                    } else {
                        &spread * Scalar::new(i as i64, (m - 1) as i64)
                    }
                })
                .collect()
        }
        (None, None) => return Err(err("initial.correct", "missing required key")),
    };

    let fixed_positions = raw
        .get("adversary.fixed_positions")
        .map(|_| raw.parse_scalar_list("adversary.fixed_positions"))
        .transpose()?;
    let byzantine_initial: Vec<Scalar> = match raw.get("initial.byzantine") {
        Some(_) => {
            let list = raw.parse_scalar_list("initial.byzantine")?;
            if list.len() != f {
                return Err(err(
                    "initial.byzantine",
                    format!("{} positions given, but f = {f}", list.len()),
                ));
            }
            list
        }
        None => match &fixed_positions {
            Some(fixed) if fixed.len() == f => fixed.clone(),
            _ => vec![Scalar::zero(); f],
        },
    };

    // Build a provisional configuration for the oscillation planner.
    let seed = raw.parse_u64_opt("seed")?.unwrap_or(0);
    let epsilon = raw.parse_scalar("epsilon")?;
    let provisional = SimulationParams {
        n,
        f,
        delta_default: Scalar::one(),
        epsilon: epsilon.clone(),
        max_cycles: 1,
        seed,
    };

    let controller = if oscillation {
        for forbidden in ["scheduler", "adversary.stop", "k", "script"] {
            if raw.get(forbidden).is_some() {
                return Err(err(
                    forbidden,
                    "the oscillation adversary supplies its own scheduler and stop policy",
                ));
            }
        }
        let phases = raw
            .parse_u64_opt("adversary.phases")?
            .unwrap_or(8)
            .try_into()
            .map_err(|_| err("adversary.phases", "too large"))?;
        let staging =
            Configuration::from_positions(&correct, &byzantine_initial, provisional.clone())
                .map_err(|e| err("initial.correct", format!("{e}")))?;
        Some(
            oscillation_controller(&staging, phases)
                .map_err(|e| err("adversary.byzantine", format!("{e}")))?,
        )
    } else {
        None
    };

    let delta = match (raw.parse_scalar_opt("delta")?, &controller) {
        (Some(d), _) => d,
        (None, Some(c)) => c.recommended_delta(),
        (None, None) => return Err(err("delta", "missing required key")),
    };
    if !delta.is_positive() {
        return Err(err("delta", "must be positive"));
    }
    let max_cycles = match (raw.parse_u64_opt("max_cycles")?, &controller) {
        (Some(c), Some(ctrl)) if c > ctrl.total_cycles => {
            return Err(err(
                "max_cycles",
                format!(
                    "the oscillation script covers {} cycles; max_cycles may not exceed it",
                    ctrl.total_cycles
                ),
            ))
        }
        (Some(c), _) => c,
        (None, Some(ctrl)) => ctrl.total_cycles,
        (None, None) => return Err(err("max_cycles", "missing required key")),
    };

    let params = SimulationParams {
        delta_default: delta,
        max_cycles,
        ..provisional
    };
    params.validate().map_err(|e| err("n", format!("{e}")))?;
    let initial = Configuration::from_positions(&correct, &byzantine_initial, params)
        .map_err(|e| err("initial.correct", format!("{e}")))?;

    // Policies: either from the oscillation controller or from the keys.
    let (scheduler, byzantine, stops) = if let Some(controller) = controller {
        (controller.scheduler, controller.byzantine, controller.stops)
    } else {
        let scheduler = match raw.get("scheduler").unwrap_or("full-sync") {
            "full-sync" => SchedulerPolicy::FullySync,
            "round-robin" => SchedulerPolicy::RoundRobinFair,
            "k-bounded" => {
                let k = raw
                    .parse_u64_opt("k")?
                    .ok_or_else(|| err("k", "required for the k-bounded scheduler"))?;
                if k == 0 {
                    return Err(err("k", "must be at least 1"));
                }
                SchedulerPolicy::k_bounded(k, seed)
            }
            "scripted" => {
                let raw_script = raw.require("script")?;
                let correct_ids: BTreeSet<u32> = (1..=m as u32).collect();
                let mut script = Vec::new();
                for group in raw_script.split(';') {
                    let mut set = BTreeSet::new();
                    for id in group.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        let id: u32 = id
                            .parse()
                            .map_err(|e| err("script", format!("bad robot id {id:?}: {e}")))?;
                        if !correct_ids.contains(&id) {
                            return Err(err(
                                "script",
                                format!("robot id {id} is not a correct robot (ids 1..={m})"),
                            ));
                        }
                        set.insert(RobotId(id));
                    }
                    if set.is_empty() {
                        return Err(err("script", "empty activation set"));
                    }
                    script.push(set);
                }
                if script.is_empty() {
                    return Err(err("script", "empty script"));
                }
                SchedulerPolicy::Scripted(script)
            }
            other => return Err(err("scheduler", format!("unknown scheduler {other:?}"))),
        };

        let offset = raw
            .parse_scalar_opt("adversary.offset")?
            .unwrap_or_else(Scalar::one);
        let byzantine = match byz_kind {
            "fixed" => {
                let positions = fixed_positions
                    .ok_or_else(|| err("adversary.fixed_positions", "required for fixed"))?;
                if positions.len() != f {
                    return Err(err(
                        "adversary.fixed_positions",
                        format!("{} positions given, but f = {f}", positions.len()),
                    ));
                }
                ByzantineStrategy::Fixed(positions)
            }
            "track-max" => ByzantineStrategy::track_max(offset),
            "track-min" => ByzantineStrategy::track_min(offset),
            "random" => ByzantineStrategy::random_in_range(seed.wrapping_add(2)),
            other => {
                return Err(err(
                    "adversary.byzantine",
                    format!("unknown strategy {other:?}"),
                ))
            }
        };

        let stops = match raw.get("adversary.stop").unwrap_or("full") {
            "full" => StopPolicy::FullMove,
            "min-delta" => StopPolicy::MinDelta,
            "random" => StopPolicy::random_fraction(seed.wrapping_add(1)),
            other => {
                return Err(err(
                    "adversary.stop",
                    format!("unknown stop policy {other:?}"),
                ))
            }
        };
        (scheduler, byzantine, stops)
    };

    Ok(LoadedRun {
        initial,
        scheduler,
        adversary: Adversary { byzantine, stops },
        trace_path: raw.get("output.trace").map(PathBuf::from),
        csv_path: raw.get("output.csv").map(PathBuf::from),
    })
}
