//! Deterministic simulator and analysis toolkit for the convergence of
//! oblivious robots on a line when some of them are Byzantine.
//!
//! The crate provides:
//!
//! - exact rational positions ([`Scalar`]) and ordered position multisets
//!   ([`PointMultiset`]), so every bound is checked without rounding;
//! - the trimmed-midrange destination rule ([`algorithm`]);
//! - atomic look-compute-move cycle semantics with per-cycle trace recording
//!   ([`engine`]);
//! - activation policies from full synchrony to k-bounded randomness
//!   ([`scheduler`]) and Byzantine placement / movement-stopping adversaries,
//!   including the oscillation adversary that defeats convergence under a
//!   fair scheduler ([`adversary`]);
//! - trace checkers that turn the convergence definitions and bounds into
//!   executable pass/fail properties ([`analysis`]);
//! - a catalogue of named scenarios reproducing the interesting regimes
//!   ([`scenario`]), and a line-delimited trace format ([`trace_io`]).

pub mod adversary;
pub mod algorithm;
pub mod analysis;
pub mod engine;
pub mod error;
pub mod multiset;
pub mod scalar;
pub mod scenario;
pub mod scheduler;
pub mod state;
pub mod trace_io;

pub use adversary::{Adversary, ByzantineStrategy, OscillationController, StopPolicy};
pub use algorithm::{compute_destination, midrange, trim_f, RobotAlgorithm, TrimmedMidrange};
pub use analysis::{
    CheckKind, CheckSummary, ConvergenceReport, EpochBoundCheck, ShrinkEstimate, Violation,
};
pub use engine::{run, step, AdversaryChoices, Terminal, Trace, TraceEvent};
pub use error::SimError;
pub use multiset::PointMultiset;
pub use scalar::Scalar;
pub use scenario::{
    build_scenario, build_scenario_with, run_scenario, AssertionResult, Scenario,
    ScenarioAssertion, ScenarioOverrides, SCENARIO_NAMES,
};
pub use scheduler::SchedulerPolicy;
pub use state::{
    correct_positions, observed_snapshot, Configuration, RobotId, RobotKind, RobotState,
    SimulationParams,
};
