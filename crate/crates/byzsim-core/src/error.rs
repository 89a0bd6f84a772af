//! Simulator-wide error type.

use serde::{Deserialize, Serialize};

/// Errors raised by multiset operations, the destination rule, schedulers and
/// the engine. A run that hits one of these ends with a `Terminal::Error`
/// carrying the value, so the type is serializable and comparable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub enum SimError {
    /// Diameter/range/midrange of an empty multiset.
    #[error("empty multiset")]
    EmptyMultiset,

    /// Trimming `f` from each end needs more than `2f` points. Hitting this
    /// is the observable signature of the `n <= 2f` regime, where the
    /// destination rule is undefined.
    #[error("cannot trim {f} from each end of a multiset of cardinality {cardinality}")]
    TrimUnderflow { cardinality: usize, f: usize },

    /// The scheduler broke its contract (empty activation set, or ids
    /// outside the correct-robot set).
    #[error("scheduler contract violation: {0}")]
    SchedulerContractViolation(String),

    /// A scripted scheduler ran out of activation sets.
    #[error("scripted scheduler exhausted after {cycles} cycles")]
    SchedulerExhausted { cycles: u64 },

    /// A checked precondition did not hold.
    #[error("invalid precondition: {0}")]
    InvalidPrecondition(String),

    /// Scenario name not in the catalogue.
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
}
