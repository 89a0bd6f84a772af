//! The trimmed-midrange destination rule and the generic algorithm interface.

use crate::error::SimError;
use crate::multiset::PointMultiset;
use crate::scalar::Scalar;

/// A destination rule for oblivious robots: a pure function of the observed
/// snapshot and the fault budget. Equal snapshots must yield equal
/// destinations (robots keep no memory between cycles).
pub trait RobotAlgorithm {
    fn destination(&self, snapshot: &PointMultiset, f: usize) -> Result<Scalar, SimError>;
}

/// Remove the `f` smallest and `f` largest values (with multiplicity).
///
/// Requires more than `2f` points; anything less is the regime where no
/// cautious destination rule can work, surfaced as `TrimUnderflow`.
pub fn trim_f(points: &PointMultiset, f: usize) -> Result<PointMultiset, SimError> {
    let cardinality = points.cardinality();
    if cardinality <= 2 * f {
        return Err(SimError::TrimUnderflow { cardinality, f });
    }
    Ok(points.as_slice()[f..cardinality - f]
        .iter()
        .cloned()
        .collect())
}

/// Midpoint of the range `[min, max]`.
///
/// This is the range midpoint, not the statistical median; the two differ on
/// skewed multisets and the convergence bounds hold for the midpoint form.
pub fn midrange(points: &PointMultiset) -> Result<Scalar, SimError> {
    let (lo, hi) = points.range()?;
    Ok((lo + hi).half())
}

/// Destination of every activated robot: `midrange(trim_f(snapshot))`.
pub fn compute_destination(snapshot: &PointMultiset, f: usize) -> Result<Scalar, SimError> {
    midrange(&trim_f(snapshot, f)?)
}

/// The shipped destination rule.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrimmedMidrange;

impl RobotAlgorithm for TrimmedMidrange {
    fn destination(&self, snapshot: &PointMultiset, f: usize) -> Result<Scalar, SimError> {
        compute_destination(snapshot, f)
    }
}
