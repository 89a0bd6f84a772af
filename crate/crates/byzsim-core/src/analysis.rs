//! Trace-level checkers: each definition and bound the simulator is expected
//! to satisfy, as a pure pass/fail function over a recorded trace.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::algorithm::RobotAlgorithm;
use crate::engine::Trace;
use crate::error::SimError;
use crate::multiset::PointMultiset;
use crate::scalar::Scalar;
use crate::state::{RobotId, RobotKind};

/// Which checker produced a violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckKind {
    Cautious,
    DiameterMonotone,
    EpochBound,
    LimitDestinations,
    KBounded,
    Fairness,
    Progress,
    SnapshotConsistency,
}

/// A failed check, with enough witness values to recompute the broken
/// inequality by hand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub check: CheckKind,
    pub time: u64,
    pub details: String,
    pub witnesses: Vec<Scalar>,
}

/// Serializable one-line summary of a checker run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: CheckKind,
    pub violations: usize,
    pub first: Option<Violation>,
}

pub fn summarize(check: CheckKind, violations: &[Violation]) -> CheckSummary {
    CheckSummary {
        check,
        violations: violations.len(),
        first: violations.first().cloned(),
    }
}

/// Per-epoch diameter ratios of a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShrinkEstimate {
    /// `(start_time, end_time, diam(end) / diam(start))` per epoch; the
    /// ratio is recorded as 0 when the epoch starts already gathered.
    pub epochs: Vec<(u64, u64, Scalar)>,
    /// Largest epoch ratio; 0 when no epoch completed.
    pub alpha_observed: Scalar,
}

/// The instantiated semi-synchronous shrink bound for one epoch, kept for
/// reporting: the bound itself, the diameter it was computed from, and the
/// tracked (f+1)-element witness multiset with the largest value it reached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochBoundCheck {
    pub k: u64,
    pub f: usize,
    pub delta: Scalar,
    pub d0: Scalar,
    pub alpha_bound: Scalar,
    pub witness: PointMultiset,
    pub s_max: Scalar,
}

/// When (if ever) a trace first dropped below epsilon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub epsilon: Scalar,
    pub t_epsilon: Option<u64>,
    pub final_diameter: Scalar,
}

/// Correct-robot positions right before each event's look phase, recovered
/// by replaying the recorded end positions from the initial configuration.
fn look_positions(trace: &Trace) -> Vec<BTreeMap<RobotId, Scalar>> {
    let mut current: BTreeMap<RobotId, Scalar> = trace
        .initial
        .robots
        .iter()
        .filter(|r| r.kind == RobotKind::Correct)
        .map(|r| (r.id, r.position.clone()))
        .collect();
    let mut result = Vec::with_capacity(trace.events.len());
    for event in &trace.events {
        result.push(current.clone());
        for (id, end) in &event.end_positions {
            current.insert(*id, end.clone());
        }
    }
    result
}

fn correct_id_set(trace: &Trace) -> BTreeSet<RobotId> {
    trace.initial.correct_ids().into_iter().collect()
}

/// Every recorded destination must lie within the range of the correct
/// robots' positions at its own cycle.
pub fn check_cautious(trace: &Trace) -> Vec<Violation> {
    let mut violations = Vec::new();
    for (event, looks) in trace.events.iter().zip(look_positions(trace)) {
        let correct: PointMultiset = looks.values().cloned().collect();
        let Ok((lo, hi)) = correct.range() else {
            continue;
        };
        for (id, dest) in &event.destinations {
            if dest < &lo || dest > &hi {
                violations.push(Violation {
                    check: CheckKind::Cautious,
                    time: event.time,
                    details: format!("destination of {id} is {dest}, outside [{lo}, {hi}]"),
                    witnesses: vec![dest.clone(), lo.clone(), hi.clone()],
                });
            }
        }
    }
    violations
}

/// The correct-robot diameter may never increase, starting from the initial
/// configuration.
pub fn check_diameter_monotone(trace: &Trace) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut previous = match trace.diameter_at(0) {
        Some(d) => d,
        None => return violations,
    };
    for event in &trace.events {
        if event.correct_diameter > previous {
            violations.push(Violation {
                check: CheckKind::DiameterMonotone,
                time: event.time,
                details: format!(
                    "diameter grew from {previous} to {}",
                    event.correct_diameter
                ),
                witnesses: vec![previous.clone(), event.correct_diameter.clone()],
            });
        }
        previous = event.correct_diameter.clone();
    }
    violations
}

/// Epochs of a trace: maximal windows in which every correct robot is
/// activated at least once, as `(start_event, end_event)` index pairs.
fn epochs(trace: &Trace) -> Vec<(usize, usize)> {
    let all = correct_id_set(trace);
    let mut result = Vec::new();
    let mut start = 0usize;
    let mut seen: BTreeSet<RobotId> = BTreeSet::new();
    for (i, event) in trace.events.iter().enumerate() {
        seen.extend(event.activated.iter().copied());
        if seen == all {
            result.push((start, i));
            start = i + 1;
            seen.clear();
        }
    }
    result
}

/// Per-epoch diameter ratios, epochs delimited at each cycle where every
/// correct robot has been activated at least once since the epoch started.
pub fn estimate_shrinking(trace: &Trace) -> ShrinkEstimate {
    let mut epochs_out = Vec::new();
    let mut alpha = Scalar::zero();
    for (start, end) in epochs(trace) {
        let start_time = trace.events[start].time;
        let end_time = trace.events[end].time + 1;
        let d_start = trace
            .diameter_at(start_time)
            .expect("epoch start within trace");
        let d_end = trace.events[end].correct_diameter.clone();
        let ratio = if d_start.is_zero() {
            Scalar::zero()
        } else {
            &d_end / &d_start
        };
        if ratio > alpha {
            alpha = ratio.clone();
        }
        epochs_out.push((start_time, end_time, ratio));
    }
    ShrinkEstimate {
        epochs: epochs_out,
        alpha_observed: alpha,
    }
}

/// Check every epoch of a k-bounded trace against the shrink bound
/// `alpha = max(1 - delta/d0, 1 - 1/2^(k(f+1)+2))`, with `d0` the diameter at
/// the epoch start. Returns the instantiated bound for the worst epoch plus
/// any violations.
pub fn check_epoch_bound(
    trace: &Trace,
    k: u64,
    f: usize,
    delta: &Scalar,
) -> Result<(EpochBoundCheck, Vec<Violation>), SimError> {
    let n = trace.params.n;
    if n <= 3 * f {
        return Err(SimError::InvalidPrecondition(format!(
            "epoch bound needs n > 3f, got n = {n}, f = {f}"
        )));
    }
    let exponent: u64 = k
        .checked_mul(f as u64 + 1)
        .and_then(|v| v.checked_add(2))
        .ok_or_else(|| SimError::InvalidPrecondition("k(f+1)+2 overflows".into()))?;
    let exponent = u32::try_from(exponent)
        .map_err(|_| SimError::InvalidPrecondition("k(f+1)+2 too large".into()))?;
    let alpha_k = Scalar::one() - Scalar::inv_pow2(exponent);

    let looks = look_positions(trace);
    let one = Scalar::one();
    let mut violations = Vec::new();
    let mut worst: Option<(Scalar, EpochBoundCheck)> = None;
    for (start, end) in epochs(trace) {
        let start_time = trace.events[start].time;
        let d0 = trace
            .diameter_at(start_time)
            .expect("epoch start within trace");
        if d0.is_zero() {
            continue;
        }
        let alpha_delta = &one - &(delta / &d0);
        let alpha_bound = alpha_k.clone().max(alpha_delta);
        let d_end = trace.events[end].correct_diameter.clone();

        // Witness: the f+1 lowest correct robots at the epoch start, tracked
        // across the epoch; s_max is the largest position they reach.
        let start_positions = &looks[start];
        let mut by_position: Vec<(&Scalar, RobotId)> =
            start_positions.iter().map(|(id, p)| (p, *id)).collect();
        by_position.sort();
        let tracked: Vec<RobotId> = by_position.iter().take(f + 1).map(|(_, id)| *id).collect();
        let witness: PointMultiset = tracked
            .iter()
            .map(|id| start_positions[id].clone())
            .collect();
        let mut s_max = witness.max().expect("f + 1 >= 1").clone();
        for looks_at in looks.iter().take(end + 1).skip(start) {
            for id in &tracked {
                if looks_at[id] > s_max {
                    s_max = looks_at[id].clone();
                }
            }
        }

        let bound_value = &alpha_bound * &d0;
        if d_end > bound_value {
            violations.push(Violation {
                check: CheckKind::EpochBound,
                time: trace.events[end].time,
                details: format!(
                    "epoch [{start_time}, {}] shrank {d0} only to {d_end}, above {alpha_bound} * {d0}",
                    trace.events[end].time + 1
                ),
                witnesses: vec![d0.clone(), d_end.clone(), alpha_bound.clone()],
            });
        }

        let ratio = &d_end / &d0;
        let record = EpochBoundCheck {
            k,
            f,
            delta: delta.clone(),
            d0,
            alpha_bound,
            witness,
            s_max,
        };
        match &worst {
            Some((worst_ratio, _)) if *worst_ratio >= ratio => {}
            _ => worst = Some((ratio, record)),
        }
    }

    let check = worst.map(|(_, record)| record).unwrap_or_else(|| {
        let d0 = trace.diameter_at(0).unwrap_or_else(Scalar::zero);
        let alpha_bound = if d0.is_zero() {
            alpha_k.clone()
        } else {
            alpha_k.clone().max(&one - &(delta / &d0))
        };
        EpochBoundCheck {
            k,
            f,
            delta: delta.clone(),
            d0,
            alpha_bound,
            witness: PointMultiset::empty(),
            s_max: Scalar::zero(),
        }
    });
    Ok((check, violations))
}

/// Between `t1` and `t2`, every recorded destination must stay at or below
/// `(s_max + U_m(t1)) / 2`, where `s_max` is the largest position any robot
/// of the tracked (f+1)-element subset reaches inside the window.
pub fn check_limit_destinations(
    trace: &Trace,
    s_ids: &BTreeSet<RobotId>,
    t1: u64,
    t2: u64,
) -> Result<Vec<Violation>, SimError> {
    let f = trace.params.f;
    if s_ids.len() != f + 1 {
        return Err(SimError::InvalidPrecondition(format!(
            "tracked subset has {} ids, need f + 1 = {}",
            s_ids.len(),
            f + 1
        )));
    }
    let correct = correct_id_set(trace);
    if !s_ids.is_subset(&correct) {
        return Err(SimError::InvalidPrecondition(
            "tracked subset contains non-correct ids".into(),
        ));
    }
    if t1 >= t2 {
        return Err(SimError::InvalidPrecondition(format!(
            "window [{t1}, {t2}] is empty"
        )));
    }
    let looks = look_positions(trace);
    let window: Vec<usize> = trace
        .events
        .iter()
        .enumerate()
        .filter(|(_, e)| e.time >= t1 && e.time <= t2)
        .map(|(i, _)| i)
        .collect();
    let first = *window.first().ok_or_else(|| {
        SimError::InvalidPrecondition(format!("window [{t1}, {t2}] outside the trace"))
    })?;
    if trace.events[first].time != t1 {
        return Err(SimError::InvalidPrecondition(format!(
            "window start {t1} not recorded in the trace"
        )));
    }

    let u_m_t1 = looks[first]
        .values()
        .max()
        .expect("at least one correct robot")
        .clone();
    let mut s_max = looks[first][s_ids.iter().next().unwrap()].clone();
    for &i in &window {
        for id in s_ids {
            if looks[i][id] > s_max {
                s_max = looks[i][id].clone();
            }
        }
    }
    let bound = (&s_max + &u_m_t1).half();

    let mut violations = Vec::new();
    for &i in &window {
        let event = &trace.events[i];
        for (id, dest) in &event.destinations {
            if dest > &bound {
                violations.push(Violation {
                    check: CheckKind::LimitDestinations,
                    time: event.time,
                    details: format!(
                        "destination of {id} is {dest}, above ({s_max} + {u_m_t1}) / 2"
                    ),
                    witnesses: vec![dest.clone(), s_max.clone(), u_m_t1.clone()],
                });
            }
        }
    }
    Ok(violations)
}

/// First cycle at which the correct diameter is below epsilon, if any.
pub fn convergence_time(trace: &Trace, epsilon: &Scalar) -> ConvergenceReport {
    let mut t_epsilon = None;
    let mut final_diameter = Scalar::zero();
    for t in 0..trace.horizon() {
        let diameter = trace.diameter_at(t).expect("within horizon");
        if t_epsilon.is_none() && diameter < *epsilon {
            t_epsilon = Some(t);
        }
        final_diameter = diameter;
    }
    ConvergenceReport {
        epsilon: epsilon.clone(),
        t_epsilon,
        final_diameter,
    }
}

/// Between two consecutive activations of any robot, no other robot may be
/// activated more than `k` times (activations in the same cycle as either
/// endpoint do not count as being in between).
pub fn verify_k_bounded(log: &[BTreeSet<RobotId>], k: u64) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut robots: BTreeSet<RobotId> = BTreeSet::new();
    for set in log {
        robots.extend(set.iter().copied());
    }
    for &robot in &robots {
        let activations: Vec<usize> = log
            .iter()
            .enumerate()
            .filter(|(_, set)| set.contains(&robot))
            .map(|(i, _)| i)
            .collect();
        for pair in activations.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            for &other in &robots {
                if other == robot {
                    continue;
                }
                let count = log[a + 1..b]
                    .iter()
                    .filter(|set| set.contains(&other))
                    .count() as u64;
                if count > k {
                    violations.push(Violation {
                        check: CheckKind::KBounded,
                        time: b as u64,
                        details: format!(
                            "{other} activated {count} > {k} times between activations of {robot} at cycles {a} and {b}"
                        ),
                        witnesses: Vec::new(),
                    });
                }
            }
        }
    }
    violations
}

/// Windowed fairness: every correct robot appears in every contiguous
/// `window`-cycle slice of the log.
///
/// Fairness over an infinite run is not decidable from a finite prefix, so
/// each scheduler comes with a natural window this proxy is checked at:
/// the number of correct robots `m` for the round-robin policy, `k * m` for
/// the k-bounded policy, and the maximum phase-pair length for the
/// oscillation schedule (every robot acts at least once per pair).
pub fn verify_fair(
    log: &[BTreeSet<RobotId>],
    correct_ids: &BTreeSet<RobotId>,
    window: usize,
) -> Vec<Violation> {
    assert!(window >= 1, "fairness window must be at least 1");
    let mut violations = Vec::new();
    if log.len() < window {
        return violations;
    }
    for &robot in correct_ids {
        let mut last_seen: Option<usize> = None;
        let mut reported = false;
        for start in 0..=log.len() - window {
            let end = start + window;
            // Advance the most recent activation at or after `start`.
            if last_seen.is_none_or(|seen| seen < start) {
                last_seen = (last_seen.map_or(start, |s| s.max(start))..end)
                    .find(|&i| log[i].contains(&robot));
            }
            let present = last_seen.is_some_and(|seen| seen >= start && seen < end);
            if !present && !reported {
                violations.push(Violation {
                    check: CheckKind::Fairness,
                    time: start as u64,
                    details: format!("{robot} not activated in window [{start}, {end})"),
                    witnesses: Vec::new(),
                });
                reported = true;
            }
        }
    }
    violations
}

/// Progress proxy for the non-triviality half of cautiousness: whenever the
/// diameter is still at least epsilon at the start of a full-activation
/// epoch, some correct robot must change position within that epoch.
pub fn check_progress(trace: &Trace, epsilon: &Scalar) -> Vec<Violation> {
    let looks = look_positions(trace);
    let mut violations = Vec::new();
    for (start, end) in epochs(trace) {
        let start_time = trace.events[start].time;
        let d0 = trace
            .diameter_at(start_time)
            .expect("epoch start within trace");
        if d0 < *epsilon {
            continue;
        }
        let moved = trace.events[start..=end]
            .iter()
            .enumerate()
            .any(|(offset, event)| {
                event
                    .end_positions
                    .iter()
                    .any(|(id, end_pos)| looks[start + offset][id] != *end_pos)
            });
        if !moved {
            violations.push(Violation {
                check: CheckKind::Progress,
                time: start_time,
                details: format!(
                    "diameter {d0} >= {epsilon} but no correct robot moved in the epoch starting at {start_time}"
                ),
                witnesses: vec![d0.clone(), epsilon.clone()],
            });
        }
    }
    violations
}

/// Recompute each event's destination from its recorded shared snapshot:
/// every activated robot's destination must be that exact value.
pub fn check_snapshot_consistency(trace: &Trace, algorithm: &dyn RobotAlgorithm) -> Vec<Violation> {
    let mut violations = Vec::new();
    for event in &trace.events {
        let expected = match algorithm.destination(&event.snapshot, trace.params.f) {
            Ok(d) => d,
            Err(_) => continue,
        };
        for (id, dest) in &event.destinations {
            if dest != &expected {
                violations.push(Violation {
                    check: CheckKind::SnapshotConsistency,
                    time: event.time,
                    details: format!(
                        "destination of {id} is {dest}, but the shared snapshot gives {expected}"
                    ),
                    witnesses: vec![dest.clone(), expected.clone()],
                });
            }
        }
    }
    violations
}
