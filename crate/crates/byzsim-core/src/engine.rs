//! Atomic look-compute-move cycle semantics and trace recording.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::adversary::Adversary;
use crate::algorithm::RobotAlgorithm;
use crate::error::SimError;
use crate::multiset::PointMultiset;
use crate::scalar::Scalar;
use crate::scheduler::SchedulerPolicy;
use crate::state::{
    correct_positions, observed_snapshot, Configuration, RobotId, RobotKind, SimulationParams,
};

/// Everything the adversary decides for one cycle: where the Byzantine robots
/// teleport before the look phase, and the fraction of its remaining distance
/// each activated robot is allowed to cover (the engine never lets that drop
/// below the per-robot minimum movement).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryChoices {
    pub byzantine_placements: BTreeMap<RobotId, Scalar>,
    pub stop_fractions: BTreeMap<RobotId, Scalar>,
}

/// One cycle of the run, as recorded in the trace.
///
/// `time` is the index of the configuration the cycle started from.
/// `snapshot` is the shared observation of every activated robot after
/// Byzantine repositioning; `destinations` and `end_positions` cover exactly
/// the activated correct robots; `correct_diameter` is the diameter of the
/// correct robots after the cycle completed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: u64,
    pub activated: BTreeSet<RobotId>,
    pub snapshot: PointMultiset,
    pub destinations: BTreeMap<RobotId, Scalar>,
    pub end_positions: BTreeMap<RobotId, Scalar>,
    pub correct_diameter: Scalar,
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome")]
pub enum Terminal {
    /// First cycle index at which the correct diameter was below epsilon.
    Converged { t_epsilon: u64 },
    /// The cycle budget ran out first.
    CycleLimit,
    /// The scheduler or the destination rule failed.
    Error { error: SimError },
}

/// A complete run: parameters, initial configuration, per-cycle events and
/// the terminal outcome. Events cover consecutive cycles starting at the
/// initial configuration's time zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub params: SimulationParams,
    pub initial: Configuration,
    pub events: Vec<TraceEvent>,
    pub terminal: Terminal,
}

impl Trace {
    /// Correct-robot diameter at configuration time `t` (0 = initial).
    /// `None` past the end of the run.
    pub fn diameter_at(&self, t: u64) -> Option<Scalar> {
        if t == 0 {
            correct_positions(&self.initial).diameter().ok()
        } else {
            self.events
                .get(t as usize - 1)
                .map(|e| e.correct_diameter.clone())
        }
    }

    /// Number of configurations in the run (initial plus one per event).
    pub fn horizon(&self) -> u64 {
        self.events.len() as u64 + 1
    }

    /// The activation log, one set per cycle.
    pub fn activation_log(&self) -> Vec<BTreeSet<RobotId>> {
        self.events.iter().map(|e| e.activated.clone()).collect()
    }

    pub fn converged(&self) -> bool {
        matches!(self.terminal, Terminal::Converged { .. })
    }
}

fn apply_placements(
    config: &Configuration,
    placements: &BTreeMap<RobotId, Scalar>,
) -> Result<Configuration, SimError> {
    let mut robots = config.robots.clone();
    for (id, position) in placements {
        match robots.iter_mut().find(|r| r.id == *id) {
            Some(robot) if robot.kind == RobotKind::Byzantine => {
                robot.position = position.clone();
            }
            _ => {
                return Err(SimError::InvalidPrecondition(format!(
                    "placement for {id} does not name a Byzantine robot"
                )))
            }
        }
    }
    Ok(Configuration {
        time: config.time,
        robots,
        params: config.params.clone(),
    })
}

/// Execute one atomic cycle.
///
/// Byzantine robots are repositioned first, all activated robots observe the
/// same snapshot and compute their destination, then each moves toward it by
/// `max(min(delta_i, dist), fraction * dist)`: the adversary picks the stop
/// fraction but can neither cut a move below the guaranteed minimum nor push
/// a robot past its destination.
pub fn step(
    config: &Configuration,
    activated: &BTreeSet<RobotId>,
    choices: &AdversaryChoices,
    algorithm: &dyn RobotAlgorithm,
) -> Result<(Configuration, TraceEvent), SimError> {
    if activated.is_empty() {
        return Err(SimError::SchedulerContractViolation(
            "empty activation set".into(),
        ));
    }
    for id in activated {
        match config.robot(*id) {
            Some(robot) if robot.kind == RobotKind::Correct => {}
            _ => {
                return Err(SimError::SchedulerContractViolation(format!(
                    "activated {id} is not a correct robot"
                )))
            }
        }
    }
    for (id, fraction) in &choices.stop_fractions {
        if !activated.contains(id) {
            return Err(SimError::InvalidPrecondition(format!(
                "stop fraction for non-activated robot {id}"
            )));
        }
        if fraction.is_negative() || fraction > &Scalar::one() {
            return Err(SimError::InvalidPrecondition(format!(
                "stop fraction {fraction} for {id} outside [0, 1]"
            )));
        }
    }

    let placed = apply_placements(config, &choices.byzantine_placements)?;
    let snapshot = observed_snapshot(&placed);
    // Oblivious rule over a shared snapshot: one destination for everyone
    // activated this cycle.
    let destination = algorithm.destination(&snapshot, config.params.f)?;

    let mut robots = placed.robots.clone();
    let mut destinations = BTreeMap::new();
    let mut end_positions = BTreeMap::new();
    for robot in robots.iter_mut() {
        if !activated.contains(&robot.id) {
            continue;
        }
        let dist = (&destination - &robot.position).abs();
        let end = if dist.is_zero() {
            robot.position.clone()
        } else {
            let fraction = choices
                .stop_fractions
                .get(&robot.id)
                .cloned()
                .unwrap_or_else(Scalar::zero);
            let floor = robot.delta.clone().min(dist.clone());
            let moved = floor.max(fraction * &dist);
            let direction = Scalar::from_int((&destination - &robot.position).signum() as i64);
            &robot.position + direction * moved
        };
        destinations.insert(robot.id, destination.clone());
        end_positions.insert(robot.id, end.clone());
        robot.position = end;
        robot.pending_destination = None;
    }

    let next = Configuration {
        time: config.time + 1,
        robots,
        params: config.params.clone(),
    };
    let correct_diameter = correct_positions(&next)
        .diameter()
        .expect("f < n leaves at least one correct robot");
    let event = TraceEvent {
        time: config.time,
        activated: activated.clone(),
        snapshot,
        destinations,
        end_positions,
        correct_diameter,
    };
    Ok((next, event))
}

/// Run until the correct diameter drops below epsilon, the cycle budget runs
/// out, or the scheduler / destination rule fails. Identical inputs produce
/// byte-identical traces.
pub fn run(
    initial: &Configuration,
    scheduler: &mut SchedulerPolicy,
    adversary: &mut Adversary,
    algorithm: &dyn RobotAlgorithm,
) -> Trace {
    let params = initial.params.clone();
    let correct_ids = initial.correct_ids();
    let mut config = initial.clone();
    let mut events: Vec<TraceEvent> = Vec::new();
    let mut log: Vec<BTreeSet<RobotId>> = Vec::new();

    let terminal = loop {
        let diameter = correct_positions(&config)
            .diameter()
            .expect("f < n leaves at least one correct robot");
        if diameter < params.epsilon {
            break Terminal::Converged {
                t_epsilon: config.time,
            };
        }
        if config.time >= params.max_cycles {
            break Terminal::CycleLimit;
        }

        let activated = match scheduler.next_activation(&log, &correct_ids) {
            Ok(set) => set,
            Err(error) => break Terminal::Error { error },
        };
        let placements = adversary.byzantine.place_byzantine(&config, &events);
        let placed = match apply_placements(&config, &placements) {
            Ok(c) => c,
            Err(error) => break Terminal::Error { error },
        };
        // The stop policy sees positions, the shared destination and deltas
        // of the activated robots. The destination is recomputed inside
        // `step` from the same snapshot, so both sides agree.
        let destination = match algorithm.destination(&observed_snapshot(&placed), params.f) {
            Ok(d) => d,
            Err(error) => break Terminal::Error { error },
        };
        let mut positions = BTreeMap::new();
        let mut destinations = BTreeMap::new();
        let mut deltas = BTreeMap::new();
        for id in &activated {
            let robot = config.robot(*id).expect("activated ids validated");
            positions.insert(*id, robot.position.clone());
            destinations.insert(*id, destination.clone());
            deltas.insert(*id, robot.delta.clone());
        }
        let stop_fractions =
            adversary
                .stops
                .choose_stops(&activated, &positions, &destinations, &deltas, log.len());
        let choices = AdversaryChoices {
            byzantine_placements: placements,
            stop_fractions,
        };
        match step(&config, &activated, &choices, algorithm) {
            Ok((next, event)) => {
                log.push(event.activated.clone());
                events.push(event);
                config = next;
            }
            Err(error) => break Terminal::Error { error },
        }
    };

    Trace {
        params,
        initial: initial.clone(),
        events,
        terminal,
    }
}
