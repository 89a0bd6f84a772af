//! Robot and network state.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::multiset::PointMultiset;
use crate::scalar::Scalar;

/// Opaque robot identifier, unique within a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RobotId(pub u32);

impl std::fmt::Display for RobotId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "r{}", self.0)
    }
}

// Manual Deserialize: ids appear both as JSON numbers (in sets and values)
// and as JSON object keys, where they arrive as strings.
impl<'de> Deserialize<'de> for RobotId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct IdVisitor;
        impl serde::de::Visitor<'_> for IdVisitor {
            type Value = RobotId;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a robot id")
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<RobotId, E> {
                u32::try_from(v)
                    .map(RobotId)
                    .map_err(|_| E::custom(format!("robot id {v} out of range")))
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<RobotId, E> {
                v.parse::<u32>()
                    .map(RobotId)
                    .map_err(|_| E::custom(format!("invalid robot id {v:?}")))
            }
        }
        deserializer.deserialize_any(IdVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RobotKind {
    Correct,
    Byzantine,
}

/// One robot: identity, fault kind, current position, the destination it has
/// computed but not yet finished moving to (always settled within a cycle in
/// the atomic model, so `None` at every cycle boundary), and its guaranteed
/// minimum movement distance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotState {
    pub id: RobotId,
    pub kind: RobotKind,
    pub position: Scalar,
    pub pending_destination: Option<Scalar>,
    pub delta: Scalar,
}

impl RobotState {
    pub fn new(id: RobotId, kind: RobotKind, position: Scalar, delta: Scalar) -> Self {
        assert!(delta.is_positive(), "robot delta must be positive");
        RobotState {
            id,
            kind,
            position,
            pending_destination: None,
            delta,
        }
    }
}

/// Run-wide parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationParams {
    /// Total number of robots.
    pub n: usize,
    /// Number of Byzantine robots.
    pub f: usize,
    /// Minimum guaranteed movement, applied to every robot unless the
    /// configuration overrides it per robot.
    pub delta_default: Scalar,
    /// Convergence threshold on the correct-robot diameter.
    pub epsilon: Scalar,
    /// Cycle budget before the run stops unconverged.
    pub max_cycles: u64,
    /// Seed for every randomized policy in the run.
    pub seed: u64,
}

impl SimulationParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n == 0 {
            return Err(SimError::InvalidPrecondition("n must be positive".into()));
        }
        if self.f >= self.n {
            return Err(SimError::InvalidPrecondition(format!(
                "f = {} must be smaller than n = {}",
                self.f, self.n
            )));
        }
        if !self.delta_default.is_positive() {
            return Err(SimError::InvalidPrecondition(
                "delta_default must be positive".into(),
            ));
        }
        if !self.epsilon.is_positive() {
            return Err(SimError::InvalidPrecondition(
                "epsilon must be positive".into(),
            ));
        }
        if self.max_cycles == 0 {
            return Err(SimError::InvalidPrecondition(
                "max_cycles must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Full network state at one cycle index. Immutable once built; the engine
/// produces a fresh configuration each cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    pub time: u64,
    pub robots: Vec<RobotState>,
    pub params: SimulationParams,
}

impl Configuration {
    /// Build and validate: unique ids, exactly `f` Byzantine robots, `n`
    /// robots total, positive deltas.
    pub fn new(
        time: u64,
        robots: Vec<RobotState>,
        params: SimulationParams,
    ) -> Result<Self, SimError> {
        params.validate()?;
        if robots.len() != params.n {
            return Err(SimError::InvalidPrecondition(format!(
                "configuration has {} robots but n = {}",
                robots.len(),
                params.n
            )));
        }
        let byzantine = robots
            .iter()
            .filter(|r| r.kind == RobotKind::Byzantine)
            .count();
        if byzantine != params.f {
            return Err(SimError::InvalidPrecondition(format!(
                "configuration has {} Byzantine robots but f = {}",
                byzantine, params.f
            )));
        }
        let mut ids = BTreeSet::new();
        for robot in &robots {
            if !robot.delta.is_positive() {
                return Err(SimError::InvalidPrecondition(format!(
                    "robot {} has nonpositive delta",
                    robot.id
                )));
            }
            if !ids.insert(robot.id) {
                return Err(SimError::InvalidPrecondition(format!(
                    "duplicate robot id {}",
                    robot.id
                )));
            }
        }
        Ok(Configuration {
            time,
            robots,
            params,
        })
    }

    /// Convenience constructor: correct robots get ids `1..=m` in the order
    /// given, Byzantine robots `m+1..=n`, and every robot the default delta.
    pub fn from_positions(
        correct: &[Scalar],
        byzantine: &[Scalar],
        params: SimulationParams,
    ) -> Result<Self, SimError> {
        if correct.len() + byzantine.len() != params.n || byzantine.len() != params.f {
            return Err(SimError::InvalidPrecondition(format!(
                "{} correct + {} Byzantine positions do not match n = {}, f = {}",
                correct.len(),
                byzantine.len(),
                params.n,
                params.f
            )));
        }
        let mut robots = Vec::with_capacity(params.n);
        let mut next_id = 1u32;
        for pos in correct {
            robots.push(RobotState::new(
                RobotId(next_id),
                RobotKind::Correct,
                pos.clone(),
                params.delta_default.clone(),
            ));
            next_id += 1;
        }
        for pos in byzantine {
            robots.push(RobotState::new(
                RobotId(next_id),
                RobotKind::Byzantine,
                pos.clone(),
                params.delta_default.clone(),
            ));
            next_id += 1;
        }
        Configuration::new(0, robots, params)
    }

    pub fn robot(&self, id: RobotId) -> Option<&RobotState> {
        self.robots.iter().find(|r| r.id == id)
    }

    pub fn correct_ids(&self) -> Vec<RobotId> {
        self.robots
            .iter()
            .filter(|r| r.kind == RobotKind::Correct)
            .map(|r| r.id)
            .collect()
    }

    pub fn byzantine_ids(&self) -> Vec<RobotId> {
        self.robots
            .iter()
            .filter(|r| r.kind == RobotKind::Byzantine)
            .map(|r| r.id)
            .collect()
    }
}

/// Positions of the correct robots, multiplicities intact.
pub fn correct_positions(config: &Configuration) -> PointMultiset {
    config
        .robots
        .iter()
        .filter(|r| r.kind == RobotKind::Correct)
        .map(|r| r.position.clone())
        .collect()
}

/// Snapshot of all robot positions, correct and Byzantine alike, with exact
/// occupancy counts. This is what every activated robot observes.
pub fn observed_snapshot(config: &Configuration) -> PointMultiset {
    config.robots.iter().map(|r| r.position.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, f: usize) -> SimulationParams {
        SimulationParams {
            n,
            f,
            delta_default: Scalar::one(),
            epsilon: Scalar::new(1, 100),
            max_cycles: 100,
            seed: 0,
        }
    }

    fn ints(values: &[i64]) -> Vec<Scalar> {
        values.iter().map(|&v| Scalar::from_int(v)).collect()
    }

    #[test]
    fn correct_positions_filters_and_keeps_multiplicity() {
        let config =
            Configuration::from_positions(&ints(&[0, 8]), &ints(&[100]), params(3, 1)).unwrap();
        assert_eq!(
            correct_positions(&config),
            ints(&[0, 8]).into_iter().collect()
        );

        let config = Configuration::from_positions(&ints(&[3, 3, 5]), &[], params(3, 0)).unwrap();
        let positions = correct_positions(&config);
        assert_eq!(positions.count(&Scalar::from_int(3)), 2);
        assert_eq!(positions.cardinality(), 3);
    }

    #[test]
    fn snapshot_is_the_multiset_union() {
        let config =
            Configuration::from_positions(&ints(&[0, 8]), &ints(&[100]), params(3, 1)).unwrap();
        assert_eq!(
            observed_snapshot(&config),
            ints(&[0, 8, 100]).into_iter().collect()
        );

        // Occupancy counts stay visible: four at 0, two at 1.
        let config =
            Configuration::from_positions(&ints(&[0, 0, 0, 0]), &ints(&[1, 1]), params(6, 2))
                .unwrap();
        let snapshot = observed_snapshot(&config);
        assert_eq!(snapshot.count(&Scalar::zero()), 4);
        assert_eq!(snapshot.count(&Scalar::one()), 2);

        // f = 0: the snapshot is exactly the correct positions.
        let config = Configuration::from_positions(&ints(&[2, 5]), &[], params(2, 0)).unwrap();
        assert_eq!(observed_snapshot(&config), correct_positions(&config));
    }

    #[test]
    fn snapshot_equals_correct_merged_with_byzantine() {
        let config =
            Configuration::from_positions(&ints(&[0, 5, 5]), &ints(&[5, 9]), params(5, 2)).unwrap();
        let byz: PointMultiset = config
            .robots
            .iter()
            .filter(|r| r.kind == RobotKind::Byzantine)
            .map(|r| r.position.clone())
            .collect();
        assert_eq!(
            correct_positions(&config).merge(&byz),
            observed_snapshot(&config)
        );
    }

    #[test]
    fn invariants_are_enforced() {
        // f >= n.
        assert!(SimulationParams {
            f: 3,
            ..params(3, 3)
        }
        .validate()
        .is_err());
        // Count mismatches.
        assert!(Configuration::from_positions(&ints(&[0]), &ints(&[1]), params(3, 1)).is_err());
        assert!(
            Configuration::from_positions(&ints(&[0, 1]), &ints(&[2, 3]), params(4, 1)).is_err()
        );
        // Duplicate ids.
        let p = params(2, 0);
        let robots = vec![
            RobotState::new(
                RobotId(1),
                RobotKind::Correct,
                Scalar::zero(),
                Scalar::one(),
            ),
            RobotState::new(RobotId(1), RobotKind::Correct, Scalar::one(), Scalar::one()),
        ];
        assert!(Configuration::new(0, robots, p).is_err());
    }
}
