//! Activation policies.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::SimError;
use crate::state::RobotId;

/// Who runs each cycle.
///
/// A policy instance belongs to a single run: the k-bounded variant carries
/// pair counters and an RNG, and the scripted variant is consumed by cursor
/// (derived from the activation history length, so replaying a prefix of the
/// history replays the schedule).
#[derive(Debug, Clone)]
pub enum SchedulerPolicy {
    /// Every correct robot, every cycle.
    FullySync,
    /// Singletons in id order, wrapping around.
    RoundRobinFair,
    /// Random nonempty subsets, never letting any robot be activated more
    /// than `k` times between two activations of another.
    KBoundedRandom {
        k: u64,
        seed: u64,
        state: Option<Box<KBoundedState>>,
    },
    /// A fixed sequence of activation sets.
    Scripted(Vec<BTreeSet<RobotId>>),
}

impl SchedulerPolicy {
    pub fn k_bounded(k: u64, seed: u64) -> Self {
        SchedulerPolicy::KBoundedRandom {
            k,
            seed,
            state: None,
        }
    }

    /// Pick the next activation set given the activation log so far.
    pub fn next_activation(
        &mut self,
        history: &[BTreeSet<RobotId>],
        correct_ids: &[RobotId],
    ) -> Result<BTreeSet<RobotId>, SimError> {
        if correct_ids.is_empty() {
            return Err(SimError::SchedulerContractViolation(
                "no correct robots to activate".into(),
            ));
        }
        match self {
            SchedulerPolicy::FullySync => Ok(correct_ids.iter().copied().collect()),
            SchedulerPolicy::RoundRobinFair => {
                let mut sorted: Vec<RobotId> = correct_ids.to_vec();
                sorted.sort();
                let index = history.len() % sorted.len();
                Ok([sorted[index]].into_iter().collect())
            }
            SchedulerPolicy::KBoundedRandom { k, seed, state } => {
                let state = state
                    .get_or_insert_with(|| Box::new(KBoundedState::new(*k, *seed, correct_ids)));
                state.next()
            }
            SchedulerPolicy::Scripted(script) => match script.get(history.len()) {
                Some(set) => Ok(set.clone()),
                None => Err(SimError::SchedulerExhausted {
                    cycles: history.len() as u64,
                }),
            },
        }
    }
}

/// Counters and RNG behind `KBoundedRandom`.
///
/// `since_last[i][j]` counts the cycles in which `j` was activated since
/// `i`'s most recent activation (counting from the start of the run, as if
/// every robot had been activated just before cycle zero). Keeping every
/// entry at most `k` makes every emitted log k-bounded by construction, and
/// bounds any robot's idle stretch by `k * (m - 1)` cycles, which is what the
/// windowed fairness check relies on.
#[derive(Debug, Clone)]
pub struct KBoundedState {
    k: u64,
    rng: ChaCha8Rng,
    ids: Vec<RobotId>,
    since_last: BTreeMap<RobotId, BTreeMap<RobotId, u64>>,
}

impl KBoundedState {
    fn new(k: u64, seed: u64, correct_ids: &[RobotId]) -> Self {
        let mut ids: Vec<RobotId> = correct_ids.to_vec();
        ids.sort();
        ids.dedup();
        let since_last = ids
            .iter()
            .map(|&i| {
                (
                    i,
                    ids.iter().filter(|&&j| j != i).map(|&j| (j, 0)).collect(),
                )
            })
            .collect();
        KBoundedState {
            k: k.max(1),
            rng: ChaCha8Rng::seed_from_u64(seed),
            ids,
            since_last,
        }
    }

    fn admissible(&self, candidate: &BTreeSet<RobotId>) -> bool {
        self.ids
            .iter()
            .filter(|i| !candidate.contains(i))
            .all(|i| candidate.iter().all(|j| self.since_last[i][j] < self.k))
    }

    fn next(&mut self) -> Result<BTreeSet<RobotId>, SimError> {
        let mut chosen: Option<BTreeSet<RobotId>> = None;
        for _ in 0..(4 * self.ids.len().max(8)) {
            let mut candidate: BTreeSet<RobotId> = self
                .ids
                .iter()
                .copied()
                .filter(|_| self.rng.gen_bool(0.5))
                .collect();
            if candidate.is_empty() {
                let pick = self.rng.gen_range(0..self.ids.len());
                candidate.insert(self.ids[pick]);
            }
            if self.admissible(&candidate) {
                chosen = Some(candidate);
                break;
            }
        }
        // Activating everyone is always admissible, so the bound can never
        // force a violation.
        let chosen = chosen.unwrap_or_else(|| self.ids.iter().copied().collect());
        for i in &self.ids {
            if chosen.contains(i) {
                for count in self.since_last.get_mut(i).unwrap().values_mut() {
                    *count = 0;
                }
            } else {
                let row = self.since_last.get_mut(i).unwrap();
                for j in &chosen {
                    *row.get_mut(j).unwrap() += 1;
                }
            }
        }
        Ok(chosen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{verify_fair, verify_k_bounded};

    fn ids(values: &[u32]) -> Vec<RobotId> {
        values.iter().map(|&v| RobotId(v)).collect()
    }

    fn set(values: &[u32]) -> BTreeSet<RobotId> {
        values.iter().map(|&v| RobotId(v)).collect()
    }

    #[test]
    fn fully_sync_activates_everyone() {
        let mut policy = SchedulerPolicy::FullySync;
        let mut history = Vec::new();
        for _ in 0..3 {
            let activated = policy.next_activation(&history, &ids(&[1, 2, 3])).unwrap();
            assert_eq!(activated, set(&[1, 2, 3]));
            history.push(activated);
        }
    }

    #[test]
    fn round_robin_rotates_singletons() {
        let mut policy = SchedulerPolicy::RoundRobinFair;
        let mut history = Vec::new();
        let expected = [set(&[1]), set(&[2]), set(&[1]), set(&[2])];
        for want in expected {
            let activated = policy.next_activation(&history, &ids(&[1, 2])).unwrap();
            assert_eq!(activated, want);
            history.push(activated);
        }
    }

    #[test]
    fn scripted_pops_in_order_then_exhausts() {
        let script = vec![set(&[2, 3]), set(&[1])];
        let mut policy = SchedulerPolicy::Scripted(script.clone());
        let mut history = Vec::new();
        for want in &script {
            let activated = policy.next_activation(&history, &ids(&[1, 2, 3])).unwrap();
            assert_eq!(&activated, want);
            history.push(activated);
        }
        assert_eq!(
            policy.next_activation(&history, &ids(&[1, 2, 3])),
            Err(SimError::SchedulerExhausted { cycles: 2 })
        );
    }

    #[test]
    fn empty_correct_set_is_a_contract_violation() {
        let mut policy = SchedulerPolicy::FullySync;
        assert!(matches!(
            policy.next_activation(&[], &[]),
            Err(SimError::SchedulerContractViolation(_))
        ));
    }

    #[test]
    fn k_bounded_logs_pass_the_bound_check() {
        for k in [1u64, 2, 3] {
            for seed in 0..10u64 {
                let robots = ids(&[1, 2, 3, 4]);
                let mut policy = SchedulerPolicy::k_bounded(k, seed);
                let mut log = Vec::new();
                for _ in 0..200 {
                    let activated = policy.next_activation(&log, &robots).unwrap();
                    assert!(!activated.is_empty());
                    log.push(activated);
                }
                assert!(verify_k_bounded(&log, k).is_empty(), "k={k} seed={seed}");
            }
        }
    }

    #[test]
    fn k_bounded_is_windowed_fair() {
        let robots = ids(&[1, 2, 3, 4]);
        let universe: BTreeSet<RobotId> = robots.iter().copied().collect();
        for (k, seed) in [(1u64, 7u64), (2, 11), (4, 13)] {
            let mut policy = SchedulerPolicy::k_bounded(k, seed);
            let mut log = Vec::new();
            for _ in 0..300 {
                let activated = policy.next_activation(&log, &robots).unwrap();
                log.push(activated);
            }
            let window = (k as usize) * robots.len();
            assert!(
                verify_fair(&log, &universe, window).is_empty(),
                "k={k} seed={seed}"
            );
        }
    }

    #[test]
    fn round_robin_log_is_one_bounded_and_fair() {
        let robots = ids(&[1, 2, 3]);
        let universe: BTreeSet<RobotId> = robots.iter().copied().collect();
        let mut policy = SchedulerPolicy::RoundRobinFair;
        let mut log = Vec::new();
        for _ in 0..30 {
            let activated = policy.next_activation(&log, &robots).unwrap();
            log.push(activated);
        }
        assert!(verify_k_bounded(&log, 1).is_empty());
        assert!(verify_fair(&log, &universe, robots.len()).is_empty());
    }
}
