//! Byzantine placement strategies, movement-stopping policies, and the
//! oscillation adversary that defeats convergence under a fair scheduler.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::TraceEvent;
use crate::error::SimError;
use crate::scalar::Scalar;
use crate::scheduler::SchedulerPolicy;
use crate::state::{correct_positions, observed_snapshot, Configuration, RobotId, RobotKind};

/// Random fractions are drawn with this denominator so they stay exact and
/// keep denominator growth linear over a run.
const FRACTION_DENOM: i64 = 4096;

/// Where the Byzantine robots go each cycle.
#[derive(Debug, Clone)]
pub enum ByzantineStrategy {
    /// Constant positions, assigned to Byzantine ids in order.
    Fixed(Vec<Scalar>),
    /// All Byzantine robots at `max(U) + offset`.
    TrackMax { offset: Scalar },
    /// All Byzantine robots at `min(U) - offset`.
    TrackMin { offset: Scalar },
    /// The two-sided oscillation schedule; see [`oscillation_controller`].
    OscillationScript(Box<OscillationState>),
    /// Uniform positions within the current range of all robots.
    RandomInRange {
        seed: u64,
        rng: Option<Box<ChaCha8Rng>>,
    },
    /// Per-cycle placement lists, repeated cyclically. Covers adversaries
    /// that relocate the faulty robots on a fixed schedule.
    Scripted(Vec<Vec<Scalar>>),
}

impl ByzantineStrategy {
    pub fn track_max(offset: Scalar) -> Self {
        ByzantineStrategy::TrackMax { offset }
    }

    pub fn track_min(offset: Scalar) -> Self {
        ByzantineStrategy::TrackMin { offset }
    }

    pub fn random_in_range(seed: u64) -> Self {
        ByzantineStrategy::RandomInRange { seed, rng: None }
    }

    /// One position per Byzantine robot for this cycle. Ids missing from the
    /// result keep their current position.
    pub fn place_byzantine(
        &mut self,
        config: &Configuration,
        history: &[TraceEvent],
    ) -> BTreeMap<RobotId, Scalar> {
        let byz_ids = config.byzantine_ids();
        match self {
            ByzantineStrategy::Fixed(positions) => {
                if positions.is_empty() {
                    return BTreeMap::new();
                }
                byz_ids
                    .iter()
                    .enumerate()
                    .map(|(i, &id)| (id, positions[i % positions.len()].clone()))
                    .collect()
            }
            ByzantineStrategy::TrackMax { offset } => {
                let correct = correct_positions(config);
                let target = correct.max().expect("f < n") + &*offset;
                byz_ids.iter().map(|&id| (id, target.clone())).collect()
            }
            ByzantineStrategy::TrackMin { offset } => {
                let correct = correct_positions(config);
                let target = correct.min().expect("f < n") - &*offset;
                byz_ids.iter().map(|&id| (id, target.clone())).collect()
            }
            ByzantineStrategy::OscillationScript(state) => {
                let correct = correct_positions(config);
                let target = match state.current_side() {
                    PhaseSide::Right => correct.max().expect("f < n") + Scalar::one(),
                    PhaseSide::Left => correct.min().expect("f < n") - Scalar::one(),
                };
                state.advance();
                byz_ids.iter().map(|&id| (id, target.clone())).collect()
            }
            ByzantineStrategy::RandomInRange { seed, rng } => {
                let rng = rng.get_or_insert_with(|| Box::new(ChaCha8Rng::seed_from_u64(*seed)));
                let (lo, hi) = observed_snapshot(config).range().expect("n >= 1");
                let span = &hi - &lo;
                byz_ids
                    .iter()
                    .map(|&id| {
                        let numer = rng.gen_range(0..=FRACTION_DENOM);
                        (id, &lo + &span * Scalar::new(numer, FRACTION_DENOM))
                    })
                    .collect()
            }
            ByzantineStrategy::Scripted(script) => {
                if script.is_empty() {
                    return BTreeMap::new();
                }
                let positions = &script[history.len() % script.len()];
                if positions.is_empty() {
                    return BTreeMap::new();
                }
                byz_ids
                    .iter()
                    .enumerate()
                    .map(|(i, &id)| (id, positions[i % positions.len()].clone()))
                    .collect()
            }
        }
    }
}

/// How far activated robots get to move. The engine clamps every move up to
/// the per-robot guaranteed minimum, so a policy can only choose within
/// what the movement guarantee allows.
#[derive(Debug, Clone)]
pub enum StopPolicy {
    /// Fraction 1: every robot reaches its destination.
    FullMove,
    /// Fraction 0: every robot moves only its guaranteed minimum.
    MinDelta,
    /// Seeded fractions in [0, 1].
    RandomFraction {
        seed: u64,
        rng: Option<Box<ChaCha8Rng>>,
    },
    /// Per-cycle fraction maps; activated robots not named move fully.
    Scripted(Vec<BTreeMap<RobotId, Scalar>>),
}

impl StopPolicy {
    pub fn random_fraction(seed: u64) -> Self {
        StopPolicy::RandomFraction { seed, rng: None }
    }

    /// Stop fractions for this cycle, covering every activated robot.
    pub fn choose_stops(
        &mut self,
        activated: &BTreeSet<RobotId>,
        _positions: &BTreeMap<RobotId, Scalar>,
        _destinations: &BTreeMap<RobotId, Scalar>,
        _deltas: &BTreeMap<RobotId, Scalar>,
        cycle: usize,
    ) -> BTreeMap<RobotId, Scalar> {
        match self {
            StopPolicy::FullMove => activated.iter().map(|&id| (id, Scalar::one())).collect(),
            StopPolicy::MinDelta => activated.iter().map(|&id| (id, Scalar::zero())).collect(),
            StopPolicy::RandomFraction { seed, rng } => {
                let rng = rng.get_or_insert_with(|| Box::new(ChaCha8Rng::seed_from_u64(*seed)));
                activated
                    .iter()
                    .map(|&id| {
                        let numer = rng.gen_range(0..=FRACTION_DENOM);
                        (id, Scalar::new(numer, FRACTION_DENOM))
                    })
                    .collect()
            }
            StopPolicy::Scripted(script) => {
                let scripted = script.get(cycle);
                activated
                    .iter()
                    .map(|&id| {
                        let fraction = scripted
                            .and_then(|m| m.get(&id).cloned())
                            .unwrap_or_else(Scalar::one);
                        (id, fraction)
                    })
                    .collect()
            }
        }
    }
}

/// A placement strategy paired with a stop policy.
#[derive(Debug, Clone)]
pub struct Adversary {
    pub byzantine: ByzantineStrategy,
    pub stops: StopPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseSide {
    Right,
    Left,
}

/// Cursor state of the oscillation placement script: which side the faulty
/// robots sit on each cycle, and the current granularity (halved at every
/// phase-pair boundary).
#[derive(Debug, Clone)]
pub struct OscillationState {
    sides: Vec<PhaseSide>,
    pair_starts: Vec<usize>,
    cycle: usize,
    d: Scalar,
    phase_step: u64,
}

impl OscillationState {
    fn new(sides: Vec<PhaseSide>, pair_starts: Vec<usize>, initial_d: Scalar) -> Self {
        OscillationState {
            sides,
            pair_starts,
            cycle: 0,
            d: initial_d,
            phase_step: 0,
        }
    }

    pub fn current_side(&self) -> PhaseSide {
        self.sides
            .get(self.cycle)
            .copied()
            .unwrap_or(PhaseSide::Right)
    }

    /// Granularity for the current phase pair.
    pub fn granularity(&self) -> &Scalar {
        &self.d
    }

    fn advance(&mut self) {
        self.cycle += 1;
        self.phase_step += 1;
        if self.pair_starts.contains(&self.cycle) {
            self.d = self.d.half();
            self.phase_step = 0;
        }
    }
}

/// The full oscillation script: scheduler, placement and stop policies plus
/// the bookkeeping the scenario assertions need.
#[derive(Debug, Clone)]
pub struct OscillationController {
    pub scheduler: SchedulerPolicy,
    pub byzantine: ByzantineStrategy,
    pub stops: StopPolicy,
    /// Total scripted cycles; the run budget should equal this.
    pub total_cycles: u64,
    /// Length of each phase pair, in cycles.
    pub pair_lengths: Vec<u64>,
    /// Window (max pair length) for the fairness check: every correct robot
    /// is activated at least once per phase pair.
    pub fairness_window: usize,
    /// Initial granularity `diam / 100`.
    pub initial_granularity: Scalar,
    /// Smallest nonzero move among the partial-stop cycles; any per-robot
    /// delta at or below this keeps the engine on the planned path. `None`
    /// when every scripted cycle is a full move.
    pub min_fractional_move: Option<Scalar>,
}

impl OscillationController {
    pub fn recommended_delta(&self) -> Scalar {
        match &self.min_fractional_move {
            Some(min_move) => min_move.clone().min(self.initial_granularity.clone()),
            None => self.initial_granularity.clone(),
        }
    }
}

/// Positions of the planner's working copy, sorted by position with ties
/// broken by id.
fn sorted_ids(positions: &BTreeMap<RobotId, Scalar>) -> Vec<RobotId> {
    let mut ids: Vec<RobotId> = positions.keys().copied().collect();
    ids.sort_by(|a, b| positions[a].cmp(&positions[b]).then(a.cmp(b)));
    ids
}

/// Build the two-sided oscillation adversary for `phase_pairs` phase pairs.
///
/// Each phase pins the faulty robots outside one end of the correct range so
/// the trimmed snapshot spans from the (f+1)-th order statistic to the far
/// end. Activating the interior block then moves it to the midpoint of that
/// span, halving the span each cycle. Once one more halving would overshoot
/// the granularity `d`, a single partial-stop cycle lands the span on `d`
/// exactly, and the far-end robot is activated once, moving `d/2`. The
/// mirrored phase does the same on the other side, after which `d` halves
/// and the whole pair repeats. Every correct robot is activated at least
/// once per pair, yet the diameter never drops by more than twice the
/// initial granularity over the entire infinite schedule.
pub fn oscillation_controller(
    initial: &Configuration,
    phase_pairs: u32,
) -> Result<OscillationController, SimError> {
    let n = initial.params.n;
    let f = initial.params.f;
    if n <= 3 * f {
        return Err(SimError::InvalidPrecondition(format!(
            "oscillation adversary needs n > 3f, got n = {n}, f = {f}"
        )));
    }
    if phase_pairs == 0 {
        return Err(SimError::InvalidPrecondition(
            "at least one phase pair is required".into(),
        ));
    }
    let mut positions: BTreeMap<RobotId, Scalar> = initial
        .robots
        .iter()
        .filter(|r| r.kind == RobotKind::Correct)
        .map(|r| (r.id, r.position.clone()))
        .collect();
    let m = positions.len();
    {
        let mut values: Vec<&Scalar> = positions.values().collect();
        values.sort();
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Err(SimError::InvalidPrecondition(
                "correct robots must start at pairwise distinct positions".into(),
            ));
        }
    }

    let order = sorted_ids(&positions);
    let d0 = &positions[order.last().unwrap()] - &positions[&order[0]];
    if !d0.is_positive() {
        return Err(SimError::InvalidPrecondition(
            "oscillation needs a positive initial correct diameter".into(),
        ));
    }
    let mut d = &d0 / Scalar::from_int(100);
    let initial_granularity = d.clone();

    let mut schedule: Vec<BTreeSet<RobotId>> = Vec::new();
    let mut sides: Vec<PhaseSide> = Vec::new();
    let mut stop_script: Vec<BTreeMap<RobotId, Scalar>> = Vec::new();
    let mut pair_starts: Vec<usize> = Vec::new();
    let mut pair_lengths: Vec<u64> = Vec::new();
    let mut min_fractional_move: Option<Scalar> = None;

    let record_move = |value: Scalar, min_slot: &mut Option<Scalar>| {
        if value.is_positive() {
            match min_slot {
                Some(current) if *current <= value => {}
                _ => *min_slot = Some(value),
            }
        }
    };

    for _ in 0..phase_pairs {
        pair_starts.push(schedule.len());
        let pair_start = schedule.len();
        for side in [PhaseSide::Right, PhaseSide::Left] {
            // Span endpoints: with the faulty robots pinned on `side`, the
            // trimmed snapshot runs between these two order statistics. The
            // block ranks are everything in between except the far end.
            let (near_rank, far_rank, block_ranks) = match side {
                PhaseSide::Right => (f, m - 1, f..m - 1),
                PhaseSide::Left => (m - f - 1, 0, 1..m - f),
            };
            loop {
                let order = sorted_ids(&positions);
                let near = positions[&order[near_rank]].clone();
                let far = positions[&order[far_rank]].clone();
                let gap = (&far - &near).abs();
                if gap <= d {
                    break;
                }
                let dest = (&near + &far).half();
                let block_ids: BTreeSet<RobotId> =
                    block_ranks.clone().map(|rank| order[rank]).collect();
                let two_d = &d + &d;
                if gap > two_d {
                    // Full halving cycle.
                    schedule.push(block_ids.clone());
                    sides.push(side);
                    stop_script.push(BTreeMap::new());
                    for id in &block_ids {
                        positions.insert(*id, dest.clone());
                    }
                } else {
                    // Partial-stop cycle landing the span exactly on d.
                    let fraction = (&gap - &d) * Scalar::from_int(2) / &gap;
                    let mut fractions = BTreeMap::new();
                    for id in &block_ids {
                        let before = positions[id].clone();
                        let after = &before + &fraction * (&dest - &before);
                        record_move((&after - &before).abs(), &mut min_fractional_move);
                        positions.insert(*id, after);
                        fractions.insert(*id, fraction.clone());
                    }
                    schedule.push(block_ids);
                    sides.push(side);
                    stop_script.push(fractions);
                    break;
                }
            }
            // Activate the far-end robot once: it moves half the remaining
            // span (exactly d/2 when the span landed on d).
            let order = sorted_ids(&positions);
            let near = positions[&order[near_rank]].clone();
            let far_id = order[far_rank];
            let dest = (&near + &positions[&far_id]).half();
            schedule.push([far_id].into_iter().collect());
            sides.push(side);
            stop_script.push(BTreeMap::new());
            positions.insert(far_id, dest);
        }
        pair_lengths.push((schedule.len() - pair_start) as u64);
        d = d.half();
    }

    let fairness_window = pair_lengths.iter().copied().max().unwrap_or(1) as usize;
    let total_cycles = schedule.len() as u64;
    // The granularity halves at the start of every pair after the first.
    let pair_starts: Vec<usize> = pair_starts.into_iter().skip(1).collect();

    Ok(OscillationController {
        scheduler: SchedulerPolicy::Scripted(schedule),
        byzantine: ByzantineStrategy::OscillationScript(Box::new(OscillationState::new(
            sides,
            pair_starts,
            initial_granularity.clone(),
        ))),
        stops: StopPolicy::Scripted(stop_script),
        total_cycles,
        pair_lengths,
        fairness_window,
        initial_granularity,
        min_fractional_move,
    })
}
