//! Shared fixtures for the criterion benchmarks.

use byzsim_core::adversary::{Adversary, ByzantineStrategy, StopPolicy};
use byzsim_core::scheduler::SchedulerPolicy;
use byzsim_core::state::{Configuration, SimulationParams};
use byzsim_core::Scalar;

/// A correct-robot line spread over [0, 100] with one tracking Byzantine
/// robot, sized for throughput benchmarks.
pub fn spread_configuration(n: usize) -> Configuration {
    assert!(n >= 3);
    let m = n - 1;
    let params = SimulationParams {
        n,
        f: 1,
        delta_default: Scalar::new(1, 10),
        epsilon: Scalar::new(1, 100),
        max_cycles: 10_000,
        seed: 7,
    };
    let correct: Vec<Scalar> = (0..m)
        .map(|i| Scalar::from_int(100) * Scalar::new(i as i64, (m - 1) as i64))
        .collect();
    Configuration::from_positions(&correct, &[Scalar::from_int(101)], params).unwrap()
}

pub fn k_bounded_setup(n: usize, k: u64) -> (Configuration, SchedulerPolicy, Adversary) {
    let initial = spread_configuration(n);
    let scheduler = SchedulerPolicy::k_bounded(k, 11);
    let adversary = Adversary {
        byzantine: ByzantineStrategy::track_max(Scalar::one()),
        stops: StopPolicy::random_fraction(13),
    };
    (initial, scheduler, adversary)
}
