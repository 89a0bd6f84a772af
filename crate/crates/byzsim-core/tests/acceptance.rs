//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them). Every bound is
//! checked in exact rational arithmetic with zero tolerance.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use byzsim_core::adversary::{Adversary, ByzantineStrategy, StopPolicy};
use byzsim_core::algorithm::{compute_destination, trim_f, TrimmedMidrange};
use byzsim_core::analysis::{
    check_cautious, check_diameter_monotone, check_epoch_bound, verify_fair, verify_k_bounded,
};
use byzsim_core::engine::{run, Terminal, Trace};
use byzsim_core::scenario::{
    build_scenario, build_scenario_with, run_scenario, ScenarioAssertion, ScenarioOverrides,
    SCENARIO_NAMES,
};
use byzsim_core::scheduler::SchedulerPolicy;
use byzsim_core::state::{Configuration, RobotId, SimulationParams};
use byzsim_core::trace_io::trace_to_string;
use byzsim_core::{PointMultiset, Scalar};

fn criterion<F: FnOnce() -> Result<String, String>>(number: u32, name: &str, body: F) {
    match body() {
        Ok(details) => println!("criterion {number} ({name}): PASS [{details}]"),
        Err(details) => {
            println!("criterion {number} ({name}): FAIL [{details}]");
            panic!("criterion {number} ({name}) failed: {details}");
        }
    }
}

fn rational(rng: &mut ChaCha8Rng) -> Scalar {
    Scalar::new(
        rng.gen_range(-1_000_000..=1_000_000),
        rng.gen_range(1..=1000),
    )
}

/// The randomized run corpus shared by the cautiousness and monotonicity
/// criteria: n in [3, 12], f < n/2, random rational positions, a mix of
/// schedulers, stop policies and Byzantine strategies.
fn randomized_corpus(count: usize) -> Vec<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE97);
    let mut traces = Vec::with_capacity(count);
    for index in 0..count {
        let n = rng.gen_range(3..=12usize);
        let f = rng.gen_range(0..=(n - 1) / 2);
        let m = n - f;
        let correct: Vec<Scalar> = (0..m).map(|_| rational(&mut rng)).collect();
        let byzantine: Vec<Scalar> = (0..f).map(|_| rational(&mut rng)).collect();
        let params = SimulationParams {
            n,
            f,
            delta_default: Scalar::new(rng.gen_range(1..=500), rng.gen_range(1..=100)),
            epsilon: Scalar::new(1, 1_000_000),
            max_cycles: 12,
            seed: index as u64,
        };
        let initial = Configuration::from_positions(&correct, &byzantine, params).unwrap();
        let mut scheduler = match index % 3 {
            0 => SchedulerPolicy::FullySync,
            1 => SchedulerPolicy::RoundRobinFair,
            _ => SchedulerPolicy::k_bounded(rng.gen_range(1..=3), rng.gen()),
        };
        let byz_strategy = match index % 3 {
            0 => ByzantineStrategy::track_max(rational(&mut rng).abs()),
            1 => ByzantineStrategy::Fixed((0..f).map(|_| rational(&mut rng)).collect()),
            _ => ByzantineStrategy::random_in_range(rng.gen()),
        };
        let stops = match (index / 3) % 3 {
            0 => StopPolicy::FullMove,
            1 => StopPolicy::MinDelta,
            _ => StopPolicy::random_fraction(rng.gen()),
        };
        let mut adversary = Adversary {
            byzantine: byz_strategy,
            stops,
        };
        traces.push(run(
            &initial,
            &mut scheduler,
            &mut adversary,
            &TrimmedMidrange,
        ));
    }
    traces
}

#[test]
fn criterion_1_cautiousness() {
    criterion(1, "cautiousness", || {
        let traces = randomized_corpus(1_000);
        let mut cycles = 0usize;
        for (i, trace) in traces.iter().enumerate() {
            cycles += trace.events.len();
            let violations = check_cautious(trace);
            if !violations.is_empty() {
                return Err(format!(
                    "run {i}: {} violations, first: {}",
                    violations.len(),
                    violations[0].details
                ));
            }
        }
        Ok(format!(
            "1000 randomized runs, {cycles} recorded cycles, zero violations"
        ))
    });
}

#[test]
fn criterion_2_diameter_monotonicity() {
    criterion(2, "diameter monotonicity", || {
        let traces = randomized_corpus(1_000);
        for (i, trace) in traces.iter().enumerate() {
            let violations = check_diameter_monotone(trace);
            if !violations.is_empty() {
                return Err(format!(
                    "run {i}: {} violations, first: {}",
                    violations.len(),
                    violations[0].details
                ));
            }
        }
        Ok("1000 randomized runs, zero violations".into())
    });
}

#[test]
fn criterion_3_trim_and_containment() {
    criterion(3, "trim/containment bounds", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x731A);
        let mut nesting_checked = 0usize;
        let mut subsets_checked = 0usize;
        for i in 0..10_000usize {
            // m down to f + 1 exercises the 2f < n <= 3f regime for the
            // range containment; the nesting and destination bounds apply
            // once m > 2f (that is, n > 3f).
            let f = rng.gen_range(0..=3usize);
            let m = rng.gen_range((f + 1).max(2)..=8usize.max(f + 2));
            let correct: PointMultiset = (0..m).map(|_| rational(&mut rng)).collect();
            let byzantine: PointMultiset = (0..f).map(|_| rational(&mut rng)).collect();
            let snapshot = correct.merge(&byzantine);

            // range(trim_f(P)) within range(U), for n > 2f.
            let trimmed = trim_f(&snapshot, f).map_err(|e| format!("iteration {i}: {e}"))?;
            let (tlo, thi) = trimmed.range().unwrap();
            let (ulo, uhi) = correct.range().unwrap();
            if tlo < ulo || thi > uhi {
                return Err(format!(
                    "iteration {i}: trimmed range [{tlo}, {thi}] escapes correct range [{ulo}, {uhi}]"
                ));
            }

            if m > 2 * f {
                // n > 3f: trimmed correct range nests inside the trimmed
                // snapshot range.
                let trimmed_correct = trim_f(&correct, f).unwrap();
                let (clo, chi) = trimmed_correct.range().unwrap();
                if clo < tlo || chi > thi {
                    return Err(format!(
                        "iteration {i}: trim(U) range [{clo}, {chi}] outside trim(P) range [{tlo}, {thi}]"
                    ));
                }
                // Destination bounds from the order statistics of U.
                let dest = compute_destination(&snapshot, f).unwrap();
                let u_f1 = correct.nth(f + 1).unwrap();
                let u_m = correct.nth(m).unwrap();
                let u_1 = correct.nth(1).unwrap();
                let u_mf = correct.nth(m - f).unwrap();
                let upper = (u_f1 + u_m).half();
                let lower = (u_1 + u_mf).half();
                if dest > upper || dest < lower {
                    return Err(format!(
                        "iteration {i}: destination {dest} outside [{lower}, {upper}]"
                    ));
                }
                nesting_checked += 1;
            }

            // Order statistics against every (f+1)-element sub-multiset,
            // enumerated exhaustively (m <= 8).
            let u_f1 = correct.nth(f + 1).unwrap();
            let u_mf = correct.nth(m - f).unwrap();
            for subset in (0..m).combinations(f + 1) {
                let values: Vec<&Scalar> = subset
                    .iter()
                    .map(|&j| correct.nth(j + 1).unwrap())
                    .collect();
                let s_max = values.iter().max().unwrap();
                let s_min = values.iter().min().unwrap();
                if u_f1 > s_max {
                    return Err(format!(
                        "iteration {i}: U_(f+1) = {u_f1} exceeds subset max {s_max}"
                    ));
                }
                if u_mf < s_min {
                    return Err(format!(
                        "iteration {i}: U_(m-f) = {u_mf} below subset min {s_min}"
                    ));
                }
                subsets_checked += 1;
            }
        }
        Ok(format!(
            "10000 random multisets, {nesting_checked} nesting/destination checks, {subsets_checked} sub-multisets enumerated"
        ))
    });
}

#[test]
fn criterion_4_fully_synchronous_rate() {
    criterion(4, "fully-synchronous rate", || {
        let delta = Scalar::from_int(10);
        let params = SimulationParams {
            n: 3,
            f: 1,
            delta_default: delta.clone(),
            epsilon: Scalar::new(1, 1000),
            max_cycles: 100,
            seed: 0,
        };
        let initial = Configuration::from_positions(
            &[Scalar::zero(), Scalar::from_int(100)],
            &[Scalar::from_int(101)],
            params,
        )
        .unwrap();
        let mut scheduler = SchedulerPolicy::FullySync;
        let mut adversary = Adversary {
            byzantine: ByzantineStrategy::track_max(Scalar::one()),
            stops: StopPolicy::MinDelta,
        };
        let trace = run(&initial, &mut scheduler, &mut adversary, &TrimmedMidrange);
        for t in 0..trace.events.len() as u64 {
            let before = trace.diameter_at(t).unwrap();
            let after = trace.diameter_at(t + 1).unwrap();
            let bound = (&before - &delta).max(Scalar::zero());
            if after > bound {
                return Err(format!(
                    "cycle {t}: diameter {before} -> {after}, above max(0, {before} - {delta})"
                ));
            }
        }
        match &trace.terminal {
            Terminal::Converged { t_epsilon } if *t_epsilon <= 11 => Ok(format!(
                "diameter drops by delta every cycle, converged at cycle {t_epsilon} <= 11"
            )),
            other => Err(format!(
                "terminal {other:?}, expected convergence within 11"
            )),
        }
    });
}

#[test]
fn criterion_5_semi_synchronous_epoch_bound() {
    criterion(5, "semi-synchronous epoch bound", || {
        let delta: Scalar = "1/10".parse().unwrap();
        let mut epochs_checked = 0usize;
        for k in [1u64, 2] {
            let expected_alpha = Scalar::one() - Scalar::inv_pow2((k * 2 + 2) as u32);
            for seed in 0..100u64 {
                let scenario = build_scenario_with(
                    "ss-kbounded",
                    &ScenarioOverrides {
                        k: Some(k),
                        seed: Some(seed),
                        ..Default::default()
                    },
                )
                .unwrap();
                let (trace, _) = run_scenario(&scenario);
                if !trace.converged() {
                    return Err(format!(
                        "k={k} seed={seed}: did not converge within 10000 cycles"
                    ));
                }
                let (check, violations) = check_epoch_bound(&trace, k, 1, &delta)
                    .map_err(|e| format!("k={k} seed={seed}: {e}"))?;
                if !violations.is_empty() {
                    return Err(format!(
                        "k={k} seed={seed}: {} epoch-bound violations, first: {}",
                        violations.len(),
                        violations[0].details
                    ));
                }
                // The k-term of the bound is exactly 15/16 (k=1) or 63/64
                // (k=2); the per-epoch bound is never below it.
                if check.alpha_bound < expected_alpha {
                    return Err(format!(
                        "k={k} seed={seed}: alpha bound {} below the k-term {expected_alpha}",
                        check.alpha_bound
                    ));
                }
                epochs_checked += 1;
            }
        }
        Ok(format!(
            "200 seeded runs (k in {{1, 2}}), all converged, zero epoch violations, {epochs_checked} runs checked"
        ))
    });
}

#[test]
fn criterion_6_fair_non_convergence() {
    criterion(6, "fair non-convergence", || {
        let scenario = build_scenario("fair-oscillation").unwrap();
        let window = scenario
            .assertions
            .iter()
            .find_map(|a| match a {
                ScenarioAssertion::LogIsFairWindowed { window } => Some(*window),
                _ => None,
            })
            .expect("oscillation scenario carries its fairness window");
        let (trace, _) = run_scenario(&scenario);
        if trace.terminal != Terminal::CycleLimit {
            return Err(format!(
                "terminal {:?}, expected CycleLimit",
                trace.terminal
            ));
        }
        let floor = Scalar::from_int(98);
        for t in 0..trace.horizon() {
            let d = trace.diameter_at(t).unwrap();
            if d < floor {
                return Err(format!("diameter {d} at cycle {t} below the floor 98"));
            }
        }
        let correct: BTreeSet<RobotId> = trace.initial.correct_ids().into_iter().collect();
        let fairness = verify_fair(&trace.activation_log(), &correct, window);
        if !fairness.is_empty() {
            return Err(format!(
                "fairness violated with window {window}: {}",
                fairness[0].details
            ));
        }
        Ok(format!(
            "8 phase pairs over {} cycles, every diameter >= 98, fair with window {window}",
            trace.events.len()
        ))
    });
}

#[test]
fn criterion_7_lower_bound_scenarios() {
    criterion(7, "lower-bound scenarios", || {
        let (trace, results) = run_scenario(&build_scenario("lb-n2f").unwrap());
        if let Some(failed) = results.iter().find(|r| !r.passed) {
            return Err(format!("lb-n2f {}: {}", failed.name, failed.details));
        }
        if !matches!(
            &trace.terminal,
            Terminal::Error {
                error: byzsim_core::SimError::TrimUnderflow { .. }
            }
        ) {
            return Err(format!("lb-n2f terminal {:?}", trace.terminal));
        }

        let (trace, results) = run_scenario(&build_scenario("lb-n3f").unwrap());
        if let Some(failed) = results.iter().find(|r| !r.passed) {
            return Err(format!("lb-n3f {}: {}", failed.name, failed.details));
        }
        if trace.events.len() != 200 {
            return Err(format!(
                "lb-n3f ran {} cycles, expected 200",
                trace.events.len()
            ));
        }
        let d0 = trace.diameter_at(0).unwrap();
        for t in 0..trace.horizon() {
            if trace.diameter_at(t).unwrap() != d0 {
                return Err(format!("lb-n3f diameter changed at cycle {t}"));
            }
        }
        let log = trace.activation_log();
        if !verify_k_bounded(&log, 2).is_empty() {
            return Err("lb-n3f log is not 2-bounded".into());
        }
        let correct: BTreeSet<RobotId> = trace.initial.correct_ids().into_iter().collect();
        if !verify_fair(&log, &correct, 2).is_empty() {
            return Err("lb-n3f log is not fair with window 2".into());
        }
        Ok(format!(
            "lb-n2f hits the trim underflow; lb-n3f holds diameter {d0} for 200 cycles under a 2-bounded fair log"
        ))
    });
}

#[test]
fn criterion_8_determinism() {
    criterion(8, "determinism", || {
        for name in SCENARIO_NAMES {
            let scenario = build_scenario(name).unwrap();
            let (first, _) = run_scenario(&scenario);
            let (second, _) = run_scenario(&scenario);
            let a = trace_to_string(&first);
            let b = trace_to_string(&second);
            if a != b {
                return Err(format!("scenario {name}: reruns differ"));
            }
        }
        Ok(format!(
            "{} scenarios re-run byte-identically",
            SCENARIO_NAMES.len()
        ))
    });
}
