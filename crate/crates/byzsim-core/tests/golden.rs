//! Golden-trace regression: each catalogue scenario (kept small via
//! overrides) must reproduce its stored trace file byte for byte. A diff
//! here means the dynamics, the record format, or the seeding changed.

use byzsim_core::scenario::{build_scenario_with, run_scenario, ScenarioOverrides};
use byzsim_core::trace_io::{trace_from_str, trace_to_string};

fn check(name: &str, overrides: ScenarioOverrides, golden: &str) {
    let scenario = build_scenario_with(name, &overrides).unwrap();
    let (trace, _) = run_scenario(&scenario);
    let produced = trace_to_string(&trace);
    assert_eq!(
        produced, golden,
        "scenario {name} no longer matches its golden trace"
    );
    // The stored file itself still parses back to the same trace.
    assert_eq!(trace_from_str(golden).unwrap(), trace);
}

#[test]
fn fs_convergence_matches_golden() {
    check(
        "fs-convergence",
        ScenarioOverrides::default(),
        include_str!("golden/fs-convergence.jsonl"),
    );
}

#[test]
fn lb_n2f_matches_golden() {
    check(
        "lb-n2f",
        ScenarioOverrides::default(),
        include_str!("golden/lb-n2f.jsonl"),
    );
}

#[test]
fn lb_n3f_matches_golden() {
    check(
        "lb-n3f",
        ScenarioOverrides {
            max_cycles: Some(6),
            ..Default::default()
        },
        include_str!("golden/lb-n3f-6cycles.jsonl"),
    );
}

#[test]
fn fair_oscillation_matches_golden() {
    check(
        "fair-oscillation",
        ScenarioOverrides {
            phases: Some(1),
            ..Default::default()
        },
        include_str!("golden/fair-oscillation-1pair.jsonl"),
    );
}

#[test]
fn ss_kbounded_matches_golden() {
    check(
        "ss-kbounded",
        ScenarioOverrides {
            seed: Some(1),
            ..Default::default()
        },
        include_str!("golden/ss-kbounded-seed1.jsonl"),
    );
}
