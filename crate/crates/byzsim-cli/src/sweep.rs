//! Parameter sweeps: run a base config once per value of one parameter and
//! summarize convergence per point.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use byzsim_core::analysis::estimate_shrinking;
use byzsim_core::engine::{run, Terminal};
use byzsim_core::{Scalar, TrimmedMidrange};

use crate::config::{load_run, LoadedRun, RawConfig};
use crate::report::{write_atomic, DECIMAL_DIGITS};
use crate::{read_config, EXIT_CONFIG, EXIT_OK};

const VARY_KEYS: &[&str] = &["n", "f", "k", "delta", "epsilon"];

struct SweepRow {
    value: String,
    converged: bool,
    t_epsilon: Option<u64>,
    final_diameter: Scalar,
    alpha_observed: Scalar,
}

fn worker_count(points: usize) -> usize {
    let default = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1);
    let cap = std::env::var("BYZSIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or(default);
    cap.min(points).max(1)
}

pub fn cmd_sweep(path: &Path, vary: &str, values: &str) -> u8 {
    if !VARY_KEYS.contains(&vary) {
        eprintln!(
            "error: cannot vary {vary:?}; supported keys: {}",
            VARY_KEYS.join(", ")
        );
        return EXIT_CONFIG;
    }
    let raw = match read_config(path) {
        Ok(raw) => raw,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if vary == "k" && raw_scheduler(&raw) != Some("k-bounded") {
        eprintln!("error: varying k requires `scheduler = k-bounded` in the base config");
        return EXIT_CONFIG;
    }
    let values: Vec<String> = values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(str::to_string)
        .collect();
    if values.is_empty() {
        eprintln!("error: --values is empty");
        return EXIT_CONFIG;
    }

    // Validate every derived config before running anything.
    let mut points: Vec<(String, LoadedRun)> = Vec::with_capacity(values.len());
    for value in &values {
        let mut derived = raw.clone();
        if let Err(e) = derived.set(vary, value) {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
        match load_run(&derived) {
            Ok(loaded) => points.push((value.clone(), loaded)),
            Err(e) => {
                eprintln!("error: point {vary} = {value}: {e}");
                return EXIT_CONFIG;
            }
        }
    }

    let csv_path = points
        .first()
        .and_then(|(_, loaded)| loaded.csv_path.clone());
    let workers = worker_count(points.len());
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<SweepRow>>> = Mutex::new((0..points.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= points.len() {
                    break;
                }
                let (value, loaded) = &points[index];
                let mut scheduler = loaded.scheduler.clone();
                let mut adversary = loaded.adversary.clone();
                let trace = run(
                    &loaded.initial,
                    &mut scheduler,
                    &mut adversary,
                    &TrimmedMidrange,
                );
                let t_epsilon = match &trace.terminal {
                    Terminal::Converged { t_epsilon } => Some(*t_epsilon),
                    _ => None,
                };
                let row = SweepRow {
                    value: value.clone(),
                    converged: trace.converged(),
                    t_epsilon,
                    final_diameter: trace
                        .diameter_at(trace.horizon() - 1)
                        .expect("nonempty run"),
                    alpha_observed: estimate_shrinking(&trace).alpha_observed,
                };
                rows.lock().expect("no panics while holding the lock")[index] = Some(row);
            });
        }
    });

    let rows = rows.into_inner().expect("workers finished");
    let mut csv = String::from(
        "value,converged,t_epsilon,final_diameter,final_diameter_exact,\
         alpha_observed,alpha_observed_exact\n",
    );
    for row in rows.into_iter().flatten() {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.value,
            row.converged,
            row.t_epsilon.map(|t| t.to_string()).unwrap_or_default(),
            row.final_diameter.to_decimal(DECIMAL_DIGITS),
            row.final_diameter,
            row.alpha_observed.to_decimal(DECIMAL_DIGITS),
            row.alpha_observed,
        ));
    }
    match csv_path {
        Some(path) => {
            if let Err(e) = write_atomic(&path, csv.as_bytes()) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_CONFIG;
            }
            println!("sweep summary: {}", path.display());
        }
        None => print!("{csv}"),
    }
    EXIT_OK
}

fn raw_scheduler(raw: &RawConfig) -> Option<&str> {
    raw.scheduler_kind()
}
