//! Shared setup for the benchmarks.

use sachem_core::{Engine, RunState, SimConfig};

/// Per-kind population used in the paper-scale runs.
pub const PAPER_SCALE: usize = 5000;

/// Engine and initial state for `per_kind` molecules of each kind, with
/// metrics off so only the generation step is timed.
pub fn engine_at(per_kind: usize, workers: usize) -> (Engine, RunState) {
    let mut config = SimConfig::with_counts(1, 1, per_kind);
    config.metrics.cadence = 0;
    let engine = Engine::new(config, workers).expect("valid benchmark config");
    let state = engine.initial_state().expect("initial population");
    (engine, state)
}
