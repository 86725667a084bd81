//! The generation loop: react, resample, perturb.
//!
//! Each kind `K` with `n` molecules is rebuilt slot by slot. The first
//! `round(product_fraction * n)` slots hold products drawn uniformly from
//! the reaction pool for `K`, the rest are copies drawn with replacement
//! from the current `K` population. Every slot is then perturbed. Slot `i`
//! of kind `K` draws from the stream `(seed, step, Advance(K), i)` only,
//! so the result does not depend on how slots are spread across workers.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::config::SimConfig;
use crate::error::{ChemError, ConfigError, RunError};
use crate::metrics::{compute_metrics, MetricsRecord};
use crate::molecule::MoleculeKind;
use crate::population::{init_population, perturb, KindPool, Population};
use crate::rng::{Purpose, StreamKey};
use crate::sampler::{react_entry, ProductSampler};

/// Population plus the step counter. The seed completes the RNG lineage.
#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    pub step: u64,
    pub seed: u64,
    pub population: Population,
}

/// Something the run loop hands to its sink.
#[derive(Debug)]
pub enum RunEvent<'a> {
    Metrics(&'a MetricsRecord, &'a RunState),
    Snapshot(&'a RunState),
}

pub struct Engine {
    config: SimConfig,
    pool: rayon::ThreadPool,
}

impl Engine {
    /// `workers == 0` uses rayon's default thread count.
    pub fn new(config: SimConfig, workers: usize) -> Result<Self, ConfigError> {
        config.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| ConfigError::Invalid {
                key: "workers".into(),
                message: e.to_string(),
            })?;
        Ok(Self { config, pool })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn initial_state(&self) -> Result<RunState, ChemError> {
        Ok(RunState {
            step: 0,
            seed: self.config.seed,
            population: init_population(self.config.counts, self.config.seed)?,
        })
    }

    /// Builds the next generation.
    pub fn step(&self, state: &RunState) -> Result<RunState, ChemError> {
        self.pool.install(|| advance(state, &self.config))
    }

    /// Metrics for a state, computed on this engine's workers.
    pub fn metrics(&self, state: &RunState, wallclock_ms: f64) -> Result<MetricsRecord, ChemError> {
        self.pool
            .install(|| compute_metrics(&state.population, state.step, &self.config, wallclock_ms))
    }

    /// Advances `start` until step `until`, calling `sink` with metrics every
    /// `metrics.cadence` steps and snapshots every `snapshot_cadence` steps.
    /// The final state is always snapshotted. With `emit_start` the starting
    /// state is reported too (fresh runs; resumed runs already reported it).
    pub fn run<F>(
        &self,
        start: RunState,
        until: u64,
        emit_start: bool,
        mut sink: F,
    ) -> Result<RunState, RunError>
    where
        F: FnMut(RunEvent<'_>) -> Result<(), RunError>,
    {
        let metrics_due = |step: u64| {
            let c = self.config.metrics.cadence;
            c > 0 && step.is_multiple_of(c)
        };
        let snapshot_due = |step: u64| {
            let c = self.config.snapshot_cadence;
            step == until || (c > 0 && step.is_multiple_of(c))
        };

        let mut state = start;
        if emit_start {
            if metrics_due(state.step) {
                let record = self.metrics(&state, 0.0)?;
                sink(RunEvent::Metrics(&record, &state))?;
            }
            if snapshot_due(state.step) {
                sink(RunEvent::Snapshot(&state))?;
            }
        }
        while state.step < until {
            let t0 = Instant::now();
            state = self.step(&state)?;
            let wallclock_ms = t0.elapsed().as_secs_f64() * 1e3;
            if metrics_due(state.step) {
                let record = self.metrics(&state, wallclock_ms)?;
                sink(RunEvent::Metrics(&record, &state))?;
            }
            if snapshot_due(state.step) {
                sink(RunEvent::Snapshot(&state))?;
            }
        }
        Ok(state)
    }
}

/// One generation, parallel over slots on the current rayon pool.
pub fn advance(state: &RunState, config: &SimConfig) -> Result<RunState, ChemError> {
    let pop = &state.population;
    let counts = pop.counts();
    let products = config.products_per_kind();
    let sigma = config.noise.sigma;

    let mut pools = Vec::with_capacity(3);
    for kind in MoleculeKind::ALL {
        let n = counts[kind.index()];
        let n_products = products[kind.index()].min(n);
        let sampler = if n_products > 0 {
            Some(ProductSampler::new(counts, kind, &config.network)?)
        } else {
            None
        };
        let key = StreamKey::new(state.seed, state.step, Purpose::Advance(kind));
        let current = pop.pool(kind);
        let len = kind.len();
        let mut next = vec![0.0; n * len];
        next.par_chunks_mut(len)
            .enumerate()
            .try_for_each(|(slot, out)| -> Result<(), ChemError> {
                let mut rng = key.slot(slot as u64);
                match &sampler {
                    Some(s) if slot < n_products => {
                        let entry = s.draw(&mut rng);
                        out.copy_from_slice(&react_entry(pop, &config.network, entry)?);
                    }
                    _ => {
                        let src = rng.random_range(0..n);
                        out.copy_from_slice(current.get(src));
                    }
                }
                perturb(out, sigma, &mut rng);
                Ok(())
            })?;
        pools.push(KindPool::from_flat(kind, next)?);
    }
    let m3 = pools.pop().expect("three kinds");
    let m7 = pools.pop().expect("three kinds");
    let m13 = pools.pop().expect("three kinds");
    Ok(RunState {
        step: state.step + 1,
        seed: state.seed,
        population: Population::new(m13, m7, m3)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(per_kind: usize) -> SimConfig {
        let mut c = SimConfig::with_counts(17, 3, per_kind);
        c.metrics.cadence = 0;
        c
    }

    #[test]
    fn counts_and_range_preserved() {
        let engine = Engine::new(small(10), 2).unwrap();
        let mut s = engine.initial_state().unwrap();
        for _ in 0..5 {
            s = engine.step(&s).unwrap();
            assert_eq!(s.population.counts(), [10, 10, 10]);
            assert!(s.population.in_range());
        }
        assert_eq!(s.step, 5);
    }

    #[test]
    fn product_split() {
        assert_eq!(small(10).products_per_kind(), [9, 9, 9]);
        let mut c = small(10);
        c.product_fraction = 0.0;
        c.carryover_fraction = 1.0;
        assert_eq!(c.products_per_kind(), [0, 0, 0]);
    }

    #[test]
    fn zero_products_resamples_current() {
        let mut c = small(6);
        c.product_fraction = 0.0;
        c.carryover_fraction = 1.0;
        c.noise.sigma = 0.0;
        let engine = Engine::new(c, 1).unwrap();
        let s0 = engine.initial_state().unwrap();
        let s1 = engine.step(&s0).unwrap();
        for kind in MoleculeKind::ALL {
            let old: Vec<&[f64]> = s0.population.pool(kind).rows().collect();
            for row in s1.population.pool(kind).rows() {
                assert!(old.contains(&row));
            }
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let a = Engine::new(small(40), 1).unwrap();
        let b = Engine::new(small(40), 8).unwrap();
        let mut sa = a.initial_state().unwrap();
        let mut sb = b.initial_state().unwrap();
        for _ in 0..3 {
            sa = a.step(&sa).unwrap();
            sb = b.step(&sb).unwrap();
        }
        assert_eq!(sa, sb);
    }

    #[test]
    fn run_emits_initial_and_final() {
        let mut c = small(5);
        c.steps = 0;
        c.metrics.cadence = 1;
        let engine = Engine::new(c, 1).unwrap();
        let mut events = Vec::new();
        let s0 = engine.initial_state().unwrap();
        engine
            .run(s0, 0, true, |e| {
                events.push(match e {
                    RunEvent::Metrics(r, _) => format!("m{}", r.step),
                    RunEvent::Snapshot(s) => format!("s{}", s.step),
                });
                Ok(())
            })
            .unwrap();
        assert_eq!(events, ["m0", "s0"]);
    }
}
