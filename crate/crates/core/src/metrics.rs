//! Reconstruction errors, nearest-neighbour distances, cluster counts and
//! convergence detection.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::ChemError;
use crate::molecule::{Molecule, MoleculeKind};
use crate::network::{ReactionNetwork, ReactionRule};
use crate::population::{KindPool, Population};
use crate::rng::{Purpose, StreamKey};

/// A named chain of rule ids that starts and ends on the same kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pathway {
    pub name: String,
    pub rules: Vec<String>,
}

impl Pathway {
    pub fn new<S: Into<String>>(name: impl Into<String>, rules: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            rules: rules.into_iter().map(Into::into).collect(),
        }
    }

    /// Metrics column name, e.g. `re_13_7_13`.
    pub fn column(&self) -> String {
        format!("re_{}", self.name.replace('-', "_"))
    }

    /// Looks up the rules and checks that they chain into a round trip.
    pub fn resolve<'n>(&self, net: &'n ReactionNetwork) -> Result<Vec<&'n ReactionRule>, ChemError> {
        let bad = |reason: String| ChemError::InvalidPathway {
            name: self.name.clone(),
            reason,
        };
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(bad("name must be non-empty [A-Za-z0-9_-]".into()));
        }
        let rules = resolve_chain(&self.rules, net).map_err(|e| match e {
            ChemError::Invalid(reason) => bad(reason),
            other => other,
        })?;
        let (first, last) = (rules[0].substrate, rules[rules.len() - 1].product);
        if first != last {
            return Err(bad(format!("starts at {first} but ends at {last}")));
        }
        Ok(rules)
    }
}

/// Looks up rule ids and checks consecutive rules chain product → substrate.
/// The chain need not return to its start.
pub fn resolve_chain<'n, S: AsRef<str>>(
    ids: &[S],
    net: &'n ReactionNetwork,
) -> Result<Vec<&'n ReactionRule>, ChemError> {
    if ids.is_empty() {
        return Err(ChemError::Invalid("empty rule sequence".into()));
    }
    let rules = ids
        .iter()
        .map(|id| {
            net.rule(id.as_ref())
                .ok_or_else(|| ChemError::UnknownRule(id.as_ref().to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for pair in rules.windows(2) {
        if pair[0].product != pair[1].substrate {
            return Err(ChemError::Invalid(format!(
                "{} produces {} but {} consumes {}",
                pair[0].id, pair[0].product, pair[1].id, pair[1].substrate
            )));
        }
    }
    Ok(rules)
}

pub fn mse(a: &[f64], b: &[f64]) -> Result<f64, ChemError> {
    if a.len() != b.len() {
        return Err(ChemError::LengthMismatch {
            what: "mse operand",
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(ChemError::EmptyInput);
    }
    Ok(sq_dist(a, b) / a.len() as f64)
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Smallest MSE between `x` and any member of `pool`.
pub fn nearest_neighbor_mse(x: &Molecule, pool: &[Molecule]) -> Result<f64, ChemError> {
    if pool.is_empty() {
        return Err(ChemError::EmptyInput);
    }
    pool.iter()
        .map(|p| {
            if p.kind() != x.kind() {
                return Err(ChemError::KindMismatch {
                    rule: "nearest_neighbor_mse".into(),
                    role: "pool member",
                    expected: x.kind(),
                    actual: p.kind(),
                });
            }
            mse(x.values(), p.values())
        })
        .try_fold(f64::INFINITY, |best, m| Ok(best.min(m?)))
}

/// [`nearest_neighbor_mse`] against a stored kind pool.
pub fn nearest_neighbor_mse_pool(x: &[f64], pool: &KindPool) -> f64 {
    debug_assert_eq!(x.len(), pool.kind().len());
    let best = pool
        .rows()
        .map(|r| sq_dist(x, r))
        .fold(f64::INFINITY, f64::min);
    best / x.len() as f64
}

/// Addresses the random streams used by one pathway evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalStream {
    pub seed: u64,
    pub step: u64,
    /// Distinguishes evaluations at the same (seed, step), e.g. pathway index.
    pub index: usize,
}

/// Threads originals of the chain's start kind through `rules`, drawing each
/// catalyst uniformly from the live population. The substrate instance is
/// excluded as its own catalyst on the first reaction. Returns the mean
/// nearest-neighbour MSE of the products against the live population of the
/// product kind, for every stage when `every_stage` is set, otherwise for
/// the last stage only.
pub fn chain_errors(
    population: &Population,
    rules: &[&ReactionRule],
    sample_size: usize,
    stream: EvalStream,
    every_stage: bool,
) -> Result<Vec<f64>, ChemError> {
    let Some(first) = rules.first() else {
        return Err(ChemError::Invalid("empty rule sequence".into()));
    };
    for pair in rules.windows(2) {
        if pair[0].product != pair[1].substrate {
            return Err(ChemError::Invalid(format!(
                "{} produces {} but {} consumes {}",
                pair[0].id, pair[0].product, pair[1].id, pair[1].substrate
            )));
        }
    }
    let start = first.substrate;
    let n = population.count(start);
    if n == 0 {
        return Err(ChemError::EmptyInput);
    }
    for (t, rule) in rules.iter().enumerate() {
        let needed = if t == 0 && rule.catalyst == start { 2 } else { 1 };
        let available = population.count(rule.catalyst);
        if available < needed {
            return Err(ChemError::InsufficientCatalysts {
                kind: rule.catalyst,
                needed,
                available,
            });
        }
    }

    let originals: Vec<usize> = if sample_size >= n {
        (0..n).collect()
    } else {
        let mut rng = StreamKey::new(stream.seed, stream.step, Purpose::PathwaySample(stream.index))
            .slot(0);
        let mut picked = index::sample(&mut rng, n, sample_size).into_vec();
        picked.sort_unstable();
        picked
    };
    let key = StreamKey::new(stream.seed, stream.step, Purpose::PathwayCatalyst(stream.index));
    let last = rules.len() - 1;

    let per_sample = originals
        .par_iter()
        .map(|&i| -> Result<Vec<f64>, ChemError> {
            let mut rng = key.slot(i as u64);
            let mut current = population.get(start, i).to_vec();
            let mut errs = Vec::with_capacity(if every_stage { rules.len() } else { 1 });
            for (t, rule) in rules.iter().enumerate() {
                let nc = population.count(rule.catalyst);
                let c = if t == 0 && rule.catalyst == start {
                    let c = rng.random_range(0..nc - 1);
                    if c >= i {
                        c + 1
                    } else {
                        c
                    }
                } else {
                    rng.random_range(0..nc)
                };
                current = rule.react(&current, population.get(rule.catalyst, c))?;
                if every_stage || t == last {
                    errs.push(nearest_neighbor_mse_pool(
                        &current,
                        population.pool(rule.product),
                    ));
                }
            }
            Ok(errs)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let stages = per_sample[0].len();
    let mut means = vec![0.0; stages];
    for errs in &per_sample {
        for (m, e) in means.iter_mut().zip(errs) {
            *m += e;
        }
    }
    let count = per_sample.len() as f64;
    means.iter_mut().for_each(|m| *m /= count);
    Ok(means)
}

/// Mean over sampled originals of the nearest-neighbour MSE between each
/// original's round-trip reconstruction and the original population.
///
/// With `sample_size` at least the start-kind count every original is used.
pub fn reconstruction_error(
    population: &Population,
    pathway: &Pathway,
    net: &ReactionNetwork,
    sample_size: usize,
    stream: EvalStream,
) -> Result<f64, ChemError> {
    let rules = pathway.resolve(net)?;
    Ok(chain_errors(population, &rules, sample_size, stream, false)?[0])
}

/// Number of connected components when molecules within Euclidean distance
/// `epsilon` of each other are linked (single linkage at a fixed threshold).
pub fn cluster_count(molecules: &[Molecule], epsilon: f64) -> Result<usize, ChemError> {
    let first = molecules.first().ok_or(ChemError::EmptyInput)?;
    let kind = first.kind();
    let mut data = Vec::with_capacity(molecules.len() * kind.len());
    for m in molecules {
        if m.kind() != kind {
            return Err(ChemError::Invalid("mixed molecule kinds".into()));
        }
        data.extend_from_slice(m.values());
    }
    cluster_count_flat(&data, kind.len(), epsilon)
}

/// [`cluster_count`] over row-major points of dimension `dim`.
pub fn cluster_count_flat(data: &[f64], dim: usize, epsilon: f64) -> Result<usize, ChemError> {
    if data.is_empty() || dim == 0 {
        return Err(ChemError::EmptyInput);
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(ChemError::Invalid(format!("epsilon must be > 0, got {epsilon}")));
    }
    let n = data.len() / dim;
    let eps2 = epsilon * epsilon;
    let row = |i: usize| &data[i * dim..(i + 1) * dim];

    // Neighbour lists in parallel, union-find serially.
    let edges: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = row(i);
            (i + 1..n)
                .filter(|&j| sq_dist(a, row(j)) <= eps2)
                .map(|j| j as u32)
                .collect()
        })
        .collect();

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = n;
    for (i, nbrs) in edges.iter().enumerate() {
        for &j in nbrs {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j as usize));
            if a != b {
                parent[a.max(b)] = a.min(b);
                components -= 1;
            }
        }
    }
    Ok(components)
}

/// One row of run metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub step: u64,
    /// Reconstruction error per pathway, in configured order.
    pub re_by_pathway: Vec<(String, f64)>,
    /// Cluster count per kind, indexed by [`MoleculeKind::index`].
    pub cluster_counts: [usize; 3],
    pub wallclock_ms: f64,
}

impl MetricsRecord {
    pub fn re(&self, pathway: &str) -> Option<f64> {
        self.re_by_pathway
            .iter()
            .find(|(n, _)| n == pathway)
            .map(|(_, v)| *v)
    }

    pub fn clusters(&self, kind: MoleculeKind) -> usize {
        self.cluster_counts[kind.index()]
    }
}

/// Evaluates every configured pathway and per-kind cluster counts.
///
/// Pathway `i` uses the streams `(seed, step, Pathway*(i), ·)`.
pub fn compute_metrics(
    population: &Population,
    step: u64,
    config: &SimConfig,
    wallclock_ms: f64,
) -> Result<MetricsRecord, ChemError> {
    let re_by_pathway = config
        .pathways
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let stream = EvalStream {
                seed: config.seed,
                step,
                index: i,
            };
            let re = reconstruction_error(
                population,
                p,
                &config.network,
                config.metrics.sample_size,
                stream,
            )?;
            Ok((p.name.clone(), re))
        })
        .collect::<Result<Vec<_>, ChemError>>()?;
    let mut cluster_counts = [0; 3];
    for kind in MoleculeKind::ALL {
        cluster_counts[kind.index()] = cluster_count_flat(
            population.pool(kind).as_flat(),
            kind.len(),
            config.metrics.epsilon,
        )?;
    }
    Ok(MetricsRecord {
        step,
        re_by_pathway,
        cluster_counts,
        wallclock_ms,
    })
}

/// Earliest recorded step `t` such that every recorded step in
/// `[t, t + window)` has at most `max_clusters` clusters of `kind`. The
/// window must be covered by the history.
pub fn detect_convergence(
    history: &[MetricsRecord],
    kind: MoleculeKind,
    max_clusters: usize,
    window: u64,
) -> Option<u64> {
    let last = history.last()?.step;
    let window = window.max(1);
    history.iter().enumerate().find_map(|(i, start)| {
        if start.step + window - 1 > last {
            return None;
        }
        history[i..]
            .iter()
            .take_while(|r| r.step < start.step + window)
            .all(|r| r.clusters(kind) <= max_clusters)
            .then_some(start.step)
    })
}
