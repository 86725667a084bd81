//! Uniform draws from the reaction pool without materializing it.
//!
//! The pool for a target kind is every `(substrate, catalyst, rule)` triple
//! with `rule.product == target`, where substrate and catalyst are distinct
//! molecule instances from the current population. A rule contributes
//! `n_sub * n_cat` triples, or `n * (n - 1)` when substrate and catalyst
//! share a kind. One integer draw over the total count picks a rule and a
//! pair index, which is then decoded into the two molecule indices.

use rand::Rng;

use crate::error::ChemError;
use crate::molecule::{Molecule, MoleculeKind};
use crate::network::ReactionNetwork;
use crate::population::Population;

/// One member of the reaction pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PoolEntry {
    /// Index into `ReactionNetwork::rules`.
    pub rule: usize,
    pub substrate: usize,
    pub catalyst: usize,
}

#[derive(Debug, Clone)]
struct RuleWeight {
    rule: usize,
    same_kind: bool,
    n_cat: u64,
    weight: u64,
}

/// Precomputed rule weights for drawing pool entries of one target kind.
#[derive(Debug, Clone)]
pub struct ProductSampler {
    target: MoleculeKind,
    weights: Vec<RuleWeight>,
    total: u64,
}

impl ProductSampler {
    pub fn new(
        counts: [usize; 3],
        target: MoleculeKind,
        net: &ReactionNetwork,
    ) -> Result<Self, ChemError> {
        let mut weights = Vec::new();
        let mut any_rule = false;
        for (idx, rule) in net.rules.iter().enumerate() {
            if rule.product != target {
                continue;
            }
            any_rule = true;
            let n_sub = counts[rule.substrate.index()] as u64;
            let n_cat = counts[rule.catalyst.index()] as u64;
            let same_kind = rule.substrate == rule.catalyst;
            let weight = if same_kind {
                n_sub * n_sub.saturating_sub(1)
            } else {
                n_sub * n_cat
            };
            if weight > 0 {
                weights.push(RuleWeight {
                    rule: idx,
                    same_kind,
                    n_cat,
                    weight,
                });
            }
        }
        if !any_rule {
            return Err(ChemError::NoProducingRule(target));
        }
        let total = weights.iter().map(|w| w.weight).sum();
        if total == 0 {
            return Err(ChemError::EmptyPool(target));
        }
        Ok(Self {
            target,
            weights,
            total,
        })
    }

    pub fn target(&self) -> MoleculeKind {
        self.target
    }

    /// Number of triples in the implicit pool.
    pub fn pool_size(&self) -> u64 {
        self.total
    }

    /// Draws one triple uniformly from the pool.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> PoolEntry {
        let mut r = rng.random_range(0..self.total);
        for w in &self.weights {
            if r < w.weight {
                return decode(w, r);
            }
            r -= w.weight;
        }
        unreachable!("draw below total weight")
    }
}

fn decode(w: &RuleWeight, idx: u64) -> PoolEntry {
    let (substrate, catalyst) = if w.same_kind {
        let span = w.n_cat - 1;
        let sub = idx / span;
        let c = idx % span;
        (sub, if c >= sub { c + 1 } else { c })
    } else {
        (idx / w.n_cat, idx % w.n_cat)
    };
    PoolEntry {
        rule: w.rule,
        substrate: substrate as usize,
        catalyst: catalyst as usize,
    }
}

/// Computes the product of a pool entry.
pub fn react_entry(
    population: &Population,
    net: &ReactionNetwork,
    entry: PoolEntry,
) -> Result<Vec<f64>, ChemError> {
    let rule = &net.rules[entry.rule];
    rule.react(
        population.get(rule.substrate, entry.substrate),
        population.get(rule.catalyst, entry.catalyst),
    )
}

/// Draws one product of kind `target` uniformly from the reaction pool.
pub fn sample_product<R: Rng + ?Sized>(
    population: &Population,
    target: MoleculeKind,
    net: &ReactionNetwork,
    rng: &mut R,
) -> Result<Molecule, ChemError> {
    let sampler = ProductSampler::new(population.counts(), target, net)?;
    let entry = sampler.draw(rng);
    Molecule::new(target, react_entry(population, net, entry)?)
}

/// Lists every pool entry for `target` explicitly. Only sensible for tiny
/// populations; the streaming sampler is checked against this.
pub fn enumerate_pool(
    population: &Population,
    target: MoleculeKind,
    net: &ReactionNetwork,
) -> Vec<PoolEntry> {
    let mut out = Vec::new();
    for (rule_idx, rule) in net.rules.iter().enumerate() {
        if rule.product != target {
            continue;
        }
        for substrate in 0..population.count(rule.substrate) {
            for catalyst in 0..population.count(rule.catalyst) {
                if rule.substrate == rule.catalyst && substrate == catalyst {
                    continue;
                }
                out.push(PoolEntry {
                    rule: rule_idx,
                    substrate,
                    catalyst,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::default_network;
    use crate::population::init_population;
    use crate::rng::{Purpose, SlotRng};
    use std::collections::HashMap;

    #[test]
    fn two_m13_molecules_give_two_entries() {
        let pop = init_population([2, 2, 2], 5).unwrap();
        let mut net = default_network();
        // Only R1 produces M7 in this reduced network.
        net.rules.retain(|r| r.id != "R4");
        let pool = enumerate_pool(&pop, MoleculeKind::L7, &net);
        assert_eq!(
            pool,
            vec![
                PoolEntry { rule: 0, substrate: 0, catalyst: 1 },
                PoolEntry { rule: 0, substrate: 1, catalyst: 0 },
            ]
        );
        let sampler = ProductSampler::new(pop.counts(), MoleculeKind::L7, &net).unwrap();
        let mut rng = SlotRng::new(1, 0, Purpose::Other(0), 0);
        let mut hits: HashMap<PoolEntry, usize> = HashMap::new();
        let draws = 20_000;
        for _ in 0..draws {
            *hits.entry(sampler.draw(&mut rng)).or_default() += 1;
        }
        assert_eq!(hits.len(), 2);
        for n in hits.values() {
            let frac = *n as f64 / draws as f64;
            assert!((frac - 0.5).abs() < 0.02, "{frac}");
        }
    }

    #[test]
    fn m13_only_from_r3() {
        let pop = init_population([4, 4, 4], 5).unwrap();
        let net = default_network();
        let sampler = ProductSampler::new(pop.counts(), MoleculeKind::L13, &net).unwrap();
        let mut rng = SlotRng::new(1, 0, Purpose::Other(0), 0);
        for _ in 0..1000 {
            let e = sampler.draw(&mut rng);
            assert_eq!(net.rules[e.rule].id, "R3");
            assert_ne!(e.substrate, e.catalyst);
        }
        let m = sample_product(&pop, MoleculeKind::L13, &net, &mut rng).unwrap();
        assert_eq!(m.kind(), MoleculeKind::L13);
    }

    #[test]
    fn pool_size_matches_enumeration() {
        let pop = init_population([3, 4, 5], 2).unwrap();
        let net = default_network();
        for kind in MoleculeKind::ALL {
            let s = ProductSampler::new(pop.counts(), kind, &net).unwrap();
            assert_eq!(s.pool_size() as usize, enumerate_pool(&pop, kind, &net).len());
        }
    }

    #[test]
    fn missing_producer_is_an_error() {
        let mut net = default_network();
        net.rules.retain(|r| r.id != "R3");
        let err = ProductSampler::new([3, 3, 3], MoleculeKind::L13, &net).unwrap_err();
        assert_eq!(err, ChemError::NoProducingRule(MoleculeKind::L13));
        let err = ProductSampler::new([3, 3, 1], MoleculeKind::L7, &{
            let mut n = default_network();
            n.rules.retain(|r| r.id == "R4" || r.id == "R3");
            n
        })
        .unwrap_err();
        assert_eq!(err, ChemError::EmptyPool(MoleculeKind::L7));
    }
}
