//! Reaction rules: which (substrate, catalyst) kind pairs react, and how.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::ChemError;
use crate::kernel::{apply_conv, apply_deconv, ConvSpec, Direction};
use crate::molecule::{Molecule, MoleculeKind};

/// One catalytic reaction: `substrate --[catalyst]--> product`.
///
/// Serializes as a flat record `{id, substrate, catalyst, product,
/// direction, k, p, s}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "RuleRecord", from = "RuleRecord")]
pub struct ReactionRule {
    pub id: String,
    pub substrate: MoleculeKind,
    pub catalyst: MoleculeKind,
    pub product: MoleculeKind,
    pub spec: ConvSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleRecord {
    id: String,
    substrate: MoleculeKind,
    catalyst: MoleculeKind,
    product: MoleculeKind,
    direction: Direction,
    k: usize,
    p: usize,
    s: usize,
}

impl From<ReactionRule> for RuleRecord {
    fn from(r: ReactionRule) -> Self {
        RuleRecord {
            id: r.id,
            substrate: r.substrate,
            catalyst: r.catalyst,
            product: r.product,
            direction: r.spec.direction,
            k: r.spec.kernel,
            p: r.spec.padding,
            s: r.spec.stride,
        }
    }
}

impl From<RuleRecord> for ReactionRule {
    fn from(r: RuleRecord) -> Self {
        ReactionRule {
            id: r.id,
            substrate: r.substrate,
            catalyst: r.catalyst,
            product: r.product,
            spec: ConvSpec {
                direction: r.direction,
                kernel: r.k,
                padding: r.p,
                stride: r.s,
            },
        }
    }
}

impl ReactionRule {
    pub fn new(
        id: impl Into<String>,
        substrate: MoleculeKind,
        catalyst: MoleculeKind,
        product: MoleculeKind,
        spec: ConvSpec,
    ) -> Self {
        Self {
            id: id.into(),
            substrate,
            catalyst,
            product,
            spec,
        }
    }

    /// Violations of this rule's own invariants, as human-readable lines.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.spec.kernel != self.catalyst.len() {
            out.push(format!(
                "{}: kernel size k = {} ≠ catalyst length {}",
                self.id,
                self.spec.kernel,
                self.catalyst.len()
            ));
        }
        let name = match self.spec.direction {
            Direction::Encode => "conv_output_length",
            Direction::Decode => "deconv_output_length",
        };
        match self.spec.output_len(self.substrate.len()) {
            Ok(len) if len == self.product.len() => {}
            Ok(len) => out.push(format!(
                "{}: {} = {} ≠ {}",
                self.id,
                name,
                len,
                self.product.len()
            )),
            Err(e) => out.push(format!("{}: {}: {}", self.id, name, e)),
        }
        out
    }

    /// Applies this rule with `catalyst` as the kernel.
    pub fn react(&self, substrate: &[f64], catalyst: &[f64]) -> Result<Vec<f64>, ChemError> {
        if substrate.len() != self.substrate.len() {
            return Err(ChemError::LengthMismatch {
                what: "substrate",
                expected: self.substrate.len(),
                actual: substrate.len(),
            });
        }
        if catalyst.len() != self.catalyst.len() {
            return Err(ChemError::LengthMismatch {
                what: "catalyst",
                expected: self.catalyst.len(),
                actual: catalyst.len(),
            });
        }
        match self.spec.direction {
            Direction::Encode => apply_conv(substrate, catalyst, &self.spec),
            Direction::Decode => apply_deconv(substrate, catalyst, &self.spec),
        }
    }
}

/// Reacts two molecules under `rule`, checking kinds.
pub fn react(
    substrate: &Molecule,
    catalyst: &Molecule,
    rule: &ReactionRule,
) -> Result<Molecule, ChemError> {
    if substrate.kind() != rule.substrate {
        return Err(ChemError::KindMismatch {
            rule: rule.id.clone(),
            role: "substrate",
            expected: rule.substrate,
            actual: substrate.kind(),
        });
    }
    if catalyst.kind() != rule.catalyst {
        return Err(ChemError::KindMismatch {
            rule: rule.id.clone(),
            role: "catalyst",
            expected: rule.catalyst,
            actual: catalyst.kind(),
        });
    }
    let values = rule.react(substrate.values(), catalyst.values())?;
    if values.len() != rule.product.len() {
        return Err(ChemError::LengthMismatch {
            what: "product",
            expected: rule.product.len(),
            actual: values.len(),
        });
    }
    Molecule::new(rule.product, values)
}

/// An ordered list of reaction rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReactionNetwork {
    pub rules: Vec<ReactionRule>,
}

impl ReactionNetwork {
    pub fn new(rules: Vec<ReactionRule>) -> Self {
        Self { rules }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule(&self, id: &str) -> Option<&ReactionRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// Rules matching a (substrate, catalyst) kind pair, in declaration order.
    pub fn applicable_rules(
        &self,
        substrate: MoleculeKind,
        catalyst: MoleculeKind,
    ) -> Vec<&ReactionRule> {
        self.rules
            .iter()
            .filter(|r| r.substrate == substrate && r.catalyst == catalyst)
            .collect()
    }

    /// Rules whose product is `kind`, in declaration order.
    pub fn producers(&self, kind: MoleculeKind) -> impl Iterator<Item = &ReactionRule> {
        self.rules.iter().filter(move |r| r.product == kind)
    }

    /// Every violated invariant, one line each. Empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for rule in &self.rules {
            if !seen.insert(rule.id.as_str()) {
                out.push(format!("{}: duplicate rule id", rule.id));
            }
            out.extend(rule.violations());
        }
        if !self.rules.iter().any(|r| r.spec.direction == Direction::Encode) {
            out.push("network has no encode rule".to_string());
        }
        if !self.rules.iter().any(|r| r.spec.direction == Direction::Decode) {
            out.push("network has no decode rule".to_string());
        }
        out
    }
}

/// The four-rule network with same-kind catalysis throughout:
/// 13→7 and 7→3 encode, 7→13 and 3→7 decode.
pub fn default_network() -> ReactionNetwork {
    use MoleculeKind::*;
    ReactionNetwork::new(vec![
        ReactionRule::new("R1", L13, L13, L7, ConvSpec::encode(13, 3, 1)),
        ReactionRule::new("R2", L7, L7, L3, ConvSpec::encode(7, 1, 1)),
        ReactionRule::new("R3", L7, L7, L13, ConvSpec::decode(7, 0, 1)),
        ReactionRule::new("R4", L3, L3, L7, ConvSpec::decode(3, 0, 2)),
    ])
}
