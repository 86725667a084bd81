//! Run configuration: the validated [`SimConfig`] and its TOML file form.
//!
//! ```toml
//! seed = 7
//! steps = 300
//! product_fraction = 0.9
//! carryover_fraction = 0.1
//! network = "default"          # or an array of rule tables
//!
//! [population]
//! m13 = 5000
//! m7 = 5000
//! m3 = 5000
//!
//! [noise]
//! sigma = 0.01
//! kind = "gaussian"
//!
//! [metrics]
//! cadence = 1
//! sample_size = 5000
//! epsilon = 0.1
//!
//! [snapshot]
//! cadence = 50
//!
//! [[pathways]]
//! name = "13-7-13"
//! rules = ["R1", "R3"]
//!
//! [output]
//! dir = "out"
//! ```
//!
//! Only `seed` and `steps` are required. Unknown keys are errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ChemError, ConfigError};
use crate::metrics::Pathway;
use crate::molecule::MoleculeKind;
use crate::network::{default_network, ReactionNetwork, ReactionRule};
use crate::sampler::ProductSampler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    pub sigma: f64,
    pub kind: NoiseKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsConfig {
    /// Emit metrics every `cadence` steps; 0 disables metrics.
    pub cadence: u64,
    /// Originals threaded through each pathway per evaluation.
    pub sample_size: usize,
    /// Single-linkage threshold for cluster counting.
    pub epsilon: f64,
}

/// Every parameter of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Molecules per kind, indexed by [`MoleculeKind::index`].
    pub counts: [usize; 3],
    pub steps: u64,
    pub seed: u64,
    pub product_fraction: f64,
    pub carryover_fraction: f64,
    pub noise: NoiseConfig,
    pub network: ReactionNetwork,
    pub pathways: Vec<Pathway>,
    pub metrics: MetricsConfig,
    /// Snapshot every `snapshot_cadence` steps (0: only the final state).
    pub snapshot_cadence: u64,
    pub output_dir: PathBuf,
}

pub const DEFAULT_COUNT: usize = 5000;

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            counts: [DEFAULT_COUNT; 3],
            steps: 0,
            seed: 0,
            product_fraction: 0.9,
            carryover_fraction: 0.1,
            noise: NoiseConfig {
                sigma: 0.01,
                kind: NoiseKind::Gaussian,
            },
            network: default_network(),
            pathways: default_pathways(),
            metrics: MetricsConfig {
                cadence: 1,
                sample_size: DEFAULT_COUNT,
                epsilon: 0.1,
            },
            snapshot_cadence: 50,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// The three round trips evaluated by default: 13→7→13, 7→3→7 and
/// 13→7→3→7→13.
pub fn default_pathways() -> Vec<Pathway> {
    vec![
        Pathway::new("13-7-13", ["R1", "R3"]),
        Pathway::new("7-3-7", ["R2", "R4"]),
        Pathway::new("13-7-3-7-13", ["R1", "R2", "R4", "R3"]),
    ]
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

impl SimConfig {
    /// Default parameters with the given seed, step count and per-kind count.
    pub fn with_counts(seed: u64, steps: u64, per_kind: usize) -> Self {
        Self {
            seed,
            steps,
            counts: [per_kind; 3],
            metrics: MetricsConfig {
                sample_size: per_kind,
                ..Self::default().metrics
            },
            ..Self::default()
        }
    }

    pub fn count(&self, kind: MoleculeKind) -> usize {
        self.counts[kind.index()]
    }

    /// Products per kind in each new generation: `round(product_fraction * n)`.
    pub fn products_per_kind(&self) -> [usize; 3] {
        self.counts
            .map(|n| ((self.product_fraction * n as f64).round() as usize).min(n))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for kind in MoleculeKind::ALL {
            if self.count(kind) < 2 {
                return Err(invalid(
                    &format!("population.{}", kind.name()),
                    format!("must be >= 2, got {}", self.count(kind)),
                ));
            }
        }
        for (key, v) in [
            ("product_fraction", self.product_fraction),
            ("carryover_fraction", self.carryover_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(key, format!("must lie in [0, 1], got {v}")));
            }
        }
        let sum = self.product_fraction + self.carryover_fraction;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(invalid(
                "product_fraction",
                format!("fractions must sum to 1 (got {sum})"),
            ));
        }
        if !(self.noise.sigma >= 0.0 && self.noise.sigma.is_finite()) {
            return Err(invalid("noise.sigma", "must be a finite value >= 0"));
        }
        if !(self.metrics.epsilon > 0.0 && self.metrics.epsilon.is_finite()) {
            return Err(invalid("metrics.epsilon", "must be a finite value > 0"));
        }
        if self.metrics.sample_size == 0 {
            return Err(invalid("metrics.sample_size", "must be >= 1"));
        }
        let violations = self.network.validate();
        if !violations.is_empty() {
            return Err(ConfigError::Network(violations));
        }
        let products = self.products_per_kind();
        for kind in MoleculeKind::ALL {
            if products[kind.index()] > 0 {
                ProductSampler::new(self.counts, kind, &self.network)
                    .map_err(|e| invalid("network", e.to_string()))?;
            }
        }
        let mut names = std::collections::HashSet::new();
        for p in &self.pathways {
            if !names.insert(p.name.as_str()) {
                return Err(invalid("pathways", format!("duplicate pathway name {:?}", p.name)));
            }
            p.resolve(&self.network)
                .map_err(|e: ChemError| invalid("pathways", e.to_string()))?;
        }
        Ok(())
    }

    /// Pathway by name.
    pub fn pathway(&self, name: &str) -> Option<&Pathway> {
        self.pathways.iter().find(|p| p.name == name)
    }

    /// The effective configuration as TOML, with every default spelled out
    /// and the network written rule by rule.
    pub fn to_toml(&self) -> String {
        let file = ConfigFile {
            seed: Some(self.seed),
            steps: Some(self.steps),
            product_fraction: Some(self.product_fraction),
            carryover_fraction: Some(self.carryover_fraction),
            population: Some(PopulationSection {
                m13: Some(self.counts[0]),
                m7: Some(self.counts[1]),
                m3: Some(self.counts[2]),
            }),
            noise: Some(NoiseSection {
                sigma: Some(self.noise.sigma),
                kind: Some(self.noise.kind),
            }),
            metrics: Some(MetricsSection {
                cadence: Some(self.metrics.cadence),
                sample_size: Some(self.metrics.sample_size),
                epsilon: Some(self.metrics.epsilon),
            }),
            snapshot: Some(SnapshotSection {
                cadence: Some(self.snapshot_cadence),
            }),
            pathways: Some(self.pathways.clone()),
            network: Some(
                toml::Value::try_from(&self.network.rules).expect("rules serialize to TOML"),
            ),
            output: Some(OutputSection {
                dir: Some(self.output_dir.to_string_lossy().into_owned()),
            }),
        };
        toml::to_string(&file).expect("config serializes to TOML")
    }

    /// Parses and validates TOML text.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
        let config = file.into_config()?;
        config.validate()?;
        Ok(config)
    }
}

/// Reads, parses and validates a config file.
pub fn load_config(path: &Path) -> Result<SimConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    SimConfig::from_toml(&text)
}

fn parse_error(text: &str, e: &toml::de::Error) -> ConfigError {
    let (line, column) = match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (line, column)
        }
        None => (0, 0),
    };
    ConfigError::Parse {
        line,
        column,
        message: e.message().to_string(),
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    seed: Option<u64>,
    steps: Option<u64>,
    product_fraction: Option<f64>,
    carryover_fraction: Option<f64>,
    network: Option<toml::Value>,
    population: Option<PopulationSection>,
    noise: Option<NoiseSection>,
    metrics: Option<MetricsSection>,
    snapshot: Option<SnapshotSection>,
    pathways: Option<Vec<Pathway>>,
    output: Option<OutputSection>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PopulationSection {
    m13: Option<usize>,
    m7: Option<usize>,
    m3: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    sigma: Option<f64>,
    kind: Option<NoiseKind>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricsSection {
    cadence: Option<u64>,
    sample_size: Option<usize>,
    epsilon: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotSection {
    cadence: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<String>,
}

impl ConfigFile {
    fn into_config(self) -> Result<SimConfig, ConfigError> {
        let d = SimConfig::default();
        let seed = self.seed.ok_or_else(|| invalid("seed", "missing required key"))?;
        let steps = self.steps.ok_or_else(|| invalid("steps", "missing required key"))?;
        let pop = self.population.unwrap_or_default();
        let noise = self.noise.unwrap_or_default();
        let metrics = self.metrics.unwrap_or_default();
        let network = match self.network {
            None => default_network(),
            Some(toml::Value::String(s)) if s == "default" => default_network(),
            Some(toml::Value::String(s)) => {
                return Err(invalid(
                    "network",
                    format!("expected \"default\" or a list of rules, got {s:?}"),
                ))
            }
            Some(value) => ReactionNetwork::new(
                Vec::<ReactionRule>::deserialize(value)
                    .map_err(|e| invalid("network", e.to_string()))?,
            ),
        };
        Ok(SimConfig {
            counts: [
                pop.m13.unwrap_or(d.counts[0]),
                pop.m7.unwrap_or(d.counts[1]),
                pop.m3.unwrap_or(d.counts[2]),
            ],
            steps,
            seed,
            product_fraction: self.product_fraction.unwrap_or(d.product_fraction),
            carryover_fraction: self.carryover_fraction.unwrap_or(d.carryover_fraction),
            noise: NoiseConfig {
                sigma: noise.sigma.unwrap_or(d.noise.sigma),
                kind: noise.kind.unwrap_or(d.noise.kind),
            },
            network,
            pathways: self.pathways.unwrap_or(d.pathways),
            metrics: MetricsConfig {
                cadence: metrics.cadence.unwrap_or(d.metrics.cadence),
                sample_size: metrics.sample_size.unwrap_or(d.metrics.sample_size),
                epsilon: metrics.epsilon.unwrap_or(d.metrics.epsilon),
            },
            snapshot_cadence: self
                .snapshot
                .and_then(|s| s.cadence)
                .unwrap_or(d.snapshot_cadence),
            output_dir: self
                .output
                .and_then(|o| o.dir)
                .map(PathBuf::from)
                .unwrap_or(d.output_dir),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let c = SimConfig::from_toml("seed = 3\nsteps = 10\n").unwrap();
        assert_eq!(c.counts, [5000, 5000, 5000]);
        assert_eq!((c.product_fraction, c.carryover_fraction), (0.9, 0.1));
        assert_eq!(c.noise.sigma, 0.01);
        assert_eq!(c.network, default_network());
        assert_eq!((c.seed, c.steps), (3, 10));
    }

    #[test]
    fn fractions_must_sum_to_one() {
        let err = SimConfig::from_toml(
            "seed = 1\nsteps = 1\nproduct_fraction = 0.8\ncarryover_fraction = 0.1\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("fractions must sum to 1"), "{err}");
    }

    #[test]
    fn unknown_key_rejected_with_position() {
        let err = SimConfig::from_toml("seed = 1\nsteps = 1\n[noise]\nsigmaa = 0.1\n").unwrap_err();
        match err {
            ConfigError::Parse { line, message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("sigmaa"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_rule_reports_violation_verbatim() {
        let text = r#"
seed = 1
steps = 1
[[network]]
id = "R1"
substrate = "m13"
catalyst = "m13"
product = "m7"
direction = "encode"
k = 13
p = 2
s = 1
[[network]]
id = "R3"
substrate = "m7"
catalyst = "m7"
product = "m13"
direction = "decode"
k = 7
p = 0
s = 1
"#;
        let err = SimConfig::from_toml(text).unwrap_err();
        match err {
            ConfigError::Network(v) => assert_eq!(v, vec!["R1: conv_output_length = 5 ≠ 7"]),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn echo_roundtrips() {
        let mut c = SimConfig::with_counts(11, 40, 30);
        c.noise.sigma = 0.0125;
        c.metrics.epsilon = 0.07;
        let back = SimConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn missing_seed_names_key() {
        let err = SimConfig::from_toml("steps = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref key, .. } if key == "seed"));
    }

    #[test]
    fn tiny_population_rejected() {
        let err = SimConfig::from_toml("seed = 1\nsteps = 1\n[population]\nm3 = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref key, .. } if key == "population.m3"));
    }
}
