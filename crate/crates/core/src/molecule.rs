//! Molecule kinds and molecule values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ChemError;

/// The three molecular species. Each kind fixes the sequence length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoleculeKind {
    #[serde(rename = "m13")]
    L13,
    #[serde(rename = "m7")]
    L7,
    #[serde(rename = "m3")]
    L3,
}

impl MoleculeKind {
    /// All kinds in storage order (longest first).
    pub const ALL: [MoleculeKind; 3] = [MoleculeKind::L13, MoleculeKind::L7, MoleculeKind::L3];

    #[allow(clippy::len_without_is_empty)]
    pub const fn len(self) -> usize {
        match self {
            MoleculeKind::L13 => 13,
            MoleculeKind::L7 => 7,
            MoleculeKind::L3 => 3,
        }
    }

    /// Position of this kind in [`MoleculeKind::ALL`].
    pub const fn index(self) -> usize {
        match self {
            MoleculeKind::L13 => 0,
            MoleculeKind::L7 => 1,
            MoleculeKind::L3 => 2,
        }
    }

    pub fn from_len(len: usize) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.len() == len)
    }

    /// Short lowercase name, as used in config files and metric columns.
    pub const fn name(self) -> &'static str {
        match self {
            MoleculeKind::L13 => "m13",
            MoleculeKind::L7 => "m7",
            MoleculeKind::L3 => "m3",
        }
    }
}

impl fmt::Display for MoleculeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MoleculeKind {
    type Err = ChemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "m13" | "13" => Ok(MoleculeKind::L13),
            "m7" | "7" => Ok(MoleculeKind::L7),
            "m3" | "3" => Ok(MoleculeKind::L3),
            _ => Err(ChemError::UnknownKind(s.to_string())),
        }
    }
}

/// A typed real vector in `[-1, 1]^L`. It is both data (as a substrate) and
/// operator parameters (as a catalyst kernel).
#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    kind: MoleculeKind,
    values: Vec<f64>,
}

impl Molecule {
    /// Builds a molecule, checking length and range.
    pub fn new(kind: MoleculeKind, values: Vec<f64>) -> Result<Self, ChemError> {
        if values.len() != kind.len() {
            return Err(ChemError::LengthMismatch {
                what: "molecule values",
                expected: kind.len(),
                actual: values.len(),
            });
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(-1.0..=1.0).contains(*v))
        {
            return Err(ChemError::OutOfRange { index: i, value: *v });
        }
        Ok(Self { kind, values })
    }

    pub fn zeros(kind: MoleculeKind) -> Self {
        Self {
            kind,
            values: vec![0.0; kind.len()],
        }
    }

    pub fn kind(&self) -> MoleculeKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}
