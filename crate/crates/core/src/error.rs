use std::path::PathBuf;

use thiserror::Error;

use crate::molecule::MoleculeKind;

/// Errors from the numeric kernels, reaction rules and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChemError {
    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("value {value} at index {index} lies outside [-1, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("unknown molecule kind {0:?}")]
    UnknownKind(String),
    #[error("invalid conv spec: {0}")]
    InvalidSpec(String),
    #[error("window never fits: input length {len_in} + 2*{padding} < kernel {kernel}")]
    WindowTooLarge {
        len_in: usize,
        kernel: usize,
        padding: usize,
    },
    #[error("decode output length {0} is not positive")]
    NonPositiveLength(i64),
    #[error("rule {rule}: {role} kind is {actual}, rule expects {expected}")]
    KindMismatch {
        rule: String,
        role: &'static str,
        expected: MoleculeKind,
        actual: MoleculeKind,
    },
    #[error("no reaction rule produces {0}")]
    NoProducingRule(MoleculeKind),
    #[error("reaction pool for {0} is empty (too few molecules)")]
    EmptyPool(MoleculeKind),
    #[error("unknown rule id {0:?}")]
    UnknownRule(String),
    #[error("invalid pathway {name:?}: {reason}")]
    InvalidPathway { name: String, reason: String },
    #[error("not enough {kind} catalysts: need {needed}, have {available}")]
    InsufficientCatalysts {
        kind: MoleculeKind,
        needed: usize,
        available: usize,
    },
    #[error("empty molecule list")]
    EmptyInput,
    #[error("{0}")]
    Invalid(String),
}

/// Errors raised while loading or validating a run configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("network validation failed:\n{}", .0.join("\n"))]
    Network(Vec<String>),
}

/// Errors from reading or writing binary snapshots.
#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("not a snapshot file (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot format version {found} (this build reads version {supported})")]
    Version { found: u32, supported: u32 },
    #[error("truncated snapshot: need at least {needed} bytes, file has {actual}")]
    Truncated { needed: usize, actual: usize },
    #[error("checksum mismatch in byte range {start}..{end}")]
    Checksum { start: usize, end: usize },
    #[error("malformed snapshot: {0}")]
    Malformed(String),
}

/// Errors from a full simulation run (engine plus its output sinks).
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Chem(#[from] ChemError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("step {step}: {source}")]
    Snapshot {
        step: u64,
        source: SnapshotError,
    },
    #[error("step {step}: I/O error on {path}: {source}")]
    Io {
        step: u64,
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("metrics file {path}: {message}")]
    Metrics { path: PathBuf, message: String },
}
