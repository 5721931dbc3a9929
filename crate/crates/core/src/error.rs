use std::path::PathBuf;

use thiserror::Error;

use crate::carrier::CarrierFormat;
use crate::dsl::Pos;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown backend `{0}` (expected ieee, mca-rr, mca-pb, mca-full or cestac)")]
    UnknownBackend(String),
    #[error("virtual precision {precision} out of range 1..={max} for {carrier}")]
    Precision { precision: u32, carrier: CarrierFormat, max: u32 },
    #[error("digit base {0} not supported (expected 2 or 10)")]
    Beta(u32),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{pos}: syntax error: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub pos: Pos,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("{pos}: undeclared identifier `{name}`")]
    Undeclared { name: String, pos: Pos },
    #[error("{pos}: `{name}` is already declared")]
    Redeclared { name: String, pos: Pos },
    #[error("{pos}: type mismatch: {detail}")]
    TypeMismatch { detail: String, pos: Pos },
    #[error("{pos}: loop bound must be an integer expression")]
    NonIntegerLoopBound { pos: Pos },
    #[error("{pos}: `{name}` is modified inside the loop that uses it as a bound or counter")]
    LoopVariableModified { name: String, pos: Pos },
    #[error("{pos}: index {index} out of bounds for `{name}` of length {len}")]
    IndexOutOfBounds { name: String, index: i64, len: usize, pos: Pos },
    #[error("{pos}: {detail}")]
    Invalid { detail: String, pos: Pos },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuntimeError {
    #[error("{pos}: index {index} out of bounds for `{name}` of length {len}")]
    IndexOutOfBounds { name: String, index: i64, len: usize, pos: Pos },
    #[error("{pos}: integer {detail}")]
    Integer { detail: &'static str, pos: Pos },
    #[error("missing input `{0}`")]
    MissingInput(String),
    #[error("input `{name}`: {detail}")]
    BadInput { name: String, detail: String },
    #[error("unknown input `{0}`")]
    UnknownInput(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("reference value is zero")]
    ZeroReference,
    #[error("value {0} must be positive")]
    NonPositive(f64),
    #[error("ragged trace: {0}")]
    RaggedTrace(String),
}

/// Errors surfaced by the experiment harness and corpus runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("sample {sample}: worker panicked: {message}")]
    WorkerPanic { sample: u64, message: String },
    #[error("sample {sample}: {source}")]
    Sample { sample: u64, source: RuntimeError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("unknown corpus case `{0}`")]
    UnknownCase(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{0}")]
    Usage(String),
    #[error("report has no samples to emit")]
    EmptyReport,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
