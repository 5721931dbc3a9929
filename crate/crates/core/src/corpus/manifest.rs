//! Corpus manifest: which cases to run, how, and what their outputs must satisfy.
//!
//! ```toml
//! [[case]]
//! case = "unstable_branch"
//! backend = "mca-full"
//! samples = 100
//! seed = 7
//!
//! [[case.check]]
//! output = "c"
//! metric = "s10"
//! min = 8.0
//! max = 11.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backend::BackendKind;
use crate::error::Error;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(rename = "case", default)]
    pub cases: Vec<ManifestCase>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ManifestCase {
    /// Case address, `name[:key=value]*`.
    pub case: String,
    pub backend: BackendKind,
    /// Virtual precision; the carrier's full precision when absent.
    pub precision: Option<u32>,
    #[serde(default = "one")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    pub jobs: Option<usize>,
    /// CESTAC only: one triple per seed instead of a single run.
    #[serde(default)]
    pub multi_seed: bool,
    #[serde(rename = "check", default)]
    pub checks: Vec<Check>,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub output: String,
    pub metric: Metric,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mean,
    Std,
    /// `std / |mean|`.
    RelStd,
    S2,
    S10,
    NanCount,
    /// Decimal digits of the sample mean against the exact reference.
    DigitsVsReference,
    /// Decimal digits CESTAC reports for the first run.
    CestacDigits,
    /// CESTAC runs flagged as noise or holding a NaN component.
    NoiseRuns,
    /// Absolute distance of the mean from the exact reference.
    AbsErrorVsReference,
}

impl Metric {
    /// The spelling used in manifests.
    pub fn name(self) -> &'static str {
        match self {
            Metric::Mean => "mean",
            Metric::Std => "std",
            Metric::RelStd => "rel_std",
            Metric::S2 => "s2",
            Metric::S10 => "s10",
            Metric::NanCount => "nan_count",
            Metric::DigitsVsReference => "digits_vs_reference",
            Metric::CestacDigits => "cestac_digits",
            Metric::NoiseRuns => "noise_runs",
            Metric::AbsErrorVsReference => "abs_error_vs_reference",
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Check {
    pub fn holds(&self, value: f64) -> bool {
        !value.is_nan() && self.min.is_none_or(|m| value >= m) && self.max.is_none_or(|m| value <= m)
    }
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let m: Manifest = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        if m.cases.is_empty() {
            return Err(Error::Manifest("no [[case]] entries".into()));
        }
        for c in &m.cases {
            if c.samples == 0 {
                return Err(Error::Manifest(format!("case `{}`: samples must be at least 1", c.case)));
            }
            for ch in &c.checks {
                if ch.min.is_none() && ch.max.is_none() {
                    return Err(Error::Manifest(format!(
                        "case `{}`: check on `{}` needs min or max",
                        c.case, ch.output
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text =
            std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }
}
