use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ExperimentSpec, Format, Prepared};
use crate::backend::{BackendConfig, BackendKind, Exceptions, OutputValue};
use crate::carrier::CarrierFormat;
use crate::dsl::Evaluation;
use crate::error::{Error, Result};
use crate::stats::{self, EvolutionPoint};

/// The parts of the experiment that determine its result. Worker count and
/// output path are deliberately absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecEcho {
    pub program: String,
    pub backend: BackendKind,
    pub precision: u32,
    pub carrier: CarrierFormat,
    pub samples: u64,
    pub seed: u64,
    pub trace: bool,
    pub multi_seed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputReport {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    /// Absent with fewer than two non-NaN samples.
    pub std: Option<f64>,
    pub s2: Option<f64>,
    pub s10: Option<f64>,
    pub nan_count: usize,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<f64>,
    /// Decimal digits of `mean` against `reference`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub digits_vs_reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub values: Option<Vec<f64>>,
}

impl OutputReport {
    pub fn relative_std(&self) -> Option<f64> {
        self.std.map(|s| s / self.mean.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CestacRun {
    pub sample: u64,
    pub values: [f64; 3],
    pub digits: f64,
    pub is_noise: bool,
}

impl CestacRun {
    pub fn has_nan(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CestacOutput {
    pub name: String,
    pub runs: Vec<CestacRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelEvolution {
    pub label: String,
    pub points: Vec<EvolutionPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub label: String,
    pub iteration: i64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub digits: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub spec: SpecEcho,
    pub outputs: Vec<OutputReport>,
    pub exceptions: Exceptions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cestac: Option<Vec<CestacOutput>>,
    /// Significant bits per traced iteration, for multi-sample runs.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub evolution: Vec<LabelEvolution>,
    /// Raw trace of a single-sample run.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
    #[serde(skip)]
    pub samples: Vec<Evaluation>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl Report {
    pub(super) fn build(
        spec: &ExperimentSpec,
        prepared: &Prepared,
        config: &BackendConfig,
        samples: Vec<Evaluation>,
        references: &[(String, f64)],
        wall_time: Duration,
    ) -> Result<Self> {
        let names = prepared.program.output_names();
        let mut exceptions = Exceptions::default();
        for s in &samples {
            exceptions.merge(&s.exceptions);
        }
        let mut outputs = Vec::with_capacity(names.len());
        for (j, name) in names.iter().enumerate() {
            let values: Vec<f64> = samples.iter().map(|s| s.outputs[j].1.value()).collect();
            outputs.push(output_report(name, values, references, spec.keep_values)?);
        }
        let cestac = (config.kind == BackendKind::Cestac).then(|| {
            names
                .iter()
                .enumerate()
                .map(|(j, name)| CestacOutput {
                    name: name.clone(),
                    runs: samples
                        .iter()
                        .enumerate()
                        .map(|(k, s)| match s.outputs[j].1 {
                            OutputValue::Triple { values, digits } => CestacRun {
                                sample: k as u64,
                                values,
                                digits: digits.digits,
                                is_noise: digits.is_noise,
                            },
                            OutputValue::Scalar(v) => {
                                CestacRun { sample: k as u64, values: [v; 3], digits: 0.0, is_noise: false }
                            }
                        })
                        .collect(),
                })
                .collect()
        });
        let mut evolution = Vec::new();
        let mut trace = Vec::new();
        if spec.trace && samples.len() >= 2 {
            let traces: Vec<_> = samples.iter().map(|s| s.trace.clone()).collect();
            for label in &prepared.program.labels {
                evolution.push(LabelEvolution { label: label.clone(), points: stats::digits_evolution(&traces, label)? });
            }
        } else if spec.trace {
            trace = samples[0]
                .trace
                .iter()
                .map(|p| TraceRow {
                    label: p.label.to_string(),
                    iteration: p.iteration,
                    value: p.value.value(),
                    digits: match p.value {
                        OutputValue::Triple { digits, .. } => Some(digits.digits),
                        OutputValue::Scalar(_) => None,
                    },
                })
                .collect();
        }
        Ok(Report {
            spec: SpecEcho {
                program: prepared.label.clone(),
                backend: config.kind,
                precision: config.precision,
                carrier: config.carrier,
                samples: samples.len() as u64,
                seed: spec.root_seed,
                trace: spec.trace,
                multi_seed: spec.multi_seed,
            },
            outputs,
            exceptions,
            cestac,
            evolution,
            trace,
            samples,
            wall_time,
        })
    }

    pub fn output(&self, name: &str) -> Option<&OutputReport> {
        self.outputs.iter().find(|o| o.name == name)
    }

    /// Raw per-sample values of one output, in sample order.
    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.outputs.iter().position(|o| o.name == name)?;
        Some(self.samples.iter().map(|s| s.outputs[j].1.value()).collect())
    }

    /// Deterministic JSON payload, without the wall-time field.
    pub fn payload_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Usage(format!("serializing report: {e}")))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        if self.outputs.is_empty() || self.samples.is_empty() {
            return Err(Error::EmptyReport);
        }
        match format {
            Format::Json => {
                let mut v = serde_json::to_value(self).map_err(|e| Error::Usage(e.to_string()))?;
                v["wall_time_s"] = serde_json::json!(self.wall_time.as_secs_f64());
                let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Usage(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let mut s = String::from("output,sample,value\n");
                for (j, o) in self.outputs.iter().enumerate() {
                    for (k, sample) in self.samples.iter().enumerate() {
                        let _ = writeln!(s, "{},{k},{:?}", o.name, sample.outputs[j].1.value());
                    }
                }
                Ok(s)
            }
        }
    }

    /// Trace as CSV: one row per (label, iteration, sample).
    pub fn render_trace_csv(&self) -> String {
        let mut s = String::from("label,iteration,sample,value\n");
        for (k, sample) in self.samples.iter().enumerate() {
            for p in &sample.trace {
                let _ = writeln!(s, "{},{},{k},{:?}", p.label, p.iteration, p.value.value());
            }
        }
        s
    }
}

fn output_report(name: &str, values: Vec<f64>, references: &[(String, f64)], keep: bool) -> Result<OutputReport> {
    let reference = references.iter().find(|(n, _)| n == name).map(|r| r.1);
    let (mean, std, s2, s10, nan_count, exact) = if values.len() >= 2 {
        let st = stats::summarize(&values)?;
        let ok = st.valid;
        (st.mean, ok.then_some(st.std), ok.then_some(st.s2), ok.then_some(st.s10), st.nan_count, st.exact)
    } else {
        let v = values[0];
        (v, None, None, None, v.is_nan() as usize, false)
    };
    let digits_vs_reference = reference.filter(|_| mean.is_finite()).map(|r| stats::sig_digits_vs_reference(mean, r, 10).s);
    Ok(OutputReport {
        name: name.to_string(),
        n: values.len(),
        mean,
        std,
        s2,
        s10,
        nan_count,
        exact,
        reference,
        digits_vs_reference,
        values: keep.then_some(values),
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Write the report; with tracing on, CSV output also gets `<path>.trace.csv`.
pub fn emit_report(report: &Report, format: Format, path: &Path) -> Result<()> {
    let text = report.render(format)?;
    write_file(path, &text)?;
    if format == Format::Csv && report.samples.iter().any(|s| !s.trace.is_empty()) {
        let mut p: PathBuf = path.to_path_buf().into_os_string().into();
        p.as_mut_os_string().push(".trace.csv");
        write_file(&p, &report.render_trace_csv())?;
    }
    Ok(())
}
