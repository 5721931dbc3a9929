use std::path::Path;

use serde::Serialize;

use super::{emit_report, run_experiment, ExperimentSpec, Format, Report};
use crate::corpus::manifest::{Check, Manifest, ManifestCase, Metric};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub output: String,
    pub metric: Metric,
    pub value: f64,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseOutcome {
    pub case: String,
    pub backend: String,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
    #[serde(skip)]
    pub report: Report,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusOutcome {
    pub cases: Vec<CaseOutcome>,
    pub passed: bool,
}

fn metric_value(report: &Report, check: &Check) -> Result<f64> {
    let out = report
        .output(&check.output)
        .ok_or_else(|| Error::Manifest(format!("no output `{}` in `{}`", check.output, report.spec.program)))?;
    let nan = f64::NAN;
    let cestac_runs = || {
        report
            .cestac
            .as_ref()
            .and_then(|c| c.iter().find(|o| o.name == check.output))
            .ok_or_else(|| Error::Manifest(format!("metric {:?} needs the cestac backend", check.metric)))
    };
    Ok(match check.metric {
        Metric::Mean => out.mean,
        Metric::Std => out.std.unwrap_or(nan),
        Metric::RelStd => out.relative_std().unwrap_or(nan),
        Metric::S2 => out.s2.unwrap_or(nan),
        Metric::S10 => out.s10.unwrap_or(nan),
        Metric::NanCount => out.nan_count as f64,
        Metric::DigitsVsReference => out.digits_vs_reference.unwrap_or(nan),
        Metric::AbsErrorVsReference => out.reference.map_or(nan, |r| (out.mean - r).abs()),
        Metric::CestacDigits => cestac_runs()?.runs[0].digits,
        Metric::NoiseRuns => cestac_runs()?.runs.iter().filter(|r| r.is_noise || r.has_nan()).count() as f64,
    })
}

fn run_case(c: &ManifestCase) -> Result<CaseOutcome> {
    let mut spec = ExperimentSpec::case(&c.case, c.backend).samples(c.samples).seed(c.seed);
    spec.precision = c.precision;
    spec.multi_seed = c.multi_seed;
    spec.jobs = c.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let report = run_experiment(&spec)?;
    let mut checks = Vec::new();
    for ch in &c.checks {
        let value = metric_value(&report, ch)?;
        checks.push(CheckOutcome {
            output: ch.output.clone(),
            metric: ch.metric,
            value,
            min: ch.min,
            max: ch.max,
            passed: ch.holds(value),
        });
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(CaseOutcome { case: report.spec.program.clone(), backend: c.backend.to_string(), checks, passed, report })
}

/// Run every case of a manifest. With `out_dir`, each case's JSON report and a
/// `summary.json` are written there.
pub fn run_corpus(manifest: &Path, out_dir: Option<&Path>) -> Result<CorpusOutcome> {
    let m = Manifest::load(manifest)?;
    let mut cases = Vec::with_capacity(m.cases.len());
    for c in &m.cases {
        cases.push(run_case(c)?);
    }
    let passed = cases.iter().all(|c| c.passed);
    let outcome = CorpusOutcome { cases, passed };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
        for (i, c) in outcome.cases.iter().enumerate() {
            let stem: String =
                c.case.chars().map(|ch| if ch.is_ascii_alphanumeric() { ch } else { '_' }).collect();
            emit_report(&c.report, Format::Json, &dir.join(format!("{i:02}_{stem}_{}.json", c.backend)))?;
        }
        let summary = serde_json::to_string_pretty(&outcome).map_err(|e| Error::Usage(e.to_string()))?;
        let path = dir.join("summary.json");
        std::fs::write(&path, summary).map_err(|source| Error::Io { path, source })?;
    }
    Ok(outcome)
}
