//! Runs N-sample experiments on a worker pool and collects ordered results.
//!
//! Sample `k` always draws from `RngStream(root_seed, k)`, so the report does
//! not depend on the number of workers.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::{Arithmetic, BackendConfig, BackendKind, IeeeArithmetic};
use crate::carrier::{Carrier, CarrierFormat};
use crate::cestac::CestacArithmetic;
use crate::corpus::{self, oracle};
use crate::dsl::{self, CheckedProgram, Evaluation, Inputs};
use crate::error::{Error, Result, RuntimeError};
use crate::mca::{McaArithmetic, McaParams};
use crate::rng::{RandomSource, RngStream};

mod corpus_run;
mod report;

pub use corpus_run::{run_corpus, CaseOutcome, CheckOutcome, CorpusOutcome};
pub use report::{emit_report, CestacRun, OutputReport, Report, SpecEcho};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgramSource {
    /// A kernel source file.
    Path(PathBuf),
    /// A corpus case address, `name[:key=value]*`.
    Case(String),
    /// Source text held in memory.
    Inline { name: String, source: String },
}

impl ProgramSource {
    pub fn label(&self) -> String {
        match self {
            ProgramSource::Path(p) => p.display().to_string(),
            ProgramSource::Case(c) => c.clone(),
            ProgramSource::Inline { name, .. } => name.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Usage(format!("unknown format `{other}` (expected json or csv)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub program: ProgramSource,
    pub backend: BackendKind,
    /// Virtual precision; the carrier's full precision when `None`.
    pub precision: Option<u32>,
    /// Carrier for program files; corpus cases fix their own.
    pub carrier: Option<CarrierFormat>,
    /// Inputs for program files; corpus cases generate their own.
    pub inputs: Inputs,
    pub n_samples: u64,
    pub root_seed: u64,
    pub jobs: usize,
    pub trace: bool,
    /// CESTAC: run one triple per sample index instead of a single run.
    pub multi_seed: bool,
    /// Keep raw per-sample values in the report.
    pub keep_values: bool,
}

impl ExperimentSpec {
    pub fn new(program: ProgramSource, backend: BackendKind) -> Self {
        Self {
            program,
            backend,
            precision: None,
            carrier: None,
            inputs: Inputs::new(),
            n_samples: 1,
            root_seed: 0,
            jobs: 1,
            trace: false,
            multi_seed: false,
            keep_values: true,
        }
    }

    pub fn case(address: &str, backend: BackendKind) -> Self {
        Self::new(ProgramSource::Case(address.to_string()), backend)
    }

    pub fn samples(mut self, n: u64) -> Self {
        self.n_samples = n;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.root_seed = seed;
        self
    }

    pub fn jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self
    }

    pub fn precision(mut self, t: u32) -> Self {
        self.precision = Some(t);
        self
    }

    pub fn traced(mut self) -> Self {
        self.trace = true;
        self
    }

    /// Samples actually run: CESTAC collapses to one run unless multi-seed.
    pub fn effective_samples(&self) -> u64 {
        if self.backend == BackendKind::Cestac && !self.multi_seed {
            1
        } else {
            self.n_samples
        }
    }
}

/// Inputs from a JSON object: integers bind to `int` inputs (or promote to
/// float scalars), other numbers to float scalars, arrays to float arrays.
pub fn inputs_from_json(text: &str) -> Result<Inputs> {
    use serde_json::Value;
    let bad = |m: String| Error::Usage(format!("inputs: {m}"));
    let v: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| bad("expected a JSON object".into()))?;
    let mut inputs = Inputs::new();
    for (name, v) in obj {
        let value = match v {
            Value::Number(n) => match n.as_i64() {
                Some(k) => dsl::InputValue::Int(k),
                None => dsl::InputValue::Scalar(n.as_f64().ok_or_else(|| bad(format!("`{name}` is not a number")))?),
            },
            Value::Array(xs) => dsl::InputValue::Array(
                xs.iter()
                    .map(|x| x.as_f64().ok_or_else(|| bad(format!("`{name}` holds a non-number"))))
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(bad(format!("`{name}` must be a number or an array of numbers"))),
        };
        inputs.insert(name.clone(), value);
    }
    Ok(inputs)
}

/// A program ready to run: checked code, carrier, inputs and references.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub label: String,
    pub program: CheckedProgram,
    pub carrier: CarrierFormat,
    pub inputs: Inputs,
    pub references: Vec<(String, BigRational)>,
}

pub fn prepare(spec: &ExperimentSpec) -> Result<Prepared> {
    let (label, source, carrier, inputs, references) = match &spec.program {
        ProgramSource::Case(address) => {
            let case = corpus::case_by_name(address)?;
            if let Some(c) = spec.carrier {
                if c != case.carrier {
                    return Err(Error::Usage(format!("case `{}` runs on {}, not {c}", case.name, case.carrier)));
                }
            }
            (case.name, case.source, case.carrier, case.inputs, case.references)
        }
        ProgramSource::Path(path) => {
            let source =
                std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            let carrier = spec.carrier.unwrap_or(CarrierFormat::Binary64);
            (path.display().to_string(), source, carrier, spec.inputs.clone(), Vec::new())
        }
        ProgramSource::Inline { name, source } => {
            let carrier = spec.carrier.unwrap_or(CarrierFormat::Binary64);
            (name.clone(), source.clone(), carrier, spec.inputs.clone(), Vec::new())
        }
    };
    let program = dsl::compile(&label, &source)?;
    Ok(Prepared { label, program, carrier, inputs, references })
}

pub fn backend_config(spec: &ExperimentSpec, carrier: CarrierFormat) -> Result<BackendConfig> {
    let t = spec.precision.unwrap_or(carrier.precision());
    Ok(BackendConfig::new(spec.backend, carrier, t)?)
}

/// One evaluation with an explicit random source. Deterministic backends
/// ignore the source.
pub fn run_sample<C: Carrier, R: RandomSource>(
    program: &CheckedProgram,
    config: &BackendConfig,
    inputs: &Inputs,
    rng: R,
    trace: bool,
) -> Result<Evaluation, RuntimeError> {
    fn go<A: Arithmetic>(p: &CheckedProgram, mut a: A, i: &Inputs, t: bool) -> Result<Evaluation, RuntimeError> {
        dsl::evaluate(p, &mut a, i, t)
    }
    match config.kind {
        BackendKind::Ieee => go(program, IeeeArithmetic::<C>::new(), inputs, trace),
        BackendKind::Cestac => go(program, CestacArithmetic::<C, R>::new(rng), inputs, trace),
        _ => {
            let params = McaParams::from_config(config).expect("MCA backend");
            go(program, McaArithmetic::<C, R>::new(params, rng), inputs, trace)
        }
    }
}

/// Sample `k` of an experiment, with its own stream.
pub fn run_indexed(
    prepared: &Prepared,
    config: &BackendConfig,
    root_seed: u64,
    k: u64,
    trace: bool,
) -> Result<Evaluation, RuntimeError> {
    let rng = RngStream::new(root_seed, k);
    match prepared.carrier {
        CarrierFormat::Binary32 => run_sample::<f32, _>(&prepared.program, config, &prepared.inputs, rng, trace),
        CarrierFormat::Binary64 => run_sample::<f64, _>(&prepared.program, config, &prepared.inputs, rng, trace),
    }
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".into()
    }
}

/// Run `n` samples on `jobs` workers; results come back in sample order. The
/// first failing sample (by index) aborts the experiment.
pub fn run_parallel<T, F>(n: u64, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<T>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|k| match catch_unwind(AssertUnwindSafe(|| f(k))) {
                Ok(r) => r,
                Err(p) => Err(Error::WorkerPanic { sample: k, message: panic_message(&*p) }),
            })
            .collect()
    });
    results.into_iter().collect()
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Report> {
    if spec.n_samples == 0 {
        return Err(Error::Usage("need at least one sample".into()));
    }
    if spec.jobs == 0 {
        return Err(Error::Usage("need at least one job".into()));
    }
    let prepared = prepare(spec)?;
    let config = backend_config(spec, prepared.carrier)?;
    let n = spec.effective_samples();
    let started = Instant::now();
    let samples = run_parallel(n, spec.jobs, |k| {
        run_indexed(&prepared, &config, spec.root_seed, k, spec.trace).map_err(|source| Error::Sample { sample: k, source })
    })?;
    let wall = started.elapsed();
    let references: Vec<(String, f64)> =
        prepared.references.iter().map(|(n, q)| (n.clone(), oracle::to_f64(q))).collect();
    Report::build(spec, &prepared, &config, samples, &references, wall)
}
