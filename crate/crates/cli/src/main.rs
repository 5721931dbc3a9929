use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use verif_core::harness::{self, emit_report, run_corpus, run_experiment, ExperimentSpec, Format, ProgramSource};
use verif_core::{BackendKind, CarrierFormat, Error};

#[derive(Parser)]
#[command(name = "verif", version, about = "Monte Carlo Arithmetic and CESTAC experiments on small kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its report.
    Run(RunArgs),
    /// Run every case of a manifest and check its predicates.
    Corpus {
        #[arg(long)]
        manifest: PathBuf,
        /// Write per-case JSON reports and summary.json here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// List corpus case names.
    Cases,
}

#[derive(Args)]
struct RunArgs {
    /// Kernel source file.
    #[arg(long, conflicts_with = "case", required_unless_present = "case")]
    program: Option<PathBuf>,
    /// Corpus case, `name[:key=value]*`.
    #[arg(long)]
    case: Option<String>,
    /// ieee, mca-rr, mca-pb, mca-full or cestac.
    #[arg(long, default_value = "ieee")]
    backend: BackendKind,
    /// Virtual precision in bits; defaults to the carrier's.
    #[arg(long)]
    precision: Option<u32>,
    /// Carrier for program files (binary32 or binary64).
    #[arg(long)]
    carrier: Option<CarrierFormat>,
    /// JSON object with the program's inputs.
    #[arg(long)]
    inputs: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// json or csv.
    #[arg(long, default_value = "json")]
    format: Format,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record trace() points.
    #[arg(long)]
    trace: bool,
    /// CESTAC: one run per sample instead of a single run.
    #[arg(long)]
    multi_seed: bool,
    /// Leave raw per-sample values out of the JSON report.
    #[arg(long)]
    no_values: bool,
}

fn run(a: RunArgs) -> Result<(), Error> {
    let program = match (a.program, a.case) {
        (Some(p), _) => ProgramSource::Path(p),
        (None, Some(c)) => ProgramSource::Case(c),
        (None, None) => return Err(Error::Usage("give --program or --case".into())),
    };
    let mut spec = ExperimentSpec::new(program, a.backend).samples(a.samples).seed(a.seed).jobs(a.jobs);
    spec.precision = a.precision;
    spec.carrier = a.carrier;
    spec.trace = a.trace;
    spec.multi_seed = a.multi_seed;
    spec.keep_values = !a.no_values;
    if let Some(path) = a.inputs {
        let text = std::fs::read_to_string(&path).map_err(|source| Error::Io { path, source })?;
        spec.inputs = harness::inputs_from_json(&text)?;
    }
    let report = run_experiment(&spec)?;
    match a.out {
        Some(path) => emit_report(&report, a.format, &path),
        None => {
            let text = report.render(a.format)?;
            std::io::stdout().write_all(text.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a).map(|()| true),
        Command::Corpus { manifest, out_dir } => run_corpus(&manifest, out_dir.as_deref()).map(|outcome| {
            for c in &outcome.cases {
                println!("{} {} [{}]", if c.passed { "PASS" } else { "FAIL" }, c.case, c.backend);
                for ch in &c.checks {
                    let bound = match (ch.min, ch.max) {
                        (Some(lo), Some(hi)) => format!("in [{lo}, {hi}]"),
                        (Some(lo), None) => format!(">= {lo}"),
                        (None, Some(hi)) => format!("<= {hi}"),
                        (None, None) => String::new(),
                    };
                    let mark = if ch.passed { "ok" } else { "FAILED" };
                    println!("    {} {} = {} {bound} {mark}", ch.output, ch.metric, ch.value);
                }
            }
            outcome.passed
        }),
        Command::Cases => {
            for name in verif_core::corpus::CASE_NAMES {
                println!("{name}");
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("verif: {e}");
            ExitCode::from(2)
        }
    }
}
