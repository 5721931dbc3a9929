use verif_core::harness::{
    backend_config, emit_report, prepare, run_experiment, run_indexed, ExperimentSpec, Format, ProgramSource,
};
use verif_core::{BackendKind, Error};

fn inline(name: &str, source: &str, backend: BackendKind) -> ExperimentSpec {
    ExperimentSpec::new(ProgramSource::Inline { name: name.into(), source: source.into() }, backend)
}

#[test]
fn payload_ignores_worker_count() {
    for spec in [
        ExperimentSpec::case("kahan:variant=naive:n=500", BackendKind::McaRr).samples(100).seed(5).precision(24),
        ExperimentSpec::case("linear_system", BackendKind::McaFull).samples(300).seed(2),
        ExperimentSpec::case("counter:scale=desk:trace_every=250000", BackendKind::McaRr).samples(4).traced(),
        {
            let mut s = ExperimentSpec::case("unstable_branch", BackendKind::Cestac).samples(12);
            s.multi_seed = true;
            s
        },
    ] {
        let one = run_experiment(&spec.clone().jobs(1)).unwrap().payload_json().unwrap();
        for jobs in [4, 16] {
            let other = run_experiment(&spec.clone().jobs(jobs)).unwrap().payload_json().unwrap();
            assert_eq!(one, other, "{} at jobs={jobs}", spec.program.label());
        }
        assert!(!one.contains("wall_time"));
    }
}

#[test]
fn values_are_in_sample_order() {
    let spec = ExperimentSpec::case("linear_system", BackendKind::McaRr).samples(40).seed(8).jobs(7);
    let report = run_experiment(&spec).unwrap();
    let prepared = prepare(&spec).unwrap();
    let config = backend_config(&spec, prepared.carrier).unwrap();
    let got = report.values("x2").unwrap();
    for (k, v) in got.iter().enumerate() {
        let alone = run_indexed(&prepared, &config, 8, k as u64, false).unwrap();
        assert_eq!(alone.outputs[1].1.value().to_bits(), v.to_bits(), "sample {k}");
    }
}

#[test]
fn ieee_samples_are_identical() {
    let report = run_experiment(&ExperimentSpec::case("unstable_branch", BackendKind::Ieee).samples(10)).unwrap();
    let c = report.output("c").unwrap();
    assert!(c.exact);
    assert_eq!(c.mean, 10.0);
    assert_eq!(c.std, Some(0.0));
}

#[test]
fn json_round_trips_every_bit() {
    let spec = ExperimentSpec::case("improbability", BackendKind::McaFull).samples(3).seed(1);
    let report = run_experiment(&spec).unwrap();
    let text = report.render(Format::Json).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for (j, out) in report.outputs.iter().enumerate() {
        let parsed: Vec<u64> = v["outputs"][j]["values"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap().to_bits())
            .collect();
        let held: Vec<u64> = report.values(&out.name).unwrap().iter().map(|x| x.to_bits()).collect();
        assert_eq!(parsed, held, "{}", out.name);
        assert_eq!(v["outputs"][j]["mean"].as_f64().unwrap().to_bits(), out.mean.to_bits());
    }
}

#[test]
fn csv_has_one_row_per_output_and_sample() {
    let report = run_experiment(&ExperimentSpec::case("linear_system", BackendKind::McaRr).samples(3)).unwrap();
    let csv = report.render(Format::Csv).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 1 + 2 * 3);
    assert_eq!(rows[0], "output,sample,value");
    assert!(rows[1].starts_with("x1,0,"));
    assert!(rows[6].starts_with("x2,2,"));
    for row in &rows[1..] {
        let v: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(v.is_finite());
    }
}

#[test]
fn traced_csv_gets_a_companion_file() {
    let spec = ExperimentSpec::case("counter:scale=desk:trace_every=500000", BackendKind::McaRr).samples(2).traced();
    let report = run_experiment(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("counter.csv");
    emit_report(&report, Format::Csv, &path).unwrap();
    let trace = std::fs::read_to_string(dir.path().join("counter.csv.trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 2 * 2);
    assert!(trace.starts_with("label,iteration,sample,value\nc,499999,0,"));
}

#[test]
fn empty_report_is_an_error_and_writes_nothing() {
    let report = run_experiment(&inline("silent", "var x;\nx = 1.0;\n", BackendKind::McaRr).samples(3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    assert!(matches!(emit_report(&report, Format::Json, &path), Err(Error::EmptyReport)));
    assert!(!path.exists());
}

#[test]
fn io_errors_name_the_path() {
    let report = run_experiment(&ExperimentSpec::case("unstable_branch", BackendKind::Ieee)).unwrap();
    let path = std::path::Path::new("/nonexistent-dir/r.json");
    match emit_report(&report, Format::Json, path) {
        Err(e @ Error::Io { .. }) => assert!(e.to_string().contains("/nonexistent-dir/r.json")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn bad_specs_are_rejected() {
    let base = ExperimentSpec::case("unstable_branch", BackendKind::McaRr);
    assert!(matches!(run_experiment(&base.clone().samples(0)), Err(Error::Usage(_))));
    assert!(matches!(run_experiment(&base.clone().jobs(0)), Err(Error::Usage(_))));
    assert!(matches!(run_experiment(&base.clone().precision(54)), Err(Error::Config(_))));
    let parse = inline("broken", "out x;\nx = 1.0 +;\n", BackendKind::Ieee);
    assert!(matches!(run_experiment(&parse), Err(Error::Parse(_))));
    let runtime = inline("oob", "var a[2];\nout x;\nx = 0.0;\nfor i = 0 to 2 { x = x + a[i]; }\n", BackendKind::McaRr);
    assert!(matches!(run_experiment(&runtime.samples(3)), Err(Error::Sample { sample: 0, .. })));
}

#[test]
fn counter_trace_loses_bits_as_it_runs() {
    let spec = ExperimentSpec::case("counter:scale=desk:trace_every=100000", BackendKind::McaRr).samples(24).seed(3);
    let report = run_experiment(&spec.traced()).unwrap();
    let points = &report.evolution[0].points;
    assert_eq!(points.len(), 10);
    assert_eq!(points[0].iteration, 99_999);
    let first = points[0].bits;
    let last = points.last().unwrap().bits;
    assert!(first > 30.0 && last < 12.0, "{first} -> {last}");
    assert!(points.windows(2).filter(|w| w[1].bits <= w[0].bits).count() >= 7);
}
