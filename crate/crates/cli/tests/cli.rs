use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qpt_cli::config::{load_config, Overrides};
use qpt_cli::output::{summarize, wilson95};
use qpt_cli::run::run_with;
use qpt_cli::CliError;
use qpt_core::parallel::Execution;
use tempfile::TempDir;

const ENTROPY: &str = r#"
tester = "entropy"
eps = 0.25
trials = 12
seed = 42

[instance]
p = { kind = "zipf", n = 48, s = 1.1 }
"#;

const L2_FAR: &str = r#"
tester = "l2"
eps = 0.2
nu = 0.5
trials = 6
seed = 7

[instance]
p = { kind = "uniform", n = 8 }
q = { kind = "alternating", n = 8, distance = 0.2, norm = "l2" }
"#;

fn qpt(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpt")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn schema() -> serde_json::Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/summary.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(summary: &serde_json::Value) {
    let schema = schema();
    let compiled = jsonschema::JSONSchema::options()
        .with_draft(jsonschema::Draft::Draft7)
        .compile(&schema)
        .expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(summary) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "summary does not match schema: {msgs:?}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "e.toml", ENTROPY);
    for out in ["a.csv", "b.csv"] {
        let o = qpt(&["entropy", "--config", "e.toml", "--out", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    // summaries differ only in the echoed output path
    let strip = |n: &str| String::from_utf8(read(n)).unwrap().replace("a.csv", "").replace("b.csv", "");
    assert_eq!(strip("a.summary.json"), strip("b.summary.json"));
}

#[test]
fn parallel_and_sequential_rows_agree() {
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "l2.toml", L2_FAR);
    let cfg = load_config(Some(&path), &Overrides::default()).unwrap();
    let a = run_with(&cfg, Execution::Parallel).unwrap();
    let b = run_with(&cfg, Execution::Sequential).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.rows.iter().map(|r| r.trial).collect::<Vec<_>>(), (0..6).collect::<Vec<_>>());
}

#[test]
fn summaries_validate_against_schema() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "e.toml", ENTROPY);
    write(dir.path(), "l2.toml", L2_FAR);
    let runs: [&[&str]; 4] = [
        &["entropy", "--config", "e.toml", "--out", "e.csv", "--set", "bits=true", "--set", "timing=true"],
        &["l2test", "--config", "l2.toml", "--out", "l2.csv"],
        &["l2test", "--config", "l2.toml", "--out", "q.csv", "--set", "instance.quantum=true", "--set", "route=swap"],
        &[
            "independence",
            "--out",
            "i.csv",
            "--trials",
            "4",
            "--set",
            "eps=0.5",
            "--set",
            "instance.p={kind=\"correlated\",n=2}",
            "--set",
            "instance.factor=[2,2]",
        ],
    ];
    for args in runs {
        let o = qpt(args, dir.path());
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let out = args[args.iter().position(|a| *a == "--out").unwrap() + 1];
        let summary_file = Path::new(out).with_extension("summary.json");
        let text = std::fs::read_to_string(dir.path().join(summary_file)).unwrap();
        assert_valid(&serde_json::from_str(&text).unwrap());
    }
}

#[test]
fn csv_header_is_versioned_and_rows_are_complete() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "e.toml", ENTROPY);
    let o = qpt(&["entropy", "--config", "e.toml", "--set", "timing=true", "--summary", "s.json"], dir.path());
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_reader(&o.stdout[..]);
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "schema");
    let wall = headers.iter().position(|h| h == "wall_ms").unwrap();
    let (est, truth, err) = (7, 10, 11);
    let mut count = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        assert_eq!(&rec[0], "qpt-results/1");
        assert!(!rec[wall].is_empty());
        let e: f64 = rec[est].parse().unwrap();
        let t: f64 = rec[truth].parse().unwrap();
        let d: f64 = rec[err].parse().unwrap();
        assert_eq!(d, (e - t).abs());
        count += 1;
    }
    assert_eq!(count, 12);
}

#[test]
fn json_and_toml_configs_are_equivalent() {
    let dir = TempDir::new().unwrap();
    let toml_path = write(dir.path(), "c.toml", L2_FAR);
    let value: toml::Value = toml::from_str(L2_FAR).unwrap();
    let json_path = write(dir.path(), "c.json", &serde_json::to_string(&value).unwrap());
    let a = load_config(Some(&toml_path), &Overrides::default()).unwrap();
    let b = load_config(Some(&json_path), &Overrides::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn flags_override_file_values() {
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "e.toml", ENTROPY);
    let ov = Overrides {
        sets: vec!["instance.p.n=64".into(), "eps=0.3".into()],
        seed: Some(9),
        trials: Some(3),
        ..Overrides::default()
    };
    let cfg = load_config(Some(&path), &ov).unwrap();
    assert_eq!((cfg.seed, cfg.trials, cfg.eps), (9, 3, 0.3));
    assert_eq!(cfg.instance.build().unwrap().dim(), 64);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "e.toml", ENTROPY);
    write(dir.path(), "broken.toml", "tester = [");
    let cases: [&[&str]; 7] = [
        &["entropy", "--config", "missing.toml"],
        &["entropy", "--config", "broken.toml"],
        &["entropy", "--config", "e.toml", "--set", "eps=1.5"],
        &["entropy", "--config", "e.toml", "--trials", "0"],
        &["l2test", "--config", "e.toml"],
        &["entropy", "--config", "e.toml", "--mode", "matrix", "--set", "instance.p.n=128"],
        &["sweep", "--config", "e.toml", "--set", "sweep.param=\"n\"", "--set", "sweep.values=[16,32]"],
    ];
    for args in cases {
        let o = qpt(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn invariant_failures_map_to_3() {
    let e = CliError::from(qpt_core::Error::Invariant("x".into()));
    assert_eq!(e.exit_code(), 3);
    assert_eq!(CliError::from(qpt_core::Error::Certification("x".into())).exit_code(), 3);
    assert_eq!(CliError::Failed("x".into()).exit_code(), 3);
    assert_eq!(CliError::Config("x".into()).exit_code(), 2);
}

#[test]
fn poly_and_selftest_succeed() {
    let dir = TempDir::new().unwrap();
    let o = qpt(&["poly", "q", "--t", "2", "--beta", "0.5", "--eta", "0.01", "--coeffs"], dir.path());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["parity"], "odd");
    assert_eq!(v["coefficients"].as_array().unwrap().len(), v["degree"].as_u64().unwrap() as usize + 1);
    assert_eq!(qpt(&["poly", "p", "--eta", "0.01"], dir.path()).status.code(), Some(2));

    let o = qpt(&["selftest"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().filter(|l| l.contains(" ok ")).count(), 7);
}

#[test]
fn sweep_reports_slope() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "e.toml", ENTROPY);
    let o = qpt(
        &[
            "sweep",
            "--config",
            "e.toml",
            "--trials",
            "2",
            "--set",
            "sweep.param=\"n\"",
            "--set",
            "sweep.values=[48,96,192]",
            "--out",
            "s.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.summary.json")).unwrap()).unwrap();
    assert_eq!(report["points"].as_array().unwrap().len(), 3);
    let slope = report["slope"].as_f64().unwrap();
    assert!(slope > 0.0 && slope < 1.5, "slope {slope}");
}

/// Equal density operators must be rejected as "far" no more often than the
/// tester's failure budget allows.
#[test]
fn l2_quantum_on_equal_states_rarely_says_far() {
    let dir = TempDir::new().unwrap();
    let path = write(
        dir.path(),
        "q.toml",
        r#"
tester = "l2"
eps = 0.3
trials = 40
seed = 5
[instance]
p = { kind = "haar_density", n = 4, rank = 2, seed = 1 }
q = { kind = "haar_density", n = 4, rank = 2, seed = 1 }
"#,
    );
    let cfg = load_config(Some(&path), &Overrides::default()).unwrap();
    let out = run_with(&cfg, Execution::default()).unwrap();
    let s = summarize(&out).unwrap();
    let far = s.decisions.unwrap().far;
    assert!(far as f64 <= 40.0 / 3.0, "{far} far verdicts");
    assert!(wilson95(s.successes, s.scored).unwrap().low > 0.55);
}
