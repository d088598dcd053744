use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use conelab_cli::config::{canonical_json, config_digest};
use conelab_cli::output::fmt_f64;
use conelab_cli::{resolve_out, run, CliError, Command, RunManifest, RunOptions, Verdict};

const ASYM_FREQUENCY: &str = r#"{
  "metric": { "kind": "asym-conical", "dimension": 3, "slope": 0.8 },
  "operation": { "k": 1, "grid": { "lo": 1, "hi": 100, "per_decade": 32 } },
  "output": { "dir": "unused" }
}"#;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn options(out: &Path) -> RunOptions {
    RunOptions {
        out: Some(out.to_path_buf()),
        ..RunOptions::default()
    }
}

fn run_scenario(command: Command, file: &str, out: &Path) -> RunManifest {
    let text = fs::read_to_string(scenario(file)).unwrap();
    run(command, &text, &options(out)).unwrap()
}

fn artifacts(dir: &Path, manifest: &RunManifest) -> Vec<(String, Vec<u8>)> {
    manifest
        .outputs
        .iter()
        .map(|o| (o.path.clone(), fs::read(dir.join(&o.path)).unwrap()))
        .collect()
}

#[test]
fn reruns_are_byte_identical() {
    let cases = [
        (Command::VerifyNi, "ni.json"),
        (Command::VerifyDing, "ding.json"),
        (Command::Frequency, "asym-frequency.json"),
        (Command::ThreeCircles, "cone-three-circles.json"),
        (Command::Spectrum, "asym-spectrum.json"),
        (Command::Existence, "existence-asym.json"),
        (Command::Classify, "classify-ding.json"),
    ];
    for (command, file) in cases {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ma = run_scenario(command, file, a.path());
        let mb = run_scenario(command, file, b.path());
        assert_eq!(ma.config_digest, mb.config_digest);
        assert!(!ma.outputs.is_empty(), "{file}");
        assert_eq!(artifacts(a.path(), &ma), artifacts(b.path(), &mb), "{file}");
        let strip = |m: &RunManifest| {
            m.checks
                .iter()
                .map(|c| (c.name.clone(), c.verdict, c.detail.clone()))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&ma), strip(&mb));
    }
}

#[test]
fn manifest_outputs_parse_back_with_their_headers() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = run_scenario(Command::VerifyNi, "ni.json", dir.path());
    let on_disk: RunManifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(on_disk.config_digest, manifest.config_digest);
    assert_eq!(on_disk.checks.len(), manifest.checks.len());
    for o in &manifest.outputs {
        let mut reader = csv::Reader::from_path(dir.path().join(&o.path)).unwrap();
        let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(header, o.header);
        assert_eq!(header, ["r", "K_x1x2", "K_xy", "K_y1y2", "K_rx", "K_ry"]);
        let mut rows = 0;
        for record in reader.records() {
            let record = record.unwrap();
            for field in record.iter() {
                let x: f64 = field.parse().unwrap();
                assert_eq!(fmt_f64(x), field, "not the shortest round-trip form");
            }
            rows += 1;
        }
        assert_eq!(rows, o.rows);
        assert_eq!(rows, 10_000);
    }
}

#[test]
fn verify_ni_reports_every_paper_claim() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(Command::VerifyNi, "ni.json", dir.path());
    for i in 1..=8 {
        assert_eq!(
            m.check(&format!("assumption-{i}")).unwrap().verdict,
            Verdict::Pass
        );
    }
    for name in [
        "c2-gluing-f",
        "c2-gluing-h",
        "curvature-positive",
        "curvature-grid-stability",
        "growth-degree",
    ] {
        assert_eq!(m.check(name).unwrap().verdict, Verdict::Pass, "{name}");
    }
    assert_eq!(m.verdict, Verdict::Pass);
    assert_eq!(m.exit_code(), 0);
}

#[test]
fn verify_ding_reports_curvature_growth_and_exponential_mode() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(Command::VerifyDing, "ding.json", dir.path());
    for name in ["ricci-nonnegative", "linear-growth", "mode-classification"] {
        assert_eq!(m.check(name).unwrap().verdict, Verdict::Pass, "{name}");
    }
    assert!(m
        .check("mode-classification")
        .unwrap()
        .detail
        .contains("exponentially"));
}

#[test]
fn existence_on_ding_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(Command::Existence, "existence-ding.json", dir.path());
    assert_eq!(m.check("pipeline").unwrap().verdict, Verdict::Fail);
    assert_eq!(m.exit_code(), 1);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("existence.json")).unwrap())
            .unwrap();
    assert_eq!(report["status"]["status"], "verification-failure");
    assert_eq!(report["status"]["stage"], "lemma53");
}

#[test]
fn frequency_needs_maximal_growth() {
    let dir = tempfile::tempdir().unwrap();
    let text = ASYM_FREQUENCY.replace(
        r#""kind": "asym-conical", "dimension": 3, "slope": 0.8"#,
        r#""kind": "ding""#,
    );
    let m = run(Command::Frequency, &text, &options(dir.path())).unwrap();
    assert_eq!(m.verdict, Verdict::PreconditionFailed);
    assert_eq!(m.exit_code(), 2);
    assert!(m.outputs.is_empty());
}

#[test]
fn empty_config_lists_missing_keys() {
    let err = run(Command::Spectrum, "{}", &RunOptions::default()).unwrap_err();
    match &err {
        CliError::MissingKeys(keys) => assert_eq!(keys, &["metric", "operation", "output"]),
        other => panic!("{other:?}"),
    }
    assert_eq!(err.exit_code(), 2);
    let err = run(
        Command::Spectrum,
        r#"{"metric": {}, "operation": {}, "output": {}}"#,
        &RunOptions::default(),
    )
    .unwrap_err();
    assert!(
        err.to_string().contains("metric.kind") && err.to_string().contains("output.dir"),
        "{err}"
    );
}

#[test]
fn invalid_configs_are_usage_errors() {
    let bad = [
        ASYM_FREQUENCY.replace(r#""k": 1"#, r#""k": 1, "bogus": 3"#),
        ASYM_FREQUENCY.replace(r#""lo": 1, "hi": 100"#, r#""lo": 100, "hi": 1"#),
        ASYM_FREQUENCY.replace(r#""k": 1"#, r#""k": 1, "tolerance": -1"#),
        ASYM_FREQUENCY.replace(r#""slope": 0.8"#, r#""slope": 1.5"#),
        ASYM_FREQUENCY.replace(r#""kind": "asym-conical""#, r#""kind": "torus""#),
        "not json".to_string(),
    ];
    for text in bad {
        let err = run(Command::Frequency, &text, &RunOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }
    let dir = tempfile::tempdir().unwrap();
    let err = run(Command::VerifyNi, ASYM_FREQUENCY, &options(dir.path())).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let opts = RunOptions {
        tol: Some(0.0),
        ..options(dir.path())
    };
    assert_eq!(
        run(Command::Frequency, ASYM_FREQUENCY, &opts)
            .unwrap_err()
            .exit_code(),
        2
    );
}

#[test]
fn digest_ignores_key_order_and_whitespace() {
    let a: serde_json::Value =
        serde_json::from_str(r#"{"b": 1, "a": {"y": [1, {"q": 2, "p": 3}], "x": 0.5}}"#).unwrap();
    let b: serde_json::Value = serde_json::from_str(
        r#"{ "a": {"x": 0.5, "y": [1, {"p": 3, "q": 2}]},
        "b": 1 }"#,
    )
    .unwrap();
    assert_eq!(
        canonical_json(&a),
        r#"{"a":{"x":0.5,"y":[1,{"p":3,"q":2}]},"b":1}"#
    );
    assert_eq!(config_digest(&a), config_digest(&b));
    let c: serde_json::Value =
        serde_json::from_str(r#"{"b": 2, "a": {"y": [1, {"q": 2, "p": 3}], "x": 0.5}}"#).unwrap();
    assert_ne!(config_digest(&a), config_digest(&c));
    assert_eq!(config_digest(&a).len(), 64);

    let dir = tempfile::tempdir().unwrap();
    let reordered = r#"{"output": {"dir": "x"}, "operation": {"grid": {"per_decade": 32, "hi": 100, "lo": 1}, "k": 1},
        "metric": {"slope": 0.8, "dimension": 3, "kind": "asym-conical"}}"#;
    let m1 = run(
        Command::Frequency,
        ASYM_FREQUENCY.replace("unused", "x").as_str(),
        &options(dir.path()),
    )
    .unwrap();
    let m2 = run(Command::Frequency, reordered, &options(dir.path())).unwrap();
    assert_eq!(m1.config_digest, m2.config_digest);
}

#[test]
fn float_formatting_is_shortest_round_trip() {
    for x in [
        0.0,
        1.0,
        -2.5,
        0.1,
        1e-300,
        2.4867395164541094e-88,
        123456.789,
        1e16,
        5e-324,
        f64::MAX,
        1.0 / 3.0,
    ] {
        let s = fmt_f64(x);
        assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
    }
    assert_eq!(fmt_f64(1.0), "1");
    assert_eq!(fmt_f64(0.1), "0.1");
    assert_eq!(fmt_f64(1e-300), "1e-300");
    assert_eq!(fmt_f64(f64::NAN), "NaN");
}

#[test]
fn env_override_beats_flag() {
    let flag = Some(PathBuf::from("flag"));
    assert_eq!(
        resolve_out(flag.clone(), Some(PathBuf::from("env"))),
        Some(PathBuf::from("env"))
    );
    assert_eq!(resolve_out(flag.clone(), None), flag);
    assert_eq!(resolve_out(flag.clone(), Some(PathBuf::new())), flag);
}

#[test]
fn binary_exit_codes_and_env_override() {
    let bin = env!("CARGO_BIN_EXE_conelab");
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, "{}").unwrap();
    let out = Process::new(bin)
        .args(["spectrum", "--config"])
        .arg(&empty)
        .env_remove("CONELAB_OUT")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("metric, operation, output"), "{stderr}");

    let env_dir = dir.path().join("from-env");
    let out = Process::new(bin)
        .args(["spectrum", "--config"])
        .arg(scenario("asym-spectrum.json"))
        .args(["--out", dir.path().join("from-flag").to_str().unwrap()])
        .env("CONELAB_OUT", &env_dir)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(env_dir.join("run.json").exists());
    assert!(env_dir.join("spectrum.csv").exists());
    assert!(!dir.path().join("from-flag").exists());

    let out = Process::new(bin)
        .args(["existence", "--config"])
        .arg(scenario("existence-ding.json"))
        .args(["--out", dir.path().join("ding").to_str().unwrap()])
        .env_remove("CONELAB_OUT")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = Process::new(bin)
        .args(["no-such-command", "--config", "x"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_csv_lists_sphere_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    run_scenario(Command::Spectrum, "asym-spectrum.json", dir.path());
    let mut reader = csv::Reader::from_path(dir.path().join("spectrum.csv")).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["k", "lambda", "multiplicity", "alpha"]
    );
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.unwrap();
        let lambda: f64 = rec[1].parse().unwrap();
        let mult: usize = rec[2].parse().unwrap();
        let alpha: f64 = rec[3].parse().unwrap();
        let want = (k * (k + 1)) as f64 / 0.64;
        assert!((lambda - want).abs() < 1e-12 * want.max(1.0));
        assert_eq!(mult, 2 * k + 1);
        assert!((alpha * (alpha + 1.0) - lambda).abs() < 1e-9 * lambda.max(1.0));
    }
}

#[test]
fn paper_factors_skip_out_of_range_windows() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        paper_factors: true,
        ..options(dir.path())
    };
    let m = run(Command::Frequency, ASYM_FREQUENCY, &opts).unwrap();
    assert_eq!(m.check("d-growth").unwrap().verdict, Verdict::Skipped);
    assert!(m.settings.paper_factors);
    let m = run(Command::Frequency, ASYM_FREQUENCY, &options(dir.path())).unwrap();
    assert_eq!(m.check("d-growth").unwrap().verdict, Verdict::Pass);
}

#[test]
fn command_names_round_trip() {
    for c in Command::ALL {
        assert_eq!(Command::parse(c.name()), Some(c));
    }
    assert_eq!(Command::parse("verify"), None);
}

#[test]
fn existence_precondition_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
      "metric": { "kind": "euclidean", "dimension": 3 },
      "operation": { "k": 1, "d": 2, "levels": 3 },
      "output": { "dir": "unused" }
    }"#;
    let m = run(Command::Existence, text, &options(dir.path())).unwrap();
    assert_eq!(m.verdict, Verdict::PreconditionFailed);
    assert_eq!(m.exit_code(), 2);
}

#[test]
fn frequency_writes_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    run(Command::Frequency, ASYM_FREQUENCY, &options(dir.path())).unwrap();
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("frequency.json")).unwrap()).unwrap();
    assert!(summary["sup_freq"].as_f64().unwrap() > 1.0);
    assert!(summary["identity_residual"].as_f64().unwrap() < 1e-4);
    let names: Vec<&str> = summary["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "derivative-identity",
            "i1-volume-ratio",
            "frequency-bound",
            "d-growth"
        ]
    );
}
