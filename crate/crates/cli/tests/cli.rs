use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use surfdec_cli::config::THREADS_ENV;

fn surfdec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfdec"))
        .args(args)
        .env_remove(THREADS_ENV)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&surfdec(&["--help"])), 0);
    assert_eq!(code(&surfdec(&["--version"])), 0);
    let o = surfdec(&["analyze", "--no-such-flag"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    assert_eq!(code(&surfdec(&[])), 2);
    assert_eq!(code(&surfdec(&["frobnicate"])), 2);
}

#[test]
fn analyze_writes_curvature_and_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = surfdec(&["analyze", "--profile", "torus", "--domain", "0.7,1.3", "--out", out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("curvature.csv")).unwrap();
    assert!(csv.starts_with("r,K,lambda_rad,lambda_ang\n"));
    assert!(csv.lines().count() > 100);
    let s = json(&dir.path().join("structure.json"));
    let zeros = s["zeros"].as_array().unwrap();
    assert_eq!(zeros.len(), 1);
    assert!((zeros[0]["r"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(dir.path().join("analyze.config.json").exists());
}

#[test]
fn partition_to_a_single_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let o = surfdec(&[
        "partition",
        "--profile",
        "torus",
        "--delta",
        "2.44e-4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = json(&path);
    assert!(m["boxes"].as_array().unwrap().len() > 1000);
    assert!(dir.path().join("m.config.json").exists());

    // a file target holds one manifest only
    let o = surfdec(&[
        "partition",
        "--profile",
        "torus",
        "--delta",
        "0.01,0.001",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"profile": "cone", "params": [1.0], "delta": [0.00390625]}"#).unwrap();
    let out = dir.path().join("a");
    let o = surfdec(&[
        "partition",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(out.join("manifest_2^-8.json").exists());
    let echo = json(&out.join("partition.config.json"));
    assert_eq!(echo["profile"], "cone");
    assert_eq!(echo["delta"][0].as_f64(), Some(0.00390625));

    let out = dir.path().join("b");
    let o = surfdec(&[
        "partition",
        "--config",
        cfg.to_str().unwrap(),
        "--delta",
        "0.015625",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(out.join("manifest_2^-6.json").exists());
    assert!(!out.join("manifest_2^-8.json").exists());

    // the echo alone reproduces the run
    let again = dir.path().join("c");
    let o = surfdec(&[
        "partition",
        "--config",
        out.join("partition.config.json").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read(out.join("manifest_2^-6.json")).unwrap(),
        fs::read(again.join("manifest_2^-6.json")).unwrap()
    );
}

#[test]
fn config_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    };
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let bad_delta = write("d.json", r#"{"profile": "cone", "delta": 1.5}"#);
    let o = surfdec(&["partition", "--config", bad_delta.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("delta must lie in (0,1)"), "{}", stderr(&o));

    let no_profile = write("p.json", r#"{"delta": [0.01]}"#);
    let o = surfdec(&["partition", "--config", no_profile.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("missing profile"), "{}", stderr(&o));

    let unknown = write("u.json", "{\n  \"profile\": \"cone\",\n  \"deltas\": [0.01]\n}");
    let o = surfdec(&["partition", "--config", unknown.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 2);
    let e = stderr(&o);
    assert!(e.contains("deltas") && e.contains("line 3"), "{e}");

    let o = surfdec(&[
        "partition",
        "--config",
        dir.path().join("absent.json").to_str().unwrap(),
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn threads_flag_beats_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, flag: Option<&str>, sub: &str| {
        let out = dir.path().join(sub);
        let mut c = Command::new(env!("CARGO_BIN_EXE_surfdec"));
        c.args([
            "analyze",
            "--profile",
            "paraboloid",
            "--samples",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
        c.env_remove(THREADS_ENV);
        if let Some(v) = env {
            c.env(THREADS_ENV, v);
        }
        if let Some(v) = flag {
            c.args(["--threads", v]);
        }
        let o = c.output().unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        json(&out.join("analyze.config.json"))["threads"].as_u64()
    };
    assert_eq!(run(None, None, "a"), Some(0));
    assert_eq!(run(Some("3"), None, "b"), Some(3));
    assert_eq!(run(Some("3"), Some("1"), "c"), Some(1));
}

#[test]
fn verify_fails_on_a_damaged_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let o = surfdec(&[
        "partition",
        "--profile",
        "cone",
        "--params",
        "1",
        "--delta",
        "0.015625",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let out = dir.path().join("ok");
    let o = surfdec(&[
        "verify",
        "--manifest",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&out.join("verify.json"))[0]["pass"], true);

    let mut m = json(&path);
    m["boxes"].as_array_mut().unwrap().pop();
    let damaged = dir.path().join("damaged.json");
    fs::write(&damaged, serde_json::to_string(&m).unwrap()).unwrap();
    let out = dir.path().join("bad");
    let o = surfdec(&[
        "verify",
        "--manifest",
        damaged.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let report = json(&out.join("verify.json"));
    assert_eq!(report[0]["pass"], false);
    assert!(!report[0]["tiling_problems"].as_array().unwrap().is_empty());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["prop5", "--N", "4,8,16", "--delta", "0.00390625", "--p", "4"],
        vec![
            "experiment",
            "--preset",
            "torus",
            "--delta",
            "0.125,0.0625,0.03125",
            "--family",
            "random-phase",
            "--seed",
            "7",
        ],
        vec![
            "lemma-check",
            "--profile",
            "perturbed-cone",
            "--params",
            "3",
            "--delta",
            "0.000244140625",
        ],
    ];
    for (i, args) in runs.iter().enumerate() {
        let outs: Vec<_> = ["x", "y"]
            .iter()
            .map(|tag| {
                let out = dir.path().join(format!("{i}{tag}"));
                let mut a = args.clone();
                a.extend(["--out", out.to_str().unwrap()]);
                let o = surfdec(&a);
                assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
                out
            })
            .collect();
        let mut names: Vec<_> = fs::read_dir(&outs[0])
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert!(names.len() >= 2);
        for n in names {
            let (a, b) = (fs::read(outs[0].join(&n)).unwrap(), fs::read(outs[1].join(&n)).unwrap());
            if n.to_string_lossy().ends_with(".config.json") {
                continue;
            }
            assert!(a == b, "{args:?}: {n:?} differs");
        }
    }
}

#[test]
fn in_process_entry_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let argv = ["surfdec", "analyze", "--profile", "cone", "--params", "2", "--out", out];
    assert_eq!(surfdec_cli::run(argv.iter().map(std::ffi::OsString::from)), 0);
    let s = json(&dir.path().join("structure.json"));
    assert_eq!(s["zeros"][0]["case"], "cone");
}
