use std::fs;
use std::process::{Command, Output};

fn ggbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ggbm"))
        .args(args)
        .env_remove("GGBM_DEFAULT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn brownian_green_constant() {
    let o = ggbm(&["eval", "green-constant", "--beta", "1", "--alpha", "1", "--dim", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0.159154943091895");
}

#[test]
fn domain_error_names_constraint() {
    let o = ggbm(&["eval", "green-constant", "--beta", "0.5", "--alpha", "1", "--dim", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("alpha > 1"), "{err}");

    let o = ggbm(&["eval", "green-constant", "--beta", "0.5", "--alpha", "1.5", "--dim", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("d*alpha > 2"));
}

#[test]
fn mittag_leffler_at_minus_one() {
    let o = ggbm(&["eval", "ml", "--beta", "1", "--z", "-1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0.367879441171442");
}

#[test]
fn eval_json_is_parseable() {
    let o = ggbm(&["eval", "mwright", "--beta", "0.5", "--tau", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    // M_{1/2}(τ) = e^{−τ²/4}/√π
    let exact = (-0.25f64).exp() / std::f64::consts::PI.sqrt();
    assert!((v["value"].as_f64().unwrap() - exact).abs() < 1e-13);
}

#[test]
fn ybeta_at_one_is_a_point_mass() {
    let o = ggbm(&["sample", "ybeta", "--beta", "1", "-n", "5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1\n1\n1\n1\n1\n");
}

#[test]
fn ggbm_path_csv_shape() {
    let args = [
        "sample", "ggbm", "--beta", "0.8", "--alpha", "1.5", "--dim", "2", "--steps", "1024", "--seed", "7",
    ];
    let o = ggbm(&args);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x1,x2");
    assert_eq!(lines.len(), 1 + 1025);
    let first: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 0.0, 0.0]);
    assert_eq!(stdout(&ggbm(&args)), text);
}

#[test]
fn fbm_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = ggbm(&["sample", "fbm", "--hurst", "0.5", "--steps", "256", "--seed", "3", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn default_seed_env_var_is_honoured() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_ggbm"));
        c.args(["sample", "fbm", "--hurst", "0.3", "--steps", "8"]).args(extra);
        match env {
            Some(v) => c.env("GGBM_DEFAULT_SEED", v),
            None => c.env_remove("GGBM_DEFAULT_SEED"),
        };
        c.output().unwrap().stdout
    };
    assert_eq!(run(Some("11"), &[]), run(None, &["--seed", "11"]));
    assert_ne!(run(Some("11"), &[]), run(None, &[]));
    assert_eq!(run(None, &[]), run(None, &["--seed", "42"]));
}

#[test]
fn unwritable_output_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("x.csv");
    let o = ggbm(&["sample", "ybeta", "--beta", "0.5", "--out", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_covariance_passes() {
    let o = ggbm(&["verify", "covariance", "--beta", "0.8", "--alpha", "1.2", "--paths", "20000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    for c in v["checks"].as_array().unwrap() {
        for key in ["name", "paper_anchor", "expected", "observed", "tolerance", "pass"] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn verify_specfun_passes() {
    let o = ggbm(&["verify", "specfun", "--paths", "100000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_green_is_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for threads in ["1", "8"] {
        let path = dir.path().join(format!("green{threads}.json"));
        let o = ggbm(&[
            "verify", "green", "--seed", "42", "--paths", "4000", "--threads", threads, "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.code() == Some(0) || o.status.code() == Some(1));
        outs.push(fs::read(path).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(ggbm(&["verify", "nope"]).status.code(), Some(2));
}

#[test]
fn estimate_potential_emits_estimate_json() {
    let o = ggbm(&[
        "estimate-potential", "--beta", "1", "--alpha", "1", "--dim", "3", "--paths", "2000", "--t-max", "20",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n_paths"], 2000);
    assert!(v["mean"].as_f64().unwrap() > 0.0);
    assert_eq!(v["f_descriptor"]["kind"], "gaussian");
}
