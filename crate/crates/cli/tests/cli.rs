use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn xxness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xxness"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Value printed on the `key value` line.
fn field(o: &Output, key: &str) -> f64 {
    stdout(o)
        .lines()
        .find_map(|l| {
            let mut it = l.split_whitespace();
            (it.next() == Some(key)).then(|| it.next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no {key} in\n{}", stdout(o)))
}

fn manifest(dir: &Path, cmd: &str) -> serde_json::Value {
    let text = fs::read_to_string(dir.join(format!("{cmd}.manifest.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn thermal_critical_point() {
    let o = xxness(&["thermal-critical", "--phi", "0"]);
    assert!(o.status.success());
    assert!((field(&o, "beta_c") - 0.5162).abs() < 5e-4);
    assert!((field(&o, "temperature_c") - 1.94).abs() < 0.01);
}

#[test]
fn thermal_state_above_and_below_critical_temperature() {
    let cold = xxness(&["thermal", "--beta", "2"]);
    let hot = xxness(&["thermal", "--beta", "0.3"]);
    assert!(field(&cold, "lambda_min") < 0.0);
    assert!(field(&hot, "lambda_min") > 0.0);
    let flag = |o: &Output| {
        stdout(o)
            .lines()
            .find(|l| l.starts_with("entangled"))
            .map(|l| l.ends_with("true"))
    };
    assert_eq!((flag(&cold), flag(&hot)), (Some(true), Some(false)));
}

#[test]
fn ness_prints_known_values() {
    let o = xxness(&["ness", "--gamma", "1", "--mu", "2", "--n", "5"]);
    assert!(o.status.success());
    assert_eq!(field(&o, "lambda_bulk"), -0.0625);
    assert_eq!(field(&o, "current"), 0.5);
    assert_eq!(field(&o, "lambda_2_3"), -0.0625);
}

#[test]
fn oracle_matches_ness() {
    let o = xxness(&["oracle", "--n", "5", "--gamma", "1", "--c", "1", "--d", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((field(&o, "lambda_2_3") + 0.0625).abs() < 1e-8);
    assert!(field(&o, "lambda_1_3") >= -1e-10);
    assert_eq!(field(&o, "nullity"), 1.0);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["ness"][..],
        &["ness", "--gamma", "1", "--mu", "5"],
        &["oracle", "--gamma", "1", "--mu", "1"],
        &["oracle", "--n", "9", "--gamma", "1", "--mu", "1"],
        &["scan", "--grid", "c=-1:1:5", "--classifier", "nonsense", "--gamma", "1"],
        &["frobnicate"],
        &["thermal-critical", "--phi", "zero"],
    ] {
        let o = xxness(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn computational_failures_exit_1() {
    // The whole line lies in one phase, so there is nothing to bisect.
    let o = xxness(&[
        "trace",
        "--grid",
        "d=-1:1:11",
        "--c",
        "0",
        "--gamma",
        "1",
        "--classifier",
        "bulk-pair",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "gamma = 1.0\nmu = 1.0\nmu-bar = 0.1\n").unwrap();
    let base = xxness(&["ness", "--config", cfg.to_str().unwrap()]);
    assert!(base.status.success());
    assert_eq!(field(&base, "mu"), 1.0);
    let over = xxness(&["ness", "--config", cfg.to_str().unwrap(), "--mu", "1.5"]);
    assert_eq!(field(&over, "mu"), 1.5);
    assert_eq!(field(&over, "mu_bar"), 0.1);

    let json = dir.path().join("run.json");
    fs::write(&json, r#"{"phi": 4}"#).unwrap();
    let o = xxness(&["thermal-critical", "--config", json.to_str().unwrap()]);
    assert!((field(&o, "beta_c") - 0.5146).abs() < 5e-4);

    fs::write(&json, r#"{"phi": 4, "typo": 1}"#).unwrap();
    assert_eq!(
        xxness(&["thermal-critical", "--config", json.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn scan_writes_csv_sidecar_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "scan",
        "--grid",
        "c=-1:1:41",
        "--grid",
        "d=-1:1:41",
        "--gamma",
        "2",
        "--classifier",
        "boundary-pair",
        "--out",
        out,
    ];
    let o = xxness(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("c,d,lambda_min,entangled,status"));
    assert_eq!(lines.count(), 41 * 41);
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("scan.json")).unwrap()).unwrap();
    assert_eq!(side["spec"]["classifier"], "boundary-pair");

    let m = manifest(dir.path(), "scan");
    assert_eq!(m["code_version"], env!("CARGO_PKG_VERSION"));
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for f in outputs {
        let bytes = fs::read(f["path"].as_str().unwrap()).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap().len(), 64);
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
    let first = csv.clone();
    assert!(xxness(&args).status.success());
    assert_eq!(fs::read_to_string(dir.path().join("scan.csv")).unwrap(), first);
}

#[test]
fn strict_scan_fails_on_node_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // Both couplings vanish at gamma = 0, so that node cannot be solved.
    let args = [
        "scan",
        "--grid",
        "gamma=0:1:2",
        "--c",
        "0.5",
        "--d",
        "0.5",
        "--classifier",
        "oracle",
        "--n",
        "3",
        "--out",
        out,
    ];
    let loose = xxness(&args);
    assert!(loose.status.success(), "{}", String::from_utf8_lossy(&loose.stderr));
    let csv = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert_eq!(csv.matches(",error").count(), 1);
    let strict = xxness(&[&args[..], &["--strict"]].concat());
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn trace_bisects_tongue_edge() {
    let o = xxness(&[
        "trace",
        "--grid",
        "c=0.5:1:51",
        "--d",
        "1",
        "--gamma",
        "2",
        "--classifier",
        "boundary-pair",
        "--width",
        "1e-9",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("c,est_error,lambda"));
    let c: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((c - 0.7248284804206077).abs() < 1e-6, "{c}");
}

#[test]
fn figure_six_writes_masks() {
    let dir = tempfile::tempdir().unwrap();
    let o = xxness(&[
        "figure",
        "fig6",
        "--resolution",
        "51",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["fig6_cd.csv", "fig6_u_mubar.csv", "fig6.json", "figure.manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fig6.json")).unwrap()).unwrap();
    assert_eq!(side["checks"]["mask_point_symmetric"], 1.0);
    assert!(side["checks"]["max_boundary_deviation"].as_f64().unwrap() < 1e-5);
}

#[test]
fn boundaries_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = xxness(&[
        "boundaries",
        "--gamma",
        "1",
        "--n",
        "6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!((field(&o, "bulk_c_min") - (13.0 - 8.0 * 2f64.sqrt()) / 3.0).abs() < 1e-11);
    assert!((field(&o, "dephasing_gamma_c") - (2f64.sqrt() - 1.0) / 4.0).abs() < 1e-11);
    assert!(dir.path().join("pocket_edge.csv").exists());
    assert!(dir.path().join("boundaries.json").exists());
}

#[test]
fn quick_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = xxness(&[
        "verify",
        "--n",
        "4",
        "--samples",
        "50",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 12);
    assert!(!text.contains("FAIL"));
    assert!(dir.path().join("verify.json").exists());
}

#[test]
fn threads_flag_is_accepted() {
    let o = xxness(&["--threads", "2", "thermal-critical"]);
    assert!(o.status.success());
}
