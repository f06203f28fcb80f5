use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn krick(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krick"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("KRICK_SEED")
        .output()
        .expect("running krick")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn tail_writes_the_rescaled_table() {
    let d = tempfile::tempdir().unwrap();
    let out = krick(&["tail", "--trials", "1e4", "--anchors", "10,100,1000"], d.path());
    assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(d.path().join("tail.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.split(',').any(|c| c == "rescaled"), "{header}");
    assert!(text.lines().count() > 3);
    let m = manifest(d.path());
    assert_eq!(m["config"]["tail"]["trials"], 10_000);
    assert_eq!(m["config"]["tail"]["anchors"], serde_json::json!([10.0, 100.0, 1000.0]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("criterion  1"), "{stdout}");
}

#[test]
fn constants_report_the_characteristic_root() {
    let d = tempfile::tempdir().unwrap();
    let out = krick(&["constants"], d.path());
    assert!(matches!(out.status.code(), Some(0 | 1)));
    let c: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("constants.json")).unwrap()).unwrap();
    let r = c["r_star"]["value"].as_f64().or_else(|| c["r_star"].as_f64()).unwrap();
    assert!((r - 2.0132944555).abs() < 1e-9, "{r}");
    assert!(d.path().join("expansion.csv").exists());
}

#[test]
fn invalid_configuration_exits_with_2() {
    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("bad.json");
    fs::write(&bad, r#"{"command": "tail", "budget": "smoke", "nonsense": 1}"#).unwrap();
    let out = krick(&["tail", "--config", bad.to_str().unwrap()], &d.path().join("o1"));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(krick(&["tail", "--trials", "1.5"], &d.path().join("o2")).status.code(), Some(2));
    assert_eq!(krick(&["tail", "--p", "0.5"], &d.path().join("o3")).status.code(), Some(2));
    assert_eq!(krick(&["tail", "--anchors", "100,10"], &d.path().join("o4")).status.code(), Some(2));
    assert_eq!(krick(&["tail", "--xi", "one-half"], &d.path().join("o5")).status.code(), Some(2));
}

#[test]
fn rerun_of_a_manifest_reproduces_the_tables() {
    let d = tempfile::tempdir().unwrap();
    let first = d.path().join("first");
    let out = krick(&["tail", "--trials", "2e4", "--seed", "5"], &first);
    assert!(matches!(out.status.code(), Some(0 | 1)));
    let second = d.path().join("second");
    let out = krick(&["rerun", first.join("manifest.json").to_str().unwrap()], &second);
    assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(first.join("tail.csv")).unwrap(), fs::read(second.join("tail.csv")).unwrap());
    assert_eq!(manifest(&first)["config"]["seed"], manifest(&second)["config"]["seed"]);
}

#[test]
fn seed_comes_from_the_environment_unless_given() {
    let d = tempfile::tempdir().unwrap();
    let run = |dir: &str, extra: &[&str]| {
        let out = d.path().join(dir);
        let mut args = vec!["model-report"];
        args.extend_from_slice(extra);
        let status = Command::new(env!("CARGO_BIN_EXE_krick"))
            .args(&args)
            .arg("--out")
            .arg(&out)
            .env("KRICK_SEED", "99")
            .status()
            .unwrap();
        assert!(matches!(status.code(), Some(0 | 1)));
        manifest(&out)["config"]["seed"].as_u64().unwrap()
    };
    assert_eq!(run("env", &[]), 99);
    assert_eq!(run("flag", &["--seed", "3"]), 3);
}
