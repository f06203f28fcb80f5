//! Acceptance run: criteria 1-10 from one desk-budget `all` run, criterion 11
//! from two smoke runs of the binary. One line per criterion; exits non-zero
//! if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command as Proc, ExitCode};

use krick_cli::{run, Budget, Command, RunConfig};

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).expect("listing run directory") {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            out.insert(name, fs::read(&path).unwrap());
        }
    }
    out
}

fn reproducibility() -> (bool, String) {
    let bin = env!("CARGO_BIN_EXE_krick");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut codes = Vec::new();
    for d in &dirs {
        let status = Proc::new(bin)
            .args(["all", "--budget", "smoke", "--seed", "7", "--workers", "2", "--out"])
            .arg(d.path())
            .env_remove("KRICK_SEED")
            .output()
            .expect("running krick");
        codes.push(status.status.code());
    }
    if codes.iter().any(|c| !matches!(c, Some(0 | 1))) {
        return (false, format!("runs did not complete: exit codes {codes:?}"));
    }
    let a = csv_files(dirs[0].path());
    let b = csv_files(dirs[1].path());
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    let same_set = a.keys().eq(b.keys());
    let passed = !a.is_empty() && same_set && differing.is_empty();
    (passed, format!("{} CSV files compared; differing: {differing:?}", a.len()))
}

fn main() -> ExitCode {
    let mut cfg = RunConfig::preset(Command::All, Budget::Desk);
    let dir = tempfile::tempdir().unwrap();
    cfg.out_dir = dir.path().to_path_buf();
    cfg.workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("acceptance run failed: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let mut results: Vec<(u8, bool, String)> = Vec::new();
    for n in 1..=10u8 {
        let vs: Vec<_> = report.verdicts.iter().filter(|v| v.criterion == Some(n)).collect();
        if vs.is_empty() {
            results.push((n, false, "no verdict produced".into()));
            continue;
        }
        let passed = vs.iter().all(|v| v.passed);
        let text = vs
            .iter()
            .map(|v| format!("{} = {} (threshold {}) {}", v.id, krick_cli::output::num(v.value), v.threshold, v.detail))
            .collect::<Vec<_>>()
            .join("; ");
        results.push((n, passed, text));
    }
    let (passed, text) = reproducibility();
    results.push((11, passed, format!("reproducibility: {text}")));

    println!();
    for (n, passed, text) in &results {
        println!("{} criterion {n:>2}: {text}", if *passed { "PASS" } else { "FAIL" });
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!("acceptance: {} of {} criteria pass", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
