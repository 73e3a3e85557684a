//! Acceptance criteria at desk scale. Prints one PASS/FAIL line per
//! criterion; tolerances are pinned in `renyi_core::suite::CRITERIA`.
//! Runs without the libtest harness so the lines are never captured.

use std::process::Command;

use renyi_core::exec::ExecPolicy;
use renyi_core::suite::{run_criterion, SuiteConfig, SuiteScale, CRITERIA};

const SEED: u64 = 20_240_917;

fn line(id: u32, name: &str, passed: bool, tolerance: &str, extra: &str) -> String {
    format!("{} criterion {id:>2} {name}: {tolerance}{extra}", if passed { "PASS" } else { "FAIL" })
}

/// Runs `verify-all --suite desk` twice with one seed and compares bytes.
fn cli_determinism() -> (bool, String) {
    let dir = tempfile::tempdir().expect("tempdir");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_renyi-lab"))
            .args(["verify-all", "--suite", "desk", "--seed", &SEED.to_string(), "--output"])
            .arg(&out)
            .status()
            .expect("binary runs");
        (status.code(), std::fs::read(&out).unwrap_or_default())
    };
    let (c1, a) = run("a.json");
    let (c2, b) = run("b.json");
    let same = !a.is_empty() && a == b;
    (same && c1 == Some(0) && c2 == Some(0), format!(" [cli exit codes {c1:?}/{c2:?}, {} bytes, identical: {same}]", a.len()))
}

fn main() {
    let cfg = SuiteConfig { scale: SuiteScale::Desk, seed: SEED, policy: ExecPolicy::Parallel };
    let mut failed = Vec::new();
    for (id, _, _, _) in CRITERIA {
        let mut o = run_criterion(id, &cfg);
        let mut extra = format!(" ({:.2?})", o.elapsed);
        if id == 10 {
            let (ok, note) = cli_determinism();
            o.passed &= ok;
            extra.push_str(&note);
        }
        println!("{}", line(o.id, &o.name, o.passed, &o.tolerance, &extra));
        if !o.passed {
            println!("      detail: {}", o.detail);
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all {} criteria passed", CRITERIA.len());
}
