//! Acceptance gate: one line per criterion, nonzero exit if any gating check fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use znd_core::suite::{run_suite, SuiteOptions, CRITERIA};
use znd_core::{parse_scenario, CheckResult, Thresholds};

/// Pinned here so a change to the library defaults cannot loosen the gate.
fn pinned() -> Thresholds {
    Thresholds {
        eos_continuity: 1e-10,
        thermo_relative: 1e-6,
        oracle: 1e-10,
        slope: 1e-6,
        eigen_residual: 1e-10,
        background: 1e-10,
        residual: 1e-8,
        z: 1e-6,
        z_exact: 1e-12,
        ratio_low: 1.8,
        ratio_high: 2.2,
        spread: 0.25,
        refinement_ratio: 1.5,
        growth_factor: 10.0,
        reference_time: 10.0,
        lax_margin: 1e-12,
        derivative_zero: 1e-8,
    }
}

/// The `znd` binary from the same target directory; `cargo test --workspace` builds it.
fn znd_binary() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    // target/<profile>/deps/acceptance-<hash>
    let bin = exe.parent()?.parent()?.join(format!("znd{}", std::env::consts::EXE_SUFFIX));
    bin.exists().then_some(bin)
}

/// Runs the binary twice on the same scenario and compares every table byte for byte.
fn binary_determinism(scenario: &Path) -> CheckResult {
    let started = std::time::Instant::now();
    let Some(znd) = znd_binary() else {
        return CheckResult {
            name: "binary_determinism".into(),
            value: f64::NAN,
            threshold: 0.0,
            pass: false,
            runtime_s: 0.0,
            note: "znd binary not found; run through `cargo test --workspace`".into(),
            informational: false,
        };
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut ok = true;
    for d in &dirs {
        let status = Command::new(&znd)
            .arg("run")
            .arg(scenario)
            .args(["--t-end", "2"])
            .arg("--output-dir")
            .arg(d.path())
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false);
        ok &= status;
    }
    let mut differing = 0usize;
    for f in ["snapshots.csv", "history.csv", "norms.csv", "front.csv", "summary.json"] {
        let read = |d: &tempfile::TempDir| std::fs::read(d.path().join(f)).unwrap_or_default();
        let (a, b) = (read(&dirs[0]), read(&dirs[1]));
        if a.is_empty() || a != b {
            differing += 1;
        }
    }
    CheckResult {
        name: "binary_determinism".into(),
        value: differing as f64,
        threshold: 0.0,
        pass: ok && differing == 0,
        runtime_s: started.elapsed().as_secs_f64(),
        note: String::new(),
        informational: false,
    }
}

fn describe(c: &CheckResult) -> String {
    let verdict = match (c.pass, c.informational) {
        (true, _) => "pass",
        (false, true) => "info",
        (false, false) => "FAIL",
    };
    let mut out = format!("{}={}({:.4e} vs {:.4e})", c.name, verdict, c.value, c.threshold);
    if !c.pass && !c.note.is_empty() {
        out.push_str(&format!(" [{}]", c.note));
    }
    out
}

fn main() -> ExitCode {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let scenario = root.join("scenarios/default.json");
    let cfg = match parse_scenario(&scenario) {
        Ok(c) => c,
        Err(e) => {
            println!("acceptance: cannot load {}: {e}", scenario.display());
            return ExitCode::FAILURE;
        }
    };
    let report = match run_suite(&cfg, &pinned(), &SuiteOptions::default()) {
        Ok(r) => r,
        Err(e) => {
            println!("acceptance: suite aborted: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut checks = report.checks.clone();
    checks.push(binary_determinism(&scenario));

    let criterion_of = |name: &str| {
        if name == "binary_determinism" {
            return Some(12);
        }
        CRITERIA.iter().find(|(_, n)| *n == name).map(|(k, _)| *k)
    };
    let mut all = true;
    for k in 1..=12u8 {
        let group: Vec<&CheckResult> = checks.iter().filter(|c| criterion_of(&c.name) == Some(k)).collect();
        let pass = !group.is_empty() && group.iter().all(|c| c.pass || c.informational);
        all &= pass;
        let detail: Vec<String> = group.iter().map(|c| describe(c)).collect();
        println!("criterion {k:>2}: {}  {}", if pass { "PASS" } else { "FAIL" }, detail.join("; "));
    }
    println!("acceptance: {}", if all { "all criteria pass" } else { "some criteria fail" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
