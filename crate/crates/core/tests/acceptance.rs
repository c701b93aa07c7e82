//! Acceptance run: one pass/fail line per criterion. Exits nonzero if any fails.

use std::path::Path;
use std::process::{Command, ExitCode};

use karlin::verify::{run_suite, Suite, SuiteReport, VerifyOptions};

struct Outcome {
    passed: bool,
    detail: String,
}

fn suite_outcome(suite: Suite, budget_secs: Option<f64>) -> Outcome {
    match run_suite(suite, &VerifyOptions::default()) {
        Ok(report) => {
            let in_time = budget_secs.is_none_or(|b| report.runtime_secs < b);
            let budget = match budget_secs {
                Some(b) => format!("{:.1}s (budget {b:.0}s)", report.runtime_secs),
                None => format!("{:.1}s", report.runtime_secs),
            };
            Outcome { passed: report.passed && in_time, detail: format!("{}; {budget}", summary(&report)) }
        }
        Err(e) => Outcome { passed: false, detail: format!("error: {e}") },
    }
}

fn summary(report: &SuiteReport) -> String {
    let failed: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} = {:e} (need {} {:e})", c.name, c.measured, c.comparison, c.threshold))
        .collect();
    if failed.is_empty() {
        format!("{}/{} checks passed", report.checks.len(), report.checks.len())
    } else {
        format!("failed: {}", failed.join("; "))
    }
}

fn run_cli(args: &[&str], out: &Path, workers: &str) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_karlin"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env("KARLIN_WORKERS", workers)
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if status.code() == Some(0) {
        Ok(())
    } else {
        Err(format!("{args:?} exited with {status}"))
    }
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 4] = [
        &[
            "simulate",
            "--mode",
            "discrete",
            "--alpha",
            "0.5",
            "--n",
            "10000",
            "--grid",
            "0:1:0.1",
            "--replicas",
            "100",
            "--seed",
            "7",
        ],
        &[
            "simulate",
            "--mode",
            "poissonized",
            "--alpha",
            "0.3",
            "--n",
            "5000",
            "--grid",
            "0:1:0.25",
            "--replicas",
            "50",
            "--seed",
            "3",
        ],
        &["verify", "poisson-cov", "--alpha", "0.5", "--n", "1000", "--replicas", "400", "--seed", "5"],
        &[
            "gp-sample",
            "--family",
            "bifbm",
            "--H",
            "2.5",
            "--K",
            "0.2",
            "--grid",
            "0:1:0.01",
            "--paths",
            "20",
            "--seed",
            "1",
        ],
    ];
    let dir = tempfile::tempdir().expect("temp dir");
    let mut compared = 0;
    for (i, args) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for workers in ["1", "2", "4"] {
            let out = dir.path().join(format!("run{i}-w{workers}"));
            if let Err(e) = run_cli(args, &out, workers) {
                return Outcome { passed: false, detail: e };
            }
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
                .expect("output dir")
                .map(|e| e.expect("entry").path())
                .filter(|p| p.file_name().is_some_and(|n| n != "timing.json"))
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).expect("readable")))
                .collect();
            files.sort();
            outputs.push(files);
        }
        if outputs.iter().any(|o| *o != outputs[0]) {
            return Outcome { passed: false, detail: format!("{args:?}: outputs differ across worker counts") };
        }
        compared += outputs[0].len();
    }
    Outcome {
        passed: true,
        detail: format!("{} commands x 3 worker counts, {compared} files byte-identical", commands.len()),
    }
}

type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("exact identities", Box::new(|| suite_outcome(Suite::Identities, Some(5.0)))),
        ("exact Poissonized covariance", Box::new(|| suite_outcome(Suite::PoissonCov, Some(300.0)))),
        ("limit-kernel convergence", Box::new(|| suite_outcome(Suite::LimitCov, Some(900.0)))),
        ("marginal CLT", Box::new(|| suite_outcome(Suite::Clt, None))),
        ("asymptotics and gaps", Box::new(|| suite_outcome(Suite::Gaps, Some(120.0)))),
        ("PSD evidence", Box::new(|| suite_outcome(Suite::Psd, Some(30.0)))),
        ("walk equivalence", Box::new(|| suite_outcome(Suite::Walk, Some(10.0)))),
        ("determinism across worker counts", Box::new(determinism)),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        all &= o.passed;
        println!("criterion {} ({name}): {} [{}]", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
