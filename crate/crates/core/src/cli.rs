//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on runtime failure (including failed
//! verification checks), 2 on bad flags or parameters outside their domain.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{KarlinError, Result};
use crate::kernels::{cov_matrix, KernelSpec};
use crate::montecarlo::{resolve_workers, run_replicas, McConfig, McMode};
use crate::urn::{PathGrid, Process, SignMode};
use crate::verify::{run_suite, Suite, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "karlin", version, about = "Randomized Karlin occupancy scheme: simulation and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate urn paths and write them as CSV.
    Simulate(SimulateArgs),
    /// Run a verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Sample paths of a Gaussian process with a named kernel.
    GpSample(GpSampleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UrnMode {
    Discrete,
    Poissonized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Signs {
    Random,
    AllOnes,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "discrete")]
    pub mode: UrnMode,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub n: u64,
    /// Time grid `start:end:step` with inclusive endpoints.
    #[arg(long, default_value = "0:1:0.1")]
    pub grid: String,
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    pub signs: Signs,
    /// Comma-separated subset of z_star,u_star,z,u,z1,z2,u1,u2.
    #[arg(long, value_delimiter = ',')]
    pub processes: Vec<String>,
    /// Divide paths by sigma_n.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value = "karlin-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    /// identities, poisson-cov, limit-cov, clt, gaps, psd or walk.
    pub suite: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value = "karlin-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct GpSampleArgs {
    /// limit-z1, limit-z2, limit-z, limit-u1, limit-u2, limit-u, fbm, bifbm or time-changed-bm.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "H")]
    pub hurst: Option<f64>,
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long, default_value = "0:1:0.01")]
    pub grid: String,
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value = "karlin-out")]
    pub out_dir: PathBuf,
}

/// Parse arguments, run the command and return the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::GpSample(a) => cmd_gp_sample(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &KarlinError) -> i32 {
    match e {
        KarlinError::Domain(_) | KarlinError::InvalidGrid(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| KarlinError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_timing(dir: &Path, start: Instant, workers: usize) -> Result<()> {
    write_json(&dir.join("timing.json"), &json!({"wall_clock_secs": start.elapsed().as_secs_f64(), "workers": workers}))
}

fn csv_writer(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(KarlinError::Domain(format!("alpha must lie in (0,1), got {alpha}")))
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<i32> {
    let start = Instant::now();
    check_alpha(a.alpha)?;
    let grid = PathGrid::parse(&a.grid)?;
    let processes = a
        .processes
        .iter()
        .map(|name| Process::parse(name).ok_or_else(|| KarlinError::Domain(format!("unknown process '{name}'"))))
        .collect::<Result<Vec<_>>>()?;
    let mode = match a.mode {
        UrnMode::Discrete => McMode::Discrete,
        UrnMode::Poissonized => McMode::Poissonized,
    };
    let mut cfg = McConfig::new(mode, a.alpha, a.n, grid, a.replicas, a.seed);
    cfg.sign_mode = match a.signs {
        Signs::Random => SignMode::RandomRademacher,
        Signs::AllOnes => SignMode::AllOnes,
    };
    cfg.processes = processes;
    cfg.normalize = a.normalize;
    cfg.parallel_workers = a.workers;
    let set = run_replicas(&cfg)?;

    fs::create_dir_all(&a.out_dir)?;
    let mut out = csv_writer(&a.out_dir.join("paths.csv"))?;
    writeln!(out, "t,process,value,replica")?;
    let g = set.grid_len();
    for (r, row) in set.values.iter().enumerate() {
        for (c, name) in set.channels.iter().enumerate() {
            for (j, t) in set.times.iter().enumerate() {
                writeln!(out, "{:.16e},{name},{:.16e},{r}", t, row[c * g + j])?;
            }
        }
    }
    out.flush()?;
    let manifest = json!({
        "subcommand": "simulate",
        "artifact_version": version(),
        "seed": a.seed,
        "config": cfg_echo(&cfg),
        "cli": {
            "mode": a.mode,
            "alpha": a.alpha,
            "n": a.n,
            "grid": a.grid,
            "replicas": a.replicas,
            "seed": a.seed,
            "signs": a.signs,
            "processes": set.channels,
            "normalize": a.normalize,
        },
        "sigma_n": set.sigma_n,
        "max_sign_sum_rms_error": set.max_sign_sum_rms_error,
        "rows": set.values.len() * set.channels.len() * g,
        "files": {"paths": "paths.csv", "timing": "timing.json"},
    });
    write_json(&a.out_dir.join("manifest.json"), &manifest)?;
    write_timing(&a.out_dir, start, set.workers)?;
    Ok(EXIT_OK)
}

fn cfg_echo(cfg: &McConfig) -> Value {
    let mut v = serde_json::to_value(cfg).unwrap_or(Value::Null);
    // the worker count never changes results and is reported in the timing file
    if let Value::Object(m) = &mut v {
        m.remove("parallel_workers");
    }
    v
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let start = Instant::now();
    let Some(suite) = Suite::parse(&a.suite) else {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        return Err(KarlinError::Domain(format!("unknown suite '{}' (expected one of {})", a.suite, names.join(", "))));
    };
    let opts = VerifyOptions { alpha: a.alpha, n: a.n, replicas: a.replicas, seed: a.seed, workers: a.workers };
    let report = run_suite(suite, &opts)?;
    for c in &report.checks {
        println!(
            "{} {}: {:e} {} {:e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.comparison,
            c.threshold
        );
    }
    println!("{} {}", report.suite, if report.passed { "passed" } else { "failed" });

    fs::create_dir_all(&a.out_dir)?;
    let report_name = format!("verify-{}.json", suite.name());
    write_json(&a.out_dir.join(&report_name), &report)?;
    let opts_echo = VerifyOptions { workers: None, ..opts };
    let manifest = json!({
        "subcommand": "verify",
        "artifact_version": version(),
        "suite": suite.name(),
        "options": opts_echo,
        "seed": report.params.get("seed").cloned().unwrap_or(Value::Null),
        "passed": report.passed,
        "checks": report.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed})).collect::<Vec<_>>(),
        "files": {"report": report_name, "timing": "timing.json"},
    });
    write_json(&a.out_dir.join("manifest.json"), &manifest)?;
    write_timing(&a.out_dir, start, resolve_workers(a.workers))?;
    Ok(if report.passed { EXIT_OK } else { EXIT_FAILURE })
}

pub fn cmd_gp_sample(a: &GpSampleArgs) -> Result<i32> {
    let start = Instant::now();
    let spec = KernelSpec::from_name(&a.family, a.alpha, a.hurst, a.k)?;
    let grid = PathGrid::parse(&a.grid)?;
    if a.paths == 0 {
        return Err(KarlinError::Domain("paths must be >= 1".into()));
    }
    let cov = cov_matrix(&spec, &grid)?;
    let mut cfg = McConfig::new(McMode::Gp, a.alpha.unwrap_or(0.5), 0, grid, a.paths, a.seed);
    cfg.kernel = Some(spec);
    cfg.parallel_workers = a.workers;
    let set = match run_replicas(&cfg) {
        Ok(s) => s,
        Err(e @ KarlinError::NotPsd { .. }) => {
            eprintln!("error: {e}");
            eprintln!("jitter report: max diagonal {:e}", cov.max_diagonal());
            return Ok(EXIT_FAILURE);
        }
        Err(e) => return Err(e),
    };

    fs::create_dir_all(&a.out_dir)?;
    let mut out = csv_writer(&a.out_dir.join("paths.csv"))?;
    writeln!(out, "t,process,value,replica")?;
    let name = spec.name();
    for (r, row) in set.values.iter().enumerate() {
        for (t, v) in set.times.iter().zip(row) {
            writeln!(out, "{t:.16e},{name},{v:.16e},{r}")?;
        }
    }
    out.flush()?;
    let mut out = csv_writer(&a.out_dir.join("covariance.csv"))?;
    writeln!(out, "s,t,value")?;
    let m = cov.entries();
    for (i, s) in cov.times().iter().enumerate() {
        for (j, t) in cov.times().iter().enumerate() {
            writeln!(out, "{s:.16e},{t:.16e},{:.16e}", m[(i, j)])?;
        }
    }
    out.flush()?;
    let manifest = json!({
        "subcommand": "gp-sample",
        "artifact_version": version(),
        "seed": a.seed,
        "kernel": spec,
        "cli": {
            "family": a.family,
            "alpha": a.alpha,
            "H": a.hurst,
            "K": a.k,
            "grid": a.grid,
            "paths": a.paths,
            "seed": a.seed,
        },
        "jitter_used": set.jitter_used,
        "max_diagonal": cov.max_diagonal(),
        "files": {"paths": "paths.csv", "covariance": "covariance.csv", "timing": "timing.json"},
    });
    write_json(&a.out_dir.join("manifest.json"), &manifest)?;
    write_timing(&a.out_dir, start, set.workers)?;
    println!("jitter_used: {:e}", set.jitter_used);
    Ok(EXIT_OK)
}
