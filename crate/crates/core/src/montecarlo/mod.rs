//! Replicated simulation with deterministic parallelism, empirical
//! covariances against exact and limiting targets, and convergence tables.

mod report;
mod stats;

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{convergence_report, v_bound_diagnostic, ConvergenceRow};
pub use stats::{empirical_cov, kolmogorov_q, ks_normality, CovEstimate, KsResult};

use crate::error::{domain, KarlinError, Result};
use crate::kernels::{chol_psd, cov_matrix, sample_gp, KernelSpec};
use crate::poisson::{exact_cov, Component, PoissonSimulator};
use crate::rng::{replica_rng, replica_sign_seed};
use crate::series::SignSums;
use crate::urn::{BoxState, DiscreteSimulator, PathGrid, Process, SignMode, SignSource};
use crate::weights::{make_weights, WeightSequence, DEFAULT_TAIL_TOL};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "KARLIN_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McMode {
    Discrete,
    Poissonized,
    Gp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McTarget {
    ExactPoisson,
    LimitKernel,
    None,
}

/// Everything needed to reproduce a Monte Carlo run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub mode: McMode,
    pub alpha: f64,
    pub n: u64,
    pub grid: PathGrid,
    pub replicas: usize,
    pub master_seed: u64,
    pub sign_mode: SignMode,
    /// Signs for `SignMode::FixedVector`.
    pub fixed_signs: Option<Vec<i8>>,
    /// Requested workers; `KARLIN_WORKERS` takes precedence, default is the available parallelism.
    pub parallel_workers: Option<usize>,
    pub target: McTarget,
    /// Processes recorded in urn modes; empty means all eight.
    pub processes: Vec<Process>,
    /// Kernel sampled in gp mode.
    pub kernel: Option<KernelSpec>,
    pub tail_tol: f64,
    /// Divide urn paths by `sigma_n`.
    #[serde(default = "yes")]
    pub normalize: bool,
}

fn yes() -> bool {
    true
}

impl McConfig {
    pub fn new(mode: McMode, alpha: f64, n: u64, grid: PathGrid, replicas: usize, master_seed: u64) -> Self {
        McConfig {
            mode,
            alpha,
            n,
            grid,
            replicas,
            master_seed,
            sign_mode: SignMode::RandomRademacher,
            fixed_signs: None,
            parallel_workers: None,
            target: McTarget::None,
            processes: Vec::new(),
            kernel: None,
            tail_tol: DEFAULT_TAIL_TOL,
            normalize: true,
        }
    }

    pub fn channels(&self) -> Vec<String> {
        match self.mode {
            McMode::Gp => vec![self.kernel.map(|k| k.name()).unwrap_or("gp").to_string()],
            _ => self.process_list().iter().map(|p| p.name().to_string()).collect(),
        }
    }

    fn process_list(&self) -> Vec<Process> {
        if self.processes.is_empty() {
            Process::ALL.to_vec()
        } else {
            self.processes.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return domain("replicas must be >= 1");
        }
        if self.mode == McMode::Gp {
            match self.kernel {
                None => return domain("gp mode needs a kernel"),
                Some(k) => k.validate()?,
            }
            if self.target == McTarget::ExactPoisson {
                return domain("exact-poisson target needs poissonized mode");
            }
        } else {
            if self.n == 0 {
                return domain("n must be >= 1");
            }
            if self.target == McTarget::ExactPoisson && self.mode != McMode::Poissonized {
                return domain("exact-poisson target needs poissonized mode");
            }
        }
        if self.sign_mode == SignMode::FixedVector && self.fixed_signs.is_none() {
            return domain("fixed-vector sign mode needs fixed_signs");
        }
        Ok(())
    }
}

/// Number of workers used for a run.
pub fn resolve_workers(requested: Option<usize>) -> usize {
    if let Some(w) = std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if w > 0 {
            return w;
        }
    }
    requested.filter(|&w| w > 0).unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Per-replica channel values, normalized by `sigma_n` in urn modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaSet {
    pub channels: Vec<String>,
    pub times: Vec<f64>,
    /// `values[r][c * grid_len + j]`.
    pub values: Vec<Vec<f64>>,
    /// `sigma_n` used for normalization (1 in gp mode).
    pub sigma_n: f64,
    pub max_sign_sum_rms_error: f64,
    pub jitter_used: f64,
    pub workers: usize,
}

impl ReplicaSet {
    pub fn grid_len(&self) -> usize {
        self.times.len()
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c == name)
    }

    /// Samples of one channel at one grid index.
    pub fn column(&self, channel: usize, j: usize) -> Vec<f64> {
        let idx = channel * self.grid_len() + j;
        self.values.iter().map(|v| v[idx]).collect()
    }
}

fn signs_for(config: &McConfig, fixed: &Option<Arc<[i8]>>, index: u64) -> SignSource {
    match config.sign_mode {
        SignMode::RandomRademacher => SignSource::random(replica_sign_seed(config.master_seed, index)),
        SignMode::AllOnes => SignSource::AllOnes,
        SignMode::FixedVector => SignSource::Fixed(fixed.clone().expect("validated")),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| KarlinError::Domain(format!("cannot start worker pool: {e}")))
}

/// Run every replica; results are collected in replica-index order.
pub fn run_replicas(config: &McConfig) -> Result<ReplicaSet> {
    config.validate()?;
    let workers = resolve_workers(config.parallel_workers);
    let pool = pool(workers)?;
    let r = config.replicas as u64;
    let times = config.grid.times().to_vec();
    let channels = config.channels();

    if config.mode == McMode::Gp {
        let spec = config.kernel.expect("validated");
        let factored = chol_psd(&cov_matrix(&spec, &config.grid)?)?;
        let values = pool.install(|| {
            (0..r)
                .into_par_iter()
                .map(|i| sample_gp(&factored, &mut replica_rng(config.master_seed, i)))
                .collect::<Result<Vec<_>>>()
        })?;
        return Ok(ReplicaSet {
            channels,
            times,
            values,
            sigma_n: 1.0,
            max_sign_sum_rms_error: 0.0,
            jitter_used: factored.jitter_used(),
            workers,
        });
    }

    let ws = WeightSequence::with_max_terms(config.alpha, config.tail_tol, crate::weights::DEFAULT_MAX_TERMS)?;
    let sigma2 = ws.sigma2(config.n as f64);
    if sigma2 == 0.0 {
        return Err(KarlinError::ZeroSigma(config.n as f64));
    }
    let sigma = sigma2.sqrt();
    let scale = if config.normalize { sigma } else { 1.0 };
    let fixed: Option<Arc<[i8]>> =
        config.fixed_signs.as_ref().map(|v| v.iter().map(|&s| if s < 0 { -1 } else { 1 }).collect());
    let procs = config.process_list();
    let deterministic_signs = config.sign_mode != SignMode::RandomRademacher;

    enum Sim {
        Discrete(DiscreteSimulator),
        Poisson(PoissonSimulator),
    }
    let sim = match config.mode {
        McMode::Discrete => Sim::Discrete(DiscreteSimulator::new(&ws, config.n, &config.grid)?),
        _ => Sim::Poisson(PoissonSimulator::new(&ws, config.n, &config.grid)?),
    };
    let sums_for = |signs: &SignSource| -> SignSums {
        match &sim {
            Sim::Discrete(s) => s.sign_sums(signs),
            Sim::Poisson(s) => s.sign_sums(signs),
        }
    };
    let shared_sums = if deterministic_signs { Some(sums_for(&signs_for(config, &fixed, 0))) } else { None };

    let results: Vec<(Vec<f64>, f64)> = pool.install(|| {
        (0..r)
            .into_par_iter()
            .map_init(BoxState::new, |boxes, i| {
                let signs = signs_for(config, &fixed, i);
                let own;
                let sums = match &shared_sums {
                    Some(s) => s,
                    None => {
                        own = sums_for(&signs);
                        &own
                    }
                };
                let mut rng = replica_rng(config.master_seed, i);
                let bundle = match &sim {
                    Sim::Discrete(s) => s.run_with_sums(&signs, sums, &mut rng, boxes),
                    Sim::Poisson(s) => s.run_with_sums(&signs, sums, &mut rng, boxes).paths,
                };
                let mut row = Vec::with_capacity(procs.len() * times.len());
                for p in &procs {
                    row.extend(bundle.get(*p).iter().map(|x| x / scale));
                }
                let rms = bundle.sign_sum_rms_error.iter().fold(0.0, |m: f64, &x| m.max(x));
                (row, rms)
            })
            .collect()
    });
    let max_rms = results.iter().fold(0.0, |m: f64, r| m.max(r.1)) / scale;
    Ok(ReplicaSet {
        channels,
        times,
        values: results.into_iter().map(|r| r.0).collect(),
        sigma_n: sigma,
        max_sign_sum_rms_error: max_rms,
        jitter_used: 0.0,
        workers,
    })
}

/// Aggregated statistics of a Monte Carlo run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub channels: Vec<String>,
    pub times: Vec<f64>,
    pub replicas: usize,
    pub estimate: CovEstimate,
    /// Target covariance (normalized), `NaN` where no target is defined.
    pub target: Vec<f64>,
    /// `(empirical - target) / se`, `NaN` where no target is defined.
    pub z: Vec<f64>,
    pub max_abs_z: f64,
    pub frac_abs_z_over_3: f64,
    pub targets_defined: usize,
    pub sigma_n: f64,
    pub max_sign_sum_rms_error: f64,
    pub jitter_used: f64,
    /// Wall-clock seconds and worker count; excluded from serialized output.
    #[serde(skip)]
    pub runtime_secs: f64,
    #[serde(skip)]
    pub workers: usize,
}

impl McSummary {
    pub fn dim(&self) -> usize {
        self.estimate.dim
    }

    /// Flat index of `(channel, grid index)`.
    pub fn index(&self, channel: usize, j: usize) -> usize {
        channel * self.times.len() + j
    }
}

/// Normalized target covariance between two channels at `(s, t)`.
fn target_entry(
    config: &McConfig,
    ws: Option<&WeightSequence>,
    sigma2: f64,
    a: &str,
    b: &str,
    s: f64,
    t: f64,
) -> Result<f64> {
    if config.mode == McMode::Gp {
        return Ok(if a == b { config.kernel.expect("validated").eval(s, t) } else { f64::NAN });
    }
    let (Some(pa), Some(pb)) = (Process::parse(a), Process::parse(b)) else {
        return Ok(f64::NAN);
    };
    use Process::*;
    let deterministic = config.sign_mode != SignMode::RandomRademacher;
    // which covariance law applies to each channel
    let law = |p: Process| -> Option<Component> {
        match p {
            ZStar | Z1 => Some(Component::Z1),
            UStar | U1 => Some(Component::U1),
            Z2 if !deterministic => Some(Component::Z2),
            U2 if !deterministic => Some(Component::U2),
            Z if deterministic => Some(Component::Z1),
            U if deterministic => Some(Component::U1),
            _ => None,
        }
    };
    let independent_pair = matches!((pa, pb), (Z1, Z2) | (Z2, Z1) | (U1, U2) | (U2, U1));
    if independent_pair {
        return Ok(0.0);
    }
    if pa != pb {
        return Ok(f64::NAN);
    }
    if deterministic && matches!(pa, Z2 | U2) {
        return Ok(0.0);
    }
    let eval = |c: Component| -> Result<f64> {
        match config.target {
            McTarget::ExactPoisson => Ok(exact_cov(c, ws.expect("urn mode"), config.n as f64, s, t)? / sigma2),
            McTarget::LimitKernel => {
                let alpha = config.alpha;
                let spec = match c {
                    Component::Z1 => KernelSpec::LimitZ1 { alpha },
                    Component::Z2 => KernelSpec::LimitZ2 { alpha },
                    Component::U1 => KernelSpec::LimitU1 { alpha },
                    Component::U2 => KernelSpec::LimitU2 { alpha },
                };
                Ok(spec.eval(s, t))
            }
            McTarget::None => Ok(f64::NAN),
        }
    };
    match pa {
        Z if !deterministic => Ok(eval(Component::Z1)? + eval(Component::Z2)?),
        U if !deterministic => Ok(eval(Component::U1)? + eval(Component::U2)?),
        _ => match law(pa) {
            Some(c) => eval(c),
            None => Ok(f64::NAN),
        },
    }
}

/// Summarize replicas against the configured target.
pub fn summarize(config: &McConfig, set: &ReplicaSet) -> Result<McSummary> {
    let estimate = empirical_cov(&set.values)?;
    let d = estimate.dim;
    let g = set.grid_len();
    let ws = if config.mode == McMode::Gp { None } else { Some(make_weights(config.alpha, config.tail_tol)?) };
    let sigma2 = if config.normalize { set.sigma_n * set.sigma_n } else { 1.0 };
    let mut target = vec![f64::NAN; d * d];
    let mut z = vec![f64::NAN; d * d];
    let mut max_abs_z: f64 = 0.0;
    let mut over = 0usize;
    let mut defined = 0usize;
    if config.target != McTarget::None {
        for a in 0..d {
            for b in 0..d {
                let (ca, ja) = (a / g, a % g);
                let (cb, jb) = (b / g, b % g);
                let v = target_entry(
                    config,
                    ws.as_ref(),
                    sigma2,
                    &set.channels[ca],
                    &set.channels[cb],
                    set.times[ja],
                    set.times[jb],
                )?;
                target[a * d + b] = v;
                if v.is_nan() {
                    continue;
                }
                let diff = estimate.cov[a * d + b] - v;
                let se = estimate.se[a * d + b];
                let zz = if se > 0.0 {
                    diff / se
                } else if diff == 0.0 {
                    0.0
                } else {
                    f64::INFINITY * diff.signum()
                };
                z[a * d + b] = zz;
                defined += 1;
                max_abs_z = max_abs_z.max(zz.abs());
                if zz.abs() > 3.0 {
                    over += 1;
                }
            }
        }
    }
    Ok(McSummary {
        channels: set.channels.clone(),
        times: set.times.clone(),
        replicas: set.values.len(),
        estimate,
        target,
        z,
        max_abs_z,
        frac_abs_z_over_3: if defined > 0 { over as f64 / defined as f64 } else { 0.0 },
        targets_defined: defined,
        sigma_n: set.sigma_n,
        max_sign_sum_rms_error: set.max_sign_sum_rms_error,
        jitter_used: set.jitter_used,
        runtime_secs: 0.0,
        workers: set.workers,
    })
}

/// Run replicas and summarize them.
pub fn run_mc(config: &McConfig) -> Result<McSummary> {
    let start = Instant::now();
    let set = run_replicas(config)?;
    let mut summary = summarize(config, &set)?;
    summary.runtime_secs = start.elapsed().as_secs_f64();
    Ok(summary)
}
