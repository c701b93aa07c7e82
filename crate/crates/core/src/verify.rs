//! Verification suites: exact identities, finite-`n` covariance oracles,
//! limit-kernel convergence, marginal normality, de-Poissonization gaps,
//! positive semidefiniteness evidence and the walk construction.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{domain, Result};
use crate::kernels::{
    bifbm_decomposition_residual, decomposition_residual, lei_residual, min_eig, oddpart_residual,
    self_similarity_residual, CovMatrix, KernelSpec,
};
use crate::montecarlo::{
    convergence_report, ks_normality, run_replicas, summarize, v_bound_diagnostic, McConfig, McMode, McSummary,
    McTarget,
};
use crate::poisson::{tilde_p, tilde_q};
use crate::rng::replica_rng;
use crate::series::{Clock, SignSumPlan};
use crate::special::gamma;
use crate::urn::{walk_from_labels, BoxState, DiscreteSimulator, PathGrid, Process, SignMode, SignSource, WalkMode};
use crate::weights::{make_weights, DEFAULT_TAIL_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identities,
    PoissonCov,
    LimitCov,
    Clt,
    Gaps,
    Psd,
    Walk,
}

impl Suite {
    pub const ALL: [Suite; 7] =
        [Suite::Identities, Suite::PoissonCov, Suite::LimitCov, Suite::Clt, Suite::Gaps, Suite::Psd, Suite::Walk];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::PoissonCov => "poisson-cov",
            Suite::LimitCov => "limit-cov",
            Suite::Clt => "clt",
            Suite::Gaps => "gaps",
            Suite::Psd => "psd",
            Suite::Walk => "walk",
        }
    }

    pub fn parse(name: &str) -> Option<Suite> {
        Suite::ALL.iter().copied().find(|s| s.name() == name)
    }
}

/// One pass/fail comparison `measured <op> threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub comparison: String,
    pub threshold: f64,
}

impl Check {
    pub fn le(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check { name: name.into(), passed: measured <= threshold, measured, comparison: "<=".into(), threshold }
    }

    pub fn lt(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check { name: name.into(), passed: measured < threshold, measured, comparison: "<".into(), threshold }
    }

    pub fn ge(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check { name: name.into(), passed: measured >= threshold, measured, comparison: ">=".into(), threshold }
    }

    pub fn gt(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check { name: name.into(), passed: measured > threshold, measured, comparison: ">".into(), threshold }
    }
}

/// Outcome of a suite. Serialization omits wall-clock data so reports are reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub params: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub details: Value,
    #[serde(skip)]
    pub runtime_secs: f64,
}

/// Overrides for suite defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub alpha: Option<f64>,
    pub n: Option<u64>,
    pub replicas: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// Default master seed of every suite.
pub const DEFAULT_SEED: u64 = 1;

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    if let Some(a) = opts.alpha {
        if !(a > 0.0 && a < 1.0) {
            return domain(format!("alpha must lie in (0,1), got {a}"));
        }
    }
    if opts.replicas == Some(0) || opts.n == Some(0) {
        return domain("replicas and n must be positive");
    }
    let start = Instant::now();
    let (params, checks, details) = match suite {
        Suite::Identities => identities(opts)?,
        Suite::PoissonCov => poisson_cov(opts)?,
        Suite::LimitCov => limit_cov(opts)?,
        Suite::Clt => clt(opts)?,
        Suite::Gaps => gaps(opts)?,
        Suite::Psd => psd(opts)?,
        Suite::Walk => walk(opts)?,
    };
    Ok(SuiteReport {
        suite: suite.name().to_string(),
        passed: checks.iter().all(|c| c.passed),
        params,
        checks,
        details,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

type SuiteOutput = (BTreeMap<String, Value>, Vec<Check>, Value);

fn seed(opts: &VerifyOptions) -> u64 {
    opts.seed.unwrap_or(DEFAULT_SEED)
}

fn five_point_grid() -> PathGrid {
    PathGrid::parse("0:1:0.2").expect("static grid")
}

const IDENTITY_TOL: f64 = 1e-11;
const IDENTITY_DRAWS: usize = 20;

fn identities(opts: &VerifyOptions) -> Result<SuiteOutput> {
    let mut rng = replica_rng(seed(opts), u64::MAX);
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut bump = |name: &'static str, v: f64| {
        let e = worst.entry(name).or_insert(0.0);
        *e = e.max(v);
    };
    for _ in 0..IDENTITY_DRAWS {
        let alpha = opts.alpha.unwrap_or_else(|| rng.random_range(0.05..0.95));
        let hurst: f64 = rng.random_range(0.05..0.95);
        let k: f64 = rng.random_range(0.05..=1.0);
        let c: f64 = rng.random_range(0.1..10.0);
        let len = rng.random_range(2..=50);
        let mut grid: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..4.0)).collect();
        grid[0] = 0.0;

        let (z, u) = decomposition_residual(alpha, &grid)?;
        bump("decomposition_residual_z", z);
        bump("decomposition_residual_u", u);
        bump("lei_residual", lei_residual(hurst, k, &grid)?);
        bump("lei_residual_extended_pair", lei_residual(0.5 / alpha, alpha, &grid)?);
        bump("oddpart_residual", oddpart_residual(alpha, &grid)?);
        let specs = [
            KernelSpec::LimitZ1 { alpha },
            KernelSpec::LimitZ2 { alpha },
            KernelSpec::LimitZ { alpha },
            KernelSpec::LimitU1 { alpha },
            KernelSpec::LimitU2 { alpha },
            KernelSpec::LimitU { alpha },
            KernelSpec::Fbm { hurst },
            KernelSpec::TimeChangedBm { alpha },
        ];
        for spec in specs {
            // relative to the scaled magnitude
            let scale = c.powf(spec.scaling_exponent()).max(1.0);
            bump("self_similarity_residual", self_similarity_residual(&spec, c, &grid)? / scale);
        }
        let unit: Vec<f64> = grid.iter().map(|x| x / 4.0).collect();
        bump("bifbm_component_residual", bifbm_decomposition_residual(alpha, &unit)?);

        let g = gamma(1.0 - alpha);
        let mut ratio_z2_u2: f64 = 0.0;
        let mut ratio_u_fbm: f64 = 0.0;
        let mut tc_z: f64 = 0.0;
        for &s in &grid {
            for &t in &grid {
                let z2 = KernelSpec::LimitZ2 { alpha }.eval(s, t);
                let u2 = KernelSpec::LimitU2 { alpha }.eval(s, t);
                ratio_z2_u2 = ratio_z2_u2.max((z2 - 2f64.powf(2.0 - alpha) * u2).abs());
                let uu = KernelSpec::LimitU { alpha }.eval(s, t);
                let fbm = KernelSpec::Fbm { hurst: alpha / 2.0 }.eval(s, t);
                ratio_u_fbm = ratio_u_fbm.max((uu - g * 2f64.powf(alpha - 1.0) * fbm).abs());
                let tc = KernelSpec::TimeChangedBm { alpha }.eval(s, t);
                let zz = KernelSpec::LimitZ { alpha }.eval(s, t);
                tc_z = tc_z.max((tc - zz / g).abs());
            }
        }
        bump("kernel_ratio_z2_u2", ratio_z2_u2);
        bump("kernel_ratio_u_fbm", ratio_u_fbm);
        bump("time_changed_bm_vs_limit_z", tc_z);

        let ws = make_weights(alpha, DEFAULT_TAIL_TOL)?;
        let mut sub_p: f64 = 0.0;
        let mut sub_q: f64 = 0.0;
        let mut couple: f64 = 0.0;
        for _ in 0..50 {
            let kk = rng.random_range(1..10_000u64);
            let s = rng.random_range(0.0..1e4);
            let t = s + rng.random_range(0.0..1e4);
            let (ps, pt, pd) = (tilde_p(&ws, kk, s)?, tilde_p(&ws, kk, t)?, tilde_p(&ws, kk, t - s)?);
            let (qs, qt, qd) = (tilde_q(&ws, kk, s)?, tilde_q(&ws, kk, t)?, tilde_q(&ws, kk, t - s)?);
            sub_p = sub_p.max((pt - ps - (1.0 - ps) * pd).abs());
            sub_q = sub_q.max((qt - qs - (1.0 - 2.0 * qs) * qd).abs());
            couple = couple.max((qs - 0.5 * tilde_p(&ws, kk, 2.0 * s)?).abs());
        }
        bump("subadd_p_identity", sub_p);
        bump("subadd_q_identity", sub_q);
        bump("u2_half_z2_doubled_per_box", couple);

        let t = rng.random_range(1.0..1e4);
        let plan = SignSumPlan::new(&ws, &[Clock::Continuous(t), Clock::Continuous(2.0 * t)]);
        let sums = plan.evaluate(&SignSource::random(rng.random()));
        bump("u2_half_z2_doubled_sign_sum", (sums.odd[0] - 0.5 * sums.occupancy[1]).abs());
    }
    let checks = worst.into_iter().map(|(name, v)| Check::le(name, v, IDENTITY_TOL)).collect();
    let mut params = BTreeMap::new();
    params.insert("draws".into(), json!(IDENTITY_DRAWS));
    params.insert("alpha".into(), json!(opts.alpha));
    params.insert("seed".into(), json!(seed(opts)));
    Ok((params, checks, Value::Null))
}

/// Unique entries `(a, b)` with `a <= b`, both at positive times, where a target is defined.
fn target_entries(s: &McSummary) -> Vec<(usize, usize)> {
    let d = s.dim();
    let g = s.times.len();
    let mut out = Vec::new();
    for a in 0..d {
        for b in a..d {
            if s.times[a % g] > 0.0 && s.times[b % g] > 0.0 && !s.target[a * d + b].is_nan() {
                out.push((a, b));
            }
        }
    }
    out
}

fn workers(opts: &VerifyOptions) -> Option<usize> {
    opts.workers
}

fn poisson_cov(opts: &VerifyOptions) -> Result<SuiteOutput> {
    let alphas = match opts.alpha {
        Some(a) => vec![a],
        None => vec![0.25, 0.5],
    };
    let n = opts.n.unwrap_or(10_000);
    let replicas = opts.replicas.unwrap_or(10_000);
    let mut checks = Vec::new();
    let mut details = Vec::new();
    for alpha in &alphas {
        let mut cfg = McConfig::new(McMode::Poissonized, *alpha, n, five_point_grid(), replicas, seed(opts));
        cfg.target = McTarget::ExactPoisson;
        cfg.processes = vec![Process::Z1, Process::Z2, Process::U1, Process::U2];
        cfg.parallel_workers = workers(opts);
        let set = run_replicas(&cfg)?;
        let s = summarize(&cfg, &set)?;
        let d = s.dim();
        let entries = target_entries(&s);
        let zs: Vec<f64> = entries.iter().map(|&(a, b)| s.z[a * d + b]).collect();
        let over = zs.iter().filter(|z| z.abs() > 3.0).count();
        let frac = over as f64 / zs.len() as f64;
        let max_z = zs.iter().fold(0.0, |m: f64, z| m.max(z.abs()));
        checks.push(Check::lt(format!("alpha={alpha}: fraction |z|>3"), frac, 0.01));
        checks.push(Check::lt(format!("alpha={alpha}: max |z|"), max_z, 6.0));
        details.push(json!({
            "alpha": alpha,
            "entries": zs.len(),
            "entries_over_3": over,
            "sigma_n": s.sigma_n,
            "max_sign_sum_rms_error": s.max_sign_sum_rms_error,
            "z": entries.iter().map(|&(a, b)| entry_json(&s, a, b)).collect::<Vec<_>>(),
        }));
    }
    let mut params = BTreeMap::new();
    params.insert("alphas".into(), json!(alphas));
    params.insert("n".into(), json!(n));
    params.insert("replicas".into(), json!(replicas));
    params.insert("grid".into(), json!(five_point_grid().times()));
    params.insert("seed".into(), json!(seed(opts)));
    Ok((params, checks, Value::Array(details)))
}

fn entry_json(s: &McSummary, a: usize, b: usize) -> Value {
    let d = s.dim();
    let g = s.times.len();
    json!({
        "row": [s.channels[a / g], s.times[a % g]],
        "col": [s.channels[b / g], s.times[b % g]],
        "empirical": s.estimate.cov[a * d + b],
        "target": s.target[a * d + b],
        "se": s.estimate.se[a * d + b],
        "z": s.z[a * d + b],
    })
}

/// Allowed relative bias of finite-`n` covariances against limit kernels.
const LIMIT_BIAS: f64 = 0.05;

fn limit_cov(opts: &VerifyOptions) -> Result<SuiteOutput> {
    let alpha = opts.alpha.unwrap_or(0.5);
    let n = opts.n.unwrap_or(100_000);
    let replicas = opts.replicas.unwrap_or(5_000);
    let mut cfg = McConfig::new(McMode::Discrete, alpha, n, five_point_grid(), replicas, seed(opts));
    cfg.target = McTarget::LimitKernel;
    cfg.processes = vec![Process::Z1, Process::Z2, Process::U1, Process::U2, Process::Z, Process::U];
    cfg.parallel_workers = workers(opts);
    let set = run_replicas(&cfg)?;
    let s = summarize(&cfg, &set)?;
    let d = s.dim();
    let g = s.times.len();
    let mut kernel_fail = 0usize;
    let mut kernel_total = 0usize;
    let mut cross_fail = 0usize;
    let mut cross_total = 0usize;
    let mut worst_kernel: f64 = 0.0;
    let mut worst_cross: f64 = 0.0;
    let mut failures = Vec::new();
    for (a, b) in target_entries(&s) {
        let k = s.target[a * d + b];
        let emp = s.estimate.cov[a * d + b];
        let se = s.estimate.se[a * d + b];
        let same = a / g == b / g;
        if same {
            kernel_total += 1;
            let allowed = 4.0 * se + LIMIT_BIAS * k.abs();
            worst_kernel = worst_kernel.max((emp - k).abs() / allowed);
            if (emp - k).abs() > allowed {
                kernel_fail += 1;
                failures.push(entry_json(&s, a, b));
            }
        } else {
            cross_total += 1;
            worst_cross = worst_cross.max(emp.abs() / (4.0 * se));
            if emp.abs() > 4.0 * se {
                cross_fail += 1;
                failures.push(entry_json(&s, a, b));
            }
        }
    }
    let checks = vec![
        Check::le("kernel entries outside 4 SE + 5% bias", kernel_fail as f64, 0.0),
        Check::le("cross-covariance entries outside 4 SE of 0", cross_fail as f64, 0.0),
        Check::le("worst kernel deviation / allowance", worst_kernel, 1.0),
        Check::le("worst cross-covariance / (4 SE)", worst_cross, 1.0),
    ];
    let mut params = BTreeMap::new();
    params.insert("alpha".into(), json!(alpha));
    params.insert("n".into(), json!(n));
    params.insert("replicas".into(), json!(replicas));
    params.insert("grid".into(), json!(five_point_grid().times()));
    params.insert("seed".into(), json!(seed(opts)));
    let details = json!({
        "sigma_n": s.sigma_n,
        "kernel_entries": kernel_total,
        "cross_entries": cross_total,
        "max_sign_sum_rms_error": s.max_sign_sum_rms_error,
        "failures": failures,
        "entries": target_entries(&s).into_iter().map(|(a, b)| entry_json(&s, a, b)).collect::<Vec<_>>(),
    });
    Ok((params, checks, details))
}

/// KS significance level of the marginal normality checks.
const CLT_LEVEL: f64 = 0.001;

fn clt(opts: &VerifyOptions) -> Result<SuiteOutput> {
    let alpha = opts.alpha.unwrap_or(0.5);
    let n = opts.n.unwrap_or(100_000);
    let replicas = opts.replicas.unwrap_or(10_000);
    let grid = PathGrid::new(vec![0.0, 1.0])?;
    let mut cfg = McConfig::new(McMode::Discrete, alpha, n, grid, replicas, seed(opts));
    cfg.sign_mode = SignMode::AllOnes;
    cfg.processes = vec![Process::ZStar, Process::UStar];
    cfg.parallel_workers = workers(opts);
    let set = run_replicas(&cfg)?;
    let mut checks = Vec::new();
    let mut details = serde_json::Map::new();
    // integer-valued statistics: Z* on a unit lattice, U* on a lattice of step 2
    let mut dither = replica_rng(seed(opts), u64::MAX - 1);
    for (channel, step) in [("z_star", 1.0), ("u_star", 2.0)] {
        let c = set.channel_index(channel).expect("configured channel");
        let raw = set.column(c, 1);
        let samples: Vec<f64> = raw.iter().map(|x| x + step * (dither.random::<f64>() - 0.5) / set.sigma_n).collect();
        let ks = ks_normality(&samples)?;
        checks.push(Check::gt(format!("{channel}: KS p-value"), ks.p_value, CLT_LEVEL));
        let undithered = ks_normality(&raw)?;
        details.insert(
            channel.to_string(),
            json!({
                "ks_statistic": ks.statistic,
                "p_value": ks.p_value,
                "undithered_ks_statistic": undithered.statistic,
                "undithered_p_value": undithered.p_value,
                "lattice_step": step,
            }),
        );
    }
    let mut params = BTreeMap::new();
    params.insert("alpha".into(), json!(alpha));
    params.insert("n".into(), json!(n));
    params.insert("replicas".into(), json!(replicas));
    params.insert("seed".into(), json!(seed(opts)));
    params.insert("sigma_n".into(), json!(set.sigma_n));
    Ok((params, checks, Value::Object(details)))
}

fn gaps(opts: &VerifyOptions) -> Result<SuiteOutput> {
    let mut checks = Vec::new();
    let mut ratios = Vec::new();
    let alphas = match opts.alpha {
        Some(a) => vec![a],
        None => vec![0.25, 0.5, 0.75],
    };
    let n_ratio = 1_000_000u64;
    for &alpha in &alphas {
        let ws = make_weights(alpha, DEFAULT_TAIL_TOL)?;
        let ratio = ws.big_v(n_ratio as f64) / ws.sigma2(n_ratio as f64);
        let g = ws.gamma_one_minus_alpha();
        checks.push(Check::le(
            format!("alpha={alpha}: |V(n)/nu(n) / Gamma(1-alpha) - 1| at n=1e6"),
            (ratio / g - 1.0).abs(),
            0.05,
        ));
        ratios.push(json!({"alpha": alpha, "v_over_nu": ratio, "gamma": g}));
    }

    let alpha = opts.alpha.unwrap_or(0.5);
    let ws = make_weights(alpha, DEFAULT_TAIL_TOL)?;
    let grid = PathGrid::uniform(12)?;
    let n_list = [1_000u64, 100_000, 10_000_000];
    let rows = convergence_report(&ws, &n_list, &grid)?;
    let v1 = ws.big_v(1.0);
    for w in rows.windows(2) {
        checks.push(Check::le(format!("p-gap n={} vs n={} (10% slack)", w[1].n, w[0].n), w[1].p_gap / w[0].p_gap, 1.1));
        checks.push(Check::le(format!("q-gap n={} vs n={} (10% slack)", w[1].n, w[0].n), w[1].q_gap / w[0].q_gap, 1.1));
    }
    let last = rows.last().expect("non-empty");
    checks.push(Check::lt(format!("p-gap at n={}", last.n), last.p_gap, 0.1));
    checks.push(Check::lt(format!("q-gap at n={}", last.n), last.q_gap, 0.1));
    let mut raw = Vec::new();
    for &n in &n_list {
        let g = crate::poisson::depoisson_gap(&ws, n, &grid)?;
        checks.push(Check::le(format!("unnormalized p-gap n={n} vs 1 + max V(m)/m"), g.p_raw, 1.0 + v1));
        raw.push(json!({"n": n, "p_raw": g.p_raw, "q_raw": g.q_raw, "tail_error": g.tail_error}));
    }

    let bound_ns = [1_000u64, 10_000, 100_000, 1_000_000];
    let bound: Vec<f64> = bound_ns.iter().map(|&n| v_bound_diagnostic(&ws, n)).collect::<Result<_>>()?;
    for i in 1..bound.len() {
        checks.push(Check::le(
            format!("V bound diagnostic n={} vs n={} (10% slack)", bound_ns[i], bound_ns[i - 1]),
            bound[i] / bound[i - 1],
            1.1,
        ));
    }
    let mut params = BTreeMap::new();
    params.insert("alphas".into(), json!(alphas));
    params.insert("gap_alpha".into(), json!(alpha));
    params.insert("gap_grid".into(), json!(grid.times()));
    params.insert("gap_n".into(), json!(n_list));
    params.insert("bound_n".into(), json!(bound_ns));
    let details = json!({
        "ratios": ratios,
        "convergence": rows,
        "unnormalized_gaps": raw,
        "v_bound": bound,
    });
    Ok((params, checks, details))
}

const PSD_GRIDS: usize = 10;
const PSD_POINTS: usize = 15;
const PSD_TOL: f64 = 1e-10;

fn psd(opts: &VerifyOptions) -> Result<SuiteOutput> {
    let alphas: Vec<f64> = match opts.alpha {
        Some(a) => vec![a],
        None => (1..=9).map(|i| i as f64 / 10.0).collect(),
    };
    let mut rng = replica_rng(seed(opts), u64::MAX - 2);
    let mut checks = Vec::new();
    let mut table = Vec::new();
    for &alpha in &alphas {
        let spec = KernelSpec::bifbm_extended(alpha)?;
        let mut worst = f64::INFINITY;
        let mut eigs = Vec::new();
        for _ in 0..PSD_GRIDS {
            let mut t: Vec<f64> = (0..PSD_POINTS).map(|_| 1.0 - rng.random::<f64>()).collect();
            t.sort_by(f64::total_cmp);
            let m = nalgebra::DMatrix::from_fn(PSD_POINTS, PSD_POINTS, |i, j| spec.eval(t[i], t[j]));
            let cov = CovMatrix::from_entries(t.clone(), m)?;
            let rel = min_eig(&cov) / cov.max_diagonal();
            worst = worst.min(rel);
            eigs.push(rel);
        }
        checks.push(Check::ge(format!("alpha={alpha}: min eigenvalue / max diagonal"), worst, -PSD_TOL));
        table.push(json!({"alpha": alpha, "hurst": 0.5 / alpha, "k": alpha, "relative_min_eigenvalues": eigs}));
    }
    let mut params = BTreeMap::new();
    params.insert("alphas".into(), json!(alphas));
    params.insert("grids_per_alpha".into(), json!(PSD_GRIDS));
    params.insert("points_per_grid".into(), json!(PSD_POINTS));
    params.insert("seed".into(), json!(seed(opts)));
    Ok((params, checks, Value::Array(table)))
}

fn walk(opts: &VerifyOptions) -> Result<SuiteOutput> {
    let alpha = opts.alpha.unwrap_or(0.5);
    let n = opts.n.unwrap_or(1_000);
    let seeds = opts.replicas.unwrap_or(1_000) as u64;
    let ws = make_weights(alpha, DEFAULT_TAIL_TOL)?;
    let grid = PathGrid::uniform(n as usize)?;
    let sim = DiscreteSimulator::at_counts(&ws, n, &grid, (0..=n).collect())?;
    let mut boxes = BoxState::new();
    let base = seed(opts);
    let mut mismatched_odd = 0u64;
    let mut mismatched_occ = 0u64;
    for i in 0..seeds {
        let signs = SignSource::random(base.wrapping_add(i));
        let labels = sim.sample_labels(&mut replica_rng(base, i));
        let raw = sim.raw_with(&signs, &mut boxes, {
            let mut it = labels.iter().copied();
            move || it.next().expect("enough labels")
        });
        let odd = walk_from_labels(labels.clone(), &signs, WalkMode::Odd);
        let occ = walk_from_labels(labels, &signs, WalkMode::Occupancy);
        if (0..n as usize).any(|j| odd.prefix[j] != raw[j + 1].u_eps) {
            mismatched_odd += 1;
        }
        if (0..n as usize).any(|j| occ.prefix[j] != raw[j + 1].z_eps) {
            mismatched_occ += 1;
        }
    }
    let checks = vec![
        Check::le("odd-mode seeds with prefix sums != U paths", mismatched_odd as f64, 0.0),
        Check::le("occupancy-mode seeds with prefix sums != Z paths", mismatched_occ as f64, 0.0),
    ];
    let mut params = BTreeMap::new();
    params.insert("alpha".into(), json!(alpha));
    params.insert("n".into(), json!(n));
    params.insert("seeds".into(), json!(seeds));
    params.insert("seed".into(), json!(base));
    Ok((params, checks, Value::Null))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()), Some(s));
        }
        assert_eq!(Suite::parse("everything"), None);
    }

    #[test]
    fn check_comparisons() {
        assert!(Check::le("a", 1.0, 1.0).passed);
        assert!(!Check::lt("a", 1.0, 1.0).passed);
        assert!(Check::ge("a", -1e-12, -1e-10).passed);
        assert!(!Check::gt("a", f64::NAN, 0.0).passed);
        assert!(!Check::le("a", f64::NAN, 0.0).passed);
    }

    #[test]
    fn report_serialization_omits_runtime() {
        let r = run_suite(Suite::Psd, &VerifyOptions { alpha: Some(0.5), ..Default::default() }).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert!(!text.contains("runtime"));
        assert!(r.passed);
    }

    #[test]
    fn rejects_bad_overrides() {
        assert!(run_suite(Suite::Walk, &VerifyOptions { alpha: Some(1.0), ..Default::default() }).is_err());
        assert!(run_suite(Suite::Walk, &VerifyOptions { replicas: Some(0), ..Default::default() }).is_err());
    }
}
