use karlin::kernels::KernelSpec;
use karlin::make_weights;
use karlin::montecarlo::{
    convergence_report, empirical_cov, ks_normality, run_mc, run_replicas, McConfig, McMode, McTarget,
};
use karlin::rng::replica_rng;
use karlin::urn::{PathGrid, Process, SignMode};
use rand::Rng;
use rand_distr::StandardNormal;

fn grid5() -> PathGrid {
    PathGrid::new(vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]).unwrap()
}

#[test]
fn constant_paths_have_zero_covariance() {
    let paths = vec![vec![1.5, -2.0, 3.0]; 10];
    let e = empirical_cov(&paths).unwrap();
    assert!(e.cov.iter().all(|&x| x == 0.0));
    assert!(e.se.iter().all(|&x| x == 0.0));
}

#[test]
fn antithetic_pair() {
    let x = vec![1.0, -2.0, 0.5];
    let paths = vec![x.clone(), x.iter().map(|v| -v).collect()];
    let e = empirical_cov(&paths).unwrap();
    // mean 0, so cov = (x x^T + x x^T) / (2 - 1)
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(e.cov_at(i, j), 2.0 * x[i] * x[j]);
        }
    }
}

#[test]
fn matches_brute_force_and_leave_one_out_jackknife() {
    let mut rng = replica_rng(3, 0);
    let paths: Vec<Vec<f64>> = (0..100).map(|_| (0..4).map(|_| rng.random::<f64>() * 3.0 - 1.0).collect()).collect();
    let e = empirical_cov(&paths).unwrap();
    let cov_of = |ps: &[Vec<f64>], i: usize, j: usize| {
        let r = ps.len() as f64;
        let mi = ps.iter().map(|p| p[i]).sum::<f64>() / r;
        let mj = ps.iter().map(|p| p[j]).sum::<f64>() / r;
        ps.iter().map(|p| (p[i] - mi) * (p[j] - mj)).sum::<f64>() / (r - 1.0)
    };
    for i in 0..4 {
        for j in 0..4 {
            assert!((e.cov_at(i, j) - cov_of(&paths, i, j)).abs() < 1e-10);
            let loo: Vec<f64> = (0..paths.len())
                .map(|k| {
                    let rest: Vec<Vec<f64>> =
                        paths.iter().enumerate().filter(|&(m, _)| m != k).map(|(_, p)| p.clone()).collect();
                    cov_of(&rest, i, j)
                })
                .collect();
            let r = loo.len() as f64;
            let m = loo.iter().sum::<f64>() / r;
            let jk = ((r - 1.0) / r * loo.iter().map(|x| (x - m).powi(2)).sum::<f64>()).sqrt();
            assert!((e.se_at(i, j) - jk).abs() < 1e-10 * jk.max(1.0), "{} vs {jk}", e.se_at(i, j));
        }
    }
}

#[test]
fn ks_null_and_alternative() {
    for seed in 0..5 {
        let mut rng = replica_rng(seed, 0);
        let normal: Vec<f64> = (0..10_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        assert!(ks_normality(&normal).unwrap().p_value > 0.001);
        let uniform: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_normality(&uniform).unwrap().p_value < 1e-6);
    }
}

#[test]
fn two_replicas_give_a_defined_summary() {
    let mut cfg = McConfig::new(McMode::Discrete, 0.5, 1_000, grid5(), 2, 1);
    cfg.target = McTarget::LimitKernel;
    let s = run_mc(&cfg).unwrap();
    assert_eq!(s.replicas, 2);
    assert_eq!(s.dim(), 8 * 6);
    assert!(s.estimate.se.iter().all(|x| x.is_finite() && *x >= 0.0));
    cfg.replicas = 1;
    assert!(run_mc(&cfg).is_err());
}

#[test]
fn zero_sigma_is_refused() {
    let cfg = McConfig::new(McMode::Discrete, 0.2, 1, grid5(), 10, 1);
    assert!(matches!(run_mc(&cfg), Err(karlin::KarlinError::ZeroSigma(_))));
}

#[test]
fn summary_is_identical_across_worker_counts() {
    let mut cfg = McConfig::new(McMode::Poissonized, 0.5, 2_000, grid5(), 64, 9);
    cfg.target = McTarget::ExactPoisson;
    cfg.parallel_workers = Some(1);
    let a = serde_json::to_string(&run_mc(&cfg).unwrap()).unwrap();
    cfg.parallel_workers = Some(3);
    let b = serde_json::to_string(&run_mc(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn poissonized_exact_target_small() {
    for sign_mode in [SignMode::RandomRademacher, SignMode::AllOnes] {
        let mut cfg = McConfig::new(McMode::Poissonized, 0.5, 1_000, grid5(), 3_000, 4);
        cfg.target = McTarget::ExactPoisson;
        cfg.sign_mode = sign_mode;
        let s = run_mc(&cfg).unwrap();
        assert!(s.targets_defined > 0);
        assert!(s.frac_abs_z_over_3 < 0.02, "{sign_mode:?}: {}", s.frac_abs_z_over_3);
        assert!(s.max_abs_z < 6.0, "{sign_mode:?}: {}", s.max_abs_z);
    }
}

#[test]
fn gp_mode_matches_kernel() {
    let mut cfg = McConfig::new(McMode::Gp, 0.5, 1, grid5(), 20_000, 11);
    cfg.kernel = Some(KernelSpec::LimitU { alpha: 0.5 });
    cfg.target = McTarget::LimitKernel;
    let s = run_mc(&cfg).unwrap();
    assert!(s.max_abs_z <= 4.0, "{}", s.max_abs_z);
    assert_eq!(s.jitter_used, 0.0);
}

#[test]
fn discrete_components_are_uncorrelated() {
    let mut cfg = McConfig::new(McMode::Discrete, 0.5, 10_000, grid5(), 10_000, 21);
    cfg.processes = vec![Process::Z1, Process::Z2, Process::U1, Process::U2];
    let set = run_replicas(&cfg).unwrap();
    let e = empirical_cov(&set.values).unwrap();
    let g = set.grid_len();
    for (a, b) in [(0, 1), (2, 3)] {
        for i in 1..g {
            for j in 1..g {
                let (x, y) = (a * g + i, b * g + j);
                assert!(e.cov_at(x, y).abs() <= 4.0 * e.se_at(x, y), "{a}/{b} ({i},{j})");
            }
        }
    }
}

#[test]
fn convergence_report_rows() {
    let ws = make_weights(0.5, 1e-9).unwrap();
    let grid = PathGrid::uniform(12).unwrap();
    let rows = convergence_report(&ws, &[1_000, 100_000, 10_000_000], &grid).unwrap();
    for r in &rows {
        assert!(r.p_gap > 0.0 && r.q_gap > 0.0);
    }
    for w in rows.windows(2) {
        assert!(w[1].p_gap <= 1.1 * w[0].p_gap);
    }
    let row = &convergence_report(&ws, &[1_000_000], &grid).unwrap()[0];
    let sqrt_pi = std::f64::consts::PI.sqrt();
    assert!(row.v_over_nu >= 0.95 * sqrt_pi && row.v_over_nu <= 1.05 * sqrt_pi);
    assert!(convergence_report(&ws, &[10, 5], &grid).is_err());
}
