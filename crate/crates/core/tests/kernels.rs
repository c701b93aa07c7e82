use karlin::kernels::{
    bifbm_decomposition_residual, chol_psd, cov_matrix, decomposition_residual, kernel_eval, lei_residual, min_eig,
    oddpart_residual, sample_gp, self_similarity_residual, KernelSpec,
};
use karlin::make_weights;
use karlin::poisson::{exact_cov, Component};
use karlin::rng::replica_rng;
use karlin::special::gamma;
use karlin::urn::PathGrid;
use proptest::prelude::*;

fn grid5() -> PathGrid {
    PathGrid::new(vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]).unwrap()
}

/// Entry-wise empirical covariance and its standard error.
fn emp_cov(samples: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let r = samples.len() as f64;
    let d = samples[0].len();
    let mean: Vec<f64> = (0..d).map(|i| samples.iter().map(|x| x[i]).sum::<f64>() / r).collect();
    let mut cov = vec![vec![0.0; d]; d];
    let mut se = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let w: Vec<f64> = samples.iter().map(|x| (x[i] - mean[i]) * (x[j] - mean[j])).collect();
            let m = w.iter().sum::<f64>() / (r - 1.0);
            let v = w.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (r - 1.0);
            cov[i][j] = m;
            se[i][j] = (v / r).sqrt();
        }
    }
    (cov, se)
}

#[test]
fn sampled_limit_u_matches_kernel() {
    let spec = KernelSpec::LimitU { alpha: 0.5 };
    let grid = grid5();
    let f = chol_psd(&cov_matrix(&spec, &grid).unwrap()).unwrap();
    let mut rng = replica_rng(2024, 0);
    let samples: Vec<Vec<f64>> = (0..20_000).map(|_| sample_gp(&f, &mut rng).unwrap()).collect();
    let (cov, se) = emp_cov(&samples);
    let t = grid.times();
    for i in 1..t.len() {
        for j in 1..t.len() {
            let k = kernel_eval(&spec, t[i], t[j]).unwrap();
            assert!((cov[i][j] - k).abs() <= 4.0 * se[i][j], "({i},{j}) {} vs {k}", cov[i][j]);
        }
    }
}

#[test]
fn independent_components_sum_to_limit_z() {
    let alpha = 0.5;
    let grid = grid5();
    let f1 = chol_psd(&cov_matrix(&KernelSpec::LimitZ1 { alpha }, &grid).unwrap()).unwrap();
    let f2 = chol_psd(&cov_matrix(&KernelSpec::LimitZ2 { alpha }, &grid).unwrap()).unwrap();
    let mut r1 = replica_rng(5, 0);
    let mut r2 = replica_rng(5, 1);
    let samples: Vec<Vec<f64>> = (0..20_000)
        .map(|_| {
            let a = sample_gp(&f1, &mut r1).unwrap();
            let b = sample_gp(&f2, &mut r2).unwrap();
            a.iter().zip(&b).map(|(x, y)| x + y).collect()
        })
        .collect();
    let (cov, se) = emp_cov(&samples);
    let t = grid.times();
    for i in 1..t.len() {
        for j in 1..t.len() {
            let k = kernel_eval(&KernelSpec::LimitZ { alpha }, t[i], t[j]).unwrap();
            assert!((cov[i][j] - k).abs() <= 4.0 * se[i][j]);
        }
    }
}

#[test]
fn bifbm_extended_pair_is_psd_on_random_grids() {
    let mut rng = replica_rng(77, 0);
    for a in 1..=9 {
        let alpha = a as f64 / 10.0;
        let spec = KernelSpec::bifbm_extended(alpha).unwrap();
        for _ in 0..10 {
            let mut t: Vec<f64> = (0..14).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
            t.push(0.0);
            t.sort_by(f64::total_cmp);
            t.dedup();
            let grid = PathGrid::new(t).unwrap();
            let cov = cov_matrix(&spec, &grid).unwrap();
            assert!(min_eig(&cov) >= -1e-10 * cov.max_diagonal(), "alpha={alpha}");
        }
    }
}

#[test]
fn poisson_covariance_approaches_limit_kernels() {
    let alpha = 0.5;
    let w = make_weights(alpha, 1e-9).unwrap();
    let n = 1e6;
    let sigma2 = w.sigma2(n);
    let pts = [0.2, 0.4, 0.6, 0.8, 1.0];
    let pairs = [
        (Component::Z1, KernelSpec::LimitZ1 { alpha }),
        (Component::Z2, KernelSpec::LimitZ2 { alpha }),
        (Component::U1, KernelSpec::LimitU1 { alpha }),
        (Component::U2, KernelSpec::LimitU2 { alpha }),
    ];
    for (c, spec) in pairs {
        for &s in &pts {
            for &t in &pts {
                let e = exact_cov(c, &w, n, s, t).unwrap() / sigma2;
                let k = kernel_eval(&spec, s, t).unwrap();
                assert!((e - k).abs() <= 0.03 * k.abs(), "{c:?} ({s},{t}): {e} vs {k}");
            }
        }
    }
}

fn grid_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..4.0, 1..50).prop_map(|mut v| {
        v.push(0.0);
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn residuals_vanish(alpha in 0.02f64..0.98, h in 0.02f64..0.98, k in 0.02f64..1.0, c in 0.1f64..10.0, g in grid_strategy()) {
        let (z, u) = decomposition_residual(alpha, &g).unwrap();
        prop_assert!(z <= 1e-11 && u <= 1e-11);
        prop_assert!(lei_residual(h, k, &g).unwrap() <= 1e-11);
        prop_assert!(lei_residual(0.5 / alpha, alpha, &g).unwrap() <= 1e-11);
        prop_assert!(oddpart_residual(alpha, &g).unwrap() <= 1e-11);
        for spec in [KernelSpec::LimitZ1 { alpha }, KernelSpec::LimitU { alpha }, KernelSpec::Fbm { hurst: h }, KernelSpec::TimeChangedBm { alpha }] {
            prop_assert!(self_similarity_residual(&spec, c, &g).unwrap() <= 1e-11 * c.powf(spec.scaling_exponent()).max(1.0));
        }
        prop_assert!(bifbm_decomposition_residual(alpha.max(0.2), &g.iter().map(|x| x / 4.0).collect::<Vec<_>>()).unwrap() <= 1e-11);
    }

    #[test]
    fn kernel_relations(alpha in 0.02f64..0.98, s in 0.0f64..4.0, t in 0.0f64..4.0) {
        let z2 = kernel_eval(&KernelSpec::LimitZ2 { alpha }, s, t).unwrap();
        let u2 = kernel_eval(&KernelSpec::LimitU2 { alpha }, s, t).unwrap();
        prop_assert!((z2 - 2f64.powf(2.0 - alpha) * u2).abs() <= 1e-12);
        let z = kernel_eval(&KernelSpec::LimitZ { alpha }, s, t).unwrap();
        let tc = kernel_eval(&KernelSpec::TimeChangedBm { alpha }, s, t).unwrap();
        prop_assert!((tc - z / gamma(1.0 - alpha)).abs() <= 1e-12);
        let u = kernel_eval(&KernelSpec::LimitU { alpha }, s, t).unwrap();
        let fbm = kernel_eval(&KernelSpec::Fbm { hurst: alpha / 2.0 }, s, t).unwrap();
        if fbm.abs() > 1e-8 {
            prop_assert!((u / fbm - gamma(1.0 - alpha) * 2f64.powf(alpha - 1.0)).abs() <= 1e-10);
        }
    }
}
