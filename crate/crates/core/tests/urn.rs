use karlin::rng::{replica_rng, replica_sign_seed};
use karlin::series::{centered_sign_sum, deterministic_sum, Centering, Clock};
use karlin::urn::{
    correlated_walk, p_center, q_center, raw_paths_from_labels, simulate_discrete, walk_from_labels, BoxState,
    DiscreteSimulator, PathGrid, Process, SignSource, WalkMode,
};
use karlin::{make_weights, KarlinError};
use proptest::prelude::*;

fn ws(alpha: f64) -> karlin::WeightSequence {
    make_weights(alpha, 1e-9).unwrap()
}

#[test]
fn center_examples() {
    let w = ws(0.5);
    assert_eq!(p_center(&w, 1, 0).unwrap(), 0.0);
    assert_eq!(q_center(&w, 1, 0).unwrap(), 0.0);
    assert!((p_center(&w, 1, 1).unwrap() - 0.6079271).abs() < 1e-6);
    let p1 = 6.0 / std::f64::consts::PI.powi(2);
    let q = q_center(&w, 1, 2).unwrap();
    assert!((q - 0.5 * (1.0 - (1.0 - 2.0 * p1).powi(2))).abs() < 1e-12);
    assert!((q - 0.4767).abs() < 1e-4);
    assert!(p_center(&w, 0, 3).is_err());
}

#[test]
fn single_ball() {
    let w = ws(0.5);
    let grid = PathGrid::new(vec![0.0, 1.0]).unwrap();
    for seed in 0..20 {
        let signs = SignSource::random(seed);
        let mut rng = replica_rng(seed, 0);
        let sim = DiscreteSimulator::new(&w, 1, &grid).unwrap();
        let labels = sim.sample_labels(&mut replica_rng(seed, 0));
        let b = sim.run(&signs, &mut rng, &mut BoxState::new());
        assert_eq!(b.z_star[1], 1.0);
        assert_eq!(b.u_star[1], 1.0);
        let e = signs.eval(labels[0]) as f64;
        assert_eq!(b.z[1], e);
        assert_eq!(b.u[1], e);
    }
}

#[test]
fn forced_label_sequence() {
    let w = ws(0.5);
    let signs = SignSource::fixed(&[-1, 1, 1]);
    let grid = PathGrid::new(vec![0.0, 1.0]).unwrap();
    let sim = DiscreteSimulator::new(&w, 4, &grid).unwrap();
    let mut boxes = BoxState::new();
    let b = sim.run_from_labels(&signs, &[3, 1, 3, 3], &mut boxes).unwrap();
    assert_eq!(b.u[1], 0.0);
    assert_eq!(b.z[1], 0.0);
    assert_eq!(b.z_star[1], 2.0);
    assert_eq!(b.u_star[1], 2.0);
    assert_eq!(boxes.count(3), 3);
    assert_eq!(boxes.count(1), 1);
    assert!(matches!(sim.run_from_labels(&signs, &[3, 1], &mut boxes), Err(KarlinError::LengthMismatch { .. })));
}

#[test]
fn rejects_bad_inputs() {
    let w = ws(0.5);
    let grid = PathGrid::uniform(4).unwrap();
    let mut rng = replica_rng(1, 0);
    assert!(simulate_discrete(&w, &SignSource::AllOnes, 0, &grid, &mut rng).is_err());
    assert!(matches!(
        simulate_discrete(&w, &SignSource::AllOnes, u64::MAX, &grid, &mut rng),
        Err(KarlinError::Overflow(_))
    ));
}

#[test]
fn bundle_invariants() {
    let grid = PathGrid::parse("0:1:0.125").unwrap();
    for (i, alpha) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        let w = ws(alpha);
        for rep in 0..5u64 {
            let signs = SignSource::random(replica_sign_seed(i as u64, rep));
            let mut boxes = BoxState::new();
            let sim = DiscreteSimulator::new(&w, 5_000, &grid).unwrap();
            let b = sim.run(&signs, &mut replica_rng(i as u64, rep), &mut boxes);
            for j in 0..grid.len() {
                assert_eq!(b.z[j] - b.z1[j] - b.z2[j], 0.0);
                assert_eq!(b.u[j] - b.u1[j] - b.u2[j], 0.0);
                assert!(0.0 <= b.u_star[j] && b.u_star[j] <= b.z_star[j]);
                assert!(b.z_star[j] <= b.meta.counts[j] as f64);
                assert_eq!(b.u_star[j] as u64 % 2, b.meta.counts[j] % 2);
                assert!(b.z[j].abs() <= b.z_star[j] && b.u[j].abs() <= b.u_star[j]);
            }
            // final state recomputation
            let z: i64 = boxes.iter().map(|(k, _)| signs.eval(k)).sum();
            let u: i64 = boxes.iter().filter(|&(_, c)| c % 2 == 1).map(|(k, _)| signs.eval(k)).sum();
            assert_eq!(b.z[grid.len() - 1], z as f64);
            assert_eq!(b.u[grid.len() - 1], u as f64);
            assert_eq!(boxes.balls(), 5_000);
        }
    }
}

#[test]
fn all_ones_recovers_unsigned_processes() {
    let w = ws(0.5);
    let grid = PathGrid::uniform(10).unwrap();
    let sim = DiscreteSimulator::new(&w, 20_000, &grid).unwrap();
    let mut boxes = BoxState::new();
    let b = sim.run(&SignSource::AllOnes, &mut replica_rng(3, 0), &mut boxes);
    assert_eq!(b.z, b.z_star);
    assert_eq!(b.u, b.u_star);
    let occupied = boxes.occupied() as f64;
    let odd = boxes.iter().filter(|&(_, c)| c % 2 == 1).count() as f64;
    assert_eq!(b.z_star[10], occupied);
    assert_eq!(b.u_star[10], odd);
    for p in Process::ALL {
        assert_eq!(b.get(p).len(), grid.len());
    }
}

#[test]
fn occupancy_mean_matches_expectation() {
    let w = ws(0.5);
    let n = 10_000u64;
    let grid = PathGrid::new(vec![0.0, 1.0]).unwrap();
    let sim = DiscreteSimulator::new(&w, n, &grid).unwrap();
    let sums = sim.sign_sums(&SignSource::AllOnes);
    let mean_oracle = deterministic_sum(&w, Clock::Discrete(n), Centering::Occupancy);
    assert!((sums.occupancy[1] - mean_oracle).abs() < 1e-9);
    assert!(
        (centered_sign_sum(&w, &SignSource::AllOnes, Clock::Discrete(n), Centering::Occupancy) - mean_oracle).abs()
            < 1e-9
    );
    let reps = 10_000;
    let mut boxes = BoxState::new();
    let mut s = 0.0;
    let mut s2 = 0.0;
    for r in 0..reps {
        let b = sim.run_with_sums(&SignSource::AllOnes, &sums, &mut replica_rng(99, r), &mut boxes);
        s += b.z_star[1];
        s2 += b.z_star[1] * b.z_star[1];
    }
    let mean = s / reps as f64;
    let sd = (s2 / reps as f64 - mean * mean).sqrt();
    let se = sd / (reps as f64).sqrt();
    assert!((mean - mean_oracle).abs() < 3.0 * se, "{mean} vs {mean_oracle} (se {se})");
}

#[test]
fn walk_equals_simulated_paths_on_shared_labels() {
    let w = ws(0.5);
    let n = 1_000u64;
    let grid = PathGrid::uniform(n as usize).unwrap();
    let sim = DiscreteSimulator::new(&w, n, &grid).unwrap();
    assert_eq!(sim.counts(), (0..=n).collect::<Vec<_>>().as_slice());
    let mut boxes = BoxState::new();
    for seed in 0..25u64 {
        let signs = SignSource::random(seed);
        let labels = sim.sample_labels(&mut replica_rng(seed, 1));
        let b = sim.run(&signs, &mut replica_rng(seed, 1), &mut boxes);
        let odd = walk_from_labels(labels.clone(), &signs, WalkMode::Odd);
        let occ = walk_from_labels(labels.clone(), &signs, WalkMode::Occupancy);
        let drawn = correlated_walk(&w, &signs, n, &mut replica_rng(seed, 1), WalkMode::Odd).unwrap();
        assert_eq!(drawn, odd);
        for i in 0..n as usize {
            assert_eq!(odd.prefix[i] as f64, b.u[i + 1]);
            assert_eq!(occ.prefix[i] as f64, b.z[i + 1]);
        }
        let raw = raw_paths_from_labels(&labels, &signs);
        assert!(raw.iter().zip(&odd.prefix).all(|(r, &p)| r.3 == p));
    }
    assert!(correlated_walk(&w, &SignSource::AllOnes, 0, &mut replica_rng(0, 0), WalkMode::Odd).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn walk_steps_alternate_per_box(labels in prop::collection::vec(1u64..12, 1..200), seed in any::<u64>()) {
        let signs = SignSource::random(seed);
        let w = walk_from_labels(labels.clone(), &signs, WalkMode::Odd);
        let occ = walk_from_labels(labels.clone(), &signs, WalkMode::Occupancy);
        let raw = raw_paths_from_labels(&labels, &signs);
        for (i, r) in raw.iter().enumerate() {
            prop_assert_eq!(w.prefix[i], r.3);
            prop_assert_eq!(occ.prefix[i], r.2);
        }
    }

    #[test]
    fn odd_count_parity(labels in prop::collection::vec(1u64..50, 1..300)) {
        let raw = raw_paths_from_labels(&labels, &SignSource::AllOnes);
        for (i, r) in raw.iter().enumerate() {
            prop_assert_eq!(r.1 as usize % 2, (i + 1) % 2);
            prop_assert!(r.1 <= r.0 && r.0 as usize <= i + 1);
        }
    }
}
