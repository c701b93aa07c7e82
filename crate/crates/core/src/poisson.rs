//! The Poissonized urn: balls arrive at the jump times of a unit-rate Poisson
//! process, which makes box counts independent. Exact finite-`n` covariances
//! of the centered components and the gap to the discrete centering.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{domain, KarlinError, Result};
use crate::series::{truncation_cutoff, Centering, Clock, SignSumPlan, SignSums};
use crate::urn::{
    BoxState, BundleMeta, Counters, LabelSampler, PathGrid, Process, ProcessBundle, SignSource, MAX_BALLS,
};
use crate::weights::WeightSequence;

/// `1 - exp(-p_k t)`.
pub fn tilde_p(ws: &WeightSequence, k: u64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(Clock::Continuous(t).center(ws.weight(k)?, Centering::Occupancy))
}

/// `(1 - exp(-2 p_k t)) / 2`.
pub fn tilde_q(ws: &WeightSequence, k: u64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(Clock::Continuous(t).center(ws.weight(k)?, Centering::Odd))
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("time must be finite and >= 0, got {t}"));
    }
    Ok(())
}

/// Centered components with an exact finite-`n` covariance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    Z1,
    Z2,
    U1,
    U2,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::Z1, Component::Z2, Component::U1, Component::U2];

    pub fn process(&self) -> Process {
        match self {
            Component::Z1 => Process::Z1,
            Component::Z2 => Process::Z2,
            Component::U1 => Process::U1,
            Component::U2 => Process::U2,
        }
    }
}

/// Covariance of a Poissonized component at times `n s` and `n t`.
pub fn exact_cov(which: Component, ws: &WeightSequence, n: f64, s: f64, t: f64) -> Result<f64> {
    if !(n >= 0.0 && n.is_finite()) {
        return domain(format!("n must be finite and >= 0, got {n}"));
    }
    check_time(s)?;
    check_time(t)?;
    let v = |x: f64| ws.big_v(x);
    let hi = s.max(t);
    Ok(match which {
        Component::Z1 => v(n * (s + t)) - v(n * hi),
        Component::Z2 => v(n * s) + v(n * t) - v(n * (s + t)),
        Component::U1 => 0.25 * (v(2.0 * n * (s + t)) - v(2.0 * n * (t - s).abs())),
        Component::U2 => 0.25 * (v(2.0 * n * s) + v(2.0 * n * t) - v(2.0 * n * (s + t))),
    })
}

/// One Poissonized replica: all eight processes plus the arrival counts `N(n t_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonBundle {
    /// Processes evaluated at the Poisson clock; `paths.meta.counts` equals `arrivals`.
    pub paths: ProcessBundle,
    pub arrivals: Vec<u64>,
}

impl PoissonBundle {
    pub fn get(&self, p: Process) -> &[f64] {
        self.paths.get(p)
    }
}

/// Reusable simulator for a fixed `(weights, n, grid)` under Poisson arrivals.
#[derive(Clone, Debug)]
pub struct PoissonSimulator {
    ws: WeightSequence,
    n: u64,
    grid: PathGrid,
    clocks: Vec<f64>,
    sampler: Arc<LabelSampler>,
    plan: Arc<SignSumPlan>,
}

impl PoissonSimulator {
    pub fn new(ws: &WeightSequence, n: u64, grid: &PathGrid) -> Result<Self> {
        if n == 0 {
            return domain("n must be >= 1");
        }
        let clocks: Vec<f64> = grid.times().iter().map(|&t| n as f64 * t).collect();
        if clocks.iter().any(|x| !x.is_finite()) {
            return domain("n * t must be finite");
        }
        if *clocks.last().unwrap() > MAX_BALLS as f64 / 2.0 {
            return Err(KarlinError::Overflow(format!("n * t_m exceeds {}", MAX_BALLS / 2)));
        }
        let plan_clocks: Vec<Clock> = clocks.iter().map(|&x| Clock::Continuous(x)).collect();
        Ok(PoissonSimulator {
            ws: ws.clone(),
            n,
            grid: grid.clone(),
            plan: Arc::new(SignSumPlan::new(ws, &plan_clocks)),
            sampler: Arc::new(LabelSampler::new(ws)),
            clocks,
        })
    }

    pub fn sign_sums(&self, signs: &SignSource) -> SignSums {
        self.plan.evaluate(signs)
    }

    pub fn plan(&self) -> &SignSumPlan {
        &self.plan
    }

    pub fn run<R: Rng + ?Sized>(&self, signs: &SignSource, rng: &mut R, boxes: &mut BoxState) -> PoissonBundle {
        let sums = self.sign_sums(signs);
        self.run_with_sums(signs, &sums, rng, boxes)
    }

    pub fn run_with_sums<R: Rng + ?Sized>(
        &self,
        signs: &SignSource,
        sums: &SignSums,
        rng: &mut R,
        boxes: &mut BoxState,
    ) -> PoissonBundle {
        boxes.clear();
        let mut cur = Counters::default();
        let mut arrivals = Vec::with_capacity(self.clocks.len());
        let mut raw = Vec::with_capacity(self.clocks.len());
        let mut total = 0u64;
        let mut prev = 0.0;
        for &x in &self.clocks {
            let mean = x - prev;
            prev = x;
            if mean > 0.0 {
                let draw: f64 = Poisson::new(mean).expect("finite positive mean").sample(rng);
                for _ in 0..draw as u64 {
                    cur.throw(boxes, signs, self.sampler.sample(rng));
                }
                total += draw as u64;
            }
            arrivals.push(total);
            raw.push(cur);
        }
        let meta = BundleMeta {
            n: self.n,
            alpha: self.ws.alpha(),
            seed: None,
            sign_mode: signs.mode(),
            grid: self.grid.times().to_vec(),
            counts: arrivals.clone(),
        };
        // arrivals beyond this bound have probability below e^-100
        let bound: Vec<f64> = self.clocks.iter().map(|&x| (x + 15.0 * x.sqrt() + 128.0).ceil()).collect();
        PoissonBundle { paths: ProcessBundle::assemble(meta, &raw, sums, &bound), arrivals }
    }
}

/// Simulate one Poissonized replica on `grid`.
pub fn simulate_poissonized<R: Rng + ?Sized>(
    ws: &WeightSequence,
    signs: &SignSource,
    n: u64,
    grid: &PathGrid,
    rng: &mut R,
) -> Result<PoissonBundle> {
    let sim = PoissonSimulator::new(ws, n, grid)?;
    Ok(sim.run(signs, rng, &mut BoxState::new()))
}

/// Distance between Poissonized and discrete centering along a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepoissonGap {
    /// `sup_j sum_k |p~_k(n t_j) - p_k(floor(n t_j))| / sigma_n`.
    pub p_gap: f64,
    /// Same with `q~` and `q`.
    pub q_gap: f64,
    /// Unnormalized suprema.
    pub p_raw: f64,
    pub q_raw: f64,
    /// Bound on the truncated part of either normalized sum.
    pub tail_error: f64,
}

/// Sums `sum_k |p~_k(n t) - p_k(floor(n t))|` (and the `q` version) over the grid.
pub fn depoisson_gap(ws: &WeightSequence, n: u64, grid: &PathGrid) -> Result<DepoissonGap> {
    let sigma2 = ws.sigma2(n as f64);
    if sigma2 == 0.0 {
        return Err(KarlinError::ZeroSigma(n as f64));
    }
    let sigma = sigma2.sqrt();
    let counts = grid.counts(n)?;
    let mut p_raw: f64 = 0.0;
    let mut q_raw: f64 = 0.0;
    let mut tail: f64 = 0.0;
    let table = ws.table();
    for (&t, &m) in grid.times().iter().zip(&counts) {
        let x = n as f64 * t;
        if x == 0.0 {
            continue;
        }
        let cont = Clock::Continuous(x);
        let disc = Clock::Discrete(m);
        let cutoff = truncation_cutoff(ws, 2.0 * x);
        let mut sp = 0.0;
        let mut sq = 0.0;
        for k in (1..=cutoff).rev() {
            let p = if (k as usize) <= table.len() { table[(k - 1) as usize] } else { ws.p(k) };
            sp += (cont.center(p, Centering::Occupancy) - disc.center(p, Centering::Occupancy)).abs();
            sq += (cont.center(p, Centering::Odd) - disc.center(p, Centering::Odd)).abs();
        }
        // |e^{-px} - (1-p)^m| <= p |x - m| + m p^2 / 2, and twice that for the q version
        let bound = 2.0 * ((x - m as f64).abs() * ws.tail_mass(cutoff) + m as f64 * ws.tail_power_sum(cutoff, 2));
        p_raw = p_raw.max(sp);
        q_raw = q_raw.max(sq);
        tail = tail.max(bound);
    }
    Ok(DepoissonGap { p_gap: p_raw / sigma, q_gap: q_raw / sigma, p_raw, q_raw, tail_error: tail / sigma })
}
