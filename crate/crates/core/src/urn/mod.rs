//! The discrete urn: label sampling, box counts, the eight occupancy
//! processes on a time grid, and the correlated-walk view.

mod boxes;
mod grid;
mod sampler;
pub(crate) mod signs;
mod walk;

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use boxes::BoxState;
pub use grid::{PathGrid, MAX_BALLS};
pub use sampler::{LabelSampler, OVERFLOW_LABEL, TABLE_LABELS};
pub use signs::{SignMode, SignSource};
pub use walk::{correlated_walk, walk_from_labels, Walk, WalkMode};

use crate::error::{domain, Result};
use crate::series::{Centering, Clock, SignSumPlan, SignSums};
use crate::weights::WeightSequence;

/// One draw of a box label.
pub fn sample_label<R: Rng + ?Sized>(ws: &WeightSequence, rng: &mut R) -> u64 {
    LabelSampler::new(ws).sample(rng)
}

/// `p_k(n) = 1 - (1 - p_k)^n`.
pub fn p_center(ws: &WeightSequence, k: u64, n: u64) -> Result<f64> {
    Ok(Clock::Discrete(n).center(ws.weight(k)?, Centering::Occupancy))
}

/// `q_k(n) = (1 - (1 - 2 p_k)^n) / 2`.
pub fn q_center(ws: &WeightSequence, k: u64, n: u64) -> Result<f64> {
    Ok(Clock::Discrete(n).center(ws.weight(k)?, Centering::Odd))
}

/// The processes stored in a bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Process {
    ZStar,
    UStar,
    Z,
    U,
    Z1,
    Z2,
    U1,
    U2,
}

impl Process {
    pub const ALL: [Process; 8] =
        [Process::ZStar, Process::UStar, Process::Z, Process::U, Process::Z1, Process::Z2, Process::U1, Process::U2];

    pub fn name(&self) -> &'static str {
        match self {
            Process::ZStar => "z_star",
            Process::UStar => "u_star",
            Process::Z => "z",
            Process::U => "u",
            Process::Z1 => "z1",
            Process::Z2 => "z2",
            Process::U1 => "u1",
            Process::U2 => "u2",
        }
    }

    pub fn parse(name: &str) -> Option<Process> {
        Process::ALL.iter().copied().find(|p| p.name() == name)
    }
}

/// Run parameters carried alongside simulated paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub n: u64,
    pub alpha: f64,
    pub seed: Option<u64>,
    pub sign_mode: SignMode,
    pub grid: Vec<f64>,
    /// Balls thrown by each grid time.
    pub counts: Vec<u64>,
}

/// Values of all eight processes on the grid for one replica.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessBundle {
    pub meta: BundleMeta,
    pub z_star: Vec<f64>,
    pub u_star: Vec<f64>,
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub z1: Vec<f64>,
    pub z2: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    /// Root-mean-square size of the truncated part of the centered sign sums.
    pub sign_sum_rms_error: Vec<f64>,
}

impl ProcessBundle {
    pub fn get(&self, p: Process) -> &[f64] {
        match p {
            Process::ZStar => &self.z_star,
            Process::UStar => &self.u_star,
            Process::Z => &self.z,
            Process::U => &self.u,
            Process::Z1 => &self.z1,
            Process::Z2 => &self.z2,
            Process::U1 => &self.u1,
            Process::U2 => &self.u2,
        }
    }

    /// Assemble the bundle from raw counters and centered sums.
    ///
    /// `bound[j]` is a replica-independent bound on `|Z|` and `|U|` at grid point `j`.
    pub(crate) fn assemble(meta: BundleMeta, raw: &[Counters], sums: &SignSums, bound: &[f64]) -> Self {
        let z_star: Vec<f64> = raw.iter().map(|c| c.z_star as f64).collect();
        let u_star: Vec<f64> = raw.iter().map(|c| c.u_star as f64).collect();
        let z: Vec<f64> = raw.iter().map(|c| c.z_eps as f64).collect();
        let u: Vec<f64> = raw.iter().map(|c| c.u_eps as f64).collect();
        let (z1, z2) = split_all(&z, &sums.occupancy, bound);
        let (u1, u2) = split_all(&u, &sums.odd, bound);
        ProcessBundle { meta, z_star, u_star, z, u, z1, z2, u1, u2, sign_sum_rms_error: sums.rms_bound.clone() }
    }
}

/// Split `total` into `(total - part, part)` so that both subtractions and the sum are exact.
///
/// `part` is rounded to a multiple of `2^(e-52)` where `2^e` exceeds `|part|`,
/// `|total|` and `bound`. With a `bound` shared across replicas the rounding of
/// `part` does not depend on `total`.
pub fn split_exact(total: f64, part: f64, bound: f64) -> (f64, f64) {
    let m = total.abs().max(part.abs()).max(bound.abs());
    if m == 0.0 || !m.is_finite() {
        return (total - part, part);
    }
    let e = m.log2().floor() as i32 + 1;
    let q = 2f64.powi(e - 52);
    let part = (part / q).round() * q;
    (total - part, part)
}

fn split_all(total: &[f64], part: &[f64], bound: &[f64]) -> (Vec<f64>, Vec<f64>) {
    total.iter().zip(part).zip(bound).map(|((&t, &p), &b)| split_exact(t, p, b)).unzip()
}

/// Running values of the integer-valued processes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Counters {
    pub z_star: i64,
    pub u_star: i64,
    pub z_eps: i64,
    pub u_eps: i64,
}

impl Counters {
    #[inline]
    pub fn throw(&mut self, boxes: &mut BoxState, signs: &SignSource, k: u64) {
        let prev = boxes.increment(k);
        let e = signs.eval(k);
        if prev == 0 {
            self.z_star += 1;
            self.z_eps += e;
        }
        if prev.is_multiple_of(2) {
            self.u_star += 1;
            self.u_eps += e;
        } else {
            self.u_star -= 1;
            self.u_eps -= e;
        }
    }
}

/// Reusable simulator for a fixed `(weights, n, grid)`.
#[derive(Clone, Debug)]
pub struct DiscreteSimulator {
    ws: WeightSequence,
    n: u64,
    grid: PathGrid,
    counts: Vec<u64>,
    sampler: Arc<LabelSampler>,
    plan: Arc<SignSumPlan>,
}

impl DiscreteSimulator {
    pub fn new(ws: &WeightSequence, n: u64, grid: &PathGrid) -> Result<Self> {
        Self::with_counts(ws, n, grid, None)
    }

    /// Simulator recording at explicit ball counts instead of `floor(n t_j)`.
    pub fn at_counts(ws: &WeightSequence, n: u64, grid: &PathGrid, counts: Vec<u64>) -> Result<Self> {
        Self::with_counts(ws, n, grid, Some(counts))
    }

    fn with_counts(ws: &WeightSequence, n: u64, grid: &PathGrid, counts: Option<Vec<u64>>) -> Result<Self> {
        if n == 0 {
            return domain("n must be >= 1");
        }
        let counts = match counts {
            Some(c) => c,
            None => grid.counts(n)?,
        };
        if counts.windows(2).any(|w| w[1] < w[0]) || counts.len() != grid.len() {
            return domain("ball counts must be nondecreasing with one per grid time");
        }
        let clocks: Vec<Clock> = counts.iter().map(|&m| Clock::Discrete(m)).collect();
        Ok(DiscreteSimulator {
            ws: ws.clone(),
            n,
            grid: grid.clone(),
            plan: Arc::new(SignSumPlan::new(ws, &clocks)),
            sampler: Arc::new(LabelSampler::new(ws)),
            counts,
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn grid(&self) -> &PathGrid {
        &self.grid
    }

    pub fn sampler(&self) -> &LabelSampler {
        &self.sampler
    }

    pub fn plan(&self) -> &SignSumPlan {
        &self.plan
    }

    pub fn sign_sums(&self, signs: &SignSource) -> SignSums {
        self.plan.evaluate(signs)
    }

    fn bounds(&self) -> Vec<f64> {
        self.counts.iter().map(|&m| m as f64).collect()
    }

    fn meta(&self, signs: &SignSource) -> BundleMeta {
        BundleMeta {
            n: self.n,
            alpha: self.ws.alpha(),
            seed: None,
            sign_mode: signs.mode(),
            grid: self.grid.times().to_vec(),
            counts: self.counts.clone(),
        }
    }

    /// Labels for every ball up to the last grid count.
    pub fn sample_labels<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        let total = self.counts.last().copied().unwrap_or(0);
        (0..total).map(|_| self.sampler.sample(rng)).collect()
    }

    /// Counter values at every grid count. `boxes` holds the final state afterwards.
    pub(crate) fn raw_with(
        &self,
        signs: &SignSource,
        boxes: &mut BoxState,
        mut next: impl FnMut() -> u64,
    ) -> Vec<Counters> {
        boxes.clear();
        let mut cur = Counters::default();
        let mut thrown = 0u64;
        let mut out = Vec::with_capacity(self.counts.len());
        for &m in &self.counts {
            while thrown < m {
                cur.throw(boxes, signs, next());
                thrown += 1;
            }
            out.push(cur);
        }
        out
    }

    /// One replica with sign sums computed for `signs`.
    pub fn run<R: Rng + ?Sized>(&self, signs: &SignSource, rng: &mut R, boxes: &mut BoxState) -> ProcessBundle {
        let sums = self.sign_sums(signs);
        self.run_with_sums(signs, &sums, rng, boxes)
    }

    /// One replica reusing precomputed sign sums for `signs`.
    pub fn run_with_sums<R: Rng + ?Sized>(
        &self,
        signs: &SignSource,
        sums: &SignSums,
        rng: &mut R,
        boxes: &mut BoxState,
    ) -> ProcessBundle {
        let raw = self.raw_with(signs, boxes, || self.sampler.sample(rng));
        ProcessBundle::assemble(self.meta(signs), &raw, sums, &self.bounds())
    }

    /// One replica driven by a given label sequence (at least the last grid count long).
    pub fn run_from_labels(&self, signs: &SignSource, labels: &[u64], boxes: &mut BoxState) -> Result<ProcessBundle> {
        let total = self.counts.last().copied().unwrap_or(0);
        if (labels.len() as u64) < total {
            return Err(crate::error::KarlinError::LengthMismatch { expected: total as usize, found: labels.len() });
        }
        let mut it = labels.iter().copied();
        let raw = self.raw_with(signs, boxes, || it.next().unwrap_or(0));
        Ok(ProcessBundle::assemble(self.meta(signs), &raw, &self.sign_sums(signs), &self.bounds()))
    }
}

/// Simulate one replica of the discrete model on `grid`.
pub fn simulate_discrete<R: Rng + ?Sized>(
    ws: &WeightSequence,
    signs: &SignSource,
    n: u64,
    grid: &PathGrid,
    rng: &mut R,
) -> Result<ProcessBundle> {
    let sim = DiscreteSimulator::new(ws, n, grid)?;
    Ok(sim.run(signs, rng, &mut BoxState::new()))
}

/// Counter values after each of the first `labels.len()` balls (index `i` = after `i + 1` balls).
pub fn raw_paths_from_labels(labels: &[u64], signs: &SignSource) -> Vec<(i64, i64, i64, i64)> {
    let mut boxes = BoxState::new();
    let mut cur = Counters::default();
    labels
        .iter()
        .map(|&k| {
            cur.throw(&mut boxes, signs, k);
            (cur.z_star, cur.u_star, cur.z_eps, cur.u_eps)
        })
        .collect()
}
