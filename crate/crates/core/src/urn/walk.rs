use rand::Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::sampler::LabelSampler;
use super::signs::SignSource;
use crate::error::{domain, Result};
use crate::weights::WeightSequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkMode {
    /// Steps alternate in sign along the visits of each box.
    Odd,
    /// Only the first visit of each box makes a step.
    Occupancy,
}

/// Steps `X_1..X_n` of the correlated walk and their prefix sums.
#[derive(Clone, Debug, PartialEq)]
pub struct Walk {
    pub labels: Vec<u64>,
    pub steps: Vec<i8>,
    pub prefix: Vec<i64>,
}

/// Draw `n` labels and build the walk.
pub fn correlated_walk<R: Rng + ?Sized>(
    ws: &WeightSequence,
    signs: &SignSource,
    n: u64,
    rng: &mut R,
    mode: WalkMode,
) -> Result<Walk> {
    if n == 0 {
        return domain("walk length n must be >= 1");
    }
    let sampler = LabelSampler::new(ws);
    let labels: Vec<u64> = (0..n).map(|_| sampler.sample(rng)).collect();
    Ok(walk_from_labels(labels, signs, mode))
}

/// Build the walk for a given label sequence.
pub fn walk_from_labels(labels: Vec<u64>, signs: &SignSource, mode: WalkMode) -> Walk {
    let mut last: FxHashMap<u64, i8> = FxHashMap::default();
    let mut steps = Vec::with_capacity(labels.len());
    let mut prefix = Vec::with_capacity(labels.len());
    let mut sum = 0i64;
    for &k in &labels {
        let x = match last.get(&k) {
            None => signs.eval(k) as i8,
            Some(&prev) => match mode {
                WalkMode::Odd => -prev,
                WalkMode::Occupancy => 0,
            },
        };
        if mode == WalkMode::Odd || !last.contains_key(&k) {
            last.insert(k, x);
        }
        steps.push(x);
        sum += x as i64;
        prefix.push(sum);
    }
    Walk { labels, steps, prefix }
}
