use rand::Rng;

use crate::weights::WeightSequence;

/// Labels handled by the inverse-CDF table.
pub const TABLE_LABELS: usize = 1 << 17;

/// Labels from this value on are treated as pairwise distinct boxes.
pub const OVERFLOW_LABEL: u64 = 1 << 62;

/// Sampler for box labels `k` with probability `p_k`.
///
/// Inverse CDF with a guide table for `k <= TABLE_LABELS`; beyond that,
/// rejection from the floor of a continuous Pareto variable.
#[derive(Clone, Debug)]
pub struct LabelSampler {
    cdf: Vec<f64>,
    guide: Vec<u32>,
    tail_start: f64,
    pareto_exp: f64,
    exponent: f64,
    accept_max: f64,
}

fn pareto_ratio(k: f64, s: f64) -> f64 {
    // k^{-s} / int_k^{k+1} x^{-s} dx
    (s - 1.0) / (k * -((1.0 - s) * (1.0 / k).ln_1p()).exp_m1())
}

impl LabelSampler {
    pub fn new(ws: &WeightSequence) -> Self {
        let table = &ws.table()[..TABLE_LABELS.min(ws.table().len())];
        let mut cdf = Vec::with_capacity(table.len());
        let mut sum = 0.0;
        let mut comp = 0.0;
        for &p in table {
            let y = p - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            cdf.push(sum);
        }
        let g_len = cdf.len();
        let mut guide = Vec::with_capacity(g_len);
        let mut i = 0usize;
        for g in 0..g_len {
            let threshold = g as f64 / g_len as f64;
            while i + 1 < g_len && cdf[i] <= threshold {
                i += 1;
            }
            guide.push(i as u32);
        }
        let s = ws.exponent();
        let tail_start = (cdf.len() + 1) as f64;
        LabelSampler {
            cdf,
            guide,
            tail_start,
            pareto_exp: -1.0 / (s - 1.0),
            exponent: s,
            accept_max: pareto_ratio(tail_start, s),
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let last = self.cdf.len() - 1;
        if u < self.cdf[last] {
            let mut i = self.guide[(u * self.guide.len() as f64) as usize] as usize;
            while self.cdf[i] <= u {
                i += 1;
            }
            (i + 1) as u64
        } else {
            self.sample_tail(rng)
        }
    }

    #[cold]
    fn sample_tail<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        loop {
            let u = 1.0 - rng.random::<f64>();
            let x = self.tail_start * u.powf(self.pareto_exp);
            if !(x < OVERFLOW_LABEL as f64) {
                return OVERFLOW_LABEL + (rng.random::<u64>() >> 2);
            }
            let k = x.floor();
            let v: f64 = rng.random();
            if v * self.accept_max <= pareto_ratio(k, self.exponent) {
                return k as u64;
            }
        }
    }
}
