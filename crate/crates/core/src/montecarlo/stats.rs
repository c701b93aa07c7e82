use serde::{Deserialize, Serialize};

use crate::error::{KarlinError, Result};
use crate::special::normal_cdf;

/// Sample covariance with per-entry jackknife standard errors (row-major `d x d`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovEstimate {
    pub dim: usize,
    pub replicas: usize,
    pub mean: Vec<f64>,
    pub cov: Vec<f64>,
    pub se: Vec<f64>,
}

impl CovEstimate {
    pub fn cov_at(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.dim + j]
    }

    pub fn se_at(&self, i: usize, j: usize) -> f64 {
        self.se[i * self.dim + j]
    }
}

/// Unbiased covariance of equal-length paths, with jackknife standard errors.
///
/// For `R >= 3` the jackknife variance of entry `(i, j)` has the closed form
/// `R / ((R-1)(R-2)^2) * sum_r (w_r - mean w)^2` with `w_r` the centered cross
/// products; for `R = 2` the plain standard error of `w` is used.
pub fn empirical_cov(paths: &[Vec<f64>]) -> Result<CovEstimate> {
    let r = paths.len();
    if r < 2 {
        return Err(KarlinError::TooFewSamples { needed: 2, got: r });
    }
    let d = paths[0].len();
    if let Some(bad) = paths.iter().find(|p| p.len() != d) {
        return Err(KarlinError::LengthMismatch { expected: d, found: bad.len() });
    }
    let rf = r as f64;
    // shift by the first path so constant coordinates center to exactly zero
    let shift = &paths[0];
    let mut mean = vec![0.0; d];
    for p in paths {
        for ((m, x), k) in mean.iter_mut().zip(p).zip(shift) {
            *m += x - k;
        }
    }
    for (m, k) in mean.iter_mut().zip(shift) {
        *m = k + *m / rf;
    }
    let centered: Vec<Vec<f64>> = paths.iter().map(|p| p.iter().zip(&mean).map(|(x, m)| x - m).collect()).collect();
    let mut cov = vec![0.0; d * d];
    let mut se = vec![0.0; d * d];
    let mut w = vec![0.0; r];
    for i in 0..d {
        for j in 0..=i {
            let mut s = 0.0;
            for (slot, c) in w.iter_mut().zip(&centered) {
                *slot = c[i] * c[j];
                s += *slot;
            }
            let wbar = s / rf;
            let ss: f64 = w.iter().map(|x| (x - wbar) * (x - wbar)).sum();
            let c = s / (rf - 1.0);
            let e = if r >= 3 {
                (rf / ((rf - 1.0) * (rf - 2.0) * (rf - 2.0)) * ss).sqrt()
            } else {
                (ss / (rf - 1.0)).sqrt() / rf.sqrt()
            };
            cov[i * d + j] = c;
            cov[j * d + i] = c;
            se[i * d + j] = e;
            se[j * d + i] = e;
        }
    }
    Ok(CovEstimate { dim: d, replicas: r, mean, cov, se })
}

/// Kolmogorov–Smirnov test against a normal law with fitted mean and variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic Kolmogorov p-value; conservative because the parameters are fitted.
    pub p_value: f64,
    pub samples: usize,
}

pub fn ks_normality(samples: &[f64]) -> Result<KsResult> {
    let n = samples.len();
    if n < 100 {
        return Err(KarlinError::TooFewSamples { needed: 100, got: n });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if !(var > 0.0) {
        return Ok(KsResult { statistic: 1.0, p_value: 0.0, samples: n });
    }
    let sd = var.sqrt();
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = normal_cdf((x - mean) / sd);
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    let sq = nf.sqrt();
    Ok(KsResult { statistic: d, p_value: kolmogorov_q((sq + 0.12 + 0.11 / sq) * d), samples: n })
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
