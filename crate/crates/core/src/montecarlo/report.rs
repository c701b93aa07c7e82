use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::poisson::depoisson_gap;
use crate::urn::PathGrid;
use crate::weights::WeightSequence;

/// One row of the convergence table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub v_over_nu: f64,
    pub gamma_one_minus_alpha: f64,
    pub p_gap: f64,
    pub q_gap: f64,
    pub gap_tail_error: f64,
    pub v_bound: f64,
}

/// `max_t V(n t) / (t^{alpha/2} nu(n))` over `t = 2^{-10}, ..., 2^{-1}, 1`.
pub fn v_bound_diagnostic(ws: &WeightSequence, n: u64) -> Result<f64> {
    let nu = ws.sigma2(n as f64);
    if nu == 0.0 {
        return Err(crate::KarlinError::ZeroSigma(n as f64));
    }
    let gamma = ws.alpha() / 2.0;
    Ok((0..=10)
        .map(|i| {
            let t = 2f64.powi(-i);
            ws.big_v(n as f64 * t) / (t.powf(gamma) * nu)
        })
        .fold(0.0, f64::max))
}

/// Asymptotic ratio, de-Poissonization gaps and the `V` bound diagnostic for each `n`.
pub fn convergence_report(ws: &WeightSequence, n_list: &[u64], grid: &PathGrid) -> Result<Vec<ConvergenceRow>> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return domain("n_list must be strictly increasing");
    }
    n_list
        .iter()
        .map(|&n| {
            let nu = ws.sigma2(n as f64);
            if nu == 0.0 {
                return Err(crate::KarlinError::ZeroSigma(n as f64));
            }
            let gap = depoisson_gap(ws, n, grid)?;
            Ok(ConvergenceRow {
                n,
                v_over_nu: ws.big_v(n as f64) / nu,
                gamma_one_minus_alpha: ws.gamma_one_minus_alpha(),
                p_gap: gap.p_gap,
                q_gap: gap.q_gap,
                gap_tail_error: gap.tail_error,
                v_bound: v_bound_diagnostic(ws, n)?,
            })
        })
        .collect()
}
