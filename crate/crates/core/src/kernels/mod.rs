//! Limiting covariance kernels, exact identities between them, covariance
//! matrices on grids and Gaussian sampling.

mod matrix;
mod quadrature;

use serde::{Deserialize, Serialize};

pub use matrix::{chol_psd, cov_matrix, cov_matrix_at, min_eig, sample_gp, CovMatrix, MAX_GRID_POINTS};
pub use quadrature::{integrate, u2_cov_quadrature};

use crate::error::{domain, Result};
use crate::special::gamma;

/// Covariance kernel family with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KernelSpec {
    LimitZ1 {
        alpha: f64,
    },
    LimitZ2 {
        alpha: f64,
    },
    LimitZ {
        alpha: f64,
    },
    LimitU1 {
        alpha: f64,
    },
    LimitU2 {
        alpha: f64,
    },
    LimitU {
        alpha: f64,
    },
    Fbm {
        hurst: f64,
    },
    /// Bifractional Brownian motion `R^{H,K}`.
    BiFbm {
        hurst: f64,
        k: f64,
    },
    TimeChangedBm {
        alpha: f64,
    },
}

/// `x^e` for `x >= 0`, `e > 0`, with `0^e = 0`.
#[inline]
fn pw(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(e)
    }
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        domain(format!("{name} must lie in (0,1), got {v}"))
    }
}

impl KernelSpec {
    /// Parse a family name (`limit-z1`, `fbm`, `bifbm`, ...) with its parameters.
    pub fn from_name(family: &str, alpha: Option<f64>, hurst: Option<f64>, k: Option<f64>) -> Result<Self> {
        let need =
            |v: Option<f64>, what: &str| v.ok_or_else(|| crate::KarlinError::Domain(format!("{family} needs {what}")));
        let spec = match family {
            "limit-z1" => KernelSpec::LimitZ1 { alpha: need(alpha, "alpha")? },
            "limit-z2" => KernelSpec::LimitZ2 { alpha: need(alpha, "alpha")? },
            "limit-z" => KernelSpec::LimitZ { alpha: need(alpha, "alpha")? },
            "limit-u1" => KernelSpec::LimitU1 { alpha: need(alpha, "alpha")? },
            "limit-u2" => KernelSpec::LimitU2 { alpha: need(alpha, "alpha")? },
            "limit-u" => KernelSpec::LimitU { alpha: need(alpha, "alpha")? },
            "fbm" => KernelSpec::Fbm { hurst: need(hurst, "hurst")? },
            "bifbm" => match (hurst, k, alpha) {
                (Some(h), Some(k), _) => KernelSpec::BiFbm { hurst: h, k },
                (None, None, Some(a)) => KernelSpec::bifbm_extended(a)?,
                _ => return domain("bifbm needs hurst and k, or alpha for the extended pair"),
            },
            "time-changed-bm" => KernelSpec::TimeChangedBm { alpha: need(alpha, "alpha")? },
            other => return domain(format!("unknown kernel family '{other}'")),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `R^{1/(2 alpha), alpha}`.
    pub fn bifbm_extended(alpha: f64) -> Result<Self> {
        open_unit("alpha", alpha)?;
        Ok(KernelSpec::BiFbm { hurst: 0.5 / alpha, k: alpha })
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::LimitZ1 { .. } => "limit-z1",
            KernelSpec::LimitZ2 { .. } => "limit-z2",
            KernelSpec::LimitZ { .. } => "limit-z",
            KernelSpec::LimitU1 { .. } => "limit-u1",
            KernelSpec::LimitU2 { .. } => "limit-u2",
            KernelSpec::LimitU { .. } => "limit-u",
            KernelSpec::Fbm { .. } => "fbm",
            KernelSpec::BiFbm { .. } => "bifbm",
            KernelSpec::TimeChangedBm { .. } => "time-changed-bm",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::LimitZ1 { alpha }
            | KernelSpec::LimitZ2 { alpha }
            | KernelSpec::LimitZ { alpha }
            | KernelSpec::LimitU1 { alpha }
            | KernelSpec::LimitU2 { alpha }
            | KernelSpec::LimitU { alpha }
            | KernelSpec::TimeChangedBm { alpha } => open_unit("alpha", alpha),
            KernelSpec::Fbm { hurst } => open_unit("hurst", hurst),
            KernelSpec::BiFbm { hurst, k } => {
                if !(k > 0.0 && k <= 1.0) {
                    return domain(format!("k must lie in (0,1], got {k}"));
                }
                if hurst > 0.0 && hurst < 1.0 {
                    return Ok(());
                }
                // the extended pair H = 1/(2 alpha), K = alpha
                if k < 1.0 && (2.0 * hurst * k - 1.0).abs() <= 1e-12 {
                    return Ok(());
                }
                domain(format!("bifbm needs hurst in (0,1) or hurst * k = 1/2 with k < 1, got hurst={hurst}, k={k}"))
            }
        }
    }

    /// Self-similarity exponent `2h`: `k(cs, ct) = c^{2h} k(s, t)`.
    pub fn scaling_exponent(&self) -> f64 {
        match *self {
            KernelSpec::LimitZ1 { alpha }
            | KernelSpec::LimitZ2 { alpha }
            | KernelSpec::LimitZ { alpha }
            | KernelSpec::LimitU1 { alpha }
            | KernelSpec::LimitU2 { alpha }
            | KernelSpec::LimitU { alpha }
            | KernelSpec::TimeChangedBm { alpha } => alpha,
            KernelSpec::Fbm { hurst } => 2.0 * hurst,
            KernelSpec::BiFbm { hurst, k } => 2.0 * hurst * k,
        }
    }

    /// Kernel value without parameter checks; `s, t >= 0`.
    pub(crate) fn eval(&self, s: f64, t: f64) -> f64 {
        match *self {
            KernelSpec::LimitZ1 { alpha } => gamma(1.0 - alpha) * (pw(s + t, alpha) - pw(s.max(t), alpha)),
            KernelSpec::LimitZ2 { alpha } => gamma(1.0 - alpha) * (pw(s, alpha) + pw(t, alpha) - pw(s + t, alpha)),
            KernelSpec::LimitZ { alpha } => gamma(1.0 - alpha) * pw(s.min(t), alpha),
            KernelSpec::LimitU1 { alpha } => u_const(alpha) * (pw(s + t, alpha) - pw((t - s).abs(), alpha)),
            KernelSpec::LimitU2 { alpha } => u_const(alpha) * (pw(s, alpha) + pw(t, alpha) - pw(s + t, alpha)),
            KernelSpec::LimitU { alpha } => u_const(alpha) * (pw(s, alpha) + pw(t, alpha) - pw((t - s).abs(), alpha)),
            KernelSpec::Fbm { hurst } => {
                let e = 2.0 * hurst;
                0.5 * (pw(s, e) + pw(t, e) - pw((t - s).abs(), e))
            }
            KernelSpec::BiFbm { .. } if s == 0.0 || t == 0.0 => 0.0,
            KernelSpec::BiFbm { hurst, k } => {
                let e = 2.0 * hurst;
                2f64.powf(-k) * (pw(pw(t, e) + pw(s, e), k) - pw((t - s).abs(), e * k))
            }
            KernelSpec::TimeChangedBm { alpha } => pw(s.min(t), alpha),
        }
    }
}

fn u_const(alpha: f64) -> f64 {
    gamma(1.0 - alpha) * 2f64.powf(alpha - 2.0)
}

fn check_times(s: f64, t: f64) -> Result<()> {
    if s >= 0.0 && t >= 0.0 && s.is_finite() && t.is_finite() {
        Ok(())
    } else {
        domain(format!("kernel arguments must be finite and >= 0, got ({s}, {t})"))
    }
}

/// Kernel value at `(s, t)`.
pub fn kernel_eval(spec: &KernelSpec, s: f64, t: f64) -> Result<f64> {
    spec.validate()?;
    check_times(s, t)?;
    Ok(spec.eval(s, t))
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().all(|&x| x >= 0.0 && x.is_finite()) {
        Ok(())
    } else {
        domain("grid points must be finite and >= 0")
    }
}

fn max_over_pairs(grid: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    let mut m: f64 = 0.0;
    for &s in grid {
        for &t in grid {
            m = m.max(f(s, t).abs());
        }
    }
    m
}

/// `max |K_Z - K_Z1 - K_Z2|` and `max |K_U - K_U1 - K_U2|` over grid pairs.
pub fn decomposition_residual(alpha: f64, grid: &[f64]) -> Result<(f64, f64)> {
    open_unit("alpha", alpha)?;
    check_grid(grid)?;
    let (z, z1, z2) = (KernelSpec::LimitZ { alpha }, KernelSpec::LimitZ1 { alpha }, KernelSpec::LimitZ2 { alpha });
    let (u, u1, u2) = (KernelSpec::LimitU { alpha }, KernelSpec::LimitU1 { alpha }, KernelSpec::LimitU2 { alpha });
    Ok((
        max_over_pairs(grid, |s, t| z.eval(s, t) - z1.eval(s, t) - z2.eval(s, t)),
        max_over_pairs(grid, |s, t| u.eval(s, t) - u1.eval(s, t) - u2.eval(s, t)),
    ))
}

/// Residual of the decomposition of `2^{-K}(t^{2HK} + s^{2HK} - |t-s|^{2HK})` into `R^{H,K}` plus a remainder.
pub fn lei_residual(hurst: f64, k: f64, grid: &[f64]) -> Result<f64> {
    let spec = KernelSpec::BiFbm { hurst, k };
    spec.validate()?;
    check_grid(grid)?;
    let e = 2.0 * hurst;
    let scale = 2f64.powf(-k);
    Ok(max_over_pairs(grid, |s, t| {
        let lhs = scale * (pw(t, e * k) + pw(s, e * k) - pw((t - s).abs(), e * k));
        let rest = scale * (pw(t, e * k) + pw(s, e * k) - pw(pw(t, e) + pw(s, e), k));
        lhs - spec.eval(s, t) - rest
    }))
}

/// `K_U1` against `2^alpha Gamma(1-alpha)` times the odd-part covariance of two-sided fBm with `2H = alpha`.
pub fn oddpart_residual(alpha: f64, grid: &[f64]) -> Result<f64> {
    open_unit("alpha", alpha)?;
    check_grid(grid)?;
    let u1 = KernelSpec::LimitU1 { alpha };
    let two_sided = |a: f64, b: f64| 0.5 * (pw(a.abs(), alpha) + pw(b.abs(), alpha) - pw((a - b).abs(), alpha));
    let c = 2f64.powf(alpha) * gamma(1.0 - alpha);
    Ok(max_over_pairs(grid, |s, t| {
        // Cov((B(t) - B(-t))/2, (B(s) - B(-s))/2)
        let odd = 0.25 * (two_sided(t, s) - two_sided(t, -s) - two_sided(-t, s) + two_sided(-t, -s));
        u1.eval(s, t) - c * odd
    }))
}

/// `max |k(c s, c t) - c^{2h} k(s, t)|` over grid pairs.
pub fn self_similarity_residual(spec: &KernelSpec, c: f64, grid: &[f64]) -> Result<f64> {
    spec.validate()?;
    check_grid(grid)?;
    if !(c > 0.0 && c.is_finite()) {
        return domain(format!("scale must be positive, got {c}"));
    }
    if matches!(spec, KernelSpec::BiFbm { .. }) {
        return domain("self-similarity residual covers the limit, fbm and time-changed families");
    }
    let f = c.powf(spec.scaling_exponent());
    Ok(max_over_pairs(grid, |s, t| spec.eval(c * s, c * t) - f * spec.eval(s, t)))
}

/// `Gamma(1-alpha) 2^alpha R^{1/(2 alpha), alpha}(s, t)` against `2 K_Z1 + K_Z2` at `(s^{1/alpha}, t^{1/alpha})`.
pub fn bifbm_decomposition_residual(alpha: f64, grid: &[f64]) -> Result<f64> {
    let r = KernelSpec::bifbm_extended(alpha)?;
    check_grid(grid)?;
    let (z1, z2) = (KernelSpec::LimitZ1 { alpha }, KernelSpec::LimitZ2 { alpha });
    let g = gamma(1.0 - alpha) * 2f64.powf(alpha);
    let inv = 1.0 / alpha;
    Ok(max_over_pairs(grid, |s, t| {
        let (a, b) = (pw(s, inv), pw(t, inv));
        g * r.eval(s, t) - 2.0 * z1.eval(a, b) - z2.eval(a, b)
    }))
}
