use crate::error::{domain, KarlinError, Result};

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
const G_WEIGHTS: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_INTERVALS: usize = 4000;

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = GK_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        kron += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]` to relative tolerance `rel`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(KarlinError::Quadrature("integrand produced a non-finite value".into()));
        }
        if err <= rel * total.abs() || err < 1e-300 {
            return Ok(total);
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(KarlinError::Quadrature(format!(
                "no convergence after {MAX_INTERVALS} intervals (estimate {total}, error {err})"
            )));
        }
        let (idx, _) =
            pieces
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// `2^{alpha-2} alpha int_0^inf (1 - e^{-xs})(1 - e^{-xt}) x^{-1-alpha} dx` by quadrature.
pub fn u2_cov_quadrature(alpha: f64, s: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if !(s >= 0.0 && t >= 0.0 && s.is_finite() && t.is_finite()) {
        return domain(format!("times must be finite and >= 0, got ({s}, {t})"));
    }
    if s == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let rel = 1e-12;
    let f = |x: f64| (-(-x * s).exp_m1()) * (-(-x * t).exp_m1()) * x.powf(-1.0 - alpha);
    let split = 1.0 / s.max(t);
    let head = integrate(f, 0.0, split, rel)?;
    // x = e^u on [split, X]; beyond X both factors equal 1 to within e^{-40}
    let top = (40.0 / s.min(t)).ln();
    let lo = split.ln();
    let tail = if top > lo { integrate(|u: f64| f(u.exp()) * u.exp(), lo, top, rel)? } else { 0.0 };
    let rest = (-alpha * top.max(lo)).exp() / alpha;
    Ok(2f64.powf(alpha - 2.0) * alpha * (head + tail + rest))
}
