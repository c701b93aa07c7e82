//! Regularly varying box weights `p_k = k^{-1/alpha} / zeta(1/alpha)` and the
//! counting functions derived from them.

use std::sync::{Arc, OnceLock};

use crate::error::{domain, Result};
use crate::series::{deterministic_sum, Centering, Clock};
use crate::special::{gamma, hurwitz_zeta, hurwitz_zeta_with_terms};

/// Default absolute error budget for truncated infinite sums.
pub const DEFAULT_TAIL_TOL: f64 = 1e-9;

/// Default number of explicitly summed terms for random-sign series.
pub const DEFAULT_MAX_TERMS: usize = 1 << 20;

/// Directly summed terms of `zeta(1/alpha)` before the Euler–Maclaurin tail.
const ZETA_DIRECT_TERMS: usize = 10_000;

/// Pure power-law weights with regular-variation index `alpha`.
///
/// Cheap to clone; the lazily built weight table is shared between clones.
#[derive(Clone, Debug)]
pub struct WeightSequence {
    inner: Arc<Inner>,
}

#[derive(Debug)]
struct Inner {
    alpha: f64,
    exponent: f64,
    c: f64,
    tail_tol: f64,
    max_terms: usize,
    table: OnceLock<Vec<f64>>,
}

/// Build the weight sequence for `alpha` with the default term budget.
pub fn make_weights(alpha: f64, tail_tol: f64) -> Result<WeightSequence> {
    WeightSequence::with_max_terms(alpha, tail_tol, DEFAULT_MAX_TERMS)
}

/// `Gamma(1 - alpha)` for `alpha` in (0, 1).
pub fn gamma_one_minus_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    Ok(gamma(1.0 - alpha))
}

impl WeightSequence {
    pub fn with_max_terms(alpha: f64, tail_tol: f64, max_terms: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("alpha must lie in (0,1), got {alpha}"));
        }
        if !(tail_tol > 0.0 && tail_tol.is_finite()) {
            return domain(format!("tail_tol must be positive, got {tail_tol}"));
        }
        if max_terms == 0 {
            return domain("max_terms must be positive");
        }
        let exponent = 1.0 / alpha;
        let c = 1.0 / hurwitz_zeta_with_terms(exponent, 1.0, ZETA_DIRECT_TERMS);
        Ok(WeightSequence {
            inner: Arc::new(Inner { alpha, exponent, c, tail_tol, max_terms, table: OnceLock::new() }),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    /// Decay exponent `1/alpha`.
    pub fn exponent(&self) -> f64 {
        self.inner.exponent
    }

    /// Normalization constant `1/zeta(1/alpha)`.
    pub fn c(&self) -> f64 {
        self.inner.c
    }

    pub fn tail_tol(&self) -> f64 {
        self.inner.tail_tol
    }

    pub fn max_terms(&self) -> usize {
        self.inner.max_terms
    }

    /// `p_k`; `k = 0` is a domain error.
    pub fn weight(&self, k: u64) -> Result<f64> {
        if k == 0 {
            return domain("box index k must be >= 1");
        }
        Ok(self.p(k))
    }

    #[inline]
    pub(crate) fn p(&self, k: u64) -> f64 {
        self.inner.c * (k as f64).powf(-self.inner.exponent)
    }

    /// `p_1 .. p_{max_terms}`, built on first use.
    pub fn table(&self) -> &[f64] {
        self.inner.table.get_or_init(|| (1..=self.inner.max_terms as u64).map(|k| self.p(k)).collect())
    }

    /// `sum_{k > k0} p_k`, exact up to rounding.
    pub fn tail_mass(&self, k0: u64) -> f64 {
        self.inner.c * hurwitz_zeta(self.inner.exponent, k0 as f64 + 1.0)
    }

    /// `sum_{k > k0} p_k^j`.
    pub fn tail_power_sum(&self, k0: u64, j: u32) -> f64 {
        self.inner.c.powi(j as i32) * hurwitz_zeta(j as f64 * self.inner.exponent, k0 as f64 + 1.0)
    }

    /// Analytic upper bound `c alpha/(1-alpha) K^{-(1-alpha)/alpha}` on `sum_{k>K} p_k`.
    pub fn tail_bound(&self, k0: u64) -> f64 {
        let a = self.inner.alpha;
        self.inner.c * a / (1.0 - a) * (k0 as f64).powf(-(1.0 - a) / a)
    }

    /// Number of boxes with `p_j >= 1/t`.
    pub fn nu_count(&self, t: f64) -> u64 {
        if !(t > 0.0) {
            return 0;
        }
        let guess = (self.inner.c * t).powf(self.inner.alpha).floor();
        if guess < 1.0 {
            return if self.p(1) >= 1.0 / t { 1 } else { 0 };
        }
        // settle rounding at the boundary against the defining inequality
        let mut j = guess as u64;
        while j > 0 && self.p(j) < 1.0 / t {
            j -= 1;
        }
        while self.p(j + 1) >= 1.0 / t {
            j += 1;
        }
        j
    }

    /// `V(t) = sum_k (1 - exp(-p_k t))`.
    pub fn big_v(&self, t: f64) -> f64 {
        if !(t > 0.0) {
            return 0.0;
        }
        deterministic_sum(self, Clock::Continuous(t), Centering::Occupancy)
    }

    /// `sigma_n^2 = nu(n)`; zero when `n < 1/p_1`.
    pub fn sigma2(&self, n: f64) -> f64 {
        self.nu_count(n) as f64
    }

    pub fn gamma_one_minus_alpha(&self) -> f64 {
        gamma(1.0 - self.inner.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ws(alpha: f64) -> WeightSequence {
        make_weights(alpha, DEFAULT_TAIL_TOL).unwrap()
    }

    // Independent oracle: compensated direct sum of k^{-s} for k <= n plus
    // the midpoint-rule tail integral from n + 1/2 with its first correction.
    fn zeta_oracle(s: f64, n: u64) -> f64 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for k in (1..=n).rev() {
            let y = (k as f64).powf(-s) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        let x = n as f64 + 0.5;
        sum + x.powf(1.0 - s) / (s - 1.0) - s / 24.0 * x.powf(-s - 1.0)
    }

    #[test]
    fn normalization_constant_alpha_half() {
        let w = ws(0.5);
        assert_relative_eq!(w.c(), 6.0 / (PI * PI), max_relative = 1e-13);
        assert_relative_eq!(w.c(), 0.607_927_1, max_relative = 1e-7);
        // oracle with 10^8 terms for the frozen constant
        let oracle = 1.0 / zeta_oracle(2.0, 100_000_000);
        assert_relative_eq!(w.c(), oracle, max_relative = 1e-12);
    }

    #[test]
    fn normalization_constant_matches_oracle() {
        for alpha in [0.1, 0.25, 0.75, 0.9, 0.999] {
            let w = ws(alpha);
            let oracle = 1.0 / zeta_oracle(1.0 / alpha, 2_000_000);
            assert_relative_eq!(w.c(), oracle, max_relative = 1e-12);
        }
    }

    #[test]
    fn weights_examples() {
        let w = ws(0.5);
        assert_relative_eq!(w.weight(2).unwrap(), 0.151_981_8, max_relative = 1e-6);
        assert_relative_eq!(w.weight(1).unwrap(), 0.607_927_1, max_relative = 1e-7);
        assert_relative_eq!(w.weight(100).unwrap(), 6.079_271e-5, max_relative = 1e-6);
        assert!(matches!(w.weight(0), Err(crate::KarlinError::Domain(_))));
    }

    #[test]
    fn weights_monotone() {
        let w = ws(0.5);
        let t = w.table();
        assert!(t.windows(2).take(1_000_000).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_weights(0.0, 1e-9).is_err());
        assert!(make_weights(1.0, 1e-9).is_err());
        assert!(make_weights(1.5, 1e-9).is_err());
        assert!(make_weights(0.5, 0.0).is_err());
        assert!(make_weights(0.5, -1.0).is_err());
        assert!(gamma_one_minus_alpha(1.0).is_err());
    }

    #[test]
    fn near_one_alpha_is_normalized() {
        let w = ws(0.999);
        let k = 1_000_000u64;
        let mut head = 0.0;
        for j in (1..=k).rev() {
            head += w.p(j);
        }
        assert!((head + w.tail_mass(k) - 1.0).abs() <= 2.0 * w.tail_tol());
        assert!(w.p(k) > w.p(k + 1));
    }

    #[test]
    fn normalization_with_tail() {
        for alpha in [0.25, 0.5, 0.75] {
            let w = ws(alpha);
            let k = 100_000u64;
            let mut head = 0.0;
            for j in (1..=k).rev() {
                head += w.p(j);
            }
            assert!((head + w.tail_mass(k) - 1.0).abs() <= 2.0 * w.tail_tol());
            assert!(w.tail_mass(k) <= w.tail_bound(k));
        }
    }

    #[test]
    fn nu_examples() {
        let w = ws(0.5);
        assert_eq!(w.nu_count(1.0), 0);
        assert_eq!(w.nu_count(100.0), 7);
        assert_eq!(w.nu_count(0.0), 0);
        assert_eq!(ws(0.3).nu_count(0.0), 0);
        // enumeration oracle
        let count = |t: f64| (1..=10_000u64).filter(|&j| w.p(j) >= 1.0 / t).count() as u64;
        for t in [1.0, 1.6, 1.7, 2.5, 10.0, 100.0, 1234.5, 1e6] {
            assert_eq!(w.nu_count(t), count(t), "t = {t}");
        }
    }

    #[test]
    fn sigma2_examples() {
        let w = ws(0.5);
        assert_eq!(w.sigma2(100.0), 7.0);
        assert_eq!(w.sigma2(1.0), 0.0);
        let mut prev = 0.0;
        for n in 1..5000 {
            let s = w.sigma2(n as f64);
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn gamma_examples() {
        assert_relative_eq!(gamma_one_minus_alpha(0.5).unwrap(), 1.772_453_850_905_516, max_relative = 1e-13);
        assert_relative_eq!(gamma_one_minus_alpha(0.25).unwrap(), 1.225_416_7, max_relative = 1e-7);
        assert_relative_eq!(gamma_one_minus_alpha(1e-9).unwrap(), 1.0, max_relative = 1e-8);
    }

    // Direct summation oracle for V with the analytic tail bound.
    fn v_direct(w: &WeightSequence, t: f64, terms: u64) -> (f64, f64) {
        let mut sum = 0.0;
        for k in (1..=terms).rev() {
            sum += -(-w.p(k) * t).exp_m1();
        }
        (sum, t * w.tail_bound(terms))
    }

    #[test]
    fn big_v_matches_direct_summation() {
        for &(alpha, t) in &[(0.25, 1e3), (0.25, 37.0), (0.5, 10.0), (0.5, 1e3), (0.75, 5.0), (0.1, 1e5)] {
            let w = ws(alpha);
            let (direct, bound) = v_direct(&w, t, 4_000_000);
            let v = w.big_v(t);
            assert!((v - direct).abs() <= bound + 1e-9, "alpha={alpha} t={t}: {v} vs {direct} (bound {bound})");
        }
        assert_eq!(ws(0.5).big_v(0.0), 0.0);
    }

    #[test]
    fn big_v_asymptotic_example() {
        let w = ws(0.5);
        let (direct, bound) = v_direct(&w, 1e6, 100_000_000);
        let v = w.big_v(1e6);
        assert!((v - direct).abs() <= bound + 1e-6);
        let reference = PI.sqrt() * (0.607_927_1f64 * 1e6).sqrt().floor();
        assert!((v / reference - 1.0).abs() < 0.02, "{v} vs {reference}");
    }

    #[test]
    fn big_v_ratio_near_gamma() {
        for alpha in [0.25, 0.5, 0.75] {
            let w = ws(alpha);
            let ratio = w.big_v(1e6) / w.nu_count(1e6) as f64;
            assert!((ratio / w.gamma_one_minus_alpha() - 1.0).abs() < 0.05, "alpha {alpha}: {ratio}");
        }
    }

    #[test]
    fn closed_form_nu_on_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for alpha in [0.25, 0.5, 0.75] {
            let w = ws(alpha);
            let lo = (1.0 / w.p(1)).ln();
            let hi = 1e8f64.ln();
            for _ in 0..1000 {
                let t = (lo + (hi - lo) * rng.random::<f64>()).exp();
                assert_eq!(w.nu_count(t), (w.c() * t).powf(alpha).floor() as u64);
            }
        }
    }

    proptest! {
        #[test]
        fn v_subadditive(s in 0.0f64..1e5, t in 0.0f64..1e5, alpha in 0.1f64..0.9) {
            let w = ws(alpha);
            prop_assert!(w.big_v(s) + w.big_v(t) >= w.big_v(s + t) - 1e-9);
        }

        #[test]
        fn v_concave(s in 0.0f64..1e5, d in 0.0f64..1e5, alpha in 0.1f64..0.9) {
            let w = ws(alpha);
            let t = s + d;
            prop_assert!(w.big_v(0.5 * (s + t)) >= 0.5 * (w.big_v(s) + w.big_v(t)) - w.tail_tol());
        }
    }
}
