//! Signed sums over boxes of the centering functions `p_k(m)`, `q_k(m)`
//! (discrete clock) and `1 - exp(-p_k t)`, `(1 - exp(-2 p_k t))/2`
//! (Poisson clock).
//!
//! Boxes whose argument `p_k * clock` is large are evaluated exactly. For
//! the remaining boxes every centering function is a power series in `p_k`,
//! so a signed sum collapses to a few moment sums `S_j = sum eps_k p_k^j`
//! that are shared by all clocks. Deterministic sign tails are closed with
//! Hurwitz zeta values; random tails are truncated and their size reported.

use crate::special::{binomial, powu};
use crate::urn::SignSource;
use crate::weights::WeightSequence;

/// Largest power-series argument `p_k * scale` handled by the series part.
const SERIES_ARG: f64 = 0.1;
/// Highest power kept in the series part.
const MAX_POWER: usize = 12;
/// Per-term truncation target for the power series.
const TERM_TOL: f64 = 1e-20;

/// Time argument of a centering function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Clock {
    /// `m` balls thrown.
    Discrete(u64),
    /// Poisson process time `t`.
    Continuous(f64),
}

/// Occupancy (`p`) or odd-occupancy (`q`) centering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Centering {
    Occupancy,
    Odd,
}

impl Clock {
    /// Magnitude of the clock as a real number.
    pub fn scale(&self) -> f64 {
        match *self {
            Clock::Discrete(m) => m as f64,
            Clock::Continuous(t) => t,
        }
    }

    /// Exact centering value for a box of weight `p`.
    pub fn center(&self, p: f64, kind: Centering) -> f64 {
        match (*self, kind) {
            (Clock::Discrete(0), _) => 0.0,
            (Clock::Discrete(m), Centering::Occupancy) => {
                if p >= 1.0 {
                    1.0
                } else {
                    -(m as f64 * (-p).ln_1p()).exp_m1()
                }
            }
            (Clock::Discrete(m), Centering::Odd) => {
                let base = 1.0 - 2.0 * p;
                if base > 0.0 {
                    -0.5 * (m as f64 * (-2.0 * p).ln_1p()).exp_m1()
                } else {
                    0.5 * (1.0 - powu(base, m))
                }
            }
            (Clock::Continuous(t), Centering::Occupancy) => -(-p * t).exp_m1(),
            (Clock::Continuous(t), Centering::Odd) => -0.5 * (-2.0 * p * t).exp_m1(),
        }
    }

    /// Coefficient of `p^j` (`j >= 1`) in the power series of the centering.
    pub fn coefficient(&self, kind: Centering, j: usize) -> f64 {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        let base = match *self {
            Clock::Discrete(m) => binomial(m as f64, j),
            Clock::Continuous(t) => {
                let mut acc = 1.0;
                for i in 1..=j {
                    acc *= t / i as f64;
                }
                acc
            }
        };
        match kind {
            Centering::Occupancy => sign * base,
            Centering::Odd => sign * base * 2f64.powi(j as i32 - 1),
        }
    }
}

/// Number of leading boxes evaluated exactly for a series scale.
fn head_len(ws: &WeightSequence, scale: f64) -> u64 {
    if scale <= 0.0 {
        return 0;
    }
    (ws.c() * scale / SERIES_ARG).powf(ws.alpha()).ceil() as u64
}

/// Truncation index `K` with `scale * sum_{k>K} p_k <= tail_tol`, capped at `max_terms`.
pub fn truncation_cutoff(ws: &WeightSequence, scale: f64) -> u64 {
    let a = ws.alpha();
    let needed = (scale * ws.c() * a / ((1.0 - a) * ws.tail_tol())).powf(a / (1.0 - a)).ceil();
    let budget = ws.max_terms() as u64;
    if needed.is_finite() && needed < budget as f64 {
        (needed as u64).max(1)
    } else {
        budget
    }
}

/// `sum_k center(p_k)` over all boxes with all signs `+1`.
pub fn deterministic_sum(ws: &WeightSequence, clock: Clock, kind: Centering) -> f64 {
    let scale = match kind {
        Centering::Occupancy => clock.scale(),
        Centering::Odd => 2.0 * clock.scale(),
    };
    if scale <= 0.0 {
        return 0.0;
    }
    let head = head_len(ws, scale);
    let mut sum = 0.0;
    for k in (1..=head).rev() {
        sum += clock.center(ws.p(k), kind);
    }
    let mut tail = 0.0;
    for j in (1..=MAX_POWER).rev() {
        tail += clock.coefficient(kind, j) * ws.tail_power_sum(head, j as u32);
    }
    sum + tail
}

/// Sign sums for one sign assignment on every clock of a plan.
#[derive(Clone, Debug, PartialEq)]
pub struct SignSums {
    /// `sum_k eps_k * center_occupancy(p_k, clock_g)`.
    pub occupancy: Vec<f64>,
    /// `sum_k eps_k * center_odd(p_k, clock_g)`.
    pub odd: Vec<f64>,
    /// Worst-case bound on the truncated remainder (0 when the tail is closed analytically).
    pub worst_bound: Vec<f64>,
    /// Root-mean-square size of the truncated remainder under random signs.
    pub rms_bound: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Zone {
    start: u64,
    end: u64,
    powers: usize,
}

/// Precomputed evaluation plan for signed centering sums over a fixed list of clocks.
#[derive(Clone, Debug)]
pub struct SignSumPlan {
    ws: WeightSequence,
    clocks: Vec<Clock>,
    head: u64,
    head_occ: Vec<f64>,
    head_odd: Vec<f64>,
    cutoff: u64,
    zones: Vec<Zone>,
    coef_occ: Vec<[f64; MAX_POWER]>,
    coef_odd: Vec<[f64; MAX_POWER]>,
    all_ones_tail: [f64; MAX_POWER],
    worst: Vec<f64>,
    rms: Vec<f64>,
}

impl SignSumPlan {
    pub fn new(ws: &WeightSequence, clocks: &[Clock]) -> Self {
        let max_clock = clocks.iter().map(|c| c.scale()).fold(0.0, f64::max);
        let scale = 2.0 * max_clock;
        let head = head_len(ws, scale);
        let hlen = head as usize;
        let mut head_occ = vec![0.0; clocks.len() * hlen];
        let mut head_odd = vec![0.0; clocks.len() * hlen];
        for (g, clock) in clocks.iter().enumerate() {
            for k in 1..=head {
                let p = ws.p(k);
                head_occ[g * hlen + (k - 1) as usize] = clock.center(p, Centering::Occupancy);
                head_odd[g * hlen + (k - 1) as usize] = clock.center(p, Centering::Odd);
            }
        }

        let cutoff = truncation_cutoff(ws, max_clock).max(head);

        let zones = Self::zones(ws, scale, head, cutoff);

        let coef = |kind| -> Vec<[f64; MAX_POWER]> {
            clocks
                .iter()
                .map(|c| {
                    let mut row = [0.0; MAX_POWER];
                    for (j, slot) in row.iter_mut().enumerate() {
                        *slot = c.coefficient(kind, j + 1);
                    }
                    row
                })
                .collect()
        };
        let mut all_ones_tail = [0.0; MAX_POWER];
        for (j, slot) in all_ones_tail.iter_mut().enumerate() {
            *slot = ws.tail_power_sum(head, j as u32 + 1);
        }
        let tail1 = ws.tail_mass(cutoff);
        let tail2 = ws.tail_power_sum(cutoff, 2);
        let worst = clocks.iter().map(|c| c.scale() * tail1).collect();
        let rms = clocks.iter().map(|c| c.scale() * tail2.sqrt()).collect();

        SignSumPlan {
            ws: ws.clone(),
            clocks: clocks.to_vec(),
            head,
            head_occ,
            head_odd,
            cutoff,
            zones,
            coef_occ: coef(Centering::Occupancy),
            coef_odd: coef(Centering::Odd),
            all_ones_tail,
            worst,
            rms,
        }
    }

    // Split (head, cutoff] into ranges by the number of series powers needed.
    fn zones(ws: &WeightSequence, scale: f64, head: u64, cutoff: u64) -> Vec<Zone> {
        let mut zones = Vec::new();
        if scale <= 0.0 {
            return zones;
        }
        let mut start = head + 1;
        let mut fact = 1.0;
        let mut bounds = Vec::with_capacity(MAX_POWER);
        for j in 1..=MAX_POWER {
            fact *= (j + 1) as f64;
            // beyond this k, the (j+1)-th power term is below TERM_TOL
            let y = (TERM_TOL * fact).powf(1.0 / (j + 1) as f64);
            let k = (ws.c() * scale / y).powf(ws.alpha()).ceil();
            bounds.push(if k.is_finite() { k as u64 } else { u64::MAX });
        }
        for j in (1..=MAX_POWER).rev() {
            // powers 1..=j suffice for k >= bounds[j-1]; this zone ends where j-1 powers suffice
            let end = if j == 1 { cutoff } else { bounds[j - 2].saturating_sub(1).min(cutoff) };
            if end >= start {
                zones.push(Zone { start, end, powers: j });
                start = end + 1;
            }
        }
        zones
    }

    pub fn clocks(&self) -> &[Clock] {
        &self.clocks
    }

    /// Last box index summed explicitly for random signs.
    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn head_len(&self) -> u64 {
        self.head
    }

    fn accumulate(&self, signs: &SignSource, from: u64, to: u64, moments: &mut [f64; MAX_POWER]) {
        let table = self.ws.table();
        for zone in &self.zones {
            let lo = zone.start.max(from);
            let hi = zone.end.min(to);
            if lo > hi {
                continue;
            }
            let mut acc = [0.0; MAX_POWER];
            let mut block = u64::MAX;
            let mut word = 0u64;
            for k in lo..=hi {
                if k >> 6 != block {
                    block = k >> 6;
                    word = signs.word(block);
                }
                let p = if (k as usize) <= table.len() { table[(k - 1) as usize] } else { self.ws.p(k) };
                let neg = (word >> (k & 63)) & 1;
                let x = f64::from_bits(p.to_bits() ^ (neg << 63));
                let mut term = x;
                acc[0] += term;
                for slot in acc.iter_mut().take(zone.powers).skip(1) {
                    term *= p;
                    *slot += term;
                }
            }
            for (m, a) in moments.iter_mut().zip(acc.iter()) {
                *m += a;
            }
        }
    }

    /// Signed sums for the given signs on every clock.
    pub fn evaluate(&self, signs: &SignSource) -> SignSums {
        let g_len = self.clocks.len();
        let hlen = self.head as usize;
        let head_signs: Vec<f64> = (1..=self.head).map(|k| signs.eval(k) as f64).collect();

        let mut moments = [0.0; MAX_POWER];
        let (worst, rms) = match signs {
            SignSource::AllOnes => {
                moments = self.all_ones_tail;
                (vec![0.0; g_len], vec![0.0; g_len])
            }
            _ => match signs.constant_beyond() {
                Some(len) => {
                    let end = len.max(self.head);
                    self.accumulate(signs, self.head + 1, end, &mut moments);
                    for (j, m) in moments.iter_mut().enumerate() {
                        *m += self.ws.tail_power_sum(end, j as u32 + 1);
                    }
                    (vec![0.0; g_len], vec![0.0; g_len])
                }
                None => {
                    self.accumulate(signs, self.head + 1, self.cutoff, &mut moments);
                    (self.worst.clone(), self.rms.clone())
                }
            },
        };

        let mut occupancy = Vec::with_capacity(g_len);
        let mut odd = Vec::with_capacity(g_len);
        for g in 0..g_len {
            let row_occ = &self.head_occ[g * hlen..(g + 1) * hlen];
            let row_odd = &self.head_odd[g * hlen..(g + 1) * hlen];
            let mut so = 0.0;
            let mut sq = 0.0;
            for i in (0..hlen).rev() {
                so += head_signs[i] * row_occ[i];
                sq += head_signs[i] * row_odd[i];
            }
            for j in (0..MAX_POWER).rev() {
                so += self.coef_occ[g][j] * moments[j];
                sq += self.coef_odd[g][j] * moments[j];
            }
            occupancy.push(so);
            odd.push(sq);
        }
        SignSums { occupancy, odd, worst_bound: worst, rms_bound: rms }
    }
}

/// `sum_k eps_k * center(p_k, clock)` for one clock.
pub fn centered_sign_sum(ws: &WeightSequence, signs: &SignSource, clock: Clock, kind: Centering) -> f64 {
    if clock.scale() <= 0.0 {
        return 0.0;
    }
    let sums = SignSumPlan::new(ws, &[clock]).evaluate(signs);
    match kind {
        Centering::Occupancy => sums.occupancy[0],
        Centering::Odd => sums.odd[0],
    }
}
