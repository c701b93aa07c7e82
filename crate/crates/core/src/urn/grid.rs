use serde::{Deserialize, Serialize};

use crate::error::{KarlinError, Result};

/// Time grid `0 = t_0 < t_1 < ... < t_m <= 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathGrid {
    times: Vec<f64>,
}

/// Largest ball count representable exactly as f64 and addressable by box counters.
pub const MAX_BALLS: u64 = u32::MAX as u64;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(KarlinError::InvalidGrid(msg.into()))
}

impl PathGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return invalid("grid needs t_0 = 0 and at least one positive time");
        }
        if times[0] != 0.0 {
            return invalid(format!("grid must start at 0, got {}", times[0]));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return invalid("grid times must be finite");
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("grid times must be strictly increasing");
        }
        if *times.last().unwrap() > 1.0 {
            return invalid("grid times must not exceed 1");
        }
        Ok(PathGrid { times })
    }

    /// `m + 1` equally spaced points on `[0, 1]`.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return invalid("uniform grid needs at least one step");
        }
        let mut times: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
        times[m] = 1.0;
        PathGrid::new(times)
    }

    /// Parse `start:end:step` with inclusive endpoints.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return invalid(format!("expected start:end:step, got '{spec}'"));
        }
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.trim().parse().map_err(|_| KarlinError::InvalidGrid(format!("not a number: '{s}'")))?;
            if !v.is_finite() {
                return invalid(format!("not a finite number: '{s}'"));
            }
            Ok(v)
        };
        let (start, end, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if step <= 0.0 {
            return invalid("step must be positive");
        }
        if end <= start {
            return invalid("end must exceed start");
        }
        let steps = ((end - start) / step).round();
        if steps < 1.0 || (start + steps * step - end).abs() > 1e-9 * end.abs().max(1.0) {
            return invalid(format!("step {step} does not divide [{start}, {end}]"));
        }
        if steps > 1e6 {
            return invalid("too many grid points");
        }
        let steps = steps as usize;
        let mut times: Vec<f64> = (0..=steps).map(|i| start + i as f64 * step).collect();
        times[steps] = end;
        PathGrid::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Ball counts `floor(n t_j)`; products within `1e-9` relative of an integer snap to it.
    pub fn counts(&self, n: u64) -> Result<Vec<u64>> {
        let last = n as f64 * self.times.last().copied().unwrap_or(0.0);
        if last > MAX_BALLS as f64 {
            return Err(KarlinError::Overflow(format!("n * t_m = {last} exceeds the box counter limit {MAX_BALLS}")));
        }
        Ok(self.times.iter().map(|&t| floor_count(n as f64 * t)).collect())
    }
}

pub(crate) fn floor_count(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as u64
    } else {
        x.floor() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_inclusive() {
        let g = PathGrid::parse("0:1:0.1").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.times()[10], 1.0);
        let g = PathGrid::parse("0:1:0.01").unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g.counts(100).unwrap(), (0..=100).collect::<Vec<u64>>());
    }

    #[test]
    fn parse_rejects_bad_specs() {
        for bad in ["0:1", "0:1:0", "0:1:-0.1", "0.1:1:0.1", "0:1:0.3", "0:2:0.5", "a:1:0.1", "0:1:nan", "1:0:0.1"] {
            assert!(PathGrid::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn new_validates() {
        assert!(PathGrid::new(vec![0.0]).is_err());
        assert!(PathGrid::new(vec![0.1, 0.5]).is_err());
        assert!(PathGrid::new(vec![0.0, 0.5, 0.5]).is_err());
        assert!(PathGrid::new(vec![0.0, 0.5, 1.5]).is_err());
        assert!(PathGrid::new(vec![0.0, 0.25, 0.9]).is_ok());
    }

    #[test]
    fn counts_floor_and_snap() {
        let g = PathGrid::new(vec![0.0, 0.29, 1.0 / 3.0, 1.0]).unwrap();
        assert_eq!(g.counts(100).unwrap(), vec![0, 29, 33, 100]);
        assert_eq!(g.counts(1).unwrap(), vec![0, 0, 0, 1]);
        assert!(matches!(g.counts(u64::MAX), Err(KarlinError::Overflow(_))));
    }
}
