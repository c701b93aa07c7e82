use rustc_hash::FxHashMap;

use super::sampler::TABLE_LABELS;

/// Ball counts per occupied box.
///
/// Labels up to the sampler table size live in a dense array; rarer labels
/// go to a hash map. Clearing only touches boxes that were hit.
#[derive(Clone, Debug)]
pub struct BoxState {
    dense: Vec<u32>,
    touched: Vec<u32>,
    sparse: FxHashMap<u64, u32>,
    balls: u64,
}

impl Default for BoxState {
    fn default() -> Self {
        Self::new()
    }
}

impl BoxState {
    pub fn new() -> Self {
        BoxState { dense: vec![0; TABLE_LABELS + 1], touched: Vec::new(), sparse: FxHashMap::default(), balls: 0 }
    }

    /// Add a ball to box `k` and return the count before it.
    #[inline]
    pub fn increment(&mut self, k: u64) -> u32 {
        self.balls += 1;
        if (k as usize) < self.dense.len() {
            let slot = &mut self.dense[k as usize];
            let prev = *slot;
            if prev == 0 {
                self.touched.push(k as u32);
            }
            *slot = prev + 1;
            prev
        } else {
            let slot = self.sparse.entry(k).or_insert(0);
            let prev = *slot;
            *slot = prev + 1;
            prev
        }
    }

    pub fn count(&self, k: u64) -> u32 {
        if (k as usize) < self.dense.len() {
            self.dense[k as usize]
        } else {
            self.sparse.get(&k).copied().unwrap_or(0)
        }
    }

    pub fn balls(&self) -> u64 {
        self.balls
    }

    pub fn occupied(&self) -> usize {
        self.touched.len() + self.sparse.len()
    }

    /// Occupied boxes and their counts, in no particular order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.touched
            .iter()
            .map(|&k| (k as u64, self.dense[k as usize]))
            .chain(self.sparse.iter().map(|(&k, &c)| (k, c)))
    }

    pub fn clear(&mut self) {
        for &k in &self.touched {
            self.dense[k as usize] = 0;
        }
        self.touched.clear();
        self.sparse.clear();
        self.balls = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_clear() {
        let mut b = BoxState::new();
        let big = 1u64 << 40;
        assert_eq!(b.increment(3), 0);
        assert_eq!(b.increment(3), 1);
        assert_eq!(b.increment(big), 0);
        assert_eq!(b.increment(big), 1);
        assert_eq!(b.count(3), 2);
        assert_eq!(b.count(big), 2);
        assert_eq!(b.occupied(), 2);
        assert_eq!(b.balls(), 4);
        let total: u64 = b.iter().map(|(_, c)| c as u64).sum();
        assert_eq!(total, 4);
        b.clear();
        assert_eq!(b.count(3), 0);
        assert_eq!(b.occupied(), 0);
        assert_eq!(b.iter().count(), 0);
    }
}
