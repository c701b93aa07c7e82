use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// How box signs `epsilon_k` are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignMode {
    RandomRademacher,
    AllOnes,
    FixedVector,
}

/// Deterministic assignment `k -> epsilon_k in {-1, +1}`.
///
/// Random signs are hashed from `(seed, k)` so any `epsilon_k` can be
/// evaluated lazily. Fixed vectors give `epsilon_1 ..= epsilon_len` and `+1`
/// beyond.
#[derive(Clone, Debug, PartialEq)]
pub enum SignSource {
    Random { seed: u64 },
    AllOnes,
    Fixed(Arc<[i8]>),
}

#[inline]
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SignSource {
    pub fn random(seed: u64) -> Self {
        SignSource::Random { seed }
    }

    /// Signs from a vector of `+1` / `-1` entries for boxes `1..=len`.
    pub fn fixed(signs: &[i8]) -> Self {
        debug_assert!(signs.iter().all(|&s| s == 1 || s == -1));
        SignSource::Fixed(signs.iter().map(|&s| if s < 0 { -1 } else { 1 }).collect())
    }

    pub fn mode(&self) -> SignMode {
        match self {
            SignSource::Random { .. } => SignMode::RandomRademacher,
            SignSource::AllOnes => SignMode::AllOnes,
            SignSource::Fixed(_) => SignMode::FixedVector,
        }
    }

    /// Sign bits for boxes `64*block .. 64*block + 63`; bit `i` set means `epsilon = -1`.
    #[inline]
    pub fn word(&self, block: u64) -> u64 {
        match self {
            SignSource::Random { seed } => splitmix64(splitmix64(*seed) ^ block.wrapping_mul(0xD1B5_4A32_D192_ED03)),
            SignSource::AllOnes => 0,
            SignSource::Fixed(v) => {
                let mut w = 0u64;
                let base = block.saturating_mul(64);
                for i in 0..64u64 {
                    let k = base + i;
                    if k >= 1 && k <= v.len() as u64 && v[(k - 1) as usize] < 0 {
                        w |= 1 << i;
                    }
                }
                w
            }
        }
    }

    /// `epsilon_k` for `k >= 1`.
    #[inline]
    pub fn eval(&self, k: u64) -> i64 {
        match self {
            SignSource::AllOnes => 1,
            SignSource::Fixed(v) => {
                if k >= 1 && k <= v.len() as u64 {
                    v[(k - 1) as usize] as i64
                } else {
                    1
                }
            }
            SignSource::Random { .. } => 1 - 2 * ((self.word(k >> 6) >> (k & 63)) & 1) as i64,
        }
    }

    /// Index past which every sign is `+1`, when such an index exists.
    pub fn constant_beyond(&self) -> Option<u64> {
        match self {
            SignSource::Random { .. } => None,
            SignSource::AllOnes => Some(0),
            SignSource::Fixed(v) => Some(v.len() as u64),
        }
    }
}
