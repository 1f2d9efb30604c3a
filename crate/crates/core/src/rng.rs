//! Counter-based splittable random streams.
//!
//! A [`Stream`] is a pair `(key, counter)`; draw `n` of a stream is the
//! SplitMix64 mix of `key + (n+1) * GOLDEN`, so every draw is a pure
//! function of `(key, n)`. Sub-streams are derived by mixing a label into
//! the key, which makes world generation, lazy item typing, and every
//! algorithm run independent and replayable regardless of evaluation
//! order or thread scheduling.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combine a parent key with a label into a child key.
fn derive(key: u64, label: u64) -> u64 {
    mix(key ^ mix(label.wrapping_mul(GOLDEN) ^ 0xA5A5_A5A5_A5A5_A5A5))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream {
            key: mix(seed ^ 0x6A09_E667_F3BC_C908),
            counter: 0,
        }
    }

    /// Child stream for `label`, starting at counter 0.
    pub fn substream(&self, label: u64) -> Stream {
        Stream {
            key: derive(self.key, label),
            counter: 0,
        }
    }

    /// The key a substream would get; lets callers evaluate draws keyed by
    /// an id without holding a stream (used for lazy item typing).
    pub fn substream_key(&self, label: u64) -> u64 {
        derive(self.key, label)
    }

    /// Stream from a raw key (counterpart of [`Stream::substream_key`]).
    pub fn from_key(key: u64) -> Stream {
        Stream { key, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw from `[0, n)`, unbiased via rejection.
    pub fn uniform(&mut self, n: u64) -> u64 {
        assert!(n > 0, "uniform range must be nonempty");
        let zone = (u64::MAX / n) * n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    /// Uniform sign in `{-1, +1}`.
    pub fn sign(&mut self) -> i8 {
        if self.next_u64() & 1 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn uniform_f64(&mut self) -> f64 {
        // 53 random bits into [0, 1).
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        let n = slice.len();
        for i in (1..n).rev() {
            let j = self.uniform(i as u64 + 1) as usize;
            slice.swap(i, j);
        }
    }
}
