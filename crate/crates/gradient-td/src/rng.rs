//! Counter-based random number generation.
//!
//! Every run owns a generator keyed by `(seed base, run index, stream tag)`.
//! Each output is a pure function of the key and a draw counter, so runs
//! produce identical streams whether executed serially or on a worker pool,
//! and two algorithms given the same key see the same environment stream.

/// Stream tags keep independent purposes from colliding on the same key.
pub mod stream {
    pub const ENV: u64 = 0x01;
    pub const CONTROL: u64 = 0x02;
    pub const DATASET: u64 = 0x03;
    pub const MINIBATCH: u64 = 0x04;
    pub const ANALYSIS: u64 = 0x05;
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Finalizer from splitmix64; full-avalanche mixing of one word.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based generator: output `i` is `mix64(key + i * GOLDEN_GAMMA)`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
    /// Spare gaussian from the last Box-Muller pair.
    cached_normal: Option<f64>,
}

impl CounterRng {
    /// Derive a key by folding all parts through the mixer.
    pub fn keyed(parts: &[u64]) -> Self {
        let mut key: u64 = 0x243f_6a88_85a3_08d3; // pi digits, nothing up the sleeve
        for &p in parts {
            key = mix64(key.wrapping_add(GOLDEN_GAMMA).wrapping_add(p));
        }
        CounterRng {
            key,
            counter: 0,
            cached_normal: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n). Rejection-free Lemire-style reduction is
    /// unnecessary at these ranges; 53-bit uniform scaling is unbiased enough
    /// for n far below 2^32 and keeps draws at one counter tick.
    #[inline]
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        let i = (self.next_f64() * n as f64) as usize;
        i.min(n - 1)
    }

    /// Uniform in [lo, hi).
    #[inline]
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Sample an index from an unnormalized weight vector.
    pub fn next_weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.next_f64() * total;
        for (i, &w) in weights.iter().enumerate() {
            u -= w;
            if u < 0.0 {
                return i;
            }
        }
        weights.len() - 1
    }

    /// Standard normal via Box-Muller.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        // Guard against log(0).
        let u1 = (1.0 - self.next_f64()).max(f64::MIN_POSITIVE);
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.cached_normal = Some(r * theta.sin());
        r * theta.cos()
    }
}
