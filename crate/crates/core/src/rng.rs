//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream addressed by
//! `(master seed, replica index, tag)`. The key is derived from the master
//! seed alone and the 64-bit stream id packs the replica index with a small
//! tag, so replica `r` sees the same numbers whether it runs first, last, or
//! on another worker.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Purpose of a stream within one replica.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StreamTag {
    /// Steps of walk `j` (0-based, j < 64).
    Walk(u8),
    /// Exponential holding weights attached to walk `j`.
    Weight(u8),
    /// Symmetric sign weights attached to walk `j`.
    Sign(u8),
    /// Poisson clock.
    Clock,
}

impl StreamTag {
    fn code(self) -> u64 {
        match self {
            StreamTag::Walk(j) => u64::from(j & 63),
            StreamTag::Weight(j) => 64 + u64::from(j & 63),
            StreamTag::Sign(j) => 128 + u64::from(j & 63),
            StreamTag::Clock => 192,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Factory for per-replica streams derived from one master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedStreams {
    master: u64,
    key: [u8; 32],
}

impl SeedStreams {
    pub fn new(master: u64) -> Self {
        let mut state = master;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self { master, key }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Independent stream for `(replica, tag)`.
    pub fn stream(&self, replica: u64, tag: StreamTag) -> ChaCha8Rng {
        debug_assert!(replica < (1 << 56), "replica index out of range");
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream((replica << 8) | tag.code());
        rng
    }
}

/// Unit-mean exponential by inverse CDF.
#[inline]
pub fn exponential<R: RngCore>(rng: &mut R) -> f64 {
    // u in (0, 1]: never takes the log of zero.
    let u = 1.0 - rng.random::<f64>();
    -u.ln()
}

/// Symmetric ±1 coin.
#[inline]
pub fn sign<R: RngCore>(rng: &mut R) -> i64 {
    if rng.next_u32() & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Buffered source of `bits`-wide uniform integers cut from 64-bit words.
pub struct BitSource<R> {
    rng: R,
    word: u64,
    left: u32,
}

impl<R: RngCore> BitSource<R> {
    pub fn new(rng: R) -> Self {
        Self { rng, word: 0, left: 0 }
    }

    /// Uniform integer in `0..2^bits` for `bits <= 32`.
    #[inline]
    pub fn take(&mut self, bits: u32) -> u64 {
        debug_assert!(bits > 0 && bits <= 32);
        if self.left < bits {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let v = self.word & ((1u64 << bits) - 1);
        self.word >>= bits;
        self.left -= bits;
        v
    }

    pub fn inner_mut(&mut self) -> &mut R {
        &mut self.rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = SeedStreams::new(7);
        let a: Vec<u64> = (0..4).map(|_| s.stream(3, StreamTag::Walk(0)).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let b = s.stream(3, StreamTag::Walk(1)).next_u64();
        let c = s.stream(4, StreamTag::Walk(0)).next_u64();
        let d = SeedStreams::new(8).stream(3, StreamTag::Walk(0)).next_u64();
        assert_ne!(a[0], b);
        assert_ne!(a[0], c);
        assert_ne!(a[0], d);
    }

    #[test]
    fn exponential_mean_is_one() {
        let mut rng = SeedStreams::new(1).stream(0, StreamTag::Weight(0));
        let n = 200_000;
        let mean = (0..n).map(|_| exponential(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn bit_source_is_uniform() {
        let mut src = BitSource::new(SeedStreams::new(2).stream(0, StreamTag::Walk(0)));
        let mut counts = [0u32; 4];
        for _ in 0..40_000 {
            counts[src.take(2) as usize] += 1;
        }
        for c in counts {
            assert!((f64::from(c) - 10_000.0).abs() < 400.0, "{counts:?}");
        }
    }
}
