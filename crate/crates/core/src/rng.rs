//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 keystream: the 64-bit seed is expanded into the
//! cipher key and the stream id selects the ChaCha nonce, so distinct stream
//! ids index disjoint keystreams of the same key. Trials can therefore run in
//! any order on any number of threads and still see the same draws.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { seed, stream_id, inner }
    }

    /// Stream for trial `trial` of sweep cell `cell`. The cell index is
    /// folded into the key, the trial index is the stream id.
    pub fn for_trial(seed: u64, cell: u64, trial: u64) -> Self {
        Self::new(mix(seed, cell), trial)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

/// SplitMix64 finaliser applied to `a ^ splitmix(b)`.
pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_stream_is_bitwise_reproducible() {
        let a: Vec<u64> = (0..64).map({
            let mut r = RngStream::new(42, 7);
            move |_| r.next_u64()
        }).collect();
        let mut r = RngStream::new(42, 7);
        let b: Vec<u64> = (0..64).map(|_| r.next_u64()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RngStream::new(42, 0);
        let mut b = RngStream::new(42, 1);
        let xa: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        assert_ne!(xa, xb);
    }

    #[test]
    fn neighbouring_streams_are_uncorrelated() {
        // Pearson correlation of paired uniforms from streams 0 and 1.
        let n = 200_000;
        let mut a = RngStream::new(3, 0);
        let mut b = RngStream::new(3, 1);
        let (mut sa, mut sb, mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let x: f64 = a.gen();
            let y: f64 = b.gen();
            sa += x;
            sb += y;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        let nf = n as f64;
        let cov = sab / nf - sa / nf * sb / nf;
        let corr = cov / ((saa / nf - (sa / nf).powi(2)) * (sbb / nf - (sb / nf).powi(2))).sqrt();
        // 4 standard errors of a null correlation.
        assert!(corr.abs() < 4.0 / nf.sqrt(), "corr = {corr}");
    }

    #[test]
    fn trial_streams_depend_on_cell() {
        let mut a = RngStream::for_trial(1, 0, 5);
        let mut b = RngStream::for_trial(1, 1, 5);
        assert_ne!(a.next_u64(), b.next_u64());
    }
}
