//! Seeded randomness with replayable draw indices.
//!
//! Each trial gets its own ChaCha20 stream derived from a global seed and the
//! trial counter, so runs replay bit for bit regardless of scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bits::Bits;

pub struct TrialRng {
    inner: ChaCha20Rng,
    draws: u64,
    trail: Vec<u64>,
}

impl TrialRng {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(trial);
        TrialRng { inner, draws: 0, trail: Vec::new() }
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Draw indices at which sampled measurement outcomes were taken.
    pub fn trail(&self) -> &[u64] {
        &self.trail
    }

    pub fn take_trail(&mut self) -> Vec<u64> {
        std::mem::take(&mut self.trail)
    }

    pub fn unit(&mut self) -> f64 {
        self.draws += 1;
        self.inner.random::<f64>()
    }

    pub fn coin(&mut self) -> bool {
        self.draws += 1;
        self.inner.random::<bool>()
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.draws += 1;
        self.inner.random_range(0..n)
    }

    pub fn bits(&mut self, len: usize) -> Bits {
        self.draws += 1;
        Bits::random(len, &mut self.inner)
    }

    pub fn bytes<const N: usize>(&mut self) -> [u8; N] {
        self.draws += 1;
        let mut out = [0u8; N];
        self.inner.fill_bytes(&mut out);
        out
    }

    /// Picks an index with probability proportional to `weights`, logging the draw.
    pub fn pick_weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        self.trail.push(self.draws);
        let r = self.unit() * total;
        let mut acc = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if r < acc {
                return i;
            }
        }
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    pub fn inner(&mut self) -> &mut ChaCha20Rng {
        self.draws += 1;
        &mut self.inner
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_replay_and_separate() {
        let mut a = TrialRng::new(7, 3);
        let mut b = TrialRng::new(7, 3);
        let mut c = TrialRng::new(7, 4);
        let xa: Vec<u64> = (0..8).map(|_| a.below(1 << 40)).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.below(1 << 40)).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.below(1 << 40)).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_eq!(a.draws(), 8);
    }

    #[test]
    fn weighted_pick_skips_zero_weights() {
        let mut r = TrialRng::new(1, 0);
        for _ in 0..200 {
            let i = r.pick_weighted(&[0.0, 0.3, 0.0, 0.7]);
            assert!(i == 1 || i == 3);
        }
        assert_eq!(r.trail().len(), 200);
    }
}
