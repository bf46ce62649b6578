//! Counter-based random substreams.
//!
//! Every consumer of randomness derives its generator from a `(seed, key, counter)`
//! triple instead of sharing one sequential generator. ChaCha gives us this for
//! free: the seed selects the key, `key` selects the 64-bit stream, and `counter`
//! positions the block counter. Draw order between substreams therefore never
//! matters, which is what keeps parallel fitness evaluation bit-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Words reserved per counter window (2^40 is far beyond any single step's needs).
const WINDOW_BITS: u32 = 40;

pub fn substream(seed: u64, key: u64, counter: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    rng.set_word_pos(u128::from(counter) << WINDOW_BITS);
    rng
}

/// Stream keys for consumers that are not search agents.
pub(crate) mod keys {
    pub const SPLIT: u64 = 1 << 62;
    pub const FOLDS: u64 = SPLIT + 1;
    pub const SYNTHETIC: u64 = SPLIT + 2;
    pub const NETWORK_INIT: u64 = SPLIT + 3;
    pub const SHUFFLE: u64 = SPLIT + 4;
}

/// Standard normal draw via Box-Muller.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // gen::<f64>() is in [0, 1); flip it so the log argument is never zero.
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Fisher-Yates shuffle, kept local so results do not depend on `rand`'s
/// slice-shuffle implementation details.
pub fn shuffle<T, R: Rng + ?Sized>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| substream(1, 3, 7).gen()).collect();
        let b: Vec<u64> = (0..4).map(|_| substream(1, 3, 7).gen()).collect();
        assert_eq!(a, b);
        let x: u64 = substream(1, 3, 7).gen();
        let y: u64 = substream(1, 4, 7).gen();
        let z: u64 = substream(1, 3, 8).gen();
        let w: u64 = substream(2, 3, 7).gen();
        assert!(x != y && x != z && x != w);
    }

    #[test]
    fn normal_moments() {
        let mut rng = substream(9, 0, 0);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
