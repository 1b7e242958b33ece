//! Seeded random streams.
//!
//! Every run derives its generators from a single master seed. Separate
//! purposes (row subsampling, Langevin noise, split-score noise) read from
//! separate ChaCha streams, so switching one source of randomness on or off
//! never shifts the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream identifiers for [`stream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Subsample = 1,
    Langevin = 2,
    Selection = 3,
    Synthetic = 4,
    Diagnostics = 5,
}

pub fn stream(seed: u64, which: Stream) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4)
            .map(|_| stream(9, Stream::Langevin).random())
            .collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut s1 = stream(9, Stream::Langevin);
        let mut s2 = stream(9, Stream::Selection);
        let x: [u64; 4] = s1.random();
        let y: [u64; 4] = s2.random();
        assert_ne!(x, y);
    }
}
