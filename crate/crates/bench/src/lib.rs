//! Shared fixtures for the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tlmbreak_core::{encrypt, RgbImage, SecretKey};

/// A key usable at `side x side` and `n` random plain/cipher pairs under it.
pub fn fixture(side: usize, n: usize, seed: u64) -> (SecretKey, Vec<(RgbImage, RgbImage)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = SecretKey::random_for(side, side, &mut rng).expect("side is not a multiple of 31");
    let pairs = (0..n)
        .map(|_| {
            let p = RgbImage::random(side, side, &mut rng).unwrap();
            let c = encrypt(&p, &key).unwrap();
            (p, c)
        })
        .collect();
    (key, pairs)
}
