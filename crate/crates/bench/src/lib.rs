//! Synthetic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tifair::{Dataset, Matrix};

/// `m` samples of `dim` standard-ish features with balanced groups and labels.
pub fn synthetic_dataset(m: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let protected = (0..m).map(|i| (i % 2) as u8).collect();
    let labels = rows
        .iter()
        .map(|r| u8::from(r[0] + rng.gen_range(-1.0..1.0) > 0.0))
        .collect();
    Dataset::from_parts(Matrix::from_rows(&rows).expect("rectangular"), labels, protected).expect("valid dataset")
}

pub fn raw_scores(m: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect()
}
