//! Seeded generators for random instances.

use rand::seq::index::sample;
use rand::Rng;

use crate::dims::WeightVector;
use crate::set::{DigitSet, ProductSet};

/// Random product set with `1 <= d <= max_d` and `3 <= b <= max_base`.
pub fn product_set(rng: &mut impl Rng, max_d: usize, max_base: u32) -> ProductSet {
    let b = rng.gen_range(3..=max_base);
    let d = rng.gen_range(1..=max_d);
    let coords = (0..d).map(|_| digit_set(rng, b)).collect();
    ProductSet::new(coords).expect("coordinates share a base")
}

/// Random proper digit set in base `b` with at least two digits.
pub fn digit_set(rng: &mut impl Rng, b: u32) -> DigitSet {
    let count = rng.gen_range(2..b as usize);
    let digits: Vec<u32> = sample(rng, b as usize, count).into_iter().map(|i| i as u32).collect();
    DigitSet::new(b, digits).expect("valid digit set")
}

/// Weights uniform in `[0, max_t]`, with a repeated value a quarter of the
/// time so that ties get exercised.
pub fn weights(rng: &mut impl Rng, d: usize, max_t: f64) -> WeightVector {
    let mut t: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..=max_t)).collect();
    if d > 1 && rng.gen_bool(0.25) {
        let (i, j) = (rng.gen_range(0..d), rng.gen_range(0..d));
        t[i] = t[j];
    }
    if rng.gen_bool(0.1) {
        let i = rng.gen_range(0..d);
        t[i] = 0.0;
    }
    WeightVector::new(t).expect("nonnegative weights")
}
