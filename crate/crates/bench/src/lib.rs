//! Shared fixtures for the criterion benches.

use digitfrac::{random, PointDigits, ProductSet, PsiSpec, WeightVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn cantor_square() -> ProductSet {
    ProductSet::uniform(3, &[0, 2], 2).expect("valid set")
}

pub fn cantor_weights() -> WeightVector {
    WeightVector::new(vec![0.0, 1.0]).expect("valid weights")
}

pub fn harmonic() -> PsiSpec {
    PsiSpec::Power { c: 1.0 }
}

pub fn origin(ps: &ProductSet) -> PointDigits {
    PointDigits::canonical(ps)
}

/// Seeded random `(set, weights)` pairs with `d <= 4`, `b <= 10`, `t <= 5`.
pub fn instances(count: usize, seed: u64) -> Vec<(ProductSet, WeightVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let ps = random::product_set(&mut rng, 4, 10);
            let t = random::weights(&mut rng, ps.dim(), 5.0);
            (ps, t)
        })
        .collect()
}
