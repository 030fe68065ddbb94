use std::collections::BTreeSet;

use digitfrac::random;
use digitfrac::{DigitSet, DigitStream, PointDigits, ProductSet, Word};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_set(max_d: usize, max_base: u32) -> impl Strategy<Value = ProductSet> {
    any::<u64>().prop_map(move |seed| random::product_set(&mut ChaCha8Rng::seed_from_u64(seed), max_d, max_base))
}

fn arb_point(ps: &ProductSet) -> impl Strategy<Value = PointDigits> {
    let coords: Vec<_> = ps
        .coords()
        .iter()
        .map(|c| {
            let digits = c.digits().to_vec();
            let pick = proptest::sample::select(digits);
            (
                proptest::collection::vec(pick.clone(), 0..4),
                proptest::collection::vec(pick, 1..3),
            )
                .prop_map(|(prefix, period)| DigitStream { prefix, period })
        })
        .collect();
    coords.prop_map(PointDigits)
}

fn arb_case() -> impl Strategy<Value = (ProductSet, Word, PointDigits)> {
    arb_set(3, 8).prop_flat_map(|ps| {
        let n = ps.count() as usize;
        let word = proptest::collection::vec(0..n, 0..5).prop_map(Word);
        let point = arb_point(&ps);
        (Just(ps), word, point)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn image_lies_in_cylinder_box((ps, w, x) in arb_case()) {
        let image = ps.apply_word(&w, &x).unwrap();
        prop_assert!(ps.cylinder_box(&w).unwrap().contains_point(&image));
        prop_assert!(ps.contains(&image).unwrap());
        let as_digits = ps.apply_word_digits(&w, &x).unwrap();
        prop_assert_eq!(as_digits.value(ps.base()), image);
    }

    #[test]
    fn product_dimension_is_sum_of_coordinates(ps in arb_set(4, 10)) {
        let total: f64 = ps.coordinate_dimensions().iter().sum();
        prop_assert!((ps.dimension() - total).abs() < 1e-12);
    }

    #[test]
    fn cylinder_sides_scale_with_diameter((ps, w, _x) in arb_case()) {
        let bx = ps.cylinder_box(&w).unwrap();
        let scale = BigRational::from_integer(BigInt::from(ps.base()).pow(w.len() as u32));
        for (j, c) in ps.coords().iter().enumerate() {
            prop_assert_eq!(bx.side(j) * &scale, c.diameter());
        }
    }
}

#[test]
fn hundred_random_sets_dimension_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let ps = random::product_set(&mut rng, 4, 10);
        let total: f64 = ps.coordinate_dimensions().iter().sum();
        assert!((ps.dimension() - total).abs() < 1e-12);
    }
}

/// Same-length cylinder boxes never share interior points.
#[test]
fn equal_length_cylinders_have_disjoint_interiors() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut tested = 0;
    while tested < 12 {
        let ps = random::product_set(&mut rng, 3, 7);
        if ps.count() > 16 {
            continue;
        }
        tested += 1;
        for n in 1..=3u32 {
            if ps.count().pow(n) > 1500 {
                break;
            }
            let boxes: Vec<_> = ps.words(n).unwrap().map(|w| ps.cylinder_box(&w).unwrap()).collect();
            for i in 0..boxes.len() {
                for j in i + 1..boxes.len() {
                    assert!(!boxes[i].interiors_meet(&boxes[j]), "{ps:?} n={n} {i} {j}");
                }
            }
        }
    }
}

/// Independent enumeration: `(P + x) / b^n` for every coordinate digit
/// string `P` and corner digit `x` in `{0, 1}`, taken coordinatewise and
/// deduplicated as exact fractions.
fn rational_points_oracle(ps: &ProductSet, n: u32) -> BTreeSet<Vec<BigRational>> {
    let b = ps.base() as u64;
    let scale = b.pow(n);
    let per_coord: Vec<Vec<u64>> = ps
        .coords()
        .iter()
        .map(|c| {
            let mut vals = vec![0u64];
            for _ in 0..n {
                vals = vals.iter().flat_map(|v| c.digits().iter().map(move |&a| v * b + a as u64)).collect();
            }
            vals
        })
        .collect();
    let mut out = BTreeSet::new();
    let mut stack: Vec<Vec<BigRational>> = vec![vec![]];
    for vals in &per_coord {
        let mut next = Vec::new();
        for prefix in &stack {
            for &p in vals {
                for corner in [0u64, 1] {
                    let mut v = prefix.clone();
                    v.push(BigRational::new(BigInt::from(p + corner), BigInt::from(scale)));
                    next.push(v);
                }
            }
        }
        stack = next;
    }
    out.extend(stack);
    out
}

#[test]
fn rational_points_match_enumeration_oracle() {
    let sets = [
        ProductSet::uniform(3, &[0, 2], 1).unwrap(),
        ProductSet::uniform(3, &[0, 2], 2).unwrap(),
        ProductSet::new(vec![DigitSet::new(4, vec![0, 1, 3]).unwrap(), DigitSet::new(4, vec![0, 3]).unwrap()]).unwrap(),
        ProductSet::uniform(5, &[0, 2, 4], 1).unwrap(),
    ];
    for ps in &sets {
        for n in 0..=3 {
            let points = ps.rational_points(n).unwrap();
            let got: BTreeSet<Vec<BigRational>> = points.iter().map(|g| g.values(ps.base())).collect();
            assert_eq!(got.len(), points.len());
            let expected = rational_points_oracle(ps, n);
            assert_eq!(got, expected, "{ps:?} n={n}");
            let bound = 2u64.pow(ps.dim() as u32) * ps.count().pow(n);
            assert!(points.len() as u64 <= bound);
        }
    }
    // the orbits of 0 and 1 overlap, so fewer than 2 N^n points survive
    assert_eq!(sets[0].rational_points(2).unwrap().len(), 8);
    assert_eq!(sets[0].rational_points(1).unwrap().len(), 4);
}
