//! Closed-form dimension evaluators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::ProductSet;

/// Two values closer than this are treated as the same minimum.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Nonnegative, finite weights `t = (t_1, ..., t_d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some((i, x)) = t.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidWeights(format!("t[{i}] = {x} is not a finite nonnegative number")));
        }
        Ok(WeightVector(t))
    }

    pub fn zeros(d: usize) -> Self {
        WeightVector(vec![0.0; d])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(t: Vec<f64>) -> Result<Self> {
        WeightVector::new(t)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(t: WeightVector) -> Self {
        t.0
    }
}

/// A minimum together with every index attaining it (0-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinAttained {
    pub value: f64,
    pub argmin: Vec<usize>,
}

pub(crate) fn min_with_ties(values: &[f64]) -> MinAttained {
    let value = values.iter().copied().fold(f64::INFINITY, f64::min);
    let argmin = values
        .iter()
        .enumerate()
        .filter(|(_, v)| (*v - value).abs() <= TIE_TOLERANCE * value.abs().max(1.0))
        .map(|(k, _)| k)
        .collect();
    MinAttained { value, argmin }
}

fn check_dims(ps: &ProductSet, t: &WeightVector) -> Result<()> {
    if ps.dim() != t.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for a {}-dimensional set",
            t.len(),
            ps.dim()
        )));
    }
    Ok(())
}

/// The `k`-th candidate `(gamma + sum_{t_j <= t_k} (t_k - t_j) gamma_j) / (1 + t_k)`.
///
/// With `strict` the sum runs over `t_j < t_k`; the two agree since the extra
/// terms are zero.
pub fn weighted_term(gammas: &[f64], t: &[f64], k: usize, strict: bool) -> f64 {
    let gamma: f64 = gammas.iter().sum();
    let tk = t[k];
    let extra: f64 = t
        .iter()
        .zip(gammas)
        .filter(|(&tj, _)| if strict { tj < tk } else { tj <= tk })
        .map(|(&tj, &g)| (tk - tj) * g)
        .sum();
    (gamma + extra) / (1.0 + tk)
}

/// Hausdorff dimension of the weighted approximable set inside `K`.
pub fn weighted_dim(ps: &ProductSet, t: &WeightVector) -> Result<MinAttained> {
    check_dims(ps, t)?;
    let gammas = ps.coordinate_dimensions();
    let terms: Vec<f64> = (0..t.len())
        .map(|k| weighted_term(&gammas, t.as_slice(), k, false))
        .collect();
    Ok(min_with_ties(&terms))
}

/// Dimension of the weighted approximable set in `R^d` for the Lebesgue
/// case, defined when `sum t >= 1`.
pub fn rynne_dim(d: usize, t: &WeightVector) -> Result<f64> {
    if t.len() != d {
        return Err(Error::InvalidWeights(format!("{} weights for d = {d}", t.len())));
    }
    if t.sum() < 1.0 {
        return Err(Error::Precondition(format!("sum of weights is {} < 1", t.sum())));
    }
    let t = t.as_slice();
    Ok(t.iter()
        .map(|&tk| {
            let extra: f64 = t.iter().filter(|&&ti| tk >= ti).map(|&ti| tk - ti).sum();
            (d as f64 + 1.0 + extra) / (tk + 1.0)
        })
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(t: &[f64]) -> WeightVector {
        WeightVector::new(t.to_vec()).unwrap()
    }

    #[test]
    fn zero_weights_give_gamma() {
        let ps = ProductSet::uniform(3, &[0, 2], 3).unwrap();
        let r = weighted_dim(&ps, &WeightVector::zeros(3)).unwrap();
        assert!((r.value - ps.dimension()).abs() < 1e-12);
        assert_eq!(r.argmin, vec![0, 1, 2]);
    }

    #[test]
    fn cantor_square() {
        let ps = ProductSet::uniform(3, &[0, 2], 2).unwrap();
        let r = weighted_dim(&ps, &w(&[0.0, 1.0])).unwrap();
        let oracle = 3.0 * 2f64.ln() / (2.0 * 3f64.ln());
        assert!((r.value - oracle).abs() < 1e-12);
        assert!((r.value - 0.946_394_630_4).abs() < 1e-10);
        assert_eq!(r.argmin, vec![1]);
    }

    #[test]
    fn corner_square() {
        let ps = ProductSet::uniform(4, &[0, 3], 2).unwrap();
        let r = weighted_dim(&ps, &w(&[0.0, 1.0])).unwrap();
        assert!((r.value - 0.75).abs() < 1e-12);
        assert_eq!(r.argmin, vec![1]);
    }

    #[test]
    fn euclidean_examples() {
        assert!((rynne_dim(2, &w(&[0.0, 1.0])).unwrap() - 2.0).abs() < 1e-12);
        assert!((rynne_dim(2, &w(&[1.0, 1.0])).unwrap() - 1.5).abs() < 1e-12);
        assert!((rynne_dim(1, &w(&[1.0])).unwrap() - 1.0).abs() < 1e-12);
        assert!(rynne_dim(2, &w(&[0.2, 0.3])).is_err());
        assert!(rynne_dim(3, &w(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn weights_validated() {
        assert!(WeightVector::new(vec![0.5, -0.1]).is_err());
        assert!(WeightVector::new(vec![f64::NAN]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
        assert!(serde_json::from_str::<WeightVector>("[1.0, -2]").is_err());
        let ps = ProductSet::uniform(3, &[0, 2], 2).unwrap();
        assert!(weighted_dim(&ps, &w(&[1.0])).is_err());
    }

    fn arb_set() -> impl Strategy<Value = ProductSet> {
        (3u32..8, 1usize..4).prop_flat_map(|(b, d)| {
            let coord = proptest::sample::subsequence((0..b).collect::<Vec<_>>(), 2..b as usize);
            proptest::collection::vec(coord, d).prop_map(move |coords| {
                ProductSet::new(
                    coords
                        .into_iter()
                        .map(|c| crate::set::DigitSet::new(b, c).unwrap())
                        .collect(),
                )
                .unwrap()
            })
        })
    }

    fn arb_case() -> impl Strategy<Value = (ProductSet, Vec<f64>)> {
        arb_set().prop_flat_map(|ps| {
            let d = ps.dim();
            (Just(ps), proptest::collection::vec(0.0f64..4.0, d))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn non_increasing_in_each_weight((ps, t) in arb_case(), bumps in proptest::collection::vec(0.0f64..2.0, 3)) {
            let t2: Vec<f64> = t.iter().enumerate().map(|(i, x)| x + bumps[i % bumps.len()]).collect();
            let a = weighted_dim(&ps, &w(&t)).unwrap().value;
            let b = weighted_dim(&ps, &w(&t2)).unwrap().value;
            prop_assert!(b <= a + 1e-12);
        }

        #[test]
        fn bounded_by_gamma((ps, t) in arb_case()) {
            let r = weighted_dim(&ps, &w(&t)).unwrap();
            let gamma = ps.dimension();
            prop_assert!(r.value > 0.0);
            prop_assert!(r.value <= gamma / (1.0 + w(&t).min()) + 1e-12);
            if (r.value - gamma).abs() < 1e-12 {
                prop_assert!(w(&t).min() == 0.0);
            }
        }

        #[test]
        fn permutation_invariant((ps, t) in arb_case(), rot in 0usize..4) {
            let d = ps.dim();
            let perm: Vec<usize> = (0..d).map(|i| (i + rot) % d).collect();
            let coords = perm.iter().map(|&i| ps.coord(i).clone()).collect();
            let ps2 = ProductSet::new(coords).unwrap();
            let t2: Vec<f64> = perm.iter().map(|&i| t[i]).collect();
            let a = weighted_dim(&ps, &w(&t)).unwrap().value;
            let b = weighted_dim(&ps2, &w(&t2)).unwrap().value;
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn strict_and_weak_sums_agree((ps, t) in arb_case(), dup in 0usize..4) {
            // force a repeated weight
            let mut t = t;
            let d = t.len();
            t[d - 1] = t[dup % d];
            let gammas = ps.coordinate_dimensions();
            for k in 0..d {
                prop_assert_eq!(weighted_term(&gammas, &t, k, false), weighted_term(&gammas, &t, k, true));
            }
        }
    }
}
