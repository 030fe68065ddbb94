//! The covering argument for the upper bound, made executable: generation
//! rectangles, the refinement integers `u` and `v`, cover counts and the
//! truncated Hausdorff sums.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::dims::WeightVector;
use crate::error::{Error, Result};
use crate::psi::PsiSpec;
use crate::set::{PointDigits, ProductSet, Word};

/// Tolerance for snapping a base-`b` logarithm onto an integer.
const SNAP: f64 = 1e-12;

/// Scan limit for [`n0`].
pub const N0_SCAN_LIMIT: u32 = 1_000_000;

/// One rectangle of the generation-`n` approximation set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRectangle {
    pub word: Word,
    #[serde(with = "rational_vec")]
    pub center: Vec<BigRational>,
    /// `psi(b^n)^(1 + t_j)` per coordinate.
    pub half_sides: Vec<f64>,
}

mod rational_vec {
    use num_rational::BigRational;
    use serde::{Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        use serde::Deserialize;
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "case")]
pub enum CoverCase {
    /// `t_j >= t_k`: the coordinate needs a single interval.
    Single,
    /// `t_j < t_k`: refine `v` levels below the level-`u` cylinders.
    Refined { u: i64, v: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermMode {
    /// Cover counts replaced by the right end of the chain, a smooth function of `n`.
    Analytic,
    /// Integer cover counts `2 N_j^v`.
    Counted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverBound {
    pub case: CoverCase,
    pub count: u128,
    pub log_count: f64,
    /// `ln 2 (b^(1-u) psi^(-1-t_k))^gamma_j`.
    pub log_middle: Option<f64>,
    /// `ln 2^(1+gamma_j) b^gamma_j psi^((t_j - t_k) gamma_j)`.
    pub log_right: Option<f64>,
}

impl CoverBound {
    /// `count <= middle <= right`, up to rounding in the logarithms.
    pub fn chain_holds(&self) -> bool {
        match (self.log_middle, self.log_right) {
            (Some(mid), Some(right)) => {
                let slack = 1e-9 * right.abs().max(1.0);
                self.log_count <= mid + slack && mid <= right + slack
            }
            _ => self.count == 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperSum {
    pub log_terms: Vec<(u32, f64)>,
    /// Log of each partial sum.
    pub log_partial: Vec<f64>,
    pub log_sum: f64,
    pub last_log_term: f64,
}

impl PsiSpec {
    /// `log_b psi(b^n)`, computed without passing through `ln b` where the
    /// family allows it.
    pub fn log_b_psi(&self, base: u32, n: u32) -> Result<f64> {
        match self {
            PsiSpec::Power { c } => Ok(-c * n as f64),
            PsiSpec::Powerlog { c, e } => {
                if n == 0 {
                    return Err(Error::InvalidPsi("powerlog is undefined at q = 1".into()));
                }
                Ok(-c * n as f64 - e * (n as f64).ln() / (base as f64).ln())
            }
            PsiSpec::Table { .. } => Ok(self.log_psi(base, n)? / (base as f64).ln()),
        }
    }
}

fn floor_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP * x.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

fn check_index(t: &WeightVector, idx: usize, what: &str) -> Result<f64> {
    t.as_slice()
        .get(idx)
        .copied()
        .ok_or_else(|| Error::Precondition(format!("{what} index {idx} out of range for d = {}", t.len())))
}

/// `log_b psi(b^n)`, requiring `0 < psi(b^n) < 1`.
fn small_psi(base: u32, psi: &PsiSpec, n: u32) -> Result<f64> {
    let l = psi.log_b_psi(base, n)?;
    if !(l < 0.0 && l.is_finite()) {
        return Err(Error::Precondition(format!("psi(b^{n}) must lie in (0, 1), log_b psi = {l}")));
    }
    Ok(l)
}

/// Rectangles centred at `g_w(x)` for every word of length `n`, with half-side
/// `psi(b^n)^(1 + t_j)` in coordinate `j`.
pub fn generation_rectangles(
    ps: &ProductSet,
    x: &PointDigits,
    psi: &PsiSpec,
    t: &WeightVector,
    n: u32,
) -> Result<Vec<GenerationRectangle>> {
    psi.validate()?;
    if t.len() != ps.dim() {
        return Err(Error::InvalidWeights(format!("{} weights for d = {}", t.len(), ps.dim())));
    }
    x.validate(ps)?;
    let log_psi = psi.log_psi(ps.base(), n)?;
    let half_sides: Vec<f64> = t.as_slice().iter().map(|tj| ((1.0 + tj) * log_psi).exp()).collect();
    ps.words(n)?
        .map(|w| {
            Ok(GenerationRectangle {
                center: ps.apply_word(&w, x)?,
                half_sides: half_sides.clone(),
                word: w,
            })
        })
        .collect()
}

/// The integer `u` with `b^-u <= 2 psi(b^n)^(1 + t_j) < b^(1-u)`.
pub fn u_of(base: u32, psi: &PsiSpec, t: &WeightVector, n: u32, j: usize) -> Result<i64> {
    let tj = check_index(t, j, "coordinate")?;
    let l = small_psi(base, psi, n)?;
    let log2 = 2f64.ln() / (base as f64).ln();
    Ok(-floor_snapped(log2 + (1.0 + tj) * l) as i64)
}

/// The case split for coordinate `j` against reference index `k`; in the
/// refined case `v` satisfies `b^(-u-v) <= psi(b^n)^(1 + t_k) < b^(1-u-v)`.
pub fn v_of(base: u32, psi: &PsiSpec, t: &WeightVector, n: u32, j: usize, k: usize) -> Result<CoverCase> {
    let tj = check_index(t, j, "coordinate")?;
    let tk = check_index(t, k, "reference")?;
    let l = small_psi(base, psi, n)?;
    if tj >= tk {
        return Ok(CoverCase::Single);
    }
    let u = u_of(base, psi, t, n, j)?;
    let uv = -floor_snapped((1.0 + tk) * l) as i64;
    Ok(CoverCase::Refined { u, v: uv - u })
}

pub fn cover_count_bound(
    ps: &ProductSet,
    psi: &PsiSpec,
    t: &WeightVector,
    n: u32,
    j: usize,
    k: usize,
) -> Result<CoverBound> {
    let case = v_of(ps.base(), psi, t, n, j, k)?;
    let CoverCase::Refined { u, v } = case else {
        return Ok(CoverBound {
            case,
            count: 1,
            log_count: 0.0,
            log_middle: None,
            log_right: None,
        });
    };
    let nj = ps.coord(j).count() as u128;
    let count = u32::try_from(v)
        .ok()
        .and_then(|v| nj.checked_pow(v))
        .and_then(|p| p.checked_mul(2))
        .ok_or_else(|| Error::guard("cover count 2 N_j^v", format!("N_j = {nj}, v = {v}"), u128::MAX))?;
    let ln_b = (ps.base() as f64).ln();
    let gamma_j = ps.coord(j).dimension();
    let log_psi = psi.log_psi(ps.base(), n)?;
    let tk = t.as_slice()[k];
    let ln2 = 2f64.ln();
    Ok(CoverBound {
        case,
        count,
        log_count: ln2 + v as f64 * (nj as f64).ln(),
        log_middle: Some(ln2 + gamma_j * ((1 - u) as f64 * ln_b - (1.0 + tk) * log_psi)),
        log_right: Some(chain_right(ps, t, j, k, log_psi)),
    })
}

/// `ln (2^(1+gamma_j) b^gamma_j psi^((t_j - t_k) gamma_j))` given `ln psi(b^n)`.
fn chain_right(ps: &ProductSet, t: &WeightVector, j: usize, k: usize, log_psi: f64) -> f64 {
    let gamma_j = ps.coord(j).dimension();
    let (tj, tk) = (t.as_slice()[j], t.as_slice()[k]);
    (1.0 + gamma_j) * 2f64.ln() + gamma_j * (ps.base() as f64).ln() + (tj - tk) * gamma_j * log_psi
}

/// Smallest `n` with `psi(b^n) < 1` and `psi(b^n)^(1 + t_k) <= rho`.
pub fn n0(base: u32, psi: &PsiSpec, t: &WeightVector, k: usize, rho: f64) -> Result<u32> {
    let tk = check_index(t, k, "reference")?;
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::Precondition(format!("rho = {rho} must be positive")));
    }
    psi.validate()?;
    let log_rho = rho.ln() / (base as f64).ln();
    let slack = SNAP * log_rho.abs().max(1.0);
    let start = psi.levels(0).first().copied().unwrap_or(1);
    for n in start..start.saturating_add(N0_SCAN_LIMIT) {
        let l = match psi.log_b_psi(base, n) {
            Ok(l) => l,
            Err(_) if matches!(psi, PsiSpec::Table { .. }) => continue,
            Err(e) => return Err(e),
        };
        if l < 0.0 && (1.0 + tk) * l <= log_rho + slack {
            return Ok(n);
        }
    }
    Err(Error::guard("n0 scan", "no admissible n", N0_SCAN_LIMIT))
}

/// `(gamma + sum_{t_j < t_k} (t_k - t_j) gamma_j) / (1 + t_k)`.
pub fn s0_threshold(ps: &ProductSet, t: &WeightVector, k: usize) -> Result<f64> {
    if t.len() != ps.dim() {
        return Err(Error::InvalidWeights(format!("{} weights for d = {}", t.len(), ps.dim())));
    }
    check_index(t, k, "reference")?;
    Ok(crate::dims::weighted_term(&ps.coordinate_dimensions(), t.as_slice(), k, true))
}

/// Log-sum-exp accumulator with Neumaier-compensated scaled sum.
#[derive(Default)]
struct LogSum {
    max: f64,
    sum: f64,
    comp: f64,
    started: bool,
}

impl LogSum {
    fn push(&mut self, x: f64) {
        if !self.started {
            *self = LogSum { max: x, sum: 1.0, comp: 0.0, started: true };
            return;
        }
        if x > self.max {
            let scale = (self.max - x).exp();
            self.sum *= scale;
            self.comp *= scale;
            self.max = x;
            self.add(1.0);
        } else {
            self.add((x - self.max).exp());
        }
    }

    fn add(&mut self, y: f64) {
        let s = self.sum + y;
        if self.sum.abs() >= y.abs() {
            self.comp += (self.sum - s) + y;
        } else {
            self.comp += (y - s) + self.sum;
        }
        self.sum = s;
    }

    fn value(&self) -> f64 {
        if self.started {
            self.max + (self.sum + self.comp).ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// The truncated sum
/// `sum_{n0 <= n <= n_max} (psi(b^n)^(1+t_k))^s N^n prod_{t_j < t_k} C_j(n)`
/// in the log domain, with `C_j` chosen by `mode`.
#[allow(clippy::too_many_arguments)]
pub fn upper_sum(
    ps: &ProductSet,
    psi: &PsiSpec,
    t: &WeightVector,
    k: usize,
    s: f64,
    n0: u32,
    n_max: u32,
    mode: TermMode,
) -> Result<UpperSum> {
    if n0 > n_max {
        return Err(Error::Precondition(format!("n0 = {n0} exceeds n_max = {n_max}")));
    }
    if t.len() != ps.dim() {
        return Err(Error::InvalidWeights(format!("{} weights for d = {}", t.len(), ps.dim())));
    }
    let tk = check_index(t, k, "reference")?;
    let ln_n = (ps.count() as f64).ln();
    let refined: Vec<usize> = (0..ps.dim()).filter(|&j| t.as_slice()[j] < tk).collect();
    let mut log_terms = Vec::with_capacity((n_max - n0 + 1) as usize);
    let mut log_partial = Vec::with_capacity(log_terms.capacity());
    let mut acc = LogSum::default();
    for n in n0..=n_max {
        let log_psi = psi.log_psi(ps.base(), n)?;
        let mut term = s * (1.0 + tk) * log_psi + n as f64 * ln_n;
        for &j in &refined {
            term += match mode {
                TermMode::Analytic => chain_right(ps, t, j, k, log_psi),
                TermMode::Counted => cover_count_bound(ps, psi, t, n, j, k)?.log_count,
            };
        }
        acc.push(term);
        log_terms.push((n, term));
        log_partial.push(acc.value());
    }
    Ok(UpperSum {
        last_log_term: log_terms.last().map(|x| x.1).unwrap_or(f64::NEG_INFINITY),
        log_sum: acc.value(),
        log_terms,
        log_partial,
    })
}

/// Exact check of the `u` sandwich when `psi(b^n) = b^-m` and `t_j = p/q`:
/// `b^-u <= 2 b^(-m(1 + p/q)) < b^(1-u)`, raised to the power `q`.
pub fn u_sandwich_exact(base: u32, m: u64, p: u64, q: u64, u: i64) -> bool {
    // b^(-uq) <= 2^q b^(-m(q+p))  <=>  b^(m(q+p)) <= 2^q b^(uq)
    let b = BigInt::from(base);
    let lhs_exp = (m * (q + p)) as i64;
    let two_q = BigInt::from(2).pow(q as u32);
    let cmp = |x_exp: i64, y_exp: i64| -> std::cmp::Ordering {
        // compare b^x_exp with 2^q b^y_exp
        let shift = x_exp.min(y_exp);
        let x = b.pow((x_exp - shift) as u32);
        let y = &two_q * b.pow((y_exp - shift) as u32);
        x.cmp(&y)
    };
    cmp(lhs_exp, u * q as i64) != std::cmp::Ordering::Greater
        && cmp(lhs_exp, (u - 1) * q as i64) == std::cmp::Ordering::Greater
}

/// Exact check of the `v` sandwich when `psi(b^n) = b^-m` and `t_k = p/q`:
/// `b^(-u-v) <= b^(-m(1 + p/q)) < b^(1-u-v)`.
pub fn v_sandwich_exact(m: u64, p: u64, q: u64, u: i64, v: i64) -> bool {
    // exponents times q: -(u+v)q <= -m(q+p) < (1-u-v)q
    let e = -((m * (q + p)) as i128);
    let w = (u + v) as i128 * q as i128;
    -w <= e && e < q as i128 - w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dims::weighted_dim;
    use num_traits::Zero;

    fn w(t: &[f64]) -> WeightVector {
        WeightVector::new(t.to_vec()).unwrap()
    }

    fn harmonic() -> PsiSpec {
        PsiSpec::Power { c: 1.0 }
    }

    #[test]
    fn rectangles() {
        let ps = ProductSet::uniform(3, &[0, 2], 1).unwrap();
        let x = PointDigits::canonical(&ps);
        let zero = generation_rectangles(&ps, &x, &harmonic(), &w(&[0.0]), 0).unwrap();
        assert_eq!(zero.len(), 1);
        assert!(zero[0].center[0].is_zero());
        let two = generation_rectangles(&ps, &x, &harmonic(), &w(&[0.0]), 2).unwrap();
        let centers: Vec<String> = two.iter().map(|r| r.center[0].to_string()).collect();
        assert_eq!(centers, ["0", "2/9", "2/3", "8/9"]);
        assert!((two[0].half_sides[0] - 1.0 / 9.0).abs() < 1e-15);
        let sq = ProductSet::uniform(4, &[0, 1, 3], 2).unwrap();
        for n in 0..4 {
            let r = generation_rectangles(&sq, &PointDigits::canonical(&sq), &harmonic(), &w(&[0.0, 1.0]), n).unwrap();
            assert_eq!(r.len() as u64, 9u64.pow(n));
        }
    }

    #[test]
    fn u_and_v_examples() {
        let t = w(&[0.0, 1.0]);
        assert_eq!(u_of(3, &harmonic(), &t, 2, 0).unwrap(), 2);
        assert_eq!(v_of(3, &harmonic(), &t, 2, 0, 1).unwrap(), CoverCase::Refined { u: 2, v: 2 });
        let t = w(&[0.0, 0.5]);
        assert_eq!(v_of(3, &harmonic(), &t, 2, 0, 1).unwrap(), CoverCase::Refined { u: 2, v: 1 });
        let t = w(&[0.0, 0.0]);
        assert_eq!(v_of(3, &harmonic(), &t, 2, 0, 1).unwrap(), CoverCase::Single);
        assert!(u_of(3, &harmonic(), &t, 0, 0).is_err());
        assert!(v_of(3, &harmonic(), &t, 2, 0, 5).is_err());
    }

    #[test]
    fn exact_sandwich_oracle_agrees() {
        // psi(9) = 1/9, t_j = 0: u = 2; t_k = 1: u + v = 4
        assert!(u_sandwich_exact(3, 2, 0, 1, 2));
        assert!(!u_sandwich_exact(3, 2, 0, 1, 3));
        assert!(v_sandwich_exact(2, 1, 1, 2, 2));
        assert!(!v_sandwich_exact(2, 1, 1, 2, 1));
    }

    #[test]
    fn cover_bound_example() {
        let ps = ProductSet::uniform(3, &[0, 2], 2).unwrap();
        let b = cover_count_bound(&ps, &harmonic(), &w(&[0.0, 1.0]), 2, 0, 1).unwrap();
        assert_eq!(b.count, 8);
        assert!(b.chain_holds());
        let g = ps.coord(0).dimension();
        let right = 2f64.powf(1.0 + g) * 3f64.powf(g) * 9f64.powf(g);
        assert!((b.log_right.unwrap() - right.ln()).abs() < 1e-12);
        assert!((right - 24.77).abs() < 0.01);
        let single = cover_count_bound(&ps, &harmonic(), &w(&[1.0, 0.0]), 2, 0, 1).unwrap();
        assert_eq!((single.count, single.case), (1, CoverCase::Single));
        let huge = cover_count_bound(&ps, &harmonic(), &w(&[0.0, 200.0]), 2, 0, 1);
        assert!(huge.unwrap_err().is_guard());
    }

    #[test]
    fn n0_is_minimal() {
        let t = w(&[0.0, 1.0]);
        assert_eq!(n0(3, &harmonic(), &t, 1, 1.0 / 81.0).unwrap(), 2);
        assert_eq!(n0(3, &harmonic(), &t, 1, 1.0 / 80.0).unwrap(), 2);
        assert_eq!(n0(3, &harmonic(), &t, 1, 1.0 / 82.0).unwrap(), 3);
        assert_eq!(n0(3, &harmonic(), &t, 1, 10.0).unwrap(), 1);
        let flat = PsiSpec::Table { values: vec![(1, 0.5)] };
        assert!(n0(3, &flat, &t, 1, 0.01).is_err());
    }

    #[test]
    fn s0_examples() {
        let ps = ProductSet::uniform(3, &[0, 2], 2).unwrap();
        assert!((s0_threshold(&ps, &w(&[0.0, 0.0]), 0).unwrap() - ps.dimension()).abs() < 1e-12);
        let v = s0_threshold(&ps, &w(&[0.0, 1.0]), 1).unwrap();
        assert!((v - 0.946_394_630_4).abs() < 1e-10);
        assert!((v - weighted_dim(&ps, &w(&[0.0, 1.0])).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn large_s_sum_converges() {
        let ps = ProductSet::uniform(3, &[0, 2], 2).unwrap();
        let t = w(&[0.0, 1.0]);
        let gammas = ps.coordinate_dimensions();
        let s = ps.dimension() + t.as_slice().iter().zip(&gammas).map(|(a, b)| a * b).sum::<f64>() + 10.0;
        let start = n0(3, &harmonic(), &t, 1, 0.5).unwrap();
        let r = upper_sum(&ps, &harmonic(), &t, 1, s, start, start + 40, TermMode::Analytic).unwrap();
        assert!(r.last_log_term - r.log_terms[0].1 < 1e-6f64.ln());
        // geometric decay: constant negative slope
        let diffs: Vec<f64> = r.log_terms.windows(2).map(|p| p[1].1 - p[0].1).collect();
        assert!(diffs.iter().all(|d| (d - diffs[0]).abs() < 1e-9 && *d < 0.0));
    }

    #[test]
    fn zero_s_partial_sums_increase() {
        let ps = ProductSet::uniform(3, &[0, 2], 2).unwrap();
        let t = w(&[0.0, 1.0]);
        for mode in [TermMode::Analytic, TermMode::Counted] {
            let r = upper_sum(&ps, &harmonic(), &t, 1, 0.0, 1, 30, mode).unwrap();
            assert!(r.log_partial.windows(2).all(|p| p[1] > p[0]));
        }
    }

    #[test]
    fn log_sum_matches_direct_sum() {
        let mut acc = LogSum::default();
        let xs = [-3.0, 2.0, 0.5, -700.0, 1.0];
        for &x in &xs {
            acc.push(x);
        }
        let direct: f64 = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((acc.value() - direct).abs() < 1e-14);
    }
}
