//! Exact b-adic box counts for `K` and for single generations of the
//! approximation set, with log-log slope fits.
//!
//! A grid box of level `m` is counted when its open interior meets the set.
//! Since both `K` and a generation `A_n` are products over coordinates (the
//! rectangle centres form a product of coordinate orbits), every count is a
//! product of one-dimensional counts.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dims::{weighted_dim, WeightVector};
use crate::error::{Error, Result, MAX_ENUMERATION};
use crate::psi::PsiSpec;
use crate::set::{DigitSet, Frac, PointDigits, ProductSet};

/// Cap on the number of grid cells any count may visit.
pub const MAX_CELL_VISITS: u64 = 100 * MAX_ENUMERATION;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSeries {
    pub base: u32,
    /// `(m, count)` pairs.
    pub points: Vec<(u32, u128)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
}

fn overflow(what: &str) -> Error {
    Error::guard(what, "exceeds i128", i128::MAX)
}

fn pow_i128(base: u32, exp: u32) -> Result<i128> {
    (base as i128).checked_pow(exp).ok_or_else(|| overflow("b^m grid scale"))
}

fn add(a: Frac, b: Frac, sign: i128) -> Result<Frac> {
    let num = a
        .num
        .checked_mul(b.den)
        .zip(b.num.checked_mul(a.den))
        .and_then(|(x, y)| x.checked_add(sign * y))
        .ok_or_else(|| overflow("interval endpoint"))?;
    let den = a.den.checked_mul(b.den).ok_or_else(|| overflow("interval endpoint"))?;
    Ok(Frac::new(num, den))
}

/// Cylinder `(offset, b^level)` of a single coordinate.
type Cylinder = (i128, i128);

/// Number of level-`m` cells of `[0, 1]` whose interior meets the set, found
/// by pruned descent: a cell can only meet the set if its parent does.
pub fn coordinate_box_count(ds: &DigitSet, m: u32) -> Result<u128> {
    Ok(coordinate_box_counts(ds, m)?[m as usize])
}

/// [`coordinate_box_count`] for every level `0..=m_max` in one descent.
pub fn coordinate_box_counts(ds: &DigitSet, m_max: u32) -> Result<Vec<u128>> {
    let b = ds.base() as i128;
    let scales = (0..=m_max).map(|l| pow_i128(ds.base(), l)).collect::<Result<Vec<_>>>()?;
    let mut counts = vec![0u128; m_max as usize + 1];
    // depth-first over surviving cells; each keeps the deepest cylinder
    // enclosing it, where the walks for its children resume
    let mut stack: Vec<(u32, i128, Option<Cylinder>)> = vec![(0, 0, None)];
    while let Some((level, p, from)) = stack.pop() {
        counts[level as usize] += 1;
        if level == m_max {
            continue;
        }
        let scale = scales[level as usize + 1];
        for i in p * b..(p + 1) * b {
            let walk = ds.open_interval_walk(Frac::new(i, scale), Frac::new(i + 1, scale), from)?;
            if walk.meets {
                stack.push((level + 1, i, walk.enclosing));
            }
        }
    }
    Ok(counts)
}

/// Boxes of side `b^-m` whose interior meets `K`.
pub fn box_count_k(ps: &ProductSet, m: u32) -> Result<u128> {
    ps.word_count(m)?;
    ps.coords()
        .iter()
        .map(|c| coordinate_box_count(c, m))
        .try_fold(1u128, |acc, c| Ok(acc * c?))
}

/// [`box_count_k`] at each requested level, sharing one descent per
/// coordinate.
pub fn box_count_k_series(ps: &ProductSet, levels: impl IntoIterator<Item = u32>) -> Result<CountSeries> {
    let levels: Vec<u32> = levels.into_iter().collect();
    let Some(&top) = levels.iter().max() else {
        return Ok(CountSeries { base: ps.base(), points: Vec::new() });
    };
    ps.word_count(top)?;
    let per_coord = ps
        .coords()
        .iter()
        .map(|c| coordinate_box_counts(c, top))
        .collect::<Result<Vec<_>>>()?;
    Ok(CountSeries {
        base: ps.base(),
        points: levels
            .iter()
            .map(|&m| (m, per_coord.iter().map(|c| c[m as usize]).product()))
            .collect(),
    })
}

/// Least-squares slope of `ln count` against `m ln b`.
pub fn slope_fit(series: &CountSeries) -> Result<SlopeFit> {
    if series.points.len() < 3 {
        return Err(Error::Precondition(format!("need at least 3 points, got {}", series.points.len())));
    }
    if series.points.iter().any(|&(_, c)| c == 0) {
        return Err(Error::Precondition("zero count in series".into()));
    }
    let ln_b = (series.base as f64).ln();
    let xs: Vec<f64> = series.points.iter().map(|&(m, _)| m as f64 * ln_b).collect();
    let ys: Vec<f64> = series.points.iter().map(|&(_, c)| (c as f64).ln()).collect();
    let first = series.points[0].1;
    if series.points.iter().all(|&(_, c)| c == first) {
        return Err(Error::Precondition("constant series".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("all points share one scale".into()));
    }
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(SlopeFit {
        slope,
        stderr: (ssr / (n - 2.0) / sxx).sqrt(),
    })
}

/// Half-side `psi(b^n)^(1+t_j)` as a fraction: exact when it is a power of
/// `b`, otherwise rounded up to the grid `b^-(m+2)`.
fn outward_half_side(base: u32, psi: &PsiSpec, tj: f64, n: u32, m: u32) -> Result<Frac> {
    let log_b = (1.0 + tj) * psi.log_b_psi(base, n)?;
    if !log_b.is_finite() {
        return Err(Error::Precondition(format!("half-side at n = {n} is zero or infinite")));
    }
    let e = log_b.round();
    if (log_b - e).abs() <= 1e-12 * log_b.abs().max(1.0) {
        return Ok(if e >= 0.0 {
            Frac::new(pow_i128(base, e as u32)?, 1)
        } else {
            Frac::new(1, pow_i128(base, (-e) as u32)?)
        });
    }
    let den = pow_i128(base, m + 2)?;
    let scaled = (log_b * (base as f64).ln()).exp() * den as f64;
    if !(scaled.is_finite() && scaled < 1e30) {
        return Err(overflow("half-side numerator"));
    }
    Ok(Frac::new(scaled.ceil() as i128, den))
}

/// Coordinate-`j` centres `(P + x_j) / b^n` over all coordinate words.
fn coordinate_centers(ds: &DigitSet, x_j: &BigRational, n: u32) -> Result<Vec<Frac>> {
    let b = BigInt::from(ds.base());
    let scale = BigRational::from_integer(b.pow(n));
    let mut offsets = vec![BigInt::zero()];
    for _ in 0..n {
        offsets = offsets
            .iter()
            .flat_map(|p| ds.digits().iter().map(move |&a| p * ds.base() + BigInt::from(a)))
            .collect();
    }
    offsets
        .into_iter()
        .map(|p| Frac::try_from_rational(&((BigRational::from_integer(p) + x_j) / &scale)))
        .collect()
}

/// Level-`m` cells whose interior meets `(c - h, c + h)` inside the set.
fn cells_hit(ds: &DigitSet, center: Frac, half: Frac, scale: i128) -> Result<Vec<i128>> {
    let lo = add(center, half, -1)?;
    let hi = add(center, half, 1)?;
    let first = lo
        .num
        .checked_mul(scale)
        .ok_or_else(|| overflow("cell index"))?
        .div_euclid(lo.den)
        .max(0);
    let last = hi
        .num
        .checked_mul(scale)
        .ok_or_else(|| overflow("cell index"))?
        .div_euclid(hi.den)
        .min(scale - 1);
    let mut out = Vec::new();
    for i in first..=last {
        let a = lo.max(Frac::new(i, scale))?;
        let z = hi.min(Frac::new(i + 1, scale))?;
        if ds.open_interval_meets(a, z)? {
            out.push(i);
        }
    }
    Ok(out)
}

struct Setup {
    centers: Vec<Vec<Frac>>,
    halves: Vec<Frac>,
    scale: i128,
}

fn setup(ps: &ProductSet, x: &PointDigits, psi: &PsiSpec, t: &WeightVector, n: u32, m: u32) -> Result<Setup> {
    psi.validate()?;
    if t.len() != ps.dim() {
        return Err(Error::InvalidWeights(format!("{} weights for d = {}", t.len(), ps.dim())));
    }
    x.validate(ps)?;
    ps.word_count(n)?;
    let scale = pow_i128(ps.base(), m)?;
    let xs = x.value(ps.base());
    let mut centers = Vec::with_capacity(ps.dim());
    let mut halves = Vec::with_capacity(ps.dim());
    let mut visits: u64 = 0;
    for (j, ds) in ps.coords().iter().enumerate() {
        let half = outward_half_side(ps.base(), psi, t.as_slice()[j], n, m)?;
        // cells spanned by one interval, times the number of centres
        let span = (2 * half.num).checked_mul(scale).map(|v| v / half.den + 2).ok_or_else(|| overflow("cell span"))?;
        let span = u64::try_from(span.min(scale)).unwrap_or(u64::MAX);
        visits = visits.saturating_add(span.saturating_mul((ds.count() as u64).pow(n)));
        if visits > MAX_CELL_VISITS {
            return Err(Error::guard("grid cell visits", visits, MAX_CELL_VISITS));
        }
        centers.push(coordinate_centers(ds, &xs[j], n)?);
        halves.push(half);
    }
    Ok(Setup { centers, halves, scale })
}

/// Boxes of side `b^-m` whose interior meets `A_n ∩ K`, where `A_n` is the
/// union of the generation-`n` rectangles.
pub fn box_count_an(ps: &ProductSet, x: &PointDigits, psi: &PsiSpec, t: &WeightVector, n: u32, m: u32) -> Result<u128> {
    let s = setup(ps, x, psi, t, n, m)?;
    let mut total: u128 = 1;
    for (j, ds) in ps.coords().iter().enumerate() {
        let hits = s.centers[j]
            .par_iter()
            .map(|&c| cells_hit(ds, c, s.halves[j], s.scale))
            .collect::<Result<Vec<_>>>()?;
        let distinct: HashSet<i128> = hits.into_iter().flatten().collect();
        total = total.checked_mul(distinct.len() as u128).ok_or_else(|| overflow("box count"))?;
    }
    Ok(total)
}

/// The same count by brute force over words: every rectangle contributes the
/// boxes it hits, and the union is counted. With `shuffle` the words are
/// visited in a seeded random order.
pub fn box_count_an_enumerated(
    ps: &ProductSet,
    x: &PointDigits,
    psi: &PsiSpec,
    t: &WeightVector,
    n: u32,
    m: u32,
    shuffle: Option<u64>,
) -> Result<u128> {
    let s = setup(ps, x, psi, t, n, m)?;
    let mut words: Vec<u64> = (0..ps.word_count(n)?).collect();
    if let Some(seed) = shuffle {
        words.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let per_coord: Vec<u64> = ps.coords().iter().map(|c| (c.count() as u64).pow(n)).collect();
    let mut seen: BTreeSet<Vec<i128>> = BTreeSet::new();
    let mut visits: u64 = 0;
    for idx in words {
        let w = crate::set::Word::from_index(idx, n, ps.count());
        // coordinate word index of w in each coordinate
        let mut coord_idx = vec![0u64; ps.dim()];
        for &sym in w.symbols() {
            let digits = ps.symbol_digits(sym);
            for (j, (d, ds)) in digits.iter().zip(ps.coords()).enumerate() {
                let pos = ds.digits().binary_search(d).expect("symbol digit") as u64;
                coord_idx[j] = coord_idx[j] * ds.count() as u64 + pos;
            }
        }
        let mut cells: Vec<Vec<i128>> = Vec::with_capacity(ps.dim());
        for (j, ds) in ps.coords().iter().enumerate() {
            debug_assert!(coord_idx[j] < per_coord[j]);
            cells.push(cells_hit(ds, s.centers[j][coord_idx[j] as usize], s.halves[j], s.scale)?);
        }
        let boxes: u64 = cells.iter().map(|c| c.len() as u64).product();
        visits = visits.saturating_add(boxes);
        if visits > MAX_ENUMERATION {
            return Err(Error::guard("enumerated boxes", visits, MAX_ENUMERATION));
        }
        let mut tuple = vec![0i128; ps.dim()];
        push_product(&cells, 0, &mut tuple, &mut seen);
    }
    Ok(seen.len() as u128)
}

fn push_product(cells: &[Vec<i128>], j: usize, tuple: &mut Vec<i128>, seen: &mut BTreeSet<Vec<i128>>) {
    if j == cells.len() {
        seen.insert(tuple.clone());
        return;
    }
    for &c in &cells[j] {
        tuple[j] = c;
        push_product(cells, j + 1, tuple, seen);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPoint {
    pub n: u32,
    pub m: u32,
    pub count: u128,
    /// `ln count / (m ln b)`.
    pub exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    /// Closed-form value the exponents are compared against.
    pub target: f64,
    /// Index `k` whose scale `psi(b^n)^(1+t_k)` fixes `m`.
    pub reference: usize,
    pub points: Vec<EmpiricalPoint>,
    /// Generations refused by a guard, with the reason.
    pub skipped: Vec<(u32, String)>,
}

impl EmpiricalReport {
    /// `|exponent - target|` at the largest generation that could be counted.
    pub fn final_gap(&self) -> Option<f64> {
        self.points.last().map(|p| (p.exponent - self.target).abs())
    }
}

/// Per-generation exponents of `A_n ∩ K` at the matched scale
/// `b^-m ≈ psi(b^n)^(1 + t_k)`, with `k` the minimizing index of the
/// closed-form dimension.
pub fn empirical_dim_w(
    ps: &ProductSet,
    x: &PointDigits,
    psi: &PsiSpec,
    t: &WeightVector,
    n_list: &[u32],
) -> Result<EmpiricalReport> {
    let closed = weighted_dim(ps, t)?;
    let k = closed.argmin[0];
    let tk = t.as_slice()[k];
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &n in n_list {
        let level = -(1.0 + tk) * psi.log_b_psi(ps.base(), n)?;
        let m = level.round();
        if m.is_nan() || m < 1.0 {
            skipped.push((n, format!("scale level {level} below 1")));
            continue;
        }
        let m = m as u32;
        match box_count_an(ps, x, psi, t, n, m) {
            Ok(count) => points.push(EmpiricalPoint {
                n,
                m,
                count,
                exponent: (count as f64).ln() / (m as f64 * (ps.base() as f64).ln()),
            }),
            Err(e) if e.is_guard() => skipped.push((n, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    Ok(EmpiricalReport {
        target: closed.value,
        reference: k,
        points,
        skipped,
    })
}
