//! Exact cylinder masses for the natural measures on `K`.
//!
//! Two constructions are kept side by side: the self-similar measure, which
//! gives every level-`n` cylinder mass `N^-n`, and the product `M` of the
//! coordinate measures, which gives a product of coordinate cylinders mass
//! `prod N_i^-n_i`. Every routine here is exact rational arithmetic except the
//! Ahlfors constants, which are reported as floats.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, MAX_ENUMERATION};
use crate::report::CheckReport;
use crate::set::{cmp_frac, DigitSet, DigitStream, PointDigits, ProductSet, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureMode {
    /// Product of the coordinate measures.
    Product,
    /// Invariant measure of the product system with equal weights.
    SelfSimilar,
}

fn inverse_power(count: u64, n: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(count).pow(n))
}

/// Mass `N^-|w|` of the cylinder `g_w(K)` under the self-similar measure.
pub fn cylinder_mass(ps: &ProductSet, w: &Word) -> BigRational {
    inverse_power(ps.count(), w.len() as u32)
}

/// Mass of the same cylinder under the product measure: the cylinder is the
/// product of coordinate cylinders of length `|w|`.
pub fn product_cylinder_mass(ps: &ProductSet, w: &Word) -> BigRational {
    ps.coords()
        .iter()
        .map(|c| inverse_power(c.count() as u64, w.len() as u32))
        .fold(BigRational::one(), |acc, m| acc * m)
}

/// Certified bracket `lower <= mass <= upper`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MassInterval {
    pub lower: BigRational,
    pub upper: BigRational,
    /// Cylinders left undecided at the depth cap.
    pub boundary: u64,
}

impl MassInterval {
    pub fn midpoint(&self) -> f64 {
        let mid = (&self.lower + &self.upper) / BigRational::from_integer(2.into());
        ratio_to_f64(&mid)
    }

    pub fn width(&self) -> BigRational {
        &self.upper - &self.lower
    }
}

pub(crate) fn ratio_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Ball `[c_j - r, c_j + r]` per coordinate, as fractions.
struct SupBall {
    lo: Vec<BigRational>,
    hi: Vec<BigRational>,
}

impl SupBall {
    fn new(center: &[BigRational], r: &BigRational) -> Self {
        SupBall {
            lo: center.iter().map(|c| c - r).collect(),
            hi: center.iter().map(|c| c + r).collect(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Placement {
    Inside,
    Outside,
    Boundary,
}

fn place_interval(lo: &BigInt, hi: &BigInt, den: &BigInt, ball_lo: &BigRational, ball_hi: &BigRational) -> Placement {
    let above_lo = cmp_frac(lo, den, ball_lo.numer(), ball_lo.denom()) != Ordering::Less;
    let below_hi = cmp_frac(hi, den, ball_hi.numer(), ball_hi.denom()) != Ordering::Greater;
    if above_lo && below_hi {
        return Placement::Inside;
    }
    if cmp_frac(hi, den, ball_lo.numer(), ball_lo.denom()) == Ordering::Less
        || cmp_frac(lo, den, ball_hi.numer(), ball_hi.denom()) == Ordering::Greater
    {
        return Placement::Outside;
    }
    Placement::Boundary
}

/// Counts, per level, cylinders found inside the ball, plus the undecided
/// ones at the cap.
struct LevelCounts {
    inside: Vec<u64>,
    boundary: u64,
}

impl LevelCounts {
    fn into_interval(self, count: u64, depth_cap: u32) -> MassInterval {
        let lower = self
            .inside
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(l, &c)| BigRational::from_integer(c.into()) * inverse_power(count, l as u32))
            .fold(BigRational::zero(), |a, b| a + b);
        let upper = &lower + BigRational::from_integer(self.boundary.into()) * inverse_power(count, depth_cap);
        MassInterval {
            lower,
            upper,
            boundary: self.boundary,
        }
    }
}

fn self_similar_counts(ps: &ProductSet, ball: &SupBall, depth_cap: u32) -> LevelCounts {
    let mut counts = LevelCounts {
        inside: vec![0; depth_cap as usize + 1],
        boundary: 0,
    };
    let b = BigInt::from(ps.base());
    let digit_table: Vec<Vec<u32>> = (0..ps.count() as usize).map(|s| ps.symbol_digits(s)).collect();
    let mut stack = vec![(vec![BigInt::zero(); ps.dim()], 0u32)];
    while let Some((offsets, level)) = stack.pop() {
        let bx = ps.cylinder_box_unchecked(&offsets, level);
        let mut placement = Placement::Inside;
        for j in 0..ps.dim() {
            match place_interval(&bx.lo[j], &bx.hi[j], &bx.den, &ball.lo[j], &ball.hi[j]) {
                Placement::Outside => {
                    placement = Placement::Outside;
                    break;
                }
                Placement::Boundary => placement = Placement::Boundary,
                Placement::Inside => {}
            }
        }
        match placement {
            Placement::Outside => {}
            Placement::Inside => counts.inside[level as usize] += 1,
            Placement::Boundary if level == depth_cap => counts.boundary += 1,
            Placement::Boundary => {
                for digits in &digit_table {
                    let child = offsets
                        .iter()
                        .zip(digits)
                        .map(|(p, &d)| p * &b + BigInt::from(d))
                        .collect();
                    stack.push((child, level + 1));
                }
            }
        }
    }
    counts
}

fn coordinate_counts(ds: &DigitSet, lo: &BigRational, hi: &BigRational, depth_cap: u32) -> LevelCounts {
    let mut counts = LevelCounts {
        inside: vec![0; depth_cap as usize + 1],
        boundary: 0,
    };
    let b = BigInt::from(ds.base());
    let bm1 = BigInt::from(ds.base() - 1);
    let mut stack = vec![(BigInt::zero(), 0u32)];
    while let Some((p, level)) = stack.pop() {
        let den = &bm1 * b.pow(level);
        let c_lo = &p * &bm1 + ds.min_digit();
        let c_hi = &p * &bm1 + ds.max_digit();
        match place_interval(&c_lo, &c_hi, &den, lo, hi) {
            Placement::Outside => {}
            Placement::Inside => counts.inside[level as usize] += 1,
            Placement::Boundary if level == depth_cap => counts.boundary += 1,
            Placement::Boundary => {
                for &d in ds.digits() {
                    stack.push((&p * &b + BigInt::from(d), level + 1));
                }
            }
        }
    }
    counts
}

/// Bracket on the mass of the closed sup-norm ball `B(center, r)`.
///
/// Cylinders are split down to `depth_cap`; those inside the ball count
/// towards both bounds, those still straddling its boundary at the cap only
/// towards `upper`. In product mode each coordinate is bracketed separately
/// and the brackets are multiplied.
pub fn ball_mass(
    ps: &ProductSet,
    center: &PointDigits,
    r: &BigRational,
    depth_cap: u32,
    mode: MeasureMode,
) -> Result<MassInterval> {
    if r <= &BigRational::zero() {
        return Err(Error::Precondition("ball radius must be positive".into()));
    }
    if depth_cap < 1 {
        return Err(Error::Precondition("depth cap must be at least 1".into()));
    }
    center.validate(ps)?;
    let ball = SupBall::new(&center.value(ps.base()), r);
    Ok(match mode {
        MeasureMode::SelfSimilar => self_similar_counts(ps, &ball, depth_cap).into_interval(ps.count(), depth_cap),
        MeasureMode::Product => {
            let mut lower = BigRational::one();
            let mut upper = BigRational::one();
            let mut boundary = 0;
            for (j, ds) in ps.coords().iter().enumerate() {
                let part = coordinate_counts(ds, &ball.lo[j], &ball.hi[j], depth_cap)
                    .into_interval(ds.count() as u64, depth_cap);
                lower *= part.lower;
                upper *= part.upper;
                boundary += part.boundary;
            }
            MassInterval { lower, upper, boundary }
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AhlforsReport {
    pub samples: u64,
    pub c1: f64,
    pub c2: f64,
}

impl AhlforsReport {
    pub fn ratio(&self) -> f64 {
        self.c2 / self.c1
    }

    pub fn to_check(&self, name: &str) -> CheckReport {
        let mut report = CheckReport::passed(name, self.samples);
        report.pass = self.c1.is_finite() && self.c2.is_finite() && self.c1 > 0.0;
        report.c1 = Some(self.c1);
        report.c2 = Some(self.c2);
        report
    }
}

/// Random point of `K` distributed by the self-similar measure, truncated to
/// `depth` random digits followed by the symbol-0 tail.
pub fn sample_point(ps: &ProductSet, depth: u32, rng: &mut impl Rng) -> PointDigits {
    let mut streams: Vec<DigitStream> = ps
        .coords()
        .iter()
        .map(|c| DigitStream {
            prefix: Vec::with_capacity(depth as usize),
            period: vec![c.min_digit()],
        })
        .collect();
    for _ in 0..depth {
        let s = rng.gen_range(0..ps.count() as usize);
        for (stream, d) in streams.iter_mut().zip(ps.symbol_digits(s)) {
            stream.prefix.push(d);
        }
    }
    PointDigits(streams)
}

/// Rational close to `x` with denominator `2^40`, clamped into `[lo, hi]`.
fn rationalize(x: f64, lo: &BigRational, hi: &BigRational) -> BigRational {
    let scale = BigInt::from(1u64 << 40);
    let num = BigInt::from((x * (1u64 << 40) as f64).round() as i64);
    let r = BigRational::new(num, scale);
    if &r < lo {
        lo.clone()
    } else if &r > hi {
        hi.clone()
    } else {
        r
    }
}

/// Smallest `m` with `b^-m <= r`.
fn level_for_radius(base: u32, r: &BigRational) -> u32 {
    let b = BigInt::from(base);
    let mut m = 0;
    let mut scale = BigInt::one();
    // r >= 1 / b^m  <=>  r * b^m >= 1
    while r * BigRational::from_integer(scale.clone()) < BigRational::one() {
        scale *= &b;
        m += 1;
    }
    m
}

/// Empirical Ahlfors constants: the extremes of `mass(B(x, r)) / r^gamma`
/// over `samples` centers drawn from the measure and radii log-uniform in
/// `[r_min, r_max]`. Masses use bracket midpoints with the depth cap four
/// levels below the radius scale.
pub fn ahlfors_check(
    ps: &ProductSet,
    samples: u64,
    r_min: &BigRational,
    r_max: &BigRational,
    seed: u64,
    mode: MeasureMode,
) -> Result<AhlforsReport> {
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    if r_min <= &BigRational::zero() || r_min > r_max {
        return Err(Error::Precondition(format!("degenerate radius range [{r_min}, {r_max}]")));
    }
    if r_max > &ps.diameter() {
        return Err(Error::Precondition(format!("r_max {r_max} exceeds diam(K) = {}", ps.diameter())));
    }
    let gamma = ps.dimension();
    let (ln_lo, ln_hi) = (ratio_to_f64(r_min).ln(), ratio_to_f64(r_max).ln());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(PointDigits, BigRational)> = (0..samples)
        .map(|_| {
            let r = if r_min == r_max {
                r_min.clone()
            } else {
                rationalize(rng.gen_range(ln_lo..=ln_hi).exp(), r_min, r_max)
            };
            let depth = level_for_radius(ps.base(), &r) + 4;
            (sample_point(ps, depth + 2, &mut rng), r)
        })
        .collect();
    let ratios = draws
        .par_iter()
        .map(|(center, r)| {
            let depth = level_for_radius(ps.base(), r) + 4;
            let mass = ball_mass(ps, center, r, depth, mode)?;
            Ok(mass.midpoint() / ratio_to_f64(r).powf(gamma))
        })
        .collect::<Result<Vec<f64>>>()?;
    let c1 = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let c2 = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(AhlforsReport { samples, c1, c2 })
}

/// Checks `m(F) = sum_j (1/N) m(g_j^{-1} F)` exactly for every cylinder `F`
/// of level at most `max_level`, where `m` is the candidate measure given by
/// its cylinder masses.
///
/// Preimages are computed symbolically: `g_j^{-1}(g_w K)` meets `K` in the
/// cylinder of the tail of `w` when `j` is the first symbol, and only in a
/// null set otherwise; `g_j^{-1}(K)` contains `K`.
pub fn invariance_check_with<F>(ps: &ProductSet, max_level: u32, candidate: F) -> Result<CheckReport>
where
    F: Fn(&Word) -> BigRational,
{
    let name = "invariance";
    let weight = inverse_power(ps.count(), 1);
    let mut checked = 0;
    for level in 0..=max_level {
        for w in ps.words(level)? {
            checked += 1;
            let lhs = candidate(&w);
            let mut rhs = BigRational::zero();
            for j in 0..ps.count() as usize {
                let preimage = match w.symbols().first() {
                    None => Some(Word::empty()),
                    Some(&first) if first == j => Some(w.tail()),
                    Some(_) => None,
                };
                if let Some(p) = preimage {
                    rhs += &weight * candidate(&p);
                }
            }
            if lhs != rhs {
                return Ok(CheckReport::failed(
                    name,
                    checked,
                    serde_json::json!({ "word": w, "mass": lhs.to_string(), "expected": rhs.to_string() }),
                ));
            }
        }
    }
    Ok(CheckReport::passed(name, checked))
}

pub fn invariance_check(ps: &ProductSet, max_level: u32, mode: MeasureMode) -> Result<CheckReport> {
    match mode {
        MeasureMode::SelfSimilar => invariance_check_with(ps, max_level, |w| cylinder_mass(ps, w)),
        MeasureMode::Product => invariance_check_with(ps, max_level, |w| product_cylinder_mass(ps, w)),
    }
}

/// Enumerates every rectangle `R = prod_j f_{u_j}([0,1])` built from coordinate
/// words `u_j` of lengths `n_j <= max_level` and checks
/// `M(R) = prod N_j^-n_j` against `mu(R) = #{w : |w| = L, g_w(K) in R} N^-L`
/// with `L = max n_j`, the latter found by brute-force box containment.
pub fn product_equals_selfsimilar(ps: &ProductSet, max_level: u32) -> Result<CheckReport> {
    let name = "product-equals-self-similar";
    let d = ps.dim();
    // All (level, offset) choices for each coordinate.
    let per_coord: Vec<Vec<(u32, BigInt)>> = ps
        .coords()
        .iter()
        .map(|c| {
            let b = BigInt::from(c.base());
            let mut out = Vec::new();
            let mut layer = vec![BigInt::zero()];
            for level in 0..=max_level {
                out.extend(layer.iter().map(|p| (level, p.clone())));
                layer = layer
                    .iter()
                    .flat_map(|p| {
                        let b = &b;
                        c.digits().iter().map(move |&a| p * b + BigInt::from(a))
                    })
                    .collect();
            }
            out
        })
        .collect();
    let rect_count = per_coord
        .iter()
        .try_fold(1u64, |acc, v| acc.checked_mul(v.len() as u64))
        .filter(|&n| n <= MAX_ENUMERATION)
        .ok_or_else(|| Error::guard("rectangle enumeration", "product of coordinate words", MAX_ENUMERATION))?;
    let full_words = ps.word_count(max_level)?;
    if rect_count.saturating_mul(full_words) > 50 * MAX_ENUMERATION {
        return Err(Error::guard("rectangle containment checks", rect_count.saturating_mul(full_words), 50 * MAX_ENUMERATION));
    }
    let word_boxes: Vec<Vec<crate::set::BadicBox>> = (0..=max_level)
        .map(|l| {
            ps.words(l)
                .map(|it| it.map(|w| ps.cylinder_box_unchecked(&ps.word_offsets(&w), l)).collect())
        })
        .collect::<Result<_>>()?;
    let bm1 = BigInt::from(ps.base() - 1);

    let outcomes: Vec<Option<serde_json::Value>> = (0..rect_count)
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let mut choice = Vec::with_capacity(d);
            for opts in per_coord.iter().rev() {
                let n = opts.len() as u64;
                choice.push(&opts[(rest % n) as usize]);
                rest /= n;
            }
            choice.reverse();
            let top = choice.iter().map(|(l, _)| *l).max().unwrap_or(0);
            let den = &bm1 * BigInt::from(ps.base()).pow(top);
            let mut lo = Vec::with_capacity(d);
            let mut hi = Vec::with_capacity(d);
            let mut product_mass = BigRational::one();
            for ((level, p), c) in choice.iter().zip(ps.coords()) {
                let shift = BigInt::from(ps.base()).pow(top - level);
                let base = p * &bm1;
                lo.push((&base + c.min_digit()) * &shift);
                hi.push((&base + c.max_digit()) * &shift);
                product_mass *= inverse_power(c.count() as u64, *level);
            }
            let rect = crate::set::BadicBox { lo, hi, den };
            let inside = word_boxes[top as usize].iter().filter(|bx| rect.contains_box(bx)).count();
            let ss_mass = BigRational::from_integer(inside.into()) * inverse_power(ps.count(), top);
            (ss_mass != product_mass).then(|| {
                serde_json::json!({
                    "levels": choice.iter().map(|(l, _)| *l).collect::<Vec<_>>(),
                    "offsets": choice.iter().map(|(_, p)| p.to_string()).collect::<Vec<_>>(),
                    "product_mass": product_mass.to_string(),
                    "self_similar_mass": ss_mass.to_string(),
                })
            })
        })
        .collect();
    Ok(match outcomes.into_iter().enumerate().find_map(|(i, o)| o.map(|v| (i, v))) {
        Some((i, v)) => CheckReport::failed(name, i as u64 + 1, v),
        None => CheckReport::passed(name, rect_count),
    })
}
