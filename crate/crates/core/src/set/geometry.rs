use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::digits::{DigitStream, DigitSet};
use super::point::{GridPoint, PointDigits};
use super::product::{ProductSet, Word};
use crate::error::{checked_power, Error, Result, MAX_ENUMERATION};

/// Axis-parallel box with exact endpoints `lo[j] / den`, `hi[j] / den`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BadicBox {
    #[serde(with = "crate::wire::bigint_vec")]
    pub lo: Vec<BigInt>,
    #[serde(with = "crate::wire::bigint_vec")]
    pub hi: Vec<BigInt>,
    #[serde(with = "crate::wire::bigint")]
    pub den: BigInt,
}

impl BadicBox {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self, j: usize) -> BigRational {
        BigRational::new(self.lo[j].clone(), self.den.clone())
    }

    pub fn hi(&self, j: usize) -> BigRational {
        BigRational::new(self.hi[j].clone(), self.den.clone())
    }

    pub fn side(&self, j: usize) -> BigRational {
        BigRational::new(&self.hi[j] - &self.lo[j], self.den.clone())
    }

    /// Closed-box membership.
    pub fn contains_point(&self, x: &[BigRational]) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(j, v)| {
                cmp_frac(&self.lo[j], &self.den, v.numer(), v.denom()) != Ordering::Greater
                    && cmp_frac(v.numer(), v.denom(), &self.hi[j], &self.den) != Ordering::Greater
            })
    }

    /// Whether `other` lies inside `self` (closed boxes).
    pub fn contains_box(&self, other: &BadicBox) -> bool {
        (0..self.dim()).all(|j| {
            cmp_frac(&self.lo[j], &self.den, &other.lo[j], &other.den) != Ordering::Greater
                && cmp_frac(&other.hi[j], &other.den, &self.hi[j], &self.den) != Ordering::Greater
        })
    }

    /// Whether the open interiors of the two boxes intersect.
    pub fn interiors_meet(&self, other: &BadicBox) -> bool {
        (0..self.dim()).all(|j| {
            cmp_frac(&self.lo[j], &self.den, &other.hi[j], &other.den) == Ordering::Less
                && cmp_frac(&other.lo[j], &other.den, &self.hi[j], &self.den) == Ordering::Less
        })
    }
}

/// Compares `a/b` with `c/d` for positive denominators.
pub(crate) fn cmp_frac(a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt) -> Ordering {
    (a * d).cmp(&(c * b))
}

impl ProductSet {
    /// Integers `P_j` whose base-`b` digits are the coordinate-`j` digits of
    /// `w`, so that `g_w(x)_j = (P_j + x_j) / b^{|w|}`.
    pub fn word_offsets(&self, w: &Word) -> Vec<BigInt> {
        let b = BigInt::from(self.base());
        let mut offsets = vec![BigInt::zero(); self.dim()];
        for &s in w.symbols() {
            for (p, d) in offsets.iter_mut().zip(self.symbol_digits(s)) {
                *p = &*p * &b + BigInt::from(d);
            }
        }
        offsets
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        match w.symbols().iter().find(|&&s| s as u64 >= self.count()) {
            Some(s) => Err(Error::Precondition(format!("symbol {s} outside alphabet of size {}", self.count()))),
            None => Ok(()),
        }
    }

    /// `g_w(x)` as exact rationals.
    pub fn apply_word(&self, w: &Word, x: &PointDigits) -> Result<Vec<BigRational>> {
        self.check_word(w)?;
        x.validate(self)?;
        let scale = BigInt::from(self.base()).pow(w.len() as u32);
        let scale = BigRational::from_integer(scale);
        Ok(self
            .word_offsets(w)
            .into_iter()
            .zip(x.value(self.base()))
            .map(|(p, xj)| (BigRational::from_integer(p) + xj) / &scale)
            .collect())
    }

    /// `g_w(x)` in digit form: the word's digits are prepended to each stream.
    pub fn apply_word_digits(&self, w: &Word, x: &PointDigits) -> Result<PointDigits> {
        self.check_word(w)?;
        x.validate(self)?;
        let mut streams: Vec<DigitStream> = vec![
            DigitStream {
                prefix: Vec::with_capacity(w.len()),
                period: Vec::new()
            };
            self.dim()
        ];
        for &s in w.symbols() {
            for (stream, d) in streams.iter_mut().zip(self.symbol_digits(s)) {
                stream.prefix.push(d);
            }
        }
        for (stream, src) in streams.iter_mut().zip(x.streams()) {
            stream.prefix.extend_from_slice(&src.prefix);
            stream.period = src.period.clone();
        }
        Ok(PointDigits(streams))
    }

    /// Exact bounding box of the cylinder `g_w(K)`; coordinate `j` has side
    /// `diam(K_j) b^{-|w|}`.
    pub fn cylinder_box(&self, w: &Word) -> Result<BadicBox> {
        self.check_word(w)?;
        Ok(self.cylinder_box_unchecked(&self.word_offsets(w), w.len() as u32))
    }

    pub(crate) fn cylinder_box_unchecked(&self, offsets: &[BigInt], level: u32) -> BadicBox {
        let bm1 = BigInt::from(self.base() - 1);
        let den = &bm1 * BigInt::from(self.base()).pow(level);
        let (lo, hi) = offsets
            .iter()
            .zip(self.coords())
            .map(|(p, c)| {
                let base = p * &bm1;
                (&base + c.min_digit(), &base + c.max_digit())
            })
            .unzip();
        BadicBox { lo, hi, den }
    }

    /// Bounding box of `K` itself.
    pub fn hull(&self) -> BadicBox {
        self.cylinder_box_unchecked(&vec![BigInt::zero(); self.dim()], 0)
    }

    /// Whether an exact point lies in `K`.
    pub fn contains(&self, x: &[BigRational]) -> Result<bool> {
        if x.len() != self.dim() {
            return Ok(false);
        }
        for (v, c) in x.iter().zip(self.coords()) {
            if !c.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// All points `p / b^n` of `K`, obtained as the images `g_w(x)` of the
    /// cube corners `x in {0,1}^d` under words of length `n`. Deduplicated
    /// and sorted.
    ///
    /// Requires `0` and `b - 1` in every digit set so that the corners lie
    /// in `K`.
    pub fn rational_points(&self, n: u32) -> Result<Vec<GridPoint>> {
        let top = self.base() - 1;
        for (j, c) in self.coords().iter().enumerate() {
            if !c.has_digit(0) || !c.has_digit(top) {
                return Err(Error::Precondition(format!(
                    "coordinate {j}: digit set {:?} must contain 0 and {top}",
                    c.digits()
                )));
            }
        }
        let words = self.word_count(n)?;
        let corners = checked_power(2, self.dim() as u32, MAX_ENUMERATION, "cube corners")?;
        if words.saturating_mul(corners) > MAX_ENUMERATION {
            return Err(Error::guard("rational point enumeration", words.saturating_mul(corners), MAX_ENUMERATION));
        }
        let mut out = BTreeSet::new();
        for w in self.words(n)? {
            let offsets = self.word_offsets(&w);
            for mask in 0..corners {
                let num = offsets
                    .iter()
                    .enumerate()
                    .map(|(j, p)| p + BigInt::from((mask >> j) & 1))
                    .collect();
                out.insert(GridPoint { num, den_pow: n });
            }
        }
        Ok(out.into_iter().collect())
    }
}

/// Exact fraction with `i128` parts and positive denominator, used by the
/// counting kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frac {
    pub num: i128,
    pub den: i128,
}

impl Frac {
    pub fn new(num: i128, den: i128) -> Self {
        debug_assert!(den > 0);
        Frac { num, den }
    }

    pub fn try_from_rational(x: &BigRational) -> Result<Self> {
        let num = i128::try_from(x.numer()).map_err(|_| Error::guard("i128 numerator", x.numer(), i128::MAX))?;
        let den = i128::try_from(x.denom()).map_err(|_| Error::guard("i128 denominator", x.denom(), i128::MAX))?;
        Ok(Frac::new(num, den))
    }

    pub fn cmp_exact(&self, other: &Frac) -> Result<Ordering> {
        let l = self.num.checked_mul(other.den);
        let r = other.num.checked_mul(self.den);
        match (l, r) {
            (Some(l), Some(r)) => Ok(l.cmp(&r)),
            _ => Err(Error::guard("i128 cross product", format!("{self:?} vs {other:?}"), i128::MAX)),
        }
    }

    pub fn min(self, other: Frac) -> Result<Frac> {
        Ok(if self.cmp_exact(&other)? == Ordering::Greater { other } else { self })
    }

    pub fn max(self, other: Frac) -> Result<Frac> {
        Ok(if self.cmp_exact(&other)? == Ordering::Less { other } else { self })
    }
}

/// Result of [`DigitSet::open_interval_walk`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntervalWalk {
    pub meets: bool,
    /// Deepest cylinder `(offset, b^level)` whose hull encloses the interval.
    pub enclosing: Option<(i128, i128)>,
}

enum HullRelation {
    Disjoint,
    EndpointInside,
    Encloses,
}

impl DigitSet {
    /// Whether the open interval `(lo, hi)` meets this set, decided exactly.
    ///
    /// Walks down the cylinder tree: a cylinder's extreme points belong to the
    /// set, so a cylinder hull with an endpoint strictly inside the interval
    /// settles the question. Otherwise at most one child can enclose the
    /// interval, and hulls shrink below the interval length after finitely
    /// many levels.
    pub fn open_interval_meets(&self, lo: Frac, hi: Frac) -> Result<bool> {
        Ok(self.open_interval_walk(lo, hi, None)?.meets)
    }

    /// The walk behind [`DigitSet::open_interval_meets`], optionally resumed
    /// from a cylinder `(offset, b^level)` whose hull encloses `(lo, hi)`.
    ///
    /// A subinterval of an interval follows the same path down to the
    /// deepest enclosing cylinder, so nested queries can resume there.
    pub fn open_interval_walk(&self, lo: Frac, hi: Frac, from: Option<(i128, i128)>) -> Result<IntervalWalk> {
        let no = |enclosing| IntervalWalk { meets: false, enclosing };
        let yes = |enclosing| IntervalWalk { meets: true, enclosing };
        if lo.cmp_exact(&hi)? != Ordering::Less {
            return Ok(no(None));
        }
        let b = self.base() as i128;
        let bm1 = b - 1;
        let jmin = self.min_digit() as i128;
        let jmax = self.max_digit() as i128;

        let relate = |p: i128, scale: i128| -> Result<HullRelation> {
            let overflow = || Error::guard("i128 cylinder hull", format!("offset {p} at scale {scale}"), i128::MAX);
            let den = bm1.checked_mul(scale).ok_or_else(overflow)?;
            let base = bm1.checked_mul(p).ok_or_else(overflow)?;
            let h_lo = Frac::new(base + jmin, den);
            let h_hi = Frac::new(base + jmax, den);
            if h_hi.cmp_exact(&lo)? != Ordering::Greater || h_lo.cmp_exact(&hi)? != Ordering::Less {
                return Ok(HullRelation::Disjoint);
            }
            if lo.cmp_exact(&h_lo)? == Ordering::Less || h_hi.cmp_exact(&hi)? == Ordering::Less {
                return Ok(HullRelation::EndpointInside);
            }
            Ok(HullRelation::Encloses)
        };

        let (mut p, mut scale) = match from {
            Some(node) => node,
            None => match relate(0, 1)? {
                HullRelation::Disjoint => return Ok(no(None)),
                HullRelation::EndpointInside => return Ok(yes(None)),
                HullRelation::Encloses => (0, 1),
            },
        };
        loop {
            let child_scale = scale
                .checked_mul(b)
                .ok_or_else(|| Error::guard("i128 cylinder scale", scale, i128::MAX))?;
            let mut next = None;
            for &a in self.digits() {
                let child = p * b + a as i128;
                match relate(child, child_scale)? {
                    HullRelation::Disjoint => continue,
                    HullRelation::EndpointInside => return Ok(yes(Some((p, scale)))),
                    HullRelation::Encloses => {
                        next = Some(child);
                        break;
                    }
                }
            }
            match next {
                Some(child) => {
                    p = child;
                    scale = child_scale;
                }
                None => return Ok(no(Some((p, scale)))),
            }
        }
    }

    /// Exact-rational front end to [`DigitSet::open_interval_meets`].
    pub fn open_interval_meets_rational(&self, lo: &BigRational, hi: &BigRational) -> Result<bool> {
        self.open_interval_meets(Frac::try_from_rational(lo)?, Frac::try_from_rational(hi)?)
    }
}
