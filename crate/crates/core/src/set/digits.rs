use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, MAX_ENUMERATION};

/// One coordinate of a missing-digit set: the numbers in `[0, 1]` having a
/// base-`b` expansion that only uses digits from `J`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitSet {
    base: u32,
    digits: Vec<u32>,
}

impl DigitSet {
    /// Digits may be given in any order; they are stored sorted. Duplicates,
    /// out-of-range digits and sets with fewer than two or more than `b - 1`
    /// digits are rejected.
    pub fn new(base: u32, digits: impl Into<Vec<u32>>) -> Result<Self> {
        let mut digits = digits.into();
        if base < 3 {
            return Err(Error::InvalidDigitSet(format!("base must be at least 3, got {base}")));
        }
        digits.sort_unstable();
        if digits.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDigitSet(format!("repeated digit in {digits:?}")));
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= base) {
            return Err(Error::InvalidDigitSet(format!("digit {d} out of range for base {base}")));
        }
        if digits.len() < 2 || digits.len() > base as usize - 1 {
            return Err(Error::InvalidDigitSet(format!(
                "need between 2 and {} digits, got {}",
                base - 1,
                digits.len()
            )));
        }
        Ok(DigitSet { base, digits })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn count(&self) -> usize {
        self.digits.len()
    }

    pub fn min_digit(&self) -> u32 {
        self.digits[0]
    }

    pub fn max_digit(&self) -> u32 {
        self.digits[self.digits.len() - 1]
    }

    pub fn has_digit(&self, d: u32) -> bool {
        self.digits.binary_search(&d).is_ok()
    }

    /// Hausdorff dimension `log N_i / log b`.
    pub fn dimension(&self) -> f64 {
        (self.count() as f64).ln() / (self.base as f64).ln()
    }

    /// `(max J - min J) / (b - 1)`: the smallest and largest points of the
    /// set are the constant streams of the extreme digits.
    pub fn diameter(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.max_digit() - self.min_digit()),
            BigInt::from(self.base - 1),
        )
    }

    /// Whether `x` has at least one base-`b` expansion with digits in `J`.
    pub fn contains(&self, x: &BigRational) -> Result<bool> {
        Ok(self.expansion(x)?.is_some())
    }

    /// An eventually periodic expansion of `x` using only allowed digits.
    ///
    /// b-adic rationals have two expansions (terminating, and the one ending
    /// in repeated `b - 1`); both are tried, terminating first.
    pub fn expansion(&self, x: &BigRational) -> Result<Option<DigitStream>> {
        if x.is_negative() || x > &BigRational::one() {
            return Ok(None);
        }
        let b = BigInt::from(self.base);
        let num = x.numer().clone();
        let den = x.denom().clone();

        if let Some(k) = badic_level(&den, self.base) {
            let scale = b.pow(k);
            let p = &num * (&scale / &den);
            let mut candidates = Vec::with_capacity(2);
            if p < scale {
                candidates.push((p.clone(), 0));
            }
            if p.is_positive() {
                candidates.push((&p - 1, self.base - 1));
            }
            for (value, tail) in candidates {
                let prefix = to_digits(&value, self.base, k as usize);
                let stream = DigitStream {
                    prefix,
                    period: vec![tail],
                };
                if stream.uses_only(self) {
                    return Ok(Some(stream));
                }
            }
            return Ok(None);
        }

        // Unique expansion: long division until a remainder repeats. The
        // period divides the order of b modulo the part of den coprime to b.
        let coprime = coprime_part(&den, self.base);
        if coprime.to_u64().filter(|&v| v <= MAX_ENUMERATION).is_none() {
            return Err(Error::guard("expansion period search", &coprime, MAX_ENUMERATION));
        }
        let mut seen: HashMap<BigInt, usize> = HashMap::new();
        let mut digits = Vec::new();
        let mut rem = num;
        loop {
            if let Some(&start) = seen.get(&rem) {
                let period = digits.split_off(start);
                return Ok(Some(DigitStream {
                    prefix: digits,
                    period,
                }));
            }
            seen.insert(rem.clone(), digits.len());
            let (q, r) = (&rem * &b).div_rem(&den);
            let d = q.to_u32().expect("digit below base");
            if !self.has_digit(d) {
                return Ok(None);
            }
            digits.push(d);
            rem = r;
        }
    }
}

/// `den` with every prime factor shared with `b` removed.
fn coprime_part(den: &BigInt, base: u32) -> BigInt {
    let b = BigInt::from(base);
    let mut rest = den.clone();
    loop {
        let g = rest.gcd(&b);
        if g.is_one() {
            return rest;
        }
        rest /= &g;
    }
}

/// Smallest `k` with `den | b^k`, if any.
fn badic_level(den: &BigInt, base: u32) -> Option<u32> {
    if !coprime_part(den, base).is_one() {
        return None;
    }
    let b = BigInt::from(base);
    let mut pow = BigInt::one();
    let mut level = 0;
    while !(&pow % den).is_zero() {
        pow *= &b;
        level += 1;
    }
    Some(level)
}

/// Base-`b` digits of `value`, most significant first, left-padded to `width`.
pub(crate) fn to_digits(value: &BigInt, base: u32, width: usize) -> Vec<u32> {
    let b = BigInt::from(base);
    let mut out = vec![0u32; width];
    let mut v = value.clone();
    for slot in out.iter_mut().rev() {
        let (q, r) = v.div_rem(&b);
        *slot = r.to_u32().unwrap_or(0);
        v = q;
    }
    debug_assert!(v.is_zero(), "value does not fit in {width} digits");
    out
}

/// A finite digit prefix followed by a block repeated forever.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitStream {
    pub prefix: Vec<u32>,
    pub period: Vec<u32>,
}

impl DigitStream {
    pub fn constant(digit: u32) -> Self {
        DigitStream {
            prefix: Vec::new(),
            period: vec![digit],
        }
    }

    pub fn uses_only(&self, set: &DigitSet) -> bool {
        !self.period.is_empty()
            && self
                .prefix
                .iter()
                .chain(&self.period)
                .all(|&d| set.has_digit(d))
    }

    /// `(P + Q / (b^p - 1)) / b^m` for prefix value `P` of length `m` and
    /// period value `Q` of length `p`.
    pub fn value(&self, base: u32) -> BigRational {
        let b = BigInt::from(base);
        let prefix_val = digits_value(&self.prefix, base);
        let period_val = digits_value(&self.period, base);
        let cycle = b.pow(self.period.len() as u32) - 1;
        let scale = b.pow(self.prefix.len() as u32);
        BigRational::new(prefix_val * &cycle + period_val, scale * cycle)
    }
}

pub(crate) fn digits_value(digits: &[u32], base: u32) -> BigInt {
    let b = BigInt::from(base);
    digits
        .iter()
        .fold(BigInt::zero(), |acc, &d| acc * &b + BigInt::from(d))
}
