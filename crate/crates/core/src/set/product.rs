use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::digits::DigitSet;
use crate::error::{checked_power, Error, Result, MAX_ENUMERATION};

/// The `d`-fold product `K = K_1 x ... x K_d` with a shared base.
///
/// The `N = prod N_i` maps of the product system are indexed by symbols
/// `0..N` in mixed radix, coordinate 0 most significant. Symbol 0 is the map
/// using the smallest digit in every coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProductSetSpec", into = "ProductSetSpec")]
pub struct ProductSet {
    base: u32,
    coords: Vec<DigitSet>,
    count: u64,
    strides: Vec<u64>,
}

/// Wire form: `{"base": b, "coords": [[digits...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductSetSpec {
    pub base: u32,
    pub coords: Vec<Vec<u32>>,
}

impl TryFrom<ProductSetSpec> for ProductSet {
    type Error = Error;

    fn try_from(spec: ProductSetSpec) -> Result<Self> {
        let coords = spec
            .coords
            .into_iter()
            .map(|digits| DigitSet::new(spec.base, digits))
            .collect::<Result<Vec<_>>>()?;
        ProductSet::new(coords)
    }
}

impl From<ProductSet> for ProductSetSpec {
    fn from(ps: ProductSet) -> Self {
        ProductSetSpec {
            base: ps.base,
            coords: ps.coords.iter().map(|c| c.digits().to_vec()).collect(),
        }
    }
}

impl ProductSet {
    pub fn new(coords: Vec<DigitSet>) -> Result<Self> {
        let Some(first) = coords.first() else {
            return Err(Error::InvalidProductSet("need at least one coordinate".into()));
        };
        let base = first.base();
        if let Some(c) = coords.iter().find(|c| c.base() != base) {
            return Err(Error::InvalidProductSet(format!(
                "mixed bases {base} and {}",
                c.base()
            )));
        }
        let mut strides = vec![1u64; coords.len()];
        let mut count: u64 = 1;
        for (i, c) in coords.iter().enumerate().rev() {
            strides[i] = count;
            count = count
                .checked_mul(c.count() as u64)
                .ok_or_else(|| Error::InvalidProductSet("too many maps".into()))?;
        }
        Ok(ProductSet {
            base,
            coords,
            count,
            strides,
        })
    }

    /// Same digit set in every one of `d` coordinates.
    pub fn uniform(base: u32, digits: &[u32], d: usize) -> Result<Self> {
        let ds = DigitSet::new(base, digits.to_vec())?;
        ProductSet::new(vec![ds; d])
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[DigitSet] {
        &self.coords
    }

    pub fn coord(&self, j: usize) -> &DigitSet {
        &self.coords[j]
    }

    /// Number of maps `N`.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// `log N / log b`.
    pub fn dimension(&self) -> f64 {
        (self.count as f64).ln() / (self.base as f64).ln()
    }

    pub fn coordinate_dimensions(&self) -> Vec<f64> {
        self.coords.iter().map(DigitSet::dimension).collect()
    }

    /// Sup-norm diameter: the largest coordinate diameter.
    pub fn diameter(&self) -> BigRational {
        self.coords
            .iter()
            .map(DigitSet::diameter)
            .max()
            .expect("at least one coordinate")
    }

    /// Digit vector of symbol `s`.
    pub fn symbol_digits(&self, s: usize) -> Vec<u32> {
        self.coords
            .iter()
            .zip(&self.strides)
            .map(|(c, &stride)| {
                let idx = (s as u64 / stride) % c.count() as u64;
                c.digits()[idx as usize]
            })
            .collect()
    }

    /// Inverse of [`ProductSet::symbol_digits`].
    pub fn symbol_for_digits(&self, digits: &[u32]) -> Option<usize> {
        if digits.len() != self.dim() {
            return None;
        }
        let mut s = 0u64;
        for ((c, &stride), &d) in self.coords.iter().zip(&self.strides).zip(digits) {
            let idx = c.digits().binary_search(&d).ok()?;
            s += idx as u64 * stride;
        }
        Some(s as usize)
    }

    /// `N^n`, refusing anything beyond the enumeration guard.
    pub fn word_count(&self, n: u32) -> Result<u64> {
        checked_power(self.count, n, MAX_ENUMERATION, "word enumeration")
    }

    /// All words of length `n` in lexicographic order.
    pub fn words(&self, n: u32) -> Result<impl Iterator<Item = Word> + '_> {
        let total = self.word_count(n)?;
        Ok((0..total).map(move |i| Word::from_index(i, n, self.count)))
    }
}

/// A finite word over the symbol alphabet; symbols are 0-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    /// The `index`-th word of length `n` over an alphabet of size `count`,
    /// first symbol most significant.
    pub fn from_index(mut index: u64, n: u32, count: u64) -> Self {
        let mut symbols = vec![0usize; n as usize];
        for slot in symbols.iter_mut().rev() {
            *slot = (index % count) as usize;
            index /= count;
        }
        Word(symbols)
    }

    /// The word with its first symbol removed.
    pub fn tail(&self) -> Word {
        Word(self.0.get(1..).unwrap_or_default().to_vec())
    }

    pub fn extended(&self, symbol: usize) -> Word {
        let mut v = self.0.clone();
        v.push(symbol);
        Word(v)
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}
