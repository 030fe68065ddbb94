use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::digits::DigitStream;
use super::product::ProductSet;
use crate::error::{Error, Result};

/// An exact element of `K`: one eventually periodic digit stream per
/// coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointDigits(pub Vec<DigitStream>);

impl PointDigits {
    /// Fixed point of symbol 0: every coordinate repeats its smallest digit.
    pub fn canonical(ps: &ProductSet) -> Self {
        PointDigits(
            ps.coords()
                .iter()
                .map(|c| DigitStream::constant(c.min_digit()))
                .collect(),
        )
    }

    pub fn streams(&self) -> &[DigitStream] {
        &self.0
    }

    pub fn validate(&self, ps: &ProductSet) -> Result<()> {
        if self.0.len() != ps.dim() {
            return Err(Error::InvalidPoint(format!(
                "point has {} coordinates, set has {}",
                self.0.len(),
                ps.dim()
            )));
        }
        for (j, (stream, ds)) in self.0.iter().zip(ps.coords()).enumerate() {
            if stream.period.is_empty() {
                return Err(Error::InvalidPoint(format!("coordinate {j}: empty period")));
            }
            if !stream.uses_only(ds) {
                return Err(Error::InvalidPoint(format!(
                    "coordinate {j}: digits outside {:?}",
                    ds.digits()
                )));
            }
        }
        Ok(())
    }

    pub fn value(&self, base: u32) -> Vec<BigRational> {
        self.0.iter().map(|s| s.value(base)).collect()
    }

    /// Finds digit streams for a grid point, checking both expansions of
    /// each coordinate.
    pub fn from_grid(ps: &ProductSet, point: &GridPoint) -> Result<Self> {
        let values = point.values(ps.base());
        if values.len() != ps.dim() {
            return Err(Error::InvalidPoint("dimension mismatch".into()));
        }
        let streams = values
            .iter()
            .zip(ps.coords())
            .enumerate()
            .map(|(j, (x, ds))| {
                ds.expansion(x)?
                    .ok_or_else(|| Error::InvalidPoint(format!("coordinate {j} = {x} is not in K_{j}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PointDigits(streams))
    }
}

/// A point `p / b^n` with integer numerators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPoint {
    #[serde(with = "crate::wire::bigint_vec")]
    pub num: Vec<BigInt>,
    pub den_pow: u32,
}

impl GridPoint {
    pub fn values(&self, base: u32) -> Vec<BigRational> {
        let den = BigInt::from(base).pow(self.den_pow);
        self.num
            .iter()
            .map(|p| BigRational::new(p.clone(), den.clone()))
            .collect()
    }
}

/// Either wire form of a point.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Grid(GridPoint),
    Streams(PointDigits),
}

impl PointSpec {
    pub fn resolve(&self, ps: &ProductSet) -> Result<PointDigits> {
        let point = match self {
            PointSpec::Grid(g) => PointDigits::from_grid(ps, g)?,
            PointSpec::Streams(p) => p.clone(),
        };
        point.validate(ps)?;
        Ok(point)
    }
}
