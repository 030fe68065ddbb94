//! Exact construction of missing-digit sets and their product systems.

mod digits;
mod geometry;
mod point;
mod product;

pub use digits::{DigitSet, DigitStream};
pub use geometry::{BadicBox, Frac, IntervalWalk};
pub use point::{GridPoint, PointDigits, PointSpec};
pub use product::{ProductSet, ProductSetSpec, Word};

pub(crate) use geometry::cmp_frac;
