//! Missing-digit sets in `R^d`, the dimension formulas for weighted
//! approximation inside them, and brute-force oracles for those formulas.

pub mod boxcount;
pub mod cover;
pub mod dims;
pub mod error;
pub mod measure;
pub mod mtp;
pub mod psi;
pub mod random;
pub mod report;
pub mod set;
mod wire;

pub use dims::{rynne_dim, weighted_dim, MinAttained, WeightVector};
pub use error::{Error, Result, MAX_ENUMERATION};
pub use measure::{MassInterval, MeasureMode};
pub use mtp::MtpInstance;
pub use psi::PsiSpec;
pub use report::CheckReport;
pub use set::{BadicBox, DigitSet, DigitStream, Frac, GridPoint, PointDigits, PointSpec, ProductSet, Word};
