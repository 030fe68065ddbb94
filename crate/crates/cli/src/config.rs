//! Run configuration, read from JSON. Every section has defaults, so an
//! empty object (or no file at all) describes the Cantor-square run.

use std::path::Path;

use digitfrac::cover::{TermMode, N0_SCAN_LIMIT};
use digitfrac::mtp::KappaProbeConfig;
use digitfrac::{MtpInstance, PointDigits, PointSpec, ProductSet, PsiSpec, WeightVector, MAX_ENUMERATION};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub set: ProductSet,
    pub t: WeightVector,
    pub psi: PsiSpec,
    /// Base point of the orbit; the fixed point of symbol 0 when absent.
    pub point: Option<PointSpec>,
    pub seed: u64,
    pub guards: Guards,
    pub mtp: MtpSection,
    pub cover: CoverSection,
    pub boxcount: BoxcountSection,
    pub series: SeriesSection,
    pub verify: VerifySection,
}

/// Soft limits, each at most the matching hard cap of the library.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Guards {
    /// Largest `N^n` any command may enumerate.
    pub max_words: u64,
    /// Longest forward scan when searching for `n0`.
    pub max_n0_scan: u32,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MtpSection {
    /// Explicit instance; otherwise built from the set and `t`.
    pub instance: Option<MtpInstance>,
    pub kappa_probe: Option<KappaProbeConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverSection {
    /// Reference index; the minimizing index of the closed form when absent.
    pub k: Option<usize>,
    pub rho: f64,
    /// Offsets from the threshold at which the sum is evaluated.
    pub s_offsets: Vec<f64>,
    /// Number of generations summed after `n0`.
    pub span: u32,
    pub mode: TermMode,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoxcountSection {
    pub levels: Vec<u32>,
    pub generations: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesSection {
    /// Exponent for the divergence test; `dim K` when absent.
    pub s: Option<f64>,
    pub eps: Vec<f64>,
    pub monotone_n_max: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub instances: u32,
    pub max_level: u32,
    pub sandwich_cases: u32,
    pub chain_cases: u32,
    /// Perturbs one cylinder mass so the invariance suite must fail.
    pub inject_corruption: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let set = ProductSet::uniform(3, &[0, 2], 2).expect("Cantor square");
        let gamma = set.dimension();
        RunConfig {
            set,
            t: WeightVector::new(vec![0.0, 1.0]).expect("weights"),
            psi: PsiSpec::Powerlog { c: 1.0, e: 1.0 / gamma },
            point: None,
            seed: 0,
            guards: Guards::default(),
            mtp: MtpSection::default(),
            cover: CoverSection::default(),
            boxcount: BoxcountSection::default(),
            series: SeriesSection::default(),
            verify: VerifySection::default(),
        }
    }
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            max_words: MAX_ENUMERATION,
            max_n0_scan: N0_SCAN_LIMIT,
        }
    }
}

impl Default for CoverSection {
    fn default() -> Self {
        CoverSection {
            k: None,
            rho: 0.5,
            s_offsets: vec![-0.05, 0.0, 0.05],
            span: 60,
            mode: TermMode::Analytic,
        }
    }
}

impl Default for BoxcountSection {
    fn default() -> Self {
        BoxcountSection {
            levels: (1..=8).collect(),
            generations: (3..=8).collect(),
        }
    }
}

impl Default for SeriesSection {
    fn default() -> Self {
        SeriesSection {
            s: None,
            eps: vec![0.0, 0.01, 0.1, 0.5],
            monotone_n_max: 1000,
        }
    }
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            instances: 1000,
            max_level: 4,
            sandwich_cases: 10_000,
            chain_cases: 10_000,
            inject_corruption: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.guards.max_words > MAX_ENUMERATION {
            return Err(CliError::Usage(format!(
                "guards.max_words = {} exceeds the hard cap {MAX_ENUMERATION}",
                self.guards.max_words
            )));
        }
        if self.guards.max_n0_scan > N0_SCAN_LIMIT {
            return Err(CliError::Usage(format!(
                "guards.max_n0_scan = {} exceeds the hard cap {N0_SCAN_LIMIT}",
                self.guards.max_n0_scan
            )));
        }
        if self.t.len() != self.set.dim() {
            return Err(CliError::Usage(format!(
                "t has {} entries but the set has dimension {}",
                self.t.len(),
                self.set.dim()
            )));
        }
        self.psi.validate()?;
        if let Some(k) = self.cover.k {
            if k >= self.set.dim() {
                return Err(CliError::Usage(format!("cover.k = {k} out of range")));
            }
        }
        Ok(())
    }

    pub fn point(&self) -> Result<PointDigits, CliError> {
        Ok(match &self.point {
            Some(spec) => spec.resolve(&self.set)?,
            None => PointDigits::canonical(&self.set),
        })
    }

    /// Refuses when enumerating words of length `n` would pass `max_words`.
    pub fn check_words(&self, n: u32, what: &str) -> Result<(), CliError> {
        let fits = self
            .set
            .count()
            .checked_pow(n)
            .is_some_and(|c| c <= self.guards.max_words);
        if fits {
            Ok(())
        } else {
            Err(digitfrac::Error::guard(
                what,
                format!("{}^{n} words", self.set.count()),
                self.guards.max_words,
            )
            .into())
        }
    }
}
