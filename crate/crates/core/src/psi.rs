//! Approximating functions on the lattice `q = b^n` and classifiers for the
//! series conditions attached to them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Family of `psi`, evaluated only at `q = b^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum PsiSpec {
    /// `psi(q) = q^-c`.
    Power { c: f64 },
    /// `psi(q) = q^-c (log_b q)^-e`.
    Powerlog { c: f64, e: f64 },
    /// Explicit values `(n, psi(b^n))`; nothing is extrapolated.
    Table { values: Vec<(u32, f64)> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesVerdict {
    Divergent,
    Convergent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certainty {
    /// Decided symbolically for every `eps > 0`.
    Proved,
    /// Fails for some `eps > 0`, decided symbolically.
    Refuted,
    /// Only the listed `eps` were tested numerically.
    SampledOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Limit {
    Zero,
    Positive,
    Infinite,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LebesgueVerdict {
    Zero,
    Full,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub pass: bool,
    /// First `n` with `phi(n + 1) > phi(n)`.
    pub fail_at: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsVerdict {
    pub eps: f64,
    pub verdict: SeriesVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub overall: Certainty,
    pub per_eps: Vec<EpsVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LebesgueReport {
    pub verdict: LebesgueVerdict,
    /// `sum_q q^d prod psi_i(q)` on its own.
    pub series: SeriesVerdict,
    /// Product eventually non-increasing and every `psi_i(q) < 1/q` eventually.
    pub hypotheses_hold: bool,
}

/// Relative slack for comparing log values that should coincide.
const LOG_SLACK: f64 = 1e-9;

impl PsiSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PsiSpec::Power { c } | PsiSpec::Powerlog { c, .. } if !(c.is_finite() && *c > 0.0) => {
                Err(Error::InvalidPsi(format!("exponent c = {c} must be positive")))
            }
            PsiSpec::Powerlog { e, .. } if !e.is_finite() => Err(Error::InvalidPsi(format!("log exponent e = {e}"))),
            PsiSpec::Table { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidPsi("empty table".into()));
                }
                if let Some((n, v)) = values.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::InvalidPsi(format!("table value at n = {n} is {v}")));
                }
                let mut ns: Vec<u32> = values.iter().map(|(n, _)| *n).collect();
                ns.sort_unstable();
                if ns.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::InvalidPsi("repeated n in table".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `ln psi(b^n)`; `-inf` when a table value is zero.
    pub fn log_psi(&self, base: u32, n: u32) -> Result<f64> {
        let ln_b = (base as f64).ln();
        match self {
            PsiSpec::Power { c } => Ok(-c * n as f64 * ln_b),
            PsiSpec::Powerlog { c, e } => {
                if n == 0 {
                    return Err(Error::InvalidPsi("powerlog is undefined at q = 1".into()));
                }
                Ok(-c * n as f64 * ln_b - e * (n as f64).ln())
            }
            PsiSpec::Table { values } => values
                .iter()
                .find(|(m, _)| *m == n)
                .map(|(_, v)| v.ln())
                .ok_or_else(|| Error::InvalidPsi(format!("table has no entry for n = {n}"))),
        }
    }

    pub fn psi(&self, base: u32, n: u32) -> Result<f64> {
        Ok(self.log_psi(base, n)?.exp())
    }

    /// `ln phi(n)` with `phi(n) = b^n psi(b^n)`.
    pub fn phi_log(&self, base: u32, n: u32) -> Result<f64> {
        Ok(n as f64 * (base as f64).ln() + self.log_psi(base, n)?)
    }

    /// Levels at which `psi` can be evaluated, in increasing order, up to `n_max`.
    pub fn levels(&self, n_max: u32) -> Vec<u32> {
        match self {
            PsiSpec::Power { .. } => (0..=n_max).collect(),
            PsiSpec::Powerlog { .. } => (1..=n_max).collect(),
            PsiSpec::Table { values } => {
                let mut ns: Vec<u32> = values.iter().map(|(n, _)| *n).filter(|&n| n <= n_max).collect();
                ns.sort_unstable();
                ns
            }
        }
    }

    /// `(c, e)` with `psi(q) = q^-c (log_b q)^-e`, when the family has them.
    fn exponents(&self) -> Option<(f64, f64)> {
        match *self {
            PsiSpec::Power { c } => Some((c, 0.0)),
            PsiSpec::Powerlog { c, e } => Some((c, e)),
            PsiSpec::Table { .. } => None,
        }
    }

    /// Pointwise product. Tables multiply on their common levels and do not
    /// mix with symbolic families.
    pub fn product(&self, other: &PsiSpec) -> Result<PsiSpec> {
        match (self, other) {
            (PsiSpec::Power { c: c1 }, PsiSpec::Power { c: c2 }) => Ok(PsiSpec::Power { c: c1 + c2 }),
            (PsiSpec::Table { values: a }, PsiSpec::Table { values: b }) => Ok(PsiSpec::Table {
                values: a
                    .iter()
                    .filter_map(|(n, x)| b.iter().find(|(m, _)| m == n).map(|(_, y)| (*n, x * y)))
                    .collect(),
            }),
            _ => match (self.exponents(), other.exponents()) {
                (Some((c1, e1)), Some((c2, e2))) => Ok(PsiSpec::Powerlog { c: c1 + c2, e: e1 + e2 }),
                _ => Err(Error::InvalidPsi("cannot multiply a table by a symbolic family".into())),
            },
        }
    }
}

/// Checks `phi(n + 1) <= phi(n)` for consecutive evaluable levels below `n_max`.
pub fn monotone_check(spec: &PsiSpec, base: u32, n_max: u32) -> Result<MonotoneReport> {
    spec.validate()?;
    let levels: Vec<u32> = spec.levels(n_max).into_iter().filter(|&n| n >= 1).collect();
    for pair in levels.windows(2) {
        let (a, b) = (spec.phi_log(base, pair[0])?, spec.phi_log(base, pair[1])?);
        if b > a + LOG_SLACK * a.abs().max(1.0) {
            return Ok(MonotoneReport {
                pass: false,
                fail_at: Some(pair[0]),
            });
        }
    }
    Ok(MonotoneReport { pass: true, fail_at: None })
}

/// Decides `sum_n n^-p` style tails: `sum_n exp(n a) n^-p`.
fn geometric_log_series(growth: f64, log_power: f64) -> SeriesVerdict {
    if growth > 0.0 {
        SeriesVerdict::Divergent
    } else if growth < 0.0 {
        SeriesVerdict::Convergent
    } else if log_power <= 1.0 {
        SeriesVerdict::Divergent
    } else {
        SeriesVerdict::Convergent
    }
}

/// Numeric ratio test on the tail of a tabulated log-term sequence.
fn sampled_verdict(logs: &[(u32, f64)]) -> SeriesVerdict {
    if logs.len() < 3 || logs.iter().any(|(_, v)| v.is_nan()) {
        return SeriesVerdict::Inconclusive;
    }
    let tail = &logs[logs.len() / 2..];
    let (first, last) = (tail[0], tail[tail.len() - 1]);
    if last.1 == f64::NEG_INFINITY {
        return SeriesVerdict::Convergent;
    }
    let slope = (last.1 - first.1) / (last.0 - first.0).max(1) as f64;
    if slope < -1e-6 {
        SeriesVerdict::Convergent
    } else if slope >= 0.0 && last.1 > -1e3 {
        SeriesVerdict::Divergent
    } else {
        SeriesVerdict::Inconclusive
    }
}

/// Classifies `sum_n phi(n)^s`.
pub fn classify_sum(spec: &PsiSpec, base: u32, s: f64) -> Result<SeriesVerdict> {
    spec.validate()?;
    Ok(match spec.exponents() {
        Some((c, e)) => {
            // ln phi(n)^s = s (1 - c) n ln b - s e ln n
            let growth = s * (1.0 - c) * (base as f64).ln();
            geometric_log_series(growth, s * e)
        }
        None => SeriesVerdict::Inconclusive,
    })
}

/// Classifies `sum_n (b^n psi(b^n)^(1 + eps))^gamma` for every `eps` given,
/// with a symbolic verdict over all `eps > 0` when the family allows it.
pub fn condition_iii_check(spec: &PsiSpec, base: u32, gamma: f64, eps_list: &[f64]) -> Result<ConditionReport> {
    spec.validate()?;
    if let Some(eps) = eps_list.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(Error::Precondition(format!("eps = {eps} must be nonnegative")));
    }
    let ln_b = (base as f64).ln();
    match spec.exponents() {
        Some((c, e)) => {
            let per_eps = eps_list
                .iter()
                .map(|&eps| EpsVerdict {
                    eps,
                    verdict: geometric_log_series(gamma * (1.0 - c * (1.0 + eps)) * ln_b, gamma * e * (1.0 + eps)),
                })
                .collect();
            // For c >= 1 the geometric rate 1 - c(1 + eps) is negative for
            // every eps > 0; for c < 1 it is positive for small eps.
            let overall = if c >= 1.0 { Certainty::Proved } else { Certainty::Refuted };
            Ok(ConditionReport { overall, per_eps })
        }
        None => {
            let levels = spec.levels(u32::MAX);
            let per_eps = eps_list
                .iter()
                .map(|&eps| {
                    let logs = levels
                        .iter()
                        .map(|&n| Ok((n, gamma * (n as f64 * ln_b + (1.0 + eps) * spec.log_psi(base, n)?))))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(EpsVerdict {
                        eps,
                        verdict: sampled_verdict(&logs),
                    })
                })
                .collect::<Result<_>>()?;
            Ok(ConditionReport {
                overall: Certainty::SampledOnly,
                per_eps,
            })
        }
    }
}

/// Classifies `sum_q q^d prod_i psi_i(q)` over all integers `q >= 2`.
///
/// A divergent sum gives full measure only under the monotonicity and
/// `psi_i(q) < 1/q` hypotheses, both read as eventual statements.
pub fn lebesgue_classifier(d: usize, specs: &[PsiSpec]) -> Result<LebesgueReport> {
    if specs.len() != d || d == 0 {
        return Err(Error::Precondition(format!("{} functions for d = {d}", specs.len())));
    }
    let mut total_c = 0.0;
    let mut total_e = 0.0;
    let mut below_reciprocal = true;
    for spec in specs {
        spec.validate()?;
        let Some((c, e)) = spec.exponents() else {
            return Ok(LebesgueReport {
                verdict: LebesgueVerdict::Inconclusive,
                series: SeriesVerdict::Inconclusive,
                hypotheses_hold: false,
            });
        };
        total_c += c;
        total_e += e;
        below_reciprocal &= c > 1.0 || (c == 1.0 && e > 0.0);
    }
    // q^(d - C) (log q)^-E: a p-series in q with a logarithmic correction.
    let excess = total_c - d as f64;
    let series = if excess > 1.0 {
        SeriesVerdict::Convergent
    } else if excess < 1.0 {
        SeriesVerdict::Divergent
    } else if total_e > 1.0 {
        SeriesVerdict::Convergent
    } else {
        SeriesVerdict::Divergent
    };
    // total_c > 0 makes the product eventually decreasing.
    let hypotheses_hold = below_reciprocal && total_c > 0.0;
    let verdict = match series {
        SeriesVerdict::Convergent => LebesgueVerdict::Zero,
        SeriesVerdict::Divergent if hypotheses_hold => LebesgueVerdict::Full,
        _ => LebesgueVerdict::Inconclusive,
    };
    Ok(LebesgueReport {
        verdict,
        series,
        hypotheses_hold,
    })
}

/// Behaviour of `b^n psi(b^n)` as `n -> infinity`.
pub fn phi_limit(spec: &PsiSpec) -> Limit {
    match spec.exponents() {
        Some((c, e)) => {
            if c > 1.0 || (c == 1.0 && e > 0.0) {
                Limit::Zero
            } else if c == 1.0 && e == 0.0 {
                Limit::Positive
            } else {
                Limit::Infinite
            }
        }
        None => Limit::Unknown,
    }
}
