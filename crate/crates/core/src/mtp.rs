//! The dimension number of the mass transference principle for rectangles,
//! evaluated for arbitrary exponents, plus an empirical check of the scaling
//! property of point resonant sets.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dims::{min_with_ties, weighted_dim, WeightVector, TIE_TOLERANCE};
use crate::error::{Error, Result};
use crate::measure::{ball_mass, ratio_to_f64, MeasureMode};
use crate::set::{ProductSet, Word};

/// `delta` are the Ahlfors exponents, `a` the base exponents, `t` the extra
/// shrinking, `kappa` the scaling exponent of the resonant sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MtpInstance {
    pub delta: Vec<f64>,
    pub a: Vec<f64>,
    pub t: Vec<f64>,
    pub kappa: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub big_a: f64,
    pub k1: Vec<usize>,
    pub k2: Vec<usize>,
    pub k3: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionNumber {
    pub value: f64,
    /// Every `A` in the candidate set attaining the minimum.
    pub argmin: Vec<f64>,
}

impl MtpInstance {
    pub fn validate(&self) -> Result<()> {
        let d = self.delta.len();
        if d == 0 || self.a.len() != d || self.t.len() != d {
            return Err(Error::InvalidInstance(format!(
                "lengths delta={}, a={}, t={} must agree and be positive",
                d,
                self.a.len(),
                self.t.len()
            )));
        }
        let bad = |name: &str, v: &[f64], ok: fn(f64) -> bool| {
            v.iter()
                .position(|&x| !x.is_finite() || !ok(x))
                .map(|i| Error::InvalidInstance(format!("{name}[{i}] = {} out of range", v[i])))
        };
        if let Some(e) = bad("delta", &self.delta, |x| x > 0.0)
            .or_else(|| bad("a", &self.a, |x| x > 0.0))
            .or_else(|| bad("t", &self.t, |x| x >= 0.0))
        {
            return Err(e);
        }
        if !(0.0..1.0).contains(&self.kappa) {
            return Err(Error::InvalidInstance(format!("kappa = {} not in [0, 1)", self.kappa)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.delta.len()
    }

    /// Instance induced by a product set: `delta = gamma_i`, `a = 1`, `kappa = 0`.
    pub fn from_product(ps: &ProductSet, t: &WeightVector) -> Self {
        MtpInstance {
            delta: ps.coordinate_dimensions(),
            a: vec![1.0; ps.dim()],
            t: t.as_slice().to_vec(),
            kappa: 0.0,
        }
    }
}

/// `{a_i, a_i + t_i}`, sorted, exact duplicates removed.
pub fn candidate_set(inst: &MtpInstance) -> Vec<f64> {
    let mut values: Vec<f64> = inst
        .a
        .iter()
        .zip(&inst.t)
        .flat_map(|(&a, &t)| [a, a + t])
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
}

pub fn partition(inst: &MtpInstance, big_a: f64) -> Partition {
    let mut p = Partition {
        big_a,
        k1: Vec::new(),
        k2: Vec::new(),
        k3: Vec::new(),
    };
    for k in 0..inst.dim() {
        if inst.a[k] >= big_a {
            p.k1.push(k);
        } else if inst.a[k] + inst.t[k] <= big_a {
            p.k2.push(k);
        } else {
            p.k3.push(k);
        }
    }
    p
}

pub fn dimension_number(inst: &MtpInstance, big_a: f64) -> Result<f64> {
    inst.validate()?;
    if !candidate_set(inst).contains(&big_a) {
        return Err(Error::Precondition(format!("A = {big_a} is not a candidate value")));
    }
    Ok(evaluate(inst, &partition(inst, big_a)))
}

fn evaluate(inst: &MtpInstance, p: &Partition) -> f64 {
    debug_assert_eq!(p.k1.len() + p.k2.len() + p.k3.len(), inst.dim());
    let sum = |ks: &[usize], f: &dyn Fn(usize) -> f64| ks.iter().map(|&k| f(k)).sum::<f64>();
    let delta = |k: usize| inst.delta[k];
    sum(&p.k1, &delta)
        + sum(&p.k2, &delta)
        + inst.kappa * sum(&p.k3, &delta)
        + (1.0 - inst.kappa)
            * (sum(&p.k3, &|k| inst.a[k] * inst.delta[k]) - sum(&p.k2, &|k| inst.t[k] * inst.delta[k]))
            / p.big_a
}

/// Minimum of the dimension number over the candidate set.
pub fn s_t(inst: &MtpInstance) -> Result<DimensionNumber> {
    inst.validate()?;
    let candidates = candidate_set(inst);
    let values: Vec<f64> = candidates
        .iter()
        .map(|&a| evaluate(inst, &partition(inst, a)))
        .collect();
    let m = min_with_ties(&values);
    Ok(DimensionNumber {
        value: m.value,
        argmin: m.argmin.iter().map(|&i| candidates[i]).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub pass: bool,
    pub general: f64,
    pub closed_form: f64,
    pub general_argmin: Vec<f64>,
    /// `1 + t_k` for every minimizing index `k` of the closed form.
    pub closed_form_argmin: Vec<f64>,
}

/// Compares the general dimension number at `delta = gamma_i`, `a = 1`,
/// `kappa = 0` with the closed form, including which `A` attains it.
pub fn closed_form_equiv(ps: &ProductSet, t: &WeightVector) -> Result<EquivalenceReport> {
    let general = s_t(&MtpInstance::from_product(ps, t))?;
    let closed = weighted_dim(ps, t)?;
    let mut closed_argmin: Vec<f64> = closed.argmin.iter().map(|&k| 1.0 + t.as_slice()[k]).collect();
    closed_argmin.sort_by(f64::total_cmp);
    closed_argmin.dedup();
    let same_argmin = general.argmin.len() == closed_argmin.len()
        && general
            .argmin
            .iter()
            .zip(&closed_argmin)
            .all(|(x, y)| (x - y).abs() <= TIE_TOLERANCE);
    Ok(EquivalenceReport {
        pass: (general.value - closed.value).abs() <= 1e-12 && same_argmin,
        general: general.value,
        closed_form: closed.value,
        general_argmin: general.argmin,
        closed_form_argmin: closed_argmin,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KappaProbeConfig {
    pub samples: usize,
    pub eps_min: f64,
    pub eps_max: f64,
    /// Number of log-spaced neighbourhood radii.
    pub scales: usize,
    /// Ball radius as a multiple of `eps_max`, kept above every `eps`.
    pub r_factor: f64,
    pub seed: u64,
}

impl Default for KappaProbeConfig {
    fn default() -> Self {
        KappaProbeConfig {
            samples: 16,
            eps_min: 3f64.powi(-10),
            eps_max: 3f64.powi(-4),
            scales: 7,
            r_factor: 3.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaCoordinate {
    pub coordinate: usize,
    pub expected: f64,
    /// Fitted exponent of `eps` in `mu_i(B(c, r) ∩ B(c, eps))`.
    pub eps_exponent: f64,
    /// Fitted exponent of `r` at fixed `eps < r`.
    pub r_exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaReport {
    pub kappa: f64,
    pub coordinates: Vec<KappaCoordinate>,
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn to_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite radius")
}

/// Mean log mass of `B(c, eps)` over the sampled resonant points in one
/// coordinate; the ball `B(c, r)` with `r >= eps` contributes nothing extra.
fn mean_log_mass(coord: &ProductSet, centers: &[crate::set::PointDigits], r: f64, eps: f64) -> Result<f64> {
    let radius = to_rational(r.min(eps));
    let depth = (-(r.min(eps)).ln() / (coord.base() as f64).ln()).ceil().max(0.0) as u32 + 4;
    let logs = centers
        .par_iter()
        .map(|c| Ok(ball_mass(coord, c, &radius, depth, MeasureMode::Product)?.midpoint().ln()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(logs.iter().sum::<f64>() / logs.len() as f64)
}

/// Empirical scaling exponents of point resonant sets.
///
/// Resonant points are orbit points `g_w(x)` for random words `w`; the fitted
/// `eps` exponent should approach the coordinate dimension and the `r`
/// exponent zero, matching `kappa = 0`.
pub fn kappa_scaling_probe(ps: &ProductSet, cfg: &KappaProbeConfig) -> Result<KappaReport> {
    if cfg.samples == 0 || cfg.scales < 2 || !(cfg.eps_min > 0.0 && cfg.eps_min < cfg.eps_max) || cfg.r_factor < 1.0 {
        return Err(Error::Precondition("empty or degenerate eps grid".into()));
    }
    let diam = ratio_to_f64(&ps.diameter());
    let r = (cfg.eps_max * cfg.r_factor).min(diam);
    if r < cfg.eps_max {
        return Err(Error::Precondition(format!("eps_max {} exceeds diam(K) = {diam}", cfg.eps_max)));
    }
    let (lo, hi) = (cfg.eps_min.ln(), cfg.eps_max.ln());
    let grid: Vec<f64> = (0..cfg.scales)
        .map(|i| (lo + (hi - lo) * i as f64 / (cfg.scales - 1) as f64).exp())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let depth = (-cfg.eps_min.ln() / (ps.base() as f64).ln()).ceil() as u32 + 2;
    let mut coordinates = Vec::with_capacity(ps.dim());
    for (j, ds) in ps.coords().iter().enumerate() {
        let coord = ProductSet::new(vec![ds.clone()])?;
        let centers: Vec<_> = (0..cfg.samples)
            .map(|_| {
                let level = rng.gen_range(0..depth);
                let x = crate::set::PointDigits::canonical(&coord);
                let w = Word((0..level).map(|_| rng.gen_range(0..coord.count() as usize)).collect());
                coord.apply_word_digits(&w, &x)
            })
            .collect::<Result<_>>()?;
        let eps_logs: Vec<f64> = grid.iter().map(|e| e.ln()).collect();
        let eps_mass: Vec<f64> = grid
            .iter()
            .map(|&e| mean_log_mass(&coord, &centers, r, e))
            .collect::<Result<_>>()?;
        let eps_fixed = cfg.eps_min;
        let r_grid: Vec<f64> = grid.iter().map(|&x| x * cfg.r_factor).filter(|&x| x <= diam && x > eps_fixed).collect();
        let r_exponent = if r_grid.len() >= 2 {
            let r_mass: Vec<f64> = r_grid
                .iter()
                .map(|&rr| mean_log_mass(&coord, &centers, rr, eps_fixed))
                .collect::<Result<_>>()?;
            ls_slope(&r_grid.iter().map(|x| x.ln()).collect::<Vec<_>>(), &r_mass)
        } else {
            0.0
        };
        coordinates.push(KappaCoordinate {
            coordinate: j,
            expected: ds.dimension(),
            eps_exponent: ls_slope(&eps_logs, &eps_mass),
            r_exponent,
        });
    }
    Ok(KappaReport { kappa: 0.0, coordinates })
}
