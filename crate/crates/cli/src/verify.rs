//! The verification suites run by `verify`. Random cases are drawn
//! sequentially from per-suite streams and evaluated in parallel, so the
//! report does not depend on the thread count.

use digitfrac::cover::{cover_count_bound, s0_threshold, u_of, u_sandwich_exact, v_of, v_sandwich_exact, CoverCase};
use digitfrac::measure::{cylinder_mass, invariance_check, invariance_check_with, product_equals_selfsimilar};
use digitfrac::mtp::closed_form_equiv;
use digitfrac::{random, weighted_dim, CheckReport, MeasureMode, ProductSet, PsiSpec, WeightVector, Word};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

fn stream(seed: u64, suite: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite);
    rng
}

/// Evaluates every case and reports the first failure in draw order.
fn run_cases<C, F>(name: &str, cases: Vec<C>, check: F) -> Result<CheckReport, CliError>
where
    C: Sync,
    F: Fn(&C) -> Result<Option<Value>, digitfrac::Error> + Sync,
{
    let outcomes = cases.par_iter().map(&check).collect::<Result<Vec<_>, _>>()?;
    let checked = cases.len() as u64;
    Ok(match outcomes.into_iter().flatten().next() {
        Some(ce) => CheckReport::failed(name, checked, ce),
        None => CheckReport::passed(name, checked),
    })
}

fn random_instances(rng: &mut ChaCha8Rng, count: u32) -> Vec<(ProductSet, WeightVector)> {
    (0..count)
        .map(|_| {
            let ps = random::product_set(rng, 4, 10);
            let t = random::weights(rng, ps.dim(), 5.0);
            (ps, t)
        })
        .collect()
}

fn closed_form(cfg: &RunConfig) -> Result<CheckReport, CliError> {
    let cases = random_instances(&mut stream(cfg.seed, 1), cfg.verify.instances);
    run_cases("closed-form-equivalence", cases, |(ps, t)| {
        let r = closed_form_equiv(ps, t)?;
        Ok((!r.pass).then(|| json!({ "set": ps, "t": t, "report": r })))
    })
}

fn thresholds(cfg: &RunConfig) -> Result<CheckReport, CliError> {
    let cases = random_instances(&mut stream(cfg.seed, 2), cfg.verify.instances);
    run_cases("threshold-minimum", cases, |(ps, t)| {
        let closed = weighted_dim(ps, t)?.value;
        let mut min = f64::INFINITY;
        for k in 0..ps.dim() {
            min = min.min(s0_threshold(ps, t, k)?);
        }
        Ok(((min - closed).abs() > 1e-12).then(|| json!({ "set": ps, "t": t, "min_s0": min, "dim": closed })))
    })
}

fn invariance(cfg: &RunConfig) -> Result<Vec<CheckReport>, CliError> {
    let ps = &cfg.set;
    let level = cfg.verify.max_level;
    let mut reports = Vec::new();
    if cfg.verify.inject_corruption {
        let first = Word(vec![0]);
        let corrupted = |w: &Word| {
            let m = cylinder_mass(ps, w);
            if *w == first {
                m * BigRational::from_integer(2.into())
            } else {
                m
            }
        };
        let mut r = invariance_check_with(ps, level, corrupted)?;
        r.name = "invariance-corrupted".into();
        reports.push(r);
    }
    for (mode, name) in [(MeasureMode::SelfSimilar, "invariance-self-similar"), (MeasureMode::Product, "invariance-product")] {
        let mut r = invariance_check(ps, level, mode)?;
        r.name = name.into();
        reports.push(r);
    }
    reports.push(product_equals_selfsimilar(ps, level)?);
    Ok(reports)
}

/// `psi(q) = q^-c` with integer `c` and rational weights, so both
/// sandwiches are decided by exact integer comparisons.
fn sandwiches(cfg: &RunConfig) -> Result<CheckReport, CliError> {
    let mut rng = stream(cfg.seed, 3);
    let cases: Vec<(u32, u64, u32, [u64; 4])> = (0..cfg.verify.sandwich_cases)
        .map(|_| {
            let base = rng.gen_range(3..=10u32);
            let c = rng.gen_range(1..=3u64);
            let n = rng.gen_range(1..=12u32);
            let (qj, qk) = (rng.gen_range(1..=6u64), rng.gen_range(1..=6u64));
            let (pj, pk) = (rng.gen_range(0..=5 * qj), rng.gen_range(0..=5 * qk));
            (base, c, n, [pj, qj, pk, qk])
        })
        .collect();
    run_cases("u-v-sandwich", cases, |&(base, c, n, [pj, qj, pk, qk])| {
        let t = WeightVector::new(vec![pj as f64 / qj as f64, pk as f64 / qk as f64])?;
        let psi = PsiSpec::Power { c: c as f64 };
        let m = c * n as u64;
        let u = u_of(base, &psi, &t, n, 0)?;
        let case = v_of(base, &psi, &t, n, 0, 1)?;
        let ok = u_sandwich_exact(base, m, pj, qj, u)
            && match case {
                CoverCase::Single => pj * qk >= pk * qj,
                CoverCase::Refined { u: ur, v } => ur == u && v_sandwich_exact(m, pk, qk, u, v),
            };
        Ok((!ok).then(|| json!({ "base": base, "c": c, "n": n, "t_j": [pj, qj], "t_k": [pk, qk], "u": u, "case": case })))
    })
}

fn chains(cfg: &RunConfig) -> Result<CheckReport, CliError> {
    let mut rng = stream(cfg.seed, 4);
    let mut cases = Vec::with_capacity(cfg.verify.chain_cases as usize);
    while cases.len() < cfg.verify.chain_cases as usize {
        let base = rng.gen_range(3..=10u32);
        let coords = (0..2).map(|_| random::digit_set(&mut rng, base)).collect();
        let ps = ProductSet::new(coords)?;
        let psi = if rng.gen_bool(0.5) {
            PsiSpec::Power { c: rng.gen_range(0.5..1.5) }
        } else {
            PsiSpec::Powerlog { c: rng.gen_range(0.5..1.5), e: rng.gen_range(-1.0..2.0) }
        };
        let n = rng.gen_range(2..=10u32);
        let t = WeightVector::new(vec![rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)])?;
        if psi.log_b_psi(base, n)? < 0.0 {
            cases.push((ps, psi, n, t));
        }
    }
    run_cases("cover-chain", cases, |(ps, psi, n, t)| {
        let bound = cover_count_bound(ps, psi, t, *n, 0, 1)?;
        Ok((!bound.chain_holds()).then(|| json!({ "set": ps, "psi": psi, "n": n, "t": t, "bound": bound })))
    })
}

/// Runs every suite; the summary lists them in a fixed order.
pub fn run_all(cfg: &RunConfig) -> Result<Vec<CheckReport>, CliError> {
    cfg.check_words(cfg.verify.max_level, "verify max_level")?;
    let mut reports = vec![closed_form(cfg)?, thresholds(cfg)?];
    reports.extend(invariance(cfg)?);
    reports.push(sandwiches(cfg)?);
    reports.push(chains(cfg)?);
    Ok(reports)
}
