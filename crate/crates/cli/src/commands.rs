//! The analysis subcommands. Each writes its records and returns whether
//! everything it checked held.

use digitfrac::boxcount::{box_count_k_series, empirical_dim_w, slope_fit};
use digitfrac::cover::{cover_count_bound, n0, s0_threshold, upper_sum, CoverCase};
use digitfrac::dims::weighted_term;
use digitfrac::mtp::{candidate_set, dimension_number, kappa_scaling_probe, ls_slope, partition, s_t};
use digitfrac::psi::{classify_sum, condition_iii_check, lebesgue_classifier, monotone_check, phi_limit};
use digitfrac::{rynne_dim, weighted_dim, MtpInstance};
use serde_json::json;

use crate::config::RunConfig;
use crate::output::Output;
use crate::CliError;

pub fn dim(cfg: &RunConfig, out: &mut Output, euclidean: bool) -> Result<bool, CliError> {
    if euclidean {
        let value = rynne_dim(cfg.set.dim(), &cfg.t)?;
        out.record("dim", json!({ "dim": value, "euclidean": true, "d": cfg.set.dim() }))?;
        return Ok(true);
    }
    let closed = weighted_dim(&cfg.set, &cfg.t)?;
    let gammas = cfg.set.coordinate_dimensions();
    let terms: Vec<_> = (0..cfg.set.dim())
        .map(|k| {
            json!({
                "k": k + 1,
                "t_k": cfg.t.as_slice()[k],
                "value": weighted_term(&gammas, cfg.t.as_slice(), k, false),
            })
        })
        .collect();
    out.record(
        "dim",
        json!({
            "dim": closed.value,
            "argmin": closed.argmin.iter().map(|k| k + 1).collect::<Vec<_>>(),
            "gamma": cfg.set.dimension(),
            "terms": terms,
        }),
    )?;
    Ok(true)
}

pub fn mtp(cfg: &RunConfig, out: &mut Output) -> Result<bool, CliError> {
    let inst = match &cfg.mtp.instance {
        Some(i) => i.clone(),
        None => MtpInstance::from_product(&cfg.set, &cfg.t),
    };
    let best = s_t(&inst)?;
    let per_a = candidate_set(&inst)
        .into_iter()
        .map(|a| {
            let p = partition(&inst, a);
            Ok(json!({
                "A": a,
                "value": dimension_number(&inst, a)?,
                "k1": p.k1.iter().map(|k| k + 1).collect::<Vec<_>>(),
                "k2": p.k2.iter().map(|k| k + 1).collect::<Vec<_>>(),
                "k3": p.k3.iter().map(|k| k + 1).collect::<Vec<_>>(),
            }))
        })
        .collect::<Result<Vec<_>, digitfrac::Error>>()?;
    out.record(
        "mtp",
        json!({ "s_t": best.value, "argmin": best.argmin, "candidates": per_a, "instance": inst }),
    )?;
    if let Some(probe) = &cfg.mtp.kappa_probe {
        let report = kappa_scaling_probe(&cfg.set, probe)?;
        out.record("mtp-kappa-probe", serde_json::to_value(report).expect("report serializes"))?;
    }
    Ok(true)
}

pub fn cover(cfg: &RunConfig, out: &mut Output) -> Result<bool, CliError> {
    let (ps, t, psi) = (&cfg.set, &cfg.t, &cfg.psi);
    let k = match cfg.cover.k {
        Some(k) => k,
        None => weighted_dim(ps, t)?.argmin[0],
    };
    let s0 = s0_threshold(ps, t, k)?;
    let start = n0(ps.base(), psi, t, k, cfg.cover.rho)?;
    if start > cfg.guards.max_n0_scan {
        return Err(digitfrac::Error::guard("n0 scan", start, cfg.guards.max_n0_scan).into());
    }
    let end = start + cfg.cover.span;

    let mut chain_checked = 0u64;
    let mut chain_failures = Vec::new();
    for n in start..=end {
        for j in 0..ps.dim() {
            let bound = cover_count_bound(ps, psi, t, n, j, k)?;
            if matches!(bound.case, CoverCase::Refined { .. }) {
                chain_checked += 1;
                if !bound.chain_holds() {
                    chain_failures.push(json!({ "n": n, "j": j + 1, "bound": bound }));
                }
            }
        }
    }

    for (i, &offset) in cfg.cover.s_offsets.iter().enumerate() {
        let s = s0 + offset;
        let sum = upper_sum(ps, psi, t, k, s, start, end, cfg.cover.mode)?;
        let half = &sum.log_terms[sum.log_terms.len() / 2..];
        let xs: Vec<f64> = half.iter().map(|p| p.0 as f64).collect();
        let ys: Vec<f64> = half.iter().map(|p| p.1).collect();
        let slope = if xs.len() >= 2 { Some(ls_slope(&xs, &ys)) } else { None };
        let csv = out.csv(
            &format!("scan-{i}"),
            "n,log_term",
            sum.log_terms.iter().map(|(n, v)| format!("{n},{v}")),
        )?;
        out.record(
            "cover",
            json!({
                "k": k + 1,
                "s0": s0,
                "offset": offset,
                "s": s,
                "n0": start,
                "n_max": end,
                "log_sum": sum.log_sum,
                "last_log_term": sum.last_log_term,
                "tail_slope": slope,
                "csv": csv,
            }),
        )?;
    }
    let pass = chain_failures.is_empty();
    out.record(
        "cover-chain",
        json!({ "checked": chain_checked, "pass": pass, "failures": chain_failures }),
    )?;
    Ok(pass)
}

pub fn boxcount(cfg: &RunConfig, out: &mut Output) -> Result<bool, CliError> {
    let ps = &cfg.set;
    if let Some(&m) = cfg.boxcount.levels.iter().max() {
        cfg.check_words(m, "box count of K")?;
    }
    let series = box_count_k_series(ps, cfg.boxcount.levels.iter().copied())?;
    let fit = if series.points.len() >= 3 {
        Some(slope_fit(&series)?)
    } else {
        None
    };
    let csv = out.csv(
        "counts",
        "m,count",
        series.points.iter().map(|(m, c)| format!("{m},{c}")),
    )?;
    out.record(
        "boxcount-k",
        json!({ "gamma": ps.dimension(), "fit": fit, "series": series.points, "csv": csv }),
    )?;

    let x = cfg.point()?;
    let (allowed, refused): (Vec<u32>, Vec<u32>) = cfg
        .boxcount
        .generations
        .iter()
        .partition(|&&n| cfg.check_words(n, "generation").is_ok());
    let mut report = empirical_dim_w(ps, &x, &cfg.psi, &cfg.t, &allowed)?;
    report
        .skipped
        .extend(refused.into_iter().map(|n| (n, format!("N^{n} exceeds guards.max_words"))));
    report.skipped.sort_by_key(|s| s.0);
    let csv = out.csv(
        "exponents",
        "n,exponent",
        report.points.iter().map(|p| format!("{},{}", p.n, p.exponent)),
    )?;
    out.record(
        "boxcount-generations",
        json!({
            "target": report.target,
            "final_gap": report.final_gap(),
            "points": report.points,
            "skipped": report.skipped,
            "csv": csv,
        }),
    )?;
    Ok(true)
}

pub fn series(cfg: &RunConfig, out: &mut Output) -> Result<bool, CliError> {
    let b = cfg.set.base();
    let gamma = cfg.set.dimension();
    let s = cfg.series.s.unwrap_or(gamma);
    let divergence = classify_sum(&cfg.psi, b, s)?;
    let condition = condition_iii_check(&cfg.psi, b, gamma, &cfg.series.eps)?;
    let monotone = monotone_check(&cfg.psi, b, cfg.series.monotone_n_max)?;
    let lebesgue = lebesgue_classifier(cfg.set.dim(), &vec![cfg.psi.clone(); cfg.set.dim()])?;
    out.record(
        "series",
        json!({
            "(ii)": divergence,
            "(iii)": condition.overall,
            "s": s,
            "per_eps": condition.per_eps,
            "monotone": monotone,
            "phi_limit": phi_limit(&cfg.psi),
            "lebesgue": lebesgue,
        }),
    )?;
    Ok(true)
}
