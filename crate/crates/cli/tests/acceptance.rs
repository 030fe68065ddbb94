//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use digitfrac::boxcount::{box_count_k_series, empirical_dim_w, slope_fit, CountSeries};
use digitfrac::cover::{n0, s0_threshold, upper_sum, TermMode};
use digitfrac::measure::{cylinder_mass, invariance_check, product_cylinder_mass, product_equals_selfsimilar};
use digitfrac::mtp::closed_form_equiv;
use digitfrac::psi::{classify_sum, condition_iii_check, monotone_check, Certainty, SeriesVerdict};
use digitfrac::{random, rynne_dim, weighted_dim, MeasureMode, PointDigits, ProductSet, PsiSpec, WeightVector};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn w(t: &[f64]) -> WeightVector {
    WeightVector::new(t.to_vec()).unwrap()
}

fn cantor_square() -> ProductSet {
    ProductSet::uniform(3, &[0, 2], 2).unwrap()
}

fn within(budget: Duration, start: Instant, detail: String) -> Outcome {
    let spent = start.elapsed();
    if spent <= budget {
        Ok(format!("{detail}, {:.2}s", spent.as_secs_f64()))
    } else {
        Err(format!("{detail}, but took {:.2}s (budget {}s)", spent.as_secs_f64(), budget.as_secs()))
    }
}

fn formula_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let ps = random::product_set(&mut rng, 4, 10);
        let t = random::weights(&mut rng, ps.dim(), 5.0);
        let r = closed_form_equiv(&ps, &t).map_err(|e| e.to_string())?;
        if !r.pass {
            return Err(format!("instance {i}: {r:?}"));
        }
        worst = worst.max((r.general - r.closed_form).abs());
    }
    within(Duration::from_secs(5), start, format!("1000 instances, max |diff| = {worst:.1e}"))
}

fn known_values() -> Outcome {
    let cantor = ProductSet::uniform(3, &[0, 2], 1).unwrap();
    let corners = ProductSet::uniform(4, &[0, 3], 2).unwrap();
    let checks = [
        ("dim K_3{0,2}", cantor.dimension(), 2f64.ln() / 3f64.ln(), 1e-12),
        ("dim K_4{0,3}^2", corners.dimension(), 1.0, 1e-12),
        ("four-corner t=(0,1)", weighted_dim(&corners, &w(&[0.0, 1.0])).unwrap().value, 0.75, 1e-12),
        ("Cantor square t=(0,1)", weighted_dim(&cantor_square(), &w(&[0.0, 1.0])).unwrap().value, 0.9463946304, 1e-9),
    ];
    for (name, got, want, tol) in checks {
        if (got - want).abs() > tol {
            return Err(format!("{name}: {got} vs {want}"));
        }
    }
    let euclidean = rynne_dim(2, &w(&[0.0, 1.0])).map_err(|e| e.to_string())?;
    if euclidean != 2.0 {
        return Err(format!("euclidean d=2 t=(0,1): {euclidean}"));
    }
    Ok("5 values".into())
}

fn box_count_oracle() -> Outcome {
    let start = Instant::now();
    let mut detail = Vec::new();
    for ps in [cantor_square(), ProductSet::uniform(4, &[0, 3], 2).unwrap(), ProductSet::uniform(3, &[0, 2], 1).unwrap()] {
        let mut top = 0;
        while ps.count().pow(top + 1) <= 10_000_000 {
            top += 1;
        }
        let series = box_count_k_series(&ps, 0..=top).map_err(|e| e.to_string())?;
        for &(m, got) in &series.points {
            if got != ps.count().pow(m) as u128 {
                return Err(format!("{ps:?} m={m}: {got}"));
            }
        }
        let positive = CountSeries { base: series.base, points: series.points[1..].to_vec() };
        let fit = slope_fit(&positive).map_err(|e| e.to_string())?;
        if (fit.slope - ps.dimension()).abs() > 1e-9 || fit.stderr >= 1e-9 {
            return Err(format!("{ps:?}: {fit:?}"));
        }
        let m = top + 1;
        detail.push(format!("N={} m<={}", ps.count(), m - 1));
    }
    within(Duration::from_secs(30), start, detail.join(", "))
}

fn cover_construction() -> Outcome {
    let cfg = digitfrac_cli::config::RunConfig::default();
    let sandwich = digitfrac_cli::verify::run_all(&cfg).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for name in ["u-v-sandwich", "cover-chain"] {
        let r = sandwich.iter().find(|r| r.name == name).unwrap();
        if !r.pass || r.checked < 10_000 {
            return Err(format!("{name}: {r:?}"));
        }
        parts.push(format!("{name} {}", r.checked));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..500 {
        let ps = random::product_set(&mut rng, 4, 10);
        let t = random::weights(&mut rng, ps.dim(), 5.0);
        let min = (0..ps.dim()).map(|k| s0_threshold(&ps, &t, k).unwrap()).fold(f64::INFINITY, f64::min);
        let closed = weighted_dim(&ps, &t).unwrap().value;
        if (min - closed).abs() > 1e-12 {
            return Err(format!("threshold instance {i}: {min} vs {closed}"));
        }
    }
    parts.push("min s0 = dim on 500".into());
    Ok(parts.join(", "))
}

/// Index after which the log-terms satisfy `ok` between neighbours, if that
/// happens within the first half of the window.
fn settles(terms: &[(u32, f64)], ok: impl Fn(f64, f64) -> bool) -> Option<u32> {
    let last_bad = terms.windows(2).rposition(|p| !ok(p[0].1, p[1].1));
    let from = last_bad.map_or(0, |i| i + 1);
    (from <= terms.len() / 2).then(|| terms[from].0)
}

fn upper_sum_dichotomy() -> Outcome {
    let start = Instant::now();
    let ps = cantor_square();
    let t = w(&[0.0, 1.0]);
    let psi = PsiSpec::Powerlog { c: 1.0, e: 1.0 / ps.dimension() };
    let k = weighted_dim(&ps, &t).unwrap().argmin[0];
    let s0 = s0_threshold(&ps, &t, k).unwrap();
    let first = n0(3, &psi, &t, k, 0.5).map_err(|e| e.to_string())?;
    let above = upper_sum(&ps, &psi, &t, k, s0 + 0.05, first, first + 60, TermMode::Analytic).unwrap();
    let below = upper_sum(&ps, &psi, &t, k, s0 - 0.05, first, first + 60, TermMode::Analytic).unwrap();
    let down = settles(&above.log_terms, |a, b| b < a).ok_or("terms above s0 do not settle into decrease")?;
    let up = settles(&below.log_terms, |a, b| b >= a).ok_or("terms below s0 do not settle into growth")?;
    within(
        Duration::from_secs(1),
        start,
        format!("n0 = {first}, decreasing from n = {down} above, non-decreasing from n = {up} below"),
    )
}

fn measure_identities() -> Outcome {
    let start = Instant::now();
    let ps = cantor_square();
    let mut objects = 0;
    for mode in [MeasureMode::SelfSimilar, MeasureMode::Product] {
        let r = invariance_check(&ps, 4, mode).unwrap();
        if !r.pass {
            return Err(format!("invariance {mode:?}: {r:?}"));
        }
        objects += r.checked;
    }
    let r = product_equals_selfsimilar(&ps, 4).unwrap();
    if !r.pass || r.checked < 256 {
        return Err(format!("{r:?}"));
    }
    objects += r.checked;
    for n in 0..=4 {
        let (mut a, mut b) = (BigRational::zero(), BigRational::zero());
        for word in ps.words(n).unwrap() {
            a += cylinder_mass(&ps, &word);
            b += product_cylinder_mass(&ps, &word);
        }
        if !a.is_one() || !b.is_one() {
            return Err(format!("level {n} masses sum to {a} and {b}"));
        }
    }
    within(Duration::from_secs(5), start, format!("{objects} objects exact"))
}

fn empirical_probe() -> Outcome {
    let start = Instant::now();
    let ps = cantor_square();
    let report = empirical_dim_w(
        &ps,
        &PointDigits::canonical(&ps),
        &PsiSpec::Power { c: 1.0 },
        &w(&[0.0, 1.0]),
        &[3, 4, 5, 6, 7, 8],
    )
    .map_err(|e| e.to_string())?;
    let last = report.points.last().ok_or("no generation could be counted")?;
    let gap = (last.exponent - 0.9464).abs();
    let detail = format!("n = {}: exponent {:.4}", last.n, last.exponent);
    if gap >= 0.1 {
        return Err(detail);
    }
    within(Duration::from_secs(120), start, detail)
}

fn series_classifiers() -> Outcome {
    let start = Instant::now();
    let gamma = cantor_square().dimension();
    let psi = PsiSpec::Powerlog { c: 1.0, e: 1.0 / gamma };
    let err = |e: digitfrac::Error| e.to_string();
    if classify_sum(&psi, 3, gamma).map_err(err)? != SeriesVerdict::Divergent {
        return Err("powerlog(1, 1/gamma) not divergent".into());
    }
    let iii = condition_iii_check(&psi, 3, gamma, &[0.0, 0.01, 0.1]).map_err(err)?;
    if iii.overall != Certainty::Proved {
        return Err(format!("condition (iii): {:?}", iii.overall));
    }
    if classify_sum(&PsiSpec::Power { c: 1.2 }, 3, gamma).map_err(err)? != SeriesVerdict::Convergent {
        return Err("power(1.2) not convergent".into());
    }
    if monotone_check(&PsiSpec::Power { c: 0.5 }, 3, 100).map_err(err)?.pass {
        return Err("power(0.5) passes the monotone check".into());
    }
    within(Duration::from_secs(1), start, "4 verdicts".into())
}

fn determinism() -> Outcome {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_digitfrac"))
            .args(["verify", "--threads", threads])
            .output()
            .map_err(|e| e.to_string())
    };
    let (one, eight) = (run("1")?, run("8")?);
    if !one.status.success() || !eight.status.success() {
        return Err(format!("exit codes {:?} / {:?}", one.status.code(), eight.status.code()));
    }
    if one.stdout != eight.stdout {
        return Err("summaries differ".into());
    }
    Ok(format!("{} identical bytes", one.stdout.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("formula equivalence", formula_equivalence),
        ("known values", known_values),
        ("box-count oracle", box_count_oracle),
        ("cover construction", cover_construction),
        ("upper-sum dichotomy", upper_sum_dichotomy),
        ("measure identities", measure_identities),
        ("empirical exponent probe", empirical_probe),
        ("series classifiers", series_classifiers),
        ("determinism across threads", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
