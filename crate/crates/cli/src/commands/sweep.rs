use dilab_core::analysis::{
    achievable_rate_lower_bound, bound_table, converse_rate_upper_bound, converse_spacing, empirical_rate,
};
use dilab_core::estimation::{estimate_type1, estimate_type2, estimate_worst_case};
use dilab_core::geometry::distance_sq;
use dilab_core::io::{write_bound_table, write_error_reports, write_table};
use dilab_core::{build_codebook, Codebook, CodebookParams, ErrorReport, Flavor, Schedule, TrialPlan};

use super::{bound_text, channel_model, decoder_delta, echo, rate_bound_text, Context, Report};
use crate::config::SweepConfig;
use crate::error::{Context as _, Result};

pub const SWEEP_FILE: &str = "sweep.csv";
pub const BOUNDS_FILE: &str = "bounds.csv";
pub const ERRORS_FILE: &str = "errors.csv";

const HEADER: [&str; 15] = [
    "n",
    "L",
    "log2_L",
    "saturated",
    "log2_guaranteed",
    "empirical_rate",
    "rate_lower",
    "rate_lower_vacuous",
    "rate_upper",
    "spacing_required_normalized",
    "min_distance_normalized",
    "spacing_pass",
    "p1",
    "p2",
    "closest_pair",
];

/// Indices (1-based) of the two closest codewords.
fn closest_pair(cb: &Codebook) -> Option<(usize, usize)> {
    let words = cb.codewords();
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let d = distance_sq(&words[i], &words[j]);
            if best.is_none_or(|b| d < b.0) {
                best = Some((d, i + 1, j + 1));
            }
        }
    }
    best.map(|b| (b.1, b.2))
}

pub fn sweep(ctx: &Context, cfg: &SweepConfig) -> Result<Report> {
    let mut report = Report::new("sweep", &echo(ctx, true, "sweep", cfg));
    let ch = cfg.channel();
    let plan = TrialPlan::new(ctx.trials, ctx.seed);
    let mut rows = Vec::new();
    let mut reports: Vec<ErrorReport> = Vec::new();
    let mut rate_failures = Vec::new();

    for &n in &cfg.ns {
        let params = CodebookParams {
            n,
            power: cfg.power,
            b: cfg.b,
            schedule: cfg.schedule,
            seed: ctx.seed,
            patience: cfg.patience,
            max_codewords: cfg.max_codewords,
        };
        let key = format!("sweep.ns[n = {n}]");
        let cb = build_codebook(&params).param(&key)?;
        let model = channel_model("sweep", &ch, cb.power)?;
        let delta = decoder_delta("sweep", &ch, &model, cb.epsilon)?;
        let grid = model.fading.grid(ch.grid_resolution);
        let estimate = |i: usize, j: Option<usize>| -> dilab_core::Result<Vec<ErrorReport>> {
            match (model.flavor, j) {
                (Flavor::Fast, None) => Ok(vec![estimate_type1(&cb, &model, i, delta, &plan)?]),
                (Flavor::Fast, Some(j)) => Ok(vec![estimate_type2(&cb, &model, i, j, delta, &plan)?]),
                (Flavor::Slow, j) => {
                    let wc = estimate_worst_case(&cb, &model, i, j, delta, &grid, &plan)?;
                    let mut points = wc.points;
                    // Worst point first so the per-n summary reads it directly.
                    points.insert(0, wc.worst);
                    Ok(points)
                }
            }
        };
        let pair = closest_pair(&cb);
        let type1 = estimate(pair.map_or(1, |p| p.0), None).param(&key)?;
        let type2 = match pair {
            Some((i, j)) => Some(estimate(i, Some(j)).param(&key)?),
            None => None,
        };

        let rate = empirical_rate(&cb);
        let lower = achievable_rate_lower_bound(n as f64, cfg.b);
        let upper = converse_rate_upper_bound(n as f64, cfg.b);
        let spacing = converse_spacing(&cb, cfg.b).ok();
        if cb.saturated && cfg.schedule == Schedule::Achievability && lower > 0.0 && rate < lower {
            rate_failures.push(format!("n = {n}: {rate:.6} < {lower:.6}"));
        }
        let p1 = &type1[0];
        let p2 = type2.as_ref().map(|t| &t[0]);
        report.line(format!(
            "n = {n:>5}: L = {}, rate = {rate:.6}, bounds [{}, {upper:.6}], p1 = {:.4} (bound {}), p2 = {}",
            cb.len(),
            rate_bound_text(lower),
            p1.estimate,
            bound_text(p1.bound),
            p2.map_or("n/a".to_string(), |r| format!(
                "{:.4} (bound {})",
                r.estimate,
                bound_text(r.bound)
            )),
        ));
        rows.push(vec![
            n.to_string(),
            cb.len().to_string(),
            cb.log2_len().to_string(),
            cb.saturated.to_string(),
            params.log2_guaranteed_size().to_string(),
            rate.to_string(),
            lower.to_string(),
            if lower <= 0.0 { "vacuous".into() } else { String::new() },
            upper.to_string(),
            spacing
                .as_ref()
                .map(|s| s.required_normalized.to_string())
                .unwrap_or_default(),
            spacing
                .as_ref()
                .map(|s| s.achieved_normalized.to_string())
                .unwrap_or_default(),
            spacing.as_ref().map(|s| s.pass.to_string()).unwrap_or_default(),
            p1.estimate.to_string(),
            p2.map(|r| r.estimate.to_string()).unwrap_or_default(),
            pair.map(|(i, j)| format!("{i}-{j}")).unwrap_or_default(),
        ]);
        let skip = usize::from(model.flavor == Flavor::Slow);
        reports.extend(type1.into_iter().skip(skip));
        if let Some(t) = type2 {
            reports.extend(t.into_iter().skip(skip));
        }
    }

    ctx.out
        .csv(SWEEP_FILE, |w| write_table(w, &HEADER, rows.iter().cloned()))?;
    let ns: Vec<f64> = cfg.ns.iter().map(|&n| n as f64).collect();
    let bounds = bound_table(&ns, cfg.b);
    ctx.out.csv(BOUNDS_FILE, |w| write_bound_table(w, &bounds))?;
    ctx.out.csv(ERRORS_FILE, |w| write_error_reports(w, &reports))?;

    let violations = reports.iter().filter(|r| r.respects_bound() == Some(false)).count();
    let checked = reports.iter().filter(|r| r.respects_bound().is_some()).count();
    report.check(
        "chebyshev_bound",
        violations == 0,
        format!("{violations} of {checked} estimates with a bound <= 1 exceed bound + 3 stderr"),
    );
    report.check(
        "rate_lower_bound",
        rate_failures.is_empty(),
        if rate_failures.is_empty() {
            "saturated achievability codebooks meet the rate lower bound wherever it is positive".to_string()
        } else {
            rate_failures.join("; ")
        },
    );
    let crossed: Vec<String> = bounds
        .iter()
        .filter(|r| !(r.lower < r.upper))
        .map(|r| r.n.to_string())
        .collect();
    report.check(
        "bounds_ordered",
        crossed.is_empty(),
        if crossed.is_empty() {
            "lower rate bound below upper at every n".to_string()
        } else {
            format!("crossed at n = {}", crossed.join(", "))
        },
    );
    Ok(report)
}
