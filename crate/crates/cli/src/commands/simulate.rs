use dilab_core::analysis::classify_regime;
use dilab_core::estimation::{estimate_type1, estimate_type2, estimate_worst_case, random_pairs};
use dilab_core::io::{codebook_to_json, write_error_reports};
use dilab_core::{build_codebook, Codebook, ErrorReport, Flavor, Scale, TrialPlan};

use super::pack::{describe, params, CODEBOOK_FILE};
use super::{bound_text, channel_model, decoder_delta, echo, load_codebook, Context, Report};
use crate::config::{PackConfig, SimulateConfig};
use crate::error::{CliError, Context as _, Result};

pub const ERRORS_FILE: &str = "errors.csv";
const DEFAULT_RANDOM_PAIRS: usize = 4;

/// Estimates for one message (type I) or one ordered pair (type II).
struct Estimate {
    label: String,
    /// One report per gain-grid point (a single report for fast fading).
    points: Vec<ErrorReport>,
    worst: ErrorReport,
}

pub fn simulate(ctx: &Context, cfg: &SimulateConfig, pack_cfg: &PackConfig) -> Result<Report> {
    let mut echoed = echo(ctx, true, "simulate", cfg);
    if cfg.codebook.is_none() {
        if let Ok(v) = toml::Value::try_from(pack_cfg) {
            echoed.insert("pack".into(), v);
        }
    }
    let mut report = Report::new("simulate", &echoed);

    let codebook = match &cfg.codebook {
        Some(path) => load_codebook(path)?,
        None => {
            let p = params(pack_cfg, ctx.seed);
            let cb = build_codebook(&p).param("pack")?;
            ctx.out.write(CODEBOOK_FILE, codebook_to_json(&cb))?;
            report.line(format!("codebook packed inline: {CODEBOOK_FILE}"));
            describe(&mut report, &cb, p.log2_guaranteed_size());
            cb
        }
    };
    if let Some(path) = &cfg.codebook {
        report.line(format!(
            "codebook: {} (n = {}, L = {}, A = {}, b = {}, eps_n = {:.6e})",
            path.display(),
            codebook.n,
            codebook.len(),
            codebook.power,
            codebook.b,
            codebook.epsilon
        ));
    }

    let ch = cfg.channel();
    let model = channel_model("simulate", &ch, codebook.power)?;
    let delta = decoder_delta("simulate", &ch, &model, codebook.epsilon)?;
    let pairs = message_pairs(cfg, &codebook, ctx.seed)?;
    let mut messages: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    messages.sort_unstable();
    messages.dedup();
    if messages.is_empty() {
        messages.push(1);
        report.line("single-codeword codebook: only type I is estimated");
    }
    let grid = match model.flavor {
        Flavor::Fast => Vec::new(),
        Flavor::Slow => model.fading.grid(ch.grid_resolution),
    };
    if model.flavor == Flavor::Slow && grid.is_empty() {
        return Err(CliError::Missing(
            "simulate.grid_resolution (must be at least 1)".into(),
        ));
    }
    report.line(format!(
        "channel: {} fading, family {}, gamma = {}, g_max = {}, sigma2 = {}, delta = {:.6e}, trials = {}",
        model.flavor,
        model.fading.family().name(),
        model.fading.gamma(),
        model.fading.g_max(),
        model.noise_variance,
        delta,
        ctx.trials
    ));
    if model.flavor == Flavor::Slow {
        report.line(format!(
            "worst case over {} grid points in [{}, {}]",
            grid.len(),
            grid[0],
            grid[grid.len() - 1]
        ));
    }

    let plan = TrialPlan::new(ctx.trials, ctx.seed);
    let run = |i: usize, j: Option<usize>| -> Result<Estimate> {
        let label = match j {
            None => format!("type I  i = {i}"),
            Some(j) => format!("type II i = {i} -> j = {j}"),
        };
        let (points, worst) = match model.flavor {
            Flavor::Fast => {
                let r = match j {
                    None => estimate_type1(&codebook, &model, i, delta, &plan),
                    Some(j) => estimate_type2(&codebook, &model, i, j, delta, &plan),
                }
                .param("simulate.pairs")?;
                (vec![r.clone()], r)
            }
            Flavor::Slow => {
                let wc = estimate_worst_case(&codebook, &model, i, j, delta, &grid, &plan).param("simulate.pairs")?;
                (wc.points, wc.worst)
            }
        };
        Ok(Estimate { label, points, worst })
    };
    let mut estimates = Vec::new();
    for &i in &messages {
        estimates.push(run(i, None)?);
    }
    for &(i, j) in &pairs {
        estimates.push(run(i, Some(j))?);
    }

    let rows: Vec<ErrorReport> = estimates.iter().flat_map(|e| e.points.iter().cloned()).collect();
    ctx.out.csv(ERRORS_FILE, |w| write_error_reports(w, &rows))?;
    report.line(format!("{ERRORS_FILE}: {} rows", rows.len()));

    for e in &estimates {
        let w = &e.worst;
        let at = w.g.map(|g| format!(" at g = {g}")).unwrap_or_default();
        report.line(format!(
            "{}: p_hat = {:.6} +/- {:.6}{at}, Chebyshev bound {}",
            e.label,
            w.estimate,
            w.std_error,
            bound_text(w.bound)
        ));
    }
    for scale in [Scale::Exp, Scale::SuperExp, Scale::DoubleExp] {
        let v = classify_regime(model.flavor, scale, ch.zero_in_closure);
        report.line(format!("regime: {} scale -> {}", scale.name(), v.verdict.label()));
    }

    let mut checked = 0;
    let mut violations = Vec::new();
    for r in &rows {
        match r.respects_bound() {
            Some(true) => checked += 1,
            Some(false) => {
                checked += 1;
                violations.push(format!(
                    "i = {}, j = {:?}, g = {:?}: {:.6} > {:.6e}",
                    r.i,
                    r.j,
                    r.g,
                    r.estimate,
                    r.bound.unwrap_or(f64::NAN)
                ));
            }
            None => {}
        }
    }
    report.check(
        "chebyshev_bound",
        violations.is_empty(),
        if violations.is_empty() {
            format!(
                "{checked} of {} estimates had a bound <= 1; all within bound + 3 stderr",
                rows.len()
            )
        } else {
            format!("{} violations: {}", violations.len(), violations.join("; "))
        },
    );

    if model.flavor == Flavor::Slow && grid.contains(&0.0) && !pairs.is_empty() {
        let at_zero =
            |i: usize, j: Option<usize>| rows.iter().find(|r| r.i == i && r.j == j && r.g == Some(0.0)).cloned();
        let mut worst_gap: f64 = 0.0;
        let mut ok = true;
        for &(i, j) in &pairs {
            if let (Some(p2), Some(p1)) = (at_zero(i, Some(j)), at_zero(j, None)) {
                let gap = (p1.estimate + p2.estimate - 1.0).abs();
                ok &= gap <= plan.confidence * p1.std_error.hypot(p2.std_error);
                worst_gap = worst_gap.max(gap);
            }
        }
        report.check(
            "zero_gain_complementarity",
            ok,
            format!("|P1(j) + P2(i -> j) - 1| at g = 0, largest gap {worst_gap:.3e}"),
        );
    }
    Ok(report)
}

fn message_pairs(cfg: &SimulateConfig, codebook: &Codebook, seed: u64) -> Result<Vec<(usize, usize)>> {
    let len = codebook.len();
    if let Some(explicit) = &cfg.pairs {
        for &[i, j] in explicit {
            if i == j || i == 0 || j == 0 || i > len || j > len {
                return Err(CliError::Precondition {
                    param: "simulate.pairs".into(),
                    source: dilab_core::Error::InvalidParameter {
                        name: "pairs",
                        reason: format!("[{i}, {j}] must be two distinct messages in 1..={len}"),
                    },
                });
            }
        }
        return Ok(explicit.iter().map(|&[i, j]| (i, j)).collect());
    }
    if len < 2 {
        return Ok(Vec::new());
    }
    random_pairs(len, cfg.random_pairs.unwrap_or(DEFAULT_RANDOM_PAIRS), seed).param("simulate.random_pairs")
}
