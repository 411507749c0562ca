use dilab_core::analysis::{achievable_rate_lower_bound, empirical_rate};
use dilab_core::geometry::norm;
use dilab_core::io::codebook_to_json;
use dilab_core::{build_codebook, Codebook, CodebookParams, Schedule};

use super::{echo, rate_bound_text, Context, Report};
use crate::config::PackConfig;
use crate::error::{Context as _, Result};

pub const CODEBOOK_FILE: &str = "codebook.json";

pub(crate) fn params(cfg: &PackConfig, seed: u64) -> CodebookParams {
    CodebookParams {
        n: cfg.n,
        power: cfg.power,
        b: cfg.b,
        schedule: cfg.schedule,
        seed,
        patience: cfg.patience,
        max_codewords: cfg.max_codewords,
    }
}

pub fn pack(ctx: &Context, cfg: &PackConfig) -> Result<Report> {
    let mut report = Report::new("pack", &echo(ctx, false, "pack", cfg));
    let codebook = build_codebook(&params(cfg, ctx.seed)).param("pack")?;
    ctx.out.write(CODEBOOK_FILE, codebook_to_json(&codebook))?;
    report.line(format!("codebook: {CODEBOOK_FILE}"));
    describe(&mut report, &codebook, params(cfg, ctx.seed).log2_guaranteed_size());
    Ok(report)
}

/// Summary lines and packing checks shared with `simulate`'s inline packing.
pub(crate) fn describe(report: &mut Report, cb: &Codebook, log2_guaranteed: f64) {
    report.line(format!(
        "n = {}, A = {}, b = {}, schedule = {}, eps_n = {:.6e}, r0 = {:.6e}, r1 = {:.6e}",
        cb.n,
        cb.power,
        cb.b,
        cb.schedule.name(),
        cb.epsilon,
        cb.r0,
        cb.r1
    ));
    report.line(format!(
        "codewords L = {} (log2 L = {:.4}), saturated = {}, guaranteed log2 count = {:.4}",
        cb.len(),
        cb.log2_len(),
        cb.saturated,
        log2_guaranteed
    ));
    match cb.min_distance {
        Some(d) => report.line(format!(
            "minimum distance = {d:.6e} (required 2 r0 = {:.6e})",
            2.0 * cb.r0
        )),
        None => report.line("minimum distance = n/a (single codeword)"),
    }
    let rate = empirical_rate(cb);
    let lower = achievable_rate_lower_bound(cb.n as f64, cb.b);
    report.line(format!(
        "empirical rate = {rate:.6}, achievable-rate lower bound = {}",
        rate_bound_text(lower)
    ));

    let slack = 1e-12;
    let inside = cb.codewords().iter().all(|u| norm(u) <= cb.r1 * (1.0 + slack));
    let separated = cb.min_distance.is_none_or(|d| d >= 2.0 * cb.r0 * (1.0 - slack));
    report.check(
        "packing_invariants",
        inside && separated,
        format!("all centers within r1: {inside}; pairwise distance >= 2 r0: {separated}"),
    );
    if cb.saturated {
        report.check(
            "density_bound",
            cb.log2_len() >= log2_guaranteed,
            format!(
                "log2 L = {:.4} vs 2^-n (r1/r0)^n bound {:.4}",
                cb.log2_len(),
                log2_guaranteed
            ),
        );
        if cb.schedule == Schedule::Achievability && lower > 0.0 {
            report.check(
                "rate_lower_bound",
                rate >= lower,
                format!("empirical rate {rate:.6} vs lower bound {lower:.6}"),
            );
        }
    } else {
        report.line("density bound not checked: packing stopped at max_codewords before saturating");
    }
}
