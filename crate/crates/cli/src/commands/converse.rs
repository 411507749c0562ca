use dilab_core::analysis::converse_spacing;
use dilab_core::io::write_spacing_checks;

use super::{echo, load_codebook, Context, Report};
use crate::config::ConverseConfig;
use crate::error::{CliError, Context as _, Result};

pub const SPACING_FILE: &str = "spacing.csv";

pub fn converse_check(ctx: &Context, cfg: &ConverseConfig) -> Result<Report> {
    let path = cfg
        .codebook
        .as_ref()
        .ok_or_else(|| CliError::Missing("converse-check.codebook".into()))?;
    let codebook = load_codebook(path)?;
    let mut resolved = cfg.clone();
    let b = *resolved.b.get_or_insert(codebook.b);
    let mut report = Report::new("converse-check", &echo(ctx, false, "converse-check", &resolved));

    let check = converse_spacing(&codebook, b).param("converse-check.codebook")?;
    ctx.out
        .csv(SPACING_FILE, |w| write_spacing_checks(w, std::slice::from_ref(&check)))?;
    report.line(format!(
        "codebook: n = {}, L = {}, A = {}",
        codebook.n,
        codebook.len(),
        codebook.power
    ));
    report.line(format!(
        "required spacing sqrt(n eps_n) = {:.6e} (normalized {:.6e}), achieved minimum distance {:.6e} (normalized {:.6e})",
        check.required, check.required_normalized, check.achieved, check.achieved_normalized
    ));
    report.check(
        "converse_spacing",
        check.pass,
        format!(
            "achieved {:.6e} vs required {:.6e} at b = {b}",
            check.achieved, check.required
        ),
    );
    Ok(report)
}
