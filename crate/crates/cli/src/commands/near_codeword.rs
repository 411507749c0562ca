use dilab_core::estimation::{near_codeword_experiment, NearCodewordReport};
use dilab_core::io::{write_error_reports, write_table};
use dilab_core::{ChannelModel, FadingSpec, Flavor, TrialPlan};

use super::{echo, Context, Report};
use crate::config::NearCodewordConfig;
use crate::error::{Context as _, Result};

pub const NEAR_CODEWORD_FILE: &str = "near_codeword.csv";
pub const ERRORS_FILE: &str = "errors.csv";

const HEADER: [&str; 10] = [
    "n",
    "alpha",
    "normalized_distance",
    "delta",
    "p1",
    "stderr1",
    "p2",
    "stderr2",
    "sum",
    "sum_stderr",
];

pub fn near_codeword(ctx: &Context, cfg: &NearCodewordConfig) -> Result<Report> {
    let mut report = Report::new("near-codeword", &echo(ctx, true, "near-codeword", cfg));
    let spec = FadingSpec::new(cfg.fading.clone()).param("near-codeword.fading")?;
    let model = ChannelModel::new(Flavor::Fast, cfg.noise_variance, spec, true, cfg.power).param("near-codeword")?;
    let plan = TrialPlan::new(ctx.trials, ctx.seed);
    let results = cfg
        .ns
        .iter()
        .map(|&n| near_codeword_experiment(n, cfg.power, cfg.b, &model, &plan, cfg.separation))
        .collect::<dilab_core::Result<Vec<NearCodewordReport>>>()
        .param("near-codeword")?;

    ctx.out.csv(NEAR_CODEWORD_FILE, |w| {
        write_table(
            w,
            &HEADER,
            results.iter().map(|r| {
                vec![
                    r.type1.n.to_string(),
                    r.alpha.to_string(),
                    r.normalized_distance.to_string(),
                    r.delta.to_string(),
                    r.type1.estimate.to_string(),
                    r.type1.std_error.to_string(),
                    r.type2.estimate.to_string(),
                    r.type2.std_error.to_string(),
                    r.sum().to_string(),
                    r.sum_std_error().to_string(),
                ]
            }),
        )
    })?;
    let reports: Vec<_> = results
        .iter()
        .flat_map(|r| [r.type1.clone(), r.type2.clone()])
        .collect();
    ctx.out.csv(ERRORS_FILE, |w| write_error_reports(w, &reports))?;

    for r in &results {
        report.line(format!(
            "n = {:>5}: alpha = {:.6e}, p1 = {:.4}, p2 = {:.4}, p1 + p2 = {:.4} +/- {:.4}",
            r.type1.n,
            r.alpha,
            r.type1.estimate,
            r.type2.estimate,
            r.sum(),
            r.sum_std_error()
        ));
    }
    let k = plan.confidence;
    let monotone = results
        .windows(2)
        .all(|w| w[1].sum() + k * w[1].sum_std_error() >= w[0].sum() - k * w[0].sum_std_error());
    report.check(
        "sum_nondecreasing",
        monotone,
        format!("p1 + p2 nondecreasing in n within {k} joint standard errors"),
    );
    if let Some(floor) = cfg.min_sum {
        let low: Vec<String> = results
            .iter()
            .filter(|r| r.sum() < floor)
            .map(|r| format!("n = {}: {:.4}", r.type1.n, r.sum()))
            .collect();
        report.check(
            "sum_floor",
            low.is_empty(),
            if low.is_empty() {
                format!("p1 + p2 >= {floor} at every n")
            } else {
                format!("below {floor}: {}", low.join(", "))
            },
        );
    }
    Ok(report)
}
