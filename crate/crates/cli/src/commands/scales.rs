use std::cmp::Ordering;

use dilab_core::analysis::{
    classify_regime, dominates, DominanceEvidence, SUPEREXP_CAPACITY_LOWER, SUPEREXP_CAPACITY_UPPER,
};
use dilab_core::io::{write_dominance_trail, write_regime_table, write_table};
use dilab_core::{DominanceGrid, Flavor, RegimeVerdict, Scale, Verdict};

use super::{echo, Context, Report};
use crate::config::{ScalePair, ScalesConfig};
use crate::error::{CliError, Context as _, Result};

pub const DOMINANCE_FILE: &str = "dominance.csv";
pub const REGIMES_FILE: &str = "regimes.csv";

const HEADER: [&str; 9] = [
    "l1",
    "l2",
    "a",
    "b",
    "domain",
    "final_difference",
    "dominates",
    "expected",
    "explanation",
];

/// Growth order of the implemented chain; `None` when two scales are not comparable by kind alone.
fn chain_order(l1: Scale, l2: Scale) -> Option<Ordering> {
    let rank = |s: Scale| match s {
        Scale::Log => 0,
        Scale::Linear => 1,
        Scale::Poly { .. } => 2,
        Scale::Exp => 3,
        Scale::SuperExp => 4,
        Scale::DoubleExp => 5,
    };
    match (l1, l2) {
        (Scale::Poly { k: k1 }, Scale::Poly { k: k2 }) => k1.partial_cmp(&k2),
        _ => Some(rank(l1).cmp(&rank(l2))),
    }
}

/// Verdicts stated by the fast- and slow-fading capacity results for the three
/// exponential-type scales.
pub fn expected_verdict(flavor: Flavor, scale: Scale, zero_in_closure: bool) -> Option<Verdict> {
    if flavor == Flavor::Slow && zero_in_closure {
        return matches!(scale, Scale::Exp | Scale::SuperExp | Scale::DoubleExp).then_some(Verdict::Zero);
    }
    match scale {
        Scale::Exp => Some(Verdict::Infinite),
        Scale::SuperExp => Some(Verdict::FiniteBand {
            lower: SUPEREXP_CAPACITY_LOWER,
            upper: SUPEREXP_CAPACITY_UPPER,
        }),
        Scale::DoubleExp => Some(Verdict::Zero),
        _ => None,
    }
}

fn parse_scale(text: &str, key: &str) -> Result<Scale> {
    text.parse().param(key)
}

fn default_pairs() -> Vec<ScalePair> {
    let chain = Scale::chain();
    let mut pairs = Vec::new();
    for l1 in chain {
        for l2 in chain {
            pairs.push(ScalePair {
                l1: l1.name(),
                l2: l2.name(),
                a: 1.0,
                b: 1.0,
                expect: None,
            });
        }
    }
    pairs
}

pub fn scales(ctx: &Context, cfg: &ScalesConfig) -> Result<Report> {
    let mut resolved = cfg.clone();
    let pairs = resolved.pairs.get_or_insert_with(default_pairs).clone();
    let mut report = Report::new("scales", &echo(ctx, false, "scales", &resolved));
    if cfg.log2_n_min >= cfg.log2_n_max {
        return Err(CliError::Precondition {
            param: "scales.log2_n_max".into(),
            source: dilab_core::Error::InvalidParameter {
                name: "log2_n_max",
                reason: format!("must exceed log2_n_min = {}", cfg.log2_n_min),
            },
        });
    }
    let grid = DominanceGrid {
        n: (cfg.log2_n_min..=cfg.log2_n_max).map(|k| 2f64.powi(k)).collect(),
        margin: cfg.margin,
        tail_fraction: cfg.tail_fraction,
    };

    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for (idx, p) in pairs.iter().enumerate() {
        let key = format!("scales.pairs[{idx}]");
        let l1 = parse_scale(&p.l1, &format!("{key}.l1"))?;
        let l2 = parse_scale(&p.l2, &format!("{key}.l2"))?;
        let ev: DominanceEvidence = dominates(l1, l2, p.a, p.b, &grid).param(&key)?;
        let expected = p.expect.or_else(|| chain_order(l1, l2).map(|o| o == Ordering::Greater));
        if expected.is_some_and(|e| e != ev.dominates) {
            mismatches.push(format!("{} over {} (a = {}, b = {})", p.l1, p.l2, p.a, p.b));
        }
        let name = format!("trails/{idx:03}-{}-{}.csv", l1.name(), l2.name());
        ctx.out.csv(&name, |w| write_dominance_trail(w, &ev))?;
        let last = ev.trail.last().map(|t| t.1).unwrap_or(f64::NAN);
        rows.push(vec![
            l1.name(),
            l2.name(),
            p.a.to_string(),
            p.b.to_string(),
            if ev.loglog { "loglog2" } else { "log2" }.to_string(),
            last.to_string(),
            ev.dominates.to_string(),
            expected.map(|e| e.to_string()).unwrap_or_default(),
            ev.explanation.clone(),
        ]);
    }
    ctx.out
        .csv(DOMINANCE_FILE, |w| write_table(w, &HEADER, rows.iter().cloned()))?;
    let held = rows.iter().filter(|r| r[6] == "true").count();
    report.line(format!(
        "dominance: {} pairs on n = 2^{}..2^{} (margin {} bits), {held} certified",
        rows.len(),
        cfg.log2_n_min,
        cfg.log2_n_max,
        cfg.margin
    ));
    report.line(format!(
        "chain: {}",
        Scale::chain().iter().map(|s| s.name()).collect::<Vec<_>>().join(" < ")
    ));
    report.check(
        "dominance_chain",
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("all {} verdicts match the chain order", rows.len())
        } else {
            format!("unexpected verdicts: {}", mismatches.join("; "))
        },
    );

    let mut regimes: Vec<RegimeVerdict> = Vec::new();
    for flavor in [Flavor::Fast, Flavor::Slow] {
        for zero in [false, true] {
            for scale in Scale::chain() {
                regimes.push(classify_regime(flavor, scale, zero));
            }
        }
    }
    ctx.out.csv(REGIMES_FILE, |w| write_regime_table(w, &regimes))?;
    for r in regimes
        .iter()
        .filter(|r| expected_verdict(r.flavor, r.scale, r.zero_in_closure).is_some())
    {
        report.line(format!(
            "regime: {:<4} {:<9} zero_in_closure = {:<5} -> {}",
            r.flavor.to_string(),
            r.scale.name(),
            r.zero_in_closure,
            r.verdict.label()
        ));
    }
    let wrong: Vec<String> = regimes
        .iter()
        .filter(|r| expected_verdict(r.flavor, r.scale, r.zero_in_closure).is_some_and(|v| v != r.verdict))
        .map(|r| format!("{} {} {}", r.flavor, r.scale.name(), r.zero_in_closure))
        .collect();
    report.check(
        "regime_table",
        wrong.is_empty(),
        if wrong.is_empty() {
            "12 flavor x scale x zero-flag verdicts match the capacity results".to_string()
        } else {
            format!("mismatched: {}", wrong.join("; "))
        },
    );

    let mut inconsistent = Vec::new();
    for group in regimes.chunks(Scale::chain().len()) {
        for finite in group.iter().filter(|r| matches!(r.verdict, Verdict::FiniteBand { .. })) {
            for other in group {
                let ok = match chain_order(other.scale, finite.scale) {
                    Some(Ordering::Less) => other.verdict == Verdict::Infinite,
                    Some(Ordering::Greater) => other.verdict == Verdict::Zero,
                    _ => true,
                };
                if !ok {
                    inconsistent.push(format!(
                        "{} {} vs {}",
                        other.flavor,
                        other.scale.name(),
                        finite.scale.name()
                    ));
                }
            }
        }
    }
    report.check(
        "band_consistency",
        inconsistent.is_empty(),
        if inconsistent.is_empty() {
            "scales below a finite band are infinite, scales above it are zero".to_string()
        } else {
            format!("inconsistent: {}", inconsistent.join("; "))
        },
    );
    Ok(report)
}
