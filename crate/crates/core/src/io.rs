//! On-disk formats: JSON codebook/packing documents and CSV report tables.
//!
//! Floating-point values in JSON documents are written with 17 significant
//! digits, so a load after a save reproduces every coordinate bit for bit.

use std::fmt::Write as _;
use std::io::Write;

use serde::Deserialize;

use crate::analysis::{BoundRow, DominanceEvidence, RegimeVerdict, SpacingCheck};
use crate::codec::{Codebook, Schedule};
use crate::error::{Error, Result};
use crate::estimation::ErrorReport;
use crate::geometry::{Packing, PackingConfig};

pub const CODEBOOK_FORMAT: &str = "dilab-codebook";
pub const PACKING_FORMAT: &str = "dilab-packing";
pub const FORMAT_VERSION: u32 = 1;

/// `{:.16e}`: 17 significant digits, valid JSON.
fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn rows(out: &mut String, points: &[Vec<f64>]) {
    out.push_str("  \"centers\": [");
    for (k, p) in points.iter().enumerate() {
        out.push_str(if k == 0 { "\n    [" } else { ",\n    [" });
        for (t, v) in p.iter().enumerate() {
            if t > 0 {
                out.push_str(", ");
            }
            out.push_str(&sci(*v));
        }
        out.push(']');
    }
    out.push_str(if points.is_empty() { "]\n" } else { "\n  ]\n" });
}

pub fn packing_to_json(packing: &Packing) -> String {
    let c = &packing.config;
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"format\": \"{PACKING_FORMAT}\",");
    let _ = writeln!(out, "  \"version\": {FORMAT_VERSION},");
    let _ = writeln!(out, "  \"n\": {},", c.n);
    let _ = writeln!(out, "  \"r0\": {},", sci(c.r0));
    let _ = writeln!(out, "  \"r1\": {},", sci(c.r1));
    let _ = writeln!(out, "  \"seed\": {},", c.seed);
    let _ = writeln!(out, "  \"saturation_patience\": {},", c.saturation_patience);
    let _ = writeln!(out, "  \"max_codewords\": {},", c.max_codewords);
    let _ = writeln!(out, "  \"saturated\": {},", packing.saturated);
    let _ = writeln!(out, "  \"count\": {},", packing.len());
    rows(&mut out, &packing.centers);
    out.push_str("}\n");
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PackingDoc {
    format: String,
    version: u32,
    n: usize,
    r0: f64,
    r1: f64,
    seed: u64,
    saturation_patience: u64,
    max_codewords: usize,
    saturated: bool,
    count: usize,
    centers: Vec<Vec<f64>>,
}

fn check_header(format: &str, version: u32, want: &str) -> Result<()> {
    if format != want {
        return Err(Error::Format(format!("expected format `{want}`, found `{format}`")));
    }
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    Ok(())
}

pub fn packing_from_json(text: &str) -> Result<Packing> {
    let doc: PackingDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    check_header(&doc.format, doc.version, PACKING_FORMAT)?;
    if doc.count != doc.centers.len() {
        return Err(Error::Format(format!(
            "count {} does not match {} center rows",
            doc.count,
            doc.centers.len()
        )));
    }
    let packing = Packing {
        config: PackingConfig {
            n: doc.n,
            r0: doc.r0,
            r1: doc.r1,
            seed: doc.seed,
            saturation_patience: doc.saturation_patience,
            max_codewords: doc.max_codewords,
        },
        centers: doc.centers,
        saturated: doc.saturated,
    };
    packing.config.validate()?;
    packing.check_invariants()?;
    Ok(packing)
}

pub fn codebook_to_json(codebook: &Codebook) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"format\": \"{CODEBOOK_FORMAT}\",");
    let _ = writeln!(out, "  \"version\": {FORMAT_VERSION},");
    let _ = writeln!(out, "  \"n\": {},", codebook.n);
    let _ = writeln!(out, "  \"power\": {},", sci(codebook.power));
    let _ = writeln!(out, "  \"b\": {},", sci(codebook.b));
    let _ = writeln!(out, "  \"schedule\": \"{}\",", codebook.schedule.name());
    let _ = writeln!(out, "  \"epsilon\": {},", sci(codebook.epsilon));
    let _ = writeln!(out, "  \"r0\": {},", sci(codebook.r0));
    let _ = writeln!(out, "  \"r1\": {},", sci(codebook.r1));
    let _ = writeln!(out, "  \"seed\": {},", codebook.seed);
    let _ = writeln!(out, "  \"saturated\": {},", codebook.saturated);
    match codebook.min_distance {
        Some(d) => {
            let _ = writeln!(out, "  \"min_distance\": {},", sci(d));
        }
        None => out.push_str("  \"min_distance\": null,\n"),
    }
    let _ = writeln!(out, "  \"size\": {},", codebook.len());
    rows(&mut out, codebook.codewords());
    out.push_str("}\n");
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookDoc {
    format: String,
    version: u32,
    n: usize,
    power: f64,
    b: f64,
    schedule: String,
    epsilon: f64,
    r0: f64,
    r1: f64,
    seed: u64,
    saturated: bool,
    min_distance: Option<f64>,
    size: usize,
    centers: Vec<Vec<f64>>,
}

pub fn codebook_from_json(text: &str) -> Result<Codebook> {
    let doc: CodebookDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    check_header(&doc.format, doc.version, CODEBOOK_FORMAT)?;
    if doc.size != doc.centers.len() {
        return Err(Error::Format(format!(
            "size {} does not match {} codeword rows",
            doc.size,
            doc.centers.len()
        )));
    }
    let schedule: Schedule = doc.schedule.parse()?;
    let mut cb = Codebook::from_codewords(doc.n, doc.power, doc.b, schedule, doc.centers)?;
    if cb.epsilon.to_bits() != doc.epsilon.to_bits() {
        return Err(Error::Format(format!(
            "epsilon {} disagrees with the schedule value {}",
            doc.epsilon, cb.epsilon
        )));
    }
    if cb.min_distance.map(f64::to_bits) != doc.min_distance.map(f64::to_bits) {
        return Err(Error::Format("min_distance disagrees with the codewords".into()));
    }
    cb.seed = doc.seed;
    cb.saturated = doc.saturated;
    cb.r0 = doc.r0;
    cb.r1 = doc.r1;
    Ok(cb)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Format(e.to_string())
}

pub const ERROR_REPORT_HEADER: [&str; 16] = [
    "n", "A", "b", "flavor", "family", "gamma", "g_max", "sigma2", "delta", "i", "j", "trials", "p_hat", "stderr",
    "bound", "argmax_g",
];

pub fn error_report_record(r: &ErrorReport) -> Vec<String> {
    vec![
        r.n.to_string(),
        r.power.to_string(),
        r.b.to_string(),
        r.flavor.to_string(),
        r.family.clone(),
        r.gamma.to_string(),
        r.g_max.to_string(),
        r.noise_variance.to_string(),
        r.delta.to_string(),
        r.i.to_string(),
        r.j.map(|j| j.to_string()).unwrap_or_default(),
        r.trials.to_string(),
        r.estimate.to_string(),
        r.std_error.to_string(),
        opt(r.bound),
        opt(r.g),
    ]
}

pub fn write_table<W: Write>(out: W, header: &[&str], records: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for rec in records {
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_error_reports<W: Write>(out: W, reports: &[ErrorReport]) -> Result<()> {
    write_table(out, &ERROR_REPORT_HEADER, reports.iter().map(error_report_record))
}

pub fn write_bound_table<W: Write>(out: W, rows: &[BoundRow]) -> Result<()> {
    write_table(
        out,
        &["n", "b", "lower", "upper", "lower_vacuous"],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.b.to_string(),
                r.lower.to_string(),
                r.upper.to_string(),
                if r.lower_vacuous() {
                    "vacuous".into()
                } else {
                    String::new()
                },
            ]
        }),
    )
}

pub fn write_regime_table<W: Write>(out: W, rows: &[RegimeVerdict]) -> Result<()> {
    write_table(
        out,
        &["flavor", "scale", "zero_in_closure", "verdict"],
        rows.iter().map(|r| {
            vec![
                r.flavor.to_string(),
                r.scale.name(),
                r.zero_in_closure.to_string(),
                r.verdict.label(),
            ]
        }),
    )
}

pub fn write_dominance_trail<W: Write>(out: W, evidence: &DominanceEvidence) -> Result<()> {
    let col = if evidence.loglog {
        "loglog2_difference"
    } else {
        "log2_difference"
    };
    write_table(
        out,
        &["n", col],
        evidence.trail.iter().map(|(n, d)| vec![n.to_string(), d.to_string()]),
    )
}

pub fn write_spacing_checks<W: Write>(out: W, rows: &[SpacingCheck]) -> Result<()> {
    write_table(
        out,
        &[
            "n",
            "b",
            "required",
            "required_normalized",
            "achieved",
            "achieved_normalized",
            "pass",
        ],
        rows.iter().map(|s| {
            vec![
                s.n.to_string(),
                s.b.to_string(),
                s.required.to_string(),
                s.required_normalized.to_string(),
                s.achieved.to_string(),
                s.achieved_normalized.to_string(),
                s.pass.to_string(),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{build_codebook, CodebookParams};
    use crate::geometry::generate_saturated_packing;
    use proptest::prelude::*;

    #[test]
    fn codebook_round_trip() {
        let cb = build_codebook(&CodebookParams {
            n: 8,
            power: 1.0,
            b: 0.1,
            schedule: Schedule::Achievability,
            seed: 3,
            patience: 500,
            max_codewords: 40,
        })
        .unwrap();
        let text = codebook_to_json(&cb);
        let back = codebook_from_json(&text).unwrap();
        assert_eq!(back, cb);
        assert_eq!(codebook_to_json(&back), text);
    }

    #[test]
    fn packing_round_trip() {
        let p = generate_saturated_packing(&PackingConfig {
            n: 3,
            r0: 0.3,
            r1: 1.0,
            seed: 5,
            saturation_patience: 300,
            max_codewords: 100,
        })
        .unwrap();
        let text = packing_to_json(&p);
        assert_eq!(packing_from_json(&text).unwrap(), p);
    }

    #[test]
    fn rejects_tampered_documents() {
        let cb = Codebook::from_codewords(
            2,
            1.0,
            0.0,
            Schedule::Achievability,
            vec![vec![0.1, 0.0], vec![0.0, 0.5]],
        )
        .unwrap();
        let text = codebook_to_json(&cb);
        assert!(codebook_from_json(&text.replace("\"size\": 2", "\"size\": 3")).is_err());
        assert!(codebook_from_json(&text.replace(CODEBOOK_FORMAT, PACKING_FORMAT)).is_err());
        assert!(codebook_from_json(&text.replace("\"seed\"", "\"sed\"")).is_err());
        assert!(codebook_from_json("not json").is_err());
    }

    #[test]
    fn error_report_header_is_stable() {
        let mut buf = Vec::new();
        write_error_reports(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().trim(),
            "n,A,b,flavor,family,gamma,g_max,sigma2,delta,i,j,trials,p_hat,stderr,bound,argmax_g"
        );
    }

    proptest! {
        #[test]
        fn coordinates_survive_text(coords in prop::collection::vec(-0.5f64..0.5, 6)) {
            let cb = Codebook::from_codewords(3, 1.0, 0.2, Schedule::ConverseSpacing,
                vec![coords[..3].to_vec(), coords[3..].to_vec()]).unwrap();
            let back = codebook_from_json(&codebook_to_json(&cb)).unwrap();
            for (a, b) in back.codewords().iter().flatten().zip(cb.codewords().iter().flatten()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
