//! DI codebooks built from saturated packings, and the CSI-aware distance decoder.
//!
//! Codewords live in the normalized scale `u / sqrt(n)`, so the power
//! constraint reads `|u| <= sqrt(A)`. Message indices are 1-based.

use serde::{Deserialize, Serialize};

use crate::channel::{Flavor, Gains};
use crate::error::{invalid, Error, Result};
use crate::geometry::{generate_saturated_packing, min_pairwise_distance, norm_sq, PackingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// `eps_n = A / n^((1-b)/2)`.
    Achievability,
    /// `eps_n = A / n^(2(1+b))`, used only for spacing checks.
    ConverseSpacing,
}

impl Schedule {
    pub fn epsilon(self, n: usize, power: f64, b: f64) -> f64 {
        let n = n as f64;
        match self {
            Schedule::Achievability => power / n.powf(0.5 * (1.0 - b)),
            Schedule::ConverseSpacing => power / n.powf(2.0 * (1.0 + b)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Schedule::Achievability => "achievability",
            Schedule::ConverseSpacing => "converse_spacing",
        }
    }
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "achievability" => Ok(Schedule::Achievability),
            "converse_spacing" => Ok(Schedule::ConverseSpacing),
            other => Err(invalid("schedule", format!("unknown schedule `{other}`"))),
        }
    }
}

/// Inputs to [`build_codebook`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookParams {
    pub n: usize,
    pub power: f64,
    pub b: f64,
    pub schedule: Schedule,
    pub seed: u64,
    pub patience: u64,
    pub max_codewords: usize,
}

impl CodebookParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("n", format!("must be at least 2, got {}", self.n)));
        }
        if !(self.power > 0.0) || !self.power.is_finite() {
            return Err(invalid("power", format!("must be finite and > 0, got {}", self.power)));
        }
        if !(0.0..1.0).contains(&self.b) {
            return Err(invalid("b", format!("must lie in [0, 1), got {}", self.b)));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.schedule.epsilon(self.n, self.power, self.b)
    }

    /// Packing radii `(sqrt(eps_n), sqrt(A) - sqrt(eps_n))`.
    pub fn radii(&self) -> (f64, f64) {
        let r0 = self.epsilon().sqrt();
        (r0, self.power.sqrt() - r0)
    }

    /// log2 of `2^-n ((sqrt A - sqrt eps) / sqrt eps)^n`, the size a saturated packing guarantees.
    pub fn log2_guaranteed_size(&self) -> f64 {
        let (r0, r1) = self.radii();
        self.n as f64 * ((r1 / r0).log2() - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub n: usize,
    pub power: f64,
    pub b: f64,
    pub schedule: Schedule,
    pub epsilon: f64,
    pub seed: u64,
    /// Packing radii the codewords were drawn with.
    pub r0: f64,
    pub r1: f64,
    pub saturated: bool,
    /// Minimum pairwise distance (normalized scale); `None` for a single codeword.
    pub min_distance: Option<f64>,
    codewords: Vec<Vec<f64>>,
}

/// Relative slack on the norm check absorbing rounding in hand-built codewords.
const NORM_SLACK: f64 = 1e-12;

impl Codebook {
    /// Wraps explicit codewords, checking the power constraint `|u| <= sqrt(A)`.
    pub fn from_codewords(n: usize, power: f64, b: f64, schedule: Schedule, codewords: Vec<Vec<f64>>) -> Result<Self> {
        if codewords.is_empty() {
            return Err(Error::EmptyCodebook);
        }
        if !(power > 0.0) || !power.is_finite() {
            return Err(invalid("power", format!("must be finite and > 0, got {power}")));
        }
        for (i, u) in codewords.iter().enumerate() {
            if u.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: u.len(),
                });
            }
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidCodeword(format!("codeword {} is not finite", i + 1)));
            }
            let e = norm_sq(u);
            if e > power * (1.0 + NORM_SLACK) {
                return Err(Error::InvalidCodeword(format!(
                    "codeword {} has squared norm {e} > A = {power}",
                    i + 1
                )));
            }
        }
        let epsilon = schedule.epsilon(n, power, b);
        let min_distance = if codewords.len() >= 2 {
            Some(min_pairwise_distance(&codewords)?)
        } else {
            None
        };
        let r0 = epsilon.sqrt();
        Ok(Self {
            n,
            power,
            b,
            schedule,
            epsilon,
            seed: 0,
            r0,
            r1: power.sqrt() - r0,
            saturated: false,
            min_distance,
            codewords,
        })
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codewords(&self) -> &[Vec<f64>] {
        &self.codewords
    }

    /// Codeword for 1-based message `i`.
    pub fn encode(&self, i: usize) -> Result<&[f64]> {
        if i == 0 || i > self.codewords.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.codewords.len(),
            });
        }
        Ok(&self.codewords[i - 1])
    }

    /// Codewords scaled back to the raw channel: `x = sqrt(n) u`.
    pub fn unnormalized(&self) -> Vec<Vec<f64>> {
        let s = (self.n as f64).sqrt();
        self.codewords
            .iter()
            .map(|u| u.iter().map(|v| v * s).collect())
            .collect()
    }

    pub fn log2_len(&self) -> f64 {
        (self.codewords.len() as f64).log2()
    }
}

/// Packs `sqrt(eps_n)`-spheres with centers in the `sqrt(A) - sqrt(eps_n)` ball
/// and uses the centers as codewords.
pub fn build_codebook(params: &CodebookParams) -> Result<Codebook> {
    params.validate()?;
    let epsilon = params.epsilon();
    let (r0, r1) = params.radii();
    if !(r1 > 0.0) {
        return Err(Error::DegenerateGeometry(format!(
            "sqrt(A) = {} does not exceed sqrt(eps_n) = {r0}",
            params.power.sqrt()
        )));
    }
    let packing = generate_saturated_packing(&PackingConfig {
        n: params.n,
        r0,
        r1,
        seed: params.seed,
        saturation_patience: params.patience,
        max_codewords: params.max_codewords,
    })?;
    if packing.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    let min_distance = if packing.len() >= 2 {
        Some(min_pairwise_distance(&packing.centers)?)
    } else {
        None
    };
    Ok(Codebook {
        n: params.n,
        power: params.power,
        b: params.b,
        schedule: params.schedule,
        epsilon,
        seed: params.seed,
        r0,
        r1,
        saturated: packing.saturated,
        min_distance,
        codewords: packing.centers,
    })
}

/// Decoder threshold slack `gamma^2 eps_n / 3`.
pub fn delta_n(gamma: f64, epsilon: f64) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be finite and > 0, got {gamma}")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(invalid("epsilon", format!("must be finite and > 0, got {epsilon}")));
    }
    Ok(gamma * gamma * epsilon / 3.0)
}

/// Accepts message `j` iff `|y - g o u_j|^2 <= sigma_Z^2 + delta_n`.
#[derive(Debug, Clone, Copy)]
pub struct DecoderRule<'a> {
    codebook: &'a Codebook,
    noise_variance: f64,
    delta: f64,
    flavor: Flavor,
}

impl<'a> DecoderRule<'a> {
    pub fn new(codebook: &'a Codebook, noise_variance: f64, delta: f64, flavor: Flavor) -> Result<Self> {
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(invalid(
                "noise_variance",
                format!("must be finite and > 0, got {noise_variance}"),
            ));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(invalid("delta", format!("must be finite and > 0, got {delta}")));
        }
        Ok(Self {
            codebook,
            noise_variance,
            delta,
            flavor,
        })
    }

    pub fn codebook(&self) -> &'a Codebook {
        self.codebook
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Squared decision radius `sigma_Z^2 + delta_n`.
    pub fn threshold_sq(&self) -> f64 {
        self.noise_variance + self.delta
    }

    /// `|y - csi o u_j|^2` for 1-based `j`.
    pub fn statistic(&self, y: &[f64], j: usize, csi: &Gains) -> Result<f64> {
        let u = self.codebook.encode(j)?;
        if y.len() != u.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                actual: y.len(),
            });
        }
        csi.check_len(u.len())?;
        if csi.flavor() != self.flavor {
            return Err(invalid(
                "csi",
                format!("{} gains given to a {} decoder", csi.flavor(), self.flavor),
            ));
        }
        Ok(match csi {
            Gains::Fast(g) => y
                .iter()
                .zip(g)
                .zip(u)
                .map(|((yt, gt), ut)| {
                    let d = yt - gt * ut;
                    d * d
                })
                .sum(),
            Gains::Slow(g) => y
                .iter()
                .zip(u)
                .map(|(yt, ut)| {
                    let d = yt - g * ut;
                    d * d
                })
                .sum(),
        })
    }

    /// Was message `j` sent? Ties at the threshold accept.
    pub fn identify(&self, y: &[f64], j: usize, csi: &Gains) -> Result<bool> {
        Ok(self.statistic(y, j, csi)? <= self.threshold_sq())
    }
}
