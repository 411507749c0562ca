//! Fast- and slow-fading Gaussian channels with bounded fading support.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{invalid, Error, Result};
use crate::geometry::norm_sq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// A fresh i.i.d. gain per channel use.
    Fast,
    /// One gain held for the whole block.
    Slow,
}

impl Flavor {
    pub fn as_str(&self) -> &'static str {
        match self {
            Flavor::Fast => "fast",
            Flavor::Slow => "slow",
        }
    }
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedGain {
    pub value: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FadingFamily {
    /// Uniform on `[low, high]`.
    UniformInterval { low: f64, high: f64 },
    /// Rayleigh with the given scale, conditioned on `[low, high]`.
    TruncatedRayleigh { scale: f64, low: f64, high: f64 },
    /// Finite support with nonnegative weights (normalized internally).
    Discrete { points: Vec<WeightedGain> },
}

impl FadingFamily {
    pub fn name(&self) -> &'static str {
        match self {
            FadingFamily::UniformInterval { .. } => "uniform_interval",
            FadingFamily::TruncatedRayleigh { .. } => "truncated_rayleigh",
            FadingFamily::Discrete { .. } => "discrete",
        }
    }
}

/// Law of the fading coefficient `G`.
///
/// `gamma` is the essential infimum of `|G|` and `g_max` its supremum. Mean and
/// second moment are computed in closed form per family; higher moments are not
/// modelled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FadingSpec {
    family: FadingFamily,
    degenerate_zero: bool,
    gamma: f64,
    g_max: f64,
    mean: f64,
    second_moment: f64,
}

impl FadingSpec {
    /// Builds a spec whose support closure excludes zero (`gamma > 0`).
    pub fn new(family: FadingFamily) -> Result<Self> {
        Self::build(family, false)
    }

    /// Opt-in constructor for supports whose closure contains zero.
    pub fn with_zero_in_closure(family: FadingFamily) -> Result<Self> {
        Self::build(family, true)
    }

    pub fn build(family: FadingFamily, degenerate_zero: bool) -> Result<Self> {
        let (gamma, g_max, mean, second_moment) = match &family {
            FadingFamily::UniformInterval { low, high } => {
                check_interval(*low, *high)?;
                let (a, b) = (*low, *high);
                (a, b, (a + b) / 2.0, (a * a + a * b + b * b) / 3.0)
            }
            FadingFamily::TruncatedRayleigh { scale, low, high } => {
                check_interval(*low, *high)?;
                if !(*scale > 0.0) || !scale.is_finite() {
                    return Err(invalid("scale", format!("must be finite and > 0, got {scale}")));
                }
                let (mean, second) = truncated_rayleigh_moments(*scale, *low, *high)?;
                (*low, *high, mean, second)
            }
            FadingFamily::Discrete { points } => {
                let total: f64 = points.iter().map(|p| p.weight).sum();
                if points.is_empty() || !(total > 0.0) {
                    return Err(Error::EmptySupport);
                }
                for p in points {
                    if !p.value.is_finite() || !(p.weight >= 0.0) || !p.weight.is_finite() {
                        return Err(invalid("points", format!("bad support point {p:?}")));
                    }
                }
                let live = points.iter().filter(|p| p.weight > 0.0);
                let gamma = live.clone().map(|p| p.value.abs()).fold(f64::INFINITY, f64::min);
                let g_max = live.map(|p| p.value.abs()).fold(0.0, f64::max);
                let mean = points.iter().map(|p| p.weight * p.value).sum::<f64>() / total;
                let second = points.iter().map(|p| p.weight * p.value * p.value).sum::<f64>() / total;
                (gamma, g_max, mean, second)
            }
        };
        if degenerate_zero && gamma != 0.0 {
            return Err(invalid(
                "degenerate_zero",
                format!("support infimum is {gamma}, so zero is not in its closure"),
            ));
        }
        if !degenerate_zero && !(gamma > 0.0) {
            return Err(invalid(
                "gamma",
                "support reaches zero; use the zero-in-closure constructor to opt in",
            ));
        }
        Ok(Self {
            family,
            degenerate_zero,
            gamma,
            g_max,
            mean,
            second_moment: second_moment.max(mean * mean),
        })
    }

    /// Point mass at `g`.
    pub fn constant(g: f64) -> Result<Self> {
        Self::new(FadingFamily::UniformInterval { low: g, high: g })
    }

    pub fn family(&self) -> &FadingFamily {
        &self.family
    }

    pub fn degenerate_zero(&self) -> bool {
        self.degenerate_zero
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn g_max(&self) -> f64 {
        self.g_max
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean * self.mean
    }

    pub fn contains(&self, g: f64) -> bool {
        match &self.family {
            FadingFamily::UniformInterval { low, high } | FadingFamily::TruncatedRayleigh { low, high, .. } => {
                g >= *low && g <= *high
            }
            FadingFamily::Discrete { points } => points.iter().any(|p| p.weight > 0.0 && p.value == g),
        }
    }

    /// Uniform grid over `[gamma, g_max]` including both endpoints; for discrete
    /// supports the support points themselves.
    pub fn grid(&self, resolution: usize) -> Vec<f64> {
        match &self.family {
            FadingFamily::Discrete { points } => {
                let mut v: Vec<f64> = points.iter().filter(|p| p.weight > 0.0).map(|p| p.value).collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            }
            FadingFamily::UniformInterval { low, high } | FadingFamily::TruncatedRayleigh { low, high, .. } => {
                if low == high || resolution <= 1 {
                    return vec![*low];
                }
                let step = (high - low) / (resolution - 1) as f64;
                (0..resolution)
                    .map(|k| {
                        if k + 1 == resolution {
                            *high
                        } else {
                            low + step * k as f64
                        }
                    })
                    .collect()
            }
        }
    }

    /// One draw of `G`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.family {
            FadingFamily::UniformInterval { low, high } => {
                if low == high {
                    *low
                } else {
                    rng.random_range(*low..=*high)
                }
            }
            FadingFamily::TruncatedRayleigh { scale, low, high } => {
                // Inverse CDF restricted to [F(low), F(high)].
                let two_s2 = 2.0 * scale * scale;
                let tail_lo = (-(low * low) / two_s2).exp();
                let tail_hi = (-(high * high) / two_s2).exp();
                let u: f64 = rng.random();
                let tail = tail_lo - u * (tail_lo - tail_hi);
                (-two_s2 * tail.ln()).sqrt().clamp(*low, *high)
            }
            FadingFamily::Discrete { points } => {
                // Weights were validated at construction.
                let dist = WeightedIndex::new(points.iter().map(|p| p.weight)).expect("validated weights");
                points[dist.sample(rng)].value
            }
        }
    }
}

fn check_interval(low: f64, high: f64) -> Result<()> {
    if !low.is_finite() || !high.is_finite() {
        return Err(invalid("support", "bounds must be finite"));
    }
    if low < 0.0 {
        return Err(invalid("low", format!("must be >= 0, got {low}")));
    }
    if low > high {
        return Err(Error::EmptySupport);
    }
    Ok(())
}

fn truncated_rayleigh_moments(scale: f64, low: f64, high: f64) -> Result<(f64, f64)> {
    let two_s2 = 2.0 * scale * scale;
    let e_lo = (-(low * low) / two_s2).exp();
    let e_hi = (-(high * high) / two_s2).exp();
    let mass = e_lo - e_hi;
    if low == high || !(mass > 0.0) {
        if low == high {
            return Ok((low, low * low));
        }
        return Err(Error::EmptySupport);
    }
    // int g * (g/s^2) e^{-g^2/2s^2} dg = [-g e^{..}] + s sqrt(pi/2) erf(g / (s sqrt 2))
    let root2 = std::f64::consts::SQRT_2;
    let gauss =
        scale * (std::f64::consts::PI / 2.0).sqrt() * (erf(high / (scale * root2)) - erf(low / (scale * root2)));
    let mean = (low * e_lo - high * e_hi + gauss) / mass;
    // G^2 is exponential with mean 2 s^2, truncated to [low^2, high^2].
    let second = two_s2 + (low * low * e_lo - high * high * e_hi) / mass;
    Ok((mean, second))
}

/// Gains realised over one block.
#[derive(Debug, Clone, PartialEq)]
pub enum Gains {
    Fast(Vec<f64>),
    /// Broadcast to every channel use.
    Slow(f64),
}

impl Gains {
    pub fn at(&self, t: usize) -> f64 {
        match self {
            Gains::Fast(g) => g[t],
            Gains::Slow(g) => *g,
        }
    }

    pub fn flavor(&self) -> Flavor {
        match self {
            Gains::Fast(_) => Flavor::Fast,
            Gains::Slow(_) => Flavor::Slow,
        }
    }

    /// Errors unless the gains cover `n` channel uses.
    pub fn check_len(&self, n: usize) -> Result<()> {
        match self {
            Gains::Fast(g) if g.len() != n => Err(Error::DimensionMismatch {
                expected: n,
                actual: g.len(),
            }),
            _ => Ok(()),
        }
    }
}

pub fn sample_fading<R: Rng + ?Sized>(spec: &FadingSpec, flavor: Flavor, n: usize, rng: &mut R) -> Result<Gains> {
    if n == 0 {
        return Err(invalid("n", "block length must be at least 1"));
    }
    Ok(match flavor {
        Flavor::Fast => Gains::Fast((0..n).map(|_| spec.sample(rng)).collect()),
        Flavor::Slow => Gains::Slow(spec.sample(rng)),
    })
}

/// `n` i.i.d. `N(0, variance)` draws, or `N(0, variance / n)` when normalized.
pub fn sample_noise<R: Rng + ?Sized>(variance: f64, n: usize, normalized: bool, rng: &mut R) -> Result<Vec<f64>> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(invalid(
            "noise_variance",
            format!("must be finite and > 0, got {variance}"),
        ));
    }
    if n == 0 {
        return Err(invalid("n", "block length must be at least 1"));
    }
    let sd = if normalized {
        (variance / n as f64).sqrt()
    } else {
        variance.sqrt()
    };
    Ok((0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub gains: Gains,
    pub noise: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub flavor: Flavor,
    pub noise_variance: f64,
    pub fading: FadingSpec,
    /// Inputs, outputs and noise are in the `1/sqrt(n)` scale.
    pub normalized: bool,
    /// Power budget `A`: `|x|^2 <= n A`, or `|x| <= sqrt(A)` when normalized.
    pub power: f64,
}

impl ChannelModel {
    pub fn new(flavor: Flavor, noise_variance: f64, fading: FadingSpec, normalized: bool, power: f64) -> Result<Self> {
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(invalid(
                "noise_variance",
                format!("must be finite and > 0, got {noise_variance}"),
            ));
        }
        if !(power > 0.0) || !power.is_finite() {
            return Err(invalid("power", format!("must be finite and > 0, got {power}")));
        }
        Ok(Self {
            flavor,
            noise_variance,
            fading,
            normalized,
            power,
        })
    }

    /// Draws gains and noise from separate generators.
    pub fn realize<R1: Rng + ?Sized, R2: Rng + ?Sized>(
        &self,
        n: usize,
        gain_rng: &mut R1,
        noise_rng: &mut R2,
    ) -> Result<ChannelRealization> {
        Ok(ChannelRealization {
            gains: sample_fading(&self.fading, self.flavor, n, gain_rng)?,
            noise: sample_noise(self.noise_variance, n, self.normalized, noise_rng)?,
        })
    }

    /// Largest admissible `|x|^2` for a length-`n` input.
    pub fn max_energy(&self, n: usize) -> f64 {
        if self.normalized {
            self.power
        } else {
            n as f64 * self.power
        }
    }
}

/// Relative slack on the power check absorbing scale-conversion rounding.
const POWER_SLACK: f64 = 1e-12;

/// `y_t = g_t x_t + z_t` (fast) or `y_t = g x_t + z_t` (slow).
pub fn apply_channel(model: &ChannelModel, x: &[f64], realization: &ChannelRealization) -> Result<Vec<f64>> {
    let n = x.len();
    if realization.noise.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: realization.noise.len(),
        });
    }
    realization.gains.check_len(n)?;
    if realization.gains.flavor() != model.flavor {
        return Err(invalid(
            "realization",
            format!(
                "{} gains given to a {} channel",
                realization.gains.flavor(),
                model.flavor
            ),
        ));
    }
    let energy = norm_sq(x);
    let cap = model.max_energy(n);
    if energy > cap * (1.0 + POWER_SLACK) {
        return Err(Error::InvalidCodeword(format!(
            "input energy {energy} exceeds budget {cap}"
        )));
    }
    Ok(x.iter()
        .zip(&realization.noise)
        .enumerate()
        .map(|(t, (xt, zt))| realization.gains.at(t) * xt + zt)
        .collect())
}
