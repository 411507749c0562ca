//! TOML experiment configuration. Every table rejects unknown keys.

use std::path::{Path, PathBuf};

use dilab_core::{FadingFamily, Flavor, Schedule, WeightedGain};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub trials: Option<u64>,
    pub pack: Option<PackConfig>,
    pub simulate: Option<SimulateConfig>,
    #[serde(rename = "converse-check")]
    pub converse_check: Option<ConverseConfig>,
    #[serde(rename = "near-codeword")]
    pub near_codeword: Option<NearCodewordConfig>,
    pub scales: Option<ScalesConfig>,
    pub sweep: Option<SweepConfig>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io("reading", path))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }
}

fn one() -> f64 {
    1.0
}

fn unit_gain() -> FadingFamily {
    FadingFamily::Discrete {
        points: vec![WeightedGain {
            value: 1.0,
            weight: 1.0,
        }],
    }
}

fn uniform_half() -> FadingFamily {
    FadingFamily::UniformInterval { low: 0.5, high: 1.5 }
}

/// Codebook construction parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PackConfig {
    pub n: usize,
    #[serde(alias = "A")]
    pub power: f64,
    pub b: f64,
    pub schedule: Schedule,
    /// Consecutive rejected candidates that declare the packing saturated.
    pub patience: u64,
    pub max_codewords: usize,
}

impl Default for PackConfig {
    fn default() -> Self {
        Self {
            n: 64,
            power: 1.0,
            b: 0.0,
            schedule: Schedule::Achievability,
            patience: 2_000,
            max_codewords: 4_096,
        }
    }
}

/// Channel and decoder parameters shared by `simulate` and `sweep`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub flavor: Flavor,
    pub fading: FadingFamily,
    /// Declares `0` to be in the closure of the gain support.
    pub zero_in_closure: bool,
    pub noise_variance: f64,
    pub normalized: bool,
    /// Channel power budget; defaults to the codebook's `A`.
    pub power: Option<f64>,
    /// Decoder slack; defaults to `gamma^2 eps_n / 3`.
    pub delta: Option<f64>,
    /// Points in the slow-fading worst-case grid.
    pub grid_resolution: usize,
}

/// Declares the channel keys inline so tables stay flat and reject unknown keys.
macro_rules! channel_section {
    ($(#[$meta:meta])* pub struct $name:ident { $($(#[$fmeta:meta])* pub $field:ident: $ty:ty = $default:expr,)* }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields, default)]
        pub struct $name {
            $($(#[$fmeta])* pub $field: $ty,)*
            pub flavor: Flavor,
            pub fading: FadingFamily,
            pub zero_in_closure: bool,
            #[serde(alias = "sigma2")]
            pub noise_variance: f64,
            pub normalized: bool,
            pub channel_power: Option<f64>,
            pub delta: Option<f64>,
            pub grid_resolution: usize,
        }

        impl Default for $name {
            fn default() -> Self {
                Self {
                    $($field: $default,)*
                    flavor: Flavor::Fast,
                    fading: uniform_half(),
                    zero_in_closure: false,
                    noise_variance: 0.01,
                    normalized: true,
                    channel_power: None,
                    delta: None,
                    grid_resolution: 33,
                }
            }
        }

        impl $name {
            pub fn channel(&self) -> ChannelConfig {
                ChannelConfig {
                    flavor: self.flavor,
                    fading: self.fading.clone(),
                    zero_in_closure: self.zero_in_closure,
                    noise_variance: self.noise_variance,
                    normalized: self.normalized,
                    power: self.channel_power,
                    delta: self.delta,
                    grid_resolution: self.grid_resolution,
                }
            }
        }
    };
}

channel_section! {
    pub struct SimulateConfig {
        /// Codebook file; when absent, one is packed from the `[pack]` table.
        pub codebook: Option<PathBuf> = None,
        /// Explicit ordered pairs `[i, j]` (1-based): `i` sent, `j` tested.
        pub pairs: Option<Vec<[usize; 2]>> = None,
        /// Number of random distinct pairs when `pairs` is absent (default 4).
        pub random_pairs: Option<usize> = None,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConverseConfig {
    pub codebook: Option<PathBuf>,
    /// Defaults to the codebook's `b`.
    pub b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NearCodewordConfig {
    pub ns: Vec<usize>,
    #[serde(alias = "A")]
    pub power: f64,
    pub b: f64,
    #[serde(alias = "sigma2")]
    pub noise_variance: f64,
    pub fading: FadingFamily,
    /// Normalized codeword separation; defaults to the converse spacing.
    pub separation: Option<f64>,
    /// Optional floor on `p1 + p2` at every `n` in `ns`.
    pub min_sum: Option<f64>,
}

impl Default for NearCodewordConfig {
    fn default() -> Self {
        Self {
            ns: vec![16, 64, 256],
            power: 1.0,
            b: 0.1,
            noise_variance: 1.0,
            fading: unit_gain(),
            separation: None,
            min_sum: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalePair {
    pub l1: String,
    pub l2: String,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    /// Expected verdict; defaults to the chain order.
    pub expect: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalesConfig {
    /// Grid is `n = 2^log2_n_min, ..., 2^log2_n_max`.
    pub log2_n_min: i32,
    pub log2_n_max: i32,
    pub margin: f64,
    pub tail_fraction: f64,
    /// Pairs to certify; defaults to every ordered pair of the chain at `a = b = 1`.
    pub pairs: Option<Vec<ScalePair>>,
}

impl Default for ScalesConfig {
    fn default() -> Self {
        Self {
            log2_n_min: 4,
            log2_n_max: 256,
            margin: -40.0,
            tail_fraction: 0.25,
            pairs: None,
        }
    }
}

channel_section! {
    pub struct SweepConfig {
        pub ns: Vec<usize> = vec![16, 64, 256],
        #[serde(alias = "A")]
        pub power: f64 = 1.0,
        pub b: f64 = 0.0,
        pub schedule: Schedule = Schedule::Achievability,
        pub patience: u64 = 1_000,
        pub max_codewords: usize = 1_024,
    }
}
