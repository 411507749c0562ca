//! Monte-Carlo estimates of type I and type II identification errors.
//!
//! Trial `t` draws its gains from substream `(seed, "gains", t)` and its noise
//! from `(seed, "noise", t)`, so estimates are independent of thread count and
//! two runs with the same seed see the same noise (common random numbers).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel, sample_fading, sample_noise, ChannelModel, ChannelRealization, Flavor, Gains};
use crate::codec::{delta_n, Codebook, DecoderRule, Schedule};
use crate::error::{invalid, Error, Result};
use crate::rng::{labels, stream, Substream};

pub const DEFAULT_CONFIDENCE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub trials: u64,
    pub seed: u64,
    /// Multiplier on the standard error used for pass/fail comparisons.
    pub confidence: f64,
}

impl TrialPlan {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            confidence: DEFAULT_CONFIDENCE,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if !(self.confidence >= 0.0) {
            return Err(invalid("confidence", "must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Missed identification: the sent message is rejected.
    TypeI,
    /// False identification: another message is accepted.
    TypeII,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: ErrorKind,
    pub n: usize,
    pub power: f64,
    pub b: f64,
    pub flavor: Flavor,
    pub family: String,
    pub gamma: f64,
    pub g_max: f64,
    pub noise_variance: f64,
    pub delta: f64,
    /// Sent message (1-based).
    pub i: usize,
    /// Tested message for type II.
    pub j: Option<usize>,
    pub trials: u64,
    pub errors: u64,
    pub estimate: f64,
    pub std_error: f64,
    /// Closed-form Chebyshev bound, when the decoder uses the achievability slack.
    pub bound: Option<f64>,
    /// Gain the trials were conditioned on (slow grid points, worst-case argmax).
    pub g: Option<f64>,
    pub confidence: f64,
}

impl ErrorReport {
    /// `estimate <= bound + k * stderr`, checked only when the bound is at most 1.
    pub fn respects_bound(&self) -> Option<bool> {
        self.bound
            .filter(|b| *b <= 1.0)
            .map(|b| self.estimate <= b + self.confidence * self.std_error)
    }

    /// Whether `value` lies within `k` standard errors of the estimate. The
    /// standard error is the larger of the empirical one and the one implied by
    /// `value`, so a zero count can still agree with a tiny true probability.
    pub fn agrees_with(&self, value: f64) -> bool {
        let se = self.std_error.max(binomial_std_error(value, self.trials));
        (self.estimate - value).abs() <= self.confidence * se
    }
}

pub fn binomial_std_error(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// `27 sigma^4 / (n^b A^2 gamma^4)`.
pub fn type1_chebyshev_bound(n: usize, power: f64, b: f64, noise_variance: f64, gamma: f64) -> f64 {
    27.0 * noise_variance.powi(2) / ((n as f64).powf(b) * power * power * gamma.powi(4))
}

/// `144 sigma^2 E[G^2] / (gamma^4 A n^b)`, the cross-term contribution.
pub fn eta1(n: usize, power: f64, b: f64, noise_variance: f64, gamma: f64, second_moment: f64) -> f64 {
    144.0 * noise_variance * second_moment / (gamma.powi(4) * power * (n as f64).powf(b))
}

/// How each trial obtains its gains.
#[derive(Debug, Clone, Copy, PartialEq)]
enum GainMode {
    Sample,
    Fixed(f64),
}

struct Setup<'a> {
    codebook: &'a Codebook,
    model: &'a ChannelModel,
    rule: DecoderRule<'a>,
}

impl<'a> Setup<'a> {
    fn new(codebook: &'a Codebook, model: &'a ChannelModel, delta: f64) -> Result<Self> {
        Ok(Self {
            codebook,
            model,
            rule: DecoderRule::new(codebook, model.noise_variance, delta, model.flavor)?,
        })
    }

    fn bound(&self, kind: ErrorKind) -> Option<f64> {
        let cb = self.codebook;
        let gamma = self.model.fading.gamma();
        if cb.schedule != Schedule::Achievability || !(gamma > 0.0) {
            return None;
        }
        let expected = delta_n(gamma, cb.epsilon).ok()?;
        if (self.rule.delta() - expected).abs() > 1e-12 * expected {
            return None;
        }
        let sigma2 = self.model.noise_variance;
        let t1 = type1_chebyshev_bound(cb.n, cb.power, cb.b, sigma2, gamma);
        Some(match kind {
            ErrorKind::TypeI => t1,
            ErrorKind::TypeII => t1 + eta1(cb.n, cb.power, cb.b, sigma2, gamma, self.model.fading.second_moment()),
        })
    }

    fn realization(
        &self,
        mode: GainMode,
        gains: &Substream,
        noise: &Substream,
        trial: u64,
    ) -> Result<ChannelRealization> {
        let n = self.codebook.n;
        let g = match mode {
            GainMode::Sample => sample_fading(&self.model.fading, self.model.flavor, n, &mut gains.rng(trial))?,
            GainMode::Fixed(g) => match self.model.flavor {
                Flavor::Fast => Gains::Fast(vec![g; n]),
                Flavor::Slow => Gains::Slow(g),
            },
        };
        let z = sample_noise(
            self.model.noise_variance,
            n,
            self.model.normalized,
            &mut noise.rng(trial),
        )?;
        Ok(ChannelRealization { gains: g, noise: z })
    }

    /// One trial: send `sent`, test `tested`, report acceptance.
    fn trial(
        &self,
        mode: GainMode,
        sent: usize,
        tested: usize,
        streams: &(Substream, Substream),
        t: u64,
    ) -> Result<bool> {
        let r = self.realization(mode, &streams.0, &streams.1, t)?;
        let u = self.codebook.encode(sent)?;
        let y_bar = if self.model.normalized {
            apply_channel(self.model, u, &r)?
        } else {
            let s = (self.codebook.n as f64).sqrt();
            let x: Vec<f64> = u.iter().map(|v| v * s).collect();
            let mut y = apply_channel(self.model, &x, &r)?;
            y.iter_mut().for_each(|v| *v /= s);
            y
        };
        self.rule.identify(&y_bar, tested, &r.gains)
    }

    fn check_model(&self) -> Result<()> {
        if self.model.power < self.codebook.power * (1.0 - 1e-12) {
            return Err(Error::InvalidCodeword(format!(
                "codebook power {} exceeds channel budget {}",
                self.codebook.power, self.model.power
            )));
        }
        Ok(())
    }

    fn run(
        &self,
        kind: ErrorKind,
        sent: usize,
        tested: usize,
        mode: GainMode,
        plan: &TrialPlan,
    ) -> Result<ErrorReport> {
        plan.validate()?;
        self.check_model()?;
        self.codebook.encode(sent)?;
        self.codebook.encode(tested)?;
        if let GainMode::Fixed(g) = mode {
            if !self.model.fading.contains(g) {
                return Err(invalid("g", format!("gain {g} is outside the fading support")));
            }
        }
        let streams = (
            Substream::new(plan.seed, labels::GAINS),
            Substream::new(plan.seed, labels::NOISE),
        );
        let accepted: u64 = (0..plan.trials)
            .into_par_iter()
            .map(|t| self.trial(mode, sent, tested, &streams, t).map(u64::from))
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        let errors = match kind {
            ErrorKind::TypeI => plan.trials - accepted,
            ErrorKind::TypeII => accepted,
        };
        let estimate = errors as f64 / plan.trials as f64;
        let fading = &self.model.fading;
        Ok(ErrorReport {
            kind,
            n: self.codebook.n,
            power: self.codebook.power,
            b: self.codebook.b,
            flavor: self.model.flavor,
            family: fading.family().name().to_string(),
            gamma: fading.gamma(),
            g_max: fading.g_max(),
            noise_variance: self.model.noise_variance,
            delta: self.rule.delta(),
            i: sent,
            j: (kind == ErrorKind::TypeII).then_some(tested),
            trials: plan.trials,
            errors,
            estimate,
            std_error: binomial_std_error(estimate, plan.trials),
            bound: self.bound(kind),
            g: match mode {
                GainMode::Fixed(g) => Some(g),
                GainMode::Sample => None,
            },
            confidence: plan.confidence,
        })
    }
}

/// Fraction of trials in which message `i` is sent and rejected.
pub fn estimate_type1(
    codebook: &Codebook,
    model: &ChannelModel,
    i: usize,
    delta: f64,
    plan: &TrialPlan,
) -> Result<ErrorReport> {
    Setup::new(codebook, model, delta)?.run(ErrorKind::TypeI, i, i, GainMode::Sample, plan)
}

/// Fraction of trials in which `i` is sent and `j` is accepted.
pub fn estimate_type2(
    codebook: &Codebook,
    model: &ChannelModel,
    i: usize,
    j: usize,
    delta: f64,
    plan: &TrialPlan,
) -> Result<ErrorReport> {
    if i == j {
        return Err(invalid("j", "type II error needs two distinct messages"));
    }
    Setup::new(codebook, model, delta)?.run(ErrorKind::TypeII, i, j, GainMode::Sample, plan)
}

/// Error estimate conditioned on the gain `g` for every trial.
pub fn estimate_at_gain(
    codebook: &Codebook,
    model: &ChannelModel,
    i: usize,
    j: Option<usize>,
    delta: f64,
    g: f64,
    plan: &TrialPlan,
) -> Result<ErrorReport> {
    let setup = Setup::new(codebook, model, delta)?;
    match j {
        None => setup.run(ErrorKind::TypeI, i, i, GainMode::Fixed(g), plan),
        Some(j) if j == i => Err(invalid("j", "type II error needs two distinct messages")),
        Some(j) => setup.run(ErrorKind::TypeII, i, j, GainMode::Fixed(g), plan),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseReport {
    /// Report at the maximising grid point (`g` holds the argmax).
    pub worst: ErrorReport,
    pub points: Vec<ErrorReport>,
}

impl WorstCaseReport {
    pub fn argmax_g(&self) -> f64 {
        self.worst.g.unwrap_or(f64::NAN)
    }
}

/// Sup over a finite gain grid of the per-gain error, with common random numbers.
/// Ties resolve to the first (smallest-index) grid point.
pub fn estimate_worst_case(
    codebook: &Codebook,
    model: &ChannelModel,
    i: usize,
    j: Option<usize>,
    delta: f64,
    grid: &[f64],
    plan: &TrialPlan,
) -> Result<WorstCaseReport> {
    if model.flavor != Flavor::Slow {
        return Err(invalid("flavor", "worst-case estimation needs a slow-fading model"));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let points = grid
        .iter()
        .map(|&g| estimate_at_gain(codebook, model, i, j, delta, g, plan))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = &points[0];
    for p in &points[1..] {
        if p.estimate > worst.estimate {
            worst = p;
        }
    }
    Ok(WorstCaseReport {
        worst: worst.clone(),
        points,
    })
}

/// `count` ordered pairs `(i, j)`, `i != j`, drawn uniformly from `1..=len`
/// using the `pairs` substream of `seed`.
pub fn random_pairs(len: usize, count: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if len < 2 {
        return Err(invalid(
            "random_pairs",
            format!("need at least two codewords, have {len}"),
        ));
    }
    let mut rng = stream(seed, labels::PAIRS);
    Ok((0..count)
        .map(|_| {
            let i = rng.random_range(1..=len);
            let mut j = rng.random_range(1..len);
            if j >= i {
                j += 1;
            }
            (i, j)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NearCodewordReport {
    /// Codeword separation in the raw (unnormalized) scale.
    pub alpha: f64,
    pub normalized_distance: f64,
    pub delta: f64,
    pub type1: ErrorReport,
    pub type2: ErrorReport,
}

impl NearCodewordReport {
    pub fn sum(&self) -> f64 {
        self.type1.estimate + self.type2.estimate
    }

    /// Conservative joint standard error `sqrt(se1^2 + se2^2)`.
    pub fn sum_std_error(&self) -> f64 {
        self.type1.std_error.hypot(self.type2.std_error)
    }
}

/// Separation `sqrt(n eps_n) = sqrt(A) n^(-(1+2b)/2)` with `eps_n = A / n^(2(1+b))`.
pub fn converse_alpha(n: usize, power: f64, b: f64) -> f64 {
    power.sqrt() * (n as f64).powf(-(1.0 + 2.0 * b) / 2.0)
}

/// Two codewords `alpha` apart (raw scale) under the standard achievability decoder:
/// type I on message 1 plus type II with message 2 sent and message 1 tested.
///
/// `separation` overrides the normalized codeword distance.
pub fn near_codeword_experiment(
    n: usize,
    power: f64,
    b: f64,
    model: &ChannelModel,
    plan: &TrialPlan,
    separation: Option<f64>,
) -> Result<NearCodewordReport> {
    if n < 2 {
        return Err(invalid("n", format!("must be at least 2, got {n}")));
    }
    let root_n = (n as f64).sqrt();
    let normalized_distance = match separation {
        Some(d) if !(d > 0.0) || !d.is_finite() => return Err(invalid("separation", "must be finite and > 0")),
        Some(d) => d,
        None => converse_alpha(n, power, b) / root_n,
    };
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    u1[0] = normalized_distance / 2.0;
    u2[0] = -normalized_distance / 2.0;
    let codebook = Codebook::from_codewords(n, power, b, Schedule::Achievability, vec![u1, u2])?;
    let delta = delta_n(model.fading.gamma(), codebook.epsilon)?;
    let type1 = estimate_type1(&codebook, model, 1, delta, plan)?;
    let type2 = estimate_type2(&codebook, model, 2, 1, delta, plan)?;
    Ok(NearCodewordReport {
        alpha: normalized_distance * root_n,
        normalized_distance,
        delta,
        type1,
        type2,
    })
}
