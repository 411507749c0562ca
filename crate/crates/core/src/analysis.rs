//! Code-size scales, numeric dominance certificates, rate bounds and the
//! capacity-regime table for DI codes over fading Gaussian channels.
//!
//! All logarithms are base 2, so rates are in bits.
//!
//! The implemented scale order is the usual asymptotic one,
//! `Log < Linear < Poly(k) < Exp < SuperExp < DoubleExp`, with `Log` placed
//! below `Linear`.

use serde::{Deserialize, Serialize};

use crate::channel::Flavor;
use crate::codec::{Codebook, Schedule};
use crate::error::{invalid, Error, Result};

/// Lower end of the super-exponential capacity band.
pub const SUPEREXP_CAPACITY_LOWER: f64 = 0.25;
/// Upper end of the super-exponential capacity band.
pub const SUPEREXP_CAPACITY_UPPER: f64 = 1.0;

/// Reference values at the double-exponential scale for a fixed error level
/// `0 < eps < 1`: the RI eps-capacity equals [`ri_capacity`] for every eps, the
/// DI eps-capacity is zero below [`DI_EPSILON_CAPACITY_THRESHOLD`] and infinite
/// at or above it.
pub const DI_EPSILON_CAPACITY_THRESHOLD: f64 = 0.5;

/// Code size `L(n, R)` as a function of block length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scale {
    /// `log(nR)`
    Log,
    /// `nR`
    Linear,
    /// `(nR)^k`, `k >= 1`
    Poly { k: f64 },
    /// `2^(nR)`
    Exp,
    /// `2^(n log(n) R)`
    SuperExp,
    /// `2^(2^(nR))`
    DoubleExp,
}

impl Scale {
    pub fn validate(&self) -> Result<()> {
        match self {
            Scale::Poly { k } if !(*k >= 1.0) || !k.is_finite() => {
                Err(invalid("k", format!("polynomial degree must be >= 1, got {k}")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Scale::Log => "log".into(),
            Scale::Linear => "linear".into(),
            Scale::Poly { k } => format!("poly{k}"),
            Scale::Exp => "exp".into(),
            Scale::SuperExp => "superexp".into(),
            Scale::DoubleExp => "doubleexp".into(),
        }
    }

    /// The default chain, from slowest to fastest growth.
    pub fn chain() -> [Scale; 6] {
        [
            Scale::Log,
            Scale::Linear,
            Scale::Poly { k: 2.0 },
            Scale::Exp,
            Scale::SuperExp,
            Scale::DoubleExp,
        ]
    }
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "log" => Scale::Log,
            "linear" => Scale::Linear,
            "exp" => Scale::Exp,
            "superexp" => Scale::SuperExp,
            "doubleexp" => Scale::DoubleExp,
            other => match other.strip_prefix("poly") {
                Some(k) => {
                    let k: f64 = k
                        .parse()
                        .map_err(|_| invalid("scale", format!("bad polynomial degree in `{other}`")))?;
                    let s = Scale::Poly { k };
                    s.validate()?;
                    s
                }
                None => return Err(invalid("scale", format!("unknown scale `{other}`"))),
            },
        })
    }
}

fn check_nr(n: f64, rate: f64) -> Result<()> {
    if !(n >= 2.0) || !n.is_finite() {
        return Err(invalid("n", format!("must be finite and >= 2, got {n}")));
    }
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(invalid("R", format!("must be finite and > 0, got {rate}")));
    }
    Ok(())
}

/// `log2 L(n, R)`. Sizes at or below zero (`log(nR) <= 0`) map to `-inf`.
///
/// `DoubleExp` returns `2^(nR)` only while it is representable; beyond that
/// use [`loglog2_scale`].
pub fn log2_scale(scale: Scale, n: f64, rate: f64) -> Result<f64> {
    check_nr(n, rate)?;
    scale.validate()?;
    let nr = n * rate;
    Ok(match scale {
        Scale::Log => {
            let l = nr.log2();
            if l > 0.0 {
                l.log2()
            } else {
                f64::NEG_INFINITY
            }
        }
        Scale::Linear => nr.log2(),
        Scale::Poly { k } => k * nr.log2(),
        Scale::Exp => nr,
        Scale::SuperExp => n * n.log2() * rate,
        Scale::DoubleExp => {
            let v = nr.exp2();
            if !v.is_finite() {
                return Err(invalid(
                    "n",
                    format!("log2 of 2^(2^(nR)) overflows at nR = {nr}; use the log-log value"),
                ));
            }
            v
        }
    })
}

/// `log2 log2 L(n, R)`; `-inf` whenever `log2 L <= 0`.
pub fn loglog2_scale(scale: Scale, n: f64, rate: f64) -> Result<f64> {
    check_nr(n, rate)?;
    if scale == Scale::DoubleExp {
        return Ok(n * rate);
    }
    let l = log2_scale(scale, n, rate)?;
    Ok(if l > 0.0 { l.log2() } else { f64::NEG_INFINITY })
}

/// Settings for the numeric dominance certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceGrid {
    pub n: Vec<f64>,
    /// The log-difference at the last grid point must fall below this (bits).
    pub margin: f64,
    /// Fraction of the grid (from the end) that must be strictly decreasing.
    pub tail_fraction: f64,
}

impl Default for DominanceGrid {
    /// `n = 2^4, 2^5, ..., 2^256`, margin `-40` bits, last quarter decreasing.
    fn default() -> Self {
        Self {
            n: (4..=256).map(|k| f64::powi(2.0, k)).collect(),
            margin: -40.0,
            tail_fraction: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceEvidence {
    pub dominates: bool,
    /// Whether the trail is in log-log units (some scale is double exponential).
    pub loglog: bool,
    /// `(n, log L2(n, b) - log L1(n, a))` along the grid.
    pub trail: Vec<(f64, f64)>,
    pub explanation: String,
}

/// Numeric certificate that `l2(n, b) / l1(n, a) -> 0`: the log-difference is
/// strictly decreasing over the grid tail and ends below the margin. This is
/// evidence, not a proof.
pub fn dominates(l1: Scale, l2: Scale, a: f64, b: f64, grid: &DominanceGrid) -> Result<DominanceEvidence> {
    l1.validate()?;
    l2.validate()?;
    if !(a > 0.0) || !(b > 0.0) {
        return Err(invalid("a, b", "rates must be > 0"));
    }
    if grid.n.len() < 2 || grid.n.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("n_grid", "need at least two strictly increasing points"));
    }
    if !(grid.tail_fraction > 0.0 && grid.tail_fraction <= 1.0) {
        return Err(invalid("tail_fraction", "must lie in (0, 1]"));
    }
    let loglog = l1 == Scale::DoubleExp || l2 == Scale::DoubleExp;
    let eval = |s: Scale, n: f64, r: f64| {
        if loglog {
            loglog2_scale(s, n, r)
        } else {
            log2_scale(s, n, r)
        }
    };
    let mut trail = Vec::with_capacity(grid.n.len());
    for &n in &grid.n {
        let lhs = eval(l2, n, b)?;
        let rhs = eval(l1, n, a)?;
        let diff = if lhs == f64::NEG_INFINITY && rhs > f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else if rhs == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            lhs - rhs
        };
        trail.push((n, diff));
    }
    let tail_len = ((grid.n.len() as f64 * grid.tail_fraction).ceil() as usize).clamp(2, grid.n.len());
    let tail = &trail[trail.len() - tail_len..];
    let decreasing = tail.windows(2).all(|w| {
        let (p, q) = (w[0].1, w[1].1);
        q < p || (q == f64::NEG_INFINITY && p == f64::NEG_INFINITY)
    });
    let last = trail.last().map(|p| p.1).unwrap_or(f64::NAN);
    let below = last < grid.margin;
    let dominates = decreasing && below;
    let explanation = if dominates {
        format!("log-difference decreasing over the last {tail_len} points, ending at {last:.3e}")
    } else if tail.windows(2).all(|w| w[0].1 == w[1].1) {
        format!("ratio is constant ({last}) along the grid tail")
    } else if !decreasing {
        format!("log-difference not decreasing over the last {tail_len} points")
    } else {
        format!("final log-difference {last:.3e} is above the {} margin", grid.margin)
    };
    Ok(DominanceEvidence {
        dominates,
        loglog,
        trail,
        explanation,
    })
}

/// `(1 - b)/4 - 2/log2(n)`; negative values mean the bound is vacuous at this `n`.
pub fn achievable_rate_lower_bound(n: f64, b: f64) -> f64 {
    0.25 * (1.0 - b) - 2.0 / n.log2()
}

/// `1 + b + log2(1 + n^-(1+b)) / log2(n)`.
pub fn converse_rate_upper_bound(n: f64, b: f64) -> f64 {
    1.0 + b + (n.powf(-(1.0 + b))).ln_1p() / std::f64::consts::LN_2 / n.log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacingCheck {
    pub n: usize,
    pub b: f64,
    /// `sqrt(n eps_n)` with `eps_n = A / n^(2(1+b))`.
    pub required: f64,
    pub required_normalized: f64,
    pub achieved: f64,
    pub achieved_normalized: f64,
    pub pass: bool,
}

/// Compares a codebook's minimum spacing against the converse requirement,
/// in the raw (unnormalized) scale.
pub fn converse_spacing(codebook: &Codebook, b: f64) -> Result<SpacingCheck> {
    if codebook.len() < 2 {
        return Err(invalid("codebook", "spacing needs at least two codewords"));
    }
    if !(b > 0.0) && b != 0.0 {
        return Err(invalid("b", format!("must be >= 0, got {b}")));
    }
    let n = codebook.n;
    let root_n = (n as f64).sqrt();
    let eps = Schedule::ConverseSpacing.epsilon(n, codebook.power, b);
    let required = (n as f64 * eps).sqrt();
    let achieved_normalized = match codebook.min_distance {
        Some(d) => d,
        None => crate::geometry::min_pairwise_distance(codebook.codewords())?,
    };
    let achieved = achieved_normalized * root_n;
    Ok(SpacingCheck {
        n,
        b,
        required,
        required_normalized: required / root_n,
        achieved,
        achieved_normalized,
        pass: achieved >= required,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Zero,
    FiniteBand { lower: f64, upper: f64 },
    Infinite,
}

impl Verdict {
    pub fn label(&self) -> String {
        match self {
            Verdict::Zero => "zero".into(),
            Verdict::FiniteBand { lower, upper } => format!("[{lower}, {upper}]"),
            Verdict::Infinite => "infinite".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeVerdict {
    pub flavor: Flavor,
    pub scale: Scale,
    pub zero_in_closure: bool,
    pub verdict: Verdict,
}

fn growth_rank(scale: Scale) -> u8 {
    match scale {
        Scale::Log => 0,
        Scale::Linear => 1,
        Scale::Poly { .. } => 2,
        Scale::Exp => 3,
        Scale::SuperExp => 4,
        Scale::DoubleExp => 5,
    }
}

/// DI capacity regime per fading flavor and scale.
///
/// Fast fading assumes gains bounded away from zero, so the zero flag only
/// affects slow fading. A slow channel whose gain support closure contains
/// zero has capacity zero at every scale (two messages already cannot be
/// told apart); otherwise the super-exponential band is `[1/4, 1]`, slower
/// scales are infinite and the double-exponential scale is zero.
pub fn classify_regime(flavor: Flavor, scale: Scale, zero_in_closure: bool) -> RegimeVerdict {
    let verdict = if flavor == Flavor::Slow && zero_in_closure {
        Verdict::Zero
    } else {
        match growth_rank(scale).cmp(&growth_rank(Scale::SuperExp)) {
            std::cmp::Ordering::Less => Verdict::Infinite,
            std::cmp::Ordering::Equal => Verdict::FiniteBand {
                lower: SUPEREXP_CAPACITY_LOWER,
                upper: SUPEREXP_CAPACITY_UPPER,
            },
            std::cmp::Ordering::Greater => Verdict::Zero,
        }
    };
    RegimeVerdict {
        flavor,
        scale,
        zero_in_closure,
        verdict,
    }
}

/// RI capacity `1/2 log2(1 + g^2 A / sigma^2)` at the double-exponential scale.
pub fn ri_capacity(g: f64, power: f64, noise_variance: f64) -> Result<f64> {
    for (name, v) in [("g", g), ("power", power), ("noise_variance", noise_variance)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid(name, format!("must be finite and > 0, got {v}")));
        }
    }
    Ok(0.5 * (g * g * power / noise_variance).ln_1p() / std::f64::consts::LN_2)
}

/// `log2(L) / (n log2(n))`.
pub fn empirical_rate(codebook: &Codebook) -> f64 {
    rate_from_size(codebook.n, codebook.len() as f64)
}

pub fn rate_from_size(n: usize, size: f64) -> f64 {
    let n = n as f64;
    size.log2() / (n * n.log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: f64,
    pub b: f64,
    pub lower: f64,
    pub upper: f64,
}

impl BoundRow {
    pub fn lower_vacuous(&self) -> bool {
        self.lower <= 0.0
    }
}

pub fn bound_table(ns: &[f64], b: f64) -> Vec<BoundRow> {
    ns.iter()
        .map(|&n| BoundRow {
            n,
            b,
            lower: achievable_rate_lower_bound(n, b),
            upper: converse_rate_upper_bound(n, b),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{build_codebook, CodebookParams};
    use approx::assert_relative_eq;

    #[test]
    fn log2_scale_examples() {
        assert_eq!(log2_scale(Scale::Exp, 10.0, 1.0).unwrap(), 10.0);
        assert_relative_eq!(
            log2_scale(Scale::SuperExp, 256.0, 0.0731).unwrap(),
            256.0 * 8.0 * 0.0731
        );
        assert_eq!(loglog2_scale(Scale::DoubleExp, 10.0, 1.0).unwrap(), 10.0);
        assert_relative_eq!(log2_scale(Scale::Linear, 8.0, 2.0).unwrap(), 4.0);
        assert_relative_eq!(log2_scale(Scale::Poly { k: 3.0 }, 8.0, 0.5).unwrap(), 6.0);
        assert_relative_eq!(log2_scale(Scale::Log, 16.0, 1.0).unwrap(), 2.0);
        assert_eq!(log2_scale(Scale::Log, 2.0, 0.25).unwrap(), f64::NEG_INFINITY);
        assert!(log2_scale(Scale::DoubleExp, 2000.0, 1.0).is_err());
        assert!(log2_scale(Scale::Exp, 1.0, 1.0).is_err());
        assert!(log2_scale(Scale::Exp, 4.0, 0.0).is_err());
        assert!(log2_scale(Scale::Poly { k: 0.5 }, 4.0, 1.0).is_err());
    }

    #[test]
    fn scale_names_round_trip() {
        for s in Scale::chain() {
            assert_eq!(s.name().parse::<Scale>().unwrap(), s);
        }
        assert!("cubic".parse::<Scale>().is_err());
    }

    #[test]
    fn dominance_examples() {
        let g = DominanceGrid::default();
        assert!(dominates(Scale::SuperExp, Scale::Exp, 0.1, 10.0, &g).unwrap().dominates);
        let same = dominates(Scale::Exp, Scale::Exp, 1.0, 1.0, &g).unwrap();
        assert!(!same.dominates);
        assert!(same.explanation.contains("constant"));
        let dd = dominates(Scale::DoubleExp, Scale::SuperExp, 0.01, 100.0, &g).unwrap();
        assert!(dd.dominates && dd.loglog);
    }

    #[test]
    fn dominance_needs_large_n_for_lopsided_rates() {
        // n (10 - 0.1 log2 n) only turns negative past n = 2^100.
        let short = DominanceGrid {
            n: (4..=20).map(|k| f64::powi(2.0, k)).collect(),
            ..DominanceGrid::default()
        };
        assert!(
            !dominates(Scale::SuperExp, Scale::Exp, 0.1, 10.0, &short)
                .unwrap()
                .dominates
        );
    }

    #[test]
    fn dominance_rejects_bad_grid() {
        let g = DominanceGrid {
            n: vec![8.0, 4.0],
            ..DominanceGrid::default()
        };
        assert!(dominates(Scale::Exp, Scale::Linear, 1.0, 1.0, &g).is_err());
        assert!(dominates(Scale::Exp, Scale::Linear, 0.0, 1.0, &DominanceGrid::default()).is_err());
    }

    #[test]
    fn rate_bound_examples() {
        assert_relative_eq!(achievable_rate_lower_bound(65536.0, 0.0), 0.125, max_relative = 1e-15);
        assert_relative_eq!(achievable_rate_lower_bound(16.0, 0.5), -0.375, max_relative = 1e-15);
        assert!((achievable_rate_lower_bound(f64::powi(2.0, 1000), 1e-9) - 0.25).abs() < 0.003);
        let u = converse_rate_upper_bound(1024.0, 0.01);
        assert_relative_eq!(
            u,
            1.01 + (1.0 + 1024f64.powf(-1.01)).log2() / 10.0,
            max_relative = 1e-14
        );
        assert!((u - 1.0101).abs() < 1e-4);
        assert!((converse_rate_upper_bound(f64::powi(2.0, 200), 0.3) - 1.3).abs() < 1e-12);
    }

    #[test]
    fn spacing_examples() {
        // At n = 16, b = 0 the achievability radii coincide (r0 = r1 = 1/2), so the only
        // pairs at the packing distance 1 are antipodal; build one by hand.
        let mut hi = vec![0.0; 16];
        let mut lo = vec![0.0; 16];
        hi[0] = 0.5;
        lo[0] = -0.5;
        let pair = Codebook::from_codewords(16, 1.0, 0.0, Schedule::Achievability, vec![hi, lo]).unwrap();
        let packed = build_codebook(&CodebookParams {
            n: 16,
            power: 1.0,
            b: 0.0,
            schedule: Schedule::ConverseSpacing,
            seed: 1,
            patience: 500,
            max_codewords: 50,
        })
        .unwrap();
        for cb in [pair, packed] {
            let s = converse_spacing(&cb, 0.0).unwrap();
            assert_relative_eq!(s.required, 0.25, max_relative = 1e-15);
            assert_relative_eq!(s.required_normalized, 1.0 / 16.0, max_relative = 1e-15);
            assert!(s.achieved_normalized >= 2.0 * cb.epsilon.sqrt() * (1.0 - 1e-15));
            assert!(s.pass);
        }
        let n = 16;
        let d = 1.0 / (n as f64 * n as f64);
        let mut a = vec![0.0; n];
        a[0] = d;
        let cb = Codebook::from_codewords(n, 1.0, 0.5, Schedule::Achievability, vec![vec![0.0; n], a]).unwrap();
        assert!(!converse_spacing(&cb, 0.5).unwrap().pass);
        let single = Codebook::from_codewords(n, 1.0, 0.5, Schedule::Achievability, vec![vec![0.0; n]]).unwrap();
        assert!(converse_spacing(&single, 0.5).is_err());
    }

    #[test]
    fn required_spacing_shrinks_with_n() {
        let mut prev = f64::INFINITY;
        for n in [4usize, 8, 16, 64, 256, 1024] {
            let r = Schedule::ConverseSpacing.epsilon(n, 1.0, 0.2) * n as f64;
            assert!(r.sqrt() < prev);
            prev = r.sqrt();
        }
    }

    #[test]
    fn regime_examples() {
        assert_eq!(
            classify_regime(Flavor::Fast, Scale::SuperExp, false).verdict,
            Verdict::FiniteBand {
                lower: 0.25,
                upper: 1.0
            }
        );
        assert_eq!(classify_regime(Flavor::Slow, Scale::Exp, true).verdict, Verdict::Zero);
        assert_eq!(
            classify_regime(Flavor::Slow, Scale::DoubleExp, false).verdict,
            Verdict::Zero
        );
        assert_eq!(
            classify_regime(Flavor::Fast, Scale::Exp, false).verdict,
            Verdict::Infinite
        );
        assert_eq!(
            classify_regime(Flavor::Fast, Scale::Linear, true).verdict,
            Verdict::Infinite
        );
        assert_eq!(classify_regime(Flavor::Slow, Scale::Log, true).verdict, Verdict::Zero);
    }

    #[test]
    fn ri_capacity_examples() {
        assert_relative_eq!(ri_capacity(1.0, 1.0, 1.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(ri_capacity(1.0, 3.0, 1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(ri_capacity(2.0, 1.0, 4.0).unwrap(), 0.5, max_relative = 1e-15);
        assert!(ri_capacity(0.0, 1.0, 1.0).is_err());
        assert!(ri_capacity(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn empirical_rate_examples() {
        let one = Codebook::from_codewords(4, 1.0, 0.0, Schedule::Achievability, vec![vec![0.0; 4]]).unwrap();
        assert_eq!(empirical_rate(&one), 0.0);
        assert_relative_eq!(
            rate_from_size(256, 149.8f64.exp2()),
            149.8 / 2048.0,
            max_relative = 1e-12
        );
        assert!((rate_from_size(256, 149.8f64.exp2()) - 0.0731).abs() < 1e-4);
        let mut prev = -1.0;
        for l in 1..50 {
            let r = rate_from_size(32, l as f64);
            assert!(r > prev);
            prev = r;
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rate_bounds_never_cross(log_n in 1.0f64..60.0, b in 0.0001f64..0.9999) {
                let n = log_n.exp2();
                prop_assert!(achievable_rate_lower_bound(n, b) < converse_rate_upper_bound(n, b));
            }
        }
    }
}
