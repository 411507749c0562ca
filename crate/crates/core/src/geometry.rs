//! Hypersphere volumes, uniform sampling in balls and saturated random packings.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::rng::{labels, Substream};

/// A closed Euclidean ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(invalid("center", "dimension must be at least 1"));
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(invalid("radius", format!("must be finite and >= 0, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn origin(n: usize, radius: f64) -> Result<Self> {
        Self::new(vec![0.0; n], radius)
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.center.len() && distance_sq(point, &self.center) <= self.radius * self.radius
    }

    pub fn volume(&self) -> f64 {
        // Validated at construction.
        sphere_volume(self.dimension(), self.radius).unwrap_or(f64::NAN)
    }

    /// Draws a point uniformly from the ball.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut p = sample_uniform_ball(rng, self.dimension(), self.radius);
        for (x, c) in p.iter_mut().zip(&self.center) {
            *x += c;
        }
        p
    }
}

/// Natural log of the volume of an `n`-ball of radius `r`.
pub fn ln_sphere_volume(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "dimension must be at least 1"));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(invalid("r", format!("radius must be finite and >= 0, got {r}")));
    }
    let half = n as f64 / 2.0;
    Ok(half * std::f64::consts::PI.ln() - ln_gamma(half + 1.0) + n as f64 * r.ln())
}

/// Volume `pi^(n/2) / Gamma(n/2 + 1) * r^n`, evaluated in the log domain.
pub fn sphere_volume(n: usize, r: f64) -> Result<f64> {
    ln_sphere_volume(n, r).map(f64::exp)
}

/// Uniform point in the origin-centred ball: Gaussian direction, radius `r * U^(1/n)`.
pub fn sample_uniform_ball<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64) -> Vec<f64> {
    let mut v: Vec<f64> = loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if norm_sq(&v) > 0.0 {
            break v;
        }
    };
    let norm = norm_sq(&v).sqrt();
    let u: f64 = rng.random();
    let scale = r * u.powf(1.0 / n as f64) / norm;
    v.iter_mut().for_each(|x| *x *= scale);
    v
}

pub fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    norm_sq(v).sqrt()
}

pub fn distance_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    distance_sq(a, b).sqrt()
}

/// Exact minimum Euclidean distance over distinct pairs (O(L^2)).
pub fn min_pairwise_distance(points: &[Vec<f64>]) -> Result<f64> {
    if points.len() < 2 {
        return Err(invalid(
            "points",
            format!("need at least 2 points, got {}", points.len()),
        ));
    }
    let n = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: bad.len(),
        });
    }
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min(distance_sq(a, b));
        }
    }
    Ok(best.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingConfig {
    pub n: usize,
    /// Radius of the packed spheres.
    pub r0: f64,
    /// Centers are drawn from the origin ball of this radius.
    pub r1: f64,
    pub seed: u64,
    /// Consecutive rejected candidates after which the packing is declared saturated.
    pub saturation_patience: u64,
    pub max_codewords: usize,
}

impl PackingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "dimension must be at least 1"));
        }
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return Err(invalid("r0", format!("must be finite and > 0, got {}", self.r0)));
        }
        if !self.r1.is_finite() {
            return Err(invalid("r1", format!("must be finite, got {}", self.r1)));
        }
        if !(self.r1 > 0.0) {
            return Err(Error::DegenerateGeometry(format!(
                "center radius r1 = {} leaves no room for centers",
                self.r1
            )));
        }
        if self.saturation_patience == 0 {
            return Err(invalid("saturation_patience", "must be at least 1"));
        }
        if self.max_codewords == 0 {
            return Err(invalid("max_codewords", "must be at least 1"));
        }
        Ok(())
    }

    /// `2^-n (r1/r0)^n` in log2, the count guaranteed for a saturated packing.
    pub fn log2_saturation_bound(&self) -> f64 {
        self.n as f64 * ((self.r1 / self.r0).log2() - 1.0)
    }
}

/// A set of centers whose `r0`-spheres are pairwise disjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Packing {
    pub config: PackingConfig,
    pub centers: Vec<Vec<f64>>,
    pub saturated: bool,
}

impl Packing {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Checks the non-overlap and center-norm invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let min_sep_sq = 4.0 * self.config.r0 * self.config.r0;
        let r1_sq = self.config.r1 * self.config.r1;
        for (i, c) in self.centers.iter().enumerate() {
            if c.len() != self.config.n {
                return Err(Error::DimensionMismatch {
                    expected: self.config.n,
                    actual: c.len(),
                });
            }
            if norm_sq(c) > r1_sq {
                return Err(Error::InvalidCodeword(format!(
                    "center {i} has norm {} > r1 = {}",
                    norm(c),
                    self.config.r1
                )));
            }
            for (j, d) in self.centers[..i].iter().enumerate() {
                if distance_sq(c, d) < min_sep_sq {
                    return Err(Error::InvalidCodeword(format!(
                        "centers {j} and {i} are {} apart, need {}",
                        distance(c, d),
                        2.0 * self.config.r0
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Random sequential packing: accept uniform candidates that keep `2 r0` clearance
/// until `saturation_patience` consecutive rejections or `max_codewords` centers.
pub fn generate_saturated_packing(config: &PackingConfig) -> Result<Packing> {
    config.validate()?;
    let mut rng = Substream::new(config.seed, labels::CODEBOOK).rng(0);
    let min_sep_sq = 4.0 * config.r0 * config.r0;
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut rejected_run = 0u64;
    let mut saturated = false;
    while centers.len() < config.max_codewords {
        let candidate = sample_uniform_ball(&mut rng, config.n, config.r1);
        // Guard against the last ulp of the radius scaling.
        if norm_sq(&candidate) > config.r1 * config.r1 {
            continue;
        }
        let clear = centers.iter().all(|c| distance_sq(c, &candidate) >= min_sep_sq);
        if clear {
            centers.push(candidate);
            rejected_run = 0;
        } else {
            rejected_run += 1;
            if rejected_run >= config.saturation_patience {
                saturated = true;
                break;
            }
        }
    }
    if centers.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    Ok(Packing {
        config: config.clone(),
        centers,
        saturated,
    })
}

/// Monte-Carlo volume fraction with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    pub fraction: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Fraction of the `r1`-ball lying within `r0` of some center.
pub fn estimate_packing_density(packing: &Packing, samples: u64, seed: u64) -> Result<DensityEstimate> {
    if samples == 0 {
        return Err(invalid("samples", "must be at least 1"));
    }
    if packing.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    let cfg = &packing.config;
    let r0_sq = cfg.r0 * cfg.r0;
    let mut rng = Substream::new(seed, labels::DENSITY).rng(0);
    let mut hits = 0u64;
    for _ in 0..samples {
        let p = sample_uniform_ball(&mut rng, cfg.n, cfg.r1);
        if packing.centers.iter().any(|c| distance_sq(c, &p) <= r0_sq) {
            hits += 1;
        }
    }
    let fraction = hits as f64 / samples as f64;
    Ok(DensityEstimate {
        fraction,
        std_error: (fraction * (1.0 - fraction) / samples as f64).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn cfg(n: usize, r0: f64, r1: f64, patience: u64, seed: u64) -> PackingConfig {
        PackingConfig {
            n,
            r0,
            r1,
            seed,
            saturation_patience: patience,
            max_codewords: 1_000_000,
        }
    }

    #[test]
    fn volume_small_dimensions() {
        assert_relative_eq!(sphere_volume(2, 1.0).unwrap(), PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_volume(1, 2.0).unwrap(), 4.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_volume(3, 1.0).unwrap(), 4.0 * PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn volume_rejects_bad_input() {
        assert!(sphere_volume(0, 1.0).is_err());
        assert!(sphere_volume(3, -0.1).is_err());
        assert!(sphere_volume(3, f64::NAN).is_err());
    }

    #[test]
    fn volume_matches_dimension_recurrence() {
        // V_n = 2 pi / n * V_{n-2}, seeded with V_1 = 2, V_2 = pi.
        let mut direct = vec![0.0, 2.0, PI];
        for n in 3..=50 {
            direct.push(2.0 * PI / n as f64 * direct[n - 2]);
        }
        for (n, &v) in direct.iter().enumerate().skip(1) {
            for &r in &[0.3, 1.0, 1.7] {
                let want = v * f64::powi(r, n as i32);
                assert_relative_eq!(sphere_volume(n, r).unwrap(), want, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn min_distance_examples() {
        let d = min_pairwise_distance(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(d, 5.0);
        let d = min_pairwise_distance(&[vec![0.0], vec![1.0], vec![10.0]]).unwrap();
        assert_eq!(d, 1.0);
        assert!(min_pairwise_distance(&[vec![0.0]]).is_err());
        assert!(matches!(
            min_pairwise_distance(&[vec![0.0], vec![1.0, 2.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn packing_2d_meets_doubling_bound() {
        let p = generate_saturated_packing(&cfg(2, 1.0, 10.0, 100_000, 11)).unwrap();
        p.check_invariants().unwrap();
        assert!(p.saturated);
        assert!(p.len() >= 25, "count {}", p.len());
        assert!(min_pairwise_distance(&p.centers).unwrap() >= 2.0);
    }

    #[test]
    fn packing_small_outer_radius_is_nonempty() {
        let p = generate_saturated_packing(&cfg(1, 1.0, 1.0, 1_000, 3)).unwrap();
        assert!(!p.is_empty());
        let p = generate_saturated_packing(&cfg(3, 2.0, 1.0, 10, 3)).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p.saturated);
        p.check_invariants().unwrap();
    }

    #[test]
    fn packing_respects_cap() {
        let mut c = cfg(8, 0.01, 1.0, 1000, 5);
        c.max_codewords = 17;
        let p = generate_saturated_packing(&c).unwrap();
        assert_eq!(p.len(), 17);
        assert!(!p.saturated);
    }

    #[test]
    fn packing_rejects_degenerate_configs() {
        assert!(matches!(
            generate_saturated_packing(&cfg(2, 1.0, -0.5, 10, 0)),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(generate_saturated_packing(&cfg(2, 0.0, 1.0, 10, 0)).is_err());
        assert!(generate_saturated_packing(&cfg(2, 1.0, 1.0, 0, 0)).is_err());
    }

    #[test]
    fn packing_is_seed_deterministic() {
        let a = generate_saturated_packing(&cfg(3, 0.5, 2.0, 5_000, 99)).unwrap();
        let b = generate_saturated_packing(&cfg(3, 0.5, 2.0, 5_000, 99)).unwrap();
        let c = generate_saturated_packing(&cfg(3, 0.5, 2.0, 5_000, 100)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.centers, c.centers);
    }

    #[test]
    fn density_single_covering_sphere() {
        let p = Packing {
            config: cfg(3, 1.0, 1.0, 1, 0),
            centers: vec![vec![0.0; 3]],
            saturated: true,
        };
        let d = estimate_packing_density(&p, 10_000, 1).unwrap();
        assert!((d.fraction - 1.0).abs() <= 3.0 * d.std_error + 1e-12);
        assert!(estimate_packing_density(&p, 0, 1).is_err());
    }

    #[test]
    fn density_1d_interval_union() {
        // Intervals [-1.5,-0.5], [-0.5,0.5], [0.5,1.5] cover [-1,1] entirely.
        let r1 = 1.0;
        let p = Packing {
            config: cfg(1, r1 / 2.0, r1, 1, 0),
            centers: vec![vec![-r1], vec![0.0], vec![r1]],
            saturated: true,
        };
        let d = estimate_packing_density(&p, 20_000, 2).unwrap();
        assert!((d.fraction - 1.0).abs() <= 3.0 * d.std_error + 1e-12);
    }

    #[test]
    fn density_of_saturated_packing_at_least_two_pow_minus_n() {
        let p = generate_saturated_packing(&cfg(2, 1.0, 10.0, 100_000, 8)).unwrap();
        let d = estimate_packing_density(&p, 50_000, 4).unwrap();
        assert!(d.fraction >= 0.25 - 3.0 * d.std_error, "{d:?}");
    }

    #[test]
    fn ball_sampling_stays_inside() {
        let ball = Ball::new(vec![1.0, -2.0, 0.5], 0.7).unwrap();
        let mut rng = crate::rng::stream(1, "t");
        for _ in 0..1000 {
            assert!(ball.contains(&ball.sample(&mut rng)));
        }
        assert!(Ball::new(vec![0.0], -1.0).is_err());
        assert_relative_eq!(Ball::origin(2, 1.0).unwrap().volume(), PI, max_relative = 1e-14);
    }

    #[test]
    fn ball_sampling_radius_law() {
        // Pr(|X| <= r/2) = 2^-n for a uniform point in an n-ball.
        let mut rng = crate::rng::stream(3, "t");
        let trials = 40_000;
        let inner = (0..trials)
            .filter(|_| norm(&sample_uniform_ball(&mut rng, 3, 2.0)) <= 1.0)
            .count() as f64
            / trials as f64;
        let se = (0.125f64 * 0.875 / trials as f64).sqrt();
        assert!((inner - 0.125).abs() < 4.0 * se, "{inner}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn doubling_radius_scales_volume(n in 1usize..40, r in 0.01f64..5.0) {
                let v = sphere_volume(n, r).unwrap();
                let v2 = sphere_volume(n, 2.0 * r).unwrap();
                prop_assert!((v2 / v - 2f64.powi(n as i32)).abs() <= 1e-11 * 2f64.powi(n as i32));
            }

            #[test]
            fn generated_packings_hold_invariants(
                n in 1usize..5,
                r0 in 0.2f64..1.0,
                ratio in 1.0f64..6.0,
                seed in any::<u64>(),
            ) {
                let p = generate_saturated_packing(&cfg(n, r0, r0 * ratio, 300, seed)).unwrap();
                prop_assert!(p.check_invariants().is_ok());
                if p.len() >= 2 {
                    prop_assert!(min_pairwise_distance(&p.centers).unwrap() >= 2.0 * r0);
                }
            }
        }
    }
}
