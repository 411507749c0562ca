//! Closed-form chi-square and noncentral chi-square distribution functions.
//!
//! Test-only ground truth: nothing here is used by the simulator. The central
//! CDF uses the series / continued-fraction split of the regularized incomplete
//! gamma function; the noncentral CDF is the Poisson mixture of central ones.

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + k as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "shape must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "shape must be positive");
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Modified Lentz evaluation of the continued fraction for `Q(a, x)`.
fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// `Pr(chi2_k <= x)`.
pub fn chi2_cdf(k: f64, x: f64) -> f64 {
    gamma_p(k / 2.0, x / 2.0)
}

/// `Pr(chi2_k > x)`.
pub fn chi2_sf(k: f64, x: f64) -> f64 {
    gamma_q(k / 2.0, x / 2.0)
}

/// `Pr(chi2'_k(lambda) <= x)` as `sum_j Pois(j; lambda/2) P(k/2 + j, x/2)`.
///
/// Summation runs outward from the Poisson mode until the weights drop below
/// `1e-18`.
pub fn ncx2_cdf(k: f64, lambda: f64, x: f64) -> f64 {
    assert!(lambda >= 0.0, "noncentrality must be nonnegative");
    if lambda == 0.0 {
        return chi2_cdf(k, x);
    }
    if x <= 0.0 {
        return 0.0;
    }
    let mu = lambda / 2.0;
    let ln_pois = |j: f64| -mu + j * mu.ln() - ln_gamma(j + 1.0);
    let mode = mu.floor();
    let mut total = 0.0;
    let mut j = mode;
    loop {
        let w = ln_pois(j).exp();
        total += w * gamma_p(k / 2.0 + j, x / 2.0);
        if j == 0.0 || w < 1e-18 {
            break;
        }
        j -= 1.0;
    }
    let mut j = mode + 1.0;
    loop {
        let w = ln_pois(j).exp();
        total += w * gamma_p(k / 2.0 + j, x / 2.0);
        if w < 1e-18 {
            break;
        }
        j += 1.0;
    }
    total.clamp(0.0, 1.0)
}

/// `Pr(|v + Z|^2 <= t)` with `Z ~ N(0, s2 / n I_n)`, `|v|^2 = v2`.
pub fn shifted_gaussian_ball_prob(n: usize, v2: f64, s2: f64, t: f64) -> f64 {
    let scale = n as f64 / s2;
    ncx2_cdf(n as f64, v2 * scale, t * scale)
}

/// `Pr(|Z|^2 > t)` with `Z ~ N(0, s2 / n I_n)`.
pub fn gaussian_energy_sf(n: usize, s2: f64, t: f64) -> f64 {
    chi2_sf(n as f64, t * n as f64 / s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn ln_gamma_known_values() {
        assert_relative_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(0.5), std::f64::consts::PI.sqrt().ln(), epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(11.0), 3_628_800f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(101.0), 363.739_375_555_563_5, max_relative = 1e-13);
    }

    // Reference values from scipy.stats 1.x (chi2.sf / chi2.cdf / ncx2.cdf).
    #[test]
    fn central_tabulated() {
        assert_relative_eq!(chi2_sf(16.0, 20.0), 0.220_220_646_601_699_07, max_relative = 1e-12);
        assert_relative_eq!(chi2_sf(1.0, 1.0), 0.317_310_507_862_911_15, max_relative = 1e-12);
        assert_relative_eq!(chi2_sf(10.0, 30.0), 0.000_856_641_210_775_301, max_relative = 1e-10);
        assert_relative_eq!(chi2_sf(100.0, 150.0), 0.000_903_932_042_354_018_4, max_relative = 1e-10);
        assert_relative_eq!(chi2_cdf(3.0, 0.5), 0.081_108_588_345_324_18, max_relative = 1e-12);
        assert_relative_eq!(chi2_cdf(7.0, 7.5), 0.621_263_093_951_786_5, max_relative = 1e-12);
    }

    #[test]
    fn central_matches_statrs() {
        for &k in &[1.0, 2.0, 5.0, 16.0, 64.0, 256.0] {
            let d = ChiSquared::new(k).unwrap();
            for &f in &[0.2, 0.8, 1.0, 1.3, 2.5] {
                let x = k * f;
                assert_relative_eq!(chi2_cdf(k, x), d.cdf(x), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn noncentral_tabulated() {
        assert_relative_eq!(
            ncx2_cdf(16.0, 16.0, 17.0),
            0.042_262_253_046_509_17,
            max_relative = 1e-10
        );
        assert_relative_eq!(ncx2_cdf(4.0, 2.5, 5.0), 0.433_313_465_269_260_4, max_relative = 1e-10);
        assert_relative_eq!(
            ncx2_cdf(32.0, 22.6, 40.0),
            0.112_133_923_010_376_61,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            ncx2_cdf(20.0, 40.0, 60.0),
            0.526_387_479_441_050_6,
            max_relative = 1e-10
        );
        assert_relative_eq!(ncx2_cdf(2.0, 0.3, 1.0), 0.350_448_262_912_497_7, max_relative = 1e-10);
    }

    #[test]
    fn noncentral_reduces_to_central() {
        assert_eq!(ncx2_cdf(6.0, 0.0, 4.0), chi2_cdf(6.0, 4.0));
        assert_relative_eq!(ncx2_cdf(6.0, 1e-12, 4.0), chi2_cdf(6.0, 4.0), epsilon = 1e-11);
    }
}
