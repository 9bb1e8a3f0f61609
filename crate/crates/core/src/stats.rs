//! Confidence intervals for Monte Carlo estimates.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const DEFAULT_LEVEL: f64 = 0.99;

/// A Monte Carlo estimate with its confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub estimate: f64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub master_seed: u64,
}

impl EstimateWithCI {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// Two-sided standard normal quantile for confidence `level`.
pub fn normal_quantile(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain("confidence level", format!("{level} not in (0, 1)")));
    }
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(std.inverse_cdf(0.5 + 0.5 * level))
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::domain("wilson_interval", "trials must be ≥ 1"));
    }
    assert!(successes <= trials);
    let z = normal_quantile(level)?;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the interval always contains p; clamp rounding at the edges
    Ok(((center - spread).max(0.0).min(p), (center + spread).min(1.0).max(p)))
}

/// Summary statistics of a sample, accumulated in index order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    /// Sample excess kurtosis; `0` for a degenerate sample.
    pub excess_kurtosis: f64,
}

pub fn sample_moments(xs: &[f64]) -> SampleMoments {
    use crate::summation::compensated_sum;
    let n = xs.len() as f64;
    let mean = compensated_sum(xs.iter().copied()) / n;
    let m2 = compensated_sum(xs.iter().map(|x| (x - mean).powi(2))) / n;
    let m4 = compensated_sum(xs.iter().map(|x| (x - mean).powi(4))) / n;
    let variance = if xs.len() > 1 { m2 * n / (n - 1.0) } else { 0.0 };
    let excess_kurtosis = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 };
    SampleMoments {
        count: xs.len() as u64,
        mean,
        variance,
        excess_kurtosis,
    }
}

/// Shortest round-trip text for a float cell: `1e-52` rather than fifty zeros,
/// and `inf`, `-inf`, `nan` for non-finite values.
pub fn csv_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_99() {
        assert!((normal_quantile(0.99).unwrap() - 2.5758293035489).abs() < 1e-9);
        assert!((normal_quantile(0.95).unwrap() - 1.959963984540054).abs() < 1e-9);
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn csv_float_forms() {
        assert_eq!(csv_float(0.25), "0.25");
        assert_eq!(csv_float(3.0), "3.0");
        assert_eq!(csv_float(6.5e-52), "6.5e-52");
        assert_eq!(csv_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(csv_float(f64::NAN), "nan");
        assert_eq!(csv_float(0.1 + 0.2).parse::<f64>().unwrap(), 0.1 + 0.2);
    }

    #[test]
    fn wilson_reference_values() {
        // 0 of 10 at 95%: upper = z²/(n+z²)
        let z2 = 1.959963984540054f64.powi(2);
        let (lo, hi) = wilson_interval(0, 10, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - z2 / (10.0 + z2)).abs() < 1e-12);
        let (lo, hi) = wilson_interval(10, 10, 0.95).unwrap();
        assert_eq!(hi, 1.0);
        assert!((lo - 10.0 / (10.0 + z2)).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100, 0.95).unwrap();
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        assert!(wilson_interval(0, 0, 0.99).is_err());
    }

    #[test]
    fn width_shrinks_like_inverse_sqrt() {
        let (a, b) = wilson_interval(250, 1000, 0.99).unwrap();
        let (c, d) = wilson_interval(25_000, 100_000, 0.99).unwrap();
        let ratio = (b - a) / (d - c);
        assert!((ratio - 10.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn moments_of_rademacher_sample() {
        let xs: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let m = sample_moments(&xs);
        assert_eq!(m.mean, 0.0);
        assert!((m.excess_kurtosis + 2.0).abs() < 1e-12);
    }
}
