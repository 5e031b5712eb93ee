//! Interval estimates and normal-distribution helpers.

use libm::erfc;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::CompensatedSum;

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `hits` successes out of `trials`.
pub fn wilson(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if hits >= trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal survival function `1 - Phi(x)`, accurate in the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Kolmogorov-Smirnov distance between the empirical law of `xs` and `N(0,1)`.
pub fn ks_normal(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max))
}

/// Sample mean with its standard error and a normal 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: u64,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptySample);
        }
        let k = xs.len() as f64;
        let mean = xs.iter().copied().collect::<CompensatedSum<f64>>().value() / k;
        let ss = xs
            .iter()
            .map(|&x| (x - mean) * (x - mean))
            .collect::<CompensatedSum<f64>>()
            .value();
        let var = if xs.len() > 1 { ss / (k - 1.0) } else { 0.0 };
        Ok(MeanEstimate {
            mean,
            std_error: (var / k).sqrt(),
            count: xs.len() as u64,
        })
    }

    pub fn ci(&self) -> (f64, f64) {
        (
            self.mean - Z95 * self.std_error,
            self.mean + Z95 * self.std_error,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        for (h, n) in [(0, 10), (3, 10), (10, 10), (228, 10_000)] {
            let (lo, hi) = wilson(h, n, Z95);
            let p = h as f64 / n as f64;
            assert!(lo <= p && p <= hi);
        }
        let (lo, hi) = wilson(0, 1000, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 3.8415 / 1003.8415).abs() < 1e-4);
    }

    #[test]
    fn normal_tail_value() {
        let v = normal_sf(2.0);
        assert!((v / 0.022_750_131_948_179_2 - 1.0).abs() < 1e-13, "{v:e}");
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn ks_of_quantiles_is_small() {
        let xs = [-1.0, 0.0, 1.0];
        let d = ks_normal(&xs).unwrap();
        assert!(d > 0.0 && d < 0.5);
        assert!(ks_normal(&[]).is_err());
    }

    #[test]
    fn mean_estimate() {
        let m = MeanEstimate::from_samples(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.mean, 2.0);
        assert!((m.std_error - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
