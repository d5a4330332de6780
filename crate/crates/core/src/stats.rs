//! Kolmogorov-Smirnov statistics and the conditional KS test.
//!
//! The conditional test maps each observation through its own null CDF,
//! `v_i = F_{u_i}(t_i)`, and runs a one-sample KS test of the `v_i` against
//! the uniform distribution. P-values use the asymptotic Kolmogorov law at
//! every sample size.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::escape::EscapeModel;
use crate::potential::Well;
use crate::reduction::EscapeRecord;

/// Acceptance threshold on `sqrt(n) D_n` used for the 99% decision.
pub const THRESHOLD_99: f64 = 1.6920;

/// Asymptotic Kolmogorov CDF `Q(x) = 1 - 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`.
///
/// For `x < 1` the equivalent theta-function form
/// `sqrt(2 pi)/x sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 x^2))` is summed instead,
/// since the alternating series converges slowly there.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    let q = if x < 1.0 {
        let c = -PI * PI / (8.0 * x * x);
        let mut s = 0.0;
        for k in 1..=100u32 {
            let m = (2 * k - 1) as f64;
            let term = (c * m * m).exp();
            s += term;
            if term < 1e-12 * s.max(1e-300) {
                break;
            }
        }
        (2.0 * PI).sqrt() / x * s
    } else {
        let mut s = 0.0;
        for k in 1..=100u32 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * x * x).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-12 {
                break;
            }
        }
        1.0 - 2.0 * s
    };
    q.clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub n: usize,
    pub statistic: f64,
    /// `sqrt(n) * statistic`.
    pub scaled: f64,
    pub q_value: f64,
    pub accepted_99: bool,
}

impl KsResult {
    fn new(n: usize, statistic: f64) -> Self {
        let scaled = (n as f64).sqrt() * statistic;
        Self { n, statistic, scaled, q_value: kolmogorov_cdf(scaled), accepted_99: scaled <= THRESHOLD_99 }
    }
}

/// One-sample KS test of values already mapped through the null CDF.
pub fn ks_uniform(values: &[f64]) -> Result<KsResult> {
    if values.is_empty() {
        return Err(Error::EmptyInput("KS sample"));
    }
    if let Some((index, value)) = values.iter().copied().enumerate().find(|(_, v)| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidCdfValue { index, value });
    }
    let mut z = values.to_vec();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let d = z
        .iter()
        .enumerate()
        .map(|(i, zi)| ((i + 1) as f64 / n - zi).max(zi - i as f64 / n))
        .fold(0.0, f64::max);
    Ok(KsResult::new(z.len(), d))
}

pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let z: Vec<f64> = samples.iter().map(|s| cdf(*s)).collect();
    ks_uniform(&z)
}

/// Conditional KS test of `(u_i, t_i)` pairs against the family `cdf(u, t)`.
pub fn conditional_ks(pairs: &[(f64, f64)], cdf: impl Fn(f64, f64) -> f64) -> Result<KsResult> {
    let v: Vec<f64> = pairs.iter().map(|&(u, t)| cdf(u, t)).collect();
    ks_uniform(&v)
}

/// Conditional KS test of the escapes out of `well` against the model's conditional CDFs.
pub fn conditional_ks_records(records: &[EscapeRecord], model: &EscapeModel, well: Well) -> Result<KsResult> {
    let pairs: Vec<(f64, f64)> = records.iter().filter(|r| r.well == well).map(|r| (r.u, r.t)).collect();
    conditional_ks(&pairs, |u, t| model.conditional(well, u).cdf(t))
}

/// Empirical CDF of the values as `(x, fraction <= x)` steps.
pub fn staircase(values: &[f64]) -> Vec<(f64, f64)> {
    let mut z = values.to_vec();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    z.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kolmogorov_values() {
        assert_eq!(kolmogorov_cdf(0.0), 0.0);
        assert_relative_eq!(kolmogorov_cdf(1.36), 0.9505, epsilon = 1e-4);
        assert_relative_eq!(kolmogorov_cdf(0.5233), 0.0529, epsilon = 1e-4);
        assert_relative_eq!(kolmogorov_cdf(1.0465), 0.7766, epsilon = 1e-4);
        assert!(kolmogorov_cdf(10.0) == 1.0);
    }

    #[test]
    fn both_series_agree_near_one() {
        for &x in &[0.9, 0.99, 1.0, 1.01, 1.2] {
            let alt = 1.0 - 2.0 * (1..60).map(|k| {
                let k = k as f64;
                (-1f64).powf(k - 1.0) * (-2.0 * k * k * x * x).exp()
            }).sum::<f64>();
            assert_relative_eq!(kolmogorov_cdf(x), alt, epsilon = 1e-12);
        }
    }

    #[test]
    fn small_samples() {
        assert_relative_eq!(ks_uniform(&[0.3]).unwrap().statistic, 0.7);
        assert_relative_eq!(ks_uniform(&[0.5]).unwrap().statistic, 0.5);
        assert_relative_eq!(ks_uniform(&[0.75, 0.25]).unwrap().statistic, 0.25);
        let r = conditional_ks(&[(0.0, 0.25), (1.0, 1.75)], |u, t| t - u).unwrap();
        assert_relative_eq!(r.statistic, 0.25);
        assert_relative_eq!(r.scaled, 0.25 * 2f64.sqrt());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ks_uniform(&[]), Err(Error::EmptyInput(_))));
        assert!(matches!(ks_uniform(&[0.2, 1.5]), Err(Error::InvalidCdfValue { index: 1, .. })));
    }

    #[test]
    fn staircase_steps() {
        assert_eq!(staircase(&[0.5, 0.1]), vec![(0.1, 0.5), (0.5, 1.0)]);
    }
}
