//! Periodic functions tabulated on a uniform grid over one period.
//!
//! Rates enter almost every formula through their running integral, so the
//! table keeps a prefix sum of exact per-segment integrals of its
//! interpolant. Integrals over long spans use the per-period total times the
//! number of whole periods plus a remainder.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    /// Piecewise linear in the value. Allows zeros.
    Linear,
    /// Piecewise linear in the logarithm of the value. Values must be positive.
    LogLinear,
}

#[derive(Clone, Debug)]
pub struct PeriodicTable {
    period: f64,
    step: f64,
    interp: Interpolation,
    values: Vec<f64>,
    /// Natural logs of `values`, only for `LogLinear`.
    logs: Vec<f64>,
    /// `prefix[j]` is the integral from 0 to grid point `j`; `prefix[n]` covers the whole period.
    prefix: Vec<f64>,
}

impl PeriodicTable {
    pub fn new(period: f64, values: Vec<f64>, interp: Interpolation) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParams("periodic table values must be finite and >= 0".into()));
        }
        let logs = match interp {
            Interpolation::Linear => Vec::new(),
            Interpolation::LogLinear => {
                if values.iter().any(|v| *v <= 0.0) {
                    return Err(Error::InvalidParams("log-linear table values must be positive".into()));
                }
                values.iter().map(|v| v.ln()).collect()
            }
        };
        Self::build(period, values, logs, interp)
    }

    /// Log-linear table given by the logarithms of its values.
    pub fn from_logs(period: f64, logs: Vec<f64>) -> Result<Self> {
        if logs.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
            return Err(Error::InvalidParams("log values must be finite".into()));
        }
        let values = logs.iter().map(|l| l.exp()).collect();
        Self::build(period, values, logs, Interpolation::LogLinear)
    }

    pub fn constant(period: f64, value: f64) -> Result<Self> {
        Self::new(period, vec![value], Interpolation::Linear)
    }

    fn build(period: f64, values: Vec<f64>, logs: Vec<f64>, interp: Interpolation) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("periodic table"));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParams(format!("period must be positive, got {period}")));
        }
        let step = period / values.len() as f64;
        let mut table = Self { period, step, interp, values, logs, prefix: Vec::new() };
        let mut prefix = Vec::with_capacity(table.values.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for j in 0..table.values.len() {
            acc += table.partial_segment(j, 1.0);
            prefix.push(acc);
        }
        table.prefix = prefix;
        Ok(table)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid spacing.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interp
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |j| j as f64 * self.step)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Integral over one full period.
    pub fn period_integral(&self) -> f64 {
        self.prefix[self.len()]
    }

    /// Splits `t` into (whole periods, segment index, fraction within segment).
    fn locate(&self, t: f64) -> (f64, usize, f64) {
        let k = (t / self.period).floor();
        let r = t - k * self.period;
        let pos = r / self.step;
        let j = (pos.floor() as usize).min(self.len() - 1);
        let frac = (pos - j as f64).clamp(0.0, 1.0);
        (k, j, frac)
    }

    fn next(&self, j: usize) -> usize {
        if j + 1 == self.len() {
            0
        } else {
            j + 1
        }
    }

    /// Interpolant value at fraction `frac` of segment `j`.
    pub fn segment_value(&self, j: usize, frac: f64) -> f64 {
        let k = self.next(j);
        match self.interp {
            Interpolation::Linear => self.values[j] + frac * (self.values[k] - self.values[j]),
            Interpolation::LogLinear => (self.logs[j] + frac * (self.logs[k] - self.logs[j])).exp(),
        }
    }

    /// Integral of the interpolant from the start of segment `j` to fraction `frac` of it.
    pub fn partial_segment(&self, j: usize, frac: f64) -> f64 {
        let k = self.next(j);
        let h = self.step * frac;
        match self.interp {
            Interpolation::Linear => {
                let v0 = self.values[j];
                let v1 = v0 + frac * (self.values[k] - v0);
                0.5 * h * (v0 + v1)
            }
            Interpolation::LogLinear => {
                let d = (self.logs[k] - self.logs[j]) * frac;
                let v0 = self.values[j];
                if d.abs() < 1e-12 {
                    v0 * h * (1.0 + 0.5 * d)
                } else {
                    v0 * h * d.exp_m1() / d
                }
            }
        }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let (_, j, frac) = self.locate(t);
        self.segment_value(j, frac)
    }

    /// Integral from 0 to `t` (negative `t` gives the negated integral back to 0).
    pub fn cumulative(&self, t: f64) -> f64 {
        let (k, j, frac) = self.locate(t);
        k * self.period_integral() + self.prefix[j] + self.partial_segment(j, frac)
    }

    /// Integral from `a` to `b`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let (ka, ja, fa) = self.locate(a);
        let (kb, jb, fb) = self.locate(b);
        if ka == kb && ja == jb {
            return self.partial_segment(jb, fb) - self.partial_segment(ja, fa);
        }
        (kb - ka) * self.period_integral() + (self.prefix[jb] - self.prefix[ja])
            + (self.partial_segment(jb, fb) - self.partial_segment(ja, fa))
    }

    /// Smallest `t` with `cumulative(t) = target`, by bisection inside the
    /// bracketing segment. Requires a positive period integral.
    pub fn inverse_cumulative(&self, target: f64) -> Result<f64> {
        let total = self.period_integral();
        if !(total > 0.0) {
            return Err(Error::InvalidParams("cannot invert a cumulative integral that never grows".into()));
        }
        let mut k = (target / total).floor();
        let mut rem = target - k * total;
        if rem >= total {
            k += 1.0;
            rem -= total;
        }
        // first j with prefix[j + 1] >= rem
        let j = self.prefix[1..].partition_point(|p| *p < rem).min(self.len() - 1);
        let need = rem - self.prefix[j];
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.partial_segment(j, mid) < need {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON {
                break;
            }
        }
        Ok(k * self.period + (j as f64 + 0.5 * (lo + hi)) * self.step)
    }

    /// Pointwise combination of two tables on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.len() != other.len() || self.period != other.period {
            return Err(Error::InvalidParams("tables must share period and grid".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Self::new(self.period, values, self.interp)
    }
}

/// Maps nondecreasing times to cells of a uniform grid over a period,
/// caching the current cell so consecutive lookups skip the division.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseCursor {
    period: f64,
    n: usize,
    h: f64,
    inv_h: f64,
    start: f64,
    end: f64,
    index: usize,
}

impl PhaseCursor {
    pub fn new(period: f64, n: usize) -> Self {
        let h = period / n as f64;
        Self { period, n, h, inv_h: 1.0 / h, start: f64::NAN, end: f64::NAN, index: 0 }
    }

    /// Cell index of `t` and the fraction of the cell elapsed.
    #[inline]
    pub fn locate(&mut self, t: f64) -> (usize, f64) {
        if !(t >= self.start && t < self.end) {
            self.seek(t);
        }
        (self.index, (t - self.start) * self.inv_h)
    }

    fn seek(&mut self, t: f64) {
        let k = (t / self.period).floor();
        let base = k * self.period;
        let j = (((t - base) * self.inv_h) as usize).min(self.n - 1);
        self.index = j;
        self.start = base + j as f64 * self.h;
        self.end = if j + 1 == self.n { base + self.period } else { self.start + self.h };
    }
}
