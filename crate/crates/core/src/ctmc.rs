//! Two-state continuous-time Markov chain with periodic switching rates.
//!
//! `p(t)` is the rate of leaving state -1 (left), `q(t)` the rate of leaving
//! state +1 (right). With `G(t) = int_0^t (p + q)` the occupation of the left
//! state solves
//!
//! ```text
//! nu_-(t) = nu_-(0) e^{-G(t)} + int_0^t q(s) e^{G(s) - G(t)} ds
//! ```
//!
//! and the periodic limit is
//!
//! ```text
//! nubar_-(t) = J(t) + e^{-G(t)} J(T) / (1 - e^{-G(T)}),   J(t) = int_0^t q(s) e^{G(s) - G(t)} ds
//! ```
//!
//! Both are evaluated with the scaled integral `J`, never with `e^{G}` itself,
//! so long periods with large rates do not overflow. Left occupation carries
//! the `q` integrals; with constant rates this gives the stationary
//! distribution `nu_- = q / (p + q)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periodic::{Interpolation, PeriodicTable};

/// Relative threshold below which `p` and `q` are treated as identical.
pub const SYMMETRIC_TOL: f64 = 1e-12;

/// Largest increment of `G` handled by one quadrature panel.
const MAX_PANEL_GROWTH: f64 = 0.5;

// 8-point Gauss-Legendre on [0, 1].
const GL_NODES: [f64; 8] = [
    0.019_855_071_751_231_912,
    0.101_666_761_293_186_64,
    0.237_233_795_041_835_5,
    0.408_282_678_752_175_1,
    0.591_717_321_247_824_8,
    0.762_766_204_958_164_5,
    0.898_333_238_706_813_4,
    0.980_144_928_248_768_1,
];
const GL_WEIGHTS: [f64; 8] = [
    0.050_614_268_145_188_344,
    0.111_190_517_226_687_17,
    0.156_853_322_938_943_52,
    0.181_341_891_689_180_88,
    0.181_341_891_689_180_88,
    0.156_853_322_938_943_52,
    0.111_190_517_226_687_17,
    0.050_614_268_145_188_344,
];

#[derive(Clone, Debug)]
pub struct RatePair {
    p: PeriodicTable,
    q: PeriodicTable,
    sum: PeriodicTable,
}

impl RatePair {
    /// Rates tabulated on the same uniform grid over `[0, period)`, linearly interpolated.
    pub fn new(period: f64, p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::InvalidParams("p and q must share the grid".into()));
        }
        let p = PeriodicTable::new(period, p, Interpolation::Linear)?;
        let q = PeriodicTable::new(period, q, Interpolation::Linear)?;
        let sum = p.zip_with(&q, |a, b| a + b)?;
        Ok(Self { p, q, sum })
    }

    pub fn constant(period: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(period, vec![p], vec![q])
    }

    pub fn period(&self) -> f64 {
        self.p.period()
    }

    pub fn p(&self) -> &PeriodicTable {
        &self.p
    }

    pub fn q(&self) -> &PeriodicTable {
        &self.q
    }

    /// `p(t) + q(t)`, the decay rate of deviations between solutions.
    pub fn total(&self) -> &PeriodicTable {
        &self.sum
    }

    pub fn is_symmetric(&self) -> bool {
        let scale = self.p.max().max(self.q.max());
        let diff = self.p.values().iter().zip(self.q.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        diff <= SYMMETRIC_TOL * scale
    }

    /// Scaled integral over `[a, b]` inside one grid segment `j`:
    /// returns `int_a^b q(s) e^{G(s) - G(b)} ds` and `G(b) - G(a)`.
    fn panel(&self, j: usize, fa: f64, fb: f64) -> (f64, f64) {
        let h = self.sum.step();
        let gb = self.sum.partial_segment(j, fb);
        let growth = gb - self.sum.partial_segment(j, fa);
        let pieces = ((growth / MAX_PANEL_GROWTH).ceil() as usize).clamp(1, 1 << 20);
        let width = (fb - fa) / pieces as f64;
        let mut acc = 0.0;
        for k in 0..pieces {
            let lo = fa + k as f64 * width;
            for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                let f = lo + x * width;
                let decay = self.sum.partial_segment(j, f) - gb;
                acc += w * self.q.segment_value(j, f) * decay.exp();
            }
        }
        (acc * width * h, growth)
    }

    /// Advances `(J, G)` from `a` to `b >= a`.
    fn advance(&self, mut j_acc: f64, mut g_acc: f64, a: f64, b: f64) -> (f64, f64) {
        let h = self.sum.step();
        let n = self.sum.len();
        let mut t = a;
        while t < b {
            let mut cell = (t / h).floor();
            if (cell + 1.0) * h <= t {
                cell += 1.0;
            }
            let j = (cell as i64).rem_euclid(n as i64) as usize;
            let fa = (t / h - cell).clamp(0.0, 1.0);
            let cell_end = (cell + 1.0) * h;
            let end = cell_end.min(b);
            let fb = if end == cell_end { 1.0 } else { ((end / h) - cell).clamp(fa, 1.0) };
            let (contrib, growth) = self.panel(j, fa, fb);
            j_acc = j_acc * (-growth).exp() + contrib;
            g_acc += growth;
            t = end;
        }
        (j_acc, g_acc)
    }

    /// `(J(t), G(t))` at each of the sorted `times`.
    fn sweep(&self, times: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(times.len());
        let (mut j_acc, mut g_acc, mut at) = (0.0, 0.0, 0.0);
        for &t in times {
            (j_acc, g_acc) = self.advance(j_acc, g_acc, at, t);
            at = t;
            out.push((j_acc, g_acc));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateProbability {
    pub t: f64,
    pub nu_minus: f64,
    pub nu_plus: f64,
}

impl StateProbability {
    /// Builds the pair from the left occupation; `nu_plus = 1 - nu_minus`.
    pub fn new(t: f64, nu_minus: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu_minus) {
            return Err(Error::InvalidParams(format!("probability {nu_minus} outside [0, 1]")));
        }
        Ok(Self { t, nu_minus, nu_plus: 1.0 - nu_minus })
    }

    fn clamped(t: f64, nu_minus: f64) -> Self {
        let nu_minus = nu_minus.clamp(0.0, 1.0);
        Self { t, nu_minus, nu_plus: 1.0 - nu_minus }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantMeasure {
    pub grid: Vec<f64>,
    pub nu_minus_bar: Vec<f64>,
    pub nu_plus_bar: Vec<f64>,
}

/// State probabilities at each of the non-decreasing `times`, starting from `nu0` at `t = 0`.
pub fn transient_path(rates: &RatePair, nu0: StateProbability, times: &[f64]) -> Result<Vec<StateProbability>> {
    if times.iter().any(|t| *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams("times must be non-negative and sorted".into()));
    }
    if rates.is_symmetric() {
        let offset = nu0.nu_plus - nu0.nu_minus;
        return Ok(times
            .iter()
            .map(|&t| {
                let decay = (-2.0 * rates.p.cumulative(t)).exp();
                StateProbability::clamped(t, 0.5 - 0.5 * offset * decay)
            })
            .collect());
    }
    Ok(rates
        .sweep(times)
        .into_iter()
        .zip(times)
        .map(|((j, g), &t)| StateProbability::clamped(t, nu0.nu_minus * (-g).exp() + j))
        .collect())
}

pub fn transient(rates: &RatePair, nu0: StateProbability, t: f64) -> Result<StateProbability> {
    Ok(transient_path(rates, nu0, &[t])?[0])
}

/// Periodic limit of the state probabilities on `n_grid` uniform points of one period.
pub fn invariant_measure(rates: &RatePair, n_grid: usize) -> Result<InvariantMeasure> {
    if n_grid == 0 {
        return Err(Error::InvalidParams("n_grid must be positive".into()));
    }
    let period = rates.period();
    let grid: Vec<f64> = (0..n_grid).map(|j| j as f64 * period / n_grid as f64).collect();
    if rates.sum.period_integral() <= 0.0 {
        return Err(Error::InvalidParams("p + q vanishes identically".into()));
    }
    if rates.is_symmetric() {
        return Ok(InvariantMeasure { nu_minus_bar: vec![0.5; n_grid], nu_plus_bar: vec![0.5; n_grid], grid });
    }
    let mut times = grid.clone();
    times.push(period);
    let swept = rates.sweep(&times);
    let (j_period, g_period) = swept[n_grid];
    if !g_period.is_finite() || !j_period.is_finite() {
        return Err(Error::NumericalOverflow(format!("log g(T) = {g_period} is not representable")));
    }
    let carry = j_period / -(-g_period).exp_m1();
    let nu_minus_bar: Vec<f64> =
        swept[..n_grid].iter().map(|(j, g)| (j + (-g).exp() * carry).clamp(0.0, 1.0)).collect();
    let nu_plus_bar = nu_minus_bar.iter().map(|v| 1.0 - v).collect();
    Ok(InvariantMeasure { grid, nu_minus_bar, nu_plus_bar })
}

/// First time the left occupation is within `1/e` of the invariant measure.
///
/// Deviations between two solutions decay as `exp(-int_0^t (p + q))`, so the
/// time solves `int_0^t (p + q) = 1 + ln |nubar_-(0) - nu_-(0)|`.
pub fn relaxation_time(rates: &RatePair, nu0: StateProbability) -> Result<f64> {
    let nubar0 = invariant_measure(rates, 1)?.nu_minus_bar[0];
    let deviation = (nubar0 - nu0.nu_minus).abs();
    if deviation <= (-1.0f64).exp() {
        return Ok(0.0);
    }
    rates.sum.inverse_cumulative(1.0 + deviation.ln())
}
