//! Escape-time distributions under periodic rates.
//!
//! A particle entering well `w` at time `u` leaves at `t > u` with density
//!
//! ```text
//! p(t, u) = R_w(t) exp(-H(u, t)),   H(u, t) = int_u^t R_w(s) ds
//! ```
//!
//! where `R_w` is the escape rate out of `w`. The total escape-time density
//! mixes these over a model of the entrance phase.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kramers::RateTable;
use crate::periodic::PeriodicTable;
use crate::potential::Well;
use crate::reduction::EscapeRecord;

/// Cumulative hazard beyond which the survival probability is treated as zero.
pub const HAZARD_CUTOFF: f64 = 40.0;
pub const DEFAULT_BIN_WIDTH: f64 = 0.05;

/// Periodic escape rates out of each well.
#[derive(Clone, Debug)]
pub struct EscapeModel {
    left: PeriodicTable,
    right: PeriodicTable,
}

impl EscapeModel {
    pub fn new(left: PeriodicTable, right: PeriodicTable) -> Result<Self> {
        if left.period() != right.period() {
            return Err(Error::InvalidParams("rate tables must share a period".into()));
        }
        if !(left.period_integral() > 0.0 && right.period_integral() > 0.0) {
            return Err(Error::InvalidParams("escape rates must not vanish over a whole period".into()));
        }
        Ok(Self { left, right })
    }

    pub fn from_rate_table(table: &RateTable) -> Result<Self> {
        Self::new(table.table(Well::Left)?, table.table(Well::Right)?)
    }

    pub fn constant(period: f64, left: f64, right: f64) -> Result<Self> {
        Self::new(PeriodicTable::constant(period, left)?, PeriodicTable::constant(period, right)?)
    }

    pub fn period(&self) -> f64 {
        self.left.period()
    }

    pub fn rate(&self, from: Well) -> &PeriodicTable {
        match from {
            Well::Left => &self.left,
            Well::Right => &self.right,
        }
    }

    pub fn conditional(&self, from: Well, u: f64) -> ConditionalEscapeDist<'_> {
        ConditionalEscapeDist { from, u, rate: self.rate(from) }
    }

    /// Total escape-time density at duration `t`.
    pub fn total_pdf(&self, model: &EntrancePhaseModel, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let period = self.period();
        let mix = |from: Well, phases: &[(f64, f64)]| -> f64 {
            phases
                .iter()
                .map(|&(phase, w)| {
                    let u = phase * period;
                    w * self.conditional(from, u).pdf(t + u)
                })
                .sum()
        };
        match model {
            EntrancePhaseModel::PerfectPhase => self.conditional(Well::Right, 0.0).pdf(t),
            EntrancePhaseModel::Empirical { left, right } => 0.5 * (mix(Well::Left, left) + mix(Well::Right, right)),
            EntrancePhaseModel::GridDensity { left, right } => {
                let weights = |m: &[f64]| -> Vec<(f64, f64)> {
                    let n = m.len() as f64;
                    m.iter().enumerate().map(|(j, v)| (j as f64 / n, v / n)).collect()
                };
                0.5 * (mix(Well::Left, &weights(left)) + mix(Well::Right, &weights(right)))
            }
        }
    }
}

/// Escape time distribution out of `from` given entrance at `u`.
#[derive(Clone, Copy, Debug)]
pub struct ConditionalEscapeDist<'a> {
    pub from: Well,
    pub u: f64,
    rate: &'a PeriodicTable,
}

impl ConditionalEscapeDist<'_> {
    pub fn hazard(&self, t: f64) -> f64 {
        if t <= self.u {
            0.0
        } else {
            self.rate.integral(self.u, t)
        }
    }

    /// Density of the exit time coordinate `t`.
    pub fn pdf(&self, t: f64) -> f64 {
        if t < self.u {
            return 0.0;
        }
        self.rate.value_at(t) * (-self.hazard(t)).exp()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        -(-self.hazard(t)).exp_m1()
    }

    pub fn survival(&self, t: f64) -> f64 {
        (-self.hazard(t)).exp()
    }

    /// Exit time with `hazard(t) = h`; `h` is capped at [`HAZARD_CUTOFF`].
    pub fn quantile_hazard(&self, h: f64) -> Result<f64> {
        let h = h.clamp(0.0, HAZARD_CUTOFF);
        let t = self.rate.inverse_cumulative(self.rate.cumulative(self.u) + h)?;
        Ok(t.max(self.u))
    }

    /// Exit time with `cdf(t) = p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!("probability must lie in [0, 1], got {p}")));
        }
        self.quantile_hazard(-(-p).ln_1p())
    }

    /// Draws an exit time by inverting the cumulative hazard.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<f64> {
        let e: f64 = rng.sample(rand_distr::Exp1);
        self.quantile_hazard(e)
    }
}

/// Distribution of the entrance phase into each well. Phases are fractions of the period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EntrancePhaseModel {
    /// Entrance into the right well at phase 0 and into the left well at phase 1/2.
    PerfectPhase,
    /// Weighted phase samples per well; weights sum to 1.
    Empirical { left: Vec<(f64, f64)>, right: Vec<(f64, f64)> },
    /// Densities on a uniform grid over one period (per unit phase); mean 1.
    GridDensity { left: Vec<f64>, right: Vec<f64> },
}

impl EntrancePhaseModel {
    /// Equal-weight empirical model from observed entrances.
    pub fn empirical(records: &[EscapeRecord], period: f64) -> Result<Self> {
        let collect = |well: Well| -> Vec<(f64, f64)> {
            records.iter().filter(|r| r.well == well).map(|r| r.phase_in(period)).map(|p| (p, 1.0)).collect()
        };
        Self::empirical_weighted(collect(Well::Left), collect(Well::Right))
    }

    pub fn empirical_weighted(left: Vec<(f64, f64)>, right: Vec<(f64, f64)>) -> Result<Self> {
        let normalise = |v: Vec<(f64, f64)>| -> Result<Vec<(f64, f64)>> {
            if v.iter().any(|(_, w)| !(*w >= 0.0)) {
                return Err(Error::InvalidParams("entrance weights must be nonnegative".into()));
            }
            let total: f64 = v.iter().map(|(_, w)| w).sum();
            if !(total > 0.0) {
                return Err(Error::EmptyInput("entrance phases"));
            }
            Ok(v.into_iter().map(|(p, w)| (p.rem_euclid(1.0), w / total)).collect())
        };
        Ok(Self::Empirical { left: normalise(left)?, right: normalise(right)? })
    }

    pub fn grid_density(left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        let normalise = |v: Vec<f64>| -> Result<Vec<f64>> {
            if v.iter().any(|m| !(*m >= 0.0)) {
                return Err(Error::InvalidParams("entrance densities must be nonnegative".into()));
            }
            let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
            if !(mean > 0.0) {
                return Err(Error::EmptyInput("entrance density"));
            }
            Ok(v.into_iter().map(|m| m / mean).collect())
        };
        Ok(Self::GridDensity { left: normalise(left)?, right: normalise(right)? })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeHistogram {
    /// Bin width in periods.
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub n: u64,
}

impl EscapeHistogram {
    pub fn bin_start(&self, i: usize) -> f64 {
        i as f64 * self.bin_width
    }

    pub fn bin_end(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.bin_width
    }

    /// Empirical density in units of 1/period.
    pub fn density(&self) -> Vec<f64> {
        self.counts.iter().map(|c| *c as f64 / (self.n as f64 * self.bin_width)).collect()
    }

    /// Index of the most populated bin.
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, c) in self.counts.iter().enumerate() {
            if *c > self.counts[best] {
                best = i;
            }
        }
        best
    }
}

/// Histogram of escape durations measured in periods.
pub fn histogram(durations_in_periods: &[f64], bin_width: f64) -> Result<EscapeHistogram> {
    if durations_in_periods.is_empty() {
        return Err(Error::EmptyInput("escape records"));
    }
    if !(bin_width > 0.0) {
        return Err(Error::InvalidParams(format!("bin width must be positive, got {bin_width}")));
    }
    let max = durations_in_periods.iter().copied().fold(0.0, f64::max);
    let n_bins = (max / bin_width).floor() as usize + 1;
    let mut counts = vec![0u64; n_bins];
    for d in durations_in_periods {
        let i = ((d / bin_width).floor().max(0.0) as usize).min(n_bins - 1);
        counts[i] += 1;
    }
    Ok(EscapeHistogram { bin_width, counts, n: durations_in_periods.len() as u64 })
}

pub fn record_histogram(records: &[EscapeRecord], period: f64, bin_width: f64) -> Result<EscapeHistogram> {
    let d: Vec<f64> = records.iter().map(|r| r.duration() / period).collect();
    histogram(&d, bin_width)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub phase_in: f64,
    pub phase_escape: f64,
    pub well: Well,
}

pub fn scatter(records: &[EscapeRecord], period: f64) -> Vec<ScatterPoint> {
    records
        .iter()
        .map(|r| ScatterPoint { phase_in: r.phase_in(period), phase_escape: r.phase_escape(period), well: r.well })
        .collect()
}
