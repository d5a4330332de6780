//! Escape rates from a well over the saddles bounding it.
//!
//! Each saddle contributes `k_i exp(-2 dV_i / eps^2)` with the Kramers
//! prefactor
//!
//! ```text
//! k_i = sqrt(|det H(well)|) / (2 pi) * |lambda_min(saddle_i)| / sqrt(|det H(saddle_i)|)
//! ```
//!
//! Only the leading-order prefactor is used. Rates are assembled in log
//! space and exponentiated last so tiny noise levels do not underflow the
//! intermediate products.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periodic::PeriodicTable;
use crate::potential::{frozen_critical_points, CriticalSet, Forcing, Label, ModelParams, Well};

pub const DEFAULT_PHASE_POINTS: usize = 1024;
const DET_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleRate {
    pub saddle: Label,
    pub delta_v: f64,
    pub kramers_coefficient: f64,
    pub log_rate: f64,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeRate {
    pub from: Well,
    pub per_saddle: Vec<SaddleRate>,
    pub log_total: f64,
    pub total: f64,
    pub epsilon: f64,
}

fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Kramers rate out of `from` summed over both saddles.
pub fn static_rate(set: &CriticalSet, from: Well, epsilon: f64) -> Result<EscapeRate> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParams(format!("noise level must be positive, got {epsilon}")));
    }
    let well = set.get(from.label());
    if well.hessian_det.abs() < DET_TOL {
        return Err(Error::DegenerateHessian { label: from.label().as_str(), det: well.hessian_det });
    }
    let well_factor = well.hessian_det.abs().sqrt() / (2.0 * PI);
    let per_saddle = set
        .saddles()
        .into_iter()
        .map(|(label, saddle)| {
            if saddle.hessian_det.abs() < DET_TOL {
                return Err(Error::DegenerateHessian { label: label.as_str(), det: saddle.hessian_det });
            }
            let k = well_factor * saddle.lambda_min.abs() / saddle.hessian_det.abs().sqrt();
            let delta_v = saddle.value - well.value;
            let log_rate = k.ln() - 2.0 * delta_v / (epsilon * epsilon);
            Ok(SaddleRate { saddle: label, delta_v, kramers_coefficient: k, log_rate, rate: log_rate.exp() })
        })
        .collect::<Result<Vec<_>>>()?;
    let log_total = log_sum_exp(per_saddle.iter().map(|s| s.log_rate));
    Ok(EscapeRate { from, per_saddle, log_total, total: log_total.exp(), epsilon })
}

/// Frozen-potential escape rates tabulated over one forcing period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub period: f64,
    /// Grid times `j T / n` in `[0, T)`.
    pub phases: Vec<f64>,
    /// Left to right (`R_{-1+1}`).
    pub rates_lr: Vec<f64>,
    /// Right to left (`R_{+1-1}`).
    pub rates_rl: Vec<f64>,
    pub log_rates_lr: Vec<f64>,
    pub log_rates_rl: Vec<f64>,
}

impl RateTable {
    /// Builds a table from explicit rates on a uniform grid over `[0, period)`.
    pub fn from_rates(period: f64, rates_lr: Vec<f64>, rates_rl: Vec<f64>) -> Result<Self> {
        if rates_lr.len() != rates_rl.len() || rates_lr.is_empty() {
            return Err(Error::InvalidParams("rate columns must be non-empty and of equal length".into()));
        }
        if rates_lr.iter().chain(&rates_rl).any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidParams("rates must be positive and finite".into()));
        }
        let n = rates_lr.len();
        Ok(Self {
            period,
            phases: (0..n).map(|j| j as f64 * period / n as f64).collect(),
            log_rates_lr: rates_lr.iter().map(|r| r.ln()).collect(),
            log_rates_rl: rates_rl.iter().map(|r| r.ln()).collect(),
            rates_lr,
            rates_rl,
        })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Log-linear interpolant of the escape rate out of `from`.
    pub fn table(&self, from: Well) -> Result<PeriodicTable> {
        let logs = match from {
            Well::Left => &self.log_rates_lr,
            Well::Right => &self.log_rates_rl,
        };
        PeriodicTable::from_logs(self.period, logs.clone())
    }

    pub fn rate_at(&self, from: Well, t: f64) -> Result<f64> {
        Ok(self.table(from)?.value_at(t))
    }
}

/// Tabulates left and right escape rates of the potential frozen at
/// `t_j = j T / n_phase`.
pub fn adiabatic_rate_table(
    params: &ModelParams,
    forcing: &Forcing,
    epsilon: f64,
    n_phase: usize,
) -> Result<RateTable> {
    if n_phase == 0 {
        return Err(Error::InvalidParams("n_phase must be positive".into()));
    }
    let period = forcing.period();
    let rows = (0..n_phase)
        .into_par_iter()
        .map(|j| {
            let t = j as f64 * period / n_phase as f64;
            let set = frozen_critical_points(params, forcing, t)?;
            let lr = static_rate(&set, Well::Left, epsilon)?;
            let rl = static_rate(&set, Well::Right, epsilon)?;
            Ok((t, lr.log_total, rl.log_total))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = RateTable {
        period,
        phases: Vec::with_capacity(n_phase),
        rates_lr: Vec::with_capacity(n_phase),
        rates_rl: Vec::with_capacity(n_phase),
        log_rates_lr: Vec::with_capacity(n_phase),
        log_rates_rl: Vec::with_capacity(n_phase),
    };
    for (t, llr, lrl) in rows {
        table.phases.push(t);
        table.log_rates_lr.push(llr);
        table.log_rates_rl.push(lrl);
        table.rates_lr.push(llr.exp());
        table.rates_rl.push(lrl.exp());
    }
    Ok(table)
}
