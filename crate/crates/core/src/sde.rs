//! Euler-Maruyama integration of the forced diffusion
//!
//! ```text
//! dX = (-grad V_0(X) + F (cos phi, sin phi) cos(Omega t)) dt + eps dW
//! ```
//!
//! and a deterministic parallel ensemble driver.
//!
//! # Random streams
//!
//! Realization `i` of a run seeded with `seed` draws from ChaCha8
//! (`rand_chacha` 0.9) keyed by `seed_from_u64(seed)` with stream id `i`.
//! Gaussian increments use the ziggurat sampler `rand_distr::StandardNormal`
//! (`rand_distr` 0.5), two draws per step in the order `(x, y)`. Every
//! realization therefore has its own substream, and the ensemble output does
//! not depend on how realizations are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periodic::PhaseCursor;
use crate::potential::{eval_gradient, Forcing, ModelParams, Vec2};

pub const DEFAULT_T_STEP: f64 = 0.014;
pub const DEFAULT_RECORD_STRIDE: usize = 10;
/// Trajectories leaving this radius are reported as blown up.
pub const BLOWUP_RADIUS: f64 = 1e3;
/// Steps between exact re-evaluations of the forcing phase.
const RESYNC_STEPS: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub forcing: Forcing,
    pub epsilon: f64,
    pub t_step: f64,
    /// Duration in forcing periods.
    pub n_periods: f64,
    pub seed: u64,
    pub initial_position: Vec2,
    /// Keep every `record_stride`-th step in the returned record; 0 keeps nothing.
    pub record_stride: usize,
}

impl SimConfig {
    /// Starts in the unforced left well.
    pub fn new(params: ModelParams, forcing: Forcing, epsilon: f64) -> Self {
        Self {
            params,
            forcing,
            epsilon,
            t_step: DEFAULT_T_STEP,
            n_periods: 30.0,
            seed: 0,
            initial_position: Vec2::new(-(1.0 + 2.0 * params.a).sqrt(), 0.0),
            record_stride: DEFAULT_RECORD_STRIDE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.t_step > 0.0 && self.t_step.is_finite()) {
            return Err(Error::InvalidParams(format!("t_step must be positive, got {}", self.t_step)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParams(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.n_periods >= 0.0 && self.n_periods.is_finite()) {
            return Err(Error::InvalidParams(format!("n_periods must be >= 0, got {}", self.n_periods)));
        }
        Ok(())
    }

    /// Non-fatal configuration problems.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.t_step > self.forcing.period() / 1000.0 {
            out.push(format!(
                "t_step {} resolves the forcing period {} with fewer than 1000 steps",
                self.t_step,
                self.forcing.period()
            ));
        }
        out
    }

    pub fn duration(&self) -> f64 {
        self.n_periods * self.forcing.period()
    }

    pub fn n_steps(&self) -> u64 {
        (self.duration() / self.t_step).round() as u64
    }
}

/// Receives every integration step `(t, position)`, starting with the initial state at `t = 0`.
pub trait Observer {
    fn observe(&mut self, t: f64, pos: Vec2);
}

impl Observer for () {
    fn observe(&mut self, _t: f64, _pos: Vec2) {}
}

impl<F: FnMut(f64, Vec2)> Observer for F {
    fn observe(&mut self, t: f64, pos: Vec2) {
        self(t, pos)
    }
}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn observe(&mut self, t: f64, pos: Vec2) {
        self.0.observe(t, pos);
        self.1.observe(t, pos);
    }
}

/// Combines per-realization results; merged in realization order.
pub trait Merge {
    fn merge(&mut self, other: Self);
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub stride: usize,
    pub t_step: f64,
    pub realization: u64,
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, Vec2)> + '_ {
        self.times.iter().zip(self.xs.iter().zip(&self.ys)).map(|(t, (x, y))| (*t, Vec2::new(*x, *y)))
    }

    fn push(&mut self, t: f64, pos: Vec2) {
        self.times.push(t);
        self.xs.push(pos.x);
        self.ys.push(pos.y);
    }
}

/// The generator used for realization `index` of a run seeded with `seed`.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Integrates one realization of the forced Mexican Hat diffusion.
pub fn simulate(config: &SimConfig, realization: u64, observer: &mut impl Observer) -> Result<TrajectoryRecord> {
    config.validate()?;
    let dt = config.t_step;
    let omega = config.forcing.omega;
    let force = config.forcing.components();
    let params = config.params;
    let noise = config.epsilon * dt.sqrt();
    let n_steps = config.n_steps();
    let stride = config.record_stride as u64;
    let mut rng = realization_rng(config.seed, realization);

    let mut record = TrajectoryRecord { stride: config.record_stride, t_step: dt, realization, ..Default::default() };
    let mut pos = config.initial_position;
    observer.observe(0.0, pos);
    if stride > 0 {
        record.push(0.0, pos);
    }

    let (rot_s, rot_c) = (omega * dt).sin_cos();
    let (mut sin_w, mut cos_w) = (0.0f64, 1.0f64);
    for k in 0..n_steps {
        if k % RESYNC_STEPS == 0 {
            (sin_w, cos_w) = (omega * k as f64 * dt).sin_cos();
        }
        let grad = eval_gradient(&params, Vec2::ZERO, pos);
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        pos.x += (force.x * cos_w - grad.x) * dt + noise * g1;
        pos.y += (force.y * cos_w - grad.y) * dt + noise * g2;
        (sin_w, cos_w) = (sin_w * rot_c + cos_w * rot_s, cos_w * rot_c - sin_w * rot_s);

        let t = (k + 1) as f64 * dt;
        if !(pos.x * pos.x + pos.y * pos.y <= BLOWUP_RADIUS * BLOWUP_RADIUS) {
            return Err(Error::NumericalBlowup { realization, t, norm: pos.norm() });
        }
        observer.observe(t, pos);
        if stride > 0 && (k + 1) % stride == 0 {
            record.push(t, pos);
        }
    }
    Ok(record)
}

/// Euler-Maruyama for an arbitrary drift `b(t, x)` with isotropic noise `eps dW`.
/// Returns the final state; every step is passed to `observer`.
pub fn euler_maruyama(
    drift: impl Fn(f64, Vec2) -> Vec2,
    epsilon: f64,
    t_step: f64,
    n_steps: u64,
    start: Vec2,
    rng: &mut impl Rng,
    observer: &mut impl Observer,
) -> Vec2 {
    let noise = epsilon * t_step.sqrt();
    let mut pos = start;
    observer.observe(0.0, pos);
    for k in 0..n_steps {
        let t = k as f64 * t_step;
        let b = drift(t, pos);
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        pos.x += b.x * t_step + noise * g1;
        pos.y += b.y * t_step + noise * g2;
        observer.observe(t + t_step, pos);
    }
    pos
}

/// Runs `n` realizations in parallel, one observer each from `make(index)`,
/// and returns the observers in realization order. Trajectories are not recorded.
pub fn ensemble<O, F>(config: &SimConfig, n: usize, make: F) -> Result<Vec<O>>
where
    O: Observer + Send,
    F: Fn(u64) -> O + Sync,
{
    if n == 0 {
        return Err(Error::InvalidParams("ensemble needs at least one realization".into()));
    }
    let quiet = SimConfig { record_stride: 0, ..*config };
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut obs = make(i);
            simulate(&quiet, i, &mut obs)?;
            Ok(obs)
        })
        .collect()
}

/// [`ensemble`] followed by an in-order merge.
pub fn ensemble_merged<O, F>(config: &SimConfig, n: usize, make: F) -> Result<O>
where
    O: Observer + Merge + Send,
    F: Fn(u64) -> O + Sync,
{
    let mut parts = ensemble(config, n, make)?.into_iter();
    let mut acc = parts.next().expect("n >= 1");
    for part in parts {
        acc.merge(part);
    }
    Ok(acc)
}

/// Phase-folded running sums of the position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseFolder {
    pub period: f64,
    /// Samples before this time are ignored.
    pub discard_before: f64,
    pub sum_x: Vec<f64>,
    pub sum_y: Vec<f64>,
    pub counts: Vec<u64>,
    #[serde(skip)]
    cursor: Option<PhaseCursor>,
}

impl PhaseFolder {
    pub fn new(period: f64, n_bins: usize, discard_before: f64) -> Self {
        Self {
            period,
            discard_before,
            sum_x: vec![0.0; n_bins],
            sum_y: vec![0.0; n_bins],
            counts: vec![0; n_bins],
            cursor: None,
        }
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_of(&self, t: f64) -> usize {
        let n = self.n_bins();
        (((t.rem_euclid(self.period)) / self.period * n as f64) as usize).min(n - 1)
    }

    pub fn mean_x(&self) -> Vec<f64> {
        self.sum_x.iter().zip(&self.counts).map(|(s, c)| s / (*c).max(1) as f64).collect()
    }

    pub fn mean_y(&self) -> Vec<f64> {
        self.sum_y.iter().zip(&self.counts).map(|(s, c)| s / (*c).max(1) as f64).collect()
    }
}

impl Observer for PhaseFolder {
    fn observe(&mut self, t: f64, pos: Vec2) {
        if t < self.discard_before {
            return;
        }
        let (period, n) = (self.period, self.n_bins());
        let (b, _) = self.cursor.get_or_insert_with(|| PhaseCursor::new(period, n)).locate(t);
        self.sum_x[b] += pos.x;
        self.sum_y[b] += pos.y;
        self.counts[b] += 1;
    }
}

impl Merge for PhaseFolder {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.sum_x.iter_mut().zip(other.sum_x) {
            *a += b;
        }
        for (a, b) in self.sum_y.iter_mut().zip(other.sum_y) {
            *a += b;
        }
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(eps: f64) -> SimConfig {
        let mut c = SimConfig::new(ModelParams::default(), Forcing::unforced(1.0), eps);
        c.n_periods = 1.0;
        c
    }

    #[test]
    fn noiseless_well_is_stationary() {
        let c = config(0.0);
        let start = c.initial_position;
        let mut worst: f64 = 0.0;
        let mut obs = |_t: f64, p: Vec2| worst = worst.max(p.distance(start));
        simulate(&c, 0, &mut obs).unwrap();
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn same_seed_same_bits() {
        let c = config(0.3);
        let a = simulate(&c, 3, &mut ()).unwrap();
        let b = simulate(&c, 3, &mut ()).unwrap();
        assert_eq!(a, b);
        let other = simulate(&c, 4, &mut ()).unwrap();
        assert_ne!(a.xs, other.xs);
    }

    #[test]
    fn record_stride_spacing() {
        let c = config(0.1);
        let rec = simulate(&c, 0, &mut ()).unwrap();
        assert_eq!(rec.len() as u64, 1 + c.n_steps() / 10);
        let dt = rec.times[1] - rec.times[0];
        assert!((dt - 10.0 * c.t_step).abs() < 1e-12);
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn blowup_is_reported() {
        let mut c = config(0.0);
        c.initial_position = Vec2::new(100.0, 0.0);
        c.t_step = 0.5;
        let err = simulate(&c, 7, &mut ()).unwrap_err();
        assert!(matches!(err, Error::NumericalBlowup { realization: 7, .. }));
    }

    #[test]
    fn single_member_ensemble_matches_trajectory() {
        let c = config(0.2);
        let period = c.forcing.period();
        let folded = ensemble_merged(&c, 1, |_| PhaseFolder::new(period, 8, 0.0)).unwrap();
        let mut direct = PhaseFolder::new(period, 8, 0.0);
        simulate(&c, 0, &mut direct).unwrap();
        assert_eq!(folded, direct);
    }

    #[test]
    fn coarse_step_warns() {
        let mut c = config(0.1);
        c.forcing = Forcing::unforced(0.001);
        assert!(c.warnings().is_empty());
        c.t_step = 7.0;
        assert_eq!(c.warnings().len(), 1);
    }
}
