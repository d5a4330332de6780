//! Reduction of a diffusion path to the two-state process `Y_t`.
//!
//! `Y_t` becomes -1 on entering the ball of radius `R` around the moving left
//! well and +1 on entering the ball around the moving right well. Between the
//! balls it keeps the label of the last ball visited. Samples before the first
//! ball entry carry no label.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periodic::PhaseCursor;
use crate::potential::{frozen_critical_points, Forcing, ModelParams, Vec2, Well};
use crate::sde::Observer;

pub const DEFAULT_RADIUS: f64 = 0.19;
pub const DEFAULT_TRACK_POINTS: usize = 1024;

/// Frozen well positions over one forcing period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellTracks {
    pub period: f64,
    pub radius: f64,
    pub left: Vec<Vec2>,
    pub right: Vec<Vec2>,
}

impl WellTracks {
    /// Fixed wells, useful for synthetic paths.
    pub fn fixed(period: f64, radius: f64, left: Vec2, right: Vec2) -> Result<Self> {
        Self::from_positions(period, radius, vec![left], vec![right])
    }

    pub fn from_positions(period: f64, radius: f64, left: Vec<Vec2>, right: Vec<Vec2>) -> Result<Self> {
        if left.is_empty() || left.len() != right.len() {
            return Err(Error::InvalidParams("well tracks need equal, non-empty position lists".into()));
        }
        if !(radius > 0.0) || !(period > 0.0) {
            return Err(Error::InvalidParams(format!("radius and period must be positive, got {radius}, {period}")));
        }
        let n = left.len();
        for (j, (l, r)) in left.iter().zip(&right).enumerate() {
            let separation = l.distance(*r);
            if separation <= 2.0 * radius {
                return Err(Error::BallOverlap { phase: j as f64 / n as f64, separation, two_r: 2.0 * radius });
            }
        }
        Ok(Self { period, radius, left, right })
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn cursor(&self) -> PhaseCursor {
        PhaseCursor::new(self.period, self.len())
    }

    fn interpolate(track: &[Vec2], j: usize, frac: f64) -> Vec2 {
        let a = track[j];
        let b = track[(j + 1) % track.len()];
        a + (b - a) * frac
    }

    pub fn position(&self, well: Well, t: f64) -> Vec2 {
        let (j, frac) = self.cursor().locate(t);
        match well {
            Well::Left => Self::interpolate(&self.left, j, frac),
            Well::Right => Self::interpolate(&self.right, j, frac),
        }
    }

    /// The well whose ball contains `pos` at time `t`, if any.
    pub fn ball_containing(&self, t: f64, pos: Vec2) -> Option<Well> {
        self.ball_in_cell(self.cursor().locate(t), pos)
    }

    fn ball_in_cell(&self, (j, frac): (usize, f64), pos: Vec2) -> Option<Well> {
        let r2 = self.radius * self.radius;
        let inside = |w: Vec2| {
            let d = pos - w;
            d.dot(d) <= r2
        };
        if inside(Self::interpolate(&self.left, j, frac)) {
            Some(Well::Left)
        } else if inside(Self::interpolate(&self.right, j, frac)) {
            Some(Well::Right)
        } else {
            None
        }
    }
}

/// Tabulates the wells of the potential frozen at `t_j = j T / n_phase`.
pub fn build_well_tracks(params: &ModelParams, forcing: &Forcing, radius: f64, n_phase: usize) -> Result<WellTracks> {
    if n_phase == 0 {
        return Err(Error::InvalidParams("n_phase must be positive".into()));
    }
    let period = forcing.period();
    let wells = (0..n_phase)
        .into_par_iter()
        .map(|j| {
            let set = frozen_critical_points(params, forcing, j as f64 * period / n_phase as f64)?;
            Ok((set.well_left.position, set.well_right.position))
        })
        .collect::<Result<Vec<_>>>()?;
    let (left, right) = wells.into_iter().unzip();
    WellTracks::from_positions(period, radius, left, right)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub state: Well,
    pub start: f64,
    pub end: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Piecewise constant two-state path. The last segment is open: it ends
/// where the observation ended, not at a transition.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymbolicPath {
    pub segments: Vec<Segment>,
}

impl SymbolicPath {
    pub fn initial_state(&self) -> Option<Well> {
        self.segments.first().map(|s| s.state)
    }

    pub fn start(&self) -> Option<f64> {
        self.segments.first().map(|s| s.start)
    }

    pub fn end(&self) -> Option<f64> {
        self.segments.last().map(|s| s.end)
    }

    pub fn n_transitions(&self) -> usize {
        self.segments.len().saturating_sub(1)
    }

    /// State at time `t`, `None` outside the labelled span.
    pub fn state_at(&self, t: f64) -> Option<Well> {
        let (start, end) = (self.start()?, self.end()?);
        if t < start || t > end {
            return None;
        }
        let i = self.segments.partition_point(|s| s.end <= t).min(self.segments.len() - 1);
        Some(self.segments[i].state)
    }
}

/// One completed sojourn: entered `well` at `u`, entered the other ball at `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeRecord {
    pub well: Well,
    pub u: f64,
    pub t: f64,
}

impl EscapeRecord {
    pub fn duration(&self) -> f64 {
        self.t - self.u
    }

    pub fn phase_in(&self, period: f64) -> f64 {
        self.u.rem_euclid(period) / period
    }

    pub fn phase_escape(&self, period: f64) -> f64 {
        self.duration().rem_euclid(period) / period
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub path: SymbolicPath,
    pub records: Vec<EscapeRecord>,
}

/// Single-pass reducer; feed samples in time order, then call [`SymbolicReducer::finish`].
#[derive(Clone, Debug)]
pub struct SymbolicReducer<'a> {
    tracks: &'a WellTracks,
    cursor: PhaseCursor,
    current: Option<(Well, f64)>,
    last_t: f64,
    out: Reduction,
}

impl<'a> SymbolicReducer<'a> {
    pub fn new(tracks: &'a WellTracks) -> Self {
        Self { tracks, cursor: tracks.cursor(), current: None, last_t: f64::NEG_INFINITY, out: Reduction::default() }
    }

    pub fn push(&mut self, t: f64, pos: Vec2) {
        self.last_t = t;
        let Some(hit) = self.tracks.ball_in_cell(self.cursor.locate(t), pos) else { return };
        match self.current {
            None => self.current = Some((hit, t)),
            Some((state, start)) if state != hit => {
                self.out.path.segments.push(Segment { state, start, end: t });
                self.out.records.push(EscapeRecord { well: state, u: start, t });
                self.current = Some((hit, t));
            }
            Some(_) => {}
        }
    }

    /// Closes the open segment at the last sample time.
    pub fn finish(mut self) -> Result<Reduction> {
        let Some((state, start)) = self.current else { return Err(Error::NoTransitions) };
        self.out.path.segments.push(Segment { state, start, end: self.last_t });
        Ok(self.out)
    }

    /// Like [`finish`](Self::finish) but returns an empty reduction when no ball was entered.
    pub fn finish_or_empty(self) -> Reduction {
        self.finish().unwrap_or_default()
    }
}

impl Observer for SymbolicReducer<'_> {
    fn observe(&mut self, t: f64, pos: Vec2) {
        self.push(t, pos);
    }
}

/// Reduces a sampled path.
pub fn reduce(samples: impl IntoIterator<Item = (f64, Vec2)>, tracks: &WellTracks) -> Result<Reduction> {
    let mut reducer = SymbolicReducer::new(tracks);
    for (t, pos) in samples {
        reducer.push(t, pos);
    }
    reducer.finish()
}
