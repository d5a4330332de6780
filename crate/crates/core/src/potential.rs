//! The Mexican Hat potential
//!
//! ```text
//! V_F(x, y) = r^4/4 - r^2/2 - a x^2 + b y^2 + F_x x + F_y y,    r^2 = x^2 + y^2
//! ```
//!
//! Unforced it has two wells on the x axis, two saddles on the y axis and a
//! hill at the origin, so there are two independent pathways between the
//! wells. Critical points of the forced potential are tracked by Newton
//! continuation from the unforced configuration, which keeps the
//! left/right/upper/lower labels attached to the same deformed point.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of uniform forcing increments used by [`find_critical_points`].
pub const RAMP_STEPS: usize = 32;
/// Newton stopping criterion on the gradient norm.
pub const GRADIENT_TOL: f64 = 1e-12;
pub const MAX_NEWTON_ITERS: usize = 100;
/// Eigenvalues closer to zero than this are reported as a topology change.
pub const EIGEN_TOL: f64 = 1e-9;
/// Two tracked points closer than this are considered merged.
pub const MERGE_TOL: f64 = 1e-6;
/// Largest displacement accepted for one continuation step.
const MAX_JUMP: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Symmetric 2x2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hessian {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Hessian {
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let radius = half_diff.hypot(self.xy);
        (mean - radius, mean + radius)
    }

    /// Solves `H d = rhs`, `None` when singular.
    fn solve(&self, rhs: Vec2) -> Option<Vec2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Vec2::new(
            (self.yy * rhs.x - self.xy * rhs.y) / det,
            (self.xx * rhs.y - self.xy * rhs.x) / det,
        ))
    }
}

/// Shape coefficients of the unforced potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Well asymmetry coefficient.
    pub a: f64,
    /// Saddle coefficient.
    pub b: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let params = Self { a, b };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParams(format!("a must be positive, got {}", self.a)));
        }
        if !(self.b > 0.0 && self.b < 0.5) {
            return Err(Error::InvalidParams(format!("b must lie in (0, 1/2), got {}", self.b)));
        }
        Ok(())
    }

    /// The five critical points of the unforced potential.
    pub fn unforced_points(&self) -> [(Label, Vec2); 5] {
        let xw = (1.0 + 2.0 * self.a).sqrt();
        let ys = (1.0 - 2.0 * self.b).sqrt();
        [
            (Label::WellLeft, Vec2::new(-xw, 0.0)),
            (Label::WellRight, Vec2::new(xw, 0.0)),
            (Label::SaddleUpper, Vec2::new(0.0, ys)),
            (Label::SaddleLower, Vec2::new(0.0, -ys)),
            (Label::Hill, Vec2::ZERO),
        ]
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { a: 0.15, b: 0.1 }
    }
}

/// Periodic drive `F (cos phi, sin phi) cos(Omega t)` entering the drift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forcing {
    pub magnitude: f64,
    /// Direction in degrees, 0 is along +x.
    pub angle_deg: f64,
    /// Angular frequency.
    pub omega: f64,
}

impl Forcing {
    pub fn new(magnitude: f64, angle_deg: f64, omega: f64) -> Result<Self> {
        if !(magnitude >= 0.0 && magnitude.is_finite()) {
            return Err(Error::InvalidParams(format!("forcing magnitude must be >= 0, got {magnitude}")));
        }
        if !(0.0..=90.0).contains(&angle_deg) {
            return Err(Error::InvalidParams(format!("angle must lie in [0, 90] degrees, got {angle_deg}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParams(format!("omega must be positive, got {omega}")));
        }
        Ok(Self { magnitude, angle_deg, omega })
    }

    pub fn unforced(omega: f64) -> Self {
        Self { magnitude: 0.0, angle_deg: 0.0, omega }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// `(F_x, F_y)`; exact at 0 and 90 degrees.
    pub fn components(&self) -> Vec2 {
        let (s, c) = if self.angle_deg == 0.0 {
            (0.0, 1.0)
        } else if self.angle_deg == 90.0 {
            (1.0, 0.0)
        } else {
            self.angle_deg.to_radians().sin_cos()
        };
        Vec2::new(self.magnitude * c, self.magnitude * s)
    }

    /// Forcing term of the drift at time `t`.
    pub fn drift_at(&self, t: f64) -> Vec2 {
        self.components() * (self.omega * t).cos()
    }

    /// Forcing vector of the frozen potential at time `t`.
    ///
    /// The drift is `-grad V_0 + F cos(Omega t)`, which is `-grad V_F` for the
    /// forcing vector `-F cos(Omega t)`.
    pub fn frozen_at(&self, t: f64) -> Vec2 {
        -self.drift_at(t)
    }
}

pub fn eval_potential(params: &ModelParams, forcing: Vec2, p: Vec2) -> f64 {
    let r2 = p.x * p.x + p.y * p.y;
    0.25 * r2 * r2 - 0.5 * r2 - params.a * p.x * p.x + params.b * p.y * p.y + forcing.dot(p)
}

pub fn eval_gradient(params: &ModelParams, forcing: Vec2, p: Vec2) -> Vec2 {
    let r2 = p.x * p.x + p.y * p.y;
    Vec2::new(
        p.x * (r2 - 1.0 - 2.0 * params.a) + forcing.x,
        p.y * (r2 - 1.0 + 2.0 * params.b) + forcing.y,
    )
}

/// The Hessian does not depend on the (linear) forcing term.
pub fn eval_hessian(params: &ModelParams, p: Vec2) -> Hessian {
    let (x2, y2) = (p.x * p.x, p.y * p.y);
    Hessian {
        xx: 3.0 * x2 + y2 - 1.0 - 2.0 * params.a,
        xy: 2.0 * p.x * p.y,
        yy: x2 + 3.0 * y2 - 1.0 + 2.0 * params.b,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointKind {
    Well,
    Saddle,
    Hill,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    WellLeft,
    WellRight,
    SaddleUpper,
    SaddleLower,
    Hill,
}

impl Label {
    pub const ALL: [Label; 5] =
        [Label::WellLeft, Label::WellRight, Label::SaddleUpper, Label::SaddleLower, Label::Hill];

    pub fn kind(self) -> PointKind {
        match self {
            Label::WellLeft | Label::WellRight => PointKind::Well,
            Label::SaddleUpper | Label::SaddleLower => PointKind::Saddle,
            Label::Hill => PointKind::Hill,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::WellLeft => "well_left",
            Label::WellRight => "well_right",
            Label::SaddleUpper => "saddle_upper",
            Label::SaddleLower => "saddle_lower",
            Label::Hill => "hill",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One of the two metastable states; `Left` is the symbolic state -1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Well {
    Left,
    Right,
}

impl Well {
    pub fn state(self) -> i8 {
        match self {
            Well::Left => -1,
            Well::Right => 1,
        }
    }

    pub fn opposite(self) -> Well {
        match self {
            Well::Left => Well::Right,
            Well::Right => Well::Left,
        }
    }

    pub fn label(self) -> Label {
        match self {
            Well::Left => Label::WellLeft,
            Well::Right => Label::WellRight,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Well::Left => "left",
            Well::Right => "right",
        }
    }
}

impl fmt::Display for Well {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Well {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "-1" | "l" => Ok(Well::Left),
            "right" | "+1" | "1" | "r" => Ok(Well::Right),
            other => Err(Error::Parse(format!("unknown well '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub position: Vec2,
    pub kind: PointKind,
    pub value: f64,
    pub hessian_det: f64,
    pub lambda_min: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet {
    pub well_left: CriticalPoint,
    pub well_right: CriticalPoint,
    pub saddle_upper: CriticalPoint,
    pub saddle_lower: CriticalPoint,
    pub hill: CriticalPoint,
    /// Time (within the period) at which the forcing was frozen.
    pub phase: f64,
}

impl CriticalSet {
    pub fn get(&self, label: Label) -> &CriticalPoint {
        match label {
            Label::WellLeft => &self.well_left,
            Label::WellRight => &self.well_right,
            Label::SaddleUpper => &self.saddle_upper,
            Label::SaddleLower => &self.saddle_lower,
            Label::Hill => &self.hill,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Label, &CriticalPoint)> {
        Label::ALL.into_iter().map(move |l| (l, self.get(l)))
    }

    pub fn saddles(&self) -> [(Label, &CriticalPoint); 2] {
        [(Label::SaddleUpper, &self.saddle_upper), (Label::SaddleLower, &self.saddle_lower)]
    }
}

fn classify(h: &Hessian) -> Option<PointKind> {
    let (lo, hi) = h.eigenvalues();
    if lo.abs() < EIGEN_TOL || hi.abs() < EIGEN_TOL {
        return None;
    }
    Some(match (lo > 0.0, hi > 0.0) {
        (true, true) => PointKind::Well,
        (false, false) => PointKind::Hill,
        _ => PointKind::Saddle,
    })
}

fn newton(params: &ModelParams, forcing: Vec2, start: Vec2) -> Option<Vec2> {
    let mut p = start;
    for _ in 0..MAX_NEWTON_ITERS {
        let g = eval_gradient(params, forcing, p);
        if g.norm() < GRADIENT_TOL {
            return Some(p);
        }
        let step = eval_hessian(params, p).solve(-g)?;
        p = p + step;
        if !(p.x.is_finite() && p.y.is_finite()) {
            return None;
        }
    }
    (eval_gradient(params, forcing, p).norm() < GRADIENT_TOL).then_some(p)
}

fn describe(params: &ModelParams, forcing: Vec2, p: Vec2, label: Label) -> Result<CriticalPoint> {
    let h = eval_hessian(params, p);
    let kind = classify(&h).ok_or_else(|| {
        Error::TopologyChange(format!("{label} became degenerate at ({:.6}, {:.6})", p.x, p.y))
    })?;
    if kind != label.kind() {
        return Err(Error::TopologyChange(format!("{label} changed type to {kind:?}")));
    }
    Ok(CriticalPoint {
        position: p,
        kind,
        value: eval_potential(params, forcing, p),
        hessian_det: h.det(),
        lambda_min: h.eigenvalues().0,
    })
}

/// All five critical points of `V_F`, found by Newton continuation in the
/// forcing from the unforced configuration.
pub fn find_critical_points(params: &ModelParams, forcing: Vec2) -> Result<CriticalSet> {
    params.validate()?;
    let seeds = params.unforced_points();
    let mut current: [Vec2; 5] = seeds.map(|(_, p)| p);

    let ramp = if forcing == Vec2::ZERO { 0 } else { RAMP_STEPS };
    for step in 1..=ramp {
        let f = forcing * (step as f64 / RAMP_STEPS as f64);
        for (i, (label, _)) in seeds.iter().enumerate() {
            let next = newton(params, f, current[i])
                .ok_or(Error::ConvergenceFailure { label: label.as_str(), step })?;
            if next.distance(current[i]) > MAX_JUMP {
                return Err(Error::TopologyChange(format!(
                    "{label} jumped by {:.3} at ramp step {step}",
                    next.distance(current[i])
                )));
            }
            current[i] = next;
        }
        for i in 0..5 {
            for j in (i + 1)..5 {
                if current[i].distance(current[j]) < MERGE_TOL {
                    return Err(Error::TopologyChange(format!(
                        "{} and {} merged at ramp step {step}",
                        seeds[i].0, seeds[j].0
                    )));
                }
            }
        }
    }

    let pts: Vec<CriticalPoint> = seeds
        .iter()
        .zip(current)
        .map(|((label, _), p)| describe(params, forcing, p, *label))
        .collect::<Result<_>>()?;
    Ok(CriticalSet {
        well_left: pts[0],
        well_right: pts[1],
        saddle_upper: pts[2],
        saddle_lower: pts[3],
        hill: pts[4],
        phase: 0.0,
    })
}

/// Critical points of the potential frozen at time `t` of the drive.
pub fn frozen_critical_points(params: &ModelParams, forcing: &Forcing, t: f64) -> Result<CriticalSet> {
    let mut set = find_critical_points(params, forcing.frozen_at(t))?;
    set.phase = t.rem_euclid(forcing.period());
    Ok(set)
}

/// Forcing thresholds below which the potential keeps its five critical
/// points along the coordinate directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalForcing {
    pub x_sad: f64,
    pub x_crit: f64,
    pub y_sad: f64,
    pub y_crit: f64,
}

impl CriticalForcing {
    /// Estimate of the critical forcing in a general direction.
    pub fn min(&self) -> f64 {
        self.x_sad.min(self.x_crit).min(self.y_sad).min(self.y_crit)
    }
}

pub fn critical_forcing(params: &ModelParams) -> Result<CriticalForcing> {
    let (a, b) = (params.a, params.b);
    if b >= 0.5 {
        return Err(Error::InvalidParams(format!("critical forcing requires b < 1/2, got {b}")));
    }
    Ok(CriticalForcing {
        x_sad: 2.0 * (a + b) * (1.0 - 2.0 * b).sqrt(),
        x_crit: (4.0 * (1.0 + 2.0 * a).powi(3) / 27.0).sqrt(),
        y_sad: 2.0 * (a + b) * (1.0 + 2.0 * a).sqrt(),
        y_crit: (4.0 * (1.0 - 2.0 * b).powi(3) / 27.0).sqrt(),
    })
}
