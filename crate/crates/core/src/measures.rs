//! The six resonance measures.
//!
//! Chain quantities are folded onto `N` (even) uniform bins over one period.
//! Bin `j` covers `[jT/N, (j+1)T/N)`, so bins `j < N/2` form the first half
//! period. Integrals over the period are sums with weight `T/N`.
//!
//! The Fourier amplitude at the driving frequency is the single-bin DFT
//! `(1/N) |sum_j v_j exp(-2 pi i j / N)|`; a cosine of amplitude `A` maps to `A/2`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Well;
use crate::reduction::SymbolicPath;
use crate::sde::Merge;

/// A period-folded ensemble mean on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseFoldedSignal {
    pub period: f64,
    pub values: Vec<f64>,
    /// Amount of data behind each bin (time or sample count).
    pub weights: Vec<f64>,
}

impl PhaseFoldedSignal {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t_bin(&self) -> f64 {
        self.period / self.len() as f64
    }

    /// Bin start times.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.len()).map(|j| j as f64 * self.t_bin()).collect()
    }
}

pub fn linear_response(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (j, v) in values.iter().enumerate() {
        let (s, c) = (2.0 * PI * j as f64 / n).sin_cos();
        re += v * c;
        im -= v * s;
    }
    re.hypot(im) / n
}

/// Time spent in each state per phase bin, accumulated over paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupancyFolder {
    pub period: f64,
    /// Path time before this is ignored.
    pub discard_before: f64,
    pub time_minus: Vec<f64>,
    pub time_plus: Vec<f64>,
}

impl OccupancyFolder {
    pub fn new(period: f64, n_bins: usize, discard_before: f64) -> Result<Self> {
        if n_bins < 2 || n_bins % 2 != 0 {
            return Err(Error::InvalidParams(format!("phase bins must be even and >= 2, got {n_bins}")));
        }
        if !(period > 0.0) {
            return Err(Error::InvalidParams(format!("period must be positive, got {period}")));
        }
        Ok(Self { period, discard_before, time_minus: vec![0.0; n_bins], time_plus: vec![0.0; n_bins] })
    }

    pub fn n_bins(&self) -> usize {
        self.time_minus.len()
    }

    pub fn add_path(&mut self, path: &SymbolicPath) {
        for s in &path.segments {
            self.add_segment(s.state, s.start, s.end);
        }
    }

    pub fn add_segment(&mut self, state: Well, start: f64, end: f64) {
        let a = start.max(self.discard_before);
        if !(end > a) {
            return;
        }
        let n = self.n_bins();
        let h = self.period / n as f64;
        let bins = match state {
            Well::Left => &mut self.time_minus,
            Well::Right => &mut self.time_plus,
        };
        let whole = ((end - a) / self.period).floor();
        if whole > 0.0 {
            for b in bins.iter_mut() {
                *b += whole * h;
            }
        }
        let mut t = a + whole * self.period;
        // remaining span is shorter than one period
        let base = (t / self.period).floor() * self.period;
        let mut j = (((t - base) / h) as usize).min(n - 1);
        let mut cycle = base;
        while t < end {
            let bin_end = (cycle + (j + 1) as f64 * h).min(end);
            if bin_end > t {
                bins[j] += bin_end - t;
                t = bin_end;
            }
            j += 1;
            if j == n {
                j = 0;
                cycle += self.period;
            }
        }
    }

    fn fraction(&self, j: usize) -> (f64, f64) {
        let total = self.time_minus[j] + self.time_plus[j];
        if total > 0.0 {
            (self.time_minus[j] / total, self.time_plus[j] / total)
        } else {
            (0.0, 0.0)
        }
    }

    fn signal(&self, f: impl Fn(usize, f64, f64) -> f64) -> PhaseFoldedSignal {
        let n = self.n_bins();
        let values = (0..n)
            .map(|j| {
                let (m, p) = self.fraction(j);
                f(j, m, p)
            })
            .collect();
        let weights = self.time_minus.iter().zip(&self.time_plus).map(|(a, b)| a + b).collect();
        PhaseFoldedSignal { period: self.period, values, weights }
    }

    /// Folded `<Y_t>`.
    pub fn mean_y(&self) -> PhaseFoldedSignal {
        self.signal(|_, m, p| p - m)
    }

    /// Folded out-of-phase chain: the right-well fraction in the first half period, the left-well fraction in the second.
    pub fn out_of_phase(&self) -> PhaseFoldedSignal {
        let half = self.n_bins() / 2;
        self.signal(|j, m, p| if j < half { p } else { m })
    }

    /// Occupation fractions `(nu_minus, nu_plus)` per bin; empty bins give zeros.
    pub fn invariant_measure(&self) -> (Vec<f64>, Vec<f64>) {
        (0..self.n_bins()).map(|j| self.fraction(j)).unzip()
    }

    pub fn six_measures(&self, forcing_magnitude: f64, epsilon: f64) -> Result<SixMeasures> {
        let (nu_minus, nu_plus) = self.invariant_measure();
        six_measures(
            &self.mean_y().values,
            &self.out_of_phase().values,
            &nu_minus,
            &nu_plus,
            forcing_magnitude,
            epsilon,
            self.period,
        )
    }
}

impl Merge for OccupancyFolder {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.time_minus.iter_mut().zip(other.time_minus) {
            *a += b;
        }
        for (a, b) in self.time_plus.iter_mut().zip(other.time_plus) {
            *a += b;
        }
    }
}

/// Folds the out-of-phase chain over several paths.
pub fn out_of_phase_chain(paths: &[SymbolicPath], period: f64, n_bins: usize) -> Result<PhaseFoldedSignal> {
    if paths.iter().all(|p| p.segments.is_empty()) {
        return Err(Error::EmptyInput("symbolic paths"));
    }
    let mut folder = OccupancyFolder::new(period, n_bins, f64::NEG_INFINITY)?;
    for p in paths {
        folder.add_path(p);
    }
    Ok(folder.out_of_phase())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SixMeasures {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub m5: f64,
    pub m6: f64,
}

impl SixMeasures {
    pub fn as_array(&self) -> [f64; 6] {
        [self.m1, self.m2, self.m3, self.m4, self.m5, self.m6]
    }
}

fn check_scales(forcing_magnitude: f64, epsilon: f64) -> Result<()> {
    if !(forcing_magnitude > 0.0 && epsilon > 0.0) {
        return Err(Error::InvalidParams(format!(
            "measures need F > 0 and eps > 0, got F = {forcing_magnitude}, eps = {epsilon}"
        )));
    }
    Ok(())
}

/// M1 and M2 of the folded mean diffusion path.
pub fn diffusion_measures(mean_x: &[f64], forcing_magnitude: f64, epsilon: f64) -> Result<(f64, f64)> {
    check_scales(forcing_magnitude, epsilon)?;
    if mean_x.is_empty() {
        return Err(Error::EmptyInput("folded path"));
    }
    let lin = linear_response(mean_x);
    Ok((lin / forcing_magnitude, lin / (epsilon * forcing_magnitude)))
}

/// All six chain measures. Nonpositive `nu` entries are floored at the
/// smallest positive entry in M5 and skipped in M6.
pub fn six_measures(
    mean_y: &[f64],
    mean_ybar: &[f64],
    nu_minus: &[f64],
    nu_plus: &[f64],
    forcing_magnitude: f64,
    epsilon: f64,
    period: f64,
) -> Result<SixMeasures> {
    check_scales(forcing_magnitude, epsilon)?;
    let n = mean_y.len();
    if n == 0 {
        return Err(Error::EmptyInput("folded chain"));
    }
    if n % 2 != 0 || [mean_ybar.len(), nu_minus.len(), nu_plus.len()].iter().any(|l| *l != n) {
        return Err(Error::InvalidParams("chain inputs must share an even-length grid".into()));
    }
    let lim = |nu: &[f64], name: &'static str| -> Result<f64> {
        nu.iter().copied().filter(|v| *v > 0.0).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v)))).ok_or(
            Error::DegenerateInvariantMeasure(name),
        )
    };
    let lim_minus = lim(nu_minus, "nu_minus")?;
    let lim_plus = lim(nu_plus, "nu_plus")?;

    let dt = period / n as f64;
    let lin = linear_response(mean_y);
    let m3 = mean_y.iter().map(|y| y * y).sum::<f64>() * dt;
    let m4 = mean_ybar.iter().sum::<f64>() * dt;
    let half = n / 2;
    let log_inv = |v: f64, floor: f64| if v > 0.0 { -v.ln() } else { -floor.ln() };
    let m5 = dt
        * (nu_minus[..half].iter().map(|v| log_inv(*v, lim_minus)).sum::<f64>()
            + nu_plus[half..].iter().map(|v| log_inv(*v, lim_plus)).sum::<f64>());
    let ent = |v: &f64| if *v > 0.0 { -v * v.ln() } else { 0.0 };
    let m6 = dt * (nu_minus.iter().map(ent).sum::<f64>() + nu_plus.iter().map(ent).sum::<f64>());
    Ok(SixMeasures {
        m1: lin / forcing_magnitude,
        m2: lin / (epsilon * forcing_magnitude),
        m3,
        m4,
        m5,
        m6,
    })
}

/// Values predicted for a chain with constant invariant measure 1/2.
pub fn flat_measures(period: f64) -> SixMeasures {
    SixMeasures { m1: 0.0, m2: 0.0, m3: 0.0, m4: 0.5 * period, m5: period * LN_2, m6: period * LN_2 }
}

/// Jackknife estimate and standard error of a statistic of the merged parts.
pub fn jackknife<T: Clone + Merge>(parts: &[T], stat: impl Fn(&T) -> f64) -> Result<(f64, f64)> {
    let n = parts.len();
    if n < 2 {
        return Err(Error::InvalidParams("jackknife needs at least two parts".into()));
    }
    let merged = |skip: Option<usize>| -> T {
        let mut it = parts.iter().enumerate().filter(|(i, _)| Some(*i) != skip).map(|(_, p)| p.clone());
        let mut acc = it.next().expect("n >= 2");
        for p in it {
            acc.merge(p);
        }
        acc
    };
    let full = stat(&merged(None));
    let loo: Vec<f64> = (0..n).map(|i| stat(&merged(Some(i)))).collect();
    let mean = loo.iter().sum::<f64>() / n as f64;
    let var = loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (n - 1) as f64 / n as f64;
    Ok((full, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::Segment;
    use approx::assert_relative_eq;

    #[test]
    fn dft_normalisation() {
        let n = 64;
        let cos1: Vec<f64> = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos()).collect();
        let cos2: Vec<f64> = (0..n).map(|j| (4.0 * PI * j as f64 / n as f64).cos()).collect();
        assert_relative_eq!(linear_response(&cos1), 0.5, epsilon = 1e-12);
        assert!(linear_response(&cos2) < 1e-12);
        assert!(linear_response(&[3.0; 16]) < 1e-12);
    }

    #[test]
    fn flat_measure_values() {
        let m = six_measures(&[0.0; 10], &[0.5; 10], &[0.5; 10], &[0.5; 10], 0.2, 0.1, 7.0).unwrap();
        assert_eq!(m.m1, 0.0);
        assert_eq!(m.m3, 0.0);
        let f = flat_measures(7.0);
        assert_relative_eq!(m.m4, f.m4, epsilon = 1e-12);
        assert_relative_eq!(m.m5, f.m5, epsilon = 1e-12);
        assert_relative_eq!(m.m6, f.m6, epsilon = 1e-12);
    }

    #[test]
    fn floor_used_for_zero_entries() {
        let nu_m = [0.0, 0.25, 0.5, 0.5];
        let nu_p = [1.0, 0.75, 0.5, 0.5];
        let m = six_measures(&[0.0; 4], &[0.0; 4], &nu_m, &nu_p, 1.0, 1.0, 4.0).unwrap();
        assert_relative_eq!(m.m5, 2.0 * 4f64.ln() + 2.0 * 2f64.ln(), epsilon = 1e-12);
        let err = six_measures(&[0.0; 2], &[0.0; 2], &[0.0; 2], &[1.0; 2], 1.0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateInvariantMeasure(_)));
    }

    #[test]
    fn occupancy_of_constant_left_path() {
        let mut f = OccupancyFolder::new(2.0, 4, 0.0).unwrap();
        f.add_segment(Well::Left, 0.0, 20.0);
        assert_eq!(f.mean_y().values, vec![-1.0; 4]);
        assert_eq!(f.out_of_phase().values, vec![0.0, 0.0, 1.0, 1.0]);
        for w in &f.time_minus {
            assert_relative_eq!(*w, 5.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn in_phase_square_wave() {
        let period = 4.0;
        let mut segs = Vec::new();
        for k in 0..5 {
            let t0 = k as f64 * period;
            segs.push(Segment { state: Well::Right, start: t0, end: t0 + 2.0 });
            segs.push(Segment { state: Well::Left, start: t0 + 2.0, end: t0 + 4.0 });
        }
        let path = SymbolicPath { segments: segs };
        let mut f = OccupancyFolder::new(period, 8, 0.0).unwrap();
        f.add_path(&path);
        assert_eq!(f.out_of_phase().values, vec![1.0; 8]);
        let m = f.six_measures(1.0, 1.0).unwrap();
        assert_relative_eq!(m.m3, period, epsilon = 1e-12);
        assert_relative_eq!(m.m4, period, epsilon = 1e-12);
        assert!(m.m6.abs() < 1e-12);
    }

    #[test]
    fn partial_segments_split_across_bins() {
        let mut f = OccupancyFolder::new(1.0, 4, 0.0).unwrap();
        f.add_segment(Well::Right, 0.1, 1.6);
        let expect = [0.25 + 0.15, 0.25 + 0.25, 0.25 + 0.1, 0.25];
        for (a, b) in f.time_plus.iter().zip(expect) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn jackknife_of_mean_matches_standard_error() {
        #[derive(Clone)]
        struct Sum(f64, f64);
        impl Merge for Sum {
            fn merge(&mut self, o: Self) {
                self.0 += o.0;
                self.1 += o.1;
            }
        }
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let parts: Vec<Sum> = xs.iter().map(|x| Sum(*x, 1.0)).collect();
        let (v, se) = jackknife(&parts, |s| s.0 / s.1).unwrap();
        let mean = 4.0;
        let sd = (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0).sqrt();
        assert_relative_eq!(v, mean, epsilon = 1e-12);
        assert_relative_eq!(se, sd / 5f64.sqrt(), epsilon = 1e-12);
    }
}
