//! Uniform sampling grids for time-domain integration and discrete transforms.

use crate::error::{Error, Result};

/// Uniform time grid with an even number of intervals, so that composite
/// Simpson quadrature applies to the whole range without padding.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    step: f64,
    n_intervals: usize,
}

impl TimeGrid {
    /// Builds a grid on `[t_start, t_end]` with the given step.
    ///
    /// The step must divide the span to within 1e-9 relative accuracy and the
    /// resulting interval count must be even and at least 2.
    pub fn new(t_start: f64, t_end: f64, step: f64) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidInput(format!("step must be > 0, got {step}")));
        }
        if !(t_start.is_finite() && t_end.is_finite()) || t_end <= t_start {
            return Err(Error::InvalidInput(format!(
                "need finite t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        let raw = (t_end - t_start) / step;
        let n = raw.round();
        if (raw - n).abs() > 1e-9 * raw.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "step {step} does not divide the span {} evenly",
                t_end - t_start
            )));
        }
        let n = n as usize;
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "interval count must be even and >= 2 for Simpson quadrature, got {n}"
            )));
        }
        Ok(Self { t_start, step, n_intervals: n })
    }

    /// Grid from an explicit interval count (must be even).
    pub fn with_intervals(t_start: f64, t_end: f64, n_intervals: usize) -> Result<Self> {
        if n_intervals < 2 || n_intervals % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "interval count must be even and >= 2, got {n_intervals}"
            )));
        }
        if !(t_start.is_finite() && t_end.is_finite()) || t_end <= t_start {
            return Err(Error::InvalidInput(format!(
                "need finite t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        let step = (t_end - t_start) / n_intervals as f64;
        Ok(Self { t_start, step, n_intervals })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_intervals)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of nodes (odd by construction).
    pub fn len(&self) -> usize {
        self.n_intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.step
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    /// Index of the node at time `t`, if `t` lies on the grid to within
    /// 1e-9 of a step.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let raw = (t - self.t_start) / self.step;
        let i = raw.round();
        if i < 0.0 || i > self.n_intervals as f64 {
            return None;
        }
        if (raw - i).abs() > 1e-9 {
            return None;
        }
        Some(i as usize)
    }

    /// Sub-grid from node `i0` to node `i1` (even interval count required).
    pub fn slice(&self, i0: usize, i1: usize) -> Result<Self> {
        if i1 <= i0 || i1 > self.n_intervals || (i1 - i0) % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "sub-grid [{i0}, {i1}] must have an even positive interval count"
            )));
        }
        Ok(Self { t_start: self.time(i0), step: self.step, n_intervals: i1 - i0 })
    }
}

/// Sampling layout for discrete Fourier transforms: a power-of-two number of
/// samples at spacing `dt`, covering the window `[0, n*dt)`.
///
/// The frequency layout is the usual FFT one: bin `j` holds `j/(n*dt)` for
/// `j < n/2` and `(j - n)/(n*dt)` for the upper half.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    n: usize,
    dt: f64,
}

impl FrequencyGrid {
    pub fn new(n: usize, dt: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "sample count must be a power of two >= 4, got {n}"
            )));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
        }
        Ok(Self { n, dt })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn window(&self) -> f64 {
        self.n as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Time coordinate with the upper half of the window wrapped to negative
    /// times, as produced by an inverse transform of a two-sided spectrum.
    pub fn signed_time(&self, k: usize) -> f64 {
        if k < self.n / 2 {
            self.time(k)
        } else {
            self.time(k) - self.window()
        }
    }

    pub fn frequency(&self, j: usize) -> f64 {
        let n = self.n as f64;
        let j = j as f64;
        if j < n / 2.0 {
            j / (n * self.dt)
        } else {
            (j - n) / (n * self.dt)
        }
    }

    pub fn nyquist(&self) -> f64 {
        0.5 / self.dt
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_construction_and_lookup() {
        let g = TimeGrid::new(0.0, 10.0, 1e-3).unwrap();
        assert_eq!(g.len(), 10_001);
        assert_eq!(g.index_of(5.0), Some(5000));
        assert_eq!(g.index_of(5.0004), None);
        assert!((g.t_end() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_odd_interval_counts() {
        assert!(TimeGrid::with_intervals(0.0, 1.0, 3).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(TimeGrid::new(1.0, 0.0, 0.1).is_err());
        // 7 intervals of 1/7
        assert!(TimeGrid::new(0.0, 1.0, 1.0 / 7.0).is_err());
    }

    #[test]
    fn grid_slice_keeps_nodes() {
        let g = TimeGrid::new(0.0, 8.0, 1e-3).unwrap();
        let s = g.slice(5000, 8000).unwrap();
        assert!((s.t_start() - 5.0).abs() < 1e-12);
        assert_eq!(s.n_intervals(), 3000);
    }

    #[test]
    fn frequency_layout() {
        let g = FrequencyGrid::new(8, 0.5).unwrap();
        assert_eq!(g.window(), 4.0);
        assert_eq!(g.frequency(0), 0.0);
        assert_eq!(g.frequency(1), 0.25);
        assert_eq!(g.frequency(7), -0.25);
        assert_eq!(g.signed_time(7), -0.5);
        assert!(FrequencyGrid::new(12, 0.5).is_err());
    }
}
