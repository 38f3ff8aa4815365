//! Uniform time grid shared by noise realizations and trajectory stepping.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("dt must be positive and finite, got {dt}")]
    BadStep { dt: f64 },
    #[error("t_max must be positive and finite, got {t_max}")]
    BadHorizon { t_max: f64 },
    #[error(
        "t_max = {t_max} is not an integer multiple of dt = {dt} \
         (n * dt misses t_max by a relative {rel:.3e} > 1e-12)"
    )]
    NotCommensurate { t_max: f64, dt: f64, rel: f64 },
}

/// `n_steps` uniform steps of width `dt` covering `[0, t_max]`.
///
/// Construction enforces `t_max = n_steps * dt` to within a relative 1e-12;
/// configurations that miss the horizon are rejected rather than silently
/// rounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_max: f64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, dt: f64) -> Result<Self, GridError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(GridError::BadStep { dt });
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(GridError::BadHorizon { t_max });
        }
        let n_steps = (t_max / dt).round();
        if n_steps < 1.0 {
            return Err(GridError::NotCommensurate { t_max, dt, rel: 1.0 });
        }
        let rel = (n_steps * dt - t_max).abs() / t_max;
        if rel > 1e-12 {
            return Err(GridError::NotCommensurate { t_max, dt, rel });
        }
        Ok(Self { t_max, dt, n_steps: n_steps as usize })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points (`n_steps + 1`).
    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }

    /// Time of grid point `k`.
    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Grid index nearest to `t`, with an error if `t` is not on the grid to
    /// within a relative 1e-9 of dt.
    pub fn index_of(&self, t: f64) -> Result<usize, GridError> {
        let k = (t / self.dt).round();
        if k < 0.0 || k > self.n_steps as f64 {
            return Err(GridError::NotCommensurate { t_max: self.t_max, dt: self.dt, rel: 1.0 });
        }
        let rel = (k * self.dt - t).abs() / self.dt;
        if rel > 1e-9 {
            return Err(GridError::NotCommensurate { t_max: t, dt: self.dt, rel });
        }
        Ok(k as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_commensurate_grid() {
        let g = TimeGrid::new(2.0, 1e-3).unwrap();
        assert_eq!(g.n_steps(), 2000);
        assert_eq!(g.n_points(), 2001);
        assert!((g.time(2000) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_multiple_horizon() {
        let err = TimeGrid::new(1.0005, 1e-3).unwrap_err();
        assert!(matches!(err, GridError::NotCommensurate { .. }));
    }

    #[test]
    fn rejects_bad_step_and_horizon() {
        assert!(matches!(TimeGrid::new(1.0, 0.0), Err(GridError::BadStep { .. })));
        assert!(matches!(TimeGrid::new(1.0, -0.1), Err(GridError::BadStep { .. })));
        assert!(matches!(TimeGrid::new(0.0, 0.1), Err(GridError::BadHorizon { .. })));
        assert!(matches!(
            TimeGrid::new(f64::NAN, 0.1),
            Err(GridError::BadHorizon { .. })
        ));
    }

    #[test]
    fn index_lookup_round_trips() {
        let g = TimeGrid::new(2.0, 1e-3).unwrap();
        assert_eq!(g.index_of(0.5).unwrap(), 500);
        assert_eq!(g.index_of(2.0).unwrap(), 2000);
        assert!(g.index_of(0.50049).is_err());
    }
}
