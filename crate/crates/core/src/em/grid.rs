use serde::{Deserialize, Serialize};

use super::EmError;

/// Uniform frequency grid, endpoints inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    f_start_hz: f64,
    f_stop_hz: f64,
    n_points: usize,
}

impl FrequencyGrid {
    pub fn new(f_start_hz: f64, f_stop_hz: f64, n_points: usize) -> Result<Self, EmError> {
        if !(f_start_hz.is_finite() && f_stop_hz.is_finite()) || f_start_hz <= 0.0 {
            return Err(EmError::InvalidGrid(
                "frequencies must be finite and positive".into(),
            ));
        }
        if f_start_hz >= f_stop_hz {
            return Err(EmError::InvalidGrid("f_start must be below f_stop".into()));
        }
        if n_points < 2 {
            return Err(EmError::InvalidGrid("need at least 2 points".into()));
        }
        Ok(Self {
            f_start_hz,
            f_stop_hz,
            n_points,
        })
    }

    /// Default band used throughout: 6-16 GHz, 201 points.
    pub fn default_band() -> Self {
        Self::new(6e9, 16e9, 201).unwrap()
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn f_start_hz(&self) -> f64 {
        self.f_start_hz
    }

    #[inline]
    pub fn f_stop_hz(&self) -> f64 {
        self.f_stop_hz
    }

    #[inline]
    pub fn point_hz(&self, j: usize) -> f64 {
        debug_assert!(j < self.n_points);
        self.f_start_hz + j as f64 * (self.f_stop_hz - self.f_start_hz) / (self.n_points - 1) as f64
    }

    pub fn points_hz(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.point_hz(j))
    }
}
