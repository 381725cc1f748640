//! Rectangular sampling grids shared by the field and phase-portrait
//! evaluators.

use serde::{Deserialize, Serialize};

use crate::{Result, VortexError};

/// An `nx × ny` rectangular grid with inclusive endpoints. Values produced
/// over it are stored row-major: index `iy * nx + ix`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, nx: usize, y_min: f64, y_max: f64, ny: usize) -> Self {
        Self {
            x_min,
            x_max,
            nx,
            y_min,
            y_max,
            ny,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(VortexError::Validation(
                "grid needs at least 2 points per axis".into(),
            ));
        }
        if !(self.x_min < self.x_max) || !(self.y_min < self.y_max) {
            return Err(VortexError::Validation(
                "grid ranges must be finite and increasing".into(),
            ));
        }
        Ok(())
    }

    pub fn x_at(&self, ix: usize) -> f64 {
        self.x_min + (self.x_max - self.x_min) * ix as f64 / (self.nx - 1) as f64
    }

    pub fn y_at(&self, iy: usize) -> f64 {
        self.y_min + (self.y_max - self.y_min) * iy as f64 / (self.ny - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
