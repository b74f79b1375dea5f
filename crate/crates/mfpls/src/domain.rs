//! Index domains of functional dimensions: compact intervals for curves,
//! axis-aligned rectangles for images.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Interval { min: f64, max: f64 },
    Rectangle { u_min: f64, u_max: f64, v_min: f64, v_max: f64 },
}

impl Domain {
    pub fn interval(min: f64, max: f64) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() || min >= max {
            return Err(Error::Validation(format!(
                "interval bounds must be finite with min < max, got [{min}, {max}]"
            )));
        }
        Ok(Domain::Interval { min, max })
    }

    pub fn rectangle(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Result<Self> {
        if ![u_min, u_max, v_min, v_max].iter().all(|x| x.is_finite())
            || u_min >= u_max
            || v_min >= v_max
        {
            return Err(Error::Validation(format!(
                "rectangle sides must have positive length, got [{u_min}, {u_max}] x [{v_min}, {v_max}]"
            )));
        }
        Ok(Domain::Rectangle { u_min, u_max, v_min, v_max })
    }

    /// Number of index variables (1 for curves, 2 for images).
    pub fn ndim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rectangle { .. } => 2,
        }
    }

    pub fn contains_1d(&self, t: f64) -> bool {
        match *self {
            Domain::Interval { min, max } => t >= min - 1e-12 && t <= max + 1e-12,
            Domain::Rectangle { .. } => false,
        }
    }

    pub fn contains_2d(&self, u: f64, v: f64) -> bool {
        match *self {
            Domain::Interval { .. } => false,
            Domain::Rectangle { u_min, u_max, v_min, v_max } => {
                u >= u_min - 1e-12 && u <= u_max + 1e-12 && v >= v_min - 1e-12 && v <= v_max + 1e-12
            }
        }
    }
}
