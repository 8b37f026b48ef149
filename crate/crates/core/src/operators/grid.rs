use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid of `n` interior points on `(x_min, x_max)` with Dirichlet ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let g = Grid1D { x_min, x_max, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite()) || self.x_min >= self.x_max {
            return Err(Error::InvalidGrid(format!(
                "need x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if self.n < 3 {
            return Err(Error::InvalidGrid(format!("n = {} < 3", self.n)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n + 1) as f64
    }

    /// Interior node `i` (0-based).
    pub fn point(&self, i: usize) -> f64 {
        self.x_min + (i + 1) as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }

    /// Same interval with half the spacing (nested nodes).
    pub fn refined(&self) -> Self {
        Grid1D {
            n: 2 * self.n + 1,
            ..*self
        }
    }

    /// Mirror image under `x ↦ -x`.
    pub fn reflected(&self) -> Self {
        Grid1D {
            x_min: -self.x_max,
            x_max: -self.x_min,
            n: self.n,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= 1e-14 * self.x_max.abs().max(1.0)
    }
}
