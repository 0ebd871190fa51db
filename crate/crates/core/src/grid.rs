//! Rectangular evaluation lattices for density grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::C64;

/// `nx × ny` lattice over `[x0, x1] × [y0, y1]`, row-major in `y` then `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        let g = Self { x0, x1, y0, y1, nx, ny };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidParams("grid must have at least one point per axis".into()));
        }
        if ![self.x0, self.x1, self.y0, self.y1].iter().all(|v| v.is_finite()) || self.x0 > self.x1 || self.y0 > self.y1 {
            return Err(Error::InvalidParams(format!("malformed grid bounds {self:?}")));
        }
        Ok(())
    }

    fn coord(a: f64, b: f64, n: usize, k: usize) -> f64 {
        if n == 1 {
            a
        } else {
            a + (b - a) * k as f64 / (n - 1) as f64
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        Self::coord(self.x0, self.x1, self.nx, i)
    }

    pub fn y(&self, j: usize) -> f64 {
        Self::coord(self.y0, self.y1, self.ny, j)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, k: usize) -> C64 {
        C64::new(self.x(k % self.nx), self.y(k / self.nx))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridValue {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Evaluates `f` at every lattice point in parallel; output order is the
/// lattice order regardless of scheduling.
pub fn evaluate_grid<F>(grid: &GridSpec, f: F) -> Result<Vec<GridValue>>
where
    F: Fn(C64) -> Result<f64> + Sync,
{
    grid.validate()?;
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let z = grid.point(k);
            f(z).map(|value| GridValue { x: z.re, y: z.im, value })
        })
        .collect()
}
