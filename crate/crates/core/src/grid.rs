use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform periodic grid over (-pi, pi].
///
/// Point `k` (zero based) sits at `-pi + 2 pi (k + 1) / size`; the last point
/// is exactly `pi`. Grid sums weighted by [`PhaseGrid::weight`] are the
/// composite trapezoid rule for periodic integrands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseGrid {
    size: usize,
}

impl PhaseGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::Config(format!("grid size must be at least 2, got {size}")));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weight(&self) -> f64 {
        2.0 * PI / self.size as f64
    }

    /// Phase of point `k`. Points `j` and `size - 2 - j` are exact negatives.
    pub fn point(&self, k: usize) -> f64 {
        let n = self.size as i64;
        let twice_offset = 2 * (k as i64 + 1) - n;
        PI * (twice_offset as f64 / n as f64)
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.size).map(|k| self.point(k))
    }

    /// Trapezoid-rule integral of grid samples over one period.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.size);
        samples.iter().sum::<f64>() * self.weight()
    }

    /// Index of the grid point nearest to `phi` (taken modulo 2 pi).
    pub fn nearest_index(&self, phi: f64) -> usize {
        let t = (phi + PI).rem_euclid(2.0 * PI) / self.weight();
        let j = t.round() as usize % self.size;
        // j counts from -pi; point k sits at j = k + 1.
        (j + self.size - 1) % self.size
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_phase(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}
