//! Uniform periodic grids in one and two dimensions with spectral metadata.
//!
//! Axis 0 is always the propagation direction x; axis 1 (when present) is
//! the transverse direction. Samples are stored row-major with x fastest,
//! so linear index = ix + nx * iy. Coordinates are centered: the axis-i
//! points are -L_i/2 + j * L_i/N_i, j = 0..N_i. Wavenumbers follow the
//! standard FFT layout 2*pi*m/L with m = 0, 1, ..., N/2-1, -N/2, ..., -1
//! (a single Nyquist mode at m = -N/2).

use crate::error::{Error, Result};

pub const DEFAULT_LENGTH: f64 = 32.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    shape: Vec<usize>,
    lengths: Vec<f64>,
}

impl PeriodicGrid {
    pub fn new(shape: &[usize], lengths: &[f64]) -> Result<Self> {
        if shape.is_empty() || shape.len() > 2 {
            return Err(Error::Config(format!(
                "grid dimension must be 1 or 2, got {}",
                shape.len()
            )));
        }
        if shape.len() != lengths.len() {
            return Err(Error::Config("grid shape/lengths arity mismatch".into()));
        }
        for (&n, &l) in shape.iter().zip(lengths) {
            if n < 8 || n % 2 != 0 {
                return Err(Error::Config(format!(
                    "axis sample count must be even and >= 8, got {n}"
                )));
            }
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::Config(format!("axis length must be positive, got {l}")));
            }
        }
        Ok(PeriodicGrid { shape: shape.to_vec(), lengths: lengths.to_vec() })
    }

    pub fn new_1d(n: usize, l: f64) -> Result<Self> {
        Self::new(&[n], &[l])
    }

    pub fn new_2d(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        Self::new(&[nx, ny], &[lx, ly])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim() {
            Err(Error::AxisOutOfRange { axis, dim: self.dim() })
        } else {
            Ok(())
        }
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.shape[axis] as f64
    }

    /// Quadrature weight of one grid cell, prod_i L_i / N_i.
    pub fn cell_volume(&self) -> f64 {
        self.lengths
            .iter()
            .zip(&self.shape)
            .map(|(&l, &n)| l / n as f64)
            .product()
    }

    pub fn coord(&self, axis: usize, index: usize) -> f64 {
        -0.5 * self.lengths[axis] + index as f64 * self.spacing(axis)
    }

    pub fn coords(&self, axis: usize) -> Vec<f64> {
        (0..self.shape[axis]).map(|i| self.coord(axis, i)).collect()
    }

    /// Signed integer mode index m for FFT slot `index`:
    /// 0, 1, ..., N/2-1, -N/2, ..., -1.
    pub fn mode_index(&self, axis: usize, index: usize) -> i64 {
        let n = self.shape[axis];
        if index < n / 2 {
            index as i64
        } else {
            index as i64 - n as i64
        }
    }

    pub fn wavenumber(&self, axis: usize, index: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.mode_index(axis, index) as f64 / self.lengths[axis]
    }

    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        (0..self.shape[axis]).map(|i| self.wavenumber(axis, i)).collect()
    }

    /// Linear index from per-axis indices (x fastest).
    pub fn linear_index(&self, multi: &[usize]) -> usize {
        match *multi {
            [ix] => ix,
            [ix, iy] => ix + self.shape[0] * iy,
            _ => unreachable!("grids are 1d or 2d"),
        }
    }

    /// Splits a linear index back into per-axis indices.
    pub fn multi_index(&self, linear: usize) -> Vec<usize> {
        match self.dim() {
            1 => vec![linear],
            _ => vec![linear % self.shape[0], linear / self.shape[0]],
        }
    }

    /// Number of 1d lines along `axis` (= product of the other extents).
    pub fn line_count(&self, axis: usize) -> usize {
        self.len() / self.shape[axis]
    }

    /// Start offset and stride of the `line`-th 1d line along `axis`.
    pub fn line_layout(&self, axis: usize, line: usize) -> (usize, usize) {
        match (self.dim(), axis) {
            (1, 0) => (0, 1),
            (2, 0) => (line * self.shape[0], 1), // an x-line: contiguous
            (2, 1) => (line, self.shape[0]),     // a y-line: strided by nx
            _ => unreachable!("axis checked by caller"),
        }
    }
}
