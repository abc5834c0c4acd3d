//! Real and complex sampled fields on a [`PeriodicGrid`].
//!
//! Fields are value-like: cloning copies the samples, and every transform in
//! the crate returns fresh fields rather than mutating shared state. The
//! grid is held behind an `Arc` so snapshots of a long trajectory do not
//! duplicate the metadata.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;

#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Arc<PeriodicGrid>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ComplexField {
    pub grid: Arc<PeriodicGrid>,
    pub data: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<PeriodicGrid>) -> Self {
        ScalarField { grid: grid.clone(), data: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: &Arc<PeriodicGrid>, value: f64) -> Self {
        ScalarField { grid: grid.clone(), data: vec![value; grid.len()] }
    }

    pub fn from_data(grid: &Arc<PeriodicGrid>, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: data.len() });
        }
        Ok(ScalarField { grid: grid.clone(), data })
    }

    /// Samples `f` at every grid point; the closure receives the coordinate
    /// vector (length = grid dimension).
    pub fn from_fn(grid: &Arc<PeriodicGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        let mut coords = vec![0.0; grid.dim()];
        for lin in 0..grid.len() {
            let multi = grid.multi_index(lin);
            for (ax, &i) in multi.iter().enumerate() {
                coords[ax] = grid.coord(ax, i);
            }
            data.push(f(&coords));
        }
        ScalarField { grid: grid.clone(), data }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField { grid: self.grid.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.data.len(), other.data.len());
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        ScalarField { grid: self.grid.clone(), data }
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn check_finite(&self, context: &str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { context: context.to_string() })
        }
    }
}

impl ComplexField {
    pub fn zeros(grid: &Arc<PeriodicGrid>) -> Self {
        ComplexField { grid: grid.clone(), data: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn constant(grid: &Arc<PeriodicGrid>, value: Complex64) -> Self {
        ComplexField { grid: grid.clone(), data: vec![value; grid.len()] }
    }

    pub fn from_data(grid: &Arc<PeriodicGrid>, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: data.len() });
        }
        Ok(ComplexField { grid: grid.clone(), data })
    }

    pub fn from_fn(grid: &Arc<PeriodicGrid>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        let mut coords = vec![0.0; grid.dim()];
        for lin in 0..grid.len() {
            let multi = grid.multi_index(lin);
            for (ax, &i) in multi.iter().enumerate() {
                coords[ax] = grid.coord(ax, i);
            }
            data.push(f(&coords));
        }
        ComplexField { grid: grid.clone(), data }
    }

    pub fn re(&self) -> ScalarField {
        ScalarField { grid: self.grid.clone(), data: self.data.iter().map(|z| z.re).collect() }
    }

    pub fn im(&self) -> ScalarField {
        ScalarField { grid: self.grid.clone(), data: self.data.iter().map(|z| z.im).collect() }
    }

    pub fn modulus(&self) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn min_modulus(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn check_finite(&self, context: &str) -> Result<()> {
        if self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { context: context.to_string() })
        }
    }
}
