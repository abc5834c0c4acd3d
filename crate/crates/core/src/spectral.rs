//! Fourier machinery on periodic grids: derivatives, the x-antiderivative,
//! the 2/3-rule dealias filter, norms and spectral translation.
//!
//! Conventions. The forward transform is unnormalized, the inverse carries
//! the full 1/N. Parseval then reads
//!
//! ```text
//! ||f||_{L2}^2 = cell_volume * sum |f|^2 = (cell_volume / N) * sum |fhat|^2
//! ```
//!
//! which is the quadrature weight used by every norm here. Differentiation
//! multiplies mode k by (i k)^order and zeroes the Nyquist mode for odd
//! orders (an odd real symbol has no faithful single-sided Nyquist
//! representative).

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{ComplexField, ScalarField};
use crate::grid::PeriodicGrid;

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().expect("fft planner poisoned");
    if inverse {
        p.plan_fft_inverse(n)
    } else {
        p.plan_fft_forward(n)
    }
}

/// In-place FFT of every 1d line along `axis`. The inverse direction
/// divides by the axis length so that forward followed by inverse is the
/// identity.
pub(crate) fn axis_fft(grid: &PeriodicGrid, data: &mut [Complex64], axis: usize, inverse: bool) {
    let n = grid.shape()[axis];
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::default(); n];
    for line in 0..grid.line_count(axis) {
        let (start, stride) = grid.line_layout(axis, line);
        if stride == 1 {
            fft.process(&mut data[start..start + n]);
        } else {
            for j in 0..n {
                scratch[j] = data[start + j * stride];
            }
            fft.process(&mut scratch);
            for j in 0..n {
                data[start + j * stride] = scratch[j];
            }
        }
    }
    if inverse {
        let scale = 1.0 / n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Full n-dimensional transform (axis by axis).
pub(crate) fn fft_all(grid: &PeriodicGrid, data: &mut [Complex64], inverse: bool) {
    for axis in 0..grid.dim() {
        axis_fft(grid, data, axis, inverse);
    }
}

/// Index along `axis` of the point with linear index `lin`.
#[inline]
fn axis_index(grid: &PeriodicGrid, lin: usize, axis: usize) -> usize {
    if grid.dim() == 1 {
        lin
    } else if axis == 0 {
        lin % grid.shape()[0]
    } else {
        lin / grid.shape()[0]
    }
}

/// Multiplies an axis-transformed buffer by a per-mode symbol along `axis`.
fn apply_axis_symbol(grid: &PeriodicGrid, data: &mut [Complex64], axis: usize, sym: &[Complex64]) {
    for (lin, v) in data.iter_mut().enumerate() {
        *v *= sym[axis_index(grid, lin, axis)];
    }
}

fn derivative_symbol(grid: &PeriodicGrid, axis: usize, order: u32) -> Vec<Complex64> {
    let n = grid.shape()[axis];
    (0..n)
        .map(|j| {
            // single Nyquist mode carries no odd-order derivative
            if order % 2 == 1 && grid.mode_index(axis, j) == -(n as i64) / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, grid.wavenumber(axis, j)).powu(order)
            }
        })
        .collect()
}

/// Exact Fourier derivative of the trigonometric interpolant.
pub fn spectral_derivative_complex(
    field: &ComplexField,
    axis: usize,
    order: u32,
) -> Result<ComplexField> {
    field.grid.check_axis(axis)?;
    if order == 0 || order > 4 {
        return Err(Error::Domain(format!("derivative order must be 1..=4, got {order}")));
    }
    let mut data = field.data.clone();
    axis_fft(&field.grid, &mut data, axis, false);
    let sym = derivative_symbol(&field.grid, axis, order);
    apply_axis_symbol(&field.grid, &mut data, axis, &sym);
    axis_fft(&field.grid, &mut data, axis, true);
    Ok(ComplexField { grid: field.grid.clone(), data })
}

pub fn spectral_derivative(field: &ScalarField, axis: usize, order: u32) -> Result<ScalarField> {
    let out = spectral_derivative_complex(&field.to_complex(), axis, order)?;
    Ok(out.re())
}

/// Per-transverse-line means along x.
pub fn x_line_means(field: &ScalarField) -> Vec<f64> {
    let grid = &field.grid;
    let nx = grid.shape()[0];
    (0..grid.line_count(0))
        .map(|line| {
            let (start, _) = grid.line_layout(0, line);
            field.data[start..start + nx].iter().sum::<f64>() / nx as f64
        })
        .collect()
}

/// Spectral antiderivative along x with zero-mean normalization.
///
/// Preconditions mirror the KP-I constraint: every x-line mean must vanish
/// to within `1e-10 * ||f||_L2`, otherwise the inversion of d/dx is
/// ill-posed and a [`Error::ZeroMeanViolation`] is returned. Modes with
/// k_x = 0 (and the x-Nyquist mode, as for odd-order derivatives) are set
/// to zero.
pub fn x_antiderivative(field: &ScalarField) -> Result<ScalarField> {
    let tol = 1e-10 * norm(field, NormKind::L2);
    let worst = x_line_means(field)
        .into_iter()
        .fold(0.0_f64, |acc, m| if m.abs() > acc.abs() { m } else { acc });
    if worst.abs() > tol {
        return Err(Error::ZeroMeanViolation { mean: worst.abs(), tol });
    }
    let grid = &field.grid;
    let n = grid.shape()[0];
    let sym: Vec<Complex64> = (0..n)
        .map(|j| {
            let m = grid.mode_index(0, j);
            if m == 0 || m == -(n as i64) / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                1.0 / Complex64::new(0.0, grid.wavenumber(0, j))
            }
        })
        .collect();
    let mut data: Vec<Complex64> = field.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    axis_fft(grid, &mut data, 0, false);
    apply_axis_symbol(grid, &mut data, 0, &sym);
    axis_fft(grid, &mut data, 0, true);
    Ok(ScalarField { grid: grid.clone(), data: data.iter().map(|z| z.re).collect() })
}

/// Zeroes every spectral slot with 3 |m| > N on any axis (the 2/3 rule).
pub(crate) fn dealias_spectrum(grid: &PeriodicGrid, spec: &mut [Complex64]) {
    let keep: Vec<Vec<bool>> = (0..grid.dim())
        .map(|ax| {
            let n = grid.shape()[ax] as i64;
            (0..grid.shape()[ax])
                .map(|j| 3 * grid.mode_index(ax, j).abs() <= n)
                .collect()
        })
        .collect();
    for (lin, v) in spec.iter_mut().enumerate() {
        for ax in 0..grid.dim() {
            if !keep[ax][axis_index(grid, lin, ax)] {
                *v = Complex64::new(0.0, 0.0);
                break;
            }
        }
    }
}

pub fn dealias_complex(field: &ComplexField) -> ComplexField {
    let mut data = field.data.clone();
    fft_all(&field.grid, &mut data, false);
    dealias_spectrum(&field.grid, &mut data);
    fft_all(&field.grid, &mut data, true);
    ComplexField { grid: field.grid.clone(), data }
}

pub fn dealias(field: &ScalarField) -> ScalarField {
    dealias_complex(&field.to_complex()).re()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    Linf,
    /// Sobolev norm of order s >= 0 through Fourier weights (1 + |k|^2)^s.
    Hs(f64),
}

pub fn norm(field: &ScalarField, kind: NormKind) -> f64 {
    match kind {
        NormKind::L2 => {
            let w = field.grid.cell_volume();
            (w * field.data.iter().map(|v| v * v).sum::<f64>()).sqrt()
        }
        NormKind::Linf => field.data.iter().fold(0.0_f64, |a, v| a.max(v.abs())),
        NormKind::Hs(s) => hs_norm_impl(&field.grid, &field.to_complex().data, s),
    }
}

pub fn norm_complex(field: &ComplexField, kind: NormKind) -> f64 {
    match kind {
        NormKind::L2 => {
            let w = field.grid.cell_volume();
            (w * field.data.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
        }
        NormKind::Linf => field.data.iter().fold(0.0_f64, |a, z| a.max(z.norm())),
        NormKind::Hs(s) => hs_norm_impl(&field.grid, &field.data, s),
    }
}

fn hs_norm_impl(grid: &PeriodicGrid, data: &[Complex64], s: f64) -> f64 {
    let mut spec = data.to_vec();
    fft_all(grid, &mut spec, false);
    let weight = grid.cell_volume() / grid.len() as f64;
    let mut acc = 0.0;
    for (lin, z) in spec.iter().enumerate() {
        let mut ksq = 0.0;
        for ax in 0..grid.dim() {
            let k = grid.wavenumber(ax, axis_index(grid, lin, ax));
            ksq += k * k;
        }
        acc += (1.0 + ksq).powf(s) * z.norm_sqr();
    }
    (weight * acc).sqrt()
}

/// L2 distance ||f - g||.
pub fn l2_distance(f: &ScalarField, g: &ScalarField) -> f64 {
    let w = f.grid.cell_volume();
    let sum: f64 = f
        .data
        .iter()
        .zip(&g.data)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    (w * sum).sqrt()
}

pub fn l2_distance_complex(f: &ComplexField, g: &ComplexField) -> f64 {
    let w = f.grid.cell_volume();
    let sum: f64 = f.data.iter().zip(&g.data).map(|(a, b)| (a - b).norm_sqr()).sum();
    (w * sum).sqrt()
}

/// Integral of f over the box (cell_volume times the sample sum).
pub fn integral(field: &ScalarField) -> f64 {
    field.grid.cell_volume() * field.data.iter().sum::<f64>()
}

fn translate_symbols(grid: &PeriodicGrid, shift: &[f64], real_input: bool) -> Vec<Vec<Complex64>> {
    (0..grid.dim())
        .map(|ax| {
            let n = grid.shape()[ax] as i64;
            (0..grid.shape()[ax])
                .map(|j| {
                    let k = grid.wavenumber(ax, j);
                    let phase = -k * shift[ax];
                    if real_input && grid.mode_index(ax, j) == -n / 2 {
                        // keep conjugate symmetry: the Nyquist mode is shared
                        // between +N/2 and -N/2, so its translate is a cosine
                        Complex64::new(phase.cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, phase)
                    }
                })
                .collect()
        })
        .collect()
}

/// Periodic translation: returns x -> f(x - shift), exactly on the
/// trigonometric interpolant.
pub fn translate(field: &ScalarField, shift: &[f64]) -> Result<ScalarField> {
    if shift.len() != field.grid.dim() {
        return Err(Error::Domain("translate shift arity mismatch".into()));
    }
    let grid = &field.grid;
    let syms = translate_symbols(grid, shift, true);
    let mut data: Vec<Complex64> = field.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_all(grid, &mut data, false);
    for (lin, v) in data.iter_mut().enumerate() {
        for (ax, sym) in syms.iter().enumerate() {
            *v *= sym[axis_index(grid, lin, ax)];
        }
    }
    fft_all(grid, &mut data, true);
    Ok(ScalarField { grid: grid.clone(), data: data.iter().map(|z| z.re).collect() })
}

pub fn translate_complex(field: &ComplexField, shift: &[f64]) -> Result<ComplexField> {
    if shift.len() != field.grid.dim() {
        return Err(Error::Domain("translate shift arity mismatch".into()));
    }
    let grid = &field.grid;
    let syms = translate_symbols(grid, shift, false);
    let mut data = field.data.clone();
    fft_all(grid, &mut data, false);
    for (lin, v) in data.iter_mut().enumerate() {
        for (ax, sym) in syms.iter().enumerate() {
            *v *= sym[axis_index(grid, lin, ax)];
        }
    }
    fft_all(grid, &mut data, true);
    Ok(ComplexField { grid: grid.clone(), data })
}
