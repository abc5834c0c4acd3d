//! Conversions between the wavefunction and its hydrodynamic variables.
//!
//! Polar form: `psi = (1 + eps^2 A) exp(i eps phi)` with real amplitude
//! perturbation `A` and scaled phase `phi`, both order one as eps -> 0.
//! Complex-amplitude form: `psi = (1 + eps^2 a) exp(i eps theta)` with
//! complex `a`; at initial time the convention is `a(0) = A(0)` real and
//! `theta(0) = phi(0)`, after which the two splittings drift apart while
//! describing the same psi.
//!
//! Velocities are `u = grad_eps phi / (2c)` where
//! `grad_eps = (d/dx, eps d/dy)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, ScalarField};
use crate::spectral::{l2_distance_complex, norm, norm_complex, spectral_derivative, NormKind};

/// Guard on min |psi| before polar extraction. Stricter than the natural
/// 1/2 so problems surface before the decomposition degrades.
pub const VORTEX_FLOOR: f64 = 0.25;

/// Largest per-cell phase increment accepted after 2 pi correction. Phases
/// in this regime vary on O(1) scales in x while the grid resolves much
/// finer, so a jump beyond pi/2 means under-resolution or a winding, not
/// physics.
pub const UNWRAP_CELL_LIMIT: f64 = std::f64::consts::FRAC_PI_2;

/// Polar (Madelung) variables.
#[derive(Debug, Clone)]
pub struct PolarState {
    /// Amplitude perturbation A, psi = (1 + eps^2 A) e^{i eps phi}.
    pub amp: ScalarField,
    /// Scaled phase phi.
    pub phi: ScalarField,
    pub eps: f64,
}

/// Complex-amplitude variables.
#[derive(Debug, Clone)]
pub struct GrenierState {
    pub a: ComplexField,
    pub theta: ScalarField,
    pub eps: f64,
}

impl PolarState {
    /// Velocity u = grad_eps phi / (2c): component 0 is d_x phi / (2c),
    /// transverse components carry the extra factor eps.
    pub fn velocity(&self, c: f64) -> Result<Vec<ScalarField>> {
        velocity_from_phase(&self.phi, self.eps, c)
    }
}

impl GrenierState {
    pub fn velocity(&self, c: f64) -> Result<Vec<ScalarField>> {
        velocity_from_phase(&self.theta, self.eps, c)
    }
}

fn velocity_from_phase(phase: &ScalarField, eps: f64, c: f64) -> Result<Vec<ScalarField>> {
    let mut out = Vec::with_capacity(phase.grid.dim());
    for axis in 0..phase.grid.dim() {
        let scale = if axis == 0 { 1.0 } else { eps } / (2.0 * c);
        let d = spectral_derivative(phase, axis, 1)?;
        out.push(d.map(|v| scale * v));
    }
    Ok(out)
}

fn principal(x: f64) -> f64 {
    // wrap to (-pi, pi]
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x % two_pi;
    if y > std::f64::consts::PI {
        y -= two_pi;
    } else if y <= -std::f64::consts::PI {
        y += two_pi;
    }
    y
}

/// Extracts (A, phi) from psi.
///
/// The raw phase is unwrapped independently along every x-line, pinned to
/// its principal value at the column x = 0 (the grid center). 2 pi jumps
/// between neighboring cells are corrected; any corrected increment still
/// above [`UNWRAP_CELL_LIMIT`] aborts, as does a nonzero winding around the
/// periodic line or an inconsistent unwrap between neighboring transverse
/// lines (those are reported, never silently repaired).
pub fn polar_decompose(psi: &ComplexField, eps: f64) -> Result<PolarState> {
    let grid = &psi.grid;
    let min_abs = psi.min_modulus();
    if min_abs <= VORTEX_FLOOR {
        return Err(Error::VortexDetected {
            context: "polar decomposition".into(),
            min_abs,
            floor: VORTEX_FLOOR,
        });
    }
    let eps2 = eps * eps;
    let amp = ScalarField {
        grid: grid.clone(),
        data: psi.data.iter().map(|z| (z.norm() - 1.0) / eps2).collect(),
    };

    let nx = grid.shape()[0];
    let pin = nx / 2; // centered coordinates put x = 0 at index nx/2
    let mut phase = vec![0.0; grid.len()];
    let mut pinned_prev: Option<f64> = None;
    for line in 0..grid.line_count(0) {
        let (start, stride) = grid.line_layout(0, line);
        let raw: Vec<f64> = (0..nx).map(|j| psi.data[start + j * stride].arg()).collect();
        let mut unwrapped = vec![0.0; nx];
        unwrapped[pin] = raw[pin];
        // scan right from the pin, then wrap around past the seam
        for step in 1..nx {
            let j = (pin + step) % nx;
            let prev = (pin + step - 1) % nx;
            let inc = principal(raw[j] - raw[prev]);
            if inc.abs() > UNWRAP_CELL_LIMIT {
                return Err(Error::UnwrapAmbiguity {
                    context: format!("cell increment on x-line {line}"),
                    increment: inc,
                });
            }
            unwrapped[j] = unwrapped[prev] + inc;
        }
        // closing the periodic loop must return to the start: a leftover
        // 2 pi multiple is a winding around a vortex
        let closure = unwrapped[(pin + nx - 1) % nx] + principal(raw[pin] - raw[(pin + nx - 1) % nx])
            - unwrapped[pin];
        if closure.abs() > 1e-6 {
            return Err(Error::UnwrapAmbiguity {
                context: format!("nonzero winding around periodic x-line {line}"),
                increment: closure,
            });
        }
        // transverse consistency: the pinned column must vary slowly from
        // line to line, and the per-line unwrap must not hide a 2 pi offset
        if let Some(prev) = pinned_prev {
            let jump = principal(unwrapped[pin] - prev);
            if jump.abs() > UNWRAP_CELL_LIMIT
                || (unwrapped[pin] - prev - jump).abs() > 1e-6
            {
                return Err(Error::UnwrapAmbiguity {
                    context: format!("transverse phase jump entering line {line}"),
                    increment: unwrapped[pin] - prev,
                });
            }
        }
        pinned_prev = Some(unwrapped[pin]);
        for j in 0..nx {
            phase[start + j * stride] = unwrapped[j] / eps;
        }
    }
    Ok(PolarState { amp, phi: ScalarField { grid: grid.clone(), data: phase }, eps })
}

/// psi = (1 + eps^2 A) e^{i eps phi}.
pub fn reconstruct(polar: &PolarState) -> Result<ComplexField> {
    let eps = polar.eps;
    let eps2 = eps * eps;
    let min_mod = 1.0 + eps2 * polar.amp.min();
    if min_mod < 0.5 {
        return Err(Error::AmplitudeBound { what: "1 + eps^2 A", value: min_mod });
    }
    let data = polar
        .amp
        .data
        .iter()
        .zip(&polar.phi.data)
        .map(|(&a, &p)| Complex64::from_polar(1.0 + eps2 * a, eps * p))
        .collect();
    Ok(ComplexField { grid: polar.amp.grid.clone(), data })
}

/// Distance from the long-wave constraint d_x phi = 2 c A.
///
/// Returns (raw, scaled) with raw = ||d_x phi - 2 c A||_L2 and
/// scaled = raw / eps, the well-preparedness measure controlling the KdV
/// and KP-I approximation errors.
pub fn constraint_deficit(polar: &PolarState, c: f64) -> Result<(f64, f64)> {
    let dphi = spectral_derivative(&polar.phi, 0, 1)?;
    let diff = dphi.zip(&polar.amp, |d, a| d - 2.0 * c * a);
    let raw = norm(&diff, NormKind::L2);
    Ok((raw, raw / polar.eps))
}

/// Initializes the complex-amplitude splitting from polar data
/// (a = A real, theta = phi) and verifies it reproduces psi.
pub fn grenier_decompose(psi: &ComplexField, polar: &PolarState) -> Result<GrenierState> {
    let state = GrenierState {
        a: polar.amp.to_complex(),
        theta: polar.phi.clone(),
        eps: polar.eps,
    };
    let back = grenier_reconstruct(&state)?;
    let scale = norm_complex(psi, NormKind::L2).max(1.0);
    let mismatch = l2_distance_complex(&back, psi) / scale;
    if mismatch > 1e-10 {
        return Err(Error::Domain(format!(
            "polar state does not describe psi (relative L2 mismatch {mismatch:.3e})"
        )));
    }
    Ok(state)
}

/// psi = (1 + eps^2 a) e^{i eps theta}.
pub fn grenier_reconstruct(state: &GrenierState) -> Result<ComplexField> {
    let eps = state.eps;
    let eps2 = eps * eps;
    let worst = state.a.data.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if eps2 * worst > 0.5 {
        return Err(Error::AmplitudeBound { what: "eps^2 |a|", value: eps2 * worst });
    }
    let data = state
        .a
        .data
        .iter()
        .zip(&state.theta.data)
        .map(|(&a, &th)| (1.0 + eps2 * a) * Complex64::from_polar(1.0, eps * th))
        .collect();
    Ok(ComplexField { grid: state.a.grid.clone(), data })
}

/// Residual of the exact relation between the two phase splittings:
/// d_j phi = d_j theta + eps Im(d_j a / (1 + eps^2 a)) for every axis j.
/// Returns the largest L2 residual over axes.
pub fn relation_residual(gstate: &GrenierState, polar: &PolarState) -> Result<f64> {
    let eps = gstate.eps;
    let eps2 = eps * eps;
    let mut worst = 0.0_f64;
    for axis in 0..polar.phi.grid.dim() {
        let dphi = spectral_derivative(&polar.phi, axis, 1)?;
        let dtheta = spectral_derivative(&gstate.theta, axis, 1)?;
        let da = crate::spectral::spectral_derivative_complex(&gstate.a, axis, 1)?;
        let mut acc = 0.0;
        for i in 0..dphi.data.len() {
            let denom = 1.0 + eps2 * gstate.a.data[i];
            let rhs = dtheta.data[i] + eps * (da.data[i] / denom).im;
            let r = dphi.data[i] - rhs;
            acc += r * r;
        }
        worst = worst.max((polar.phi.grid.cell_volume() * acc).sqrt());
    }
    Ok(worst)
}

/// A space-time coordinate tuple, in either frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTime {
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingDirection {
    /// (tau, z) -> (t, x): t = c eps^3 tau, x_1 = eps (z_1 - c tau),
    /// x_j = eps^2 z_j.
    ToScaled,
    /// (t, x) -> (tau, z): the inverse map.
    ToPhysical,
}

/// The long-wave change of variables between the physical frame (tau, z)
/// and the scaled frame (t, x) in which the limit equations live.
pub fn scaling_map(eps: f64, c: f64, direction: ScalingDirection, coords: &SpaceTime) -> SpaceTime {
    match direction {
        ScalingDirection::ToScaled => {
            let t = c * eps.powi(3) * coords.t;
            let mut x = Vec::with_capacity(coords.x.len());
            for (j, &z) in coords.x.iter().enumerate() {
                if j == 0 {
                    x.push(eps * (z - c * coords.t));
                } else {
                    x.push(eps * eps * z);
                }
            }
            SpaceTime { t, x }
        }
        ScalingDirection::ToPhysical => {
            let tau = coords.t / (c * eps.powi(3));
            let mut z = Vec::with_capacity(coords.x.len());
            for (j, &x) in coords.x.iter().enumerate() {
                if j == 0 {
                    z.push(x / eps + c * tau);
                } else {
                    z.push(x / (eps * eps));
                }
            }
            SpaceTime { t: tau, x: z }
        }
    }
}
