//! Complex-amplitude hydrodynamic formulation and solver
//!
//! With psi = (1 + eps^2 a) e^{i eps theta} (a complex-valued), the
//! evolution splits into
//!
//! ```text
//! dt a  - (1/eps^2) dx a + (1/c) grad_e theta . grad_e a
//!       + (1/(2 c eps^2)) (1 + eps^2 a) lap_e theta = (i/(2 eps c)) lap_e a
//! dt th - (1/eps^2) dx th + (1/(2c)) |grad_e theta|^2
//!       + (1/(c eps^4)) f(|1 + eps^2 a|^2) = 0
//! ```
//!
//! with grad_e = (dx, eps dperp), lap_e = dxx + eps^2 lap_perp. The
//! diagonal linear parts (fast transport and the dispersive i lap_e a)
//! are integrated exactly by an integrating factor; everything else is
//! advanced by RK4 with dealiased products. The stiff a/theta coupling
//! stays explicit, which bounds the stable step by ~ 2 eps^2 / kappa_max.
//!
//! The module also exposes the first-order symbol H, its symmetrizer S,
//! the skew pairing of the dispersive operator, and residual evaluators
//! that certify a wavefunction trajectory against the real hydrodynamic
//! systems in (A, phi) and (A, u) variables.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, ScalarField};
use crate::grid::PeriodicGrid;
use crate::madelung::{GrenierState, PolarState, VORTEX_FLOOR};
use crate::nonlinearity::NonlinearityModel;
use crate::spectral::{dealias_spectrum, fft_all, norm, NormKind};

// ─── factored nonlinear coefficients ────────────────────────────────────
//
// Both hydrodynamic systems need f-derived quantities divided by powers
// of eps. Evaluating f near 1 and dividing would cancel catastrophically,
// so everything is expressed through the shifted coefficients d_j of
// f(1 + h) = sum_j d_j h^j with h = eps^2 s, s = O(1).

/// f(1 + eps^2 s) / eps^4 minus the leading d1 s / eps^2 term:
/// sum_{j>=2} d_j s^j eps^(2j-4).
fn f_tail_over_eps4(model: &NonlinearityModel, s: f64, eps2: f64) -> f64 {
    let d = model.shifted_coeffs();
    let mut acc = 0.0;
    for &dj in d.iter().skip(1).rev() {
        acc = acc * (s * eps2) + dj;
    }
    acc * s * s
}

/// g(eps^2 A) / eps^2 for real amplitude A, with s = 2A + eps^2 A^2:
/// sum_{j>=2} j (d_j/d_1) s^(j-1) eps^(2j-4).
fn g_over_eps2(model: &NonlinearityModel, s: f64, eps2: f64) -> f64 {
    let d = model.shifted_coeffs();
    let mut acc = 0.0;
    for (idx, &dj) in d.iter().enumerate().skip(1).rev() {
        acc = acc * (s * eps2) + (idx + 1) as f64 * dj;
    }
    acc * s / d[0]
}

// ─── spectral helpers ───────────────────────────────────────────────────

struct SpectralWorkspace {
    grid: std::sync::Arc<PeriodicGrid>,
    eps: f64,
    /// kx per linear index.
    kx: Vec<f64>,
    /// ky per linear index (empty in 1d).
    ky: Vec<f64>,
    /// kappa^2 = kx^2 + eps^2 ky^2 per linear index.
    kappa2: Vec<f64>,
    /// 1.0 on modes kept by the 2/3 rule, 0.0 elsewhere.
    keep: Vec<f64>,
}

impl SpectralWorkspace {
    fn new(grid: &std::sync::Arc<PeriodicGrid>, eps: f64) -> Self {
        let nx = grid.shape()[0];
        let n = grid.len();
        let mut kx = vec![0.0; n];
        let mut ky = Vec::new();
        let mut kappa2 = vec![0.0; n];
        if grid.dim() == 2 {
            ky = vec![0.0; n];
        }
        for lin in 0..n {
            let jx = lin % nx;
            kx[lin] = grid.wavenumber(0, jx);
            let mut k2 = kx[lin] * kx[lin];
            if grid.dim() == 2 {
                let kyv = grid.wavenumber(1, lin / nx);
                ky[lin] = kyv;
                k2 += eps * eps * kyv * kyv;
            }
            kappa2[lin] = k2;
        }
        let mut keep = vec![Complex64::new(1.0, 0.0); n];
        dealias_spectrum(grid, &mut keep);
        let keep = keep.iter().map(|z| z.re).collect();
        SpectralWorkspace { grid: grid.clone(), eps, kx, ky, kappa2, keep }
    }

    fn to_physical(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let mut out = spec.to_vec();
        fft_all(&self.grid, &mut out, true);
        out
    }

    /// Inverse transform of (i k_axis) spec.
    fn derivative_physical(&self, spec: &[Complex64], axis: usize) -> Vec<Complex64> {
        let k = if axis == 0 { &self.kx } else { &self.ky };
        let mut out: Vec<Complex64> = spec
            .iter()
            .zip(k)
            .map(|(z, &kk)| z * Complex64::new(0.0, kk))
            .collect();
        fft_all(&self.grid, &mut out, true);
        out
    }

    /// Inverse transform of (-kappa^2) spec, i.e. lap_e in physical space.
    fn lap_e_physical(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> =
            spec.iter().zip(&self.kappa2).map(|(z, &k2)| z * -k2).collect();
        fft_all(&self.grid, &mut out, true);
        out
    }

    fn to_spectral_dealiased(&self, mut phys: Vec<Complex64>) -> Vec<Complex64> {
        fft_all(&self.grid, &mut phys, false);
        for (z, &m) in phys.iter_mut().zip(&self.keep) {
            *z *= m;
        }
        phys
    }
}

// ─── time stepping ──────────────────────────────────────────────────────

/// Largest stable step for the explicit a/theta coupling: the linearized
/// coupling rotates at kappa/eps^2 per mode, and RK4 tolerates imaginary
/// eigenvalues up to 2*sqrt(2)/dt. Returns min(1e-3, 2 eps^2 / kappa_max)
/// over the dealiased modes, keeping a safety margin inside the boundary.
pub fn default_dt(grid: &PeriodicGrid, eps: f64) -> f64 {
    let mut kappa_max: f64 = 0.0;
    let nx = grid.shape()[0];
    for jx in 0..nx {
        let mx = grid.mode_index(0, jx).unsigned_abs() as usize;
        if 3 * mx > nx {
            continue;
        }
        let kx = grid.wavenumber(0, jx);
        if grid.dim() == 2 {
            let ny = grid.shape()[1];
            for jy in 0..ny {
                let my = grid.mode_index(1, jy).unsigned_abs() as usize;
                if 3 * my > ny {
                    continue;
                }
                let ky = grid.wavenumber(1, jy);
                kappa_max = kappa_max.max((kx * kx + eps * eps * ky * ky).sqrt());
            }
        } else {
            kappa_max = kappa_max.max(kx.abs());
        }
    }
    (2.0 * eps * eps / kappa_max).min(1e-3)
}

fn check_amplitude(a: &ComplexField, eps: f64, what: &'static str) -> Result<()> {
    let mut worst = 0.0_f64;
    for z in &a.data {
        worst = worst.max(z.norm_sqr());
    }
    let value = eps * eps * worst.sqrt();
    if value > 0.5 {
        return Err(Error::AmplitudeBound { what, value });
    }
    Ok(())
}

struct Rhs {
    a: Vec<Complex64>,
    th: Vec<Complex64>,
}

/// Nonlinear (and stiff coupling) part of the system, spectral in/out.
fn nonlinear_rhs(
    ws: &SpectralWorkspace,
    model: &NonlinearityModel,
    za: &[Complex64],
    zth: &[Complex64],
) -> Rhs {
    let eps = ws.eps;
    let eps2 = eps * eps;
    let c = model.c();
    let d1 = model.shifted_coeffs()[0];
    let two_d = ws.grid.dim() == 2;

    let a_phys = ws.to_physical(za);
    let ax = ws.derivative_physical(za, 0);
    let thx = ws.derivative_physical(zth, 0);
    let lap_th = ws.lap_e_physical(zth);
    let (ay, thy) = if two_d {
        (ws.derivative_physical(za, 1), ws.derivative_physical(zth, 1))
    } else {
        (Vec::new(), Vec::new())
    };

    let n = ws.grid.len();
    let mut na = vec![Complex64::default(); n];
    let mut nth = vec![Complex64::default(); n];
    for i in 0..n {
        let a = a_phys[i];
        let tx = thx[i].re;
        let ty = if two_d { thy[i].re } else { 0.0 };
        let lth = lap_th[i].re;
        // grad_e theta . grad_e a = thx ax + eps^2 thy ay
        let mut grad_dot = ax[i] * tx;
        if two_d {
            grad_dot += ay[i] * (eps2 * ty);
        }
        na[i] = -grad_dot / c
            - (Complex64::new(1.0, 0.0) + eps2 * a) * (lth / (2.0 * c * eps2));
        // |grad_e theta|^2 = tx^2 + eps^2 ty^2
        let grad_sq = tx * tx + eps2 * ty * ty;
        // f(|1 + eps^2 a|^2)/eps^4 with sigma = 2 Re a + eps^2 |a|^2:
        // d1 sigma / eps^2 + tail
        let sigma = 2.0 * a.re + eps2 * a.norm_sqr();
        let fterm = d1 * sigma / eps2 + f_tail_over_eps4(model, sigma, eps2);
        nth[i] = Complex64::new(-grad_sq / (2.0 * c) - fterm / c, 0.0);
    }
    Rhs { a: ws.to_spectral_dealiased(na), th: ws.to_spectral_dealiased(nth) }
}

/// One integrating-factor RK4 step of the (a, theta) system.
pub fn grenier_step(
    state: &GrenierState,
    dt: f64,
    model: &NonlinearityModel,
) -> Result<GrenierState> {
    check_amplitude(&state.a, state.eps, "grenier_step input amplitude")?;
    let grid = &state.a.grid;
    let eps = state.eps;
    let c = model.c();
    let ws = SpectralWorkspace::new(grid, eps);

    // spectral state, dealiased once (idempotent afterwards)
    let mut za = state.a.data.clone();
    fft_all(grid, &mut za, false);
    let mut zth: Vec<Complex64> =
        state.theta.data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_all(grid, &mut zth, false);
    for i in 0..grid.len() {
        za[i] *= ws.keep[i];
        zth[i] *= ws.keep[i];
    }

    // integrating factors over a half step:
    //   lambda_a  = i (kx/eps^2 - kappa^2/(2 eps c))
    //   lambda_th = i  kx/eps^2
    let eps2 = eps * eps;
    let ea: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let lam = ws.kx[i] / eps2 - ws.kappa2[i] / (2.0 * eps * c);
            Complex64::from_polar(1.0, lam * dt / 2.0)
        })
        .collect();
    let eth: Vec<Complex64> = (0..grid.len())
        .map(|i| Complex64::from_polar(1.0, ws.kx[i] / eps2 * dt / 2.0))
        .collect();

    let mul = |e: &[Complex64], v: &[Complex64]| -> Vec<Complex64> {
        e.iter().zip(v).map(|(x, y)| x * y).collect()
    };
    let axpy = |x: &[Complex64], s: f64, y: &[Complex64]| -> Vec<Complex64> {
        x.iter().zip(y).map(|(u, v)| u + s * v).collect()
    };

    let k1 = nonlinear_rhs(&ws, model, &za, &zth);
    let k2 = nonlinear_rhs(
        &ws,
        model,
        &mul(&ea, &axpy(&za, dt / 2.0, &k1.a)),
        &mul(&eth, &axpy(&zth, dt / 2.0, &k1.th)),
    );
    let za_half = mul(&ea, &za);
    let zth_half = mul(&eth, &zth);
    let k3 = nonlinear_rhs(
        &ws,
        model,
        &axpy(&za_half, dt / 2.0, &k2.a),
        &axpy(&zth_half, dt / 2.0, &k2.th),
    );
    let k4 = nonlinear_rhs(
        &ws,
        model,
        &axpy(&mul(&ea, &za_half), dt, &mul(&ea, &k3.a)),
        &axpy(&mul(&eth, &zth_half), dt, &mul(&eth, &k3.th)),
    );

    let n = grid.len();
    let mut out_a = vec![Complex64::default(); n];
    let mut out_th = vec![Complex64::default(); n];
    for i in 0..n {
        let (e, f) = (ea[i], eth[i]);
        out_a[i] = e * e * za[i]
            + dt / 6.0 * (e * e * k1.a[i] + 2.0 * e * (k2.a[i] + k3.a[i]) + k4.a[i]);
        out_th[i] = f * f * zth[i]
            + dt / 6.0 * (f * f * k1.th[i] + 2.0 * f * (k2.th[i] + k3.th[i]) + k4.th[i]);
    }
    fft_all(grid, &mut out_a, true);
    fft_all(grid, &mut out_th, true);

    let a = ComplexField { grid: grid.clone(), data: out_a };
    let theta = ScalarField { grid: grid.clone(), data: out_th.iter().map(|z| z.re).collect() };
    for z in &a.data {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite { context: "grenier_step amplitude".into() });
        }
    }
    for &x in &theta.data {
        if !x.is_finite() {
            return Err(Error::NonFinite { context: "grenier_step phase".into() });
        }
    }
    let next = GrenierState { a, theta, eps };
    check_amplitude(&next.a, eps, "grenier_step output amplitude")?;
    Ok(next)
}

#[derive(Debug, Clone)]
pub struct GrenierRunSpec {
    pub t_final: f64,
    pub dt: f64,
    pub snapshot_stride: usize,
}

/// Integrates the (a, theta) system, returning (t, state) snapshots.
pub fn simulate_grenier(
    initial: GrenierState,
    model: &NonlinearityModel,
    spec: &GrenierRunSpec,
) -> Result<Vec<(f64, GrenierState)>> {
    let n = (spec.t_final / spec.dt).round();
    if spec.dt <= 0.0 || (n * spec.dt - spec.t_final).abs() > 1e-9 * spec.t_final.max(1.0) {
        return Err(Error::Config(format!(
            "t_final = {} is not an integer number of steps dt = {}",
            spec.t_final, spec.dt
        )));
    }
    let steps = n as usize;
    let stride = spec.snapshot_stride.max(1);
    let mut out = vec![(0.0, initial.clone())];
    let mut state = initial;
    for step in 1..=steps {
        state = grenier_step(&state, spec.dt, model)?;
        if step % stride == 0 || step == steps {
            out.push((spec.dt * step as f64, state.clone()));
        }
    }
    Ok(out)
}

// ─── symbol algebra ─────────────────────────────────────────────────────

/// Dense square matrix small enough to print; row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallMatrix {
    size: usize,
    data: Vec<f64>,
}

impl SmallMatrix {
    pub fn zeros(size: usize) -> Self {
        SmallMatrix { size, data: vec![0.0; size * size] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.size + j] = v;
    }

    pub fn matmul(&self, other: &SmallMatrix) -> SmallMatrix {
        assert_eq!(self.size, other.size);
        let mut out = SmallMatrix::zeros(self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                let mut acc = 0.0;
                for l in 0..self.size {
                    acc += self.get(i, l) * other.get(l, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// max_ij |M_ij - M_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.size {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Smallest diagonal entry (the smallest eigenvalue for diagonal M).
    pub fn diag_min(&self) -> f64 {
        (0..self.size).map(|i| self.get(i, i)).fold(f64::INFINITY, f64::min)
    }
}

fn sample_parts<'a>(u_sample: &'a [f64], xi: &[f64]) -> Result<([f64; 2], &'a [f64])> {
    let n = xi.len();
    if u_sample.len() != 2 + n || n == 0 {
        return Err(Error::Domain(format!(
            "state sample has {} components, expected {} for a {}-dimensional frequency",
            u_sample.len(),
            2 + n,
            n
        )));
    }
    Ok(([u_sample[0], u_sample[1]], &u_sample[2..]))
}

fn g_of_sample(model: &NonlinearityModel, a: [f64; 2], eps: f64) -> Result<f64> {
    let mod_a = (a[0] * a[0] + a[1] * a[1]).sqrt();
    if eps * eps * mod_a > 0.5 {
        return Err(Error::AmplitudeBound { what: "symbol amplitude sample", value: eps * eps * mod_a });
    }
    // g(eps^2 a) per the expansion f'(1 + 2 Re(eps^2 a) + |eps^2 a|^2)/c^2 = 1 + g
    let h = 2.0 * eps * eps * a[0] + eps.powi(4) * (a[0] * a[0] + a[1] * a[1]);
    Ok(model.g_shifted(h))
}

/// First-order symbol H(eps^2 U, xi) of the hyperbolic part, evaluated at
/// a pointwise state sample U = (Re a, Im a, v_1, .., v_n).
pub fn symbol_h(
    u_sample: &[f64],
    eps: f64,
    xi: &[f64],
    model: &NonlinearityModel,
) -> Result<SmallMatrix> {
    let (a, v) = sample_parts(u_sample, xi)?;
    let n = xi.len();
    let g = g_of_sample(model, a, eps)?;
    let eps2 = eps * eps;
    let v_dot_xi: f64 = v.iter().zip(xi).map(|(a, b)| a * b).sum();
    let alpha = -xi[0] + 2.0 * eps2 * v_dot_xi;
    let e_plus_a = [1.0 + eps2 * a[0], eps2 * a[1]];
    let mut h = SmallMatrix::zeros(2 + n);
    for i in 0..2 {
        h.set(i, i, alpha);
        for j in 0..n {
            h.set(i, 2 + j, e_plus_a[i] * xi[j]);
        }
    }
    for i in 0..n {
        h.set(2 + i, 2 + i, alpha);
        for j in 0..2 {
            h.set(2 + i, j, (1.0 + g) * xi[i] * e_plus_a[j]);
        }
    }
    Ok(h)
}

/// Block-diagonal symmetrizer S = diag(I_2, (1/(1+g)) I_n).
pub fn symmetrizer_s(
    u_sample: &[f64],
    eps: f64,
    n: usize,
    model: &NonlinearityModel,
) -> Result<SmallMatrix> {
    if u_sample.len() != 2 + n || n == 0 {
        return Err(Error::Domain(format!(
            "state sample has {} components, expected {}",
            u_sample.len(),
            2 + n
        )));
    }
    let g = g_of_sample(model, [u_sample[0], u_sample[1]], eps)?;
    if 1.0 + g <= 0.0 {
        return Err(Error::AmplitudeBound { what: "symmetrizer positivity 1 + g", value: 1.0 + g });
    }
    let mut s = SmallMatrix::zeros(2 + n);
    s.set(0, 0, 1.0);
    s.set(1, 1, 1.0);
    for i in 0..n {
        s.set(2 + i, 2 + i, 1.0 / (1.0 + g));
    }
    Ok(s)
}

// ─── field-level checks ─────────────────────────────────────────────────

/// Pointwise-valued state vector (Re a, Im a, v_1, .., v_n) on the grid.
#[derive(Debug, Clone)]
pub struct HydroVector {
    pub re_a: ScalarField,
    pub im_a: ScalarField,
    pub v: Vec<ScalarField>,
    pub eps: f64,
}

impl HydroVector {
    pub fn new(
        re_a: ScalarField,
        im_a: ScalarField,
        v: Vec<ScalarField>,
        eps: f64,
    ) -> Result<Self> {
        let grid = re_a.grid.clone();
        if im_a.grid != grid || v.iter().any(|f| f.grid != grid) {
            return Err(Error::Domain("hydro vector components on mismatched grids".into()));
        }
        if v.len() != grid.dim() {
            return Err(Error::Domain(format!(
                "expected {} velocity components, got {}",
                grid.dim(),
                v.len()
            )));
        }
        let mut worst = 0.0_f64;
        for i in 0..grid.len() {
            let m = (re_a.data[i] * re_a.data[i] + im_a.data[i] * im_a.data[i]).sqrt();
            worst = worst.max(m);
        }
        if eps * eps * worst > 0.5 {
            return Err(Error::AmplitudeBound {
                what: "hydro vector amplitude",
                value: eps * eps * worst,
            });
        }
        Ok(HydroVector { re_a, im_a, v, eps })
    }

    /// Real-amplitude vector (Im a = 0) from polar variables, with
    /// v = grad_e phi / (2c).
    pub fn from_polar(polar: &PolarState, c: f64) -> Result<Self> {
        let v = polar.velocity(c)?;
        let im = ScalarField::zeros(&polar.amp.grid);
        HydroVector::new(polar.amp.clone(), im, v, polar.eps)
    }
}

/// L2 pairing (S L(grad_e) V, V) of the dispersive skew operator
///
/// ```text
/// S L = (1/2c) [[J lap_e, 0], [0, 0]],   J = [[0, -1], [1, 0]]
/// ```
///
/// i.e. (1/2c) int [ -lap_e(Im a) Re a + lap_e(Re a) Im a ]. Returns the
/// magnitude, which is a pure rounding residue for smooth fields.
pub fn skew_quadratic_check(u: &HydroVector, c: f64) -> Result<f64> {
    let grid = &u.re_a.grid;
    let eps = u.eps;
    let lap = |f: &ScalarField| -> Result<ScalarField> {
        let mut out = crate::spectral::spectral_derivative(f, 0, 2)?;
        if grid.dim() == 2 {
            let perp = crate::spectral::spectral_derivative(f, 1, 2)?;
            for (o, p) in out.data.iter_mut().zip(&perp.data) {
                *o += eps * eps * p;
            }
        }
        Ok(out)
    };
    let lap_re = lap(&u.re_a)?;
    let lap_im = lap(&u.im_a)?;
    let mut acc = 0.0;
    for i in 0..grid.len() {
        acc += -lap_im.data[i] * u.re_a.data[i] + lap_re.data[i] * u.im_a.data[i];
    }
    Ok((acc * grid.cell_volume() / (2.0 * c)).abs())
}

/// || dx v_perp - eps grad_perp v_1 ||_L2; zero by convention in 1d,
/// rounding-level for any v = grad_e theta / (2c).
pub fn curl_constraint_deficit(v: &[ScalarField], eps: f64) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Domain("empty velocity vector".into()));
    }
    if v[0].grid.dim() == 1 || v.len() < 2 {
        return Ok(0.0);
    }
    let dx_vperp = crate::spectral::spectral_derivative(&v[1], 0, 1)?;
    let dy_v1 = crate::spectral::spectral_derivative(&v[0], 1, 1)?;
    let diff = dx_vperp.zip(&dy_v1, |a, b| a - eps * b);
    Ok(norm(&diff, NormKind::L2))
}

// ─── residual certificates ──────────────────────────────────────────────

/// L2 residuals of one hydrodynamic system at one trajectory frame.
#[derive(Debug, Clone, Copy)]
pub struct ResidualRow {
    pub t: f64,
    /// Amplitude (continuity-type) equation residual.
    pub amplitude: f64,
    /// Phase or velocity equation residual (vector L2 over components).
    pub phase: f64,
}

fn check_uniform_times(frames: &[(f64, PolarState)]) -> Result<f64> {
    if frames.len() < 5 {
        return Err(Error::Domain(format!(
            "need at least 5 uniformly spaced frames for the 4th-order stencil, got {}",
            frames.len()
        )));
    }
    let dt = frames[1].0 - frames[0].0;
    if dt <= 0.0 {
        return Err(Error::Domain("non-increasing frame times".into()));
    }
    for w in frames.windows(2) {
        if ((w[1].0 - w[0].0) - dt).abs() > 1e-9 * dt {
            return Err(Error::Domain(format!(
                "frame spacing {} deviates from {}; the time stencil needs uniform spacing",
                w[1].0 - w[0].0,
                dt
            )));
        }
    }
    Ok(dt)
}

/// 4th-order central time derivative of the stored field sequence at
/// index j: (f_(j-2) - 8 f_(j-1) + 8 f_(j+1) - f_(j+2)) / (12 dt).
fn time_derivative(fields: [&ScalarField; 4], dt: f64) -> ScalarField {
    let [m2, m1, p1, p2] = fields;
    let mut out = m2.clone();
    for i in 0..out.data.len() {
        out.data[i] = (m2.data[i] - 8.0 * m1.data[i] + 8.0 * p1.data[i] - p2.data[i])
            / (12.0 * dt);
    }
    out
}

/// Evaluates both equations of the (A, phi) hydrodynamic system
///
/// ```text
/// eps^2 c dt A - c dx A + eps^2 dx A dx phi + (1/2)(1 + eps^2 A) dxx phi
///   + eps^4 grad_perp A . grad_perp phi
///   + (eps^2/2)(1 + eps^2 A) lap_perp phi = 0
/// eps^2 c dt phi - c dx phi - eps^2 (dxx A + eps^2 lap_perp A)/(2(1 + eps^2 A))
///   + (eps^2/2)(dx phi)^2 + (eps^4/2)|grad_perp phi|^2
///   + (1/eps^2) f((1 + eps^2 A)^2) = 0
/// ```
///
/// on a uniformly spaced polar trajectory, one row per interior frame.
/// Space derivatives are spectral; time derivatives use the 4th-order
/// stencil, so the reported residual tracks the solver's own error.
pub fn residual_phamd(
    frames: &[(f64, PolarState)],
    model: &NonlinearityModel,
) -> Result<Vec<ResidualRow>> {
    let dt = check_uniform_times(frames)?;
    let eps = frames[0].1.eps;
    let grid = frames[0].1.amp.grid.clone();
    let c = model.c();
    let eps2 = eps * eps;
    let two_d = grid.dim() == 2;
    let mut rows = Vec::new();
    for j in 2..frames.len() - 2 {
        let p = &frames[j].1;
        let floor = p.amp.data.iter().fold(f64::INFINITY, |m, &a| m.min(1.0 + eps2 * a));
        if floor < VORTEX_FLOOR {
            return Err(Error::VortexDetected {
                context: format!("residual evaluation at t = {:.6}", frames[j].0),
                min_abs: floor,
                floor: VORTEX_FLOOR,
            });
        }
        let a_t = time_derivative(
            [&frames[j - 2].1.amp, &frames[j - 1].1.amp, &frames[j + 1].1.amp, &frames[j + 2].1.amp],
            dt,
        );
        let phi_t = time_derivative(
            [&frames[j - 2].1.phi, &frames[j - 1].1.phi, &frames[j + 1].1.phi, &frames[j + 2].1.phi],
            dt,
        );
        let a_x = crate::spectral::spectral_derivative(&p.amp, 0, 1)?;
        let a_xx = crate::spectral::spectral_derivative(&p.amp, 0, 2)?;
        let phi_x = crate::spectral::spectral_derivative(&p.phi, 0, 1)?;
        let phi_xx = crate::spectral::spectral_derivative(&p.phi, 0, 2)?;
        let (a_y, a_yy, phi_y, phi_yy) = if two_d {
            (
                Some(crate::spectral::spectral_derivative(&p.amp, 1, 1)?),
                Some(crate::spectral::spectral_derivative(&p.amp, 1, 2)?),
                Some(crate::spectral::spectral_derivative(&p.phi, 1, 1)?),
                Some(crate::spectral::spectral_derivative(&p.phi, 1, 2)?),
            )
        } else {
            (None, None, None, None)
        };
        let mut r1 = ScalarField::zeros(&grid);
        let mut r2 = ScalarField::zeros(&grid);
        for i in 0..grid.len() {
            let a = p.amp.data[i];
            let one = 1.0 + eps2 * a;
            let mut e1 = eps2 * c * a_t.data[i] - c * a_x.data[i]
                + eps2 * a_x.data[i] * phi_x.data[i]
                + 0.5 * one * phi_xx.data[i];
            if two_d {
                e1 += eps2 * eps2 * a_y.as_ref().unwrap().data[i]
                    * phi_y.as_ref().unwrap().data[i]
                    + 0.5 * eps2 * one * phi_yy.as_ref().unwrap().data[i];
            }
            r1.data[i] = e1;

            let mut lap_a = a_xx.data[i];
            let mut grad_phi_sq = phi_x.data[i] * phi_x.data[i];
            if two_d {
                lap_a += eps2 * a_yy.as_ref().unwrap().data[i];
                grad_phi_sq += eps2 * phi_y.as_ref().unwrap().data[i].powi(2);
            }
            // f((1 + eps^2 A)^2)/eps^2 = d1 s + sum_{j>=2} d_j s^j eps^(2j-2),
            // s = 2A + eps^2 A^2
            let s = 2.0 * a + eps2 * a * a;
            let fterm =
                model.shifted_coeffs()[0] * s + eps2 * f_tail_over_eps4(model, s, eps2);
            r2.data[i] = eps2 * c * phi_t.data[i] - c * phi_x.data[i]
                - eps2 * lap_a / (2.0 * one)
                + 0.5 * eps2 * grad_phi_sq
                + fterm;
        }
        rows.push(ResidualRow {
            t: frames[j].0,
            amplitude: norm(&r1, NormKind::L2),
            phase: norm(&r2, NormKind::L2),
        });
    }
    Ok(rows)
}

/// Evaluates the real (A, u) hydrodynamic system
///
/// ```text
/// dt A - (1/eps^2) dx A + (1/eps^2) div_e u + 2 u . grad_e A + A div_e u = 0
/// dt u - (1/eps^2) dx u + (1/eps^2) grad_e A + 2 u . grad_e u
///   + (1/eps^2) g(eps^2 A) grad_e A = (1/4c^2) grad_e (lap_e A / (1 + eps^2 A))
/// ```
///
/// with u = grad_e phi / (2c) derived spectrally from the trajectory.
pub fn residual_euler1(
    frames: &[(f64, PolarState)],
    model: &NonlinearityModel,
) -> Result<Vec<ResidualRow>> {
    let dt = check_uniform_times(frames)?;
    let eps = frames[0].1.eps;
    let grid = frames[0].1.amp.grid.clone();
    let c = model.c();
    let eps2 = eps * eps;
    let dim = grid.dim();

    // velocity components for every frame, up front (each is a gradient)
    let mut vels: Vec<Vec<ScalarField>> = Vec::with_capacity(frames.len());
    for (_, p) in frames {
        vels.push(p.velocity(c)?);
    }

    // grad_e component i of a scalar field
    let grad_e = |f: &ScalarField, axis: usize| -> Result<ScalarField> {
        let mut d = crate::spectral::spectral_derivative(f, axis, 1)?;
        if axis > 0 {
            for x in d.data.iter_mut() {
                *x *= eps;
            }
        }
        Ok(d)
    };

    let mut rows = Vec::new();
    for j in 2..frames.len() - 2 {
        let p = &frames[j].1;
        let u = &vels[j];
        let a_t = time_derivative(
            [&frames[j - 2].1.amp, &frames[j - 1].1.amp, &frames[j + 1].1.amp, &frames[j + 2].1.amp],
            dt,
        );
        let a_x = crate::spectral::spectral_derivative(&p.amp, 0, 1)?;
        let grad_a: Vec<ScalarField> =
            (0..dim).map(|ax| grad_e(&p.amp, ax)).collect::<Result<_>>()?;
        let div_u = {
            let mut d = grad_e(&u[0], 0)?;
            if dim == 2 {
                let dy = grad_e(&u[1], 1)?;
                for (a, b) in d.data.iter_mut().zip(&dy.data) {
                    *a += b;
                }
            }
            d
        };
        // lap_e A / (1 + eps^2 A), then its grad_e components
        let lap_a = {
            let mut l = crate::spectral::spectral_derivative(&p.amp, 0, 2)?;
            if dim == 2 {
                let lyy = crate::spectral::spectral_derivative(&p.amp, 1, 2)?;
                for (a, b) in l.data.iter_mut().zip(&lyy.data) {
                    *a += eps2 * b;
                }
            }
            l
        };
        let quantum = ScalarField {
            grid: grid.clone(),
            data: (0..grid.len())
                .map(|i| lap_a.data[i] / (1.0 + eps2 * p.amp.data[i]))
                .collect(),
        };
        let grad_q: Vec<ScalarField> =
            (0..dim).map(|ax| grad_e(&quantum, ax)).collect::<Result<_>>()?;

        let mut r_amp = ScalarField::zeros(&grid);
        for i in 0..grid.len() {
            let mut u_dot_grad_a = u[0].data[i] * grad_a[0].data[i];
            if dim == 2 {
                u_dot_grad_a += u[1].data[i] * grad_a[1].data[i];
            }
            r_amp.data[i] = a_t.data[i] - a_x.data[i] / eps2 + div_u.data[i] / eps2
                + 2.0 * u_dot_grad_a
                + p.amp.data[i] * div_u.data[i];
        }

        let mut phase_sq = 0.0;
        for comp in 0..dim {
            let u_t = time_derivative(
                [
                    &vels[j - 2][comp],
                    &vels[j - 1][comp],
                    &vels[j + 1][comp],
                    &vels[j + 2][comp],
                ],
                dt,
            );
            let u_x = crate::spectral::spectral_derivative(&u[comp], 0, 1)?;
            let grad_u: Vec<ScalarField> =
                (0..dim).map(|ax| grad_e(&u[comp], ax)).collect::<Result<_>>()?;
            let mut r = ScalarField::zeros(&grid);
            for i in 0..grid.len() {
                let mut u_dot_grad_u = u[0].data[i] * grad_u[0].data[i];
                if dim == 2 {
                    u_dot_grad_u += u[1].data[i] * grad_u[1].data[i];
                }
                let s = 2.0 * p.amp.data[i] + eps2 * p.amp.data[i] * p.amp.data[i];
                r.data[i] = u_t.data[i] - u_x.data[i] / eps2
                    + grad_a[comp].data[i] / eps2
                    + 2.0 * u_dot_grad_u
                    + g_over_eps2(model, s, eps2) * grad_a[comp].data[i]
                    - grad_q[comp].data[i] / (4.0 * c * c);
            }
            phase_sq += norm(&r, NormKind::L2).powi(2);
        }
        rows.push(ResidualRow {
            t: frames[j].0,
            amplitude: norm(&r_amp, NormKind::L2),
            phase: phase_sq.sqrt(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::madelung::polar_decompose;
    use crate::nls::{simulate_nls, NlsRunSpec, NlsState};
    use crate::spectral::l2_distance_complex;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn gp() -> NonlinearityModel {
        NonlinearityModel::gross_pitaevskii()
    }

    // ─── factored coefficients ──────────────────────────────────────

    #[test]
    fn factored_f_and_g_match_direct_evaluation_away_from_cancellation() {
        let model = NonlinearityModel::cubic_quintic();
        let (s, eps2) = (0.37, 0.09);
        let h = s * eps2;
        let direct_tail = (model.f_shifted(h) - model.shifted_coeffs()[0] * h) / (eps2 * eps2);
        assert_abs_diff_eq!(f_tail_over_eps4(&model, s, eps2), direct_tail, epsilon = 1e-10);
        let direct_g = model.g_shifted(h) / eps2;
        assert_abs_diff_eq!(g_over_eps2(&model, s, eps2), direct_g, epsilon = 1e-10);
    }

    // ─── symbol algebra ─────────────────────────────────────────────

    #[test]
    fn symbol_at_rest_state_matches_hand_evaluation() {
        let h = symbol_h(&[0.0, 0.0, 0.0], 0.1, &[1.0], &gp()).unwrap();
        let expected = [[-1.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, -1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(h.get(i, j), expected[i][j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn symmetrizer_at_rest_is_identity() {
        let s = symmetrizer_s(&[0.0, 0.0, 0.0, 0.0], 0.2, 2, &gp()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(s.get(i, j), want, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn symmetrized_symbol_is_symmetric_at_random_samples() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for model in [gp(), NonlinearityModel::cubic_quintic()] {
            for _ in 0..100 {
                let n = if rng.gen_bool(0.5) { 1 } else { 2 };
                let eps = 0.05 + 0.25 * rng.gen::<f64>();
                let mut u = vec![0.0; 2 + n];
                for x in u.iter_mut() {
                    *x = rng.gen_range(-2.0..2.0);
                }
                let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let h = symbol_h(&u, eps, &xi, &model).unwrap();
                let s = symmetrizer_s(&u, eps, n, &model).unwrap();
                let sh = s.matmul(&h);
                assert!(
                    sh.asymmetry() < 1e-12,
                    "asymmetry {} at u={u:?}, xi={xi:?}",
                    sh.asymmetry()
                );
                assert!(s.diag_min() > 0.0);
            }
        }
    }

    #[test]
    fn amplitude_bound_trips_the_symbol() {
        // eps^2 |a| = 0.9 > 1/2
        let err = symbol_h(&[90.0, 0.0, 0.0], 0.1, &[1.0], &gp());
        assert!(matches!(err, Err(Error::AmplitudeBound { .. })));
    }

    // ─── skew pairing and curl ──────────────────────────────────────

    fn smooth_vector(seed: u64, eps: f64) -> HydroVector {
        let g = Arc::new(PeriodicGrid::new_2d(32, 16, 2.0 * PI, 2.0 * PI).unwrap());
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut trig = |_: u64| {
            let (a1, a2, p1, p2) =
                (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
            ScalarField::from_fn(&g, move |c| {
                a1 * (c[0] + 2.0 * PI * p1).sin() * (2.0 * c[1]).cos()
                    + a2 * (2.0 * c[0] + p2).cos() * c[1].sin()
            })
        };
        let re_a = trig(0);
        let im_a = trig(1);
        let v = vec![trig(2), trig(3)];
        HydroVector::new(re_a, im_a, v, eps).unwrap()
    }

    #[test]
    fn skew_pairing_vanishes_for_smooth_fields() {
        for seed in 0..5 {
            let u = smooth_vector(seed, 0.2);
            let pairing = skew_quadratic_check(&u, 1.0).unwrap();
            // compare against H^2 size as the natural scale
            let h2 = crate::spectral::norm(&u.re_a, NormKind::Hs(2.0)).powi(2)
                + crate::spectral::norm(&u.im_a, NormKind::Hs(2.0)).powi(2);
            assert!(pairing < 1e-10 * h2, "pairing {pairing} vs scale {h2}");
        }
    }

    #[test]
    fn skew_pairing_is_quadratic_in_the_field() {
        let u = smooth_vector(11, 0.2);
        let doubled = HydroVector::new(
            u.re_a.map(|x| 2.0 * x),
            u.im_a.map(|x| 2.0 * x),
            u.v.iter().map(|f| f.map(|x| 2.0 * x)).collect(),
            u.eps,
        )
        .unwrap();
        let p1 = skew_quadratic_check(&u, 1.0).unwrap();
        let p4 = skew_quadratic_check(&doubled, 1.0).unwrap();
        // both are rounding residues; quadratic scaling still shows
        assert!(p4 <= 16.0 * p1.max(1e-18));
    }

    #[test]
    fn skew_pairing_of_constant_is_zero() {
        let g = Arc::new(PeriodicGrid::new_1d(32, 2.0 * PI).unwrap());
        let u = HydroVector::new(
            ScalarField::constant(&g, 0.3),
            ScalarField::constant(&g, -0.1),
            vec![ScalarField::zeros(&g)],
            0.2,
        )
        .unwrap();
        assert_eq!(skew_quadratic_check(&u, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn gradient_velocity_is_curl_compatible() {
        let g = Arc::new(PeriodicGrid::new_2d(32, 16, 2.0 * PI, 2.0 * PI).unwrap());
        let eps = 0.3;
        let theta = ScalarField::from_fn(&g, |c| (c[0] + 0.3).sin() * (2.0 * c[1]).cos());
        let polar = PolarState { amp: ScalarField::zeros(&g), phi: theta, eps };
        let v = polar.velocity(1.0).unwrap();
        let deficit = curl_constraint_deficit(&v, eps).unwrap();
        assert!(deficit < 1e-12, "gradient field has curl deficit {deficit}");
    }

    #[test]
    fn curl_deficit_of_shear_flow_is_the_transverse_gradient() {
        let g = Arc::new(PeriodicGrid::new_2d(16, 32, 2.0 * PI, 2.0 * PI).unwrap());
        let eps = 0.2;
        let v1 = ScalarField::from_fn(&g, |c| c[1].sin());
        let vperp = ScalarField::zeros(&g);
        let deficit = curl_constraint_deficit(&[v1, vperp], eps).unwrap();
        // dx vperp - eps dy v1 = -eps cos(y); ||cos||_L2 = sqrt(2 pi^2)
        let exact = eps * (2.0 * PI * PI).sqrt();
        assert_abs_diff_eq!(deficit, exact, epsilon = 1e-12);
    }

    // ─── solver ─────────────────────────────────────────────────────

    #[test]
    fn rest_state_is_a_fixed_point() {
        let g = Arc::new(PeriodicGrid::new_1d(64, 2.0 * PI).unwrap());
        let state = GrenierState {
            a: ComplexField::zeros(&g),
            theta: ScalarField::zeros(&g),
            eps: 0.2,
        };
        let next = grenier_step(&state, 1e-3, &gp()).unwrap();
        let amax = next.a.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tmax = next.theta.data.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
        assert!(amax < 1e-15 && tmax < 1e-15);
    }

    fn well_prepared_data(
        g: &Arc<PeriodicGrid>,
        eps: f64,
        c: f64,
    ) -> (GrenierState, NlsState) {
        // A0 a gentle zero-mean profile, phi0 its x-antiderivative * 2c
        // (well-prepared: dx phi0 = 2 c A0)
        let a0 = ScalarField::from_fn(g, |p| {
            0.3 * (2.0 * PI * p[0] / g.lengths()[0]).sin()
                + 0.1 * (4.0 * PI * p[0] / g.lengths()[0]).cos()
        });
        let prim = crate::spectral::x_antiderivative(&a0).unwrap();
        let phi0 = prim.map(|x| 2.0 * c * x);
        let gstate = GrenierState {
            a: a0.to_complex(),
            theta: phi0.clone(),
            eps,
        };
        let mut psi = ComplexField::zeros(g);
        for i in 0..g.len() {
            let rho = 1.0 + eps * eps * a0.data[i];
            psi.data[i] = Complex64::from_polar(rho, eps * phi0.data[i]);
        }
        let nls = NlsState::new(psi, eps, gp()).unwrap();
        (gstate, nls)
    }

    #[test]
    fn grenier_and_splitting_solvers_agree() {
        let g = Arc::new(PeriodicGrid::new_1d(256, 32.0 * PI).unwrap());
        let eps = 0.2;
        let (gstate, nls0) = well_prepared_data(&g, eps, 1.0);
        let dt = default_dt(&g, eps);
        // round down to land exactly on t_final
        let t_final = 0.02;
        let steps = (t_final / dt).ceil() as usize;
        let dt = t_final / steps as f64;
        let model = gp();
        let mut gs = gstate;
        for _ in 0..steps {
            gs = grenier_step(&gs, dt, &model).unwrap();
        }
        let traj = simulate_nls(
            nls0,
            &NlsRunSpec { t_final, dt, snapshot_stride: usize::MAX },
        )
        .unwrap();
        let psi_nls = &traj.snapshots.last().unwrap().psi;
        let psi_gre = crate::madelung::grenier_reconstruct(&gs).unwrap();
        let err = l2_distance_complex(&psi_gre, psi_nls);
        assert!(err < 1e-5, "cross-solver discrepancy {err}");
    }

    #[test]
    fn grenier_self_convergence_is_at_least_second_order() {
        let g = Arc::new(PeriodicGrid::new_1d(128, 32.0 * PI).unwrap());
        let eps = 0.25;
        let (g0, _) = well_prepared_data(&g, eps, 1.0);
        let model = gp();
        // coarse steps sit near the coupling stability bound
        // 2 sqrt(2) eps^2 / kappa_max ~ 0.067 so the truncation error is
        // far above rounding and the order is measurable
        let t_final = 0.4;
        let run = |dt: f64| -> GrenierState {
            let steps = (t_final / dt).round() as usize;
            let mut s = g0.clone();
            for _ in 0..steps {
                s = grenier_step(&s, dt, &model).unwrap();
            }
            s
        };
        let reference = run(t_final / 512.0);
        let errs: Vec<f64> = [t_final / 8.0, t_final / 16.0, t_final / 32.0]
            .iter()
            .map(|&dt| {
                let s = run(dt);
                l2_distance_complex(&s.a, &reference.a)
            })
            .collect();
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(
            order1 > 1.9 && order2 > 1.9,
            "orders {order1:.2}, {order2:.2} from errors {errs:?}"
        );
    }

    // ─── residuals ──────────────────────────────────────────────────

    fn constant_frames(n: usize, dt: f64) -> Vec<(f64, PolarState)> {
        let g = Arc::new(PeriodicGrid::new_1d(64, 2.0 * PI).unwrap());
        (0..n)
            .map(|j| {
                (
                    dt * j as f64,
                    PolarState {
                        amp: ScalarField::zeros(&g),
                        phi: ScalarField::zeros(&g),
                        eps: 0.2,
                    },
                )
            })
            .collect()
    }

    #[test]
    fn residuals_vanish_on_the_rest_state() {
        let frames = constant_frames(6, 0.01);
        for row in residual_phamd(&frames, &gp()).unwrap() {
            assert!(row.amplitude < 1e-14 && row.phase < 1e-14);
        }
        for row in residual_euler1(&frames, &gp()).unwrap() {
            assert!(row.amplitude < 1e-14 && row.phase < 1e-14);
        }
    }

    #[test]
    fn corrupted_phase_shifts_the_residual_by_the_linear_amount() {
        // against the rest state, phi -> delta sin(x) leaves exactly the
        // linear terms: eq1 gains (1/2) dxx phi = -(delta/2) sin x and
        // eq2 gains -c dx phi + (eps^2/2)(dx phi)^2
        let mut frames = constant_frames(6, 0.01);
        let g = frames[0].1.amp.grid.clone();
        let delta = 1e-3;
        let eps = frames[0].1.eps;
        for (_, p) in frames.iter_mut() {
            p.phi = ScalarField::from_fn(&g, |c| delta * c[0].sin());
        }
        let rows = residual_phamd(&frames, &gp()).unwrap();
        let sin_l2 = PI.sqrt(); // ||sin||_L2 on [0, 2pi)
        for row in rows {
            assert_abs_diff_eq!(row.amplitude, 0.5 * delta * sin_l2, epsilon = 1e-12);
            // -c delta cos x + (eps^2/2) delta^2 cos^2 x: the quadratic
            // part is 5e-10, keep it in the tolerance budget
            assert_abs_diff_eq!(
                row.phase,
                delta * sin_l2,
                epsilon = 1e-6 * delta + eps * eps * delta * delta
            );
        }
    }

    #[test]
    fn residual_requires_uniform_spacing() {
        let mut frames = constant_frames(6, 0.01);
        frames[3].0 += 1e-3;
        assert!(matches!(residual_phamd(&frames, &gp()), Err(Error::Domain(_))));
    }

    #[test]
    fn residual_detects_vortex_crossing() {
        let mut frames = constant_frames(6, 0.01);
        let g = frames[0].1.amp.grid.clone();
        // 1 + eps^2 A dips to 0.1 < floor
        let eps = frames[0].1.eps;
        let deep = (0.1 - 1.0) / (eps * eps);
        frames[3].1.amp = ScalarField::constant(&g, deep);
        assert!(matches!(
            residual_phamd(&frames, &gp()),
            Err(Error::VortexDetected { .. })
        ));
    }

    #[test]
    fn phamd_residual_is_small_on_a_solver_trajectory() {
        // short splitting run, snapshots every 10 steps; the residual is
        // bounded by the splitting error + 4th-order stencil error
        let g = Arc::new(PeriodicGrid::new_1d(256, 32.0 * PI).unwrap());
        let eps = 0.2;
        let (_, nls0) = well_prepared_data(&g, eps, 1.0);
        let dt = 2e-4;
        let traj = simulate_nls(
            nls0,
            &NlsRunSpec { t_final: 0.02, dt, snapshot_stride: 10 },
        )
        .unwrap();
        let frames: Vec<(f64, PolarState)> = traj
            .snapshots
            .iter()
            .map(|s| (s.t, polar_decompose(&s.psi, eps).unwrap()))
            .collect();
        let rows = residual_phamd(&frames, &gp()).unwrap();
        for row in &rows {
            assert!(
                row.amplitude < 1e-4 && row.phase < 1e-4,
                "residual ({}, {}) at t = {}",
                row.amplitude,
                row.phase,
                row.t
            );
        }
    }
}
