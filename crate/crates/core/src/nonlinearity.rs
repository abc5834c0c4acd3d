//! The defocusing nonlinearity `f`, its potential `F`, Taylor remainders and
//! the derived limit-equation coefficients `c` and `k`.
//!
//! Models are polynomials in the density `R = |psi|^2`. Internally the
//! polynomial is stored re-expanded around the background `R = 1`,
//!
//! ```text
//! f(1 + h) = d_1 h + d_2 h^2 + ... ,        d_1 = f'(1) > 0,
//! ```
//!
//! so that every quantity that vanishes to high order at the background
//! (the potential `F`, the remainders `F3`, `F4`, `tildeF`, `Q`, `g`) is an
//! exact tail sum with no subtraction of near-equal O(1) terms. The solvers
//! divide such quantities by powers of eps as small as eps^4, which is what
//! makes the cancellation-free form necessary.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    GrossPitaevskii,
    CubicQuintic,
    UserPolynomial,
}

/// Taylor-remainder selector for [`NonlinearityModel::remainder`].
///
/// With `r` the density perturbation (`R = 1 + r`) and `h = 2r + r^2`:
/// * `F3(r) = F(1+r) - c^2 r^2`, an O(r^3) tail,
/// * `F4(r) = F(1+r) - c^2 r^2 - (f''(1)/3) r^3`, an O(r^4) tail,
/// * `TildeF(r) = f((1+r)^2)/c^2 - 2r`, an O(r^2) tail,
/// * `Q(r) = [f((1+r)^2) - 2 f'(1) r - (f'(1) + 2 f''(1)) r^2] / c^2`, O(r^3),
/// * `G(r) = f'((1+r)^2)/c^2 - 1`, an O(r) tail defined for |r| <= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemainderKind {
    F3,
    F4,
    TildeF,
    Q,
    G,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityModel {
    kind: ModelKind,
    /// Coefficients of f(R) = sum_j coeffs[j] R^j, as supplied.
    coeffs: Vec<f64>,
    /// Shifted coefficients: f(1+h) = sum_{j>=1} shifted[j-1] h^j.
    shifted: Vec<f64>,
    c: f64,
    k: f64,
    /// Largest radius delta <= 1/2 with
    /// (c^2/2) r^2 <= F(1+r) <= 2 c^2 r^2 for all |r| <= delta
    /// (sampled); the upper constant is fixed at 2 c^2.
    delta: f64,
}

impl NonlinearityModel {
    /// Gross-Pitaevskii model f(R) = R - 1, hence (c, k) = (1, 6).
    pub fn gross_pitaevskii() -> Self {
        Self::build(ModelKind::GrossPitaevskii, vec![-1.0, 1.0])
            .expect("built-in GP model is valid")
    }

    /// Built-in cubic-quintic style model f(R) = R^2 - R, so that
    /// f(|psi|^2) psi = |psi|^4 psi - |psi|^2 psi. Gives (c, k) = (1, 10).
    pub fn cubic_quintic() -> Self {
        Self::build(ModelKind::CubicQuintic, vec![0.0, -1.0, 1.0])
            .expect("built-in cubic-quintic model is valid")
    }

    /// User polynomial f(R) = c0 + c1 R + c2 R^2 + ...
    ///
    /// Rejects models with f(1) != 0 (no proper background) or f'(1) <= 0
    /// (focusing at the background).
    pub fn user_polynomial(coeffs: &[f64]) -> Result<Self> {
        Self::build(ModelKind::UserPolynomial, coeffs.to_vec())
    }

    /// Parses the config syntax: `gp`, `cubic_quintic`, or `poly:<c0,c1,...>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let s = spec.trim();
        match s {
            "gp" => Ok(Self::gross_pitaevskii()),
            "cubic_quintic" => Ok(Self::cubic_quintic()),
            _ => {
                if let Some(list) = s.strip_prefix("poly:") {
                    let coeffs: Vec<f64> = list
                        .split(',')
                        .map(|tok| {
                            tok.trim().parse::<f64>().map_err(|_| {
                                Error::Config(format!(
                                    "bad polynomial coefficient {tok:?} in nonlinearity spec"
                                ))
                            })
                        })
                        .collect::<Result<_>>()?;
                    Self::user_polynomial(&coeffs)
                } else {
                    Err(Error::Config(format!(
                        "unknown nonlinearity {s:?}; expected gp, cubic_quintic or poly:<c0,c1,...>"
                    )))
                }
            }
        }
    }

    fn build(kind: ModelKind, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Config("empty nonlinearity polynomial".into()));
        }
        // Exact binomial re-expansion around R = 1:
        // d_m = sum_{j >= m} coeffs[j] * C(j, m).
        let deg = coeffs.len() - 1;
        let mut d = vec![0.0_f64; deg + 1];
        for (j, &a) in coeffs.iter().enumerate() {
            let mut binom = 1.0_f64; // C(j, 0)
            for (m, slot) in d.iter_mut().enumerate().take(j + 1) {
                *slot += a * binom;
                // C(j, m+1) = C(j, m) * (j - m) / (m + 1)
                binom *= (j - m) as f64 / (m + 1) as f64;
            }
        }
        let scale = coeffs.iter().map(|a| a.abs()).sum::<f64>().max(1.0);
        if d[0].abs() > 1e-12 * scale {
            return Err(Error::Config(format!(
                "nonlinearity has f(1) = {:.3e}, background R = 1 is not a zero",
                d[0]
            )));
        }
        let fp1 = d[1];
        if !(fp1 > 0.0) {
            return Err(Error::Config(format!(
                "nonlinearity has f'(1) = {fp1:.3e} <= 0 (focusing at the background)"
            )));
        }
        let shifted: Vec<f64> = d[1..].to_vec();
        let c = fp1.sqrt();
        let fpp1 = if shifted.len() > 1 { 2.0 * shifted[1] } else { 0.0 };
        let k = 6.0 + 2.0 * fpp1 / fp1;
        let mut model = NonlinearityModel { kind, coeffs, shifted, c, k, delta: 0.0 };
        model.delta = model.compute_delta();
        Ok(model)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Original polynomial coefficients (index = power of R).
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Shifted coefficients d_1, d_2, ... of f(1+h) = sum d_j h^j.
    pub fn shifted_coeffs(&self) -> &[f64] {
        &self.shifted
    }

    /// Limit sound speed c = sqrt(f'(1)).
    pub fn c(&self) -> f64 {
        self.c
    }

    /// KdV / KP-I nonlinearity coefficient k = 6 + 2 f''(1) / c^2.
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn derived_coefficients(&self) -> (f64, f64) {
        (self.c, self.k)
    }

    pub fn f_prime_at_one(&self) -> f64 {
        self.shifted[0]
    }

    pub fn f_second_at_one(&self) -> f64 {
        if self.shifted.len() > 1 { 2.0 * self.shifted[1] } else { 0.0 }
    }

    /// Radius of validity of the two-sided quadratic bounds on F, see the
    /// `delta` field. Computed once at construction by bisection over a
    /// 10^4-point sample per candidate radius.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// f(R), evaluated as the shifted polynomial in h = R - 1.
    pub fn eval_f(&self, big_r: f64) -> f64 {
        self.f_shifted(big_r - 1.0)
    }

    /// f(1 + h). Exact shifted-polynomial evaluation; the preferred entry
    /// point whenever h is available without forming R - 1 by subtraction.
    pub fn f_shifted(&self, h: f64) -> f64 {
        // Horner in h on d_1 + d_2 h + ... , times h.
        let mut acc = 0.0;
        for &dj in self.shifted.iter().rev() {
            acc = acc * h + dj;
        }
        acc * h
    }

    /// f'(1 + h) = sum_j j d_j h^(j-1).
    pub fn f_prime_shifted(&self, h: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &dj) in self.shifted.iter().enumerate().rev() {
            let jf = (j + 1) as f64;
            acc = acc * h + jf * dj;
        }
        acc
    }

    /// F(R) = 2 int_1^R f, via the exact antiderivative of the shifted form:
    /// F(1 + r) = sum_{j>=1} 2 d_j r^(j+1) / (j+1).
    pub fn eval_potential_f(&self, big_r: f64) -> f64 {
        self.potential_shifted(big_r - 1.0)
    }

    /// F(1 + r); see [`eval_potential_f`](Self::eval_potential_f).
    pub fn potential_shifted(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &dj) in self.shifted.iter().enumerate().rev() {
            let jp1 = (j + 2) as f64; // power j+1 for d_{j+1}... indices: shifted[j] = d_{j+1}
            acc = acc * r + 2.0 * dj / jp1;
        }
        acc * r * r
    }

    /// g(h) = f'(1 + h)/c^2 - 1 evaluated directly on the density increment
    /// h (for complex amplitude a one passes h = 2 Re a + |a|^2, which keeps
    /// the evaluation cancellation-free). Exact tail sum, O(h).
    pub fn g_shifted(&self, h: f64) -> f64 {
        let d1 = self.shifted[0];
        let mut acc = 0.0;
        for (idx, &dj) in self.shifted.iter().enumerate().skip(1).rev() {
            let j = (idx + 1) as f64;
            acc = acc * h + j * dj;
        }
        acc * h / d1
    }

    /// Named Taylor remainders; see [`RemainderKind`].
    pub fn remainder(&self, kind: RemainderKind, r: f64) -> Result<f64> {
        if 1.0 + r < 0.0 {
            return Err(Error::Domain(format!(
                "remainder argument r = {r} has 1 + r < 0"
            )));
        }
        if kind == RemainderKind::G && r.abs() > 1.0 {
            return Err(Error::Domain(format!(
                "remainder g is only defined for |r| <= 1, got r = {r}"
            )));
        }
        let d1 = self.shifted[0];
        let h = r * (2.0 + r); // (1+r)^2 - 1, exact product form
        Ok(match kind {
            RemainderKind::F3 => self.potential_tail(r, 2),
            RemainderKind::F4 => self.potential_tail(r, 3),
            RemainderKind::TildeF => {
                // tildeF(r) = r^2 + (1/d1) sum_{j>=2} d_j h^j
                r * r + self.f_tail(h, 2) / d1
            }
            RemainderKind::Q => {
                // Q(r) = [d_2 (4 r^3 + r^4) + sum_{j>=3} d_j h^j] / d1,
                // the j = 2 term written with 4 d_2 r^2 already removed.
                let d2 = self.shifted.get(1).copied().unwrap_or(0.0);
                (d2 * r * r * r * (4.0 + r) + self.f_tail(h, 3)) / d1
            }
            RemainderKind::G => self.g_shifted(h),
        })
    }

    /// sum_{j >= jmin} d_j h^j.
    fn f_tail(&self, h: f64, jmin: usize) -> f64 {
        let mut acc = 0.0;
        for (idx, &dj) in self.shifted.iter().enumerate().rev() {
            let j = idx + 1;
            if j < jmin {
                break;
            }
            acc = acc * h + dj;
        }
        acc * h.powi(jmin as i32)
    }

    /// sum_{j >= jmin} 2 d_j r^(j+1) / (j+1): the tail of F(1+r).
    fn potential_tail(&self, r: f64, jmin: usize) -> f64 {
        let mut acc = 0.0;
        for (idx, &dj) in self.shifted.iter().enumerate().rev() {
            let j = idx + 1;
            if j < jmin {
                break;
            }
            acc = acc * r + 2.0 * dj / (j + 1) as f64;
        }
        acc * r.powi(jmin as i32 + 1)
    }

    fn compute_delta(&self) -> f64 {
        let holds = |delta: f64| -> bool {
            let n = 10_000;
            let csq = self.c * self.c;
            for i in 0..=n {
                let r = -delta + 2.0 * delta * i as f64 / n as f64;
                let big_f = self.potential_shifted(r);
                let quad = csq * r * r;
                if big_f < 0.5 * quad - 1e-15 || big_f > 2.0 * quad + 1e-15 {
                    return false;
                }
            }
            true
        };
        if holds(0.5) {
            return 0.5;
        }
        let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}
