//! Pseudospectral solvers and diagnostics for the long-wave regimes of the
//! defocusing nonlinear Schrodinger equation on a nonzero background.
//!
//! The library evolves the rescaled NLS equation
//!
//! ```text
//! i c eps^3 dt psi - i c eps dx psi + (eps^2/2) dxx psi + (eps^4/2) lap_perp psi
//!     = psi f(|psi|^2)
//! ```
//!
//! on periodic boxes in one and two space dimensions, together with the
//! hydrodynamic reformulations obtained from the polar ansatz
//! `psi = (1 + eps^2 A) exp(i eps phi)` and from the complex-amplitude
//! splitting `psi = (1 + eps^2 a) exp(i eps theta)`. As `eps -> 0` the
//! amplitude `A` approaches a solution of KdV (1D) or KP-I (2D); the crate
//! provides the limit solvers, the conserved functionals `E_eps`, `P_eps`,
//! `I0`, `I1`, their expansion identities, a fast-transport probe, and a
//! sweep harness measuring convergence across a list of `eps` values.
//!
//! The `nlskp` binary exposes all of this on the command line; see
//! `docs/config.md` in the repository for the config-file keys.

pub mod config;
pub mod dump;
pub mod error;
pub mod field;
pub mod grenier;
pub mod grid;
pub mod invariants;
pub mod limit;
pub mod madelung;
pub mod nls;
pub mod nonlinearity;
pub mod profiles;
pub mod report;
pub mod spectral;
pub mod sweep;
pub mod transport;

pub use error::{Error, Result};
pub use field::{ComplexField, ScalarField};
pub use grid::PeriodicGrid;
pub use nonlinearity::NonlinearityModel;
