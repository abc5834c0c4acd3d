use std::path::PathBuf;

/// Errors shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The wavefunction modulus dipped below the vortex guard; the polar
    /// ansatz (and everything downstream of it) is no longer trustworthy.
    #[error("vortex guard tripped ({context}): min |psi| = {min_abs:.6e} <= floor {floor}")]
    VortexDetected { context: String, min_abs: f64, floor: f64 },

    /// `1 + eps^2 A < 1/2` (polar) or `eps^2 |a| > 1/2` (complex amplitude)
    /// somewhere on the grid.
    #[error("amplitude bound violated: {what} = {value:.6e} crosses 1/2")]
    AmplitudeBound { what: &'static str, value: f64 },

    /// Phase unwrapping saw a per-cell or per-line increment too large to
    /// resolve; the field is under-resolved or carries a winding.
    #[error("phase unwrap ambiguity: {context} (increment {increment:.4} rad)")]
    UnwrapAmbiguity { context: String, increment: f64 },

    /// A per-line x-mean exceeded the tolerance of an operation that needs
    /// zero-mean input (x-antiderivative, KP-I stepping).
    #[error("zero-x-mean precondition violated: |mean| = {mean:.3e} > tol {tol:.3e}")]
    ZeroMeanViolation { mean: f64, tol: f64 },

    /// A field sample became NaN or infinite (usually a blown-up time step).
    #[error("non-finite sample detected in {context}")]
    NonFinite { context: String },

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("field/grid size mismatch: expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid field dump: {0}")]
    Dump(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
