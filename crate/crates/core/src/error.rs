use thiserror::Error;

/// Everything that can go wrong while evaluating a coupling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("{field} must be a unit vector (norm {norm})")]
    NotUnit { field: &'static str, norm: f64 },

    #[error("dipoles coincide (r = 0)")]
    CoincidentDipoles,

    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },

    #[error("{what} expects {expected} dipoles")]
    WrongKind {
        what: &'static str,
        expected: &'static str,
    },

    #[error(
        "detuned pair: omega1 = {omega1}, omega2 = {omega2}; only the resonant case is supported"
    )]
    Detuned { omega1: f64, omega2: f64 },

    #[error("angular grid too coarse for kr = {kr}: need n_theta, n_phi >= {required}, have ({n_theta}, {n_phi})")]
    UnderResolved {
        kr: f64,
        required: usize,
        n_theta: usize,
        n_phi: usize,
    },

    #[error("{what} did not converge: residual {residual:e} > tolerance {tol:e} (sequence {sequence:?})")]
    NotConverged {
        what: &'static str,
        residual: f64,
        tol: f64,
        sequence: Vec<f64>,
    },

    #[error("image {n:?} coincides with the pair separation (|dr| = {distance:e})")]
    ImageCoincidence { n: [i64; 3], distance: f64 },

    #[error("mode {n:?} (omega_k = {omega_k}) is resonant: detuning {detuning:e} below guard")]
    ResonantMode {
        n: [i64; 3],
        omega_k: f64,
        detuning: f64,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
