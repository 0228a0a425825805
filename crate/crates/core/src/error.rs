use thiserror::Error;

/// Everything that can go wrong between reading a configuration and
/// emitting an entanglement series.
#[derive(Debug, Error)]
pub enum Error {
    #[error("initial amplitudes are not normalized: sum |a_i|^2 = {norm}")]
    Normalization { norm: f64 },

    #[error("detunings are inconsistent: omega1c - omega2c = {difference}, omega12 = {omega12}")]
    InconsistentDetunings { difference: f64, omega12: f64 },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("kernel evaluated at its branch point x = {x}")]
    BranchPoint { x: num_complex::Complex64 },

    #[error("transform-domain system is singular at x = {x}")]
    SingularSystem { x: num_complex::Complex64 },

    #[error("{operation}: {detail}")]
    Convergence {
        operation: &'static str,
        detail: String,
    },

    #[error("poles at {first} and {second} coincide within {tolerance:e}")]
    DegeneratePole {
        first: num_complex::Complex64,
        second: num_complex::Complex64,
        tolerance: f64,
    },

    #[error("quadrature error estimate {estimate:e} exceeds {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("bath discretization failed: {0}")]
    Discretization(String),

    #[error("t_max = {t_max} exceeds the bath recurrence time {recurrence}")]
    RecurrenceHorizonExceeded { t_max: f64, recurrence: f64 },

    #[error("step size rejected: {0}")]
    StepSize(String),

    #[error("amplitude norm {norm} exceeds one")]
    Norm { norm: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that originate in user input rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Normalization { .. }
                | Error::InconsistentDetunings { .. }
                | Error::Domain(_)
                | Error::UnknownPreset(_)
                | Error::Parse { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
