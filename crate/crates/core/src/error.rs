use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular: pivot magnitude {pivot:.3e}")]
    Singular { pivot: f64 },

    #[error("singular matrix in harmonic evaluation at omega = {omega} rad/s (pivot {pivot:.3e})")]
    SingularAt { omega: f64, pivot: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluation at a pole: s = {re} + {im}j")]
    Pole { re: f64, im: f64 },

    #[error("root not bracketed: f(lo) = {f_lo:.3e}, f(hi) = {f_hi:.3e}")]
    Bracket { f_lo: f64, f_hi: f64 },

    #[error("iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("step size {step:.3e} s exceeds the limit {limit:.3e} s for the fastest corner {omega_max:.3e} rad/s")]
    StepTooLarge { step: f64, limit: f64, omega_max: f64 },

    #[error("steady state not reached: period-to-period drift {drift:.3e}")]
    Transient { drift: f64 },

    #[error("response diverged at t = {time:.4} s")]
    Unstable { time: f64 },

    #[error("base linear loop is not stable: {unstable_poles} closed-loop poles in the right half-plane")]
    BaseLoopUnstable { unstable_poles: i64 },

    #[error("requested phase advantage {requested:.2} deg exceeds the maximum {max:.2} deg")]
    PhaseAdvantage { requested: f64, max: f64 },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by user input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Config(_) | Error::InvalidParameter(_) | Error::Shape(_) | Error::Io(_) | Error::Csv(_)
        )
    }

    /// Subsystem that raised a numerical error, for diagnostics.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Singular { .. } | Error::Bracket { .. } | Error::NoConvergence { .. } => "numerics",
            Error::SingularAt { .. } => "hosidf",
            Error::Pole { .. } => "lti",
            Error::StepTooLarge { .. } | Error::Transient { .. } | Error::Unstable { .. } => "simulation",
            Error::BaseLoopUnstable { .. } => "stability",
            Error::PhaseAdvantage { .. } => "design",
            _ => "input",
        }
    }
}
