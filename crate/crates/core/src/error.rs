use thiserror::Error;

use crate::evolution::NessReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a space layout needs at least one factor")]
    EmptyLayout,
    #[error("ladder window must satisfy n_min < 0 < n_max, got [{n_min}, {n_max}]")]
    InvalidLadder { n_min: i64, n_max: i64 },
    #[error("total Hilbert-space dimension {0} is below 2")]
    DimensionTooSmall(usize),
    #[error("factor index {index} out of range for a layout with {count} factors")]
    FactorIndex { index: usize, count: usize },
    #[error("local operator has dimension {found}, factor {factor} has dimension {expected}")]
    LocalDimension { factor: usize, expected: usize, found: usize },
    #[error("factor {0} is not a load ladder")]
    NotALadder(usize),
    #[error("factor {0} is not a Fock oscillator")]
    NotAnOscillator(usize),
    #[error("operands live on different space layouts")]
    LayoutMismatch,
    #[error("matrix flagged Hermitian deviates from its adjoint by {0:e}")]
    NotHermitian(f64),
    #[error("state trace is {0}, expected 1")]
    TraceNotUnit(f64),
    #[error("state has eigenvalue {0:e} below the positivity tolerance")]
    NotPositive(f64),
    #[error("partial trace needs a nonempty set of kept factors")]
    EmptyKeep,

    #[error("invalid engine parameter: {0}")]
    InvalidParameter(String),
    #[error("load window [{n_min}, {n_max}] has fewer than 3 rungs")]
    WindowTooSmall { n_min: i64, n_max: i64 },

    #[error("invalid integration config: {0}")]
    InvalidConfig(String),
    #[error("trace drifted by {drift:e} at t = {time}")]
    TraceDrift { drift: f64, time: f64 },
    #[error("population {leak:e} reached the outer rungs of the load window at t = {time}")]
    BoundaryLeak { leak: f64, time: f64 },
    #[error("non-finite value in the state at t = {0}")]
    NonFinite(f64),
    #[error("steady-state fit rejected (r2 mean = {:.6}, r2 variance = {:.6})", .0.fit_r2_mean, .0.fit_r2_var)]
    FitRejected(Box<NessReport>),
    #[error("series too short for a steady-state fit: {0}")]
    SeriesTooShort(String),

    #[error("Monte Carlo needs at least one trial")]
    NoTrials,
    #[error("Fock truncation leaks: top-level population {population:e} after cycle {cycle}")]
    TruncationLeak { population: f64, cycle: usize },
}

impl Error {
    /// Caused by the inputs rather than by the numerics.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::InvalidConfig(_)
                | Error::WindowTooSmall { .. }
                | Error::InvalidLadder { .. }
                | Error::NoTrials
        )
    }

    /// An integration or fit that ran but could not be trusted.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TraceDrift { .. }
                | Error::BoundaryLeak { .. }
                | Error::NonFinite(_)
                | Error::FitRejected(_)
                | Error::SeriesTooShort(_)
                | Error::TruncationLeak { .. }
                | Error::NotPositive(_)
                | Error::TraceNotUnit(_)
        )
    }
}
