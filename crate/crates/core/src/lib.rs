//! Few-qubit autonomous quantum heat engines coupled to a quantised load.
//!
//! * [`hilbert`]: sparse operators and states on qubit/ladder/oscillator spaces.
//! * [`models`]: Hamiltonians, jump operators and observables of the engines.
//! * [`evolution`]: RK4 integration of the master equations and rate extraction.
//! * [`analytic`]: exact quasi-stationary solutions and TUR bounds.
//! * [`flywheel`]: the spin-oscillator Otto engine as a discrete-time random walk.
//! * [`sweep`]: parameter sweeps comparing simulation against the closed forms.

pub mod analytic;
pub mod error;
pub mod evolution;
pub mod flywheel;
pub mod hilbert;
pub mod models;
pub mod parallel;
pub mod sweep;

pub use error::{Error, Result};
