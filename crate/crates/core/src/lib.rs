//! Monte Carlo engine and analytic oracle for one-dimensional piecewise
//! deterministic Markov processes with Poisson resetting, applied to strongly
//! measured qubits and their pre-spike statistics.

pub mod error;
pub mod models;
pub mod numerics;
pub mod oracle;
pub mod pdmp;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
