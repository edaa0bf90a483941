//! Experiment runner for the spike engine: configs, ensembles, CSV output,
//! event-log dumps and the acceptance criteria.

pub mod config;
pub mod criteria;
pub mod dump;
pub mod error;
pub mod output;
pub mod runner;
pub mod setup;

pub use error::{HarnessError, Result};
