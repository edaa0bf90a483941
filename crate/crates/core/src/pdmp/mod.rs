//! Generic engine for one-dimensional PDMPs driven by state-dependent Poisson
//! channels.

pub mod model;
pub mod sim;
pub mod table;
pub mod vector;

pub use model::{state_fn, Domain, JumpLevel, JumpMap, PdmpModel, Pointers, PoissonChannel, StateFn};
pub use sim::{run_euler, run_exact, simulate_euler, simulate_exact, ClickEvent, EventLog, Method, Observer, RunEnd};
pub use table::FlowTable;
