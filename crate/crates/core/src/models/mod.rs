//! Constructors for the qubit trajectory models and the general resetting class.

pub mod bloch;
pub mod general;
pub mod measurement;
pub mod riccati;
pub mod thermal;
pub mod unitary;

pub use bloch::{collapse_unitary_bloch_full, purity};
pub use general::{general_resetting, GeneralParams};
pub use measurement::{collapse_measurement, collapse_measurement_general, MeasurementFlow, MeasurementParams};
pub use thermal::{classify_resetting, collapse_thermal, collapse_thermal_general, ResetKind, ThermalFlow, ThermalParams};
pub use unitary::{collapse_unitary, UnitaryFlow, UnitaryParams};
