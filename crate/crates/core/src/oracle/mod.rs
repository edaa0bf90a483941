//! Analytic predictions: limit intensities, Laplace triples and generating
//! functions.

pub mod intensity;
pub mod laplace;

pub use intensity::{poisson_pmf, spike_intensity, IntensityKind, IntensitySpec};
pub use laplace::{
    asymptotic_triple, asymptotic_z, generating_z, generating_z_complex, laplace_triple_closed,
    laplace_triple_quadrature, z_coefficient, AnalyticModel, LaplaceTriple,
};
