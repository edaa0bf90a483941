//! Turns a [`ModelSpec`] and a γ into a runnable model and its predicted intensity.

use num_complex::Complex64;

use spikes_core::models::general::{example_cos, example_exp};
use spikes_core::models::{
    collapse_measurement, collapse_measurement_general, collapse_thermal, collapse_thermal_general,
    collapse_unitary, collapse_unitary_bloch_full, general_resetting, MeasurementParams, ThermalParams, UnitaryParams,
};
use spikes_core::oracle::{IntensityKind, IntensitySpec};
use spikes_core::pdmp::vector::VectorPdmp;
use spikes_core::pdmp::PdmpModel;
use spikes_core::stats::{Side, TipRule};

use crate::config::{ComplexPair, GeneralExample, ModelSpec};
use crate::error::Result;

pub enum Engine {
    Scalar { model: PdmpModel, rule: TipRule, x0: f64 },
    /// Spikes read in q; starts at q = 0 with u = 0.
    Bloch(VectorPdmp<3>),
}

pub struct Built {
    /// CSV `model` column.
    pub tag: String,
    pub engine: Engine,
    pub gamma2: Option<f64>,
    /// Limit intensity of spikes from the spiking pointer, when one is known.
    pub intensity: Option<IntensitySpec>,
}

fn complex(p: ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// 40 W₋₊/(γη), the excursion floor for non-resetting thermal tips.
pub fn default_tip_floor(w_minus_plus: f64, gamma: f64, eta: f64) -> f64 {
    40.0 * w_minus_plus / (gamma * eta)
}

/// ω with k = √ω γ^α, so that k² = ωγ.
pub fn effective_omega(omega: f64, alpha: f64, gamma: f64) -> f64 {
    omega * gamma.powf(2.0 * alpha - 1.0)
}

pub fn build(spec: &ModelSpec, gamma: f64) -> Result<Built> {
    let scalar = |model: PdmpModel, rule: TipRule, x0: f64| Engine::Scalar { model, rule, x0 };
    Ok(match spec {
        ModelSpec::Unitary { omega, alpha } => {
            let (om, tag, intensity) = match alpha {
                Some(a) => {
                    let om = effective_omega(*omega, *a, gamma);
                    // a limit law exists only on the square-root scaling
                    let law = (*a == 0.5).then(|| unitary_intensity(*omega));
                    (om, format!("unitary(alpha={a})"), law)
                }
                None => (*omega, "unitary".to_string(), Some(unitary_intensity(*omega))),
            };
            let model = collapse_unitary(&UnitaryParams::new(om, gamma))?;
            Built {
                tag,
                engine: scalar(model, TipRule::Reset { channel: 0 }, std::f64::consts::PI),
                gamma2: None,
                intensity,
            }
        }
        ModelSpec::UnitaryBloch { omega, eta } => {
            let p = UnitaryParams { omega: *omega, gamma, eta: *eta };
            Built {
                tag: "unitary_bloch".into(),
                engine: Engine::Bloch(collapse_unitary_bloch_full(&p)?),
                gamma2: None,
                intensity: None,
            }
        }
        ModelSpec::Thermal { w_minus_plus, w_plus_minus, eta, n_plus, n_minus, tip_floor } => {
            let base = ThermalParams::resetting(*w_minus_plus, *w_plus_minus, gamma, *eta);
            match (n_plus, n_minus) {
                (Some(np), Some(nm)) => {
                    let p = ThermalParams { n_plus: complex(*np), n_minus: complex(*nm), ..base };
                    let model = collapse_thermal_general(&p)?;
                    let floor = tip_floor.unwrap_or_else(|| default_tip_floor(*w_minus_plus, gamma, *eta));
                    let rule = TipRule::for_model(&model, floor)?;
                    let resetting = matches!(rule, TipRule::Reset { .. });
                    Built {
                        tag: "thermal_general".into(),
                        engine: scalar(model, rule, 0.0),
                        gamma2: None,
                        intensity: Some(thermal_intensity(*w_minus_plus, *w_plus_minus, resetting)),
                    }
                }
                _ => Built {
                    tag: "thermal".into(),
                    engine: scalar(collapse_thermal(&base)?, TipRule::Reset { channel: 0 }, 0.0),
                    gamma2: None,
                    intensity: Some(thermal_intensity(*w_minus_plus, *w_plus_minus, true)),
                },
            }
        }
        ModelSpec::Measurement { gamma2, eta1, eta2, n_a, n_b } => {
            let emission = MeasurementParams::emission(gamma, *eta1, *gamma2, *eta2);
            match (n_a, n_b) {
                (Some(a), Some(b)) => {
                    let p = MeasurementParams { n_a: complex(*a), n_b: complex(*b), ..emission };
                    let model = collapse_measurement_general(&p)?;
                    let f0 = p.f_general(0.0);
                    Built {
                        tag: "measurement_general".into(),
                        engine: scalar(model, TipRule::Reset { channel: 0 }, 0.0),
                        gamma2: Some(*gamma2),
                        // N₁ resets from every q < 1, so H(0) ≠ 0
                        intensity: Some(IntensitySpec::new(
                            IntensityKind::Conjecture { f0, f1: 0.0, h0: 1.0, h1: 0.0 },
                            Side::Spiking,
                        )),
                    }
                }
                _ => Built {
                    tag: "measurement".into(),
                    engine: scalar(collapse_measurement(&emission)?, TipRule::Reset { channel: 0 }, 0.0),
                    gamma2: Some(*gamma2),
                    intensity: Some(IntensitySpec::new(
                        IntensityKind::Measurement { gamma2: *gamma2, eta2: *eta2 },
                        Side::Spiking,
                    )),
                },
            }
        }
        ModelSpec::General { example } => {
            let p = match example {
                GeneralExample::Cos => example_cos(gamma),
                GeneralExample::Exp => example_exp(gamma),
            };
            let model = general_resetting(&p)?;
            let kind = IntensityKind::Conjecture { f0: (p.f)(0.0), f1: (p.f)(1.0), h0: p.h(0.0), h1: p.h(1.0) };
            Built {
                tag: format!("general({})", p.label),
                engine: scalar(model, TipRule::Reset { channel: 0 }, 0.0),
                gamma2: None,
                intensity: Some(IntensitySpec::new(kind, Side::Spiking)),
            }
        }
    })
}

pub fn unitary_intensity(omega: f64) -> IntensitySpec {
    IntensitySpec::new(IntensityKind::Unitary { omega }, Side::Spiking)
}

pub fn thermal_intensity(w_minus_plus: f64, w_plus_minus: f64, resetting: bool) -> IntensitySpec {
    IntensitySpec::new(IntensityKind::Thermal { w_minus_plus, w_plus_minus, resetting }, Side::Spiking)
}
