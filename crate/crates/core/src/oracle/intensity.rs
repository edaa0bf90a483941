//! Limit spike intensities I(x), their box integrals λ_{[a,b]} and the
//! Poisson law of box counts.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numerics::quad;
use crate::stats::Side;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntensityKind {
    /// I(θ) = 4ω sin(θ/2)/cos³(θ/2) for spikes from θ = π.
    Unitary { omega: f64 },
    /// W₋₊/x² from 0; W₊₋/(1 − x)² from 1 unless the model resets.
    Thermal { w_minus_plus: f64, w_plus_minus: f64, resetting: bool },
    /// γ₂(1 − η₂)/x² from 0, nothing from 1.
    Measurement { gamma2: f64, eta2: f64 },
    /// |F(0)|/x² when H(0) ≠ 0, |F(1)|/(1 − x)² when H(1) ≠ 0.
    Conjecture { f0: f64, f1: f64, h0: f64, h1: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensitySpec {
    pub kind: IntensityKind,
    pub side: Side,
}

/// Shape of a density: `c/x²`, `c/(1 − x)²`, the unitary law or zero.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Zero,
    InvSq(f64),
    InvSqFromOne(f64),
    Tan(f64),
}

impl IntensitySpec {
    pub fn new(kind: IntensityKind, side: Side) -> Self {
        IntensitySpec { kind, side }
    }

    fn shape(&self) -> Shape {
        use IntensityKind::*;
        match (self.kind, self.side) {
            (Unitary { omega }, Side::Spiking) => Shape::Tan(4.0 * omega),
            (Unitary { .. }, Side::Far) => Shape::Zero,
            (Thermal { w_minus_plus, .. }, Side::Spiking) => Shape::InvSq(w_minus_plus),
            (Thermal { resetting: true, .. }, Side::Far) => Shape::Zero,
            (Thermal { w_plus_minus, .. }, Side::Far) => Shape::InvSqFromOne(w_plus_minus),
            (Measurement { gamma2, eta2 }, Side::Spiking) => Shape::InvSq(gamma2 * (1.0 - eta2)),
            (Measurement { .. }, Side::Far) => Shape::Zero,
            (Conjecture { f0, h0, .. }, Side::Spiking) => {
                if h0 != 0.0 {
                    Shape::InvSq(f0.abs())
                } else {
                    Shape::Zero
                }
            }
            (Conjecture { f1, h1, .. }, Side::Far) => {
                if h1 != 0.0 {
                    Shape::InvSqFromOne(f1.abs())
                } else {
                    Shape::Zero
                }
            }
        }
    }

    /// I(x).
    pub fn density(&self, x: f64) -> f64 {
        match self.shape() {
            Shape::Zero => 0.0,
            Shape::InvSq(c) => c / (x * x),
            Shape::InvSqFromOne(c) => c / ((1.0 - x) * (1.0 - x)),
            Shape::Tan(c) => {
                let (s, co) = (0.5 * x).sin_cos();
                c * s / (co * co * co)
            }
        }
    }

    /// A primitive of I on the open domain, so λ = P(b) − P(a).
    pub fn primitive(&self, x: f64) -> f64 {
        match self.shape() {
            Shape::Zero => 0.0,
            Shape::InvSq(c) => -c / x,
            Shape::InvSqFromOne(c) => c / (1.0 - x),
            Shape::Tan(c) => {
                let t = (0.5 * x).tan();
                c * t * t
            }
        }
    }

    fn check_box(&self, a: f64, b: f64) -> Result<()> {
        if !(a <= b) {
            return Err(Error::Argument(format!("need a <= b, got ({a}, {b})")));
        }
        let (lo, hi) = match self.kind {
            IntensityKind::Unitary { .. } => (0.0, std::f64::consts::PI),
            _ => (0.0, 1.0),
        };
        if a < lo || b > hi {
            return Err(Error::Domain(format!("box ({a}, {b}) outside [{lo}, {hi}]")));
        }
        if a == b {
            return Ok(());
        }
        match self.shape() {
            Shape::InvSq(c) if a == 0.0 && c != 0.0 => {
                Err(Error::Domain("1/x^2 intensity diverges at a = 0; the box needs a > 0".into()))
            }
            Shape::InvSqFromOne(c) if b == 1.0 && c != 0.0 => {
                Err(Error::Domain("1/(1-x)^2 intensity diverges at b = 1; the box needs b < 1".into()))
            }
            Shape::Tan(_) if b == hi => Err(Error::Domain("unitary intensity diverges at b = pi".into())),
            _ => Ok(()),
        }
    }

    /// Same integral by adaptive quadrature, the check on [`spike_intensity`].
    pub fn lambda_by_quadrature(&self, a: f64, b: f64) -> Result<f64> {
        self.check_box(a, b)?;
        if a == b {
            return Ok(0.0);
        }
        Ok(quad::integrate(|x| self.density(x), a, b, 0.0, 1e-13)?.value)
    }
}

/// λ_{[a,b]} = ∫ₐᵇ I(x) dx from the closed primitive.
pub fn spike_intensity(spec: &IntensitySpec, a: f64, b: f64) -> Result<f64> {
    spec.check_box(a, b)?;
    if a == b {
        return Ok(0.0);
    }
    Ok(spec.primitive(b) - spec.primitive(a))
}

/// Poisson probability of `n` counts with mean `lambda`, through logarithms.
pub fn poisson_pmf(lambda: f64, n: u64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Argument(format!("Poisson mean must be finite and >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let nf = n as f64;
    Ok((nf * lambda.ln() - lambda - ln_gamma(nf + 1.0)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_quarter_turn() {
        let s = IntensitySpec::new(IntensityKind::Unitary { omega: 1.0 }, Side::Spiking);
        let l = spike_intensity(&s, 0.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((l - 4.0).abs() < 1e-14);
    }

    #[test]
    fn divergent_box_is_refused() {
        let s = IntensitySpec::new(IntensityKind::Measurement { gamma2: 1.0, eta2: 0.5 }, Side::Spiking);
        assert!(matches!(spike_intensity(&s, 0.0, 0.1), Err(Error::Domain(_))));
        assert_eq!(spike_intensity(&s, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn pmf_edge_cases() {
        assert_eq!(poisson_pmf(0.0, 0).unwrap(), 1.0);
        assert_eq!(poisson_pmf(0.0, 3).unwrap(), 0.0);
        assert!((poisson_pmf(2.5, 0).unwrap() - (-2.5f64).exp()).abs() < 1e-16);
        assert!(poisson_pmf(-1.0, 0).is_err());
    }
}
