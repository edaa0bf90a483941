//! The abstract resetting class q̇ = F(q) + G(q)(Ṅ − γH(q)) with G(q) = −q
//! and H(q) = (1 − q)χ(q). No closed forms: the exact method tabulates the
//! flow and hazard numerically.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pdmp::{Domain, JumpLevel, JumpMap, PdmpModel, Pointers, PoissonChannel, StateFn};

#[derive(Clone)]
pub struct GeneralParams {
    pub f: StateFn,
    pub chi: StateFn,
    pub gamma: f64,
    /// Free-form description used in the model name.
    pub label: String,
}

impl fmt::Debug for GeneralParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralParams").field("label", &self.label).field("gamma", &self.gamma).finish()
    }
}

impl GeneralParams {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        chi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        gamma: f64,
    ) -> Self {
        GeneralParams { f: Arc::new(f), chi: Arc::new(chi), gamma, label: label.into() }
    }

    pub fn h(&self, q: f64) -> f64 {
        (1.0 - q) * (self.chi)(q)
    }

    /// Checks G(0)H(0) = 0 = G(1)H(1), F(0) ≥ 0, F(1) ≤ 0, finiteness and a
    /// non-negative rate on a grid of [0, 1].
    pub fn check_hypotheses(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        let (f0, f1) = ((self.f)(0.0), (self.f)(1.0));
        // G(0) = 0 and H(1) = 0 by construction; the products still have to be finite.
        let gh0 = 0.0 * self.h(0.0);
        let gh1 = -self.h(1.0);
        if !(gh0 == 0.0) {
            return Err(Error::Config("hypothesis G(0)H(0) = 0 fails: H(0) is not finite".into()));
        }
        if !(gh1 == 0.0) {
            return Err(Error::Config("hypothesis G(1)H(1) = 0 fails: chi(1) is not finite".into()));
        }
        if !(f0 >= 0.0) {
            return Err(Error::Config(format!("hypothesis F(0) >= 0 fails: F(0) = {f0}")));
        }
        if !(f1 <= 0.0) {
            return Err(Error::Config(format!("hypothesis F(1) <= 0 fails: F(1) = {f1}")));
        }
        for i in 0..=1000 {
            let q = i as f64 / 1000.0;
            let (f, c) = ((self.f)(q), (self.chi)(q));
            if !f.is_finite() || !c.is_finite() {
                return Err(Error::Config(format!("F or chi is not finite at q = {q}")));
            }
            if c < 0.0 {
                return Err(Error::Config(format!("chi({q}) = {c} < 0 gives a negative click rate")));
            }
        }
        Ok(())
    }
}

/// Resetting-to-0 model on [0, 1] with channel "N".
pub fn general_resetting(p: &GeneralParams) -> Result<PdmpModel> {
    p.check_hypotheses()?;
    let g = p.gamma;
    let (f, chi) = (p.f.clone(), p.chi.clone());
    let chi_r = p.chi.clone();
    let channel = PoissonChannel {
        label: "N".into(),
        rate: Arc::new(move |q| (g * (1.0 - q) * chi_r(q)).max(0.0)),
        jump_map: JumpMap::Reset(0.0),
    };
    let model = PdmpModel::new(
        format!("general({}, gamma={})", p.label, p.gamma),
        Arc::new(move |q| f(q) + g * q * (1.0 - q) * chi(q)),
        vec![channel],
        Domain { lo: 0.0, hi: 1.0 },
    )
    .with_pointers(Pointers { spiking: 0.0, far: 1.0, level: JumpLevel::NearFar }, 0);
    Ok(model)
}

/// χ used by the conjecture examples: a quartic with χ(0) = 1, positive on [0, 1].
pub fn example_chi(q: f64) -> f64 {
    1.0 + q * (0.7 + q * (-1.3 + q * (0.9 + q * 0.4)))
}

pub fn example_cos(gamma: f64) -> GeneralParams {
    GeneralParams::new("F=cos(50q/pi)", |q: f64| (50.0 * q / std::f64::consts::PI).cos(), example_chi, gamma)
}

pub fn example_exp(gamma: f64) -> GeneralParams {
    GeneralParams::new("F=exp(-q)-0.5", |q: f64| (-q).exp() - 0.5, example_chi, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypothesis_violation_is_named() {
        let p = GeneralParams::new("bad", |q: f64| q - 0.5, example_chi, 10.0);
        match general_resetting(&p) {
            Err(Error::Config(m)) => assert!(m.contains("F(0)")),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn examples_satisfy_hypotheses() {
        example_cos(1e7).check_hypotheses().unwrap();
        example_exp(1e7).check_hypotheses().unwrap();
    }
}
