//! Qubit under a strong resetting measurement N₁ = |−⟩⟨−| and a weak second
//! measurement N₂.
//!
//! Spontaneous-emission variant (N₂ with n_a = 1, n_b = 0):
//! dq = Ω(q) dt − q dN¹ + (1 − q) dN², Ω(q) = (γ₂ + qγ₁η₁)(1 − q) − γ₂η₂(1 − q)²,
//! rates γ₁η₁(1 − q) and γ₂η₂(1 − q).
//!
//! General off-diagonal N₂: no-click drift F(q) + γ₁η₁ q(1 − q) with
//! F(q) = γ₂[|a|²(1 − q) − |b|²q] − γ₂η₂[|a|²(1 − q)² − |b|²q²], N₂ rate
//! γ₂η₂(|a|²(1 − q) + |b|²q) and N₂ jump q → |a|²(1 − q)/(|a|²(1 − q) + |b|²q).

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::riccati::Riccati;
use crate::pdmp::{Domain, JumpLevel, JumpMap, PdmpModel, Pointers, PoissonChannel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementParams {
    pub gamma1: f64,
    pub eta1: f64,
    pub gamma2: f64,
    pub eta2: f64,
    pub n_a: Complex64,
    pub n_b: Complex64,
}

impl MeasurementParams {
    /// Spontaneous-emission variant.
    pub fn emission(gamma1: f64, eta1: f64, gamma2: f64, eta2: f64) -> Self {
        MeasurementParams {
            gamma1,
            eta1,
            gamma2,
            eta2,
            n_a: Complex64::new(1.0, 0.0),
            n_b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma1 > 0.0 && self.eta1 > 0.0 && self.eta1 <= 1.0) {
            return Err(Error::Config(format!(
                "need gamma1 > 0 and eta1 in (0,1], got gamma1 = {}, eta1 = {}",
                self.gamma1, self.eta1
            )));
        }
        if !(self.gamma2 >= 0.0 && self.eta2 >= 0.0 && self.eta2 <= 1.0) {
            return Err(Error::Config(format!(
                "need gamma2 >= 0 and eta2 in [0,1], got gamma2 = {}, eta2 = {}",
                self.gamma2, self.eta2
            )));
        }
        if self.n_a.norm_sqr() + self.n_b.norm_sqr() == 0.0 {
            return Err(Error::Config("n_a and n_b cannot both vanish".into()));
        }
        Ok(())
    }

    /// Lower root q₋ = γ₂(η₂ − 1)/(γ₂η₂ + γ₁η₁) of Ω (emission variant).
    pub fn q_minus(&self) -> f64 {
        self.gamma2 * (self.eta2 - 1.0) / (self.gamma2 * self.eta2 + self.gamma1 * self.eta1)
    }

    pub fn omega(&self, q: f64) -> f64 {
        (self.gamma2 + q * self.gamma1 * self.eta1) * (1.0 - q) - self.gamma2 * self.eta2 * (1.0 - q) * (1.0 - q)
    }

    /// F of the general variant (no N₁ compensator).
    pub fn f_general(&self, q: f64) -> f64 {
        let (a2, b2) = (self.n_a.norm_sqr(), self.n_b.norm_sqr());
        let p = 1.0 - q;
        self.gamma2 * (a2 * p - b2 * q) - self.gamma2 * self.eta2 * (a2 * p * p - b2 * q * q)
    }
}

/// Closed forms of the emission variant.
#[derive(Debug, Clone, Copy)]
pub struct MeasurementFlow {
    pub q_minus: f64,
    /// (γ₁η₁ + γ₂η₂)(1 − q₋)
    pub k: f64,
}

impl MeasurementFlow {
    pub fn new(p: &MeasurementParams) -> Self {
        let q_minus = p.q_minus();
        MeasurementFlow { q_minus, k: (p.gamma1 * p.eta1 + p.gamma2 * p.eta2) * (1.0 - q_minus) }
    }

    pub fn flow(&self, q0: f64, t: f64) -> f64 {
        let qm = self.q_minus;
        let e = (-self.k * t).exp();
        let d = (q0 - qm) + (1.0 - q0) * e;
        if d == 0.0 {
            return q0;
        }
        ((q0 - qm) + qm * (1.0 - q0) * e) / d
    }

    pub fn log_survival(&self, q0: f64, t: f64) -> f64 {
        let qm = self.q_minus;
        // ln[(q0 − q₋) + (1 − q0)e^{−kt}] − ln(1 − q₋), split so e^{−kt} may underflow
        let a = q0 - qm;
        let b = 1.0 - q0;
        if a > 0.0 {
            let r = b / a * (-self.k * t).exp();
            a.ln() + r.ln_1p() - (1.0 - qm).ln()
        } else {
            b.ln() - self.k * t - (1.0 - qm).ln()
        }
    }

    pub fn level_time(&self, q0: f64, c: f64) -> Option<f64> {
        if q0 == c {
            return Some(0.0);
        }
        let qm = self.q_minus;
        let r = ((1.0 - q0) / (q0 - qm)) * ((c - qm) / (1.0 - c));
        if r > 1.0 && r.is_finite() {
            Some(r.ln() / self.k)
        } else {
            None
        }
    }
}

const POINTERS: Pointers = Pointers { spiking: 0.0, far: 1.0, level: JumpLevel::NearFar };

/// Emission variant on [0, 1]; channel "N1" resets to 0 and "N2" to 1.
pub fn collapse_measurement(p: &MeasurementParams) -> Result<PdmpModel> {
    p.validate()?;
    if p.n_a.norm_sqr() != 1.0 || p.n_b.norm_sqr() != 0.0 {
        return Err(Error::Config("collapse_measurement needs n_a = 1, n_b = 0".into()));
    }
    let mf = Arc::new(MeasurementFlow::new(p));
    let (r1, r2) = (p.gamma1 * p.eta1, p.gamma2 * p.eta2);
    let pp = *p;
    let (m1, m2, m3) = (mf.clone(), mf.clone(), mf.clone());
    let channels = vec![
        PoissonChannel { label: "N1".into(), rate: Arc::new(move |q| r1 * (1.0 - q)), jump_map: JumpMap::Reset(0.0) },
        PoissonChannel { label: "N2".into(), rate: Arc::new(move |q| r2 * (1.0 - q)), jump_map: JumpMap::Reset(1.0) },
    ];
    let model = PdmpModel::new(
        format!("measurement(gamma1={}, eta1={}, gamma2={}, eta2={})", p.gamma1, p.eta1, p.gamma2, p.eta2),
        Arc::new(move |q| pp.omega(q)),
        channels,
        Domain { lo: 0.0, hi: 1.0 },
    )
    .with_closed_forms(
        Arc::new(move |q, t| m1.flow(q, t)),
        Arc::new(move |q, t| m2.log_survival(q, t)),
        Some(Arc::new(move |q, c| m3.level_time(q, c))),
    )
    .with_attractor(1.0)
    .with_pointers(POINTERS, 0);
    Ok(model)
}

/// General off-diagonal N₂. Closed forms through [`Riccati`].
pub fn collapse_measurement_general(p: &MeasurementParams) -> Result<PdmpModel> {
    p.validate()?;
    let (a2, b2) = (p.n_a.norm_sqr(), p.n_b.norm_sqr());
    if a2 == 1.0 && b2 == 0.0 {
        return collapse_measurement(p);
    }
    let (g1, g2, e2) = (p.gamma1 * p.eta1, p.gamma2, p.eta2);
    // F(q) + γ₁η₁ q(1 − q) collected in powers of q
    let c2 = -g2 * e2 * (a2 - b2) - g1;
    let c1 = -g2 * (a2 + b2) + 2.0 * g2 * e2 * a2 + g1;
    let c0 = g2 * a2 * (1.0 - e2);
    // total rate γ₁η₁(1 − q) + γ₂η₂(a2(1 − q) + b2 q)
    let rho0 = g1 + g2 * e2 * a2;
    let rho1 = -g1 + g2 * e2 * (b2 - a2);
    let ric = Riccati::new(c2, c1, c0, rho0, rho1)
        .ok_or_else(|| Error::Config("degenerate no-click drift".into()))?;
    let n2_jump = if b2 == 0.0 {
        JumpMap::Reset(1.0)
    } else if a2 == 0.0 {
        JumpMap::Reset(0.0)
    } else {
        JumpMap::Map(Arc::new(move |q| {
            let h = a2 * (1.0 - q) + b2 * q;
            (a2 * (1.0 - q) / h).clamp(0.0, 1.0)
        }))
    };
    let r = Arc::new(ric);
    let (r1, r2, r3, r4) = (r.clone(), r.clone(), r.clone(), r.clone());
    let channels = vec![
        PoissonChannel { label: "N1".into(), rate: Arc::new(move |q| g1 * (1.0 - q)), jump_map: JumpMap::Reset(0.0) },
        PoissonChannel {
            label: "N2".into(),
            rate: Arc::new(move |q| g2 * e2 * (a2 * (1.0 - q) + b2 * q)),
            jump_map: n2_jump,
        },
    ];
    let model = PdmpModel::new(
        format!(
            "measurement_general(gamma1={}, eta1={}, gamma2={}, eta2={}, |a|^2={a2}, |b|^2={b2})",
            p.gamma1, p.eta1, p.gamma2, p.eta2
        ),
        Arc::new(move |q| r1.drift(q)),
        channels,
        Domain { lo: 0.0, hi: 1.0 },
    )
    .with_closed_forms(
        Arc::new(move |q, t| r2.flow(q, t)),
        Arc::new(move |q, t| r3.log_survival(q, t)),
        Some(Arc::new(move |q, c| r4.level_time(q, c))),
    )
    .with_hazard_time(Arc::new(move |q, e| r.hazard_time(q, e)))
    .with_attractor(ric.attractor.min(1.0))
    .with_pointers(POINTERS, 0);
    Ok(model)
}
