//! Qubit coupled to a thermal bath and monitored through a diagonal N₁.
//!
//! Resetting variant: dq = Ω(q) dt − q dN, Ω(q) = W₋₊ − q(W₊₋ + W₋₊ − γη) − γη q²,
//! click rate γη(1 − q). General variant (n₊, n₋ both nonzero): multiplicative
//! jump q → |n₊|²q / ((|n₊|² − |n₋|²)q + |n₋|²) with rate γη((|n₊|² − |n₋|²)q + |n₋|²).

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::riccati::Riccati;
use crate::pdmp::{Domain, JumpLevel, JumpMap, PdmpModel, Pointers, PoissonChannel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    pub w_minus_plus: f64,
    pub w_plus_minus: f64,
    pub gamma: f64,
    pub eta: f64,
    pub n_plus: Complex64,
    pub n_minus: Complex64,
}

impl ThermalParams {
    /// Resetting variant, n₊ = 0 and n₋ = 1.
    pub fn resetting(w_minus_plus: f64, w_plus_minus: f64, gamma: f64, eta: f64) -> Self {
        ThermalParams {
            w_minus_plus,
            w_plus_minus,
            gamma,
            eta,
            n_plus: Complex64::new(0.0, 0.0),
            n_minus: Complex64::new(1.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_minus_plus >= 0.0 && self.w_plus_minus >= 0.0) {
            return Err(Error::Config("bath rates must be non-negative".into()));
        }
        if !(self.gamma > 0.0 && self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Config(format!(
                "need gamma > 0 and eta in (0,1], got gamma = {}, eta = {}",
                self.gamma, self.eta
            )));
        }
        if self.n_plus.norm_sqr() + self.n_minus.norm_sqr() == 0.0 {
            return Err(Error::Config("n_plus and n_minus cannot both vanish".into()));
        }
        Ok(())
    }

    pub fn gamma_eta(&self) -> f64 {
        self.gamma * self.eta
    }

    /// Roots (q₋, q₊) of Ω for the resetting variant.
    pub fn q_roots(&self) -> (f64, f64) {
        let ge = self.gamma_eta();
        let s = self.w_minus_plus + self.w_plus_minus;
        // γη q² + (S − γη) q − W₋₊ = 0
        crate::numerics::quadratic_roots(ge, s - ge, -self.w_minus_plus).expect("real roots")
    }

    /// 1 − q₊ without cancellation: the small root of γη p² − (S + γη) p + W₊₋.
    pub fn one_minus_q_plus(&self) -> f64 {
        let ge = self.gamma_eta();
        let s = self.w_minus_plus + self.w_plus_minus;
        let b = s + ge;
        let disc = (b * b - 4.0 * ge * self.w_plus_minus).max(0.0);
        2.0 * self.w_plus_minus / (b + disc.sqrt())
    }

    pub fn omega(&self, q: f64) -> f64 {
        let ge = self.gamma_eta();
        self.w_minus_plus - q * (self.w_plus_minus + self.w_minus_plus - ge) - ge * q * q
    }
}

/// Closed forms of the resetting variant, written in the (q₋, q₊) form.
#[derive(Debug, Clone, Copy)]
pub struct ThermalFlow {
    pub ge: f64,
    pub q_minus: f64,
    pub q_plus: f64,
    one_minus_q_plus: f64,
}

impl ThermalFlow {
    pub fn new(p: &ThermalParams) -> Self {
        let (q_minus, _) = p.q_roots();
        let omqp = p.one_minus_q_plus();
        ThermalFlow { ge: p.gamma_eta(), q_minus, q_plus: 1.0 - omqp, one_minus_q_plus: omqp }
    }

    pub fn flow(&self, q0: f64, t: f64) -> f64 {
        let (qm, qp) = (self.q_minus, self.q_plus);
        let e = (-self.ge * (qp - qm) * t).exp();
        (qp * (q0 - qm) + qm * (qp - q0) * e) / ((q0 - qm) + (qp - q0) * e)
    }

    pub fn log_survival(&self, q0: f64, t: f64) -> f64 {
        let (qm, qp) = (self.q_minus, self.q_plus);
        let e = (-self.ge * (qp - qm) * t).exp();
        -self.ge * self.one_minus_q_plus * t + ((q0 - qm) + (qp - q0) * e).ln() - (qp - qm).ln()
    }

    pub fn level_time(&self, q0: f64, c: f64) -> Option<f64> {
        let (qm, qp) = (self.q_minus, self.q_plus);
        let r = ((q0 - qp) / (q0 - qm)) / ((c - qp) / (c - qm));
        if r > 1.0 && r.is_finite() {
            Some(r.ln() / (self.ge * (qp - qm)))
        } else if q0 == c {
            Some(0.0)
        } else {
            None
        }
    }
}

/// The resetting thermal model on [0, q₊].
pub fn collapse_thermal(p: &ThermalParams) -> Result<PdmpModel> {
    p.validate()?;
    if p.n_plus.norm_sqr() != 0.0 || p.n_minus.norm_sqr() != 1.0 {
        return Err(Error::Config("collapse_thermal needs n_plus = 0, n_minus = 1".into()));
    }
    let tf = Arc::new(ThermalFlow::new(p));
    let ge = p.gamma_eta();
    let pp = *p;
    let (t1, t2, t3) = (tf.clone(), tf.clone(), tf.clone());
    let channel = PoissonChannel {
        label: "N".into(),
        rate: Arc::new(move |q| ge * (1.0 - q)),
        jump_map: JumpMap::Reset(0.0),
    };
    let model = PdmpModel::new(
        format!("thermal(W-+={}, W+-={}, gamma={}, eta={})", p.w_minus_plus, p.w_plus_minus, p.gamma, p.eta),
        Arc::new(move |q| pp.omega(q)),
        vec![channel],
        Domain { lo: 0.0, hi: tf.q_plus },
    )
    .with_closed_forms(
        Arc::new(move |q, t| t1.flow(q, t)),
        Arc::new(move |q, t| t2.log_survival(q, t)),
        Some(Arc::new(move |q, c| t3.level_time(q, c))),
    )
    .with_attractor(tf.q_plus)
    .with_pointers(Pointers { spiking: 0.0, far: 1.0, level: JumpLevel::NearFar }, 0);
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResetKind {
    ResetToMinus,
    ResetToPlus,
    NotResetting,
}

/// Whether a diagonal N₁ = diag(n₊, n₋) produces resetting dynamics.
pub fn classify_resetting(n_plus: Complex64, n_minus: Complex64) -> Result<ResetKind> {
    match (n_plus.norm_sqr() == 0.0, n_minus.norm_sqr() == 0.0) {
        (true, true) => Err(Error::Argument("n_plus and n_minus cannot both vanish".into())),
        (true, false) => Ok(ResetKind::ResetToMinus),
        (false, true) => Ok(ResetKind::ResetToPlus),
        (false, false) => Ok(ResetKind::NotResetting),
    }
}

/// General diagonal N₁. The drift is quadratic and the rate linear in q, so
/// the closed forms come from [`Riccati`].
pub fn collapse_thermal_general(p: &ThermalParams) -> Result<PdmpModel> {
    p.validate()?;
    let np = p.n_plus.norm_sqr();
    let nm = p.n_minus.norm_sqr();
    if np == 0.0 && nm == 1.0 {
        return collapse_thermal(p);
    }
    let d = np - nm;
    let ge = p.gamma_eta();
    let s = p.w_minus_plus + p.w_plus_minus;
    // F(q) − γη G H collected: γη d q² − (S + γη d) q + W₋₊
    let ric = Riccati::new(ge * d, -(s + ge * d), p.w_minus_plus, ge * nm, ge * d)
        .ok_or_else(|| Error::Config("degenerate no-click drift".into()))?;
    let jump = match classify_resetting(p.n_plus, p.n_minus)? {
        ResetKind::ResetToMinus => JumpMap::Reset(0.0),
        ResetKind::ResetToPlus => JumpMap::Reset(1.0),
        ResetKind::NotResetting => JumpMap::Map(Arc::new(move |q| (np * q / (d * q + nm)).clamp(0.0, 1.0))),
    };
    let r = Arc::new(ric);
    let (r1, r2, r3, r4, r5) = (r.clone(), r.clone(), r.clone(), r.clone(), r.clone());
    let channel = PoissonChannel { label: "N".into(), rate: Arc::new(move |q| r1.rate(q).max(0.0)), jump_map: jump };
    let hi = if d == -1.0 && nm == 1.0 { ric.attractor } else { 1.0 };
    let model = PdmpModel::new(
        format!(
            "thermal_general(W-+={}, W+-={}, gamma={}, eta={}, |n+|^2={np}, |n-|^2={nm})",
            p.w_minus_plus, p.w_plus_minus, p.gamma, p.eta
        ),
        Arc::new(move |q| r2.drift(q)),
        vec![channel],
        Domain { lo: 0.0, hi },
    )
    .with_closed_forms(
        Arc::new(move |q, t| r3.flow(q, t)),
        Arc::new(move |q, t| r4.log_survival(q, t)),
        Some(Arc::new(move |q, c| r5.level_time(q, c))),
    )
    .with_hazard_time(Arc::new(move |q, e| r.hazard_time(q, e)))
    .with_attractor(ric.attractor)
    .with_pointers(Pointers { spiking: 0.0, far: 1.0, level: JumpLevel::NearFar }, 0);
    Ok(model)
}
