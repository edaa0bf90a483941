//! Driven qubit under strong measurement, in the angle coordinate θ.
//!
//! dθ = Ω(θ) dt + (π − θ) dN with Ω(θ) = −2k(1 + λ sin θ), click rate
//! γ sin²(θ/2), k = √(ωγ), λ = √(γ/16ω) = cosh φ and β = sinh φ.
//!
//! With y = tan(θ/2) and z = y + λ the no-click flow is z' = −k(z² − β²), so
//! w = (z − β)/(z + β) decays as e^{−2βkt}. Using w keeps θ0 = π (z = ∞,
//! w = 1) regular and the survival in log form,
//! ln μ = −2k e^{−φ} t + ln N(w) − ln N(w0) with
//! N(w) = (1 − w)² + (β(1 + w) − λ(1 − w))².

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pdmp::{Domain, JumpLevel, JumpMap, PdmpModel, Pointers, PoissonChannel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryParams {
    pub omega: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl UnitaryParams {
    pub fn new(omega: f64, gamma: f64) -> Self {
        UnitaryParams { omega, gamma, eta: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) {
            return Err(Error::Config(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.gamma > 16.0 * self.omega) {
            return Err(Error::Unsupported(format!(
                "gamma = {} must exceed 16 omega = {} for a real beta",
                self.gamma,
                16.0 * self.omega
            )));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Config(format!("eta must lie in (0,1], got {}", self.eta)));
        }
        Ok(())
    }

    pub fn k(&self) -> f64 {
        (self.omega * self.gamma).sqrt()
    }

    pub fn lambda(&self) -> f64 {
        (self.gamma / (16.0 * self.omega)).sqrt()
    }

    pub fn beta(&self) -> f64 {
        (self.gamma / (16.0 * self.omega) - 1.0).sqrt()
    }

    pub fn phi(&self) -> f64 {
        self.beta().asinh()
    }

    /// Time for the flow from π to reach θ = 0.
    pub fn tau(&self) -> f64 {
        self.phi() / (self.beta() * self.k())
    }

    /// Stable fixed point θ* = −asin(4√(ω/γ)).
    pub fn theta_star(&self) -> f64 {
        -(4.0 * (self.omega / self.gamma).sqrt()).asin()
    }

    /// Closed time to reach level c from π.
    pub fn tau_c(&self, c: f64) -> f64 {
        let (b, k, phi) = (self.beta(), self.k(), self.phi());
        (2.0 * b / ((c / 2.0).tan() + (-phi).exp())).ln_1p() / (2.0 * b * k)
    }
}

/// Precomputed constants of the closed forms.
#[derive(Debug, Clone, Copy)]
pub struct UnitaryFlow {
    pub k: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub beta: f64,
    pub theta_star: f64,
    /// 2βk, the decay rate of w
    rate_w: f64,
    /// 2k e^{−φ} = γ/2 − 2βk, the fixed-point click rate
    pub rate_fp: f64,
}

impl UnitaryFlow {
    pub fn new(p: &UnitaryParams) -> Self {
        let (k, lambda, beta) = (p.k(), p.lambda(), p.beta());
        UnitaryFlow {
            k,
            gamma: p.gamma,
            lambda,
            beta,
            theta_star: p.theta_star(),
            rate_w: 2.0 * beta * k,
            rate_fp: 2.0 * k / (lambda + beta),
        }
    }

    /// w and 1 − w for a starting angle.
    fn w_of(&self, theta: f64) -> (f64, f64) {
        let (s, c) = (0.5 * theta).sin_cos();
        let p = s + self.lambda * c;
        let q = c;
        let den = p + self.beta * q;
        ((p - self.beta * q) / den, 2.0 * self.beta * q / den)
    }

    fn theta_of(&self, w: f64, one_minus_w: f64) -> f64 {
        let num = self.beta * (1.0 + w) - self.lambda * one_minus_w;
        2.0 * num.atan2(one_minus_w)
    }

    fn norm(&self, w: f64, one_minus_w: f64) -> f64 {
        let n = self.beta * (1.0 + w) - self.lambda * one_minus_w;
        one_minus_w * one_minus_w + n * n
    }

    pub fn drift(&self, theta: f64) -> f64 {
        -2.0 * self.k * (1.0 + self.lambda * theta.sin())
    }

    pub fn rate(&self, theta: f64) -> f64 {
        let s = (0.5 * theta).sin();
        self.gamma * s * s
    }

    pub fn flow(&self, theta0: f64, t: f64) -> f64 {
        let (w0, omw0) = self.w_of(theta0);
        let e = (-self.rate_w * t).exp();
        let w = w0 * e;
        // 1 − w0 e = (1 − w0) + w0 (1 − e)
        let omw = omw0 - w0 * (-self.rate_w * t).exp_m1();
        self.theta_of(w, omw).clamp(self.theta_star, std::f64::consts::PI)
    }

    pub fn log_survival(&self, theta0: f64, t: f64) -> f64 {
        let (w0, omw0) = self.w_of(theta0);
        let w = w0 * (-self.rate_w * t).exp();
        let omw = omw0 - w0 * (-self.rate_w * t).exp_m1();
        -self.rate_fp * t + self.norm(w, omw).ln() - self.norm(w0, omw0).ln()
    }

    pub fn level_time(&self, theta0: f64, c: f64) -> Option<f64> {
        if theta0 == c {
            return Some(0.0);
        }
        let (w0, _) = self.w_of(theta0);
        let (wc, _) = self.w_of(c);
        let r = w0 / wc;
        if r > 1.0 && r.is_finite() {
            Some(r.ln() / self.rate_w)
        } else {
            None
        }
    }
}

/// The resetting model on [θ*, π] with closed flow, survival and level times.
pub fn collapse_unitary(p: &UnitaryParams) -> Result<PdmpModel> {
    p.validate()?;
    if p.eta != 1.0 {
        return Err(Error::Unsupported(format!(
            "eta = {} < 1 has no closed angle dynamics; use collapse_unitary_bloch_full",
            p.eta
        )));
    }
    let uf = Arc::new(UnitaryFlow::new(p));
    let pi = std::f64::consts::PI;
    let (u1, u2, u3, u4, u5) = (uf.clone(), uf.clone(), uf.clone(), uf.clone(), uf.clone());
    let channel = PoissonChannel {
        label: "N".into(),
        rate: Arc::new(move |th| u1.rate(th)),
        jump_map: JumpMap::Reset(pi),
    };
    let model = PdmpModel::new(
        format!("unitary(omega={}, gamma={})", p.omega, p.gamma),
        Arc::new(move |th| u2.drift(th)),
        vec![channel],
        Domain { lo: uf.theta_star, hi: pi },
    )
    .with_closed_forms(
        Arc::new(move |th, t| u3.flow(th, t)),
        Arc::new(move |th, t| u4.log_survival(th, t)),
        Some(Arc::new(move |th, c| u5.level_time(th, c))),
    )
    .with_attractor(uf.theta_star)
    .with_pointers(Pointers { spiking: pi, far: 0.0, level: JumpLevel::Crossing(0.0) }, 0);
    Ok(model)
}

/// Drift of the angle for an arbitrary coupling k and rate γ, including γ = 0
/// where the strong-measurement closed forms do not apply.
pub fn angle_drift(k: f64, gamma: f64) -> impl Fn(f64) -> f64 {
    move |theta: f64| -2.0 * k - 0.5 * gamma * theta.sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_phi_consistency() {
        let p = UnitaryParams::new(1.0, 1e4);
        assert!((p.beta() - 624f64.sqrt()).abs() < 1e-12);
        assert!((p.phi().sinh() - p.beta()).abs() < 1e-12 * p.beta());
    }

    #[test]
    fn flow_from_pi_hits_zero_at_tau() {
        let p = UnitaryParams::new(1.0, 1e4);
        let uf = UnitaryFlow::new(&p);
        assert!(uf.flow(std::f64::consts::PI, p.tau()).abs() < 1e-8);
        assert_eq!(uf.flow(std::f64::consts::PI, 0.0), std::f64::consts::PI);
    }

    #[test]
    fn eta_below_one_is_routed_elsewhere() {
        let p = UnitaryParams { eta: 0.5, ..UnitaryParams::new(1.0, 1e4) };
        assert!(matches!(collapse_unitary(&p), Err(Error::Unsupported(_))));
    }
}
