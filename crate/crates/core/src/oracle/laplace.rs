//! Laplace-domain weights of the click renewal from the reset point and the
//! generating function Z(s) = E/(1 − C − sD) of no-jump box counts.
//!
//! C, D and E integrate e^{−σt} against the density of the first click time
//! (C outside the box window, D inside it) and against the survival, all cut
//! at the jump time τ. J collects clicks of channels other than the spike
//! channel, which leave the spiking pointer altogether; the survival identity
//! at σ = 0 is C + D + J + μ(τ) = 1.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::{MeasurementFlow, MeasurementParams, ThermalFlow, ThermalParams, UnitaryParams};
use crate::numerics::quad;
use crate::oracle::intensity::{spike_intensity, IntensityKind, IntensitySpec};
use crate::pdmp::PdmpModel;
use crate::stats::Side;

/// The three models with closed Laplace triples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticModel {
    Unitary(UnitaryParams),
    Thermal(ThermalParams),
    Measurement(MeasurementParams),
}

impl AnalyticModel {
    /// Limit rate of jumps away from the spiking pointer: 4ω, W₋₊ or γ₂.
    pub fn jump_rate(&self) -> f64 {
        match self {
            AnalyticModel::Unitary(p) => 4.0 * p.omega,
            AnalyticModel::Thermal(p) => p.w_minus_plus,
            AnalyticModel::Measurement(p) => p.gamma2,
        }
    }

    pub fn intensity(&self) -> IntensitySpec {
        let kind = match *self {
            AnalyticModel::Unitary(p) => IntensityKind::Unitary { omega: p.omega },
            AnalyticModel::Thermal(p) => IntensityKind::Thermal {
                w_minus_plus: p.w_minus_plus,
                w_plus_minus: p.w_plus_minus,
                resetting: true,
            },
            AnalyticModel::Measurement(p) => IntensityKind::Measurement { gamma2: p.gamma2, eta2: p.eta2 },
        };
        IntensitySpec::new(kind, Side::Spiking)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceTriple {
    pub sigma: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub j: f64,
    /// Survival from the reset point up to τ.
    pub mu_tau: f64,
    pub tau: f64,
    /// Box window in time, `t_lo < t_hi`, clipped to τ.
    pub t_lo: f64,
    pub t_hi: f64,
}

impl LaplaceTriple {
    /// C + D + J + μ(τ) − 1; zero at σ = 0.
    pub fn identity_residual(&self) -> f64 {
        self.c + self.d + self.j + self.mu_tau - 1.0
    }
}

/// ∫_{t1}^{t2} e^{−rt} dt, continuous through r = 0.
fn lap(r: f64, t1: f64, t2: f64) -> f64 {
    let h = t2 - t1;
    if h <= 0.0 {
        return 0.0;
    }
    if r * h == 0.0 {
        return h * (-r * t1).exp();
    }
    (-r * t1).exp() * -(-r * h).exp_m1() / r
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma >= 0.0) {
        return Err(Error::Argument(format!("sigma must be >= 0, got {sigma}")));
    }
    Ok(())
}

fn check_box(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && a <= b) {
        return Err(Error::Argument(format!("need 0 <= a <= b, got ({a}, {b})")));
    }
    Ok(())
}

/// Window of a q box: level times from 0, clipped to τ.
fn q_window(level: impl Fn(f64) -> Option<f64>, a: f64, b: f64, tau: f64) -> (f64, f64) {
    let at = |c: f64| if c <= 0.0 { 0.0 } else { level(c).unwrap_or(f64::INFINITY).min(tau) };
    (at(a), at(b))
}

/// The closed triple. For the q models τ is the time to 1 − `eps_jump`; the
/// unitary model ignores `eps_jump` and uses the time to θ = 0.
pub fn laplace_triple_closed(model: &AnalyticModel, sigma: f64, a: f64, b: f64, eps_jump: f64) -> Result<LaplaceTriple> {
    check_sigma(sigma)?;
    check_box(a, b)?;
    match *model {
        AnalyticModel::Unitary(p) => unitary_triple(&p, sigma, a, b),
        AnalyticModel::Thermal(p) => thermal_triple(&p, sigma, a, b, eps_jump),
        AnalyticModel::Measurement(p) => measurement_triple(&p, sigma, a, b, eps_jump),
    }
}

fn unitary_triple(p: &UnitaryParams, sigma: f64, a: f64, b: f64) -> Result<LaplaceTriple> {
    p.validate()?;
    if b >= std::f64::consts::PI {
        return Err(Error::Domain(format!("unitary box edge b = {b} must be below pi")));
    }
    let (g, k, beta, lam) = (p.gamma, p.k(), p.beta(), p.lambda());
    let tau = p.tau();
    // e^{±2φ} with cosh φ = λ and sinh φ = β
    let (e2p, e2m) = ((lam + beta).powi(2), (lam - beta).powi(2));
    // 2βk, and γ/2 − 2βk = 2k/(λ + β) without cancellation
    let w = 2.0 * beta * k;
    let (rm, rp, r0) = (sigma + 2.0 * k / (lam + beta), sigma + 0.5 * g + w, sigma + 0.5 * g);
    let pref = 1.0 / (4.0 * beta * beta);
    let e = pref * ((1.0 + e2m) * lap(rm, 0.0, tau) + (1.0 + e2p) * lap(rp, 0.0, tau) - 4.0 * lap(r0, 0.0, tau));
    let cd_on = |t1: f64, t2: f64| {
        g * pref * (e2m * lap(rm, t1, t2) + e2p * lap(rp, t1, t2) - 2.0 * lap(r0, t1, t2))
    };
    // θ decreases from π: b is reached first
    let t_lo = if b <= 0.0 { tau } else { p.tau_c(b).min(tau) };
    let t_hi = if a <= 0.0 { tau } else { p.tau_c(a).min(tau) };
    let cd = cd_on(0.0, tau);
    let d = cd_on(t_lo, t_hi);
    // μ(t) e^{γt/2} β² = sinh²(βkt) + sinh²(βkt − φ), and βkτ = φ
    let mu_tau = (-0.5 * g * tau).exp();
    Ok(LaplaceTriple { sigma, a, b, c: cd - d, d, e, j: 0.0, mu_tau, tau, t_lo, t_hi })
}

fn thermal_triple(p: &ThermalParams, sigma: f64, a: f64, b: f64, eps: f64) -> Result<LaplaceTriple> {
    p.validate()?;
    let f = ThermalFlow::new(p);
    let (qm, qp, ge) = (f.q_minus, f.q_plus, f.ge);
    let level = 1.0 - eps;
    if !(eps > 0.0 && level < qp) {
        return Err(Error::Domain(format!("jump level 1 - eps = {level} must lie below q+ = {qp}")));
    }
    let tau = f.level_time(0.0, level).ok_or_else(|| Error::Numerical("no time to the jump level".into()))?;
    let omqp = p.one_minus_q_plus();
    let (r_minus, r_plus) = (sigma + ge * (1.0 - qm), sigma + ge * omqp);
    let span = qp - qm;
    let e = (qp * lap(r_minus, 0.0, tau) - qm * lap(r_plus, 0.0, tau)) / span;
    let cd_on =
        |t1: f64, t2: f64| ge / span * (qp * (1.0 - qm) * lap(r_minus, t1, t2) - qm * omqp * lap(r_plus, t1, t2));
    let (t_lo, t_hi) = q_window(|c| f.level_time(0.0, c), a, b, tau);
    let cd = cd_on(0.0, tau);
    let d = cd_on(t_lo, t_hi);
    let mu_tau = (-qm * (-ge * omqp * tau).exp() + qp * (-ge * (1.0 - qm) * tau).exp()) / span;
    Ok(LaplaceTriple { sigma, a, b, c: cd - d, d, e, j: 0.0, mu_tau, tau, t_lo, t_hi })
}

fn measurement_triple(p: &MeasurementParams, sigma: f64, a: f64, b: f64, eps: f64) -> Result<LaplaceTriple> {
    p.validate()?;
    if p.n_a.norm_sqr() != 1.0 || p.n_b.norm_sqr() != 0.0 {
        return Err(Error::Unsupported("closed triple needs the emission variant n_a = 1, n_b = 0".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, 1)")));
    }
    let f = MeasurementFlow::new(p);
    let tau = f.level_time(0.0, 1.0 - eps).ok_or_else(|| Error::Numerical("no time to the jump level".into()))?;
    let (g1, g2, e2) = (p.gamma1 * p.eta1, p.gamma2, p.eta2);
    let kk = g1 + g2;
    let rk = sigma + kk;
    let e = (g2 * (1.0 - e2) * lap(sigma, 0.0, tau) + (g1 + g2 * e2) * lap(rk, 0.0, tau)) / kk;
    let (t_lo, t_hi) = q_window(|c| f.level_time(0.0, c), a, b, tau);
    let cd = g1 * lap(rk, 0.0, tau);
    let d = g1 * lap(rk, t_lo, t_hi);
    let j = g2 * e2 * lap(rk, 0.0, tau);
    let qm = f.q_minus;
    let mu_tau = (-qm + (-kk * tau).exp()) / (1.0 - qm);
    Ok(LaplaceTriple { sigma, a, b, c: cd - d, d, e, j, mu_tau, tau, t_lo, t_hi })
}

/// The paper-independent triple: adaptive quadrature of the defining integrals
/// along the model's flow and survival, windows from level-crossing times.
pub fn laplace_triple_quadrature(model: &PdmpModel, sigma: f64, a: f64, b: f64, eps_jump: f64) -> Result<LaplaceTriple> {
    check_sigma(sigma)?;
    check_box(a, b)?;
    let p = model.pointers.ok_or_else(|| Error::Argument(format!("{} declares no pointer states", model.name)))?;
    let spike = model.spike_channel.ok_or_else(|| Error::Argument(format!("{} has no spike channel", model.name)))?;
    let x0 = p.spiking;
    let level = p.jump_level(eps_jump);
    let tau = model
        .level_time_from(x0, level)?
        .ok_or_else(|| Error::Domain(format!("the flow from {x0} never reaches the jump level {level}")))?;
    let at = |c: f64| -> Result<f64> {
        if c == x0 || p.beyond(c, level) {
            return Ok(if c == x0 { 0.0 } else { tau });
        }
        Ok(model.level_time_from(x0, c)?.unwrap_or(f64::INFINITY).min(tau))
    };
    let (ta, tb) = (at(a)?, at(b)?);
    let (t_lo, t_hi) = (ta.min(tb), ta.max(tb));
    let rate = &model.channels[spike].rate;
    let state = |t: f64| -> (f64, f64) {
        let x = model.flow(x0, t).unwrap_or(f64::NAN);
        let mu = model.survival(x0, t).unwrap_or(f64::NAN);
        (x, mu * (-sigma * t).exp())
    };
    let integral = |f: &mut dyn FnMut(f64) -> f64, t1: f64, t2: f64| -> Result<f64> {
        if t2 <= t1 {
            return Ok(0.0);
        }
        Ok(quad::integrate_pieces(&mut |t| f(t), &[t1, t2], 1e-300, 1e-10, 20000)?.value)
    };
    let mut spike_f = |t: f64| {
        let (x, w) = state(t);
        w * rate(x)
    };
    let d = integral(&mut spike_f, t_lo, t_hi)?;
    let c = integral(&mut spike_f, 0.0, t_lo)? + integral(&mut spike_f, t_hi, tau)?;
    let e = integral(&mut |t: f64| state(t).1, 0.0, tau)?;
    let j = if model.channels.len() > 1 {
        integral(
            &mut |t: f64| {
                let (x, w) = state(t);
                w * (model.total_rate(x) - rate(x))
            },
            0.0,
            tau,
        )?
    } else {
        0.0
    };
    let mu_tau = model.survival(x0, tau)?;
    Ok(LaplaceTriple { sigma, a, b, c, d, e, j, mu_tau, tau, t_lo, t_hi })
}

/// Z(s) = E/(1 − C − sD).
pub fn generating_z(t: &LaplaceTriple, s: f64) -> Result<f64> {
    let den = 1.0 - t.c - s * t.d;
    if !(den > 0.0) {
        return Err(Error::Pole(format!(
            "1 - C - sD = {den:e} <= 0 at sigma = {}, s = {s}: sigma is at or below the leading decay rate",
            t.sigma
        )));
    }
    Ok(t.e / den)
}

/// Z at a complex marking variable, for series expansions in s.
pub fn generating_z_complex(t: &LaplaceTriple, s: Complex64) -> Complex64 {
    t.e / (1.0 - t.c - s * t.d)
}

/// The n-th coefficient of Z in s: Dⁿ E/(1 − C)^{n+1}, the Laplace transform
/// of the no-jump probability of exactly n counts.
pub fn z_coefficient(t: &LaplaceTriple, n: u32) -> f64 {
    let omc = 1.0 - t.c;
    t.e / omc * (t.d / omc).powi(n as i32)
}

/// The large-γ limit 1/(σ + jump rate + (1 − s) λ_{[a,b]}).
pub fn asymptotic_z(model: &AnalyticModel, s: f64, sigma: f64, a: f64, b: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let lam = spike_intensity(&model.intensity(), a, b)?;
    Ok(1.0 / (sigma + model.jump_rate() + (1.0 - s) * lam))
}

/// Leading large-γ forms of (C, D, E); the q models keep the first order in
/// `eps_jump` where it is known.
pub fn asymptotic_triple(model: &AnalyticModel, sigma: f64, a: f64, b: f64, eps_jump: f64) -> Result<(f64, f64, f64)> {
    check_sigma(sigma)?;
    let lam = spike_intensity(&model.intensity(), a, b)?;
    Ok(match *model {
        AnalyticModel::Unitary(p) => {
            let g = p.gamma;
            let d = lam / g;
            (1.0 - (4.0 * p.omega + sigma) / g - d, d, 1.0 / g)
        }
        AnalyticModel::Thermal(p) => {
            let den = sigma + p.gamma_eta() + p.w_minus_plus;
            ((p.gamma_eta() - lam) / den, lam / den, 1.0 / den)
        }
        AnalyticModel::Measurement(p) => {
            let den = sigma + p.gamma1 * p.eta1 + p.gamma2;
            let f0 = p.gamma2 * (1.0 - p.eta2);
            ((p.gamma1 * p.eta1 - f0 * eps_jump - lam) / den, lam / den, (1.0 - eps_jump * f0 / den) / den)
        }
    })
}
