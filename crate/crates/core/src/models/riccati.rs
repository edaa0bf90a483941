//! Closed forms for a quadratic drift `a2 x² + a1 x + a0` with a total click
//! rate linear in x, `rho0 + rho1 x`.
//!
//! With roots r_a (attracting) and r_r (repelling) the ratio
//! u = (x − r_a)/(x − r_r) decays as e^{−ct}, c = |a2||r_a − r_r|, and
//! ∫ (x − r_a) dt is a logarithm, so flow, hazard and level times are all
//! explicit. An affine drift (a2 = 0) is handled as the limit.

use crate::numerics::quadratic_roots;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Riccati {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub attractor: f64,
    /// NaN for the affine case.
    pub repeller: f64,
    pub c: f64,
}

impl Riccati {
    pub fn new(a2: f64, a1: f64, a0: f64, rho0: f64, rho1: f64) -> Option<Self> {
        if a2 == 0.0 {
            if a1 >= 0.0 {
                return None;
            }
            return Some(Riccati { a2, a1, a0, rho0, rho1, attractor: -a0 / a1, repeller: f64::NAN, c: -a1 });
        }
        let (r1, r2) = quadratic_roots(a2, a1, a0)?;
        if r1 == r2 {
            return None;
        }
        let (ra, rr) = if a2 < 0.0 { (r2, r1) } else { (r1, r2) };
        Some(Self::from_roots(a2, ra, rr, rho0, rho1))
    }

    /// Builds from known roots, `a2 (x − ra)(x − rr)`.
    pub fn from_roots(a2: f64, ra: f64, rr: f64, rho0: f64, rho1: f64) -> Self {
        Riccati {
            a2,
            a1: -a2 * (ra + rr),
            a0: a2 * ra * rr,
            rho0,
            rho1,
            attractor: ra,
            repeller: rr,
            c: a2.abs() * (ra - rr).abs(),
        }
    }

    #[inline]
    pub fn drift(&self, x: f64) -> f64 {
        if self.a2 == 0.0 {
            return self.a1 * x + self.a0;
        }
        self.a2 * (x - self.attractor) * (x - self.repeller)
    }

    #[inline]
    pub fn rate(&self, x: f64) -> f64 {
        self.rho0 + self.rho1 * x
    }

    pub fn flow(&self, x0: f64, t: f64) -> f64 {
        let (ra, rr) = (self.attractor, self.repeller);
        let e = (-self.c * t).exp();
        if self.a2 == 0.0 {
            return ra + (x0 - ra) * e;
        }
        let d = (x0 - rr) - (x0 - ra) * e;
        if d == 0.0 {
            return x0;
        }
        ra + (ra - rr) * (x0 - ra) * e / d
    }

    pub fn log_survival(&self, x0: f64, t: f64) -> f64 {
        let (ra, rr) = (self.attractor, self.repeller);
        let rate_a = self.rate(ra);
        if self.a2 == 0.0 {
            return -(rate_a * t - self.rho1 * (x0 - ra) * (-self.c * t).exp_m1() / self.c);
        }
        // ln(D(t)/D(0)) with D(t) = (x0 − rr) − (x0 − ra) e^{−ct}
        let w = (x0 - rr) / (ra - rr);
        let em1 = (-self.c * t).exp_m1();
        let arg = (1.0 - w) * em1;
        let log_d = if arg.abs() < 0.5 {
            arg.ln_1p()
        } else if w > 0.0 {
            (w + (1.0 - w) * (-self.c * t).exp()).ln()
        } else {
            (1.0 - w).ln() - self.c * t
        };
        -(rate_a * t + self.rho1 * (ra - rr) / self.c * log_d)
    }

    /// Time at which the integrated rate from `x0` reaches `e`, by Newton from
    /// t = 0. The rate is monotone along the flow, so the hazard is convex or
    /// concave and the iteration is monotone after the first step. Infinite
    /// when the hazard saturates below `e`; `None` if the rate vanishes on the way.
    pub fn hazard_time(&self, x0: f64, e: f64) -> Option<f64> {
        if e <= 0.0 {
            return Some(0.0);
        }
        let ra = self.attractor;
        if !(self.rate(ra) > 0.0) {
            let w = if self.a2 == 0.0 { f64::NAN } else { (x0 - self.repeller) / (ra - self.repeller) };
            let sat = if self.a2 == 0.0 {
                self.rho1 * (x0 - ra) / self.c
            } else {
                self.rho1 * (ra - self.repeller) / self.c * w.ln()
            };
            if !(e < sat) {
                return Some(f64::INFINITY);
            }
        }
        let mut t = 0.0;
        for _ in 0..100 {
            let g = -self.log_survival(x0, t) - e;
            let r = self.rate(self.flow(x0, t));
            if !(r > 0.0) {
                return None;
            }
            let next = (t - g / r).max(0.5 * t);
            if (next - t).abs() <= 1e-14 * next {
                return Some(next);
            }
            t = next;
        }
        None
    }

    /// Time for the flow from `x0` to reach `xc`, if it ever does.
    pub fn level_time(&self, x0: f64, xc: f64) -> Option<f64> {
        if x0 == xc {
            return Some(0.0);
        }
        let (ra, rr) = (self.attractor, self.repeller);
        if self.a2 == 0.0 {
            let r = (x0 - ra) / (xc - ra);
            return if r > 1.0 { Some(r.ln() / self.c) } else { None };
        }
        let u0 = (x0 - ra) / (x0 - rr);
        let uc = (xc - ra) / (xc - rr);
        let r = u0 / uc;
        if r > 1.0 && r.is_finite() {
            Some(r.ln() / self.c)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_are_zeros_of_the_drift() {
        let r = Riccati::new(-1000.0, 1000.0 - 1.0, 0.77, 1000.0, -1000.0).unwrap();
        assert!(r.drift(r.attractor).abs() < 1e-10);
        assert!(r.drift(r.repeller).abs() < 1e-10);
    }

    #[test]
    fn hazard_slope_is_rate() {
        let r = Riccati::new(-50.0, 48.0, 1.0, 50.0, -50.0).unwrap();
        let (x0, t, h) = (0.1, 0.03, 1e-6);
        let slope = -(r.log_survival(x0, t + h) - r.log_survival(x0, t - h)) / (2.0 * h);
        assert!((slope - r.rate(r.flow(x0, t))).abs() < 1e-6 * slope);
    }

    #[test]
    fn hazard_time_inverts_the_hazard() {
        // rate rising and falling along the flow
        for r in [
            Riccati::new(-2e5, 2e5 - 1.0, 0.77, 4e5, -2e5).unwrap(),
            Riccati::new(-1e4, 9e3, 0.5, 1e3, 5e3).unwrap(),
        ] {
            for x0 in [0.0, 1e-6, 0.3, 0.999] {
                for e in [1e-9, 0.01, 0.7, 5.0, 60.0] {
                    let t = r.hazard_time(x0, e).unwrap();
                    assert!(((-r.log_survival(x0, t)) - e).abs() < 1e-12 * e.max(1.0), "x0={x0} e={e}");
                }
            }
        }
    }

    #[test]
    fn saturating_hazard_never_clicks() {
        // rate vanishes at the attractor x = 1
        let r = Riccati::new(-10.0, 10.0, 0.0, 3.0, -3.0).unwrap();
        let sat = -r.log_survival(0.5, 1e3);
        assert_eq!(r.hazard_time(0.5, sat * 1.01), Some(f64::INFINITY));
        let t = r.hazard_time(0.5, sat * 0.5).unwrap();
        assert!((-r.log_survival(0.5, t) - sat * 0.5).abs() < 1e-12);
    }

    #[test]
    fn affine_limit() {
        let r = Riccati::new(0.0, -2.0, 1.0, 3.0, 0.0).unwrap();
        assert!((r.flow(0.0, 1.0) - 0.5 * (1.0 - (-2f64).exp())).abs() < 1e-15);
        assert!((r.log_survival(0.2, 2.0) + 6.0).abs() < 1e-14);
    }
}
