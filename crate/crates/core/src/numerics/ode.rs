//! Dormand–Prince 5(4) with step-size control, for small fixed-size systems.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-12, rel: 1e-12 }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = f(y)` from 0 to `t_end` and returns the final state.
pub fn solve<const N: usize, F: Fn(&[f64; N]) -> [f64; N]>(
    f: F,
    y0: [f64; N],
    t_end: f64,
    tol: Tolerance,
) -> Result<[f64; N]> {
    let mut y = y0;
    integrate(&f, &mut y, t_end, tol, None, |_, _, _| true)?;
    Ok(y)
}

/// Step-by-step driver. `on_step(t, y, dy)` is called after every accepted
/// step; returning `false` stops the integration early. `h_max` caps the step.
///
/// Returns the time reached.
pub fn integrate<const N: usize, F, S>(
    f: &F,
    y: &mut [f64; N],
    t_end: f64,
    tol: Tolerance,
    h_max: Option<f64>,
    mut on_step: S,
) -> Result<f64>
where
    F: Fn(&[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N], &[f64; N]) -> bool,
{
    if t_end < 0.0 {
        return Err(Error::Argument("negative integration time".into()));
    }
    if t_end == 0.0 {
        return Ok(0.0);
    }
    let h_cap = h_max.unwrap_or(t_end).min(t_end);
    let mut t = 0.0;
    let mut k1 = f(y);
    let scale0: f64 = (0..N).map(|i| k1[i].abs() / (tol.abs + tol.rel * y[i].abs())).fold(0.0, f64::max);
    let mut h = if scale0 > 0.0 { (0.01 / scale0).min(h_cap) } else { h_cap };
    let mut rejects = 0usize;
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        let k2 = f(&axpy(y, h, &[(A21, &k1)]));
        let k3 = f(&axpy(y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(&axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(&axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(&axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y5 = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(&y5);
        let mut err = 0.0f64;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.abs + tol.rel * y[i].abs().max(y5[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            return Err(Error::Numerical("non-finite state during ODE integration".into()));
        }
        if err <= 1.0 {
            t = if t + h >= t_end { t_end } else { t + h };
            *y = y5;
            k1 = k7;
            rejects = 0;
            if !on_step(t, y, &k1) {
                return Ok(t);
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(h_cap);
        } else {
            rejects += 1;
            if rejects > 60 {
                return Err(Error::Numerical(format!("ODE step size underflow at t = {t:e}")));
            }
            h *= (0.9 * err.powf(-0.2)).max(0.1);
        }
        if h <= t.abs() * f64::EPSILON {
            return Err(Error::Numerical(format!("ODE step size underflow at t = {t:e}")));
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay() {
        let y = solve(|y: &[f64; 1]| [-3.0 * y[0]], [2.0], 1.5, Tolerance::default()).unwrap();
        assert_relative_eq!(y[0], 2.0 * (-4.5f64).exp(), max_relative = 1e-10);
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let y = solve(|y: &[f64; 2]| [y[1], -y[0]], [1.0, 0.0], 10.0, Tolerance::default()).unwrap();
        assert_relative_eq!(y[0], 10f64.cos(), epsilon = 1e-10);
        assert_relative_eq!(y[1], -(10f64.sin()), epsilon = 1e-10);
    }
}
