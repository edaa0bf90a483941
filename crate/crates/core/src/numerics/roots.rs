//! Bracketing root finders for monotone scalar functions.

use crate::error::{Error, Result};

/// Bisection on [lo, hi] for a function that changes sign across the bracket.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numerical(format!("root not bracketed in [{lo:e}, {hi:e}]")));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs() || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Finds the first `t > 0` with `g(t) >= target` for a non-decreasing `g`
/// with `g(0) < target`, doubling the bracket from `t_start`.
pub fn expand_upper<F: FnMut(f64) -> f64>(mut g: F, target: f64, t_start: f64, t_max: f64) -> Result<(f64, f64)> {
    let mut lo = 0.0;
    let mut hi = t_start.max(f64::MIN_POSITIVE);
    loop {
        if g(hi) >= target {
            return Ok((lo, hi));
        }
        if hi >= t_max {
            return Err(Error::Numerical(format!(
                "could not bracket the root within [0, {t_max:e}] (target {target:e})"
            )));
        }
        lo = hi;
        hi = (2.0 * hi).min(t_max);
    }
}

/// Solves `g(t) = target` on a bracket [lo, hi] for non-decreasing `g`, given
/// its derivative `dg`. Newton steps are taken only while they stay inside the
/// current bracket; otherwise the step falls back to bisection.
pub fn newton_bracketed<F: FnMut(f64) -> (f64, f64)>(
    mut g: F,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
) -> f64 {
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, d) = g(t);
        let r = v - target;
        if r == 0.0 {
            return t;
        }
        if r > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let mut next = if d > 0.0 { t - r / d } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= rel_tol * next.abs() || hi - lo <= rel_tol * hi.abs() {
            return next;
        }
        t = next;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn newton_matches_bisection() {
        let n = newton_bracketed(|t| (t.exp(), t.exp()), 5.0, 0.0, 10.0, 1e-15);
        assert!((n - 5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn unbracketed_is_error() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }
}
