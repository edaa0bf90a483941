//! Numerical building blocks: quadrature, ODE integration, root finding,
//! Laplace inversion and goodness-of-fit tests.

pub mod gof;
pub mod laplace;
pub mod ode;
pub mod quad;
pub mod roots;

/// Cubic Hermite interpolation on [x0, x0 + h] from values and slopes.
#[inline]
pub fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}

/// Derivative of [`hermite`] with respect to the physical coordinate.
#[inline]
pub fn hermite_slope(y0: f64, y1: f64, m0: f64, m1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let d00 = 6.0 * s2 - 6.0 * s;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = -6.0 * s2 + 6.0 * s;
    let d11 = 3.0 * s2 - 2.0 * s;
    (d00 * y0 + d01 * y1) / h + d10 * m0 + d11 * m1
}

/// Roots of `a x² + b x + c` in ascending order, computed without cancellation.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if a == 0.0 || disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}
