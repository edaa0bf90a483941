//! Numerical Laplace inversion: Gaver–Stehfest on the real axis, and the
//! Euler-summed Fourier series on the Bromwich line when the transform can be
//! evaluated at complex σ.

use num_complex::Complex64;

/// f(t) from its transform `fhat` sampled at σ = k ln2/t, k = 1..n (n even).
/// Cancellation grows with n; 14–18 suits smooth, non-oscillating f in f64.
pub fn stehfest<F: Fn(f64) -> f64>(fhat: F, t: f64, n: usize) -> f64 {
    assert!(n % 2 == 0 && n >= 2, "stehfest needs an even number of terms, got {n}");
    let weights = stehfest_weights(n);
    let l = std::f64::consts::LN_2 / t;
    weights.iter().enumerate().map(|(i, w)| w * fhat((i + 1) as f64 * l)).sum::<f64>() * l
}

fn stehfest_weights(n: usize) -> Vec<f64> {
    let m = n / 2;
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    (1..=n)
        .map(|k| {
            let mut s = 0.0;
            for j in (k + 1) / 2..=k.min(m) {
                s += (j as f64).powi(m as i32) * fact(2 * j)
                    / (fact(m - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
            }
            if (k + m) % 2 == 0 { s } else { -s }
        })
        .collect()
}

/// Abate–Whitt Euler algorithm: trapezoidal Bromwich sum with damping
/// e^{−A} ≈ 1e−8, accelerated by binomial averaging of the last partial sums.
pub fn euler_inversion<F: Fn(Complex64) -> Complex64>(fhat: F, t: f64) -> f64 {
    const A: f64 = 18.4;
    const N: usize = 15;
    const M: usize = 11;
    let x = A / (2.0 * t);
    let h = std::f64::consts::PI / t;
    let mut partial = Vec::with_capacity(N + M + 1);
    let mut sum = 0.5 * fhat(Complex64::new(x, 0.0)).re;
    partial.push(sum);
    for k in 1..=N + M {
        let term = fhat(Complex64::new(x, k as f64 * h)).re;
        sum += if k % 2 == 0 { term } else { -term };
        partial.push(sum);
    }
    let mut binom = 1.0;
    let mut acc = 0.0;
    for m in 0..=M {
        acc += binom * partial[N + m];
        binom *= (M - m) as f64 / (m + 1) as f64;
    }
    acc / 2f64.powi(M as i32) * A.exp().sqrt() / t
}
