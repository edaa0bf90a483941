//! Sample moments with standard errors.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: f64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Third and fourth central moments (divided by n).
    pub m3: f64,
    pub m4: f64,
}

impl Moments {
    pub fn from_values(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let variance = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
        Moments { n, mean, variance, m3: m3 / n, m4: m4 / n }
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        Self::from_values(&xs)
    }

    pub fn sem_mean(&self) -> f64 {
        (self.variance / self.n).sqrt()
    }

    /// Standard error of the sample variance from the fourth central moment.
    pub fn sem_variance(&self) -> f64 {
        let n = self.n;
        if n < 4.0 {
            return f64::NAN;
        }
        let s4 = self.variance * self.variance;
        ((self.m4 - (n - 3.0) / (n - 1.0) * s4) / n).max(0.0).sqrt()
    }

    /// Variance over mean (NaN for a zero mean).
    pub fn dispersion(&self) -> f64 {
        if self.mean > 0.0 {
            self.variance / self.mean
        } else {
            f64::NAN
        }
    }

    /// Delta-method error of the dispersion index.
    pub fn sem_dispersion(&self) -> f64 {
        let (m, v, n) = (self.mean, self.variance, self.n);
        if !(m > 0.0) {
            return f64::NAN;
        }
        let var_m = v / n;
        let var_v = self.sem_variance().powi(2);
        let cov = self.m3 / n;
        (var_v / (m * m) - 2.0 * v * cov / (m * m * m) + v * v * var_m / (m * m * m * m)).max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sample() {
        let m = Moments::from_values(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((m.m4 - (2.0 * 5.0625 + 2.0 * 0.0625) / 4.0).abs() < 1e-15);
    }
}
