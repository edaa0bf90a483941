//! Sampler for the large-rate limit: a two-state jump chain on {0, 1}
//! decorated with Poisson spikes.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::numerics::quad::gk21;
use crate::numerics::{hermite, hermite_slope};
use crate::rng::RngStream;
use crate::stats::outcome::Side;

/// Cumulative of a height density on [lo, hi], tabulated as Hermite data.
#[derive(Debug, Clone)]
pub struct HeightLaw {
    x: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    pub total: f64,
}

impl HeightLaw {
    /// Tabulates ∫ density on [lo, hi]; the density must be finite there.
    pub fn new<F: Fn(f64) -> f64>(density: F, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Argument(format!("empty height range ({lo}, {hi})")));
        }
        let mut f = |x: f64| density(x);
        let n0 = 64;
        // geometric spacing away from the near end resolves 1/x² shapes
        let grid: Vec<f64> = (0..=n0)
            .map(|i| {
                let s = i as f64 / n0 as f64;
                let r = (hi / lo).abs();
                if lo > 0.0 && r > 10.0 {
                    lo * r.powf(s)
                } else {
                    lo + (hi - lo) * s
                }
            })
            .collect();
        let mut x = vec![grid[0]];
        let mut c = vec![0.0];
        let mut d = vec![f(grid[0])];
        let mut stack: Vec<f64> = grid[1..].iter().rev().copied().collect();
        while let Some(b) = stack.pop() {
            let a = *x.last().unwrap();
            let (ca, da) = (*c.last().unwrap(), *d.last().unwrap());
            let (v, _) = gk21(&mut f, a, b);
            let db = f(b);
            let m = 0.5 * (a + b);
            let (vm, _) = gk21(&mut f, a, m);
            let hi_err = (hermite(ca, ca + v, da, db, b - a, 0.5) - (ca + vm)).abs();
            if hi_err > 1e-12 * (ca + v).max(1e-300) && x.len() + stack.len() < 200_000 && b - a > 1e-12 * b.abs() {
                stack.push(b);
                stack.push(m);
                continue;
            }
            x.push(b);
            c.push(ca + v);
            d.push(db);
        }
        let total = *c.last().unwrap();
        if !total.is_finite() || total < 0.0 {
            return Err(Error::Numerical(format!("height density integrates to {total}")));
        }
        Ok(HeightLaw { x, c, d, total })
    }

    /// Height whose cumulative is `u · total`.
    pub fn quantile(&self, u: f64) -> f64 {
        let target = u * self.total;
        let i = self.c.partition_point(|&v| v <= target).clamp(1, self.c.len() - 1) - 1;
        let (a, b) = (self.x[i], self.x[i + 1]);
        let h = b - a;
        let (mut lo, mut hi) = (0.0, 1.0);
        let span = self.c[i + 1] - self.c[i];
        let mut s = if span > 0.0 { ((target - self.c[i]) / span).clamp(0.0, 1.0) } else { 0.5 };
        for _ in 0..60 {
            let v = hermite(self.c[i], self.c[i + 1], self.d[i], self.d[i + 1], h, s) - target;
            if v > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let dv = hermite_slope(self.c[i], self.c[i + 1], self.d[i], self.d[i + 1], h, s) * h;
            let mut next = if dv > 0.0 { s - v / dv } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - s).abs() < 1e-14;
            s = next;
            if done {
                break;
            }
        }
        a + s * h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSpike {
    pub time: f64,
    /// State at the tip: the spike covers [0, height] from 0 and [height, 1] from 1.
    pub height: f64,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSample {
    pub start_at_one: bool,
    pub jump_times: Vec<f64>,
    pub spikes: Vec<LimitSpike>,
    pub t_end: f64,
}

impl LimitSample {
    /// State of the jump chain just after time `t`.
    pub fn chain_state(&self, t: f64) -> bool {
        let n = self.jump_times.partition_point(|&s| s <= t);
        self.start_at_one ^ (n % 2 == 1)
    }
}

/// Rates, intensities and truncation of the limit process.
pub struct LimitSpec<F0, F1> {
    pub jump_rate_01: f64,
    pub jump_rate_10: f64,
    /// Density of spikes from 0 at tip height x, per unit time.
    pub intensity0: F0,
    /// Density of spikes from 1 at tip state x, per unit time.
    pub intensity1: F1,
    pub a_min: f64,
}

pub struct LimitSampler {
    rate01: f64,
    rate10: f64,
    law0: HeightLaw,
    law1: HeightLaw,
}

impl LimitSampler {
    pub fn new<F0: Fn(f64) -> f64, F1: Fn(f64) -> f64>(spec: LimitSpec<F0, F1>) -> Result<Self> {
        if !(spec.a_min > 0.0 && spec.a_min < 1.0) {
            return Err(Error::Argument(format!(
                "a_min = {} must lie in (0, 1): spike intensities are not integrable at the pointer",
                spec.a_min
            )));
        }
        if !(spec.jump_rate_01 >= 0.0 && spec.jump_rate_10 >= 0.0) {
            return Err(Error::Argument("jump rates must be non-negative".into()));
        }
        let law0 = HeightLaw::new(&spec.intensity0, spec.a_min, 1.0)?;
        let f1 = &spec.intensity1;
        // from 1 the height variable is 1 − x
        let law1 = HeightLaw::new(|y: f64| f1(1.0 - y), spec.a_min, 1.0)?;
        Ok(LimitSampler { rate01: spec.jump_rate_01, rate10: spec.jump_rate_10, law0, law1 })
    }

    /// Total spike rate with tips beyond `a_min`, from 0 and from 1.
    pub fn spike_rates(&self) -> (f64, f64) {
        (self.law0.total, self.law1.total)
    }

    pub fn sample(&self, t_end: f64, start_at_one: bool, stream: RngStream) -> LimitSample {
        let mut rng = stream.generator();
        let mut out = LimitSample { start_at_one, jump_times: Vec::new(), spikes: Vec::new(), t_end };
        let mut t = 0.0;
        let mut at_one = start_at_one;
        while t < t_end {
            let (jr, law, side) = if at_one {
                (self.rate10, &self.law1, Side::Far)
            } else {
                (self.rate01, &self.law0, Side::Spiking)
            };
            let e: f64 = rng.sample(Exp1);
            let dwell_end = if jr > 0.0 { (t + e / jr).min(t_end) } else { t_end };
            // spikes during the dwell: homogeneous Poisson in time
            if law.total > 0.0 {
                let mut s = t;
                loop {
                    let e2: f64 = rng.sample(Exp1);
                    s += e2 / law.total;
                    if s >= dwell_end {
                        break;
                    }
                    let y = law.quantile(rng.random::<f64>());
                    let height = if at_one { 1.0 - y } else { y };
                    out.spikes.push(LimitSpike { time: s, height, side });
                }
            }
            if dwell_end >= t_end {
                break;
            }
            t = dwell_end;
            out.jump_times.push(t);
            at_one = !at_one;
        }
        out
    }
}
