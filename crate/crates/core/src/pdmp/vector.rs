//! Euler/Bernoulli simulation for small vector-valued PDMPs.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

pub type VecFn<const D: usize> = Arc<dyn Fn(&[f64; D]) -> [f64; D] + Send + Sync>;
pub type VecRate<const D: usize> = Arc<dyn Fn(&[f64; D]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct VectorChannel<const D: usize> {
    pub label: String,
    pub rate: VecRate<D>,
    pub jump_map: VecFn<D>,
}

#[derive(Clone)]
pub struct VectorPdmp<const D: usize> {
    pub name: String,
    pub drift: VecFn<D>,
    pub channels: Vec<VectorChannel<D>>,
    /// Applied after every Euler step, e.g. to keep a state on its manifold.
    pub project: Option<VecFn<D>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorClick<const D: usize> {
    pub time: f64,
    pub channel: usize,
    pub pre_state: [f64; D],
    pub post_state: [f64; D],
}

impl<const D: usize> VectorPdmp<D> {
    /// Euler steps of size `dt` to `t_end`. `on_step(t, x)` sees the state after
    /// every step and `on_click` every click.
    pub fn run_euler<R, S, C>(&self, x0: [f64; D], dt: f64, t_end: f64, rng: &mut R, mut on_step: S, mut on_click: C) -> Result<[f64; D]>
    where
        R: Rng,
        S: FnMut(f64, &[f64; D]),
        C: FnMut(&VectorClick<D>),
    {
        if !(dt > 0.0) {
            return Err(Error::Argument(format!("Euler step {dt} must be positive")));
        }
        let steps = (t_end / dt - 1e-9).ceil().max(0.0) as u64;
        let mut x = x0;
        for n in 0..steps {
            let t = n as f64 * dt;
            let h = dt.min(t_end - t);
            let v = (self.drift)(&x);
            let mut base = x;
            for (k, c) in self.channels.iter().enumerate() {
                let p = (c.rate)(&x) * h;
                if p > 1.0 {
                    return Err(Error::StepSize(format!("click probability {p:.3} at state {x:?}")));
                }
                if rng.random::<f64>() < p {
                    base = (c.jump_map)(&x);
                    on_click(&VectorClick { time: t, channel: k, pre_state: x, post_state: base });
                    break;
                }
            }
            for i in 0..D {
                x[i] = base[i] + v[i] * h;
            }
            if let Some(p) = &self.project {
                x = p(&x);
            }
            on_step(t + h, &x);
        }
        Ok(x)
    }
}
