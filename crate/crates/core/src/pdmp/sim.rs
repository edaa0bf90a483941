//! Trajectory simulation: the event-driven exact method and the first-order
//! Euler/Bernoulli method.

use std::ops::ControlFlow;

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::pdmp::model::PdmpModel;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickEvent {
    pub time: f64,
    /// Index into the model's channel list.
    pub channel: usize,
    pub pre_state: f64,
    pub post_state: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Euler,
    Exact,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Euler => "euler",
            Method::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub initial_state: f64,
    pub t_end: f64,
    pub clicks: Vec<ClickEvent>,
    pub method: Method,
    pub final_state: f64,
}

/// Receives clicks as they are generated. Returning `Break` ends the
/// trajectory early.
pub trait Observer {
    fn click(&mut self, ev: &ClickEvent) -> ControlFlow<()>;
    fn end(&mut self, _t: f64, _state: f64) {}
}

impl<F: FnMut(&ClickEvent) -> ControlFlow<()>> Observer for F {
    fn click(&mut self, ev: &ClickEvent) -> ControlFlow<()> {
        self(ev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunEnd {
    /// Time the run stopped: `t_end`, or the last click time when stopped early.
    pub time: f64,
    pub state: f64,
    pub clicks: u64,
    pub stopped_early: bool,
    /// Largest per-step click probability seen (Euler only).
    pub max_bernoulli: f64,
}

#[inline]
fn pick_channel<R: Rng>(model: &PdmpModel, x: f64, rng: &mut R) -> usize {
    let n = model.channels.len();
    if n == 1 {
        return 0;
    }
    let mut rates = [0.0f64; 8];
    let mut total = 0.0;
    for (k, c) in model.channels.iter().enumerate().take(8) {
        rates[k] = (c.rate)(x).max(0.0);
        total += rates[k];
    }
    if total <= 0.0 {
        return 0;
    }
    let mut u = rng.random::<f64>() * total;
    for (k, r) in rates.iter().enumerate().take(n) {
        if u < *r {
            return k;
        }
        u -= r;
    }
    n - 1
}

/// Event-driven exact simulation, streaming clicks into `obs`.
pub fn run_exact<O: Observer, R: Rng>(
    model: &PdmpModel,
    x0: f64,
    t_end: f64,
    rng: &mut R,
    obs: &mut O,
) -> Result<RunEnd> {
    if !(t_end >= 0.0) {
        return Err(Error::Argument(format!("negative t_end {t_end}")));
    }
    if !model.domain.contains(x0) {
        return Err(Error::Domain(format!("initial state {x0} outside the domain of {}", model.name)));
    }
    if model.channels.len() > 8 {
        return Err(Error::Unsupported("more than 8 channels".into()));
    }
    let tables = model.reset_tables()?;
    let mut t = 0.0;
    let mut x = x0;
    let mut clicks = 0u64;
    loop {
        let e: f64 = rng.sample(Exp1);
        let next = match PdmpModel::table_for(tables, x) {
            Some(tab) => tab.sample(e),
            None => model.click_time_for_hazard(x, e)?,
        };
        let Some((dt, pre)) = next else { break };
        if !(dt >= 0.0) {
            return Err(Error::Numerical(format!("invalid click time {dt} from state {x}")));
        }
        if t + dt >= t_end {
            break;
        }
        t += dt;
        let k = pick_channel(model, pre, rng);
        let post = model.channels[k].jump_map.apply(pre);
        clicks += 1;
        let ev = ClickEvent { time: t, channel: k, pre_state: pre, post_state: post };
        if obs.click(&ev).is_break() {
            return Ok(RunEnd { time: t, state: post, clicks, stopped_early: true, max_bernoulli: 0.0 });
        }
        x = post;
    }
    let rest = t_end - t;
    let fin = match PdmpModel::table_for(tables, x) {
        Some(tab) => tab.state_at(rest),
        None => model.flow(x, rest)?,
    };
    obs.end(t_end, fin);
    Ok(RunEnd { time: t_end, state: fin, clicks, stopped_early: false, max_bernoulli: 0.0 })
}

/// Largest `dt · Σ rates` over a grid of the domain.
pub fn max_step_probability(model: &PdmpModel, dt: f64) -> f64 {
    let n = 1024;
    (0..=n)
        .map(|i| model.domain.lo + model.domain.width() * i as f64 / n as f64)
        .map(|x| model.total_rate(x) * dt)
        .fold(0.0, f64::max)
}

/// First-order Euler/Bernoulli simulation. A step that fires channel k goes
/// to `jump_map_k(x) + drift(x)·dt`; the recorded click carries the state
/// just before and just after the jump, time stamped at the step start.
pub fn run_euler<O: Observer, R: Rng>(
    model: &PdmpModel,
    x0: f64,
    dt: f64,
    t_end: f64,
    rng: &mut R,
    obs: &mut O,
) -> Result<RunEnd> {
    if !(dt > 0.0) {
        return Err(Error::Argument(format!("Euler step {dt} must be positive")));
    }
    let p_max = max_step_probability(model, dt);
    if p_max > 1.0 {
        return Err(Error::StepSize(format!("dt = {dt:e} gives click probability {p_max:.3} per step")));
    }
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as u64;
    let mut x = x0;
    let mut clicks = 0u64;
    let mut max_b = 0.0f64;
    for n in 0..steps {
        let t = n as f64 * dt;
        let h = dt.min(t_end - t);
        let v = (model.drift)(x);
        let mut fired = None;
        for (k, c) in model.channels.iter().enumerate() {
            let p = (c.rate)(x) * h;
            if p > 1.0 {
                return Err(Error::StepSize(format!("click probability {p:.3} at state {x} (t = {t:e})")));
            }
            max_b = max_b.max(p);
            if rng.random::<f64>() < p {
                fired = Some(k);
                break;
            }
        }
        match fired {
            Some(k) => {
                let post = model.channels[k].jump_map.apply(x);
                clicks += 1;
                let ev = ClickEvent { time: t, channel: k, pre_state: x, post_state: post };
                if obs.click(&ev).is_break() {
                    return Ok(RunEnd { time: t, state: post, clicks, stopped_early: true, max_bernoulli: max_b });
                }
                x = post + v * h;
            }
            None => x += v * h,
        }
    }
    obs.end(t_end, x);
    Ok(RunEnd { time: t_end, state: x, clicks, stopped_early: false, max_bernoulli: max_b })
}

fn collect(
    x0: f64,
    t_end: f64,
    method: Method,
    run: impl FnOnce(&mut Vec<ClickEvent>) -> Result<RunEnd>,
) -> Result<EventLog> {
    let mut clicks = Vec::new();
    let end = run(&mut clicks)?;
    Ok(EventLog { initial_state: x0, t_end, clicks, method, final_state: end.state })
}

pub fn simulate_exact(model: &PdmpModel, x0: f64, t_end: f64, stream: RngStream) -> Result<EventLog> {
    let mut rng = stream.generator();
    collect(x0, t_end, Method::Exact, |clicks| {
        run_exact(model, x0, t_end, &mut rng, &mut |ev: &ClickEvent| {
            clicks.push(*ev);
            ControlFlow::Continue(())
        })
    })
}

pub fn simulate_euler(model: &PdmpModel, x0: f64, dt: f64, t_end: f64, stream: RngStream) -> Result<EventLog> {
    let mut rng = stream.generator();
    collect(x0, t_end, Method::Euler, |clicks| {
        run_euler(model, x0, dt, t_end, &mut rng, &mut |ev: &ClickEvent| {
            clicks.push(*ev);
            ControlFlow::Continue(())
        })
    })
}

impl EventLog {
    /// State at time `t`, rebuilt from the last click before `t` and the flow.
    pub fn state_at(&self, model: &PdmpModel, t: f64) -> Result<f64> {
        let i = self.clicks.partition_point(|c| c.time <= t);
        if i == 0 {
            model.flow(self.initial_state, t)
        } else {
            let c = &self.clicks[i - 1];
            model.flow(c.post_state, t - c.time)
        }
    }
}
