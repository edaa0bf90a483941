//! JSON dumps of single trajectories and limit-process samples, read by the
//! plotting scripts.

use serde::Serialize;

use spikes_core::pdmp::{simulate_euler, simulate_exact, EventLog};
use spikes_core::rng::RngStream;
use spikes_core::stats::{LimitSample, LimitSampler, LimitSpec, Side};

use crate::config::MethodChoice;
use crate::error::{HarnessError, Result};
use crate::setup::{Built, Engine};

#[derive(Debug, Clone, Serialize)]
pub struct ClickRecord {
    pub time: f64,
    pub channel: usize,
    pub pre_state: f64,
    pub post_state: f64,
}

/// One trajectory: every click plus the state sampled on a uniform grid.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryDump {
    pub model: String,
    pub gamma: f64,
    pub method: MethodChoice,
    pub seed: u64,
    pub index: u64,
    pub initial_state: f64,
    pub final_state: f64,
    pub t_end: f64,
    pub clicks: Vec<ClickRecord>,
    pub path_t: Vec<f64>,
    pub path_x: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn trajectory_dump(
    built: &Built,
    gamma: f64,
    method: MethodChoice,
    dt: f64,
    t_end: f64,
    seed: u64,
    index: u64,
    grid: usize,
) -> Result<TrajectoryDump> {
    let Engine::Scalar { model, x0, .. } = &built.engine else {
        return Err(HarnessError::Config(format!("no event-log dump for {}", built.tag)));
    };
    let stream = RngStream::new(seed, index);
    let log: EventLog = match method {
        MethodChoice::Exact => simulate_exact(model, *x0, t_end, stream)?,
        MethodChoice::Euler => simulate_euler(model, *x0, dt, t_end, stream)?,
    };
    let n = grid.max(2);
    let path_t: Vec<f64> = (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect();
    let path_x = path_t.iter().map(|&t| log.state_at(model, t)).collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(TrajectoryDump {
        model: built.tag.clone(),
        gamma,
        method,
        seed,
        index,
        initial_state: log.initial_state,
        final_state: log.final_state,
        t_end: log.t_end,
        clicks: log
            .clicks
            .iter()
            .map(|c| ClickRecord { time: c.time, channel: c.channel, pre_state: c.pre_state, post_state: c.post_state })
            .collect(),
        path_t,
        path_x,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitSpikeRecord {
    pub time: f64,
    pub height: f64,
    /// "spiking" for spikes from 0, "far" for spikes from 1.
    pub side: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitDump {
    pub start_at_one: bool,
    pub t_end: f64,
    pub jump_times: Vec<f64>,
    pub spikes: Vec<LimitSpikeRecord>,
}

impl From<LimitSample> for LimitDump {
    fn from(s: LimitSample) -> Self {
        LimitDump {
            start_at_one: s.start_at_one,
            t_end: s.t_end,
            jump_times: s.jump_times,
            spikes: s
                .spikes
                .iter()
                .map(|p| LimitSpikeRecord {
                    time: p.time,
                    height: p.height,
                    side: match p.side {
                        Side::Spiking => "spiking",
                        Side::Far => "far",
                    },
                })
                .collect(),
        }
    }
}

/// Limit process of the resetting thermal model: telegraph jumps 0 ↔ 1 with
/// spike tips of density W₋₊/x² from 0 and W₊₋/(1 − x)² from 1.
pub fn thermal_limit_sample(
    w_minus_plus: f64,
    w_plus_minus: f64,
    a_min: f64,
    t_end: f64,
    start_at_one: bool,
    stream: RngStream,
) -> Result<LimitDump> {
    let sampler = LimitSampler::new(LimitSpec {
        jump_rate_01: w_minus_plus,
        jump_rate_10: w_plus_minus,
        intensity0: move |x: f64| w_minus_plus / (x * x),
        intensity1: move |x: f64| w_plus_minus / ((1.0 - x) * (1.0 - x)),
        a_min,
    })?;
    Ok(sampler.sample(t_end, start_at_one, stream).into())
}
