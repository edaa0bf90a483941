//! Ensemble execution. Trajectory i always uses `RngStream(seed, i)` and
//! results are collected in index order, so every number is independent of
//! the worker count.

use std::time::Instant;

use rayon::prelude::*;

use spikes_core::oracle::spike_intensity;
use spikes_core::pdmp::sim::max_step_probability;
use spikes_core::pdmp::{run_euler, run_exact};
use spikes_core::rng::RngStream;
use spikes_core::stats::{
    box_count, CountStats, OutcomeBuilder, Side, SpaceTimeBox, StopRule, Tip, TipFilter, TrajectoryOutcome,
};

use crate::config::{BoxSpec, ExperimentConfig, MethodChoice, ModelSpec};
use crate::error::{HarnessError, Result};
use crate::output::ResultRow;
use crate::setup::{build, Built, Engine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// 0 lets rayon decide.
    pub workers: usize,
    pub timing: bool,
}

/// Maps `f` over `0..n` on `workers` threads, keeping index order.
pub fn par_map<T, F>(n: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// Euler step rule: min(1e-5, 0.01 / sup total rate).
pub fn default_dt(engine: &Engine, gamma: f64) -> f64 {
    let sup = match engine {
        Engine::Scalar { model, .. } => max_step_probability(model, 1.0),
        // the Bloch click rate γη(1 − q) is at most γ
        Engine::Bloch(_) => gamma,
    };
    if sup > 0.0 {
        (0.01 / sup).min(1e-5)
    } else {
        1e-5
    }
}

/// Everything a trajectory run needs besides the model.
#[derive(Debug, Clone, Copy)]
pub struct Plan {
    pub t_end: f64,
    pub eps_jump: f64,
    pub method: MethodChoice,
    pub dt: f64,
    pub seed: u64,
    pub filter: TipFilter,
    pub stop: StopRule,
}

impl Plan {
    /// Tip filter and stop rule covering `boxes`.
    pub fn for_boxes(boxes: &[SpaceTimeBox], t_end: f64, eps_jump: f64, method: MethodChoice, dt: f64, seed: u64) -> Self {
        let lo = boxes.iter().map(|b| b.a).fold(f64::INFINITY, f64::min);
        let hi = boxes.iter().map(|b| b.b).fold(f64::NEG_INFINITY, f64::max);
        let t0 = boxes.iter().map(|b| b.t0).fold(f64::INFINITY, f64::min);
        Plan {
            t_end,
            eps_jump,
            method,
            dt,
            seed,
            filter: TipFilter { lo, hi, t_max: t_end },
            stop: StopRule::JumpAfter(t0),
        }
    }
}

/// One trajectory, reduced to its outcome.
pub fn trajectory(built: &Built, plan: &Plan, index: u64) -> Result<TrajectoryOutcome> {
    let mut rng = RngStream::new(plan.seed, index).generator();
    match &built.engine {
        Engine::Scalar { model, rule, x0 } => {
            let mut b = OutcomeBuilder::new(model, *x0, *rule, plan.eps_jump, plan.filter, plan.stop)?;
            match plan.method {
                MethodChoice::Exact => run_exact(model, *x0, plan.t_end, &mut rng, &mut b)?,
                MethodChoice::Euler => run_euler(model, *x0, plan.dt, plan.t_end, &mut rng, &mut b)?,
            };
            Ok(b.finish()?)
        }
        Engine::Bloch(model) => {
            let level = 1.0 - plan.eps_jump;
            let mut jump_time = None;
            let mut tips = Vec::new();
            let mut clicks = 0u64;
            model.run_euler(
                [0.0; 3],
                plan.dt,
                plan.t_end,
                &mut rng,
                |t, s| {
                    if jump_time.is_none() && s[0] >= level {
                        jump_time = Some(t);
                    }
                },
                |c| {
                    clicks += 1;
                    let tip = Tip { time: c.time, state: c.pre_state[0], side: Side::Spiking };
                    if plan.filter.keeps(&tip) {
                        tips.push(tip);
                    }
                },
            )?;
            Ok(TrajectoryOutcome { tips, jump_time, t_end: plan.t_end, initial_state: 0.0, clicks })
        }
    }
}

/// Per trajectory: the count in each box, `None` where the no-jump
/// conditioning rejects it.
pub type BoxCounts = Vec<Option<u64>>;

pub fn reduce(o: &TrajectoryOutcome, boxes: &[SpaceTimeBox]) -> BoxCounts {
    boxes.iter().map(|bx| bx.admits(o).then(|| box_count(o, bx, Side::Spiking))).collect()
}

pub fn ensemble_counts(built: &Built, plan: &Plan, boxes: &[SpaceTimeBox], n: u64, workers: usize) -> Result<Vec<BoxCounts>> {
    par_map(n, workers, |i| Ok(reduce(&trajectory(built, plan, i)?, boxes)))
}

/// Counts of box `k` over the admitted trajectories, in index order.
pub fn column(counts: &[BoxCounts], k: usize) -> Vec<u64> {
    counts.iter().filter_map(|c| c[k]).collect()
}

fn space_time_boxes(specs: &[BoxSpec]) -> Result<Vec<SpaceTimeBox>> {
    specs.iter().map(|b| Ok(SpaceTimeBox::new(b.t0, b.t1, b.a, b.b)?)).collect()
}

/// Rows for one (model, γ) block.
fn block(cfg: &ExperimentConfig, model: &ModelSpec, gamma: f64, seed: u64, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    let built = build(model, gamma)?;
    let specs = cfg.all_boxes();
    let boxes = space_time_boxes(&specs)?;
    let method = cfg.method();
    let dt = cfg.dt.unwrap_or_else(|| default_dt(&built.engine, gamma));
    let plan = Plan::for_boxes(&boxes, cfg.t_end(), cfg.eps_jump, method, dt, seed);
    if cfg.n_realizations == 0 {
        return Ok(Vec::new());
    }
    let start = Instant::now();
    let counts = ensemble_counts(&built, &plan, &boxes, cfg.n_realizations, opts.workers)?;
    let wall = opts.timing.then(|| start.elapsed().as_secs_f64());
    let mut rows = Vec::with_capacity(boxes.len());
    for (k, bx) in boxes.iter().enumerate() {
        let stats = CountStats::from_counts(cfg.n_realizations, &column(&counts, k))?;
        let lambda = built.intensity.as_ref().and_then(|s| spike_intensity(s, bx.a, bx.b).ok());
        rows.push(ResultRow::new(&built, gamma, bx, &stats, lambda, seed, method, wall));
    }
    Ok(rows)
}

/// Runs every γ of the config; `seed` overrides the config's master seed.
pub fn run(cfg: &ExperimentConfig, seed: Option<u64>, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let seed = seed.unwrap_or(cfg.master_seed);
    let mut rows = Vec::new();
    for &g in &cfg.gammas {
        rows.extend(block(cfg, &cfg.model, g, seed, opts)?);
    }
    Ok(rows)
}

/// Unitary model with k = √ω γ^α for every (α, γ) pair.
pub fn sweep_alpha(cfg: &ExperimentConfig, seed: Option<u64>, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let ModelSpec::Unitary { omega, .. } = cfg.model else {
        return Err(HarnessError::Config("sweep-alpha needs the unitary model".into()));
    };
    if cfg.alphas.is_empty() {
        return Err(HarnessError::Config("sweep-alpha needs a non-empty `alphas` list".into()));
    }
    let seed = seed.unwrap_or(cfg.master_seed);
    let mut rows = Vec::new();
    for &alpha in &cfg.alphas {
        let model = ModelSpec::Unitary { omega, alpha: Some(alpha) };
        for &g in &cfg.gammas {
            rows.extend(block(cfg, &model, g, seed, opts)?);
        }
    }
    Ok(rows)
}
