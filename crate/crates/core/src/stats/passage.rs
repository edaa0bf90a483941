//! First-passage (jump) time statistics.

use crate::error::{Error, Result};
use crate::numerics::gof::ks_one_sample;
use crate::stats::moments::Moments;
use crate::stats::outcome::TrajectoryOutcome;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassageStats {
    pub n: usize,
    pub mean_jump_time: f64,
    pub sem: f64,
    /// KS p-value against an exponential law with the empirical mean.
    pub exp_fit_pvalue: f64,
}

pub const MIN_PASSAGES: usize = 100;

pub fn passage_stats(times: &[f64]) -> Result<PassageStats> {
    if times.len() < MIN_PASSAGES {
        return Err(Error::Statistics(format!(
            "only {} passages observed, need at least {MIN_PASSAGES}",
            times.len()
        )));
    }
    let m = Moments::from_values(times);
    let rate = 1.0 / m.mean;
    let ks = ks_one_sample(times, |t| if t <= 0.0 { 0.0 } else { -(-rate * t).exp_m1() });
    Ok(PassageStats { n: times.len(), mean_jump_time: m.mean, sem: m.sem_mean(), exp_fit_pvalue: ks.p_value })
}

/// Statistics of the jump times of an ensemble simulated until its first jump.
pub fn first_passage_stats(ensemble: &[TrajectoryOutcome]) -> Result<PassageStats> {
    let times: Vec<f64> = ensemble.iter().filter_map(|o| o.jump_time).collect();
    if times.len() < ensemble.len() {
        return Err(Error::Statistics(format!(
            "{} of {} trajectories ended without a jump; extend t_end",
            ensemble.len() - times.len(),
            ensemble.len()
        )));
    }
    passage_stats(&times)
}
