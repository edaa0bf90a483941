//! Space-time box counts of tips, conditioned on no jump in the time window.

use crate::error::{Error, Result};
use crate::stats::moments::Moments;
use crate::stats::outcome::{Side, TrajectoryOutcome};

/// The open window (t0, t1) × (a, b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeBox {
    pub t0: f64,
    pub t1: f64,
    pub a: f64,
    pub b: f64,
}

impl SpaceTimeBox {
    /// `a == b` is allowed and gives the empty box.
    pub fn new(t0: f64, t1: f64, a: f64, b: f64) -> Result<Self> {
        if !(t0 < t1) {
            return Err(Error::Argument(format!("box needs t0 < t1, got ({t0}, {t1})")));
        }
        if !(a <= b) {
            return Err(Error::Argument(format!("box needs a <= b, got ({a}, {b})")));
        }
        Ok(SpaceTimeBox { t0, t1, a, b })
    }

    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    #[inline]
    pub fn contains(&self, t: f64, x: f64) -> bool {
        t > self.t0 && t < self.t1 && x > self.a && x < self.b
    }

    /// No-jump conditioning: the first jump does not fall inside (t0, t1).
    pub fn admits(&self, o: &TrajectoryOutcome) -> bool {
        !matches!(o.jump_time, Some(tj) if tj > self.t0 && tj < self.t1)
    }
}

/// Number of tips from `side` inside the box.
pub fn box_count(o: &TrajectoryOutcome, bx: &SpaceTimeBox, side: Side) -> u64 {
    o.tips.iter().filter(|t| t.side == side && bx.contains(t.time, t.state)).count() as u64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountStats {
    pub n_traj_total: u64,
    pub n_traj_conditioned: u64,
    pub mean: f64,
    pub variance: f64,
    pub sem_mean: f64,
    pub sem_variance: f64,
    pub dispersion: f64,
    pub sem_dispersion: f64,
}

impl CountStats {
    pub fn from_counts(n_total: u64, counts: &[u64]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Statistics(
                "no trajectory survives the no-jump conditioning; increase the number of realizations".into(),
            ));
        }
        let m = Moments::from_counts(counts);
        Ok(CountStats {
            n_traj_total: n_total,
            n_traj_conditioned: counts.len() as u64,
            mean: m.mean,
            variance: m.variance,
            sem_mean: m.sem_mean(),
            sem_variance: m.sem_variance(),
            dispersion: m.dispersion(),
            sem_dispersion: m.sem_dispersion(),
        })
    }

    /// Mean and variance per unit time with their errors, as `(mean, sem, var, sem_var)`.
    pub fn per_time(&self, duration: f64) -> (f64, f64, f64, f64) {
        (self.mean / duration, self.sem_mean / duration, self.variance / duration, self.sem_variance / duration)
    }
}

/// Counts per admitted trajectory, in ensemble order.
pub fn conditioned_counts(ensemble: &[TrajectoryOutcome], bx: &SpaceTimeBox, side: Side) -> Vec<u64> {
    ensemble.iter().filter(|o| bx.admits(o)).map(|o| box_count(o, bx, side)).collect()
}

/// Moments of the spiking-side box counts over trajectories without a jump in (t0, t1).
pub fn conditioned_box_stats(ensemble: &[TrajectoryOutcome], bx: &SpaceTimeBox) -> Result<CountStats> {
    for o in ensemble {
        if o.t_end < bx.t1 && o.jump_time.is_none() {
            return Err(Error::Argument(format!("trajectory ends at {} before the box end {}", o.t_end, bx.t1)));
        }
    }
    CountStats::from_counts(ensemble.len() as u64, &conditioned_counts(ensemble, bx, Side::Spiking))
}
