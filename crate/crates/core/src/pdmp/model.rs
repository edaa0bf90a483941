use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::numerics::ode::{self, Tolerance};
use crate::numerics::roots;
use crate::pdmp::table::FlowTable;

pub type StateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// `(x0, dt) -> value`
pub type FlowFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// `(x0, c) -> time for the no-click flow from x0 to reach c`
pub type LevelFn = Arc<dyn Fn(f64, f64) -> Option<f64> + Send + Sync>;

pub fn state_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> StateFn {
    Arc::new(f)
}

#[derive(Clone)]
pub enum JumpMap {
    /// Every pre-click state goes to this point.
    Reset(f64),
    Map(StateFn),
}

impl JumpMap {
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            JumpMap::Reset(r) => *r,
            JumpMap::Map(f) => f(x),
        }
    }

    pub fn reset_point(&self) -> Option<f64> {
        match self {
            JumpMap::Reset(r) => Some(*r),
            JumpMap::Map(_) => None,
        }
    }
}

#[derive(Clone)]
pub struct PoissonChannel {
    pub label: String,
    pub rate: StateFn,
    pub jump_map: JumpMap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

/// Where the far pointer state is declared reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpLevel {
    /// A fixed crossing level the flow reaches in finite time; eps is ignored.
    Crossing(f64),
    /// `far ∓ eps`, for flows that only approach the far pointer.
    NearFar,
}

/// The two pointer states between which a model jumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pointers {
    pub spiking: f64,
    pub far: f64,
    pub level: JumpLevel,
}

impl Pointers {
    pub fn jump_level(&self, eps: f64) -> f64 {
        match self.level {
            JumpLevel::Crossing(c) => c,
            JumpLevel::NearFar => {
                if self.far > self.spiking {
                    self.far - eps
                } else {
                    self.far + eps
                }
            }
        }
    }

    /// True when `x` lies at or past `level` when moving towards the far pointer.
    #[inline]
    pub fn beyond(&self, x: f64, level: f64) -> bool {
        if self.far > self.spiking {
            x >= level
        } else {
            x <= level
        }
    }
}

/// A one-dimensional PDMP: deterministic drift between clicks of one or more
/// state-dependent Poisson channels.
#[derive(Clone)]
pub struct PdmpModel {
    pub name: String,
    pub drift: StateFn,
    pub channels: Vec<PoissonChannel>,
    pub domain: Domain,
    pub closed_flow: Option<FlowFn>,
    /// Natural log of the no-click probability.
    pub closed_log_survival: Option<FlowFn>,
    pub closed_level_time: Option<LevelFn>,
    /// `(x0, e)` → time at which the integrated rate from `x0` reaches `e`
    /// (infinite if never); `None` from the closure defers to the generic path.
    pub closed_hazard_time: Option<LevelFn>,
    /// Stable fixed point of the no-click flow, when it is the same from every
    /// start in the domain.
    pub attractor: Option<f64>,
    pub pointers: Option<Pointers>,
    /// Index of the channel whose pre-click states are spike tips.
    pub spike_channel: Option<usize>,
    tables: OnceLock<Vec<Arc<FlowTable>>>,
}

impl fmt::Debug for PdmpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdmpModel")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("channels", &self.channels.iter().map(|c| c.label.as_str()).collect::<Vec<_>>())
            .field("closed", &self.closed_flow.is_some())
            .finish()
    }
}

const ODE_TOL: Tolerance = Tolerance { abs: 1e-13, rel: 1e-13 };

impl PdmpModel {
    pub fn new(name: impl Into<String>, drift: StateFn, channels: Vec<PoissonChannel>, domain: Domain) -> Self {
        PdmpModel {
            name: name.into(),
            drift,
            channels,
            domain,
            closed_flow: None,
            closed_log_survival: None,
            closed_level_time: None,
            closed_hazard_time: None,
            attractor: None,
            pointers: None,
            spike_channel: None,
            tables: OnceLock::new(),
        }
    }

    pub fn with_closed_forms(mut self, flow: FlowFn, log_survival: FlowFn, level: Option<LevelFn>) -> Self {
        self.closed_flow = Some(flow);
        self.closed_log_survival = Some(log_survival);
        self.closed_level_time = level;
        self
    }

    pub fn with_hazard_time(mut self, f: LevelFn) -> Self {
        self.closed_hazard_time = Some(f);
        self
    }

    pub fn with_attractor(mut self, x: f64) -> Self {
        self.attractor = Some(x);
        self
    }

    pub fn with_pointers(mut self, p: Pointers, spike_channel: usize) -> Self {
        self.pointers = Some(p);
        self.spike_channel = Some(spike_channel);
        self
    }

    #[inline]
    pub fn total_rate(&self, x: f64) -> f64 {
        self.channels.iter().map(|c| (c.rate)(x)).sum()
    }

    pub fn channel_index(&self, label: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.label == label)
    }

    fn check(&self, x0: f64, dt: f64) -> Result<()> {
        if !(dt >= 0.0) {
            return Err(Error::Argument(format!("negative duration {dt}")));
        }
        if !self.domain.contains(x0) {
            return Err(Error::Domain(format!(
                "state {x0} outside [{}, {}] of {}",
                self.domain.lo, self.domain.hi, self.name
            )));
        }
        Ok(())
    }

    /// No-click solution started at `x0` after `dt`.
    pub fn flow(&self, x0: f64, dt: f64) -> Result<f64> {
        self.check(x0, dt)?;
        if let Some(f) = &self.closed_flow {
            return Ok(self.domain.clamp(f(x0, dt)));
        }
        Ok(self.domain.clamp(self.numeric_flow(x0, dt)?[0]))
    }

    /// `[x(dt), ∫ total rate]` by direct integration of the augmented system.
    pub fn numeric_flow(&self, x0: f64, dt: f64) -> Result<[f64; 2]> {
        let drift = &self.drift;
        ode::solve(|y: &[f64; 2]| [drift(y[0]), self.total_rate(y[0])], [x0, 0.0], dt, ODE_TOL)
    }

    pub fn log_survival(&self, x0: f64, dt: f64) -> Result<f64> {
        self.check(x0, dt)?;
        if dt == 0.0 {
            return Ok(0.0);
        }
        if let Some(f) = &self.closed_log_survival {
            return Ok(f(x0, dt).min(0.0));
        }
        Ok(-self.numeric_flow(x0, dt)?[1].max(0.0))
    }

    /// Probability of no click in `dt` starting from `x0`.
    pub fn survival(&self, x0: f64, dt: f64) -> Result<f64> {
        Ok(self.log_survival(x0, dt)?.exp())
    }

    /// Stable fixed point reached by the no-click flow from `x0`.
    pub fn fixed_point_from(&self, x0: f64) -> f64 {
        if let Some(a) = self.attractor {
            return a;
        }
        let d0 = (self.drift)(x0);
        if d0 == 0.0 {
            return x0;
        }
        let edge = if d0 > 0.0 { self.domain.hi } else { self.domain.lo };
        let n = 4096;
        let mut prev = x0;
        for i in 1..=n {
            let x = x0 + (edge - x0) * i as f64 / n as f64;
            let d = (self.drift)(x);
            if d == 0.0 {
                return x;
            }
            if d.signum() != d0.signum() {
                return roots::bisect(|y| (self.drift)(y), prev, x, 1e-16).unwrap_or(x);
            }
            prev = x;
        }
        edge
    }

    /// Time for the no-click flow from `x0` to reach `c`, or `None` if it never does.
    pub fn level_time_from(&self, x0: f64, c: f64) -> Result<Option<f64>> {
        self.check(x0, 0.0)?;
        if x0 == c {
            return Ok(Some(0.0));
        }
        if let Some(f) = &self.closed_level_time {
            return Ok(f(x0, c));
        }
        if let Some(t) = self.reset_tables().ok().and_then(|ts| Self::table_for(ts, x0)).and_then(|tab| tab.time_to_state(c)) {
            return Ok(Some(t));
        }
        let fp = self.fixed_point_from(x0);
        let towards = (c - x0).signum() == (fp - x0).signum();
        let reachable = towards && (c - x0).abs() < (fp - x0).abs();
        if !reachable {
            return Ok(None);
        }
        let past = |t: f64| -> Result<bool> {
            let x = self.flow(x0, t)?;
            Ok(if c > x0 { x >= c } else { x <= c })
        };
        let rate = (self.drift)(x0).abs().max(1e-300);
        let mut hi = (c - x0).abs() / rate;
        let mut lo = 0.0;
        let mut guard = 0;
        while !past(hi)? {
            lo = hi;
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Ok(None);
            }
        }
        let t = roots::bisect(
            |t| {
                let x = self.flow(x0, t).unwrap_or(f64::NAN);
                if c > x0 {
                    x - c
                } else {
                    c - x
                }
            },
            lo,
            hi,
            1e-14,
        )?;
        Ok(Some(t))
    }

    /// Time-to-level from the model's spiking pointer state.
    pub fn time_to_level(&self, c: f64) -> Result<f64> {
        let p = self
            .pointers
            .ok_or_else(|| Error::Argument(format!("{} has no pointer states", self.name)))?;
        match self.level_time_from(p.spiking, c)? {
            Some(t) => Ok(t),
            None => Err(Error::Domain(format!("level {c} is not reachable from {} in {}", p.spiking, self.name))),
        }
    }

    /// Cached flow tables for the constant targets of resetting channels.
    pub fn reset_tables(&self) -> Result<&[Arc<FlowTable>]> {
        if let Some(t) = self.tables.get() {
            return Ok(t);
        }
        let mut points: Vec<f64> = Vec::new();
        for c in &self.channels {
            if let Some(r) = c.jump_map.reset_point() {
                if !points.contains(&r) {
                    points.push(r);
                }
            }
        }
        let mut built = Vec::new();
        for p in points {
            built.push(Arc::new(FlowTable::build(self, p)?));
        }
        let _ = self.tables.set(built);
        Ok(self.tables.get().unwrap())
    }

    #[inline]
    pub(crate) fn table_for(tables: &[Arc<FlowTable>], x: f64) -> Option<&FlowTable> {
        tables.iter().find(|t| t.x0 == x).map(|t| t.as_ref())
    }

    /// Solves `∫₀^Δt total rate(flow) = e` for Δt. Closed-form models use a
    /// bracketed Newton/bisection on the closed survival with an exponential
    /// tail past the fixed-point cutoff; others build a flow table on the fly.
    /// Returns `None` when no click ever happens.
    pub fn click_time_for_hazard(&self, x0: f64, e: f64) -> Result<Option<(f64, f64)>> {
        if let Some(t) = self.reset_tables().ok().and_then(|ts| Self::table_for(ts, x0)) {
            return Ok(t.sample(e));
        }
        if let (Some(h), Some(flow)) = (&self.closed_hazard_time, &self.closed_flow) {
            if let Some(t) = h(x0, e) {
                return Ok(t.is_finite().then(|| (t, self.domain.clamp(flow(x0, t)))));
            }
        }
        match (&self.closed_flow, &self.closed_log_survival) {
            (Some(flow), Some(ls)) => self.closed_click_time(flow, ls, x0, e),
            _ => Ok(FlowTable::build(self, x0)?.sample(e)),
        }
    }

    fn closed_click_time(&self, flow: &FlowFn, ls: &FlowFn, x0: f64, e: f64) -> Result<Option<(f64, f64)>> {
        let fp = self.fixed_point_from(x0);
        let tol = 1e-12 * self.domain.width();
        let t_cut = self.cutoff_time(x0, fp, tol)?;
        let lam_cut = if t_cut > 0.0 { -ls(x0, t_cut) } else { 0.0 };
        if e >= lam_cut {
            let r = self.total_rate(fp);
            if r <= 0.0 {
                return Ok(None);
            }
            return Ok(Some((t_cut + (e - lam_cut) / r, fp)));
        }
        let r0 = self.total_rate(x0);
        let start = if r0 > 0.0 { 1.0 / r0 } else { t_cut * 1e-3 };
        let (lo, hi) = roots::expand_upper(|t| -ls(x0, t), e, start.min(t_cut), t_cut)?;
        let t = roots::newton_bracketed(
            |t| (-ls(x0, t), self.total_rate(flow(x0, t))),
            e,
            lo,
            hi,
            1e-13,
        );
        Ok(Some((t, self.domain.clamp(flow(x0, t)))))
    }

    /// First time the flow from `x0` is within `tol` of its fixed point `fp`.
    pub(crate) fn cutoff_time(&self, x0: f64, fp: f64, tol: f64) -> Result<f64> {
        if (x0 - fp).abs() <= tol {
            return Ok(0.0);
        }
        let target = if x0 < fp { fp - tol } else { fp + tol };
        if let Some(lt) = &self.closed_level_time {
            if let Some(t) = lt(x0, target) {
                return Ok(t);
            }
        }
        let flow = |t: f64| self.flow(x0, t).unwrap_or(fp);
        let d0 = (self.drift)(x0).abs();
        let mut hi = if d0 > 0.0 { (fp - x0).abs() / d0 } else { 1.0 };
        let mut n = 0;
        while (flow(hi) - fp).abs() > tol {
            hi *= 2.0;
            n += 1;
            if n > 200 {
                return Err(Error::Numerical(format!("flow from {x0} does not settle at {fp}")));
            }
        }
        roots::bisect(|t| (flow(t) - fp).abs() - tol, 0.0, hi, 1e-14)
    }

    /// Click time for a uniform draw `u`: the Δt with survival(x0, Δt) = u.
    /// Infinite when the click never comes.
    pub fn sample_click_time(&self, x0: f64, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Argument(format!("uniform draw {u} outside (0,1)")));
        }
        self.check(x0, 0.0)?;
        Ok(self.click_time_for_hazard(x0, -u.ln())?.map_or(f64::INFINITY, |c| c.0))
    }
}
