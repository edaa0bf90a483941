//! Pre-spike tips and jump times of single trajectories, either from a stored
//! [`EventLog`] or streamed while the trajectory is generated.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::pdmp::{ClickEvent, EventLog, Observer, PdmpModel, Pointers};

/// Which pointer state a spike starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// The model's spiking pointer (0 for q models, π for the angle).
    Spiking,
    /// The far pointer (1 for q models).
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tip {
    pub time: f64,
    pub state: f64,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOutcome {
    /// Time-ordered tips that passed the filter.
    pub tips: Vec<Tip>,
    /// First time the state reached the jump level, if it did before the run ended.
    pub jump_time: Option<f64>,
    /// Time the simulation stopped.
    pub t_end: f64,
    pub initial_state: f64,
    pub clicks: u64,
}

/// How tips are read off a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TipRule {
    /// Every click of this (resetting) channel is a tip at its pre-click state.
    Reset { channel: usize },
    /// For non-resetting models: a spike from 0 is an excursion above `floor`
    /// and its tip the highest state reached before the state falls back to
    /// `floor` or below; spikes from 1 mirror this below `1 − floor`.
    Excursion { floor: f64 },
}

impl TipRule {
    /// The natural rule for a model: reset tips when the spike channel resets.
    pub fn for_model(model: &PdmpModel, floor: f64) -> Result<TipRule> {
        let ch = model
            .spike_channel
            .ok_or_else(|| Error::Argument(format!("{} declares no spike channel", model.name)))?;
        Ok(match model.channels[ch].jump_map.reset_point() {
            Some(_) => TipRule::Reset { channel: ch },
            None => TipRule::Excursion { floor },
        })
    }
}

/// Keeps only tips that could land in some box of interest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipFilter {
    pub lo: f64,
    pub hi: f64,
    pub t_max: f64,
}

impl TipFilter {
    pub const ALL: TipFilter = TipFilter { lo: f64::NEG_INFINITY, hi: f64::INFINITY, t_max: f64::INFINITY };

    #[inline]
    pub fn keeps(&self, t: &Tip) -> bool {
        t.state > self.lo && t.state < self.hi && t.time < self.t_max
    }
}

/// One `(time, pre_state)` pair per click of the named channel.
pub fn extract_prespikes(log: &EventLog, model: &PdmpModel, reset_channel: &str) -> Result<Vec<(f64, f64)>> {
    let k = model
        .channel_index(reset_channel)
        .ok_or_else(|| Error::Argument(format!("{} has no channel {reset_channel:?}", model.name)))?;
    Ok(log.clicks.iter().filter(|c| c.channel == k).map(|c| (c.time, c.pre_state)).collect())
}

/// Time-to-level for segment starts, cached by exact start value since
/// resetting models restart every segment from the same few points.
struct LevelCache {
    level: f64,
    entries: Vec<(f64, Option<f64>)>,
}

impl LevelCache {
    fn new(level: f64) -> Self {
        LevelCache { level, entries: Vec::new() }
    }

    fn time_from(&mut self, model: &PdmpModel, x: f64, cache: bool) -> Result<Option<f64>> {
        if let Some(e) = self.entries.iter().find(|e| e.0 == x) {
            return Ok(e.1);
        }
        let t = model.level_time_from(x, self.level)?;
        if cache && self.entries.len() < 16 {
            self.entries.push((x, t));
        }
        Ok(t)
    }
}

fn pointers_of(model: &PdmpModel) -> Result<Pointers> {
    model.pointers.ok_or_else(|| Error::Argument(format!("{} declares no pointer states", model.name)))
}

/// First time a no-click segment reaches the jump level (θ = 0 for the angle
/// model, 1 − eps_jump for q models). A segment that starts at or beyond the
/// level counts as a jump at its start.
pub fn detect_jump(log: &EventLog, model: &PdmpModel, eps_jump: f64) -> Result<Option<f64>> {
    if !(eps_jump > 0.0) {
        return Err(Error::Argument(format!("eps_jump must be positive, got {eps_jump}")));
    }
    let p = pointers_of(model)?;
    let level = p.jump_level(eps_jump);
    let mut cache = LevelCache::new(level);
    let mut start = (0.0, log.initial_state);
    let ends = log.clicks.iter().map(|c| (c.time, Some(c.post_state))).chain(std::iter::once((log.t_end, None)));
    for (t_stop, post) in ends {
        let (ts, xs) = start;
        if p.beyond(xs, level) {
            return Ok(Some(ts));
        }
        if let Some(tau) = cache.time_from(model, xs, true)? {
            if ts + tau < t_stop {
                return Ok(Some(ts + tau));
            }
        }
        match post {
            Some(x) => start = (t_stop, x),
            None => break,
        }
    }
    Ok(None)
}

/// What ends a streamed trajectory early.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    Never,
    /// Stop at the first jump later than this time (earlier jumps do not
    /// affect conditioning on a window starting there).
    JumpAfter(f64),
}

/// Observer that builds a [`TrajectoryOutcome`] while the trajectory runs.
pub struct OutcomeBuilder<'m> {
    model: &'m PdmpModel,
    pointers: Pointers,
    rule: TipRule,
    filter: TipFilter,
    stop: StopRule,
    cache: LevelCache,
    level: f64,
    seg_start: (f64, f64),
    outcome: TrajectoryOutcome,
    // excursion bookkeeping
    at_far: bool,
    excursion: Option<(f64, f64)>,
    error: Option<Error>,
}

impl<'m> OutcomeBuilder<'m> {
    pub fn new(
        model: &'m PdmpModel,
        x0: f64,
        rule: TipRule,
        eps_jump: f64,
        filter: TipFilter,
        stop: StopRule,
    ) -> Result<Self> {
        if !(eps_jump > 0.0) {
            return Err(Error::Argument(format!("eps_jump must be positive, got {eps_jump}")));
        }
        let pointers = pointers_of(model)?;
        let level = pointers.jump_level(eps_jump);
        let at_far = pointers.beyond(x0, level);
        Ok(OutcomeBuilder {
            model,
            pointers,
            rule,
            filter,
            stop,
            cache: LevelCache::new(level),
            level,
            seg_start: (0.0, x0),
            outcome: TrajectoryOutcome {
                tips: Vec::new(),
                jump_time: if at_far { Some(0.0) } else { None },
                t_end: 0.0,
                initial_state: x0,
                clicks: 0,
            },
            at_far,
            excursion: None,
            error: None,
        })
    }

    pub fn finish(self) -> Result<TrajectoryOutcome> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.outcome),
        }
    }

    fn push_tip(&mut self, tip: Tip) {
        if self.filter.keeps(&tip) {
            self.outcome.tips.push(tip);
        }
    }

    /// Checks the segment from `seg_start` up to `t_stop` for a jump.
    fn check_segment(&mut self, t_stop: f64) -> Result<Option<f64>> {
        if self.outcome.jump_time.is_some() {
            return Ok(None);
        }
        let (ts, xs) = self.seg_start;
        let cache = matches!(self.rule, TipRule::Reset { .. });
        if let Some(tau) = self.cache.time_from(self.model, xs, cache)? {
            if ts + tau < t_stop {
                return Ok(Some(ts + tau));
            }
        }
        Ok(None)
    }

    fn on_jump(&mut self, t: f64) -> bool {
        self.outcome.jump_time = Some(t);
        self.at_far = true;
        // an excursion that turns into a jump is not a spike
        self.excursion = None;
        match self.stop {
            StopRule::JumpAfter(t0) => t > t0,
            StopRule::Never => false,
        }
    }

    fn excursion_step(&mut self, floor: f64, t: f64, pre: f64, post: f64) {
        let (height, post_h) = if self.at_far { (1.0 - pre, 1.0 - post) } else { (pre, post) };
        if height > floor {
            match &mut self.excursion {
                Some((tm, xm)) => {
                    if height > *xm {
                        *tm = t;
                        *xm = height;
                    }
                }
                None => self.excursion = Some((t, height)),
            }
        }
        if post_h <= floor {
            if let Some((tm, xm)) = self.excursion.take() {
                let (state, side) = if self.at_far { (1.0 - xm, Side::Far) } else { (xm, Side::Spiking) };
                self.push_tip(Tip { time: tm, state, side });
            }
        }
    }

    fn handle(&mut self, ev: &ClickEvent) -> Result<ControlFlow<()>> {
        self.outcome.clicks += 1;
        if let Some(tj) = self.check_segment(ev.time)? {
            if self.on_jump(tj) {
                self.outcome.t_end = tj;
                return Ok(ControlFlow::Break(()));
            }
        }
        match self.rule {
            TipRule::Reset { channel } => {
                if ev.channel == channel {
                    self.push_tip(Tip { time: ev.time, state: ev.pre_state, side: Side::Spiking });
                }
            }
            TipRule::Excursion { floor } => {
                self.excursion_step(floor, ev.time, ev.pre_state, ev.post_state);
                // returning to the spiking pointer ends the far phase
                if self.at_far && self.pointers.far > self.pointers.spiking && ev.post_state <= 1.0 - self.level {
                    self.at_far = false;
                    self.excursion = None;
                }
            }
        }
        if self.outcome.jump_time.is_none() && self.pointers.beyond(ev.post_state, self.level) {
            if self.on_jump(ev.time) {
                self.outcome.t_end = ev.time;
                return Ok(ControlFlow::Break(()));
            }
        }
        self.seg_start = (ev.time, ev.post_state);
        Ok(ControlFlow::Continue(()))
    }
}

impl Observer for OutcomeBuilder<'_> {
    fn click(&mut self, ev: &ClickEvent) -> ControlFlow<()> {
        match self.handle(ev) {
            Ok(c) => c,
            Err(e) => {
                self.error = Some(e);
                ControlFlow::Break(())
            }
        }
    }

    fn end(&mut self, t: f64, state: f64) {
        self.outcome.t_end = t;
        match self.check_segment(t) {
            Ok(Some(tj)) => {
                self.on_jump(tj);
            }
            Ok(None) => {}
            Err(e) => self.error = Some(e),
        }
        if let TipRule::Excursion { floor } = self.rule {
            // an excursion still open at the end is cut there
            let h = if self.at_far { 1.0 - state } else { state };
            if let Some((tm, xm)) = &mut self.excursion {
                if h > *xm {
                    *xm = h;
                    *tm = t;
                }
            }
            if let Some((tm, xm)) = self.excursion.take() {
                if xm > floor {
                    let (s, side) = if self.at_far { (1.0 - xm, Side::Far) } else { (xm, Side::Spiking) };
                    self.push_tip(Tip { time: tm, state: s, side });
                }
            }
        }
    }
}

/// Outcome of a stored log, the same as streaming it through [`OutcomeBuilder`].
pub fn outcome_from_log(log: &EventLog, model: &PdmpModel, rule: TipRule, eps_jump: f64) -> Result<TrajectoryOutcome> {
    let mut b = OutcomeBuilder::new(model, log.initial_state, rule, eps_jump, TipFilter::ALL, StopRule::Never)?;
    for c in &log.clicks {
        if b.click(c).is_break() {
            return b.finish();
        }
    }
    b.end(log.t_end, log.final_state);
    b.finish()
}
