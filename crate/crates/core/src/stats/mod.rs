//! Observables of trajectories: pre-spike tips, jump times, conditioned box
//! counts, and the limiting spike process.

pub mod boxes;
pub mod limit;
pub mod moments;
pub mod outcome;
pub mod passage;

pub use boxes::{box_count, conditioned_box_stats, conditioned_counts, CountStats, SpaceTimeBox};
pub use limit::{LimitSample, LimitSampler, LimitSpec, LimitSpike};
pub use moments::Moments;
pub use outcome::{
    detect_jump, extract_prespikes, outcome_from_log, OutcomeBuilder, Side, StopRule, Tip, TipFilter, TipRule,
    TrajectoryOutcome,
};
pub use passage::{first_passage_stats, passage_stats, PassageStats};
