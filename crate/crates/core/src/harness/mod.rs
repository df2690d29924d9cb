//! Invariant auditing, tournaments and interactive play.

pub mod audit;
pub mod play;
pub mod stats;
pub mod tournament;

pub use audit::{
    audit_baseline_progress, audit_run, run_verify, AuditReport, BaselineProgress, VerifyMatrix,
    VerifyOptions, VerifyReport,
};
pub use play::play_session;
pub use stats::{bootstrap_ci, normal_ci, Interval};
pub use tournament::{
    run_tournament, EvaluatorSetSpec, MatchRecord, TournamentConfig, TournamentOutput,
    TournamentReport,
};
