//! Completion-based unbounded minimax search.
//!
//! A [`TranspositionTable`] maps every known state to a [`NodeRecord`]
//! holding the heuristic value `v`, the completion value `c` and the
//! resolution flag `r`. [`Engine::iterate`] performs one iteration of the
//! generalised algorithm: it walks a line of unresolved states chosen by a
//! [`SearchPolicy`], extends states it has not explored yet, and backs up
//! `(c, v, r)` along the line on the way back.

mod baseline;
mod engine;
mod table;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

pub use baseline::NoCompletionEngine;
pub use engine::{Engine, IterationReport};
pub use table::{NodeId, NodeRecord, SnapshotLine, TranspositionTable};

/// How a non-terminal state becomes resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ResolutionRule {
    /// Resolved when all children are resolved or the best child is a
    /// resolved win for the mover.
    #[default]
    Weak,
    /// Resolved only when all children are resolved (no winning-child
    /// shortcut); drives the search to a strong solution.
    Strong,
}

/// Which child [`Engine::decide`] returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecisionMode {
    /// Lexicographically best `(c, v)` child.
    Best,
    /// Most selected child among those sharing the best completion value.
    Safe,
}

/// Stopping rule for [`Engine::search`]. `None` means unlimited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub iterations: Option<u64>,
    pub wall_clock: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn iterations(n: u64) -> Self {
        Budget {
            iterations: Some(n),
            wall_clock: None,
        }
    }

    pub fn millis(ms: u64) -> Self {
        Budget {
            iterations: None,
            wall_clock: Some(Duration::from_millis(ms)),
        }
    }

    pub fn is_unlimited(&self) -> bool {
        self.iterations.is_none() && self.wall_clock.is_none()
    }
}

/// Result of [`Engine::search`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub root: String,
    pub resolved: bool,
    pub c_root: i8,
    pub v_root: f64,
    pub iterations: u64,
    pub states_added: usize,
    pub budget_exhausted: bool,
}

/// Read-only view handed to a policy while the engine walks a line of play.
pub struct DescentContext<'a, V: Scalar> {
    pub table: &'a TranspositionTable<V>,
    pub node: NodeId,
    /// Number of states on the current line, counting the root as 1.
    pub depth: usize,
    /// True if `node` was extended during this visit.
    pub just_extended: bool,
}

/// The two abstract behaviours that select a member of the algorithm class.
///
/// The engine only asks [`SearchPolicy::continue_descent`] right after a
/// state has been extended; on already explored states it always descends.
pub trait SearchPolicy<V: Scalar> {
    fn name(&self) -> String;

    /// Keep going deeper after extending `ctx.node`?
    fn continue_descent(&mut self, ctx: &DescentContext<'_, V>) -> bool;

    /// Pick the child to descend into; must be an element of `unresolved`.
    fn priority_child(&mut self, ctx: &DescentContext<'_, V>, unresolved: &[NodeId]) -> NodeId;
}
