//! Unbounded minimax-based game-tree search with completion.
//!
//! The crate is organised bottom-up:
//!
//! * [`game`]: the two-player perfect-information game interface and the
//!   built-in desk-scale games (Nim, Tic-Tac-Toe, Connect-k, random layered
//!   DAGs, explicit JSON games).
//! * [`eval`]: terminal evaluators (`f_t`) and heuristic evaluators used to
//!   initialise the heuristic value of freshly created records.
//! * [`search`]: the transposition table, the completion backups and the
//!   generalised iteration parameterised by a [`SearchPolicy`].
//! * [`policy`]: concrete class members (UBFM, Descent, epsilon-greedy,
//!   depth-capped, random child) and the no-completion baseline.
//! * [`oracle`]: an exhaustive memoized minimax that shares no code with the
//!   engine, plus the strong-solve mode and golden files.
//! * [`harness`]: invariant auditing, tournaments, statistics and the
//!   interactive play loop used by the `umm` binary.
//!
//! Everything that stores heuristic values is generic over a [`Scalar`]
//! (`f32` or `f64`). The aliases below fix the scalar to `f64`, which is what
//! the harness and the CLI use.

pub mod error;
pub mod eval;
pub mod game;
pub mod harness;
pub mod oracle;
pub mod policy;
pub mod scalar;
pub mod search;

pub use error::{Error, Result};
pub use eval::Evaluator;
pub use game::{Game, Payoff, Player, StateKey};
pub use policy::PolicySpec;
pub use scalar::Scalar;
pub use search::{
    Budget, DecisionMode, Engine, NodeId, NodeRecord, ResolutionRule, SearchOutcome, SearchPolicy,
    TranspositionTable,
};

/// Node record holding `f64` heuristic values.
pub type Record = NodeRecord<f64>;
/// Node record holding `f32` heuristic values.
pub type Record32 = NodeRecord<f32>;
/// Transposition table holding `f64` heuristic values.
pub type Table = TranspositionTable<f64>;
/// Transposition table holding `f32` heuristic values.
pub type Table32 = TranspositionTable<f32>;
/// Search engine over `f64` heuristic values.
pub type Searcher<'g> = Engine<'g, f64>;
/// Search engine over `f32` heuristic values.
pub type Searcher32<'g> = Engine<'g, f32>;
