//! Two-player perfect-information games.
//!
//! A game is a finite acyclic state graph. States are identified by a
//! canonical [`StateKey`], so two move orders that reach the same position
//! share one key and merge in the transposition table.

mod board;
mod explicit;
mod nim;
mod random;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use board::{ConnectK, TicTacToe};
pub use explicit::{trap_game, ExplicitGame, ExplicitNode, TRAP_GAME_JSON, TRAP_TABLE_JSON};
pub use nim::Nim;
pub use random::{generate_random_game, RandomGame, RandomGameSpec};

/// Canonical byte encoding of a state within one game.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(Vec<u8>);

impl StateKey {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        StateKey(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        hex::decode(s)
            .map(StateKey)
            .map_err(|e| Error::Configuration(format!("invalid hex state key `{s}`: {e}")))
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateKey({})", self.to_hex())
    }
}

/// Player 1 maximises, player 2 minimises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn is_maximizer(self) -> bool {
        self == Player::One
    }

    /// Completion value that is a win for this player.
    pub fn winning_value(self) -> i8 {
        match self {
            Player::One => 1,
            Player::Two => -1,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Player> {
        match n {
            1 => Some(Player::One),
            2 => Some(Player::Two),
            _ => None,
        }
    }
}

/// Terminal payoff for player 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Payoff {
    Loss = -1,
    Draw = 0,
    Win = 1,
}

impl Payoff {
    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn from_value(v: i8) -> Option<Payoff> {
        match v {
            -1 => Some(Payoff::Loss),
            0 => Some(Payoff::Draw),
            1 => Some(Payoff::Win),
            _ => None,
        }
    }

    /// Payoff of a game won by `winner`.
    pub fn won_by(winner: Player) -> Payoff {
        match winner {
            Player::One => Payoff::Win,
            Player::Two => Payoff::Loss,
        }
    }
}

/// Rules of a two-player perfect-information game.
///
/// Implementations must be pure: the same key always yields the same
/// successors (in the same order), mover, terminality and payoff. The
/// reachable graph from [`Game::initial_state`] must be finite and acyclic.
pub trait Game: Send + Sync {
    /// Canonical CLI name, e.g. `nim:21:1,2,3`.
    fn name(&self) -> String;

    fn initial_state(&self) -> StateKey;

    /// Children in the game's natural move order; empty iff terminal.
    fn successors(&self, s: &StateKey) -> Result<Vec<StateKey>>;

    fn mover(&self, s: &StateKey) -> Result<Player>;

    fn is_terminal(&self, s: &StateKey) -> Result<bool> {
        Ok(self.successors(s)?.is_empty())
    }

    /// Payoff for player 1; a contract violation on non-terminal states.
    fn payoff(&self, s: &StateKey) -> Result<Payoff>;

    /// Number of empty cells for board games, used by the margin evaluator.
    fn empty_cells(&self, _s: &StateKey) -> Option<u32> {
        None
    }

    /// Hand-written positional estimate for player 1 in `[-1, 1]`.
    fn material(&self, _s: &StateKey) -> f64 {
        0.0
    }

    fn render(&self, s: &StateKey) -> String {
        s.to_hex()
    }
}

pub(crate) fn not_terminal(s: &StateKey) -> Error {
    Error::ContractViolation(format!("payoff requested for non-terminal state {s}"))
}

/// Parses a game from its CLI name.
///
/// Accepted forms: `nim:<pile>:<t1,t2,..>`, `tictactoe`,
/// `connect:<cols>:<rows>:<k>`, `random:<seed>`, `random:<json>`, `trap`
/// and `file:<path.json>`.
pub fn parse_game(token: &str) -> Result<Arc<dyn Game>> {
    let bad = |reason: &str| Error::usage("game", token, reason);
    let (head, rest) = match token.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (token, None),
    };
    match (head, rest) {
        ("tictactoe", None) => Ok(Arc::new(TicTacToe::new())),
        ("trap", None) => Ok(Arc::new(trap_game())),
        ("nim", Some(rest)) => {
            let (pile, takes) = rest
                .split_once(':')
                .ok_or_else(|| bad("expected nim:<pile>:<takes>"))?;
            let pile: u32 = pile.parse().map_err(|_| bad("pile is not an integer"))?;
            let takes = takes
                .split(',')
                .map(|t| t.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad("take set must be comma-separated integers"))?;
            Nim::new(pile, takes)
                .map(|g| Arc::new(g) as Arc<dyn Game>)
                .map_err(|e| bad(&e.to_string()))
        }
        ("connect", Some(rest)) => {
            let parts = rest
                .split(':')
                .map(str::parse::<usize>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad("expected connect:<cols>:<rows>:<k>"))?;
            match parts.as_slice() {
                [cols, rows, k] => ConnectK::new(*cols, *rows, *k)
                    .map(|g| Arc::new(g) as Arc<dyn Game>)
                    .map_err(|e| bad(&e.to_string())),
                _ => Err(bad("expected connect:<cols>:<rows>:<k>")),
            }
        }
        ("random", Some(rest)) => {
            let spec = if rest.trim_start().starts_with('{') {
                serde_json::from_str::<RandomGameSpec>(rest)
                    .map_err(|e| bad(&format!("invalid random game JSON: {e}")))?
            } else {
                let seed = rest
                    .parse()
                    .map_err(|_| bad("expected a seed or JSON spec"))?;
                RandomGameSpec::with_seed(seed)
            };
            generate_random_game(&spec)
                .map(|g| Arc::new(g) as Arc<dyn Game>)
                .map_err(|e| bad(&e.to_string()))
        }
        ("file", Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            ExplicitGame::from_json(&text)
                .map(|g| Arc::new(g) as Arc<dyn Game>)
                .map_err(|e| bad(&e.to_string()))
        }
        _ => Err(bad("unknown game")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_builtin_names() {
        assert_eq!(parse_game("nim:21:1,2,3").unwrap().name(), "nim:21:1,2,3");
        assert_eq!(parse_game("tictactoe").unwrap().name(), "tictactoe");
        assert_eq!(parse_game("connect:3:3:3").unwrap().name(), "connect:3:3:3");
        assert_eq!(parse_game("trap").unwrap().name(), "trap");
        let r = parse_game("random:7").unwrap();
        assert!(r.name().starts_with("random:{"));
        let again = parse_game(&r.name()).unwrap();
        assert_eq!(again.name(), r.name());
    }

    #[test]
    fn rejects_unknown_tokens() {
        for tok in ["chess", "nim:x:1", "nim:4", "connect:3:3", "random:abc"] {
            match parse_game(tok) {
                Err(Error::Usage { token, .. }) => assert_eq!(token, tok),
                Err(other) => panic!("unexpected error {other}"),
                Ok(_) => panic!("`{tok}` should not parse"),
            }
        }
    }

    #[test]
    fn hex_keys_round_trip() {
        let k = StateKey::new(vec![0u8, 1, 255]);
        assert_eq!(k.to_string(), "0001ff");
        assert_eq!(StateKey::from_hex("0001ff").unwrap(), k);
    }
}
