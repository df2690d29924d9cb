#![allow(dead_code)]

use std::sync::Arc;

use umm_core::game::parse_game;
use umm_core::search::IterationReport;
use umm_core::{Evaluator, Game, Player, StateKey, TranspositionTable};

/// Plain recursive minimax without memoization, written against the game
/// interface only.
pub fn plain_minimax(game: &dyn Game, s: &StateKey) -> i8 {
    if game.is_terminal(s).unwrap() {
        return game.payoff(s).unwrap().value();
    }
    let kids = game.successors(s).unwrap();
    let values = kids.iter().map(|k| plain_minimax(game, k));
    match game.mover(s).unwrap() {
        Player::One => values.max().unwrap(),
        Player::Two => values.min().unwrap(),
    }
}

pub fn game(token: &str) -> Arc<dyn Game> {
    parse_game(token).unwrap()
}

pub fn eval(token: &str) -> Evaluator {
    Evaluator::parse(token).unwrap()
}

pub const RANDOM_SEEDS: std::ops::Range<u64> = 0..10;

pub fn random_games() -> Vec<String> {
    RANDOM_SEEDS.map(|s| format!("random:{s}")).collect()
}

/// Iteration trace with state keys spelled out, for byte comparisons.
pub fn trace_text<V: umm_core::Scalar>(
    table: &TranspositionTable<V>,
    trace: &[IterationReport],
) -> String {
    let mut out = String::new();
    for r in trace {
        out.push_str(&r.log_line());
        for id in &r.path {
            out.push(' ');
            out.push_str(&table.get(*id).key().to_hex());
        }
        out.push('\n');
    }
    out
}
