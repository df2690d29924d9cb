//! Text-mode play against an engine.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::game::{Game, Payoff, Player};
use crate::policy::{search_and_decide, PolicySpec};
use crate::search::{Budget, DecisionMode};

/// Alternates human and engine moves until the game ends.
///
/// The human picks a successor by its index. Anything that is not a valid
/// index re-prompts without changing the state. Returns the final payoff
/// (player one's perspective).
pub fn play_session<R: BufRead, W: Write>(
    game: &dyn Game,
    policy: &PolicySpec,
    evaluator: &Evaluator,
    budget: Budget,
    human: Player,
    mut input: R,
    mut output: W,
) -> Result<Payoff> {
    let mut state = game.initial_state();
    let mut line = String::new();
    while !game.is_terminal(&state)? {
        writeln!(output, "{}", game.render(&state))?;
        let mover = game.mover(&state)?;
        if mover == human {
            let moves = game.successors(&state)?;
            writeln!(
                output,
                "player {} to move, choose 0..{}",
                mover.number(),
                moves.len() - 1
            )?;
            loop {
                write!(output, "> ")?;
                output.flush()?;
                line.clear();
                if input.read_line(&mut line)? == 0 {
                    return Err(Error::Configuration(
                        "input closed before the game ended".into(),
                    ));
                }
                match line.trim().parse::<usize>() {
                    Ok(i) if i < moves.len() => {
                        state = moves[i].clone();
                        break;
                    }
                    _ => writeln!(output, "illegal move `{}`", line.trim())?,
                }
            }
        } else {
            let (next, outcome) = search_and_decide::<f64>(
                game,
                &state,
                policy,
                evaluator,
                budget,
                DecisionMode::Safe,
            )?;
            let index = game
                .successors(&state)?
                .iter()
                .position(|s| *s == next)
                .unwrap_or_default();
            writeln!(
                output,
                "engine plays {index} (iterations {}, c_root {})",
                outcome.iterations, outcome.c_root
            )?;
            state = next;
        }
    }
    writeln!(output, "{}", game.render(&state))?;
    let payoff = game.payoff(&state)?;
    let verdict = match payoff {
        Payoff::Draw => "draw".to_string(),
        Payoff::Win => "player 1 wins".into(),
        Payoff::Loss => "player 2 wins".into(),
    };
    writeln!(output, "game over: {verdict}")?;
    Ok(payoff)
}
