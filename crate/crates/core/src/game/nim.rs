use crate::error::{Error, Result};

use super::{not_terminal, Game, Payoff, Player, StateKey};

/// Single-pile Nim: players alternately remove an allowed number of objects;
/// the player who takes the last object wins (a player with no legal take
/// has lost).
#[derive(Clone, Debug)]
pub struct Nim {
    pile: u32,
    takes: Vec<u32>,
}

impl Nim {
    pub fn new(pile: u32, mut takes: Vec<u32>) -> Result<Self> {
        takes.sort_unstable();
        takes.dedup();
        if takes.is_empty() || takes[0] == 0 {
            return Err(Error::Configuration(
                "nim take set must be non-empty and contain only positive integers".into(),
            ));
        }
        Ok(Nim { pile, takes })
    }

    pub fn key(pile: u32, mover: Player) -> StateKey {
        let mut bytes = pile.to_le_bytes().to_vec();
        bytes.push(mover.number());
        StateKey::new(bytes)
    }

    fn decode(&self, s: &StateKey) -> Result<(u32, Player)> {
        let b = s.as_bytes();
        if b.len() != 5 {
            return Err(Error::malformed(s, "nim keys are 5 bytes"));
        }
        let pile = u32::from_le_bytes([b[0], b[1], b[2], b[3]]);
        if pile > self.pile {
            return Err(Error::malformed(s, "pile larger than the initial pile"));
        }
        let mover =
            Player::from_number(b[4]).ok_or_else(|| Error::malformed(s, "bad mover byte"))?;
        Ok((pile, mover))
    }

    pub fn pile_of(&self, s: &StateKey) -> Result<u32> {
        Ok(self.decode(s)?.0)
    }
}

impl Game for Nim {
    fn name(&self) -> String {
        let takes: Vec<String> = self.takes.iter().map(u32::to_string).collect();
        format!("nim:{}:{}", self.pile, takes.join(","))
    }

    fn initial_state(&self) -> StateKey {
        Nim::key(self.pile, Player::One)
    }

    fn successors(&self, s: &StateKey) -> Result<Vec<StateKey>> {
        let (pile, mover) = self.decode(s)?;
        Ok(self
            .takes
            .iter()
            .filter(|&&t| t <= pile)
            .map(|&t| Nim::key(pile - t, mover.other()))
            .collect())
    }

    fn mover(&self, s: &StateKey) -> Result<Player> {
        Ok(self.decode(s)?.1)
    }

    fn is_terminal(&self, s: &StateKey) -> Result<bool> {
        let (pile, _) = self.decode(s)?;
        Ok(pile < self.takes[0])
    }

    fn payoff(&self, s: &StateKey) -> Result<Payoff> {
        if !self.is_terminal(s)? {
            return Err(not_terminal(s));
        }
        let (_, mover) = self.decode(s)?;
        Ok(Payoff::won_by(mover.other()))
    }

    fn render(&self, s: &StateKey) -> String {
        match self.decode(s) {
            Ok((pile, mover)) => format!("pile {pile}, player {} to move", mover.number()),
            Err(_) => s.to_hex(),
        }
    }
}
