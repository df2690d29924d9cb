use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{not_terminal, Game, Payoff, Player, StateKey};

/// Crafted trap fixture: a max root whose tempting branch `a` is lost while
/// the unpromising branch `b` is a forced win.
pub const TRAP_GAME_JSON: &str = include_str!("../../fixtures/trap_game.json");
/// Adversarial heuristic table shipped with [`TRAP_GAME_JSON`].
pub const TRAP_TABLE_JSON: &str = include_str!("../../fixtures/trap_table.json");

/// One node of an [`ExplicitGame`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitNode {
    pub mover: u8,
    #[serde(default)]
    pub children: Vec<String>,
    #[serde(default)]
    pub payoff: Option<i8>,
}

/// A game given as an explicit node list, keyed by node name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitGame {
    pub name: String,
    pub root: String,
    pub nodes: BTreeMap<String, ExplicitNode>,
}

pub fn trap_game() -> ExplicitGame {
    ExplicitGame::from_json(TRAP_GAME_JSON).expect("trap fixture is valid")
}

impl ExplicitGame {
    pub fn from_json(text: &str) -> Result<Self> {
        let game: ExplicitGame = serde_json::from_str(text)?;
        game.validate()?;
        Ok(game)
    }

    pub fn key(name: &str) -> StateKey {
        StateKey::new(name.as_bytes().to_vec())
    }

    fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Configuration(m));
        if !self.nodes.contains_key(&self.root) {
            return cfg(format!("root `{}` is not a node", self.root));
        }
        for (name, node) in &self.nodes {
            if Player::from_number(node.mover).is_none() {
                return cfg(format!("node `{name}` has mover {}", node.mover));
            }
            let unique: HashSet<&String> = node.children.iter().collect();
            if unique.len() != node.children.len() {
                return cfg(format!("node `{name}` lists a child twice"));
            }
            if let Some(missing) = node.children.iter().find(|c| !self.nodes.contains_key(*c)) {
                return cfg(format!("node `{name}` has unknown child `{missing}`"));
            }
            match (node.children.is_empty(), node.payoff) {
                (true, Some(p)) if Payoff::from_value(p).is_some() => {}
                (true, _) => {
                    return cfg(format!(
                        "terminal node `{name}` needs a payoff in {{-1,0,1}}"
                    ))
                }
                (false, Some(_)) => return cfg(format!("non-terminal node `{name}` has a payoff")),
                (false, None) => {}
            }
        }
        // Iterative three-colour DFS for cycle detection.
        let mut colour: BTreeMap<&str, u8> = BTreeMap::new();
        for start in self.nodes.keys() {
            if colour.contains_key(start.as_str()) {
                continue;
            }
            let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
            colour.insert(start, 1);
            while let Some((name, idx)) = stack.pop() {
                let kids = &self.nodes[name].children;
                if idx < kids.len() {
                    stack.push((name, idx + 1));
                    let child = kids[idx].as_str();
                    match colour.get(child) {
                        Some(1) => return cfg(format!("cycle through `{child}`")),
                        Some(_) => {}
                        None => {
                            colour.insert(child, 1);
                            stack.push((child, 0));
                        }
                    }
                } else {
                    colour.insert(name, 2);
                }
            }
        }
        Ok(())
    }

    fn node(&self, s: &StateKey) -> Result<&ExplicitNode> {
        std::str::from_utf8(s.as_bytes())
            .ok()
            .and_then(|name| self.nodes.get(name))
            .ok_or_else(|| Error::malformed(s, "unknown node"))
    }
}

impl Game for ExplicitGame {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn initial_state(&self) -> StateKey {
        ExplicitGame::key(&self.root)
    }

    fn successors(&self, s: &StateKey) -> Result<Vec<StateKey>> {
        Ok(self
            .node(s)?
            .children
            .iter()
            .map(|c| ExplicitGame::key(c))
            .collect())
    }

    fn mover(&self, s: &StateKey) -> Result<Player> {
        Ok(Player::from_number(self.node(s)?.mover).expect("validated"))
    }

    fn is_terminal(&self, s: &StateKey) -> Result<bool> {
        Ok(self.node(s)?.children.is_empty())
    }

    fn payoff(&self, s: &StateKey) -> Result<Payoff> {
        match self.node(s)?.payoff {
            Some(p) => Ok(Payoff::from_value(p).expect("validated")),
            None => Err(not_terminal(s)),
        }
    }

    fn render(&self, s: &StateKey) -> String {
        String::from_utf8_lossy(s.as_bytes()).into_owned()
    }
}
