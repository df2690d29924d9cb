use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{not_terminal, Game, Payoff, Player, StateKey};

/// Hard limit on generated nodes, independent of the oracle's cap.
const MAX_NODES: usize = 10_000_000;

/// Parameters of a layered random DAG game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomGameSpec {
    pub seed: u64,
    pub depth: u32,
    pub branching: u32,
    pub transposition_rate: f64,
    pub draw_rate: f64,
}

impl RandomGameSpec {
    /// Default shape used by `random:<seed>`.
    pub fn with_seed(seed: u64) -> Self {
        RandomGameSpec {
            seed,
            depth: 6,
            branching: 3,
            transposition_rate: 0.3,
            draw_rate: 0.2,
        }
    }
}

/// A layered DAG: every edge goes from layer `d` to layer `d + 1` and all
/// nodes of the last layer are terminal, so the graph is acyclic by
/// construction. Player 1 moves on even layers.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomGame {
    spec: RandomGameSpec,
    /// `children[d][i]` lists indices into layer `d + 1`.
    children: Vec<Vec<Vec<u32>>>,
    payoffs: Vec<Payoff>,
}

pub fn generate_random_game(spec: &RandomGameSpec) -> Result<RandomGame> {
    if spec.depth < 1 || spec.branching < 1 {
        return Err(Error::Configuration(
            "depth and branching must be at least 1".into(),
        ));
    }
    if spec.depth > u16::MAX as u32 {
        return Err(Error::Configuration(
            "depth does not fit in a state key".into(),
        ));
    }
    for (name, rate) in [
        ("transposition_rate", spec.transposition_rate),
        ("draw_rate", spec.draw_rate),
    ] {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::Configuration(format!(
                "{name} must lie in [0, 1], got {rate}"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut children = Vec::with_capacity(spec.depth as usize);
    let mut layer_width = 1usize;
    let mut total = 1usize;
    for _ in 0..spec.depth {
        let mut next_width = 0u32;
        let mut layer = Vec::with_capacity(layer_width);
        for _ in 0..layer_width {
            let mut kids: Vec<u32> = Vec::with_capacity(spec.branching as usize);
            for _ in 0..spec.branching {
                let reuse =
                    next_width as usize > kids.len() && rng.gen_bool(spec.transposition_rate);
                if reuse {
                    let candidates: Vec<u32> =
                        (0..next_width).filter(|i| !kids.contains(i)).collect();
                    kids.push(candidates[rng.gen_range(0..candidates.len())]);
                } else {
                    kids.push(next_width);
                    next_width += 1;
                }
            }
            layer.push(kids);
        }
        children.push(layer);
        layer_width = next_width as usize;
        total += layer_width;
        if total > MAX_NODES {
            return Err(Error::Configuration(format!(
                "random game would exceed {MAX_NODES} nodes"
            )));
        }
    }
    let payoffs = (0..layer_width)
        .map(|_| {
            if rng.gen_bool(spec.draw_rate) {
                Payoff::Draw
            } else if rng.gen_bool(0.5) {
                Payoff::Win
            } else {
                Payoff::Loss
            }
        })
        .collect();
    Ok(RandomGame {
        spec: spec.clone(),
        children,
        payoffs,
    })
}

impl RandomGame {
    pub fn spec(&self) -> &RandomGameSpec {
        &self.spec
    }

    pub fn key(layer: u16, index: u32) -> StateKey {
        let mut bytes = layer.to_le_bytes().to_vec();
        bytes.extend_from_slice(&index.to_le_bytes());
        StateKey::new(bytes)
    }

    /// Total number of nodes across all layers.
    pub fn node_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum::<usize>() + self.payoffs.len()
    }

    fn decode(&self, s: &StateKey) -> Result<(usize, usize)> {
        let b = s.as_bytes();
        if b.len() != 6 {
            return Err(Error::malformed(s, "random-game keys are 6 bytes"));
        }
        let layer = u16::from_le_bytes([b[0], b[1]]) as usize;
        let index = u32::from_le_bytes([b[2], b[3], b[4], b[5]]) as usize;
        let width = if layer < self.children.len() {
            self.children[layer].len()
        } else if layer == self.children.len() {
            self.payoffs.len()
        } else {
            return Err(Error::malformed(s, "layer beyond game depth"));
        };
        if index >= width {
            return Err(Error::malformed(s, "node index beyond layer width"));
        }
        Ok((layer, index))
    }
}

impl Game for RandomGame {
    fn name(&self) -> String {
        format!(
            "random:{}",
            serde_json::to_string(&self.spec).expect("spec serialises")
        )
    }

    fn initial_state(&self) -> StateKey {
        RandomGame::key(0, 0)
    }

    fn successors(&self, s: &StateKey) -> Result<Vec<StateKey>> {
        let (layer, index) = self.decode(s)?;
        if layer == self.children.len() {
            return Ok(Vec::new());
        }
        Ok(self.children[layer][index]
            .iter()
            .map(|&c| RandomGame::key(layer as u16 + 1, c))
            .collect())
    }

    fn mover(&self, s: &StateKey) -> Result<Player> {
        let (layer, _) = self.decode(s)?;
        Ok(if layer % 2 == 0 {
            Player::One
        } else {
            Player::Two
        })
    }

    fn is_terminal(&self, s: &StateKey) -> Result<bool> {
        Ok(self.decode(s)?.0 == self.children.len())
    }

    fn payoff(&self, s: &StateKey) -> Result<Payoff> {
        let (layer, index) = self.decode(s)?;
        if layer != self.children.len() {
            return Err(not_terminal(s));
        }
        Ok(self.payoffs[index])
    }

    fn render(&self, s: &StateKey) -> String {
        match self.decode(s) {
            Ok((layer, index)) => format!("layer {layer} node {index}"),
            Err(_) => s.to_hex(),
        }
    }
}
