//! Exhaustive minimax ground truth.
//!
//! The traversal here shares nothing with the search engine: it is a plain
//! memoized post-order walk over the reachable DAG.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::game::{Game, Player, StateKey};
use crate::policy::PolicySpec;
use crate::scalar::Scalar;
use crate::search::{Budget, Engine, ResolutionRule, TranspositionTable};
use crate::Evaluator;

/// Default cap on reachable states.
pub const DEFAULT_STATE_CAP: usize = 10_000_000;

/// Exact minimax value of every state reachable from a root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleTable {
    root: StateKey,
    values: HashMap<StateKey, i8>,
}

impl OracleTable {
    pub fn root(&self) -> &StateKey {
        &self.root
    }

    pub fn root_value(&self) -> i8 {
        self.values[&self.root]
    }

    pub fn value(&self, s: &StateKey) -> Option<i8> {
        self.values.get(s).copied()
    }

    pub fn reachable_count(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateKey, i8)> {
        self.values.iter().map(|(k, &v)| (k, v))
    }

    /// SHA-256 over the table sorted by key.
    pub fn digest(&self) -> String {
        let mut entries: Vec<(&StateKey, i8)> = self.iter().collect();
        entries.sort();
        let mut h = Sha256::new();
        for (k, v) in entries {
            h.update((k.as_bytes().len() as u32).to_le_bytes());
            h.update(k.as_bytes());
            h.update([v as u8]);
        }
        hex::encode(h.finalize())
    }

    /// Re-checks the minimax recurrence at every entry.
    pub fn check_recurrence(&self, game: &dyn Game) -> Result<()> {
        for (s, &m) in &self.values {
            let succ = game.successors(s)?;
            let expected = if succ.is_empty() {
                game.payoff(s)?.value()
            } else {
                let kids = succ.iter().map(|k| {
                    self.values.get(k).copied().ok_or_else(|| {
                        Error::InternalConsistency(format!("oracle is missing child {k}"))
                    })
                });
                let kids = kids.collect::<Result<Vec<i8>>>()?;
                match game.mover(s)? {
                    Player::One => *kids.iter().max().expect("non-empty"),
                    Player::Two => *kids.iter().min().expect("non-empty"),
                }
            };
            if expected != m {
                return Err(Error::InternalConsistency(format!(
                    "oracle value {m} at {s} violates the recurrence (expected {expected})"
                )));
            }
        }
        Ok(())
    }
}

/// Memoized post-order minimax from `root`.
pub fn oracle_minimax(game: &dyn Game, root: &StateKey, cap: usize) -> Result<OracleTable> {
    let mut values: HashMap<StateKey, i8> = HashMap::new();
    struct Frame {
        key: StateKey,
        children: Vec<StateKey>,
        next: usize,
        maximize: bool,
        acc: Option<i8>,
    }
    let open = |key: StateKey| -> Result<std::result::Result<Frame, i8>> {
        let children = game.successors(&key)?;
        if children.is_empty() {
            return Ok(Err(game.payoff(&key)?.value()));
        }
        let maximize = game.mover(&key)? == Player::One;
        Ok(Ok(Frame {
            key,
            children,
            next: 0,
            maximize,
            acc: None,
        }))
    };
    let mut stack: Vec<Frame> = Vec::new();
    match open(root.clone())? {
        Err(v) => {
            values.insert(root.clone(), v);
        }
        Ok(f) => stack.push(f),
    }
    while let Some(top) = stack.last_mut() {
        if top.next == top.children.len() {
            let done = stack.pop().expect("non-empty");
            values.insert(done.key, done.acc.expect("non-terminal frame saw a child"));
            if values.len() + stack.len() > cap {
                return Err(Error::Capacity {
                    reached: values.len() + stack.len(),
                    cap,
                });
            }
            if let Some(parent) = stack.last_mut() {
                let child = &parent.children[parent.next - 1];
                let v = values[child];
                parent.acc = Some(fold(parent.acc, v, parent.maximize));
            }
            continue;
        }
        let child = top.children[top.next].clone();
        top.next += 1;
        if let Some(&v) = values.get(&child) {
            top.acc = Some(fold(top.acc, v, top.maximize));
            continue;
        }
        match open(child.clone())? {
            Err(v) => {
                values.insert(child, v);
                let top = stack.last_mut().expect("non-empty");
                top.acc = Some(fold(top.acc, v, top.maximize));
            }
            Ok(f) => stack.push(f),
        }
        if values.len() + stack.len() > cap {
            return Err(Error::Capacity {
                reached: values.len() + stack.len(),
                cap,
            });
        }
    }
    Ok(OracleTable {
        root: root.clone(),
        values,
    })
}

fn fold(acc: Option<i8>, v: i8, maximize: bool) -> i8 {
    match acc {
        None => v,
        Some(a) if maximize => a.max(v),
        Some(a) => a.min(v),
    }
}

/// Runs a class member with the winning-child shortcut removed until the
/// root is resolved, which resolves every reachable state.
pub fn strong_solve<'g, V: Scalar>(
    game: &'g dyn Game,
    root: &StateKey,
    policy: &PolicySpec,
    evaluator: &Evaluator,
    cap: usize,
) -> Result<TranspositionTable<V>> {
    let mut p = policy
        .build::<V>()
        .ok_or_else(|| Error::Configuration("strong solving needs a class-member policy".into()))?;
    let mut engine: Engine<'g, V> = Engine::new(game, evaluator.clone())
        .with_rule(ResolutionRule::Strong)
        .with_state_cap(cap);
    engine.search(root, p.as_mut(), Budget::unlimited())?;
    Ok(engine.into_table())
}

/// A resolved record whose completion value disagrees with the oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub key: String,
    pub c: i8,
    pub oracle: i8,
}

/// Lists every resolved record with `c != M(s)`.
pub fn verify_against_oracle<V: Scalar>(
    table: &TranspositionTable<V>,
    oracle: &OracleTable,
) -> Result<Vec<Mismatch>> {
    let mut out = Vec::new();
    for (_, rec) in table.iter() {
        let m = oracle
            .value(rec.key())
            .ok_or_else(|| Error::Reachability(rec.key().clone()))?;
        if rec.resolved() && rec.c() != m {
            out.push(Mismatch {
                key: rec.key().to_hex(),
                c: rec.c(),
                oracle: m,
            });
        }
    }
    Ok(out)
}

/// Pinned oracle summary for one game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenFile {
    pub game: String,
    pub root_value: i8,
    pub reachable: usize,
    pub digest: String,
}

impl GoldenFile {
    pub fn from_oracle(game: &dyn Game, oracle: &OracleTable) -> Self {
        GoldenFile {
            game: game.name(),
            root_value: oracle.root_value(),
            reachable: oracle.reachable_count(),
            digest: oracle.digest(),
        }
    }

    /// File name derived from the game name.
    pub fn file_name(game_name: &str) -> String {
        let mut slug: String = game_name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        if slug.len() > 48 {
            let digest = hex::encode(Sha256::digest(game_name.as_bytes()));
            slug.truncate(32);
            slug.push('_');
            slug.push_str(&digest[..12]);
        }
        format!("{slug}.json")
    }

    pub fn path_in(dir: &Path, game_name: &str) -> PathBuf {
        dir.join(Self::file_name(game_name))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn store(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Nim, TicTacToe};

    #[test]
    fn terminal_root_is_its_payoff() {
        let g = Nim::new(3, vec![1, 2]).unwrap();
        let s = Nim::key(0, Player::One);
        let o = oracle_minimax(&g, &s, 10).unwrap();
        assert_eq!(o.root_value(), -1);
        assert_eq!(o.reachable_count(), 1);
    }

    #[test]
    fn capacity_error_names_the_count() {
        let g = TicTacToe::new();
        match oracle_minimax(&g, &g.initial_state(), 100) {
            Err(Error::Capacity { reached, cap }) => {
                assert_eq!(cap, 100);
                assert!(reached > 100);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn oracle_is_idempotent() {
        let g = Nim::new(9, vec![1, 3, 4]).unwrap();
        let a = oracle_minimax(&g, &g.initial_state(), 1000).unwrap();
        let b = oracle_minimax(&g, &g.initial_state(), 1000).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.digest(), b.digest());
        a.check_recurrence(&g).unwrap();
    }

    #[test]
    fn golden_names_are_filesystem_safe() {
        assert_eq!(GoldenFile::file_name("nim:4:1,2,3"), "nim_4_1_2_3.json");
        let long = GoldenFile::file_name(&"random:{\"seed\":7}".repeat(5));
        assert!(long.len() < 60 && long.ends_with(".json"));
    }
}
