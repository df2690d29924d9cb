use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Player, StateKey};
use crate::scalar::Scalar;

use super::ResolutionRule;

/// Dense index of a record inside its table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    fn index(self) -> usize {
        self.0 as usize
    }
}

/// Per-state completion triple `(v, c, r)` with selection counts.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeRecord<V> {
    key: StateKey,
    mover: Player,
    terminal: bool,
    v: V,
    c: i8,
    resolved: bool,
    explored: bool,
    children: Vec<NodeId>,
    counts: Vec<u64>,
    parents: Vec<NodeId>,
}

impl<V: Scalar> NodeRecord<V> {
    pub fn key(&self) -> &StateKey {
        &self.key
    }

    pub fn mover(&self) -> Player {
        self.mover
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    /// Heuristic minimax estimate.
    pub fn v(&self) -> V {
        self.v
    }

    /// Completion value in `{-1, 0, 1}`.
    pub fn c(&self) -> i8 {
        self.c
    }

    /// Resolution flag.
    pub fn resolved(&self) -> bool {
        self.resolved
    }

    /// Whether the state needs no further extension: it has been
    /// extended, or it is terminal.
    pub fn explored(&self) -> bool {
        self.explored
    }

    /// Children in successor order; empty until the state is extended.
    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    /// Selection counts, parallel to [`NodeRecord::children`].
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Explored states that list this record among their children.
    pub fn parents(&self) -> &[NodeId] {
        &self.parents
    }
}

/// One line of a table snapshot export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotLine {
    pub key: String,
    pub v: f64,
    pub c: i8,
    pub r: u8,
    pub counts: Vec<u64>,
}

/// Store from state keys to records.
///
/// Records are append-only; `explored_count` and `resolved_count` never
/// decrease. When the write log is enabled every mutated record id is
/// appended to it so an auditor can re-check exactly what changed.
#[derive(Clone, Debug)]
pub struct TranspositionTable<V> {
    records: Vec<NodeRecord<V>>,
    index: HashMap<StateKey, NodeId>,
    explored: usize,
    resolved: usize,
    log_writes: bool,
    writes: Vec<NodeId>,
}

impl<V: Scalar> Default for TranspositionTable<V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<V: Scalar> TranspositionTable<V> {
    pub fn new() -> Self {
        TranspositionTable {
            records: Vec::new(),
            index: HashMap::new(),
            explored: 0,
            resolved: 0,
            log_writes: false,
            writes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of extended (non-terminal) states.
    pub fn explored_count(&self) -> usize {
        self.explored
    }

    pub fn resolved_count(&self) -> usize {
        self.resolved
    }

    pub fn get(&self, id: NodeId) -> &NodeRecord<V> {
        &self.records[id.index()]
    }

    pub fn id_of(&self, key: &StateKey) -> Option<NodeId> {
        self.index.get(key).copied()
    }

    pub fn record(&self, key: &StateKey) -> Option<&NodeRecord<V>> {
        self.id_of(key).map(|id| self.get(id))
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &NodeRecord<V>)> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| (NodeId(i as u32), r))
    }

    /// `n(parent, child)`, or 0 if `child` is not a child of `parent`.
    pub fn count(&self, parent: NodeId, child: NodeId) -> u64 {
        let p = self.get(parent);
        p.children
            .iter()
            .position(|&c| c == child)
            .map_or(0, |i| p.counts[i])
    }

    pub fn enable_write_log(&mut self) {
        self.log_writes = true;
    }

    /// Drains the ids written since the last call (may contain duplicates).
    pub fn take_writes(&mut self) -> Vec<NodeId> {
        std::mem::take(&mut self.writes)
    }

    fn touch(&mut self, id: NodeId) {
        if self.log_writes {
            self.writes.push(id);
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn insert(
        &mut self,
        key: StateKey,
        mover: Player,
        terminal: bool,
        v: V,
        c: i8,
        resolved: bool,
        explored: bool,
    ) -> NodeId {
        debug_assert!(!self.index.contains_key(&key));
        let id = NodeId(self.records.len() as u32);
        self.index.insert(key.clone(), id);
        self.records.push(NodeRecord {
            key,
            mover,
            terminal,
            v,
            c,
            resolved,
            explored,
            children: Vec::new(),
            counts: Vec::new(),
            parents: Vec::new(),
        });
        self.explored += (explored && !terminal) as usize;
        self.resolved += resolved as usize;
        self.touch(id);
        id
    }

    pub(crate) fn set_children(&mut self, id: NodeId, children: Vec<NodeId>) {
        for &child in &children {
            self.records[child.index()].parents.push(id);
        }
        let rec = &mut self.records[id.index()];
        rec.counts = vec![0; children.len()];
        rec.children = children;
        if !rec.explored {
            rec.explored = true;
            self.explored += 1;
        }
        self.touch(id);
    }

    pub(crate) fn increment_count(&mut self, parent: NodeId, child: NodeId) -> Result<()> {
        let rec = &mut self.records[parent.index()];
        let pos = rec
            .children
            .iter()
            .position(|&c| c == child)
            .ok_or_else(|| {
                Error::InternalConsistency(format!("{child:?} is not a child of {parent:?}"))
            })?;
        rec.counts[pos] += 1;
        Ok(())
    }

    pub(crate) fn set_v(&mut self, id: NodeId, v: V) {
        self.records[id.index()].v = v;
        self.touch(id);
    }

    /// Overwrites a completion value without any checks. Only meant for
    /// auditing tools that need to plant a known defect.
    pub fn overwrite_completion(&mut self, id: NodeId, c: i8) {
        self.records[id.index()].c = c;
        self.touch(id);
    }

    fn lexicographic(a: &NodeRecord<V>, b: &NodeRecord<V>) -> Ordering {
        a.c.cmp(&b.c)
            .then_with(|| a.v.partial_cmp(&b.v).unwrap_or(Ordering::Equal))
    }

    /// A priori best child of `s` among `candidates` by the lexicographic
    /// `(c, v)` order: maximal for player 1, minimal for player 2. Ties go
    /// to the higher selection count, then to the earlier candidate.
    pub fn completed_best_child(&self, s: NodeId, candidates: &[NodeId]) -> Result<NodeId> {
        let (&first, rest) = candidates.split_first().ok_or_else(|| {
            Error::ContractViolation("completed_best_child called with no candidates".into())
        })?;
        let maximize = self.get(s).mover.is_maximizer();
        let mut best = first;
        for &cand in rest {
            let mut ord = Self::lexicographic(self.get(cand), self.get(best));
            if !maximize {
                ord = ord.reverse();
            }
            let better = match ord {
                Ordering::Greater => true,
                Ordering::Equal => self.count(s, cand) > self.count(s, best),
                Ordering::Less => false,
            };
            if better {
                best = cand;
            }
        }
        Ok(best)
    }

    /// Recomputes `c(s)` and `v(s)` as the max (player 1) or min (player 2)
    /// over all children. No-op on resolved records.
    pub fn backup_values(&mut self, s: NodeId) -> Result<()> {
        let rec = self.get(s);
        if rec.resolved {
            return Ok(());
        }
        if rec.children.is_empty() {
            return Err(Error::InternalConsistency(format!(
                "backup on {} which has no child records",
                rec.key
            )));
        }
        let maximize = rec.mover.is_maximizer();
        let mut kids = rec.children.iter().map(|&k| self.get(k));
        let head = kids.next().expect("non-empty");
        let (mut c, mut v) = (head.c, head.v);
        for k in kids {
            if maximize {
                c = c.max(k.c);
                v = v.max(k.v);
            } else {
                c = c.min(k.c);
                v = v.min(k.v);
            }
        }
        let rec = &mut self.records[s.index()];
        rec.c = c;
        rec.v = v;
        self.touch(s);
        Ok(())
    }

    /// Sets `r(s) = 1` if every child is resolved or (under the weak rule)
    /// the best child is a resolved win for the mover. Returns whether `r`
    /// flipped. Must follow [`TranspositionTable::backup_values`].
    pub fn backup_resolution(&mut self, s: NodeId, rule: ResolutionRule) -> Result<bool> {
        let rec = self.get(s);
        if rec.resolved {
            return Ok(false);
        }
        if rec.children.is_empty() {
            return Err(Error::InternalConsistency(format!(
                "resolution backup on {} which has no child records",
                rec.key
            )));
        }
        let all_resolved = rec.children.iter().all(|&k| self.get(k).resolved);
        let mut winning = None;
        if rule == ResolutionRule::Weak && !all_resolved {
            let best = self.completed_best_child(s, &rec.children)?;
            let b = self.get(best);
            if b.resolved && b.c == rec.mover.winning_value() {
                winning = Some(b.c);
            }
        }
        if !all_resolved && winning.is_none() {
            return Ok(false);
        }
        let rec = &mut self.records[s.index()];
        if let Some(c) = winning {
            rec.c = c;
        }
        rec.resolved = true;
        self.resolved += 1;
        self.touch(s);
        Ok(true)
    }

    /// Writes one JSON object per record: `{key, v, c, r, counts}`.
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> Result<()> {
        for (_, rec) in self.iter() {
            let line = SnapshotLine {
                key: rec.key.to_hex(),
                v: rec.v.to_f64_lossy(),
                c: rec.c,
                r: rec.resolved as u8,
                counts: rec.counts.clone(),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(n: u8) -> StateKey {
        StateKey::new(vec![n])
    }

    /// Parent `0` with the given `(c, v, r)` children.
    fn table(
        mover: Player,
        kids: &[(i8, f64, bool)],
    ) -> (TranspositionTable<f64>, NodeId, Vec<NodeId>) {
        let mut t = TranspositionTable::new();
        let p = t.insert(key(0), mover, false, 0.0, 0, false, false);
        let ids: Vec<NodeId> = kids
            .iter()
            .enumerate()
            .map(|(i, &(c, v, r))| t.insert(key(i as u8 + 1), mover.other(), false, v, c, r, false))
            .collect();
        t.set_children(p, ids.clone());
        (t, p, ids)
    }

    #[test]
    fn completion_dominates_for_max() {
        let (t, p, k) = table(Player::One, &[(1, -0.9, true), (0, 0.99, false)]);
        assert_eq!(t.completed_best_child(p, &k).unwrap(), k[0]);
    }

    #[test]
    fn completion_dominates_for_min() {
        let (t, p, k) = table(Player::Two, &[(0, -0.3, false), (-1, 0.5, true)]);
        assert_eq!(t.completed_best_child(p, &k).unwrap(), k[1]);
    }

    #[test]
    fn heuristic_breaks_completion_ties() {
        let (t, p, k) = table(Player::One, &[(0, 0.4, false), (0, 0.7, false)]);
        assert_eq!(t.completed_best_child(p, &k).unwrap(), k[1]);
    }

    #[test]
    fn ties_go_to_count_then_order() {
        let (mut t, p, k) = table(
            Player::One,
            &[(0, 0.5, false), (0, 0.5, false), (0, 0.5, false)],
        );
        assert_eq!(t.completed_best_child(p, &k).unwrap(), k[0]);
        t.increment_count(p, k[2]).unwrap();
        assert_eq!(t.completed_best_child(p, &k).unwrap(), k[2]);
    }

    #[test]
    fn empty_candidates_is_a_contract_violation() {
        let (t, p, _) = table(Player::One, &[(0, 0.0, false)]);
        assert!(matches!(
            t.completed_best_child(p, &[]),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn backup_all_losing_children() {
        let (mut t, p, _) = table(
            Player::One,
            &[(-1, 0.0, true), (-1, 0.0, true), (-1, 0.0, true)],
        );
        t.backup_values(p).unwrap();
        assert_eq!(t.get(p).c(), -1);
    }

    #[test]
    fn backup_min_over_winning_children() {
        let (mut t, p, _) = table(Player::Two, &[(1, 0.0, true), (1, 0.0, true)]);
        t.backup_values(p).unwrap();
        assert_eq!(t.get(p).c(), 1);
    }

    #[test]
    fn backup_heuristic_max() {
        let (mut t, p, _) = table(
            Player::One,
            &[(0, 0.2, false), (0, -0.5, false), (0, 0.4, false)],
        );
        t.backup_values(p).unwrap();
        assert_eq!((t.get(p).c(), t.get(p).v()), (0, 0.4));
    }

    #[test]
    fn resolution_by_winning_child() {
        let (mut t, p, _) = table(Player::One, &[(0, 0.3, false), (1, 0.0, true)]);
        t.backup_values(p).unwrap();
        assert!(t.backup_resolution(p, ResolutionRule::Weak).unwrap());
        assert_eq!((t.get(p).resolved(), t.get(p).c()), (true, 1));
    }

    #[test]
    fn strong_rule_ignores_winning_child() {
        let (mut t, p, _) = table(Player::One, &[(0, 0.3, false), (1, 0.0, true)]);
        t.backup_values(p).unwrap();
        assert!(!t.backup_resolution(p, ResolutionRule::Strong).unwrap());
        assert!(!t.get(p).resolved());
    }

    #[test]
    fn resolution_when_all_children_resolved() {
        let (mut t, p, _) = table(Player::One, &[(0, 0.0, true), (-1, 0.0, true)]);
        t.backup_values(p).unwrap();
        assert!(t.backup_resolution(p, ResolutionRule::Weak).unwrap());
        assert_eq!((t.get(p).resolved(), t.get(p).c()), (true, 0));
    }

    #[test]
    fn no_resolution_otherwise() {
        let (mut t, p, _) = table(Player::One, &[(0, 0.0, true), (0, 0.0, false)]);
        t.backup_values(p).unwrap();
        assert!(!t.backup_resolution(p, ResolutionRule::Weak).unwrap());
        assert!(!t.get(p).resolved());
    }

    #[test]
    fn resolved_records_are_frozen() {
        let (mut t, p, k) = table(Player::One, &[(0, 0.0, true), (-1, 0.0, true)]);
        t.backup_values(p).unwrap();
        t.backup_resolution(p, ResolutionRule::Weak).unwrap();
        t.set_v(k[1], 0.9);
        t.backup_values(p).unwrap();
        assert!(!t.backup_resolution(p, ResolutionRule::Weak).unwrap());
        assert_eq!(
            (t.get(p).c(), t.get(p).v(), t.resolved_count()),
            (0, 0.0, 3)
        );
    }

    #[test]
    fn snapshot_has_one_line_per_record() {
        let (t, _, _) = table(Player::One, &[(0, 0.5, false), (1, 0.0, true)]);
        let mut buf = Vec::new();
        t.write_snapshot(&mut buf).unwrap();
        let lines: Vec<SnapshotLine> = String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[2].r, 1);
        assert_eq!(lines[0].counts, vec![0, 0]);
    }
}
