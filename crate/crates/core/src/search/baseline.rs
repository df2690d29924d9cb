use std::cmp::Ordering;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::game::{Game, StateKey};
use crate::scalar::Scalar;

use super::engine::IterationReport;
use super::table::{NodeId, TranspositionTable};
use super::{Budget, DecisionMode, SearchOutcome};

/// Unbounded best-first minimax without completion.
///
/// Children are ordered by `v` alone and `c`/`r` are never read or
/// written, so a line that ends in a terminal state can be revisited
/// forever without adding anything to the tree. Not a member of the
/// complete class; kept as the comparison baseline.
pub struct NoCompletionEngine<'g, V: Scalar> {
    game: &'g dyn Game,
    evaluator: Evaluator,
    table: TranspositionTable<V>,
    iterations: u64,
    trace: Option<Vec<IterationReport>>,
}

impl<'g, V: Scalar> NoCompletionEngine<'g, V> {
    pub fn new(game: &'g dyn Game, evaluator: Evaluator) -> Self {
        NoCompletionEngine {
            game,
            evaluator,
            table: TranspositionTable::new(),
            iterations: 0,
            trace: None,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn table(&self) -> &TranspositionTable<V> {
        &self.table
    }

    pub fn trace(&self) -> Option<&[IterationReport]> {
        self.trace.as_deref()
    }

    fn create_record(&mut self, key: StateKey) -> Result<NodeId> {
        let mover = self.game.mover(&key)?;
        let terminal = self.game.is_terminal(&key)?;
        let v = if terminal {
            self.evaluator.eval_terminal(self.game, &key)?
        } else {
            self.evaluator.eval_heuristic(self.game, &key)
        };
        Ok(self.table.insert(
            key,
            mover,
            terminal,
            V::from_f64_lossy(v),
            0,
            false,
            terminal,
        ))
    }

    fn extend(&mut self, s: NodeId) -> Result<()> {
        let succ = self.game.successors(self.table.get(s).key())?;
        let mut children = Vec::with_capacity(succ.len());
        for key in succ {
            let id = match self.table.id_of(&key) {
                Some(id) => id,
                None => self.create_record(key)?,
            };
            children.push(id);
        }
        self.table.set_children(s, children);
        Ok(())
    }

    fn backup_v(&mut self, s: NodeId) {
        let rec = self.table.get(s);
        let maximize = rec.mover().is_maximizer();
        let v = rec
            .children()
            .iter()
            .map(|&k| self.table.get(k).v())
            .reduce(|a, b| if maximize { a.max(b) } else { a.min(b) });
        if let Some(v) = v {
            self.table.set_v(s, v);
        }
    }

    /// Best child by `v` (max for player 1, min for player 2); ties go to
    /// the higher count, then to successor order.
    fn best_by_v(&self, s: NodeId, candidates: &[NodeId]) -> NodeId {
        let maximize = self.table.get(s).mover().is_maximizer();
        let mut best = candidates[0];
        for &cand in &candidates[1..] {
            let mut ord = self
                .table
                .get(cand)
                .v()
                .partial_cmp(&self.table.get(best).v())
                .unwrap_or(Ordering::Equal);
            if !maximize {
                ord = ord.reverse();
            }
            if ord == Ordering::Greater
                || (ord == Ordering::Equal && self.table.count(s, cand) > self.table.count(s, best))
            {
                best = cand;
            }
        }
        best
    }

    /// Follows the best-by-`v` line to its end; extends the last state if
    /// it is new and non-terminal, then backs `v` up along the line.
    pub fn iterate(&mut self, root: &StateKey) -> Result<IterationReport> {
        let explored_before = self.table.explored_count();
        let mut cur = match self.table.id_of(root) {
            Some(id) => id,
            None => self.create_record(root.clone())?,
        };
        let mut path = Vec::new();
        loop {
            let rec = self.table.get(cur);
            if rec.is_terminal() {
                break;
            }
            if !rec.explored() {
                self.extend(cur)?;
                self.backup_v(cur);
                break;
            }
            let kids = rec.children().to_vec();
            let next = self.best_by_v(cur, &kids);
            self.table.increment_count(cur, next)?;
            path.push(cur);
            cur = next;
        }
        for &s in path.iter().rev() {
            self.backup_v(s);
        }
        path.push(cur);
        self.iterations += 1;
        let report = IterationReport {
            index: self.iterations,
            path,
            states_added: self.table.explored_count() - explored_before,
            resolutions: 0,
        };
        if let Some(trace) = self.trace.as_mut() {
            trace.push(report.clone());
        }
        Ok(report)
    }

    /// Runs exactly until the budget is spent; the baseline never resolves,
    /// so an unlimited budget is rejected.
    pub fn search(&mut self, root: &StateKey, budget: Budget) -> Result<SearchOutcome> {
        if budget.is_unlimited() {
            return Err(Error::Configuration(
                "the no-completion baseline never resolves; give it a finite budget".into(),
            ));
        }
        let start = Instant::now();
        let explored_before = self.table.explored_count();
        let mut iterations = 0u64;
        loop {
            let out_of_iterations = budget.iterations.is_some_and(|n| iterations >= n);
            let out_of_time = budget.wall_clock.is_some_and(|d| start.elapsed() >= d);
            if out_of_iterations || out_of_time {
                break;
            }
            self.iterate(root)?;
            iterations += 1;
        }
        let rec = self.table.record(root);
        Ok(SearchOutcome {
            root: root.to_hex(),
            resolved: false,
            c_root: 0,
            v_root: rec.map_or(0.0, |r| r.v().to_f64_lossy()),
            iterations,
            states_added: self.table.explored_count() - explored_before,
            budget_exhausted: true,
        })
    }

    /// `Best`: best child by `v`. `Safe`: most selected child, ties by `v`.
    pub fn decide(&self, s: &StateKey, mode: DecisionMode) -> Result<StateKey> {
        let id = self
            .table
            .id_of(s)
            .filter(|&id| !self.table.get(id).children().is_empty())
            .ok_or_else(|| {
                Error::ContractViolation(format!("decide called on unextended state {s}"))
            })?;
        let children = self.table.get(id).children().to_vec();
        let chosen = match mode {
            DecisionMode::Best => self.best_by_v(id, &children),
            DecisionMode::Safe => {
                let top = children
                    .iter()
                    .map(|&k| self.table.count(id, k))
                    .max()
                    .unwrap_or(0);
                let most: Vec<NodeId> = children
                    .into_iter()
                    .filter(|&k| self.table.count(id, k) == top)
                    .collect();
                self.best_by_v(id, &most)
            }
        };
        Ok(self.table.get(chosen).key().clone())
    }
}
