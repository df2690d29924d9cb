use std::time::Instant;

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::game::{Game, StateKey};
use crate::scalar::Scalar;

use super::table::{NodeId, TranspositionTable};
use super::{Budget, DecisionMode, DescentContext, ResolutionRule, SearchOutcome, SearchPolicy};

/// What one iteration did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationReport {
    pub index: u64,
    /// States visited, root first; the last entry is where the line ended.
    pub path: Vec<NodeId>,
    /// Number of states extended during the iteration.
    pub states_added: usize,
    /// Records whose `r` flipped to 1.
    pub resolutions: usize,
}

impl IterationReport {
    /// Single trace line.
    pub fn log_line(&self) -> String {
        format!(
            "iter={} path_len={} added={} resolved={}",
            self.index,
            self.path.len(),
            self.states_added,
            self.resolutions
        )
    }
}

/// Search engine for one game, one evaluator and one table.
pub struct Engine<'g, V: Scalar> {
    game: &'g dyn Game,
    evaluator: Evaluator,
    rule: ResolutionRule,
    table: TranspositionTable<V>,
    state_cap: Option<usize>,
    iterations: u64,
    trace: Option<Vec<IterationReport>>,
    verbose: bool,
}

impl<'g, V: Scalar> Engine<'g, V> {
    pub fn new(game: &'g dyn Game, evaluator: Evaluator) -> Self {
        Engine {
            game,
            evaluator,
            rule: ResolutionRule::Weak,
            table: TranspositionTable::new(),
            state_cap: None,
            iterations: 0,
            trace: None,
            verbose: false,
        }
    }

    pub fn with_rule(mut self, rule: ResolutionRule) -> Self {
        self.rule = rule;
        self
    }

    /// Fails with a capacity error once the table holds more records.
    pub fn with_state_cap(mut self, cap: usize) -> Self {
        self.state_cap = Some(cap);
        self
    }

    /// Keeps an [`IterationReport`] for every iteration.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    /// Prints one trace line per iteration to stderr.
    pub fn with_verbose(mut self, verbose: bool) -> Self {
        self.verbose = verbose;
        self
    }

    pub fn game(&self) -> &'g dyn Game {
        self.game
    }

    pub fn rule(&self) -> ResolutionRule {
        self.rule
    }

    pub fn table(&self) -> &TranspositionTable<V> {
        &self.table
    }

    pub fn table_mut(&mut self) -> &mut TranspositionTable<V> {
        &mut self.table
    }

    pub fn into_table(self) -> TranspositionTable<V> {
        self.table
    }

    pub fn trace(&self) -> Option<&[IterationReport]> {
        self.trace.as_deref()
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    fn check_cap(&self) -> Result<()> {
        match self.state_cap {
            Some(cap) if self.table.len() > cap => Err(Error::Capacity {
                reached: self.table.len(),
                cap,
            }),
            _ => Ok(()),
        }
    }

    /// Creates the record of a state seen for the first time. Terminal
    /// states are born explored and resolved with `c = f_b`, `v = f_t`;
    /// others start unresolved with `c = 0`, `v = f_θ`.
    fn create_record(&mut self, key: StateKey) -> Result<NodeId> {
        let mover = self.game.mover(&key)?;
        if self.game.is_terminal(&key)? {
            let v = V::from_f64_lossy(self.evaluator.eval_terminal(self.game, &key)?);
            let c = self.game.payoff(&key)?.value();
            Ok(self.table.insert(key, mover, true, v, c, true, true))
        } else {
            let v = V::from_f64_lossy(self.evaluator.eval_heuristic(self.game, &key));
            Ok(self.table.insert(key, mover, false, v, 0, false, false))
        }
    }

    /// Adds `s` to the explored set and creates records for its children.
    /// Children already in the table are reused untouched.
    pub fn extend(&mut self, s: NodeId) -> Result<()> {
        let rec = self.table.get(s);
        if rec.is_terminal() || rec.explored() {
            return Err(Error::ContractViolation(format!(
                "extend called on {} state {}",
                if rec.is_terminal() {
                    "terminal"
                } else {
                    "already extended"
                },
                rec.key()
            )));
        }
        let succ = self.game.successors(rec.key())?;
        let mut children = Vec::with_capacity(succ.len());
        for key in succ {
            let id = match self.table.id_of(&key) {
                Some(id) => id,
                None => self.create_record(key)?,
            };
            children.push(id);
        }
        self.table.set_children(s, children);
        self.check_cap()
    }

    /// Value and resolution backup at `s`. When `s` becomes resolved the
    /// backup is repeated on its unresolved parents, so states reachable
    /// through several move orders learn about the resolution immediately.
    fn backup(&mut self, s: NodeId) -> Result<usize> {
        self.table.backup_values(s)?;
        if !self.table.backup_resolution(s, self.rule)? {
            return Ok(0);
        }
        let mut flips = 1;
        let mut pending: Vec<NodeId> = self.table.get(s).parents().to_vec();
        while let Some(p) = pending.pop() {
            if self.table.get(p).resolved() {
                continue;
            }
            self.table.backup_values(p)?;
            if self.table.backup_resolution(p, self.rule)? {
                flips += 1;
                pending.extend_from_slice(self.table.get(p).parents());
            }
        }
        Ok(flips)
    }

    /// Returns the record id of `key`, creating it if needed.
    pub fn ensure_record(&mut self, key: &StateKey) -> Result<NodeId> {
        match self.table.id_of(key) {
            Some(id) => Ok(id),
            None => self.create_record(key.clone()),
        }
    }

    /// One iteration of the generalised algorithm from `root`.
    ///
    /// 1. A terminal root is recorded resolved and the iteration ends.
    /// 2. An unexplored state is extended (`b = true`); otherwise `b = false`.
    /// 3. `(c, v, r)` of the state are backed up from its children.
    /// 4. If it is still unresolved and either `b` is false or the policy
    ///    asks to continue, the policy picks an unresolved child, its count
    ///    is incremented and the walk continues from it.
    /// 5. On the way back every state of the line is backed up again.
    ///
    /// Every iteration either extends a state or resolves
    /// a state that was unresolved.
    pub fn iterate(
        &mut self,
        root: &StateKey,
        policy: &mut dyn SearchPolicy<V>,
    ) -> Result<IterationReport> {
        let explored_before = self.table.explored_count();
        let resolved_before = self.table.resolved_count();
        let mut cur = match self.table.id_of(root) {
            Some(id) if self.table.get(id).resolved() => {
                return Err(Error::ContractViolation(format!(
                    "iterate called on resolved state {root}"
                )))
            }
            Some(id) => id,
            None => self.create_record(root.clone())?,
        };
        let mut path = Vec::new();
        if !self.table.get(cur).is_terminal() {
            loop {
                let just_extended = !self.table.get(cur).explored();
                if just_extended {
                    self.extend(cur)?;
                }
                self.backup(cur)?;
                if self.table.get(cur).resolved() {
                    break;
                }
                let depth = path.len() + 1;
                if just_extended {
                    let ctx = DescentContext {
                        table: &self.table,
                        node: cur,
                        depth,
                        just_extended,
                    };
                    if !policy.continue_descent(&ctx) {
                        break;
                    }
                }
                let rec = self.table.get(cur);
                let unresolved: Vec<NodeId> = rec
                    .children()
                    .iter()
                    .copied()
                    .filter(|&k| !self.table.get(k).resolved())
                    .collect();
                if unresolved.is_empty() {
                    break;
                }
                let ctx = DescentContext {
                    table: &self.table,
                    node: cur,
                    depth,
                    just_extended,
                };
                let next = policy.priority_child(&ctx, &unresolved);
                if !unresolved.contains(&next) {
                    return Err(Error::ContractViolation(format!(
                        "policy {} returned a child outside the unresolved set",
                        policy.name()
                    )));
                }
                self.table.increment_count(cur, next)?;
                path.push(cur);
                cur = next;
            }
        }
        path.push(cur);
        for &s in path.iter().rev().skip(1) {
            self.backup(s)?;
        }
        self.iterations += 1;
        let report = IterationReport {
            index: self.iterations,
            path,
            states_added: self.table.explored_count() - explored_before,
            resolutions: self.table.resolved_count() - resolved_before,
        };
        if self.verbose {
            eprintln!("{}", report.log_line());
        }
        if let Some(trace) = self.trace.as_mut() {
            trace.push(report.clone());
        }
        Ok(report)
    }

    /// Iterates from `root` until it is resolved or the budget runs out.
    pub fn search(
        &mut self,
        root: &StateKey,
        policy: &mut dyn SearchPolicy<V>,
        budget: Budget,
    ) -> Result<SearchOutcome> {
        let start = Instant::now();
        let explored_before = self.table.explored_count();
        let mut iterations = 0u64;
        let mut exhausted = false;
        loop {
            if self.table.record(root).is_some_and(|r| r.resolved()) {
                break;
            }
            let out_of_iterations = budget.iterations.is_some_and(|n| iterations >= n);
            let out_of_time = budget.wall_clock.is_some_and(|d| start.elapsed() >= d);
            if out_of_iterations || out_of_time {
                exhausted = true;
                break;
            }
            self.iterate(root, policy)?;
            iterations += 1;
        }
        Ok(self.outcome(
            root,
            iterations,
            self.table.explored_count() - explored_before,
            exhausted,
        ))
    }

    fn outcome(
        &self,
        root: &StateKey,
        iterations: u64,
        states_added: usize,
        exhausted: bool,
    ) -> SearchOutcome {
        let rec = self.table.record(root);
        SearchOutcome {
            root: root.to_hex(),
            resolved: rec.is_some_and(|r| r.resolved()),
            c_root: rec.map_or(0, |r| r.c()),
            v_root: rec.map_or(0.0, |r| r.v().to_f64_lossy()),
            iterations,
            states_added,
            budget_exhausted: exhausted,
        }
    }

    /// Child of `s` to play.
    pub fn decide(&self, s: &StateKey, mode: DecisionMode) -> Result<StateKey> {
        decide_in(&self.table, s, mode)
    }
}

/// [`Engine::decide`] on a bare table.
pub(crate) fn decide_in<V: Scalar>(
    table: &TranspositionTable<V>,
    s: &StateKey,
    mode: DecisionMode,
) -> Result<StateKey> {
    let id = table
        .id_of(s)
        .filter(|&id| !table.get(id).children().is_empty())
        .ok_or_else(|| {
            Error::ContractViolation(format!("decide called on unextended state {s}"))
        })?;
    let children = table.get(id).children();
    let best = table.completed_best_child(id, children)?;
    let chosen = match mode {
        DecisionMode::Best => best,
        DecisionMode::Safe => {
            let target = table.get(best).c();
            let peers: Vec<NodeId> = children
                .iter()
                .copied()
                .filter(|&k| table.get(k).c() == target)
                .collect();
            let top = peers.iter().map(|&k| table.count(id, k)).max().unwrap_or(0);
            let most: Vec<NodeId> = peers
                .into_iter()
                .filter(|&k| table.count(id, k) == top)
                .collect();
            table.completed_best_child(id, &most)?
        }
    };
    Ok(table.get(chosen).key().clone())
}
