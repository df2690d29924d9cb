//! Instrumented search runs that check the completion invariants.
//!
//! [`audit_run`] drives a search one iteration at a time and checks after
//! each iteration:
//!
//! * freeze: a resolved record never changes `r` or `c` again;
//! * characterization: for every explored non-terminal record,
//!   `r = 1 => (|c| = 1 or all children resolved)`, `|c| = 1 => r = 1`, and
//!   `all children resolved => r = 1`;
//! * exactness: every resolved record has `c` equal to the oracle value;
//! * progress: the explored set plus the resolved set grew by at least one.
//!
//! At the end it checks the iteration bound (`2 x reachable states`) and
//! completeness (`r(root) = 1` and `c(root) = M(root)`).
//!
//! Records touched by an iteration (and their parents) are checked after
//! every iteration, which covers every record whose invariants can change.
//! Full-table scans run after every iteration on games with at most 1000
//! reachable states and on every 100th iteration otherwise.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::game::{parse_game, Game};
use crate::oracle::{oracle_minimax, verify_against_oracle, OracleTable, DEFAULT_STATE_CAP};
use crate::policy::PolicySpec;
use crate::search::{Engine, NoCompletionEngine, NodeId, TranspositionTable};

/// Games at or below this size get a full scan after every iteration.
pub const FULL_SCAN_STATE_LIMIT: usize = 1_000;
/// Full-scan period on larger games (1% of iterations).
pub const SAMPLED_SCAN_PERIOD: u64 = 100;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub game: String,
    pub policy: String,
    pub evaluator: String,
    pub reachable: usize,
    pub iterations: u64,
    pub iteration_bound: u64,
    pub full_scans: u64,
    pub freeze_violations: usize,
    pub characterization_violations: usize,
    pub exactness_violations: usize,
    pub progress_violations: usize,
    pub within_bound: bool,
    pub resolved: bool,
    pub c_root: i8,
    pub oracle_root: i8,
}

impl AuditReport {
    pub fn complete(&self) -> bool {
        self.resolved && self.c_root == self.oracle_root
    }

    pub fn passed(&self) -> bool {
        self.freeze_violations == 0
            && self.characterization_violations == 0
            && self.exactness_violations == 0
            && self.progress_violations == 0
            && self.within_bound
            && self.complete()
    }
}

struct Checker<'a> {
    oracle: &'a OracleTable,
    frozen: Vec<Option<i8>>,
    report: AuditReport,
}

impl Checker<'_> {
    fn freeze(&mut self, table: &TranspositionTable<f64>, ids: &[NodeId]) {
        self.frozen.resize(table.len(), None);
        for &id in ids {
            let rec = table.get(id);
            match self.frozen[id.0 as usize] {
                Some(c) if !rec.resolved() || rec.c() != c => self.report.freeze_violations += 1,
                Some(_) => {}
                None if rec.resolved() => self.frozen[id.0 as usize] = Some(rec.c()),
                None => {}
            }
        }
    }

    fn characterization(&mut self, table: &TranspositionTable<f64>, ids: &[NodeId]) {
        for &id in ids {
            let rec = table.get(id);
            if rec.is_terminal() || !rec.explored() {
                continue;
            }
            let all_kids = rec.children().iter().all(|&k| table.get(k).resolved());
            let decisive = rec.c().abs() == 1;
            let a = !rec.resolved() || decisive || all_kids;
            let b = !decisive || rec.resolved();
            let c = !all_kids || rec.resolved();
            self.report.characterization_violations += [a, b, c].iter().filter(|ok| !**ok).count();
        }
    }

    fn exactness(&mut self, table: &TranspositionTable<f64>, ids: &[NodeId]) {
        for &id in ids {
            let rec = table.get(id);
            if rec.resolved() && self.oracle.value(rec.key()) != Some(rec.c()) {
                self.report.exactness_violations += 1;
            }
        }
    }
}

fn touched_with_parents(
    table: &TranspositionTable<f64>,
    mut writes: Vec<NodeId>,
) -> (Vec<NodeId>, Vec<NodeId>) {
    writes.sort_unstable();
    writes.dedup();
    let mut affected = writes.clone();
    for &w in &writes {
        affected.extend_from_slice(table.get(w).parents());
    }
    affected.sort_unstable();
    affected.dedup();
    (writes, affected)
}

/// Audits one full run of a class-member policy against `oracle`.
///
/// Also returns the final table so callers can run further checks on it.
pub fn audit_run(
    game: &dyn Game,
    policy: &PolicySpec,
    evaluator: &Evaluator,
    oracle: &OracleTable,
) -> Result<(AuditReport, TranspositionTable<f64>)> {
    let mut p = policy.build::<f64>().ok_or_else(|| {
        Error::Configuration(format!(
            "{policy} is not a class member and cannot be audited"
        ))
    })?;
    let root = oracle.root().clone();
    let reachable = oracle.reachable_count();
    let bound = 2 * reachable as u64;
    // Headroom past the bound so a violation is observed instead of looping.
    let hard_stop = 2 * bound + 16;
    let scan_period = if reachable <= FULL_SCAN_STATE_LIMIT {
        1
    } else {
        SAMPLED_SCAN_PERIOD
    };
    let mut engine: Engine<'_, f64> = Engine::new(game, evaluator.clone());
    engine.table_mut().enable_write_log();
    let mut checker = Checker {
        oracle,
        frozen: Vec::new(),
        report: AuditReport {
            game: game.name(),
            policy: policy.to_string(),
            evaluator: evaluator.label(),
            reachable,
            iteration_bound: bound,
            oracle_root: oracle.root_value(),
            ..AuditReport::default()
        },
    };
    let mut iterations = 0u64;
    while !engine.table().record(&root).is_some_and(|r| r.resolved()) && iterations < hard_stop {
        let step = engine.iterate(&root, p.as_mut())?;
        iterations += 1;
        if step.states_added + step.resolutions == 0 {
            checker.report.progress_violations += 1;
        }
        let writes = engine.table_mut().take_writes();
        let table = engine.table();
        let (writes, affected) = touched_with_parents(table, writes);
        checker.freeze(table, &writes);
        checker.exactness(table, &writes);
        checker.characterization(table, &affected);
        if iterations.is_multiple_of(scan_period) {
            full_scan(&mut checker, table);
        }
    }
    full_scan(&mut checker, engine.table());
    let table = engine.into_table();
    let rec = table.record(&root);
    let report = AuditReport {
        iterations,
        within_bound: iterations <= bound,
        resolved: rec.is_some_and(|r| r.resolved()),
        c_root: rec.map_or(0, |r| r.c()),
        ..checker.report
    };
    Ok((report, table))
}

fn full_scan(checker: &mut Checker<'_>, table: &TranspositionTable<f64>) {
    let all: Vec<NodeId> = table.iter().map(|(id, _)| id).collect();
    checker.freeze(table, &all);
    checker.exactness(table, &all);
    checker.characterization(table, &all);
    checker.report.full_scans += 1;
}

/// Progress audit of the no-completion baseline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BaselineProgress {
    pub game: String,
    pub evaluator: String,
    pub iterations: u64,
    /// Iterations that added no state (the baseline never resolves any).
    pub stalled_iterations: u64,
    pub root_decision: String,
}

/// Runs the baseline for `iterations` iterations and counts stalls.
pub fn audit_baseline_progress(
    game: &dyn Game,
    evaluator: &Evaluator,
    iterations: u64,
) -> Result<BaselineProgress> {
    let root = game.initial_state();
    let mut engine: NoCompletionEngine<'_, f64> = NoCompletionEngine::new(game, evaluator.clone());
    let mut stalled = 0;
    for _ in 0..iterations {
        if engine.iterate(&root)?.states_added == 0 {
            stalled += 1;
        }
    }
    let decision = if game.is_terminal(&root)? {
        String::new()
    } else {
        engine
            .decide(&root, crate::search::DecisionMode::Best)?
            .to_hex()
    };
    Ok(BaselineProgress {
        game: game.name(),
        evaluator: evaluator.label(),
        iterations,
        stalled_iterations: stalled,
        root_decision: decision,
    })
}

/// Combinations run by [`run_verify`].
#[derive(Clone, Debug)]
pub struct VerifyMatrix {
    pub games: Vec<String>,
    pub policies: Vec<PolicySpec>,
    pub evaluators: Vec<String>,
    pub seeds: Vec<u64>,
}

impl Default for VerifyMatrix {
    fn default() -> Self {
        VerifyMatrix {
            games: vec![
                "nim:21:1,2,3".into(),
                "tictactoe".into(),
                "connect:3:3:3".into(),
                "random:7".into(),
            ],
            policies: PolicySpec::class_members(),
            evaluators: vec!["zero".into(), "hash:1".into(), "material".into()],
            seeds: vec![1, 2, 3],
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// The baseline's stalls are expected and pinned rather than failures.
    pub expect_progress_violation: bool,
    /// Plant one wrong completion value in the first audited table and
    /// re-run the exactness check on it.
    pub inject_corruption: bool,
    pub state_cap: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub runs: Vec<AuditReport>,
    pub baseline: Vec<BaselineProgress>,
    pub baseline_pinned: Option<bool>,
    pub corruption_mismatches: Option<usize>,
    pub passed: bool,
}

impl VerifyReport {
    /// One pass/fail line per run.
    pub fn matrix_lines(&self) -> Vec<String> {
        let flag = |ok: bool| if ok { "ok" } else { "FAIL" };
        let mut lines: Vec<String> = self
            .runs
            .iter()
            .map(|r| {
                format!(
                    "{} {} [{}] policy={} eval={} iters={}/{} freeze={} charact={} exact={} progress={} bound={} complete={}",
                    flag(r.passed()),
                    r.game,
                    r.reachable,
                    r.policy,
                    r.evaluator,
                    r.iterations,
                    r.iteration_bound,
                    flag(r.freeze_violations == 0),
                    flag(r.characterization_violations == 0),
                    flag(r.exactness_violations == 0),
                    flag(r.progress_violations == 0),
                    flag(r.within_bound),
                    flag(r.complete()),
                )
            })
            .collect();
        for b in &self.baseline {
            lines.push(format!(
                "{} {} policy=ubfm-nocomp eval={} stalled={}/{}",
                if self.baseline_pinned.unwrap_or(false) {
                    "pinned"
                } else {
                    "FAIL"
                },
                b.game,
                b.evaluator,
                b.stalled_iterations,
                b.iterations
            ));
        }
        if let Some(n) = self.corruption_mismatches {
            lines.push(format!(
                "{} corrupted-table exactness check: {n} mismatch(es)",
                if n == 0 { "ok" } else { "FAIL" }
            ));
        }
        lines
    }
}

/// Runs every combination of the matrix.
pub fn run_verify(matrix: &VerifyMatrix, options: &VerifyOptions) -> Result<VerifyReport> {
    let cap = options.state_cap.unwrap_or(DEFAULT_STATE_CAP);
    let mut report = VerifyReport::default();
    let mut corrupt_pending = options.inject_corruption;
    let mut games: Vec<(Arc<dyn Game>, Vec<String>)> = matrix
        .games
        .iter()
        .map(|g| Ok((parse_game(g)?, matrix.evaluators.clone())))
        .collect::<Result<_>>()?;
    let wants_baseline = matrix.policies.iter().any(|p| !p.is_class_member());
    if wants_baseline && !games.iter().any(|(g, _)| g.name() == "trap") {
        games.push((parse_game("trap")?, Vec::new()));
    }
    for (game, evaluators) in &games {
        let oracle = oracle_minimax(game.as_ref(), &game.initial_state(), cap)?;
        let mut evaluators: Vec<Evaluator> = evaluators
            .iter()
            .map(|e| Evaluator::parse(e))
            .collect::<Result<_>>()?;
        if game.name() == "trap" {
            evaluators.push(trap_evaluator()?);
        }
        for policy in &matrix.policies {
            for ev in &evaluators {
                if !policy.is_class_member() {
                    let iterations = 10 * 2 * oracle.reachable_count() as u64;
                    report
                        .baseline
                        .push(audit_baseline_progress(game.as_ref(), ev, iterations)?);
                    continue;
                }
                for &seed in &matrix.seeds {
                    let spec = policy.reseeded(seed);
                    let (run, mut table) = audit_run(game.as_ref(), &spec, ev, &oracle)?;
                    if corrupt_pending {
                        corrupt_pending = false;
                        report.corruption_mismatches =
                            Some(corrupt_and_count(&mut table, &oracle)?);
                    }
                    report.runs.push(run);
                }
            }
        }
    }
    if wants_baseline {
        let any_stall = report.baseline.iter().any(|b| b.stalled_iterations > 0);
        report.baseline_pinned = Some(options.expect_progress_violation && any_stall);
    }
    report.passed = report.runs.iter().all(AuditReport::passed)
        && report.baseline_pinned.unwrap_or(true)
        && report.corruption_mismatches.is_none_or(|n| n == 0);
    Ok(report)
}

/// Flips the completion value of the first resolved non-terminal record
/// and returns the number of mismatches the oracle check then reports.
pub fn corrupt_and_count(
    table: &mut TranspositionTable<f64>,
    oracle: &OracleTable,
) -> Result<usize> {
    let victim = table
        .iter()
        .find(|(_, r)| r.resolved() && !r.is_terminal())
        .or_else(|| table.iter().find(|(_, r)| r.resolved()))
        .map(|(id, r)| (id, r.c()))
        .ok_or_else(|| Error::Configuration("no resolved record to corrupt".into()))?;
    let (id, c) = victim;
    table.overwrite_completion(id, if c == 1 { -1 } else { 1 });
    Ok(verify_against_oracle(table, oracle)?.len())
}

/// The adversarial table shipped with the trap fixture.
pub fn trap_evaluator() -> Result<Evaluator> {
    Evaluator::parse("table:trap")
}

/// Convenience for tests and the CLI: oracle from the initial state.
pub fn oracle_for(game: &dyn Game) -> Result<OracleTable> {
    oracle_minimax(game, &game.initial_state(), DEFAULT_STATE_CAP)
}
