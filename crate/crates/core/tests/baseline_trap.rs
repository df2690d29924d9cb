mod common;

use common::game;
use umm_core::game::ExplicitGame;
use umm_core::harness::audit::{audit_baseline_progress, trap_evaluator};
use umm_core::oracle::{oracle_minimax, DEFAULT_STATE_CAP};
use umm_core::policy::Ubfm;
use umm_core::search::{DecisionMode, NoCompletionEngine};
use umm_core::{Budget, Engine, Searcher};

#[test]
fn trap_table_favours_the_losing_branch() {
    let g = game("trap");
    let ev = trap_evaluator().unwrap();
    let a = ev.eval_heuristic(g.as_ref(), &ExplicitGame::key("a"));
    let b = ev.eval_heuristic(g.as_ref(), &ExplicitGame::key("b"));
    assert!(a > b);
    let oracle = oracle_minimax(g.as_ref(), &g.initial_state(), DEFAULT_STATE_CAP).unwrap();
    assert_eq!(oracle.value(&ExplicitGame::key("a")), Some(-1));
    assert_eq!(oracle.value(&ExplicitGame::key("b")), Some(1));
}

#[test]
fn baseline_stays_on_the_trap() {
    let g = game("trap");
    let root = g.initial_state();
    let oracle = oracle_minimax(g.as_ref(), &root, DEFAULT_STATE_CAP).unwrap();
    let n = 10 * 2 * oracle.reachable_count() as u64;
    let mut base: NoCompletionEngine<'_, f64> =
        NoCompletionEngine::new(g.as_ref(), trap_evaluator().unwrap());
    let out = base.search(&root, Budget::iterations(n)).unwrap();
    assert!(!out.resolved);
    for mode in [DecisionMode::Best, DecisionMode::Safe] {
        let mv = base.decide(&root, mode).unwrap();
        assert_eq!(mv, ExplicitGame::key("a"));
        assert_ne!(oracle.value(&mv), Some(oracle.root_value()));
    }
    let progress = audit_baseline_progress(g.as_ref(), &trap_evaluator().unwrap(), n).unwrap();
    // Only the first two iterations extend anything; the rest replay a->d.
    assert_eq!(
        (progress.stalled_iterations, progress.iterations),
        (298, 300)
    );
}

#[test]
fn completion_escapes_the_trap() {
    let g = game("trap");
    let root = g.initial_state();
    let mut engine: Searcher<'_> = Engine::new(g.as_ref(), trap_evaluator().unwrap());
    let out = engine
        .search(&root, &mut Ubfm, Budget::unlimited())
        .unwrap();
    assert!(out.resolved);
    assert_eq!(out.c_root, 1);
    assert_eq!(
        engine.decide(&root, DecisionMode::Safe).unwrap(),
        ExplicitGame::key("b")
    );
    assert_eq!(
        engine.decide(&root, DecisionMode::Best).unwrap(),
        ExplicitGame::key("b")
    );
    assert!(engine
        .table()
        .record(&ExplicitGame::key("a"))
        .unwrap()
        .resolved());
}
