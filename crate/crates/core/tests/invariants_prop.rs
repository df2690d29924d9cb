use proptest::prelude::*;

use umm_core::game::{generate_random_game, RandomGameSpec};
use umm_core::harness::audit::audit_run;
use umm_core::harness::stats::bootstrap_ci;
use umm_core::oracle::{oracle_minimax, DEFAULT_STATE_CAP};
use umm_core::{Evaluator, Game, PolicySpec};

const EVALUATORS: [&str; 5] = [
    "zero",
    "hash:1",
    "material",
    "perturb:hash:2:9:0.2",
    "margin",
];

fn policy(i: usize, seed: u64) -> PolicySpec {
    let mut all = PolicySpec::class_members();
    all.push(PolicySpec::EpsGreedy {
        epsilon: 1.0,
        seed: 0,
    });
    all.push(PolicySpec::DepthCapped { cap: 1 });
    all[i % all.len()].reseeded(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn class_members_satisfy_every_invariant(
        seed in 0u64..10_000,
        depth in 1u32..7,
        branching in 1u32..5,
        transposition_rate in 0.0f64..0.9,
        draw_rate in 0.0f64..0.6,
        pi in 0usize..7,
        ei in 0usize..5,
        policy_seed in 0u64..100,
    ) {
        let spec = RandomGameSpec { seed, depth, branching, transposition_rate, draw_rate };
        let g = generate_random_game(&spec).unwrap();
        let oracle = oracle_minimax(&g, &g.initial_state(), DEFAULT_STATE_CAP).unwrap();
        let ev = Evaluator::parse(EVALUATORS[ei]).unwrap();
        let (report, _) = audit_run(&g, &policy(pi, policy_seed), &ev, &oracle).unwrap();
        prop_assert!(report.passed(), "{:?}", report);
    }

    #[test]
    fn bootstrap_brackets_constant_strata(v in -1i8..=1, n in 1usize..20, k in 1usize..4) {
        let strata = vec![vec![f64::from(v); n]; k];
        let ci = bootstrap_ci(&strata, 0.95, 200, 1).unwrap();
        prop_assert_eq!((ci.low, ci.high), (f64::from(v), f64::from(v)));
    }
}
