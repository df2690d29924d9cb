use std::io::Write;
use std::process::{Command, Output, Stdio};

fn umm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_umm"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_tictactoe_with_descent() {
    let out = umm(&[
        "solve",
        "tictactoe",
        "descent",
        "zero",
        "--iters",
        "unlimited",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["resolved"], 1);
    assert_eq!(v["c_root"], 0);
}

#[test]
fn solve_nim_within_the_bound() {
    let out = umm(&["solve", "nim:4:1,2,3", "ubfm", "zero", "--require-resolved"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["c_root"], -1);
    let oracle = json(&umm(&["oracle", "nim:4:1,2,3"]));
    assert!(v["iterations"].as_u64().unwrap() <= 2 * oracle["reachable"].as_u64().unwrap());
}

#[test]
fn baseline_never_satisfies_require_resolved() {
    let out = umm(&[
        "solve",
        "tictactoe",
        "ubfm-nocomp",
        "zero",
        "--iters",
        "10000",
        "--require-resolved",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["resolved"], 0);
}

#[test]
fn unknown_tokens_are_usage_errors() {
    for args in [
        vec!["solve", "chess"],
        vec!["solve", "tictactoe", "mcts"],
        vec!["solve", "tictactoe", "ubfm", "neural"],
        vec![
            "solve",
            "tictactoe",
            "ubfm",
            "zero",
            "--budget-iters",
            "lots",
        ],
        vec!["tournament", "--game", "trap", "--evals", "list:zero"],
    ] {
        let out = umm(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        let token = args.iter().rev().find(|a| !a.starts_with("--")).unwrap();
        assert!(err.contains(token), "{err}");
    }
    assert_eq!(umm(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn capacity_errors_exit_with_three() {
    assert_eq!(
        umm(&["oracle", "tictactoe", "--state-cap", "100"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        umm(&["solve", "tictactoe", "descent", "--state-cap", "100"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn oracle_matches_shipped_golden_files() {
    for g in [
        "tictactoe",
        "nim:4:1,2,3",
        "nim:21:1,2,3",
        "connect:3:3:3",
        "random:7",
        "trap",
    ] {
        let out = umm(&["oracle", g]);
        assert!(out.status.success());
        assert_eq!(json(&out)["golden"], "match", "{g}");
    }
}

#[test]
fn bless_writes_and_detects_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(
        json(&umm(&["oracle", "nim:6:1,2", "--golden-dir", d, "--bless"]))["golden"],
        "blessed"
    );
    assert_eq!(
        json(&umm(&["oracle", "nim:6:1,2", "--golden-dir", d]))["golden"],
        "match"
    );
    let path = std::fs::read_dir(dir.path())
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let mut golden: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let flipped = -golden["root_value"].as_i64().unwrap();
    golden["root_value"] = flipped.into();
    std::fs::write(&path, golden.to_string()).unwrap();
    assert_eq!(
        umm(&["oracle", "nim:6:1,2", "--golden-dir", d])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn verify_default_matrix_passes() {
    let out = umm(&["verify"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        text.lines().filter(|l| l.starts_with("ok ")).count(),
        4 * 5 * 3 * 3
    );
    assert!(text.ends_with("verify: PASS\n"));
}

#[test]
fn verify_baseline_and_corruption_modes() {
    let pinned = umm(&[
        "verify",
        "--game",
        "trap",
        "--policy",
        "ubfm",
        "--policy",
        "ubfm-nocomp",
        "--expect-progress-violation",
    ]);
    assert!(pinned.status.success());
    assert!(String::from_utf8_lossy(&pinned.stdout).contains("pinned trap"));
    let unpinned = umm(&["verify", "--game", "trap", "--policy", "ubfm-nocomp"]);
    assert_eq!(unpinned.status.code(), Some(1));
    let corrupt = umm(&[
        "verify",
        "--game",
        "tictactoe",
        "--policy",
        "ubfm",
        "--eval",
        "zero",
        "--seeds",
        "1",
        "--inject-corruption",
    ]);
    assert_eq!(corrupt.status.code(), Some(1));
    let text = String::from_utf8_lossy(&corrupt.stdout);
    assert!(text.contains("1 mismatch(es)"), "{text}");
}

#[test]
fn tournament_outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        let out = umm(&[
            "tournament",
            "--game",
            "tictactoe",
            "--game",
            "nim:11:1,2,3",
            "--evals",
            "set:3:0.05:hash:1",
            "--reps",
            "2",
            "--seed",
            "9",
            "--budget-iters",
            "40",
            "--workers",
            workers,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    for f in ["matches.csv", "report.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap()
        );
    }
    let csv = std::fs::read_to_string(a.path().join("matches.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "game,policyA,policyB,evalA,evalB,first_mover,score,plies,seed"
    );
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 6 * 2);
}

#[test]
fn trap_tournament_scores_one() {
    let out = umm(&[
        "tournament",
        "--game",
        "trap",
        "--evals",
        "list:table:trap;perturb:table:trap:1:0.01",
        "--reps",
        "3",
    ]);
    assert!(out.status.success());
    assert_eq!(json(&out)["overall_mean"], 1.0);
}

#[test]
fn play_reprompts_and_finishes() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_umm"))
        .args(["play", "nim:21:1,2,3", "descent", "zero", "--human", "2"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"7\n0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("illegal move `7`"));
    assert!(text.contains("game over: player 1 wins"));
}
