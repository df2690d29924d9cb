use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use umm_core::game::parse_game;
use umm_core::harness::audit::{run_verify, VerifyMatrix, VerifyOptions};
use umm_core::harness::play::play_session;
use umm_core::harness::tournament::{run_tournament, EvaluatorSetSpec, TournamentConfig};
use umm_core::oracle::{oracle_minimax, GoldenFile, DEFAULT_STATE_CAP};
use umm_core::search::NoCompletionEngine;
use umm_core::{Budget, Engine, Error, Evaluator, Player, PolicySpec, ResolutionRule};

const EXIT_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "umm",
    version,
    about = "Unbounded minimax search with completion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search a game from its initial state and print the outcome as JSON.
    Solve(SolveArgs),
    /// Run the invariant auditor over a matrix of games, policies and evaluators.
    Verify(VerifyArgs),
    /// Play a self-play tournament between two policies.
    Tournament(TournamentArgs),
    /// Play interactively against an engine.
    Play(PlayArgs),
    /// Compute the exact minimax value and compare it with a golden file.
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
struct BudgetArgs {
    /// Iteration budget (a number or `unlimited`).
    #[arg(long = "budget-iters", alias = "iters")]
    budget_iters: Option<String>,
    /// Wall-clock budget in milliseconds.
    #[arg(long = "budget-ms")]
    budget_ms: Option<u64>,
}

impl BudgetArgs {
    fn resolve(&self, default: Budget) -> Result<Budget, Error> {
        let iterations = match self.budget_iters.as_deref() {
            None => None,
            Some("unlimited") => Some(None),
            Some(n) => Some(Some(n.parse::<u64>().map_err(|_| Error::Usage {
                kind: "budget",
                token: n.to_string(),
                reason: "expected an iteration count or `unlimited`".into(),
            })?)),
        };
        if iterations.is_none() && self.budget_ms.is_none() {
            return Ok(default);
        }
        Ok(Budget {
            iterations: iterations.flatten(),
            wall_clock: self.budget_ms.map(Duration::from_millis),
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    game: String,
    #[arg(default_value = "ubfm")]
    policy: String,
    #[arg(default_value = "zero")]
    evaluator: String,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Reseed a stochastic policy.
    #[arg(long)]
    seed: Option<u64>,
    /// Use the strong resolution rule (no winning-move shortcut).
    #[arg(long)]
    strong: bool,
    /// Exit with status 1 unless the root is resolved.
    #[arg(long)]
    require_resolved: bool,
    /// Maximum number of table records.
    #[arg(long)]
    state_cap: Option<usize>,
    /// Print one line per iteration on stderr.
    #[arg(short, long)]
    verbose: bool,
    /// Write the final table as JSON lines.
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Game (repeatable); defaults to the standard matrix.
    #[arg(long = "game")]
    games: Vec<String>,
    /// Policy (repeatable).
    #[arg(long = "policy")]
    policies: Vec<String>,
    /// Evaluator (repeatable).
    #[arg(long = "eval")]
    evaluators: Vec<String>,
    /// Comma-separated seeds for stochastic policies.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Treat stalls of the no-completion baseline as the expected outcome.
    #[arg(long)]
    expect_progress_violation: bool,
    /// Plant one wrong completion value and check that exactness catches it.
    #[arg(long)]
    inject_corruption: bool,
    #[arg(long)]
    state_cap: Option<usize>,
    /// Write verify.json into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TournamentArgs {
    /// Game (repeatable).
    #[arg(long = "game", required = true)]
    games: Vec<String>,
    #[arg(long = "policy-a", default_value = "ubfm")]
    policy_a: String,
    #[arg(long = "policy-b", default_value = "ubfm-nocomp")]
    policy_b: String,
    /// `set:<size>:<amp>:<base>` or `list:<e1>;<e2>;...`.
    #[arg(long = "evals", default_value = "set:4:0.05:hash:1")]
    evaluators: String,
    #[arg(long = "reps", default_value_t = 1)]
    repetitions: usize,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = umm_core::harness::tournament::DEFAULT_PLY_CAP)]
    ply_cap: usize,
    #[arg(long, default_value_t = umm_core::harness::tournament::DEFAULT_RESAMPLES)]
    resamples: usize,
    /// Record elapsed time in report.json.
    #[arg(long)]
    timings: bool,
    /// Write report.json and matches.csv into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlayArgs {
    game: String,
    #[arg(default_value = "descent")]
    policy: String,
    #[arg(default_value = "zero")]
    evaluator: String,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Which player the human controls (1 or 2).
    #[arg(long, default_value_t = 1)]
    human: u8,
}

#[derive(Args)]
struct OracleArgs {
    game: String,
    /// Directory holding golden files.
    #[arg(long)]
    golden_dir: Option<PathBuf>,
    /// Overwrite the golden file instead of comparing against it.
    #[arg(long)]
    bless: bool,
    #[arg(long)]
    state_cap: Option<usize>,
}

enum Outcome {
    Ok,
    CheckFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Tournament(a) => tournament(a),
        Command::Play(a) => play(a),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(EXIT_CHECK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Capacity { .. } => EXIT_CAPACITY,
                Error::Usage { .. } | Error::Configuration(_) | Error::MalformedState { .. } => {
                    EXIT_USAGE
                }
                _ => EXIT_CHECK,
            })
        }
    }
}

fn parse_policy(token: &str) -> Result<PolicySpec, Error> {
    token.parse()
}

fn print_json(value: &serde_json::Value) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn solve(a: SolveArgs) -> Result<Outcome, Error> {
    let game = parse_game(&a.game)?;
    let mut policy = parse_policy(&a.policy)?;
    if let Some(seed) = a.seed {
        policy = policy.reseeded(seed);
    }
    let evaluator = Evaluator::parse(&a.evaluator)?;
    let root = game.initial_state();
    let started = Instant::now();
    let (outcome, explored, snapshot) = match policy.build::<f64>() {
        Some(mut p) => {
            let rule = if a.strong {
                ResolutionRule::Strong
            } else {
                ResolutionRule::Weak
            };
            let mut engine: Engine<'_, f64> = Engine::new(game.as_ref(), evaluator)
                .with_rule(rule)
                .with_state_cap(a.state_cap.unwrap_or(DEFAULT_STATE_CAP))
                .with_verbose(a.verbose);
            let outcome =
                engine.search(&root, p.as_mut(), a.budget.resolve(Budget::unlimited())?)?;
            let explored = engine.table().explored_count();
            let snapshot = match &a.snapshot {
                Some(_) => {
                    let mut buf = Vec::new();
                    engine.table().write_snapshot(&mut buf)?;
                    Some(buf)
                }
                None => None,
            };
            (outcome, explored, snapshot)
        }
        None => {
            let mut engine: NoCompletionEngine<'_, f64> =
                NoCompletionEngine::new(game.as_ref(), evaluator);
            let outcome = engine.search(&root, a.budget.resolve(Budget::unlimited())?)?;
            let explored = engine.table().explored_count();
            let snapshot = match &a.snapshot {
                Some(_) => {
                    let mut buf = Vec::new();
                    engine.table().write_snapshot(&mut buf)?;
                    Some(buf)
                }
                None => None,
            };
            (outcome, explored, snapshot)
        }
    };
    let elapsed = started.elapsed();
    if let (Some(path), Some(bytes)) = (&a.snapshot, snapshot) {
        std::fs::write(path, bytes)?;
    }
    print_json(&json!({
        "game": game.name(),
        "policy": policy.to_string(),
        "resolved": u8::from(outcome.resolved),
        "c_root": outcome.c_root,
        "v_root": outcome.v_root,
        "iterations": outcome.iterations,
        "explored": explored,
        "budget_exhausted": outcome.budget_exhausted,
        "elapsed_ms": elapsed.as_secs_f64() * 1e3,
    }))?;
    Ok(if a.require_resolved && !outcome.resolved {
        Outcome::CheckFailed
    } else {
        Outcome::Ok
    })
}

fn verify(a: VerifyArgs) -> Result<Outcome, Error> {
    let mut matrix = VerifyMatrix::default();
    if !a.games.is_empty() {
        matrix.games = a.games;
    }
    if !a.policies.is_empty() {
        matrix.policies = a
            .policies
            .iter()
            .map(|p| parse_policy(p))
            .collect::<Result<_, _>>()?;
    }
    if !a.evaluators.is_empty() {
        matrix.evaluators = a.evaluators;
    }
    if !a.seeds.is_empty() {
        matrix.seeds = a.seeds;
    }
    let options = VerifyOptions {
        expect_progress_violation: a.expect_progress_violation,
        inject_corruption: a.inject_corruption,
        state_cap: a.state_cap,
    };
    let report = run_verify(&matrix, &options)?;
    {
        let mut out = BufWriter::new(io::stdout().lock());
        for line in report.matrix_lines() {
            writeln!(out, "{line}")?;
        }
        writeln!(
            out,
            "{}",
            if report.passed {
                "verify: PASS"
            } else {
                "verify: FAIL"
            }
        )?;
    }
    if let Some(dir) = a.out {
        std::fs::create_dir_all(&dir)?;
        let mut json = serde_json::to_string_pretty(&report)?;
        json.push('\n');
        std::fs::write(dir.join("verify.json"), json)?;
    }
    Ok(if report.passed {
        Outcome::Ok
    } else {
        Outcome::CheckFailed
    })
}

fn tournament(a: TournamentArgs) -> Result<Outcome, Error> {
    let evaluators: EvaluatorSetSpec = a.evaluators.parse()?;
    for g in &a.games {
        parse_game(g)?;
    }
    let mut config = TournamentConfig::new(
        a.games,
        parse_policy(&a.policy_a)?,
        parse_policy(&a.policy_b)?,
        evaluators,
    );
    config.repetitions = a.repetitions;
    config.budget = a.budget.resolve(config.budget)?;
    config.seed = a.seed;
    config.workers = a.workers;
    config.ply_cap = a.ply_cap;
    config.resamples = a.resamples;
    config.timings = a.timings;
    let output = run_tournament(&config)?;
    if output.report.adjudicated > 0 {
        eprintln!(
            "warning: {} match(es) reached the ply cap and were scored as draws",
            output.report.adjudicated
        );
    }
    if let Some(dir) = &a.out {
        output.write_to(dir)?;
    }
    print_json(&serde_json::to_value(&output.report)?)?;
    Ok(Outcome::Ok)
}

fn play(a: PlayArgs) -> Result<Outcome, Error> {
    let game = parse_game(&a.game)?;
    let policy = parse_policy(&a.policy)?;
    let evaluator = Evaluator::parse(&a.evaluator)?;
    let human = Player::from_number(a.human).ok_or_else(|| Error::Usage {
        kind: "player",
        token: a.human.to_string(),
        reason: "expected 1 or 2".into(),
    })?;
    let default = if policy.is_class_member() {
        Budget::unlimited()
    } else {
        Budget::iterations(1_000)
    };
    let budget = a.budget.resolve(default)?;
    play_session(
        game.as_ref(),
        &policy,
        &evaluator,
        budget,
        human,
        io::stdin().lock(),
        io::stdout().lock(),
    )?;
    Ok(Outcome::Ok)
}

fn default_golden_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/golden"))
}

fn oracle(a: OracleArgs) -> Result<Outcome, Error> {
    let game = parse_game(&a.game)?;
    let table = oracle_minimax(
        game.as_ref(),
        &game.initial_state(),
        a.state_cap.unwrap_or(DEFAULT_STATE_CAP),
    )?;
    let golden = GoldenFile::from_oracle(game.as_ref(), &table);
    let dir = a.golden_dir.unwrap_or_else(default_golden_dir);
    let path = GoldenFile::path_in(&dir, &game.name());
    let status = if a.bless {
        std::fs::create_dir_all(&dir)?;
        golden.store(&path)?;
        "blessed"
    } else if path.exists() {
        if GoldenFile::load(&path)? == golden {
            "match"
        } else {
            "mismatch"
        }
    } else {
        "no-golden"
    };
    print_json(&json!({
        "game": golden.game,
        "root_value": golden.root_value,
        "reachable": golden.reachable,
        "digest": golden.digest,
        "golden": status,
        "path": path.display().to_string(),
    }))?;
    Ok(if status == "mismatch" {
        Outcome::CheckFailed
    } else {
        Outcome::Ok
    })
}
