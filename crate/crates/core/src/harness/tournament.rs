//! Self-play tournaments between two policies.
//!
//! For every game, repetition, ordered pair of distinct evaluators `(i, j)`
//! and color assignment, one match is played: policy A uses evaluator `i`,
//! policy B uses evaluator `j`. Scores are from A's perspective.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{bootstrap_ci, mean, normal_ci, stratified_mean, Interval};
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::game::{parse_game, Game, Player};
use crate::policy::{search_and_decide, PolicySpec};
use crate::search::{Budget, DecisionMode};

pub const DEFAULT_PLY_CAP: usize = 10_000;
pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const DEFAULT_MOVE_ITERATIONS: u64 = 100;

/// How the evaluators of each repetition are produced.
#[derive(Clone, Debug, PartialEq)]
pub enum EvaluatorSetSpec {
    /// The same explicit list in every repetition: `list:<e1>;<e2>;...`.
    List(Vec<String>),
    /// `size` perturbations of `base`, freshly seeded per repetition:
    /// `set:<size>:<amp>:<base>`.
    Perturbed {
        size: usize,
        amplitude: f64,
        base: String,
    },
}

impl EvaluatorSetSpec {
    pub fn size(&self) -> usize {
        match self {
            EvaluatorSetSpec::List(v) => v.len(),
            EvaluatorSetSpec::Perturbed { size, .. } => *size,
        }
    }

    /// Evaluator strings for repetition `rep`.
    pub fn members(&self, seed: u64, rep: usize) -> Vec<String> {
        match self {
            EvaluatorSetSpec::List(v) => v.clone(),
            EvaluatorSetSpec::Perturbed {
                size,
                amplitude,
                base,
            } => (0..*size)
                .map(|i| {
                    let s = derive_seed(&[seed, 0x5E7, rep as u64, i as u64]) % 1_000_000_007;
                    format!("perturb:{base}:{s}:{amplitude}")
                })
                .collect(),
        }
    }
}

impl FromStr for EvaluatorSetSpec {
    type Err = Error;

    fn from_str(token: &str) -> Result<Self> {
        let bad = |reason: &str| Error::usage("evaluator set", token, reason);
        let spec = if let Some(rest) = token.strip_prefix("list:") {
            EvaluatorSetSpec::List(rest.split(';').map(str::to_owned).collect())
        } else if let Some(rest) = token.strip_prefix("set:") {
            let mut parts = rest.splitn(3, ':');
            let (Some(size), Some(amp), Some(base)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(bad("expected set:<size>:<amp>:<base>"));
            };
            EvaluatorSetSpec::Perturbed {
                size: size.parse().map_err(|_| bad("size must be an integer"))?,
                amplitude: amp.parse().map_err(|_| bad("amplitude must be a number"))?,
                base: base.to_owned(),
            }
        } else {
            return Err(bad("expected list:... or set:..."));
        };
        if spec.size() < 2 {
            return Err(bad("an evaluator set needs at least two members"));
        }
        for e in spec.members(0, 0) {
            Evaluator::parse(&e).map_err(|err| bad(&err.to_string()))?;
        }
        Ok(spec)
    }
}

#[derive(Clone, Debug)]
pub struct TournamentConfig {
    pub games: Vec<String>,
    pub policy_a: PolicySpec,
    pub policy_b: PolicySpec,
    pub evaluators: EvaluatorSetSpec,
    pub repetitions: usize,
    pub budget: Budget,
    pub seed: u64,
    pub ply_cap: usize,
    pub workers: usize,
    pub resamples: usize,
    /// Adds elapsed wall-clock time to the report (breaks byte-identity).
    pub timings: bool,
}

impl TournamentConfig {
    pub fn new(
        games: Vec<String>,
        policy_a: PolicySpec,
        policy_b: PolicySpec,
        evaluators: EvaluatorSetSpec,
    ) -> Self {
        TournamentConfig {
            games,
            policy_a,
            policy_b,
            evaluators,
            repetitions: 1,
            budget: Budget::iterations(DEFAULT_MOVE_ITERATIONS),
            seed: 0,
            ply_cap: DEFAULT_PLY_CAP,
            workers: 1,
            resamples: DEFAULT_RESAMPLES,
            timings: false,
        }
    }
}

/// Which side moved first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FirstMover {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub game: String,
    pub policy_a: String,
    pub policy_b: String,
    pub eval_a: String,
    pub eval_b: String,
    pub first_mover: FirstMover,
    pub score: i8,
    pub plies: usize,
    pub budget: String,
    pub seed: u64,
    /// Stopped at the ply cap and scored as a draw.
    pub adjudicated: bool,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    game: &'a str,
    #[serde(rename = "policyA")]
    policy_a: &'a str,
    #[serde(rename = "policyB")]
    policy_b: &'a str,
    #[serde(rename = "evalA")]
    eval_a: &'a str,
    #[serde(rename = "evalB")]
    eval_b: &'a str,
    first_mover: FirstMover,
    score: i8,
    plies: usize,
    seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSummary {
    pub game: String,
    pub matches: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TournamentReport {
    pub policy_a: String,
    pub policy_b: String,
    pub evaluator_set: String,
    pub repetitions: usize,
    pub budget: String,
    pub seed: u64,
    pub games: Vec<GameSummary>,
    pub overall_mean: f64,
    pub bootstrap: Interval,
    pub bootstrap_resamples: usize,
    pub match_count: usize,
    pub adjudicated: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_ms: Option<f64>,
}

pub struct TournamentOutput {
    pub matches: Vec<MatchRecord>,
    pub report: TournamentReport,
}

impl TournamentOutput {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for m in &self.matches {
            w.serialize(CsvRow {
                game: &m.game,
                policy_a: &m.policy_a,
                policy_b: &m.policy_b,
                eval_a: &m.eval_a,
                eval_b: &m.eval_b,
                first_mover: m.first_mover,
                score: m.score,
                plies: m.plies,
                seed: m.seed,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `matches.csv` and `report.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_csv(fs::File::create(dir.join("matches.csv"))?)?;
        let mut json = serde_json::to_string_pretty(&self.report)?;
        json.push('\n');
        fs::write(dir.join("report.json"), json)?;
        Ok(())
    }
}

fn budget_label(b: &Budget) -> String {
    match (b.iterations, b.wall_clock) {
        (Some(n), None) => format!("iters:{n}"),
        (None, Some(d)) => format!("ms:{}", d.as_millis()),
        (Some(n), Some(d)) => format!("iters:{n}+ms:{}", d.as_millis()),
        (None, None) => "unlimited".into(),
    }
}

/// Deterministic seed derivation from a list of components.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h = 0x243F_6A88_85A3_08D3u64;
    for &p in parts {
        h = splitmix(h ^ p);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Pairing {
    game: usize,
    eval_a: String,
    eval_b: String,
    first: FirstMover,
    seed: u64,
}

/// Plays one match and returns its record.
#[allow(clippy::too_many_arguments)]
pub fn play_match(
    game: &dyn Game,
    policy_a: &PolicySpec,
    policy_b: &PolicySpec,
    eval_a: &Evaluator,
    eval_b: &Evaluator,
    first: FirstMover,
    budget: Budget,
    seed: u64,
    ply_cap: usize,
) -> Result<(i8, usize, bool)> {
    let mut state = game.initial_state();
    let mut plies = 0;
    while !game.is_terminal(&state)? {
        if plies >= ply_cap {
            return Ok((0, plies, true));
        }
        let a_moves = (game.mover(&state)? == Player::One) == (first == FirstMover::A);
        let (spec, ev) = if a_moves {
            (policy_a, eval_a)
        } else {
            (policy_b, eval_b)
        };
        let spec = spec.reseeded(derive_seed(&[seed, plies as u64]));
        let (next, _) =
            search_and_decide::<f64>(game, &state, &spec, ev, budget, DecisionMode::Safe)?;
        state = next;
        plies += 1;
    }
    let p1 = game.payoff(&state)?.value();
    Ok((if first == FirstMover::A { p1 } else { -p1 }, plies, false))
}

pub fn run_tournament(config: &TournamentConfig) -> Result<TournamentOutput> {
    if config.games.is_empty() || config.repetitions == 0 {
        return Err(Error::Configuration(
            "a tournament needs at least one game and one repetition".into(),
        ));
    }
    if config.evaluators.size() < 2 {
        return Err(Error::Configuration(
            "an evaluator set needs at least two members".into(),
        ));
    }
    if config.budget.is_unlimited()
        && !(config.policy_a.is_class_member() && config.policy_b.is_class_member())
    {
        return Err(Error::Configuration(
            "the no-completion baseline needs a finite budget".into(),
        ));
    }
    let started = Instant::now();
    let games: Vec<Arc<dyn Game>> = config
        .games
        .iter()
        .map(|g| parse_game(g))
        .collect::<Result<_>>()?;
    let mut pairings = Vec::new();
    for (gi, _) in games.iter().enumerate() {
        for rep in 0..config.repetitions {
            let members = config.evaluators.members(config.seed, rep);
            for (i, ea) in members.iter().enumerate() {
                for (j, eb) in members.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    for first in [FirstMover::A, FirstMover::B] {
                        // Keyed by seating so a mirrored match shares its seed.
                        let (p1, p2) = if first == FirstMover::A {
                            (i, j)
                        } else {
                            (j, i)
                        };
                        pairings.push(Pairing {
                            game: gi,
                            eval_a: ea.clone(),
                            eval_b: eb.clone(),
                            first,
                            seed: derive_seed(&[
                                config.seed,
                                gi as u64,
                                rep as u64,
                                p1 as u64,
                                p2 as u64,
                            ]),
                        });
                    }
                }
            }
        }
    }
    let play = |p: &Pairing| -> Result<MatchRecord> {
        let game = games[p.game].as_ref();
        let (score, plies, adjudicated) = play_match(
            game,
            &config.policy_a,
            &config.policy_b,
            &Evaluator::parse(&p.eval_a)?,
            &Evaluator::parse(&p.eval_b)?,
            p.first,
            config.budget,
            p.seed,
            config.ply_cap,
        )?;
        Ok(MatchRecord {
            game: config.games[p.game].clone(),
            policy_a: config.policy_a.to_string(),
            policy_b: config.policy_b.to_string(),
            eval_a: p.eval_a.clone(),
            eval_b: p.eval_b.clone(),
            first_mover: p.first,
            score,
            plies,
            budget: budget_label(&config.budget),
            seed: p.seed,
            adjudicated,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::Configuration(format!("cannot start worker pool: {e}")))?;
    // Indexed parallel collection keeps the pairing order.
    let matches: Vec<MatchRecord> =
        pool.install(|| pairings.par_iter().map(play).collect::<Result<_>>())?;
    let report = summarize(config, &matches, started.elapsed())?;
    Ok(TournamentOutput { matches, report })
}

fn summarize(
    config: &TournamentConfig,
    matches: &[MatchRecord],
    elapsed: Duration,
) -> Result<TournamentReport> {
    let mut strata: Vec<Vec<f64>> = Vec::new();
    let mut games = Vec::new();
    for name in &config.games {
        let scores: Vec<f64> = matches
            .iter()
            .filter(|m| &m.game == name)
            .map(|m| f64::from(m.score))
            .collect();
        let ci = normal_ci(&scores)?;
        games.push(GameSummary {
            game: name.clone(),
            matches: scores.len(),
            mean: mean(&scores),
            ci_low: ci.low,
            ci_high: ci.high,
        });
        strata.push(scores);
    }
    let bootstrap = bootstrap_ci(
        &strata,
        0.95,
        config.resamples,
        derive_seed(&[config.seed, 0xB007]),
    )?;
    Ok(TournamentReport {
        policy_a: config.policy_a.to_string(),
        policy_b: config.policy_b.to_string(),
        evaluator_set: describe_set(&config.evaluators),
        repetitions: config.repetitions,
        budget: budget_label(&config.budget),
        seed: config.seed,
        games,
        overall_mean: stratified_mean(&strata),
        bootstrap,
        bootstrap_resamples: config.resamples,
        match_count: matches.len(),
        adjudicated: matches.iter().filter(|m| m.adjudicated).count(),
        wall_clock_ms: config.timings.then_some(elapsed.as_secs_f64() * 1e3),
    })
}

fn describe_set(spec: &EvaluatorSetSpec) -> String {
    match spec {
        EvaluatorSetSpec::List(v) => format!("list:{}", v.join(";")),
        EvaluatorSetSpec::Perturbed {
            size,
            amplitude,
            base,
        } => format!("set:{size}:{amplitude}:{base}"),
    }
}

/// Overall mean recomputed from CSV text with per-game equal weights.
pub fn overall_mean_from_csv(text: &str) -> Result<f64> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut order: Vec<String> = Vec::new();
    let mut strata: Vec<Vec<f64>> = Vec::new();
    for row in reader.records() {
        let row = row?;
        let game = row.get(0).unwrap_or_default().to_owned();
        let score: f64 = row
            .get(6)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Configuration("bad score column".into()))?;
        match order.iter().position(|g| *g == game) {
            Some(i) => strata[i].push(score),
            None => {
                order.push(game);
                strata.push(vec![score]);
            }
        }
    }
    Ok(stratified_mean(&strata))
}
