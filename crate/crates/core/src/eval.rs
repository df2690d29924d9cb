//! Terminal evaluators (`f_t`) and heuristic evaluators for non-terminal
//! leaves.
//!
//! Every built-in heuristic stays strictly inside `(-1, 1)`, so heuristic
//! magnitude never competes with a resolved win or loss.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::game::{Game, StateKey};

/// Largest magnitude a perturbed value is clamped to.
pub const HEURISTIC_BOUND: f64 = 0.999;
/// Default perturbation amplitude.
pub const DEFAULT_PERTURB_AMPLITUDE: f64 = 0.05;

pub trait TerminalEvaluator: Send + Sync {
    fn label(&self) -> String;

    /// Score of a state already known to be terminal.
    fn score(&self, game: &dyn Game, s: &StateKey) -> Result<f64>;
}

pub trait HeuristicEvaluator: Send + Sync {
    fn label(&self) -> String;

    fn value(&self, game: &dyn Game, s: &StateKey) -> f64;
}

/// `f_t = f_b`.
#[derive(Clone, Copy, Debug, Default)]
pub struct PayoffTerminal;

impl TerminalEvaluator for PayoffTerminal {
    fn label(&self) -> String {
        "payoff".into()
    }

    fn score(&self, game: &dyn Game, s: &StateKey) -> Result<f64> {
        Ok(game.payoff(s)?.value() as f64)
    }
}

/// `f_t = f_b * (1 + 0.1 * empty_cells)`: quicker wins score higher.
#[derive(Clone, Copy, Debug, Default)]
pub struct MarginTerminal;

impl TerminalEvaluator for MarginTerminal {
    fn label(&self) -> String {
        "margin".into()
    }

    fn score(&self, game: &dyn Game, s: &StateKey) -> Result<f64> {
        let payoff = game.payoff(s)?.value() as f64;
        let empty = game.empty_cells(s).unwrap_or(0) as f64;
        Ok(payoff * (1.0 + 0.1 * empty))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroHeuristic;

impl HeuristicEvaluator for ZeroHeuristic {
    fn label(&self) -> String {
        "zero".into()
    }

    fn value(&self, _game: &dyn Game, _s: &StateKey) -> f64 {
        0.0
    }
}

/// Pseudo-random but deterministic value per `(seed, state)`.
#[derive(Clone, Copy, Debug)]
pub struct HashHeuristic {
    pub seed: u64,
}

impl HeuristicEvaluator for HashHeuristic {
    fn label(&self) -> String {
        format!("hash:{}", self.seed)
    }

    fn value(&self, _game: &dyn Game, s: &StateKey) -> f64 {
        0.99 * unit_interval(hash_key(self.seed, s.as_bytes()))
    }
}

/// The game's own hand-written positional estimate.
#[derive(Clone, Copy, Debug, Default)]
pub struct MaterialHeuristic;

impl HeuristicEvaluator for MaterialHeuristic {
    fn label(&self) -> String {
        "material".into()
    }

    fn value(&self, game: &dyn Game, s: &StateKey) -> f64 {
        0.98 * game.material(s).clamp(-1.0, 1.0)
    }
}

/// Fixed lookup table, falling back to a default for unlisted states.
#[derive(Clone, Debug)]
pub struct TableHeuristic {
    label: String,
    values: HashMap<StateKey, f64>,
    default: f64,
}

#[derive(Deserialize)]
struct TableFile {
    #[serde(default)]
    key_encoding: Option<String>,
    #[serde(default)]
    default: f64,
    values: BTreeMap<String, f64>,
}

impl TableHeuristic {
    pub fn new(
        label: impl Into<String>,
        values: HashMap<StateKey, f64>,
        default: f64,
    ) -> Result<Self> {
        let inside = |v: f64| v.is_finite() && v.abs() < 1.0;
        if !inside(default) || values.values().any(|&v| !inside(v)) {
            return Err(Error::Configuration(
                "table heuristic values must be finite and inside (-1, 1)".into(),
            ));
        }
        Ok(TableHeuristic {
            label: label.into(),
            values,
            default,
        })
    }

    /// Parses `{"key_encoding": "hex"|"utf8", "default": x, "values": {key: v}}`.
    pub fn from_json(label: impl Into<String>, text: &str) -> Result<Self> {
        let file: TableFile = serde_json::from_str(text)?;
        let utf8 = match file.key_encoding.as_deref() {
            None | Some("hex") => false,
            Some("utf8") => true,
            Some(other) => {
                return Err(Error::Configuration(format!(
                    "unknown key_encoding `{other}`"
                )))
            }
        };
        let values = file
            .values
            .into_iter()
            .map(|(k, v)| {
                let key = if utf8 {
                    StateKey::new(k.into_bytes())
                } else {
                    StateKey::from_hex(&k)?
                };
                Ok((key, v))
            })
            .collect::<Result<HashMap<_, _>>>()?;
        TableHeuristic::new(label, values, file.default)
    }
}

impl HeuristicEvaluator for TableHeuristic {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn value(&self, _game: &dyn Game, s: &StateKey) -> f64 {
        self.values.get(s).copied().unwrap_or(self.default)
    }
}

/// `base + amplitude * noise(seed, state)`, clamped inside `(-1, 1)`.
#[derive(Clone)]
pub struct PerturbedHeuristic {
    base: Arc<dyn HeuristicEvaluator>,
    seed: u64,
    amplitude: f64,
}

pub fn perturb(base: Arc<dyn HeuristicEvaluator>, seed: u64, amplitude: f64) -> PerturbedHeuristic {
    PerturbedHeuristic {
        base,
        seed,
        amplitude,
    }
}

impl HeuristicEvaluator for PerturbedHeuristic {
    fn label(&self) -> String {
        format!(
            "perturb:{}:{}:{}",
            self.base.label(),
            self.seed,
            self.amplitude
        )
    }

    fn value(&self, game: &dyn Game, s: &StateKey) -> f64 {
        let base = self.base.value(game, s);
        if self.amplitude == 0.0 {
            return base;
        }
        let noise = unit_interval(hash_key(self.seed ^ 0xA5A5_5A5A_0F0F_F0F0, s.as_bytes()));
        (base + self.amplitude * noise).clamp(-HEURISTIC_BOUND, HEURISTIC_BOUND)
    }
}

/// A terminal evaluator paired with a heuristic evaluator.
#[derive(Clone)]
pub struct Evaluator {
    terminal: Arc<dyn TerminalEvaluator>,
    heuristic: Arc<dyn HeuristicEvaluator>,
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Evaluator({})", self.label())
    }
}

impl Default for Evaluator {
    fn default() -> Self {
        Evaluator::new(Arc::new(PayoffTerminal), Arc::new(ZeroHeuristic))
    }
}

impl Evaluator {
    pub fn new(
        terminal: Arc<dyn TerminalEvaluator>,
        heuristic: Arc<dyn HeuristicEvaluator>,
    ) -> Self {
        Evaluator {
            terminal,
            heuristic,
        }
    }

    pub fn with_heuristic(heuristic: Arc<dyn HeuristicEvaluator>) -> Self {
        Evaluator::new(Arc::new(PayoffTerminal), heuristic)
    }

    pub fn heuristic(&self) -> &Arc<dyn HeuristicEvaluator> {
        &self.heuristic
    }

    pub fn label(&self) -> String {
        let h = self.heuristic.label();
        match self.terminal.label().as_str() {
            "payoff" => h,
            "margin" if h == "zero" => "margin".into(),
            t => format!("{h}+{t}"),
        }
    }

    /// `f_t(s)`; a contract violation when `s` is not terminal.
    pub fn eval_terminal(&self, game: &dyn Game, s: &StateKey) -> Result<f64> {
        if !game.is_terminal(s)? {
            return Err(Error::ContractViolation(format!(
                "terminal evaluation requested for non-terminal state {s}"
            )));
        }
        self.terminal.score(game, s)
    }

    pub fn eval_heuristic(&self, game: &dyn Game, s: &StateKey) -> f64 {
        self.heuristic.value(game, s)
    }

    /// Parses an evaluator from its CLI string.
    ///
    /// Heuristics: `zero`, `hash:<seed>`, `material`, `table:<path.json>`
    /// (`table:trap` is the table shipped with the trap fixture),
    /// `perturb:<base>:<seed>:<amp>`. A `+margin` suffix (or `margin` alone)
    /// swaps the terminal evaluator for the margin score.
    pub fn parse(token: &str) -> Result<Evaluator> {
        if token == "margin" {
            return Ok(Evaluator::new(
                Arc::new(MarginTerminal),
                Arc::new(ZeroHeuristic),
            ));
        }
        if let Some(h) = token.strip_suffix("+margin") {
            return Ok(Evaluator::new(
                Arc::new(MarginTerminal),
                parse_heuristic(h)?,
            ));
        }
        Ok(Evaluator::with_heuristic(parse_heuristic(token)?))
    }
}

pub fn parse_heuristic(token: &str) -> Result<Arc<dyn HeuristicEvaluator>> {
    let bad = |reason: &str| Error::usage("evaluator", token, reason);
    if token == "zero" {
        return Ok(Arc::new(ZeroHeuristic));
    }
    if token == "material" {
        return Ok(Arc::new(MaterialHeuristic));
    }
    if let Some(seed) = token.strip_prefix("hash:") {
        let seed = seed
            .parse()
            .map_err(|_| bad("hash seed must be an integer"))?;
        return Ok(Arc::new(HashHeuristic { seed }));
    }
    if token == "table:trap" {
        return Ok(Arc::new(TableHeuristic::from_json(
            token,
            crate::game::TRAP_TABLE_JSON,
        )?));
    }
    if let Some(path) = token.strip_prefix("table:") {
        let text = std::fs::read_to_string(path).map_err(|e| bad(&e.to_string()))?;
        return Ok(Arc::new(
            TableHeuristic::from_json(token, &text).map_err(|e| bad(&e.to_string()))?,
        ));
    }
    if let Some(rest) = token.strip_prefix("perturb:") {
        let mut parts = rest.rsplitn(3, ':');
        let amp = parts.next();
        let seed = parts.next();
        let base = parts.next();
        let (Some(amp), Some(seed), Some(base)) = (amp, seed, base) else {
            return Err(bad("expected perturb:<base>:<seed>:<amp>"));
        };
        let amp: f64 = amp.parse().map_err(|_| bad("amplitude must be a number"))?;
        if !(0.0..1.0).contains(&amp) {
            return Err(bad("amplitude must lie in [0, 1)"));
        }
        let seed = seed.parse().map_err(|_| bad("seed must be an integer"))?;
        return Ok(Arc::new(perturb(parse_heuristic(base)?, seed, amp)));
    }
    Err(bad("unknown evaluator"))
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of `bytes` under `seed`.
pub(crate) fn hash_key(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = mix64(seed);
    for chunk in bytes.chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        h = mix64(h ^ u64::from_le_bytes(word));
    }
    mix64(h ^ bytes.len() as u64)
}

/// Maps a hash to `[-1, 1)`.
fn unit_interval(h: u64) -> f64 {
    ((h >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
}
