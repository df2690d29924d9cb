//! Concrete members of the unbounded minimax-based class and the
//! no-completion baseline.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::game::{Game, StateKey};
use crate::scalar::Scalar;
use crate::search::{
    Budget, DecisionMode, DescentContext, Engine, NoCompletionEngine, NodeId, SearchOutcome,
    SearchPolicy,
};

/// Unbounded best-first minimax: one extension per iteration along the
/// best unresolved line.
#[derive(Clone, Copy, Debug, Default)]
pub struct Ubfm;

/// Descent: extends the best unresolved line until it reaches a terminal
/// or resolved state.
#[derive(Clone, Copy, Debug, Default)]
pub struct Descent;

/// Descent that picks a uniformly random unresolved child with
/// probability `epsilon`.
#[derive(Clone, Debug)]
pub struct EpsGreedy {
    epsilon: f64,
    rng: ChaCha8Rng,
}

/// Best-child policy that keeps descending after an extension only while
/// the line is shorter than `cap` states.
#[derive(Clone, Copy, Debug)]
pub struct DepthCapped {
    cap: usize,
}

/// Uniformly random child, fair coin for continuing.
#[derive(Clone, Debug)]
pub struct RandomChild {
    rng: ChaCha8Rng,
}

fn best<V: Scalar>(ctx: &DescentContext<'_, V>, unresolved: &[NodeId]) -> NodeId {
    ctx.table
        .completed_best_child(ctx.node, unresolved)
        .expect("engine never passes an empty candidate set")
}

impl<V: Scalar> SearchPolicy<V> for Ubfm {
    fn name(&self) -> String {
        "ubfm".into()
    }

    fn continue_descent(&mut self, _ctx: &DescentContext<'_, V>) -> bool {
        false
    }

    fn priority_child(&mut self, ctx: &DescentContext<'_, V>, unresolved: &[NodeId]) -> NodeId {
        best(ctx, unresolved)
    }
}

impl<V: Scalar> SearchPolicy<V> for Descent {
    fn name(&self) -> String {
        "descent".into()
    }

    fn continue_descent(&mut self, _ctx: &DescentContext<'_, V>) -> bool {
        true
    }

    fn priority_child(&mut self, ctx: &DescentContext<'_, V>, unresolved: &[NodeId]) -> NodeId {
        best(ctx, unresolved)
    }
}

impl EpsGreedy {
    pub fn new(epsilon: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Configuration(format!(
                "epsilon must lie in [0, 1], got {epsilon}"
            )));
        }
        Ok(EpsGreedy {
            epsilon,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

impl<V: Scalar> SearchPolicy<V> for EpsGreedy {
    fn name(&self) -> String {
        format!("eps:{}", self.epsilon)
    }

    fn continue_descent(&mut self, _ctx: &DescentContext<'_, V>) -> bool {
        true
    }

    fn priority_child(&mut self, ctx: &DescentContext<'_, V>, unresolved: &[NodeId]) -> NodeId {
        if self.rng.gen::<f64>() < self.epsilon {
            unresolved[self.rng.gen_range(0..unresolved.len())]
        } else {
            best(ctx, unresolved)
        }
    }
}

impl DepthCapped {
    pub fn new(cap: usize) -> Result<Self> {
        if cap == 0 {
            return Err(Error::Configuration("depth cap must be at least 1".into()));
        }
        Ok(DepthCapped { cap })
    }
}

impl<V: Scalar> SearchPolicy<V> for DepthCapped {
    fn name(&self) -> String {
        format!("cap:{}", self.cap)
    }

    fn continue_descent(&mut self, ctx: &DescentContext<'_, V>) -> bool {
        ctx.depth < self.cap
    }

    fn priority_child(&mut self, ctx: &DescentContext<'_, V>, unresolved: &[NodeId]) -> NodeId {
        best(ctx, unresolved)
    }
}

impl RandomChild {
    pub fn new(seed: u64) -> Self {
        RandomChild {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl<V: Scalar> SearchPolicy<V> for RandomChild {
    fn name(&self) -> String {
        "rand".into()
    }

    fn continue_descent(&mut self, _ctx: &DescentContext<'_, V>) -> bool {
        self.rng.gen_bool(0.5)
    }

    fn priority_child(&mut self, _ctx: &DescentContext<'_, V>, unresolved: &[NodeId]) -> NodeId {
        unresolved[self.rng.gen_range(0..unresolved.len())]
    }
}

/// Policy selection as given on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicySpec {
    Ubfm,
    Descent,
    EpsGreedy {
        epsilon: f64,
        seed: u64,
    },
    DepthCapped {
        cap: usize,
    },
    RandomChild {
        seed: u64,
    },
    /// Not a class member: the engine variant without completion.
    UbfmNoCompletion,
}

impl PolicySpec {
    /// Representative members of the complete class.
    pub fn class_members() -> Vec<PolicySpec> {
        vec![
            PolicySpec::Ubfm,
            PolicySpec::Descent,
            PolicySpec::EpsGreedy {
                epsilon: 0.3,
                seed: 1,
            },
            PolicySpec::DepthCapped { cap: 3 },
            PolicySpec::RandomChild { seed: 1 },
        ]
    }

    pub fn is_class_member(&self) -> bool {
        !matches!(self, PolicySpec::UbfmNoCompletion)
    }

    /// Same policy with a different generator seed (no-op for
    /// deterministic kinds).
    pub fn reseeded(&self, seed: u64) -> PolicySpec {
        match *self {
            PolicySpec::EpsGreedy { epsilon, .. } => PolicySpec::EpsGreedy { epsilon, seed },
            PolicySpec::RandomChild { .. } => PolicySpec::RandomChild { seed },
            ref other => other.clone(),
        }
    }

    /// Builds the policy object; `None` for the no-completion baseline,
    /// which is a separate engine rather than a policy.
    pub fn build<V: Scalar>(&self) -> Option<Box<dyn SearchPolicy<V>>> {
        Some(match *self {
            PolicySpec::Ubfm => Box::new(Ubfm),
            PolicySpec::Descent => Box::new(Descent),
            PolicySpec::EpsGreedy { epsilon, seed } => {
                Box::new(EpsGreedy::new(epsilon, seed).expect("validated on parse"))
            }
            PolicySpec::DepthCapped { cap } => {
                Box::new(DepthCapped::new(cap).expect("validated on parse"))
            }
            PolicySpec::RandomChild { seed } => Box::new(RandomChild::new(seed)),
            PolicySpec::UbfmNoCompletion => return None,
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Ubfm => f.write_str("ubfm"),
            PolicySpec::Descent => f.write_str("descent"),
            PolicySpec::EpsGreedy { epsilon, seed } => write!(f, "eps:{epsilon}:{seed}"),
            PolicySpec::DepthCapped { cap } => write!(f, "cap:{cap}"),
            PolicySpec::RandomChild { seed } => write!(f, "rand:{seed}"),
            PolicySpec::UbfmNoCompletion => f.write_str("ubfm-nocomp"),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    /// `ubfm`, `descent`, `eps:<epsilon>[:<seed>]`, `cap:<n>`,
    /// `rand[:<seed>]`, `ubfm-nocomp`. Omitted seeds default to 1.
    fn from_str(token: &str) -> Result<Self> {
        let bad = |reason: &str| Error::usage("policy", token, reason);
        let parts: Vec<&str> = token.split(':').collect();
        let seed_at = |i: usize| -> Result<u64> {
            parts.get(i).map_or(Ok(1), |s| {
                s.parse().map_err(|_| bad("seed must be an integer"))
            })
        };
        match parts.as_slice() {
            ["ubfm"] => Ok(PolicySpec::Ubfm),
            ["descent"] => Ok(PolicySpec::Descent),
            ["ubfm-nocomp"] => Ok(PolicySpec::UbfmNoCompletion),
            ["eps", eps] | ["eps", eps, _] => {
                let epsilon: f64 = eps.parse().map_err(|_| bad("epsilon must be a number"))?;
                if !(0.0..=1.0).contains(&epsilon) {
                    return Err(bad("epsilon must lie in [0, 1]"));
                }
                Ok(PolicySpec::EpsGreedy {
                    epsilon,
                    seed: seed_at(2)?,
                })
            }
            ["cap", n] => {
                let cap: usize = n
                    .parse()
                    .map_err(|_| bad("cap must be a positive integer"))?;
                if cap == 0 {
                    return Err(bad("cap must be at least 1"));
                }
                Ok(PolicySpec::DepthCapped { cap })
            }
            ["rand"] | ["rand", _] => Ok(PolicySpec::RandomChild { seed: seed_at(1)? }),
            _ => Err(bad("unknown policy")),
        }
    }
}

/// Runs a search from `state` with the engine matching `spec` and returns
/// the chosen move together with the search outcome.
pub fn search_and_decide<V: Scalar>(
    game: &dyn Game,
    state: &StateKey,
    spec: &PolicySpec,
    evaluator: &Evaluator,
    budget: Budget,
    mode: DecisionMode,
) -> Result<(StateKey, SearchOutcome)> {
    match spec.build::<V>() {
        Some(mut policy) => {
            let mut engine: Engine<'_, V> = Engine::new(game, evaluator.clone());
            let outcome = engine.search(state, policy.as_mut(), budget)?;
            if outcome.iterations == 0
                && !engine.table().record(state).is_some_and(|r| r.explored())
            {
                engine.iterate(state, policy.as_mut())?;
            }
            Ok((engine.decide(state, mode)?, outcome))
        }
        None => {
            let mut engine: NoCompletionEngine<'_, V> =
                NoCompletionEngine::new(game, evaluator.clone());
            let mut outcome = engine.search(state, budget)?;
            if outcome.iterations == 0 {
                engine.iterate(state)?;
                outcome.iterations = 1;
            }
            Ok((engine.decide(state, mode)?, outcome))
        }
    }
}
