//! Deterministic tick-based match engine with scripted bots, and the
//! matched-seed on/off experiment harness built on it.

mod bot;
mod engine;
mod experiment;
mod rng;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bot::{BotKind, BotPolicy, TargetRule};
pub use engine::{run_match, Match, MatchResult, MatchSummary};
pub use experiment::{
    run_experiment, run_experiment_with, ArmDeltas, ArmStats, Arms, ExperimentReport, ExperimentSummary, PairResult,
    PlayerSummary,
};
pub use rng::derive_pair_seed;

use crate::graph::{AssetId, CreationalGraph, GraphError, Holdings};
use crate::metrics::DependencyValueMatrix;
use crate::runtime::{BalancingConfig, Controller, Player, PlayerId, RuntimeError};
use crate::scenario::Scenario;

/// Build cost of an asset: `base + per_value * (sum of dependency values on
/// its direct incoming edges)`, unless overridden.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModel {
    pub base: u64,
    pub per_value: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<AssetId, u64>,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            base: 10,
            per_value: 10,
            overrides: BTreeMap::new(),
        }
    }
}

impl CostModel {
    pub fn cost(
        &self,
        graph: &CreationalGraph,
        matrix: &DependencyValueMatrix,
        asset: &str,
    ) -> Result<u64, GraphError> {
        let incoming = graph.incoming_edges(asset)?;
        if let Some(&c) = self.overrides.get(asset) {
            return Ok(c);
        }
        let mut weight = 0u64;
        for e in incoming {
            weight += u64::from(matrix.value(e.prerequisite.as_str(), asset)?);
        }
        Ok(self.base.saturating_add(self.per_value.saturating_mul(weight)))
    }
}

/// An attempted attack destroys one instance of its target with probability
/// `hit_per_mille / 1000`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackModel {
    pub hit_per_mille: u32,
}

impl Default for AttackModel {
    fn default() -> Self {
        AttackModel { hit_per_mille: 250 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerSetup {
    pub player: Player,
    pub policy: BotPolicy,
}

#[derive(Debug, Clone)]
pub struct MatchConfig {
    pub scenario: Arc<Scenario>,
    pub players: Vec<PlayerSetup>,
    pub balancing: BalancingConfig,
    pub max_ticks: u64,
    pub income_per_tick: u64,
    pub starting_resources: u64,
    pub starting_holdings: Holdings,
    pub cost_model: CostModel,
    pub attack_model: AttackModel,
    pub seed: u64,
}

pub const AI_PLAYER: &str = "ai";
pub const HUMAN_PLAYER: &str = "human";

impl MatchConfig {
    /// The standard two-player setup: player `ai` against player `human`,
    /// balancing enabled and protecting `human`, everything else taken from
    /// the scenario's simulation defaults.
    pub fn two_player(scenario: Arc<Scenario>, ai: BotPolicy, human: BotPolicy, seed: u64) -> Self {
        let sim = scenario.simulation().clone();
        let starting_holdings = sim.starting_holdings_for(scenario.graph());
        MatchConfig {
            balancing: BalancingConfig {
                enabled: true,
                protected_players: BTreeSet::from([PlayerId::new(HUMAN_PLAYER)]),
                policy: scenario.policy().clone(),
            },
            players: vec![
                PlayerSetup {
                    player: Player::new(AI_PLAYER, Controller::Ai),
                    policy: ai,
                },
                PlayerSetup {
                    player: Player::new(HUMAN_PLAYER, Controller::HumanProxy),
                    policy: human,
                },
            ],
            max_ticks: sim.max_ticks,
            income_per_tick: sim.income_per_tick,
            starting_resources: sim.starting_resources,
            starting_holdings,
            cost_model: sim.build_cost,
            attack_model: sim.attack,
            seed,
            scenario,
        }
    }

    /// Rusher AI against a builder human: the configuration the balancing
    /// mechanism is designed for.
    pub fn rusher_vs_builder(scenario: Arc<Scenario>, seed: u64) -> Self {
        Self::two_player(scenario, BotPolicy::rusher(), BotPolicy::builder(), seed)
    }

    pub fn with_balancing(mut self, enabled: bool) -> Self {
        self.balancing.enabled = enabled;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let invalid = |m: String| Err(SimError::InvalidConfig(m));
        if self.max_ticks == 0 {
            return invalid("max_ticks must be at least 1".into());
        }
        if self.income_per_tick == 0 {
            return invalid("income_per_tick must be at least 1".into());
        }
        if self.players.is_empty() {
            return invalid("a match needs at least one player".into());
        }
        let mut ids = BTreeSet::new();
        for p in &self.players {
            if !ids.insert(&p.player.id) {
                return invalid(format!("duplicate player `{}`", p.player.id));
            }
            if p.policy.aggression_per_mille > 1000 {
                return invalid(format!("aggression for `{}` exceeds 1000 per mille", p.player.id));
            }
        }
        for id in &self.balancing.protected_players {
            if !ids.contains(id) {
                return invalid(format!("protected player `{id}` is not in the match"));
            }
        }
        if self.attack_model.hit_per_mille > 1000 {
            return invalid("hit_per_mille exceeds 1000".into());
        }
        let graph = self.scenario.graph();
        let report = graph.validate();
        if !report.is_clean() {
            return invalid(format!("scenario graph is invalid:\n{report}"));
        }
        for (asset, _) in self.starting_holdings.iter() {
            if !graph.contains(asset.as_str()) {
                return invalid(format!("starting holdings name unknown asset `{asset}`"));
            }
        }
        for asset in self.cost_model.overrides.keys() {
            if !graph.contains(asset.as_str()) {
                return invalid(format!("cost override names unknown asset `{asset}`"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid match config: {0}")]
    InvalidConfig(String),
    #[error("match already finished")]
    Finished,
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
