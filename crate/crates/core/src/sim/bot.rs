use std::cmp::Reverse;
use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{AssetId, CreationalGraph, Holdings};
use crate::metrics::AggregateTable;
use crate::runtime::{MatchState, PlayerId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BotKind {
    /// Grows the tech tree, most significant unowned asset first.
    Builder,
    /// Buys the cheapest unowned assets, then attacks relentlessly.
    Rusher,
    /// Builds like a builder, attacks occasionally once established.
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetRule {
    /// The opponent asset with the highest aggregate value.
    HighestValue,
    /// A uniformly random opponent, then a uniformly random owned asset type.
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BotPolicy {
    pub kind: BotKind,
    /// Minimum owned instances before the bot attacks; `None` never attacks.
    pub attack_threshold: Option<u64>,
    /// Chance per ready tick that the bot tries to attack.
    pub aggression_per_mille: u32,
    pub target: TargetRule,
}

impl BotPolicy {
    pub fn builder() -> Self {
        BotPolicy {
            kind: BotKind::Builder,
            attack_threshold: None,
            aggression_per_mille: 0,
            target: TargetRule::HighestValue,
        }
    }

    pub fn rusher() -> Self {
        BotPolicy {
            kind: BotKind::Rusher,
            attack_threshold: Some(3),
            aggression_per_mille: 1000,
            target: TargetRule::HighestValue,
        }
    }

    pub fn balanced() -> Self {
        BotPolicy {
            kind: BotKind::Balanced,
            attack_threshold: Some(8),
            aggression_per_mille: 300,
            target: TargetRule::Random,
        }
    }

    pub fn preset(kind: BotKind) -> Self {
        match kind {
            BotKind::Builder => Self::builder(),
            BotKind::Rusher => Self::rusher(),
            BotKind::Balanced => Self::balanced(),
        }
    }

    pub(crate) fn ready_to_attack(&self, holdings: &Holdings) -> bool {
        self.aggression_per_mille > 0 && self.attack_threshold.is_some_and(|t| holdings.total_instances() >= t)
    }

    /// The asset this bot wants next, ignoring affordability. Unowned assets
    /// come first; builders then prefer significance, rushers cheapness.
    pub(crate) fn build_choice(
        &self,
        graph: &CreationalGraph,
        totals: &AggregateTable,
        costs: &BTreeMap<AssetId, u64>,
        holdings: &Holdings,
    ) -> Option<AssetId> {
        let frontier = graph.creation_frontier(holdings);
        let owned = |a: &AssetId| holdings.count(a.as_str()) > 0;
        let total = |a: &AssetId| totals.total(a.as_str()).unwrap_or(0);
        let cost = |a: &AssetId| costs.get(a).copied().unwrap_or(u64::MAX);
        // min_by_key keeps the first minimum, and the frontier iterates in id order
        match self.kind {
            BotKind::Builder | BotKind::Balanced => frontier.into_iter().min_by_key(|a| (owned(a), Reverse(total(a)))),
            BotKind::Rusher => frontier.into_iter().min_by_key(|a| (owned(a), cost(a))),
        }
    }

    pub(crate) fn choose_target<R: Rng>(
        &self,
        rng: &mut R,
        me: &PlayerId,
        state: &MatchState,
        totals: &AggregateTable,
    ) -> Option<(PlayerId, AssetId)> {
        let opponents: Vec<_> = state
            .players()
            .filter(|p| &p.player.id != me && !p.holdings.is_empty())
            .collect();
        if opponents.is_empty() {
            return None;
        }
        match self.target {
            TargetRule::HighestValue => opponents
                .iter()
                .flat_map(|p| p.holdings.iter().map(move |(a, _)| (&p.player.id, a)))
                .min_by_key(|(p, a)| (Reverse(totals.total(a.as_str()).unwrap_or(0)), *p, *a))
                .map(|(p, a)| (p.clone(), a.clone())),
            TargetRule::Random => {
                let victim = opponents[rng.random_range(0..opponents.len())];
                let assets: Vec<&AssetId> = victim.holdings.iter().map(|(a, _)| a).collect();
                let asset = assets[rng.random_range(0..assets.len())];
                Some((victim.player.id.clone(), asset.clone()))
            }
        }
    }
}
