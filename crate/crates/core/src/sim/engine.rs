use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::rng::player_stream;
use super::{BotPolicy, MatchConfig, SimError};
use crate::event::{EventKind, EventRecord};
use crate::graph::{AssetId, Holdings};
use crate::metrics::AggregateTable;
use crate::runtime::{DestructionEvent, MatchState, PlayerId, PlayerInstance, Tick};

/// Everything a finished match produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub winner: Option<PlayerId>,
    /// Number of ticks simulated.
    pub end_tick: Tick,
    /// Holdings value after every simulated tick.
    pub value_series: BTreeMap<PlayerId, Vec<u64>>,
    /// Tick at which each player's holdings first became empty.
    pub survival_tick: BTreeMap<PlayerId, Option<Tick>>,
    pub final_scores: BTreeMap<PlayerId, u64>,
    pub final_state: MatchState,
    pub events: Vec<EventRecord>,
}

/// A [`MatchResult`] without the bulky parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchSummary {
    pub winner: Option<PlayerId>,
    pub end_tick: Tick,
    pub survival_tick: BTreeMap<PlayerId, Option<Tick>>,
    pub final_scores: BTreeMap<PlayerId, u64>,
    /// Own final score minus the best opponent's.
    pub margins: BTreeMap<PlayerId, i64>,
    pub windows_imposed: u64,
    pub attacks_blocked: u64,
}

impl MatchResult {
    /// Survival tick, or `end_tick` for a player that was never eliminated.
    pub fn survival_or_end(&self, player: &PlayerId) -> Tick {
        self.survival_tick
            .get(player)
            .copied()
            .flatten()
            .unwrap_or(self.end_tick)
    }

    pub fn summary(&self) -> MatchSummary {
        let margins = self
            .final_scores
            .iter()
            .map(|(p, &s)| {
                let best_other = self
                    .final_scores
                    .iter()
                    .filter(|(q, _)| *q != p)
                    .map(|(_, &s)| s)
                    .max()
                    .unwrap_or(0);
                (p.clone(), s as i64 - best_other as i64)
            })
            .collect();
        let count = |k: EventKind| self.events.iter().filter(|e| e.kind == k).count() as u64;
        MatchSummary {
            winner: self.winner.clone(),
            end_tick: self.end_tick,
            survival_tick: self.survival_tick.clone(),
            final_scores: self.final_scores.clone(),
            margins,
            windows_imposed: count(EventKind::CeasefireImposed),
            attacks_blocked: count(EventKind::AttackBlocked),
        }
    }
}

impl MatchSummary {
    pub fn survival_or_end(&self, player: &PlayerId) -> Tick {
        self.survival_tick
            .get(player)
            .copied()
            .flatten()
            .unwrap_or(self.end_tick)
    }
}

/// A match in progress.
pub struct Match<'a> {
    config: &'a MatchConfig,
    state: MatchState,
    policies: BTreeMap<PlayerId, BotPolicy>,
    rngs: BTreeMap<PlayerId, ChaCha8Rng>,
    costs: BTreeMap<AssetId, u64>,
    totals: &'a AggregateTable,
    tick: Tick,
    events: Vec<EventRecord>,
    series: BTreeMap<PlayerId, Vec<u64>>,
    survival: BTreeMap<PlayerId, Option<Tick>>,
    winner: Option<PlayerId>,
    finished: bool,
}

impl<'a> Match<'a> {
    pub fn new(config: &'a MatchConfig) -> Result<Self, SimError> {
        config.validate()?;
        let scenario = &*config.scenario;
        let state = MatchState::new(config.players.iter().map(|s| PlayerInstance {
            player: s.player.clone(),
            holdings: config.starting_holdings.clone(),
            resources: config.starting_resources,
        }))?;
        state.check_balancing(&config.balancing)?;

        let mut costs = BTreeMap::new();
        for a in scenario.graph().assets() {
            let c = config
                .cost_model
                .cost(scenario.graph(), scenario.matrix(), a.id.as_str())?;
            costs.insert(a.id.clone(), c);
        }
        let ids = state.player_ids();
        let mut m = Match {
            config,
            policies: config
                .players
                .iter()
                .map(|s| (s.player.id.clone(), s.policy.clone()))
                .collect(),
            rngs: ids
                .iter()
                .map(|id| (id.clone(), player_stream(config.seed, id)))
                .collect(),
            costs,
            totals: scenario.totals(),
            tick: 0,
            events: Vec::new(),
            series: ids.iter().map(|id| (id.clone(), Vec::new())).collect(),
            survival: ids.iter().map(|id| (id.clone(), None)).collect(),
            winner: None,
            finished: false,
            state,
        };
        m.mark_eliminations(0);
        m.check_end();
        Ok(m)
    }

    pub fn state(&self) -> &MatchState {
        &self.state
    }

    pub fn tick(&self) -> Tick {
        self.tick
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    /// Build cost of `asset` under this match's cost model.
    pub fn cost_of(&self, asset: &str) -> Option<u64> {
        self.costs.get(asset).copied()
    }

    fn value(&self, holdings: &Holdings) -> u64 {
        holdings
            .iter()
            .map(|(a, c)| u64::from(c) * (1 + self.totals.total(a.as_str()).unwrap_or(0)))
            .sum()
    }

    fn alive(&self, id: &PlayerId) -> bool {
        self.state.player(id).map(|p| !p.holdings.is_empty()).unwrap_or(false)
    }

    fn mark_eliminations(&mut self, t: Tick) {
        for p in self.state.players() {
            let slot = self.survival.get_mut(&p.player.id).expect("one slot per player");
            if p.holdings.is_empty() && slot.is_none() {
                *slot = Some(t);
            }
        }
    }

    fn check_end(&mut self) {
        let players = self.state.player_ids();
        let alive: Vec<&PlayerId> = players.iter().filter(|p| self.alive(p)).collect();
        let reason = if alive.is_empty() {
            Some("all_eliminated")
        } else if players.len() >= 2 && alive.len() == 1 {
            self.winner = Some(alive[0].clone());
            Some("elimination")
        } else if self.tick >= self.config.max_ticks {
            Some("timeout")
        } else {
            None
        };
        if let Some(reason) = reason {
            self.finished = true;
            self.events
                .push(EventRecord::new(self.tick, EventKind::MatchEnd, self.winner.as_ref()).detail(reason));
        }
    }

    /// Advances one tick: income, one action per living player in id order,
    /// then the termination check. Returns the events this tick emitted.
    pub fn step(&mut self) -> Result<&[EventRecord], SimError> {
        if self.finished {
            return Err(SimError::Finished);
        }
        let t = self.tick;
        let first = self.events.len();
        self.state.advance_to(t)?;
        let ids = self.state.player_ids();

        for id in &ids {
            if self.alive(id) {
                self.state.add_resources(id, self.config.income_per_tick)?;
                self.events
                    .push(EventRecord::new(t, EventKind::Income, Some(id)).count(self.config.income_per_tick));
            }
        }

        for id in &ids {
            if self.alive(id) {
                self.act(id, t)?;
            }
        }

        self.mark_eliminations(t);
        for id in &ids {
            let v = self.value(&self.state.player(id)?.holdings);
            self.series.get_mut(id).expect("one series per player").push(v);
        }
        self.tick += 1;
        self.check_end();
        Ok(&self.events[first..])
    }

    fn act(&mut self, id: &PlayerId, t: Tick) -> Result<(), SimError> {
        let policy = &self.policies[id];
        let holdings = &self.state.player(id)?.holdings;
        let rng = self.rngs.get_mut(id).expect("one stream per player");

        if policy.ready_to_attack(holdings) {
            if let Some((victim, asset)) = policy.choose_target(rng, id, &self.state, self.totals) {
                if rng.random_range(0..1000) < policy.aggression_per_mille {
                    if self.state.is_attack_allowed(id, t)? {
                        self.attack(id, &victim, &asset, t)?;
                        return Ok(());
                    }
                    let until = self.state.window_end(id).unwrap_or(t);
                    self.events
                        .push(EventRecord::new(t, EventKind::AttackBlocked, Some(id)).detail(format!("until={until}")));
                }
            }
        }

        let policy = &self.policies[id];
        let player = self.state.player(id)?;
        let scenario = &*self.config.scenario;
        if let Some(asset) = policy.build_choice(scenario.graph(), self.totals, &self.costs, &player.holdings) {
            let cost = self.costs[&asset];
            if player.resources >= cost {
                self.state.apply_creation(scenario.graph(), id, &asset, t, cost)?;
                self.events.push(
                    EventRecord::new(t, EventKind::Build, Some(id))
                        .asset(&asset)
                        .count(1)
                        .detail(format!("cost={cost}")),
                );
            }
        }
        Ok(())
    }

    fn attack(&mut self, attacker: &PlayerId, victim: &PlayerId, asset: &AssetId, t: Tick) -> Result<(), SimError> {
        let rng = self.rngs.get_mut(attacker).expect("one stream per player");
        let hit = rng.random_range(0..1000) < self.config.attack_model.hit_per_mille;
        self.events.push(
            EventRecord::new(t, EventKind::Attack, Some(attacker))
                .asset(asset)
                .count(1)
                .detail(format!("target={victim} {}", if hit { "hit" } else { "miss" })),
        );
        if !hit {
            return Ok(());
        }
        let event = DestructionEvent {
            time: t,
            victim: victim.clone(),
            attacker: attacker.clone(),
            asset: asset.clone(),
            count: 1,
        };
        let update = self.state.on_destruction(&event, &self.config.balancing)?;
        self.events.push(
            EventRecord::new(t, EventKind::Destruction, Some(victim))
                .asset(asset)
                .count(1)
                .detail(format!("by={attacker}")),
        );
        if let Some(u) = update {
            self.events.push(
                EventRecord::new(t, EventKind::CeasefireImposed, Some(&u.window.restricted_player))
                    .asset(asset)
                    .count(u.duration)
                    .detail(format!("until={}", u.window.end_time)),
            );
        }
        if self.state.player(victim)?.holdings.is_empty() {
            self.survival.insert(victim.clone(), Some(t));
        }
        Ok(())
    }

    pub fn finish(self) -> MatchResult {
        let final_scores = self
            .state
            .players()
            .map(|p| (p.player.id.clone(), self.value(&p.holdings)))
            .collect();
        MatchResult {
            winner: self.winner,
            end_tick: self.tick,
            value_series: self.series,
            survival_tick: self.survival,
            final_scores,
            final_state: self.state,
            events: self.events,
        }
    }
}

/// Steps a fresh match until a player is eliminated or `max_ticks` is reached.
pub fn run_match(config: &MatchConfig) -> Result<MatchResult, SimError> {
    let mut m = Match::new(config)?;
    while !m.is_finished() {
        m.step()?;
    }
    Ok(m.finish())
}
