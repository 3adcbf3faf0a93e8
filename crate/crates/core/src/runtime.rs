//! Parallel per-player instances of one creational graph, bridged by the
//! balancing mechanism: destroying a protected player's asset imposes a
//! No-Attack window on the attacker, sized by the cease-fire policy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{AssetId, CreationalGraph, GraphError, Holdings, MissingPrerequisite};
use crate::metrics::CeasefirePolicy;

/// Match time in whole seconds.
pub type Tick = u64;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(String);

impl PlayerId {
    pub fn new(id: impl Into<String>) -> Self {
        PlayerId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PlayerId {
    fn from(s: &str) -> Self {
        PlayerId(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Controller {
    HumanProxy,
    Ai,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Player {
    pub id: PlayerId,
    pub controller: Controller,
}

impl Player {
    pub fn new(id: impl Into<String>, controller: Controller) -> Self {
        Player {
            id: PlayerId::new(id),
            controller,
        }
    }
}

/// One player's instance of the shared creational graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerInstance {
    pub player: Player,
    pub holdings: Holdings,
    pub resources: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DestructionEvent {
    pub time: Tick,
    pub victim: PlayerId,
    pub attacker: PlayerId,
    pub asset: AssetId,
    pub count: u32,
}

/// Attacks by `restricted_player` are blocked on `[imposed_at, end_time)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CeasefireWindow {
    pub restricted_player: PlayerId,
    pub end_time: Tick,
}

/// Result of a destruction that triggered the balancing mechanism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowUpdate {
    pub window: CeasefireWindow,
    pub previous_end: Option<Tick>,
    pub duration: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancingConfig {
    pub enabled: bool,
    /// Destroying assets of these players triggers windows on the attacker.
    pub protected_players: BTreeSet<PlayerId>,
    pub policy: CeasefirePolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("unknown player `{0}`")]
    UnknownPlayer(PlayerId),
    #[error("duplicate player `{0}`")]
    DuplicatePlayer(PlayerId),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("player `{0}` cannot destroy its own assets")]
    SelfDestruction(PlayerId),
    #[error("destruction count must be at least 1")]
    ZeroCount,
    #[error("`{player}` holds {have} `{asset}`, cannot lose {requested}")]
    InsufficientHoldings {
        player: PlayerId,
        asset: AssetId,
        have: u32,
        requested: u32,
    },
    #[error("event at t={event} is earlier than match time t={now}")]
    TimeWentBackwards { now: Tick, event: Tick },
    #[error("`{player}` cannot create `{asset}`: missing {missing:?}")]
    MissingPrerequisites {
        player: PlayerId,
        asset: AssetId,
        missing: Vec<MissingPrerequisite>,
    },
    #[error("`{player}` needs {need} resources, has {have}")]
    InsufficientResources { player: PlayerId, need: u64, have: u64 },
}

/// New end of a No-Attack window. Windows never shorten.
pub fn merge_window(existing_end: Option<Tick>, now: Tick, duration: u64) -> Tick {
    existing_end.unwrap_or(0).max(now.saturating_add(duration))
}

/// Per-asset creation and destruction counts for one player.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetLedger {
    pub initial: Holdings,
    pub created: BTreeMap<AssetId, u64>,
    pub destroyed: BTreeMap<AssetId, u64>,
}

impl AssetLedger {
    /// Whether `initial + created - destroyed` equals `holdings` for every asset.
    pub fn balances(&self, holdings: &Holdings) -> bool {
        let mut ids: BTreeSet<&AssetId> = self.created.keys().chain(self.destroyed.keys()).collect();
        ids.extend(self.initial.iter().map(|(a, _)| a));
        ids.extend(holdings.iter().map(|(a, _)| a));
        ids.into_iter().all(|a| {
            let expected = i128::from(self.initial.count(a.as_str()))
                + i128::from(self.created.get(a).copied().unwrap_or(0))
                - i128::from(self.destroyed.get(a).copied().unwrap_or(0));
            expected == i128::from(holdings.count(a.as_str()))
        })
    }
}

/// Parallel player instances plus active No-Attack windows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchState {
    time: Tick,
    players: BTreeMap<PlayerId, PlayerInstance>,
    windows: BTreeMap<PlayerId, Tick>,
    ledgers: BTreeMap<PlayerId, AssetLedger>,
}

impl MatchState {
    pub fn new(players: impl IntoIterator<Item = PlayerInstance>) -> Result<Self, RuntimeError> {
        let mut map = BTreeMap::new();
        let mut ledgers = BTreeMap::new();
        for p in players {
            let id = p.player.id.clone();
            ledgers.insert(
                id.clone(),
                AssetLedger {
                    initial: p.holdings.clone(),
                    ..AssetLedger::default()
                },
            );
            if map.insert(id.clone(), p).is_some() {
                return Err(RuntimeError::DuplicatePlayer(id));
            }
        }
        Ok(MatchState {
            time: 0,
            players: map,
            windows: BTreeMap::new(),
            ledgers,
        })
    }

    pub fn time(&self) -> Tick {
        self.time
    }

    /// Moves the clock forward. Time never runs backwards.
    pub fn advance_to(&mut self, time: Tick) -> Result<(), RuntimeError> {
        self.check_time(time)?;
        self.time = time;
        Ok(())
    }

    fn check_time(&self, time: Tick) -> Result<(), RuntimeError> {
        if time < self.time {
            return Err(RuntimeError::TimeWentBackwards {
                now: self.time,
                event: time,
            });
        }
        Ok(())
    }

    pub fn player(&self, id: &PlayerId) -> Result<&PlayerInstance, RuntimeError> {
        self.players
            .get(id)
            .ok_or_else(|| RuntimeError::UnknownPlayer(id.clone()))
    }

    fn player_mut(&mut self, id: &PlayerId) -> Result<&mut PlayerInstance, RuntimeError> {
        self.players
            .get_mut(id)
            .ok_or_else(|| RuntimeError::UnknownPlayer(id.clone()))
    }

    /// Players in id order.
    pub fn players(&self) -> impl Iterator<Item = &PlayerInstance> {
        self.players.values()
    }

    pub fn player_ids(&self) -> Vec<PlayerId> {
        self.players.keys().cloned().collect()
    }

    pub fn ledger(&self, id: &PlayerId) -> Result<&AssetLedger, RuntimeError> {
        self.ledgers
            .get(id)
            .ok_or_else(|| RuntimeError::UnknownPlayer(id.clone()))
    }

    /// End of the player's No-Attack window, if one was ever imposed.
    pub fn window_end(&self, id: &PlayerId) -> Option<Tick> {
        self.windows.get(id).copied()
    }

    pub fn add_resources(&mut self, id: &PlayerId, amount: u64) -> Result<(), RuntimeError> {
        let p = self.player_mut(id)?;
        p.resources = p.resources.saturating_add(amount);
        Ok(())
    }

    /// Checks that every protected player takes part in this match.
    pub fn check_balancing(&self, config: &BalancingConfig) -> Result<(), RuntimeError> {
        for id in &config.protected_players {
            self.player(id)?;
        }
        Ok(())
    }

    /// False iff `attacker` has a window ending after `time`. Building is
    /// never restricted.
    pub fn is_attack_allowed(&self, attacker: &PlayerId, time: Tick) -> Result<bool, RuntimeError> {
        self.player(attacker)?;
        Ok(self.windows.get(attacker).is_none_or(|&end| end <= time))
    }

    /// Applies a destruction and, when the balancing mechanism fires, opens or
    /// extends the attacker's No-Attack window. Invalid events leave the state
    /// untouched.
    pub fn on_destruction(
        &mut self,
        event: &DestructionEvent,
        config: &BalancingConfig,
    ) -> Result<Option<WindowUpdate>, RuntimeError> {
        self.check_time(event.time)?;
        self.player(&event.attacker)?;
        let victim = self.player(&event.victim)?;
        if event.victim == event.attacker {
            return Err(RuntimeError::SelfDestruction(event.victim.clone()));
        }
        if event.count == 0 {
            return Err(RuntimeError::ZeroCount);
        }
        let duration = config.policy.duration(event.asset.as_str())?;
        let have = victim.holdings.count(event.asset.as_str());
        if have < event.count {
            return Err(RuntimeError::InsufficientHoldings {
                player: event.victim.clone(),
                asset: event.asset.clone(),
                have,
                requested: event.count,
            });
        }

        self.time = event.time;
        let victim = self.player_mut(&event.victim)?;
        victim.holdings.remove(&event.asset, event.count);
        let ledger = self.ledgers.entry(event.victim.clone()).or_default();
        *ledger.destroyed.entry(event.asset.clone()).or_default() += u64::from(event.count);

        if !config.enabled || duration == 0 || !config.protected_players.contains(&event.victim) {
            return Ok(None);
        }
        let previous_end = self.window_end(&event.attacker);
        let end_time = merge_window(previous_end, event.time, duration);
        self.windows.insert(event.attacker.clone(), end_time);
        Ok(Some(WindowUpdate {
            window: CeasefireWindow {
                restricted_player: event.attacker.clone(),
                end_time,
            },
            previous_end,
            duration,
        }))
    }

    /// Creates one instance of `asset` for `player`, paying `cost`. Allowed
    /// during the player's own cease-fire.
    pub fn apply_creation(
        &mut self,
        graph: &CreationalGraph,
        player: &PlayerId,
        asset: &AssetId,
        time: Tick,
        cost: u64,
    ) -> Result<(), RuntimeError> {
        self.check_time(time)?;
        let instance = self.player(player)?;
        let missing = graph.missing_prerequisites(asset.as_str(), &instance.holdings)?;
        if !missing.is_empty() {
            return Err(RuntimeError::MissingPrerequisites {
                player: player.clone(),
                asset: asset.clone(),
                missing,
            });
        }
        if instance.resources < cost {
            return Err(RuntimeError::InsufficientResources {
                player: player.clone(),
                need: cost,
                have: instance.resources,
            });
        }
        self.time = time;
        let instance = self.player_mut(player)?;
        instance.resources -= cost;
        instance.holdings.add(asset, 1);
        let ledger = self.ledgers.entry(player.clone()).or_default();
        *ledger.created.entry(asset.clone()).or_default() += 1;
        Ok(())
    }

    /// Whether every player's ledger reproduces their current holdings.
    pub fn conservation_holds(&self) -> bool {
        self.players
            .iter()
            .all(|(id, p)| self.ledgers.get(id).is_some_and(|l| l.balances(&p.holdings)))
    }
}
