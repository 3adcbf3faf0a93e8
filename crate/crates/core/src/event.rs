//! Structured match event log and an independent replayer that re-applies a
//! log through the balancing runtime, checking every build and attack for
//! legality along the way.

use serde::{Deserialize, Serialize};

use crate::graph::{AssetId, CreationalGraph};
use crate::runtime::{BalancingConfig, DestructionEvent, MatchState, PlayerId, PlayerInstance, RuntimeError, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Income,
    Build,
    Attack,
    AttackBlocked,
    Destruction,
    CeasefireImposed,
    MatchEnd,
}

/// One line of the event log.
///
/// | kind                | player     | asset       | count        | detail                     |
/// |---------------------|------------|-------------|--------------|----------------------------|
/// | `income`            | receiver   | -           | amount       | empty                      |
/// | `build`             | builder    | built asset | 1            | `cost=<n>`                 |
/// | `attack`            | attacker   | target      | 1            | `target=<victim> hit/miss` |
/// | `attack_blocked`    | attacker   | -           | 0            | `until=<end>`              |
/// | `destruction`       | victim     | lost asset  | lost count   | `by=<attacker>`            |
/// | `ceasefire_imposed` | restricted | lost asset  | duration (s) | `until=<end>`              |
/// | `match_end`         | winner     | -           | 0            | reason                     |
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub tick: Tick,
    #[serde(rename = "type")]
    pub kind: EventKind,
    pub player: Option<PlayerId>,
    pub asset: Option<AssetId>,
    pub count: u64,
    pub detail: String,
}

impl EventRecord {
    pub(crate) fn new(tick: Tick, kind: EventKind, player: Option<&PlayerId>) -> Self {
        EventRecord {
            tick,
            kind,
            player: player.cloned(),
            asset: None,
            count: 0,
            detail: String::new(),
        }
    }

    pub(crate) fn asset(mut self, asset: &AssetId) -> Self {
        self.asset = Some(asset.clone());
        self
    }

    pub(crate) fn count(mut self, count: u64) -> Self {
        self.count = count;
        self
    }

    pub(crate) fn detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// Value of a `key=value` token in `detail`.
    pub fn detail_field(&self, key: &str) -> Option<&str> {
        self.detail
            .split_whitespace()
            .find_map(|tok| tok.split_once('=').and_then(|(k, v)| (k == key).then_some(v)))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("event {index}: {source}")]
    Runtime {
        index: usize,
        #[source]
        source: RuntimeError,
    },
    #[error("event {index}: malformed record: {reason}")]
    Malformed { index: usize, reason: String },
    #[error("event {index}: attack by `{player}` at t={tick} while under cease-fire")]
    IllegalAttack { index: usize, player: PlayerId, tick: Tick },
    #[error("event {index}: attack by `{player}` at t={tick} logged as blocked but was allowed")]
    SpuriousBlock { index: usize, player: PlayerId, tick: Tick },
    #[error("event {index}: cease-fire record does not match the runtime ({reason})")]
    CeasefireMismatch { index: usize, reason: String },
}

/// Re-applies `log` to fresh player instances and returns the final state.
///
/// Build costs are taken from the log itself; everything else (prerequisites,
/// resources, holdings, windows) is recomputed and checked.
pub fn replay(
    graph: &CreationalGraph,
    balancing: &BalancingConfig,
    initial: impl IntoIterator<Item = PlayerInstance>,
    log: &[EventRecord],
) -> Result<MatchState, ReplayError> {
    let mut state = MatchState::new(initial).map_err(|source| ReplayError::Runtime { index: 0, source })?;
    let mut pending: Option<(usize, Option<crate::runtime::WindowUpdate>)> = None;

    for (index, ev) in log.iter().enumerate() {
        let runtime = |source| ReplayError::Runtime { index, source };
        let malformed = |reason: &str| ReplayError::Malformed {
            index,
            reason: reason.to_owned(),
        };

        if let Some((at, update)) = pending.take() {
            match (update, ev.kind) {
                (Some(u), EventKind::CeasefireImposed) => {
                    let until: Tick = ev
                        .detail_field("until")
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| malformed("ceasefire_imposed without until="))?;
                    if ev.player.as_ref() != Some(&u.window.restricted_player)
                        || until != u.window.end_time
                        || ev.count != u.duration
                    {
                        return Err(ReplayError::CeasefireMismatch {
                            index,
                            reason: format!(
                                "expected until={} for {}",
                                u.window.end_time, u.window.restricted_player
                            ),
                        });
                    }
                    continue;
                }
                (Some(_), _) => {
                    return Err(ReplayError::CeasefireMismatch {
                        index: at,
                        reason: "runtime imposed a window the log omits".into(),
                    })
                }
                (None, EventKind::CeasefireImposed) => {
                    return Err(ReplayError::CeasefireMismatch {
                        index,
                        reason: "log imposes a window the runtime did not".into(),
                    })
                }
                (None, _) => {}
            }
        }

        let player = || ev.player.clone().ok_or_else(|| malformed("missing player"));
        let asset = || ev.asset.clone().ok_or_else(|| malformed("missing asset"));
        match ev.kind {
            EventKind::Income => {
                state.advance_to(ev.tick).map_err(runtime)?;
                state.add_resources(&player()?, ev.count).map_err(runtime)?;
            }
            EventKind::Build => {
                let cost = ev
                    .detail_field("cost")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| malformed("build without cost="))?;
                state
                    .apply_creation(graph, &player()?, &asset()?, ev.tick, cost)
                    .map_err(runtime)?;
            }
            EventKind::Attack => {
                let p = player()?;
                if !state.is_attack_allowed(&p, ev.tick).map_err(runtime)? {
                    return Err(ReplayError::IllegalAttack {
                        index,
                        player: p,
                        tick: ev.tick,
                    });
                }
            }
            EventKind::AttackBlocked => {
                let p = player()?;
                if state.is_attack_allowed(&p, ev.tick).map_err(runtime)? {
                    return Err(ReplayError::SpuriousBlock {
                        index,
                        player: p,
                        tick: ev.tick,
                    });
                }
            }
            EventKind::Destruction => {
                let attacker = ev
                    .detail_field("by")
                    .map(PlayerId::new)
                    .ok_or_else(|| malformed("destruction without by="))?;
                let count = u32::try_from(ev.count).map_err(|_| malformed("count overflow"))?;
                let event = DestructionEvent {
                    time: ev.tick,
                    victim: player()?,
                    attacker,
                    asset: asset()?,
                    count,
                };
                let update = state.on_destruction(&event, balancing).map_err(runtime)?;
                pending = Some((index, update));
            }
            EventKind::CeasefireImposed => {
                return Err(ReplayError::CeasefireMismatch {
                    index,
                    reason: "not preceded by a destruction".into(),
                })
            }
            EventKind::MatchEnd => {}
        }
    }
    if let Some((at, Some(_))) = pending {
        return Err(ReplayError::CeasefireMismatch {
            index: at,
            reason: "runtime imposed a window the log omits".into(),
        });
    }
    Ok(state)
}
