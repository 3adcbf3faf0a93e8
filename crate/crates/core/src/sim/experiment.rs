//! Matched-seed experiments: every pair runs the same seed with balancing on
//! and off, so any difference between the arms is caused by the mechanism.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{run_match, MatchResult, MatchSummary};
use super::rng::derive_pair_seed;
use super::{MatchConfig, SimError};
use crate::runtime::PlayerId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arms {
    On,
    Off,
    Both,
}

impl Arms {
    fn on(self) -> bool {
        matches!(self, Arms::On | Arms::Both)
    }

    fn off(self) -> bool {
        matches!(self, Arms::Off | Arms::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub index: u64,
    pub seed: u64,
    pub on: Option<MatchSummary>,
    pub off: Option<MatchSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmStats {
    pub mean_survival: f64,
    pub win_rate: f64,
    pub mean_margin: f64,
}

/// On-arm minus off-arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmDeltas {
    pub survival: f64,
    pub win_rate: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSummary {
    pub on: Option<ArmStats>,
    pub off: Option<ArmStats>,
    pub delta: Option<ArmDeltas>,
    /// Pairs whose on-arm survival is at least the off-arm survival.
    pub pairs_on_at_least_off: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub players: BTreeMap<PlayerId, PlayerSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub base_seed: u64,
    pub n_pairs: u64,
    pub arms: Arms,
    pub pairs: Vec<PairResult>,
    pub summary: ExperimentSummary,
}

/// Runs `n_pairs` matched pairs with both arms.
pub fn run_experiment(config: &MatchConfig, n_pairs: u64, base_seed: u64) -> Result<ExperimentReport, SimError> {
    run_experiment_with(config, n_pairs, base_seed, Arms::Both, |_, _, _| Ok(()))
}

/// Runs the requested arms for `n_pairs` pairs and hands every full result
/// to `visit` in pair order. Pairs are simulated in parallel chunks;
/// `visit` is always called sequentially, so the output does not depend on
/// scheduling.
pub fn run_experiment_with<F>(
    config: &MatchConfig,
    n_pairs: u64,
    base_seed: u64,
    arms: Arms,
    mut visit: F,
) -> Result<ExperimentReport, SimError>
where
    F: FnMut(u64, Option<&MatchResult>, Option<&MatchResult>) -> Result<(), SimError>,
{
    if n_pairs == 0 {
        return Err(SimError::InvalidConfig("n_pairs must be at least 1".into()));
    }
    config.validate()?;
    let chunk = (rayon::current_num_threads() as u64 * 2).max(1);
    let mut pairs = Vec::with_capacity(n_pairs as usize);
    let mut start = 0;
    while start < n_pairs {
        let end = (start + chunk).min(n_pairs);
        let results: Vec<_> = (start..end)
            .into_par_iter()
            .map(|i| run_pair(config, base_seed, i, arms))
            .collect();
        for (i, r) in (start..end).zip(results) {
            let (seed, on, off) = r?;
            visit(i, on.as_ref(), off.as_ref())?;
            pairs.push(PairResult {
                index: i,
                seed,
                on: on.as_ref().map(MatchResult::summary),
                off: off.as_ref().map(MatchResult::summary),
            });
        }
        start = end;
    }
    let summary = summarize(config, &pairs);
    Ok(ExperimentReport {
        base_seed,
        n_pairs,
        arms,
        pairs,
        summary,
    })
}

type PairRun = (u64, Option<MatchResult>, Option<MatchResult>);

fn run_pair(config: &MatchConfig, base_seed: u64, index: u64, arms: Arms) -> Result<PairRun, SimError> {
    let seed = derive_pair_seed(base_seed, index);
    let arm = |enabled: bool| {
        let mut c = config.clone();
        c.seed = seed;
        c.balancing.enabled = enabled;
        run_match(&c)
    };
    let on = arms.on().then(|| arm(true)).transpose()?;
    let off = arms.off().then(|| arm(false)).transpose()?;
    Ok((seed, on, off))
}

fn arm_stats<'a>(player: &PlayerId, runs: impl Iterator<Item = &'a MatchSummary>) -> Option<ArmStats> {
    let (mut n, mut survival, mut wins, mut margin) = (0u64, 0f64, 0u64, 0f64);
    for r in runs {
        n += 1;
        survival += r.survival_or_end(player) as f64;
        wins += u64::from(r.winner.as_ref() == Some(player));
        margin += r.margins.get(player).copied().unwrap_or(0) as f64;
    }
    (n > 0).then(|| ArmStats {
        mean_survival: survival / n as f64,
        win_rate: wins as f64 / n as f64,
        mean_margin: margin / n as f64,
    })
}

fn summarize(config: &MatchConfig, pairs: &[PairResult]) -> ExperimentSummary {
    let mut players = BTreeMap::new();
    let mut ids: Vec<&PlayerId> = config.players.iter().map(|p| &p.player.id).collect();
    ids.sort();
    for id in ids {
        let on = arm_stats(id, pairs.iter().filter_map(|p| p.on.as_ref()));
        let off = arm_stats(id, pairs.iter().filter_map(|p| p.off.as_ref()));
        let delta = on.as_ref().zip(off.as_ref()).map(|(a, b)| ArmDeltas {
            survival: a.mean_survival - b.mean_survival,
            win_rate: a.win_rate - b.win_rate,
            margin: a.mean_margin - b.mean_margin,
        });
        let pairs_on_at_least_off = delta.as_ref().map(|_| {
            pairs
                .iter()
                .filter(|p| match (&p.on, &p.off) {
                    (Some(a), Some(b)) => a.survival_or_end(id) >= b.survival_or_end(id),
                    _ => false,
                })
                .count() as u64
        });
        players.insert(
            id.clone(),
            PlayerSummary {
                on,
                off,
                delta,
                pairs_on_at_least_off,
            },
        );
    }
    ExperimentSummary { players }
}
