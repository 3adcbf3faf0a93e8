//! Parallel dependency graphs for game balancing.
//!
//! Every player owns an instance of the same creational dependency graph.
//! Each (ancestor, descendant) pair carries a dependency value; an asset's
//! aggregate path value is the sum of its row and measures how much of the
//! tech tree hangs off it. When a protected player loses an asset, the
//! balancing mechanism bridges the players' graphs by imposing a No-Attack
//! window on the attacker, sized by the cease-fire policy.
//!
//! - [`graph`]: assets, prerequisite edges, validation, reachability.
//! - [`metrics`]: dependency values, aggregate path values, cease-fire policy.
//! - [`runtime`]: per-player instances and the No-Attack windows.
//! - [`sim`]: deterministic bot matches and matched-seed experiments.
//! - [`scenario`] / [`report`]: file formats and the bundled `battle` scenario.

pub mod event;
pub mod graph;
pub mod metrics;
pub mod report;
pub mod runtime;
pub mod scenario;
pub mod sim;
pub mod validation;

pub use event::{replay, EventKind, EventRecord, ReplayError};
pub use graph::{AssetId, AssetType, CreationalEdge, CreationalGraph, GraphError, Holdings, MissingPrerequisite};
pub use metrics::{
    aggregate_path_value, significance_ranking, validate_policy, AggregateTable, CeasefirePolicy, DependencyValue,
    DependencyValueMatrix, DurationSource, Interpolation,
};
pub use report::{analyze, table_from_csv, table_to_csv, AnalysisRow, ReportBundle};
pub use runtime::{
    merge_window, BalancingConfig, CeasefireWindow, Controller, DestructionEvent, MatchState, Player, PlayerId,
    PlayerInstance, RuntimeError, Tick, WindowUpdate,
};
pub use scenario::{
    check_scenario, parse_scenario, Scenario, ScenarioCheck, ScenarioError, ScenarioFile, ScenarioIssue,
    SimulationDefaults, BATTLE_SCENARIO,
};
pub use sim::{
    run_experiment, run_experiment_with, run_match, Arms, AttackModel, BotKind, BotPolicy, CostModel, ExperimentReport,
    MatchConfig, MatchResult, PlayerSetup, SimError, TargetRule,
};
pub use validation::{Issue, ValidationReport};
