//! Report-style validation results shared by graphs, matrices, policies and
//! scenario files. Problems are data here; nothing in this module fails fast.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::AssetId;

/// A single validation finding. The same enum is used for errors and
/// warnings; which list it lands in decides its severity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Issue {
    #[error("no assets defined")]
    NoAssets,
    #[error("no roots: every asset has a prerequisite")]
    NoRoots,
    #[error("duplicate asset id `{asset}`")]
    DuplicateAsset { asset: AssetId },
    #[error("unknown asset id `{asset}`")]
    UnknownAsset { asset: AssetId },
    #[error("self edge on `{asset}`")]
    SelfEdge { asset: AssetId },
    #[error("edge {prerequisite} -> {product} has required_count 0")]
    ZeroRequiredCount { prerequisite: AssetId, product: AssetId },
    #[error("duplicate edge {prerequisite} -> {product}")]
    DuplicateEdge { prerequisite: AssetId, product: AssetId },
    #[error("cycle: {}", join_path(.path))]
    Cycle { path: Vec<AssetId> },
    #[error("asset `{asset}` is not reachable from any root")]
    UnreachableFromRoot { asset: AssetId },
    #[error("graph has {count} disconnected components")]
    DisconnectedComponents { count: usize },
    #[error("value on unreachable pair {ancestor} -> {descendant}")]
    ValueOnUnreachablePair { ancestor: AssetId, descendant: AssetId },
    #[error("dependency value {ancestor} -> {descendant} must be at least 1")]
    ZeroDependencyValue { ancestor: AssetId, descendant: AssetId },
    #[error("duplicate dependency value {ancestor} -> {descendant}")]
    DuplicateDependencyValue { ancestor: AssetId, descendant: AssetId },
    #[error("duplicate cease-fire entry for `{asset}`")]
    DuplicateCeasefire { asset: AssetId },
    #[error(
        "cease-fire not monotone: `{higher}` (total {higher_total}, {higher_seconds} s) < \
         `{lower}` (total {lower_total}, {lower_seconds} s)"
    )]
    NonMonotoneCeasefire {
        higher: AssetId,
        higher_total: u64,
        higher_seconds: u64,
        lower: AssetId,
        lower_total: u64,
        lower_seconds: u64,
    },
    #[error("`{asset}` has aggregate 0 but cease-fire {seconds} s")]
    CeasefireOnZeroTotal { asset: AssetId, seconds: u64 },
    #[error("`{asset}` has aggregate {total} but no cease-fire entry and interpolation is off")]
    MissingCeasefire { asset: AssetId, total: u64 },
    #[error("invalid simulation setting: {message}")]
    InvalidSimulation { message: String },
    #[error("policy total for `{asset}` is {policy_total}, matrix gives {matrix_total}")]
    StaleTotals {
        asset: AssetId,
        policy_total: u64,
        matrix_total: u64,
    },
}

fn join_path(path: &[AssetId]) -> String {
    path.iter().map(AssetId::as_str).collect::<Vec<_>>().join(" -> ")
}

/// Errors and warnings collected by a validation pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn error(&mut self, issue: Issue) {
        self.errors.push(issue);
    }

    pub fn warn(&mut self, issue: Issue) {
        self.warnings.push(issue);
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.errors.extend(other.errors);
        self.warnings.extend(other.warnings);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}
