//! Dependency values, aggregate path values and the cease-fire policy built
//! on top of them.
//!
//! Dependency values are keyed on (ancestor, descendant) pairs that are
//! reachable in the creational graph, not only on direct edges. An asset's
//! aggregate path value is the sum of its row; the cease-fire policy maps
//! assets to No-Attack durations that must not decrease as the aggregate
//! grows.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graph::{AssetId, CreationalGraph, GraphError};
use crate::validation::{Issue, ValidationReport};

/// One stored cell of a [`DependencyValueMatrix`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyValue {
    pub ancestor: AssetId,
    pub descendant: AssetId,
    pub value: u32,
}

impl DependencyValue {
    pub fn new(ancestor: impl Into<AssetId>, descendant: impl Into<AssetId>, value: u32) -> Self {
        DependencyValue {
            ancestor: ancestor.into(),
            descendant: descendant.into(),
            value,
        }
    }
}

/// Sparse map (ancestor, descendant) -> dependency value. Unkeyed pairs are 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyValueMatrix {
    rows: BTreeMap<AssetId, BTreeMap<AssetId, u32>>,
    assets: BTreeSet<AssetId>,
}

impl DependencyValueMatrix {
    /// A matrix with no stored values over the assets of `graph`.
    pub fn empty(graph: &CreationalGraph) -> Self {
        DependencyValueMatrix {
            rows: BTreeMap::new(),
            assets: graph.assets().iter().map(|a| a.id.clone()).collect(),
        }
    }

    /// Builds a matrix, rejecting unknown ids, zero values, duplicate cells
    /// and values on pairs that are not reachable in `graph`. All problems
    /// are collected before returning.
    pub fn new(
        graph: &CreationalGraph,
        entries: impl IntoIterator<Item = DependencyValue>,
    ) -> Result<Self, Vec<Issue>> {
        let (matrix, issues) = Self::new_lenient(graph, entries);
        if issues.is_empty() {
            Ok(matrix)
        } else {
            Err(issues)
        }
    }

    /// Like [`DependencyValueMatrix::new`], but keeps every acceptable cell
    /// and returns the rejected ones as issues alongside the matrix.
    pub fn new_lenient(
        graph: &CreationalGraph,
        entries: impl IntoIterator<Item = DependencyValue>,
    ) -> (Self, Vec<Issue>) {
        let mut matrix = Self::empty(graph);
        let mut issues = Vec::new();
        for e in entries {
            if let Some(issue) = matrix.check_entry(graph, &e) {
                issues.push(issue);
                continue;
            }
            let row = matrix.rows.entry(e.ancestor.clone()).or_default();
            match row.entry(e.descendant) {
                Entry::Occupied(slot) => issues.push(Issue::DuplicateDependencyValue {
                    ancestor: e.ancestor,
                    descendant: slot.key().clone(),
                }),
                Entry::Vacant(slot) => {
                    slot.insert(e.value);
                }
            }
        }
        (matrix, issues)
    }

    fn check_entry(&self, graph: &CreationalGraph, e: &DependencyValue) -> Option<Issue> {
        for id in [&e.ancestor, &e.descendant] {
            if !graph.contains(id.as_str()) {
                return Some(Issue::UnknownAsset { asset: id.clone() });
            }
        }
        if e.value == 0 {
            return Some(Issue::ZeroDependencyValue {
                ancestor: e.ancestor.clone(),
                descendant: e.descendant.clone(),
            });
        }
        let from = graph.index_of(e.ancestor.as_str()).ok()?;
        let to = graph.index_of(e.descendant.as_str()).ok()?;
        (!graph.closure_contains(from, to)).then(|| Issue::ValueOnUnreachablePair {
            ancestor: e.ancestor.clone(),
            descendant: e.descendant.clone(),
        })
    }

    fn known(&self, id: &str) -> Result<(), GraphError> {
        if self.assets.contains(id) {
            Ok(())
        } else {
            Err(GraphError::UnknownAsset(AssetId::new(id)))
        }
    }

    /// Stored value for the pair, or 0 when unkeyed.
    pub fn value(&self, ancestor: &str, descendant: &str) -> Result<u32, GraphError> {
        self.known(ancestor)?;
        self.known(descendant)?;
        Ok(self
            .rows
            .get(ancestor)
            .and_then(|r| r.get(descendant))
            .copied()
            .unwrap_or(0))
    }

    /// Sum of the asset's row.
    pub fn row_sum(&self, ancestor: &str) -> Result<u64, GraphError> {
        self.known(ancestor)?;
        Ok(self
            .rows
            .get(ancestor)
            .map(|r| r.values().map(|&v| u64::from(v)).sum())
            .unwrap_or(0))
    }

    /// Stored cells in (ancestor, descendant) order.
    pub fn entries(&self) -> impl Iterator<Item = DependencyValue> + '_ {
        self.rows.iter().flat_map(|(a, row)| {
            row.iter()
                .map(move |(d, &v)| DependencyValue::new(a.clone(), d.clone(), v))
        })
    }
}

/// Aggregate path dependency value of `asset`: the sum of its matrix row.
pub fn aggregate_path_value(
    graph: &CreationalGraph,
    matrix: &DependencyValueMatrix,
    asset: &str,
) -> Result<u64, GraphError> {
    graph.index_of(asset)?;
    matrix.row_sum(asset)
}

/// Aggregate path values for every asset of a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AggregateTable {
    totals: BTreeMap<AssetId, u64>,
}

impl AggregateTable {
    pub fn compute(graph: &CreationalGraph, matrix: &DependencyValueMatrix) -> Self {
        let totals = graph
            .sorted_ids()
            .into_iter()
            .map(|id| {
                let total = matrix.row_sum(id.as_str()).unwrap_or(0);
                (id, total)
            })
            .collect();
        AggregateTable { totals }
    }

    pub fn total(&self, asset: &str) -> Result<u64, GraphError> {
        self.totals
            .get(asset)
            .copied()
            .ok_or_else(|| GraphError::UnknownAsset(AssetId::new(asset)))
    }

    pub fn contains(&self, asset: &str) -> bool {
        self.totals.contains_key(asset)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AssetId, u64)> {
        self.totals.iter().map(|(a, &t)| (a, t))
    }

    pub fn len(&self) -> usize {
        self.totals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.totals.is_empty()
    }

    /// Assets by total descending, ties by id ascending.
    pub fn ranking(&self) -> Vec<(AssetId, u64)> {
        let mut rows: Vec<(AssetId, u64)> = self.totals.iter().map(|(a, &t)| (a.clone(), t)).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        rows
    }
}

pub fn significance_ranking(graph: &CreationalGraph, matrix: &DependencyValueMatrix) -> Vec<(AssetId, u64)> {
    AggregateTable::compute(graph, matrix).ranking()
}

// ---------------------------------------------------------------------------
// Cease-fire policy
// ---------------------------------------------------------------------------

/// Rule for assets that have no explicit cease-fire entry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Unkeyed assets get no cease-fire.
    None,
    /// Piecewise-linear in the aggregate total between the nearest keyed
    /// totals, clamped at both ends. Zero-total assets always get 0.
    #[default]
    PiecewiseLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DurationSource {
    Explicit,
    Interpolated,
}

/// No-Attack duration, in seconds, imposed on whoever destroys an asset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CeasefirePolicy {
    durations: BTreeMap<AssetId, u64>,
    interpolation: Interpolation,
    totals: AggregateTable,
    /// (total, duration) knots, sorted by total, durations made non-decreasing.
    knots: Vec<(u64, u64)>,
}

impl CeasefirePolicy {
    pub fn new(
        totals: AggregateTable,
        durations: impl IntoIterator<Item = (AssetId, u64)>,
        interpolation: Interpolation,
    ) -> Result<Self, Vec<Issue>> {
        let mut map = BTreeMap::new();
        let mut issues = Vec::new();
        for (asset, seconds) in durations {
            if !totals.contains(asset.as_str()) {
                issues.push(Issue::UnknownAsset { asset });
            } else if map.insert(asset.clone(), seconds).is_some() {
                issues.push(Issue::DuplicateCeasefire { asset });
            }
        }
        if !issues.is_empty() {
            return Err(issues);
        }
        let knots = build_knots(&map, &totals);
        Ok(CeasefirePolicy {
            durations: map,
            interpolation,
            totals,
            knots,
        })
    }

    /// A policy that never imposes a window.
    pub fn zero(totals: AggregateTable) -> Self {
        let durations: Vec<_> = totals.iter().map(|(a, _)| (a.clone(), 0)).collect();
        Self::new(totals, durations, Interpolation::None).expect("ids come from the table")
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn totals(&self) -> &AggregateTable {
        &self.totals
    }

    pub fn explicit(&self) -> &BTreeMap<AssetId, u64> {
        &self.durations
    }

    pub fn source(&self, asset: &str) -> Result<DurationSource, GraphError> {
        self.totals.total(asset)?;
        Ok(if self.durations.contains_key(asset) {
            DurationSource::Explicit
        } else {
            DurationSource::Interpolated
        })
    }

    /// Cease-fire seconds for `asset`: the explicit entry when present,
    /// otherwise the interpolation rule.
    pub fn duration(&self, asset: &str) -> Result<u64, GraphError> {
        let total = self.totals.total(asset)?;
        if let Some(&s) = self.durations.get(asset) {
            return Ok(s);
        }
        Ok(match self.interpolation {
            Interpolation::None => 0,
            Interpolation::PiecewiseLinear => interpolate(&self.knots, total),
        })
    }
}

fn build_knots(durations: &BTreeMap<AssetId, u64>, totals: &AggregateTable) -> Vec<(u64, u64)> {
    let mut by_total: BTreeMap<u64, u64> = BTreeMap::new();
    for (asset, &seconds) in durations {
        let total = totals.total(asset.as_str()).unwrap_or(0);
        if total == 0 {
            continue;
        }
        let slot = by_total.entry(total).or_insert(0);
        *slot = (*slot).max(seconds);
    }
    let mut running = 0;
    by_total
        .into_iter()
        .map(|(t, s)| {
            running = running.max(s);
            (t, running)
        })
        .collect()
}

fn interpolate(knots: &[(u64, u64)], total: u64) -> u64 {
    if total == 0 || knots.is_empty() {
        return 0;
    }
    let upper = knots.partition_point(|&(t, _)| t < total);
    if upper == 0 {
        return knots[0].1;
    }
    if upper == knots.len() {
        return knots[knots.len() - 1].1;
    }
    let (t1, d1) = knots[upper];
    if t1 == total {
        return d1;
    }
    let (t0, d0) = knots[upper - 1];
    // round half up; d1 >= d0 by construction
    let span = u128::from(t1 - t0);
    let rise = u128::from(d1 - d0) * u128::from(total - t0);
    d0 + ((rise * 2 + span) / (span * 2)) as u64
}

/// Checks a policy against the aggregates derived from `graph` and `matrix`.
pub fn validate_policy(
    policy: &CeasefirePolicy,
    graph: &CreationalGraph,
    matrix: &DependencyValueMatrix,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let totals = AggregateTable::compute(graph, matrix);

    for (asset, total) in totals.iter() {
        match policy.totals.total(asset.as_str()) {
            Ok(t) if t == total => {}
            Ok(t) => report.error(Issue::StaleTotals {
                asset: asset.clone(),
                policy_total: t,
                matrix_total: total,
            }),
            Err(_) => report.error(Issue::UnknownAsset { asset: asset.clone() }),
        }
    }
    for asset in policy.durations.keys() {
        if !totals.contains(asset.as_str()) {
            report.error(Issue::UnknownAsset { asset: asset.clone() });
        }
    }
    if !report.is_clean() {
        return report;
    }

    let effective: Vec<(AssetId, u64, u64)> = totals
        .iter()
        .map(|(a, t)| (a.clone(), t, policy.duration(a.as_str()).unwrap_or(0)))
        .collect();

    for (asset, total, seconds) in &effective {
        if *total == 0 && *seconds > 0 {
            report.error(Issue::CeasefireOnZeroTotal {
                asset: asset.clone(),
                seconds: *seconds,
            });
        }
        if *total > 0 && policy.interpolation == Interpolation::None && !policy.durations.contains_key(asset.as_str()) {
            report.error(Issue::MissingCeasefire {
                asset: asset.clone(),
                total: *total,
            });
        }
    }
    for (hi, hi_total, hi_secs) in &effective {
        for (lo, lo_total, lo_secs) in &effective {
            if hi_total > lo_total && hi_secs < lo_secs {
                report.error(Issue::NonMonotoneCeasefire {
                    higher: hi.clone(),
                    higher_total: *hi_total,
                    higher_seconds: *hi_secs,
                    lower: lo.clone(),
                    lower_total: *lo_total,
                    lower_seconds: *lo_secs,
                });
            }
        }
    }
    report
}
