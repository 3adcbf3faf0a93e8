//! Scenario documents: a JSON file bundling the creational graph, the
//! dependency-value matrix, the cease-fire table and optional simulation
//! defaults. Also home of the bundled `battle` scenario.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{AssetId, AssetType, CreationalEdge, CreationalGraph, Holdings};
use crate::metrics::{
    validate_policy, AggregateTable, CeasefirePolicy, DependencyValue, DependencyValueMatrix, Interpolation,
};
use crate::sim::{AttackModel, CostModel};
use crate::validation::Issue;

/// The bundled battle scenario, byte for byte.
pub const BATTLE_SCENARIO: &str = include_str!("../data/battle.json");

pub const BUILTIN_PREFIX: &str = "builtin:";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CeasefireEntry {
    pub asset: AssetId,
    pub seconds: u64,
}

fn default_max_ticks() -> u64 {
    3600
}

fn default_income() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationDefaults {
    #[serde(default = "default_max_ticks")]
    pub max_ticks: u64,
    #[serde(default = "default_income")]
    pub income_per_tick: u64,
    #[serde(default)]
    pub starting_resources: u64,
    /// Defaults to one instance of every root asset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starting_holdings: Option<BTreeMap<AssetId, u32>>,
    #[serde(default)]
    pub build_cost: CostModel,
    #[serde(default)]
    pub attack: AttackModel,
}

impl Default for SimulationDefaults {
    fn default() -> Self {
        SimulationDefaults {
            max_ticks: default_max_ticks(),
            income_per_tick: default_income(),
            starting_resources: 0,
            starting_holdings: None,
            build_cost: CostModel::default(),
            attack: AttackModel::default(),
        }
    }
}

impl SimulationDefaults {
    pub fn starting_holdings_for(&self, graph: &CreationalGraph) -> Holdings {
        match &self.starting_holdings {
            Some(map) => map.iter().map(|(a, &c)| (a.clone(), c)).collect(),
            None => graph.roots().into_iter().map(|r| (r, 1)).collect(),
        }
    }
}

fn is_default_interpolation(i: &Interpolation) -> bool {
    *i == Interpolation::default()
}

/// On-disk scenario layout.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub assets: Vec<AssetType>,
    #[serde(default)]
    pub edges: Vec<CreationalEdge>,
    #[serde(default)]
    pub dependency_values: Vec<DependencyValue>,
    #[serde(default)]
    pub ceasefire: Vec<CeasefireEntry>,
    #[serde(default, skip_serializing_if = "is_default_interpolation")]
    pub ceasefire_interpolation: Interpolation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationDefaults>,
}

impl ScenarioFile {
    /// Syntax-level parse. Blank input is an empty document.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        if text.trim().is_empty() {
            return Ok(ScenarioFile::default());
        }
        serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Pretty JSON with a trailing newline, the layout of the bundled file.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario files always serialize");
        s.push('\n');
        s
    }
}

/// A semantic problem together with where in the document it sits, e.g.
/// `edges[3]` or `dependency_values[12]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioIssue {
    pub location: String,
    pub issue: Issue,
}

impl fmt::Display for ScenarioIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.issue)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", render_issues(.0))]
    Semantic(Vec<ScenarioIssue>),
    #[error("unknown builtin scenario `{0}`")]
    UnknownBuiltin(String),
}

fn render_issues(issues: &[ScenarioIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

/// Result of checking a [`ScenarioFile`]: a usable scenario when there are
/// no errors, plus every finding.
#[derive(Debug, Clone)]
pub struct ScenarioCheck {
    pub scenario: Option<Scenario>,
    pub errors: Vec<ScenarioIssue>,
    pub warnings: Vec<ScenarioIssue>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    file: ScenarioFile,
    graph: CreationalGraph,
    matrix: DependencyValueMatrix,
    totals: AggregateTable,
    policy: CeasefirePolicy,
    simulation: SimulationDefaults,
    warnings: Vec<ScenarioIssue>,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.file == other.file
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    Scenario::from_file(ScenarioFile::from_json(text)?)
}

impl Scenario {
    pub fn from_file(file: ScenarioFile) -> Result<Self, ScenarioError> {
        let check = check_scenario(file);
        match check.scenario {
            Some(s) => Ok(s),
            None => Err(ScenarioError::Semantic(check.errors)),
        }
    }

    /// The bundled battle scenario.
    pub fn battle() -> Self {
        parse_scenario(BATTLE_SCENARIO).expect("bundled scenario is valid")
    }

    /// Resolves `builtin:<name>` or a bare builtin name.
    pub fn builtin(name: &str) -> Result<Self, ScenarioError> {
        match name.strip_prefix(BUILTIN_PREFIX).unwrap_or(name) {
            "battle" => Ok(Self::battle()),
            other => Err(ScenarioError::UnknownBuiltin(other.to_owned())),
        }
    }

    pub fn file(&self) -> &ScenarioFile {
        &self.file
    }

    pub fn to_json(&self) -> String {
        self.file.to_json()
    }

    pub fn graph(&self) -> &CreationalGraph {
        &self.graph
    }

    pub fn matrix(&self) -> &DependencyValueMatrix {
        &self.matrix
    }

    pub fn totals(&self) -> &AggregateTable {
        &self.totals
    }

    pub fn policy(&self) -> &CeasefirePolicy {
        &self.policy
    }

    pub fn simulation(&self) -> &SimulationDefaults {
        &self.simulation
    }

    pub fn warnings(&self) -> &[ScenarioIssue] {
        &self.warnings
    }
}

fn position<T>(items: &[T], pred: impl Fn(&T) -> bool) -> Option<usize> {
    items.iter().position(pred)
}

fn rposition<T>(items: &[T], pred: impl Fn(&T) -> bool) -> Option<usize> {
    items.iter().rposition(pred)
}

fn at(section: &str, index: Option<usize>) -> String {
    match index {
        Some(i) => format!("{section}[{i}]"),
        None => section.to_owned(),
    }
}

fn locate_graph_issue(file: &ScenarioFile, issue: &Issue) -> String {
    let edge = |p: &AssetId, c: &AssetId, last: bool| {
        let pred = |e: &CreationalEdge| &e.prerequisite == p && &e.product == c;
        let i = if last {
            rposition(&file.edges, pred)
        } else {
            position(&file.edges, pred)
        };
        at("edges", i)
    };
    match issue {
        Issue::DuplicateAsset { asset } => at("assets", rposition(&file.assets, |a| &a.id == asset)),
        Issue::UnknownAsset { asset } => at(
            "edges",
            position(&file.edges, |e| &e.prerequisite == asset || &e.product == asset),
        ),
        Issue::SelfEdge { asset } => edge(asset, asset, false),
        Issue::ZeroRequiredCount { prerequisite, product } => edge(prerequisite, product, false),
        Issue::DuplicateEdge { prerequisite, product } => edge(prerequisite, product, true),
        Issue::UnreachableFromRoot { asset } => at("assets", position(&file.assets, |a| &a.id == asset)),
        _ => "edges".to_owned(),
    }
}

fn locate_value_issue(file: &ScenarioFile, issue: &Issue) -> String {
    let cell = |a: &AssetId, d: &AssetId, last: bool| {
        let pred = |v: &DependencyValue| &v.ancestor == a && &v.descendant == d;
        let i = if last {
            rposition(&file.dependency_values, pred)
        } else {
            position(&file.dependency_values, pred)
        };
        at("dependency_values", i)
    };
    match issue {
        Issue::ValueOnUnreachablePair { ancestor, descendant }
        | Issue::ZeroDependencyValue { ancestor, descendant } => cell(ancestor, descendant, false),
        Issue::DuplicateDependencyValue { ancestor, descendant } => cell(ancestor, descendant, true),
        Issue::UnknownAsset { asset } => at(
            "dependency_values",
            position(&file.dependency_values, |v| {
                &v.ancestor == asset || &v.descendant == asset
            }),
        ),
        _ => "dependency_values".to_owned(),
    }
}

fn locate_ceasefire_issue(file: &ScenarioFile, issue: &Issue) -> String {
    let entry = |asset: &AssetId, last: bool| {
        let pred = |c: &CeasefireEntry| &c.asset == asset;
        let i = if last {
            rposition(&file.ceasefire, pred)
        } else {
            position(&file.ceasefire, pred)
        };
        at("ceasefire", i)
    };
    match issue {
        Issue::DuplicateCeasefire { asset } => entry(asset, true),
        Issue::UnknownAsset { asset } | Issue::CeasefireOnZeroTotal { asset, .. } => entry(asset, false),
        Issue::NonMonotoneCeasefire { higher, .. } => entry(higher, false),
        _ => "ceasefire".to_owned(),
    }
}

/// Runs every structural and semantic check on `file`, collecting all
/// findings instead of stopping at the first.
pub fn check_scenario(file: ScenarioFile) -> ScenarioCheck {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let push = |list: &mut Vec<ScenarioIssue>, location: String, issue: Issue| {
        list.push(ScenarioIssue { location, issue });
    };

    if file.assets.is_empty() {
        push(&mut errors, "assets".into(), Issue::NoAssets);
    }

    let graph = CreationalGraph::new(file.assets.clone(), file.edges.clone());
    let report = graph.validate();
    for issue in report.errors {
        push(&mut errors, locate_graph_issue(&file, &issue), issue);
    }
    if !file.assets.is_empty() {
        for issue in report.warnings {
            push(&mut warnings, locate_graph_issue(&file, &issue), issue);
        }
    }

    let (matrix, value_issues) = DependencyValueMatrix::new_lenient(&graph, file.dependency_values.iter().cloned());
    let values_ok = value_issues.is_empty();
    for issue in value_issues {
        push(&mut errors, locate_value_issue(&file, &issue), issue);
    }

    let totals = AggregateTable::compute(&graph, &matrix);
    let policy = match CeasefirePolicy::new(
        totals.clone(),
        file.ceasefire.iter().map(|c| (c.asset.clone(), c.seconds)),
        file.ceasefire_interpolation,
    ) {
        Ok(p) => Some(p),
        Err(issues) => {
            for issue in issues {
                push(&mut errors, locate_ceasefire_issue(&file, &issue), issue);
            }
            None
        }
    };
    if let (Some(p), true) = (&policy, values_ok) {
        for issue in validate_policy(p, &graph, &matrix).errors {
            push(&mut errors, locate_ceasefire_issue(&file, &issue), issue);
        }
    }

    let simulation = file.simulation.clone().unwrap_or_default();
    if let Some(map) = &simulation.starting_holdings {
        for asset in map.keys().filter(|a| !graph.contains(a.as_str())) {
            push(
                &mut errors,
                "simulation.starting_holdings".into(),
                Issue::UnknownAsset { asset: asset.clone() },
            );
        }
    }
    for asset in simulation
        .build_cost
        .overrides
        .keys()
        .filter(|a| !graph.contains(a.as_str()))
    {
        push(
            &mut errors,
            "simulation.build_cost.overrides".into(),
            Issue::UnknownAsset { asset: asset.clone() },
        );
    }
    if simulation.max_ticks == 0 {
        push(
            &mut errors,
            "simulation.max_ticks".into(),
            Issue::InvalidSimulation {
                message: "max_ticks must be at least 1".into(),
            },
        );
    }
    if simulation.income_per_tick == 0 {
        push(
            &mut errors,
            "simulation.income_per_tick".into(),
            Issue::InvalidSimulation {
                message: "income_per_tick must be at least 1".into(),
            },
        );
    }
    if simulation.attack.hit_per_mille > 1000 {
        push(
            &mut errors,
            "simulation.attack.hit_per_mille".into(),
            Issue::InvalidSimulation {
                message: "hit_per_mille must be at most 1000".into(),
            },
        );
    }

    let scenario = match policy {
        Some(policy) if errors.is_empty() => Some(Scenario {
            file,
            graph,
            matrix,
            totals,
            policy,
            simulation,
            warnings: warnings.clone(),
        }),
        _ => None,
    };
    ScenarioCheck {
        scenario,
        errors,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_is_byte_stable() {
        let file = ScenarioFile::from_json(BATTLE_SCENARIO).unwrap();
        assert_eq!(file.to_json(), BATTLE_SCENARIO);
    }

    #[test]
    fn empty_document_has_no_assets() {
        for text in ["", "  \n", "{}"] {
            let Err(ScenarioError::Semantic(errs)) = parse_scenario(text) else {
                panic!("expected semantic error for {text:?}");
            };
            assert_eq!(errs[0].issue, Issue::NoAssets);
            assert_eq!(errs[0].to_string(), "assets: no assets defined");
        }
    }

    #[test]
    fn syntax_errors_carry_location() {
        let err = parse_scenario("{\n  \"assets\": [\n}").unwrap_err();
        assert!(matches!(err, ScenarioError::Syntax { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(matches!(
            parse_scenario(r#"{"assets": [], "edgez": []}"#),
            Err(ScenarioError::Syntax { .. })
        ));
    }

    #[test]
    fn required_count_defaults_to_one() {
        let s = parse_scenario(
            r#"{"assets": [{"id": "A", "display_name": "A"}, {"id": "B", "display_name": "B"}],
                "edges": [{"prerequisite": "A", "product": "B"}]}"#,
        )
        .unwrap();
        assert_eq!(s.graph().edges()[0].required_count, 1);
    }

    #[test]
    fn unreachable_value_is_located() {
        let mut file = ScenarioFile::from_json(BATTLE_SCENARIO).unwrap();
        file.dependency_values.push(DependencyValue::new("Soldiers", "Bank", 5));
        let idx = file.dependency_values.len() - 1;
        let Err(ScenarioError::Semantic(errs)) = Scenario::from_file(file) else {
            panic!("expected semantic errors");
        };
        assert_eq!(
            errs,
            vec![ScenarioIssue {
                location: format!("dependency_values[{idx}]"),
                issue: Issue::ValueOnUnreachablePair {
                    ancestor: "Soldiers".into(),
                    descendant: "Bank".into()
                }
            }]
        );
        assert!(errs[0].to_string().contains("value on unreachable pair"));
    }

    #[test]
    fn errors_are_collected_not_fail_fast() {
        let mut file = ScenarioFile::from_json(BATTLE_SCENARIO).unwrap();
        file.edges.push(CreationalEdge::new("Base", "Bank", 1));
        file.dependency_values.push(DependencyValue::new("Missile", "Base", 1));
        file.ceasefire.push(CeasefireEntry {
            asset: "Nowhere".into(),
            seconds: 1,
        });
        let check = check_scenario(file);
        assert!(check.scenario.is_none());
        let locations: Vec<&str> = check.errors.iter().map(|e| e.location.as_str()).collect();
        assert_eq!(locations, vec!["edges[14]", "dependency_values[37]", "ceasefire[14]"]);
    }

    #[test]
    fn unknown_builtin() {
        assert_eq!(
            Scenario::builtin("builtin:nope").unwrap_err(),
            ScenarioError::UnknownBuiltin("nope".into())
        );
        assert!(Scenario::builtin("builtin:battle").is_ok());
    }
}
