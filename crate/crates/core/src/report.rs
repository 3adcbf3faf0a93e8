//! Analysis tables and report serialization. Tables go out as CSV by
//! default, everything else as JSON.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::event::EventRecord;
use crate::graph::AssetId;
use crate::metrics::DurationSource;
use crate::scenario::Scenario;
use crate::sim::ExperimentReport;

/// One asset's aggregate path value and effective cease-fire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisRow {
    pub asset: AssetId,
    pub aggregate_value: u64,
    pub ceasefire_seconds: u64,
    pub source: DurationSource,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    /// Assets in significance order.
    pub table: Vec<AnalysisRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub experiments: Vec<ExperimentReport>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub event_logs: BTreeMap<String, Vec<EventRecord>>,
}

/// Significance ranking joined with the effective cease-fire of every asset.
pub fn analyze(scenario: &Scenario) -> ReportBundle {
    let policy = scenario.policy();
    let table = scenario
        .totals()
        .ranking()
        .into_iter()
        .map(|(asset, total)| AnalysisRow {
            ceasefire_seconds: policy
                .duration(asset.as_str())
                .expect("ranking ids come from the scenario"),
            source: policy
                .source(asset.as_str())
                .expect("ranking ids come from the scenario"),
            aggregate_value: total,
            asset,
        })
        .collect();
    ReportBundle {
        table,
        ..ReportBundle::default()
    }
}

/// `asset,aggregate_value,ceasefire_seconds,source` with a header row.
pub fn table_to_csv(rows: &[AnalysisRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

pub fn table_from_csv(text: &str) -> Result<Vec<AnalysisRow>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}

impl ReportBundle {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
