//! Machine-readable batch reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::RunConfig;
use crate::metrics::round_one_decimal;
use crate::pipeline::AdaptationResult;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub selected: usize,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub source: String,
    pub target: String,
    /// Averaging key, e.g. `fused/progressive` or `1nn`.
    pub method: String,
    pub config: Option<RunConfig>,
    pub status: TaskStatus,
    pub error: Option<String>,
    pub iterations: Vec<IterationRecord>,
    pub final_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub warnings: Vec<String>,
}

impl TaskRecord {
    pub fn from_result(source: &str, target: &str, result: &AdaptationResult) -> Self {
        let cfg = result.config;
        TaskRecord {
            source: source.to_string(),
            target: target.to_string(),
            method: format!("{}/{}", cfg.labeling, cfg.selection),
            config: Some(cfg),
            status: TaskStatus::Ok,
            error: None,
            iterations: result
                .snapshots
                .iter()
                .map(|s| IterationRecord {
                    k: s.k,
                    selected: s.selected,
                    accuracy: s.accuracy.map(round_one_decimal),
                })
                .collect(),
            final_accuracy: result.final_accuracy().map(round_one_decimal),
            wall_time_s: None,
            warnings: result.warnings.iter().map(|w| w.to_string()).collect(),
        }
    }

    pub fn baseline(source: &str, target: &str, accuracy: Option<f64>) -> Self {
        TaskRecord {
            source: source.to_string(),
            target: target.to_string(),
            method: "1nn".into(),
            config: None,
            status: TaskStatus::Ok,
            error: None,
            iterations: Vec::new(),
            final_accuracy: accuracy.map(round_one_decimal),
            wall_time_s: None,
            warnings: Vec::new(),
        }
    }

    pub fn failed(source: &str, target: &str, method: String, error: String) -> Self {
        TaskRecord {
            source: source.to_string(),
            target: target.to_string(),
            method,
            config: None,
            status: TaskStatus::Failed,
            error: Some(error),
            iterations: Vec::new(),
            final_accuracy: None,
            wall_time_s: None,
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub tasks: Vec<TaskRecord>,
    /// Mean final accuracy of the successful tasks, per method.
    pub averages: BTreeMap<String, f64>,
    pub failed_tasks: usize,
}

impl Report {
    pub fn new(command: &str, tasks: Vec<TaskRecord>) -> Self {
        let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for t in &tasks {
            if let Some(acc) = t.final_accuracy {
                let entry = sums.entry(t.method.clone()).or_insert((0.0, 0));
                entry.0 += acc;
                entry.1 += 1;
            }
        }
        let averages = sums
            .into_iter()
            .map(|(k, (sum, n))| (k, sum / n as f64))
            .collect();
        let failed_tasks = tasks
            .iter()
            .filter(|t| t.status == TaskStatus::Failed)
            .count();
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            tasks,
            averages,
            failed_tasks,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(method: &str, acc: Option<f64>) -> TaskRecord {
        let mut t = TaskRecord::baseline("A", "B", acc);
        t.method = method.into();
        t
    }

    #[test]
    fn averages_are_per_method_means() {
        let report = Report::new(
            "adapt",
            vec![
                record("fused/progressive", Some(90.0)),
                record("fused/progressive", Some(95.5)),
                record("1nn", Some(80.0)),
                TaskRecord::failed("C", "D", "fused/progressive".into(), "boom".into()),
            ],
        );
        assert_eq!(report.averages["fused/progressive"], 92.75);
        assert_eq!(report.averages["1nn"], 80.0);
        assert_eq!(report.failed_tasks, 1);
    }

    #[test]
    fn json_round_trip() {
        let report = Report::new("baseline-1nn", vec![record("1nn", Some(83.8))]);
        let text = report.to_json();
        assert!(text.contains("\"schema_version\": 1"));
        assert_eq!(Report::from_json(&text).unwrap(), report);
    }
}
