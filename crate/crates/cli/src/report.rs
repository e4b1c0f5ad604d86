use mgm_core::cypher::ReturnValue;
use mgm_core::engine::{PhaseTimings, QueryRun};
use mgm_core::MatchStatus;
use serde::Serialize;
use serde_json::Value;

/// Bumped whenever a field is renamed or removed.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Timeout,
}

impl RunStatus {
    pub fn of(s: MatchStatus) -> Self {
        match s {
            MatchStatus::Timeout => RunStatus::Timeout,
            // stopping at LIMIT is a complete answer
            MatchStatus::Completed | MatchStatus::Limit => RunStatus::Completed,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub read: f64,
    pub index: f64,
    pub symmetry: f64,
    pub domains: f64,
    pub ordering: f64,
    pub matching: f64,
    pub total: f64,
}

impl From<PhaseTimings> for Timings {
    fn from(t: PhaseTimings) -> Self {
        Timings {
            read: t.read,
            index: t.index,
            symmetry: t.symmetry,
            domains: t.domains,
            ordering: t.ordering,
            matching: t.matching,
            total: t.total(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub status: RunStatus,
    /// Number of RETURN results (the count, or the number of rows).
    pub count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<Value>>>,
    pub timings_secs: Timings,
    pub automorphisms: usize,
    pub node_conditions: Vec<(String, String)>,
    pub edge_conditions: Vec<(String, String)>,
    pub branches: usize,
    pub search_iterations: u64,
    /// Distinct edge images, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occurrences: Option<u64>,
}

impl RunReport {
    pub fn new(run: &QueryRun, timings: PhaseTimings, names: (&[String], &[String])) -> Self {
        let (count, columns, rows) = match &run.value {
            ReturnValue::Count(n) => (*n, None, None),
            ReturnValue::Table { columns, rows } => (rows.len() as u64, Some(columns.clone()), Some(rows.clone())),
        };
        let pairs = |conds: &[(usize, usize)], names: &[String]| {
            conds
                .iter()
                .map(|&(a, b)| (names[a].clone(), names[b].clone()))
                .collect()
        };
        RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            status: RunStatus::of(run.stats.status),
            count,
            columns,
            rows,
            timings_secs: timings.into(),
            automorphisms: run.stats.automorphisms,
            node_conditions: pairs(&run.stats.conditions.node_conds, names.0),
            edge_conditions: pairs(&run.stats.conditions.edge_conds, names.1),
            branches: run.stats.branches,
            search_iterations: run.stats.iterations,
            occurrences: None,
        }
    }

    pub fn render_text(&self, count_only: bool) -> String {
        let mut out = String::new();
        match (&self.columns, &self.rows) {
            (Some(cols), Some(rows)) if !count_only => {
                out.push_str(&cols.join("\t"));
                out.push('\n');
                for r in rows {
                    let cells: Vec<String> = r
                        .iter()
                        .map(|v| match v {
                            Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect();
                    out.push_str(&cells.join("\t"));
                    out.push('\n');
                }
            }
            _ => {
                out.push_str(&self.count.to_string());
                out.push('\n');
            }
        }
        out
    }
}
