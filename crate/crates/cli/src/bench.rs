use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use mgm_core::cypher::{compile, parse_query, ReturnKind};
use mgm_core::engine::{run_compiled, EngineOptions};
use mgm_core::{ConfigError, OrderingKind, TargetIndex};
use rayon::prelude::*;
use serde::Serialize;

use crate::report::RunStatus;
use crate::Failure;

/// An engine configuration under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Ordering(OrderingKind),
    /// Full ordering without signature containment.
    NoBitmatrix,
}

impl Variant {
    pub fn name(&self) -> String {
        match self {
            Variant::Ordering(k) => k.name().to_string(),
            Variant::NoBitmatrix => "nobm".to_string(),
        }
    }

    pub fn apply(&self, base: &EngineOptions) -> EngineOptions {
        match *self {
            Variant::Ordering(ordering) => EngineOptions {
                ordering,
                ..base.clone()
            },
            Variant::NoBitmatrix => EngineOptions {
                use_bitmatrix: false,
                ..base.clone()
            },
        }
    }
}

impl FromStr for Variant {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("nobm") || s.eq_ignore_ascii_case("no-bitmatrix") {
            return Ok(Variant::NoBitmatrix);
        }
        s.parse().map(Variant::Ordering)
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchRow {
    pub row: &'static str,
    pub query: String,
    pub variant: String,
    pub status: String,
    pub count: Option<u64>,
    pub completed: Option<usize>,
    pub symmetry_s: Option<f64>,
    pub domains_s: Option<f64>,
    pub ordering_s: Option<f64>,
    pub matching_s: Option<f64>,
    pub total_s: Option<f64>,
    pub consistency: String,
    pub error: String,
}

struct Outcome {
    query: String,
    variant: String,
    status: Result<RunStatus, String>,
    count: u64,
    phases: [f64; 4],
}

pub fn query_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::load(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cypher" || x == "cyp"))
        .collect();
    files.sort();
    Ok(files)
}

fn run_one(idx: &TargetIndex, name: &str, text: &str, variant: Variant, base: &EngineOptions) -> Outcome {
    let mut out = Outcome {
        query: name.to_string(),
        variant: variant.name(),
        status: Err(String::new()),
        count: 0,
        phases: [0.0; 4],
    };
    let ast = match parse_query(text) {
        Ok(a) => a,
        Err(e) => {
            out.status = Err(e.to_string());
            return out;
        }
    };
    let mut cq = compile(&ast);
    cq.ast.return_clause.kind = ReturnKind::Count;
    match run_compiled(&cq, idx, &variant.apply(base)) {
        Ok(run) => {
            let t = run.stats.timings;
            out.phases = [t.symmetry, t.domains, t.ordering, t.matching];
            out.count = match run.value {
                mgm_core::cypher::ReturnValue::Count(n) => n,
                mgm_core::cypher::ReturnValue::Table { rows, .. } => rows.len() as u64,
            };
            out.status = Ok(RunStatus::of(run.stats.status));
        }
        Err(e) => out.status = Err(e.to_string()),
    }
    out
}

/// Runs every query under every variant; detail rows are ordered by query
/// then variant, followed by one aggregate row per variant.
pub fn bench(
    idx: &TargetIndex,
    queries: &[(String, String)],
    variants: &[Variant],
    base: &EngineOptions,
    jobs: usize,
) -> Result<Vec<BenchRow>, Failure> {
    let cap = base
        .timeout
        .map(|d| d.as_secs_f64())
        .unwrap_or(f64::INFINITY);
    let tasks: Vec<(usize, Variant)> = (0..queries.len())
        .flat_map(|q| variants.iter().map(move |&v| (q, v)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Failure::internal(e.to_string()))?;
    let outcomes: Vec<Outcome> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(q, v)| run_one(idx, &queries[q].0, &queries[q].1, v, base))
            .collect()
    });

    let mut rows = Vec::new();
    for chunk in outcomes.chunks(variants.len().max(1)) {
        let counts: Vec<u64> = chunk
            .iter()
            .filter(|o| o.status == Ok(RunStatus::Completed))
            .map(|o| o.count)
            .collect();
        let consistency = if counts.windows(2).all(|w| w[0] == w[1]) { "ok" } else { "mismatch" };
        for o in chunk {
            let (status, error) = match &o.status {
                Ok(s) => (s.as_str().to_string(), String::new()),
                Err(e) => ("error".to_string(), e.clone()),
            };
            let ok = o.status.is_ok();
            rows.push(BenchRow {
                row: "detail",
                query: o.query.clone(),
                variant: o.variant.clone(),
                status,
                count: ok.then_some(o.count),
                completed: None,
                symmetry_s: ok.then_some(o.phases[0]),
                domains_s: ok.then_some(o.phases[1]),
                ordering_s: ok.then_some(o.phases[2]),
                matching_s: ok.then_some(o.phases[3]),
                total_s: ok.then_some(o.phases.iter().sum()),
                consistency: consistency.to_string(),
                error,
            });
        }
    }
    for v in variants {
        let name = v.name();
        let mine: Vec<&Outcome> = outcomes.iter().filter(|o| o.variant == name).collect();
        let completed = mine.iter().filter(|o| o.status == Ok(RunStatus::Completed)).count();
        // unfinished runs are charged the full timeout
        let charged: Vec<f64> = mine
            .iter()
            .filter_map(|o| match o.status {
                Ok(RunStatus::Completed) => Some(o.phases.iter().sum::<f64>()),
                Ok(RunStatus::Timeout) => Some(cap),
                Err(_) => None,
            })
            .collect();
        let mean = (!charged.is_empty()).then(|| charged.iter().sum::<f64>() / charged.len() as f64);
        rows.push(BenchRow {
            row: "aggregate",
            query: "*".into(),
            variant: name,
            status: String::new(),
            count: None,
            completed: Some(completed),
            symmetry_s: None,
            domains_s: None,
            ordering_s: None,
            matching_s: None,
            total_s: mean,
            consistency: String::new(),
            error: String::new(),
        });
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], w: W) -> Result<(), Failure> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| Failure::internal(e.to_string()))?;
    }
    out.flush().map_err(|e| Failure::internal(e.to_string()))
}

pub fn default_timeout() -> Duration {
    Duration::from_secs(60)
}
