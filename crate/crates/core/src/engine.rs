//! End-to-end query execution against an indexed target.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::cypher::{compile, parse_query, CompiledQuery, ReturnCollector, ReturnSpec, ReturnValue};
use crate::domains::{compute_domains, DomainOptions};
use crate::error::EngineError;
use crate::index::TargetIndex;
use crate::matcher::{match_all, MatchStatus};
use crate::ordering::{ablation_ordering, build_ordering, OrderingKind};
use crate::symmetry::{
    branch_signatures, derive_conditions, enumerate_automorphisms_with, BreakingConditions,
    DEFAULT_MAX_QUERY_NODES,
};

#[derive(Debug, Clone, PartialEq)]
pub struct EngineOptions {
    pub ordering: OrderingKind,
    /// Seed of the random ordering.
    pub seed: u64,
    pub use_bitmatrix: bool,
    pub symmetry: bool,
    pub paper_strict: bool,
    /// Caps the number of results on top of any RETURN ... LIMIT.
    pub limit: Option<usize>,
    pub timeout: Option<Duration>,
    pub max_query_nodes: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            ordering: OrderingKind::Full,
            seed: 0,
            use_bitmatrix: true,
            symmetry: true,
            paper_strict: false,
            limit: None,
            timeout: None,
            max_query_nodes: DEFAULT_MAX_QUERY_NODES,
        }
    }
}

/// Wall time per pipeline phase, in seconds. `read` and `index` are filled
/// in by whoever loaded the target.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PhaseTimings {
    pub read: f64,
    pub index: f64,
    pub symmetry: f64,
    pub domains: f64,
    pub ordering: f64,
    pub matching: f64,
}

impl PhaseTimings {
    pub fn total(&self) -> f64 {
        self.read + self.index + self.symmetry + self.domains + self.ordering + self.matching
    }
}

#[derive(Debug, Clone)]
pub struct RunStats {
    pub status: MatchStatus,
    /// Distinct mappings passed to the sink.
    pub emitted: u64,
    pub automorphisms: usize,
    pub conditions: BreakingConditions,
    pub branches: usize,
    pub iterations: u64,
    pub timings: PhaseTimings,
}

#[derive(Debug, Clone)]
pub struct QueryRun {
    pub value: ReturnValue,
    pub stats: RunStats,
}

fn secs(since: Instant) -> f64 {
    since.elapsed().as_secs_f64()
}

/// Runs every DNF branch of `cq` and streams the union of their mappings to
/// `sink`; a mapping satisfying several branches is reported once. `sink`
/// returns `false` to stop.
pub fn run_with_sink(
    cq: &CompiledQuery,
    idx: &TargetIndex,
    opts: &EngineOptions,
    mut sink: impl FnMut(&[usize], &[usize]) -> bool,
) -> Result<RunStats, EngineError> {
    let deadline = opts.timeout.map(|t| Instant::now() + t);
    let mut timings = PhaseTimings::default();
    let mut stats = RunStats {
        status: MatchStatus::Completed,
        emitted: 0,
        automorphisms: 1,
        conditions: BreakingConditions::default(),
        branches: cq.branches.len(),
        iterations: 0,
        timings,
    };
    if cq.branches.is_empty() {
        return Ok(stats);
    }

    let t = Instant::now();
    let conds = if opts.symmetry {
        let sig = branch_signatures(&cq.base, &cq.branches);
        let auts = enumerate_automorphisms_with(&cq.base, &sig, opts.max_query_nodes)?;
        stats.automorphisms = auts.len();
        derive_conditions(&auts)
    } else {
        BreakingConditions::default()
    };
    timings.symmetry = secs(t);
    stats.conditions = conds.clone();

    let dopts = DomainOptions {
        use_bitmatrix: opts.use_bitmatrix,
        paper_strict: opts.paper_strict,
    };
    let multi = cq.branches.len() > 1;
    let mut seen: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
    'branches: for branch in &cq.branches {
        let t = Instant::now();
        let domains = compute_domains(branch, idx, dopts);
        timings.domains += secs(t);

        let t = Instant::now();
        let order = match opts.ordering {
            OrderingKind::Full => build_ordering(&branch.graph, &domains),
            kind => ablation_ordering(kind, &branch.graph, &domains, idx, opts.seed),
        };
        timings.ordering += secs(t);

        let t = Instant::now();
        let mut stopped = false;
        let out = match_all(branch, idx, &domains, &order, &conds, deadline, |f, g| {
            if multi && !seen.insert((f.to_vec(), g.to_vec())) {
                return true;
            }
            stats.emitted += 1;
            let more = sink(f, g);
            stopped = !more;
            more
        });
        timings.matching += secs(t);
        stats.iterations += out.iterations;
        if out.status != MatchStatus::Completed {
            stats.status = out.status;
            break 'branches;
        }
        if stopped {
            stats.status = MatchStatus::Limit;
            break;
        }
    }
    stats.timings = timings;
    Ok(stats)
}

/// Executes a compiled query and evaluates its RETURN clause.
pub fn run_compiled(cq: &CompiledQuery, idx: &TargetIndex, opts: &EngineOptions) -> Result<QueryRun, EngineError> {
    let spec = ReturnSpec {
        kind: cq.ast.return_clause.kind.clone(),
        limit: match (cq.ast.return_clause.limit, opts.limit) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        },
    };
    let mut collector = ReturnCollector::new(&spec, &cq.base, idx.graph());
    if collector.is_full() {
        return Ok(QueryRun {
            value: collector.finish(),
            stats: RunStats {
                status: MatchStatus::Limit,
                emitted: 0,
                automorphisms: 1,
                conditions: BreakingConditions::default(),
                branches: cq.branches.len(),
                iterations: 0,
                timings: PhaseTimings::default(),
            },
        });
    }
    let stats = run_with_sink(cq, idx, opts, |f, g| collector.push(f, g))?;
    Ok(QueryRun {
        value: collector.finish(),
        stats,
    })
}

/// Parses, compiles and executes `src`.
pub fn run_query(src: &str, idx: &TargetIndex, opts: &EngineOptions) -> Result<QueryRun, EngineError> {
    let ast = parse_query(src)?;
    run_compiled(&compile(&ast), idx, opts)
}

/// Number of distinct edge images among the mappings the engine reports.
/// Differs from the mapping count only for OR queries, whose branches may
/// reach one occurrence through different mappings.
pub fn count_occurrences(cq: &CompiledQuery, idx: &TargetIndex, opts: &EngineOptions) -> Result<(u64, RunStats), EngineError> {
    let mut images: HashSet<Vec<usize>> = HashSet::new();
    let stats = run_with_sink(cq, idx, opts, |_, g| {
        let mut img = g.to_vec();
        img.sort_unstable();
        images.insert(img);
        true
    })?;
    Ok((images.len() as u64, stats))
}

/// Every mapping of `src`, sorted. Meant for tests and debugging.
pub fn collect_mappings(
    src: &str,
    idx: &TargetIndex,
    opts: &EngineOptions,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>, EngineError> {
    let cq = compile(&parse_query(src)?);
    let mut out = Vec::new();
    run_with_sink(&cq, idx, opts, |f, g| {
        out.push((f.to_vec(), g.to_vec()));
        true
    })?;
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;

    fn no_sym() -> EngineOptions {
        EngineOptions {
            symmetry: false,
            ..EngineOptions::default()
        }
    }

    #[test]
    fn counts_on_fixtures() {
        let idx = TargetIndex::build(toy_target());
        let run = run_query(SYMMETRIC_NODES_QUERY, &idx, &EngineOptions::default()).unwrap();
        assert_eq!(run.value, ReturnValue::Count(1));
        assert_eq!(run.stats.automorphisms, 2);
        let run = run_query(SYMMETRIC_NODES_QUERY, &idx, &no_sym()).unwrap();
        assert_eq!(run.value, ReturnValue::Count(2));
    }

    #[test]
    fn or_branches_are_deduplicated() {
        let idx = TargetIndex::build(toy_target());
        let all = run_query("MATCH (a)-[r]->(b) RETURN count()", &idx, &no_sym()).unwrap();
        let either = run_query(
            "MATCH (a)-[r]->(b) WHERE type(r) = 'blue' OR type(r) <> 'blue' OR a.x = 1 RETURN count()",
            &idx,
            &no_sym(),
        )
        .unwrap();
        assert_eq!(all.value, either.value);
        assert_eq!(either.stats.branches, 3);
    }

    #[test]
    fn limit_is_exact() {
        let idx = TargetIndex::build(toy_target());
        let total = match run_query("MATCH (a)-[r]->(b) RETURN count()", &idx, &no_sym()).unwrap().value {
            ReturnValue::Count(n) => n as usize,
            _ => unreachable!(),
        };
        for k in 1..total + 3 {
            let opts = EngineOptions {
                limit: Some(k),
                ..no_sym()
            };
            let run = run_query("MATCH (a)-[r]->(b) RETURN a, b", &idx, &opts).unwrap();
            match run.value {
                ReturnValue::Table { rows, .. } => assert_eq!(rows.len(), k.min(total)),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn unsatisfiable_where_yields_nothing() {
        let idx = TargetIndex::build(toy_target());
        let run = run_query(
            "MATCH (a)-[r]->(b) WHERE type(r) = 'blue' AND type(r) = 'red' RETURN count()",
            &idx,
            &EngineOptions::default(),
        )
        .unwrap();
        assert_eq!(run.value, ReturnValue::Count(0));
    }
}
