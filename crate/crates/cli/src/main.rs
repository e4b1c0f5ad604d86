//! `mgm`: load targets, run CYPHER queries, generate synthetic data and
//! benchmark engine variants.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage error, 3 query parse
//! error, 4 load error, 5 timeout (partial results were reported),
//! 6 configuration error.

mod bench;
mod report;
mod target;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mgm_core::cypher::{base_graph, compile, parse_query, render_query, ReturnKind};
use mgm_core::engine::{count_occurrences, run_compiled, EngineOptions, PhaseTimings};
use mgm_core::oracle::{oracle_match, OracleLimits};
use mgm_core::symmetry::DEFAULT_MAX_QUERY_NODES;
use mgm_core::synth::{extract_query, generate_ba, GenConfig, LabelDist, QueryExtractConfig};
use mgm_core::{EngineError, GraphBuilder, OrderingKind};
use serde::Serialize;

use crate::bench::Variant;
use crate::report::{RunReport, RunStatus};
use crate::target::{load_target, read_graph, save_csv, save_index, TargetSource};

pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_LOAD: u8 = 4;
pub const EXIT_TIMEOUT: u8 = 5;
pub const EXIT_CONFIG: u8 = 6;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn load(message: impl Into<String>) -> Self {
        Self { code: EXIT_LOAD, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self { code: EXIT_INTERNAL, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = match e {
            EngineError::Parse(_) => EXIT_PARSE,
            EngineError::Graph(_) => EXIT_LOAD,
            EngineError::Config(_) => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<mgm_core::ParseError> for Failure {
    fn from(e: mgm_core::ParseError) -> Self {
        Self { code: EXIT_PARSE, message: format!("parse error: {e}") }
    }
}

impl From<mgm_core::ConfigError> for Failure {
    fn from(e: mgm_core::ConfigError) -> Self {
        Self::config(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "mgm", version, about = "Sub-multigraph matching over labeled property multigraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read a CSV target, build its index and write a snapshot.
    Load {
        /// Directory containing nodes.csv and edges.csv.
        #[arg(long)]
        target: PathBuf,
        /// Snapshot file to write.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a CYPHER query against a target.
    Query(QueryArgs),
    /// Brute-force reference matcher (small targets only).
    Oracle {
        #[command(flatten)]
        input: QueryInput,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Generate a Barabási–Albert target in CSV form.
    Generate {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long, default_value_t = 2)]
        labels: usize,
        #[arg(long, default_value_t = 2)]
        types: usize,
        /// `uniform`, `powerlaw` or `powerlaw:<exponent>`.
        #[arg(long, default_value = "uniform")]
        node_dist: String,
        #[arg(long, default_value = "uniform")]
        edge_dist: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for nodes.csv and edges.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract random-walk queries from a target.
    ExtractQuery {
        #[arg(long)]
        target: PathBuf,
        /// Query size in nodes.
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Fraction of node pairs joined by an edge.
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of queries (seeds `seed`, `seed + 1`, ...).
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Write `q<i>.cypher` plus the query graph as `q<i>/nodes.csv`,
        /// `q<i>/edges.csv` here instead of printing CYPHER to stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run a query corpus under several engine variants and write CSV.
    Bench {
        #[arg(long)]
        target: PathBuf,
        /// Directory of `.cypher` files.
        #[arg(long)]
        queries: PathBuf,
        /// Comma-separated: full, random, domain, edgelabel, degree, nobm.
        #[arg(long, default_value = "full,random,domain,edgelabel,degree,nobm", value_delimiter = ',')]
        variants: Vec<String>,
        /// Per-run timeout in seconds; unfinished runs count as this value in means.
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct QueryInput {
    /// CYPHER text.
    #[arg(long)]
    query: Option<String>,
    /// File holding the CYPHER text.
    #[arg(long)]
    query_file: Option<PathBuf>,
}

impl QueryInput {
    fn text(&self) -> Result<String, Failure> {
        match (&self.query, &self.query_file) {
            (Some(q), _) => Ok(q.clone()),
            (None, Some(p)) => std::fs::read_to_string(p).map_err(|e| Failure::load(format!("{}: {e}", p.display()))),
            (None, None) => unreachable!("clap enforces one input"),
        }
    }
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    input: QueryInput,
    /// CSV directory or index snapshot.
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value = "full")]
    ordering: String,
    /// Seed of the random ordering.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_bitmatrix: bool,
    #[arg(long)]
    no_symmetry: bool,
    /// Ignore node properties and single-node WHERE atoms when building domains.
    #[arg(long)]
    paper_strict_domains: bool,
    #[arg(long)]
    limit: Option<usize>,
    /// Seconds; 0 disables the timeout.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Print only the number of results.
    #[arg(long)]
    count_only: bool,
    /// Also count distinct edge images (occurrences) among the mappings.
    #[arg(long)]
    count_occurrences: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_QUERY_NODES)]
    max_query_nodes: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn timeout(secs: f64) -> Result<Option<Duration>, Failure> {
    if !(secs >= 0.0) || !secs.is_finite() {
        return Err(Failure::config(format!("invalid timeout {secs}")));
    }
    Ok((secs > 0.0).then(|| Duration::from_secs_f64(secs)))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Failure::internal(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn cmd_load(target: &Path, out: &Path, format: Format) -> Result<u8, Failure> {
    let src = TargetSource::resolve(target)?;
    let loaded = load_target(&src)?;
    let t = Instant::now();
    save_index(&loaded.index, out)?;
    #[derive(Serialize)]
    struct LoadReport {
        schema_version: u32,
        nodes: usize,
        edges: usize,
        signature_rows: usize,
        read_secs: f64,
        index_secs: f64,
        write_secs: f64,
    }
    let g = loaded.index.graph();
    let r = LoadReport {
        schema_version: report::REPORT_SCHEMA_VERSION,
        nodes: g.node_count(),
        edges: g.edge_count(),
        signature_rows: loaded.index.bit_matrix().len(),
        read_secs: loaded.read_secs,
        index_secs: loaded.index_secs,
        write_secs: t.elapsed().as_secs_f64(),
    };
    match format {
        Format::Json => print_json(&r)?,
        Format::Text => println!(
            "{} nodes, {} edges, {} signature rows (read {:.3}s, index {:.3}s)",
            r.nodes, r.edges, r.signature_rows, r.read_secs, r.index_secs
        ),
    }
    Ok(0)
}

fn cmd_query(a: &QueryArgs) -> Result<u8, Failure> {
    let text = a.input.text()?;
    let ast = parse_query(&text)?;
    let opts = EngineOptions {
        ordering: a.ordering.parse::<OrderingKind>()?,
        seed: a.seed,
        use_bitmatrix: !a.no_bitmatrix,
        symmetry: !a.no_symmetry,
        paper_strict: a.paper_strict_domains,
        limit: a.limit,
        timeout: timeout(a.timeout)?,
        max_query_nodes: a.max_query_nodes,
    };
    let src = TargetSource::resolve(&a.target)?;
    let loaded = load_target(&src)?;
    log::info!("target ready: read {:.3}s, index {:.3}s", loaded.read_secs, loaded.index_secs);

    let mut cq = compile(&ast);
    if a.count_only {
        cq.ast.return_clause.kind = ReturnKind::Count;
    }
    let run = run_compiled(&cq, &loaded.index, &opts)?;
    let timings = PhaseTimings {
        read: loaded.read_secs,
        index: loaded.index_secs,
        ..run.stats.timings
    };
    let node_names: Vec<String> = cq.base.nodes.iter().map(|n| n.name.clone()).collect();
    let edge_names: Vec<String> = cq.base.edges.iter().map(|e| e.name.clone()).collect();
    let mut report = RunReport::new(&run, timings, (&node_names, &edge_names));
    if a.count_occurrences && report.status == RunStatus::Completed {
        report.occurrences = Some(count_occurrences(&cq, &loaded.index, &opts)?.0);
    }
    match a.format {
        Format::Json => print_json(&report)?,
        Format::Text => {
            print!("{}", report.render_text(a.count_only));
            if let Some(n) = report.occurrences {
                println!("occurrences {n}");
            }
        }
    }
    if report.status == RunStatus::Timeout {
        eprintln!("timeout: results are partial");
        return Ok(EXIT_TIMEOUT);
    }
    Ok(0)
}

fn cmd_oracle(input: &QueryInput, target: &Path, format: Format) -> Result<u8, Failure> {
    let ast = parse_query(&input.text()?)?;
    let g = read_graph(&TargetSource::resolve(target)?)?;
    let q = base_graph(&ast);
    let r = oracle_match(&q, ast.where_clause.as_ref(), &g, OracleLimits::default())?;
    #[derive(Serialize)]
    struct OracleReport {
        schema_version: u32,
        mappings: usize,
        occurrence_classes: usize,
    }
    let rep = OracleReport {
        schema_version: report::REPORT_SCHEMA_VERSION,
        mappings: r.mappings.len(),
        occurrence_classes: r.class_count(),
    };
    match format {
        Format::Json => print_json(&rep)?,
        Format::Text => println!("mappings {}\noccurrence classes {}", rep.mappings, rep.occurrence_classes),
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    nodes: usize,
    edges: usize,
    labels: usize,
    types: usize,
    node_dist: &str,
    edge_dist: &str,
    seed: u64,
    out: &Path,
) -> Result<u8, Failure> {
    let cfg = GenConfig {
        n_nodes: nodes,
        n_edges: edges,
        n_node_labels: labels,
        n_edge_types: types,
        node_dist: node_dist.parse::<LabelDist>()?,
        edge_dist: edge_dist.parse::<LabelDist>()?,
        seed,
    };
    let g = generate_ba(&cfg)?;
    save_csv(&g, out)?;
    eprintln!("wrote {} nodes and {} edges to {}", g.node_count(), g.edge_count(), out.display());
    Ok(0)
}

fn cmd_extract(target: &Path, k: usize, density: f64, seed: u64, count: usize, out_dir: Option<&Path>) -> Result<u8, Failure> {
    let g = read_graph(&TargetSource::resolve(target)?)?;
    let mut stdout = std::io::stdout().lock();
    for i in 0..count {
        let q = extract_query(&g, &QueryExtractConfig::new(k, density, seed + i as u64))?;
        let text = render_query(&q.graph);
        match out_dir {
            None => writeln!(stdout, "{text}").map_err(|e| Failure::internal(e.to_string()))?,
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| Failure::load(format!("{}: {e}", dir.display())))?;
                let file = dir.join(format!("q{i}.cypher"));
                std::fs::write(&file, format!("{text}\n")).map_err(|e| Failure::load(format!("{}: {e}", file.display())))?;
                let mut b = GraphBuilder::new();
                for (n, qn) in q.graph.nodes.iter().enumerate() {
                    b.add_node(n as u64, qn.labels.iter().cloned(), qn.properties.clone());
                }
                for (e, qe) in q.graph.edges.iter().enumerate() {
                    let ty = qe.etype.clone().unwrap_or_default();
                    b.add_edge(e as u64, qe.src as u64, qe.dst as u64, ty, qe.properties.clone());
                }
                let qg = b.build().map_err(|e| Failure::internal(e.to_string()))?;
                save_csv(&qg, &dir.join(format!("q{i}")))?;
            }
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    target: &Path,
    queries: &Path,
    variants: &[String],
    timeout_secs: f64,
    jobs: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let variants: Vec<Variant> = variants.iter().map(|v| v.parse()).collect::<Result<_, _>>()?;
    if variants.is_empty() {
        return Err(Failure::config("no variants given"));
    }
    let files = bench::query_files(queries)?;
    let corpus: Vec<(String, String)> = files
        .iter()
        .map(|p| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            std::fs::read_to_string(p)
                .map(|t| (name, t))
                .map_err(|e| Failure::load(format!("{}: {e}", p.display())))
        })
        .collect::<Result<_, _>>()?;
    let loaded = load_target(&TargetSource::resolve(target)?)?;
    eprintln!("target ready: read {:.3}s, index {:.3}s", loaded.read_secs, loaded.index_secs);
    let base = EngineOptions {
        seed,
        timeout: Some(timeout(timeout_secs)?.unwrap_or_else(bench::default_timeout)),
        ..EngineOptions::default()
    };
    let rows = bench::bench(&loaded.index, &corpus, &variants, &base, jobs)?;
    match out {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| Failure::load(format!("{}: {e}", p.display())))?;
            bench::write_csv(&rows, f)?;
        }
        None => bench::write_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Load { target, out, format } => cmd_load(&target, &out, format),
        Command::Query(a) => cmd_query(&a),
        Command::Oracle { input, target, format } => cmd_oracle(&input, &target, format),
        Command::Generate {
            nodes,
            edges,
            labels,
            types,
            node_dist,
            edge_dist,
            seed,
            out,
        } => cmd_generate(nodes, edges, labels, types, &node_dist, &edge_dist, seed, &out),
        Command::ExtractQuery {
            target,
            k,
            density,
            seed,
            count,
            out_dir,
        } => cmd_extract(&target, k, density, seed, count, out_dir.as_deref()),
        Command::Bench {
            target,
            queries,
            variants,
            timeout,
            jobs,
            seed,
            out,
        } => cmd_bench(&target, &queries, &variants, timeout, jobs, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("mgm: {f}");
            ExitCode::from(f.code)
        }
    }
}
