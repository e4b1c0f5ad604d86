//! Synthetic Barabási–Albert targets and random-walk query extraction.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;
use crate::graph::{GraphBuilder, Multigraph, Properties};
use crate::query::QueryGraph;

pub const DEFAULT_POWERLAW_EXPONENT: f64 = -1.2;
pub const DEFAULT_RESTARTS: usize = 100;

/// Distribution of labels (or types) over ranks `1..=L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LabelDist {
    Uniform,
    /// Weight of rank `r` is `r^exponent`.
    PowerLaw(f64),
}

impl LabelDist {
    pub fn weights(&self, n: usize) -> Vec<f64> {
        match *self {
            LabelDist::Uniform => vec![1.0; n],
            LabelDist::PowerLaw(x) => (1..=n).map(|r| (r as f64).powf(x)).collect(),
        }
    }
}

impl fmt::Display for LabelDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelDist::Uniform => write!(f, "uniform"),
            LabelDist::PowerLaw(x) => write!(f, "powerlaw:{x}"),
        }
    }
}

/// `uniform`, `powerlaw` or `powerlaw:<exponent>`.
impl FromStr for LabelDist {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        match lower.split_once(':') {
            None if lower == "uniform" => Ok(LabelDist::Uniform),
            None if lower == "powerlaw" => Ok(LabelDist::PowerLaw(DEFAULT_POWERLAW_EXPONENT)),
            Some(("powerlaw", x)) => x
                .parse()
                .map(LabelDist::PowerLaw)
                .map_err(|_| ConfigError(format!("bad power-law exponent `{x}`"))),
            _ => Err(ConfigError(format!("unknown distribution `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub n_node_labels: usize,
    pub n_edge_types: usize,
    pub node_dist: LabelDist,
    pub edge_dist: LabelDist,
    pub seed: u64,
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_nodes == 0 {
            return Err(ConfigError("n_nodes must be positive".into()));
        }
        if self.n_edges + 1 < self.n_nodes {
            return Err(ConfigError(format!(
                "n_edges ({}) must be at least n_nodes - 1 ({})",
                self.n_edges,
                self.n_nodes - 1
            )));
        }
        if self.n_nodes == 1 && self.n_edges > 0 {
            return Err(ConfigError("a single node cannot carry edges".into()));
        }
        if self.n_node_labels == 0 || self.n_edge_types == 0 {
            return Err(ConfigError("need at least one label and one type".into()));
        }
        for d in [self.node_dist, self.edge_dist] {
            if let LabelDist::PowerLaw(x) = d {
                if !(x < 0.0) {
                    return Err(ConfigError(format!("power-law exponent must be negative, got {x}")));
                }
            }
        }
        Ok(())
    }
}

pub fn label_name(i: usize) -> String {
    format!("L{i}")
}

pub fn type_name(i: usize) -> String {
    format!("T{i}")
}

/// Preferential-attachment multigraph with exactly `n_nodes` nodes and
/// `n_edges` edges. Node `i > 0` attaches `n_edges / (n_nodes - 1)` edges,
/// plus one for the first `n_edges % (n_nodes - 1)` nodes.
pub fn generate_ba(cfg: &GenConfig) -> Result<Multigraph, ConfigError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let label_pick = WeightedIndex::new(cfg.node_dist.weights(cfg.n_node_labels))
        .map_err(|e| ConfigError(e.to_string()))?;
    let type_pick = WeightedIndex::new(cfg.edge_dist.weights(cfg.n_edge_types))
        .map_err(|e| ConfigError(e.to_string()))?;

    let mut b = GraphBuilder::new();
    for i in 0..cfg.n_nodes {
        b.add_node(i as u64, [label_name(label_pick.sample(&mut rng))], Properties::new());
    }
    let new_nodes = cfg.n_nodes - 1;
    let (base, extra) = if new_nodes == 0 {
        (0, 0)
    } else {
        (cfg.n_edges / new_nodes, cfg.n_edges % new_nodes)
    };
    // every edge endpoint, so a uniform pick is degree-proportional
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * cfg.n_edges);
    let mut next_id = 0u64;
    for v in 1..cfg.n_nodes {
        let m = base + usize::from(v - 1 < extra);
        let mut chosen = Vec::with_capacity(m);
        for _ in 0..m {
            let u = if endpoints.is_empty() {
                rng.gen_range(0..v)
            } else {
                endpoints[rng.gen_range(0..endpoints.len())]
            };
            chosen.push(u);
        }
        for u in chosen {
            let (src, dst) = if rng.gen_bool(0.5) { (v, u) } else { (u, v) };
            b.add_edge(
                next_id,
                src as u64,
                dst as u64,
                type_name(type_pick.sample(&mut rng)),
                Properties::new(),
            );
            next_id += 1;
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    Ok(b.build().expect("generated graph is well formed"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryExtractConfig {
    pub k_nodes: usize,
    /// Target fraction of node pairs joined by at least one edge.
    pub density: f64,
    pub seed: u64,
    pub max_restarts: usize,
}

impl QueryExtractConfig {
    pub fn new(k_nodes: usize, density: f64, seed: u64) -> Self {
        Self {
            k_nodes,
            density,
            seed,
            max_restarts: DEFAULT_RESTARTS,
        }
    }
}

/// An extracted query together with the target subgraph it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedQuery {
    pub graph: QueryGraph,
    /// `witness_nodes[q]` is the target node query node `q` was taken from.
    pub witness_nodes: Vec<usize>,
    pub witness_edges: Vec<usize>,
}

/// Fraction of the `k(k-1)/2` node pairs of `q` joined by at least one edge
/// (self-loops do not count).
pub fn query_density(q: &QueryGraph) -> f64 {
    let k = q.node_count();
    if k < 2 {
        return 0.0;
    }
    let pairs: BTreeSet<(usize, usize)> = q
        .edges
        .iter()
        .filter(|e| e.src != e.dst)
        .map(|e| (e.src.min(e.dst), e.src.max(e.dst)))
        .collect();
    pairs.len() as f64 / (k * (k - 1) / 2) as f64
}

fn attempt(t: &Multigraph, cfg: &QueryExtractConfig, rng: &mut ChaCha8Rng) -> Option<ExtractedQuery> {
    let k = cfg.k_nodes;
    let start = rng.gen_range(0..t.node_count());
    let mut nodes = vec![start];
    let mut edges: Vec<usize> = Vec::new();
    let mut cur = start;
    let max_steps = 50 * k + 100;
    let mut steps = 0;
    while nodes.len() < k {
        if steps == max_steps {
            return None;
        }
        steps += 1;
        let incident: Vec<usize> = t.out_edges(cur).iter().chain(t.in_edges(cur)).copied().collect();
        let &e = incident.choose(rng)?;
        let edge = t.edge(e);
        let next = if edge.src == cur { edge.dst } else { edge.src };
        if !edges.contains(&e) {
            edges.push(e);
        }
        if !nodes.contains(&next) {
            nodes.push(next);
        }
        cur = next;
    }

    let pair = |e: usize| {
        let x = t.edge(e);
        (x.src.min(x.dst), x.src.max(x.dst))
    };
    let mut connected: BTreeSet<(usize, usize)> = edges
        .iter()
        .map(|&e| pair(e))
        .filter(|(a, b)| a != b)
        .collect();
    let total_pairs = k * (k - 1) / 2;
    let needed = (cfg.density * total_pairs as f64 - 1e-9).ceil() as usize;
    let selected: BTreeSet<usize> = nodes.iter().copied().collect();
    while connected.len() < needed {
        let fresh: Vec<usize> = selected
            .iter()
            .flat_map(|&u| t.out_edges(u).iter().copied())
            .filter(|&e| {
                let x = t.edge(e);
                x.src != x.dst && selected.contains(&x.dst) && !connected.contains(&pair(e))
            })
            .collect();
        let &e = fresh.choose(rng)?;
        connected.insert(pair(e));
        edges.push(e);
    }

    let mut graph = QueryGraph::new();
    for (i, &n) in nodes.iter().enumerate() {
        let labels = t.node(n).labels.iter().filter(|l| *l != crate::graph::UNLABELED).cloned();
        graph.add_node(format!("q{i}"), labels.collect::<Vec<_>>());
    }
    let at = |n: usize| nodes.iter().position(|&x| x == n).expect("selected node");
    for (i, &e) in edges.iter().enumerate() {
        let x = t.edge(e);
        let id = graph.add_edge(at(x.src), at(x.dst), Some(&x.etype));
        graph.edges[id].name = format!("e{i}");
    }
    Some(ExtractedQuery {
        graph,
        witness_nodes: nodes,
        witness_edges: edges,
    })
}

/// Random walk until `k_nodes` distinct nodes are visited, then random
/// edges between visited nodes until the density is reached. Restarts from
/// a fresh node when the walk stalls or no edge is left to add.
pub fn extract_query(t: &Multigraph, cfg: &QueryExtractConfig) -> Result<ExtractedQuery, ConfigError> {
    if cfg.k_nodes < 2 {
        return Err(ConfigError("queries need at least two nodes".into()));
    }
    if !(cfg.density > 0.0 && cfg.density <= 1.0) {
        return Err(ConfigError(format!("density must be in (0, 1], got {}", cfg.density)));
    }
    if t.node_count() < cfg.k_nodes {
        return Err(ConfigError(format!(
            "target has {} nodes, fewer than the {} requested",
            t.node_count(),
            cfg.k_nodes
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..=cfg.max_restarts {
        if let Some(q) = attempt(t, cfg, &mut rng) {
            return Ok(q);
        }
    }
    Err(ConfigError(format!(
        "no query with {} nodes at density {} after {} restarts",
        cfg.k_nodes, cfg.density, cfg.max_restarts
    )))
}

/// Bounds of a small random target/query instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceBounds {
    pub max_nodes: usize,
    pub max_edges: usize,
    pub max_labels: usize,
    pub max_types: usize,
    pub query_nodes: (usize, usize),
}

impl Default for InstanceBounds {
    fn default() -> Self {
        Self {
            max_nodes: 25,
            max_edges: 100,
            max_labels: 3,
            max_types: 3,
            query_nodes: (3, 5),
        }
    }
}

/// A seeded BA target within `bounds` and a query extracted from it. The
/// density is drawn from {0.25, 0.5, 0.75, 1} and lowered until extraction
/// succeeds.
pub fn random_instance(seed: u64, bounds: &InstanceBounds) -> (Multigraph, ExtractedQuery) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (kmin, kmax) = bounds.query_nodes;
    loop {
        let n = rng.gen_range(kmax.max(6)..=bounds.max_nodes);
        let e = rng.gen_range(n - 1..=bounds.max_edges.min(4 * n));
        let cfg = GenConfig {
            n_nodes: n,
            n_edges: e,
            n_node_labels: rng.gen_range(1..=bounds.max_labels),
            n_edge_types: rng.gen_range(1..=bounds.max_types),
            node_dist: LabelDist::Uniform,
            edge_dist: LabelDist::Uniform,
            seed: rng.gen(),
        };
        let t = generate_ba(&cfg).expect("valid generator config");
        let k = rng.gen_range(kmin..=kmax);
        let mut density = [0.25, 0.5, 0.75, 1.0][rng.gen_range(0..4)];
        while density > 0.0 {
            if let Ok(q) = extract_query(&t, &QueryExtractConfig::new(k, density, rng.gen())) {
                return (t, q);
            }
            density -= 0.25;
        }
    }
}
