//! Processing order of the query edges.
//!
//! The full strategy greedily picks the connected pair with the highest
//! `(cf, score)` priority, where `cf` counts the pair's endpoints already
//! covered by earlier picks, and appends all of that pair's edges. Ablation
//! strategies rank pairs by a single criterion with no `cf` promotion.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domains::Domains;
use crate::error::ConfigError;
use crate::index::TargetIndex;
use crate::query::{QueryGraph, QueryPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderingKind {
    Full,
    Random,
    Domain,
    EdgeLabel,
    Degree,
}

impl OrderingKind {
    pub const ALL: [OrderingKind; 5] = [
        OrderingKind::Full,
        OrderingKind::Random,
        OrderingKind::Domain,
        OrderingKind::EdgeLabel,
        OrderingKind::Degree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OrderingKind::Full => "full",
            OrderingKind::Random => "random",
            OrderingKind::Domain => "domain",
            OrderingKind::EdgeLabel => "edgelabel",
            OrderingKind::Degree => "degree",
        }
    }
}

impl fmt::Display for OrderingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OrderingKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OrderingKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                ConfigError(format!(
                    "unknown ordering `{s}` (expected full, random, domain, edgelabel or degree)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPriority {
    pub cf: u8,
    pub sc: f64,
}

impl PairPriority {
    /// Higher `cf` first, then higher `sc`.
    pub fn cmp_desc(&self, other: &PairPriority) -> Ordering {
        other
            .cf
            .cmp(&self.cf)
            .then(other.sc.partial_cmp(&self.sc).unwrap_or(Ordering::Equal))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeOrdering {
    /// Query edge ids in processing order.
    pub edges: Vec<usize>,
    /// Pairs in the order they were picked.
    pub pairs: Vec<(usize, usize)>,
}

pub fn jaccard(q: &QueryGraph, a: usize, b: usize) -> f64 {
    let na = q.neighbors(a);
    let nb = q.neighbors(b);
    let union = na.union(&nb).count();
    if union == 0 {
        return 0.0;
    }
    na.intersection(&nb).count() as f64 / union as f64
}

fn constraint_factor(p: &QueryPair, covered: &BTreeSet<usize>) -> u8 {
    if p.is_loop() {
        return if covered.contains(&p.first) { 2 } else { 0 };
    }
    u8::from(covered.contains(&p.first)) + u8::from(covered.contains(&p.second))
}

/// Score of a pair at constraint factor `cf`. `dom` is the pair's domain size;
/// an empty domain scores infinitely high so the dead end is hit at once.
pub fn pair_score(
    q: &QueryGraph,
    pair: (usize, usize),
    cf: u8,
    covered: &BTreeSet<usize>,
    dom: usize,
) -> f64 {
    if dom == 0 {
        return f64::INFINITY;
    }
    let (a, b) = pair;
    let d = dom as f64;
    match cf {
        0 => (q.total_degree(a) * q.total_degree(b)) as f64 * jaccard(q, a, b) / d,
        1 => {
            let free = if covered.contains(&a) { b } else { a };
            q.total_degree(free) as f64 * jaccard(q, a, b) / d
        }
        _ => 1.0 / d,
    }
}

fn append(q_pairs: &[QueryPair], picked: &[usize]) -> EdgeOrdering {
    let mut out = EdgeOrdering {
        edges: Vec::new(),
        pairs: Vec::new(),
    };
    for &i in picked {
        let p = &q_pairs[i];
        out.pairs.push(p.key());
        out.edges.extend(p.edges.iter().copied());
    }
    out
}

/// Greedy `(cf, score)` ordering; ties go to the smallest pair.
pub fn build_ordering(q: &QueryGraph, domains: &Domains) -> EdgeOrdering {
    let pairs = q.pairs();
    let mut covered = BTreeSet::new();
    let mut done = vec![false; pairs.len()];
    let mut picked = Vec::with_capacity(pairs.len());
    for _ in 0..pairs.len() {
        let mut best: Option<(usize, PairPriority)> = None;
        for (i, p) in pairs.iter().enumerate() {
            if done[i] {
                continue;
            }
            let cf = constraint_factor(p, &covered);
            let pr = PairPriority {
                cf,
                sc: pair_score(q, p.key(), cf, &covered, domains.get(p.first, p.second).len()),
            };
            // pairs are scanned in ascending key order, so strict improvement keeps the smallest on ties
            if best.map_or(true, |(_, b)| pr.cmp_desc(&b) == Ordering::Less) {
                best = Some((i, pr));
            }
        }
        let (i, _) = best.expect("a remaining pair");
        done[i] = true;
        covered.insert(pairs[i].first);
        covered.insert(pairs[i].second);
        picked.push(i);
    }
    append(&pairs, &picked)
}

/// Orderings used to measure the contribution of the full strategy.
pub fn ablation_ordering(
    kind: OrderingKind,
    q: &QueryGraph,
    domains: &Domains,
    idx: &TargetIndex,
    seed: u64,
) -> EdgeOrdering {
    let pairs = q.pairs();
    let mut picked: Vec<usize> = (0..pairs.len()).collect();
    match kind {
        OrderingKind::Full => return build_ordering(q, domains),
        OrderingKind::Random => {
            picked.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        OrderingKind::Domain => {
            picked.sort_by_key(|&i| domains.get(pairs[i].first, pairs[i].second).len());
        }
        OrderingKind::EdgeLabel => {
            let g = idx.graph();
            let freq = |i: usize| {
                pairs[i]
                    .edges
                    .iter()
                    .map(|&e| match &q.edges[e].etype {
                        None => g.edge_count(),
                        Some(t) => g.type_index(t).map_or(0, |t| idx.type_frequency(t)),
                    })
                    .min()
                    .unwrap_or(0)
            };
            picked.sort_by_key(|&i| freq(i));
        }
        OrderingKind::Degree => {
            let score = |i: usize| {
                let (a, b) = pairs[i].key();
                (q.total_degree(a) * q.total_degree(b)) as f64 * jaccard(q, a, b)
            };
            picked.sort_by(|&x, &y| score(y).partial_cmp(&score(x)).unwrap_or(Ordering::Equal));
        }
    }
    append(&pairs, &picked)
}
