//! Compatibility domains: for every connected query pair, the oriented target
//! pairs that survive signature containment, the type-dependent degree check
//! and the per-node filters.

use std::collections::BTreeMap;

use crate::graph::{properties_contain, Direction, Multigraph};
use crate::index::{set_bit, signature_contains, BitSignatureMatrix, SignatureLayout, TargetIndex};
use crate::query::{ConjunctiveQuery, EntityView, QueryGraph};

/// Oriented target pairs for query pair `(first, second)`: entry `(a, b)`
/// means `a` plays `first` and `b` plays `second`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompatibilityDomain {
    pub pair: (usize, usize),
    by_first: Vec<(usize, usize)>,
    by_second: Vec<(usize, usize)>,
}

impl CompatibilityDomain {
    pub fn new(pair: (usize, usize), mut entries: Vec<(usize, usize)>) -> Self {
        entries.sort_unstable();
        entries.dedup();
        let mut by_second: Vec<(usize, usize)> = entries.iter().map(|&(a, b)| (b, a)).collect();
        by_second.sort_unstable();
        Self {
            pair,
            by_first: entries,
            by_second,
        }
    }

    /// All entries sorted by `(first, second)`.
    pub fn entries(&self) -> &[(usize, usize)] {
        &self.by_first
    }

    pub fn len(&self) -> usize {
        self.by_first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_first.is_empty()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.by_first.binary_search(&(a, b)).is_ok()
    }

    /// Entries whose first element is `a`, as `(a, b)`.
    pub fn with_first(&self, a: usize) -> &[(usize, usize)] {
        range(&self.by_first, a)
    }

    /// Entries whose second element is `b`, as `(b, a)` (note the swap).
    pub fn with_second(&self, b: usize) -> &[(usize, usize)] {
        range(&self.by_second, b)
    }
}

fn range(sorted: &[(usize, usize)], key: usize) -> &[(usize, usize)] {
    let lo = sorted.partition_point(|&(x, _)| x < key);
    let hi = sorted.partition_point(|&(x, _)| x <= key);
    &sorted[lo..hi]
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Domains {
    pub pairs: BTreeMap<(usize, usize), CompatibilityDomain>,
}

impl Domains {
    pub fn get(&self, first: usize, second: usize) -> &CompatibilityDomain {
        &self.pairs[&(first.min(second), first.max(second))]
    }

    pub fn any_empty(&self) -> bool {
        self.pairs.values().any(CompatibilityDomain::is_empty)
    }

    pub fn total_entries(&self) -> usize {
        self.pairs.values().map(CompatibilityDomain::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainOptions {
    /// Skip signature containment (ablation).
    pub use_bitmatrix: bool,
    /// Ignore node properties and single-node WHERE conditions when building domains.
    pub paper_strict: bool,
}

impl Default for DomainOptions {
    fn default() -> Self {
        Self {
            use_bitmatrix: true,
            paper_strict: false,
        }
    }
}

/// Query signature rows over the target's alphabets: `(qi, qj)` and
/// `(qj, qi)` for every connected pair, `(q, q)` for loops. Returns `None`
/// when the query mentions a label or type the target lacks.
pub fn build_query_bit_matrix(q: &QueryGraph, target: &Multigraph) -> Option<BitSignatureMatrix> {
    let layout = SignatureLayout::of(target);
    let mut label_idx = Vec::with_capacity(q.node_count());
    for n in &q.nodes {
        let ids: Option<Vec<usize>> = n.labels.iter().map(|l| target.label_index(l)).collect();
        label_idx.push(ids?);
    }
    let mut type_idx = Vec::with_capacity(q.edge_count());
    for e in &q.edges {
        type_idx.push(match &e.etype {
            Some(t) => Some(target.type_index(t)?),
            None => None,
        });
    }
    let mut m = BitSignatureMatrix::new(layout);
    for p in q.pairs() {
        let orientations: &[(usize, usize)] = if p.is_loop() {
            &[(p.first, p.first)]
        } else {
            &[(p.first, p.second), (p.second, p.first)]
        };
        for &(a, b) in orientations {
            let row = m.row_index_or_insert(a, b, |row| {
                for &l in &label_idx[a] {
                    set_bit(row, layout.first_label(l));
                }
                for &l in &label_idx[b] {
                    set_bit(row, layout.second_label(l));
                }
            });
            let row = m.row_mut(row);
            for &e in &p.edges {
                let qe = &q.edges[e];
                let Some(t) = type_idx[e] else { continue };
                if !qe.directed {
                    continue;
                }
                if qe.src == a {
                    set_bit(row, layout.type_out(t));
                }
                if qe.dst == a {
                    set_bit(row, layout.type_in(t));
                }
            }
        }
    }
    Some(m)
}

/// Per-type `(type index, out, in)` demands of the directed typed edges at
/// each query node. `None` if a type is missing from the target.
fn typed_demands(q: &QueryGraph, target: &Multigraph) -> Option<Vec<Vec<(usize, usize, usize)>>> {
    (0..q.node_count())
        .map(|u| {
            q.typed_degrees(u)
                .into_iter()
                .map(|(t, (o, i))| target.type_index(t).map(|t| (t, o, i)))
                .collect()
        })
        .collect()
}

fn node_degree_ok(demand: &[(usize, usize, usize)], t: usize, idx: &TargetIndex) -> bool {
    demand.iter().all(|&(ty, o, i)| {
        o <= idx.type_degree(t, ty, Direction::Out) && i <= idx.type_degree(t, ty, Direction::In)
    })
}

/// Conditions 1–4: for every type, the t-out/in-degrees of `q_pair.0` and
/// `q_pair.1` are bounded by those of `t_pair.0` and `t_pair.1`.
pub fn degree_check(
    q: &QueryGraph,
    q_pair: (usize, usize),
    t_pair: (usize, usize),
    idx: &TargetIndex,
) -> bool {
    let Some(d) = typed_demands(q, idx.graph()) else {
        return false;
    };
    node_degree_ok(&d[q_pair.0], t_pair.0, idx) && node_degree_ok(&d[q_pair.1], t_pair.1, idx)
}

/// Which target nodes each query node may map to, as far as labels, degree
/// demands and (unless `paper_strict`) node properties and single-node
/// conditions go.
fn allowed_nodes(
    cq: &ConjunctiveQuery,
    idx: &TargetIndex,
    demands: &[Vec<(usize, usize, usize)>],
    opts: DomainOptions,
) -> Vec<Vec<bool>> {
    let g = idx.graph();
    cq.graph
        .nodes
        .iter()
        .enumerate()
        .map(|(u, qn)| {
            let mut ok = vec![false; g.node_count()];
            for t in idx.nodes_with_label_superset(&qn.labels) {
                let tn = g.node(t);
                ok[t] = node_degree_ok(&demands[u], t, idx)
                    && (opts.paper_strict
                        || (properties_contain(&tn.properties, &qn.properties)
                            && cq.node_filters[u]
                                .iter()
                                .all(|c| c.holds(|_| EntityView::Node(tn)))));
            }
            ok
        })
        .collect()
}

/// Builds every connected pair's domain. A query that cannot match at all
/// (unknown label or type) gets empty domains.
pub fn compute_domains(cq: &ConjunctiveQuery, idx: &TargetIndex, opts: DomainOptions) -> Domains {
    let q = &cq.graph;
    let target = idx.graph();
    let pairs = q.pairs();
    let empty = || Domains {
        pairs: pairs
            .iter()
            .map(|p| (p.key(), CompatibilityDomain::new(p.key(), Vec::new())))
            .collect(),
    };
    let (Some(qm), Some(demands)) = (build_query_bit_matrix(q, target), typed_demands(q, target))
    else {
        return empty();
    };
    let allowed = allowed_nodes(cq, idx, &demands, opts);
    let tm = idx.bit_matrix();
    let mut out = Domains::default();
    for p in &pairs {
        let (qi, qj) = p.key();
        let row_ij = qm.row(qi, qj).expect("query row");
        let row_ji = qm.row(qj, qi).expect("query row");
        let mut entries = Vec::new();
        for ((a, b), trow) in tm.rows() {
            if p.is_loop() != (a == b) {
                continue;
            }
            let fits = |row: &[u64]| !opts.use_bitmatrix || signature_contains(trow, row);
            if allowed[qi][a] && allowed[qj][b] && fits(row_ij) {
                entries.push((a, b));
            }
            if a != b && allowed[qi][b] && allowed[qj][a] && fits(row_ji) {
                entries.push((b, a));
            }
        }
        out.pairs.insert((qi, qj), CompatibilityDomain::new((qi, qj), entries));
    }
    out
}
