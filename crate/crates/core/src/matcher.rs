//! Backtracking search over the ordered query edges.
//!
//! Each depth owns a materialized candidate list and a cursor. A candidate
//! fixes the target edge for the current query edge together with the
//! target nodes its endpoints map to. Backtracking unbinds exactly the nodes
//! the abandoned depth bound.

use std::collections::BTreeSet;
use std::time::Instant;

use crate::domains::Domains;
use crate::graph::Multigraph;
use crate::index::TargetIndex;
use crate::ordering::EdgeOrdering;
use crate::query::{Condition, ConjunctiveQuery, EntityRef, EntityView};
use crate::symmetry::BreakingConditions;

/// How often (in loop iterations) the deadline is polled.
const DEADLINE_POLL: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchStatus {
    /// The search space was exhausted.
    Completed,
    /// The sink asked to stop (LIMIT reached).
    Limit,
    /// The deadline passed; results so far are partial.
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchOutcome {
    pub status: MatchStatus,
    pub emitted: u64,
    pub iterations: u64,
}

/// A complete mapping: `node_map[q]` and `edge_map[e]` are target ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occurrence {
    pub node_map: Vec<usize>,
    pub edge_map: Vec<usize>,
}

impl Occurrence {
    pub fn edge_image(&self) -> BTreeSet<usize> {
        self.edge_map.iter().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Candidate {
    edge: usize,
    src: usize,
    dst: usize,
}

/// `q_node -> t_node` respects every node condition against already-mapped
/// partners, in both directions.
pub fn check_node_break_cond(
    conds: &BreakingConditions,
    q_node: usize,
    t_node: usize,
    f: &[Option<usize>],
) -> bool {
    conds.node_conds.iter().all(|&(a, b)| {
        if b == q_node {
            f[a].map_or(true, |ta| ta < t_node)
        } else if a == q_node {
            f[b].map_or(true, |tb| t_node < tb)
        } else {
            true
        }
    })
}

/// `q_edge -> t_edge` respects every edge condition against already-mapped
/// partners, in both directions.
pub fn check_edge_break_cond(
    conds: &BreakingConditions,
    q_edge: usize,
    t_edge: usize,
    g: &[Option<usize>],
) -> bool {
    conds.edge_conds.iter().all(|&(a, b)| {
        if b == q_edge {
            g[a].map_or(true, |ta| ta < t_edge)
        } else if a == q_edge {
            g[b].map_or(true, |tb| t_edge < tb)
        } else {
            true
        }
    })
}

/// Read-only context shared by every depth.
struct Plan<'a> {
    cq: &'a ConjunctiveQuery,
    idx: &'a TargetIndex,
    domains: &'a Domains,
    conds: &'a BreakingConditions,
    order: &'a [usize],
    /// Target type index per query edge: `None` untyped, `Some(None)` unknown type.
    etype: Vec<Option<Option<usize>>>,
    /// Conditions relating two entities, grouped by the depth binding their last entity.
    cross_at: Vec<Vec<&'a Condition>>,
}

struct State {
    f: Vec<Option<usize>>,
    g: Vec<Option<usize>>,
}

impl State {
    fn node_taken(&self, t: usize, except: usize) -> bool {
        self.f
            .iter()
            .enumerate()
            .any(|(q, m)| q != except && *m == Some(t))
    }
}

impl<'a> Plan<'a> {
    fn new(
        cq: &'a ConjunctiveQuery,
        idx: &'a TargetIndex,
        domains: &'a Domains,
        ordering: &'a EdgeOrdering,
        conds: &'a BreakingConditions,
    ) -> Self {
        let q = &cq.graph;
        let g = idx.graph();
        let etype = q
            .edges
            .iter()
            .map(|e| e.etype.as_ref().map(|t| g.type_index(t)))
            .collect();
        let order = ordering.edges.as_slice();
        let mut node_depth = vec![usize::MAX; q.node_count()];
        let mut edge_depth = vec![usize::MAX; q.edge_count()];
        for (d, &e) in order.iter().enumerate() {
            edge_depth[e] = d;
            for n in [q.edges[e].src, q.edges[e].dst] {
                node_depth[n] = node_depth[n].min(d);
            }
        }
        let mut cross_at = vec![Vec::new(); order.len()];
        for c in &cq.cross {
            let d = c
                .entities()
                .into_iter()
                .map(|ent| match ent {
                    EntityRef::Node(n) => node_depth[n],
                    EntityRef::Edge(e) => edge_depth[e],
                })
                .max()
                .unwrap_or(0);
            cross_at[d].push(c);
        }
        Self {
            cq,
            idx,
            domains,
            conds,
            order,
            etype,
            cross_at,
        }
    }

    fn graph(&self) -> &'a Multigraph {
        self.idx.graph()
    }

    /// Node-local checks for binding `q -> t`: injectivity, labels,
    /// properties, single-node conditions and node breaking conditions.
    fn node_ok(&self, st: &State, q: usize, t: usize) -> bool {
        !st.node_taken(t, q)
            && self.cq.node_accepts(q, self.graph().node(t))
            && check_node_break_cond(self.conds, q, t, &st.f)
    }

    fn cross_ok(&self, depth: usize, st: &State) -> bool {
        let g = self.graph();
        self.cross_at[depth].iter().all(|c| {
            c.holds(|ent| match ent {
                EntityRef::Node(n) => EntityView::Node(g.node(st.f[n].expect("bound node"))),
                EntityRef::Edge(e) => EntityView::Edge(g.edge(st.g[e].expect("bound edge"))),
            })
        })
    }

    /// Appends every acceptable target edge between `tu` and `tv` for query
    /// edge `eq` (with both endpoints tentatively bound in `st`).
    fn push_edges(
        &self,
        depth: usize,
        eq: usize,
        tu: usize,
        tv: usize,
        st: &mut State,
        out: &mut Vec<Candidate>,
    ) {
        let qe = &self.cq.graph.edges[eq];
        let et = self.idx.edge_types();
        let g = self.graph();
        let consider = |te: usize, st: &mut State, out: &mut Vec<Candidate>| {
            if !self.cq.edge_accepts(eq, g.edge(te))
                || !check_edge_break_cond(self.conds, eq, te, &st.g)
            {
                return;
            }
            if !self.cross_at[depth].is_empty() {
                st.g[eq] = Some(te);
                let ok = self.cross_ok(depth, st);
                st.g[eq] = None;
                if !ok {
                    return;
                }
            }
            out.push(Candidate {
                edge: te,
                src: tu,
                dst: tv,
            });
        };
        let orientations: &[(usize, usize)] = if qe.directed || tu == tv {
            &[(tu, tv)]
        } else {
            &[(tu, tv), (tv, tu)]
        };
        for &(a, b) in orientations {
            match self.etype[eq] {
                Some(None) => {}
                Some(Some(t)) => {
                    for &te in et.edges(a, b, t) {
                        consider(te, st, out);
                    }
                }
                None => {
                    for te in et.all_edges(a, b) {
                        consider(te, st, out);
                    }
                }
            }
        }
    }

    /// Candidate list for the query edge at `depth`, given the current bindings.
    fn find_candidates(&self, depth: usize, st: &mut State, out: &mut Vec<Candidate>) {
        out.clear();
        let eq = self.order[depth];
        let qe = &self.cq.graph.edges[eq];
        let (u, v) = (qe.src, qe.dst);
        let dom = self.domains.get(u, v);
        // entries are oriented (pair.first, pair.second)
        let u_first = u <= v;
        match (st.f[u], st.f[v]) {
            (Some(tu), Some(tv)) => self.push_edges(depth, eq, tu, tv, st, out),
            (None, None) => {
                for &(a, b) in dom.entries() {
                    let (tu, tv) = if u_first { (a, b) } else { (b, a) };
                    if !self.node_ok(st, u, tu) {
                        continue;
                    }
                    st.f[u] = Some(tu);
                    if u == v || self.node_ok(st, v, tv) {
                        st.f[v] = Some(tv);
                        self.push_edges(depth, eq, tu, tv, st, out);
                        st.f[v] = None;
                    }
                    st.f[u] = None;
                }
            }
            (Some(tu), None) => {
                let entries = if u_first {
                    dom.with_first(tu)
                } else {
                    dom.with_second(tu)
                };
                for &(_, tv) in entries {
                    if !self.node_ok(st, v, tv) {
                        continue;
                    }
                    st.f[v] = Some(tv);
                    self.push_edges(depth, eq, tu, tv, st, out);
                    st.f[v] = None;
                }
            }
            (None, Some(tv)) => {
                let entries = if u_first {
                    dom.with_second(tv)
                } else {
                    dom.with_first(tv)
                };
                for &(_, tu) in entries {
                    if !self.node_ok(st, u, tu) {
                        continue;
                    }
                    st.f[u] = Some(tu);
                    self.push_edges(depth, eq, tu, tv, st, out);
                    st.f[u] = None;
                }
            }
        }
    }
}

/// Enumerates every mapping of `cq` consistent with the domains, the
/// breaking conditions and all WHERE conditions, calling `sink` with
/// `(node_map, edge_map)` for each. `sink` returns `false` to stop.
pub fn match_all(
    cq: &ConjunctiveQuery,
    idx: &TargetIndex,
    domains: &Domains,
    ordering: &EdgeOrdering,
    conds: &BreakingConditions,
    deadline: Option<Instant>,
    mut sink: impl FnMut(&[usize], &[usize]) -> bool,
) -> MatchOutcome {
    let q = &cq.graph;
    let m = ordering.edges.len();
    let mut outcome = MatchOutcome {
        status: MatchStatus::Completed,
        emitted: 0,
        iterations: 0,
    };
    if m == 0 || domains.any_empty() {
        return outcome;
    }
    debug_assert_eq!(m, q.edge_count());
    let plan = Plan::new(cq, idx, domains, ordering, conds);
    let mut st = State {
        f: vec![None; q.node_count()],
        g: vec![None; q.edge_count()],
    };
    let mut cand: Vec<Vec<Candidate>> = vec![Vec::new(); m];
    let mut cursor = vec![0usize; m];
    let mut bound_by: Vec<[Option<usize>; 2]> = vec![[None, None]; m];
    let mut node_buf = vec![0usize; q.node_count()];
    let mut edge_buf = vec![0usize; q.edge_count()];

    let restore = |depth: usize, st: &mut State, bound_by: &mut [[Option<usize>; 2]]| {
        for n in bound_by[depth].iter_mut() {
            if let Some(n) = n.take() {
                st.f[n] = None;
            }
        }
        st.g[plan.order[depth]] = None;
    };

    let mut depth = 0;
    plan.find_candidates(0, &mut st, &mut cand[0]);
    loop {
        outcome.iterations += 1;
        if outcome.iterations % DEADLINE_POLL == 0 && deadline.is_some_and(|d| Instant::now() >= d)
        {
            outcome.status = MatchStatus::Timeout;
            return outcome;
        }
        if cursor[depth] >= cand[depth].len() {
            if depth == 0 {
                return outcome;
            }
            depth -= 1;
            restore(depth, &mut st, &mut bound_by);
            cursor[depth] += 1;
            continue;
        }
        let c = cand[depth][cursor[depth]];
        let eq = plan.order[depth];
        if st.g.contains(&Some(c.edge)) {
            cursor[depth] += 1;
            continue;
        }
        st.g[eq] = Some(c.edge);
        let qe = &q.edges[eq];
        for (slot, (qn, tn)) in [(qe.src, c.src), (qe.dst, c.dst)].into_iter().enumerate() {
            if st.f[qn].is_none() {
                st.f[qn] = Some(tn);
                bound_by[depth][slot] = Some(qn);
            }
        }
        if depth + 1 == m {
            for (i, x) in st.f.iter().enumerate() {
                node_buf[i] = x.expect("complete node mapping");
            }
            for (i, x) in st.g.iter().enumerate() {
                edge_buf[i] = x.expect("complete edge mapping");
            }
            outcome.emitted += 1;
            let more = sink(&node_buf, &edge_buf);
            restore(depth, &mut st, &mut bound_by);
            cursor[depth] += 1;
            if !more {
                outcome.status = MatchStatus::Limit;
                return outcome;
            }
            continue;
        }
        depth += 1;
        cursor[depth] = 0;
        plan.find_candidates(depth, &mut st, &mut cand[depth]);
    }
}

/// Collects every mapping into a vector.
pub fn collect_all(
    cq: &ConjunctiveQuery,
    idx: &TargetIndex,
    domains: &Domains,
    ordering: &EdgeOrdering,
    conds: &BreakingConditions,
) -> Vec<Occurrence> {
    let mut out = Vec::new();
    match_all(cq, idx, domains, ordering, conds, None, |f, g| {
        out.push(Occurrence {
            node_map: f.to_vec(),
            edge_map: g.to_vec(),
        });
        true
    });
    out
}
