//! Brute-force reference matcher for tests.
//!
//! Enumerates every injective node mapping over label- and
//! property-compatible target nodes, then every system of per-pair injective
//! edge assignments, and keeps the mappings whose WHERE proposition is true
//! under three-valued logic. Uses nothing but the raw target graph.

use std::collections::{BTreeMap, BTreeSet};

use crate::cypher::{AtomicCondition, Operand, Proposition, QueryAst, Term};
use crate::error::ConfigError;
use crate::graph::{Multigraph, Properties, PropertyValue};
use crate::query::{Accessor, CompareOp, QueryGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_nodes: usize,
    pub max_edges: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_nodes: 30,
            max_edges: 150,
        }
    }
}

/// `(node_map, edge_map)` of one valid mapping.
pub type Mapping = (Vec<usize>, Vec<usize>);

#[derive(Debug, Clone, Default)]
pub struct OracleResult {
    pub mappings: Vec<Mapping>,
    /// Mapping indices grouped by their edge image.
    pub classes: BTreeMap<BTreeSet<usize>, Vec<usize>>,
}

impl OracleResult {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn sorted_mappings(&self) -> Vec<Mapping> {
        let mut m = self.mappings.clone();
        m.sort();
        m
    }
}

fn contains_all(have: &Properties, wanted: &Properties) -> bool {
    wanted.iter().all(|(k, v)| have.get(k) == Some(v))
}

fn node_fits(q: &QueryGraph, qn: usize, t: &Multigraph, tn: usize) -> bool {
    let want = &q.nodes[qn];
    let have = t.node(tn);
    want.labels.iter().all(|l| have.labels.contains(l))
        && contains_all(&have.properties, &want.properties)
}

fn edge_fits(q: &QueryGraph, qe: usize, t: &Multigraph, te: usize, f: &[usize]) -> bool {
    let want = &q.edges[qe];
    let have = t.edge(te);
    let (a, b) = (f[want.src], f[want.dst]);
    let oriented = (have.src == a && have.dst == b) || (!want.directed && have.src == b && have.dst == a);
    oriented
        && want.etype.as_ref().map_or(true, |ty| *ty == have.etype)
        && contains_all(&have.properties, &want.properties)
}

struct Search<'a> {
    q: &'a QueryGraph,
    t: &'a Multigraph,
    /// Target edges keyed by unordered endpoint pair.
    between: BTreeMap<(usize, usize), Vec<usize>>,
    /// Query edges keyed by unordered endpoint pair.
    q_pairs: BTreeMap<(usize, usize), Vec<usize>>,
    order: Vec<usize>,
    f: Vec<Option<usize>>,
    /// Per query pair, all injective assignments (aligned with `q_pairs[pair]`).
    assignments: BTreeMap<(usize, usize), Vec<Vec<usize>>>,
    found: Vec<Mapping>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn injective_choices(options: &[Vec<usize>], i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if i == options.len() {
        out.push(cur.clone());
        return;
    }
    for &e in &options[i] {
        if !cur.contains(&e) {
            cur.push(e);
            injective_choices(options, i + 1, cur, out);
            cur.pop();
        }
    }
}

impl<'a> Search<'a> {
    fn pair_assignments(&self, pair: (usize, usize), f: &[usize]) -> Vec<Vec<usize>> {
        let qs = &self.q_pairs[&pair];
        let empty = Vec::new();
        let ts = self.between.get(&key(f[pair.0], f[pair.1])).unwrap_or(&empty);
        let options: Vec<Vec<usize>> = qs
            .iter()
            .map(|&qe| {
                ts.iter()
                    .copied()
                    .filter(|&te| edge_fits(self.q, qe, self.t, te, f))
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        injective_choices(&options, 0, &mut Vec::new(), &mut out);
        out
    }

    fn descend(&mut self, depth: usize) {
        if depth == self.order.len() {
            self.emit();
            return;
        }
        let qn = self.order[depth];
        for tn in 0..self.t.node_count() {
            if self.f.contains(&Some(tn)) || !node_fits(self.q, qn, self.t, tn) {
                continue;
            }
            self.f[qn] = Some(tn);
            let partial: Vec<usize> = self.f.iter().map(|x| x.unwrap_or(usize::MAX)).collect();
            let closing: Vec<(usize, usize)> = self
                .q_pairs
                .keys()
                .copied()
                .filter(|&(a, b)| {
                    (a == qn || b == qn) && self.f[a].is_some() && self.f[b].is_some()
                })
                .collect();
            let mut ok = true;
            for p in &closing {
                let a = self.pair_assignments(*p, &partial);
                if a.is_empty() {
                    ok = false;
                    break;
                }
                self.assignments.insert(*p, a);
            }
            if ok {
                self.descend(depth + 1);
            }
            for p in &closing {
                self.assignments.remove(p);
            }
            self.f[qn] = None;
        }
    }

    fn emit(&mut self) {
        let f: Vec<usize> = self.f.iter().map(|x| x.expect("complete")).collect();
        let pairs: Vec<(usize, usize)> = self.q_pairs.keys().copied().collect();
        let mut g = vec![usize::MAX; self.q.edge_count()];
        self.product(&pairs, 0, &f, &mut g);
    }

    fn product(&mut self, pairs: &[(usize, usize)], i: usize, f: &[usize], g: &mut Vec<usize>) {
        if i == pairs.len() {
            self.found.push((f.to_vec(), g.clone()));
            return;
        }
        let p = pairs[i];
        let choices = self.assignments[&p].clone();
        for choice in choices {
            for (&qe, &te) in self.q_pairs[&p].iter().zip(&choice) {
                g[qe] = te;
            }
            self.product(pairs, i + 1, f, g);
        }
    }
}

/// Every mapping of the MATCH pattern `q` into `t` (no WHERE filtering).
pub fn oracle_pattern(q: &QueryGraph, t: &Multigraph, limits: OracleLimits) -> Result<Vec<Mapping>, ConfigError> {
    if t.node_count() > limits.max_nodes || t.edge_count() > limits.max_edges {
        return Err(ConfigError(format!(
            "oracle target too large: {} nodes / {} edges (limit {} / {})",
            t.node_count(),
            t.edge_count(),
            limits.max_nodes,
            limits.max_edges
        )));
    }
    let mut between: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for e in t.edges() {
        between.entry(key(e.src, e.dst)).or_default().push(e.id);
    }
    let mut q_pairs: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, e) in q.edges.iter().enumerate() {
        q_pairs.entry(key(e.src, e.dst)).or_default().push(i);
    }
    // bind nodes with the most edges towards already-placed ones first
    let n = q.node_count();
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    for _ in 0..n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let links = q
                    .edges
                    .iter()
                    .filter(|e| (e.src == v && placed[e.dst]) || (e.dst == v && placed[e.src]))
                    .count();
                (links, std::cmp::Reverse(v))
            })
            .expect("unplaced node");
        placed[next] = true;
        order.push(next);
    }
    let mut s = Search {
        q,
        t,
        between,
        q_pairs,
        order,
        f: vec![None; n],
        assignments: BTreeMap::new(),
        found: Vec::new(),
    };
    s.descend(0);
    Ok(s.found)
}

#[derive(Clone, Copy)]
enum Ent {
    Node(usize),
    Edge(usize),
}

enum Val<'a> {
    Missing,
    Scalar(PropertyValue),
    Labels(&'a BTreeSet<String>),
}

fn lookup(q: &QueryGraph, name: &str) -> Ent {
    match q.nodes.iter().position(|n| n.name == name) {
        Some(i) => Ent::Node(i),
        None => Ent::Edge(
            q.edges
                .iter()
                .position(|e| e.name == name)
                .unwrap_or_else(|| panic!("unknown entity `{name}`")),
        ),
    }
}

fn term_value<'a>(q: &QueryGraph, t: &'a Multigraph, m: &Mapping, term: &Term) -> Val<'a> {
    match (lookup(q, &term.entity), &term.accessor) {
        (Ent::Node(i), Accessor::Property(k)) => t
            .node(m.0[i])
            .properties
            .get(k)
            .map_or(Val::Missing, |v| Val::Scalar(v.clone())),
        (Ent::Edge(i), Accessor::Property(k)) => t
            .edge(m.1[i])
            .properties
            .get(k)
            .map_or(Val::Missing, |v| Val::Scalar(v.clone())),
        (Ent::Node(i), Accessor::Labels) => Val::Labels(&t.node(m.0[i]).labels),
        (Ent::Edge(i), Accessor::Type) => Val::Scalar(PropertyValue::Text(t.edge(m.1[i]).etype.clone())),
        _ => Val::Missing,
    }
}

fn ordered(a: &PropertyValue, b: &PropertyValue) -> Option<std::cmp::Ordering> {
    use PropertyValue::*;
    match (a, b) {
        (Bool(x), Bool(y)) => Some(x.cmp(y)),
        (Int(x), Int(y)) => Some(x.cmp(y)),
        (Float(x), Float(y)) => x.partial_cmp(y),
        (Text(x), Text(y)) => Some(x.cmp(y)),
        _ => None,
    }
}

fn same(a: &PropertyValue, b: &PropertyValue) -> bool {
    use PropertyValue::*;
    match (a, b) {
        (Bool(x), Bool(y)) => x == y,
        (Int(x), Int(y)) => x == y,
        (Float(x), Float(y)) => x.to_bits() == y.to_bits(),
        (Text(x), Text(y)) => x == y,
        _ => false,
    }
}

fn atom_truth(q: &QueryGraph, t: &Multigraph, m: &Mapping, a: &AtomicCondition) -> Option<bool> {
    let lhs = term_value(q, t, m, &a.lhs);
    let rhs = match &a.rhs {
        Operand::Const(v) => Val::Scalar(v.clone()),
        Operand::Term(term) => term_value(q, t, m, term),
    };
    let text = |v: &PropertyValue| match v {
        PropertyValue::Text(s) => Some(s.clone()),
        _ => None,
    };
    match (&lhs, &rhs) {
        (Val::Missing, _) | (_, Val::Missing) => None,
        (Val::Labels(set), Val::Scalar(v)) | (Val::Scalar(v), Val::Labels(set)) => {
            let has = set.contains(&text(v)?);
            match a.op {
                CompareOp::Eq => Some(has),
                CompareOp::Ne => Some(!has),
                _ => None,
            }
        }
        (Val::Labels(x), Val::Labels(y)) => match a.op {
            CompareOp::Eq => Some(x == y),
            CompareOp::Ne => Some(x != y),
            _ => None,
        },
        (Val::Scalar(x), Val::Scalar(y)) => match a.op {
            CompareOp::Eq => Some(same(x, y)),
            CompareOp::Ne => Some(!same(x, y)),
            CompareOp::Lt => ordered(x, y).map(|o| o.is_lt()),
            CompareOp::Le => ordered(x, y).map(|o| o.is_le()),
            CompareOp::Gt => ordered(x, y).map(|o| o.is_gt()),
            CompareOp::Ge => ordered(x, y).map(|o| o.is_ge()),
            CompareOp::StartsWith => Some(text(x)?.starts_with(&text(y)?)),
            CompareOp::EndsWith => Some(text(x)?.ends_with(&text(y)?)),
            CompareOp::Contains => Some(text(x)?.contains(&text(y)?)),
        },
    }
}

/// Three-valued (Kleene) truth of `p` under mapping `m`.
pub fn truth(q: &QueryGraph, t: &Multigraph, m: &Mapping, p: &Proposition) -> Option<bool> {
    match p {
        Proposition::Atom(a) => atom_truth(q, t, m, a),
        Proposition::Not(inner) => truth(q, t, m, inner).map(|b| !b),
        Proposition::And(ps) => {
            let mut unknown = false;
            for p in ps {
                match truth(q, t, m, p) {
                    Some(false) => return Some(false),
                    None => unknown = true,
                    Some(true) => {}
                }
            }
            if unknown { None } else { Some(true) }
        }
        Proposition::Or(ps) => {
            let mut unknown = false;
            for p in ps {
                match truth(q, t, m, p) {
                    Some(true) => return Some(true),
                    None => unknown = true,
                    Some(false) => {}
                }
            }
            if unknown { None } else { Some(false) }
        }
    }
}

fn group(mappings: Vec<Mapping>) -> OracleResult {
    let mut classes: BTreeMap<BTreeSet<usize>, Vec<usize>> = BTreeMap::new();
    for (i, (_, g)) in mappings.iter().enumerate() {
        classes.entry(g.iter().copied().collect()).or_default().push(i);
    }
    OracleResult { mappings, classes }
}

/// Mappings of `q` into `t` whose WHERE proposition is true.
pub fn oracle_match(
    q: &QueryGraph,
    where_clause: Option<&Proposition>,
    t: &Multigraph,
    limits: OracleLimits,
) -> Result<OracleResult, ConfigError> {
    let mut all = oracle_pattern(q, t, limits)?;
    if let Some(p) = where_clause {
        all.retain(|m| truth(q, t, m, p) == Some(true));
    }
    Ok(group(all))
}

/// [`oracle_match`] over a parsed query, using its MATCH pattern as written.
pub fn oracle_match_ast(ast: &QueryAst, t: &Multigraph, limits: OracleLimits) -> Result<OracleResult, ConfigError> {
    let q = crate::cypher::base_graph(ast);
    oracle_match(&q, ast.where_clause.as_ref(), t, limits)
}

/// Checks the five mapping conditions plus injectivity for one mapping;
/// returns the first violation.
pub fn validate_mapping(q: &QueryGraph, t: &Multigraph, f: &[usize], g: &[usize]) -> Result<(), String> {
    if f.len() != q.node_count() || g.len() != q.edge_count() {
        return Err("mapping arity differs from the query".into());
    }
    if f.iter().collect::<BTreeSet<_>>().len() != f.len() {
        return Err("node mapping is not injective".into());
    }
    if g.iter().collect::<BTreeSet<_>>().len() != g.len() {
        return Err("edge mapping is not injective".into());
    }
    for (qe, &te) in g.iter().enumerate() {
        let want = &q.edges[qe];
        let have = t.edge(te);
        let (a, b) = (f[want.src], f[want.dst]);
        let fwd = have.src == a && have.dst == b;
        let rev = have.src == b && have.dst == a;
        if !(fwd || (!want.directed && rev)) {
            return Err(format!("edge {} is not mapped onto its endpoints' images", want.name));
        }
        if let Some(ty) = &want.etype {
            if *ty != have.etype {
                return Err(format!("edge {} type {} != {}", want.name, ty, have.etype));
            }
        }
        if !contains_all(&have.properties, &want.properties) {
            return Err(format!("edge {} properties not contained", want.name));
        }
    }
    for (qn, &tn) in f.iter().enumerate() {
        let want = &q.nodes[qn];
        let have = t.node(tn);
        if !want.labels.is_subset(&have.labels) {
            return Err(format!("node {} labels not contained", want.name));
        }
        if !contains_all(&have.properties, &want.properties) {
            return Err(format!("node {} properties not contained", want.name));
        }
    }
    Ok(())
}
