//! Query multigraphs and the compiled (entity-indexed) form of WHERE conditions.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::graph::{properties_contain, Edge, Node, Properties, PropertyValue};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryNode {
    pub name: String,
    /// Required labels; empty means "any label".
    pub labels: BTreeSet<String>,
    pub properties: Properties,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryEdge {
    pub name: String,
    pub src: usize,
    pub dst: usize,
    /// Required type; `None` matches every type.
    pub etype: Option<String>,
    pub properties: Properties,
    /// `false` for the undirected `-` pattern, which matches either orientation.
    pub directed: bool,
}

impl QueryEdge {
    pub fn is_loop(&self) -> bool {
        self.src == self.dst
    }

    /// The other endpoint of this edge, seen from `u`.
    pub fn other(&self, u: usize) -> usize {
        if self.src == u {
            self.dst
        } else {
            self.src
        }
    }
}

/// Connected query node pair `first <= second` with the ids of every edge joining them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPair {
    pub first: usize,
    pub second: usize,
    pub edges: Vec<usize>,
}

impl QueryPair {
    pub fn key(&self) -> (usize, usize) {
        (self.first, self.second)
    }

    pub fn is_loop(&self) -> bool {
        self.first == self.second
    }
}

/// A query multigraph. Node and edge ids are positions in `nodes` / `edges`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryGraph {
    pub nodes: Vec<QueryNode>,
    pub edges: Vec<QueryEdge>,
}

impl QueryGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node<I, S>(&mut self, name: impl Into<String>, labels: I) -> usize
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.nodes.push(QueryNode {
            name: name.into(),
            labels: labels.into_iter().map(Into::into).collect(),
            properties: Properties::new(),
        });
        self.nodes.len() - 1
    }

    pub fn add_edge(&mut self, src: usize, dst: usize, etype: Option<&str>) -> usize {
        let id = self.edges.len();
        self.edges.push(QueryEdge {
            name: format!("_e{id}"),
            src,
            dst,
            etype: etype.map(String::from),
            properties: Properties::new(),
            directed: true,
        });
        id
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Connected pairs in ascending `(first, second)` order, edges ascending.
    pub fn pairs(&self) -> Vec<QueryPair> {
        let mut map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (id, e) in self.edges.iter().enumerate() {
            let key = (e.src.min(e.dst), e.src.max(e.dst));
            map.entry(key).or_default().push(id);
        }
        map.into_iter()
            .map(|((first, second), edges)| QueryPair {
                first,
                second,
                edges,
            })
            .collect()
    }

    /// Undirected neighborhood of `u`.
    pub fn neighbors(&self, u: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter_map(|e| {
                if e.src == u {
                    Some(e.dst)
                } else if e.dst == u {
                    Some(e.src)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Out-degree plus in-degree, counting parallel edges (a loop counts twice).
    pub fn total_degree(&self, u: usize) -> usize {
        self.edges
            .iter()
            .map(|e| usize::from(e.src == u) + usize::from(e.dst == u))
            .sum()
    }

    /// Per-type (out, in) counts of the directed, typed edges at `u`.
    pub fn typed_degrees(&self, u: usize) -> BTreeMap<&str, (usize, usize)> {
        let mut out: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for e in self.edges.iter().filter(|e| e.directed) {
            let Some(t) = e.etype.as_deref() else { continue };
            if e.src == u {
                out.entry(t).or_default().0 += 1;
            }
            if e.dst == u {
                out.entry(t).or_default().1 += 1;
            }
        }
        out
    }

    pub fn node_by_name(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn edge_by_name(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityRef {
    Node(usize),
    Edge(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Accessor {
    Property(String),
    Labels,
    Type,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    StartsWith,
    EndsWith,
    Contains,
}

impl CompareOp {
    /// Complementary relational operator, `None` for string operators.
    pub fn complement(self) -> Option<CompareOp> {
        use CompareOp::*;
        Some(match self {
            Eq => Ne,
            Ne => Eq,
            Lt => Ge,
            Ge => Lt,
            Le => Gt,
            Gt => Le,
            StartsWith | EndsWith | Contains => return None,
        })
    }

    /// Operator with its operands swapped (`c < x` is `x > c`).
    pub fn flipped(self) -> CompareOp {
        use CompareOp::*;
        match self {
            Lt => Gt,
            Gt => Lt,
            Le => Ge,
            Ge => Le,
            other => other,
        }
    }

    pub fn is_string_op(self) -> bool {
        matches!(
            self,
            CompareOp::StartsWith | CompareOp::EndsWith | CompareOp::Contains
        )
    }

    pub fn symbol(self) -> &'static str {
        use CompareOp::*;
        match self {
            Eq => "=",
            Ne => "<>",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            StartsWith => "STARTS WITH",
            EndsWith => "ENDS WITH",
            Contains => "CONTAINS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CondOperand {
    Entity(EntityRef, Accessor),
    Const(PropertyValue),
}

/// A possibly-negated comparison over query entities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Condition {
    pub entity: EntityRef,
    pub accessor: Accessor,
    pub op: CompareOp,
    pub rhs: CondOperand,
    pub negated: bool,
}

/// Where a condition can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionPhase {
    /// Involves one entity only; filters domains or candidates.
    DomainTime,
    /// Relates two entities; checked once both are bound.
    MatchTime,
}

/// A bound target entity, as seen by condition evaluation.
#[derive(Debug, Clone, Copy)]
pub enum EntityView<'a> {
    Node(&'a Node),
    Edge(&'a Edge),
}

enum Resolved<'a> {
    Missing,
    Value(Cow<'a, PropertyValue>),
    Labels(&'a BTreeSet<String>),
}

fn resolve<'a>(view: EntityView<'a>, accessor: &Accessor) -> Resolved<'a> {
    match (view, accessor) {
        (EntityView::Node(n), Accessor::Property(k)) => n
            .properties
            .get(k)
            .map_or(Resolved::Missing, |v| Resolved::Value(Cow::Borrowed(v))),
        (EntityView::Edge(e), Accessor::Property(k)) => e
            .properties
            .get(k)
            .map_or(Resolved::Missing, |v| Resolved::Value(Cow::Borrowed(v))),
        (EntityView::Node(n), Accessor::Labels) => Resolved::Labels(&n.labels),
        (EntityView::Edge(e), Accessor::Type) => {
            Resolved::Value(Cow::Owned(PropertyValue::Text(e.etype.clone())))
        }
        _ => Resolved::Missing,
    }
}

fn compare(lhs: &Resolved<'_>, op: CompareOp, rhs: &Resolved<'_>) -> Option<bool> {
    use CompareOp::*;
    match (lhs, rhs) {
        (Resolved::Missing, _) | (_, Resolved::Missing) => None,
        (Resolved::Labels(set), Resolved::Value(v)) | (Resolved::Value(v), Resolved::Labels(set)) => {
            let label = v.as_text()?;
            match op {
                Eq => Some(set.contains(label)),
                Ne => Some(!set.contains(label)),
                _ => None,
            }
        }
        (Resolved::Labels(a), Resolved::Labels(b)) => match op {
            Eq => Some(a == b),
            Ne => Some(a != b),
            _ => None,
        },
        (Resolved::Value(a), Resolved::Value(b)) => {
            let (a, b) = (a.as_ref(), b.as_ref());
            match op {
                Eq => Some(a == b),
                Ne => Some(a != b),
                Lt => a.try_cmp(b).map(|o| o.is_lt()),
                Le => a.try_cmp(b).map(|o| o.is_le()),
                Gt => a.try_cmp(b).map(|o| o.is_gt()),
                Ge => a.try_cmp(b).map(|o| o.is_ge()),
                StartsWith => Some(a.as_text()?.starts_with(b.as_text()?)),
                EndsWith => Some(a.as_text()?.ends_with(b.as_text()?)),
                Contains => Some(a.as_text()?.contains(b.as_text()?)),
            }
        }
    }
}

impl Condition {
    pub fn entities(&self) -> BTreeSet<EntityRef> {
        let mut out = BTreeSet::from([self.entity]);
        if let CondOperand::Entity(e, _) = &self.rhs {
            out.insert(*e);
        }
        out
    }

    pub fn phase(&self) -> ConditionPhase {
        if self.entities().len() == 1 {
            ConditionPhase::DomainTime
        } else {
            ConditionPhase::MatchTime
        }
    }

    /// Evaluates the condition against bound entities. A comparison that
    /// cannot be decided (missing property, mixed kinds) never holds, whether
    /// or not the condition is negated.
    pub fn holds<'a>(&self, bind: impl Fn(EntityRef) -> EntityView<'a>) -> bool {
        let lhs = resolve(bind(self.entity), &self.accessor);
        let rhs = match &self.rhs {
            CondOperand::Const(v) => Resolved::Value(Cow::Borrowed(v)),
            CondOperand::Entity(e, acc) => resolve(bind(*e), acc),
        };
        compare(&lhs, self.op, &rhs) == Some(!self.negated)
    }

    /// Entity-independent text used to compare conditions across entities.
    pub fn shape_key(&self) -> String {
        format!("{self}")
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = |f: &mut fmt::Formatter<'_>, acc: &Accessor| match acc {
            Accessor::Property(k) => write!(f, "_.{k}"),
            Accessor::Labels => write!(f, "labels(_)"),
            Accessor::Type => write!(f, "type(_)"),
        };
        if self.negated {
            write!(f, "NOT ")?;
        }
        term(f, &self.accessor)?;
        write!(f, " {} ", self.op.symbol())?;
        match &self.rhs {
            CondOperand::Const(PropertyValue::Text(s)) => write!(f, "{s:?}"),
            CondOperand::Const(v) => write!(f, "{v}:{}", v.kind()),
            CondOperand::Entity(e, acc) => {
                write!(f, "{e:?}/")?;
                term(f, acc)
            }
        }
    }
}

/// One conjunctive branch of a query: the pattern plus the WHERE conditions
/// that must all hold.
#[derive(Debug, Clone, Default)]
pub struct ConjunctiveQuery {
    pub graph: QueryGraph,
    /// Single-entity conditions per query node.
    pub node_filters: Vec<Vec<Condition>>,
    /// Single-entity conditions per query edge.
    pub edge_filters: Vec<Vec<Condition>>,
    /// Conditions relating two entities.
    pub cross: Vec<Condition>,
}

impl ConjunctiveQuery {
    pub fn unconstrained(graph: QueryGraph) -> Self {
        Self {
            node_filters: vec![Vec::new(); graph.node_count()],
            edge_filters: vec![Vec::new(); graph.edge_count()],
            cross: Vec::new(),
            graph,
        }
    }

    /// Routes `cond` to the per-entity filters or the cross list.
    pub fn add_condition(&mut self, cond: Condition) {
        match cond.phase() {
            ConditionPhase::DomainTime => match cond.entity {
                EntityRef::Node(n) => self.node_filters[n].push(cond),
                EntityRef::Edge(e) => self.edge_filters[e].push(cond),
            },
            ConditionPhase::MatchTime => self.cross.push(cond),
        }
    }

    /// Query node `q` may be mapped to target node `t` as far as node-local
    /// constraints (labels, inline properties, single-node conditions) go.
    pub fn node_accepts(&self, q: usize, t: &Node) -> bool {
        let qn = &self.graph.nodes[q];
        qn.labels.is_subset(&t.labels)
            && properties_contain(&t.properties, &qn.properties)
            && self.node_filters[q]
                .iter()
                .all(|c| c.holds(|_| EntityView::Node(t)))
    }

    /// Edge-local constraints: type, inline properties and single-edge conditions.
    /// Direction is the caller's concern.
    pub fn edge_accepts(&self, q: usize, t: &Edge) -> bool {
        let qe = &self.graph.edges[q];
        qe.etype.as_ref().map_or(true, |ty| *ty == t.etype)
            && properties_contain(&t.properties, &qe.properties)
            && self.edge_filters[q]
                .iter()
                .all(|c| c.holds(|_| EntityView::Edge(t)))
    }
}
