//! Labeled, attributed multigraph shared by targets and (via [`crate::query`]) queries.
//!
//! Nodes and edges carry dense internal ids `0..n` / `0..m`. Input ids may be
//! sparse; [`GraphBuilder`] remaps them in ascending order so relative id order
//! is preserved, and stores the input id as the `_orig_id` property.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Reserved label given to input nodes that carry no label.
pub const UNLABELED: &str = "_unlabeled";
/// Property holding the id a node or edge had in its input file.
pub const ORIG_ID: &str = "_orig_id";

/// A scalar property value.
///
/// Equality is kind-and-value equality (`Int(5) != Text("5")`, `Int(5) != Float(5.0)`).
/// Floats compare by bit pattern for `Eq`/`Hash`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropertyValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl PropertyValue {
    pub fn kind(&self) -> &'static str {
        match self {
            PropertyValue::Bool(_) => "bool",
            PropertyValue::Int(_) => "int",
            PropertyValue::Float(_) => "float",
            PropertyValue::Text(_) => "text",
        }
    }

    /// Ordering between values of the same kind; `None` across kinds.
    pub fn try_cmp(&self, other: &PropertyValue) -> Option<Ordering> {
        match (self, other) {
            (PropertyValue::Bool(a), PropertyValue::Bool(b)) => Some(a.cmp(b)),
            (PropertyValue::Int(a), PropertyValue::Int(b)) => Some(a.cmp(b)),
            (PropertyValue::Float(a), PropertyValue::Float(b)) => a.partial_cmp(b),
            (PropertyValue::Text(a), PropertyValue::Text(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            PropertyValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            PropertyValue::Bool(b) => serde_json::Value::Bool(*b),
            PropertyValue::Int(i) => serde_json::Value::from(*i),
            PropertyValue::Float(f) => serde_json::Number::from_f64(*f)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            PropertyValue::Text(s) => serde_json::Value::String(s.clone()),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Option<Self> {
        match v {
            serde_json::Value::Bool(b) => Some(PropertyValue::Bool(*b)),
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(PropertyValue::Int)
                .or_else(|| n.as_f64().map(PropertyValue::Float)),
            serde_json::Value::String(s) => Some(PropertyValue::Text(s.clone())),
            _ => None,
        }
    }
}

impl PartialEq for PropertyValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PropertyValue::Bool(a), PropertyValue::Bool(b)) => a == b,
            (PropertyValue::Int(a), PropertyValue::Int(b)) => a == b,
            (PropertyValue::Float(a), PropertyValue::Float(b)) => a.to_bits() == b.to_bits(),
            (PropertyValue::Text(a), PropertyValue::Text(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for PropertyValue {}

impl Hash for PropertyValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            PropertyValue::Bool(b) => b.hash(state),
            PropertyValue::Int(i) => i.hash(state),
            PropertyValue::Float(f) => f.to_bits().hash(state),
            PropertyValue::Text(s) => s.hash(state),
        }
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Bool(b) => write!(f, "{b}"),
            PropertyValue::Int(i) => write!(f, "{i}"),
            PropertyValue::Float(x) => write!(f, "{x:?}"),
            PropertyValue::Text(s) => write!(f, "{s}"),
        }
    }
}

impl From<i64> for PropertyValue {
    fn from(v: i64) -> Self {
        PropertyValue::Int(v)
    }
}

impl From<&str> for PropertyValue {
    fn from(v: &str) -> Self {
        PropertyValue::Text(v.to_string())
    }
}

impl From<f64> for PropertyValue {
    fn from(v: f64) -> Self {
        PropertyValue::Float(v)
    }
}

impl From<bool> for PropertyValue {
    fn from(v: bool) -> Self {
        PropertyValue::Bool(v)
    }
}

pub type Properties = BTreeMap<String, PropertyValue>;

/// True iff every (key, value) pair of `wanted` is present in `have`.
pub fn properties_contain(have: &Properties, wanted: &Properties) -> bool {
    wanted.iter().all(|(k, v)| have.get(k) == Some(v))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub labels: BTreeSet<String>,
    pub properties: Properties,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: usize,
    pub src: usize,
    pub dst: usize,
    pub etype: String,
    pub properties: Properties,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.src == self.dst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Out,
    In,
}

/// Immutable multigraph with per-node adjacency and sorted alphabets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    label_alphabet: Vec<String>,
    type_alphabet: Vec<String>,
    // compact copies of the hot fields for index construction
    edge_ends: Vec<(usize, usize)>,
    edge_type_ids: Vec<usize>,
    label_offsets: Vec<usize>,
    label_ids: Vec<usize>,
}

impl Multigraph {
    /// Builds a graph from nodes and edges that already carry dense ids
    /// (`nodes[i].id == i`, `edges[j].id == j`).
    pub fn from_parts(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return Err(GraphError::Invalid(format!(
                    "node at position {i} has id {}",
                    n.id
                )));
            }
            if n.labels.is_empty() {
                return Err(GraphError::Invalid(format!("node {i} has no label")));
            }
        }
        let mut out_edges = vec![Vec::new(); nodes.len()];
        let mut in_edges = vec![Vec::new(); nodes.len()];
        for (j, e) in edges.iter().enumerate() {
            if e.id != j {
                return Err(GraphError::Invalid(format!(
                    "edge at position {j} has id {}",
                    e.id
                )));
            }
            for end in [e.src, e.dst] {
                if end >= nodes.len() {
                    return Err(GraphError::DanglingEndpoint {
                        edge: j as u64,
                        node: end as u64,
                    });
                }
            }
            out_edges[e.src].push(j);
            in_edges[e.dst].push(j);
        }
        let label_alphabet: Vec<String> = nodes
            .iter()
            .flat_map(|n| &n.labels)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .cloned()
            .collect();
        let mut label_offsets = Vec::with_capacity(nodes.len() + 1);
        let mut label_ids = Vec::new();
        label_offsets.push(0);
        for n in &nodes {
            label_ids.extend(n.labels.iter().map(|l| label_alphabet.binary_search(l).unwrap()));
            label_offsets.push(label_ids.len());
        }
        let type_alphabet: Vec<String> = edges
            .iter()
            .map(|e| &e.etype)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .cloned()
            .collect();
        let edge_type_ids = edges
            .iter()
            .map(|e| type_alphabet.binary_search(&e.etype).unwrap())
            .collect();
        let edge_ends = edges.iter().map(|e| (e.src, e.dst)).collect();
        Ok(Self {
            label_alphabet,
            type_alphabet,
            edge_ends,
            edge_type_ids,
            label_offsets,
            label_ids,
            nodes,
            edges,
            out_edges,
            in_edges,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn out_edges(&self, u: usize) -> &[usize] {
        &self.out_edges[u]
    }

    pub fn in_edges(&self, u: usize) -> &[usize] {
        &self.in_edges[u]
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out_edges[u].len()
    }

    pub fn in_degree(&self, u: usize) -> usize {
        self.in_edges[u].len()
    }

    pub fn total_degree(&self, u: usize) -> usize {
        self.out_degree(u) + self.in_degree(u)
    }

    /// Nodes joined to `u` by at least one edge in either direction.
    pub fn neighbors(&self, u: usize) -> BTreeSet<usize> {
        self.out_edges[u]
            .iter()
            .map(|&e| self.edges[e].dst)
            .chain(self.in_edges[u].iter().map(|&e| self.edges[e].src))
            .collect()
    }

    /// Sorted, distinct node labels.
    pub fn label_alphabet(&self) -> &[String] {
        &self.label_alphabet
    }

    /// Sorted, distinct edge types.
    pub fn type_alphabet(&self) -> &[String] {
        &self.type_alphabet
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.label_alphabet
            .binary_search_by(|l| l.as_str().cmp(label))
            .ok()
    }

    /// Index of edge `e`'s type in the type alphabet.
    pub fn edge_type_index(&self, e: usize) -> usize {
        self.edge_type_ids[e]
    }

    /// `(src, dst)` of every edge, by edge id.
    pub fn edge_ends(&self) -> &[(usize, usize)] {
        &self.edge_ends
    }

    /// Type alphabet index of every edge, by edge id.
    pub fn edge_type_ids(&self) -> &[usize] {
        &self.edge_type_ids
    }

    /// Sorted label alphabet indices of node `u`.
    pub fn node_label_ids(&self, u: usize) -> &[usize] {
        &self.label_ids[self.label_offsets[u]..self.label_offsets[u + 1]]
    }

    pub fn type_index(&self, etype: &str) -> Option<usize> {
        self.type_alphabet
            .binary_search_by(|t| t.as_str().cmp(etype))
            .ok()
    }

    /// Number of edges of type `etype` with `u` as source (`Out`) or destination (`In`).
    pub fn t_degree(&self, u: usize, etype: &str, dir: Direction) -> Result<usize, GraphError> {
        let list = match dir {
            Direction::Out => self.out_edges.get(u),
            Direction::In => self.in_edges.get(u),
        }
        .ok_or(GraphError::UnknownNode(u))?;
        Ok(list
            .iter()
            .filter(|&&e| self.edges[e].etype == etype)
            .count())
    }

    /// Input id of a node (the `_orig_id` property when present).
    pub fn original_node_id(&self, u: usize) -> i64 {
        match self.nodes[u].properties.get(ORIG_ID) {
            Some(PropertyValue::Int(i)) => *i,
            _ => u as i64,
        }
    }

    pub fn original_edge_id(&self, e: usize) -> i64 {
        match self.edges[e].properties.get(ORIG_ID) {
            Some(PropertyValue::Int(i)) => *i,
            _ => e as i64,
        }
    }
}

/// Accumulates nodes and edges keyed by (possibly sparse) input ids.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    nodes: Vec<(u64, BTreeSet<String>, Properties)>,
    edges: Vec<(u64, u64, u64, String, Properties)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node<I, S>(&mut self, id: u64, labels: I, properties: Properties) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels = labels.into_iter().map(Into::into).collect();
        self.nodes.push((id, labels, properties));
        self
    }

    pub fn add_edge(
        &mut self,
        id: u64,
        src: u64,
        dst: u64,
        etype: impl Into<String>,
        properties: Properties,
    ) -> &mut Self {
        self.edges.push((id, src, dst, etype.into(), properties));
        self
    }

    pub fn build(self) -> Result<Multigraph, GraphError> {
        let mut nodes = self.nodes;
        nodes.sort_by_key(|n| n.0);
        let mut remap: HashMap<u64, usize> = HashMap::with_capacity(nodes.len());
        for (dense, n) in nodes.iter().enumerate() {
            if remap.insert(n.0, dense).is_some() {
                return Err(GraphError::DuplicateNode(n.0));
            }
        }
        let nodes = nodes
            .into_iter()
            .enumerate()
            .map(|(dense, (orig, mut labels, mut properties))| {
                if labels.is_empty() {
                    labels.insert(UNLABELED.to_string());
                }
                properties.insert(ORIG_ID.to_string(), PropertyValue::Int(orig as i64));
                Node {
                    id: dense,
                    labels,
                    properties,
                }
            })
            .collect();

        let mut edges = self.edges;
        edges.sort_by_key(|e| e.0);
        for w in edges.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(GraphError::DuplicateEdge(w[0].0));
            }
        }
        let edges = edges
            .into_iter()
            .enumerate()
            .map(|(dense, (orig, src, dst, etype, mut properties))| {
                let lookup = |n: u64| {
                    remap
                        .get(&n)
                        .copied()
                        .ok_or(GraphError::DanglingEndpoint { edge: orig, node: n })
                };
                properties.insert(ORIG_ID.to_string(), PropertyValue::Int(orig as i64));
                Ok(Edge {
                    id: dense,
                    src: lookup(src)?,
                    dst: lookup(dst)?,
                    etype,
                    properties,
                })
            })
            .collect::<Result<Vec<_>, GraphError>>()?;
        Multigraph::from_parts(nodes, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_parallel() -> Multigraph {
        let mut b = GraphBuilder::new();
        b.add_node(0, ["x"], Properties::new())
            .add_node(1, ["x"], Properties::new())
            .add_edge(0, 0, 1, "a", Properties::new())
            .add_edge(1, 0, 1, "a", Properties::new())
            .add_edge(2, 0, 1, "b", Properties::new());
        b.build().unwrap()
    }

    #[test]
    fn parallel_edges_count_in_degrees() {
        let g = two_parallel();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.out_degree(0), 3);
        assert_eq!(g.t_degree(0, "a", Direction::Out).unwrap(), 2);
        assert_eq!(g.t_degree(0, "b", Direction::Out).unwrap(), 1);
        assert_eq!(g.t_degree(1, "a", Direction::In).unwrap(), 2);
        assert_eq!(g.t_degree(1, "a", Direction::Out).unwrap(), 0);
    }

    #[test]
    fn type_degrees_partition_out_degree() {
        let g = two_parallel();
        let sum: usize = g
            .type_alphabet()
            .iter()
            .map(|t| g.t_degree(0, t, Direction::Out).unwrap())
            .sum();
        assert_eq!(sum, g.out_degree(0));
    }

    #[test]
    fn unknown_node_is_lookup_error() {
        let g = two_parallel();
        assert!(matches!(
            g.t_degree(7, "a", Direction::Out),
            Err(GraphError::UnknownNode(7))
        ));
    }

    #[test]
    fn sparse_ids_are_remapped_in_order() {
        let mut b = GraphBuilder::new();
        b.add_node(40, ["b"], Properties::new())
            .add_node(7, Vec::<String>::new(), Properties::new())
            .add_edge(99, 40, 7, "r", Properties::new());
        let g = b.build().unwrap();
        assert_eq!(g.original_node_id(0), 7);
        assert_eq!(g.original_node_id(1), 40);
        assert!(g.node(0).labels.contains(UNLABELED));
        assert_eq!(g.edge(0).src, 1);
        assert_eq!(g.label_alphabet(), &[UNLABELED.to_string(), "b".to_string()]);
    }

    #[test]
    fn dangling_and_duplicate_ids_rejected() {
        let mut b = GraphBuilder::new();
        b.add_node(0, ["a"], Properties::new())
            .add_edge(0, 0, 5, "r", Properties::new());
        assert!(matches!(
            b.build(),
            Err(GraphError::DanglingEndpoint { node: 5, .. })
        ));
        let mut b = GraphBuilder::new();
        b.add_node(0, ["a"], Properties::new())
            .add_node(0, ["b"], Properties::new());
        assert!(matches!(b.build(), Err(GraphError::DuplicateNode(0))));
    }

    #[test]
    fn value_equality_is_kind_sensitive() {
        assert_ne!(PropertyValue::Int(5), PropertyValue::Text("5".into()));
        assert_ne!(PropertyValue::Int(5), PropertyValue::Float(5.0));
        assert_eq!(PropertyValue::Int(5).try_cmp(&PropertyValue::Float(1.0)), None);
        assert_eq!(
            PropertyValue::Text("a".into()).try_cmp(&PropertyValue::Text("b".into())),
            Some(Ordering::Less)
        );
    }

    #[test]
    fn self_loop_counts_in_both_directions() {
        let mut b = GraphBuilder::new();
        b.add_node(0, ["a"], Properties::new())
            .add_edge(0, 0, 0, "r", Properties::new());
        let g = b.build().unwrap();
        let both = g.t_degree(0, "r", Direction::Out).unwrap() + g.t_degree(0, "r", Direction::In).unwrap();
        assert_eq!(both, 2);
        assert_eq!(g.neighbors(0), BTreeSet::from([0]));
    }
}
