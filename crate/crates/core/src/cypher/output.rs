use serde_json::Value;

use super::ast::{
    EdgePattern, NodePattern, PatternDirection, QueryAst, ReturnItem, ReturnKind, ReturnSpec,
};
use crate::graph::{Multigraph, UNLABELED};
use crate::query::QueryGraph;

/// Result of a RETURN clause.
#[derive(Debug, Clone, PartialEq)]
pub enum ReturnValue {
    Count(u64),
    Table {
        columns: Vec<String>,
        rows: Vec<Vec<Value>>,
    },
}

#[derive(Debug, Clone)]
enum Column {
    Node(usize),
    Edge(usize),
    NodeProp(usize, String),
    EdgeProp(usize, String),
    Labels(usize),
    Type(usize),
    Nodes,
    Relationships,
}

/// Streaming RETURN evaluator: feed it complete mappings, read the result at
/// the end. Rows are kept only for projections.
#[derive(Debug, Clone)]
pub struct ReturnCollector<'a> {
    target: &'a Multigraph,
    columns: Option<(Vec<String>, Vec<Column>)>,
    limit: Option<usize>,
    count: u64,
    rows: Vec<Vec<Value>>,
}

fn column_name(item: &ReturnItem) -> String {
    match item {
        ReturnItem::Entity(e) => e.clone(),
        ReturnItem::Property(e, k) => format!("{e}.{k}"),
        ReturnItem::Labels(e) => format!("labels({e})"),
        ReturnItem::Type(e) => format!("type({e})"),
        ReturnItem::Nodes => "nodes()".into(),
        ReturnItem::Relationships => "relationships()".into(),
    }
}

impl<'a> ReturnCollector<'a> {
    pub fn new(spec: &ReturnSpec, query: &QueryGraph, target: &'a Multigraph) -> Self {
        let columns = match &spec.kind {
            ReturnKind::Count => None,
            ReturnKind::Projection(items) => {
                let names = items.iter().map(column_name).collect();
                let cols = items
                    .iter()
                    .map(|it| {
                        let node = |e: &str| query.node_by_name(e);
                        let edge = |e: &str| query.edge_by_name(e).expect("declared entity");
                        match it {
                            ReturnItem::Entity(e) => match node(e) {
                                Some(n) => Column::Node(n),
                                None => Column::Edge(edge(e)),
                            },
                            ReturnItem::Property(e, k) => match node(e) {
                                Some(n) => Column::NodeProp(n, k.clone()),
                                None => Column::EdgeProp(edge(e), k.clone()),
                            },
                            ReturnItem::Labels(e) => Column::Labels(node(e).expect("node")),
                            ReturnItem::Type(e) => Column::Type(edge(e)),
                            ReturnItem::Nodes => Column::Nodes,
                            ReturnItem::Relationships => Column::Relationships,
                        }
                    })
                    .collect();
                Some((names, cols))
            }
        };
        Self {
            target,
            columns,
            limit: spec.limit,
            count: 0,
            rows: Vec::new(),
        }
    }

    pub fn is_full(&self) -> bool {
        self.limit.is_some_and(|k| self.count as usize >= k)
    }

    /// Records one mapping; returns `false` once LIMIT is reached.
    pub fn push(&mut self, node_map: &[usize], edge_map: &[usize]) -> bool {
        if self.is_full() {
            return false;
        }
        self.count += 1;
        if let Some((_, cols)) = &self.columns {
            let t = self.target;
            let row = cols
                .iter()
                .map(|c| match c {
                    Column::Node(n) => Value::from(t.original_node_id(node_map[*n])),
                    Column::Edge(e) => Value::from(t.original_edge_id(edge_map[*e])),
                    Column::NodeProp(n, k) => t
                        .node(node_map[*n])
                        .properties
                        .get(k)
                        .map_or(Value::Null, |v| v.to_json()),
                    Column::EdgeProp(e, k) => t
                        .edge(edge_map[*e])
                        .properties
                        .get(k)
                        .map_or(Value::Null, |v| v.to_json()),
                    Column::Labels(n) => Value::from(
                        t.node(node_map[*n])
                            .labels
                            .iter()
                            .filter(|l| *l != UNLABELED)
                            .cloned()
                            .collect::<Vec<_>>(),
                    ),
                    Column::Type(e) => Value::from(t.edge(edge_map[*e]).etype.clone()),
                    Column::Nodes => Value::from(
                        node_map
                            .iter()
                            .map(|&n| t.original_node_id(n))
                            .collect::<Vec<_>>(),
                    ),
                    Column::Relationships => Value::from(
                        edge_map
                            .iter()
                            .map(|&e| t.original_edge_id(e))
                            .collect::<Vec<_>>(),
                    ),
                })
                .collect();
            self.rows.push(row);
        }
        !self.is_full()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finish(self) -> ReturnValue {
        match self.columns {
            None => ReturnValue::Count(self.count),
            Some((columns, _)) => ReturnValue::Table {
                columns,
                rows: self.rows,
            },
        }
    }
}

/// Evaluates `spec` over a finished list of mappings.
pub fn evaluate_return<'m>(
    spec: &ReturnSpec,
    query: &QueryGraph,
    target: &Multigraph,
    results: impl IntoIterator<Item = (&'m [usize], &'m [usize])>,
) -> ReturnValue {
    let mut c = ReturnCollector::new(spec, query, target);
    for (f, g) in results {
        if !c.push(f, g) {
            break;
        }
    }
    c.finish()
}

/// Renders a query graph as MATCH text with a `count(*)` return.
pub fn render_query(g: &QueryGraph) -> String {
    let ast = QueryAst {
        nodes: g
            .nodes
            .iter()
            .map(|n| NodePattern {
                name: n.name.clone(),
                anonymous: false,
                labels: n.labels.clone(),
                properties: n.properties.clone(),
            })
            .collect(),
        edges: g
            .edges
            .iter()
            .map(|e| EdgePattern {
                name: e.name.clone(),
                anonymous: false,
                etype: e.etype.clone(),
                properties: e.properties.clone(),
                left: g.nodes[e.src].name.clone(),
                right: g.nodes[e.dst].name.clone(),
                direction: if e.directed {
                    PatternDirection::LeftToRight
                } else {
                    PatternDirection::Undirected
                },
            })
            .collect(),
        where_clause: None,
        return_clause: ReturnSpec {
            kind: ReturnKind::Count,
            limit: None,
        },
    };
    ast.to_string()
}
