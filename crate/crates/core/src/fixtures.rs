//! Small hand-built instances used by tests, docs and the acceptance suite.
//!
//! `toy_target` is a five-node target `t1..t5` (dense ids 0..4, input ids 1..5)
//! with edges `a..h` (input ids 0..7):
//!
//! ```text
//! a: t1 -> t2 blue      e: t4 -> t1 blue
//! b: t4 -> t3 red       f: t1 -> t4 red
//! c: t1 -> t3 blue      g: t3 -> t1 red
//! d: t4 -> t1 blue      h: t3 -> t5 blue
//! ```
//!
//! Labels: t1, t3, t4 {green, yellow}; t2 {yellow}; t5 {red, yellow}.

use crate::graph::{GraphBuilder, Multigraph, Properties};

fn props(pairs: &[(&str, crate::graph::PropertyValue)]) -> Properties {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

pub fn toy_target() -> Multigraph {
    let mut b = GraphBuilder::new();
    b.add_node(1, ["green", "yellow"], props(&[("name", "t1".into())]))
        .add_node(2, ["yellow"], props(&[("name", "t2".into())]))
        .add_node(3, ["green", "yellow"], props(&[("name", "t3".into())]))
        .add_node(4, ["green", "yellow"], props(&[("name", "t4".into())]))
        .add_node(5, ["red", "yellow"], props(&[("name", "t5".into())]));
    let edges = [
        (1, 2, "blue"),
        (4, 3, "red"),
        (1, 3, "blue"),
        (4, 1, "blue"),
        (4, 1, "blue"),
        (1, 4, "red"),
        (3, 1, "red"),
        (3, 5, "blue"),
    ];
    for (id, (s, d, t)) in edges.iter().enumerate() {
        let name = ((b'a' + id as u8) as char).to_string();
        b.add_edge(id as u64, *s, *d, *t, props(&[("name", name.as_str().into())]));
    }
    b.build().expect("toy target is valid")
}

/// Four-query-node pattern whose pair `(q1, q2)` has domain `{(t1, t4), (t3, t1)}`
/// on [`toy_target`].
pub const TOY_QUERY: &str = "MATCH (q1:yellow)-[w:red]->(q2:green), (q2)-[x:blue]->(q1), \
     (q2)-[y:red]->(q3:green), (q3)-[z:blue]->(q4:red) RETURN count()";

/// Two interchangeable leaves `q2`, `q3` hanging off `q1`.
pub const SYMMETRIC_NODES_QUERY: &str =
    "MATCH (q1:green)-[:blue]->(q2:yellow), (q1)-[:blue]->(q3:yellow) RETURN count()";

/// Two parallel same-type edges `x`, `y` between `q1` and `q2`.
pub const PARALLEL_EDGES_QUERY: &str =
    "MATCH (q1:green)-[x:blue]->(q2:green), (q1)-[y:blue]->(q2) RETURN count()";

/// Directed 4-clique `t1..t4` (input ids 1..4) whose pairs carry different
/// type multisets; the triangle [`CLIQUE_TRIANGLE_QUERY`] embeds only on
/// `t2, t3, t4`.
pub fn clique_target() -> Multigraph {
    let mut b = GraphBuilder::new();
    for id in 1..=4u64 {
        b.add_node(id, ["node"], Properties::new());
    }
    let edges = [
        (1, 2, "red"),
        (1, 3, "blue"),
        (1, 4, "green"),
        (1, 4, "red"),
        (2, 3, "red"),
        (2, 3, "blue"),
        (2, 3, "green"),
        (2, 4, "blue"),
        (2, 4, "green"),
        (3, 4, "red"),
        (3, 4, "green"),
    ];
    for (id, (s, d, t)) in edges.iter().enumerate() {
        b.add_edge(id as u64, *s, *d, *t, Properties::new());
    }
    b.build().expect("clique target is valid")
}

pub const CLIQUE_TRIANGLE_QUERY: &str = "MATCH (q1:node)-[:red]->(q2:node), (q1)-[:blue]->(q2), \
     (q2)-[:red]->(q3:node), (q2)-[:green]->(q3), \
     (q1)-[:blue]->(q3), (q1)-[:green]->(q3) RETURN count()";
