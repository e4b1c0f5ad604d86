use std::collections::BTreeSet;
use std::path::Path;

use mgm_core::graph::{Direction, GraphBuilder, Multigraph, Properties, PropertyValue};
use mgm_core::index::snapshot::{read_snapshot, write_snapshot};
use mgm_core::io::{load_graph_from, write_graph};
use mgm_core::TargetIndex;
use proptest::prelude::*;

const LABELS: [&str; 3] = ["A", "B", "C"];
const TYPES: [&str; 3] = ["x", "y", "z"];

fn multigraph() -> impl Strategy<Value = Multigraph> {
    (1usize..12).prop_flat_map(|n| {
        let nodes = proptest::collection::vec((0u8..8, proptest::option::of(-5i64..5)), n);
        let edges = proptest::collection::vec((0..n, 0..n, 0usize..3, proptest::option::of("[a-c]{0,3}")), 0..30);
        (nodes, edges).prop_map(|(nodes, edges)| {
            let mut b = GraphBuilder::new();
            for (i, (mask, w)) in nodes.into_iter().enumerate() {
                let labels: Vec<&str> = (0..3).filter(|k| mask >> k & 1 == 1).map(|k| LABELS[k]).collect();
                let mut p = Properties::new();
                if let Some(w) = w {
                    p.insert("w".into(), PropertyValue::Int(w));
                }
                // sparse input ids
                b.add_node(10 * i as u64 + 3, labels, p);
            }
            for (i, (s, d, t, name)) in edges.into_iter().enumerate() {
                let mut p = Properties::new();
                if let Some(name) = name {
                    p.insert("name".into(), PropertyValue::Text(name));
                }
                b.add_edge(7 * i as u64, 10 * s as u64 + 3, 10 * d as u64 + 3, TYPES[t], p);
            }
            b.build().unwrap()
        })
    })
}

fn bit(row: &[u64], i: usize) -> bool {
    row[i / 64] >> (i % 64) & 1 == 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn degree_sums_match_edge_count(g in multigraph()) {
        let outs: usize = (0..g.node_count()).map(|u| g.out_degree(u)).sum();
        let ins: usize = (0..g.node_count()).map(|u| g.in_degree(u)).sum();
        prop_assert_eq!(outs, g.edge_count());
        prop_assert_eq!(ins, g.edge_count());
    }

    #[test]
    fn typed_degrees_count_loops_twice(g in multigraph()) {
        for u in 0..g.node_count() {
            for t in g.type_alphabet() {
                let both = g.t_degree(u, t, Direction::Out).unwrap() + g.t_degree(u, t, Direction::In).unwrap();
                let expected: usize = g
                    .edges()
                    .iter()
                    .filter(|e| &e.etype == t)
                    .map(|e| usize::from(e.src == u) + usize::from(e.dst == u))
                    .sum();
                prop_assert_eq!(both, expected);
            }
        }
    }

    #[test]
    fn csv_round_trip(g in multigraph()) {
        let (mut nodes, mut edges) = (Vec::new(), Vec::new());
        write_graph(&g, &mut nodes, &mut edges).unwrap();
        let back = load_graph_from(nodes.as_slice(), Path::new("n"), edges.as_slice(), Path::new("e")).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn snapshot_round_trip(g in multigraph()) {
        let idx = TargetIndex::build(g.clone());
        let mut buf = Vec::new();
        write_snapshot(&idx, &mut buf).unwrap();
        let back = read_snapshot(buf.as_slice()).unwrap();
        prop_assert_eq!(back.graph(), &g);
        prop_assert_eq!(back.bit_matrix().raw_bits(), idx.bit_matrix().raw_bits());
    }

    #[test]
    fn bit_matrix_is_sound_and_witnessed(g in multigraph()) {
        let idx = TargetIndex::build(g.clone());
        let m = idx.bit_matrix();
        let l = m.layout();
        let mut rows = BTreeSet::new();
        for e in g.edges() {
            let (a, b) = (e.src.min(e.dst), e.src.max(e.dst));
            rows.insert((a, b));
            let row = m.row(a, b).expect("row for a connected pair");
            let t = g.type_index(&e.etype).unwrap();
            if e.src == a {
                prop_assert!(bit(row, l.type_out(t)));
            }
            if e.dst == a {
                prop_assert!(bit(row, l.type_in(t)));
            }
        }
        prop_assert_eq!(m.keys().iter().copied().collect::<BTreeSet<_>>(), rows);
        for ((a, b), row) in m.rows() {
            for (t, name) in g.type_alphabet().iter().enumerate() {
                let out = g.edges().iter().any(|e| e.src == a && e.dst == b && &e.etype == name);
                let inn = g.edges().iter().any(|e| e.src == b && e.dst == a && &e.etype == name);
                prop_assert_eq!(bit(row, l.type_out(t)), out);
                prop_assert_eq!(bit(row, l.type_in(t)), inn);
            }
            for (k, name) in g.label_alphabet().iter().enumerate() {
                prop_assert_eq!(bit(row, l.first_label(k)), g.node(a).labels.contains(name));
                prop_assert_eq!(bit(row, l.second_label(k)), g.node(b).labels.contains(name));
            }
            prop_assert_eq!(l.swap(&l.swap(row)), row.to_vec());
        }
    }

    #[test]
    fn edge_types_map_is_complete(g in multigraph()) {
        let idx = TargetIndex::build(g.clone());
        let mut all: Vec<usize> = idx
            .edge_types()
            .entries()
            .flat_map(|(_, _, _, ids)| ids.iter().copied())
            .collect();
        all.sort();
        prop_assert_eq!(all, (0..g.edge_count()).collect::<Vec<_>>());
        for e in g.edges() {
            let t = g.type_index(&e.etype).unwrap();
            prop_assert!(idx.edge_types().edges(e.src, e.dst, t).contains(&e.id));
        }
    }

    #[test]
    fn label_graph_partitions_nodes(g in multigraph()) {
        let idx = TargetIndex::build(g.clone());
        let mut seen: Vec<usize> = idx.label_graph().vertices().iter().flat_map(|v| v.nodes.iter().copied()).collect();
        seen.sort();
        prop_assert_eq!(seen, (0..g.node_count()).collect::<Vec<_>>());
    }

    #[test]
    fn label_superset_lookup_matches_scan(g in multigraph(), mask in 0u8..8) {
        let idx = TargetIndex::build(g.clone());
        let wanted: BTreeSet<String> = (0..3).filter(|k| mask >> k & 1 == 1).map(|k| LABELS[k].to_string()).collect();
        let mut got: Vec<usize> = idx.label_graph().nodes_with_label_superset(&wanted).collect();
        got.sort();
        let scan: Vec<usize> = (0..g.node_count()).filter(|&u| wanted.is_subset(&g.node(u).labels)).collect();
        prop_assert_eq!(got, scan);
    }
}
