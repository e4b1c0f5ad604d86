//! Target-side index structures: node label graph, edge types map, edge
//! properties table, bit signature matrix and a per-type degree cache.

mod bitsig;
mod label_graph;
pub mod snapshot;

use std::collections::BTreeSet;

pub use bitsig::{signature_contains, BitSignatureMatrix, SignatureLayout};
pub(crate) use bitsig::set_bit;
pub use label_graph::{LabelVertex, NodeLabelGraph};

use crate::graph::{Direction, Multigraph, Properties};

/// `(src, dst) -> type -> [edge ids]`, types as indices into the target type alphabet.
///
/// Stored per source node: `keys[offsets[s]..offsets[s + 1]]` holds the sorted
/// `(dst, type)` of every edge leaving `s`, with the edge ids alongside.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeTypesMap {
    offsets: Vec<usize>,
    keys: Vec<(usize, usize)>,
    ids: Vec<usize>,
}

impl EdgeTypesMap {
    pub fn build(g: &Multigraph) -> Self {
        let n = g.node_count();
        let ends = g.edge_ends();
        let mut offsets = vec![0usize; n + 1];
        for &(s, _) in ends {
            offsets[s + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut slots = vec![(0usize, 0usize, 0usize); ends.len()];
        let mut fill = offsets.clone();
        for (id, (&(s, d), &t)) in ends.iter().zip(g.edge_type_ids()).enumerate() {
            slots[fill[s]] = (d, t, id);
            fill[s] += 1;
        }
        for s in 0..n {
            slots[offsets[s]..offsets[s + 1]].sort_unstable();
        }
        let (keys, ids) = slots.into_iter().map(|(d, t, id)| ((d, t), id)).unzip();
        Self { offsets, keys, ids }
    }

    fn range(&self, src: usize, lo: (usize, usize), hi: (usize, usize)) -> std::ops::Range<usize> {
        if src + 1 >= self.offsets.len() {
            return 0..0;
        }
        let (a, b) = (self.offsets[src], self.offsets[src + 1]);
        let keys = &self.keys[a..b];
        a + keys.partition_point(|k| *k < lo)..a + keys.partition_point(|k| *k <= hi)
    }

    /// Edges `src -> dst` of type index `t`.
    pub fn edges(&self, src: usize, dst: usize, t: usize) -> &[usize] {
        &self.ids[self.range(src, (dst, t), (dst, t))]
    }

    /// All edges `src -> dst`, grouped by type.
    pub fn all_edges(&self, src: usize, dst: usize) -> impl Iterator<Item = usize> + '_ {
        self.ids[self.range(src, (dst, 0), (dst, usize::MAX))].iter().copied()
    }

    pub fn pair_count(&self) -> usize {
        self.entries().map(|(s, d, _, _)| (s, d)).collect::<BTreeSet<_>>().len()
    }

    /// Every `(src, dst, type, edge ids)` group.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, &[usize])> + '_ {
        (0..self.offsets.len().saturating_sub(1)).flat_map(move |s| {
            let (a, b) = (self.offsets[s], self.offsets[s + 1]);
            self.keys[a..b]
                .chunk_by(|x, y| x == y)
                .scan(a, move |at, group| {
                    let start = *at;
                    *at += group.len();
                    Some((s, group[0].0, group[0].1, &self.ids[start..*at]))
                })
        })
    }
}

/// Edge id -> property map.
#[derive(Debug, Clone, Copy)]
pub struct EdgePropertiesTable<'a> {
    graph: &'a Multigraph,
}

impl<'a> EdgePropertiesTable<'a> {
    pub fn get(&self, edge: usize) -> &'a Properties {
        &self.graph.edge(edge).properties
    }

    pub fn len(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.edge_count() == 0
    }
}

/// Per node, per type (out, in) edge counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDegreeCache {
    types: usize,
    counts: Vec<u32>,
}

impl TypeDegreeCache {
    pub fn build(g: &Multigraph) -> Self {
        let types = g.type_alphabet().len();
        let mut counts = vec![0u32; g.node_count() * types * 2];
        for (&(s, d), &t) in g.edge_ends().iter().zip(g.edge_type_ids()) {
            counts[(s * types + t) * 2] += 1;
            counts[(d * types + t) * 2 + 1] += 1;
        }
        Self { types, counts }
    }

    pub fn get(&self, node: usize, t: usize, dir: Direction) -> usize {
        let d = match dir {
            Direction::Out => 0,
            Direction::In => 1,
        };
        self.counts[(node * self.types + t) * 2 + d] as usize
    }
}

/// All target index structures over one immutable graph snapshot.
#[derive(Debug, Clone)]
pub struct TargetIndex {
    graph: Multigraph,
    label_graph: NodeLabelGraph,
    edge_types: EdgeTypesMap,
    bit_matrix: BitSignatureMatrix,
    degrees: TypeDegreeCache,
    type_frequency: Vec<usize>,
}

impl TargetIndex {
    pub fn build(graph: Multigraph) -> Self {
        let bit_matrix = BitSignatureMatrix::for_target(&graph);
        Self::with_bit_matrix(graph, bit_matrix)
    }

    pub(crate) fn with_bit_matrix(graph: Multigraph, bit_matrix: BitSignatureMatrix) -> Self {
        let label_graph = NodeLabelGraph::build(&graph);
        let edge_types = EdgeTypesMap::build(&graph);
        let degrees = TypeDegreeCache::build(&graph);
        let mut type_frequency = vec![0; graph.type_alphabet().len()];
        for &t in graph.edge_type_ids() {
            type_frequency[t] += 1;
        }
        Self {
            graph,
            label_graph,
            edge_types,
            bit_matrix,
            degrees,
            type_frequency,
        }
    }

    pub fn graph(&self) -> &Multigraph {
        &self.graph
    }

    pub fn label_graph(&self) -> &NodeLabelGraph {
        &self.label_graph
    }

    pub fn edge_types(&self) -> &EdgeTypesMap {
        &self.edge_types
    }

    pub fn edge_properties(&self) -> EdgePropertiesTable<'_> {
        EdgePropertiesTable { graph: &self.graph }
    }

    pub fn bit_matrix(&self) -> &BitSignatureMatrix {
        &self.bit_matrix
    }

    pub fn layout(&self) -> SignatureLayout {
        self.bit_matrix.layout()
    }

    pub fn type_degree(&self, node: usize, t: usize, dir: Direction) -> usize {
        self.degrees.get(node, t, dir)
    }

    /// Number of target edges of type index `t`.
    pub fn type_frequency(&self, t: usize) -> usize {
        self.type_frequency[t]
    }

    pub fn nodes_with_label_superset<'a>(
        &'a self,
        wanted: &BTreeSet<String>,
    ) -> impl Iterator<Item = usize> + 'a {
        self.label_graph.nodes_with_label_superset(wanted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::toy_target as get_test_fixture_toy;
    use crate::graph::GraphBuilder;

    #[test]
    fn type_degree_cache_agrees_with_graph() {
        let g = get_test_fixture_toy();
        let idx = TargetIndex::build(g.clone());
        for n in 0..g.node_count() {
            for (t, name) in g.type_alphabet().iter().enumerate() {
                for dir in [Direction::Out, Direction::In] {
                    assert_eq!(idx.type_degree(n, t, dir), g.t_degree(n, name, dir).unwrap());
                }
            }
        }
    }

    #[test]
    fn edge_types_map_covers_every_edge_once() {
        let g = get_test_fixture_toy();
        let idx = TargetIndex::build(g.clone());
        let mut all: Vec<usize> = idx
            .edge_types()
            .entries()
            .flat_map(|(_, _, _, ids)| ids.to_vec())
            .collect();
        all.sort();
        assert_eq!(all, (0..g.edge_count()).collect::<Vec<_>>());
    }

    #[test]
    fn one_row_per_connected_pair() {
        let g = get_test_fixture_toy();
        let idx = TargetIndex::build(g.clone());
        let pairs: BTreeSet<(usize, usize)> = g
            .edges()
            .iter()
            .map(|e| (e.src.min(e.dst), e.src.max(e.dst)))
            .collect();
        let keys: BTreeSet<(usize, usize)> = idx.bit_matrix().keys().iter().copied().collect();
        assert_eq!(keys, pairs);
        assert_eq!(idx.bit_matrix().len(), pairs.len());
    }

    #[test]
    fn empty_graph_indexes() {
        let mut b = GraphBuilder::new();
        b.add_node(0, ["a"], Properties::new());
        let idx = TargetIndex::build(b.build().unwrap());
        assert!(idx.bit_matrix().is_empty());
        assert_eq!(idx.edge_types().pair_count(), 0);
        assert_eq!(idx.edge_properties().len(), 0);
    }
}
