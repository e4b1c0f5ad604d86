use std::collections::{BTreeMap, BTreeSet};

use crate::graph::Multigraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVertex {
    pub labels: BTreeSet<String>,
    pub nodes: Vec<usize>,
}

/// One vertex per distinct target label set; an edge `a -> b` whenever the
/// label set of `b` immediately covers the one of `a` (strict superset with no
/// present label set in between).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLabelGraph {
    vertices: Vec<LabelVertex>,
    supersets: Vec<Vec<usize>>,
    has_subset: Vec<bool>,
}

impl NodeLabelGraph {
    pub fn build(g: &Multigraph) -> Self {
        // label id slices order like the label sets themselves
        let mut by_set: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
        for u in 0..g.node_count() {
            by_set.entry(g.node_label_ids(u)).or_default().push(u);
        }
        let vertices: Vec<LabelVertex> = by_set
            .into_values()
            .map(|nodes| LabelVertex {
                labels: g.node(nodes[0]).labels.clone(),
                nodes,
            })
            .collect();

        let k = vertices.len();
        let mut supersets = vec![Vec::new(); k];
        let mut has_subset = vec![false; k];
        for a in 0..k {
            let strict: Vec<usize> = (0..k)
                .filter(|&b| {
                    vertices[b].labels.len() > vertices[a].labels.len()
                        && vertices[a].labels.is_subset(&vertices[b].labels)
                })
                .collect();
            for &b in &strict {
                let covered = strict.iter().any(|&c| {
                    c != b
                        && vertices[c].labels.len() < vertices[b].labels.len()
                        && vertices[c].labels.is_subset(&vertices[b].labels)
                });
                if !covered {
                    supersets[a].push(b);
                    has_subset[b] = true;
                }
            }
        }
        Self {
            vertices,
            supersets,
            has_subset,
        }
    }

    pub fn vertices(&self) -> &[LabelVertex] {
        &self.vertices
    }

    /// Immediate superset vertices of vertex `v`.
    pub fn supersets_of(&self, v: usize) -> &[usize] {
        &self.supersets[v]
    }

    /// Target nodes whose label set contains `wanted`, found by entering the
    /// graph at the smallest matching vertices and following containment edges.
    pub fn nodes_with_label_superset<'a>(
        &'a self,
        wanted: &BTreeSet<String>,
    ) -> impl Iterator<Item = usize> + 'a {
        let k = self.vertices.len();
        let mut seen = vec![false; k];
        let mut stack: Vec<usize> = (0..k)
            .filter(|&v| wanted.is_subset(&self.vertices[v].labels))
            .filter(|&v| {
                // entry points: no matching vertex directly below
                !self.has_subset[v]
                    || !(0..k).any(|u| {
                        self.supersets[u].contains(&v)
                            && wanted.is_subset(&self.vertices[u].labels)
                    })
            })
            .collect();
        let mut order = Vec::new();
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            order.push(v);
            stack.extend(self.supersets[v].iter().copied().filter(|&s| !seen[s]));
        }
        order
            .into_iter()
            .flat_map(move |v| self.vertices[v].nodes.iter().copied())
    }
}
