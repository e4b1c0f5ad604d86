//! Query automorphisms and the symmetry-breaking conditions derived from them.
//!
//! Automorphisms are enumerated exhaustively by backtracking, which is fine
//! for the small queries this engine targets. Conditions follow a stabilizer
//! chain: take the orbit of the smallest non-fixed element, order its minimum
//! before every other member, keep only the automorphisms fixing that minimum,
//! repeat. Edge conditions come from the group left once every node is fixed,
//! i.e. from swaps of interchangeable parallel edges.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::ConfigError;
use crate::query::{ConjunctiveQuery, EntityRef, QueryGraph};

pub const DEFAULT_MAX_QUERY_NODES: usize = 12;

/// Guard against groups too large to list (many interchangeable parallel edges).
const MAX_GROUP_SIZE: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Automorphism {
    pub node_perm: Vec<usize>,
    pub edge_perm: Vec<usize>,
}

impl Automorphism {
    pub fn identity(nodes: usize, edges: usize) -> Self {
        Self {
            node_perm: (0..nodes).collect(),
            edge_perm: (0..edges).collect(),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Automorphism {
            node_perm: other.node_perm.iter().map(|&x| self.node_perm[x]).collect(),
            edge_perm: other.edge_perm.iter().map(|&x| self.edge_perm[x]).collect(),
        }
    }

    pub fn inverse(&self) -> Automorphism {
        let mut node_perm = vec![0; self.node_perm.len()];
        for (i, &x) in self.node_perm.iter().enumerate() {
            node_perm[x] = i;
        }
        let mut edge_perm = vec![0; self.edge_perm.len()];
        for (i, &x) in self.edge_perm.iter().enumerate() {
            edge_perm[x] = i;
        }
        Automorphism {
            node_perm,
            edge_perm,
        }
    }
}

/// Extra per-entity colours an automorphism must preserve (e.g. WHERE
/// constraints). Empty strings everywhere means no extra constraint.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntitySignatures {
    pub nodes: Vec<String>,
    pub edges: Vec<String>,
}

impl EntitySignatures {
    pub fn blank(q: &QueryGraph) -> Self {
        Self {
            nodes: vec![String::new(); q.node_count()],
            edges: vec![String::new(); q.edge_count()],
        }
    }
}

/// Ordered pairs `(a, b)` meaning the image of `a` must have a smaller id
/// than the image of `b`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BreakingConditions {
    pub node_conds: Vec<(usize, usize)>,
    pub edge_conds: Vec<(usize, usize)>,
}

impl BreakingConditions {
    pub fn is_empty(&self) -> bool {
        self.node_conds.is_empty() && self.edge_conds.is_empty()
    }
}

struct Structure {
    /// Edge class id per edge.
    class: Vec<usize>,
    /// Directed edges: (src, dst) -> sorted class multiset.
    directed: HashMap<(usize, usize), Vec<usize>>,
    /// Undirected edges: (min, max) -> sorted class multiset.
    undirected: HashMap<(usize, usize), Vec<usize>>,
    /// Per node: (labels, properties, signature, out, in, undirected degree, loops) key.
    node_key: Vec<String>,
}

fn structure(q: &QueryGraph, sig: &EntitySignatures) -> Structure {
    let mut classes: BTreeMap<String, usize> = BTreeMap::new();
    let class: Vec<usize> = q
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let key = format!(
                "{:?}|{:?}|{}|{}",
                e.etype, e.properties, e.directed, sig.edges[i]
            );
            let next = classes.len();
            *classes.entry(key).or_insert(next)
        })
        .collect();
    let mut directed: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let mut undirected: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let mut deg = vec![[0usize; 4]; q.node_count()];
    for (i, e) in q.edges.iter().enumerate() {
        if e.directed {
            directed.entry((e.src, e.dst)).or_default().push(class[i]);
            deg[e.src][0] += 1;
            deg[e.dst][1] += 1;
        } else {
            undirected
                .entry((e.src.min(e.dst), e.src.max(e.dst)))
                .or_default()
                .push(class[i]);
            deg[e.src][2] += 1;
            deg[e.dst][2] += 1;
        }
        if e.is_loop() {
            deg[e.src][3] += 1;
        }
    }
    for v in directed.values_mut().chain(undirected.values_mut()) {
        v.sort_unstable();
    }
    let node_key = q
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            format!(
                "{:?}|{:?}|{}|{:?}",
                n.labels, n.properties, sig.nodes[i], deg[i]
            )
        })
        .collect();
    Structure {
        class,
        directed,
        undirected,
        node_key,
    }
}

impl Structure {
    fn dir(&self, a: usize, b: usize) -> &[usize] {
        self.directed.get(&(a, b)).map_or(&[], Vec::as_slice)
    }

    fn und(&self, a: usize, b: usize) -> &[usize] {
        self.undirected
            .get(&(a.min(b), a.max(b)))
            .map_or(&[], Vec::as_slice)
    }

    /// Adjacency between `x` and every already-mapped node (and itself) is
    /// preserved by mapping `x -> y`.
    fn consistent(&self, perm: &[Option<usize>], x: usize, y: usize) -> bool {
        let check = |w: usize, pw: usize| {
            self.dir(x, w) == self.dir(y, pw)
                && self.dir(w, x) == self.dir(pw, y)
                && self.und(x, w) == self.und(y, pw)
        };
        if !check(x, y) {
            return false;
        }
        perm.iter()
            .enumerate()
            .all(|(w, pw)| pw.map_or(true, |pw| check(w, pw)))
    }
}

fn node_permutations(q: &QueryGraph, s: &Structure) -> Vec<Vec<usize>> {
    let n = q.node_count();
    let mut out = Vec::new();
    let mut perm: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];

    fn rec(
        x: usize,
        s: &Structure,
        perm: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = perm.len();
        if x == n {
            out.push(perm.iter().map(|p| p.unwrap()).collect());
            return;
        }
        for y in 0..n {
            if used[y] || s.node_key[x] != s.node_key[y] || !s.consistent(perm, x, y) {
                continue;
            }
            perm[x] = Some(y);
            used[y] = true;
            rec(x + 1, s, perm, used, out);
            perm[x] = None;
            used[y] = false;
        }
    }

    rec(0, s, &mut perm, &mut used, &mut out);
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// All automorphisms of `q` preserving `sig`, identity first.
pub fn enumerate_automorphisms_with(
    q: &QueryGraph,
    sig: &EntitySignatures,
    max_nodes: usize,
) -> Result<Vec<Automorphism>, ConfigError> {
    if q.node_count() > max_nodes {
        return Err(ConfigError(format!(
            "query has {} nodes; automorphism search is capped at {max_nodes} \
             (raise --max-query-nodes)",
            q.node_count()
        )));
    }
    let s = structure(q, sig);
    // edges grouped by (src, dst, directed, class); undirected keys are sorted
    let key_of = |src: usize, dst: usize, directed: bool, class: usize| {
        if directed {
            (src, dst, true, class)
        } else {
            (src.min(dst), src.max(dst), false, class)
        }
    };
    let mut groups: BTreeMap<(usize, usize, bool, usize), Vec<usize>> = BTreeMap::new();
    for (i, e) in q.edges.iter().enumerate() {
        groups
            .entry(key_of(e.src, e.dst, e.directed, s.class[i]))
            .or_default()
            .push(i);
    }

    let mut out = Vec::new();
    for np in node_permutations(q, &s) {
        // per group: (members, all orderings of the image group)
        let mut choices: Vec<(&Vec<usize>, Vec<Vec<usize>>)> = Vec::new();
        let mut total = 1usize;
        for (&(a, b, d, c), members) in &groups {
            let image = &groups[&key_of(np[a], np[b], d, c)];
            let perms = permutations(image);
            total = total.saturating_mul(perms.len());
            choices.push((members, perms));
        }
        if out.len().saturating_add(total) > MAX_GROUP_SIZE {
            return Err(ConfigError(format!(
                "query automorphism group exceeds {MAX_GROUP_SIZE} elements"
            )));
        }
        let mut cursor = vec![0usize; choices.len()];
        loop {
            let mut ep = vec![0usize; q.edge_count()];
            for (gi, (members, perms)) in choices.iter().enumerate() {
                for (m, &img) in members.iter().zip(&perms[cursor[gi]]) {
                    ep[*m] = img;
                }
            }
            out.push(Automorphism {
                node_perm: np.clone(),
                edge_perm: ep,
            });
            let mut k = 0;
            while k < cursor.len() {
                cursor[k] += 1;
                if cursor[k] < choices[k].1.len() {
                    break;
                }
                cursor[k] = 0;
                k += 1;
            }
            if k == cursor.len() {
                break;
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn enumerate_automorphisms(
    q: &QueryGraph,
    max_nodes: usize,
) -> Result<Vec<Automorphism>, ConfigError> {
    enumerate_automorphisms_with(q, &EntitySignatures::blank(q), max_nodes)
}

fn orbits(perms: &[&[usize]], n: usize) -> Vec<BTreeSet<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for x in 0..n {
        if seen[x] {
            continue;
        }
        let orbit: BTreeSet<usize> = perms.iter().map(|p| p[x]).chain([x]).collect();
        for &y in &orbit {
            seen[y] = true;
        }
        out.push(orbit);
    }
    out
}

pub fn node_orbits(auts: &[Automorphism], n: usize) -> Vec<BTreeSet<usize>> {
    let perms: Vec<&[usize]> = auts.iter().map(|a| a.node_perm.as_slice()).collect();
    orbits(&perms, n)
}

pub fn edge_orbits(auts: &[Automorphism], m: usize) -> Vec<BTreeSet<usize>> {
    let perms: Vec<&[usize]> = auts.iter().map(|a| a.edge_perm.as_slice()).collect();
    orbits(&perms, m)
}

fn chain(
    mut group: Vec<Automorphism>,
    n: usize,
    perm: fn(&Automorphism) -> &[usize],
    conds: &mut Vec<(usize, usize)>,
) -> Vec<Automorphism> {
    loop {
        let perms: Vec<&[usize]> = group.iter().map(perm).collect();
        let Some(orbit) = orbits(&perms, n).into_iter().find(|o| o.len() >= 2) else {
            return group;
        };
        let min = *orbit.iter().next().unwrap();
        conds.extend(orbit.iter().skip(1).map(|&x| (min, x)));
        group.retain(|a| perm(a)[min] == min);
    }
}

/// Stabilizer-chain conditions for the group `auts` (which must be closed
/// under composition, as returned by [`enumerate_automorphisms`]).
pub fn derive_conditions(auts: &[Automorphism]) -> BreakingConditions {
    let Some(first) = auts.first() else {
        return BreakingConditions::default();
    };
    let (n, m) = (first.node_perm.len(), first.edge_perm.len());
    let mut out = BreakingConditions::default();
    let rest = chain(auts.to_vec(), n, |a| &a.node_perm, &mut out.node_conds);
    chain(rest, m, |a| &a.edge_perm, &mut out.edge_conds);
    out
}

/// Signatures making an automorphism preserve every branch's constraints:
/// the branch-specific labels, types and single-entity conditions of each
/// entity, and a unique colour for entities that appear in a condition
/// relating two entities (those are left fixed).
pub fn branch_signatures(base: &QueryGraph, branches: &[ConjunctiveQuery]) -> EntitySignatures {
    let mut sig = EntitySignatures::blank(base);
    for (bi, b) in branches.iter().enumerate() {
        for (i, n) in b.graph.nodes.iter().enumerate() {
            let mut keys: Vec<String> = b.node_filters[i].iter().map(|c| c.shape_key()).collect();
            keys.sort();
            sig.nodes[i].push_str(&format!("#{bi}{:?}{:?}", n.labels, keys));
        }
        for (i, e) in b.graph.edges.iter().enumerate() {
            let mut keys: Vec<String> = b.edge_filters[i].iter().map(|c| c.shape_key()).collect();
            keys.sort();
            sig.edges[i].push_str(&format!("#{bi}{:?}{:?}", e.etype, keys));
        }
        for c in &b.cross {
            for ent in c.entities() {
                match ent {
                    EntityRef::Node(x) => sig.nodes[x].push_str(&format!("!fixed{x}")),
                    EntityRef::Edge(x) => sig.edges[x].push_str(&format!("!fixed{x}")),
                }
            }
        }
    }
    sig
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cypher::{base_graph, compile, parse_query};
    use crate::fixtures::{PARALLEL_EDGES_QUERY, SYMMETRIC_NODES_QUERY};

    fn graph(src: &str) -> QueryGraph {
        base_graph(&parse_query(src).unwrap())
    }

    fn auts(src: &str) -> Vec<Automorphism> {
        enumerate_automorphisms(&graph(src), DEFAULT_MAX_QUERY_NODES).unwrap()
    }

    #[test]
    fn labelled_path_is_rigid() {
        let a = auts("MATCH (a:A)-[:T]->(b:B) RETURN count()");
        assert_eq!(a, vec![Automorphism::identity(2, 1)]);
        assert!(derive_conditions(&a).is_empty());
    }

    #[test]
    fn directed_three_cycle_has_rotations_only() {
        let a = auts("MATCH (a:X)-[:T]->(b:X), (b)-[:T]->(c:X), (c)-[:T]->(a) RETURN count()");
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn undirected_triangle_is_full_symmetric_group() {
        let a = auts("MATCH (a:X)-[:T]-(b:X), (b)-[:T]-(c:X), (c)-[:T]-(a) RETURN count()");
        assert_eq!(a.len(), 6);
        let c = derive_conditions(&a);
        assert_eq!(c.node_conds, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn interchangeable_leaves() {
        let a = auts(SYMMETRIC_NODES_QUERY);
        assert_eq!(a.len(), 2);
        let c = derive_conditions(&a);
        assert_eq!(c.node_conds, vec![(1, 2)]);
        assert!(c.edge_conds.is_empty());
    }

    #[test]
    fn parallel_edges_swap() {
        let a = auts(PARALLEL_EDGES_QUERY);
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|x| x.node_perm == vec![0, 1]));
        let c = derive_conditions(&a);
        assert!(c.node_conds.is_empty());
        assert_eq!(c.edge_conds, vec![(0, 1)]);
    }

    #[test]
    fn edge_permutations_are_products_over_groups() {
        // three parallel a->b edges: 3! edge permutations
        let a = auts("MATCH (a:A)-[x:T]->(b:B), (a)-[y:T]->(b), (a)-[z:T]->(b) RETURN count()");
        assert_eq!(a.len(), 6);
        let c = derive_conditions(&a);
        assert_eq!(c.edge_conds, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn group_axioms_hold() {
        let a = auts(
            "MATCH (a:X)-[:T]->(b:X), (a)-[:T]->(c:X), (a)-[:T]->(d:X), (b)-[:U]-(c) RETURN count()",
        );
        let set: BTreeSet<_> = a.iter().cloned().collect();
        assert!(set.contains(&Automorphism::identity(4, 4)));
        for x in &a {
            assert!(set.contains(&x.inverse()));
            for y in &a {
                assert!(set.contains(&x.compose(y)));
            }
        }
    }

    #[test]
    fn brute_force_matches_backtracking_on_cycle() {
        // every node permutation preserving the directed 4-cycle
        let q = graph("MATCH (a:X)-[:T]->(b:X), (b)-[:T]->(c:X), (c)-[:T]->(d:X), (d)-[:T]->(a) RETURN count()");
        let edges: BTreeSet<(usize, usize)> = q.edges.iter().map(|e| (e.src, e.dst)).collect();
        let mut brute = 0;
        for p in permutations(&[0, 1, 2, 3]) {
            let img: BTreeSet<(usize, usize)> = edges.iter().map(|&(s, d)| (p[s], p[d])).collect();
            if img == edges {
                brute += 1;
            }
        }
        assert_eq!(enumerate_automorphisms(&q, 12).unwrap().len(), brute);
    }

    #[test]
    fn cap_is_enforced() {
        let q = graph("MATCH (a)-->(b), (b)-->(c) RETURN count()");
        assert!(enumerate_automorphisms(&q, 2).is_err());
    }

    #[test]
    fn where_constraints_shrink_the_group() {
        let src = "MATCH (q1:green)-[:blue]->(q2:yellow), (q1)-[:blue]->(q3:yellow) \
                   WHERE q2.age > 3 RETURN count()";
        let cq = compile(&parse_query(src).unwrap());
        let sig = branch_signatures(&cq.base, &cq.branches);
        assert_eq!(enumerate_automorphisms_with(&cq.base, &sig, 12).unwrap().len(), 1);

        let src = "MATCH (q1:green)-[:blue]->(q2:yellow), (q1)-[:blue]->(q3:yellow) \
                   WHERE q2.age > 3 AND q3.age > 3 RETURN count()";
        let cq = compile(&parse_query(src).unwrap());
        let sig = branch_signatures(&cq.base, &cq.branches);
        assert_eq!(enumerate_automorphisms_with(&cq.base, &sig, 12).unwrap().len(), 2);

        let src = "MATCH (q1:green)-[:blue]->(q2:yellow), (q1)-[:blue]->(q3:yellow) \
                   WHERE q2.age < q3.age RETURN count()";
        let cq = compile(&parse_query(src).unwrap());
        let sig = branch_signatures(&cq.base, &cq.branches);
        assert_eq!(enumerate_automorphisms_with(&cq.base, &sig, 12).unwrap().len(), 1);
    }
}
