use std::collections::BTreeSet;

use mgm_core::cypher::{base_graph, compile, parse_query, render_query, ReturnValue};
use mgm_core::domains::{compute_domains, degree_check, DomainOptions};
use mgm_core::engine::{collect_mappings, run_query, EngineOptions};
use mgm_core::graph::{Multigraph, UNLABELED};
use mgm_core::oracle::{oracle_match, validate_mapping, Mapping, OracleLimits};
use mgm_core::query::QueryGraph;
use mgm_core::symmetry::{enumerate_automorphisms, DEFAULT_MAX_QUERY_NODES};
use mgm_core::synth::{random_instance, InstanceBounds};
use mgm_core::{OrderingKind, TargetIndex};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn no_sym() -> EngineOptions {
    EngineOptions {
        symmetry: false,
        ..EngineOptions::default()
    }
}

fn oracle(src: &str, t: &Multigraph) -> mgm_core::oracle::OracleResult {
    let ast = parse_query(src).unwrap();
    oracle_match(&base_graph(&ast), ast.where_clause.as_ref(), t, OracleLimits::default()).unwrap()
}

/// Random WHERE atom over the query's entity names.
fn atom(q: &QueryGraph, rng: &mut ChaCha8Rng) -> String {
    let n = |rng: &mut ChaCha8Rng| q.nodes[rng.gen_range(0..q.node_count())].name.clone();
    let e = |rng: &mut ChaCha8Rng| q.edges[rng.gen_range(0..q.edge_count())].name.clone();
    let op = ["=", "<>", "<", "<=", ">", ">="][rng.gen_range(0..6)];
    match rng.gen_range(0..8) {
        0 => format!("{}._orig_id {op} {}", n(rng), n(rng) + "._orig_id"),
        1 => format!("{}._orig_id {op} {}", n(rng), rng.gen_range(0..25)),
        2 => format!("type({}) = 'T{}'", e(rng), rng.gen_range(0..3)),
        3 => format!("labels({}) <> 'L{}'", n(rng), rng.gen_range(0..3)),
        4 => format!("{}._orig_id {op} {}", e(rng), rng.gen_range(0..100)),
        5 => format!("{}.missing {op} 1", n(rng)),
        6 => format!("{}:L{}", n(rng), rng.gen_range(0..3)),
        _ => format!("{}._orig_id {op} {}._orig_id", e(rng), e(rng)),
    }
}

fn proposition(q: &QueryGraph, rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.35) {
        return atom(q, rng);
    }
    match rng.gen_range(0..3) {
        0 => format!("NOT ({})", proposition(q, rng, depth - 1)),
        1 => format!("({} AND {})", proposition(q, rng, depth - 1), proposition(q, rng, depth - 1)),
        _ => format!("({} OR {})", proposition(q, rng, depth - 1), proposition(q, rng, depth - 1)),
    }
}

/// The extracted query with labels dropped, edges untyped or undirected at
/// random, and optionally a random WHERE clause.
fn relaxed(q: &QueryGraph, seed: u64, with_where: bool) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = q.clone();
    for n in &mut q.nodes {
        if rng.gen_bool(0.3) {
            n.labels.clear();
        }
    }
    for e in &mut q.edges {
        if rng.gen_bool(0.2) {
            e.etype = None;
        }
        if rng.gen_bool(0.25) {
            e.directed = false;
        }
    }
    let src = render_query(&q);
    if !with_where {
        return src;
    }
    let w = proposition(&q, &mut rng, 2);
    src.replace(" RETURN ", &format!(" WHERE {w} RETURN "))
}

fn count(v: &ReturnValue) -> u64 {
    match v {
        ReturnValue::Count(n) => *n,
        ReturnValue::Table { rows, .. } => rows.len() as u64,
    }
}

fn check_equivalence(src: &str, t: &Multigraph, idx: &TargetIndex) -> Result<(), TestCaseError> {
    let o = oracle(src, t);
    let off = collect_mappings(src, idx, &no_sym()).unwrap();
    prop_assert_eq!(&off, &o.sorted_mappings(), "mapping multiset differs for {}", src);

    let on_run = run_query(src, idx, &EngineOptions::default()).unwrap();
    let on = collect_mappings(src, idx, &EngineOptions::default()).unwrap();
    prop_assert_eq!(count(&on_run.value), on.len() as u64);
    prop_assert_eq!(on.len() * on_run.stats.automorphisms, off.len(), "Aut identity fails for {}", src);
    let q = base_graph(&parse_query(src).unwrap());
    let all: BTreeSet<&Mapping> = o.mappings.iter().collect();
    for m in &on {
        prop_assert!(all.contains(m));
        prop_assert!(validate_mapping(&q, t, &m.0, &m.1).is_ok());
    }
    Ok(())
}

fn instance(seed: u64) -> (Multigraph, QueryGraph, TargetIndex) {
    let (t, q) = random_instance(seed, &InstanceBounds::default());
    let idx = TargetIndex::build(t.clone());
    (t, q.graph, idx)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn extracted_queries_match_the_oracle(seed in any::<u64>()) {
        let (t, q, idx) = instance(seed);
        let src = render_query(&q);
        check_equivalence(&src, &t, &idx)?;
        // exact labels and no properties: one representative per edge-image class
        let o = oracle(&src, &t);
        let on = collect_mappings(&src, &idx, &EngineOptions::default()).unwrap();
        let images: BTreeSet<BTreeSet<usize>> = on.iter().map(|m| m.1.iter().copied().collect()).collect();
        prop_assert_eq!(images.len(), on.len());
        prop_assert_eq!(images, o.classes.keys().cloned().collect::<BTreeSet<_>>());
        prop_assert!(on.len() >= 1, "extraction witness lost");
    }

    #[test]
    fn relaxed_queries_match_the_oracle(seed in any::<u64>(), mutation in any::<u64>()) {
        let (t, q, idx) = instance(seed);
        check_equivalence(&relaxed(&q, mutation, false), &t, &idx)?;
    }

    #[test]
    fn where_queries_match_the_oracle(seed in any::<u64>(), mutation in any::<u64>()) {
        let (t, q, idx) = instance(seed);
        check_equivalence(&relaxed(&q, mutation, true), &t, &idx)?;
    }

    #[test]
    fn orderings_and_bitmatrix_do_not_change_results(seed in any::<u64>(), mutation in any::<u64>()) {
        let (_, q, idx) = instance(seed);
        let src = relaxed(&q, mutation, mutation % 2 == 0);
        let reference = collect_mappings(&src, &idx, &no_sym()).unwrap();
        for kind in OrderingKind::ALL {
            for use_bitmatrix in [true, false] {
                for symmetry in [false, true] {
                    let opts = EngineOptions { ordering: kind, use_bitmatrix, symmetry, seed: mutation, ..EngineOptions::default() };
                    let got = collect_mappings(&src, &idx, &opts).unwrap();
                    if symmetry {
                        let base = EngineOptions { symmetry: true, ..EngineOptions::default() };
                        prop_assert_eq!(&got, &collect_mappings(&src, &idx, &base).unwrap());
                    } else {
                        prop_assert_eq!(&got, &reference, "{} bitmatrix={}", kind, use_bitmatrix);
                    }
                }
            }
        }
    }

    #[test]
    fn domains_contain_every_oracle_mapping(seed in any::<u64>(), mutation in any::<u64>(), strict in any::<bool>()) {
        let (t, q, idx) = instance(seed);
        let src = relaxed(&q, mutation, false);
        let cq = compile(&parse_query(&src).unwrap()).branches.remove(0);
        let opts = DomainOptions { use_bitmatrix: true, paper_strict: strict };
        let d = compute_domains(&cq, &idx, opts);
        for (f, _) in &oracle(&src, &t).mappings {
            for p in cq.graph.pairs() {
                prop_assert!(d.get(p.first, p.second).contains(f[p.first], f[p.second]));
            }
        }
    }

    #[test]
    fn domains_shrink_when_the_query_grows(seed in any::<u64>(), pick in any::<usize>(), label in 0usize..3) {
        let (_, q, idx) = instance(seed);
        let cq = compile(&parse_query(&render_query(&q)).unwrap()).branches.remove(0);
        let before = compute_domains(&cq, &idx, DomainOptions::default());

        let mut more_labels = cq.clone();
        let u = pick % more_labels.graph.node_count();
        more_labels.graph.nodes[u].labels.insert(format!("L{label}"));
        let mut more_edges = cq.clone();
        let e = more_edges.graph.edges[pick % more_edges.graph.edge_count()].clone();
        more_edges.graph.add_edge(e.src, e.dst, Some(&format!("T{label}")));
        more_edges.edge_filters.push(Vec::new());

        for grown in [more_labels, more_edges] {
            let after = compute_domains(&grown, &idx, DomainOptions::default());
            for p in grown.graph.pairs() {
                let old: BTreeSet<_> = before.get(p.first, p.second).entries().iter().collect();
                for x in after.get(p.first, p.second).entries() {
                    prop_assert!(old.contains(x));
                }
            }
        }
    }

    #[test]
    fn degree_check_agrees_with_recount(seed in any::<u64>(), a in any::<usize>(), b in any::<usize>()) {
        let (t, q, idx) = instance(seed);
        let pairs = q.pairs();
        let p = &pairs[a % pairs.len()];
        let (ta, tb) = (a % t.node_count(), b % t.node_count());
        let fits = |qn: usize, tn: usize| {
            q.edges.iter().filter_map(|e| e.etype.as_ref()).collect::<BTreeSet<_>>().into_iter().all(|ty| {
                let q_out = q.edges.iter().filter(|e| e.directed && e.etype.as_ref() == Some(ty) && e.src == qn).count();
                let q_in = q.edges.iter().filter(|e| e.directed && e.etype.as_ref() == Some(ty) && e.dst == qn).count();
                let t_out = t.edges().iter().filter(|e| &e.etype == ty && e.src == tn).count();
                let t_in = t.edges().iter().filter(|e| &e.etype == ty && e.dst == tn).count();
                q_out <= t_out && q_in <= t_in
            })
        };
        prop_assert_eq!(degree_check(&q, p.key(), (ta, tb), &idx), fits(p.first, ta) && fits(p.second, tb));
    }

    #[test]
    fn automorphisms_are_the_self_embeddings(seed in any::<u64>(), mutation in any::<u64>()) {
        let (_, q, _) = instance(seed);
        let src = relaxed(&q, mutation, false);
        let mut q = base_graph(&parse_query(&src).unwrap());
        // an undirected edge could also land on a directed twin, which is no automorphism
        for e in &mut q.edges {
            e.directed = true;
        }
        // the query as a target: every node keeps exactly its own labels
        let mut b = mgm_core::GraphBuilder::new();
        for (i, n) in q.nodes.iter().enumerate() {
            let labels: Vec<String> = if n.labels.is_empty() { vec![UNLABELED.into()] } else { n.labels.iter().cloned().collect() };
            b.add_node(i as u64, labels, Default::default());
        }
        for (i, e) in q.edges.iter().enumerate() {
            b.add_edge(i as u64, e.src as u64, e.dst as u64, e.etype.clone().unwrap_or_else(|| "_any".into()), Default::default());
        }
        let as_target = b.build().unwrap();
        let mut exact = q.clone();
        for (i, n) in exact.nodes.iter_mut().enumerate() {
            n.labels = as_target.node(i).labels.clone();
        }
        for (i, e) in exact.edges.iter_mut().enumerate() {
            e.etype = Some(as_target.edge(i).etype.clone());
        }
        let auts = enumerate_automorphisms(&exact, DEFAULT_MAX_QUERY_NODES).unwrap();
        let embeddings = oracle_match(&exact, None, &as_target, OracleLimits::default()).unwrap();
        let mut found: Vec<Mapping> = auts.iter().map(|a| (a.node_perm.clone(), a.edge_perm.clone())).collect();
        found.sort();
        prop_assert_eq!(found, embeddings.sorted_mappings());
    }

    #[test]
    fn limit_returns_min_of_k_and_total(seed in any::<u64>(), k in 1usize..40) {
        let (_, q, idx) = instance(seed);
        let src = render_query(&q);
        let total = count(&run_query(&src, &idx, &no_sym()).unwrap().value);
        let opts = EngineOptions { limit: Some(k), ..no_sym() };
        prop_assert_eq!(count(&run_query(&src, &idx, &opts).unwrap().value), total.min(k as u64));
        let limited = src.replace("count(*)", &format!("nodes() LIMIT {k}"));
        prop_assert_eq!(count(&run_query(&limited, &idx, &no_sym()).unwrap().value), total.min(k as u64));
    }
}
