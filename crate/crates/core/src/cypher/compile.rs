use super::ast::{AtomicCondition, Literal, Operand, PatternDirection, QueryAst};
use super::dnf::to_dnf;
use crate::graph::PropertyValue;
use crate::query::{
    Accessor, CompareOp, CondOperand, Condition, ConditionPhase, ConjunctiveQuery, EntityRef,
    QueryGraph,
};

/// A parsed query lowered to its base pattern plus one conjunctive branch
/// per satisfiable DNF term.
#[derive(Debug, Clone)]
pub struct CompiledQuery {
    pub ast: QueryAst,
    /// The MATCH pattern alone, without WHERE-derived constraints.
    pub base: QueryGraph,
    pub branches: Vec<ConjunctiveQuery>,
}

/// Query graph of the MATCH clause. Nodes follow first mention, edges follow
/// pattern order; an undirected pattern keeps left as `src`.
pub fn base_graph(ast: &QueryAst) -> QueryGraph {
    let mut g = QueryGraph::new();
    for n in &ast.nodes {
        let id = g.add_node(n.name.clone(), n.labels.iter().cloned());
        g.nodes[id].properties = n.properties.clone();
    }
    for e in &ast.edges {
        let l = g.node_by_name(&e.left).expect("declared node");
        let r = g.node_by_name(&e.right).expect("declared node");
        let (src, dst) = match e.direction {
            PatternDirection::RightToLeft => (r, l),
            _ => (l, r),
        };
        let id = g.add_edge(src, dst, e.etype.as_deref());
        let qe = &mut g.edges[id];
        qe.name = e.name.clone();
        qe.properties = e.properties.clone();
        qe.directed = e.direction != PatternDirection::Undirected;
    }
    g
}

pub fn classify_condition(c: &AtomicCondition) -> ConditionPhase {
    if c.entities().len() == 1 {
        ConditionPhase::DomainTime
    } else {
        ConditionPhase::MatchTime
    }
}

fn entity(g: &QueryGraph, name: &str) -> EntityRef {
    match g.node_by_name(name) {
        Some(n) => EntityRef::Node(n),
        None => EntityRef::Edge(g.edge_by_name(name).expect("declared entity")),
    }
}

pub fn lower_literal(g: &QueryGraph, lit: &Literal) -> Condition {
    let a = &lit.atom;
    Condition {
        entity: entity(g, &a.lhs.entity),
        accessor: a.lhs.accessor.clone(),
        op: a.op,
        rhs: match &a.rhs {
            Operand::Const(v) => CondOperand::Const(v.clone()),
            Operand::Term(t) => CondOperand::Entity(entity(g, &t.entity), t.accessor.clone()),
        },
        negated: lit.negated,
    }
}

/// Builds one conjunctive branch. Positive `labels(x) = 'L'` and
/// `type(r) = 'T'` literals become pattern constraints; the rest become
/// conditions. Returns `None` when two type constraints contradict.
pub fn compile_branch(base: &QueryGraph, literals: &[Literal]) -> Option<ConjunctiveQuery> {
    let mut cq = ConjunctiveQuery::unconstrained(base.clone());
    for lit in literals {
        let a = &lit.atom;
        if !lit.negated && a.op == CompareOp::Eq {
            if let Operand::Const(PropertyValue::Text(s)) = &a.rhs {
                match (&a.lhs.accessor, entity(base, &a.lhs.entity)) {
                    (Accessor::Labels, EntityRef::Node(n)) => {
                        cq.graph.nodes[n].labels.insert(s.clone());
                        continue;
                    }
                    (Accessor::Type, EntityRef::Edge(e)) => {
                        let slot = &mut cq.graph.edges[e].etype;
                        match slot {
                            Some(t) if t != s => return None,
                            _ => *slot = Some(s.clone()),
                        }
                        continue;
                    }
                    _ => {}
                }
            }
        }
        cq.add_condition(lower_literal(base, lit));
    }
    Some(cq)
}

pub fn compile(ast: &QueryAst) -> CompiledQuery {
    let base = base_graph(ast);
    let terms = match &ast.where_clause {
        None => vec![Vec::new()],
        Some(p) => to_dnf(p),
    };
    let branches = terms
        .iter()
        .filter_map(|t| compile_branch(&base, t))
        .collect();
    CompiledQuery {
        ast: ast.clone(),
        base,
        branches,
    }
}
