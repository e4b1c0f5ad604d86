use mgm_core::cypher::{parse_query, to_dnf, AtomicCondition, Literal, Operand, Proposition, Term};
use mgm_core::graph::PropertyValue;
use mgm_core::query::{Accessor, CompareOp};
use proptest::prelude::*;

const OPS: [CompareOp; 9] = [
    CompareOp::Eq,
    CompareOp::Ne,
    CompareOp::Lt,
    CompareOp::Le,
    CompareOp::Gt,
    CompareOp::Ge,
    CompareOp::StartsWith,
    CompareOp::EndsWith,
    CompareOp::Contains,
];

/// Atom `i` reads property `p{i}`, so literals can be traced back to it.
fn atom(i: usize, op: usize) -> Proposition {
    Proposition::Atom(AtomicCondition {
        lhs: Term {
            entity: "a".into(),
            accessor: Accessor::Property(format!("p{i}")),
        },
        op: OPS[op],
        rhs: Operand::Const(PropertyValue::Int(0)),
    })
}

fn proposition() -> impl Strategy<Value = Proposition> {
    let leaf = (0usize..6, 0usize..9).prop_map(|(i, op)| atom(i, op));
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|p| Proposition::Not(Box::new(p))),
            proptest::collection::vec(inner.clone(), 1..4).prop_map(Proposition::And),
            proptest::collection::vec(inner, 1..4).prop_map(Proposition::Or),
        ]
    })
}

fn index_of(a: &AtomicCondition) -> usize {
    match &a.lhs.accessor {
        Accessor::Property(k) => k[1..].parse().unwrap(),
        _ => unreachable!(),
    }
}

/// Kleene evaluation where atom `i` with its original operator has value `v[i]`.
fn eval(p: &Proposition, ops: &[Option<CompareOp>; 6], v: &[Option<bool>]) -> Option<bool> {
    match p {
        Proposition::Atom(a) => literal(a, false, ops, v),
        Proposition::Not(x) => eval(x, ops, v).map(|b| !b),
        Proposition::And(xs) => xs.iter().fold(Some(true), |acc, x| match (acc, eval(x, ops, v)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        }),
        Proposition::Or(xs) => xs.iter().fold(Some(false), |acc, x| match (acc, eval(x, ops, v)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        }),
    }
}

/// Value of a (possibly complemented) occurrence of atom `i`.
fn literal(a: &AtomicCondition, negated: bool, ops: &[Option<CompareOp>; 6], v: &[Option<bool>]) -> Option<bool> {
    let i = index_of(a);
    let base = v[i];
    let value = if Some(a.op) == ops[i] {
        base
    } else {
        assert_eq!(Some(a.op), ops[i].and_then(|o| o.complement()), "unexpected operator");
        base.map(|b| !b)
    };
    if negated {
        value.map(|b| !b)
    } else {
        value
    }
}

fn collect_ops(p: &Proposition, ops: &mut [Option<CompareOp>; 6]) {
    match p {
        Proposition::Atom(a) => ops[index_of(a)] = Some(a.op),
        Proposition::Not(x) => collect_ops(x, ops),
        Proposition::And(xs) | Proposition::Or(xs) => xs.iter().for_each(|x| collect_ops(x, ops)),
    }
}

fn eval_dnf(d: &[Vec<Literal>], ops: &[Option<CompareOp>; 6], v: &[Option<bool>]) -> Option<bool> {
    let mut any_unknown = false;
    for c in d {
        let mut t = Some(true);
        for l in c {
            t = match (t, literal(&l.atom, l.negated, ops, v)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            };
        }
        match t {
            Some(true) => return Some(true),
            None => any_unknown = true,
            Some(false) => {}
        }
    }
    if any_unknown {
        None
    } else {
        Some(false)
    }
}

/// Regenerates atoms so each index keeps a single operator.
fn normalize(p: &Proposition, ops: &[Option<CompareOp>; 6]) -> Proposition {
    match p {
        Proposition::Atom(a) => {
            let i = index_of(a);
            let mut a = a.clone();
            a.op = ops[i].unwrap();
            Proposition::Atom(a)
        }
        Proposition::Not(x) => Proposition::Not(Box::new(normalize(x, ops))),
        Proposition::And(xs) => Proposition::And(xs.iter().map(|x| normalize(x, ops)).collect()),
        Proposition::Or(xs) => Proposition::Or(xs.iter().map(|x| normalize(x, ops)).collect()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn dnf_preserves_truth(p in proposition()) {
        let mut ops = [None; 6];
        collect_ops(&p, &mut ops);
        let p = normalize(&p, &ops);
        let d = to_dnf(&p);
        for mask in 0..64u32 {
            let v: Vec<Option<bool>> = (0..6).map(|i| Some(mask >> i & 1 == 1)).collect();
            prop_assert_eq!(eval(&p, &ops, &v), eval_dnf(&d, &ops, &v));
        }
        // three-valued: every atom true, false or unknown
        for code in 0..729u32 {
            let v: Vec<Option<bool>> = (0..6)
                .map(|i| match code / 3u32.pow(i) % 3 {
                    0 => Some(false),
                    1 => Some(true),
                    _ => None,
                })
                .collect();
            prop_assert_eq!(eval(&p, &ops, &v), eval_dnf(&d, &ops, &v));
        }
    }

    #[test]
    fn where_display_round_trips(p in proposition()) {
        let src = format!("MATCH (a)-[r]->(b) WHERE {p} RETURN count(*)");
        let ast = parse_query(&src).unwrap();
        let again = parse_query(&ast.to_string()).unwrap();
        prop_assert_eq!(ast, again);
    }

    #[test]
    fn arbitrary_text_never_panics(src in "[ -~\\n]{0,80}") {
        if let Err(e) = parse_query(&src) {
            prop_assert!(e.line >= 1 && e.column >= 1);
        }
    }

    #[test]
    fn mangled_queries_fail_with_a_position(cut in 1usize..60) {
        let src = "MATCH (a:A {k: 1})-[r:T]->(b), (b)<-[s]-(c) WHERE a.k < 3 OR NOT type(s) = 'x' RETURN a, b.k LIMIT 4";
        let cut = cut.min(src.len() - 1);
        let broken = format!("{}){}", &src[..cut], &src[cut..]);
        match parse_query(&broken) {
            Ok(_) => {}
            Err(e) => prop_assert!(e.line == 1 && e.column <= broken.len() + 1),
        }
    }
}
