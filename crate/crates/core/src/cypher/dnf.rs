use super::ast::{AtomicCondition, Literal, Proposition, QueryAst};

/// One DNF term: a conjunction of literals.
pub type Conjunction = Vec<Literal>;

fn leaf(atom: &AtomicCondition, negated: bool) -> Literal {
    if negated {
        if let Some(op) = atom.op.complement() {
            return Literal {
                atom: AtomicCondition {
                    op,
                    ..atom.clone()
                },
                negated: false,
            };
        }
    }
    Literal {
        atom: atom.clone(),
        negated,
    }
}

fn product(parts: Vec<Vec<Conjunction>>) -> Vec<Conjunction> {
    let mut acc: Vec<Conjunction> = vec![Vec::new()];
    for part in parts {
        let mut next = Vec::with_capacity(acc.len() * part.len());
        for left in &acc {
            for right in &part {
                let mut c = left.clone();
                c.extend(right.iter().cloned());
                next.push(c);
            }
        }
        acc = next;
    }
    acc
}

fn dnf(p: &Proposition, negated: bool) -> Vec<Conjunction> {
    match (p, negated) {
        (Proposition::Atom(a), neg) => vec![vec![leaf(a, neg)]],
        (Proposition::Not(inner), neg) => dnf(inner, !neg),
        (Proposition::And(xs), false) | (Proposition::Or(xs), true) => {
            product(xs.iter().map(|x| dnf(x, negated)).collect())
        }
        (Proposition::Or(xs), false) | (Proposition::And(xs), true) => {
            xs.iter().flat_map(|x| dnf(x, negated)).collect()
        }
    }
}

/// Disjunctive normal form with negation pushed to the leaves. Negated
/// relational atoms become their complementary operator; negated string
/// operators stay negated. No simplification is attempted.
pub fn to_dnf(p: &Proposition) -> Vec<Conjunction> {
    dnf(p, false)
}

pub fn conjunction_to_proposition(c: &[Literal]) -> Proposition {
    let lits: Vec<Proposition> = c
        .iter()
        .map(|l| {
            let a = Proposition::Atom(l.atom.clone());
            if l.negated {
                Proposition::Not(Box::new(a))
            } else {
                a
            }
        })
        .collect();
    Proposition::And(lits)
}

/// One query per DNF term, each with a purely conjunctive WHERE clause.
pub fn split_on_or(q: &QueryAst) -> Vec<QueryAst> {
    match &q.where_clause {
        None => vec![q.clone()],
        Some(p) => to_dnf(p)
            .iter()
            .map(|c| QueryAst {
                where_clause: Some(conjunction_to_proposition(c)),
                ..q.clone()
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cypher::ast::{Operand, Term};
    use crate::graph::PropertyValue;
    use crate::query::{Accessor, CompareOp};

    fn atom(key: &str, op: CompareOp) -> Proposition {
        Proposition::Atom(AtomicCondition {
            lhs: Term {
                entity: "a".into(),
                accessor: Accessor::Property(key.into()),
            },
            op,
            rhs: Operand::Const(PropertyValue::Int(1)),
        })
    }

    #[test]
    fn single_atom_is_fixed_point() {
        let d = to_dnf(&atom("x", CompareOp::Lt));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].len(), 1);
        assert!(!d[0][0].negated);
    }

    #[test]
    fn distribution() {
        let p = Proposition::And(vec![
            Proposition::Or(vec![atom("a", CompareOp::Eq), atom("b", CompareOp::Eq)]),
            atom("c", CompareOp::Eq),
        ]);
        let keys: Vec<Vec<String>> = to_dnf(&p)
            .iter()
            .map(|c| {
                c.iter()
                    .map(|l| match &l.atom.lhs.accessor {
                        Accessor::Property(k) => k.clone(),
                        _ => unreachable!(),
                    })
                    .collect()
            })
            .collect();
        assert_eq!(keys, vec![vec!["a", "c"], vec!["b", "c"]]);
    }

    #[test]
    fn negation_complements_relational_and_keeps_string_ops() {
        let p = Proposition::Not(Box::new(Proposition::Or(vec![
            atom("x", CompareOp::Lt),
            atom("y", CompareOp::StartsWith),
        ])));
        let d = to_dnf(&p);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0][0].atom.op, CompareOp::Ge);
        assert!(!d[0][0].negated);
        assert_eq!(d[0][1].atom.op, CompareOp::StartsWith);
        assert!(d[0][1].negated);
    }
}
