use std::collections::BTreeSet;
use std::fmt;

use crate::graph::{Properties, PropertyValue};
use crate::query::{Accessor, CompareOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePattern {
    pub name: String,
    pub anonymous: bool,
    pub labels: BTreeSet<String>,
    pub properties: Properties,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternDirection {
    LeftToRight,
    RightToLeft,
    Undirected,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePattern {
    pub name: String,
    pub anonymous: bool,
    pub etype: Option<String>,
    pub properties: Properties,
    pub left: String,
    pub right: String,
    pub direction: PatternDirection,
}

/// `entity.key`, `labels(entity)` or `type(entity)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub entity: String,
    pub accessor: Accessor,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Term(Term),
    Const(PropertyValue),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomicCondition {
    pub lhs: Term,
    pub op: CompareOp,
    pub rhs: Operand,
}

impl AtomicCondition {
    pub fn entities(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::from([self.lhs.entity.as_str()]);
        if let Operand::Term(t) = &self.rhs {
            out.insert(t.entity.as_str());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Proposition {
    Atom(AtomicCondition),
    Not(Box<Proposition>),
    And(Vec<Proposition>),
    Or(Vec<Proposition>),
}

/// A possibly-negated atomic condition: one DNF leaf.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: AtomicCondition,
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReturnItem {
    Entity(String),
    Property(String, String),
    Labels(String),
    Type(String),
    Nodes,
    Relationships,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReturnKind {
    Count,
    Projection(Vec<ReturnItem>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnSpec {
    pub kind: ReturnKind,
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryAst {
    /// Distinct node patterns in order of first mention.
    pub nodes: Vec<NodePattern>,
    pub edges: Vec<EdgePattern>,
    pub where_clause: Option<Proposition>,
    pub return_clause: ReturnSpec,
}

fn write_value(f: &mut fmt::Formatter<'_>, v: &PropertyValue) -> fmt::Result {
    match v {
        PropertyValue::Text(s) => {
            write!(f, "'")?;
            for c in s.chars() {
                match c {
                    '\'' => write!(f, "\\'")?,
                    '\\' => write!(f, "\\\\")?,
                    '\n' => write!(f, "\\n")?,
                    c => write!(f, "{c}")?,
                }
            }
            write!(f, "'")
        }
        PropertyValue::Float(x) => write!(f, "{x:?}"),
        other => write!(f, "{other}"),
    }
}

fn write_ident(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    let plain = s
        .chars()
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_alphanumeric() || c == '_');
    if plain {
        write!(f, "{s}")
    } else {
        write!(f, "`{s}`")
    }
}

fn write_props(f: &mut fmt::Formatter<'_>, props: &Properties) -> fmt::Result {
    if props.is_empty() {
        return Ok(());
    }
    write!(f, " {{")?;
    for (i, (k, v)) in props.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write_ident(f, k)?;
        write!(f, ": ")?;
        write_value(f, v)?;
    }
    write!(f, "}}")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.accessor {
            Accessor::Property(k) => {
                write_ident(f, &self.entity)?;
                write!(f, ".")?;
                write_ident(f, k)
            }
            Accessor::Labels => {
                write!(f, "labels(")?;
                write_ident(f, &self.entity)?;
                write!(f, ")")
            }
            Accessor::Type => {
                write!(f, "type(")?;
                write_ident(f, &self.entity)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for AtomicCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ", self.lhs, self.op.symbol())?;
        match &self.rhs {
            Operand::Term(t) => write!(f, "{t}"),
            Operand::Const(v) => write_value(f, v),
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[Proposition], sep: &str| {
            write!(f, "(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        };
        match self {
            Proposition::Atom(a) => write!(f, "{a}"),
            Proposition::Not(p) => write!(f, "NOT {p}"),
            Proposition::And(xs) => join(f, xs, "AND"),
            Proposition::Or(xs) => join(f, xs, "OR"),
        }
    }
}

impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut declared = BTreeSet::new();
        let mut node = |f: &mut fmt::Formatter<'_>, name: &str| {
            write!(f, "(")?;
            write_ident(f, name)?;
            if declared.insert(name.to_string()) {
                let n = self.nodes.iter().find(|n| n.name == name).expect("node");
                for l in &n.labels {
                    write!(f, ":")?;
                    write_ident(f, l)?;
                }
                write_props(f, &n.properties)?;
            }
            write!(f, ")")
        };
        write!(f, "MATCH ")?;
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            node(f, &e.left)?;
            write!(
                f,
                "{}[",
                if e.direction == PatternDirection::RightToLeft {
                    "<-"
                } else {
                    "-"
                }
            )?;
            write_ident(f, &e.name)?;
            if let Some(t) = &e.etype {
                write!(f, ":")?;
                write_ident(f, t)?;
            }
            write_props(f, &e.properties)?;
            write!(
                f,
                "]{}",
                if e.direction == PatternDirection::LeftToRight {
                    "->"
                } else {
                    "-"
                }
            )?;
            node(f, &e.right)?;
        }
        if let Some(p) = &self.where_clause {
            write!(f, " WHERE {p}")?;
        }
        write!(f, " RETURN ")?;
        match &self.return_clause.kind {
            ReturnKind::Count => write!(f, "count(*)")?,
            ReturnKind::Projection(items) => {
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    match it {
                        ReturnItem::Entity(e) => write_ident(f, e)?,
                        ReturnItem::Property(e, k) => {
                            write_ident(f, e)?;
                            write!(f, ".")?;
                            write_ident(f, k)?;
                        }
                        ReturnItem::Labels(e) => {
                            write!(f, "labels(")?;
                            write_ident(f, e)?;
                            write!(f, ")")?;
                        }
                        ReturnItem::Type(e) => {
                            write!(f, "type(")?;
                            write_ident(f, e)?;
                            write!(f, ")")?;
                        }
                        ReturnItem::Nodes => write!(f, "nodes()")?,
                        ReturnItem::Relationships => write!(f, "relationships()")?,
                    }
                }
            }
        }
        if let Some(k) = self.return_clause.limit {
            write!(f, " LIMIT {k}")?;
        }
        Ok(())
    }
}
