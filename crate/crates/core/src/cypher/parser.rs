use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::error::ParseError;
use crate::graph::{Properties, PropertyValue};
use crate::query::{Accessor, CompareOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Node,
    Edge,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    nodes: Vec<NodePattern>,
    edges: Vec<EdgePattern>,
    names: HashMap<String, Kind>,
    fresh: usize,
}

/// Parses one query. Keywords are case-insensitive; names and labels are not.
pub fn parse_query(src: &str) -> Result<QueryAst, ParseError> {
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
        nodes: Vec::new(),
        edges: Vec::new(),
        names: HashMap::new(),
        fresh: 0,
    };
    p.query()
}

fn is_kw(t: &Tok, kw: &str) -> bool {
    matches!(t, Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        let t = self.here();
        ParseError::new(t.line, t.column, msg)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.err_here(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.advance())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if is_kw(self.peek(), kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn query(&mut self) -> Result<QueryAst, ParseError> {
        if !self.eat_kw("MATCH") {
            return Err(self.unexpected("MATCH"));
        }
        self.pattern()?;
        while self.eat(&Tok::Comma) {
            self.pattern()?;
        }
        if self.edges.is_empty() {
            return Err(self.err_here("pattern must contain at least one relationship"));
        }
        if let Some(n) = self
            .nodes
            .iter()
            .find(|n| !self.edges.iter().any(|e| e.left == n.name || e.right == n.name))
        {
            return Err(self.err_here(format!(
                "node `{}` is not part of any relationship",
                n.name
            )));
        }
        let where_clause = if self.eat_kw("WHERE") {
            Some(self.or_expr()?)
        } else {
            None
        };
        if !self.eat_kw("RETURN") {
            return Err(if *self.peek() == Tok::Eof {
                self.err_here("missing RETURN clause")
            } else {
                self.unexpected("WHERE, RETURN or `,`")
            });
        }
        let kind = self.return_items()?;
        let limit = if self.eat_kw("LIMIT") {
            let at = self.here().clone();
            match self.advance().tok {
                Tok::Int(k) if k >= 1 => Some(k as usize),
                _ => {
                    return Err(ParseError::new(
                        at.line,
                        at.column,
                        "LIMIT requires a positive integer",
                    ))
                }
            }
        } else {
            None
        };
        self.eat(&Tok::Semicolon);
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected("end of query"));
        }
        Ok(QueryAst {
            nodes: std::mem::take(&mut self.nodes),
            edges: std::mem::take(&mut self.edges),
            where_clause,
            return_clause: ReturnSpec { kind, limit },
        })
    }

    fn pattern(&mut self) -> Result<(), ParseError> {
        let mut left = self.node_pattern()?;
        while matches!(self.peek(), Tok::Dash | Tok::Lt) {
            let (mut edge, inbound) = self.relationship()?;
            let right = self.node_pattern()?;
            edge.left = left.clone();
            edge.right = right.clone();
            if inbound {
                edge.direction = PatternDirection::RightToLeft;
            }
            self.edges.push(edge);
            left = right;
        }
        Ok(())
    }

    fn fresh_name(&mut self, prefix: &str) -> String {
        loop {
            let name = format!("_{prefix}{}", self.fresh);
            self.fresh += 1;
            if !self.names.contains_key(&name) {
                return name;
            }
        }
    }

    fn declare(&mut self, name: &str, kind: Kind, at: &Token) -> Result<bool, ParseError> {
        match self.names.get(name) {
            Some(k) if *k != kind => Err(ParseError::new(
                at.line,
                at.column,
                format!("`{name}` is already bound to a different kind of entity"),
            )),
            Some(_) => Ok(false),
            None => {
                self.names.insert(name.to_string(), kind);
                Ok(true)
            }
        }
    }

    fn node_pattern(&mut self) -> Result<String, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let at = self.here().clone();
        let (name, anonymous) = match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                (s, false)
            }
            _ => (self.fresh_name("n"), true),
        };
        let mut labels = BTreeSet::new();
        while matches!(self.peek(), Tok::Colon | Tok::Semicolon) {
            self.advance();
            labels.insert(self.ident("label name")?);
        }
        let properties = if *self.peek() == Tok::LBrace {
            self.props()?
        } else {
            Properties::new()
        };
        self.expect(Tok::RParen, "`)`")?;
        if self.declare(&name, Kind::Node, &at)? {
            self.nodes.push(NodePattern {
                name: name.clone(),
                anonymous,
                labels,
                properties,
            });
        } else {
            let n = self.nodes.iter_mut().find(|n| n.name == name).unwrap();
            n.labels.extend(labels);
            for (k, v) in properties {
                if let Some(old) = n.properties.get(&k) {
                    if *old != v {
                        return Err(ParseError::new(
                            at.line,
                            at.column,
                            format!("conflicting values for `{name}.{k}`"),
                        ));
                    }
                }
                n.properties.insert(k, v);
            }
        }
        Ok(name)
    }

    /// Parses `-[..]->`, `<-[..]-`, `-[..]-` and the bare `-->`, `<--`, `--`.
    /// Returns the edge (endpoints unset) and whether it points leftwards.
    fn relationship(&mut self) -> Result<(EdgePattern, bool), ParseError> {
        let start = self.here().clone();
        let inbound = self.eat(&Tok::Lt);
        self.expect(Tok::Dash, "`-`")?;
        let mut name = None;
        let mut etype = None;
        let mut properties = Properties::new();
        let at = self.here().clone();
        if self.eat(&Tok::LBracket) {
            if let Tok::Ident(s) = self.peek().clone() {
                self.advance();
                name = Some(s);
            }
            if self.eat(&Tok::Colon) {
                etype = Some(self.ident("relationship type")?);
            }
            if *self.peek() == Tok::LBrace {
                properties = self.props()?;
            }
            self.expect(Tok::RBracket, "`]`")?;
        }
        self.expect(Tok::Dash, "`-`")?;
        let outbound = self.eat(&Tok::Gt);
        if inbound && outbound {
            return Err(ParseError::new(
                start.line,
                start.column,
                "relationship cannot point both ways",
            ));
        }
        let anonymous = name.is_none();
        let name = match name {
            Some(n) => {
                if !self.declare(&n, Kind::Edge, &at)? {
                    return Err(ParseError::new(
                        at.line,
                        at.column,
                        format!("relationship `{n}` is bound twice"),
                    ));
                }
                n
            }
            None => {
                let n = self.fresh_name("e");
                self.names.insert(n.clone(), Kind::Edge);
                n
            }
        };
        Ok((
            EdgePattern {
                name,
                anonymous,
                etype,
                properties,
                left: String::new(),
                right: String::new(),
                direction: if outbound {
                    PatternDirection::LeftToRight
                } else {
                    PatternDirection::Undirected
                },
            },
            inbound,
        ))
    }

    fn props(&mut self) -> Result<Properties, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut out = Properties::new();
        if self.eat(&Tok::RBrace) {
            return Ok(out);
        }
        loop {
            let at = self.here().clone();
            let key = self.ident("property key")?;
            self.expect(Tok::Colon, "`:`")?;
            let value = self.literal()?;
            if out.insert(key.clone(), value).is_some() {
                return Err(ParseError::new(
                    at.line,
                    at.column,
                    format!("duplicate property key `{key}`"),
                ));
            }
            if self.eat(&Tok::RBrace) {
                return Ok(out);
            }
            self.expect(Tok::Comma, "`,` or `}`")?;
        }
    }

    fn literal(&mut self) -> Result<PropertyValue, ParseError> {
        let negative = self.eat(&Tok::Dash);
        let v = match self.peek().clone() {
            Tok::Int(i) => PropertyValue::Int(if negative { -i } else { i }),
            Tok::Float(f) => PropertyValue::Float(if negative { -f } else { f }),
            Tok::Str(s) if !negative => PropertyValue::Text(s),
            Tok::Ident(s) if !negative && s.eq_ignore_ascii_case("true") => {
                PropertyValue::Bool(true)
            }
            Tok::Ident(s) if !negative && s.eq_ignore_ascii_case("false") => {
                PropertyValue::Bool(false)
            }
            _ => return Err(self.unexpected("a literal")),
        };
        self.advance();
        Ok(v)
    }

    fn or_expr(&mut self) -> Result<Proposition, ParseError> {
        let mut xs = vec![self.and_expr()?];
        while self.eat_kw("OR") {
            xs.push(self.and_expr()?);
        }
        Ok(if xs.len() == 1 {
            xs.pop().unwrap()
        } else {
            Proposition::Or(xs)
        })
    }

    fn and_expr(&mut self) -> Result<Proposition, ParseError> {
        let mut xs = vec![self.not_expr()?];
        while self.eat_kw("AND") {
            xs.push(self.not_expr()?);
        }
        Ok(if xs.len() == 1 {
            xs.pop().unwrap()
        } else {
            Proposition::And(xs)
        })
    }

    fn not_expr(&mut self) -> Result<Proposition, ParseError> {
        if self.eat_kw("NOT") {
            return Ok(Proposition::Not(Box::new(self.not_expr()?)));
        }
        if self.eat(&Tok::LParen) {
            let inner = self.or_expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(inner);
        }
        self.comparison().map(Proposition::Atom)
    }

    fn entity_ref(&mut self, want: Option<Kind>) -> Result<String, ParseError> {
        let at = self.here().clone();
        let name = self.ident("a variable")?;
        match (self.names.get(&name), want) {
            (None, _) => Err(ParseError::new(
                at.line,
                at.column,
                format!("`{name}` is not defined"),
            )),
            (Some(k), Some(w)) if *k != w => Err(ParseError::new(
                at.line,
                at.column,
                match w {
                    Kind::Node => format!("labels() needs a node, `{name}` is a relationship"),
                    Kind::Edge => format!("type() needs a relationship, `{name}` is a node"),
                },
            )),
            _ => Ok(name),
        }
    }

    fn call_arg(&mut self, want: Kind) -> Result<String, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let name = self.entity_ref(Some(want))?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(name)
    }

    fn operand(&mut self) -> Result<Operand, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s.eq_ignore_ascii_case("labels") && *self.peek_at(1) == Tok::LParen => {
                self.advance();
                let e = self.call_arg(Kind::Node)?;
                Ok(Operand::Term(Term {
                    entity: e,
                    accessor: Accessor::Labels,
                }))
            }
            Tok::Ident(s) if s.eq_ignore_ascii_case("type") && *self.peek_at(1) == Tok::LParen => {
                self.advance();
                let e = self.call_arg(Kind::Edge)?;
                Ok(Operand::Term(Term {
                    entity: e,
                    accessor: Accessor::Type,
                }))
            }
            Tok::Ident(s)
                if !s.eq_ignore_ascii_case("true") && !s.eq_ignore_ascii_case("false") =>
            {
                let e = self.entity_ref(None)?;
                self.expect(Tok::Dot, "`.`")?;
                let key = self.ident("property key")?;
                Ok(Operand::Term(Term {
                    entity: e,
                    accessor: Accessor::Property(key),
                }))
            }
            _ => self.literal().map(Operand::Const),
        }
    }

    fn comparison(&mut self) -> Result<AtomicCondition, ParseError> {
        let at = self.here().clone();
        // `x:Label` predicate
        if let (Tok::Ident(name), Tok::Colon) = (self.peek().clone(), self.peek_at(1).clone()) {
            let name_ok = self.names.get(&name) == Some(&Kind::Node);
            if !name_ok {
                self.entity_ref(Some(Kind::Node))?;
            } else {
                self.advance();
            }
            self.advance();
            let label = self.ident("label name")?;
            return Ok(AtomicCondition {
                lhs: Term {
                    entity: name,
                    accessor: Accessor::Labels,
                },
                op: CompareOp::Eq,
                rhs: Operand::Const(PropertyValue::Text(label)),
            });
        }
        let lhs = self.operand()?;
        let op = self.operator()?;
        let rhs = self.operand()?;
        match (lhs, rhs) {
            (Operand::Term(lhs), rhs) => Ok(AtomicCondition { lhs, op, rhs }),
            (Operand::Const(c), Operand::Term(t)) => {
                if op.is_string_op() {
                    return Err(ParseError::new(
                        at.line,
                        at.column,
                        format!("left operand of {} must reference a variable", op.symbol()),
                    ));
                }
                Ok(AtomicCondition {
                    lhs: t,
                    op: op.flipped(),
                    rhs: Operand::Const(c),
                })
            }
            (Operand::Const(_), Operand::Const(_)) => Err(ParseError::new(
                at.line,
                at.column,
                "comparison must reference at least one variable",
            )),
        }
    }

    fn operator(&mut self) -> Result<CompareOp, ParseError> {
        let op = match self.peek() {
            Tok::Eq => CompareOp::Eq,
            Tok::Ne => CompareOp::Ne,
            Tok::Lt => CompareOp::Lt,
            Tok::Le => CompareOp::Le,
            Tok::Gt => CompareOp::Gt,
            Tok::Ge => CompareOp::Ge,
            t if is_kw(t, "CONTAINS") => CompareOp::Contains,
            t if is_kw(t, "STARTS") || is_kw(t, "ENDS") => {
                let starts = is_kw(t, "STARTS");
                self.advance();
                if !self.eat_kw("WITH") {
                    return Err(self.unexpected("WITH"));
                }
                return Ok(if starts {
                    CompareOp::StartsWith
                } else {
                    CompareOp::EndsWith
                });
            }
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.advance();
        Ok(op)
    }

    fn return_items(&mut self) -> Result<ReturnKind, ParseError> {
        if is_kw(self.peek(), "count") && *self.peek_at(1) == Tok::LParen {
            self.advance();
            self.advance();
            if !self.eat(&Tok::Star) {
                if let Tok::Ident(_) = self.peek() {
                    self.entity_ref(None)?;
                }
            }
            self.expect(Tok::RParen, "`)`")?;
            return Ok(ReturnKind::Count);
        }
        let mut items = vec![self.return_item()?];
        while self.eat(&Tok::Comma) {
            items.push(self.return_item()?);
        }
        Ok(ReturnKind::Projection(items))
    }

    fn return_item(&mut self) -> Result<ReturnItem, ParseError> {
        let call = *self.peek_at(1) == Tok::LParen;
        let kw = match self.peek() {
            Tok::Ident(s) if call => s.to_ascii_lowercase(),
            _ => String::new(),
        };
        match kw.as_str() {
            "labels" => {
                self.advance();
                Ok(ReturnItem::Labels(self.call_arg(Kind::Node)?))
            }
            "type" => {
                self.advance();
                Ok(ReturnItem::Type(self.call_arg(Kind::Edge)?))
            }
            "nodes" | "relationships" => {
                self.advance();
                self.advance();
                self.expect(Tok::RParen, "`)`")?;
                Ok(if kw == "nodes" {
                    ReturnItem::Nodes
                } else {
                    ReturnItem::Relationships
                })
            }
            "count" => Err(self.err_here("count() cannot be combined with other items")),
            _ => {
                let e = self.entity_ref(None)?;
                if self.eat(&Tok::Dot) {
                    Ok(ReturnItem::Property(e, self.ident("property key")?))
                } else {
                    Ok(ReturnItem::Entity(e))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_directions() {
        let q = parse_query("MATCH (a)-[r:X]->(b)<-[s]-(c)-[t]-(a) RETURN count(*)").unwrap();
        let dirs: Vec<_> = q.edges.iter().map(|e| e.direction).collect();
        assert_eq!(
            dirs,
            vec![
                PatternDirection::LeftToRight,
                PatternDirection::RightToLeft,
                PatternDirection::Undirected
            ]
        );
        assert_eq!(q.edges[1].left, "b");
        assert_eq!(q.edges[1].right, "c");
        assert_eq!(q.nodes.len(), 3);
    }

    #[test]
    fn bare_arrows() {
        let q = parse_query("match (a)-->(b)<--(c)--(d) return count()").unwrap();
        assert_eq!(q.edges.len(), 3);
        assert!(q.edges.iter().all(|e| e.anonymous && e.etype.is_none()));
    }

    #[test]
    fn labels_and_props_merge_across_mentions() {
        let q =
            parse_query("MATCH (a:P;Q {x: 1})-[:T]->(b), (a:R {y: 'k'})-[:T]->(b) RETURN a").unwrap();
        let a = &q.nodes[0];
        assert_eq!(a.labels.len(), 3);
        assert_eq!(a.properties.len(), 2);
    }

    #[test]
    fn constant_on_left_flips() {
        let q = parse_query("MATCH (a)-[r]->(b) WHERE 3 < a.x RETURN count()").unwrap();
        match q.where_clause.unwrap() {
            Proposition::Atom(c) => {
                assert_eq!(c.op, CompareOp::Gt);
                assert_eq!(c.rhs, Operand::Const(PropertyValue::Int(3)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence_not_and_or() {
        let q = parse_query(
            "MATCH (a)-[r]->(b) WHERE NOT a.x = 1 AND b.y = 2 OR a:L RETURN count()",
        )
        .unwrap();
        match q.where_clause.unwrap() {
            Proposition::Or(xs) => {
                assert!(matches!(&xs[0], Proposition::And(ys) if matches!(ys[0], Proposition::Not(_))));
                assert!(matches!(&xs[1], Proposition::Atom(a) if a.lhs.accessor == Accessor::Labels));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn return_forms() {
        let q = parse_query(
            "MATCH (a)-[r]->(b) RETURN a, a.name, labels(a), type(r), nodes(), relationships() LIMIT 5",
        )
        .unwrap();
        assert_eq!(q.return_clause.limit, Some(5));
        match q.return_clause.kind {
            ReturnKind::Projection(items) => assert_eq!(items.len(), 6),
            _ => panic!(),
        }
    }

    #[test]
    fn errors_carry_positions() {
        let cases = [
            ("MATCH (a) RETURN a", "relationship"),
            ("MATCH (a)-[r]->(b)", "missing RETURN"),
            ("MATCH (a)-[r]->(b) WHERE z.x = 1 RETURN a", "not defined"),
            ("MATCH (a)-[r]->(b) RETURN a LIMIT 0", "positive"),
            ("MATCH (a)-[r]->(b) WHERE labels(r) = 'x' RETURN a", "needs a node"),
            ("MATCH (a)-[r]->(b) WHERE type(a) = 'x' RETURN a", "needs a relationship"),
            ("MATCH (a)-[r]->(b), (b)-[r]->(a) RETURN a", "bound twice"),
            ("MATCH (a)-[a]->(b) RETURN a", "different kind"),
            ("MATCH (a)<-[r]->(b) RETURN a", "both ways"),
            ("MATCH (a)-[r]->(b), (c) RETURN a", "not part of any relationship"),
            ("MATCH (a)-[r]->(b) WHERE 1 = 2 RETURN a", "at least one variable"),
        ];
        for (q, needle) in cases {
            let e = parse_query(q).unwrap_err();
            assert!(e.message.contains(needle), "{q}: {e}");
            assert!(e.line >= 1 && e.column >= 1);
        }
        let e = parse_query("MATCH (a)-[r]->(b)\nWHERE z.x = 1 RETURN a").unwrap_err();
        assert_eq!((e.line, e.column), (2, 7));
    }

    #[test]
    fn display_round_trips() {
        let src = "MATCH (a:P {x: -2})-[r:T {w: 1.5}]->(b), (b)<-[s]-(c:`odd name`), (c)-[t]-(a) \
                   WHERE (a.x >= 3 OR NOT b.n STARTS WITH 'q') AND type(s) = 'U' \
                   RETURN a.x, nodes() LIMIT 2";
        let q = parse_query(src).unwrap();
        let again = parse_query(&q.to_string()).unwrap();
        assert_eq!(q, again);
    }

    #[test]
    fn keywords_are_case_insensitive() {
        assert!(parse_query("MaTcH (a)-[r]->(b) wHeRe a.x StArTs WiTh 'a' ReTuRn CoUnT(*)").is_ok());
    }
}
