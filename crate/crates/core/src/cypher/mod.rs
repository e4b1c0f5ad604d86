//! The supported CYPHER subset: MATCH patterns, WHERE propositions and
//! RETURN projections. See `docs/cypher.ebnf` for the grammar.

pub mod ast;
mod compile;
mod dnf;
mod lexer;
mod output;
mod parser;

pub use ast::*;
pub use compile::{base_graph, classify_condition, compile, compile_branch, lower_literal, CompiledQuery};
pub use dnf::{conjunction_to_proposition, split_on_or, to_dnf, Conjunction};
pub use output::{evaluate_return, render_query, ReturnCollector, ReturnValue};
pub use parser::parse_query;
