//! Text formats for schemas, constraints, instances and queries.
//!
//! ```text
//! # schema
//! relation R(a: rat, b: rat)
//! relation NF(name: sym, diag: sym)
//!
//! # constraints: atoms and guards, then a disjunction of atoms or `false`
//! R(x, y), P(x) -> P(y)
//! NF(x, 'yes'), Parent(y1, x), Parent(y2, x), y1 != y2 -> NF(y1, 'yes') | NF(y2, 'yes')
//! fd R: 1 -> 2
//! jd CoffeeShop: [1,2][1,3]
//!
//! # instance
//! R(1, 2). P(1/3). NF(Steve, no). NF('Delaware Ave.', yes).
//!
//! # query
//! (Q(1) or not R(1,1,1)) and 1 < 2
//! ```
//!
//! In constraints bare identifiers are variables and symbols must be
//! quoted. In facts and queries a bare identifier in a `sym` position is a
//! symbol.

mod grammar;
mod lexer;
mod print;

use thiserror::Error;

use crate::model::{ConstraintError, Fact, Instance, Query, Schema, SchemaError, UniversalConstraint};

pub use print::{
    serialize_constraint, serialize_constraints, serialize_guard, serialize_instance, serialize_query,
    serialize_schema,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("free variable {0} in a closed query")]
    FreeVariable(String),
    #[error("{0}")]
    Type(String),
}

/// A failure with the 1-based position of the offending token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

const KEYWORDS: &[&str] = &["relation", "fd", "jd", "and", "or", "not", "true", "false", "sym", "rat"];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub fn parse_schema(text: &str) -> Result<Schema, ParseError> {
    grammar::Parser::new(text, None)?.schema()
}

pub fn parse_constraints(text: &str, schema: &Schema) -> Result<Vec<UniversalConstraint>, ParseError> {
    grammar::Parser::new(text, Some(schema))?.constraints()
}

pub fn parse_instance(text: &str, schema: &Schema) -> Result<Instance, ParseError> {
    parse_instance_with_warnings(text, schema).map(|(i, _)| i)
}

/// Like [`parse_instance`], also reporting facts listed more than once.
pub fn parse_instance_with_warnings(text: &str, schema: &Schema) -> Result<(Instance, Vec<String>), ParseError> {
    grammar::Parser::new(text, Some(schema))?.instance()
}

/// Facts in the order written, duplicates included; for fact orders.
pub fn parse_fact_list(text: &str, schema: &Schema) -> Result<Vec<Fact>, ParseError> {
    Ok(grammar::Parser::new(text, Some(schema))?.fact_list()?.into_iter().map(|(_, _, f)| f).collect())
}

pub fn parse_query(text: &str, schema: &Schema) -> Result<Query, ParseError> {
    grammar::Parser::new(text, Some(schema))?.query()
}

#[cfg(test)]
mod tests;
