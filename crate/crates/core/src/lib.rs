//! Repairs and consistent query answers for relational databases under
//! universal integrity constraints.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the typed relational model: constants, facts, instances,
//!   constraints, queries and their evaluation.
//! * [`parser`] reads and writes the text formats for all of the above.
//! * [`grounding`] computes the hull of an instance, its ground rules and the
//!   extended conflict hypergraph.
//! * [`consequence`] is the immediate-consequence operator over ground full
//!   TGD rules and its closure.
//! * [`repair`] checks candidate repairs and constructs repairs for full TGDs
//!   and denial constraints.
//! * [`cqa`] answers closed quantifier-free queries consistently for denial
//!   constraints, join dependencies and acyclic full TGDs.
//! * [`oracle`] is the brute-force ground truth plus instance generators.

pub mod consequence;
pub mod cqa;
pub mod grounding;
pub mod model;
pub mod oracle;
pub mod parser;
pub mod repair;

pub use model::{
    closer_than, eval_builtin, eval_query, satisfies, symmetric_difference, AttrType, Atom,
    Constant, ConstraintKind, DeltaOrder, Fact, Guard, Instance, JdSpec, Literal, Query, Schema,
    Term, UniversalConstraint,
};
