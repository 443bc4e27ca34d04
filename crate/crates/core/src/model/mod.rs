//! Typed relational model: constants, schemas, facts, instances,
//! constraints, queries and their evaluation.

mod constraint;
mod formula;
pub(crate) mod matching;
mod order;
mod query;
mod schema;
mod value;

pub use constraint::{ConstraintError, ConstraintKind, JdSpec, Sugar, UniversalConstraint};
pub use formula::{eval_builtin, Atom, Binding, CmpOp, EvalError, Guard, Term};
pub use matching::{find_violation, satisfies};
pub use order::{closer_than, symmetric_difference, DeltaOrder};
pub use query::{eval_query, Query};
pub use schema::{Fact, Instance, Literal, RelationSchema, Schema, SchemaError};
pub use value::{AttrType, Constant};

pub(crate) use value::quote_symbol;
