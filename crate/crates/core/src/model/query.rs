use std::collections::BTreeSet;

use super::schema::{Fact, Instance};

/// A closed, ground, quantifier-free query. Built-in comparisons are folded
/// to `True`/`False` when the query is parsed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Query {
    True,
    False,
    Atom(Fact),
    Not(Box<Query>),
    And(Vec<Query>),
    Or(Vec<Query>),
}

impl Query {
    pub fn atom(f: Fact) -> Self {
        Query::Atom(f)
    }

    pub fn not(q: Query) -> Self {
        Query::Not(Box::new(q))
    }

    pub fn facts(&self) -> BTreeSet<&Fact> {
        let mut out = BTreeSet::new();
        fn go<'a>(q: &'a Query, out: &mut BTreeSet<&'a Fact>) {
            match q {
                Query::True | Query::False => {}
                Query::Atom(f) => {
                    out.insert(f);
                }
                Query::Not(q) => go(q, out),
                Query::And(qs) | Query::Or(qs) => qs.iter().for_each(|q| go(q, out)),
            }
        }
        go(self, &mut out);
        out
    }
}

/// Evaluate a closed query: an atom holds iff its fact is in the instance.
pub fn eval_query(q: &Query, i: &Instance) -> bool {
    match q {
        Query::True => true,
        Query::False => false,
        Query::Atom(f) => i.contains(f),
        Query::Not(q) => !eval_query(q, i),
        Query::And(qs) => qs.iter().all(|q| eval_query(q, i)),
        Query::Or(qs) => qs.iter().any(|q| eval_query(q, i)),
    }
}
