use std::collections::{btree_set, BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use super::value::{AttrType, Constant};

/// Typing failures shared by the parser and programmatic construction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("relation {0} is declared twice")]
    DuplicateRelation(String),
    #[error("relation {0} has arity 0")]
    ZeroArity(String),
    #[error("attribute {attr} is declared twice in relation {relation}")]
    DuplicateAttribute { relation: String, attr: String },
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("{relation} expects {expected} arguments, got {found}")]
    Arity { relation: String, expected: usize, found: usize },
    #[error("argument {position} of {relation} must be {expected}, got {found}")]
    Type { relation: String, position: usize, expected: AttrType, found: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSchema {
    pub name: Arc<str>,
    pub attrs: Vec<(Arc<str>, AttrType)>,
}

impl RelationSchema {
    pub fn arity(&self) -> usize {
        self.attrs.len()
    }

    pub fn attr_type(&self, pos: usize) -> AttrType {
        self.attrs[pos].1
    }

    pub fn position_of(&self, attr: &str) -> Option<usize> {
        self.attrs.iter().position(|(n, _)| &**n == attr)
    }
}

/// Relation names with their typed attribute lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schema {
    relations: BTreeMap<Arc<str>, RelationSchema>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_relation(&mut self, name: &str, attrs: Vec<(&str, AttrType)>) -> Result<(), SchemaError> {
        if self.relations.contains_key(name) {
            return Err(SchemaError::DuplicateRelation(name.to_string()));
        }
        if attrs.is_empty() {
            return Err(SchemaError::ZeroArity(name.to_string()));
        }
        let mut seen = BTreeSet::new();
        for (a, _) in &attrs {
            if !seen.insert(*a) {
                return Err(SchemaError::DuplicateAttribute {
                    relation: name.to_string(),
                    attr: a.to_string(),
                });
            }
        }
        let name: Arc<str> = Arc::from(name);
        let attrs = attrs.into_iter().map(|(a, t)| (Arc::from(a), t)).collect();
        self.relations.insert(name.clone(), RelationSchema { name, attrs });
        Ok(())
    }

    /// Builder-style variant of [`Schema::add_relation`] for tests and generators.
    pub fn with(mut self, name: &str, types: &[AttrType]) -> Self {
        let names: Vec<String> = (0..types.len()).map(|i| format!("a{}", i + 1)).collect();
        let attrs = names.iter().map(String::as_str).zip(types.iter().copied()).collect();
        self.add_relation(name, attrs).expect("valid relation declaration");
        self
    }

    pub fn relation(&self, name: &str) -> Option<&RelationSchema> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = &RelationSchema> {
        self.relations.values()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn check_fact(&self, fact: &Fact) -> Result<(), SchemaError> {
        let rel = self
            .relation(&fact.rel)
            .ok_or_else(|| SchemaError::UnknownRelation(fact.rel.to_string()))?;
        if rel.arity() != fact.args.len() {
            return Err(SchemaError::Arity {
                relation: fact.rel.to_string(),
                expected: rel.arity(),
                found: fact.args.len(),
            });
        }
        for (i, c) in fact.args.iter().enumerate() {
            if c.attr_type() != rel.attr_type(i) {
                return Err(SchemaError::Type {
                    relation: fact.rel.to_string(),
                    position: i + 1,
                    expected: rel.attr_type(i),
                    found: c.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn check_instance(&self, inst: &Instance) -> Result<(), SchemaError> {
        inst.iter().try_for_each(|f| self.check_fact(f))
    }
}

/// A ground atom. The derived order is the canonical fact order: relation
/// name first, then the tuple position by position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub rel: Arc<str>,
    pub args: Vec<Constant>,
}

impl Fact {
    pub fn new(rel: &str, args: Vec<Constant>) -> Self {
        Fact { rel: Arc::from(rel), args }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.rel)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for Fact {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Build a fact from integer arguments, e.g. `fact!("R", 1, 2)`.
#[macro_export]
macro_rules! fact {
    ($rel:expr $(, $arg:expr)* $(,)?) => {
        $crate::model::Fact::new($rel, vec![$($crate::model::Constant::from($arg)),*])
    };
}

/// A fact or its negation. Positive literals sort before negative ones of
/// the same fact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub fact: Fact,
    pub positive: bool,
}

impl Literal {
    pub fn pos(fact: Fact) -> Self {
        Literal { fact, positive: true }
    }

    pub fn neg(fact: Fact) -> Self {
        Literal { fact, positive: false }
    }

    pub fn negated(&self) -> Self {
        Literal { fact: self.fact.clone(), positive: !self.positive }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.fact)
        } else {
            write!(f, "not {}", self.fact)
        }
    }
}

impl Serialize for Literal {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// A finite set of facts, iterated in canonical order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Instance {
    facts: BTreeSet<Fact>,
}

impl Instance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, f: &Fact) -> bool {
        self.facts.contains(f)
    }

    /// Returns false when the fact was already present.
    pub fn insert(&mut self, f: Fact) -> bool {
        self.facts.insert(f)
    }

    pub fn remove(&mut self, f: &Fact) -> bool {
        self.facts.remove(f)
    }

    pub fn iter(&self) -> btree_set::Iter<'_, Fact> {
        self.facts.iter()
    }

    pub fn as_set(&self) -> &BTreeSet<Fact> {
        &self.facts
    }

    pub fn into_set(self) -> BTreeSet<Fact> {
        self.facts
    }

    pub fn is_subset(&self, other: &Instance) -> bool {
        self.facts.is_subset(&other.facts)
    }

    pub fn union(&self, other: &Instance) -> Instance {
        self.facts.union(&other.facts).cloned().collect()
    }

    pub fn intersection(&self, other: &Instance) -> Instance {
        self.facts.intersection(&other.facts).cloned().collect()
    }

    pub fn difference(&self, other: &Instance) -> Instance {
        self.facts.difference(&other.facts).cloned().collect()
    }

    pub fn is_disjoint(&self, other: &Instance) -> bool {
        self.facts.is_disjoint(&other.facts)
    }
}

impl From<BTreeSet<Fact>> for Instance {
    fn from(facts: BTreeSet<Fact>) -> Self {
        Instance { facts }
    }
}

impl FromIterator<Fact> for Instance {
    fn from_iter<T: IntoIterator<Item = Fact>>(iter: T) -> Self {
        Instance { facts: iter.into_iter().collect() }
    }
}

impl Extend<Fact> for Instance {
    fn extend<T: IntoIterator<Item = Fact>>(&mut self, iter: T) {
        self.facts.extend(iter)
    }
}

impl IntoIterator for Instance {
    type Item = Fact;
    type IntoIter = btree_set::IntoIter<Fact>;
    fn into_iter(self) -> Self::IntoIter {
        self.facts.into_iter()
    }
}

impl<'a> IntoIterator for &'a Instance {
    type Item = &'a Fact;
    type IntoIter = btree_set::Iter<'a, Fact>;
    fn into_iter(self) -> Self::IntoIter {
        self.facts.iter()
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, fact) in self.facts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{fact}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_is_relation_then_tuple() {
        let i: Instance = [fact!("R", 2, 3), fact!("P", 1), fact!("R", 1, 2)].into_iter().collect();
        let v: Vec<String> = i.iter().map(|f| f.to_string()).collect();
        assert_eq!(v, ["P(1)", "R(1,2)", "R(2,3)"]);
    }

    #[test]
    fn schema_rejects_bad_declarations() {
        let mut s = Schema::new();
        s.add_relation("R", vec![("a", AttrType::Symbol)]).unwrap();
        assert!(matches!(
            s.add_relation("R", vec![("a", AttrType::Symbol)]),
            Err(SchemaError::DuplicateRelation(_))
        ));
        assert!(matches!(s.add_relation("Z", vec![]), Err(SchemaError::ZeroArity(_))));
        assert!(matches!(
            s.add_relation("Q", vec![("a", AttrType::Symbol), ("a", AttrType::Rational)]),
            Err(SchemaError::DuplicateAttribute { .. })
        ));
    }

    #[test]
    fn fact_typing() {
        let s = Schema::new().with("R", &[AttrType::Rational, AttrType::Symbol]);
        assert!(s.check_fact(&Fact::new("R", vec![Constant::int(1), Constant::sym("a")])).is_ok());
        assert!(matches!(s.check_fact(&fact!("R", 1, 2)), Err(SchemaError::Type { position: 2, .. })));
        assert!(matches!(s.check_fact(&fact!("R", 1)), Err(SchemaError::Arity { .. })));
        assert!(matches!(s.check_fact(&fact!("S", 1)), Err(SchemaError::UnknownRelation(_))));
    }
}
