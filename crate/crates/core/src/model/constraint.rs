use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use super::formula::{Atom, CmpOp, Guard, Term};
use super::schema::{Schema, SchemaError};
use super::value::AttrType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("constraint has no lhs atoms")]
    Empty,
    #[error("variable {0} does not occur in any lhs atom")]
    Unsafe(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("variable {var} is used both as {first} and {second}")]
    VariableType { var: String, first: AttrType, second: AttrType },
    #[error("{0}")]
    GuardType(String),
    #[error("position {position} is out of range for {relation}")]
    Position { relation: String, position: usize },
    #[error("join dependency components of {0} do not cover all attributes")]
    JdCoverage(String),
}

/// A join dependency `R ⋈ [X1, ..., Xk]`. Components hold 0-based
/// attribute positions, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct JdSpec {
    pub relation: Arc<str>,
    pub components: Vec<Vec<usize>>,
}

impl JdSpec {
    /// The JD `R ⋈ [attrs(R)]` every relation satisfies.
    pub fn trivial(relation: &str, arity: usize) -> Self {
        JdSpec { relation: Arc::from(relation), components: vec![(0..arity).collect()] }
    }

    pub fn is_trivial(&self, arity: usize) -> bool {
        self.components.iter().any(|c| c.len() == arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintKind {
    /// No rhs atoms.
    Denial,
    /// Exactly one rhs atom, not a join dependency encoding.
    FullTgd,
    /// The canonical full-TGD encoding of a join dependency.
    Jd(JdSpec),
    /// Two or more rhs atoms.
    Universal,
}

impl ConstraintKind {
    pub fn name(&self) -> &'static str {
        match self {
            ConstraintKind::Denial => "denial",
            ConstraintKind::FullTgd => "full-tgd",
            ConstraintKind::Jd(_) => "jd",
            ConstraintKind::Universal => "universal",
        }
    }

    /// Denial constraints, full TGDs and JDs: the class handled by repair
    /// checking and construction.
    pub fn is_tgd_or_denial(&self) -> bool {
        !matches!(self, ConstraintKind::Universal)
    }
}

/// How a constraint was written, so that serialization can reproduce it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sugar {
    Explicit,
    /// `fd R: X -> Y` with 0-based positions.
    Fd { lhs: Vec<usize>, rhs: Vec<usize> },
    /// `jd R: [..][..]`.
    Jd,
}

/// `lhs atoms ∧ guard → rhs disjunction`; an empty rhs means `false`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UniversalConstraint {
    pub lhs: Vec<Atom>,
    pub guard: Guard,
    pub rhs: Vec<Atom>,
    pub kind: ConstraintKind,
    pub sugar: Sugar,
}

impl UniversalConstraint {
    /// Build and classify a constraint, enforcing safety and a non-empty
    /// lhs (an empty instance satisfies every constraint).
    pub fn new(lhs: Vec<Atom>, guard: Guard, rhs: Vec<Atom>) -> Result<Self, ConstraintError> {
        if lhs.is_empty() {
            return Err(ConstraintError::Empty);
        }
        let bound: BTreeSet<&Arc<str>> = lhs.iter().flat_map(Atom::variables).collect();
        for v in rhs.iter().flat_map(Atom::variables) {
            if !bound.contains(v) {
                return Err(ConstraintError::Unsafe(v.to_string()));
            }
        }
        for v in guard.variables() {
            if !bound.contains(&v) {
                return Err(ConstraintError::Unsafe(v.to_string()));
            }
        }
        let kind = classify(&lhs, &guard, &rhs);
        Ok(UniversalConstraint { lhs, guard, rhs, kind, sugar: Sugar::Explicit })
    }

    /// The denial encoding of `R: X -> Y` (0-based positions).
    pub fn fd(relation: &str, arity: usize, lhs: &[usize], rhs: &[usize]) -> Result<Self, ConstraintError> {
        for &p in lhs.iter().chain(rhs) {
            if p >= arity {
                return Err(ConstraintError::Position { relation: relation.to_string(), position: p + 1 });
            }
        }
        let x: Vec<Term> = (0..arity).map(|a| Term::var(&format!("x{}", a + 1))).collect();
        let u: Vec<Term> = (0..arity)
            .map(|a| if lhs.contains(&a) { x[a].clone() } else { Term::var(&format!("u{}", a + 1)) })
            .collect();
        let rhs_set: BTreeSet<usize> = rhs.iter().copied().collect();
        let mut diffs: Vec<Guard> =
            rhs_set.iter().map(|&a| Guard::cmp(x[a].clone(), CmpOp::Ne, u[a].clone())).collect();
        let guard = if diffs.len() == 1 { diffs.pop().unwrap() } else { Guard::Or(diffs) };
        let mut c = UniversalConstraint::new(
            vec![Atom::new(relation, x), Atom::new(relation, u)],
            guard,
            Vec::new(),
        )?;
        let mut lhs_sorted: Vec<usize> = lhs.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        lhs_sorted.dedup();
        c.sugar = Sugar::Fd { lhs: lhs_sorted, rhs: rhs_set.into_iter().collect() };
        Ok(c)
    }

    /// The full-TGD encoding of `R ⋈ [X1, ..., Xk]` (0-based positions).
    ///
    /// Atom `i` shares the rhs variable at every position of `Xi` and has a
    /// fresh variable elsewhere.
    pub fn jd(relation: &str, arity: usize, components: &[Vec<usize>]) -> Result<Self, ConstraintError> {
        let mut covered = BTreeSet::new();
        for comp in components {
            for &p in comp {
                if p >= arity {
                    return Err(ConstraintError::Position { relation: relation.to_string(), position: p + 1 });
                }
                covered.insert(p);
            }
        }
        if covered.len() != arity {
            return Err(ConstraintError::JdCoverage(relation.to_string()));
        }
        let y: Vec<Term> = (0..arity).map(|a| Term::var(&format!("y{}", a + 1))).collect();
        let lhs = components
            .iter()
            .enumerate()
            .map(|(i, comp)| {
                let terms = (0..arity)
                    .map(|a| {
                        if comp.contains(&a) {
                            y[a].clone()
                        } else {
                            Term::var(&format!("z{}_{}", i + 1, a + 1))
                        }
                    })
                    .collect();
                Atom::new(relation, terms)
            })
            .collect();
        let mut c = UniversalConstraint::new(lhs, Guard::True, vec![Atom::new(relation, y)])?;
        c.sugar = Sugar::Jd;
        Ok(c)
    }

    pub fn is_denial(&self) -> bool {
        matches!(self.kind, ConstraintKind::Denial)
    }

    pub fn jd_spec(&self) -> Option<&JdSpec> {
        match &self.kind {
            ConstraintKind::Jd(s) => Some(s),
            _ => None,
        }
    }

    /// Check relations, arities, constant types, consistent variable typing
    /// and guard typing against a schema.
    pub fn check(&self, schema: &Schema) -> Result<(), ConstraintError> {
        let mut types: BTreeMap<Arc<str>, AttrType> = BTreeMap::new();
        for atom in self.lhs.iter().chain(&self.rhs) {
            let rel = schema
                .relation(&atom.rel)
                .ok_or_else(|| SchemaError::UnknownRelation(atom.rel.to_string()))?;
            if rel.arity() != atom.terms.len() {
                return Err(SchemaError::Arity {
                    relation: atom.rel.to_string(),
                    expected: rel.arity(),
                    found: atom.terms.len(),
                }
                .into());
            }
            for (i, t) in atom.terms.iter().enumerate() {
                let want = rel.attr_type(i);
                match t {
                    Term::Const(c) if c.attr_type() != want => {
                        return Err(SchemaError::Type {
                            relation: atom.rel.to_string(),
                            position: i + 1,
                            expected: want,
                            found: c.to_string(),
                        }
                        .into())
                    }
                    Term::Const(_) => {}
                    Term::Var(v) => match types.get(v) {
                        Some(&have) if have != want => {
                            return Err(ConstraintError::VariableType {
                                var: v.to_string(),
                                first: have,
                                second: want,
                            })
                        }
                        Some(_) => {}
                        None => {
                            types.insert(v.clone(), want);
                        }
                    },
                }
            }
        }
        self.guard.check_types(&types).map_err(ConstraintError::GuardType)
    }
}

/// Recognise the canonical JD encoding up to variable renaming: rhs of
/// distinct variables, trivial guard, every lhs position either repeats
/// the rhs variable of the same position or holds a variable used nowhere
/// else.
fn classify(lhs: &[Atom], guard: &Guard, rhs: &[Atom]) -> ConstraintKind {
    match rhs.len() {
        0 => ConstraintKind::Denial,
        1 => match detect_jd(lhs, guard, &rhs[0]) {
            Some(spec) => ConstraintKind::Jd(spec),
            None => ConstraintKind::FullTgd,
        },
        _ => ConstraintKind::Universal,
    }
}

fn detect_jd(lhs: &[Atom], guard: &Guard, head: &Atom) -> Option<JdSpec> {
    if !guard.is_true() || lhs.is_empty() {
        return None;
    }
    let arity = head.terms.len();
    if lhs.iter().any(|a| a.rel != head.rel || a.terms.len() != arity) {
        return None;
    }
    let head_vars: Vec<&Arc<str>> = head.terms.iter().map(Term::as_var).collect::<Option<_>>()?;
    let distinct: BTreeSet<&Arc<str>> = head_vars.iter().copied().collect();
    if distinct.len() != arity {
        return None;
    }
    let mut occurrences: BTreeMap<&Arc<str>, usize> = BTreeMap::new();
    for a in lhs {
        for t in &a.terms {
            *occurrences.entry(t.as_var()?).or_default() += 1;
        }
    }
    let mut components = Vec::with_capacity(lhs.len());
    for a in lhs {
        let mut comp = Vec::new();
        for (pos, t) in a.terms.iter().enumerate() {
            let v = t.as_var()?;
            if v == head_vars[pos] {
                comp.push(pos);
            } else if distinct.contains(v) || occurrences[v] != 1 {
                return None;
            }
        }
        components.push(comp);
    }
    Some(JdSpec { relation: head.rel.clone(), components })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        let tgd = UniversalConstraint::new(
            vec![Atom::vars("R", &["x", "y"]), Atom::vars("P", &["x"])],
            Guard::True,
            vec![Atom::vars("P", &["y"])],
        )
        .unwrap();
        assert_eq!(tgd.kind, ConstraintKind::FullTgd);
        let fd = UniversalConstraint::fd("R", 2, &[0], &[1]).unwrap();
        assert_eq!(fd.kind, ConstraintKind::Denial);
        assert_eq!(fd.lhs.len(), 2);
    }

    #[test]
    fn jd_encoding_is_recognised() {
        let jd = UniversalConstraint::jd("R", 3, &[vec![0, 1], vec![0, 2]]).unwrap();
        assert_eq!(
            jd.kind,
            ConstraintKind::Jd(JdSpec { relation: Arc::from("R"), components: vec![vec![0, 1], vec![0, 2]] })
        );
        // Same dependency written with the variables of the unfolded-rule
        // example: R(x,y,z,s), R(x',y,z',s'), R(x'',y'',z',s'') -> R(x,y,z',s'').
        let c = UniversalConstraint::new(
            vec![
                Atom::vars("R", &["x", "y", "z", "s"]),
                Atom::vars("R", &["x1", "y", "z1", "s1"]),
                Atom::vars("R", &["x2", "y2", "z1", "s2"]),
            ],
            Guard::True,
            vec![Atom::vars("R", &["x", "y", "z1", "s2"])],
        )
        .unwrap();
        assert_eq!(c.jd_spec().unwrap().components, vec![vec![0, 1], vec![1, 2], vec![2, 3]]);
    }

    #[test]
    fn non_canonical_tgd_is_not_a_jd() {
        // A shared variable in a non-rhs position.
        let c = UniversalConstraint::new(
            vec![Atom::vars("R", &["x", "z"]), Atom::vars("R", &["z", "y"])],
            Guard::True,
            vec![Atom::vars("R", &["x", "y"])],
        )
        .unwrap();
        assert_eq!(c.kind, ConstraintKind::FullTgd);
    }

    #[test]
    fn safety_and_emptiness() {
        let e = UniversalConstraint::new(vec![Atom::vars("R", &["x"])], Guard::True, vec![Atom::vars("P", &["y"])]);
        assert!(matches!(e, Err(ConstraintError::Unsafe(v)) if v == "y"));
        assert!(matches!(UniversalConstraint::new(vec![], Guard::True, vec![]), Err(ConstraintError::Empty)));
        assert!(matches!(
            UniversalConstraint::jd("R", 3, &[vec![0, 1]]),
            Err(ConstraintError::JdCoverage(_))
        ));
    }
}
