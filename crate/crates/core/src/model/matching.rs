//! Homomorphism search for constraint bodies over an append-only fact index.
//!
//! Facts receive increasing ids as they are added, so "old", "delta" and
//! "all" facts of a semi-naive round are id ranges.

use std::collections::HashMap;
use std::ops::{ControlFlow, Range};
use std::sync::Arc;

use super::constraint::UniversalConstraint;
use super::formula::{Atom, CmpOp, EvalError, Guard, Term};
use super::schema::{Fact, Instance};
use super::value::Constant;

#[derive(Debug, Clone)]
pub(crate) enum Slot {
    Var(usize),
    Const(Constant),
}

#[derive(Debug, Clone)]
pub(crate) struct SlotAtom {
    pub rel: Arc<str>,
    pub terms: Vec<Slot>,
}

impl SlotAtom {
    pub fn ground(&self, b: &[Option<Constant>]) -> Fact {
        let args = self
            .terms
            .iter()
            .map(|s| match s {
                Slot::Const(c) => c.clone(),
                Slot::Var(v) => b[*v].clone().expect("safe constraint binds every rhs variable"),
            })
            .collect();
        Fact { rel: self.rel.clone(), args }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum SlotGuard {
    True,
    False,
    Cmp(Slot, CmpOp, Slot),
    And(Vec<SlotGuard>),
    Or(Vec<SlotGuard>),
    Not(Box<SlotGuard>),
}

impl SlotGuard {
    fn eval(&self, b: &[Option<Constant>]) -> Result<bool, EvalError> {
        let get = |s: &Slot| -> Result<Constant, EvalError> {
            match s {
                Slot::Const(c) => Ok(c.clone()),
                Slot::Var(v) => b[*v].clone().ok_or_else(|| EvalError::Unbound(format!("#{v}"))),
            }
        };
        Ok(match self {
            SlotGuard::True => true,
            SlotGuard::False => false,
            SlotGuard::Cmp(l, op, r) => op.apply(&get(l)?, &get(r)?)?,
            SlotGuard::And(gs) => {
                for g in gs {
                    if !g.eval(b)? {
                        return Ok(false);
                    }
                }
                true
            }
            SlotGuard::Or(gs) => {
                for g in gs {
                    if g.eval(b)? {
                        return Ok(true);
                    }
                }
                false
            }
            SlotGuard::Not(g) => !g.eval(b)?,
        })
    }
}

/// A constraint with variables replaced by binding slots.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub nvars: usize,
    pub lhs: Vec<SlotAtom>,
    pub rhs: Vec<SlotAtom>,
    pub guard: SlotGuard,
}

impl Compiled {
    pub fn new(c: &UniversalConstraint) -> Self {
        let mut vars: HashMap<Arc<str>, usize> = HashMap::new();
        let mut slot = |t: &Term| match t {
            Term::Const(c) => Slot::Const(c.clone()),
            Term::Var(v) => {
                let n = vars.len();
                Slot::Var(*vars.entry(v.clone()).or_insert(n))
            }
        };
        let mut atom = |a: &Atom| SlotAtom { rel: a.rel.clone(), terms: a.terms.iter().map(&mut slot).collect() };
        let lhs: Vec<SlotAtom> = c.lhs.iter().map(&mut atom).collect();
        let rhs: Vec<SlotAtom> = c.rhs.iter().map(&mut atom).collect();
        fn guard(g: &Guard, slot: &mut dyn FnMut(&Term) -> Slot) -> SlotGuard {
            match g {
                Guard::True => SlotGuard::True,
                Guard::False => SlotGuard::False,
                Guard::Cmp(l, op, r) => SlotGuard::Cmp(slot(l), *op, slot(r)),
                Guard::And(gs) => SlotGuard::And(gs.iter().map(|g| guard(g, slot)).collect()),
                Guard::Or(gs) => SlotGuard::Or(gs.iter().map(|g| guard(g, slot)).collect()),
                Guard::Not(g) => SlotGuard::Not(Box::new(guard(g, slot))),
            }
        }
        let guard = guard(&c.guard, &mut slot);
        Compiled { nvars: vars.len(), lhs, rhs, guard }
    }

    /// Guard truth for a complete binding. Ill-typed comparisons (which
    /// schema checking rules out) make the guard fail rather than fire.
    pub fn guard_holds(&self, b: &[Option<Constant>]) -> bool {
        self.guard.eval(b).unwrap_or(false)
    }
}

/// Append-only store of facts with per-relation and per-position indices.
#[derive(Debug, Default, Clone)]
pub(crate) struct FactIndex {
    facts: Vec<Fact>,
    ids: HashMap<Fact, usize>,
    by_rel: HashMap<Arc<str>, Vec<usize>>,
    by_pos: HashMap<Arc<str>, Vec<HashMap<Constant, Vec<usize>>>>,
}

impl FactIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_instance(i: &Instance) -> Self {
        let mut idx = Self::new();
        for f in i {
            idx.insert(f.clone());
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn fact(&self, id: usize) -> &Fact {
        &self.facts[id]
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn contains(&self, f: &Fact) -> bool {
        self.ids.contains_key(f)
    }

    /// Returns the id and whether the fact was new.
    pub fn insert(&mut self, f: Fact) -> (usize, bool) {
        if let Some(&id) = self.ids.get(&f) {
            return (id, false);
        }
        let id = self.facts.len();
        self.by_rel.entry(f.rel.clone()).or_default().push(id);
        let cols = self.by_pos.entry(f.rel.clone()).or_default();
        if cols.len() < f.args.len() {
            cols.resize_with(f.args.len(), HashMap::new);
        }
        for (p, c) in f.args.iter().enumerate() {
            cols[p].entry(c.clone()).or_default().push(id);
        }
        self.ids.insert(f.clone(), id);
        self.facts.push(f);
        (id, true)
    }

    fn candidates(&self, atom: &SlotAtom, b: &[Option<Constant>]) -> &[usize] {
        let mut best: Option<&[usize]> = None;
        if let Some(cols) = self.by_pos.get(&atom.rel) {
            for (p, s) in atom.terms.iter().enumerate() {
                let value = match s {
                    Slot::Const(c) => Some(c),
                    Slot::Var(v) => b[*v].as_ref(),
                };
                if let Some(c) = value {
                    let list = cols.get(p).and_then(|m| m.get(c)).map(Vec::as_slice).unwrap_or(&[]);
                    if best.is_none_or(|cur| list.len() < cur.len()) {
                        best = Some(list);
                    }
                }
            }
        }
        best.unwrap_or_else(|| self.by_rel.get(&atom.rel).map(Vec::as_slice).unwrap_or(&[]))
    }
}

/// Enumerate every binding of `c.lhs` to facts of `idx` whose guard holds,
/// where lhs atom `k` may only use fact ids in `ranges[k]`. The callback
/// receives the binding and the matched fact ids in lhs order.
pub(crate) fn for_each_match<F>(c: &Compiled, idx: &FactIndex, ranges: &[Range<usize>], mut f: F) -> ControlFlow<()>
where
    F: FnMut(&[Option<Constant>], &[usize]) -> ControlFlow<()>,
{
    debug_assert_eq!(ranges.len(), c.lhs.len());
    if ranges.iter().any(|r| r.is_empty()) {
        return ControlFlow::Continue(());
    }
    // Evaluate the most restricted atom first.
    let mut order: Vec<usize> = (0..c.lhs.len()).collect();
    order.sort_by_key(|&k| ranges[k].len());
    let mut binding = vec![None; c.nvars];
    let mut ids = vec![usize::MAX; c.lhs.len()];
    search(c, idx, ranges, &order, 0, &mut binding, &mut ids, &mut f)
}

#[allow(clippy::too_many_arguments)]
fn search<F>(
    c: &Compiled,
    idx: &FactIndex,
    ranges: &[Range<usize>],
    order: &[usize],
    depth: usize,
    binding: &mut Vec<Option<Constant>>,
    ids: &mut Vec<usize>,
    f: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[Option<Constant>], &[usize]) -> ControlFlow<()>,
{
    if depth == order.len() {
        if c.guard_holds(binding) {
            return f(binding, ids);
        }
        return ControlFlow::Continue(());
    }
    let k = order[depth];
    let atom = &c.lhs[k];
    let range = &ranges[k];
    let cands = idx.candidates(atom, binding);
    let lo = cands.partition_point(|&id| id < range.start);
    let hi = cands.partition_point(|&id| id < range.end);
    let mut newly: Vec<usize> = Vec::with_capacity(atom.terms.len());
    for &id in &cands[lo..hi] {
        let fact = idx.fact(id);
        if fact.args.len() != atom.terms.len() {
            continue;
        }
        newly.clear();
        let mut ok = true;
        for (s, val) in atom.terms.iter().zip(&fact.args) {
            match s {
                Slot::Const(cst) => {
                    if cst != val {
                        ok = false;
                        break;
                    }
                }
                Slot::Var(v) => match &binding[*v] {
                    Some(bound) => {
                        if bound != val {
                            ok = false;
                            break;
                        }
                    }
                    None => {
                        binding[*v] = Some(val.clone());
                        newly.push(*v);
                    }
                },
            }
        }
        if ok {
            ids[k] = id;
            let flow = search(c, idx, ranges, order, depth + 1, binding, ids, f);
            if flow.is_break() {
                for &v in &newly {
                    binding[v] = None;
                }
                return flow;
            }
        }
        for &v in &newly {
            binding[v] = None;
        }
    }
    ControlFlow::Continue(())
}

/// Whether `i` satisfies every constraint.
///
/// Only matches of lhs atoms against facts of `i` are considered; safety
/// makes the rhs ground under each such match.
pub fn satisfies(i: &Instance, constraints: &[UniversalConstraint]) -> bool {
    if constraints.is_empty() {
        return true;
    }
    let idx = FactIndex::from_instance(i);
    constraints.iter().all(|c| first_violation_in(&idx, &Compiled::new(c)).is_none())
}

/// Ground lhs facts of the first violation of `c` in `i`, if any.
pub fn find_violation(i: &Instance, c: &UniversalConstraint) -> Option<Vec<Fact>> {
    let idx = FactIndex::from_instance(i);
    first_violation_in(&idx, &Compiled::new(c))
}

fn first_violation_in(idx: &FactIndex, c: &Compiled) -> Option<Vec<Fact>> {
    let ranges = vec![0..idx.len(); c.lhs.len()];
    let mut found = None;
    let _ = for_each_match(c, idx, &ranges, |b, ids| {
        if c.rhs.iter().any(|a| idx.contains(&a.ground(b))) {
            ControlFlow::Continue(())
        } else {
            found = Some(ids.iter().map(|&id| idx.fact(id).clone()).collect());
            ControlFlow::Break(())
        }
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fact;

    fn cascade() -> UniversalConstraint {
        UniversalConstraint::new(
            vec![Atom::vars("R", &["x", "y"]), Atom::vars("P", &["x"])],
            Guard::True,
            vec![Atom::vars("P", &["y"])],
        )
        .unwrap()
    }

    #[test]
    fn empty_instance_satisfies_everything() {
        assert!(satisfies(&Instance::new(), &[cascade()]));
        let i: Instance = [fact!("R", 1, 2)].into_iter().collect();
        assert!(satisfies(&i, &[]));
    }

    #[test]
    fn cascade_closure_is_consistent() {
        let i: Instance =
            [fact!("R", 1, 2), fact!("R", 2, 3), fact!("P", 1), fact!("P", 2), fact!("P", 3)].into_iter().collect();
        assert!(satisfies(&i, &[cascade()]));
        let j: Instance = [fact!("R", 1, 2), fact!("R", 2, 3), fact!("P", 1)].into_iter().collect();
        assert!(!satisfies(&j, &[cascade()]));
        assert_eq!(find_violation(&j, &cascade()), Some(vec![fact!("R", 1, 2), fact!("P", 1)]));
    }

    #[test]
    fn constants_in_atoms_restrict_matches() {
        let c = UniversalConstraint::new(
            vec![Atom::new("R", vec![Term::var("x"), Term::Const(Constant::int(7))])],
            Guard::True,
            vec![],
        )
        .unwrap();
        let ok: Instance = [fact!("R", 1, 2)].into_iter().collect();
        let bad: Instance = [fact!("R", 1, 7)].into_iter().collect();
        assert!(satisfies(&ok, std::slice::from_ref(&c)));
        assert!(!satisfies(&bad, &[c]));
    }

    #[test]
    fn repeated_variables_join() {
        let c = UniversalConstraint::new(vec![Atom::vars("R", &["x", "x"])], Guard::True, vec![]).unwrap();
        let ok: Instance = [fact!("R", 1, 2)].into_iter().collect();
        let bad: Instance = [fact!("R", 3, 3)].into_iter().collect();
        assert!(satisfies(&ok, std::slice::from_ref(&c)));
        assert!(!satisfies(&bad, &[c]));
    }
}
