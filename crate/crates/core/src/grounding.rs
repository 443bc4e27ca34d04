//! Hull, ground rules and the extended conflict hypergraph.
//!
//! A grounding whose rhs repeats one of its lhs facts yields a literal set
//! containing both `P(t)` and `¬P(t)`. Such a rule is satisfied by every
//! instance, so it is left out of the hull closure, the rule set and the
//! hyperedges.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::ops::ControlFlow;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::model::matching::{for_each_match, Compiled, FactIndex};
use crate::model::{ConstraintKind, Fact, Instance, Literal, UniversalConstraint};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("{0} is not a vertex of the hypergraph")]
    NotAVertex(Literal),
    #[error("{0} is not a positive fact of the hull")]
    OutsideHull(Fact),
}

/// Positive facts and negated facts reachable from an instance through
/// conflicts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Hull {
    positive: Instance,
    negative: Instance,
}

impl Hull {
    pub fn positive(&self) -> &Instance {
        &self.positive
    }

    /// Facts `P(t)` such that `¬P(t)` is in the hull.
    pub fn negative(&self) -> &Instance {
        &self.negative
    }

    pub fn contains(&self, l: &Literal) -> bool {
        if l.positive {
            self.positive.contains(&l.fact)
        } else {
            self.negative.contains(&l.fact)
        }
    }

    /// All literals in canonical order (a positive literal precedes its
    /// negation).
    pub fn literals(&self) -> Vec<Literal> {
        let mut out: Vec<Literal> = self
            .positive
            .iter()
            .map(|f| Literal::pos(f.clone()))
            .chain(self.negative.iter().map(|f| Literal::neg(f.clone())))
            .collect();
        out.sort();
        out
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty()
    }
}

impl fmt::Display for Hull {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.literals() {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

/// `lhs → rhs` over concrete facts; an empty rhs reads `false`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GroundRule {
    pub lhs: BTreeSet<Fact>,
    pub rhs: BTreeSet<Fact>,
    /// Index of the first constraint producing this rule.
    pub origin: usize,
    /// For JD rules: the lhs as a bag in atom order, the canonically least
    /// one among the groundings producing this rule.
    pub unfolded: Option<Vec<Fact>>,
}

impl GroundRule {
    pub fn is_denial(&self) -> bool {
        self.rhs.is_empty()
    }

    /// The conflict hyperedge `lhs ∪ ¬rhs`.
    pub fn literals(&self) -> BTreeSet<Literal> {
        self.lhs
            .iter()
            .map(|f| Literal::pos(f.clone()))
            .chain(self.rhs.iter().map(|f| Literal::neg(f.clone())))
            .collect()
    }

    pub fn satisfied_by(&self, j: &Instance) -> bool {
        !self.lhs.iter().all(|f| j.contains(f)) || self.rhs.iter().any(|f| j.contains(f))
    }
}

impl fmt::Display for GroundRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs: Vec<String> = self.lhs.iter().map(Fact::to_string).collect();
        let rhs: Vec<String> = self.rhs.iter().map(Fact::to_string).collect();
        let rhs = if rhs.is_empty() { "false".to_string() } else { rhs.join(" | ") };
        if lhs.is_empty() {
            write!(f, "-> {rhs}")
        } else {
            write!(f, "{} -> {rhs}", lhs.join(", "))
        }
    }
}

/// One grounding of a constraint body: lhs facts in atom order and the
/// instantiated rhs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Unfolded {
    pub lhs: Vec<Fact>,
    pub rhs: Vec<Fact>,
}

impl Unfolded {
    pub fn is_tautological(&self) -> bool {
        self.rhs.iter().any(|r| self.lhs.contains(r))
    }
}

/// Every grounding of `c` whose lhs facts lie in `facts` and whose guard
/// holds, tautological ones included, in canonical order.
pub fn unfolded_groundings(facts: &Instance, c: &UniversalConstraint) -> Vec<Unfolded> {
    let idx = FactIndex::from_instance(facts);
    let comp = Compiled::new(c);
    let ranges = vec![0..idx.len(); comp.lhs.len()];
    let mut out = BTreeSet::new();
    let _ = for_each_match(&comp, &idx, &ranges, |b, ids| {
        out.insert(Unfolded {
            lhs: ids.iter().map(|&id| idx.fact(id).clone()).collect(),
            rhs: comp.rhs.iter().map(|a| a.ground(b)).collect(),
        });
        ControlFlow::Continue(())
    });
    out.into_iter().collect()
}

/// Hull and rules of an instance under a constraint set, computed together.
#[derive(Debug, Clone)]
pub struct Grounding {
    pub hull: Hull,
    pub rules: Vec<GroundRule>,
}

impl Grounding {
    pub fn new(i: &Instance, f: &[UniversalConstraint]) -> Self {
        let compiled: Vec<Compiled> = f.iter().map(Compiled::new).collect();
        let (idx, negative) = hull_fixpoint(i, &compiled);
        let positive: Instance = idx.facts().iter().cloned().collect();
        let rules = collect_rules(&idx, f, &compiled);
        Grounding { hull: Hull { positive, negative }, rules }
    }

    pub fn hypergraph(&self) -> ConflictHypergraph {
        let vertices = self.hull.literals();
        let mut conflict_edges: Vec<BTreeSet<Literal>> = self.rules.iter().map(GroundRule::literals).collect();
        conflict_edges.sort();
        conflict_edges.dedup();
        let stabilizing_edges =
            self.hull.negative.iter().map(|f| [Literal::pos(f.clone()), Literal::neg(f.clone())]).collect();
        ConflictHypergraph { vertices, conflict_edges, stabilizing_edges }
    }

    /// Id-based view of the positive hull and the rules.
    pub fn indexed(&self) -> IndexedRules {
        IndexedRules::new(self.hull.positive(), &self.rules)
    }
}

/// Semi-naive least fixpoint. Returns the positive hull facts as an index
/// and the facts whose negation belongs to the hull.
fn hull_fixpoint(i: &Instance, compiled: &[Compiled]) -> (FactIndex, Instance) {
    let mut idx = FactIndex::from_instance(i);
    let mut negative = Instance::new();
    let mut old_end = 0;
    let mut first = true;
    loop {
        let cur_end = idx.len();
        if !first && old_end == cur_end {
            break;
        }
        let mut pending: Vec<Fact> = Vec::new();
        for c in compiled {
            let n = c.lhs.len();
            let mut fire = |ranges: &[std::ops::Range<usize>]| {
                let _ = for_each_match(c, &idx, ranges, |b, ids| {
                    let rhs: Vec<Fact> = c.rhs.iter().map(|a| a.ground(b)).collect();
                    if rhs.iter().any(|r| ids.iter().any(|&id| idx.fact(id) == r)) {
                        return ControlFlow::Continue(());
                    }
                    for r in rhs {
                        if negative.insert(r.clone()) {
                            pending.push(r);
                        }
                    }
                    ControlFlow::Continue(())
                });
            };
            if n == 0 {
                if first {
                    fire(&[]);
                }
                continue;
            }
            // Pivot k takes the new facts; earlier atoms only old facts.
            for k in 0..n {
                let ranges: Vec<_> = (0..n)
                    .map(|j| match j.cmp(&k) {
                        std::cmp::Ordering::Less => 0..old_end,
                        std::cmp::Ordering::Equal => old_end..cur_end,
                        std::cmp::Ordering::Greater => 0..cur_end,
                    })
                    .collect();
                fire(&ranges);
            }
        }
        for f in pending {
            idx.insert(f);
        }
        old_end = cur_end;
        first = false;
    }
    (idx, negative)
}

fn collect_rules(idx: &FactIndex, f: &[UniversalConstraint], compiled: &[Compiled]) -> Vec<GroundRule> {
    let mut rules: BTreeMap<(BTreeSet<Fact>, BTreeSet<Fact>), GroundRule> = BTreeMap::new();
    for (ci, (c, comp)) in f.iter().zip(compiled).enumerate() {
        let is_jd = matches!(c.kind, ConstraintKind::Jd(_));
        let ranges = vec![0..idx.len(); comp.lhs.len()];
        let _ = for_each_match(comp, idx, &ranges, |b, ids| {
            let bag: Vec<Fact> = ids.iter().map(|&id| idx.fact(id).clone()).collect();
            let rhs: BTreeSet<Fact> = comp.rhs.iter().map(|a| a.ground(b)).collect();
            if rhs.iter().any(|r| bag.contains(r)) {
                return ControlFlow::Continue(());
            }
            let lhs: BTreeSet<Fact> = bag.iter().cloned().collect();
            let rule = rules.entry((lhs.clone(), rhs.clone())).or_insert_with(|| GroundRule {
                lhs,
                rhs,
                origin: ci,
                unfolded: None,
            });
            if is_jd && rule.origin == ci {
                match &rule.unfolded {
                    Some(cur) if *cur <= bag => {}
                    _ => rule.unfolded = Some(bag),
                }
            }
            ControlFlow::Continue(())
        });
    }
    rules.into_values().collect()
}

pub fn compute_hull(i: &Instance, f: &[UniversalConstraint]) -> Hull {
    Grounding::new(i, f).hull
}

pub fn ground_rules(i: &Instance, f: &[UniversalConstraint]) -> Vec<GroundRule> {
    Grounding::new(i, f).rules
}

pub fn build_hypergraph(i: &Instance, f: &[UniversalConstraint]) -> ConflictHypergraph {
    Grounding::new(i, f).hypergraph()
}

/// Positive hull facts numbered in canonical order, with rules over ids.
#[derive(Debug, Clone)]
pub struct IndexedRules {
    pub facts: Vec<Fact>,
    ids: HashMap<Fact, usize>,
    pub rules: Vec<IdRule>,
    /// For each fact id, the rules whose lhs contains it.
    pub by_lhs: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdRule {
    pub lhs: Vec<usize>,
    pub rhs: Vec<usize>,
}

impl IndexedRules {
    pub fn new(positive: &Instance, rules: &[GroundRule]) -> Self {
        let facts: Vec<Fact> = positive.iter().cloned().collect();
        let ids: HashMap<Fact, usize> = facts.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        let mut by_lhs = vec![Vec::new(); facts.len()];
        let rules: Vec<IdRule> = rules
            .iter()
            .enumerate()
            .map(|(ri, r)| {
                let lhs: Vec<usize> = r.lhs.iter().map(|f| ids[f]).collect();
                for &l in &lhs {
                    by_lhs[l].push(ri);
                }
                IdRule { lhs, rhs: r.rhs.iter().map(|f| ids[f]).collect() }
            })
            .collect();
        IndexedRules { facts, ids, rules, by_lhs }
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn id(&self, f: &Fact) -> Option<usize> {
        self.ids.get(f).copied()
    }

    pub fn to_bits<'a>(&self, facts: impl IntoIterator<Item = &'a Fact>) -> Option<FixedBitSet> {
        let mut bits = FixedBitSet::with_capacity(self.facts.len());
        for f in facts {
            bits.insert(self.id(f)?);
        }
        Some(bits)
    }

    pub fn to_instance(&self, bits: &FixedBitSet) -> Instance {
        bits.ones().map(|i| self.facts[i].clone()).collect()
    }

    pub fn satisfied(&self, rule: &IdRule, bits: &FixedBitSet) -> bool {
        !rule.lhs.iter().all(|&l| bits.contains(l)) || rule.rhs.iter().any(|&r| bits.contains(r))
    }

    /// First rule violated by `bits`, if any.
    pub fn first_violation(&self, bits: &FixedBitSet) -> Option<usize> {
        self.rules.iter().position(|r| !self.satisfied(r, bits))
    }

    pub fn consistent(&self, bits: &FixedBitSet) -> bool {
        self.first_violation(bits).is_none()
    }
}

/// Vertices are hull literals; conflict edges are the rules' literal sets;
/// stabilizing edges join each fact with its negation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConflictHypergraph {
    pub vertices: Vec<Literal>,
    pub conflict_edges: Vec<BTreeSet<Literal>>,
    pub stabilizing_edges: Vec<[Literal; 2]>,
}

impl ConflictHypergraph {
    pub fn edges(&self) -> impl Iterator<Item = BTreeSet<Literal>> + '_ {
        self.conflict_edges
            .iter()
            .cloned()
            .chain(self.stabilizing_edges.iter().map(|e| e.iter().cloned().collect()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("hypergraph serializes")
    }

    /// Graphviz rendering: literals are boxes, each conflict edge is a small
    /// diamond joined to its members, stabilizing edges are dotted.
    pub fn to_dot(&self) -> String {
        let id: HashMap<&Literal, usize> = self.vertices.iter().enumerate().map(|(i, l)| (l, i)).collect();
        let quote = |s: String| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("graph conflicts {\n  node [shape=box];\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  v{i} [label=\"{}\"];", quote(v.to_string()));
        }
        for (k, e) in self.conflict_edges.iter().enumerate() {
            let _ = writeln!(out, "  e{k} [shape=diamond, label=\"\", width=0.2, height=0.2];");
            for l in e {
                let _ = writeln!(out, "  e{k} -- v{};", id[l]);
            }
        }
        for [p, n] in &self.stabilizing_edges {
            let _ = writeln!(out, "  v{} -- v{} [style=dotted];", id[p], id[n]);
        }
        out.push_str("}\n");
        out
    }
}

/// Whether `m` is independent and no vertex can be added to it.
pub fn is_maximal_independent(m: &BTreeSet<Literal>, g: &ConflictHypergraph) -> Result<bool, GraphError> {
    let vertices: BTreeSet<&Literal> = g.vertices.iter().collect();
    if let Some(l) = m.iter().find(|l| !vertices.contains(l)) {
        return Err(GraphError::NotAVertex(l.clone()));
    }
    let edges: Vec<BTreeSet<Literal>> = g.edges().collect();
    if edges.iter().any(|e| e.is_subset(m)) {
        return Ok(false);
    }
    Ok(g.vertices.iter().filter(|v| !m.contains(v)).all(|v| {
        edges.iter().any(|e| e.contains(v) && e.iter().all(|x| x == v || m.contains(x)))
    }))
}

/// `I′` plus `¬R(t)` for every hull negation whose fact is absent from `I′`.
pub fn complement(iprime: &Instance, hull: &Hull) -> Result<BTreeSet<Literal>, GraphError> {
    if let Some(f) = iprime.iter().find(|f| !hull.positive.contains(f)) {
        return Err(GraphError::OutsideHull(f.clone()));
    }
    Ok(iprime
        .iter()
        .map(|f| Literal::pos(f.clone()))
        .chain(hull.negative.iter().filter(|f| !iprime.contains(f)).map(|f| Literal::neg(f.clone())))
        .collect())
}

pub fn positive_projection(m: &BTreeSet<Literal>) -> Instance {
    m.iter().filter(|l| l.positive).map(|l| l.fact.clone()).collect()
}
