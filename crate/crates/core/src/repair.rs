//! Repair checking and repair construction for denial constraints and
//! full TGDs (join dependencies included).

use std::fmt;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::consequence::RuleIndex;
use crate::grounding::{Grounding, IndexedRules};
use crate::model::{Fact, Instance, UniversalConstraint};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepairError {
    #[error("constraint {index} is a {kind} constraint, outside denial constraints and full TGDs")]
    UnsupportedClass { index: usize, kind: &'static str },
    #[error("constraint {index} is a {kind} constraint; only denial constraints are accepted here")]
    NotDenial { index: usize, kind: &'static str },
    #[error("fact order is not a permutation of the instance: {0}")]
    BadOrder(String),
    #[error("target is not a repair: {0}")]
    NotARepair(RepairReport),
}

/// Which repair condition failed: (i) consistency, (ii) closure of the
/// retained part, (iii) no discarded fact could have been kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    CondI,
    CondII,
    CondIII,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// A violated grounding.
    Rule { lhs: Vec<Fact>, rhs: Vec<Fact> },
    /// Facts on which `T*_F(I′∩I)` and `I′` disagree.
    Mismatch(Instance),
    /// A fact of `I \ I′` that could have been kept.
    Fact(Fact),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepairReport {
    pub verdict: bool,
    pub violated: Option<Condition>,
    pub witness: Option<Witness>,
}

impl RepairReport {
    fn pass() -> Self {
        RepairReport { verdict: true, violated: None, witness: None }
    }

    fn fail(c: Condition, w: Witness) -> Self {
        RepairReport { verdict: false, violated: Some(c), witness: Some(w) }
    }
}

impl fmt::Display for RepairReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.violated, &self.witness) {
            (None, _) => f.write_str("repair"),
            (Some(c), w) => {
                let cond = match c {
                    Condition::CondI => "condition (i), inconsistent",
                    Condition::CondII => "condition (ii), retained facts do not generate the candidate",
                    Condition::CondIII => "condition (iii), a discarded fact can be kept",
                };
                write!(f, "not a repair: {cond}")?;
                match w {
                    Some(Witness::Rule { lhs, rhs }) => {
                        let l: Vec<String> = lhs.iter().map(Fact::to_string).collect();
                        let r: Vec<String> = rhs.iter().map(Fact::to_string).collect();
                        let r = if r.is_empty() { "false".into() } else { r.join(" | ") };
                        write!(f, "; violated {} -> {r}", l.join(", "))
                    }
                    Some(Witness::Mismatch(m)) => write!(f, "; differing facts {m}"),
                    Some(Witness::Fact(x)) => write!(f, "; witness {x}"),
                    None => Ok(()),
                }
            }
        }
    }
}

/// The order in which the banned-set algorithm visits facts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum FactOrder {
    #[default]
    Canonical,
    Shuffled(u64),
    /// Must be a permutation of the instance.
    Explicit(Vec<Fact>),
}

/// The per-fact choice `b` of the banned-set algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum BChooser {
    #[default]
    AlwaysFalse,
    AlwaysTrue,
    Seeded(u64),
    /// Consumed in visiting order; `false` once exhausted.
    Scripted(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RepairStrategy {
    pub fact_order: FactOrder,
    pub b_chooser: BChooser,
}

impl RepairStrategy {
    pub fn seeded(seed: u64) -> Self {
        RepairStrategy { fact_order: FactOrder::Shuffled(seed), b_chooser: BChooser::Seeded(seed.wrapping_add(1)) }
    }

    fn order(&self, i: &Instance) -> Result<Vec<Fact>, RepairError> {
        match &self.fact_order {
            FactOrder::Canonical => Ok(i.iter().cloned().collect()),
            FactOrder::Shuffled(seed) => {
                let mut v: Vec<Fact> = i.iter().cloned().collect();
                v.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
                Ok(v)
            }
            FactOrder::Explicit(v) => {
                let set: Instance = v.iter().cloned().collect();
                if set.len() != v.len() {
                    return Err(RepairError::BadOrder("repeated fact".into()));
                }
                if let Some(f) = set.difference(i).iter().next() {
                    return Err(RepairError::BadOrder(format!("{f} is not in the instance")));
                }
                if let Some(f) = i.difference(&set).iter().next() {
                    return Err(RepairError::BadOrder(format!("{f} is missing")));
                }
                Ok(v.clone())
            }
        }
    }

    fn choices(&self, n: usize) -> Vec<bool> {
        match &self.b_chooser {
            BChooser::AlwaysFalse => vec![false; n],
            BChooser::AlwaysTrue => vec![true; n],
            BChooser::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n).map(|_| rng.gen()).collect()
            }
            BChooser::Scripted(s) => (0..n).map(|k| s.get(k).copied().unwrap_or(false)).collect(),
        }
    }
}

fn check_class(f: &[UniversalConstraint]) -> Result<(), RepairError> {
    match f.iter().position(|c| !c.kind.is_tgd_or_denial()) {
        Some(index) => Err(RepairError::UnsupportedClass { index, kind: f[index].kind.name() }),
        None => Ok(()),
    }
}

/// Grounded view of an instance shared by checking and construction.
pub struct RepairContext {
    instance: Instance,
    rules: IndexedRules,
    tgds: RuleIndex,
    in_i: FixedBitSet,
}

impl RepairContext {
    pub fn new(i: &Instance, f: &[UniversalConstraint]) -> Result<Self, RepairError> {
        check_class(f)?;
        let rules = Grounding::new(i, f).indexed();
        let tgds = RuleIndex::from_indexed(&rules);
        let in_i = rules.to_bits(i).expect("instance lies in its hull");
        Ok(RepairContext { instance: i.clone(), rules, tgds, in_i })
    }

    fn bits(&self, j: &Instance) -> Option<FixedBitSet> {
        self.rules.to_bits(j)
    }

    fn single(&self, f: &Fact) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(self.rules.len());
        b.insert(self.rules.id(f).expect("fact of the instance"));
        b
    }

    fn closure(&self, b: FixedBitSet) -> FixedBitSet {
        self.tgds.closure_bits(b)
    }

    /// Consistency of `after`, given that `before ⊆ after` is consistent:
    /// only rules mentioning a new fact on the lhs can break.
    fn still_consistent(&self, before: &FixedBitSet, after: &FixedBitSet) -> bool {
        if before.is_clear() {
            return self.rules.consistent(after);
        }
        after.difference(before).all(|x| self.rules.by_lhs[x].iter().all(|&r| self.rules.satisfied(&self.rules.rules[r], after)))
    }

    fn violated_rule(&self, b: &FixedBitSet) -> Option<Witness> {
        self.rules.first_violation(b).map(|r| {
            let r = &self.rules.rules[r];
            Witness::Rule {
                lhs: r.lhs.iter().map(|&x| self.rules.facts[x].clone()).collect(),
                rhs: r.rhs.iter().map(|&x| self.rules.facts[x].clone()).collect(),
            }
        })
    }

    pub fn check(&self, candidate: &Instance, f: &[UniversalConstraint]) -> RepairReport {
        let Some(cand) = self.bits(candidate) else {
            return self.check_outside_hull(candidate, f);
        };
        if let Some(w) = self.violated_rule(&cand) {
            return RepairReport::fail(Condition::CondI, w);
        }
        let mut kept = cand.clone();
        kept.intersect_with(&self.in_i);
        let gen = self.closure(kept);
        if gen != cand {
            let mut diff = gen;
            diff.symmetric_difference_with(&cand);
            return RepairReport::fail(Condition::CondII, Witness::Mismatch(self.rules.to_instance(&diff)));
        }
        let mut extra = cand.clone();
        extra.difference_with(&self.in_i);
        for t in self.instance.iter() {
            let id = self.rules.id(t).expect("fact of the instance");
            if cand.contains(id) {
                continue;
            }
            let mut start = cand.clone();
            start.insert(id);
            let jp = self.closure(start);
            if !self.still_consistent(&cand, &jp) {
                continue;
            }
            let mut jp_extra = jp;
            jp_extra.difference_with(&self.in_i);
            if jp_extra == extra {
                return RepairReport::fail(Condition::CondIII, Witness::Fact(t.clone()));
            }
        }
        RepairReport::pass()
    }

    /// Candidates with facts outside the hull are never repairs; report the
    /// first condition that fails.
    fn check_outside_hull(&self, candidate: &Instance, f: &[UniversalConstraint]) -> RepairReport {
        let own = Grounding::new(candidate, f);
        if let Some(r) = own.rules.iter().find(|r| !r.satisfied_by(candidate)) {
            return RepairReport::fail(
                Condition::CondI,
                Witness::Rule { lhs: r.lhs.iter().cloned().collect(), rhs: r.rhs.iter().cloned().collect() },
            );
        }
        let kept = candidate.intersection(&self.instance);
        let gen = self.rules.to_instance(&self.closure(self.bits(&kept).expect("subset of the instance")));
        RepairReport::fail(Condition::CondII, Witness::Mismatch(crate::model::symmetric_difference(&gen, candidate)))
    }
}

/// Decides whether `candidate` is a repair of `i` using the three closure
/// conditions; polynomial in the hull size.
pub fn check_repair(i: &Instance, candidate: &Instance, f: &[UniversalConstraint]) -> Result<RepairReport, RepairError> {
    Ok(RepairContext::new(i, f)?.check(candidate, f))
}

/// Greedy maximal consistent subset for denial constraints.
pub fn denial_repair(i: &Instance, f: &[UniversalConstraint], strategy: &RepairStrategy) -> Result<Instance, RepairError> {
    if let Some(index) = f.iter().position(|c| !c.is_denial()) {
        return Err(RepairError::NotDenial { index, kind: f[index].kind.name() });
    }
    let ctx = RepairContext::new(i, f)?;
    let mut j = FixedBitSet::with_capacity(ctx.rules.len());
    for t in strategy.order(i)? {
        let mut next = j.clone();
        next.insert(ctx.rules.id(&t).expect("fact of the instance"));
        if ctx.still_consistent(&j, &next) {
            j = next;
        }
    }
    Ok(ctx.rules.to_instance(&j))
}

/// Why the banned-set algorithm discarded a fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Discard {
    /// The closure violates a constraint.
    Inconsistent,
    /// `b` was true and the closure brings in new facts.
    Fresh,
    /// The closure contains a banned set.
    Banned,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub fact: Fact,
    pub b: bool,
    pub closure: Instance,
    pub discarded: Option<Discard>,
    pub new_banned: Option<Instance>,
    pub j: Instance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepairTrace {
    pub steps: Vec<TraceStep>,
    pub banned: Vec<Instance>,
    pub result: Instance,
}

/// The banned-set algorithm, recording every step.
pub fn construct_repair_traced(
    i: &Instance,
    f: &[UniversalConstraint],
    strategy: &RepairStrategy,
) -> Result<RepairTrace, RepairError> {
    let ctx = RepairContext::new(i, f)?;
    let order = strategy.order(i)?;
    let choices = strategy.choices(order.len());
    Ok(run_algorithm2(&ctx, &order, &choices, true))
}

/// The banned-set algorithm: sound, and complete over all orders and choices of `b`.
pub fn construct_repair(
    i: &Instance,
    f: &[UniversalConstraint],
    strategy: &RepairStrategy,
) -> Result<Instance, RepairError> {
    let ctx = RepairContext::new(i, f)?;
    let order = strategy.order(i)?;
    let choices = strategy.choices(order.len());
    Ok(run_algorithm2(&ctx, &order, &choices, false).result)
}

fn run_algorithm2(ctx: &RepairContext, order: &[Fact], choices: &[bool], record: bool) -> RepairTrace {
    let mut j = FixedBitSet::with_capacity(ctx.rules.len());
    let mut banned: Vec<FixedBitSet> = Vec::new();
    let mut steps = Vec::new();
    for (t, &b) in order.iter().zip(choices) {
        let mut start = j.clone();
        start.union_with(&ctx.single(t));
        let jp = ctx.closure(start);
        let consistent = ctx.still_consistent(&j, &jp);
        let mut fresh = jp.clone();
        fresh.difference_with(&ctx.in_i);
        fresh.difference_with(&j);
        let discard = if !consistent {
            Some(Discard::Inconsistent)
        } else if b && !fresh.is_clear() {
            Some(Discard::Fresh)
        } else if banned.iter().any(|bs| bs.is_subset(&jp)) {
            Some(Discard::Banned)
        } else {
            None
        };
        let mut new_banned = None;
        match discard {
            Some(d) => {
                if d != Discard::Inconsistent {
                    if record {
                        new_banned = Some(ctx.rules.to_instance(&fresh));
                    }
                    if !banned.contains(&fresh) {
                        banned.push(fresh);
                    }
                }
            }
            None => j = jp.clone(),
        }
        if record {
            steps.push(TraceStep {
                fact: t.clone(),
                b,
                closure: ctx.rules.to_instance(&jp),
                discarded: discard,
                new_banned,
                j: ctx.rules.to_instance(&j),
            });
        }
    }
    RepairTrace {
        steps,
        banned: if record { banned.iter().map(|b| ctx.rules.to_instance(b)).collect() } else { Vec::new() },
        result: ctx.rules.to_instance(&j),
    }
}

/// Replays the completeness argument: facts kept by `target` first with
/// `b = false`, then the discarded ones with `b = true`.
pub fn guided_repair(i: &Instance, f: &[UniversalConstraint], target: &Instance) -> Result<Instance, RepairError> {
    let ctx = RepairContext::new(i, f)?;
    let report = ctx.check(target, f);
    if !report.verdict {
        return Err(RepairError::NotARepair(report));
    }
    let kept = i.intersection(target);
    let dropped = i.difference(target);
    let order: Vec<Fact> = kept.iter().chain(dropped.iter()).cloned().collect();
    let choices: Vec<bool> = kept.iter().map(|_| false).chain(dropped.iter().map(|_| true)).collect();
    Ok(run_algorithm2(&ctx, &order, &choices, false).result)
}
