//! Immediate consequence over ground single-head rules and its closure.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::grounding::{GroundRule, IndexedRules};
use crate::model::{Fact, Instance};

/// Ground rules with exactly one rhs fact, indexed by lhs membership.
#[derive(Debug, Clone, Default)]
pub struct RuleIndex {
    facts: Vec<Fact>,
    ids: HashMap<Fact, usize>,
    lhs: Vec<Vec<usize>>,
    head: Vec<usize>,
    watchers: Vec<Vec<usize>>,
}

impl RuleIndex {
    /// Keeps the single-rhs rules of `rules`; denial and disjunctive rules
    /// are ignored.
    pub fn new<'a>(rules: impl IntoIterator<Item = &'a GroundRule>) -> Self {
        let mut idx = RuleIndex::default();
        for r in rules {
            if r.rhs.len() != 1 {
                continue;
            }
            let lhs: Vec<usize> = r.lhs.iter().map(|f| idx.intern(f)).collect();
            let head = idx.intern(r.rhs.iter().next().unwrap());
            let rid = idx.head.len();
            for &l in &lhs {
                idx.watchers[l].push(rid);
            }
            idx.lhs.push(lhs);
            idx.head.push(head);
        }
        idx
    }

    /// Single-rhs rules of `ir`, numbered with the same fact ids so that
    /// bitsets can be shared between the two indexes.
    pub fn from_indexed(ir: &IndexedRules) -> Self {
        let mut idx = RuleIndex {
            facts: ir.facts.clone(),
            ids: ir.facts.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect(),
            watchers: vec![Vec::new(); ir.facts.len()],
            ..RuleIndex::default()
        };
        for r in ir.rules.iter().filter(|r| r.rhs.len() == 1) {
            let rid = idx.head.len();
            for &l in &r.lhs {
                idx.watchers[l].push(rid);
            }
            idx.lhs.push(r.lhs.clone());
            idx.head.push(r.rhs[0]);
        }
        idx
    }

    fn intern(&mut self, f: &Fact) -> usize {
        if let Some(&id) = self.ids.get(f) {
            return id;
        }
        let id = self.facts.len();
        self.facts.push(f.clone());
        self.ids.insert(f.clone(), id);
        self.watchers.push(Vec::new());
        id
    }

    pub fn rule_count(&self) -> usize {
        self.head.len()
    }

    fn bits(&self, j: &Instance) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(self.facts.len());
        for f in j {
            if let Some(&id) = self.ids.get(f) {
                b.insert(id);
            }
        }
        b
    }

    fn merge(&self, j: &Instance, bits: &FixedBitSet) -> Instance {
        let mut out = j.clone();
        out.extend(bits.ones().map(|i| self.facts[i].clone()));
        out
    }

    /// `T_F(J)`: `J` plus the head of every rule whose lhs lies in `J`.
    pub fn step(&self, j: &Instance) -> Instance {
        let b = self.bits(j);
        let mut out = b.clone();
        for (lhs, &h) in self.lhs.iter().zip(&self.head) {
            if lhs.iter().all(|&l| b.contains(l)) {
                out.insert(h);
            }
        }
        self.merge(j, &out)
    }

    /// `T*_F(J)`. Facts unknown to the index pass through unchanged.
    pub fn closure(&self, j: &Instance) -> Instance {
        let b = self.closure_bits(self.bits(j));
        self.merge(j, &b)
    }

    /// Worklist closure: each rule keeps a count of missing lhs facts and
    /// fires once when it reaches zero.
    pub fn closure_bits(&self, mut b: FixedBitSet) -> FixedBitSet {
        let mut missing: Vec<usize> = self.lhs.iter().map(|l| l.iter().filter(|&&x| !b.contains(x)).count()).collect();
        let mut work: Vec<usize> = Vec::new();
        for (rid, &m) in missing.iter().enumerate() {
            if m == 0 && !b.contains(self.head[rid]) {
                let h = self.head[rid];
                b.insert(h);
                work.push(h);
            }
        }
        while let Some(f) = work.pop() {
            for &rid in &self.watchers[f] {
                missing[rid] -= 1;
                if missing[rid] == 0 {
                    let h = self.head[rid];
                    if !b.contains(h) {
                        b.insert(h);
                        work.push(h);
                    }
                }
            }
        }
        b
    }
}

pub fn t_f_step(j: &Instance, idx: &RuleIndex) -> Instance {
    idx.step(j)
}

pub fn t_f_closure(j: &Instance, idx: &RuleIndex) -> Instance {
    idx.closure(j)
}
