//! Consistent answers to closed quantifier-free queries under denial
//! constraints, join dependencies and acyclic full TGDs.
//!
//! Supports and blocks are built level by level up to the acyclic height
//! of the dependency graph. The base rules (a fact of `I` supports itself,
//! a fact outside `I` is blocked by forbidding it, denial conflicts) hold
//! at every level, and every hull fact carries a reflexive JD rule, so the
//! levels form an increasing chain.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::consequence::RuleIndex;
use crate::grounding::{unfolded_groundings, Grounding, IndexedRules};
use crate::model::{ConstraintKind, Fact, Instance, JdSpec, Literal, Query, Schema, UniversalConstraint};
use crate::repair::{construct_repair, BChooser, FactOrder, RepairStrategy};

type Bits = FixedBitSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CqaError {
    #[error("unsupported constraint class: {0}")]
    UnsupportedClass(String),
    #[error("query CNF exceeds {0} clauses")]
    CnfCap(usize),
    #[error("join dependencies on different relations: {0} and {1}")]
    MixedRelations(String, String),
}

/// Relations as nodes, an edge from every rhs relation to every lhs
/// relation of each constraint, and longest simple path lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DependencyGraph {
    pub nodes: Vec<Arc<str>>,
    pub edges: BTreeSet<(Arc<str>, Arc<str>)>,
    /// Longest simple path ending at each node.
    pub depth: BTreeMap<Arc<str>, usize>,
    /// Longest simple path starting at each node.
    pub height: BTreeMap<Arc<str>, usize>,
    pub h: usize,
}

impl DependencyGraph {
    /// Nodes are `relations` plus every relation mentioned in `f`.
    /// Path lengths come from exhaustive search, exponential in the number
    /// of relations only.
    pub fn new<'a>(f: &[UniversalConstraint], relations: impl IntoIterator<Item = &'a str>) -> Self {
        let mut nodes: BTreeSet<Arc<str>> = relations.into_iter().map(Arc::from).collect();
        let mut edges = BTreeSet::new();
        for c in f {
            nodes.extend(c.lhs.iter().chain(&c.rhs).map(|a| a.rel.clone()));
            for p in &c.rhs {
                for r in &c.lhs {
                    edges.insert((p.rel.clone(), r.rel.clone()));
                }
            }
        }
        let nodes: Vec<Arc<str>> = nodes.into_iter().collect();
        let pos: HashMap<&Arc<str>, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut out = vec![Vec::new(); nodes.len()];
        let mut inc = vec![Vec::new(); nodes.len()];
        for (a, b) in &edges {
            out[pos[a]].push(pos[b]);
            inc[pos[b]].push(pos[a]);
        }
        let height: Vec<usize> = (0..nodes.len()).map(|v| longest_simple_path(&out, v)).collect();
        let depth: Vec<usize> = (0..nodes.len()).map(|v| longest_simple_path(&inc, v)).collect();
        let h = height.iter().copied().max().unwrap_or(0);
        DependencyGraph {
            depth: nodes.iter().cloned().zip(depth).collect(),
            height: nodes.iter().cloned().zip(height).collect(),
            nodes,
            edges,
            h,
        }
    }

    pub fn is_acyclic(&self) -> bool {
        let pos: HashMap<&Arc<str>, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (a, b) in &self.edges {
            out[pos[a]].push(pos[b]);
        }
        // 0 unvisited, 1 on stack, 2 done
        fn dfs(v: usize, out: &[Vec<usize>], state: &mut [u8]) -> bool {
            state[v] = 1;
            for &w in &out[v] {
                if state[w] == 1 || (state[w] == 0 && !dfs(w, out, state)) {
                    return false;
                }
            }
            state[v] = 2;
            true
        }
        let mut state = vec![0u8; self.nodes.len()];
        (0..self.nodes.len()).all(|v| state[v] != 0 || dfs(v, &out, &mut state))
    }
}

fn longest_simple_path(adj: &[Vec<usize>], start: usize) -> usize {
    fn go(v: usize, adj: &[Vec<usize>], seen: &mut Vec<bool>) -> usize {
        seen[v] = true;
        let mut best = 0;
        for &w in &adj[v] {
            if !seen[w] {
                best = best.max(1 + go(w, adj, seen));
            }
        }
        seen[v] = false;
        best
    }
    go(start, adj, &mut vec![false; adj.len()])
}

pub fn dependency_graph(f: &[UniversalConstraint], s: &Schema) -> DependencyGraph {
    DependencyGraph::new(f, s.relations().map(|r| &*r.name))
}

pub fn is_acyclic(g: &DependencyGraph) -> bool {
    g.is_acyclic()
}

/// One JD equivalent to all of `jds`, built from pairwise intersections of
/// components. Empty components are dropped and the rest sorted and
/// deduplicated. No JDs gives the trivial JD.
pub fn merge_jds(relation: &str, arity: usize, jds: &[JdSpec]) -> Result<JdSpec, CqaError> {
    if let Some(j) = jds.iter().find(|j| &*j.relation != relation) {
        return Err(CqaError::MixedRelations(relation.to_string(), j.relation.to_string()));
    }
    let mut acc: Vec<BTreeSet<usize>> = vec![(0..arity).collect()];
    for jd in jds {
        let mut next = BTreeSet::new();
        for x in &acc {
            for y in &jd.components {
                let z: BTreeSet<usize> = y.iter().copied().filter(|a| x.contains(a)).collect();
                if !z.is_empty() {
                    next.insert(z);
                }
            }
        }
        acc = next.into_iter().collect();
    }
    let mut components: Vec<Vec<usize>> = acc.into_iter().map(|s| s.into_iter().collect()).collect();
    components.sort();
    components.dedup();
    Ok(JdSpec { relation: Arc::from(relation), components })
}

/// A pair `(B, N)`: the facts of `I` that must be present and the at most
/// one fact outside `I` that must be absent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Block {
    pub require: Instance,
    pub forbid: Option<Fact>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Blk {
    b: Bits,
    n: Option<usize>,
}

impl Blk {
    fn dominates(&self, other: &Blk) -> bool {
        self.b.is_subset(&other.b) && (self.n.is_none() || self.n == other.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CqaOptions {
    /// Keep only subset-minimal supports and undominated blocks.
    pub prune: bool,
    pub cnf_cap: usize,
}

impl Default for CqaOptions {
    fn default() -> Self {
        CqaOptions { prune: true, cnf_cap: 4096 }
    }
}

/// A realizable combination found by `exists_repair`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Combination {
    pub supports: Vec<(Fact, Instance)>,
    pub blocks: Vec<(Fact, Block)>,
    pub present: Instance,
    pub absent: Instance,
    /// A repair containing `present` and disjoint from `absent`.
    pub repair: Instance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CqaAnswer {
    pub consistent: bool,
    pub cnf: Vec<Vec<Literal>>,
    pub failing_clause: Option<usize>,
    pub witness: Option<Combination>,
}

/// Hull, rules, supports and blocks of one instance.
pub struct CqaContext {
    instance: Instance,
    constraints: Vec<UniversalConstraint>,
    graph: DependencyGraph,
    rules: IndexedRules,
    tgds: RuleIndex,
    in_i: Bits,
    opts: CqaOptions,
    supp_levels: Vec<Vec<Vec<Bits>>>,
    block_levels: Vec<Vec<Vec<Blk>>>,
}

/// Non-JD constraints followed by one merged JD per relation that has a
/// non-trivial one.
fn normalize_constraints(f: &[UniversalConstraint]) -> Result<(Vec<UniversalConstraint>, usize), CqaError> {
    let mut rest = Vec::new();
    let mut jds: BTreeMap<Arc<str>, (usize, Vec<JdSpec>)> = BTreeMap::new();
    for c in f {
        match &c.kind {
            ConstraintKind::Jd(spec) => {
                let arity = c.rhs[0].terms.len();
                jds.entry(spec.relation.clone()).or_insert((arity, Vec::new())).1.push(spec.clone());
            }
            ConstraintKind::Universal => {
                return Err(CqaError::UnsupportedClass(format!("disjunctive constraint {c}")));
            }
            _ => rest.push(c.clone()),
        }
    }
    let k = rest.len();
    for (rel, (arity, specs)) in jds {
        let merged = merge_jds(&rel, arity, &specs)?;
        if !merged.is_trivial(arity) {
            let c = UniversalConstraint::jd(&rel, arity, &merged.components).expect("merged JD covers its relation");
            rest.push(c);
        }
    }
    Ok((rest, k))
}

fn set_key(b: &Bits) -> Vec<usize> {
    b.ones().collect()
}

fn normalize_sets(mut v: Vec<Bits>, prune: bool) -> Vec<Bits> {
    v.sort_by_key(|b| (b.count_ones(..), set_key(b)));
    v.dedup();
    if prune {
        let mut kept: Vec<Bits> = Vec::new();
        for b in v {
            if !kept.iter().any(|k| k.is_subset(&b)) {
                kept.push(b);
            }
        }
        v = kept;
    }
    v.sort_by_key(set_key);
    v
}

fn normalize_blocks(mut v: Vec<Blk>, prune: bool) -> Vec<Blk> {
    v.sort_by_key(|x| (x.b.count_ones(..) + usize::from(x.n.is_some()), set_key(&x.b), x.n));
    v.dedup();
    if prune {
        let mut kept: Vec<Blk> = Vec::new();
        for x in v {
            if !kept.iter().any(|k| k.dominates(&x)) {
                kept.push(x);
            }
        }
        v = kept;
    }
    v.sort_by_key(|x| (set_key(&x.b), x.n));
    v
}

/// Every union of one choice per option list.
fn union_product<'a>(lists: impl IntoIterator<Item = &'a [Bits]>, width: usize, prune: bool) -> Vec<Bits> {
    let mut acc = vec![Bits::with_capacity(width)];
    for opts in lists {
        let mut next = Vec::with_capacity(acc.len() * opts.len());
        for a in &acc {
            for o in opts {
                let mut u = a.clone();
                u.union_with(o);
                next.push(u);
            }
        }
        acc = normalize_sets(next, prune);
        if acc.is_empty() {
            break;
        }
    }
    acc
}

struct RuleSets {
    /// Non-JD single-head rules `(lhs, rhs)`.
    tgd: Vec<(Vec<usize>, usize)>,
    /// JD rules with lhs as a set, reflexive ones included.
    jd: Vec<(Vec<usize>, usize)>,
    denial: Vec<Vec<usize>>,
}

impl CqaContext {
    pub fn new(i: &Instance, f: &[UniversalConstraint], opts: CqaOptions) -> Result<Self, CqaError> {
        let (fstar, k) = normalize_constraints(f)?;
        let gate = DependencyGraph::new(&fstar[..k], std::iter::empty());
        if !gate.is_acyclic() {
            return Err(CqaError::UnsupportedClass(
                "full TGDs other than join dependencies form a cycle in the dependency graph".into(),
            ));
        }
        let graph = DependencyGraph::new(&fstar, i.iter().map(|f| &*f.rel));
        let grounding = Grounding::new(i, &fstar);
        let rules = grounding.indexed();
        let tgds = RuleIndex::from_indexed(&rules);
        let in_i = rules.to_bits(i).expect("instance lies in its hull");

        let mut sets = RuleSets { tgd: Vec::new(), jd: Vec::new(), denial: Vec::new() };
        for (g, r) in grounding.rules.iter().zip(&rules.rules) {
            if r.rhs.is_empty() {
                sets.denial.push(r.lhs.clone());
            } else if g.origin < k {
                sets.tgd.push((r.lhs.clone(), r.rhs[0]));
            }
        }
        let mut jd: BTreeSet<(Vec<usize>, usize)> = (0..rules.len()).map(|x| (vec![x], x)).collect();
        for c in &fstar[k..] {
            for u in unfolded_groundings(grounding.hull.positive(), c) {
                let mut lhs: Vec<usize> = u.lhs.iter().map(|x| rules.id(x).expect("hull fact")).collect();
                lhs.sort_unstable();
                lhs.dedup();
                jd.insert((lhs, rules.id(&u.rhs[0]).expect("hull fact")));
            }
        }
        sets.jd = jd.into_iter().collect();

        let mut ctx = CqaContext {
            instance: i.clone(),
            constraints: f.to_vec(),
            graph,
            rules,
            tgds,
            in_i,
            opts,
            supp_levels: Vec::new(),
            block_levels: Vec::new(),
        };
        ctx.build_supports(&sets);
        ctx.build_blocks(&sets);
        Ok(ctx)
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    pub fn h(&self) -> usize {
        self.graph.h
    }

    fn width(&self) -> usize {
        self.rules.len()
    }

    fn singleton(&self, x: usize) -> Bits {
        let mut b = Bits::with_capacity(self.width());
        b.insert(x);
        b
    }

    fn build_supports(&mut self, sets: &RuleSets) {
        let n = self.width();
        let prune = self.opts.prune;
        let mut derivers: Vec<Vec<&[usize]>> = vec![Vec::new(); n];
        for (lhs, rhs) in sets.tgd.iter().chain(&sets.jd) {
            derivers[*rhs].push(lhs);
        }
        let mut jd_by_rhs: Vec<Vec<&[usize]>> = vec![Vec::new(); n];
        for (lhs, rhs) in &sets.jd {
            jd_by_rhs[*rhs].push(lhs);
        }
        let base: Vec<Vec<Bits>> =
            (0..n).map(|x| if self.in_i.contains(x) { vec![self.singleton(x)] } else { Vec::new() }).collect();
        let mut levels = vec![base.clone()];
        for _ in 0..=self.graph.h {
            let prev = levels.last().unwrap();
            // one rule step from (ℓ-1)-supports
            let step: Vec<Vec<Bits>> = (0..n)
                .map(|u| {
                    let mut out = Vec::new();
                    for lhs in &derivers[u] {
                        out.extend(union_product(lhs.iter().map(|&x| &prev[x][..]), n, prune));
                    }
                    normalize_sets(out, prune)
                })
                .collect();
            let next: Vec<Vec<Bits>> = (0..n)
                .map(|u| {
                    if self.in_i.contains(u) {
                        return base[u].clone();
                    }
                    let mut out = Vec::new();
                    for lhs in &jd_by_rhs[u] {
                        out.extend(union_product(lhs.iter().map(|&x| &step[x][..]), n, prune));
                    }
                    normalize_sets(out, prune)
                })
                .collect();
            levels.push(next);
        }
        self.supp_levels = levels;
    }

    fn supports_of(&self, x: usize) -> &[Bits] {
        &self.supp_levels.last().unwrap()[x]
    }

    /// Unions of supports realizing `lhs` when the facts in a nonempty
    /// subset of its `t`-relation facts are rewritten through JD rules
    /// containing `t`.
    fn rewrite_options(&self, t: usize, lhs: &[usize], through: &HashMap<usize, Vec<Bits>>) -> Vec<Bits> {
        let n = self.width();
        let rel = &self.rules.facts[t].rel;
        let cands: Vec<usize> =
            lhs.iter().copied().filter(|&x| &self.rules.facts[x].rel == rel && through.contains_key(&x)).collect();
        let mut out = Vec::new();
        for mask in 1u32..(1 << cands.len()) {
            let chosen: Vec<usize> = (0..cands.len()).filter(|b| mask & (1 << b) != 0).map(|b| cands[b]).collect();
            let lists = lhs.iter().map(|x| {
                if chosen.contains(x) {
                    &through[x][..]
                } else {
                    self.supports_of(*x)
                }
            });
            out.extend(union_product(lists, n, self.opts.prune));
        }
        normalize_sets(out, self.opts.prune)
    }

    fn build_blocks(&mut self, sets: &RuleSets) {
        let n = self.width();
        let prune = self.opts.prune;
        // through[t][a]: support unions for the other lhs facts of JD rules
        // deriving `a` with `t` in the lhs
        let mut through: Vec<HashMap<usize, Vec<Bits>>> = vec![HashMap::new(); n];
        for (lhs, rhs) in &sets.jd {
            for &t in lhs {
                if !self.in_i.contains(t) {
                    continue;
                }
                let others = lhs.iter().filter(|&&x| x != t).map(|&x| self.supports_of(x));
                let opts = union_product(others, n, prune);
                if !opts.is_empty() {
                    through[t].entry(*rhs).or_default().extend(opts);
                }
            }
        }
        for m in &mut through {
            for v in m.values_mut() {
                *v = normalize_sets(std::mem::take(v), prune);
            }
        }
        let base: Vec<Vec<Blk>> = (0..n)
            .map(|t| {
                if !self.in_i.contains(t) {
                    return vec![Blk { b: Bits::with_capacity(n), n: Some(t) }];
                }
                let mut out = Vec::new();
                for lhs in &sets.denial {
                    out.extend(self.rewrite_options(t, lhs, &through[t]).into_iter().map(|b| Blk { b, n: None }));
                }
                normalize_blocks(out, prune)
            })
            .collect();
        let mut levels = vec![base.clone()];
        for _ in 0..=self.graph.h {
            let prev = levels.last().unwrap();
            let next: Vec<Vec<Blk>> = (0..n)
                .map(|t| {
                    let mut out = base[t].clone();
                    if self.in_i.contains(t) {
                        for (lhs, p) in sets.tgd.iter().chain(&sets.jd) {
                            if prev[*p].is_empty() || lhs.contains(p) && lhs.len() > 1 {
                                continue;
                            }
                            for s in self.rewrite_options(t, lhs, &through[t]) {
                                for blk in &prev[*p] {
                                    let mut b = s.clone();
                                    b.union_with(&blk.b);
                                    out.push(Blk { b, n: blk.n });
                                }
                            }
                        }
                    }
                    normalize_blocks(out, prune)
                })
                .collect();
            levels.push(next);
        }
        self.block_levels = levels;
    }

    fn blocks_of(&self, x: usize) -> &[Blk] {
        &self.block_levels.last().unwrap()[x]
    }

    fn to_block(&self, b: &Blk) -> Block {
        Block { require: self.rules.to_instance(&b.b), forbid: b.n.map(|x| self.rules.facts[x].clone()) }
    }

    /// `Supp(t)` for every hull fact.
    pub fn supports(&self) -> BTreeMap<Fact, Vec<Instance>> {
        (0..self.width())
            .map(|x| {
                let v = self.supports_of(x).iter().map(|b| self.rules.to_instance(b)).collect();
                (self.rules.facts[x].clone(), v)
            })
            .collect()
    }

    /// `Block(t)` for every hull fact.
    pub fn blocks(&self) -> BTreeMap<Fact, Vec<Block>> {
        (0..self.width())
            .map(|x| (self.rules.facts[x].clone(), self.blocks_of(x).iter().map(|b| self.to_block(b)).collect()))
            .collect()
    }

    /// `Supp^ℓ(t)` for ℓ = -1..=h, or `None` outside the hull.
    pub fn support_levels(&self, t: &Fact) -> Option<Vec<Vec<Instance>>> {
        let x = self.rules.id(t)?;
        Some(self.supp_levels.iter().map(|l| l[x].iter().map(|b| self.rules.to_instance(b)).collect()).collect())
    }

    /// `Block^ℓ(t)` for ℓ = -1..=h, or `None` outside the hull.
    pub fn block_levels(&self, t: &Fact) -> Option<Vec<Vec<Block>>> {
        let x = self.rules.id(t)?;
        Some(self.block_levels.iter().map(|l| l[x].iter().map(|b| self.to_block(b)).collect()).collect())
    }

    pub fn hull_facts(&self) -> &[Fact] {
        &self.rules.facts
    }

    /// Whether some repair contains every fact of `required` and none of
    /// `forbidden`; returns the canonically first realizable combination.
    pub fn exists_repair(&self, required: &BTreeSet<Fact>, forbidden: &BTreeSet<Fact>) -> Option<Combination> {
        let mut req = Vec::new();
        for f in required {
            req.push(self.rules.id(f)?);
        }
        let forb: Vec<usize> = forbidden.iter().filter_map(|f| self.rules.id(f)).collect();
        let mut choice_s = Vec::with_capacity(req.len());
        let mut choice_b = Vec::with_capacity(forb.len());
        let p = Bits::with_capacity(self.width());
        let nset = Bits::with_capacity(self.width());
        if !self.search(&req, &forb, &mut choice_s, &mut choice_b, p, nset) {
            return None;
        }
        let sup: Vec<(Fact, Instance)> = req
            .iter()
            .zip(&choice_s)
            .map(|(&x, &c)| (self.rules.facts[x].clone(), self.rules.to_instance(&self.supports_of(x)[c])))
            .collect();
        let blk: Vec<(Fact, Block)> = forb
            .iter()
            .zip(&choice_b)
            .map(|(&x, &c)| (self.rules.facts[x].clone(), self.to_block(&self.blocks_of(x)[c])))
            .collect();
        let present: Instance = sup
            .iter()
            .flat_map(|(_, s)| s.iter().cloned())
            .chain(blk.iter().flat_map(|(_, b)| b.require.iter().cloned()))
            .collect();
        let absent: Instance = blk.iter().filter_map(|(_, b)| b.forbid.clone()).collect();
        let repair = self.repair_containing(&present);
        Some(Combination { supports: sup, blocks: blk, present, absent, repair })
    }

    fn realizable(&self, p: &Bits, nset: &Bits) -> bool {
        let closed = self.tgds.closure_bits(p.clone());
        closed.is_disjoint(nset) && self.rules.consistent(&closed)
    }

    /// Depth-first over supports then blocks. A partial combination that
    /// already fails stays failing, since closure, conflicts and the
    /// forbidden set only grow.
    fn search(
        &self,
        req: &[usize],
        forb: &[usize],
        cs: &mut Vec<usize>,
        cb: &mut Vec<usize>,
        p: Bits,
        nset: Bits,
    ) -> bool {
        if !self.realizable(&p, &nset) {
            return false;
        }
        if cs.len() < req.len() {
            for (k, s) in self.supports_of(req[cs.len()]).iter().enumerate() {
                let mut p2 = p.clone();
                p2.union_with(s);
                cs.push(k);
                if self.search(req, forb, cs, cb, p2, nset.clone()) {
                    return true;
                }
                cs.pop();
            }
            return false;
        }
        if cb.len() < forb.len() {
            for (k, b) in self.blocks_of(forb[cb.len()]).iter().enumerate() {
                let mut p2 = p.clone();
                p2.union_with(&b.b);
                let mut n2 = nset.clone();
                if let Some(x) = b.n {
                    n2.insert(x);
                }
                cb.push(k);
                if self.search(req, forb, cs, cb, p2, n2) {
                    return true;
                }
                cb.pop();
            }
            return false;
        }
        true
    }

    /// The banned-set algorithm choosing `present` first without restraint, then the
    /// rest of `I` refusing any new derived fact.
    fn repair_containing(&self, present: &Instance) -> Instance {
        let rest = self.instance.difference(present);
        let order: Vec<Fact> = present.iter().chain(rest.iter()).cloned().collect();
        let script = present.iter().map(|_| false).chain(rest.iter().map(|_| true)).collect();
        let strategy = RepairStrategy { fact_order: FactOrder::Explicit(order), b_chooser: BChooser::Scripted(script) };
        construct_repair(&self.instance, &self.constraints, &strategy).expect("supported class")
    }

    pub fn answer(&self, q: &Query) -> Result<CqaAnswer, CqaError> {
        let cnf = to_cnf(q, self.opts.cnf_cap)?;
        for (k, clause) in cnf.iter().enumerate() {
            let required: BTreeSet<Fact> = clause.iter().filter(|l| !l.positive).map(|l| l.fact.clone()).collect();
            let forbidden: BTreeSet<Fact> = clause.iter().filter(|l| l.positive).map(|l| l.fact.clone()).collect();
            if let Some(w) = self.exists_repair(&required, &forbidden) {
                return Ok(CqaAnswer { consistent: false, cnf: cnf.clone(), failing_clause: Some(k), witness: Some(w) });
            }
        }
        Ok(CqaAnswer { consistent: true, cnf, failing_clause: None, witness: None })
    }

    /// Supports, blocks and the answer as pretty JSON.
    pub fn explain_json(&self, answer: &CqaAnswer) -> String {
        let str_map = |m: BTreeMap<Fact, Vec<Instance>>| -> BTreeMap<String, Vec<Instance>> {
            m.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
        };
        let blocks: BTreeMap<String, Vec<Block>> = self.blocks().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let v = serde_json::json!({
            "consistent": answer.consistent,
            "cnf": answer.cnf,
            "failing_clause": answer.failing_clause,
            "witness": answer.witness,
            "h": self.graph.h,
            "supports": str_map(self.supports()),
            "blocks": blocks,
        });
        serde_json::to_string_pretty(&v).expect("serializable")
    }
}

pub fn compute_supports(i: &Instance, f: &[UniversalConstraint]) -> Result<BTreeMap<Fact, Vec<Instance>>, CqaError> {
    Ok(CqaContext::new(i, f, CqaOptions::default())?.supports())
}

pub fn compute_blocks(i: &Instance, f: &[UniversalConstraint]) -> Result<BTreeMap<Fact, Vec<Block>>, CqaError> {
    Ok(CqaContext::new(i, f, CqaOptions::default())?.blocks())
}

pub fn exists_repair(required: &BTreeSet<Fact>, forbidden: &BTreeSet<Fact>, ctx: &CqaContext) -> bool {
    ctx.exists_repair(required, forbidden).is_some()
}

/// Whether `q` holds in every repair of `i`.
pub fn cqa(q: &Query, i: &Instance, f: &[UniversalConstraint]) -> Result<bool, CqaError> {
    Ok(CqaContext::new(i, f, CqaOptions::default())?.answer(q)?.consistent)
}

/// Conjunctive normal form as clauses of literals. Tautological clauses are
/// dropped; `true` has no clauses and `false` one empty clause.
pub fn to_cnf(q: &Query, cap: usize) -> Result<Vec<Vec<Literal>>, CqaError> {
    fn go(q: &Query, neg: bool, cap: usize) -> Result<Vec<BTreeSet<Literal>>, CqaError> {
        Ok(match (q, neg) {
            (Query::True, false) | (Query::False, true) => Vec::new(),
            (Query::True, true) | (Query::False, false) => vec![BTreeSet::new()],
            (Query::Atom(f), _) => {
                let l = if neg { Literal::neg(f.clone()) } else { Literal::pos(f.clone()) };
                vec![BTreeSet::from([l])]
            }
            (Query::Not(q), _) => go(q, !neg, cap)?,
            (Query::And(qs), false) | (Query::Or(qs), true) => {
                let mut out = Vec::new();
                for q in qs {
                    out.extend(go(q, neg, cap)?);
                    if out.len() > cap {
                        return Err(CqaError::CnfCap(cap));
                    }
                }
                out
            }
            (Query::Or(qs), false) | (Query::And(qs), true) => {
                let mut acc: Vec<BTreeSet<Literal>> = vec![BTreeSet::new()];
                for q in qs {
                    let part = go(q, neg, cap)?;
                    let mut next = Vec::new();
                    for a in &acc {
                        for b in &part {
                            let c: BTreeSet<Literal> = a.union(b).cloned().collect();
                            if !c.iter().any(|l| c.contains(&l.negated())) {
                                next.push(c);
                            }
                        }
                        if next.len() > cap {
                            return Err(CqaError::CnfCap(cap));
                        }
                    }
                    acc = next;
                }
                acc
            }
        })
    }
    let mut clauses = go(q, false, cap)?;
    clauses.retain(|c| !c.iter().any(|l| c.contains(&l.negated())));
    clauses.sort();
    clauses.dedup();
    Ok(clauses.into_iter().map(|c| c.into_iter().collect()).collect())
}
