//! Brute-force ground truth and instance generators.
//!
//! Nothing here shares code with the polynomial algorithms in [`crate::repair`]
//! and [`crate::cqa`] beyond grounding, so the two can be checked against each
//! other.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::grounding::{ConflictHypergraph, Grounding, IndexedRules};
use crate::model::{eval_query, Constant, Fact, Instance, Literal, Query, Schema, UniversalConstraint};
use crate::parser::{
    parse_constraints, parse_schema, serialize_constraints, serialize_instance, serialize_query, serialize_schema,
};

/// Largest hull the subset enumerator accepts by default.
pub const DEFAULT_CAP: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("hull has {size} facts, over the enumeration cap of {cap}")]
    Cap { size: usize, cap: usize },
    #[error("vertex {0} has no incident edge")]
    IsolatedVertex(usize),
    #[error("bad graph: {0}")]
    BadGraph(String),
    #[error("bad formula: {0}")]
    BadFormula(String),
    #[error("{0} constraints are outside the full TGD and denial class")]
    Unsupported(&'static str),
}

/// A schema, constraints, instance and query, as produced by the generators.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub schema: Schema,
    pub constraints: Vec<UniversalConstraint>,
    pub instance: Instance,
    pub query: Query,
    /// Named facts of interest, e.g. `r` and `q1` in the reductions.
    pub marked: BTreeMap<String, Fact>,
}

/// The text forms of a [`Scenario`], one per input file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioText {
    pub schema: String,
    pub constraints: String,
    pub instance: String,
    pub query: String,
}

impl Scenario {
    pub fn texts(&self) -> ScenarioText {
        ScenarioText {
            schema: serialize_schema(&self.schema),
            constraints: serialize_constraints(&self.constraints),
            instance: serialize_instance(&self.instance),
            query: serialize_query(&self.query),
        }
    }

    pub fn mark(&self, name: &str) -> &Fact {
        &self.marked[name]
    }
}

// ---------------------------------------------------------------------------
// Repairs by exhaustive search

/// Every repair of `i` w.r.t. `f`, sorted.
///
/// Depth-first search over the positive hull, trying the value that agrees
/// with `i` first. A branch dies when a fully decided ground rule is
/// violated, or when the differences fixed so far already contain the
/// difference of a consistent set found earlier. Survivors are filtered for
/// minimality at the end. Works for any universal constraints.
pub fn enumerate_repairs(i: &Instance, f: &[UniversalConstraint], cap: usize) -> Result<Vec<Instance>, OracleError> {
    let ir = Grounding::new(i, f).indexed();
    if ir.len() > cap {
        return Err(OracleError::Cap { size: ir.len(), cap });
    }
    let mut s = SubsetSearch::new(&ir, i);
    s.run(0);
    let found = minimal_by_delta(s.found);
    let mut out: Vec<Instance> = found.iter().map(|(b, _)| ir.to_instance(b)).collect();
    out.sort();
    Ok(out)
}

struct SubsetSearch<'a> {
    ir: &'a IndexedRules,
    in_i: FixedBitSet,
    mentions: Vec<Vec<usize>>,
    value: Vec<Option<bool>>,
    delta: FixedBitSet,
    found: Vec<(FixedBitSet, FixedBitSet)>,
}

impl<'a> SubsetSearch<'a> {
    fn new(ir: &'a IndexedRules, i: &Instance) -> Self {
        let n = ir.len();
        let mut in_i = FixedBitSet::with_capacity(n);
        for (k, f) in ir.facts.iter().enumerate() {
            if i.contains(f) {
                in_i.insert(k);
            }
        }
        let mut mentions = vec![Vec::new(); n];
        for (r, rule) in ir.rules.iter().enumerate() {
            for &x in rule.lhs.iter().chain(&rule.rhs) {
                if mentions[x].last() != Some(&r) {
                    mentions[x].push(r);
                }
            }
        }
        SubsetSearch { ir, in_i, mentions, value: vec![None; n], delta: FixedBitSet::with_capacity(n), found: Vec::new() }
    }

    fn violated(&self, r: usize) -> bool {
        let rule = &self.ir.rules[r];
        rule.lhs.iter().all(|&l| self.value[l] == Some(true)) && rule.rhs.iter().all(|&h| self.value[h] == Some(false))
    }

    fn run(&mut self, x: usize) {
        if self.found.iter().any(|(_, d)| d.is_subset(&self.delta)) {
            return;
        }
        if x == self.ir.len() {
            let mut bits = FixedBitSet::with_capacity(x);
            bits.extend((0..x).filter(|&k| self.value[k] == Some(true)));
            self.found.push((bits, self.delta.clone()));
            return;
        }
        let keep = self.in_i.contains(x);
        for v in [keep, !keep] {
            self.value[x] = Some(v);
            self.delta.set(x, v != keep);
            if !self.mentions[x].iter().any(|&r| self.violated(r)) {
                self.run(x + 1);
            }
        }
        self.value[x] = None;
        self.delta.set(x, false);
    }
}

fn minimal_by_delta(sets: Vec<(FixedBitSet, FixedBitSet)>) -> Vec<(FixedBitSet, FixedBitSet)> {
    let keep: Vec<bool> = sets
        .iter()
        .map(|(_, d)| !sets.iter().any(|(_, e)| e != d && e.is_subset(d)))
        .collect();
    sets.into_iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s).collect()
}

/// Every repair, read off the maximal independent sets of the extended
/// conflict hypergraph: their positive projections that are consistent and
/// minimal in the difference order. No size cap; the search is driven by
/// the hypergraph rather than by subsets of the hull.
pub fn repairs_via_mis(i: &Instance, f: &[UniversalConstraint]) -> Vec<Instance> {
    let g = Grounding::new(i, f);
    let ir = g.indexed();
    let mut cands: BTreeSet<FixedBitSet> = BTreeSet::new();
    for m in maximal_independent_sets(&g.hypergraph()) {
        let pos = m.iter().filter(|l| l.positive).map(|l| &l.fact);
        let bits = ir.to_bits(pos).expect("hypergraph vertices lie in the hull");
        if ir.consistent(&bits) {
            cands.insert(bits);
        }
    }
    let in_i = ir.to_bits(i.iter().filter(|f| ir.id(f).is_some())).unwrap();
    let sets = cands
        .into_iter()
        .map(|b| {
            let mut d = b.clone();
            d.symmetric_difference_with(&in_i);
            (b, d)
        })
        .collect();
    let mut out: Vec<Instance> = minimal_by_delta(sets).iter().map(|(b, _)| ir.to_instance(b)).collect();
    out.sort();
    out
}

/// Every repair under full TGDs and denials, found by deciding which facts
/// of `i` to keep. No size cap.
///
/// A candidate is the closure of the kept facts; it must be consistent and
/// must not re-derive a dropped fact. Every dropped fact must end up blocked:
/// adding it back either breaks a denial or derives a fact outside `i` that
/// the candidate lacks. A branch is cut once some dropped fact cannot be
/// blocked even if every still-compatible undecided fact were kept. Each
/// result is then confirmed minimal straight from the definition.
pub fn repairs_by_kept_facts(i: &Instance, f: &[UniversalConstraint]) -> Result<Vec<Instance>, OracleError> {
    if let Some(c) = f.iter().find(|c| !c.kind.is_tgd_or_denial()) {
        return Err(OracleError::Unsupported(c.kind.name()));
    }
    let ir = Grounding::new(i, f).indexed();
    let n = ir.len();
    let order: Vec<usize> = i.iter().map(|f| ir.id(f).expect("instance facts lie in the hull")).collect();
    let mut in_i = FixedBitSet::with_capacity(n);
    in_i.extend(order.iter().copied());
    let mut s = KeptSearch { ir: &ir, in_i, order, kept: FixedBitSet::with_capacity(n), dropped: FixedBitSet::with_capacity(n), out: Vec::new() };
    let empty = FixedBitSet::with_capacity(n);
    s.run(0, empty.clone(), empty.clone(), empty);
    for j in &s.out {
        assert!(delta_minimal(&ir, &s.in_i, j), "kept-fact search produced a non-minimal set");
    }
    let mut out: Vec<Instance> = s.out.iter().map(|b| ir.to_instance(b)).collect();
    out.sort();
    Ok(out)
}

struct KeptSearch<'a> {
    ir: &'a IndexedRules,
    in_i: FixedBitSet,
    order: Vec<usize>,
    kept: FixedBitSet,
    dropped: FixedBitSet,
    out: Vec<FixedBitSet>,
}

impl KeptSearch<'_> {
    /// Closure of the closed set `base` plus `add`, whether it stays
    /// consistent, and whether it stays clear of dropped facts. Only rules
    /// touching a new fact can fire, so the work is local.
    fn grow(&self, base: &FixedBitSet, add: &[usize]) -> (FixedBitSet, bool, bool) {
        let mut b = base.clone();
        let mut work: Vec<usize> = add.iter().copied().filter(|&x| !base.contains(x)).collect();
        work.iter().for_each(|&x| b.insert(x));
        let (mut consistent, mut clear) = (true, true);
        while let Some(x) = work.pop() {
            clear &= !self.dropped.contains(x);
            for &r in &self.ir.by_lhs[x] {
                let rule = &self.ir.rules[r];
                if !rule.lhs.iter().all(|&l| b.contains(l)) {
                    continue;
                }
                match rule.rhs.as_slice() {
                    [] => consistent = false,
                    &[h] if !b.contains(h) => {
                        b.insert(h);
                        work.push(h);
                    }
                    _ => {}
                }
            }
        }
        (b, consistent, clear)
    }

    /// Whether dropped fact `t` may still be blocked when the closure of the
    /// final kept set lies between `j` and `upper`.
    fn blockable(&self, t: usize, upper: &FixedBitSet, j: &FixedBitSet) -> bool {
        let (m, ..) = self.grow(upper, &[t]);
        let mut reach = FixedBitSet::with_capacity(m.len());
        reach.insert(t);
        let mut work = vec![t];
        while let Some(x) = work.pop() {
            if !self.in_i.contains(x) && !j.contains(x) {
                return true;
            }
            for &r in &self.ir.by_lhs[x] {
                let rule = &self.ir.rules[r];
                if !rule.lhs.iter().all(|&l| m.contains(l)) {
                    continue;
                }
                match rule.rhs.as_slice() {
                    [] => return true,
                    &[h] if !reach.contains(h) => {
                        reach.insert(h);
                        work.push(h);
                    }
                    _ => {}
                }
            }
        }
        false
    }

    /// `settled` holds dropped facts already in conflict with `j`, which stay
    /// blocked below this node; `dead` holds undecided facts that can no
    /// longer be kept.
    fn run(&mut self, pos: usize, j: FixedBitSet, mut settled: FixedBitSet, mut dead: FixedBitSet) {
        let mut live = Vec::new();
        for &u in &self.order[pos..] {
            if !dead.contains(u) {
                let (_, consistent, clear) = self.grow(&j, &[u]);
                if consistent && clear {
                    live.push(u);
                } else {
                    dead.insert(u);
                }
            }
        }
        let (upper, ..) = self.grow(&j, &live);
        let open: Vec<usize> = self.dropped.ones().filter(|&t| !settled.contains(t)).collect();
        for t in open {
            if !self.grow(&j, &[t]).1 {
                settled.insert(t);
            } else if !self.blockable(t, &upper, &j) {
                return;
            }
        }
        let Some(&u) = self.order.get(pos) else {
            self.out.push(j);
            return;
        };
        if !dead.contains(u) {
            let (jp, ..) = self.grow(&j, &[u]);
            self.kept.insert(u);
            self.run(pos + 1, jp, settled.clone(), dead.clone());
            self.kept.set(u, false);
        }
        if !j.contains(u) {
            self.dropped.insert(u);
            self.run(pos + 1, j, settled, dead);
            self.dropped.set(u, false);
        }
    }
}

/// No consistent subset of the hull is strictly closer to `i` than `j`:
/// search over undoing any non-empty part of the difference.
fn delta_minimal(ir: &IndexedRules, in_i: &FixedBitSet, j: &FixedBitSet) -> bool {
    fn go(ir: &IndexedRules, free: &[usize], k: usize, cur: &mut FixedBitSet, flipped: bool, decided: &mut FixedBitSet) -> bool {
        let dead = |cur: &FixedBitSet, decided: &FixedBitSet| {
            ir.rules.iter().any(|r| {
                r.lhs.iter().chain(&r.rhs).all(|&x| decided.contains(x)) && !ir.satisfied(r, cur)
            })
        };
        if dead(cur, decided) {
            return false;
        }
        if k == free.len() {
            return flipped;
        }
        let x = free[k];
        decided.insert(x);
        let orig = cur.contains(x);
        for (v, fl) in [(!orig, true), (orig, flipped)] {
            cur.set(x, v);
            if go(ir, free, k + 1, cur, fl, decided) {
                return true;
            }
        }
        cur.set(x, orig);
        decided.set(x, false);
        false
    }
    let mut delta = j.clone();
    delta.symmetric_difference_with(in_i);
    let free: Vec<usize> = delta.ones().collect();
    let mut decided = FixedBitSet::with_capacity(ir.len());
    decided.insert_range(..);
    free.iter().for_each(|&x| decided.set(x, false));
    let mut cur = j.clone();
    !go(ir, &free, 0, &mut cur, false, &mut decided)
}

/// Whether `q` holds in every repair, by enumeration.
pub fn brute_cqa(q: &Query, i: &Instance, f: &[UniversalConstraint], cap: usize) -> Result<bool, OracleError> {
    Ok(enumerate_repairs(i, f, cap)?.iter().all(|r| eval_query(q, r)))
}

// ---------------------------------------------------------------------------
// Maximal independent sets

/// All maximal independent sets of `g`, each sorted, in discovery order.
///
/// Backtracking over vertices with inclusion tried first. An excluded vertex
/// must end up blocked by an edge whose other members are all included, so a
/// branch is cut as soon as some excluded vertex has no such edge left.
pub fn maximal_independent_sets(g: &ConflictHypergraph) -> Vec<BTreeSet<Literal>> {
    let edges: Vec<Vec<usize>> = {
        let id: BTreeMap<&Literal, usize> = g.vertices.iter().enumerate().map(|(k, v)| (v, k)).collect();
        let set: BTreeSet<Vec<usize>> = g.edges().map(|e| e.iter().map(|l| id[l]).collect()).collect();
        set.into_iter().collect()
    };
    let n = g.vertices.len();
    let mut incident = vec![Vec::new(); n];
    for (k, e) in edges.iter().enumerate() {
        for &v in e {
            incident[v].push(k);
        }
    }
    let mut s = MisSearch {
        edges: &edges,
        incident: &incident,
        state: vec![0; n],
        inside: vec![0; edges.len()],
        outside: vec![0; edges.len()],
        out: Vec::new(),
    };
    s.run(0);
    s.out
        .into_iter()
        .map(|m| m.into_iter().map(|k| g.vertices[k].clone()).collect())
        .collect()
}

struct MisSearch<'a> {
    edges: &'a [Vec<usize>],
    incident: &'a [Vec<usize>],
    /// 0 undecided, 1 included, 2 excluded.
    state: Vec<u8>,
    inside: Vec<usize>,
    outside: Vec<usize>,
    out: Vec<Vec<usize>>,
}

impl MisSearch<'_> {
    fn blockable(&self, v: usize) -> bool {
        self.incident[v].iter().any(|&e| self.outside[e] == 1)
    }

    fn run(&mut self, v: usize) {
        if v == self.state.len() {
            self.out.push((0..v).filter(|&k| self.state[k] == 1).collect());
            return;
        }
        if self.incident[v].iter().all(|&e| self.inside[e] + 1 < self.edges[e].len()) {
            self.state[v] = 1;
            self.incident[v].iter().for_each(|&e| self.inside[e] += 1);
            self.run(v + 1);
            self.incident[v].iter().for_each(|&e| self.inside[e] -= 1);
        }
        self.state[v] = 2;
        self.incident[v].iter().for_each(|&e| self.outside[e] += 1);
        let ok = self.blockable(v)
            && self.incident[v].iter().all(|&e| {
                self.edges[e].iter().all(|&u| u == v || self.state[u] != 2 || self.blockable(u))
            });
        if ok {
            self.run(v + 1);
        }
        self.incident[v].iter().for_each(|&e| self.outside[e] -= 1);
        self.state[v] = 0;
    }
}

// ---------------------------------------------------------------------------
// Graph colouring and QBF

/// Whether the graph on vertices `0..n` has a proper 3-colouring.
pub fn three_colorable(n: usize, edges: &[(usize, usize)]) -> bool {
    fn go(v: usize, n: usize, adj: &[Vec<usize>], col: &mut [u8]) -> bool {
        if v == n {
            return true;
        }
        for c in 1..=3 {
            if adj[v].iter().all(|&u| col[u] != c) {
                col[v] = c;
                if go(v + 1, n, adj, col) {
                    return true;
                }
            }
        }
        col[v] = 0;
        false
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    go(0, n, &adj, &mut vec![0; n])
}

/// Every connected simple graph on vertices `0..n`, as sorted edge lists.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let es: Vec<(usize, usize)> = pairs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &p)| p).collect();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &es {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        if seen.iter().all(|&s| s) {
            out.push(es);
        }
    }
    out
}

/// One representative per isomorphism class of [`connected_graphs`]: the
/// lexicographically least relabelled edge list.
pub fn connected_graph_classes(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for k in 0..n {
                let mut q = p.clone();
                q.insert(k, n - 1);
                out.push(q);
            }
        }
        out
    }
    let ps = perms(n);
    let canon = |es: &[(usize, usize)]| {
        ps.iter()
            .map(|p| {
                let mut v: Vec<(usize, usize)> = es.iter().map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b]))).collect();
                v.sort();
                v
            })
            .min()
            .unwrap()
    };
    let classes: BTreeSet<Vec<(usize, usize)>> = connected_graphs(n).iter().map(|es| canon(es)).collect();
    classes.into_iter().collect()
}

/// `∀x1..xn ∃x(n+1)..x(n+m) ⋀ clauses`. Literals are non-zero integers:
/// `k` stands for `xk` and `-k` for its negation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Qbf {
    pub universal: usize,
    pub existential: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl Qbf {
    pub fn vars(&self) -> usize {
        self.universal + self.existential
    }

    fn check(&self) -> Result<(), OracleError> {
        let n = self.vars() as i32;
        if let Some(l) = self.clauses.iter().flatten().find(|&&l| l == 0 || l.abs() > n) {
            return Err(OracleError::BadFormula(format!("literal {l} outside 1..={n}")));
        }
        let distinct: BTreeSet<BTreeSet<i32>> = self.clauses.iter().map(|c| c.iter().copied().collect()).collect();
        if distinct.len() != self.clauses.len() {
            return Err(OracleError::BadFormula("clauses are not distinct".into()));
        }
        Ok(())
    }

    fn satisfied(&self, val: u64) -> bool {
        let lit = |l: i32| (val >> (l.unsigned_abs() - 1) & 1 == 1) == (l > 0);
        self.clauses.iter().all(|c| c.iter().any(|&l| lit(l)))
    }
}

/// Truth-table evaluation of the prefix.
pub fn qbf_valid(psi: &Qbf) -> bool {
    let (n, m) = (psi.universal, psi.existential);
    (0u64..1 << n).all(|u| (0u64..1 << m).any(|e| psi.satisfied(u | e << n)))
}

// ---------------------------------------------------------------------------
// Reductions

fn rat(v: usize) -> Constant {
    Constant::int(v as i64)
}

/// Instance whose repairs encode 3-colourings of the graph on `0..n`.
///
/// Vertex `v` becomes `i = v + 1` and the `j`-th edge (1-based, in input
/// order) contributes `R(i, k, j-1, j)` for both endpoints and every colour
/// `k`. The key on `R` forces one colour per vertex, and the rule
/// `R(x1,y1,z1,z2), R(x2,y2,z1,z2), P(z1), y1 != y2 -> P(z2)` walks a chain of
/// `P` facts from `P(0)` through every properly coloured edge. The graph is
/// 3-colourable iff some repair drops `r`, the query.
pub fn reduce_3col(n: usize, edges: &[(usize, usize)]) -> Result<Scenario, OracleError> {
    let mut seen = BTreeSet::new();
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(OracleError::BadGraph(format!("edge ({a}, {b}) leaves 0..{n}")));
        }
        if a == b {
            return Err(OracleError::BadGraph(format!("self-loop on {a}")));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(OracleError::BadGraph(format!("duplicate edge ({a}, {b})")));
        }
    }
    if let Some(v) = (0..n).find(|&v| !edges.iter().any(|&(a, b)| a == v || b == v)) {
        return Err(OracleError::IsolatedVertex(v));
    }
    let schema = parse_schema("relation R(A: rat, B: rat, C: rat, D: rat).\nrelation P(C: rat).\n").expect("fixed schema");
    let constraints = parse_constraints(
        "fd R: A -> B.\nR(x1, y1, z1, z2), R(x2, y2, z1, z2), P(z1), y1 != y2 -> P(z2).\n",
        &schema,
    )
    .expect("fixed constraints");
    let m = edges.len();
    let mut instance = Instance::new();
    for (j, &(a, b)) in edges.iter().enumerate() {
        for v in [a, b] {
            for k in 1..=3 {
                instance.insert(Fact::new("R", vec![rat(v + 1), rat(k), rat(j), rat(j + 1)]));
            }
        }
    }
    let mut marked = BTreeMap::new();
    marked.insert("q0".to_string(), Fact::new("P", vec![rat(0)]));
    marked.insert("r".to_string(), Fact::new("R", vec![rat(n + 1), rat(0), rat(m), rat(m + 1)]));
    marked.insert("r'".to_string(), Fact::new("R", vec![rat(n + 2), rat(1), rat(m), rat(m + 1)]));
    instance.extend(marked.values().cloned());
    Ok(Scenario { schema, constraints, instance, query: Query::atom(marked["r"].clone()), marked })
}

/// Instance whose unique-answer question encodes validity of `psi`.
///
/// `R(A1,B1,A2,B2)` holds one fact per variable and truth value: `A1` is the
/// variable, `B1` the value, `A2` is 1 for existential variables. The keys
/// `A1 -> B1` and `A2 -> B2` make each variable take one value and make the
/// fact `r = R(0,1,1,1)` clash with every existential choice. Clause `j`
/// becomes a `D` fact whose four `R` components are its literals and `r`,
/// and `D(x1..x4) -> R(x1) | .. | R(x4)` demands one of them. `psi` is valid
/// iff `r̄ = R(0,0,0,0)`, the query, is in every repair.
pub fn reduce_qbf(psi: &Qbf) -> Result<Scenario, OracleError> {
    psi.check()?;
    let schema = parse_schema(
        "relation R(A1: rat, B1: rat, A2: rat, B2: rat).\n\
         relation D(A1: rat, B1: rat, C1: rat, D1: rat, A2: rat, B2: rat, C2: rat, D2: rat, \
         A3: rat, B3: rat, C3: rat, D3: rat, A4: rat, B4: rat, C4: rat, D4: rat).\n",
    )
    .expect("fixed schema");
    let constraints = parse_constraints(
        "fd R: 1 -> 2.\nfd R: 3 -> 4.\n\
         D(a1, b1, c1, d1, a2, b2, c2, d2, a3, b3, c3, d3, a4, b4, c4, d4) -> \
         R(a1, b1, c1, d1) | R(a2, b2, c2, d2) | R(a3, b3, c3, d3) | R(a4, b4, c4, d4).\n",
        &schema,
    )
    .expect("fixed constraints");
    let ex = |v: usize| usize::from(v > psi.universal);
    let mut marked = BTreeMap::new();
    for v in 1..=psi.vars() {
        marked.insert(format!("p{v}"), Fact::new("R", vec![rat(v), rat(1), rat(ex(v)), rat(0)]));
        marked.insert(format!("~p{v}"), Fact::new("R", vec![rat(v), rat(0), rat(ex(v)), rat(0)]));
    }
    for (j, c) in psi.clauses.iter().enumerate() {
        let mut args = Vec::with_capacity(16);
        for &l in c {
            let v = l.unsigned_abs() as usize;
            args.extend([rat(v), rat(usize::from(l > 0)), rat(ex(v)), rat(0)]);
        }
        args.extend([rat(0), rat(1), rat(1), rat(1)]);
        marked.insert(format!("q{}", j + 1), Fact::new("D", args));
    }
    let r = Fact::new("R", vec![rat(0), rat(1), rat(1), rat(1)]);
    let rbar = Fact::new("R", vec![rat(0), rat(0), rat(0), rat(0)]);
    let mut instance: Instance = marked.values().cloned().collect();
    instance.insert(rbar.clone());
    marked.insert("r".into(), r);
    marked.insert("~r".into(), rbar.clone());
    Ok(Scenario { schema, constraints, instance, query: Query::atom(rbar), marked })
}

// ---------------------------------------------------------------------------
// Random scenarios

/// Constraint families for [`gen_random`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    /// Keys and other denial constraints only.
    Denial,
    /// Acyclic full TGDs together with denials.
    AcyclicTgd,
    /// A join dependency, optionally with acyclic TGDs and denials.
    Jd,
    /// Full TGDs whose dependency graph has a cycle.
    CyclicTgd,
    /// Constraints with disjunctive rhs.
    Universal,
}

/// `(name, arity, domain size)` of a generated relation.
type RelationSpec = (&'static str, usize, usize);

impl Profile {
    pub const ALL: [Profile; 5] = [Profile::Denial, Profile::AcyclicTgd, Profile::Jd, Profile::CyclicTgd, Profile::Universal];

    pub fn name(self) -> &'static str {
        match self {
            Profile::Denial => "denial",
            Profile::AcyclicTgd => "acyclic-tgd",
            Profile::Jd => "jd",
            Profile::CyclicTgd => "cyclic-tgd",
            Profile::Universal => "universal",
        }
    }

    pub fn parse(s: &str) -> Option<Profile> {
        Profile::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Relations, then the required and optional constraint pools.
    fn pools(self) -> (&'static [RelationSpec], &'static [&'static str], &'static [&'static str]) {
        const R2: &[(&str, usize, usize)] = &[("R", 2, 3), ("S", 2, 3), ("P", 2, 3), ("Q", 1, 3)];
        const R3: &[(&str, usize, usize)] = &[("R", 3, 2), ("P", 1, 2), ("Q", 1, 2)];
        const DENIALS: &[&str] = &[
            "fd R: A -> B.",
            "fd S: A -> B.",
            "R(x, y), S(y, z) -> false.",
            "R(x, y), S(x, y) -> false.",
            "R(x, x) -> false.",
            "R(x, y), R(y, x), x < y -> false.",
        ];
        match self {
            Profile::Denial => (R2, &[], DENIALS),
            Profile::AcyclicTgd => (
                R2,
                &["R(x, y) -> P(x, y).", "R(x, y), S(y, z) -> P(x, z).", "S(x, y) -> Q(x)."],
                &["P(x, y) -> Q(y).", "P(x, y), R(y, z) -> Q(z).", "fd P: A -> B.", "fd R: A -> B.", "Q(x), S(x, y) -> false.", "P(x, x) -> false."],
            ),
            Profile::Jd => (
                R3,
                &["jd R: [1, 2][2, 3].", "jd R: [1, 2][1, 3].", "jd R: [1, 3][2, 3]."],
                &["fd R: A -> B.", "R(x, y, z), P(x) -> false.", "R(x, y, z) -> Q(z).", "Q(x), P(x) -> false.", "R(x, y, z), x = z -> P(y)."],
            ),
            Profile::CyclicTgd => (
                R2,
                &["R(x, y), Q(x) -> Q(y).", "R(x, y) -> S(y, x).\nS(x, y) -> R(x, y).", "P(x, y), P(y, z) -> P(x, z)."],
                &["fd R: A -> B.", "fd P: A -> B.", "Q(x), S(x, y) -> false.", "R(x, y) -> P(x, y)."],
            ),
            Profile::Universal => (
                R2,
                &["R(x, y) -> Q(x) | Q(y).", "R(x, y), S(y, z) -> P(x, z) | Q(z)."],
                &["fd R: A -> B.", "Q(x), S(x, y) -> false.", "P(x, y) -> Q(x).", "R(x, x) -> false."],
            ),
        }
    }
}

/// Schema text for a profile's relations, attributes named `A`, `B`, `C`.
fn profile_schema(rels: &[(&str, usize, usize)]) -> Schema {
    let mut text = String::new();
    for (name, arity, _) in rels {
        let attrs: Vec<String> = ["A", "B", "C"][..*arity].iter().map(|a| format!("{a}: rat")).collect();
        text.push_str(&format!("relation {name}({}).\n", attrs.join(", ")));
    }
    parse_schema(&text).expect("profile schema")
}

/// A random scenario of the given profile whose positive hull has at most
/// `max_hull` facts. The query is a random CNF over hull facts.
pub fn gen_random(seed: u64, profile: Profile, max_hull: usize) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rels, required, optional) = profile.pools();
    let schema = profile_schema(rels);
    let mut text: Vec<&str> = Vec::new();
    if let Some(c) = required.choose(&mut rng) {
        text.push(c);
    }
    let extra = rng.gen_range(if required.is_empty() { 1 } else { 0 }..=2);
    text.extend(optional.choose_multiple(&mut rng, extra));
    let constraints = parse_constraints(&text.join("\n"), &schema).expect("profile constraints");
    for attempt in 0.. {
        let hi = if attempt < 64 { 7 } else { 3 };
        let size = rng.gen_range(1..=hi);
        let mut instance = Instance::new();
        while instance.len() < size {
            let (name, arity, dom) = rels[rng.gen_range(0..rels.len())];
            let args = (0..arity).map(|_| rat(rng.gen_range(1..=dom))).collect();
            instance.insert(Fact::new(name, args));
        }
        let hull = Grounding::new(&instance, &constraints).hull;
        if hull.positive().len() <= max_hull {
            let pool: Vec<Fact> = hull.positive().iter().cloned().collect();
            let query = random_cnf(&mut rng, &pool, 3, 3);
            return Scenario { schema, constraints, instance, query, marked: BTreeMap::new() };
        }
    }
    unreachable!()
}

/// A CNF with up to `clauses` clauses of up to `width` literals over `pool`.
pub fn random_cnf<R: Rng>(rng: &mut R, pool: &[Fact], clauses: usize, width: usize) -> Query {
    if pool.is_empty() {
        return Query::True;
    }
    let cs = (0..rng.gen_range(1..=clauses))
        .map(|_| {
            let ls = (0..rng.gen_range(1..=width))
                .map(|_| {
                    let a = Query::atom(pool.choose(rng).unwrap().clone());
                    if rng.gen_bool(0.5) {
                        a
                    } else {
                        Query::not(a)
                    }
                })
                .collect();
            Query::Or(ls)
        })
        .collect();
    Query::And(cs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fact;
    use crate::parser::{parse_instance, parse_query};
    use crate::repair::check_repair;

    fn nf() -> (Instance, Vec<UniversalConstraint>) {
        let s = parse_schema("relation NF(Name: sym, Diag: sym). relation Parent(Name: sym, Child: sym).").unwrap();
        let f = parse_constraints(
            "fd NF: Name -> Diag.\n\
             NF(x, yes), Parent(y1, x), Parent(y2, x), y1 != y2 -> NF(y1, yes) | NF(y2, yes).",
            &s,
        )
        .unwrap();
        let i = parse_instance(
            "NF(Steve, no). NF(Mary, no). NF(Donald, yes). Parent(Steve, Donald). Parent(Mary, Donald).",
            &s,
        )
        .unwrap();
        (i, f)
    }

    #[test]
    fn inheritance_has_five_repairs() {
        let (i, f) = nf();
        let reps = enumerate_repairs(&i, &f, DEFAULT_CAP).unwrap();
        assert_eq!(reps.len(), 5);
        assert_eq!(repairs_via_mis(&i, &f), reps);
        let steve_yes: Instance = [
            fact!("NF", "Steve", "yes"),
            fact!("NF", "Mary", "no"),
            fact!("NF", "Donald", "yes"),
            fact!("Parent", "Steve", "Donald"),
            fact!("Parent", "Mary", "Donald"),
        ]
        .into_iter()
        .collect();
        assert!(reps.contains(&steve_yes));
        let s = parse_schema("relation NF(Name: sym, Diag: sym).").unwrap();
        let q = parse_query("NF(Steve, no)", &s).unwrap();
        assert!(eval_query(&q, &i));
        assert!(!brute_cqa(&q, &i, &f, DEFAULT_CAP).unwrap());
    }

    #[test]
    fn coffee_shop_answers() {
        let s = parse_schema("relation CoffeeShop(Chain: sym, Location: sym, Beverage: sym).").unwrap();
        let f = parse_constraints("jd CoffeeShop: [Chain, Location][Chain, Beverage].", &s).unwrap();
        let i = parse_instance(
            "CoffeeShop(Starbucks, Delaware, Latte). CoffeeShop(Starbucks, Delaware, Espresso).\n\
             CoffeeShop(Starbucks, Main, Latte). CoffeeShop(Spot, Elmwood, Latte).",
            &s,
        )
        .unwrap();
        assert_eq!(enumerate_repairs(&i, &f, DEFAULT_CAP).unwrap().len(), 3);
        let latte = parse_query("CoffeeShop(Starbucks, Delaware, Latte)", &s).unwrap();
        let espresso = parse_query("CoffeeShop(Starbucks, Delaware, Espresso)", &s).unwrap();
        assert!(brute_cqa(&latte, &i, &f, DEFAULT_CAP).unwrap());
        assert!(!brute_cqa(&espresso, &i, &f, DEFAULT_CAP).unwrap());
    }

    #[test]
    fn cascade_has_four_repairs() {
        let s = parse_schema("relation R(A: rat, B: rat). relation P(A: rat).").unwrap();
        let f = parse_constraints("R(x, y), P(x) -> P(y).", &s).unwrap();
        let i = parse_instance("R(1, 2). R(2, 3). P(1).", &s).unwrap();
        let reps = enumerate_repairs(&i, &f, DEFAULT_CAP).unwrap();
        assert_eq!(reps.len(), 4);
        for r in &reps {
            assert!(check_repair(&i, r, &f).unwrap().verdict);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let (i, f) = nf();
        assert_eq!(enumerate_repairs(&i, &f, 3), Err(OracleError::Cap { size: 7, cap: 3 }));
    }

    #[test]
    fn single_edge_reduction() {
        let sc = reduce_3col(2, &[(0, 1)]).unwrap();
        assert_eq!(sc.instance.len(), 9);
        assert!(sc.instance.contains(sc.mark("r")));
        let reps = repairs_via_mis(&sc.instance, &sc.constraints);
        assert!(reps.iter().any(|r| !r.contains(sc.mark("r"))));
        assert_eq!(reps, enumerate_repairs(&sc.instance, &sc.constraints, DEFAULT_CAP).unwrap());
    }

    #[test]
    fn kept_fact_search_matches_subset_search() {
        for p in [Profile::Denial, Profile::AcyclicTgd, Profile::Jd, Profile::CyclicTgd] {
            for seed in 0..40 {
                let sc = gen_random(seed, p, 14);
                let want = enumerate_repairs(&sc.instance, &sc.constraints, DEFAULT_CAP).unwrap();
                assert_eq!(repairs_by_kept_facts(&sc.instance, &sc.constraints).unwrap(), want, "{} {seed}", p.name());
                assert_eq!(repairs_via_mis(&sc.instance, &sc.constraints), want, "{} {seed}", p.name());
            }
        }
        let (i, f) = nf();
        assert_eq!(repairs_by_kept_facts(&i, &f), Err(OracleError::Unsupported("universal")));
    }

    #[test]
    fn complete_graph_reductions() {
        let k = |n: usize| -> Vec<(usize, usize)> { (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect() };
        for (n, colourable) in [(3, true), (4, false)] {
            let sc = reduce_3col(n, &k(n)).unwrap();
            let reps = repairs_by_kept_facts(&sc.instance, &sc.constraints).unwrap();
            assert_eq!(reps.iter().any(|r| !r.contains(sc.mark("r"))), colourable);
        }
    }

    #[test]
    fn graph_errors() {
        assert_eq!(reduce_3col(3, &[(0, 1)]).unwrap_err(), OracleError::IsolatedVertex(2));
        assert!(matches!(reduce_3col(2, &[(0, 0)]), Err(OracleError::BadGraph(_))));
        assert!(matches!(reduce_3col(2, &[(0, 1), (1, 0)]), Err(OracleError::BadGraph(_))));
    }

    #[test]
    fn colouring_and_graphs() {
        let k4: Vec<(usize, usize)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
        assert!(!three_colorable(4, &k4));
        assert!(three_colorable(3, &[(0, 1), (1, 2), (0, 2)]));
        assert_eq!(connected_graphs(3).len(), 4);
        assert_eq!(connected_graphs(4).len(), 38);
        let counts: Vec<usize> = (1..=5).map(|n| connected_graph_classes(n).len()).collect();
        assert_eq!(counts, [1, 1, 2, 6, 21]);
    }

    #[test]
    fn qbf_truth_table() {
        let q = Qbf { universal: 1, existential: 1, clauses: vec![[1, 2, 2], [-1, -2, -2]] };
        assert!(qbf_valid(&q));
        let q = Qbf { universal: 1, existential: 1, clauses: vec![[1, 1, 2], [1, 1, -2]] };
        assert!(!qbf_valid(&q));
        assert!(reduce_qbf(&Qbf { universal: 1, existential: 0, clauses: vec![[2, 1, 1]] }).is_err());
    }

    #[test]
    fn qbf_sample_formula_edges() {
        let psi = Qbf { universal: 3, existential: 2, clauses: vec![[-1, 4, 2], [-2, -5, 3]] };
        let sc = reduce_qbf(&psi).unwrap();
        let g = Grounding::new(&sc.instance, &sc.constraints).hypergraph();
        let sizes: Vec<usize> = g.conflict_edges.iter().map(|e| e.len()).collect();
        assert_eq!(sizes.iter().filter(|&&k| k == 2).count(), 10);
        assert_eq!(sizes.iter().filter(|&&k| k == 5).count(), 2);
        assert_eq!(sizes.len(), 12);
    }

    #[test]
    fn generators_respect_cap_and_parse_back() {
        for p in Profile::ALL {
            for seed in 0..20 {
                let sc = gen_random(seed, p, 14);
                assert!(Grounding::new(&sc.instance, &sc.constraints).hull.positive().len() <= 14);
                let t = sc.texts();
                let s = parse_schema(&t.schema).unwrap();
                assert_eq!(parse_constraints(&t.constraints, &s).unwrap(), sc.constraints);
                assert_eq!(parse_instance(&t.instance, &s).unwrap(), sc.instance);
            }
        }
    }
}
