//! Deterministic serialization. Output reparses to an equal value as long
//! as no `And`/`Or` node has fewer than two children (the parser never
//! builds such nodes).

use std::fmt::Write as _;

use crate::model::{
    quote_symbol, Atom, Constant, Guard, Instance, Query, Schema, Sugar, Term, UniversalConstraint,
};

pub fn serialize_schema(s: &Schema) -> String {
    let mut out = String::new();
    for rel in s.relations() {
        let attrs: Vec<String> = rel.attrs.iter().map(|(n, t)| format!("{n}: {t}")).collect();
        let _ = writeln!(out, "relation {}({})", rel.name, attrs.join(", "));
    }
    out
}

/// One fact per line, canonical order.
pub fn serialize_instance(i: &Instance) -> String {
    let mut out = String::new();
    for f in i {
        let _ = writeln!(out, "{f}.");
    }
    out
}

fn constant(c: &Constant) -> String {
    match c {
        Constant::Sym(s) => quote_symbol(s),
        Constant::Rat(_) => c.to_string(),
    }
}

fn term(t: &Term) -> String {
    match t {
        Term::Var(v) => v.to_string(),
        Term::Const(c) => constant(c),
    }
}

fn atom(a: &Atom) -> String {
    let args: Vec<String> = a.terms.iter().map(term).collect();
    format!("{}({})", a.rel, args.join(", "))
}

fn guard_prec(g: &Guard) -> u8 {
    match g {
        Guard::Or(_) => 1,
        Guard::And(_) => 2,
        Guard::Not(_) => 3,
        _ => 4,
    }
}

/// A guard in infix syntax. Children of the same connective are
/// parenthesized so the tree shape survives reparsing.
pub fn serialize_guard(g: &Guard) -> String {
    match g {
        Guard::True => "true".into(),
        Guard::False => "false".into(),
        Guard::Cmp(l, op, r) => format!("{} {op} {}", term(l), term(r)),
        Guard::And(gs) if gs.is_empty() => "true".into(),
        Guard::Or(gs) if gs.is_empty() => "false".into(),
        Guard::And(gs) => join_guards(gs, " and ", 2),
        Guard::Or(gs) => join_guards(gs, " or ", 1),
        Guard::Not(inner) => {
            if guard_prec(inner) < 3 {
                format!("not ({})", serialize_guard(inner))
            } else {
                format!("not {}", serialize_guard(inner))
            }
        }
    }
}

fn join_guards(gs: &[Guard], sep: &str, prec: u8) -> String {
    gs.iter()
        .map(|g| {
            if guard_prec(g) <= prec {
                format!("({})", serialize_guard(g))
            } else {
                serialize_guard(g)
            }
        })
        .collect::<Vec<_>>()
        .join(sep)
}

pub fn serialize_constraint(c: &UniversalConstraint) -> String {
    match (&c.sugar, c.lhs.first()) {
        (Sugar::Fd { lhs, rhs }, Some(a)) => {
            let show = |ps: &[usize]| ps.iter().map(|p| (p + 1).to_string()).collect::<Vec<_>>().join(",");
            return format!("fd {}: {} -> {}", a.rel, show(lhs), show(rhs));
        }
        (Sugar::Jd, _) => {
            if let Some(spec) = c.jd_spec() {
                let mut out = format!("jd {}: ", spec.relation);
                for comp in &spec.components {
                    let ps: Vec<String> = comp.iter().map(|p| (p + 1).to_string()).collect();
                    let _ = write!(out, "[{}]", ps.join(","));
                }
                return out;
            }
        }
        _ => {}
    }
    let mut items: Vec<String> = c.lhs.iter().map(atom).collect();
    match &c.guard {
        Guard::True => {}
        Guard::And(gs) if gs.len() >= 2 => items.extend(gs.iter().map(serialize_guard)),
        g => items.push(serialize_guard(g)),
    }
    let rhs = if c.rhs.is_empty() {
        "false".to_string()
    } else {
        c.rhs.iter().map(atom).collect::<Vec<_>>().join(" | ")
    };
    if items.is_empty() {
        format!("-> {rhs}")
    } else {
        format!("{} -> {rhs}", items.join(", "))
    }
}

pub fn serialize_constraints(cs: &[UniversalConstraint]) -> String {
    let mut out = String::new();
    for c in cs {
        out.push_str(&serialize_constraint(c));
        out.push('\n');
    }
    out
}

fn query_prec(q: &Query) -> u8 {
    match q {
        Query::Or(_) => 1,
        Query::And(_) => 2,
        Query::Not(_) => 3,
        _ => 4,
    }
}

pub fn serialize_query(q: &Query) -> String {
    match q {
        Query::True => "true".into(),
        Query::False => "false".into(),
        Query::Atom(f) => f.to_string(),
        Query::And(qs) if qs.is_empty() => "true".into(),
        Query::Or(qs) if qs.is_empty() => "false".into(),
        Query::And(qs) => join_queries(qs, " and ", 2),
        Query::Or(qs) => join_queries(qs, " or ", 1),
        Query::Not(inner) => {
            if query_prec(inner) < 3 {
                format!("not ({})", serialize_query(inner))
            } else {
                format!("not {}", serialize_query(inner))
            }
        }
    }
}

fn join_queries(qs: &[Query], sep: &str, prec: u8) -> String {
    qs.iter()
        .map(|q| {
            if query_prec(q) <= prec {
                format!("({})", serialize_query(q))
            } else {
                serialize_query(q)
            }
        })
        .collect::<Vec<_>>()
        .join(sep)
}

impl std::fmt::Display for UniversalConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&serialize_constraint(self))
    }
}

impl std::fmt::Display for Query {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&serialize_query(self))
    }
}

impl std::fmt::Display for Guard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&serialize_guard(self))
    }
}
