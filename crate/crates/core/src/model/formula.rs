use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::schema::Fact;
use super::value::{AttrType, Constant};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable {0} is not bound")]
    Unbound(String),
    #[error("ordered comparison {op} between symbols {left} and {right}")]
    OrderedSymbols { op: CmpOp, left: String, right: String },
    #[error("comparison {op} between a rational and a symbol ({left}, {right})")]
    MixedTypes { op: CmpOp, left: String, right: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Arc<str>),
    Const(Constant),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Arc::from(name))
    }

    pub fn as_var(&self) -> Option<&Arc<str>> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

/// A relational atom whose arguments may mix variables and constants.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub rel: Arc<str>,
    pub terms: Vec<Term>,
}

impl Atom {
    pub fn new(rel: &str, terms: Vec<Term>) -> Self {
        Atom { rel: Arc::from(rel), terms }
    }

    /// Atom over plain variables, e.g. `Atom::vars("R", &["x", "y"])`.
    pub fn vars(rel: &str, vars: &[&str]) -> Self {
        Atom::new(rel, vars.iter().map(|v| Term::var(v)).collect())
    }

    pub fn variables(&self) -> impl Iterator<Item = &Arc<str>> {
        self.terms.iter().filter_map(Term::as_var)
    }

    /// Instantiate under a binding; `None` if some variable is unbound.
    pub fn ground<B: Binding + ?Sized>(&self, b: &B) -> Option<Fact> {
        let args = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(v) => b.lookup(v).cloned(),
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Fact { rel: self.rel.clone(), args })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn is_ordered(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    /// Compare two constants, enforcing the domain rules.
    pub fn apply(self, l: &Constant, r: &Constant) -> Result<bool, EvalError> {
        match (l, r) {
            (Constant::Rat(a), Constant::Rat(b)) => Ok(match self {
                CmpOp::Eq => a == b,
                CmpOp::Ne => a != b,
                CmpOp::Lt => a < b,
                CmpOp::Le => a <= b,
                CmpOp::Gt => a > b,
                CmpOp::Ge => a >= b,
            }),
            (Constant::Sym(a), Constant::Sym(b)) => match self {
                CmpOp::Eq => Ok(a == b),
                CmpOp::Ne => Ok(a != b),
                _ => Err(EvalError::OrderedSymbols {
                    op: self,
                    left: l.to_string(),
                    right: r.to_string(),
                }),
            },
            _ => Err(EvalError::MixedTypes { op: self, left: l.to_string(), right: r.to_string() }),
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Quantifier-free formula over built-in comparisons.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Guard {
    True,
    False,
    Cmp(Term, CmpOp, Term),
    And(Vec<Guard>),
    Or(Vec<Guard>),
    Not(Box<Guard>),
}

impl Guard {
    pub fn cmp(l: Term, op: CmpOp, r: Term) -> Self {
        Guard::Cmp(l, op, r)
    }

    pub fn not(g: Guard) -> Self {
        Guard::Not(Box::new(g))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Guard::True)
    }

    pub fn variables(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            Guard::True | Guard::False => {}
            Guard::Cmp(l, _, r) => {
                out.extend(l.as_var().cloned());
                out.extend(r.as_var().cloned());
            }
            Guard::And(gs) | Guard::Or(gs) => gs.iter().for_each(|g| g.collect_vars(out)),
            Guard::Not(g) => g.collect_vars(out),
        }
    }

    /// Every comparison in the guard, in left-to-right order.
    pub fn comparisons(&self) -> Vec<(&Term, CmpOp, &Term)> {
        let mut out = Vec::new();
        fn go<'a>(g: &'a Guard, out: &mut Vec<(&'a Term, CmpOp, &'a Term)>) {
            match g {
                Guard::True | Guard::False => {}
                Guard::Cmp(l, op, r) => out.push((l, *op, r)),
                Guard::And(gs) | Guard::Or(gs) => gs.iter().for_each(|g| go(g, out)),
                Guard::Not(g) => go(g, out),
            }
        }
        go(self, &mut out);
        out
    }

    /// Static typing: `types` gives the domain of each variable.
    pub fn check_types(&self, types: &BTreeMap<Arc<str>, AttrType>) -> Result<(), String> {
        for (l, op, r) in self.comparisons() {
            let ty = |t: &Term| match t {
                Term::Const(c) => Ok(c.attr_type()),
                Term::Var(v) => types.get(v).copied().ok_or_else(|| format!("unsafe variable {v}")),
            };
            let (lt, rt) = (ty(l)?, ty(r)?);
            if lt != rt {
                return Err(format!("comparison {op} between {lt} and {rt} operands"));
            }
            if op.is_ordered() && lt == AttrType::Symbol {
                return Err(format!("ordered comparison {op} on sym operands"));
            }
        }
        Ok(())
    }
}

/// Variable lookup used by guard evaluation and atom grounding.
pub trait Binding {
    fn lookup(&self, var: &str) -> Option<&Constant>;
}

impl Binding for HashMap<Arc<str>, Constant> {
    fn lookup(&self, var: &str) -> Option<&Constant> {
        self.get(var)
    }
}

impl Binding for BTreeMap<Arc<str>, Constant> {
    fn lookup(&self, var: &str) -> Option<&Constant> {
        self.get(var)
    }
}

impl Binding for [(Arc<str>, Constant)] {
    fn lookup(&self, var: &str) -> Option<&Constant> {
        self.iter().find(|(v, _)| &**v == var).map(|(_, c)| c)
    }
}

fn resolve<'a, B: Binding + ?Sized>(t: &'a Term, b: &'a B) -> Result<&'a Constant, EvalError> {
    match t {
        Term::Const(c) => Ok(c),
        Term::Var(v) => b.lookup(v).ok_or_else(|| EvalError::Unbound(v.to_string())),
    }
}

/// Evaluate a guard under a binding with exact rational comparison.
///
/// Connectives evaluate every operand so that typing errors surface even
/// when the result is already determined.
pub fn eval_builtin<B: Binding + ?Sized>(g: &Guard, b: &B) -> Result<bool, EvalError> {
    Ok(match g {
        Guard::True => true,
        Guard::False => false,
        Guard::Cmp(l, op, r) => op.apply(resolve(l, b)?, resolve(r, b)?)?,
        Guard::And(gs) => {
            let mut acc = true;
            for g in gs {
                acc &= eval_builtin(g, b)?;
            }
            acc
        }
        Guard::Or(gs) => {
            let mut acc = false;
            for g in gs {
                acc |= eval_builtin(g, b)?;
            }
            acc
        }
        Guard::Not(g) => !eval_builtin(g, b)?,
    })
}
