use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, ParseErrorKind};
use crate::model::{
    Atom, AttrType, CmpOp, Constant, Fact, Guard, Instance, Query, RelationSchema, Schema, SchemaError, Term,
    UniversalConstraint,
};

pub(crate) struct Parser<'s> {
    toks: Vec<Token>,
    pos: usize,
    schema: Option<&'s Schema>,
}

/// How bare identifiers inside atoms are read.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Constraint,
    Fact,
    Query,
}

impl<'s> Parser<'s> {
    pub fn new(text: &str, schema: Option<&'s Schema>) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(text)?, pos: 0, schema })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, at: (usize, usize), kind: ParseErrorKind) -> ParseError {
        ParseError { line: at.0, column: at.1, kind }
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        self.error_at(self.here(), ParseErrorKind::Syntax(msg.into()))
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.syntax(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, t: Tok, wanted: &str) -> Result<Token, ParseError> {
        if *self.peek() == t {
            Ok(self.advance())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_terminators(&mut self) {
        while matches!(self.peek(), Tok::Semi | Tok::Dot) {
            self.advance();
        }
    }

    fn name(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !super::is_keyword(&s) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn schema_ref(&self) -> &'s Schema {
        self.schema.expect("schema provided for this file kind")
    }

    fn relation(&self, name: &str, at: (usize, usize)) -> Result<&'s RelationSchema, ParseError> {
        self.schema_ref()
            .relation(name)
            .ok_or_else(|| self.error_at(at, SchemaError::UnknownRelation(name.to_string()).into()))
    }

    // ---- schema ----

    pub fn schema(mut self) -> Result<Schema, ParseError> {
        let mut schema = Schema::new();
        while *self.peek() != Tok::Eof {
            if !self.eat_kw("relation") {
                return Err(self.unexpected("'relation'"));
            }
            let at = self.here();
            let name = self.name("a relation name")?;
            self.expect(Tok::LParen, "'('")?;
            let mut attrs: Vec<(String, AttrType)> = Vec::new();
            if *self.peek() != Tok::RParen {
                loop {
                    attrs.push(self.attribute(attrs.len())?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "')'")?;
            let decl = attrs.iter().map(|(n, t)| (n.as_str(), *t)).collect();
            schema.add_relation(&name, decl).map_err(|e| self.error_at(at, e.into()))?;
            self.eat_terminators();
        }
        Ok(schema)
    }

    /// `name: type`, or a bare type with a positional name.
    fn attribute(&mut self, index: usize) -> Result<(String, AttrType), ParseError> {
        let ty = |s: &str| match s {
            "rat" => Some(AttrType::Rational),
            "sym" => Some(AttrType::Symbol),
            _ => None,
        };
        match self.peek().clone() {
            Tok::Ident(s) if ty(&s).is_some() && *self.peek2() != Tok::Colon => {
                self.advance();
                Ok((format!("a{}", index + 1), ty(&s).unwrap()))
            }
            Tok::Ident(_) => {
                let name = self.name("an attribute name")?;
                self.expect(Tok::Colon, "':'")?;
                match self.peek().clone() {
                    Tok::Ident(s) if ty(&s).is_some() => {
                        self.advance();
                        Ok((name, ty(&s).unwrap()))
                    }
                    _ => Err(self.unexpected("'rat' or 'sym'")),
                }
            }
            _ => Err(self.unexpected("an attribute")),
        }
    }

    // ---- constraints ----

    pub fn constraints(mut self) -> Result<Vec<UniversalConstraint>, ParseError> {
        let mut out = Vec::new();
        self.eat_terminators();
        while *self.peek() != Tok::Eof {
            let c = if self.is_kw("fd") && matches!(self.peek2(), Tok::Ident(_)) {
                self.fd()?
            } else if self.is_kw("jd") && matches!(self.peek2(), Tok::Ident(_)) {
                self.jd()?
            } else {
                self.rule()?
            };
            out.push(c);
            self.eat_terminators();
        }
        Ok(out)
    }

    fn positions(&mut self, rel: &RelationSchema, stop: &[Tok]) -> Result<Vec<usize>, ParseError> {
        let mut out = Vec::new();
        if stop.contains(self.peek()) {
            return Ok(out);
        }
        loop {
            let at = self.here();
            let p = match self.peek().clone() {
                Tok::Int(n) => {
                    self.advance();
                    let p: usize = n.clone().try_into().unwrap_or(usize::MAX);
                    if p == 0 || p > rel.arity() {
                        return Err(self.error_at(
                            at,
                            ParseErrorKind::Syntax(format!("position {n} out of range for {}", rel.name)),
                        ));
                    }
                    p - 1
                }
                Tok::Ident(s) => {
                    self.advance();
                    rel.position_of(&s).ok_or_else(|| {
                        self.error_at(at, ParseErrorKind::Syntax(format!("{} has no attribute {s}", rel.name)))
                    })?
                }
                _ => return Err(self.unexpected("an attribute position or name")),
            };
            out.push(p);
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn fd(&mut self) -> Result<UniversalConstraint, ParseError> {
        let start = self.here();
        self.advance();
        let at = self.here();
        let name = self.name("a relation name")?;
        let rel = self.relation(&name, at)?;
        self.expect(Tok::Colon, "':'")?;
        let lhs = self.positions(rel, &[Tok::Arrow])?;
        self.expect(Tok::Arrow, "'->'")?;
        let rhs_at = self.here();
        let rhs = self.positions(rel, &[])?;
        if rhs.is_empty() {
            return Err(self.error_at(rhs_at, ParseErrorKind::Syntax("empty functional dependency rhs".into())));
        }
        UniversalConstraint::fd(&name, rel.arity(), &lhs, &rhs).map_err(|e| self.error_at(start, e.into()))
    }

    fn jd(&mut self) -> Result<UniversalConstraint, ParseError> {
        let start = self.here();
        self.advance();
        let at = self.here();
        let name = self.name("a relation name")?;
        let rel = self.relation(&name, at)?;
        self.expect(Tok::Colon, "':'")?;
        let mut comps = Vec::new();
        loop {
            self.expect(Tok::LBracket, "'['")?;
            let comp: BTreeSet<usize> = self.positions(rel, &[Tok::RBracket])?.into_iter().collect();
            self.expect(Tok::RBracket, "']'")?;
            comps.push(comp.into_iter().collect::<Vec<_>>());
            self.eat(&Tok::Comma);
            if *self.peek() != Tok::LBracket {
                break;
            }
        }
        UniversalConstraint::jd(&name, rel.arity(), &comps).map_err(|e| self.error_at(start, e.into()))
    }

    fn rule(&mut self) -> Result<UniversalConstraint, ParseError> {
        let start = self.here();
        let mut lhs = Vec::new();
        let mut guards = Vec::new();
        if *self.peek() != Tok::Arrow {
            loop {
                if matches!(self.peek(), Tok::Ident(s) if !super::is_keyword(s)) && *self.peek2() == Tok::LParen {
                    lhs.push(self.atom(Mode::Constraint)?.0);
                } else {
                    guards.push(self.guard_or()?);
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::Arrow, "'->'")?;
        let mut rhs = Vec::new();
        if !self.eat_kw("false") {
            loop {
                rhs.push(self.atom(Mode::Constraint)?.0);
                if !self.eat(&Tok::Pipe) {
                    break;
                }
            }
        }
        let guard = match guards.len() {
            0 => Guard::True,
            1 => guards.pop().unwrap(),
            _ => Guard::And(guards),
        };
        let c = UniversalConstraint::new(lhs, guard, rhs).map_err(|e| self.error_at(start, e.into()))?;
        c.check(self.schema_ref()).map_err(|e| self.error_at(start, e.into()))?;
        Ok(c)
    }

    fn guard_or(&mut self) -> Result<Guard, ParseError> {
        let mut items = vec![self.guard_and()?];
        while self.eat_kw("or") {
            items.push(self.guard_and()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Guard::Or(items) })
    }

    fn guard_and(&mut self) -> Result<Guard, ParseError> {
        let mut items = vec![self.guard_not()?];
        while self.eat_kw("and") {
            items.push(self.guard_not()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Guard::And(items) })
    }

    fn guard_not(&mut self) -> Result<Guard, ParseError> {
        if self.eat_kw("not") {
            return Ok(Guard::not(self.guard_not()?));
        }
        if self.eat_kw("true") {
            return Ok(Guard::True);
        }
        if self.eat_kw("false") {
            return Ok(Guard::False);
        }
        if self.eat(&Tok::LParen) {
            let g = self.guard_or()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(g);
        }
        let l = self.term()?;
        let op = self.cmp_op()?;
        let r = self.term()?;
        Ok(Guard::Cmp(l, op, r))
    }

    fn cmp_op(&mut self) -> Result<CmpOp, ParseError> {
        match self.peek().clone() {
            Tok::Op(op) => {
                self.advance();
                Ok(op)
            }
            _ => Err(self.unexpected("a comparison operator")),
        }
    }

    /// A constraint term: variable, quoted symbol or rational.
    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !super::is_keyword(&s) => {
                self.advance();
                Ok(Term::Var(s.as_str().into()))
            }
            Tok::Quoted(s) => {
                self.advance();
                Ok(Term::Const(Constant::sym(&s)))
            }
            Tok::Int(_) | Tok::Minus => Ok(Term::Const(self.rational()?)),
            _ => Err(self.unexpected("a variable or constant")),
        }
    }

    fn rational(&mut self) -> Result<Constant, ParseError> {
        let neg = self.eat(&Tok::Minus);
        let num = match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                n
            }
            _ => return Err(self.unexpected("a number")),
        };
        let den = if self.eat(&Tok::Slash) {
            let at = self.here();
            match self.peek().clone() {
                Tok::Int(d) if !d.is_zero() => {
                    self.advance();
                    d
                }
                Tok::Int(_) => return Err(self.error_at(at, ParseErrorKind::Syntax("zero denominator".into()))),
                _ => return Err(self.unexpected("a denominator")),
            }
        } else {
            BigInt::from(1)
        };
        let num = if neg { -num } else { num };
        Ok(Constant::Rat(BigRational::new(num, den)))
    }

    /// `Name(arg, ...)`, checked against the schema. Returns the atom and,
    /// for ground atoms, the fact.
    fn atom(&mut self, mode: Mode) -> Result<(Atom, Option<Fact>), ParseError> {
        let at = self.here();
        let name = self.name("a relation name")?;
        let rel = self.relation(&name, at)?;
        self.expect(Tok::LParen, "'('")?;
        let mut terms = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let arg_at = self.here();
                let pos = terms.len();
                let term = match (mode, self.peek().clone()) {
                    (Mode::Constraint, _) => self.term()?,
                    (_, Tok::Ident(s)) if !super::is_keyword(&s) => {
                        self.advance();
                        if pos < rel.arity() && rel.attr_type(pos) == AttrType::Symbol {
                            Term::Const(Constant::sym(&s))
                        } else if mode == Mode::Query {
                            return Err(self.error_at(arg_at, ParseErrorKind::FreeVariable(s)));
                        } else {
                            return Err(self.error_at(
                                arg_at,
                                ParseErrorKind::Type(format!(
                                    "argument {} of {name} must be rat, found identifier {s} (facts contain no variables)",
                                    pos + 1
                                )),
                            ));
                        }
                    }
                    (_, Tok::Quoted(s)) => {
                        self.advance();
                        Term::Const(Constant::sym(&s))
                    }
                    (_, Tok::Int(_) | Tok::Minus) => Term::Const(self.rational()?),
                    _ => return Err(self.unexpected("a constant")),
                };
                terms.push(term);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "')'")?;
        let atom = Atom::new(&name, terms);
        if mode == Mode::Constraint {
            return Ok((atom, None));
        }
        let fact = atom.ground(&[][..]).expect("facts and queries carry no variables");
        self.schema_ref().check_fact(&fact).map_err(|e| self.error_at(at, e.into()))?;
        Ok((atom, Some(fact)))
    }

    // ---- instances ----

    pub fn instance(self) -> Result<(Instance, Vec<String>), ParseError> {
        let mut inst = Instance::new();
        let mut warnings = Vec::new();
        for (line, column, fact) in self.fact_list()? {
            let shown = fact.to_string();
            if !inst.insert(fact) {
                warnings.push(format!("{line}:{column}: duplicate fact {shown} ignored"));
            }
        }
        Ok((inst, warnings))
    }

    /// Facts in source order with their positions, duplicates kept.
    pub fn fact_list(mut self) -> Result<Vec<(usize, usize, Fact)>, ParseError> {
        let mut out = Vec::new();
        self.eat_terminators();
        while *self.peek() != Tok::Eof {
            let (line, column) = self.here();
            let (_, fact) = self.atom(Mode::Fact)?;
            out.push((line, column, fact.expect("ground fact")));
            self.eat_terminators();
            self.eat(&Tok::Comma);
        }
        Ok(out)
    }

    // ---- queries ----

    pub fn query(mut self) -> Result<Query, ParseError> {
        let q = self.query_or()?;
        self.eat_terminators();
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected("end of query"));
        }
        Ok(q)
    }

    fn query_or(&mut self) -> Result<Query, ParseError> {
        let mut items = vec![self.query_and()?];
        while self.eat_kw("or") {
            items.push(self.query_and()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Query::Or(items) })
    }

    fn query_and(&mut self) -> Result<Query, ParseError> {
        let mut items = vec![self.query_not()?];
        while self.eat_kw("and") {
            items.push(self.query_not()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Query::And(items) })
    }

    fn query_not(&mut self) -> Result<Query, ParseError> {
        if self.eat_kw("not") {
            return Ok(Query::not(self.query_not()?));
        }
        if self.eat_kw("true") {
            return Ok(Query::True);
        }
        if self.eat_kw("false") {
            return Ok(Query::False);
        }
        if self.eat(&Tok::LParen) {
            let q = self.query_or()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(q);
        }
        if matches!(self.peek(), Tok::Ident(s) if !super::is_keyword(s)) && *self.peek2() == Tok::LParen {
            let (_, fact) = self.atom(Mode::Query)?;
            return Ok(Query::Atom(fact.expect("ground fact")));
        }
        // A ground comparison, folded now.
        let at = self.here();
        let l = self.query_constant()?;
        let op = self.cmp_op()?;
        let r = self.query_constant()?;
        op.apply(&l, &r)
            .map(|b| if b { Query::True } else { Query::False })
            .map_err(|e| self.error_at(at, ParseErrorKind::Type(e.to_string())))
    }

    fn query_constant(&mut self) -> Result<Constant, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !super::is_keyword(&s) => {
                let at = self.here();
                Err(self.error_at(at, ParseErrorKind::FreeVariable(s)))
            }
            Tok::Quoted(s) => {
                self.advance();
                Ok(Constant::sym(&s))
            }
            Tok::Int(_) | Tok::Minus => self.rational(),
            _ => Err(self.unexpected("an atom or a comparison")),
        }
    }
}
