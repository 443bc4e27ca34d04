use proptest::prelude::*;

use super::*;
use crate::fact;
use crate::model::{AttrType, CmpOp, Constant, ConstraintKind, Fact, Guard, Term};

fn cascade_schema() -> Schema {
    parse_schema("relation R(a: rat, b: rat)\nrelation P(c: rat)").unwrap()
}

#[test]
fn schema_declarations() {
    let s = parse_schema("relation R(a: sym, b: sym); relation P(c: sym)").unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(s.relation("R").unwrap().arity(), 2);
    let s = parse_schema("relation NF(name: sym, diag: sym)").unwrap();
    assert_eq!(s.relation("NF").unwrap().attr_type(1), AttrType::Symbol);
}

#[test]
fn schema_errors() {
    let e = parse_schema("relation Z()").unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::Schema(SchemaError::ZeroArity(_))));
    assert_eq!((e.line, e.column), (1, 10));
    let e = parse_schema("relation R(a: rat)\nrelation R(b: rat)").unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::Schema(SchemaError::DuplicateRelation(_))));
    assert_eq!(e.line, 2);
    let e = parse_schema("relation R(a: int)").unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
    assert_eq!((e.line, e.column), (1, 15));
}

#[test]
fn cascade_constraint() {
    let s = cascade_schema();
    let cs = parse_constraints("R(x,y), P(x) -> P(y)", &s).unwrap();
    assert_eq!(cs.len(), 1);
    assert_eq!(cs[0].kind, ConstraintKind::FullTgd);
    assert_eq!(cs[0].lhs.len(), 2);
    assert_eq!(cs[0].rhs.len(), 1);
}

#[test]
fn fd_sugar_desugars_to_denial() {
    let s = cascade_schema();
    let cs = parse_constraints("fd R: 1 -> 2", &s).unwrap();
    assert_eq!(cs[0].kind, ConstraintKind::Denial);
    assert_eq!(cs[0].lhs.len(), 2);
    assert!(cs[0].lhs.iter().all(|a| &*a.rel == "R"));
    // Attribute names are accepted too.
    let by_name = parse_constraints("fd R: a -> b", &s).unwrap();
    assert_eq!(by_name, cs);
}

#[test]
fn jd_sugar() {
    let s = parse_schema("relation C(chain: sym, loc: sym, bev: sym)").unwrap();
    let cs = parse_constraints("jd C: [1,2][1,3]\njd C: [chain, loc], [chain, bev]", &s).unwrap();
    assert_eq!(cs[0], cs[1]);
    match &cs[0].kind {
        ConstraintKind::Jd(spec) => assert_eq!(spec.components, vec![vec![0, 1], vec![0, 2]]),
        k => panic!("expected a JD, got {k:?}"),
    }
}

#[test]
fn constraint_errors() {
    let s = parse_schema("relation R(a: sym, b: sym)\nrelation P(c: rat)").unwrap();
    let e = parse_constraints("R(x,y), y < x -> false", &s).unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::Constraint(ConstraintError::GuardType(_))));
    let e = parse_constraints("R(x,y) -> P(z)", &s).unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::Constraint(ConstraintError::Unsafe(_))));
    let e = parse_constraints("\n  S(x) -> false", &s).unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::Schema(SchemaError::UnknownRelation(_))));
    assert_eq!((e.line, e.column), (2, 3));
    let e = parse_constraints("R(x,y), P(x) -> false", &s).unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::Constraint(ConstraintError::VariableType { .. })));
}

#[test]
fn disjunctive_rhs_and_symbols() {
    let s = parse_schema("relation NF(name: sym, diag: sym)\nrelation Parent(name: sym, child: sym)").unwrap();
    let text = "NF(x, 'yes'), Parent(y1, x), Parent(y2, x), y1 != y2 -> NF(y1, 'yes') | NF(y2, 'yes')";
    let cs = parse_constraints(text, &s).unwrap();
    assert_eq!(cs[0].kind, ConstraintKind::Universal);
    assert_eq!(cs[0].lhs[0].terms[1], Term::Const(Constant::sym("yes")));
    assert_eq!(cs[0].guard, Guard::Cmp(Term::var("y1"), CmpOp::Ne, Term::var("y2")));
    assert_eq!(serialize_constraint(&cs[0]), text);
}

#[test]
fn instances() {
    let s = cascade_schema();
    let i = parse_instance("R(1,2). R(2,3). P(1).", &s).unwrap();
    assert_eq!(i, [fact!("R", 1, 2), fact!("R", 2, 3), fact!("P", 1)].into_iter().collect());
    assert!(parse_instance("", &s).unwrap().is_empty());
    let e = parse_instance("P(1,2).", &s).unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::Schema(SchemaError::Arity { .. })));
    let (i, w) = parse_instance_with_warnings("P(1). P(1).", &s).unwrap();
    assert_eq!(i.len(), 1);
    assert_eq!(w.len(), 1);
    let e = parse_instance("P(x).", &s).unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::Type(_)));
    assert_eq!(serialize_instance(&parse_instance("R(2,3). P(1). R(1,2).", &s).unwrap()), "P(1).\nR(1,2).\nR(2,3).\n");
    assert_eq!(serialize_instance(&Instance::new()), "");
}

#[test]
fn rationals_and_quoted_symbols() {
    let s = parse_schema("relation T(a: rat, b: sym)").unwrap();
    let i = parse_instance("T(-2/4, 'Delaware Ave.'). T(3, Latte)", &s).unwrap();
    let facts: Vec<&Fact> = i.iter().collect();
    assert_eq!(facts[0].args[0], Constant::ratio(-1, 2));
    assert_eq!(facts[0].args[1], Constant::sym("Delaware Ave."));
    assert_eq!(facts[1].args[1], Constant::sym("Latte"));
    assert_eq!(parse_instance(&serialize_instance(&i), &s).unwrap(), i);
    let e = parse_instance("T(1/0, a)", &s).unwrap_err();
    assert_eq!((e.line, e.column), (1, 5));
}

#[test]
fn queries() {
    let s = parse_schema("relation NF(name: sym, diag: sym)").unwrap();
    let q = parse_query("not NF(Steve, no)", &s).unwrap();
    assert_eq!(q, Query::not(Query::Atom(Fact::new("NF", vec![Constant::sym("Steve"), Constant::sym("no")]))));
    let s = parse_schema("relation R(a: rat, b: rat, c: rat)\nrelation P(a: rat, b: rat)\nrelation Q(a: rat)").unwrap();
    let q = parse_query("(Q(1) or not R(1,1,1)) and (Q(2) or not P(1,2)) and (R(1,2,1) or not P(1,2))", &s).unwrap();
    match &q {
        Query::And(cs) => assert_eq!(cs.len(), 3),
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(parse_query(&serialize_query(&q), &s).unwrap(), q);
    let e = parse_query("R(x,1,1)", &s).unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::FreeVariable(ref v) if v == "x"));
    assert_eq!(parse_query("1 < 2 and 1/2 = 2/4", &s).unwrap(), Query::And(vec![Query::True, Query::True]));
    assert_eq!(parse_query("3 <= 2", &s).unwrap(), Query::False);
    assert!(matches!(parse_query("'a' < 'b'", &s).unwrap_err().kind, ParseErrorKind::Type(_)));
    assert!(matches!(parse_query("S(1)", &s).unwrap_err().kind, ParseErrorKind::Schema(_)));
}

// ---- round-trip properties ----

fn test_schema() -> Schema {
    parse_schema("relation R(a: rat, b: sym)\nrelation P(c: rat)\nrelation S(d: sym, e: sym, f: rat)").unwrap()
}

fn arb_rat() -> impl Strategy<Value = Constant> {
    (-20i64..20, 1i64..5).prop_map(|(n, d)| Constant::ratio(n, d))
}

fn arb_sym() -> impl Strategy<Value = Constant> {
    prop_oneof![
        prop::sample::select(vec!["a", "b", "Steve", "x_1"]).prop_map(Constant::sym),
        prop::sample::select(vec!["Delaware Ave.", "it's", "and", "not", "", "1"]).prop_map(Constant::sym),
    ]
}

fn arb_fact() -> impl Strategy<Value = Fact> {
    prop_oneof![
        (arb_rat(), arb_sym()).prop_map(|(a, b)| Fact::new("R", vec![a, b])),
        arb_rat().prop_map(|a| Fact::new("P", vec![a])),
        (arb_sym(), arb_sym(), arb_rat()).prop_map(|(a, b, c)| Fact::new("S", vec![a, b, c])),
    ]
}

fn arb_query() -> impl Strategy<Value = Query> {
    let leaf = prop_oneof![
        Just(Query::True),
        Just(Query::False),
        arb_fact().prop_map(Query::Atom),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Query::not),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Query::And),
            prop::collection::vec(inner, 2..4).prop_map(Query::Or),
        ]
    })
}

/// Guards over the rat variables `x`, `z` and sym variable `y` of the
/// constraint template used below.
fn arb_guard() -> impl Strategy<Value = Guard> {
    let op = prop::sample::select(vec![CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge]);
    let rat_cmp = (prop::sample::select(vec!["x", "z"]), op, prop_oneof![
        arb_rat().prop_map(Term::Const),
        Just(Term::var("x")),
    ])
        .prop_map(|(v, op, t)| Guard::Cmp(Term::var(v), op, t));
    let sym_cmp = (prop::bool::ANY, arb_sym())
        .prop_map(|(eq, c)| Guard::Cmp(Term::var("y"), if eq { CmpOp::Eq } else { CmpOp::Ne }, Term::Const(c)));
    let leaf = prop_oneof![rat_cmp, sym_cmp, Just(Guard::False)];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Guard::not),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Guard::And),
            prop::collection::vec(inner, 2..4).prop_map(Guard::Or),
        ]
    })
}

fn arb_constraint() -> impl Strategy<Value = UniversalConstraint> {
    use crate::model::Atom;
    let head = prop::sample::select(vec![0usize, 1, 2, 3]);
    (prop::option::of(arb_guard()), head, prop::bool::ANY).prop_map(|(g, head, with_s)| {
        let mut lhs = vec![Atom::vars("R", &["x", "y"]), Atom::vars("P", &["z"])];
        if with_s {
            lhs.push(Atom::new("S", vec![Term::var("y"), Term::Const(Constant::sym("k")), Term::var("x")]));
        }
        let rhs = match head {
            0 => vec![],
            1 => vec![Atom::vars("P", &["x"])],
            2 => vec![Atom::vars("P", &["x"]), Atom::new("R", vec![Term::var("z"), Term::var("y")])],
            _ => vec![Atom::new("P", vec![Term::Const(Constant::ratio(-3, 2))])],
        };
        UniversalConstraint::new(lhs, g.unwrap_or(Guard::True), rhs).unwrap()
    })
}

proptest! {
    #[test]
    fn instance_round_trip(facts in prop::collection::vec(arb_fact(), 0..12)) {
        let s = test_schema();
        let i: Instance = facts.into_iter().collect();
        prop_assert_eq!(parse_instance(&serialize_instance(&i), &s).unwrap(), i);
    }

    #[test]
    fn query_round_trip(q in arb_query()) {
        let s = test_schema();
        prop_assert_eq!(parse_query(&serialize_query(&q), &s).unwrap(), q);
    }

    #[test]
    fn constraint_round_trip(cs in prop::collection::vec(arb_constraint(), 1..4)) {
        let s = test_schema();
        let text = serialize_constraints(&cs);
        prop_assert_eq!(parse_constraints(&text, &s).unwrap(), cs);
    }

    #[test]
    fn sugar_round_trip(lhs in prop::collection::btree_set(0usize..3, 0..3), rhs in prop::collection::btree_set(0usize..3, 1..3),
                        comps in prop::collection::vec(prop::collection::btree_set(0usize..3, 1..3), 1..4)) {
        let s = test_schema();
        let lhs: Vec<usize> = lhs.into_iter().collect();
        let rhs: Vec<usize> = rhs.into_iter().collect();
        let fd = UniversalConstraint::fd("S", 3, &lhs, &rhs).unwrap();
        prop_assert_eq!(parse_constraints(&serialize_constraint(&fd), &s).unwrap(), vec![fd]);
        let mut comps: Vec<Vec<usize>> = comps.into_iter().map(|c| c.into_iter().collect()).collect();
        comps.push(vec![0, 1, 2]);
        let jd = UniversalConstraint::jd("S", 3, &comps).unwrap();
        prop_assert_eq!(parse_constraints(&serialize_constraint(&jd), &s).unwrap(), vec![jd]);
    }

    #[test]
    fn schema_round_trip(arities in prop::collection::vec(prop::collection::vec(prop::bool::ANY, 1..4), 1..4)) {
        let mut s = Schema::new();
        for (k, types) in arities.iter().enumerate() {
            let names: Vec<String> = (0..types.len()).map(|i| format!("c{i}")).collect();
            let attrs = names.iter().zip(types).map(|(n, &b)| (n.as_str(), if b { AttrType::Rational } else { AttrType::Symbol })).collect();
            s.add_relation(&format!("Rel{k}"), attrs).unwrap();
        }
        prop_assert_eq!(parse_schema(&serialize_schema(&s)).unwrap(), s);
    }
}
