use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

/// The two disjoint domains attribute values are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttrType {
    /// Exact rationals, ordered.
    Rational,
    /// Uninterpreted constants, compared by name only.
    Symbol,
}

impl AttrType {
    pub fn keyword(self) -> &'static str {
        match self {
            AttrType::Rational => "rat",
            AttrType::Symbol => "sym",
        }
    }
}

impl fmt::Display for AttrType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A typed constant.
///
/// The derived order puts every rational before every symbol; rationals are
/// ordered by value and symbols by name. `BigRational` is always kept in
/// lowest terms with a positive denominator, so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    Rat(BigRational),
    Sym(Arc<str>),
}

impl Constant {
    pub fn int(v: i64) -> Self {
        Constant::Rat(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Constant::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn sym(name: &str) -> Self {
        Constant::Sym(Arc::from(name))
    }

    pub fn attr_type(&self) -> AttrType {
        match self {
            Constant::Rat(_) => AttrType::Rational,
            Constant::Sym(_) => AttrType::Symbol,
        }
    }
}

impl From<i64> for Constant {
    fn from(v: i64) -> Self {
        Constant::int(v)
    }
}

impl From<&str> for Constant {
    fn from(v: &str) -> Self {
        Constant::sym(v)
    }
}

pub(crate) fn is_plain_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !crate::parser::is_keyword(s)
}

pub(crate) fn quote_symbol(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\'' => out.push_str("\\'"),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('\'');
    out
}

impl fmt::Display for Constant {
    /// Symbols that look like identifiers print bare, everything else is
    /// single-quoted. Constraint serialization quotes all symbols instead
    /// (bare identifiers are variables there).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Rat(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Constant::Sym(s) if is_plain_identifier(s) => f.write_str(s),
            Constant::Sym(s) => f.write_str(&quote_symbol(s)),
        }
    }
}

impl Serialize for Constant {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_canonical() {
        assert_eq!(Constant::ratio(2, 4), Constant::ratio(1, 2));
        assert_eq!(Constant::ratio(-3, -6), Constant::ratio(1, 2));
        assert_eq!(Constant::ratio(4, 2), Constant::int(2));
    }

    #[test]
    fn order_puts_rationals_first() {
        assert!(Constant::int(100) < Constant::sym("a"));
        assert!(Constant::ratio(1, 3) < Constant::ratio(1, 2));
        assert!(Constant::sym("Mary") < Constant::sym("Steve"));
    }

    #[test]
    fn symbols_never_equal_rationals() {
        assert_ne!(Constant::sym("1"), Constant::int(1));
    }

    #[test]
    fn display_quotes_when_needed() {
        assert_eq!(Constant::sym("Steve").to_string(), "Steve");
        assert_eq!(Constant::sym("Delaware Ave.").to_string(), "'Delaware Ave.'");
        assert_eq!(Constant::sym("and").to_string(), "'and'");
        assert_eq!(Constant::ratio(-1, 3).to_string(), "-1/3");
    }
}
