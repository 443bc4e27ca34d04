use num_bigint::BigInt;

use super::{ParseError, ParseErrorKind};
use crate::model::CmpOp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Quoted(String),
    Int(BigInt),
    Minus,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Dot,
    Arrow,
    Pipe,
    Op(CmpOp),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Quoted(s) => format!("string '{s}'"),
            Tok::Int(n) => format!("number {n}"),
            Tok::Minus => "'-'".into(),
            Tok::Slash => "'/'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Colon => "':'".into(),
            Tok::Semi => "';'".into(),
            Tok::Dot => "'.'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Pipe => "'|'".into(),
            Tok::Op(op) => format!("'{op}'"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let err = |msg: String| ParseError { line: tl, column: tc, kind: ParseErrorKind::Syntax(msg) };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            out.push(Token { tok: Tok::Ident(s), line: tl, column: tc });
            continue;
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                bump!();
            }
            let n: BigInt = s.parse().expect("digits form an integer");
            out.push(Token { tok: Tok::Int(n), line: tl, column: tc });
            continue;
        } else if c == '\'' || c == '"' {
            let quote = c;
            bump!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(err("unterminated string".into()));
                }
                let ch = chars[i];
                if ch == quote {
                    bump!();
                    break;
                }
                if ch == '\\' {
                    bump!();
                    if i >= chars.len() {
                        return Err(err("unterminated string".into()));
                    }
                    let esc = chars[i];
                    s.push(match esc {
                        'n' => '\n',
                        't' => '\t',
                        other => other,
                    });
                    bump!();
                    continue;
                }
                s.push(ch);
                bump!();
            }
            out.push(Token { tok: Tok::Quoted(s), line: tl, column: tc });
            continue;
        } else {
            let (tok, width) = match (c, next) {
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('=', Some('>')) => (Tok::Arrow, 2),
                ('→', _) => (Tok::Arrow, 1),
                ('!', Some('=')) => (Tok::Op(CmpOp::Ne), 2),
                ('<', Some('>')) => (Tok::Op(CmpOp::Ne), 2),
                ('<', Some('=')) => (Tok::Op(CmpOp::Le), 2),
                ('>', Some('=')) => (Tok::Op(CmpOp::Ge), 2),
                ('≠', _) => (Tok::Op(CmpOp::Ne), 1),
                ('≤', _) => (Tok::Op(CmpOp::Le), 1),
                ('≥', _) => (Tok::Op(CmpOp::Ge), 1),
                ('=', _) => (Tok::Op(CmpOp::Eq), 1),
                ('<', _) => (Tok::Op(CmpOp::Lt), 1),
                ('>', _) => (Tok::Op(CmpOp::Gt), 1),
                ('-', _) => (Tok::Minus, 1),
                ('/', _) => (Tok::Slash, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('[', _) => (Tok::LBracket, 1),
                (']', _) => (Tok::RBracket, 1),
                (',', _) => (Tok::Comma, 1),
                (':', _) => (Tok::Colon, 1),
                (';', _) => (Tok::Semi, 1),
                ('.', _) => (Tok::Dot, 1),
                ('|', _) => (Tok::Pipe, 1),
                _ => return Err(err(format!("unexpected character '{c}'"))),
            };
            for _ in 0..width {
                bump!();
            }
            tok
        };
        out.push(Token { tok, line: tl, column: tc });
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrows_and_minus() {
        assert_eq!(
            toks("x->-1"),
            vec![Tok::Ident("x".into()), Tok::Arrow, Tok::Minus, Tok::Int(1.into()), Tok::Eof]
        );
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("# c\n  R(1)").unwrap();
        assert_eq!((t[0].line, t[0].column), (2, 3));
    }

    #[test]
    fn quoted_with_escape() {
        assert_eq!(toks(r"'it\'s'"), vec![Tok::Quoted("it's".into()), Tok::Eof]);
    }

    #[test]
    fn bad_character_position() {
        let e = tokenize("R(1)\n  @").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
    }
}
