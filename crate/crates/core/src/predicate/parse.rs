use std::collections::HashSet;

use thiserror::Error;

use super::Pred;
use crate::features::{FeatureSystem, Sign};

/// Decides whether a bare name denotes a segment class; every other name is
/// read as a reference to a named definition.
pub trait ClassScope {
    fn is_class(&self, name: &str) -> bool;
}

impl ClassScope for FeatureSystem {
    fn is_class(&self, name: &str) -> bool {
        self.class(name).is_some()
    }
}

impl ClassScope for HashSet<String> {
    fn is_class(&self, name: &str) -> bool {
        self.contains(name)
    }
}

impl ClassScope for [&str] {
    fn is_class(&self, name: &str) -> bool {
        self.contains(&name)
    }
}

impl<const N: usize> ClassScope for [&str; N] {
    fn is_class(&self, name: &str) -> bool {
        self.contains(&name)
    }
}

impl ClassScope for () {
    fn is_class(&self, _: &str) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: found {found}, expected one of: {}", expected.join(", "))]
pub struct SyntaxError {
    pub offset: usize,
    pub found: String,
    pub expected: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Not,
    And,
    Or,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Sign(Sign),
    Quoted(String),
    Name(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Sign(s) => format!("`{s}`"),
            Tok::Quoted(s) => format!("segment '{s}'"),
            Tok::Name(n) => format!("`{n}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let single = match c {
            '!' | '¬' => Some(Tok::Not),
            '&' | '∧' => Some(Tok::And),
            '|' | '∨' => Some(Tok::Or),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            _ => Sign::from_char(c).map(Tok::Sign),
        };
        if let Some(tok) = single {
            chars.next();
            out.push((i, tok));
            continue;
        }
        if c == '\'' {
            chars.next();
            let start = i + 1;
            let mut end = None;
            for (j, d) in chars.by_ref() {
                if d == '\'' {
                    end = Some(j);
                    break;
                }
            }
            match end {
                Some(j) if j > start => out.push((i, Tok::Quoted(text[start..j].to_string()))),
                _ => {
                    return Err(SyntaxError {
                        offset: i,
                        found: "unterminated or empty segment literal".into(),
                        expected: vec!["segment name followed by `'`".into()],
                    })
                }
            }
            continue;
        }
        if is_name_char(c) {
            let mut end = text.len();
            while let Some(&(j, d)) = chars.peek() {
                if !is_name_char(d) {
                    end = j;
                    break;
                }
                chars.next();
            }
            out.push((i, Tok::Name(text[i..end].to_string())));
            continue;
        }
        return Err(SyntaxError {
            offset: i,
            found: format!("character `{c}`"),
            expected: vec!["a predicate token".into()],
        });
    }
    out.push((text.len(), Tok::Eof));
    Ok(out)
}

const KEYWORDS: [&str; 4] = ["left", "right", "head", "null"];

struct Parser<'a, S: ClassScope + ?Sized> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    scope: &'a S,
}

impl<S: ClassScope + ?Sized> Parser<'_, S> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError {
            offset: self.offset(),
            found: self.peek().describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn or(&mut self) -> Result<Pred, SyntaxError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Pred::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Pred, SyntaxError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Pred::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Pred, SyntaxError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Pred::not(self.unary()?))
            }
            Tok::Name(n) if n == "left" => {
                self.bump();
                Ok(Pred::left(self.unary()?))
            }
            Tok::Name(n) if n == "right" => {
                self.bump();
                Ok(Pred::right(self.unary()?))
            }
            Tok::Name(n) if n == "head" => {
                self.bump();
                Ok(Pred::head(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Pred, SyntaxError> {
        const EXPECTED: [&str; 9] = [
            "`!`", "`left`", "`right`", "`head`", "`null`", "`[`", "segment literal", "name", "`(`",
        ];
        match self.peek().clone() {
            Tok::Name(n) if n == "null" => {
                self.bump();
                Ok(Pred::Null)
            }
            Tok::Name(n) if !KEYWORDS.contains(&n.as_str()) => {
                self.bump();
                if self.scope.is_class(&n) {
                    Ok(Pred::Class(n))
                } else {
                    Ok(Pred::Def(n))
                }
            }
            Tok::Quoted(s) => {
                self.bump();
                Ok(Pred::Seg(s))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.or()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(&["`&`", "`|`", "`)`"]));
                }
                self.bump();
                Ok(inner)
            }
            Tok::LBracket => {
                self.bump();
                let mut acc = self.feature_literal()?;
                while *self.peek() == Tok::Comma {
                    self.bump();
                    let next = self.feature_literal()?;
                    acc = Pred::and(acc, next);
                }
                if *self.peek() != Tok::RBracket {
                    return Err(self.error(&["`,`", "`]`"]));
                }
                self.bump();
                Ok(acc)
            }
            _ => Err(self.error(&EXPECTED)),
        }
    }

    fn feature_literal(&mut self) -> Result<Pred, SyntaxError> {
        let sign = match self.peek() {
            Tok::Sign(s) => *s,
            _ => return Err(self.error(&["`+`", "`-`"])),
        };
        self.bump();
        match self.peek().clone() {
            Tok::Name(n) => {
                self.bump();
                Ok(Pred::Feat { feature: n, sign })
            }
            _ => Err(self.error(&["feature name"])),
        }
    }
}

/// Parses the concrete predicate syntax. Bare names are resolved to class
/// references when `scope` knows them as classes, and to definition
/// references otherwise.
pub fn parse<S: ClassScope + ?Sized>(text: &str, scope: &S) -> Result<Pred, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, scope };
    let pred = p.or()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["`&`", "`|`", "end of input"]));
    }
    Ok(pred)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmony_constraint() {
        let p = parse("head F | !Left", &["F", "C"]).unwrap();
        assert_eq!(p, Pred::or(Pred::head(Pred::class("F")), Pred::not(Pred::def("Left"))));
    }

    #[test]
    fn harmony_left_context() {
        let p = parse("(left head C & left Left) | left head F", &["F", "C"]).unwrap();
        let expected = Pred::or(
            Pred::and(Pred::left(Pred::head(Pred::class("C"))), Pred::left(Pred::def("Left"))),
            Pred::left(Pred::head(Pred::class("F"))),
        );
        assert_eq!(p, expected);
        // functors bind tighter than `&`, so the parentheses are redundant
        assert_eq!(parse("left head C & left Left | left head F", &["F", "C"]).unwrap(), expected);
    }

    #[test]
    fn nested_string_predicate() {
        let p = parse("head c & right(head a & right(head b & right null))", &["a", "b", "c"]).unwrap();
        let expected = Pred::and(
            Pred::head(Pred::class("c")),
            Pred::right(Pred::and(
                Pred::head(Pred::class("a")),
                Pred::right(Pred::and(Pred::head(Pred::class("b")), Pred::right(Pred::Null))),
            )),
        );
        assert_eq!(p, expected);
    }

    #[test]
    fn unicode_connectives_and_literals() {
        let p = parse("¬[+front, −round] ∧ 'ü' ∨ null", &()).unwrap();
        let expected = Pred::or(
            Pred::and(
                Pred::not(Pred::and(
                    Pred::feat("front", Sign::Plus),
                    Pred::feat("round", Sign::Minus),
                )),
                Pred::seg("ü"),
            ),
            Pred::Null,
        );
        assert_eq!(p, expected);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let e = parse("head & x", &()).unwrap_err();
        assert_eq!(e.offset, 5);
        assert!(e.expected.iter().any(|x| x.contains("null")));

        let e = parse("(a | b", &()).unwrap_err();
        assert_eq!(e.offset, 6);
        assert!(e.expected.contains(&"`)`".to_string()));

        let e = parse("[+front x]", &()).unwrap_err();
        assert_eq!(e.offset, 8);

        let e = parse("a b", &()).unwrap_err();
        assert_eq!(e.offset, 2);

        assert!(parse("'unterminated", &()).is_err());
        assert!(parse("a # b", &()).is_err());
    }

    #[test]
    fn display_roundtrip_examples() {
        for text in [
            "head F | !Left",
            "left head C & left Left | left head F",
            "head c & right (head a & right (head b & right null))",
            "a & (b & c)",
            "a | (b | c)",
            "!(a | b) & [+f] & [-g]",
        ] {
            let p = parse(text, &["F", "C"]).unwrap();
            assert_eq!(parse(&p.to_string(), &["F", "C"]).unwrap(), p, "{text}");
        }
    }
}
