//! The modal predicate language: abstract syntax, concrete syntax, world
//! typing and stratification.

mod parse;
pub(crate) mod strata;
pub(crate) mod typing;

use std::collections::BTreeMap;
use std::fmt;

use crate::features::Sign;

pub use parse::{parse, ClassScope, SyntaxError};
pub use strata::{check_stratified, def_references, CycleError};
pub use typing::{typecheck, infer_def_worlds, Functor, ModelSignature, TypeError, TypedPredicate, World};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pred {
    Feat { feature: String, sign: Sign },
    Seg(String),
    Class(String),
    Null,
    Not(Box<Pred>),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Left(Box<Pred>),
    Right(Box<Pred>),
    Head(Box<Pred>),
    Def(String),
}

impl Pred {
    pub fn feat(feature: &str, sign: Sign) -> Pred {
        Pred::Feat { feature: feature.to_string(), sign }
    }

    pub fn seg(name: &str) -> Pred {
        Pred::Seg(name.to_string())
    }

    pub fn class(name: &str) -> Pred {
        Pred::Class(name.to_string())
    }

    pub fn def(name: &str) -> Pred {
        Pred::Def(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Pred) -> Pred {
        Pred::Not(Box::new(p))
    }

    pub fn and(a: Pred, b: Pred) -> Pred {
        Pred::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Pred, b: Pred) -> Pred {
        Pred::Or(Box::new(a), Box::new(b))
    }

    pub fn left(p: Pred) -> Pred {
        Pred::Left(Box::new(p))
    }

    pub fn right(p: Pred) -> Pred {
        Pred::Right(Box::new(p))
    }

    pub fn head(p: Pred) -> Pred {
        Pred::Head(Box::new(p))
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Pred> {
        match self {
            Pred::Not(p) | Pred::Left(p) | Pred::Right(p) | Pred::Head(p) => vec![p],
            Pred::And(a, b) | Pred::Or(a, b) => vec![a, b],
            _ => vec![],
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Pred::size).sum::<usize>()
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Pred::Or(a, b) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 0)?;
                write!(f, " | ")?;
                b.fmt_prec(f, 1)?;
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Pred::And(a, b) => {
                if prec > 1 {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, 1)?;
                write!(f, " & ")?;
                b.fmt_prec(f, 2)?;
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Pred::Not(p) => {
                write!(f, "!")?;
                p.fmt_prec(f, 2)
            }
            Pred::Left(p) => {
                write!(f, "left ")?;
                p.fmt_prec(f, 2)
            }
            Pred::Right(p) => {
                write!(f, "right ")?;
                p.fmt_prec(f, 2)
            }
            Pred::Head(p) => {
                write!(f, "head ")?;
                p.fmt_prec(f, 2)
            }
            Pred::Feat { feature, sign } => write!(f, "[{sign}{feature}]"),
            Pred::Seg(s) => write!(f, "'{s}'"),
            Pred::Class(n) | Pred::Def(n) => write!(f, "{n}"),
            Pred::Null => write!(f, "null"),
        }
    }
}

/// Prints in the concrete syntax accepted by [`parse`].
impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Named predicate definitions, possibly recursive.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Definitions {
    bodies: BTreeMap<String, Pred>,
}

impl Definitions {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces a definition.
    pub fn insert(&mut self, name: &str, body: Pred) -> Option<Pred> {
        self.bodies.insert(name.to_string(), body)
    }

    pub fn get(&self, name: &str) -> Option<&Pred> {
        self.bodies.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bodies.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Pred)> {
        self.bodies.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bodies.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.bodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }
}
