use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::{Definitions, Pred};
use crate::features::FeatureSystem;

/// The worlds a predicate can be interpreted in.
///
/// Ordered by implicit coercion: an alphabet predicate used where a position
/// is expected is read through `head`, and a non-null string predicate is a
/// string predicate that is false at the null point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum World {
    Alphabet,
    NonNullString,
    String,
}

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            World::Alphabet => "alphabet",
            World::NonNullString => "nonnullstring",
            World::String => "string",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Functor {
    Left,
    Right,
    Head,
}

/// The fixed string signature: `left, right : nonnullstring -> string` and
/// `head : nonnullstring -> alphabet`, with `right left x = left right x = x`
/// wherever both sides are defined. The path equation is a property of the
/// pointed-string model rather than of the language.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ModelSignature;

impl ModelSignature {
    pub fn strings() -> Self {
        ModelSignature
    }

    /// Domain and codomain of a functor. The nullstring world only ever
    /// appears inside `string`, so it is not listed separately.
    pub fn functor(&self, f: Functor) -> (World, World) {
        match f {
            Functor::Left | Functor::Right => (World::NonNullString, World::String),
            Functor::Head => (World::NonNullString, World::Alphabet),
        }
    }

    /// The type of `r p` given the type of `p`, or `None` if `p` cannot be
    /// coerced to the codomain of `r`.
    fn apply(&self, f: Functor, operand: World) -> Option<World> {
        let (dom, cod) = self.functor(f);
        let ok = match cod {
            World::Alphabet => operand == World::Alphabet,
            // alphabet lifts to nonnullstring through `head`
            _ => operand <= cod,
        };
        ok.then_some(dom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("`{term}`: head expects an alphabet predicate, found {found}")]
    HeadOfPosition { term: String, found: World },
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("unknown segment `{0}`")]
    UnknownSegment(String),
    #[error("unresolved name `{0}`")]
    Unresolved(String),
    #[error("no world can be inferred for definition `{0}`")]
    Uninhabited(String),
}

/// A predicate with its world. The AST is elaborated: implicit alphabet
/// coercions appear as explicit `head` nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedPredicate {
    pub ast: Pred,
    pub world: World,
}

impl TypedPredicate {
    /// Reads an alphabet predicate at positions.
    pub fn at_positions(self) -> TypedPredicate {
        match self.world {
            World::Alphabet => TypedPredicate {
                ast: Pred::head(self.ast),
                world: World::NonNullString,
            },
            _ => self,
        }
    }
}

type Env = BTreeMap<String, Option<World>>;

fn infer(
    p: &Pred,
    sig: &ModelSignature,
    env: &Env,
    fs: &FeatureSystem,
) -> Result<Option<World>, TypeError> {
    Ok(match p {
        Pred::Feat { feature, .. } => {
            fs.feature_id(feature)
                .ok_or_else(|| TypeError::UnknownFeature(feature.clone()))?;
            Some(World::Alphabet)
        }
        Pred::Seg(s) => {
            fs.segment_id(s)
                .ok_or_else(|| TypeError::UnknownSegment(s.clone()))?;
            Some(World::Alphabet)
        }
        Pred::Class(c) => {
            fs.class(c).ok_or_else(|| TypeError::Unresolved(c.clone()))?;
            Some(World::Alphabet)
        }
        Pred::Null => Some(World::String),
        Pred::Def(d) => *env.get(d).ok_or_else(|| TypeError::Unresolved(d.clone()))?,
        Pred::Not(q) => infer(q, sig, env, fs)?,
        Pred::And(a, b) | Pred::Or(a, b) => {
            let ta = infer(a, sig, env, fs)?;
            let tb = infer(b, sig, env, fs)?;
            ta.max(tb)
        }
        Pred::Left(q) | Pred::Right(q) | Pred::Head(q) => {
            let f = match p {
                Pred::Left(_) => Functor::Left,
                Pred::Right(_) => Functor::Right,
                _ => Functor::Head,
            };
            match infer(q, sig, env, fs)? {
                // not yet known: assume the operand fits
                None => Some(sig.functor(f).0),
                Some(t) => Some(sig.apply(f, t).ok_or_else(|| TypeError::HeadOfPosition {
                    term: p.to_string(),
                    found: t,
                })?),
            }
        }
    })
}

/// Worlds of all definitions, by least-fixpoint iteration over the
/// coercion order.
pub fn infer_def_worlds(
    defs: &Definitions,
    sig: &ModelSignature,
    fs: &FeatureSystem,
) -> Result<BTreeMap<String, World>, TypeError> {
    let mut env: Env = defs.names().map(|n| (n.to_string(), None)).collect();
    loop {
        let mut changed = false;
        for (name, body) in defs.iter() {
            let t = infer(body, sig, &env, fs)?;
            if t > env[name] {
                env.insert(name.to_string(), t);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    env.into_iter()
        .map(|(n, t)| t.map(|t| (n.clone(), t)).ok_or(TypeError::Uninhabited(n)))
        .collect()
}

fn lift(p: Pred, from: World, to: World) -> Pred {
    if from == World::Alphabet && to != World::Alphabet {
        Pred::head(p)
    } else {
        p
    }
}

/// Rebuilds `p` with explicit `head` coercions, given final definition worlds.
pub(crate) fn elaborate(
    p: &Pred,
    sig: &ModelSignature,
    worlds: &BTreeMap<String, World>,
    fs: &FeatureSystem,
) -> Result<(Pred, World), TypeError> {
    let env: Env = worlds.iter().map(|(k, v)| (k.clone(), Some(*v))).collect();
    elab(p, sig, &env, fs)
}

fn elab(p: &Pred, sig: &ModelSignature, env: &Env, fs: &FeatureSystem) -> Result<(Pred, World), TypeError> {
    let world = infer(p, sig, env, fs)?.ok_or_else(|| TypeError::Uninhabited(p.to_string()))?;
    let out = match p {
        Pred::Not(q) => Pred::not(elab(q, sig, env, fs)?.0),
        Pred::And(a, b) | Pred::Or(a, b) => {
            let (ea, ta) = elab(a, sig, env, fs)?;
            let (eb, tb) = elab(b, sig, env, fs)?;
            let (ea, eb) = (lift(ea, ta, world), lift(eb, tb, world));
            if matches!(p, Pred::And(..)) {
                Pred::and(ea, eb)
            } else {
                Pred::or(ea, eb)
            }
        }
        Pred::Left(q) | Pred::Right(q) => {
            let (eq, tq) = elab(q, sig, env, fs)?;
            let eq = lift(eq, tq, World::NonNullString);
            if matches!(p, Pred::Left(_)) {
                Pred::left(eq)
            } else {
                Pred::right(eq)
            }
        }
        Pred::Head(q) => Pred::head(elab(q, sig, env, fs)?.0),
        leaf => leaf.clone(),
    };
    Ok((out, world))
}

/// Assigns a world to `ast`, resolving names against `fs` and `defs`.
pub fn typecheck(
    ast: &Pred,
    sig: &ModelSignature,
    defs: &Definitions,
    fs: &FeatureSystem,
) -> Result<TypedPredicate, TypeError> {
    let worlds = infer_def_worlds(defs, sig, fs)?;
    let (ast, world) = elaborate(ast, sig, &worlds, fs)?;
    Ok(TypedPredicate { ast, world })
}
