//! Line-oriented configuration files.
//!
//! ```text
//! feature NAME...
//! segment NAME [+f,-g,...]
//! class NAME = [+f,...]
//! define NAME = PRED
//! constraint NAME [@ SITE] = BODY
//! default NAME [@ SITE] = VALUE
//! lexicon NAME = SLOT...
//! allomorphs NAME = WORD...
//! paradigm NAME
//!   CELL...
//! end
//! theory ut|ot|et NAME
//!   lexical FEATURE... | *
//!   strict CONSTRAINT...
//!   default NAME by-feature | by-failure-count | by-position left|right near|far
//!   rank NAME...
//! end
//! ```
//!
//! A lexicon slot is a segment name, a run of segment names, or a bracketed
//! spec, which may use constraint names as exception features. A paradigm
//! cell is a word or a `{w1,w2,...}` set of words. `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::defaults::{Default, Direction, Edge, OrderingScheme};
use crate::features::{FeatureError, FeatureSystem, LexicalForm, Word};
use crate::interp::Constraint;
use crate::morphology::{AllomorphSet, MorphError, ParadigmTable};
use crate::predicate::{
    check_stratified, infer_def_worlds, parse, typecheck, CycleError, Definitions, ModelSignature, Pred,
    SyntaxError, TypeError, TypedPredicate,
};
use crate::theories::{ExceptionFeatureSystem, TheoryConfig, TheoryError};

#[derive(Debug, Error)]
pub enum ConfigErrorKind {
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Morph(#[from] MorphError),
    #[error("`{0}` is declared twice")]
    Duplicate(String),
    #[error("unresolved name `{0}`")]
    Unresolved(String),
    #[error("{0}")]
    Malformed(String),
}

#[derive(Debug, Error)]
#[error("line {line}: {kind}")]
pub struct ConfigError {
    /// 1-based; 0 when the error is not tied to a line.
    pub line: usize,
    pub kind: ConfigErrorKind,
}

fn at<E: Into<ConfigErrorKind>>(line: usize) -> impl FnOnce(E) -> ConfigError {
    move |e| ConfigError { line, kind: e.into() }
}

fn malformed(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError { line, kind: ConfigErrorKind::Malformed(msg.into()) }
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub fs: FeatureSystem,
    pub defs: Definitions,
    pub constraints: BTreeMap<String, Constraint>,
    pub defaults: BTreeMap<String, Default>,
    /// Entries that use only base features.
    pub lexicon: BTreeMap<String, LexicalForm>,
    /// Slot texts of every entry, including those with exception features.
    pub lexicon_src: BTreeMap<String, Vec<String>>,
    pub allomorphs: BTreeMap<String, AllomorphSet>,
    pub paradigms: BTreeMap<String, ParadigmTable>,
    pub theories: BTreeMap<String, TheoryConfig>,
}

impl EngineConfig {
    /// The lexical form of `entry`, resolving exception features against the
    /// strict constraints of `theory`.
    pub fn form_for(&self, entry: &str, theory: Option<&TheoryConfig>) -> Result<LexicalForm, ConfigErrorKind> {
        if let Some(f) = self.lexicon.get(entry) {
            return Ok(f.clone());
        }
        let src = self
            .lexicon_src
            .get(entry)
            .ok_or_else(|| ConfigErrorKind::Unresolved(entry.to_string()))?;
        let strict = theory.map_or(&[][..], |t| t.strict());
        let efs = ExceptionFeatureSystem::new(&self.fs, strict, &self.defs)?;
        parse_slots(src, &self.fs, Some(&efs))
    }
}

fn split_slots(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    for c in text.chars() {
        match c {
            '[' | '{' => {
                depth += 1;
                cur.push(c);
            }
            ']' | '}' => {
                depth = depth.saturating_sub(1);
                cur.push(c);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_slots(
    slots: &[String],
    fs: &FeatureSystem,
    efs: Option<&ExceptionFeatureSystem>,
) -> Result<LexicalForm, ConfigErrorKind> {
    let mut out = Vec::new();
    for s in slots {
        if s.starts_with('[') {
            out.push(match efs {
                Some(e) => e.parse_spec(s)?,
                None => fs.parse_spec(s)?,
            });
        } else {
            let w = fs.parse_word(s)?;
            out.extend(w.0.iter().map(|&id| fs.segment(id).spec()));
        }
    }
    Ok(LexicalForm::new(out))
}

fn parse_cell(text: &str, fs: &FeatureSystem) -> Result<BTreeSet<Word>, FeatureError> {
    match text.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
        Some(inner) => inner
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|w| fs.parse_word(w))
            .collect(),
        None => Ok(BTreeSet::from([fs.parse_word(text)?])),
    }
}

/// `NAME [@ SITE] = BODY`
fn split_decl(rest: &str, line: usize) -> Result<(String, Option<String>, String), ConfigError> {
    let (head, body) = rest
        .split_once('=')
        .ok_or_else(|| malformed(line, "expected `NAME [@ SITE] = BODY`"))?;
    let (name, site) = match head.split_once('@') {
        Some((n, s)) => (n.trim(), Some(s.trim().to_string())),
        None => (head.trim(), None),
    };
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(malformed(line, format!("bad name `{name}`")));
    }
    Ok((name.to_string(), site, body.trim().to_string()))
}

struct RawDecl {
    line: usize,
    name: String,
    site: Option<Pred>,
    body: Pred,
}

struct RawTheory {
    line: usize,
    kind: String,
    name: String,
    lexical: Option<Vec<String>>,
    strict: Vec<String>,
    defaults: Vec<(String, OrderingScheme)>,
    rank: Option<Vec<String>>,
}

enum Block {
    Paradigm { line: usize, name: String, rows: Vec<Vec<BTreeSet<Word>>> },
    Theory(RawTheory),
}

fn parse_scheme(words: &[&str], line: usize) -> Result<OrderingScheme, ConfigError> {
    match words {
        ["by-feature"] => Ok(OrderingScheme::ByFeature),
        ["by-failure-count"] => Ok(OrderingScheme::ByFailureCount),
        ["by-position", edge, dir] => {
            let edge = match *edge {
                "left" => Edge::Left,
                "right" => Edge::Right,
                e => return Err(malformed(line, format!("unknown edge `{e}`"))),
            };
            let direction = match *dir {
                "near" => Direction::Near,
                "far" => Direction::Far,
                d => return Err(malformed(line, format!("unknown direction `{d}`"))),
            };
            Ok(OrderingScheme::ByPosition { edge, direction })
        }
        _ => Err(malformed(line, format!("unknown ordering `{}`", words.join(" ")))),
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<EngineConfig, ConfigError> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| ConfigError {
        line: 0,
        kind: ConfigErrorKind::Io(format!("{}: {e}", path.as_ref().display())),
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<EngineConfig, ConfigError> {
    let mut fs: Option<FeatureSystem> = None;
    let mut names = BTreeMap::<String, usize>::new();
    let mut def_lines = BTreeMap::<String, usize>::new();
    let mut defs = Definitions::new();
    let mut constraints = Vec::<RawDecl>::new();
    let mut defaults = Vec::<RawDecl>::new();
    let mut lexicon = Vec::<(usize, String, Vec<String>)>::new();
    let mut allomorphs = Vec::<(usize, String, Vec<String>)>::new();
    let mut blocks = Vec::<Block>::new();
    let mut open: Option<Block> = None;

    let mut claim = |name: &str, line: usize| -> Result<(), ConfigError> {
        if names.insert(name.to_string(), line).is_some() {
            return Err(ConfigError { line, kind: ConfigErrorKind::Duplicate(name.to_string()) });
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (kw, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();

        if let Some(block) = open.as_mut() {
            if content == "end" {
                blocks.push(open.take().expect("open block"));
                continue;
            }
            match block {
                Block::Paradigm { rows, .. } => {
                    let fs = fs.as_ref().ok_or_else(|| malformed(line, "paradigm before features"))?;
                    let row = split_slots(content)
                        .iter()
                        .map(|c| parse_cell(c, fs))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(at(line))?;
                    rows.push(row);
                }
                Block::Theory(t) => {
                    let words: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                    match kw {
                        "lexical" => t.lexical = Some(words),
                        "strict" => t.strict.extend(words),
                        "rank" => t.rank = Some(words),
                        "default" => {
                            let (name, scheme) = words
                                .split_first()
                                .ok_or_else(|| malformed(line, "expected `default NAME ORDERING`"))?;
                            let scheme_words: Vec<&str> = scheme.iter().map(String::as_str).collect();
                            t.defaults.push((name.clone(), parse_scheme(&scheme_words, line)?));
                        }
                        other => return Err(malformed(line, format!("unknown theory directive `{other}`"))),
                    }
                }
            }
            continue;
        }

        match kw {
            "feature" => {
                let f = fs.get_or_insert_with(|| FeatureSystem::new(Vec::<String>::new()).expect("empty"));
                if !f.segments().is_empty() {
                    return Err(malformed(line, "features must be declared before segments"));
                }
                for name in rest.split_whitespace() {
                    f.add_feature(name.to_string()).map_err(at(line))?;
                }
            }
            "segment" => {
                let f = fs.as_mut().ok_or_else(|| malformed(line, "segment before features"))?;
                let (name, spec) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| malformed(line, "expected `segment NAME [spec]`"))?;
                let spec = f.parse_spec(spec.trim()).map_err(at(line))?;
                f.add_segment(name, &spec).map_err(at(line))?;
            }
            "class" => {
                let f = fs.as_mut().ok_or_else(|| malformed(line, "class before features"))?;
                let (name, spec) = rest
                    .split_once('=')
                    .ok_or_else(|| malformed(line, "expected `class NAME = [spec]`"))?;
                let spec = f.parse_spec(spec.trim()).map_err(at(line))?;
                f.add_class(name.trim(), spec).map_err(at(line))?;
            }
            "define" | "constraint" | "default" => {
                let f = fs.as_ref().ok_or_else(|| malformed(line, "predicate before features"))?;
                let (name, site, body) = split_decl(rest, line)?;
                claim(&name, line)?;
                let body = parse(&body, f).map_err(at(line))?;
                let site = site.map(|s| parse(&s, f)).transpose().map_err(at(line))?;
                match kw {
                    "define" => {
                        if site.is_some() {
                            return Err(malformed(line, "definitions take no site"));
                        }
                        def_lines.insert(name.clone(), line);
                        defs.insert(&name, body);
                    }
                    "constraint" => constraints.push(RawDecl { line, name, site, body }),
                    _ => defaults.push(RawDecl { line, name, site, body }),
                }
            }
            "lexicon" | "allomorphs" => {
                let (name, body) = rest
                    .split_once('=')
                    .ok_or_else(|| malformed(line, format!("expected `{kw} NAME = ...`")))?;
                let name = name.trim().to_string();
                let slots = split_slots(body);
                if kw == "lexicon" {
                    lexicon.push((line, name, slots));
                } else {
                    allomorphs.push((line, name, slots));
                }
            }
            "paradigm" => {
                if rest.is_empty() {
                    return Err(malformed(line, "expected `paradigm NAME`"));
                }
                open = Some(Block::Paradigm { line, name: rest.to_string(), rows: Vec::new() });
            }
            "theory" => {
                let (kind, name) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| malformed(line, "expected `theory ut|ot|et NAME`"))?;
                open = Some(Block::Theory(RawTheory {
                    line,
                    kind: kind.to_string(),
                    name: name.trim().to_string(),
                    lexical: None,
                    strict: Vec::new(),
                    defaults: Vec::new(),
                    rank: None,
                }));
            }
            other => return Err(malformed(line, format!("unknown declaration `{other}`"))),
        }
    }
    if open.is_some() {
        return Err(malformed(text.lines().count(), "unterminated block"));
    }
    let fs = fs.ok_or_else(|| malformed(0, "no features declared"))?;
    let sig = ModelSignature::strings();

    check_stratified(&defs).map_err(|e| {
        let line = e.cycle.first().and_then(|n| def_lines.get(n)).copied().unwrap_or(0);
        ConfigError { line, kind: e.into() }
    })?;
    if let Err(e) = infer_def_worlds(&defs, &sig, &fs) {
        return Err(ConfigError { line: type_error_line(&e, &defs, &def_lines), kind: e.into() });
    }

    let typed = |p: &Pred, line: usize| -> Result<TypedPredicate, ConfigError> {
        typecheck(p, &sig, &defs, &fs).map_err(at(line))
    };
    let mut constraint_map = BTreeMap::new();
    for c in &constraints {
        let body = typed(&c.body, c.line)?;
        let site = c.site.as_ref().map(|s| typed(s, c.line)).transpose()?;
        constraint_map.insert(c.name.clone(), Constraint::new(&c.name, body, site));
    }
    let mut default_map = BTreeMap::new();
    for d in &defaults {
        let value = typed(&d.body, d.line)?;
        let site = d.site.as_ref().map(|s| typed(s, d.line)).transpose()?;
        default_map.insert(d.name.clone(), Default::new(&d.name, value, site, OrderingScheme::ByFeature));
    }

    let mut config = EngineConfig {
        fs,
        defs,
        constraints: constraint_map,
        defaults: default_map,
        lexicon: BTreeMap::new(),
        lexicon_src: BTreeMap::new(),
        allomorphs: BTreeMap::new(),
        paradigms: BTreeMap::new(),
        theories: BTreeMap::new(),
    };

    let all_constraints: Vec<Constraint> = config.constraints.values().cloned().collect();
    let efs = ExceptionFeatureSystem::new(&config.fs, &all_constraints, &config.defs).map_err(at(0))?;
    for (line, name, slots) in lexicon {
        match parse_slots(&slots, &config.fs, None) {
            Ok(form) => {
                config.lexicon.insert(name.clone(), form);
            }
            // entries naming constraints are resolved per theory
            Err(ConfigErrorKind::Feature(FeatureError::UnknownFeature(_))) => {
                parse_slots(&slots, &config.fs, Some(&efs)).map_err(|kind| ConfigError { line, kind })?;
            }
            Err(kind) => return Err(ConfigError { line, kind }),
        }
        if config.lexicon_src.insert(name.clone(), slots).is_some() {
            return Err(ConfigError { line, kind: ConfigErrorKind::Duplicate(name) });
        }
    }
    for (line, name, forms) in allomorphs {
        let words = forms
            .iter()
            .map(|w| config.fs.parse_word(w))
            .collect::<Result<Vec<_>, _>>()
            .map_err(at(line))?;
        let set = AllomorphSet::new(words).map_err(at(line))?;
        if config.allomorphs.insert(name.clone(), set).is_some() {
            return Err(ConfigError { line, kind: ConfigErrorKind::Duplicate(name) });
        }
    }
    for block in blocks {
        match block {
            Block::Paradigm { line, name, rows } => {
                let t = ParadigmTable::new(rows).map_err(at(line))?;
                if config.paradigms.insert(name.clone(), t).is_some() {
                    return Err(ConfigError { line, kind: ConfigErrorKind::Duplicate(name) });
                }
            }
            Block::Theory(t) => {
                let line = t.line;
                let name = t.name.clone();
                let theory = build_theory(t, &config)?;
                if config.theories.insert(name.clone(), theory).is_some() {
                    return Err(ConfigError { line, kind: ConfigErrorKind::Duplicate(name) });
                }
            }
        }
    }
    Ok(config)
}

fn type_error_line(e: &TypeError, defs: &Definitions, lines: &BTreeMap<String, usize>) -> usize {
    let needle = match e {
        TypeError::Uninhabited(n) => return lines.get(n).copied().unwrap_or(0),
        TypeError::HeadOfPosition { term, .. } => term.clone(),
        TypeError::UnknownFeature(n) | TypeError::UnknownSegment(n) | TypeError::Unresolved(n) => n.clone(),
    };
    defs.iter()
        .filter(|(_, body)| body.to_string().contains(&needle))
        .filter_map(|(n, _)| lines.get(n).copied())
        .min()
        .unwrap_or(0)
}

fn build_theory(t: RawTheory, cfg: &EngineConfig) -> Result<TheoryConfig, ConfigError> {
    let line = t.line;
    let unresolved = |n: &str| ConfigError { line, kind: ConfigErrorKind::Unresolved(n.to_string()) };
    let strict = t
        .strict
        .iter()
        .map(|n| cfg.constraints.get(n).cloned().ok_or_else(|| unresolved(n)))
        .collect::<Result<Vec<_>, _>>()?;
    let listed = t
        .defaults
        .iter()
        .map(|(n, scheme)| {
            cfg.defaults
                .get(n)
                .map(|d| d.with_scheme(*scheme))
                .or_else(|| cfg.constraints.get(n).map(|c| Default::from_constraint(c, *scheme)))
                .ok_or_else(|| unresolved(n))
        })
        .collect::<Result<Vec<_>, _>>()?;
    match t.kind.as_str() {
        "ut" => {
            let lexical = match t.lexical.as_deref() {
                None => (0..cfg.fs.features().len()).collect(),
                Some([star]) if star == "*" => (0..cfg.fs.features().len()).collect(),
                Some(names) => names
                    .iter()
                    .map(|n| {
                        cfg.fs.feature_id(n).ok_or_else(|| ConfigError {
                            line,
                            kind: FeatureError::UnknownFeature(n.clone()).into(),
                        })
                    })
                    .collect::<Result<BTreeSet<_>, _>>()?,
            };
            let rank = t
                .rank
                .unwrap_or_else(|| listed.iter().map(|d| d.name.clone()).collect());
            TheoryConfig::ut(lexical, strict, listed, &rank).map_err(at(line))
        }
        "ot" => {
            let rank = t.rank.unwrap_or_default();
            let ranked = rank
                .iter()
                .map(|n| {
                    if let Some(d) = listed.iter().find(|d| &d.name == n) {
                        return Ok(d.clone());
                    }
                    cfg.constraints
                        .get(n)
                        .map(|c| Default::from_constraint(c, OrderingScheme::ByFailureCount))
                        .or_else(|| cfg.defaults.get(n).map(|d| d.with_scheme(OrderingScheme::ByFailureCount)))
                        .ok_or_else(|| unresolved(n))
                })
                .collect::<Result<Vec<_>, _>>()?;
            TheoryConfig::ot(ranked, &strict).map_err(at(line))
        }
        "et" => {
            if t.rank.is_some() {
                return Err(malformed(line, "et takes no rank"));
            }
            TheoryConfig::et(strict, &listed).map_err(at(line))
        }
        other => Err(malformed(line, format!("unknown theory `{other}`"))),
    }
}
