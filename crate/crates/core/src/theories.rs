//! Theory presets over the defaults engine.
//!
//! | theory | lexical features | default ordering                  |
//! |--------|------------------|-----------------------------------|
//! | UT     | a priori subset  | feature first, position second    |
//! | OT     | all              | rank first, failure count second  |
//! | ET     | all + exceptions | none                              |

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::defaults::{derive, rank_defaults, Default, DerivationTrace, EngineError, OrderingScheme};
use crate::features::{
    enumerate_candidates, CandidateSet, FeatureError, FeatureId, FeatureSystem, LexicalForm, PartialSpec, Sign, Word,
    DEFAULT_CAP,
};
use crate::interp::{CompiledConstraint, Constraint};
use crate::predicate::Definitions;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoryKind {
    Ut,
    Ot,
    Et,
}

impl std::fmt::Display for TheoryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TheoryKind::Ut => "ut",
            TheoryKind::Ot => "ot",
            TheoryKind::Et => "et",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("{theory} does not allow default `{default}` ordered {scheme}")]
    SchemeNotAllowed {
        theory: TheoryKind,
        default: String,
        scheme: OrderingScheme,
    },
    #[error("{theory} does not allow defaults (found `{default}`)")]
    DefaultsNotAllowed { theory: TheoryKind, default: String },
    #[error("{theory} does not allow strict constraints (found `{constraint}`)")]
    StrictNotAllowed { theory: TheoryKind, constraint: String },
    #[error("ot needs at least one ranked constraint")]
    EmptyRanking,
    #[error("slot {slot} specifies `{feature}`, which is not a lexical feature")]
    NonLexical { slot: usize, feature: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

impl From<crate::defaults::RankError> for TheoryError {
    fn from(e: crate::defaults::RankError) -> Self {
        TheoryError::Engine(e.into())
    }
}

impl From<crate::predicate::TypeError> for TheoryError {
    fn from(e: crate::predicate::TypeError) -> Self {
        TheoryError::Engine(e.into())
    }
}

impl From<crate::features::EnumerateError> for TheoryError {
    fn from(e: crate::features::EnumerateError) -> Self {
        TheoryError::Engine(e.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtConfig {
    pub lexical: BTreeSet<FeatureId>,
    pub strict: Vec<Constraint>,
    /// Already in rank order.
    pub defaults: Vec<Default>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OtConfig {
    /// Highest rank first.
    pub ranked: Vec<Default>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtConfig {
    pub strict: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TheoryConfig {
    Ut(UtConfig),
    Ot(OtConfig),
    Et(EtConfig),
}

impl TheoryConfig {
    /// Underspecification theory: defaults ranked by `rank`, each ordered by
    /// feature or by position.
    pub fn ut(
        lexical: BTreeSet<FeatureId>,
        strict: Vec<Constraint>,
        defaults: Vec<Default>,
        rank: &[String],
    ) -> Result<TheoryConfig, TheoryError> {
        for d in &defaults {
            if d.scheme == OrderingScheme::ByFailureCount {
                return Err(TheoryError::SchemeNotAllowed {
                    theory: TheoryKind::Ut,
                    default: d.name.clone(),
                    scheme: d.scheme,
                });
            }
        }
        let defaults = rank_defaults(&defaults, rank)?;
        Ok(TheoryConfig::Ut(UtConfig { lexical, strict, defaults }))
    }

    /// Optimality theory: every constraint is violable and resolved by
    /// failure count, highest rank first.
    pub fn ot(ranked: Vec<Default>, strict: &[Constraint]) -> Result<TheoryConfig, TheoryError> {
        if let Some(c) = strict.first() {
            return Err(TheoryError::StrictNotAllowed { theory: TheoryKind::Ot, constraint: c.name.clone() });
        }
        if ranked.is_empty() {
            return Err(TheoryError::EmptyRanking);
        }
        if let Some(d) = ranked.iter().find(|d| d.scheme != OrderingScheme::ByFailureCount) {
            return Err(TheoryError::SchemeNotAllowed {
                theory: TheoryKind::Ot,
                default: d.name.clone(),
                scheme: d.scheme,
            });
        }
        Ok(TheoryConfig::Ot(OtConfig { ranked }))
    }

    /// Exception theory: strict constraints only.
    pub fn et(strict: Vec<Constraint>, defaults: &[Default]) -> Result<TheoryConfig, TheoryError> {
        if let Some(d) = defaults.first() {
            return Err(TheoryError::DefaultsNotAllowed { theory: TheoryKind::Et, default: d.name.clone() });
        }
        Ok(TheoryConfig::Et(EtConfig { strict }))
    }

    pub fn kind(&self) -> TheoryKind {
        match self {
            TheoryConfig::Ut(_) => TheoryKind::Ut,
            TheoryConfig::Ot(_) => TheoryKind::Ot,
            TheoryConfig::Et(_) => TheoryKind::Et,
        }
    }

    pub fn defaults(&self) -> &[Default] {
        match self {
            TheoryConfig::Ut(c) => &c.defaults,
            TheoryConfig::Ot(c) => &c.ranked,
            TheoryConfig::Et(_) => &[],
        }
    }

    pub fn strict(&self) -> &[Constraint] {
        match self {
            TheoryConfig::Ut(c) => &c.strict,
            TheoryConfig::Ot(_) => &[],
            TheoryConfig::Et(c) => &c.strict,
        }
    }

    pub fn derive(
        &self,
        form: &LexicalForm,
        fs: &FeatureSystem,
        defs: &Definitions,
        cap: u64,
    ) -> Result<(CandidateSet, DerivationTrace), TheoryError> {
        match self {
            TheoryConfig::Ut(c) => ut_derive(form, c, fs, defs, cap),
            TheoryConfig::Ot(c) => ot_derive(form, c, fs, defs, cap),
            TheoryConfig::Et(c) => Ok((et_interpret(form, c, fs, defs, cap)?, DerivationTrace::default())),
        }
    }
}

/// Fills every predictable feature value of every slot.
pub fn close_form(form: &LexicalForm, fs: &FeatureSystem) -> Result<LexicalForm, FeatureError> {
    Ok(LexicalForm::new(
        form.slots
            .iter()
            .map(|s| fs.redundancy_closure(s))
            .collect::<Result<_, _>>()?,
    ))
}

pub fn ut_derive(
    form: &LexicalForm,
    cfg: &UtConfig,
    fs: &FeatureSystem,
    defs: &Definitions,
    cap: u64,
) -> Result<(CandidateSet, DerivationTrace), TheoryError> {
    for (slot, spec) in form.slots.iter().enumerate() {
        // a fully specified segment is lexically just its name
        if fs.is_total(spec) {
            continue;
        }
        if let Some((f, _)) = spec.iter().find(|(f, _)| !cfg.lexical.contains(f)) {
            return Err(TheoryError::NonLexical { slot, feature: fs.feature_name(f).to_string() });
        }
    }
    let closed = close_form(form, fs)?;
    Ok(derive(&closed, &cfg.strict, &cfg.defaults, fs, defs, cap)?)
}

pub fn ot_derive(
    form: &LexicalForm,
    cfg: &OtConfig,
    fs: &FeatureSystem,
    defs: &Definitions,
    cap: u64,
) -> Result<(CandidateSet, DerivationTrace), TheoryError> {
    Ok(derive(form, &[], &cfg.ranked, fs, defs, cap)?)
}

/// The base feature system extended with one binary feature per constraint,
/// valued `+` at the positions where the constraint holds.
pub struct ExceptionFeatureSystem<'a> {
    pub base: &'a FeatureSystem,
    constraints: Vec<CompiledConstraint>,
}

impl<'a> ExceptionFeatureSystem<'a> {
    pub fn new(base: &'a FeatureSystem, constraints: &[Constraint], defs: &Definitions) -> Result<Self, TheoryError> {
        Ok(ExceptionFeatureSystem {
            base,
            constraints: constraints
                .iter()
                .map(|c| c.compile(base, defs))
                .collect::<Result<_, _>>()?,
        })
    }

    /// Id of the exception feature for the named constraint.
    pub fn feature_id(&self, name: &str) -> Option<FeatureId> {
        self.base.feature_id(name).or_else(|| {
            self.constraints
                .iter()
                .position(|c| c.name == name)
                .map(|k| self.base.features().len() + k)
        })
    }

    pub fn feature_name(&self, id: FeatureId) -> &str {
        let n = self.base.features().len();
        if id < n {
            self.base.feature_name(id)
        } else {
            &self.constraints[id - n].name
        }
    }

    pub fn is_exception(&self, id: FeatureId) -> bool {
        id >= self.base.features().len()
    }

    /// Value of feature `id` at `position` of `word`.
    pub fn value(&self, word: &Word, position: usize, id: FeatureId) -> Sign {
        let n = self.base.features().len();
        if id < n {
            self.base.segment(word.0[position]).value(id).expect("segments are total")
        } else {
            Sign::from_bool(self.constraints[id - n].holds(word).contains(position))
        }
    }

    /// Parses `[+f,-C,...]` where `C` may name a constraint.
    pub fn parse_spec(&self, text: &str) -> Result<PartialSpec, FeatureError> {
        let inner = text
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| FeatureError::MalformedSpec(text.to_string()))?;
        let mut spec = PartialSpec::new();
        for tok in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let mut chars = tok.chars();
            let sign = chars
                .next()
                .and_then(Sign::from_char)
                .ok_or_else(|| FeatureError::MalformedSpec(text.to_string()))?;
            let name = chars.as_str().trim();
            let id = self
                .feature_id(name)
                .ok_or_else(|| FeatureError::UnknownFeature(name.to_string()))?;
            spec.set(id, sign)
                .map_err(|_| FeatureError::Conflict(name.to_string()))?;
        }
        Ok(spec)
    }

    /// Words of `set` whose exception values match every exception literal
    /// in the form.
    fn filter(&self, set: &CandidateSet, form: &LexicalForm) -> BTreeSet<Word> {
        let bound = self.base.features().len();
        let literals: Vec<(usize, FeatureId, Sign)> = form
            .slots
            .iter()
            .enumerate()
            .flat_map(|(i, s)| {
                let (_, exc) = s.split_at(bound);
                exc.iter().map(move |(f, v)| (i, f, v)).collect::<Vec<_>>()
            })
            .collect();
        set.words
            .iter()
            .filter(|w| literals.iter().all(|&(i, f, v)| self.value(w, i, f) == v))
            .cloned()
            .collect()
    }
}

/// Strict constraint filtering with lexical exceptions: a slot marked with the
/// exception feature `[-C]` is exempt from `C` (and must violate it).
pub fn et_interpret(
    form: &LexicalForm,
    cfg: &EtConfig,
    fs: &FeatureSystem,
    defs: &Definitions,
    cap: u64,
) -> Result<CandidateSet, TheoryError> {
    let efs = ExceptionFeatureSystem::new(fs, &cfg.strict, defs)?;
    let bound = fs.features().len();
    let base = LexicalForm::new(form.slots.iter().map(|s| s.split_at(bound).0).collect());
    let set = enumerate_candidates(&base, fs, cap)?;
    let exempt: Vec<BTreeSet<usize>> = (0..cfg.strict.len())
        .map(|k| {
            form.slots
                .iter()
                .enumerate()
                .filter(|(_, s)| s.get(bound + k) == Some(Sign::Minus))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let kept: BTreeSet<Word> = efs
        .filter(&set, form)
        .into_iter()
        .filter(|w| {
            efs.constraints
                .iter()
                .zip(&exempt)
                .all(|(c, ex)| c.violations(w).positions().all(|i| ex.contains(&i)))
        })
        .collect();
    if kept.is_empty() {
        return Err(EngineError::StrictContradiction {
            constraints: cfg.strict.iter().map(|c| c.name.clone()).collect(),
        }
        .into());
    }
    Ok(CandidateSet::new(form.clone(), kept))
}

/// Greedily drops feature tokens from the full specification of `w`,
/// rightmost slot first and features in declaration order, as long as the
/// form still denotes exactly `{w}`.
pub fn et_minimize(
    w: &Word,
    cfg: &EtConfig,
    fs: &FeatureSystem,
    defs: &Definitions,
) -> Result<LexicalForm, TheoryError> {
    let mut form = LexicalForm::from_word(fs, w);
    let target = BTreeSet::from([w.clone()]);
    if et_interpret(&form, cfg, fs, defs, DEFAULT_CAP)?.words != target {
        return Err(EngineError::StrictContradiction {
            constraints: cfg.strict.iter().map(|c| c.name.clone()).collect(),
        }
        .into());
    }
    for slot in (0..form.len()).rev() {
        for f in 0..fs.features().len() {
            let Some(sign) = form.slots[slot].get(f) else { continue };
            form.slots[slot].remove(f);
            let singleton = match et_interpret(&form, cfg, fs, defs, DEFAULT_CAP) {
                Ok(s) => s.words == target,
                Err(_) => false,
            };
            if !singleton {
                form.slots[slot].set(f, sign).expect("restoring a removed value");
            }
        }
    }
    Ok(form)
}

/// Convenience lookup of theories by name.
pub type Theories = BTreeMap<String, TheoryConfig>;
