//! Ordered default application over candidate sets.
//!
//! A default at a position is imposed only if some candidate survives it;
//! otherwise the step is skipped and logged. Three ordering schemes decide
//! which impositions come first: by feature (a rank over defaults, each
//! applied left to right), by failure count (keep the candidates with the
//! fewest exceptions) and by position (sweep outward from, or inward to, an
//! edge).

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::features::{enumerate_candidates, CandidateSet, EnumerateError, FeatureSystem, LexicalForm, Word};
use crate::interp::{CompiledConstraint, Constraint, PointSet, Program};
use crate::predicate::{Definitions, TypeError, TypedPredicate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Near,
    Far,
}

/// How the impositions of a single default are ordered among themselves.
/// Ordering across defaults is given by the order of the schedule, which
/// [`rank_defaults`] derives from a feature rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderingScheme {
    /// Every position, left to right.
    ByFeature,
    ByFailureCount,
    ByPosition { edge: Edge, direction: Direction },
}

impl fmt::Display for OrderingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderingScheme::ByFeature => write!(f, "by-feature"),
            OrderingScheme::ByFailureCount => write!(f, "by-failure-count"),
            OrderingScheme::ByPosition { edge, direction } => write!(
                f,
                "by-position {} {}",
                match edge {
                    Edge::Left => "left",
                    Edge::Right => "right",
                },
                match direction {
                    Direction::Near => "near",
                    Direction::Far => "far",
                }
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Default {
    pub name: String,
    /// Position-typed; alphabet values are read through `head`.
    pub value: TypedPredicate,
    pub site: Option<TypedPredicate>,
    pub scheme: OrderingScheme,
}

impl Default {
    pub fn new(name: &str, value: TypedPredicate, site: Option<TypedPredicate>, scheme: OrderingScheme) -> Self {
        Default {
            name: name.to_string(),
            value: value.at_positions(),
            site: site.map(TypedPredicate::at_positions),
            scheme,
        }
    }

    pub fn with_scheme(&self, scheme: OrderingScheme) -> Self {
        Default { scheme, ..self.clone() }
    }

    /// A constraint read as a default: its body imposed at its site.
    pub fn from_constraint(c: &Constraint, scheme: OrderingScheme) -> Self {
        Default {
            name: c.name.clone(),
            value: c.body.clone(),
            site: c.site.clone(),
            scheme,
        }
    }

    fn as_constraint(&self) -> Constraint {
        Constraint {
            name: self.name.clone(),
            body: self.value.clone(),
            site: self.site.clone(),
        }
    }

    pub fn compile(&self, fs: &FeatureSystem, defs: &Definitions) -> Result<CompiledConstraint, TypeError> {
        self.as_constraint().compile(fs, defs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("strict constraints leave no candidate: {}", constraints.join(", "))]
    StrictContradiction { constraints: Vec<String> },
    #[error("position {position} is out of range for length {len}")]
    PositionOutOfRange { position: usize, len: usize },
    #[error(transparent)]
    Rank(#[from] RankError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    #[error("default `{0}` is not ranked")]
    Unranked(String),
    #[error("rank mentions `{0}`, which is not a scheduled default")]
    Unknown(String),
    #[error("rank mentions `{0}` twice")]
    Duplicate(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Applied,
    Skipped,
}

/// Where a step applied: one position, or the whole word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepSite {
    At(usize),
    Global,
}

impl Serialize for StepSite {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            StepSite::At(i) => s.serialize_u64(*i as u64),
            StepSite::Global => s.serialize_str("global"),
        }
    }
}

impl fmt::Display for StepSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSite::At(i) => write!(f, "{i}"),
            StepSite::Global => write!(f, "global"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub default: String,
    pub position: StepSite,
    pub outcome: Outcome,
    pub before: usize,
    pub after: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DerivationTrace {
    pub steps: Vec<TraceStep>,
}

impl DerivationTrace {
    /// One line per step: `step N: default D at i: applied, |S| a→b`.
    pub fn lines(&self) -> Vec<String> {
        self.steps
            .iter()
            .enumerate()
            .map(|(n, s)| {
                format!(
                    "step {}: default {} at {}: {}, |S| {}→{}",
                    n + 1,
                    s.default,
                    s.position,
                    match s.outcome {
                        Outcome::Applied => "applied",
                        Outcome::Skipped => "skipped",
                    },
                    s.before,
                    s.after
                )
            })
            .collect()
    }
}

/// Keeps the members satisfying `ok`, unless none do.
fn impose_filter(set: &CandidateSet, ok: impl Fn(&Word) -> bool) -> (CandidateSet, Outcome) {
    let kept: BTreeSet<Word> = set.words.iter().filter(|w| ok(w)).cloned().collect();
    if kept.is_empty() {
        (set.clone(), Outcome::Skipped)
    } else {
        (set.with_words(kept), Outcome::Applied)
    }
}

/// `{w ∈ S : i ∈ I_w(p)}` if that is nonempty, otherwise `S` unchanged.
pub fn impose(
    set: &CandidateSet,
    pred: &TypedPredicate,
    position: usize,
    fs: &FeatureSystem,
    defs: &Definitions,
) -> Result<(CandidateSet, Outcome), EngineError> {
    let len = set.form.len();
    if position >= len {
        return Err(EngineError::PositionOutOfRange { position, len });
    }
    let prog = Program::compile(&pred.clone().at_positions(), fs, defs)?;
    Ok(impose_filter(set, |w| prog.points_in(w).contains(position)))
}

/// Orders defaults by `rank`, highest first.
pub fn rank_defaults(defaults: &[Default], rank: &[String]) -> Result<Vec<Default>, RankError> {
    let mut seen = BTreeSet::new();
    for r in rank {
        if !seen.insert(r.as_str()) {
            return Err(RankError::Duplicate(r.clone()));
        }
        if !defaults.iter().any(|d| &d.name == r) {
            return Err(RankError::Unknown(r.clone()));
        }
    }
    if let Some(d) = defaults.iter().find(|d| !seen.contains(d.name.as_str())) {
        return Err(RankError::Unranked(d.name.clone()));
    }
    Ok(rank
        .iter()
        .map(|r| defaults.iter().find(|d| &d.name == r).expect("checked").clone())
        .collect())
}

/// All positions of the highest-ranked default, then the next, each left to
/// right.
pub fn schedule_by_feature(
    defaults: &[Default],
    rank: &[String],
    form: &LexicalForm,
) -> Result<Vec<(String, usize)>, RankError> {
    Ok(rank_defaults(defaults, rank)?
        .into_iter()
        .flat_map(|d| (0..form.len()).map(move |i| (d.name.clone(), i)))
        .collect())
}

/// Positions visited by a directional sweep, in priority order.
pub fn sweep_order(len: usize, edge: Edge, direction: Direction) -> Vec<usize> {
    let mut distances: Vec<usize> = (0..len).collect();
    if direction == Direction::Far {
        distances.reverse();
    }
    distances
        .into_iter()
        .map(|d| match edge {
            Edge::Left => d,
            Edge::Right => len - 1 - d,
        })
        .collect()
}

struct Applier<'a> {
    compiled: CompiledConstraint,
    default: &'a Default,
}

impl Applier<'_> {
    fn impose_at(&self, set: CandidateSet, position: usize, trace: &mut DerivationTrace) -> CandidateSet {
        let before = set.len();
        let (next, outcome) = impose_filter(&set, |w| self.compiled.holds(w).contains(position));
        trace.steps.push(TraceStep {
            default: self.default.name.clone(),
            position: StepSite::At(position),
            outcome,
            before,
            after: next.len(),
        });
        next
    }

    fn minimize(&self, set: CandidateSet, trace: &mut DerivationTrace) -> CandidateSet {
        let before = set.len();
        let counts: Vec<(usize, &Word)> = set
            .words
            .iter()
            .map(|w| (self.compiled.count_violations(w), w))
            .collect();
        let best = counts.iter().map(|(c, _)| *c).min();
        let kept: BTreeSet<Word> = counts
            .iter()
            .filter(|(c, _)| Some(*c) == best)
            .map(|(_, w)| (*w).clone())
            .collect();
        let next = if kept.is_empty() { set.clone() } else { set.with_words(kept) };
        trace.steps.push(TraceStep {
            default: self.default.name.clone(),
            position: StepSite::Global,
            outcome: Outcome::Applied,
            before,
            after: next.len(),
        });
        next
    }

    fn apply(&self, set: CandidateSet, trace: &mut DerivationTrace) -> CandidateSet {
        let len = set.form.len();
        match self.default.scheme {
            OrderingScheme::ByFeature => (0..len).fold(set, |s, i| self.impose_at(s, i, trace)),
            OrderingScheme::ByPosition { edge, direction } => sweep_order(len, edge, direction)
                .into_iter()
                .fold(set, |s, i| self.impose_at(s, i, trace)),
            OrderingScheme::ByFailureCount => self.minimize(set, trace),
        }
    }
}

/// Members whose exception count for `default` is minimal; ties are kept.
pub fn minimize_failures(
    set: &CandidateSet,
    default: &Default,
    fs: &FeatureSystem,
    defs: &Definitions,
) -> Result<CandidateSet, EngineError> {
    let a = Applier { compiled: default.compile(fs, defs)?, default };
    Ok(a.minimize(set.clone(), &mut DerivationTrace::default()))
}

/// Imposes `default` at increasing (near) or decreasing (far) distance from
/// `edge`, each step consistent-or-skip.
pub fn directional_sweep(
    set: &CandidateSet,
    default: &Default,
    edge: Edge,
    direction: Direction,
    fs: &FeatureSystem,
    defs: &Definitions,
) -> Result<(CandidateSet, DerivationTrace), EngineError> {
    let d = default.with_scheme(OrderingScheme::ByPosition { edge, direction });
    let a = Applier { compiled: d.compile(fs, defs)?, default: &d };
    let mut trace = DerivationTrace::default();
    let out = a.apply(set.clone(), &mut trace);
    Ok((out, trace))
}

/// Filters `set` by the strict constraints, then applies `scheduled` in
/// order, each default by its own scheme.
pub fn apply_schedule(
    set: &CandidateSet,
    strict: &[Constraint],
    scheduled: &[Default],
    fs: &FeatureSystem,
    defs: &Definitions,
) -> Result<(CandidateSet, DerivationTrace), EngineError> {
    let strict_compiled = strict
        .iter()
        .map(|c| c.compile(fs, defs))
        .collect::<Result<Vec<_>, _>>()?;
    let kept: BTreeSet<Word> = set
        .words
        .iter()
        .filter(|w| strict_compiled.iter().all(|c| c.count_violations(w) == 0))
        .cloned()
        .collect();
    if kept.is_empty() {
        return Err(EngineError::StrictContradiction {
            constraints: strict.iter().map(|c| c.name.clone()).collect(),
        });
    }
    let mut current = set.with_words(kept);
    let mut trace = DerivationTrace::default();
    for d in scheduled {
        let a = Applier { compiled: d.compile(fs, defs)?, default: d };
        current = a.apply(current, &mut trace);
    }
    Ok((current, trace))
}

/// Enumerates the candidates of `form` and runs the schedule over them.
pub fn derive(
    form: &LexicalForm,
    strict: &[Constraint],
    scheduled: &[Default],
    fs: &FeatureSystem,
    defs: &Definitions,
    cap: u64,
) -> Result<(CandidateSet, DerivationTrace), EngineError> {
    let set = enumerate_candidates(form, fs, cap)?;
    apply_schedule(&set, strict, scheduled, fs, defs)
}

/// The positions at which `default` holds in `word`.
pub fn holding_positions(
    word: &Word,
    default: &Default,
    fs: &FeatureSystem,
    defs: &Definitions,
) -> Result<PointSet, EngineError> {
    Ok(default.compile(fs, defs)?.holds(word))
}
