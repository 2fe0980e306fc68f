//! Binary feature systems, partial specifications and candidate sets.
//!
//! Segments are always totally valued. Underspecification lives only in
//! [`PartialSpec`]s, which appear in class definitions and in the slots of a
//! [`LexicalForm`]. A lexical form denotes the finite [`CandidateSet`] of
//! words compatible with it slot by slot.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub type FeatureId = usize;
pub type SegmentId = usize;

/// Default ceiling on materialized candidate sets.
pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn negate(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn from_bool(b: bool) -> Sign {
        if b {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// Accepts `+`, `-` and the Unicode minus sign.
    pub fn from_char(c: char) -> Option<Sign> {
        match c {
            '+' => Some(Sign::Plus),
            '-' | '\u{2212}' => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("feature clash on feature #{feature}")]
pub struct Clash {
    pub feature: FeatureId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("duplicate feature `{0}`")]
    DuplicateFeature(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("unknown segment `{0}`")]
    UnknownSegment(String),
    #[error("duplicate segment `{0}`")]
    DuplicateSegment(String),
    #[error("segment `{segment}` leaves feature `{feature}` unvalued")]
    PartialSegment { segment: String, feature: String },
    #[error("segments `{0}` and `{1}` have identical feature values")]
    IdenticalSegments(String, String),
    #[error("duplicate class `{0}`")]
    DuplicateClass(String),
    #[error("feature `{0}` is given two values")]
    Conflict(String),
    #[error("specification `{0}` has no compatible segment")]
    EmptyDenotation(String),
    #[error("malformed specification `{0}`")]
    MalformedSpec(String),
    #[error("cannot segment `{word}` at byte {offset}")]
    Unsegmentable { word: String, offset: usize },
}

/// A partial map from features to values. Absent features are unspecified.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialSpec(BTreeMap<FeatureId, Sign>);

impl PartialSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (FeatureId, Sign)>>(pairs: I) -> Result<Self, Clash> {
        let mut spec = PartialSpec::new();
        for (f, s) in pairs {
            spec.set(f, s)?;
        }
        Ok(spec)
    }

    pub fn get(&self, feature: FeatureId) -> Option<Sign> {
        self.0.get(&feature).copied()
    }

    /// Adds a value, failing if the feature already carries the opposite one.
    pub fn set(&mut self, feature: FeatureId, sign: Sign) -> Result<(), Clash> {
        match self.0.insert(feature, sign) {
            Some(old) if old != sign => {
                self.0.insert(feature, old);
                Err(Clash { feature })
            }
            _ => Ok(()),
        }
    }

    pub fn remove(&mut self, feature: FeatureId) -> Option<Sign> {
        self.0.remove(&feature)
    }

    pub fn iter(&self) -> impl Iterator<Item = (FeatureId, Sign)> + '_ {
        self.0.iter().map(|(&f, &s)| (f, s))
    }

    /// Number of feature tokens.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Conjunction of two specifications.
    pub fn unify(&self, other: &PartialSpec) -> Result<PartialSpec, Clash> {
        let mut out = self.clone();
        for (f, s) in other.iter() {
            out.set(f, s)?;
        }
        Ok(out)
    }

    /// True when every token of `self` also appears in `other`.
    pub fn subsumes(&self, other: &PartialSpec) -> bool {
        self.iter().all(|(f, s)| other.get(f) == Some(s))
    }

    /// The tokens shared by both specifications.
    pub fn intersect(&self, other: &PartialSpec) -> PartialSpec {
        PartialSpec(
            self.0
                .iter()
                .filter(|(f, s)| other.0.get(f) == Some(s))
                .map(|(&f, &s)| (f, s))
                .collect(),
        )
    }

    /// Splits off the tokens whose feature id is at least `bound`.
    pub fn split_at(&self, bound: FeatureId) -> (PartialSpec, PartialSpec) {
        let (low, high): (BTreeMap<_, _>, BTreeMap<_, _>) =
            self.0.iter().map(|(&f, &s)| (f, s)).partition(|(f, _)| *f < bound);
        (PartialSpec(low), PartialSpec(high))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub name: String,
    values: Vec<Sign>,
}

impl Segment {
    pub fn value(&self, feature: FeatureId) -> Option<Sign> {
        self.values.get(feature).copied()
    }

    pub fn spec(&self) -> PartialSpec {
        PartialSpec(self.values.iter().copied().enumerate().collect())
    }

    pub fn extends(&self, spec: &PartialSpec) -> bool {
        spec.iter().all(|(f, s)| self.value(f) == Some(s))
    }
}

/// A word: a sequence of segments of one feature system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<SegmentId>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn segments(&self) -> &[SegmentId] {
        &self.0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureSystem {
    features: Vec<String>,
    segments: Vec<Segment>,
    classes: BTreeMap<String, PartialSpec>,
    feature_index: HashMap<String, FeatureId>,
    segment_index: HashMap<String, SegmentId>,
}

impl FeatureSystem {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(features: I) -> Result<Self, FeatureError> {
        let mut fs = FeatureSystem::default();
        for name in features {
            fs.add_feature(name.into())?;
        }
        Ok(fs)
    }

    pub fn add_feature(&mut self, name: String) -> Result<FeatureId, FeatureError> {
        if !self.segments.is_empty() {
            // Existing segments would stop being total.
            return Err(FeatureError::PartialSegment {
                segment: self.segments[0].name.clone(),
                feature: name,
            });
        }
        if self.feature_index.contains_key(&name) {
            return Err(FeatureError::DuplicateFeature(name));
        }
        let id = self.features.len();
        self.feature_index.insert(name.clone(), id);
        self.features.push(name);
        Ok(id)
    }

    pub fn add_segment(&mut self, name: &str, spec: &PartialSpec) -> Result<SegmentId, FeatureError> {
        if self.segment_index.contains_key(name) {
            return Err(FeatureError::DuplicateSegment(name.to_string()));
        }
        let mut values = Vec::with_capacity(self.features.len());
        for (f, fname) in self.features.iter().enumerate() {
            match spec.get(f) {
                Some(s) => values.push(s),
                None => {
                    return Err(FeatureError::PartialSegment {
                        segment: name.to_string(),
                        feature: fname.clone(),
                    })
                }
            }
        }
        if let Some((f, _)) = spec.iter().find(|(f, _)| *f >= self.features.len()) {
            return Err(FeatureError::UnknownFeature(format!("#{f}")));
        }
        if let Some(other) = self.segments.iter().find(|s| s.values == values) {
            return Err(FeatureError::IdenticalSegments(other.name.clone(), name.to_string()));
        }
        let id = self.segments.len();
        self.segment_index.insert(name.to_string(), id);
        self.segments.push(Segment { name: name.to_string(), values });
        Ok(id)
    }

    pub fn add_class(&mut self, name: &str, spec: PartialSpec) -> Result<(), FeatureError> {
        if let Some((f, _)) = spec.iter().find(|(f, _)| *f >= self.features.len()) {
            return Err(FeatureError::UnknownFeature(format!("#{f}")));
        }
        if self.classes.contains_key(name) {
            return Err(FeatureError::DuplicateClass(name.to_string()));
        }
        self.classes.insert(name.to_string(), spec);
        Ok(())
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, id: SegmentId) -> &Segment {
        &self.segments[id]
    }

    pub fn feature_id(&self, name: &str) -> Option<FeatureId> {
        self.feature_index.get(name).copied()
    }

    pub fn feature_name(&self, id: FeatureId) -> &str {
        &self.features[id]
    }

    pub fn segment_id(&self, name: &str) -> Option<SegmentId> {
        self.segment_index.get(name).copied()
    }

    pub fn class(&self, name: &str) -> Option<&PartialSpec> {
        self.classes.get(name)
    }

    pub fn classes(&self) -> impl Iterator<Item = (&str, &PartialSpec)> {
        self.classes.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Builds a specification from `(feature name, sign)` pairs.
    pub fn spec(&self, pairs: &[(&str, Sign)]) -> Result<PartialSpec, FeatureError> {
        let mut spec = PartialSpec::new();
        for &(name, sign) in pairs {
            let f = self
                .feature_id(name)
                .ok_or_else(|| FeatureError::UnknownFeature(name.to_string()))?;
            spec.set(f, sign)
                .map_err(|_| FeatureError::Conflict(name.to_string()))?;
        }
        Ok(spec)
    }

    /// Parses `[+front,-round]`; `[]` is the empty specification.
    pub fn parse_spec(&self, text: &str) -> Result<PartialSpec, FeatureError> {
        let inner = text
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| FeatureError::MalformedSpec(text.to_string()))?;
        let mut pairs = Vec::new();
        for token in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let mut chars = token.chars();
            let sign = chars
                .next()
                .and_then(Sign::from_char)
                .ok_or_else(|| FeatureError::MalformedSpec(text.to_string()))?;
            let name = chars.as_str().trim();
            if name.is_empty() {
                return Err(FeatureError::MalformedSpec(text.to_string()));
            }
            pairs.push((name, sign));
        }
        self.spec(&pairs)
    }

    /// Segments whose total assignment extends `spec`, in declaration order.
    pub fn compatible_segments(&self, spec: &PartialSpec) -> Vec<SegmentId> {
        (0..self.segments.len())
            .filter(|&id| self.segments[id].extends(spec))
            .collect()
    }

    /// Fills in every feature that is constant across the compatible segments.
    pub fn redundancy_closure(&self, spec: &PartialSpec) -> Result<PartialSpec, FeatureError> {
        let compatible = self.compatible_segments(spec);
        let (first, rest) = compatible
            .split_first()
            .ok_or_else(|| FeatureError::EmptyDenotation(self.render_spec(spec)))?;
        let mut closed = self.segments[*first].spec();
        for &id in rest {
            closed = closed.intersect(&self.segments[id].spec());
        }
        Ok(closed)
    }

    pub fn is_total(&self, spec: &PartialSpec) -> bool {
        (0..self.features.len()).all(|f| spec.get(f).is_some())
    }

    /// A denotation-preserving subset of `spec`, obtained by dropping tokens
    /// in declaration order whenever the remaining tokens pick out the same
    /// segments.
    pub fn minimal_spec(&self, spec: &PartialSpec) -> PartialSpec {
        let target = self.compatible_segments(spec);
        let mut out = spec.clone();
        for (f, _) in spec.iter() {
            let sign = out.remove(f).expect("token present");
            if self.compatible_segments(&out) != target {
                out.set(f, sign).expect("restoring a removed token");
            }
        }
        out
    }

    pub fn render_spec(&self, spec: &PartialSpec) -> String {
        let body: Vec<String> = spec
            .iter()
            .map(|(f, s)| match self.features.get(f) {
                Some(name) => format!("{s}{name}"),
                None => format!("{s}#{f}"),
            })
            .collect();
        format!("[{}]", body.join(","))
    }

    /// Renders a lexical slot: a segment name for a total specification,
    /// otherwise the redundancy-free bracket form.
    pub fn render_slot(&self, spec: &PartialSpec) -> String {
        if self.is_total(spec) {
            let matches = self.compatible_segments(spec);
            if let [only] = matches.as_slice() {
                return self.segments[*only].name.clone();
            }
        }
        self.render_spec(&self.minimal_spec(spec))
    }

    pub fn render_form(&self, form: &LexicalForm) -> String {
        form.slots
            .iter()
            .map(|s| self.render_slot(s))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn render_word(&self, word: &Word) -> String {
        word.0.iter().map(|&id| self.segments[id].name.as_str()).collect()
    }

    pub fn word_names<'a>(&'a self, word: &Word) -> Vec<&'a str> {
        word.0.iter().map(|&id| self.segments[id].name.as_str()).collect()
    }

    /// Segments a string by greedy longest match against segment names.
    pub fn parse_word(&self, text: &str) -> Result<Word, FeatureError> {
        let mut names: Vec<(&str, SegmentId)> = self
            .segments
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.as_str(), i))
            .collect();
        names.sort_by_key(|(n, _)| std::cmp::Reverse(n.len()));
        let mut out = Vec::new();
        let mut rest = text;
        while !rest.is_empty() {
            let hit = names.iter().find(|(n, _)| rest.starts_with(n));
            match hit {
                Some((n, id)) => {
                    out.push(*id);
                    rest = &rest[n.len()..];
                }
                None => {
                    return Err(FeatureError::Unsegmentable {
                        word: text.to_string(),
                        offset: text.len() - rest.len(),
                    })
                }
            }
        }
        Ok(Word(out))
    }

    /// Parses a whitespace-separated list of segment names.
    pub fn word_from_names(&self, names: &[&str]) -> Result<Word, FeatureError> {
        names
            .iter()
            .map(|n| {
                self.segment_id(n)
                    .ok_or_else(|| FeatureError::UnknownSegment(n.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }

    /// Ordering by segment-name sequence, used for all printed listings.
    pub fn cmp_words(&self, a: &Word, b: &Word) -> std::cmp::Ordering {
        self.word_names(a).cmp(&self.word_names(b))
    }
}

/// A fixed-length sequence of partial specifications.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LexicalForm {
    pub slots: Vec<PartialSpec>,
}

impl LexicalForm {
    pub fn new(slots: Vec<PartialSpec>) -> Self {
        LexicalForm { slots }
    }

    pub fn from_word(fs: &FeatureSystem, word: &Word) -> Self {
        LexicalForm {
            slots: word.0.iter().map(|&id| fs.segment(id).spec()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Feature-token count of the form.
    pub fn spec_size(&self) -> usize {
        self.slots.iter().map(PartialSpec::len).sum()
    }

    pub fn concat(&self, other: &LexicalForm) -> LexicalForm {
        let mut slots = self.slots.clone();
        slots.extend(other.slots.iter().cloned());
        LexicalForm { slots }
    }

    pub fn admits(&self, fs: &FeatureSystem, word: &Word) -> bool {
        word.len() == self.len()
            && self
                .slots
                .iter()
                .zip(&word.0)
                .all(|(spec, &id)| fs.segment(id).extends(spec))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("slot {slot} has no compatible segment")]
    EmptySlot { slot: usize },
    #[error("candidate set of {product} words exceeds the cap of {cap}")]
    CapExceeded { product: u128, cap: u64 },
}

/// The words denoted by a lexical form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    pub form: LexicalForm,
    pub words: BTreeSet<Word>,
}

impl CandidateSet {
    pub fn new(form: LexicalForm, words: BTreeSet<Word>) -> Self {
        CandidateSet { form, words }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &Word) -> bool {
        self.words.contains(word)
    }

    pub fn with_words(&self, words: BTreeSet<Word>) -> CandidateSet {
        CandidateSet { form: self.form.clone(), words }
    }

    /// Members in segment-name order.
    pub fn sorted<'a>(&'a self, fs: &FeatureSystem) -> Vec<&'a Word> {
        let mut v: Vec<&Word> = self.words.iter().collect();
        v.sort_by(|a, b| fs.cmp_words(a, b));
        v
    }

    pub fn rendered(&self, fs: &FeatureSystem) -> Vec<String> {
        self.sorted(fs).into_iter().map(|w| fs.render_word(w)).collect()
    }
}

/// Materializes the Cartesian product of the per-slot domains.
pub fn enumerate_candidates(
    form: &LexicalForm,
    fs: &FeatureSystem,
    cap: u64,
) -> Result<CandidateSet, EnumerateError> {
    let domains: Vec<Vec<SegmentId>> = form
        .slots
        .iter()
        .map(|s| fs.compatible_segments(s))
        .collect();
    if let Some(slot) = domains.iter().position(Vec::is_empty) {
        return Err(EnumerateError::EmptySlot { slot });
    }
    let product = domains
        .iter()
        .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128));
    if product > cap as u128 {
        return Err(EnumerateError::CapExceeded { product, cap });
    }
    let mut words = BTreeSet::new();
    let mut odometer = vec![0usize; domains.len()];
    loop {
        words.insert(Word(
            odometer
                .iter()
                .zip(&domains)
                .map(|(&i, d)| d[i])
                .collect(),
        ));
        let mut k = domains.len();
        loop {
            if k == 0 {
                return Ok(CandidateSet::new(form.clone(), words));
            }
            k -= 1;
            odometer[k] += 1;
            if odometer[k] < domains[k].len() {
                break;
            }
            odometer[k] = 0;
        }
    }
}

/// Every word of the given length over the alphabet of `fs`.
pub fn all_words(fs: &FeatureSystem, len: usize, cap: u64) -> Result<CandidateSet, EnumerateError> {
    enumerate_candidates(&LexicalForm::new(vec![PartialSpec::new(); len]), fs, cap)
}
