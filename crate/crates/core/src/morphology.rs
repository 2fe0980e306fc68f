//! Morpheme abstraction, allomorph recovery and paradigm decomposition.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::defaults::{impose, Default, EngineError};
use crate::features::{all_words, enumerate_candidates, CandidateSet, EnumerateError, FeatureSystem, LexicalForm, PartialSpec, Word};
use crate::predicate::{Definitions, Pred};
use crate::theories::{TheoryConfig, TheoryError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphError {
    #[error("no allomorphs given")]
    Empty,
    #[error("allomorphs differ in length: {expected} vs {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("paradigm rows must all have {expected} cells, row {row} has {found}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("row margins overlap: {}", overlapping.iter().map(|(a, b)| format!("{}/{}", a + 1, b + 1)).collect::<Vec<_>>().join(", "))]
    DisjointnessFailure { overlapping: Vec<(usize, usize)> },
    #[error("row {row} and column {column} specifications clash")]
    MarginClash { row: usize, column: usize },
    #[error("default `{0}` is not a feature literal")]
    NotFeatureLiteral(String),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// Equal-length surface forms of one morpheme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllomorphSet {
    forms: Vec<Word>,
}

impl AllomorphSet {
    pub fn new(forms: Vec<Word>) -> Result<Self, MorphError> {
        let first = forms.first().ok_or(MorphError::Empty)?;
        if let Some(w) = forms.iter().find(|w| w.len() != first.len()) {
            return Err(MorphError::LengthMismatch { expected: first.len(), found: w.len() });
        }
        Ok(AllomorphSet { forms })
    }

    pub fn forms(&self) -> &[Word] {
        &self.forms
    }

    pub fn len(&self) -> usize {
        self.forms[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn slotwise_intersection<'a>(forms: impl IntoIterator<Item = &'a LexicalForm>) -> Option<LexicalForm> {
    forms.into_iter().fold(None, |acc: Option<LexicalForm>, f| {
        Some(match acc {
            None => f.clone(),
            Some(a) => LexicalForm::new(a.slots.iter().zip(&f.slots).map(|(x, y)| x.intersect(y)).collect()),
        })
    })
}

/// The feature values shared by all allomorphs, slot by slot.
pub fn abstract_form(a: &AllomorphSet, fs: &FeatureSystem) -> LexicalForm {
    let forms: Vec<LexicalForm> = a.forms.iter().map(|w| LexicalForm::from_word(fs, w)).collect();
    slotwise_intersection(&forms).expect("nonempty")
}

/// Derives `stem ++ abstract` under `theory` and keeps the suffix span of the
/// survivors.
pub fn recover(
    abstract_: &LexicalForm,
    stem: &Word,
    theory: &TheoryConfig,
    fs: &FeatureSystem,
    defs: &Definitions,
    cap: u64,
) -> Result<CandidateSet, MorphError> {
    let form = LexicalForm::from_word(fs, stem).concat(abstract_);
    let (out, _) = theory.derive(&form, fs, defs, cap)?;
    let suffixes = out
        .words
        .iter()
        .map(|w| Word(w.0[stem.len()..].to_vec()))
        .collect();
    Ok(CandidateSet::new(abstract_.clone(), suffixes))
}

/// A rectangular table of cells, each a set of same-length words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParadigmTable {
    pub cells: Vec<Vec<BTreeSet<Word>>>,
}

impl ParadigmTable {
    pub fn new(cells: Vec<Vec<BTreeSet<Word>>>) -> Result<Self, MorphError> {
        let width = cells.first().map_or(0, Vec::len);
        for (row, r) in cells.iter().enumerate() {
            if r.len() != width {
                return Err(MorphError::Ragged { row, expected: width, found: r.len() });
            }
        }
        let mut lengths = cells.iter().flatten().flatten().map(Word::len);
        if let Some(first) = lengths.next() {
            if let Some(other) = lengths.find(|&l| l != first) {
                return Err(MorphError::LengthMismatch { expected: first, found: other });
            }
        }
        Ok(ParadigmTable { cells })
    }

    pub fn from_words(rows: Vec<Vec<Word>>) -> Result<Self, MorphError> {
        Self::new(
            rows.into_iter()
                .map(|r| r.into_iter().map(|w| BTreeSet::from([w])).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.cells.len()
    }

    pub fn columns(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }

    pub fn word_len(&self) -> usize {
        self.cells.iter().flatten().flatten().next().map_or(0, Word::len)
    }
}

pub type Margins = (Vec<BTreeSet<Word>>, Vec<BTreeSet<Word>>);

/// Row disjunctions and column conjunctions of `(cell ∨ ¬row)`, computed over
/// all words of the table's length.
pub fn paradigm_margins(t: &ParadigmTable, fs: &FeatureSystem, cap: u64) -> Result<Margins, MorphError> {
    let ambient = all_words(fs, t.word_len(), cap)?.words;
    let alpha: Vec<BTreeSet<Word>> = t
        .cells
        .iter()
        .map(|row| row.iter().flatten().cloned().collect())
        .collect();
    let beta = (0..t.columns())
        .map(|j| {
            t.cells.iter().zip(&alpha).fold(ambient.clone(), |acc, (row, a)| {
                acc.into_iter()
                    .filter(|w| row[j].contains(w) || !a.contains(w))
                    .collect()
            })
        })
        .collect();
    Ok((alpha, beta))
}

/// `cell_ij = α_i ∩ β_j`, provided the rows are pairwise disjoint.
pub fn paradigm_recover(alpha: &[BTreeSet<Word>], beta: &[BTreeSet<Word>]) -> Result<ParadigmTable, MorphError> {
    let mut overlapping = Vec::new();
    for i in 0..alpha.len() {
        for k in i + 1..alpha.len() {
            if !alpha[i].is_disjoint(&alpha[k]) {
                overlapping.push((i, k));
            }
        }
    }
    if !overlapping.is_empty() {
        return Err(MorphError::DisjointnessFailure { overlapping });
    }
    Ok(ParadigmTable {
        cells: alpha
            .iter()
            .map(|a| beta.iter().map(|b| a.intersection(b).cloned().collect()).collect())
            .collect(),
    })
}

/// Cell-by-cell comparison of a recovered table against the original.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryReport {
    pub recovered: ParadigmTable,
    pub exact: Vec<Vec<bool>>,
}

impl RecoveryReport {
    pub fn compare(original: &ParadigmTable, recovered: ParadigmTable) -> Self {
        let exact = original
            .cells
            .iter()
            .zip(&recovered.cells)
            .map(|(o, r)| o.iter().zip(r).map(|(a, b)| a == b).collect())
            .collect();
        RecoveryReport { recovered, exact }
    }

    pub fn recovered_count(&self) -> usize {
        self.exact.iter().flatten().filter(|&&b| b).count()
    }

    pub fn total(&self) -> usize {
        self.exact.iter().map(Vec::len).sum()
    }

    pub fn is_exact(&self) -> bool {
        self.recovered_count() == self.total()
    }
}

fn is_feature_literal(p: &Pred) -> bool {
    match p {
        Pred::Feat { .. } => true,
        Pred::Head(q) => is_feature_literal(q),
        _ => false,
    }
}

/// Abstracts rows and columns by intersection, unifies the margins per
/// cell, and imposes `default` at every position, left to right.
pub fn paradigm_default_recover(
    t: &ParadigmTable,
    default: &Default,
    fs: &FeatureSystem,
    defs: &Definitions,
    cap: u64,
) -> Result<RecoveryReport, MorphError> {
    if !is_feature_literal(&default.value.ast) {
        return Err(MorphError::NotFeatureLiteral(default.name.clone()));
    }
    let cell_forms: Vec<Vec<LexicalForm>> = t
        .cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|cell| {
                    let forms: Vec<LexicalForm> = cell.iter().map(|w| LexicalForm::from_word(fs, w)).collect();
                    slotwise_intersection(&forms).unwrap_or_else(|| LexicalForm::new(vec![PartialSpec::new(); t.word_len()]))
                })
                .collect()
        })
        .collect();
    let row_specs: Vec<LexicalForm> = cell_forms
        .iter()
        .map(|r| slotwise_intersection(r).expect("nonempty row"))
        .collect();
    let col_specs: Vec<LexicalForm> = (0..t.columns())
        .map(|j| slotwise_intersection(cell_forms.iter().map(|r| &r[j])).expect("nonempty column"))
        .collect();
    let mut cells = Vec::with_capacity(t.rows());
    for (i, r) in row_specs.iter().enumerate() {
        let mut row = Vec::with_capacity(t.columns());
        for (j, c) in col_specs.iter().enumerate() {
            let slots = r
                .slots
                .iter()
                .zip(&c.slots)
                .map(|(a, b)| a.unify(b))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| MorphError::MarginClash { row: i, column: j })?;
            let mut set = enumerate_candidates(&LexicalForm::new(slots), fs, cap)?;
            for pos in 0..set.form.len() {
                set = impose(&set, &default.value, pos, fs, defs)?.0;
            }
            row.push(set.words);
        }
        cells.push(row);
    }
    Ok(RecoveryReport::compare(t, ParadigmTable { cells }))
}
