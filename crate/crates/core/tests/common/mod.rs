//! Fixtures, brute-force oracles and generators shared by the integration
//! test targets.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use pho::features::{FeatureSystem, LexicalForm, PartialSpec, Sign, Word};
use pho::morphology::ParadigmTable;
use pho::EngineConfig;
use proptest::prelude::*;
use pho::predicate::Pred;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

pub fn config(name: &str) -> EngineConfig {
    pho::load_config(config_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// `.` is an open syllable, `+`/`-` a fixed one.
pub fn stress_form(fs: &FeatureSystem, pattern: &str) -> LexicalForm {
    LexicalForm::new(
        pattern
            .chars()
            .map(|c| match c {
                '.' => PartialSpec::new(),
                c => fs.segment(fs.segment_id(&c.to_string()).unwrap()).spec(),
            })
            .collect(),
    )
}

/// All `+`/`-` strings matching a `.`/`+`/`-` pattern.
pub fn stress_strings(pattern: &str) -> Vec<String> {
    let n = pattern.len();
    (0..1u32 << n)
        .map(|bits| {
            (0..n)
                .map(|i| if bits >> (n - 1 - i) & 1 == 1 { '+' } else { '-' })
                .collect::<String>()
        })
        .filter(|s| s.chars().zip(pattern.chars()).all(|(c, p)| p == '.' || p == c))
        .collect()
}

pub fn clash_free(s: &str) -> bool {
    !s.contains("++")
}

pub fn unstressed(s: &str) -> usize {
    s.matches('-').count()
}

/// Clash-free fillings with the fewest unstressed syllables.
pub fn counting_oracle(pattern: &str) -> BTreeSet<String> {
    let ok: Vec<String> = stress_strings(pattern).into_iter().filter(|s| clash_free(s)).collect();
    let best = ok.iter().map(|s| unstressed(s)).min().unwrap();
    ok.into_iter().filter(|s| unstressed(s) == best).collect()
}

/// Left-to-right: stress each syllable if some surviving filling allows it.
pub fn sweep_oracle(pattern: &str) -> BTreeSet<String> {
    let mut set: Vec<String> = stress_strings(pattern).into_iter().filter(|s| clash_free(s)).collect();
    for i in 0..pattern.len() {
        let kept: Vec<String> = set.iter().filter(|s| s.as_bytes()[i] == b'+').cloned().collect();
        if !kept.is_empty() {
            set = kept;
        }
    }
    set.into_iter().collect()
}

/// Patterns of length `n` with at most `k` fixed slots.
pub fn patterns(n: usize, k: usize) -> Vec<String> {
    let mut out = Vec::new();
    for code in 0..3u32.pow(n as u32) {
        let mut c = code;
        let s: String = (0..n)
            .map(|_| {
                let ch = ['.', '+', '-'][(c % 3) as usize];
                c /= 3;
                ch
            })
            .collect();
        if s.chars().filter(|&ch| ch != '.').count() <= k {
            out.push(s);
        }
    }
    out
}

/// Nearest preceding vowel is front.
pub fn left_oracle(fs: &FeatureSystem, w: &Word) -> Vec<usize> {
    let cons = fs.feature_id("cons").unwrap();
    let front = fs.feature_id("front").unwrap();
    let mut last_vowel_front = false;
    let mut out = Vec::new();
    for (i, &s) in w.0.iter().enumerate() {
        if last_vowel_front {
            out.push(i);
        }
        let seg = fs.segment(s);
        if seg.value(cons) == Some(Sign::Minus) {
            last_vowel_front = seg.value(front) == Some(Sign::Plus);
        }
    }
    out
}

/// A three-feature system with five segments, for random predicates.
pub fn small_fs() -> FeatureSystem {
    let mut fs = FeatureSystem::new(["f", "g", "h"]).unwrap();
    for (n, s) in [
        ("a", "[+f,+g,+h]"),
        ("b", "[+f,-g,+h]"),
        ("c", "[-f,-g,+h]"),
        ("d", "[-f,+g,-h]"),
        ("e", "[+f,+g,-h]"),
    ] {
        let spec = fs.parse_spec(s).unwrap();
        fs.add_segment(n, &spec).unwrap();
    }
    fs
}

fn literal() -> impl Strategy<Value = Pred> {
    prop_oneof![
        (prop::sample::select(vec!["f", "g", "h"]), any::<bool>())
            .prop_map(|(f, s)| Pred::feat(f, Sign::from_bool(s))),
        prop::sample::select(vec!["a", "b", "c", "d", "e"]).prop_map(Pred::seg),
    ]
}

/// Alphabet-typed predicates.
pub fn alphabet_pred() -> impl Strategy<Value = Pred> {
    literal().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Pred::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Pred::or(a, b)),
        ]
    })
}

/// Position-typed predicates, possibly mentioning null.
pub fn position_pred() -> impl Strategy<Value = Pred> {
    let leaf = prop_oneof![
        3 => alphabet_pred().prop_map(Pred::head),
        1 => Just(Pred::Null),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Pred::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::or(a, b)),
            inner.clone().prop_map(Pred::left),
            inner.prop_map(Pred::right),
        ]
    })
}

pub fn small_word() -> impl Strategy<Value = Word> {
    prop::collection::vec(0usize..5, 0..8).prop_map(Word)
}

pub fn spec_over(features: usize) -> impl Strategy<Value = PartialSpec> {
    prop::collection::vec(prop::option::of(any::<bool>()), features).prop_map(|vals| {
        PartialSpec::from_pairs(
            vals.into_iter()
                .enumerate()
                .filter_map(|(f, v)| v.map(|b| (f, Sign::from_bool(b)))),
        )
        .unwrap()
    })
}

pub fn stress_pattern() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!['.', '.', '+', '-']), 1..9)
        .prop_map(|v| v.into_iter().collect())
}

/// Feature systems with `k` segments over two features.
pub fn alphabet(k: usize) -> FeatureSystem {
    let mut fs = FeatureSystem::new(["x", "y"]).unwrap();
    for (name, spec) in [("p", "[+x,+y]"), ("q", "[+x,-y]"), ("r", "[-x,+y]"), ("s", "[-x,-y]")].iter().take(k) {
        let spec = fs.parse_spec(spec).unwrap();
        fs.add_segment(name, &spec).unwrap();
    }
    fs
}

/// Every injective filling of a `rows x cols` table from `words`.
pub fn for_each_distinct_table(words: &[Word], rows: usize, cols: usize, mut f: impl FnMut(ParadigmTable)) {
    let cells = rows * cols;
    let mut chosen: Vec<usize> = Vec::with_capacity(cells);
    let mut used = vec![false; words.len()];
    fn rec(
        words: &[Word],
        rows: usize,
        cols: usize,
        chosen: &mut Vec<usize>,
        used: &mut [bool],
        f: &mut dyn FnMut(ParadigmTable),
    ) {
        if chosen.len() == rows * cols {
            let table = chosen
                .chunks(cols)
                .map(|r| r.iter().map(|&i| words[i].clone()).collect())
                .collect();
            f(ParadigmTable::from_words(table).unwrap());
            return;
        }
        for i in 0..words.len() {
            if !used[i] {
                used[i] = true;
                chosen.push(i);
                rec(words, rows, cols, chosen, used, f);
                chosen.pop();
                used[i] = false;
            }
        }
    }
    if words.len() >= cells {
        rec(words, rows, cols, &mut chosen, &mut used, &mut f);
    }
}

pub mod props;
