//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::props;
use pho::defaults::{derive, impose, minimize_failures, Direction, Edge, OrderingScheme};
use pho::features::{all_words, enumerate_candidates, CandidateSet, FeatureSystem, Sign, Word, DEFAULT_CAP};
use pho::interp::{Denotation, PointSet, Program};
use pho::morphology::{
    abstract_form, paradigm_default_recover, paradigm_margins, paradigm_recover, recover, MorphError,
    RecoveryReport,
};
use pho::predicate::{parse, typecheck, Definitions, ModelSignature, TypedPredicate};
use pho::theories::{TheoryConfig, TheoryError};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn typed(text: &str, fs: &FeatureSystem, defs: &Definitions) -> TypedPredicate {
    typecheck(&parse(text, fs).unwrap(), &ModelSignature::strings(), defs, fs).unwrap()
}

fn rendered(fs: &FeatureSystem, set: &CandidateSet) -> BTreeSet<String> {
    set.words.iter().map(|w| fs.render_word(w)).collect()
}

fn toy_world() -> Outcome {
    let cfg = common::config("toyworld.pho");
    let fs = &cfg.fs;
    let objects = Word((0..fs.segments().len()).collect());
    let segs = |text: &str| match pho::denotation(&objects, &typed(text, fs, &cfg.defs), &cfg.defs, fs).unwrap() {
        Denotation::Segments(s) => s,
        other => panic!("{text}: {other:?}"),
    };
    let contradiction = segs("big & animate & slow");
    let tautology = segs("big | slow");
    ensure!(contradiction.is_empty(), "big & animate & slow = {contradiction:?}");
    ensure!(tautology.len() == 3, "big | slow = {tautology:?}");
    Ok("contradiction denotes 0 objects, tautology 3 of 3".into())
}

fn turkish_harmony() -> Outcome {
    let cfg = common::config("turkish.pho");
    let fs = &cfg.fs;
    let harmony = &cfg.constraints["Harmony"];
    let verdict = |w: &str| pho::satisfies(&fs.parse_word(w).unwrap(), harmony, fs, &cfg.defs).unwrap();
    ensure!(verdict("evler") == pho::Verdict::Ok, "evler: {:?}", verdict("evler"));
    ensure!(verdict("evlar") == pho::Verdict::Violations(vec![3]), "evlar: {:?}", verdict("evlar"));

    let left = Program::compile(&typed("Left", fs, &cfg.defs), fs, &cfg.defs).unwrap();
    let k = fs.segments().len();
    let mut checked = 0u64;
    for len in 0..=6 {
        let mut w = Word(vec![0; len]);
        loop {
            let expected = PointSet::from_positions(len, common::left_oracle(fs, &w));
            let got = left.points_in(&w);
            ensure!(got == expected, "{}: {got:?} vs {expected:?}", fs.render_word(&w));
            checked += 1;
            let mut i = len;
            while i > 0 && w.0[i - 1] == k - 1 {
                w.0[i - 1] = 0;
                i -= 1;
            }
            if i == 0 {
                break;
            }
            w.0[i - 1] += 1;
        }
    }
    Ok(format!("evlar fails at position 3 only; Left matches oracle on {checked} words"))
}

fn counting_stress() -> Outcome {
    let cfg = common::config("stress.pho");
    let fs = &cfg.fs;
    let strict = [cfg.constraints["NoClash"].clone()];
    let d = cfg.defaults["BeStressed"].with_scheme(OrderingScheme::ByFailureCount);
    for n in 1..=12 {
        let p = ".".repeat(n);
        let (out, _) = derive(&common::stress_form(fs, &p), &strict, std::slice::from_ref(&d), fs, &cfg.defs, DEFAULT_CAP).unwrap();
        let oracle = common::counting_oracle(&p);
        ensure!(rendered(fs, &out) == oracle, "length {n}: {:?} vs {oracle:?}", rendered(fs, &out));
        if n == 9 {
            ensure!(oracle == BTreeSet::from(["+-+-+-+-+".to_string()]), "oracle at 9: {oracle:?}");
        }
    }
    Ok("9 syllables give +-+-+-+-+; lengths 1-12 match brute force".into())
}

fn positional_vs_counting() -> Outcome {
    let cfg = common::config("stress.pho");
    let fs = &cfg.fs;
    let strict = [cfg.constraints["NoClash"].clone()];
    let form = common::stress_form(fs, "........");
    let counting = cfg.defaults["BeStressed"].with_scheme(OrderingScheme::ByFailureCount);
    let sweep = cfg.defaults["BeStressed"].with_scheme(OrderingScheme::ByPosition { edge: Edge::Left, direction: Direction::Near });
    let (c, _) = derive(&form, &strict, &[counting], fs, &cfg.defs, DEFAULT_CAP).unwrap();
    let (s, _) = derive(&form, &strict, &[sweep], fs, &cfg.defs, DEFAULT_CAP).unwrap();
    let (co, so) = (common::counting_oracle("........"), common::sweep_oracle("........"));
    ensure!(co.len() == 5 && so.len() == 1, "oracles {} / {}", co.len(), so.len());
    ensure!(rendered(fs, &c) == co, "counting {:?}", rendered(fs, &c));
    ensure!(rendered(fs, &s) == so, "sweep {:?}", rendered(fs, &s));
    Ok(format!("counting keeps {}, left/near sweep keeps {}", c.len(), s.len()))
}

/// `at_most_i` holds (anywhere) in a word with at most `i` unstressed
/// syllables, built from left and right counters of unstressed syllables.
fn violation_bounds(fs: &FeatureSystem, n: usize) -> (Definitions, Vec<TypedPredicate>) {
    let mut defs = Definitions::new();
    let mut add = |name: String, body: String| {
        defs.insert(&name, parse(&body, fs).unwrap());
    };
    add("Lx0".into(), "left (null | Lx0 & head [+stress])".into());
    add("Rx0".into(), "null | head [+stress] & right Rx0".into());
    for k in 1..=n {
        add(format!("Lx{k}"), format!("left (Lx{k} & head [+stress] | Lx{} & head [-stress])", k - 1));
        add(format!("Rx{k}"), format!("head [+stress] & right Rx{k} | head [-stress] & right Rx{}", k - 1));
    }
    let bounds = (0..=n)
        .map(|i| {
            let terms: Vec<String> = (0..=i)
                .flat_map(|j| (0..=i - j).map(move |k| format!("Lx{j} & Rx{k}")))
                .collect();
            typed(&terms.join(" | "), fs, &defs)
        })
        .collect();
    (defs, bounds)
}

fn bounded_violations_equal_counting() -> Outcome {
    let cfg = common::config("stress.pho");
    let fs = &cfg.fs;
    let d = cfg.defaults["BeStressed"].with_scheme(OrderingScheme::ByFailureCount);
    let noclash = cfg.constraints["NoClash"].compile(fs, &cfg.defs).unwrap();
    let mut instances = 0;
    for n in 1..=10 {
        let (defs, bounds) = violation_bounds(fs, n);
        for p in common::patterns(n, 3) {
            let start = enumerate_candidates(&common::stress_form(fs, &p), fs, DEFAULT_CAP).unwrap();
            let filtered = start.with_words(start.words.iter().filter(|w| noclash.count_violations(w) == 0).cloned().collect());
            for set in [start, filtered] {
                if set.is_empty() {
                    continue;
                }
                let mut bounded = set.clone();
                for b in &bounds {
                    bounded = impose(&bounded, b, 0, fs, &defs).unwrap().0;
                }
                let counted = minimize_failures(&set, &d, fs, &cfg.defs).unwrap();
                ensure!(bounded == counted, "{p}: {:?} vs {:?}", rendered(fs, &bounded), rendered(fs, &counted));
                instances += 1;
            }
        }
    }
    Ok(format!("{instances} candidate sets agree"))
}

fn abstraction() -> Outcome {
    let cfg = common::config("turkish.pho");
    let fs = &cfg.fs;
    let plural = abstract_form(&cfg.allomorphs["plural"], fs);
    let possessive = abstract_form(&cfg.allomorphs["possessive"], fs);
    ensure!(fs.render_form(&plural) == "l [-round,-high] r", "plural {}", fs.render_form(&plural));
    ensure!(fs.render_form(&possessive) == "[+high] n [+high] z", "possessive {}", fs.render_form(&possessive));

    let val = |s: usize, f: &str| fs.segment(s).value(fs.feature_id(f).unwrap());
    let vowels = |w: &Word| w.0.iter().copied().filter(|&s| val(s, "cons") == Some(Sign::Minus)).collect::<Vec<_>>();
    let harmonic = |stem: &Word, suffix: &Word, features: &[&str]| {
        let last = *vowels(stem).last().unwrap();
        vowels(suffix).iter().all(|&v| features.iter().all(|f| val(v, f) == val(last, f)))
    };
    let theory = &cfg.theories["harmony"];
    let stems = ["at", "kız", "kol", "un", "ev", "iz", "öz", "kül"];
    for stem in stems {
        let stem = fs.parse_word(stem).unwrap();
        for (name, form, features) in [
            ("plural", &plural, &["front"][..]),
            ("possessive", &possessive, &["front", "round"][..]),
        ] {
            let expected: BTreeSet<Word> = cfg.allomorphs[name]
                .forms()
                .iter()
                .filter(|s| harmonic(&stem, s, features))
                .cloned()
                .collect();
            ensure!(expected.len() == 1, "oracle for {} {name}", fs.render_word(&stem));
            let got = recover(form, &stem, theory, fs, &cfg.defs, DEFAULT_CAP).unwrap();
            ensure!(got.words == expected, "{} {name}: {:?}", fs.render_word(&stem), rendered(fs, &got));
        }
    }
    Ok(format!("both abstractions exact; {} stems recover their allomorphs", stems.len()))
}

fn paradigm() -> Outcome {
    let cfg = common::config("paradigm.pho");
    let fs = &cfg.fs;
    let t = &cfg.paradigms["delta"];
    let (alpha, beta) = paradigm_margins(t, fs, DEFAULT_CAP).unwrap();
    let plain = paradigm_recover(&alpha, &beta);
    ensure!(matches!(plain, Err(MorphError::DisjointnessFailure { .. })), "margins alone: {plain:?}");
    let report = paradigm_default_recover(t, &cfg.defaults["Plus"], fs, &cfg.defs, DEFAULT_CAP).unwrap();
    ensure!(report.is_exact() && report.total() == 4, "default recovery {report:?}");
    Ok(format!("margins alone fail disjointness; default recovers {}/{} cells", report.recovered_count(), report.total()))
}

fn distinct_tables() -> Outcome {
    let mut tables = 0usize;
    for k in 1..=3 {
        let fs = common::alphabet(k);
        for len in 1..=2 {
            let words: Vec<Word> = all_words(&fs, len, DEFAULT_CAP).unwrap().words.into_iter().collect();
            let mut failure = None;
            common::for_each_distinct_table(&words, 2, 2, |t| {
                tables += 1;
                let (a, b) = paradigm_margins(&t, &fs, DEFAULT_CAP).unwrap();
                let ok = paradigm_recover(&a, &b).map(|r| RecoveryReport::compare(&t, r).is_exact());
                if ok != Ok(true) && failure.is_none() {
                    failure = Some(format!("{t:?}"));
                }
            });
            if let Some(f) = failure {
                return Err(f);
            }
        }
    }
    ensure!(tables > 1000, "only {tables} tables");
    Ok(format!("{tables} tables recovered exactly"))
}

fn theory_table() -> Outcome {
    let cfg = common::config("stress.pho");
    let d = &cfg.defaults["BeStressed"];
    let strict = vec![cfg.constraints["NoClash"].clone()];
    let all = [
        OrderingScheme::ByFeature,
        OrderingScheme::ByFailureCount,
        OrderingScheme::ByPosition { edge: Edge::Left, direction: Direction::Near },
        OrderingScheme::ByPosition { edge: Edge::Left, direction: Direction::Far },
        OrderingScheme::ByPosition { edge: Edge::Right, direction: Direction::Near },
        OrderingScheme::ByPosition { edge: Edge::Right, direction: Direction::Far },
    ];
    let mut checked = 0;
    for &s in &all {
        let ds = vec![d.with_scheme(s)];
        let ut = TheoryConfig::ut(BTreeSet::new(), strict.clone(), ds.clone(), std::slice::from_ref(&d.name)).is_ok();
        ensure!(ut == (s != OrderingScheme::ByFailureCount), "ut with {s}: {ut}");
        let ot = TheoryConfig::ot(ds.clone(), &[]).is_ok();
        ensure!(ot == (s == OrderingScheme::ByFailureCount), "ot with {s}: {ot}");
        let et = TheoryConfig::et(strict.clone(), &ds);
        ensure!(matches!(et, Err(TheoryError::DefaultsNotAllowed { .. })), "et with {s}: {et:?}");
        checked += 3;
    }
    let counted = vec![d.with_scheme(OrderingScheme::ByFailureCount)];
    ensure!(matches!(TheoryConfig::ot(counted.clone(), &strict), Err(TheoryError::StrictNotAllowed { .. })), "ot with strict");
    ensure!(matches!(TheoryConfig::ot(vec![], &[]), Err(TheoryError::EmptyRanking)), "ot without ranking");
    ensure!(TheoryConfig::et(strict, &[]).is_ok(), "et without defaults");
    Ok(format!("{} constructor/scheme combinations behave as tabulated", checked + 3))
}

fn properties() -> Outcome {
    let config = Config { cases: 1000, failure_persistence: None, ..Config::default() };
    let run = |name: &str, result: Result<(), String>| result.map_err(|e| format!("{name}: {e}"));
    let fs = common::small_fs();
    let stress = common::config("stress.pho");
    run(
        "functor distribution",
        TestRunner::new(config.clone())
            .run(&(common::position_pred(), common::position_pred(), common::small_word()), |(p, q, w)| {
                props::functor_distribution(&fs, &p, &q, &w)
            })
            .map_err(|e| e.to_string()),
    )?;
    run(
        "De Morgan",
        TestRunner::new(config.clone())
            .run(&(common::position_pred(), common::position_pred(), common::small_word()), |(p, q, w)| {
                props::de_morgan(&fs, &p, &q, &w)
            })
            .map_err(|e| e.to_string()),
    )?;
    run(
        "unify laws",
        TestRunner::new(config.clone())
            .run(&(common::spec_over(4), common::spec_over(4), common::spec_over(4)), |(a, b, c)| {
                props::unify_laws(&a, &b, &c)
            })
            .map_err(|e| e.to_string()),
    )?;
    run(
        "derivation monotone and idempotent",
        TestRunner::new(config)
            .run(
                &(common::stress_pattern(), prop::collection::vec(0usize..props::SCHEMES.len(), 1..3)),
                |(p, s)| props::derivation_monotone_idempotent(&stress, &p, &s),
            )
            .map_err(|e| e.to_string()),
    )?;
    Ok("4 properties x 1000 cases, no failures".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("toy world contradiction and tautology", toy_world),
        ("Turkish harmony and Left fixpoint", turkish_harmony),
        ("failure-count stress", counting_stress),
        ("positional vs counting", positional_vs_counting),
        ("bounded violations equal failure counting", bounded_violations_equal_counting),
        ("allomorph abstraction and recovery", abstraction),
        ("paradigm recovery with a default", paradigm),
        ("distinct-cell tables recover from margins", distinct_tables),
        ("theory constructor table", theory_table),
        ("algebraic properties", properties),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}; {secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({detail}; {secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
