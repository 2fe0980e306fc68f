//! Property bodies, shared by the proptest target and the acceptance run.

use std::collections::BTreeSet;

use pho::defaults::{apply_schedule, Default, Direction, Edge, OrderingScheme, Outcome};
use pho::features::{enumerate_candidates, FeatureSystem, PartialSpec, Word, DEFAULT_CAP};
use pho::interp::{PointSet, Program};
use pho::predicate::{parse, Definitions, ModelSignature, Pred};
use pho::EngineConfig;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

fn points(fs: &FeatureSystem, p: &Pred, w: &Word) -> PointSet {
    Program::from_ast(p, fs, &Definitions::new())
        .expect("generated predicates typecheck")
        .points_in(w)
}

fn positions(s: &PointSet) -> Vec<usize> {
    s.positions().collect()
}

pub fn functor_distribution(fs: &FeatureSystem, p: &Pred, q: &Pred, w: &Word) -> Result<(), TestCaseError> {
    for f in [Pred::left as fn(Pred) -> Pred, Pred::right] {
        let lhs = points(fs, &f(Pred::and(p.clone(), q.clone())), w);
        let rhs = points(fs, &f(p.clone()), w).intersect(&points(fs, &f(q.clone()), w));
        prop_assert_eq!(lhs, rhs);
        let lhs = points(fs, &f(Pred::or(p.clone(), q.clone())), w);
        let rhs = points(fs, &f(p.clone()), w).union(&points(fs, &f(q.clone()), w));
        prop_assert_eq!(lhs, rhs);
    }
    Ok(())
}

/// On positions De Morgan always holds; at the null point it holds when
/// both sides are interpreted in the same world.
pub fn de_morgan(fs: &FeatureSystem, p: &Pred, q: &Pred, w: &Word) -> Result<(), TestCaseError> {
    let not_and = points(fs, &Pred::not(Pred::and(p.clone(), q.clone())), w);
    let or_not = points(fs, &Pred::or(Pred::not(p.clone()), Pred::not(q.clone())), w);
    prop_assert_eq!(positions(&not_and), positions(&or_not));
    let not_or = points(fs, &Pred::not(Pred::or(p.clone(), q.clone())), w);
    let and_not = points(fs, &Pred::and(Pred::not(p.clone()), Pred::not(q.clone())), w);
    prop_assert_eq!(positions(&not_or), positions(&and_not));
    let world = |x: &Pred| pho::typecheck(x, &ModelSignature::strings(), &Definitions::new(), fs).unwrap().world;
    if world(p) == world(q) {
        prop_assert_eq!(not_and, or_not);
        prop_assert_eq!(not_or, and_not);
    }
    Ok(())
}

pub fn double_negation(fs: &FeatureSystem, p: &Pred, w: &Word) -> Result<(), TestCaseError> {
    prop_assert_eq!(points(fs, &Pred::not(Pred::not(p.clone())), w), points(fs, p, w));
    Ok(())
}

pub fn unify_laws(a: &PartialSpec, b: &PartialSpec, c: &PartialSpec) -> Result<(), TestCaseError> {
    let e = PartialSpec::new();
    prop_assert_eq!(a.unify(&e).unwrap(), a.clone());
    prop_assert_eq!(e.unify(a).unwrap(), a.clone());
    prop_assert_eq!(a.unify(a).unwrap(), a.clone());
    prop_assert_eq!(a.unify(b).is_ok(), b.unify(a).is_ok());
    if let (Ok(x), Ok(y)) = (a.unify(b), b.unify(a)) {
        prop_assert_eq!(x, y);
    }
    let left = a.unify(b).and_then(|ab| ab.unify(c));
    let right = b.unify(c).and_then(|bc| a.unify(&bc));
    prop_assert_eq!(left.is_ok(), right.is_ok());
    if let (Ok(l), Ok(r)) = (left, right) {
        prop_assert!(a.subsumes(&l) && b.subsumes(&l) && c.subsumes(&l));
        prop_assert_eq!(l, r);
    }
    Ok(())
}

pub const SCHEMES: [OrderingScheme; 6] = [
    OrderingScheme::ByFeature,
    OrderingScheme::ByFailureCount,
    OrderingScheme::ByPosition { edge: Edge::Left, direction: Direction::Near },
    OrderingScheme::ByPosition { edge: Edge::Left, direction: Direction::Far },
    OrderingScheme::ByPosition { edge: Edge::Right, direction: Direction::Near },
    OrderingScheme::ByPosition { edge: Edge::Right, direction: Direction::Far },
];

/// Candidate sets only shrink, never empty out, and a second pass changes
/// nothing.
pub fn derivation_monotone_idempotent(
    cfg: &EngineConfig,
    pattern: &str,
    schemes: &[usize],
) -> Result<(), TestCaseError> {
    let fs = &cfg.fs;
    let form = super::stress_form(fs, pattern);
    let start = enumerate_candidates(&form, fs, DEFAULT_CAP).unwrap();
    let strict = [cfg.constraints["NoClash"].clone()];
    if !start.words.iter().any(|w| cfg.constraints["NoClash"].compile(fs, &cfg.defs).unwrap().count_violations(w) == 0) {
        return Ok(());
    }
    let scheduled: Vec<Default> = schemes
        .iter()
        .map(|&s| cfg.defaults["BeStressed"].with_scheme(SCHEMES[s]))
        .chain(schemes.first().map(|&s| {
            Default::from_constraint(&cfg.constraints["NoClash"], SCHEMES[(s + 1) % SCHEMES.len()])
        }))
        .collect();
    let (out, trace) = apply_schedule(&start, &strict, &scheduled, fs, &cfg.defs).unwrap();
    let mut previous = None;
    for step in &trace.steps {
        prop_assert!(step.after <= step.before);
        prop_assert!(step.after > 0);
        if step.outcome == Outcome::Skipped {
            prop_assert_eq!(step.after, step.before);
        }
        if let Some(p) = previous {
            prop_assert_eq!(step.before, p);
        }
        previous = Some(step.after);
    }
    prop_assert!(out.words.is_subset(&start.words));
    let (again, _) = apply_schedule(&out, &strict, &scheduled, fs, &cfg.defs).unwrap();
    prop_assert_eq!(again.words, out.words);
    Ok(())
}

pub fn print_parse_roundtrip(fs: &FeatureSystem, p: &Pred) -> Result<(), TestCaseError> {
    let text = p.to_string();
    let back = parse(&text, fs).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
    prop_assert_eq!(&back, p);
    Ok(())
}

/// Every feature value shared by all forms at a slot survives abstraction.
pub fn abstraction_is_greatest(fs: &FeatureSystem, words: &[Word]) -> Result<(), TestCaseError> {
    let set = pho::morphology::AllomorphSet::new(words.to_vec()).unwrap();
    let form = pho::morphology::abstract_form(&set, fs);
    for w in words {
        prop_assert!(form.admits(fs, w));
    }
    for (i, slot) in form.slots.iter().enumerate() {
        for f in 0..fs.features().len() {
            let shared: BTreeSet<_> = words.iter().map(|w| fs.segment(w.0[i]).value(f)).collect();
            prop_assert_eq!(slot.get(f).is_some(), shared.len() == 1);
        }
    }
    Ok(())
}
