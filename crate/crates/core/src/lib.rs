//! Binary feature systems, a modal predicate language over segment strings,
//! ordered defaults over candidate sets, and morpheme abstraction.

pub mod cli;
pub mod config;
pub mod defaults;
pub mod features;
pub mod interp;
pub mod morphology;
pub mod predicate;
pub mod theories;

pub use config::{load_config, parse_config, EngineConfig};
pub use defaults::{derive, impose, minimize_failures, directional_sweep, Default, DerivationTrace, OrderingScheme};
pub use features::{CandidateSet, FeatureSystem, LexicalForm, PartialSpec, Sign, Word};
pub use interp::{count_violations, denotation, satisfies, Constraint, Verdict};
pub use predicate::{parse, typecheck, Pred, TypedPredicate, World};
