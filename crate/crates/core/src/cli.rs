//! Command-line front end.
//!
//! Exit codes: 0 success, 1 linguistic failure (violation, contradiction,
//! unrecovered cells), 2 usage or reference error, 3 resource cap.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{load_config, EngineConfig};
use crate::defaults::{Default, DerivationTrace, EngineError, OrderingScheme};
use crate::features::{enumerate_candidates, CandidateSet, Word, DEFAULT_CAP};
use crate::interp::{Denotation, Program};
use crate::morphology::{abstract_form, paradigm_default_recover, paradigm_margins, paradigm_recover, recover, MorphError, RecoveryReport};
use crate::predicate::{parse, typecheck, ModelSignature};
use crate::theories::{TheoryConfig, TheoryError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "pho", about = "Feature logic, defaults and paradigms over segment strings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a constraint, definition or predicate on a word.
    Eval {
        /// Engine config file
        config: PathBuf,
        /// Word as a string of segment names
        word: String,
        /// Constraint name, definition name or predicate text
        predicate: String,
        /// Print JSON
        #[arg(long)]
        json: bool,
    },
    /// Derive the surface candidates of lexicon entries.
    Derive {
        /// Engine config file
        config: PathBuf,
        /// Lexicon entry
        entry: Option<String>,
        /// Theory section to derive under
        #[arg(long)]
        theory: Option<String>,
        /// Print one line per default imposition
        #[arg(long)]
        trace: bool,
        /// Largest candidate set to enumerate
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        /// Print JSON
        #[arg(long)]
        json: bool,
        /// Derive every lexicon entry
        #[arg(long)]
        all_lexicon: bool,
    },
    /// Intersect an allomorph set and optionally recover it after stems.
    Abstract {
        /// Engine config file
        config: PathBuf,
        /// Allomorph set name
        allomorphs: String,
        /// Stem to recover the allomorph after (repeatable)
        #[arg(long = "stem")]
        stems: Vec<String>,
        /// Theory section used for recovery
        #[arg(long)]
        theory: Option<String>,
        /// Largest candidate set to enumerate
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        /// Print JSON
        #[arg(long)]
        json: bool,
    },
    /// Decompose a paradigm into row and column morphemes and rebuild it.
    Paradigm {
        /// Engine config file
        config: PathBuf,
        /// Paradigm block name
        paradigm: String,
        /// Default name or feature literal such as `+d`
        #[arg(long)]
        default: Option<String>,
        /// Largest candidate set to enumerate
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        /// Print JSON
        #[arg(long)]
        json: bool,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn engine_failure(e: &EngineError) -> Failure {
    let code = match e {
        EngineError::Enumerate(crate::features::EnumerateError::CapExceeded { .. }) => EXIT_CAP,
        EngineError::StrictContradiction { .. } => EXIT_FAILURE,
        EngineError::Enumerate(_) => EXIT_FAILURE,
        _ => EXIT_USAGE,
    };
    Failure { code, message: e.to_string() }
}

fn theory_failure(e: &TheoryError) -> Failure {
    match e {
        TheoryError::Engine(inner) => engine_failure(inner),
        other => usage(other.to_string()),
    }
}

fn morph_failure(e: &MorphError) -> Failure {
    match e {
        MorphError::DisjointnessFailure { .. } | MorphError::MarginClash { .. } => {
            Failure { code: EXIT_FAILURE, message: e.to_string() }
        }
        MorphError::Enumerate(inner) => engine_failure(&EngineError::Enumerate(inner.clone())),
        MorphError::Engine(inner) => engine_failure(inner),
        MorphError::Theory(inner) => theory_failure(inner),
        other => usage(other.to_string()),
    }
}

fn load(path: &PathBuf) -> Result<EngineConfig, Failure> {
    load_config(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn theory<'a>(cfg: &'a EngineConfig, name: Option<&str>) -> Result<Option<&'a TheoryConfig>, Failure> {
    name.map(|n| cfg.theories.get(n).ok_or_else(|| usage(format!("unknown theory `{n}`"))))
        .transpose()
}

fn json_line<T: Serialize>(out: &mut dyn Write, value: &T) -> std::io::Result<()> {
    writeln!(out, "{}", serde_json::to_string(value).expect("serializable"))
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(err, "{e}");
            } else {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Eval { config, word, predicate, json } => eval(&config, &word, &predicate, json, out),
        Command::Derive { config, entry, theory, trace, cap, json, all_lexicon } => {
            derive(&config, entry.as_deref(), theory.as_deref(), trace, cap, json, all_lexicon, out)
        }
        Command::Abstract { config, allomorphs, stems, theory, cap, json } => {
            abstract_cmd(&config, &allomorphs, &stems, theory.as_deref(), cap, json, out)
        }
        Command::Paradigm { config, paradigm, default, cap, json } => {
            paradigm_cmd(&config, &paradigm, default.as_deref(), cap, json, out)
        }
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[derive(Serialize)]
struct Point {
    position: usize,
    segment: String,
}

fn eval(path: &PathBuf, word: &str, predicate: &str, json: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = load(path)?;
    let fs = &cfg.fs;
    let w = fs.parse_word(word).map_err(|e| usage(e.to_string()))?;
    let seg = |i: usize| fs.segment(w.0[i]).name.clone();
    let io = |e: std::io::Error| usage(e.to_string());

    if let Some(c) = cfg.constraints.get(predicate) {
        let compiled = c.compile(fs, &cfg.defs).map_err(|e| usage(e.to_string()))?;
        let violations: Vec<Point> = compiled
            .violations(&w)
            .positions()
            .map(|i| Point { position: i, segment: seg(i) })
            .collect();
        if json {
            #[derive(Serialize)]
            struct Report<'a> {
                constraint: &'a str,
                ok: bool,
                violations: &'a [Point],
            }
            json_line(out, &Report { constraint: predicate, ok: violations.is_empty(), violations: &violations })
                .map_err(io)?;
        } else if violations.is_empty() {
            writeln!(out, "ok").map_err(io)?;
        } else {
            for v in &violations {
                writeln!(out, "{}\t{}", v.position, v.segment).map_err(io)?;
            }
        }
        return Ok(if violations.is_empty() { EXIT_OK } else { EXIT_FAILURE });
    }

    let ast = parse(predicate, fs).map_err(|e| usage(format!("unknown predicate `{predicate}`: {e}")))?;
    let typed = typecheck(&ast, &ModelSignature::strings(), &cfg.defs, fs)
        .map_err(|e| usage(format!("unknown predicate `{predicate}`: {e}")))?;
    let prog = Program::compile(&typed, fs, &cfg.defs).map_err(|e| usage(e.to_string()))?;
    match prog.denotation(&w) {
        Denotation::Segments(segs) => {
            let names: Vec<&str> = segs.iter().map(|&s| fs.segment(s).name.as_str()).collect();
            if json {
                json_line(out, &serde_json::json!({ "world": typed.world, "segments": names })).map_err(io)?;
            } else {
                for n in names {
                    writeln!(out, "{n}").map_err(io)?;
                }
            }
        }
        Denotation::Points(points) => {
            let listed: Vec<Point> = points.positions().map(|i| Point { position: i, segment: seg(i) }).collect();
            if json {
                json_line(
                    out,
                    &serde_json::json!({ "world": typed.world, "positions": listed, "null": points.contains_null() }),
                )
                .map_err(io)?;
            } else {
                for p in &listed {
                    writeln!(out, "{}\t{}", p.position, p.segment).map_err(io)?;
                }
                if points.contains_null() {
                    writeln!(out, "null").map_err(io)?;
                }
            }
        }
    }
    Ok(EXIT_OK)
}

fn derive_one(
    cfg: &EngineConfig,
    entry: &str,
    theory: Option<&TheoryConfig>,
    cap: u64,
) -> Result<(CandidateSet, DerivationTrace), Failure> {
    let form = cfg.form_for(entry, theory).map_err(|e| usage(e.to_string()))?;
    match theory {
        Some(t) => t.derive(&form, &cfg.fs, &cfg.defs, cap).map_err(|e| theory_failure(&e)),
        None => enumerate_candidates(&form, &cfg.fs, cap)
            .map(|s| (s, DerivationTrace::default()))
            .map_err(|e| engine_failure(&e.into())),
    }
}

#[derive(Serialize)]
struct Derivation<'a> {
    entry: &'a str,
    theory: Option<&'a str>,
    words: Vec<String>,
    #[serde(flatten)]
    trace: DerivationTrace,
}

#[allow(clippy::too_many_arguments)]
fn derive(
    path: &PathBuf,
    entry: Option<&str>,
    theory_name: Option<&str>,
    trace: bool,
    cap: u64,
    json: bool,
    all: bool,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let cfg = load(path)?;
    let t = theory(&cfg, theory_name)?;
    let entries: Vec<String> = match (entry, all) {
        (Some(e), false) => vec![e.to_string()],
        (None, true) => cfg.lexicon_src.keys().cloned().collect(),
        _ => return Err(usage("give either one lexicon entry or --all-lexicon")),
    };
    let io = |e: std::io::Error| usage(e.to_string());
    let mut worst = EXIT_OK;
    for e in &entries {
        let (set, tr) = match derive_one(&cfg, e, t, cap) {
            Ok(r) => r,
            Err(f) if all && f.code != EXIT_USAGE => {
                writeln!(out, "{e}\t!{}", f.message).map_err(io)?;
                worst = worst.max(f.code);
                continue;
            }
            Err(f) => return Err(f),
        };
        let words = set.rendered(&cfg.fs);
        if json {
            let trace = if trace { tr } else { DerivationTrace::default() };
            json_line(out, &Derivation { entry: e, theory: theory_name, words, trace }).map_err(io)?;
            continue;
        }
        for w in &words {
            if all {
                writeln!(out, "{e}\t{w}").map_err(io)?;
            } else {
                writeln!(out, "{w}").map_err(io)?;
            }
        }
        if trace {
            for l in tr.lines() {
                writeln!(out, "{l}").map_err(io)?;
            }
        }
    }
    Ok(worst)
}

fn abstract_cmd(
    path: &PathBuf,
    name: &str,
    stems: &[String],
    theory_name: Option<&str>,
    cap: u64,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let cfg = load(path)?;
    let fs = &cfg.fs;
    let set = cfg
        .allomorphs
        .get(name)
        .ok_or_else(|| usage(format!("unknown allomorph set `{name}`")))?;
    let form = abstract_form(set, fs);
    let io = |e: std::io::Error| usage(e.to_string());
    let t = match (theory(&cfg, theory_name)?, stems.is_empty()) {
        (Some(t), _) => Some(t),
        (None, true) => None,
        (None, false) => return Err(usage("--stem needs --theory")),
    };
    let mut recovered = Vec::new();
    for s in stems {
        let stem = fs.parse_word(s).map_err(|e| usage(e.to_string()))?;
        let got = recover(&form, &stem, t.expect("checked"), fs, &cfg.defs, cap).map_err(|e| morph_failure(&e))?;
        recovered.push((s.clone(), got.rendered(fs)));
    }
    if json {
        json_line(
            out,
            &serde_json::json!({
                "allomorphs": name,
                "abstract": fs.render_form(&form),
                "spec_size": form.spec_size(),
                "recovered": recovered.iter().map(|(s, w)| serde_json::json!({"stem": s, "words": w})).collect::<Vec<_>>(),
            }),
        )
        .map_err(io)?;
    } else {
        writeln!(out, "{}", fs.render_form(&form)).map_err(io)?;
        for (s, w) in &recovered {
            writeln!(out, "{s}\t{}", w.join(",")).map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}

fn render_cell(cfg: &EngineConfig, cell: &std::collections::BTreeSet<Word>) -> String {
    let mut names: Vec<String> = cell.iter().map(|w| cfg.fs.render_word(w)).collect();
    names.sort();
    match names.len() {
        1 => names.remove(0),
        _ => format!("{{{}}}", names.join(",")),
    }
}

fn paradigm_cmd(
    path: &PathBuf,
    name: &str,
    default: Option<&str>,
    cap: u64,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let cfg = load(path)?;
    let table = cfg
        .paradigms
        .get(name)
        .ok_or_else(|| usage(format!("unknown paradigm `{name}`")))?;
    let report = match default {
        Some(d) => {
            let d = named_or_literal_default(&cfg, d)?;
            paradigm_default_recover(table, &d, &cfg.fs, &cfg.defs, cap).map_err(|e| morph_failure(&e))?
        }
        None => {
            let (alpha, beta) = paradigm_margins(table, &cfg.fs, cap).map_err(|e| morph_failure(&e))?;
            let rebuilt = paradigm_recover(&alpha, &beta).map_err(|e| morph_failure(&e))?;
            RecoveryReport::compare(table, rebuilt)
        }
    };
    let io = |e: std::io::Error| usage(e.to_string());
    if json {
        let cells: Vec<serde_json::Value> = report
            .exact
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                let report = &report;
                let cfg = &cfg;
                row.iter().enumerate().map(move |(j, ok)| {
                    serde_json::json!({
                        "row": i + 1,
                        "column": j + 1,
                        "recovered": ok,
                        "cell": render_cell(cfg, &report.recovered.cells[i][j]),
                    })
                })
            })
            .collect();
        json_line(
            out,
            &serde_json::json!({ "paradigm": name, "cells": cells, "recovered": report.recovered_count(), "total": report.total() }),
        )
        .map_err(io)?;
    } else {
        for (i, row) in report.exact.iter().enumerate() {
            for (j, ok) in row.iter().enumerate() {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    i + 1,
                    j + 1,
                    if *ok { "recovered" } else { "failed" },
                    render_cell(&cfg, &report.recovered.cells[i][j])
                )
                .map_err(io)?;
            }
        }
        writeln!(out, "{}/{} cells recovered", report.recovered_count(), report.total()).map_err(io)?;
    }
    Ok(if report.is_exact() { EXIT_OK } else { EXIT_FAILURE })
}

/// A declared default, or a feature literal such as `+d` imposed as one.
fn named_or_literal_default(cfg: &EngineConfig, text: &str) -> Result<Default, Failure> {
    if let Some(d) = cfg.defaults.get(text) {
        return Ok(d.clone());
    }
    let unknown = || usage(format!("unknown default `{text}`"));
    let ast = parse(&format!("[{text}]"), &cfg.fs).map_err(|_| unknown())?;
    let typed = typecheck(&ast, &ModelSignature::strings(), &cfg.defs, &cfg.fs).map_err(|_| unknown())?;
    Ok(Default::new(text, typed, None, OrderingScheme::ByFeature))
}
