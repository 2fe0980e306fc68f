//! Model-theoretic evaluation over pointed strings.
//!
//! A word of length `n` is read as a model with positions `0..n` (the
//! non-null string instances) and a single shared null point. `left(i)` is
//! `i - 1`, or null at the first position; `right(i)` is `i + 1`, or null at
//! the last. Functors are interpreted by inverse image, connectives by set
//! operations, negation by complement within the operand's own world, and
//! named definitions by least fixpoints computed bottom-up per stratum.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use smallvec::{smallvec, SmallVec};

use crate::features::{FeatureSystem, SegmentId, Word};
use crate::predicate::strata::components;
use crate::predicate::typing::elaborate;
use crate::predicate::{
    infer_def_worlds, typecheck, Definitions, ModelSignature, Pred, TypeError, TypedPredicate, World,
};

/// A set of points of one pointed-string model: positions plus, possibly,
/// the null point.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    len: usize,
    bits: SmallVec<[u64; 2]>,
    null: bool,
}

impl PointSet {
    pub fn empty(len: usize) -> Self {
        PointSet {
            len,
            bits: smallvec![0; len.div_ceil(64).max(1)],
            null: false,
        }
    }

    pub fn all_positions(len: usize) -> Self {
        let mut s = Self::empty(len);
        for b in s.bits.iter_mut() {
            *b = u64::MAX;
        }
        s.trim();
        s
    }

    pub fn only_null(len: usize) -> Self {
        let mut s = Self::empty(len);
        s.null = true;
        s
    }

    pub fn from_positions<I: IntoIterator<Item = usize>>(len: usize, positions: I) -> Self {
        let mut s = Self::empty(len);
        for p in positions {
            s.insert(p);
        }
        s
    }

    fn trim(&mut self) {
        let full = self.len / 64;
        let rem = self.len % 64;
        for (i, b) in self.bits.iter_mut().enumerate() {
            if i > full || (i == full && rem == 0) {
                *b = 0;
            } else if i == full {
                *b &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn word_len(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, pos: usize) {
        assert!(pos < self.len, "position {pos} out of range for length {}", self.len);
        self.bits[pos / 64] |= 1 << (pos % 64);
    }

    pub fn contains(&self, pos: usize) -> bool {
        pos < self.len && self.bits[pos / 64] & (1 << (pos % 64)) != 0
    }

    pub fn contains_null(&self) -> bool {
        self.null
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&p| self.contains(p))
    }

    pub fn count_positions(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn intersect(&self, other: &PointSet) -> PointSet {
        let mut out = self.clone();
        for (a, b) in out.bits.iter_mut().zip(&other.bits) {
            *a &= *b;
        }
        out.null &= other.null;
        out
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut out = self.clone();
        for (a, b) in out.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
        out.null |= other.null;
        out
    }

    /// Positions of `self` not in `other`; the null point is dropped.
    pub fn positions_minus(&self, other: &PointSet) -> PointSet {
        let mut out = self.clone();
        for (a, b) in out.bits.iter_mut().zip(&other.bits) {
            *a &= !*b;
        }
        out.null = false;
        out
    }

    /// Complement within `world`: the null point is only flipped in the
    /// string world.
    pub fn complement(&self, world: World) -> PointSet {
        let mut out = self.clone();
        for b in out.bits.iter_mut() {
            *b = !*b;
        }
        out.trim();
        out.null = world == World::String && !self.null;
        out
    }

    /// `{ i : left(i) ∈ self }`.
    pub fn left_preimage(&self) -> PointSet {
        let mut out = PointSet::empty(self.len);
        let mut carry = self.null as u64;
        for (o, b) in out.bits.iter_mut().zip(&self.bits) {
            *o = (b << 1) | carry;
            carry = b >> 63;
        }
        out.trim();
        out
    }

    /// `{ i : right(i) ∈ self }`.
    pub fn right_preimage(&self) -> PointSet {
        let mut out = PointSet::empty(self.len);
        let n = self.bits.len();
        for i in 0..n {
            let next = if i + 1 < n { self.bits[i + 1] & 1 } else { 0 };
            out.bits[i] = (self.bits[i] >> 1) | (next << 63);
        }
        out.trim();
        if self.null && self.len > 0 {
            out.insert(self.len - 1);
        }
        out
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut l = f.debug_set();
        l.entries(self.positions());
        if self.null {
            l.entry(&"null");
        }
        l.finish()
    }
}

/// The interpretation of a predicate in one word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Denotation {
    /// Alphabet predicates denote segments, independently of the word.
    Segments(BTreeSet<SegmentId>),
    Points(PointSet),
}

impl Denotation {
    pub fn points(&self) -> Option<&PointSet> {
        match self {
            Denotation::Points(p) => Some(p),
            Denotation::Segments(_) => None,
        }
    }

    pub fn segments(&self) -> Option<&BTreeSet<SegmentId>> {
        match self {
            Denotation::Segments(s) => Some(s),
            Denotation::Points(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Null,
    /// Positions whose segment is in the table.
    Head(Vec<bool>),
    Not(usize, World),
    And(usize, usize),
    Or(usize, usize),
    Left(usize),
    Right(usize),
    Def(usize),
}

#[derive(Clone, Debug)]
enum Root {
    Segments(BTreeSet<SegmentId>),
    Node(usize),
}

#[derive(Clone, Debug)]
struct Stratum {
    members: Vec<usize>,
    recursive: bool,
}

/// A typed predicate compiled against one feature system and definition
/// table, ready to be evaluated on many words.
#[derive(Clone, Debug)]
pub struct Program {
    nodes: Vec<Node>,
    root: Root,
    def_bodies: Vec<usize>,
    strata: Vec<Stratum>,
}

struct Compiler<'a> {
    fs: &'a FeatureSystem,
    defs: &'a Definitions,
    worlds: BTreeMap<String, World>,
    nodes: Vec<Node>,
    def_index: HashMap<String, usize>,
    def_bodies: Vec<Option<usize>>,
    alphabet_defs: HashMap<String, BTreeSet<SegmentId>>,
}

impl Compiler<'_> {
    fn push(&mut self, n: Node) -> usize {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    fn position_node(&mut self, p: &Pred) -> Result<usize, TypeError> {
        Ok(match p {
            Pred::Null => self.push(Node::Null),
            Pred::Head(q) => {
                let segs = self.segments(q)?;
                let table = (0..self.fs.segments().len()).map(|s| segs.contains(&s)).collect();
                self.push(Node::Head(table))
            }
            Pred::Not(q) => {
                let world = self.world_of(q)?;
                let c = self.position_node(q)?;
                self.push(Node::Not(c, world))
            }
            Pred::And(a, b) => {
                let (a, b) = (self.position_node(a)?, self.position_node(b)?);
                self.push(Node::And(a, b))
            }
            Pred::Or(a, b) => {
                let (a, b) = (self.position_node(a)?, self.position_node(b)?);
                self.push(Node::Or(a, b))
            }
            Pred::Left(q) => {
                let c = self.position_node(q)?;
                self.push(Node::Left(c))
            }
            Pred::Right(q) => {
                let c = self.position_node(q)?;
                self.push(Node::Right(c))
            }
            Pred::Def(d) => {
                let idx = self.position_def(d)?;
                self.push(Node::Def(idx))
            }
            // elaboration wraps every alphabet leaf in a position context in `head`
            other => unreachable!("alphabet leaf `{other}` in position context"),
        })
    }

    fn world_of(&self, p: &Pred) -> Result<World, TypeError> {
        Ok(elaborate(p, &ModelSignature, &self.worlds, self.fs)?.1)
    }

    fn position_def(&mut self, name: &str) -> Result<usize, TypeError> {
        if let Some(&i) = self.def_index.get(name) {
            return Ok(i);
        }
        let idx = self.def_bodies.len();
        self.def_index.insert(name.to_string(), idx);
        self.def_bodies.push(None);
        let body = self
            .defs
            .get(name)
            .ok_or_else(|| TypeError::Unresolved(name.to_string()))?;
        let (body, _) = elaborate(body, &ModelSignature, &self.worlds, self.fs)?;
        let node = self.position_node(&body)?;
        self.def_bodies[idx] = Some(node);
        Ok(idx)
    }

    /// Denotation of an alphabet predicate.
    fn segments(&mut self, p: &Pred) -> Result<BTreeSet<SegmentId>, TypeError> {
        let fs = self.fs;
        Ok(match p {
            Pred::Feat { feature, sign } => {
                let f = fs
                    .feature_id(feature)
                    .ok_or_else(|| TypeError::UnknownFeature(feature.clone()))?;
                (0..fs.segments().len())
                    .filter(|&s| fs.segment(s).value(f) == Some(*sign))
                    .collect()
            }
            Pred::Seg(s) => {
                let id = fs.segment_id(s).ok_or_else(|| TypeError::UnknownSegment(s.clone()))?;
                BTreeSet::from([id])
            }
            Pred::Class(c) => {
                let spec = fs.class(c).ok_or_else(|| TypeError::Unresolved(c.clone()))?;
                fs.compatible_segments(spec).into_iter().collect()
            }
            Pred::Not(q) => {
                let inner = self.segments(q)?;
                (0..fs.segments().len()).filter(|s| !inner.contains(s)).collect()
            }
            Pred::And(a, b) => {
                let a = self.segments(a)?;
                a.intersection(&self.segments(b)?).copied().collect()
            }
            Pred::Or(a, b) => {
                let a = self.segments(a)?;
                a.union(&self.segments(b)?).copied().collect()
            }
            Pred::Def(d) => self.alphabet_def(d)?,
            other => unreachable!("position term `{other}` in alphabet context"),
        })
    }

    /// Alphabet-world definitions, solved by iteration from the empty set
    /// stratum by stratum.
    fn alphabet_def(&mut self, name: &str) -> Result<BTreeSet<SegmentId>, TypeError> {
        if let Some(s) = self.alphabet_defs.get(name) {
            return Ok(s.clone());
        }
        let names: Vec<String> = self
            .worlds
            .iter()
            .filter(|(_, w)| **w == World::Alphabet)
            .map(|(n, _)| n.clone())
            .collect();
        let index: HashMap<&str, usize> =
            names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let edges: Vec<Vec<usize>> = names
            .iter()
            .map(|n| {
                crate::predicate::def_references(self.defs.get(n).expect("typed"))
                    .into_iter()
                    .filter_map(|(d, _)| index.get(d.as_str()).copied())
                    .collect()
            })
            .collect();
        for (members, _) in components(&edges) {
            for &m in &members {
                self.alphabet_defs.insert(names[m].clone(), BTreeSet::new());
            }
            loop {
                let mut changed = false;
                for &m in &members {
                    let body = self.defs.get(&names[m]).expect("typed").clone();
                    let value = self.segments(&body)?;
                    if self.alphabet_defs[&names[m]] != value {
                        self.alphabet_defs.insert(names[m].clone(), value);
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        self.alphabet_defs
            .get(name)
            .cloned()
            .ok_or_else(|| TypeError::Unresolved(name.to_string()))
    }
}

impl Program {
    pub fn compile(
        pred: &TypedPredicate,
        fs: &FeatureSystem,
        defs: &Definitions,
    ) -> Result<Program, TypeError> {
        let worlds = infer_def_worlds(defs, &ModelSignature, fs)?;
        let mut c = Compiler {
            fs,
            defs,
            worlds,
            nodes: Vec::new(),
            def_index: HashMap::new(),
            def_bodies: Vec::new(),
            alphabet_defs: HashMap::new(),
        };
        let root = match pred.world {
            World::Alphabet => Root::Segments(c.segments(&pred.ast)?),
            _ => Root::Node(c.position_node(&pred.ast)?),
        };
        let def_bodies: Vec<usize> = c.def_bodies.into_iter().map(|b| b.expect("compiled")).collect();
        let mut edges = vec![Vec::new(); def_bodies.len()];
        for (d, &body) in def_bodies.iter().enumerate() {
            collect_defs(&c.nodes, body, &mut edges[d]);
        }
        let strata = components(&edges)
            .into_iter()
            .map(|(members, recursive)| Stratum { members, recursive })
            .collect();
        Ok(Program {
            nodes: c.nodes,
            root,
            def_bodies,
            strata,
        })
    }

    /// Parses nothing; typechecks `ast` and compiles it.
    pub fn from_ast(ast: &Pred, fs: &FeatureSystem, defs: &Definitions) -> Result<Program, TypeError> {
        let typed = typecheck(ast, &ModelSignature, defs, fs)?;
        Program::compile(&typed, fs, defs)
    }

    pub fn denotation(&self, word: &Word) -> Denotation {
        match &self.root {
            Root::Segments(s) => Denotation::Segments(s.clone()),
            Root::Node(n) => Denotation::Points(self.points(word, *n)),
        }
    }

    /// Points satisfying the predicate; alphabet predicates are read
    /// through `head`.
    pub fn points_in(&self, word: &Word) -> PointSet {
        match &self.root {
            Root::Segments(s) => PointSet::from_positions(
                word.len(),
                word.segments()
                    .iter()
                    .enumerate()
                    .filter(|(_, seg)| s.contains(seg))
                    .map(|(i, _)| i),
            ),
            Root::Node(n) => self.points(word, *n),
        }
    }

    fn points(&self, word: &Word, root: usize) -> PointSet {
        let mut defs = vec![PointSet::empty(word.len()); self.def_bodies.len()];
        for stratum in &self.strata {
            if !stratum.recursive {
                let d = stratum.members[0];
                defs[d] = self.eval(word.segments(), self.def_bodies[d], &defs);
                continue;
            }
            // Kleene iteration from the empty set; terminates because the
            // stratum is negation-free in its own members.
            loop {
                let mut changed = false;
                for &d in &stratum.members {
                    let next = self.eval(word.segments(), self.def_bodies[d], &defs);
                    if next != defs[d] {
                        defs[d] = next;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        self.eval(word.segments(), root, &defs)
    }

    fn eval(&self, word: &[SegmentId], n: usize, defs: &[PointSet]) -> PointSet {
        let len = word.len();
        match &self.nodes[n] {
            Node::Null => PointSet::only_null(len),
            Node::Head(table) => {
                PointSet::from_positions(len, (0..len).filter(|&i| table[word[i]]))
            }
            Node::Not(c, world) => self.eval(word, *c, defs).complement(*world),
            Node::And(a, b) => self.eval(word, *a, defs).intersect(&self.eval(word, *b, defs)),
            Node::Or(a, b) => self.eval(word, *a, defs).union(&self.eval(word, *b, defs)),
            Node::Left(c) => self.eval(word, *c, defs).left_preimage(),
            Node::Right(c) => self.eval(word, *c, defs).right_preimage(),
            Node::Def(d) => defs[*d].clone(),
        }
    }
}

fn collect_defs(nodes: &[Node], n: usize, out: &mut Vec<usize>) {
    match &nodes[n] {
        Node::Def(d) => {
            if !out.contains(d) {
                out.push(*d)
            }
        }
        Node::Not(c, _) | Node::Left(c) | Node::Right(c) => collect_defs(nodes, *c, out),
        Node::And(a, b) | Node::Or(a, b) => {
            collect_defs(nodes, *a, out);
            collect_defs(nodes, *b, out);
        }
        Node::Null | Node::Head(_) => {}
    }
}

/// `I(p)` in `word`. Compiles on every call; use [`Program`] to evaluate a
/// predicate over many words.
pub fn denotation(
    word: &Word,
    pred: &TypedPredicate,
    defs: &Definitions,
    fs: &FeatureSystem,
) -> Result<Denotation, TypeError> {
    Ok(Program::compile(pred, fs, defs)?.denotation(word))
}

/// A named predicate required to hold at every position of its site.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub body: TypedPredicate,
    /// `None` means every position.
    pub site: Option<TypedPredicate>,
}

impl Constraint {
    pub fn new(name: &str, body: TypedPredicate, site: Option<TypedPredicate>) -> Self {
        Constraint {
            name: name.to_string(),
            body: body.at_positions(),
            site: site.map(TypedPredicate::at_positions),
        }
    }

    pub fn compile(&self, fs: &FeatureSystem, defs: &Definitions) -> Result<CompiledConstraint, TypeError> {
        Ok(CompiledConstraint {
            name: self.name.clone(),
            body: Program::compile(&self.body, fs, defs)?,
            site: self
                .site
                .as_ref()
                .map(|s| Program::compile(s, fs, defs))
                .transpose()?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct CompiledConstraint {
    pub name: String,
    body: Program,
    site: Option<Program>,
}

impl CompiledConstraint {
    pub fn site_points(&self, word: &Word) -> PointSet {
        match &self.site {
            Some(s) => s.points_in(word),
            None => PointSet::all_positions(word.len()),
        }
    }

    pub fn body_points(&self, word: &Word) -> PointSet {
        self.body.points_in(word)
    }

    /// Site positions where the body fails.
    pub fn violations(&self, word: &Word) -> PointSet {
        self.site_points(word).positions_minus(&self.body_points(word))
    }

    /// Positions where the constraint is not violated.
    pub fn holds(&self, word: &Word) -> PointSet {
        self.violations(word).complement(World::NonNullString)
    }

    pub fn count_violations(&self, word: &Word) -> usize {
        self.violations(word).count_positions()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Violations(Vec<usize>),
}

pub fn satisfies(
    word: &Word,
    c: &Constraint,
    fs: &FeatureSystem,
    defs: &Definitions,
) -> Result<Verdict, TypeError> {
    let v: Vec<usize> = c.compile(fs, defs)?.violations(word).positions().collect();
    Ok(if v.is_empty() {
        Verdict::Ok
    } else {
        Verdict::Violations(v)
    })
}

pub fn count_violations(
    word: &Word,
    c: &Constraint,
    fs: &FeatureSystem,
    defs: &Definitions,
) -> Result<usize, TypeError> {
    Ok(c.compile(fs, defs)?.count_violations(word))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::predicate::parse;

    #[test]
    fn preimages() {
        let s = PointSet::from_positions(3, [0, 2]);
        assert_eq!(s.left_preimage(), PointSet::from_positions(3, [1]));
        assert_eq!(s.right_preimage(), PointSet::from_positions(3, [1]));
        let n = PointSet::only_null(3);
        assert_eq!(n.left_preimage(), PointSet::from_positions(3, [0]));
        assert_eq!(n.right_preimage(), PointSet::from_positions(3, [2]));
        assert_eq!(PointSet::only_null(0).right_preimage(), PointSet::empty(0));
    }

    #[test]
    fn preimages_across_blocks() {
        let s = PointSet::from_positions(130, [63, 64, 127, 129]);
        assert_eq!(s.left_preimage(), PointSet::from_positions(130, [64, 65, 128]));
        assert_eq!(s.right_preimage(), PointSet::from_positions(130, [62, 63, 126, 128]));
        assert_eq!(PointSet::all_positions(130).count_positions(), 130);
        assert_eq!(s.complement(World::NonNullString).count_positions(), 126);
    }

    #[test]
    fn complement_respects_world() {
        let s = PointSet::from_positions(2, [0]);
        let c = s.complement(World::String);
        assert!(c.contains_null() && c.contains(1) && !c.contains(0));
        assert!(!s.complement(World::NonNullString).contains_null());
    }

    fn eval(fs: &FeatureSystem, defs: &Definitions, text: &str, word: &str) -> Denotation {
        let prog = Program::from_ast(&parse(text, fs).unwrap(), fs, defs).unwrap();
        prog.denotation(&fs.parse_word(word).unwrap())
    }

    #[test]
    fn path_string_literal() {
        let fs = fixtures::turkish();
        let defs = Definitions::new();
        let d = eval(&fs, &defs, "head 'k' & right(head 'a' & right(head 't' & right null))", "kat");
        assert_eq!(d, Denotation::Points(PointSet::from_positions(3, [0])));
        let d = eval(&fs, &defs, "head 'k' & right(head 'a' & right(head 't' & right null))", "katt");
        assert_eq!(d.points().unwrap().count_positions(), 0);
    }

    #[test]
    fn left_context_of_harmony() {
        let cfg = fixtures::turkish_config();
        let d = eval(&cfg.fs, &cfg.defs, "Left", "evlı");
        assert_eq!(d, Denotation::Points(PointSet::from_positions(4, [1, 2, 3])));
    }

    #[test]
    fn harmony_verdicts() {
        let cfg = fixtures::turkish_config();
        let harmony = &cfg.constraints["Harmony"];
        let w = |s: &str| cfg.fs.parse_word(s).unwrap();
        assert_eq!(satisfies(&w("evler"), harmony, &cfg.fs, &cfg.defs).unwrap(), Verdict::Ok);
        assert_eq!(
            satisfies(&w("evlar"), harmony, &cfg.fs, &cfg.defs).unwrap(),
            Verdict::Violations(vec![3])
        );
        assert_eq!(count_violations(&w("evlarlar"), harmony, &cfg.fs, &cfg.defs).unwrap(), 1);
        assert_eq!(count_violations(&w("evler"), harmony, &cfg.fs, &cfg.defs).unwrap(), 0);
        // no vowel: the site is empty, so the constraint holds vacuously
        assert_eq!(satisfies(&w("vlr"), harmony, &cfg.fs, &cfg.defs).unwrap(), Verdict::Ok);
    }

    #[test]
    fn clash_count() {
        let cfg = fixtures::stress_config();
        let c = &cfg.constraints["NoClash"];
        let w = cfg.fs.parse_word("++-").unwrap();
        assert_eq!(count_violations(&w, c, &cfg.fs, &cfg.defs).unwrap(), 1);
        assert_eq!(satisfies(&w, c, &cfg.fs, &cfg.defs).unwrap(), Verdict::Violations(vec![1]));
    }

    #[test]
    fn alphabet_definitions_are_fixpoints() {
        let fs = fixtures::turkish();
        let mut defs = Definitions::new();
        defs.insert("P", parse("F | Q", &fs).unwrap());
        defs.insert("Q", parse("'a' | P & [+round]", &fs).unwrap());
        let d = eval(&fs, &defs, "P", "a");
        let names: Vec<&str> = d
            .segments()
            .unwrap()
            .iter()
            .map(|&s| fs.segment(s).name.as_str())
            .collect();
        assert_eq!(names, ["a", "e", "i", "ö", "ü"]);
    }

    #[test]
    fn empty_word() {
        let fs = fixtures::turkish();
        let prog = Program::from_ast(&parse("null | left null", &fs).unwrap(), &fs, &Definitions::new()).unwrap();
        let d = prog.denotation(&Word(vec![]));
        assert!(d.points().unwrap().contains_null());
        assert_eq!(d.points().unwrap().count_positions(), 0);
    }
}
