//! Worked examples, an exhaustive corpus of small types, a random type
//! generator, and a brute-force subtyping oracle for finite types.
//!
//! The oracle shares no code with the decision procedure: it enumerates
//! decompositions of finite trees directly and walks refinement on plain
//! action vectors.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::types::{name, subsort, Dir, Name, Node, RawType, Sort, Type};
use crate::Answer;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKind {
    /// Inputs: subtype, supertype.
    Subtype,
    /// Inputs: session, environment.
    Typecheck,
    /// Input: environment.
    Live,
    /// Input: session; expected `Yes` means no error is reachable.
    Run,
}

/// A worked example with its expected verdict.
#[derive(Clone, Debug)]
pub struct ExampleCase {
    pub name: &'static str,
    pub kind: CaseKind,
    /// File names under `examples/`.
    pub files: &'static [&'static str],
    pub sources: Vec<&'static str>,
    pub expected: Answer,
    /// Where the example comes from, in words.
    pub anchor: &'static str,
}

macro_rules! ex {
    ($f:literal) => {
        include_str!(concat!("../../../examples/", $f))
    };
}

pub fn examples() -> Vec<ExampleCase> {
    use CaseKind::*;
    let c = |name, kind, files: &'static [&'static str], sources: Vec<&'static str>, expected, anchor| ExampleCase {
        name,
        kind,
        files,
        sources,
        expected,
        anchor,
    };
    vec![
        c("intro-sub", Subtype, &["intro_Tp.st", "intro_T.st"], vec![ex!("intro_Tp.st"), ex!("intro_T.st")], Answer::Yes, "optimised r anticipates its output"),
        c("intro-not-sub", Subtype, &["intro_T.st", "intro_Tp.st"], vec![ex!("intro_T.st"), ex!("intro_Tp.st")], Answer::No, "the reverse replacement is unsafe"),
        c("intro-cell", Subtype, &["intro_U.st", "intro_Vp.st"], vec![ex!("intro_U.st"), ex!("intro_Vp.st")], Answer::No, "the regular pair refuting the reverse direction"),
        c("forget-input", Subtype, &["forget_input_T.st", "forget_input_Tp.st"], vec![ex!("forget_input_T.st"), ex!("forget_input_Tp.st")], Answer::No, "action clause of input anticipation"),
        c("forget-output", Subtype, &["forget_output_T.st", "forget_output_Tp.st"], vec![ex!("forget_output_T.st"), ex!("forget_output_Tp.st")], Answer::No, "action clause of output anticipation"),
        c("concur19", Subtype, &["concur19_T.st", "concur19_Tp.st"], vec![ex!("concur19_T.st"), ex!("concur19_Tp.st")], Answer::Yes, "non-cyclic infinite derivation"),
        c("dbuf-sub", Subtype, &["dbuf_ctl_opt.st", "dbuf_ctl.st"], vec![ex!("dbuf_ctl_opt.st"), ex!("dbuf_ctl.st")], Answer::Yes, "double-buffering control optimisation"),
        c("dbuf-live", Live, &["dbuf.env"], vec![ex!("dbuf.env")], Answer::Yes, "double-buffering environment"),
        c("dbuf-typecheck", Typecheck, &["dbuf.sess", "dbuf.env"], vec![ex!("dbuf.sess"), ex!("dbuf.env")], Answer::Yes, "optimised control typed by the basic protocol"),
        c("dbuf-run", Run, &["dbuf.sess"], vec![ex!("dbuf.sess")], Answer::Yes, "double-buffering never errs"),
        c("live-pq", Live, &["live_pq.env"], vec![ex!("live_pq.env")], Answer::Yes, "fair consumer"),
        c("starving-r", Live, &["starving_r.env"], vec![ex!("starving_r.env")], Answer::No, "r may starve on a fair path"),
        c("intro-typecheck", Typecheck, &["intro.sess", "intro.env"], vec![ex!("intro.sess"), ex!("intro.env")], Answer::Yes, "the original r"),
        c("intro-opt-typecheck", Typecheck, &["intro_opt.sess", "intro.env"], vec![ex!("intro_opt.sess"), ex!("intro.env")], Answer::Yes, "the optimised r by subsumption"),
    ]
}

// ---------------------------------------------------------------------------
// brute force

/// A finite session tree.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Tree {
    End,
    Comm(Dir, Name, Vec<(Name, Sort, Tree)>),
}

type Letter = (Dir, Name, Name, Sort);

fn tree(t: &Type) -> Result<Tree, String> {
    match t.node() {
        Node::End => Ok(Tree::End),
        Node::Var(..) | Node::Rec(..) => Err(format!("{} is recursive", t)),
        Node::Comm(d, p, bs) => {
            let mut out = Vec::new();
            for b in bs {
                out.push((b.label.clone(), b.sort, tree(&b.cont)?));
            }
            Ok(Tree::Comm(*d, p.clone(), out))
        }
    }
}

/// Decompositions keeping one branch at every `single` node.
fn decompose(t: &Tree, single: Dir) -> Vec<Tree> {
    match t {
        Tree::End => vec![Tree::End],
        Tree::Comm(d, p, bs) if *d == single => {
            let mut out = Vec::new();
            for (l, s, c) in bs {
                for x in decompose(c, single) {
                    out.push(Tree::Comm(*d, p.clone(), vec![(l.clone(), *s, x)]));
                }
            }
            out
        }
        Tree::Comm(d, p, bs) => {
            let mut acc: Vec<Vec<(Name, Sort, Tree)>> = vec![Vec::new()];
            for (l, s, c) in bs {
                let opts = decompose(c, single);
                let mut next = Vec::new();
                for a in &acc {
                    for x in &opts {
                        let mut a2 = a.clone();
                        a2.push((l.clone(), *s, x.clone()));
                        next.push(a2);
                    }
                }
                acc = next;
            }
            acc.into_iter().map(|bs| Tree::Comm(*d, p.clone(), bs)).collect()
        }
    }
}

/// All maximal paths.
fn paths(t: &Tree) -> Vec<Vec<Letter>> {
    match t {
        Tree::End => vec![Vec::new()],
        Tree::Comm(d, p, bs) => {
            let mut out = Vec::new();
            for (l, s, c) in bs {
                for mut w in paths(c) {
                    w.insert(0, (*d, p.clone(), l.clone(), *s));
                    out.push(w);
                }
            }
            out
        }
    }
}

fn acts(w: &[Letter]) -> BTreeSet<(Dir, Name)> {
    w.iter().map(|(d, p, _, _)| (*d, p.clone())).collect()
}

/// Refinement on finite words: match the head of `w` against the first
/// letter of `v` it may overtake to, then recurse.
fn word_refines(w: &[Letter], v: &[Letter]) -> bool {
    let Some((dir, p, l, s)) = w.first() else {
        return v.is_empty();
    };
    let mut j = None;
    for (k, (d2, q, _, _)) in v.iter().enumerate() {
        if d2 == dir && q == p {
            j = Some(k);
            break;
        }
        // an input may only pass inputs from others; an output passes
        // inputs and outputs to others
        if *dir == Dir::In && *d2 == Dir::Out {
            return false;
        }
    }
    let Some(j) = j else { return false };
    let (_, _, l2, s2) = &v[j];
    if l2 != l {
        return false;
    }
    let sort_ok = match dir {
        Dir::In => subsort(*s2, *s),
        Dir::Out => subsort(*s, *s2),
    };
    if !sort_ok {
        return false;
    }
    let mut rest = v.to_vec();
    rest.remove(j);
    if j > 0 && acts(&w[1..]) != acts(&rest) {
        return false;
    }
    word_refines(&w[1..], &rest)
}

/// Decides subtyping on finite types by full enumeration.
pub fn brute_force_subtype(t: &Type, t2: &Type) -> Result<bool, String> {
    let a = tree(t)?;
    let b = tree(t2)?;
    let us = decompose(&a, Dir::Out);
    let vs = decompose(&b, Dir::In);
    let vpaths: Vec<Vec<Vec<Letter>>> = vs.iter().map(paths).collect();
    for u in &us {
        let up = paths(u);
        for vp in &vpaths {
            if !up.iter().any(|w| vp.iter().any(|w2| word_refines(w, w2))) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// exhaustive corpus

const PEERS: [&str; 2] = ["p", "q"];
/// Labels carry fixed sorts in part A.
const LABELS: [(&str, Sort); 2] = [("a", Sort::Nat), ("b", Sort::Bool)];

fn comm(d: Dir, p: &str, bs: Vec<(Name, Sort, RawType)>) -> RawType {
    RawType::Comm(d, name(p), bs)
}

fn label_sets() -> Vec<Vec<(Name, Sort)>> {
    let a = (name(LABELS[0].0), LABELS[0].1);
    let b = (name(LABELS[1].0), LABELS[1].1);
    vec![vec![a.clone()], vec![b.clone()], vec![a, b]]
}

/// Every type with at most two communication nodes over peers `p, q` and
/// labels `a(nat)`, `b(bool)`: 205 types.
pub fn small_types() -> Vec<Type> {
    let mut heads = Vec::new();
    for p in PEERS {
        for d in [Dir::Out, Dir::In] {
            for ls in label_sets() {
                heads.push((d, p, ls));
            }
        }
    }
    let one: Vec<RawType> = heads
        .iter()
        .map(|(d, p, ls)| comm(*d, p, ls.iter().map(|(l, s)| (l.clone(), *s, RawType::End)).collect()))
        .collect();
    let mut out = vec![RawType::End];
    out.extend(one.iter().cloned());
    for (d, p, ls) in &heads {
        for i in 0..ls.len() {
            for x in &one {
                let bs = ls
                    .iter()
                    .enumerate()
                    .map(|(k, (l, s))| (l.clone(), *s, if k == i { x.clone() } else { RawType::End }))
                    .collect();
                out.push(comm(*d, p, bs));
            }
        }
    }
    out.iter().map(|r| r.close().expect("finite terms are closed")).collect()
}

/// The 16 letters of part B: peer, direction, label and sort vary freely.
fn letters() -> Vec<Letter> {
    let mut out = Vec::new();
    for p in PEERS {
        for d in [Dir::Out, Dir::In] {
            for (l, _) in LABELS {
                for s in [Sort::Nat, Sort::Bool] {
                    out.push((d, name(p), name(l), s));
                }
            }
        }
    }
    out
}

fn word_type(w: &[Letter]) -> Type {
    let mut t = Type::end();
    for (d, p, l, s) in w.iter().rev() {
        t = Type::single(*d, p.clone(), l.clone(), *s, t);
    }
    t
}

/// Part B: every three-letter word against each distinct permutation of
/// itself and against each single-letter sort flip.
pub fn word_pairs() -> Vec<(Type, Type)> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let ls = letters();
    let mut out = Vec::new();
    for a in &ls {
        for b in &ls {
            for c in &ls {
                let w = [a.clone(), b.clone(), c.clone()];
                let t = word_type(&w);
                let mut seen: BTreeSet<Vec<Letter>> = BTreeSet::new();
                for pm in PERMS {
                    let v: Vec<Letter> = pm.iter().map(|i| w[*i].clone()).collect();
                    if seen.insert(v.clone()) {
                        out.push((t.clone(), word_type(&v)));
                    }
                }
                for i in 0..3 {
                    let mut v = w.to_vec();
                    v[i].3 = if v[i].3 == Sort::Nat { Sort::Bool } else { Sort::Nat };
                    out.push((t.clone(), word_type(&v)));
                }
            }
        }
    }
    out
}

/// Part A (all ordered pairs of [`small_types`]) followed by part B.
pub fn corpus_pairs() -> Vec<(Type, Type)> {
    let ts = small_types();
    let mut out = Vec::with_capacity(ts.len() * ts.len());
    for a in &ts {
        for b in &ts {
            out.push((a.clone(), b.clone()));
        }
    }
    out.extend(word_pairs());
    out
}

// ---------------------------------------------------------------------------
// random types

/// Stream of random closed, guarded, label-distinct types with at most
/// `size` communications each.
pub struct GenTypes {
    rng: ChaCha8Rng,
    size: usize,
    participants: Vec<Name>,
    labels: Vec<Name>,
    sorts: Vec<Sort>,
    fresh: usize,
}

pub fn gen_regular_types(seed: u64, size: usize, participants: &[&str], labels: &[&str]) -> GenTypes {
    GenTypes {
        rng: ChaCha8Rng::seed_from_u64(seed),
        size: size.max(1),
        participants: participants.iter().map(|p| name(p)).collect(),
        labels: labels.iter().map(|l| name(l)).collect(),
        sorts: Sort::ALL.to_vec(),
        fresh: 0,
    }
}

impl GenTypes {
    /// Restricts payload sorts.
    pub fn with_sorts(mut self, sorts: &[Sort]) -> GenTypes {
        self.sorts = sorts.to_vec();
        self
    }

    fn gen(&mut self, budget: usize, vars: &[Name]) -> RawType {
        let roll = self.rng.gen_range(0..100);
        if budget == 0 || roll < 12 {
            if !vars.is_empty() && self.rng.gen_bool(0.5) {
                return RawType::Var(vars[self.rng.gen_range(0..vars.len())].clone());
            }
            return RawType::End;
        }
        if roll < 30 {
            // a binder is always followed by a communication, so guarded
            let v = name(&format!("t{}", self.fresh));
            self.fresh += 1;
            let mut vs = vars.to_vec();
            vs.push(v.clone());
            return RawType::Rec(v, Box::new(self.comm(budget, &vs)));
        }
        if !vars.is_empty() && roll < 40 {
            return RawType::Var(vars[self.rng.gen_range(0..vars.len())].clone());
        }
        self.comm(budget, vars)
    }

    fn comm(&mut self, budget: usize, vars: &[Name]) -> RawType {
        let d = if self.rng.gen_bool(0.5) { Dir::Out } else { Dir::In };
        let p = self.participants[self.rng.gen_range(0..self.participants.len())].clone();
        let mut ls = self.labels.clone();
        // partial shuffle picks k distinct labels
        let k = self.rng.gen_range(1..=ls.len().min(3));
        for i in 0..k {
            let j = self.rng.gen_range(i..ls.len());
            ls.swap(i, j);
        }
        ls.truncate(k);
        let mut left = budget - 1;
        let mut bs = Vec::new();
        for (i, l) in ls.into_iter().enumerate() {
            let share = if i + 1 == k { left } else { self.rng.gen_range(0..=left) };
            left -= share;
            let s = self.sorts[self.rng.gen_range(0..self.sorts.len())];
            bs.push((l, s, self.gen(share, vars)));
        }
        RawType::Comm(d, p, bs)
    }
}

impl Iterator for GenTypes {
    type Item = Type;

    fn next(&mut self) -> Option<Type> {
        let size = self.rng.gen_range(1..=self.size);
        let raw = self.gen(size, &[]);
        Some(raw.close().expect("generated terms are closed and guarded"))
    }
}

/// Smaller variants of `t`: each subterm replaced by `end`.
pub fn shrink(t: &Type) -> Vec<Type> {
    fn go(t: &Type, out: &mut Vec<Type>, rebuild: &dyn Fn(Type) -> Type) {
        if matches!(t.node(), Node::Comm(..) | Node::Rec(..)) {
            out.push(rebuild(Type::end()));
        }
        match t.node() {
            Node::End | Node::Var(..) => {}
            Node::Rec(h, b) => go(b, out, &|x| rebuild(Type::rec(h.clone(), x))),
            Node::Comm(d, p, bs) => {
                for i in 0..bs.len() {
                    let f = |x: Type| {
                        let mut bs2 = bs.clone();
                        bs2[i].cont = x;
                        rebuild(Type::comm(*d, p.clone(), bs2))
                    };
                    go(&bs[i].cont, out, &f);
                }
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut out, &|x| x);
    out.retain(|x| x.validate().is_ok());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> Type {
        Type::parse(s).unwrap()
    }

    #[test]
    fn corpus_sizes() {
        assert_eq!(small_types().len(), 205);
        let mut keys = BTreeSet::new();
        for t in small_types() {
            assert!(keys.insert(format!("{}", t)));
        }
        let n = word_pairs().len();
        assert!(n > 30_000 && n < 40_000, "{}", n);
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_subtype(&Type::end(), &Type::end()), Ok(true));
        let tp = ty(include_str!("../../../examples/intro_Tp.st"));
        let t = ty(include_str!("../../../examples/intro_T.st"));
        assert_eq!(brute_force_subtype(&tp, &t), Ok(true));
        assert_eq!(brute_force_subtype(&t, &tp), Ok(false));
        assert!(brute_force_subtype(&ty("rec t . p!a.t"), &Type::end()).is_err());
        assert_eq!(brute_force_subtype(&ty("p?a(int).end"), &ty("p?a(nat).end")), Ok(true));
        assert_eq!(brute_force_subtype(&ty("p?a(nat).end"), &ty("p?a(int).end")), Ok(false));
        assert_eq!(brute_force_subtype(&ty("q!m.p?l.end"), &ty("p?l.q!m.end")), Ok(true));
        assert_eq!(brute_force_subtype(&ty("p?l.end"), &ty("q?m.p?l.end")), Ok(false));
    }

    #[test]
    fn generator() {
        for t in gen_regular_types(7, 1, &["p", "q"], &["a", "b"]).take(200) {
            assert!(t.depth() <= 1);
            t.validate().unwrap();
        }
        for t in gen_regular_types(8, 6, &["p", "q", "r"], &["a", "b", "c"]).take(500) {
            t.validate().unwrap();
            for s in shrink(&t) {
                assert!(s.size() < t.size());
            }
        }
        let a: Vec<Type> = gen_regular_types(3, 4, &["p"], &["a"]).take(20).collect();
        let b: Vec<Type> = gen_regular_types(3, 4, &["p"], &["a"]).take(20).collect();
        assert_eq!(a.iter().map(|t| format!("{}", t)).collect::<Vec<_>>(), b.iter().map(|t| format!("{}", t)).collect::<Vec<_>>());
    }

    #[test]
    fn examples_parse() {
        for c in examples() {
            assert_eq!(c.files.len(), c.sources.len());
            match c.kind {
                CaseKind::Subtype => {
                    for s in &c.sources {
                        Type::parse(s).unwrap();
                    }
                }
                CaseKind::Live => {
                    crate::environment::TypingEnv::parse(c.sources[0]).unwrap();
                }
                CaseKind::Typecheck => {
                    crate::calculus::Session::parse(c.sources[0]).unwrap();
                    crate::environment::TypingEnv::parse(c.sources[1]).unwrap();
                }
                CaseKind::Run => {
                    crate::calculus::Session::parse(c.sources[0]).unwrap();
                }
            }
        }
    }
}
