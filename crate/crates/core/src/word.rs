//! SISO trees as ultimately periodic words.
//!
//! A regular SISO tree is a single path, so it is a finite word ending in
//! `end` or a lasso `stem · cycle^ω`. The normal form (primitive cycle,
//! shortest stem) makes structural equality coincide with tree equality.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::GNode;
use crate::types::{name, Action, ActionSet, Dir, Name, RawType, Sort, Type};

/// One communication of a SISO tree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Act {
    pub dir: Dir,
    pub peer: Name,
    pub label: Name,
    pub sort: Sort,
}

impl Act {
    pub fn new(dir: Dir, peer: &str, label: &str, sort: Sort) -> Act {
        Act { dir, peer: name(peer), label: name(label), sort }
    }

    pub fn action(&self) -> Action {
        Action { peer: self.peer.clone(), dir: self.dir }
    }
}

impl fmt::Display for Act {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.peer, self.dir.symbol(), self.label)?;
        if self.sort != Sort::Unit {
            write!(f, "({})", self.sort)?;
        }
        Ok(())
    }
}

/// Letters of a word: plain actions, or actions carrying a tag (used when
/// replaying pumped derivations).
pub trait Letter: Clone + Eq + core::hash::Hash + fmt::Debug {
    fn act(&self) -> &Act;
}

impl Letter for Act {
    fn act(&self) -> &Act {
        self
    }
}

impl Letter for (Act, bool) {
    fn act(&self) -> &Act {
        &self.0
    }
}

/// `stem · cycle^ω`, or the finite word `stem · end` when `cycle` is empty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lasso<A = Act> {
    pub stem: Vec<A>,
    pub cycle: Vec<A>,
}

impl<A: Letter> Lasso<A> {
    pub fn new(stem: Vec<A>, cycle: Vec<A>) -> Lasso<A> {
        let mut l = Lasso { stem, cycle };
        l.normalize();
        l
    }

    pub fn end() -> Lasso<A> {
        Lasso { stem: Vec::new(), cycle: Vec::new() }
    }

    pub fn is_end(&self) -> bool {
        self.stem.is_empty() && self.cycle.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.cycle.is_empty()
    }

    fn normalize(&mut self) {
        let n = self.cycle.len();
        if n > 0 {
            let d = (1..=n)
                .find(|d| n.is_multiple_of(*d) && (0..n).all(|i| self.cycle[i] == self.cycle[i % d]))
                .unwrap_or(n);
            self.cycle.truncate(d);
            while let Some(last) = self.stem.last() {
                if *last == self.cycle[self.cycle.len() - 1] {
                    self.stem.pop();
                    self.cycle.rotate_right(1);
                } else {
                    break;
                }
            }
        }
    }

    /// The `i`-th letter of the (possibly infinite) word.
    pub fn get(&self, i: usize) -> Option<&A> {
        if i < self.stem.len() {
            Some(&self.stem[i])
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(&self.cycle[(i - self.stem.len()) % self.cycle.len()])
        }
    }

    pub fn head(&self) -> Option<&A> {
        self.get(0)
    }

    /// The word without its first `k` letters.
    pub fn drop(&self, k: usize) -> Lasso<A> {
        if k <= self.stem.len() {
            return Lasso::new(self.stem[k..].to_vec(), self.cycle.clone());
        }
        if self.cycle.is_empty() {
            return Lasso::end();
        }
        let r = (k - self.stem.len()) % self.cycle.len();
        let mut c = self.cycle.clone();
        c.rotate_left(r);
        Lasso::new(Vec::new(), c)
    }

    pub fn tail(&self) -> Lasso<A> {
        self.drop(1)
    }

    /// First `k` letters (fewer when the word is finite and shorter).
    pub fn prefix(&self, k: usize) -> Vec<A> {
        (0..k).map_while(|i| self.get(i).cloned()).collect()
    }

    /// The word with the letter at position `j` removed.
    pub fn remove(&self, j: usize) -> Lasso<A> {
        let mut stem = self.prefix(j);
        let rest = self.drop(j + 1);
        stem.extend(rest.stem);
        Lasso::new(stem, rest.cycle)
    }

    /// The word with `w` inserted before position `j`.
    pub fn insert(&self, j: usize, w: &[A]) -> Lasso<A> {
        let mut stem = self.prefix(j);
        stem.extend_from_slice(w);
        let rest = self.drop(j);
        stem.extend(rest.stem);
        Lasso::new(stem, rest.cycle)
    }

    /// Letters that occur in the word.
    pub fn letters(&self) -> impl Iterator<Item = &A> {
        self.stem.iter().chain(self.cycle.iter())
    }

    /// Number of positions that must be scanned to see every distinct
    /// suffix: stem plus one period.
    pub fn horizon(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    pub fn actions(&self) -> ActionSet {
        self.letters().map(|a| a.act().action()).collect()
    }

    pub fn has_action(&self, peer: &Name, dir: Dir) -> bool {
        self.letters().any(|a| a.act().dir == dir && a.act().peer == *peer)
    }

    pub fn map<B: Letter>(&self, f: impl Fn(&A) -> B) -> Lasso<B> {
        Lasso::new(self.stem.iter().map(&f).collect(), self.cycle.iter().map(&f).collect())
    }

    pub fn untag(&self) -> Lasso<Act> {
        self.map(|a| a.act().clone())
    }
}

impl Lasso<Act> {
    /// The word of a SISO type, or `None` when the type is not SISO.
    pub fn from_type(t: &Type) -> Option<Lasso> {
        let g = t.to_graph();
        let mut acts = Vec::new();
        let mut pos: Vec<Option<usize>> = alloc::vec![None; g.nodes.len()];
        let mut i = g.root;
        loop {
            if let Some(k) = pos[i] {
                let cycle = acts.split_off(k);
                return Some(Lasso::new(acts, cycle));
            }
            pos[i] = Some(acts.len());
            match &g.nodes[i] {
                GNode::End => return Some(Lasso::new(acts, Vec::new())),
                GNode::Comm { dir, peer, branches } => {
                    if branches.len() != 1 {
                        return None;
                    }
                    let (l, s, c) = &branches[0];
                    acts.push(Act { dir: *dir, peer: peer.clone(), label: l.clone(), sort: *s });
                    i = *c;
                }
            }
        }
    }

    pub fn to_type(&self) -> Type {
        let one = |a: &Act, cont: RawType| RawType::Comm(a.dir, a.peer.clone(), alloc::vec![(a.label.clone(), a.sort, cont)]);
        let mut t = if self.cycle.is_empty() {
            RawType::End
        } else {
            let v = name("t");
            let mut body = RawType::Var(v.clone());
            for a in self.cycle.iter().rev() {
                body = one(a, body);
            }
            RawType::Rec(v, Box::new(body))
        };
        for a in self.stem.iter().rev() {
            t = one(a, t);
        }
        t.close().expect("lasso terms are closed and guarded")
    }

    pub fn parse(src: &str) -> Option<Lasso> {
        Type::parse(src).ok().and_then(|t| Lasso::from_type(&t))
    }
}

impl<A: Letter> fmt::Display for Lasso<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = |v: &[A]| v.iter().map(|a| format!("{}.", a.act())).collect::<String>();
        if self.cycle.is_empty() {
            write!(f, "{}end", w(&self.stem))
        } else {
            let c = w(&self.cycle);
            write!(f, "{}rec t . {}t", w(&self.stem), c)
        }
    }
}

pub fn word_to_string(w: &[Act]) -> String {
    let mut s = String::new();
    for (i, a) in w.iter().enumerate() {
        if i > 0 {
            s.push('.');
        }
        s.push_str(&format!("{}", a));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::type_equal;

    fn w(s: &str) -> Lasso {
        Lasso::parse(s).unwrap()
    }

    #[test]
    fn normal_form_is_unique() {
        let a = w("rec t . p?a(nat).p?a(nat).t");
        let b = w("p?a(nat).rec t . p?a(nat).t");
        assert_eq!(a, b);
        assert!(a.stem.is_empty() && a.cycle.len() == 1);
        let c = w("q!x.rec t . p?a.q!x.t");
        assert_eq!(c, w("rec t . q!x.p?a.t"));
    }

    #[test]
    fn remove_and_insert() {
        let a = w("rec t . p?a.q?b.t");
        let r = a.remove(1);
        assert_eq!(r, w("p?a.rec t . p?a.q?b.t"));
        let back = r.insert(1, &[a.get(1).unwrap().clone()]);
        assert_eq!(back, a);
        assert_eq!(w("p!a.end").remove(0), Lasso::end());
    }

    #[test]
    fn conversion_round_trip() {
        for s in ["end", "p!a(nat).end", "rec t . p?a.q!b(int).t", "r!z.rec t . p?a.t"] {
            let l = w(s);
            assert!(type_equal(&l.to_type(), &Type::parse(s).unwrap()));
            assert_eq!(Lasso::from_type(&l.to_type()).unwrap(), l);
        }
        assert!(Lasso::parse("p&{a.end, b.end}").is_none());
    }
}
