//! Sorts, session types, queue types and action sets.
//!
//! Session types are immutable shared terms. Recursion variables are de
//! Bruijn indices; the binder names survive only as printing hints, so
//! `==` and `Hash` on [`Type`] are insensitive to alpha-renaming. Equality
//! of the infinite trees denoted by two terms is [`type_equal`].

use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::hash::{Hash, Hasher};

use crate::graph::TypeGraph;

/// Participant, label and variable names.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Nat,
    Int,
    Bool,
    Unit,
}

impl Sort {
    pub const ALL: [Sort; 4] = [Sort::Nat, Sort::Int, Sort::Bool, Sort::Unit];

    pub fn as_str(self) -> &'static str {
        match self {
            Sort::Nat => "nat",
            Sort::Int => "int",
            Sort::Bool => "bool",
            Sort::Unit => "unit",
        }
    }

    pub fn from_str(s: &str) -> Option<Sort> {
        match s {
            "nat" => Some(Sort::Nat),
            "int" => Some(Sort::Int),
            "bool" => Some(Sort::Bool),
            "unit" => Some(Sort::Unit),
            _ => None,
        }
    }

    /// Least upper bound under `<:`, if any.
    pub fn lub(self, other: Sort) -> Option<Sort> {
        if subsort(self, other) {
            Some(other)
        } else if subsort(other, self) {
            Some(self)
        } else {
            None
        }
    }

    /// Greatest lower bound under `<:`, if any.
    pub fn glb(self, other: Sort) -> Option<Sort> {
        if subsort(self, other) {
            Some(self)
        } else if subsort(other, self) {
            Some(other)
        } else {
            None
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The subsorting relation: reflexive, plus `nat <: int`.
pub fn subsort(a: Sort, b: Sort) -> bool {
    a == b || (a == Sort::Nat && b == Sort::Int)
}

/// Direction of a communication: `?` (input, branching) or `!` (output,
/// selection).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    In,
    Out,
}

impl Dir {
    pub fn symbol(self) -> char {
        match self {
            Dir::In => '?',
            Dir::Out => '!',
        }
    }
}

/// One element of an action set: a peer together with a direction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub peer: Name,
    pub dir: Dir,
}

impl Action {
    pub fn new(peer: &str, dir: Dir) -> Action {
        Action { peer: name(peer), dir }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.peer, self.dir.symbol())
    }
}

pub type ActionSet = BTreeSet<Action>;

/// One alternative of a branching or selection.
#[derive(Clone, Debug)]
pub struct Branch {
    pub label: Name,
    pub sort: Sort,
    pub cont: Type,
}

#[derive(Clone, Debug)]
pub enum Node {
    End,
    /// de Bruijn index, plus the binder name for printing.
    Var(usize, Name),
    Rec(Name, Type),
    /// `p&{..}` when `dir` is `In`, `p+{..}` when it is `Out`. Branches are
    /// kept sorted by label.
    Comm(Dir, Name, Vec<Branch>),
}

/// A session type term. Cheap to clone.
#[derive(Clone)]
pub struct Type(Arc<Node>);

impl Type {
    pub fn end() -> Type {
        Type(Arc::new(Node::End))
    }

    pub(crate) fn var(index: usize, hint: Name) -> Type {
        Type(Arc::new(Node::Var(index, hint)))
    }

    pub(crate) fn rec(hint: Name, body: Type) -> Type {
        Type(Arc::new(Node::Rec(hint, body)))
    }

    /// Builds a communication node; branches are sorted by label. Callers
    /// guarantee non-emptiness and distinct labels.
    pub(crate) fn comm(dir: Dir, peer: Name, mut branches: Vec<Branch>) -> Type {
        branches.sort_by(|a, b| a.label.cmp(&b.label));
        Type(Arc::new(Node::Comm(dir, peer, branches)))
    }

    /// `peer!label(sort).cont`
    pub fn send(peer: &str, label: &str, sort: Sort, cont: Type) -> Type {
        Type::single(Dir::Out, name(peer), name(label), sort, cont)
    }

    /// `peer?label(sort).cont`
    pub fn recv(peer: &str, label: &str, sort: Sort, cont: Type) -> Type {
        Type::single(Dir::In, name(peer), name(label), sort, cont)
    }

    pub(crate) fn single(dir: Dir, peer: Name, label: Name, sort: Sort, cont: Type) -> Type {
        Type::comm(dir, peer, alloc::vec![Branch { label, sort, cont }])
    }

    /// Parses the surface syntax, see [`crate::syntax`].
    pub fn parse(src: &str) -> Result<Type, crate::syntax::ParseError> {
        crate::syntax::parse_type(src)
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn is_end(&self) -> bool {
        matches!(*self.0, Node::End)
    }

    /// Unfolds top-level recursion until the head is not a `Rec`.
    pub fn unfold(&self) -> Type {
        let mut t = self.clone();
        while let Node::Rec(_, body) = t.node() {
            let body = body.clone();
            t = subst_top(&body, &t);
        }
        t
    }

    pub fn to_graph(&self) -> TypeGraph {
        TypeGraph::from_type(self)
    }

    /// Number of syntactic nodes.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::End | Node::Var(..) => 1,
            Node::Rec(_, b) => 1 + b.size(),
            Node::Comm(_, _, bs) => 1 + bs.iter().map(|b| b.cont.size()).sum::<usize>(),
        }
    }

    /// Maximal number of nested communications.
    pub fn depth(&self) -> usize {
        match self.node() {
            Node::End | Node::Var(..) => 0,
            Node::Rec(_, b) => b.depth(),
            Node::Comm(_, _, bs) => 1 + bs.iter().map(|b| b.cont.depth()).max().unwrap_or(0),
        }
    }

    pub fn is_recursive(&self) -> bool {
        match self.node() {
            Node::End => false,
            Node::Var(..) | Node::Rec(..) => true,
            Node::Comm(_, _, bs) => bs.iter().any(|b| b.cont.is_recursive()),
        }
    }

    /// True when every reachable branching and selection is a singleton.
    pub fn is_siso(&self) -> bool {
        self.to_graph().is_siso()
    }

    /// Singleton selections everywhere.
    pub fn is_so(&self) -> bool {
        self.to_graph().is_single(Dir::Out)
    }

    /// Singleton branchings everywhere.
    pub fn is_si(&self) -> bool {
        self.to_graph().is_single(Dir::In)
    }

    /// Checks closedness, guardedness, non-empty choices and distinct labels.
    pub fn validate(&self) -> Result<(), TypeError> {
        fn go(t: &Type, depth: usize) -> Result<(), TypeError> {
            match t.node() {
                Node::End => Ok(()),
                Node::Var(i, h) => {
                    if *i < depth {
                        Ok(())
                    } else {
                        Err(TypeError::Unbound(h.clone()))
                    }
                }
                Node::Rec(h, body) => {
                    if matches!(body.node(), Node::Var(..)) {
                        return Err(TypeError::Unguarded(h.clone()));
                    }
                    go(body, depth + 1)
                }
                Node::Comm(_, _, bs) => {
                    if bs.is_empty() {
                        return Err(TypeError::EmptyChoice);
                    }
                    for w in bs.windows(2) {
                        if w[0].label == w[1].label {
                            return Err(TypeError::DuplicateLabel(w[0].label.clone()));
                        }
                    }
                    bs.iter().try_for_each(|b| go(&b.cont, depth))
                }
            }
        }
        go(self, 0)
    }
}

/// Substitutes `r` (closed) for the variable bound at the top of `body`.
fn subst_top(body: &Type, r: &Type) -> Type {
    fn go(t: &Type, depth: usize, r: &Type) -> Type {
        match t.node() {
            Node::End => t.clone(),
            Node::Var(i, _) => {
                if *i == depth {
                    r.clone()
                } else {
                    t.clone()
                }
            }
            Node::Rec(h, b) => Type::rec(h.clone(), go(b, depth + 1, r)),
            Node::Comm(d, p, bs) => Type(Arc::new(Node::Comm(
                *d,
                p.clone(),
                bs.iter()
                    .map(|b| Branch { label: b.label.clone(), sort: b.sort, cont: go(&b.cont, depth, r) })
                    .collect(),
            ))),
        }
    }
    go(body, 0, r)
}

impl PartialEq for Type {
    fn eq(&self, other: &Type) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (self.node(), other.node()) {
            (Node::End, Node::End) => true,
            (Node::Var(a, _), Node::Var(b, _)) => a == b,
            (Node::Rec(_, a), Node::Rec(_, b)) => a == b,
            (Node::Comm(d1, p1, b1), Node::Comm(d2, p2, b2)) => {
                d1 == d2
                    && p1 == p2
                    && b1.len() == b2.len()
                    && b1
                        .iter()
                        .zip(b2)
                        .all(|(x, y)| x.label == y.label && x.sort == y.sort && x.cont == y.cont)
            }
            _ => false,
        }
    }
}

impl Eq for Type {}

impl Hash for Type {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self.node() {
            Node::End => 0u8.hash(state),
            Node::Var(i, _) => {
                1u8.hash(state);
                i.hash(state);
            }
            Node::Rec(_, b) => {
                2u8.hash(state);
                b.hash(state);
            }
            Node::Comm(d, p, bs) => {
                3u8.hash(state);
                d.hash(state);
                p.hash(state);
                for b in bs {
                    b.label.hash(state);
                    b.sort.hash(state);
                    b.cont.hash(state);
                }
            }
        }
    }
}

impl fmt::Debug for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::syntax::print::write_type(f, self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeError {
    Unbound(Name),
    Unguarded(Name),
    EmptyChoice,
    DuplicateLabel(Name),
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeError::Unbound(v) => write!(f, "unbound recursion variable `{}`", v),
            TypeError::Unguarded(v) => write!(f, "unguarded recursion on `{}`", v),
            TypeError::EmptyChoice => f.write_str("empty branching or selection"),
            TypeError::DuplicateLabel(l) => write!(f, "duplicate label `{}`", l),
        }
    }
}

/// Session types with named recursion variables, as written by users.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawType {
    End,
    Var(Name),
    Rec(Name, alloc::boxed::Box<RawType>),
    Comm(Dir, Name, Vec<(Name, Sort, RawType)>),
}

impl RawType {
    /// Resolves names to indices and validates the result.
    pub fn close(&self) -> Result<Type, TypeError> {
        fn go(t: &RawType, env: &mut Vec<Name>) -> Result<Type, TypeError> {
            Ok(match t {
                RawType::End => Type::end(),
                RawType::Var(v) => match env.iter().rposition(|x| x == v) {
                    Some(pos) => Type::var(env.len() - 1 - pos, v.clone()),
                    None => return Err(TypeError::Unbound(v.clone())),
                },
                RawType::Rec(v, body) => {
                    if matches!(**body, RawType::Var(_)) {
                        return Err(TypeError::Unguarded(v.clone()));
                    }
                    env.push(v.clone());
                    let b = go(body, env);
                    env.pop();
                    Type::rec(v.clone(), b?)
                }
                RawType::Comm(d, p, bs) => {
                    if bs.is_empty() {
                        return Err(TypeError::EmptyChoice);
                    }
                    let mut out = Vec::with_capacity(bs.len());
                    for (l, s, c) in bs {
                        if out.iter().any(|b: &Branch| &b.label == l) {
                            return Err(TypeError::DuplicateLabel(l.clone()));
                        }
                        out.push(Branch { label: l.clone(), sort: *s, cont: go(c, env)? });
                    }
                    Type::comm(*d, p.clone(), out)
                }
            })
        }
        go(self, &mut Vec::new())
    }
}

/// Equality of the (possibly infinite) trees of two closed types.
pub fn type_equal(a: &Type, b: &Type) -> bool {
    let ga = a.to_graph();
    let gb = b.to_graph();
    crate::graph::bisimilar(&ga, ga.root, &gb, gb.root)
}

/// `act(t)`: the peers and directions occurring in the tree of `t`.
pub fn actions(t: &Type) -> ActionSet {
    let g = t.to_graph();
    g.actions_from(g.root)
}

/// `pt(t)`: the peers occurring in the tree of `t`.
pub fn participants(t: &Type) -> BTreeSet<Name> {
    actions(t).into_iter().map(|a| a.peer).collect()
}

/// One queued message type `q!l(S)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MsgType {
    pub to: Name,
    pub label: Name,
    pub sort: Sort,
}

impl fmt::Display for MsgType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}!{}({})", self.to, self.label, self.sort)
    }
}

/// A queue type `σ`. Messages to distinct recipients commute, so the
/// canonical form keeps each recipient's messages in order and sorts the
/// recipients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QueueType(pub Vec<MsgType>);

impl QueueType {
    pub fn empty() -> QueueType {
        QueueType(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn canonical(&self) -> QueueType {
        let mut v = self.0.clone();
        // stable: keeps per-recipient order
        v.sort_by(|a, b| a.to.cmp(&b.to));
        QueueType(v)
    }

    pub fn congruent(&self, other: &QueueType) -> bool {
        self.canonical() == other.canonical()
    }

    /// First message addressed to `to`, if any (its position up to
    /// congruence is the head).
    pub fn head_for(&self, to: &str) -> Option<&MsgType> {
        self.0.iter().find(|m| &*m.to == to)
    }
}

impl fmt::Display for QueueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", m)?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Type {
        Type::parse(s).unwrap()
    }

    #[test]
    fn subsort_table() {
        assert!(subsort(Sort::Nat, Sort::Int));
        assert!(subsort(Sort::Bool, Sort::Bool));
        assert!(!subsort(Sort::Int, Sort::Nat));
        let pairs = Sort::ALL
            .iter()
            .flat_map(|a| Sort::ALL.iter().map(move |b| (*a, *b)))
            .filter(|(a, b)| subsort(*a, *b))
            .count();
        assert_eq!(pairs, 5);
    }

    #[test]
    fn unfold_examples() {
        assert_eq!(t("end").unfold(), t("end"));
        let r = t("rec t . p?l(nat).t");
        assert_eq!(r.unfold(), t("p?l(nat).rec t . p?l(nat).t"));
        let r2 = t("rec t1 . rec t2 . p!l(int).t1");
        assert_eq!(r2.unfold(), t("p!l(int).rec t1 . rec t2 . p!l(int).t1"));
    }

    #[test]
    fn alpha_insensitive() {
        assert_eq!(t("rec x . p!a(nat).x"), t("rec y . p!a(nat).y"));
        assert_ne!(t("rec x . p!a(nat).x"), t("p!a(nat).rec y . p!a(nat).y"));
    }

    #[test]
    fn action_examples() {
        assert!(actions(&t("end")).is_empty());
        let a = actions(&t("rec t . p?l(nat).q?m(int).t"));
        assert_eq!(a.len(), 2);
        assert!(a.contains(&Action::new("p", Dir::In)));
        assert!(a.contains(&Action::new("q", Dir::In)));
        let b = actions(&t("p!l(nat).end"));
        assert_eq!(b.into_iter().collect::<Vec<_>>(), alloc::vec![Action::new("p", Dir::Out)]);
        let ps = participants(&t("rec t . r!l(unit).t"));
        assert_eq!(ps.len(), 1);
    }

    #[test]
    fn equality_examples() {
        assert!(type_equal(&t("rec t . p?l(nat).t"), &t("p?l(nat).rec t . p?l(nat).t")));
        assert!(!type_equal(&t("end"), &t("rec t . p?l(nat).t")));
        assert!(type_equal(&t("rec t . p!a(nat).p!a(nat).t"), &t("rec t . p!a(nat).t")));
    }

    #[test]
    fn queue_congruence() {
        let q = |v: &[(&str, &str)]| {
            QueueType(v.iter().map(|(to, l)| MsgType { to: name(to), label: name(l), sort: Sort::Nat }).collect())
        };
        assert!(q(&[("a", "x"), ("b", "y")]).congruent(&q(&[("b", "y"), ("a", "x")])));
        assert!(!q(&[("a", "x"), ("a", "y")]).congruent(&q(&[("a", "y"), ("a", "x")])));
    }
}
