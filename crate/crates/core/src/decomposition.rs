//! SO, SI and SISO decompositions.
//!
//! A decomposition keeps a single alternative at every selection (SO) or
//! branching (SI). Trees may have infinitely many decompositions, so we
//! enumerate the regular ones produced by choice functions on
//! `(syntactic node, unrolling level)`: the level grows each time a path
//! takes a back edge of the syntactic graph and saturates at the bound,
//! after which the choice repeats forever.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use hashbrown::{HashMap, HashSet};

use crate::graph::{GNode, TypeGraph};
use crate::types::{Dir, Name, Node, Type};
use crate::word::{Act, Lasso};

pub const DEFAULT_UNROLL: usize = 8;

type State = (usize, usize);

/// Lazy, deduplicated stream of decompositions in breadth-first order over
/// partial choice assignments.
pub struct Decompositions {
    g: TypeGraph,
    single: Dir,
    bound: usize,
    queue: VecDeque<BTreeMap<State, usize>>,
    seen: HashSet<TypeGraph>,
}

impl Decompositions {
    fn new(t: &Type, single: Dir, bound: usize) -> Decompositions {
        let mut queue = VecDeque::new();
        queue.push_back(BTreeMap::new());
        Decompositions { g: t.to_graph(), single, bound, queue, seen: HashSet::new() }
    }

    fn is_choice(&self, v: usize) -> Option<usize> {
        match &self.g.nodes[v] {
            GNode::Comm { dir, branches, .. } if *dir == self.single && branches.len() > 1 => Some(branches.len()),
            _ => None,
        }
    }

    /// The product graph of a complete assignment, or the first unassigned
    /// choice state met in BFS order.
    fn explore(&self, asg: &BTreeMap<State, usize>) -> Result<TypeGraph, State> {
        let mut ids: HashMap<State, usize> = HashMap::new();
        let mut order: Vec<State> = vec![(self.g.root, 0)];
        ids.insert((self.g.root, 0), 0);
        let mut nodes = Vec::new();
        let mut k = 0;
        while k < order.len() {
            let (v, lvl) = order[k];
            k += 1;
            let n = match &self.g.nodes[v] {
                GNode::End => GNode::End,
                GNode::Comm { dir, peer, branches } => {
                    let keep: Vec<usize> = match self.is_choice(v) {
                        None => (0..branches.len()).collect(),
                        Some(_) => match asg.get(&(v, lvl)) {
                            Some(&b) => vec![b],
                            None => return Err((v, lvl)),
                        },
                    };
                    let mut bs = Vec::with_capacity(keep.len());
                    for b in keep {
                        let (l, s, c) = &branches[b];
                        let next = if *c <= v { (lvl + 1).min(self.bound) } else { lvl };
                        let st = (*c, next);
                        let id = match ids.get(&st) {
                            Some(&id) => id,
                            None => {
                                let id = order.len();
                                ids.insert(st, id);
                                order.push(st);
                                id
                            }
                        };
                        bs.push((l.clone(), *s, id));
                    }
                    GNode::Comm { dir: *dir, peer: peer.clone(), branches: bs }
                }
            };
            nodes.push(n);
        }
        Ok(TypeGraph { nodes, root: 0 })
    }
}

impl Iterator for Decompositions {
    type Item = Type;

    fn next(&mut self) -> Option<Type> {
        while let Some(asg) = self.queue.pop_front() {
            match self.explore(&asg) {
                Err(st) => {
                    let n = self.is_choice(st.0).unwrap_or(1);
                    for b in 0..n {
                        let mut a = asg.clone();
                        a.insert(st, b);
                        self.queue.push_back(a);
                    }
                }
                Ok(g) => {
                    let c = g.canonical();
                    if self.seen.insert(c.clone()) {
                        return Some(c.to_type());
                    }
                }
            }
        }
        None
    }
}

/// Regular members of `[[t]]_SO`.
pub fn so_decompositions(t: &Type, unroll_bound: usize) -> Decompositions {
    Decompositions::new(t, Dir::Out, unroll_bound)
}

/// Regular members of `[[t]]_SI`.
pub fn si_decompositions(t: &Type, unroll_bound: usize) -> Decompositions {
    Decompositions::new(t, Dir::In, unroll_bound)
}

/// SISO decompositions of an SO or SI term: the complementary
/// decomposition. For a term that is neither, both are applied in turn.
pub fn siso_decompositions(t: &Type, unroll_bound: usize) -> impl Iterator<Item = Lasso> {
    let single = if t.is_so() {
        Dir::In
    } else if t.is_si() {
        Dir::Out
    } else {
        Dir::In
    };
    let first: Vec<Type> = if t.is_so() || t.is_si() { vec![t.clone()] } else { so_decompositions(t, unroll_bound).collect() };
    let mut seen = HashSet::new();
    first
        .into_iter()
        .flat_map(move |u| Decompositions::new(&u, single, unroll_bound))
        .filter_map(|w| Lasso::from_type(&w))
        .filter(move |w| seen.insert(w.clone()))
}

/// True when the bounded stream is the whole decomposition set: no choice
/// of the collapsed direction is reachable from a cycle, so every tree
/// occurrence of a choice has its own syntactic position.
pub fn is_exhaustive(t: &Type, single: Dir) -> bool {
    let g = t.to_graph();
    let cyclic: Vec<usize> = (0..g.nodes.len()).filter(|&v| g.succs(v).any(|s| g.reachable(s).contains(&v))).collect();
    let mut tainted = vec![false; g.nodes.len()];
    for v in cyclic {
        for r in g.reachable(v) {
            tainted[r] = true;
        }
    }
    g.reachable(g.root).into_iter().all(|v| match &g.nodes[v] {
        GNode::Comm { dir, branches, .. } if *dir == single && branches.len() > 1 => !tainted[v],
        _ => true,
    })
}

/// Tree-level membership: is `u` in `[[t]]_SO` (`single = Out`) or
/// `[[t]]_SI` (`single = In`)?
pub fn is_decomposition_of(u: &Type, t: &Type, single: Dir) -> bool {
    let gu = u.to_graph();
    let gt = t.to_graph();
    let mut seen = HashSet::new();
    let mut stack = vec![(gu.root, gt.root)];
    while let Some((a, b)) = stack.pop() {
        if !seen.insert((a, b)) {
            continue;
        }
        match (&gu.nodes[a], &gt.nodes[b]) {
            (GNode::End, GNode::End) => {}
            (GNode::Comm { dir: d1, peer: p1, branches: b1 }, GNode::Comm { dir: d2, peer: p2, branches: b2 }) => {
                if d1 != d2 || p1 != p2 {
                    return false;
                }
                if *d1 == single && b2.len() > 1 {
                    if b1.len() != 1 {
                        return false;
                    }
                } else if b1.len() != b2.len() {
                    return false;
                }
                for (l, s, c) in b1 {
                    match b2.iter().find(|x| &x.0 == l) {
                        Some((_, s2, c2)) if s2 == s => stack.push((*c, *c2)),
                        _ => return false,
                    }
                }
            }
            _ => return false,
        }
    }
    true
}

/// Prefix kinds: `A` is a nonempty run of inputs from peers other than
/// `p`; `B` is a nonempty run of inputs and of outputs to peers other
/// than `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrefixKind {
    A,
    B,
}

/// Factorizations `w = ctx . residual` where `ctx` is an `A` prefix and the
/// residual starts with a `p`-input, or a `B` prefix and the residual
/// starts with a `p`-output. Since the context may not contain the
/// residual's head action there is at most one.
pub fn split_prefix(w: &Lasso, p: &Name, kind: PrefixKind) -> Vec<(Vec<Act>, Lasso)> {
    split_prefix_bounded(w, p, kind, 3 * w.horizon().max(1))
}

pub fn split_prefix_bounded(w: &Lasso, p: &Name, kind: PrefixKind, bound: usize) -> Vec<(Vec<Act>, Lasso)> {
    let target = match kind {
        PrefixKind::A => Dir::In,
        PrefixKind::B => Dir::Out,
    };
    for i in 0..=bound {
        let a = match w.get(i) {
            Some(a) => a,
            None => break,
        };
        if a.peer == *p && a.dir == target {
            if i == 0 {
                break;
            }
            return vec![(w.prefix(i), w.drop(i))];
        }
        let allowed = match kind {
            PrefixKind::A => a.dir == Dir::In,
            PrefixKind::B => a.dir == Dir::In || a.peer != *p,
        };
        if !allowed {
            break;
        }
    }
    Vec::new()
}

/// Removes binders whose variable does not occur.
pub fn mufree(t: &Type) -> Type {
    t.to_graph().to_type()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularizeError {
    pub path: Vec<Name>,
    pub reason: String,
}

impl fmt::Display for RegularizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at path [", self.reason)?;
        for (i, l) in self.path.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(l)?;
        }
        f.write_str("]")
    }
}

/// A regular SO representative of an SO tree of `t` given by `choose`,
/// which maps the labels along a path to the label selected there.
///
/// The top `n` levels follow `choose` exactly. Below them each syntactic
/// selection is frozen to whatever `choose` picks at its first encounter
/// (or its first label when `choose` has no answer), which makes the
/// result regular while keeping its actions among those of the path
/// family.
pub fn regularize_so(choose: &dyn Fn(&[Name]) -> Option<Name>, n: usize, t: &Type) -> Result<Type, RegularizeError> {
    struct Ctx<'a> {
        g: TypeGraph,
        n: usize,
        choose: &'a dyn Fn(&[Name]) -> Option<Name>,
        nodes: Vec<GNode>,
        deep: HashMap<usize, usize>,
        frozen: HashMap<usize, usize>,
    }

    fn go(cx: &mut Ctx<'_>, v: usize, path: &mut Vec<Name>) -> Result<usize, RegularizeError> {
        let d = path.len();
        if d >= cx.n {
            if let Some(&id) = cx.deep.get(&v) {
                return Ok(id);
            }
        }
        let id = cx.nodes.len();
        cx.nodes.push(GNode::End);
        if d >= cx.n {
            cx.deep.insert(v, id);
        }
        let (dir, peer, branches) = match &cx.g.nodes[v] {
            GNode::End => return Ok(id),
            GNode::Comm { dir, peer, branches } => (*dir, peer.clone(), branches.clone()),
        };
        let keep: Vec<usize> = if dir == Dir::Out {
            let pick = (cx.choose)(path);
            let found = pick.as_ref().and_then(|l| branches.iter().position(|b| &b.0 == l));
            if d < cx.n {
                match found {
                    Some(b) => vec![b],
                    None => {
                        let reason = match pick {
                            Some(l) => alloc::format!("label {} is not offered", l),
                            None => String::from("no choice given"),
                        };
                        return Err(RegularizeError { path: path.clone(), reason });
                    }
                }
            } else {
                let b = *cx.frozen.entry(v).or_insert(found.unwrap_or(0));
                vec![b]
            }
        } else {
            (0..branches.len()).collect()
        };
        let mut bs = Vec::new();
        for b in keep {
            let (l, s, c) = &branches[b];
            path.push(l.clone());
            let cid = go(cx, *c, path)?;
            path.pop();
            bs.push((l.clone(), *s, cid));
        }
        cx.nodes[id] = GNode::Comm { dir, peer, branches: bs };
        Ok(id)
    }

    let mut cx = Ctx { g: t.to_graph(), n, choose, nodes: Vec::new(), deep: HashMap::new(), frozen: HashMap::new() };
    let root = cx.g.root;
    go(&mut cx, root, &mut Vec::new())?;
    Ok(TypeGraph { nodes: cx.nodes, root: 0 }.canonical().to_type())
}

/// Splits an SI term `A.p?l(S).rest` into its nonempty input prefix from
/// peers other than `p`, and what follows it. `want_output` instead asks
/// for the prefix to end at an output (of any peer).
pub(crate) fn input_prefix(t: &Type, p: &Name, want_output: bool) -> Option<(Vec<Act>, Type)> {
    let mut pre = Vec::new();
    let mut cur = t.unfold();
    let bound = 3 * t.size() + 3;
    while pre.len() <= bound {
        match cur.node() {
            Node::Comm(Dir::In, q, bs) if bs.len() == 1 => {
                if q == p {
                    return (!want_output && !pre.is_empty()).then_some((pre, cur.clone()));
                }
                let b = &bs[0];
                pre.push(Act { dir: Dir::In, peer: q.clone(), label: b.label.clone(), sort: b.sort });
                cur = b.cont.unfold();
            }
            Node::Comm(Dir::Out, ..) => return (want_output && !pre.is_empty()).then_some((pre, cur.clone())),
            _ => return None,
        }
    }
    None
}

/// `w1...wk.t` for singleton letters `w`.
pub(crate) fn prepend(prefix: &[Act], t: Type) -> Type {
    prefix.iter().rev().fold(t, |acc, a| Type::single(a.dir, a.peer.clone(), a.label.clone(), a.sort, acc))
}
