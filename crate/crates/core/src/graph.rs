//! Finite graphs of regular session trees.
//!
//! Every closed guarded term compiles to a graph whose unfolding is the
//! term's tree. Graphs are what the decomposition, refinement and
//! environment code actually walk; terms are only the user-facing form.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use hashbrown::{HashMap, HashSet};

use crate::types::{name, Action, ActionSet, Dir, Name, Node, RawType, Sort, Type};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GNode {
    End,
    /// Branches sorted by label.
    Comm { dir: Dir, peer: Name, branches: Vec<(Name, Sort, usize)> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeGraph {
    pub nodes: Vec<GNode>,
    pub root: usize,
}

enum Slot {
    Alias(Option<usize>),
    Node(GNode),
}

impl TypeGraph {
    pub fn from_type(t: &Type) -> TypeGraph {
        let mut slots: Vec<Slot> = Vec::new();
        let root = build(t, &mut Vec::new(), &mut slots);
        // resolve aliases; guardedness makes every chain end at a real node
        let resolve = |mut i: usize, slots: &Vec<Slot>| loop {
            match &slots[i] {
                Slot::Alias(Some(j)) => i = *j,
                Slot::Alias(None) => unreachable!("unresolved recursion slot"),
                Slot::Node(_) => return i,
            }
        };
        let mut map: BTreeMap<usize, usize> = BTreeMap::new();
        let mut nodes = Vec::new();
        let mut queue = VecDeque::new();
        let r = resolve(root, &slots);
        map.insert(r, 0);
        nodes.push(GNode::End);
        queue.push_back(r);
        while let Some(i) = queue.pop_front() {
            let id = map[&i];
            let n = match &slots[i] {
                Slot::Node(GNode::End) => GNode::End,
                Slot::Node(GNode::Comm { dir, peer, branches }) => {
                    let mut bs = Vec::with_capacity(branches.len());
                    for (l, s, c) in branches {
                        let c = resolve(*c, &slots);
                        let cid = match map.get(&c) {
                            Some(x) => *x,
                            None => {
                                let x = nodes.len();
                                map.insert(c, x);
                                nodes.push(GNode::End);
                                queue.push_back(c);
                                x
                            }
                        };
                        bs.push((l.clone(), *s, cid));
                    }
                    GNode::Comm { dir: *dir, peer: peer.clone(), branches: bs }
                }
                Slot::Alias(_) => unreachable!(),
            };
            nodes[id] = n;
        }
        TypeGraph { nodes, root: 0 }
    }

    pub fn succs(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let bs: &[(Name, Sort, usize)] = match &self.nodes[i] {
            GNode::End => &[],
            GNode::Comm { branches, .. } => branches,
        };
        bs.iter().map(|b| b.2)
    }

    pub fn reachable(&self, from: usize) -> Vec<usize> {
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(i) = stack.pop() {
            order.push(i);
            for j in self.succs(i) {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        order.sort_unstable();
        order
    }

    pub fn actions_from(&self, from: usize) -> ActionSet {
        let mut acts = ActionSet::new();
        for i in self.reachable(from) {
            if let GNode::Comm { dir, peer, .. } = &self.nodes[i] {
                acts.insert(Action { peer: peer.clone(), dir: *dir });
            }
        }
        acts
    }

    pub fn is_single(&self, d: Dir) -> bool {
        self.reachable(self.root).into_iter().all(|i| match &self.nodes[i] {
            GNode::Comm { dir, branches, .. } if *dir == d => branches.len() == 1,
            _ => true,
        })
    }

    pub fn is_siso(&self) -> bool {
        self.is_single(Dir::In) && self.is_single(Dir::Out)
    }

    /// The term whose tree is the unfolding of the graph at `from`. Binders
    /// are introduced exactly at targets of back edges of a DFS.
    pub fn to_type_at(&self, from: usize) -> Type {
        fn go(g: &TypeGraph, i: usize, stack: &mut Vec<usize>, used: &mut Vec<bool>) -> RawType {
            if stack.contains(&i) {
                used[i] = true;
                return RawType::Var(name(&format!("t{}", i)));
            }
            let body = match &g.nodes[i] {
                GNode::End => return RawType::End,
                GNode::Comm { dir, peer, branches } => {
                    stack.push(i);
                    let bs = branches
                        .iter()
                        .map(|(l, s, c)| (l.clone(), *s, go(g, *c, stack, used)))
                        .collect();
                    stack.pop();
                    RawType::Comm(*dir, peer.clone(), bs)
                }
            };
            if used[i] {
                used[i] = false;
                RawType::Rec(name(&format!("t{}", i)), alloc::boxed::Box::new(body))
            } else {
                body
            }
        }
        let mut used = vec![false; self.nodes.len()];
        go(self, from, &mut Vec::new(), &mut used)
            .close()
            .expect("graph conversion yields closed guarded terms")
    }

    pub fn to_type(&self) -> Type {
        self.to_type_at(self.root)
    }

    /// Minimal graph of the tree at the root, numbered breadth-first in
    /// label order. Two types have equal trees iff their canonical graphs
    /// are identical.
    pub fn canonical(&self) -> TypeGraph {
        let reach = self.reachable(self.root);
        let class = partition(self, &reach);
        // BFS renumbering over classes
        let mut num: HashMap<usize, usize> = HashMap::new();
        let mut rep: Vec<usize> = Vec::new();
        let mut queue = VecDeque::new();
        num.insert(class[&self.root], 0);
        rep.push(self.root);
        queue.push_back(self.root);
        while let Some(i) = queue.pop_front() {
            for j in self.succs(i) {
                let c = class[&j];
                if !num.contains_key(&c) {
                    num.insert(c, rep.len());
                    rep.push(j);
                    queue.push_back(j);
                }
            }
        }
        let nodes = rep
            .iter()
            .map(|&i| match &self.nodes[i] {
                GNode::End => GNode::End,
                GNode::Comm { dir, peer, branches } => GNode::Comm {
                    dir: *dir,
                    peer: peer.clone(),
                    branches: branches.iter().map(|(l, s, c)| (l.clone(), *s, num[&class[c]])).collect(),
                },
            })
            .collect();
        TypeGraph { nodes, root: 0 }
    }
}

fn build(t: &Type, env: &mut Vec<usize>, slots: &mut Vec<Slot>) -> usize {
    match t.node() {
        Node::End => {
            slots.push(Slot::Node(GNode::End));
            slots.len() - 1
        }
        Node::Var(i, _) => env[env.len() - 1 - i],
        Node::Rec(_, body) => {
            let me = slots.len();
            slots.push(Slot::Alias(None));
            env.push(me);
            let b = build(body, env, slots);
            env.pop();
            slots[me] = Slot::Alias(Some(b));
            me
        }
        Node::Comm(d, p, bs) => {
            let me = slots.len();
            slots.push(Slot::Alias(None));
            let branches = bs.iter().map(|b| (b.label.clone(), b.sort, build(&b.cont, env, slots))).collect();
            slots[me] = Slot::Node(GNode::Comm { dir: *d, peer: p.clone(), branches });
            me
        }
    }
}

/// Shape of a node without its successors.
fn shape(n: &GNode) -> (u8, Option<Dir>, Option<Name>, Vec<(Name, Sort)>) {
    match n {
        GNode::End => (0, None, None, Vec::new()),
        GNode::Comm { dir, peer, branches } => {
            (1, Some(*dir), Some(peer.clone()), branches.iter().map(|(l, s, _)| (l.clone(), *s)).collect())
        }
    }
}

/// Moore-style partition refinement to the coarsest bisimulation.
fn partition(g: &TypeGraph, reach: &[usize]) -> HashMap<usize, usize> {
    let mut class: HashMap<usize, usize> = HashMap::new();
    let mut ids: HashMap<_, usize> = HashMap::new();
    for &i in reach {
        let k = shape(&g.nodes[i]);
        let n = ids.len();
        let c = *ids.entry(k).or_insert(n);
        class.insert(i, c);
    }
    let mut count = ids.len();
    loop {
        let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut next: HashMap<usize, usize> = HashMap::new();
        for &i in reach {
            let sig = (class[&i], g.succs(i).map(|j| class[&j]).collect::<Vec<_>>());
            let n = ids.len();
            let c = *ids.entry(sig).or_insert(n);
            next.insert(i, c);
        }
        let new_count = ids.len();
        class = next;
        if new_count == count {
            return class;
        }
        count = new_count;
    }
}

/// Tree equality of two graph positions by product bisimulation.
pub fn bisimilar(ga: &TypeGraph, a: usize, gb: &TypeGraph, b: usize) -> bool {
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut stack = vec![(a, b)];
    while let Some((x, y)) = stack.pop() {
        if !seen.insert((x, y)) {
            continue;
        }
        match (&ga.nodes[x], &gb.nodes[y]) {
            (GNode::End, GNode::End) => {}
            (GNode::Comm { dir: d1, peer: p1, branches: b1 }, GNode::Comm { dir: d2, peer: p2, branches: b2 }) => {
                if d1 != d2 || p1 != p2 || b1.len() != b2.len() {
                    return false;
                }
                for ((l1, s1, c1), (l2, s2, c2)) in b1.iter().zip(b2) {
                    if l1 != l2 || s1 != s2 {
                        return false;
                    }
                    stack.push((*c1, *c2));
                }
            }
            _ => return false,
        }
    }
    true
}

/// Canonical tree key of a type, for deduplication.
pub fn canonical_key(t: &Type) -> TypeGraph {
    t.to_graph().canonical()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::type_equal;

    fn t(s: &str) -> Type {
        Type::parse(s).unwrap()
    }

    #[test]
    fn compile_sizes() {
        assert_eq!(t("end").to_graph().nodes.len(), 1);
        assert_eq!(t("rec x . p!a(nat).x").to_graph().nodes.len(), 1);
        assert_eq!(t("rec x . p!a(nat).q?b(int).x").to_graph().nodes.len(), 2);
        assert_eq!(t("p!a(nat).rec x . p!a(nat).x").to_graph().canonical().nodes.len(), 1);
    }

    #[test]
    fn round_trip_through_graph() {
        for s in [
            "end",
            "rec x . p!a(nat).x",
            "p&{a(nat).end, b(bool).rec y . q+{c.y, d.end}}",
            "rec x . p&{a(nat).x, b(bool).rec y . q+{c.y, d.x}}",
        ] {
            let ty = t(s);
            let back = ty.to_graph().to_type();
            assert!(type_equal(&ty, &back), "{} vs {}", ty, back);
        }
    }

    #[test]
    fn canonical_agrees_with_bisimulation() {
        let a = t("rec x . p!a(nat).p!a(nat).x");
        let b = t("rec x . p!a(nat).x");
        assert_eq!(canonical_key(&a), canonical_key(&b));
        let c = t("rec x . p!a(nat).p!b(nat).x");
        assert_ne!(canonical_key(&a), canonical_key(&c));
        assert!(!type_equal(&a, &c));
    }
}
