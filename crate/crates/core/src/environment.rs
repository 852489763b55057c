//! Typing environments `Γ`: their asynchronous reductions, fair paths and
//! liveness.
//!
//! Liveness is checked on a finite graph. Queues hold at most `K` messages
//! per recipient; a longer queue keeps its first `K` messages plus an
//! overflow mark, and consuming from a marked queue may reveal any message
//! the sender can produce. This over-approximates the real reductions while
//! keeping enabledness and the liveness obligations exact, so the absence of
//! a bad lasso proves liveness. A bad lasso is reported only when it stays on
//! states without overflow marks; otherwise the answer is unknown.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;

use crate::graph::{GNode, TypeGraph};
use crate::subtyping::{self, SubtypeVerdict};
use crate::types::{name, subsort, Dir, MsgType, Name, Node, QueueType, Sort, Type};

/// `Γ`: participant ↦ (queue type, session type). Missing participants
/// stand for `(ε, end)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingEnv {
    pub entries: BTreeMap<Name, (QueueType, Type)>,
}

impl TypingEnv {
    pub fn new() -> TypingEnv {
        TypingEnv::default()
    }

    pub fn with(mut self, p: &str, q: QueueType, t: Type) -> TypingEnv {
        self.entries.insert(name(p), (q, t));
        self
    }

    pub fn parse(src: &str) -> Result<TypingEnv, crate::syntax::ParseError> {
        crate::syntax::parse_env(src)
    }

    pub fn get(&self, p: &str) -> (QueueType, Type) {
        self.entries.get(p).cloned().unwrap_or((QueueType::empty(), Type::end()))
    }

    fn is_idle(q: &QueueType, t: &Type) -> bool {
        q.is_empty() && t.unfold().is_end()
    }

    /// Congruence: entries agree up to queue congruence and tree equality;
    /// entries present on one side only must be `(ε, end)`.
    pub fn congruent(&self, other: &TypingEnv) -> bool {
        let keys: BTreeSet<&Name> = self.entries.keys().chain(other.entries.keys()).collect();
        keys.into_iter().all(|p| {
            let (q1, t1) = self.get(p);
            let (q2, t2) = other.get(p);
            q1.congruent(&q2) && crate::types::type_equal(&t1, &t2)
        })
    }
}

impl fmt::Display for TypingEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::syntax::print::write_env(f, self)
    }
}

/// `α`: `p:q!ℓ` or `p:q?ℓ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnvLabel {
    pub who: Name,
    pub peer: Name,
    pub dir: Dir,
    pub label: Name,
}

impl fmt::Display for EnvLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}{}{}", self.who, self.peer, self.dir.symbol(), self.label)
    }
}

/// All one-step reducts (rules e-send and e-rcv, up to congruence).
pub fn env_step(g: &TypingEnv) -> Vec<(EnvLabel, TypingEnv)> {
    let mut out = Vec::new();
    for (p, (q, t)) in &g.entries {
        let t = t.unfold();
        let Node::Comm(dir, peer, bs) = t.node() else { continue };
        match dir {
            Dir::Out => {
                for b in bs {
                    let mut q2 = q.clone();
                    q2.0.push(MsgType { to: peer.clone(), label: b.label.clone(), sort: b.sort });
                    let mut g2 = g.clone();
                    g2.entries.insert(p.clone(), (q2.canonical(), b.cont.clone()));
                    out.push((EnvLabel { who: p.clone(), peer: peer.clone(), dir: Dir::Out, label: b.label.clone() }, g2));
                }
            }
            Dir::In => {
                let (sq, st) = g.get(peer);
                let Some(i) = sq.0.iter().position(|m| m.to == *p) else { continue };
                let m = &sq.0[i];
                let Some(b) = bs.iter().find(|b| b.label == m.label && subsort(m.sort, b.sort)) else { continue };
                let mut sq2 = sq.clone();
                sq2.0.remove(i);
                let mut g2 = g.clone();
                g2.entries.insert(peer.clone(), (sq2.canonical(), st));
                g2.entries.insert(p.clone(), (q.clone(), b.cont.clone()));
                out.push((EnvLabel { who: p.clone(), peer: peer.clone(), dir: Dir::In, label: m.label.clone() }, g2));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LiveConfig {
    /// Messages kept per (sender, recipient) queue before abstraction.
    pub queue_bound: usize,
    /// Maximal number of abstract states explored.
    pub max_states: usize,
}

impl Default for LiveConfig {
    fn default() -> LiveConfig {
        LiveConfig { queue_bound: 4, max_states: 200_000 }
    }
}

/// A liveness obligation that a path can leave pending forever.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Obligation {
    /// L1: `from` has a queued message `label` for `to` that is never read.
    Consume { from: Name, to: Name, label: Name },
    /// L2: `who` waits for a message from `from` and never receives one.
    Receive { who: Name, from: Name },
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obligation::Consume { from, to, label } => {
                write!(f, "L1: message {} from {} is never received by {}", label, from, to)
            }
            Obligation::Receive { who, from } => write!(f, "L2: {} waits forever for {}", who, from),
        }
    }
}

/// A fair path that is not live: `stem` followed by `cycle` repeated (or a
/// stuck state when `cycle` is empty).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LivenessWitness {
    pub stem: Vec<EnvLabel>,
    pub cycle: Vec<EnvLabel>,
    pub violated: Obligation,
}

impl fmt::Display for LivenessWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[EnvLabel]| v.iter().map(|a| format!("{}", a)).collect::<Vec<_>>().join(" ");
        write!(f, "stem: [{}]  cycle: [{}]  ({})", join(&self.stem), join(&self.cycle), self.violated)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Liveness {
    Live,
    NotLive(LivenessWitness),
    Unknown(String),
}

impl Liveness {
    pub fn answer(&self) -> crate::Answer {
        match self {
            Liveness::Live => crate::Answer::Yes,
            Liveness::NotLive(_) => crate::Answer::No,
            Liveness::Unknown(_) => crate::Answer::Unknown,
        }
    }
}

/// Abstract queue toward one recipient: first messages plus overflow mark.
type AQueue = (Vec<(Name, Sort)>, bool);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct AState {
    nodes: Vec<usize>,
    queues: Vec<BTreeMap<Name, AQueue>>,
}

impl AState {
    fn concrete(&self) -> bool {
        self.queues.iter().all(|qs| qs.values().all(|q| !q.1))
    }
}

/// Fairness key of a rule instance: sends are keyed by (who, peer), receives
/// by (who, peer, label).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Key(Name, Name, Dir, Option<Name>);

fn key_of(a: &EnvLabel) -> Key {
    match a.dir {
        Dir::Out => Key(a.who.clone(), a.peer.clone(), Dir::Out, None),
        Dir::In => Key(a.who.clone(), a.peer.clone(), Dir::In, Some(a.label.clone())),
    }
}

struct Model {
    names: Vec<Name>,
    graphs: Vec<TypeGraph>,
    /// (sender index, recipient) ↦ messages the sender may ever produce.
    produce: BTreeMap<(usize, Name), BTreeSet<(Name, Sort)>>,
    k: usize,
}

impl Model {
    fn new(g: &TypingEnv, k: usize) -> (Model, AState) {
        let names: Vec<Name> = g.entries.keys().cloned().collect();
        let mut graphs = Vec::new();
        let mut produce: BTreeMap<(usize, Name), BTreeSet<(Name, Sort)>> = BTreeMap::new();
        let mut queues = Vec::new();
        for (i, (q, t)) in g.entries.values().enumerate() {
            let gr = t.to_graph().canonical();
            for n in &gr.nodes {
                if let GNode::Comm { dir: Dir::Out, peer, branches } = n {
                    for (l, s, _) in branches {
                        produce.entry((i, peer.clone())).or_default().insert((l.clone(), *s));
                    }
                }
            }
            let mut qs: BTreeMap<Name, AQueue> = BTreeMap::new();
            for m in &q.0 {
                produce.entry((i, m.to.clone())).or_default().insert((m.label.clone(), m.sort));
                let e = qs.entry(m.to.clone()).or_default();
                if e.0.len() < k && !e.1 {
                    e.0.push((m.label.clone(), m.sort));
                } else {
                    e.1 = true;
                }
            }
            queues.push(qs);
            graphs.push(gr);
        }
        let init = AState { nodes: graphs.iter().map(|g| g.root).collect(), queues };
        (Model { names, graphs, produce, k }, init)
    }

    fn index(&self, p: &Name) -> Option<usize> {
        self.names.binary_search(p).ok()
    }

    fn succ(&self, s: &AState) -> Vec<(EnvLabel, AState)> {
        let mut out = Vec::new();
        for (i, &n) in s.nodes.iter().enumerate() {
            let GNode::Comm { dir, peer, branches } = &self.graphs[i].nodes[n] else { continue };
            let who = self.names[i].clone();
            match dir {
                Dir::Out => {
                    for (l, srt, c) in branches {
                        let mut s2 = s.clone();
                        s2.nodes[i] = *c;
                        let q = s2.queues[i].entry(peer.clone()).or_default();
                        if q.0.len() < self.k && !q.1 {
                            q.0.push((l.clone(), *srt));
                        } else {
                            q.1 = true;
                        }
                        out.push((EnvLabel { who: who.clone(), peer: peer.clone(), dir: Dir::Out, label: l.clone() }, s2));
                    }
                }
                Dir::In => {
                    let Some(j) = self.index(peer) else { continue };
                    let Some(q) = s.queues[j].get(&who) else { continue };
                    let Some((l, srt)) = q.0.first() else { continue };
                    let Some((_, _, c)) = branches.iter().find(|b| b.0 == *l && subsort(*srt, b.1)) else {
                        continue;
                    };
                    let label = EnvLabel { who: who.clone(), peer: peer.clone(), dir: Dir::In, label: l.clone() };
                    let mut s2 = s.clone();
                    s2.nodes[i] = *c;
                    let mut rest = q.0[1..].to_vec();
                    if q.1 {
                        let cands = self.produce.get(&(j, who.clone())).cloned().unwrap_or_default();
                        for m in cands {
                            for flag in [true, false] {
                                let mut s3 = s2.clone();
                                let mut r = rest.clone();
                                r.push(m.clone());
                                s3.queues[j].insert(who.clone(), (r, flag));
                                out.push((label.clone(), s3));
                            }
                        }
                    } else {
                        if rest.is_empty() {
                            s2.queues[j].remove(&who);
                        } else {
                            s2.queues[j].insert(who.clone(), (core::mem::take(&mut rest), false));
                        }
                        out.push((label, s2));
                    }
                }
            }
        }
        out
    }

    fn obligations(&self, s: &AState) -> Vec<Obligation> {
        let mut out = Vec::new();
        for (i, qs) in s.queues.iter().enumerate() {
            for (to, q) in qs {
                if let Some((l, _)) = q.0.first() {
                    out.push(Obligation::Consume { from: self.names[i].clone(), to: to.clone(), label: l.clone() });
                }
            }
        }
        for (i, &n) in s.nodes.iter().enumerate() {
            if let GNode::Comm { dir: Dir::In, peer, .. } = &self.graphs[i].nodes[n] {
                out.push(Obligation::Receive { who: self.names[i].clone(), from: peer.clone() });
            }
        }
        out
    }
}

fn discharges(o: &Obligation, a: &EnvLabel) -> bool {
    match o {
        Obligation::Consume { from, to, label } => {
            a.dir == Dir::In && a.who == *to && a.peer == *from && a.label == *label
        }
        Obligation::Receive { who, from } => a.dir == Dir::In && a.who == *who && a.peer == *from,
    }
}

struct Explored {
    states: Vec<AState>,
    edges: Vec<Vec<(EnvLabel, usize)>>,
    expanded: Vec<bool>,
    cut: bool,
}

fn explore(m: &Model, init: AState, max: usize) -> Explored {
    let mut index: HashMap<AState, usize> = HashMap::new();
    let mut ex = Explored { states: vec![init.clone()], edges: vec![Vec::new()], expanded: vec![false], cut: false };
    index.insert(init, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let mut es = Vec::new();
        for (a, s2) in m.succ(&ex.states[i]) {
            let j = match index.get(&s2) {
                Some(&j) => j,
                None => {
                    let j = ex.states.len();
                    index.insert(s2.clone(), j);
                    ex.states.push(s2);
                    ex.edges.push(Vec::new());
                    ex.expanded.push(false);
                    if j < max {
                        queue.push_back(j);
                    } else {
                        ex.cut = true;
                    }
                    j
                }
            };
            es.push((a, j));
        }
        ex.edges[i] = es;
        ex.expanded[i] = true;
    }
    ex
}

/// Tarjan's algorithm over the nodes in `alive` and edges accepted by `ok`.
/// Returns nontrivial components only.
fn sccs(ex: &Explored, alive: &[bool], ok: &dyn Fn(usize, &EnvLabel, usize) -> bool) -> Vec<Vec<usize>> {
    let n = ex.states.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if !alive[root] || index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on[root] = true;
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei < ex.edges[v].len() {
                let (a, w) = &ex.edges[v][*ei];
                *ei += 1;
                let w = *w;
                if !alive[w] || !ok(v, a, w) {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on[w] = true;
                    call.push((w, 0));
                } else if on[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    let nontrivial = comp.len() > 1 || ex.edges[v].iter().any(|(a, w)| *w == v && ok(v, a, v));
                    if nontrivial {
                        out.push(comp);
                    }
                }
            }
        }
    }
    out
}

/// Largest fair sub-components avoiding edges that discharge `o`, and
/// containing a state where `o` is pending.
fn fair_bad_component(ex: &Explored, m: &Model, base: &[bool], o: &Obligation) -> Option<Vec<usize>> {
    let ok = |_: usize, a: &EnvLabel, _: usize| !discharges(o, a);
    let mut alive = base.to_vec();
    loop {
        let comps = sccs(ex, &alive, &ok);
        let mut member = vec![false; ex.states.len()];
        for c in &comps {
            for &v in c {
                member[v] = true;
            }
        }
        let mut removed = false;
        let mut keep = vec![false; ex.states.len()];
        for c in &comps {
            let inside: BTreeSet<usize> = c.iter().copied().collect();
            let mut fired: BTreeSet<Key> = BTreeSet::new();
            for &v in c {
                for (a, w) in &ex.edges[v] {
                    if inside.contains(w) && ok(v, a, *w) {
                        fired.insert(key_of(a));
                    }
                }
            }
            for &v in c {
                if ex.edges[v].iter().all(|(a, _)| fired.contains(&key_of(a))) {
                    keep[v] = true;
                } else {
                    removed = true;
                }
            }
        }
        if !removed {
            return comps.into_iter().find(|c| c.iter().any(|&v| m.obligations(&ex.states[v]).contains(o)));
        }
        for v in 0..alive.len() {
            alive[v] = alive[v] && keep[v];
        }
    }
}

/// Shortest path from `from` to a state satisfying `to`, using edges that
/// `ok` accepts. Returns the edges taken (label, target) and the end state.
fn bfs(
    ex: &Explored,
    from: usize,
    to: &dyn Fn(usize) -> bool,
    ok: &dyn Fn(&EnvLabel, usize) -> bool,
) -> Option<(Vec<(EnvLabel, usize)>, usize)> {
    let mut prev: Vec<Option<(usize, EnvLabel)>> = vec![None; ex.states.len()];
    let mut seen = vec![false; ex.states.len()];
    let mut q = VecDeque::from([from]);
    seen[from] = true;
    while let Some(v) = q.pop_front() {
        if to(v) {
            let mut path = Vec::new();
            let mut cur = v;
            while let Some((u, a)) = prev[cur].clone() {
                path.push((a, cur));
                cur = u;
            }
            path.reverse();
            return Some((path, v));
        }
        for (a, w) in &ex.edges[v] {
            if ok(a, *w) && !seen[*w] {
                seen[*w] = true;
                prev[*w] = Some((v, a.clone()));
                q.push_back(*w);
            }
        }
    }
    None
}

fn bfs_path(ex: &Explored, allowed: &[bool], from: usize, to: &dyn Fn(usize) -> bool) -> Option<(Vec<EnvLabel>, usize)> {
    bfs(ex, from, to, &|_, w| allowed[w]).map(|(p, v)| (p.into_iter().map(|x| x.0).collect(), v))
}

/// A closed walk from `start` inside `comp` firing every instance enabled
/// at the states it visits.
fn fair_cycle(ex: &Explored, comp: &[usize], start: usize, o: &Obligation) -> Vec<EnvLabel> {
    let mut inside = vec![false; ex.states.len()];
    for &v in comp {
        inside[v] = true;
    }
    let ok = |a: &EnvLabel, w: usize| inside[w] && !discharges(o, a);
    let mut walk: Vec<EnvLabel> = Vec::new();
    let mut needed: BTreeSet<Key> = BTreeSet::new();
    let mut fired: BTreeSet<Key> = BTreeSet::new();
    let visit = |v: usize, needed: &mut BTreeSet<Key>| {
        for (a, _) in &ex.edges[v] {
            needed.insert(key_of(a));
        }
    };
    visit(start, &mut needed);
    let mut cur = start;
    loop {
        let missing: Option<Key> = needed.difference(&fired).next().cloned();
        let (mut path, at) = match &missing {
            None if cur == start && !walk.is_empty() => return walk,
            None => match bfs(ex, cur, &|v| v == start, &ok) {
                Some(x) => x,
                None => return walk,
            },
            Some(k) => {
                let has = |v: usize| ex.edges[v].iter().any(|(a, w)| ok(a, *w) && key_of(a) == *k);
                match bfs(ex, cur, &has, &ok) {
                    Some(x) => x,
                    None => return walk,
                }
            }
        };
        if let Some(k) = &missing {
            let e = ex.edges[at].iter().find(|(a, w)| ok(a, *w) && key_of(a) == *k).cloned().expect("edge exists");
            path.push(e);
        }
        for (a, w) in path {
            fired.insert(key_of(&a));
            walk.push(a);
            visit(w, &mut needed);
            cur = w;
        }
    }
}

/// Searches a fair non-live path among the states marked in `base`.
fn find_bad(ex: &Explored, m: &Model, base: &[bool]) -> Option<LivenessWitness> {
    // stuck states with a pending obligation
    for v in 0..ex.states.len() {
        if base[v] && ex.expanded[v] && ex.edges[v].is_empty() {
            if let Some(o) = m.obligations(&ex.states[v]).into_iter().next() {
                let (stem, _) = bfs_path(ex, base, 0, &|x| x == v)?;
                return Some(LivenessWitness { stem, cycle: Vec::new(), violated: o });
            }
        }
    }
    let mut obls: BTreeSet<Obligation> = BTreeSet::new();
    for v in 0..ex.states.len() {
        if base[v] {
            obls.extend(m.obligations(&ex.states[v]));
        }
    }
    for o in obls {
        if let Some(comp) = fair_bad_component(ex, m, base, &o) {
            let pending: BTreeSet<usize> =
                comp.iter().copied().filter(|&v| m.obligations(&ex.states[v]).contains(&o)).collect();
            let (stem, entry) = bfs_path(ex, base, 0, &|x| pending.contains(&x))?;
            let cycle = fair_cycle(ex, &comp, entry, &o);
            return Some(LivenessWitness { stem, cycle, violated: o });
        }
    }
    None
}

/// Decides liveness of `g` (see the module documentation for the
/// treatment of long queues).
pub fn check_live(g: &TypingEnv, cfg: &LiveConfig) -> Liveness {
    let (m, init) = Model::new(g, cfg.queue_bound.max(1));
    let ex = explore(&m, init, cfg.max_states);
    let n = ex.states.len();
    // concrete part: reachable from the initial state through concrete
    // states only, and fully expanded
    let mut concrete = vec![false; n];
    if ex.states[0].concrete() {
        let mut q = VecDeque::from([0usize]);
        concrete[0] = true;
        while let Some(v) = q.pop_front() {
            for (_, w) in &ex.edges[v] {
                if !concrete[*w] && ex.states[*w].concrete() {
                    concrete[*w] = true;
                    q.push_back(*w);
                }
            }
        }
    }
    for v in 0..n {
        concrete[v] = concrete[v] && ex.expanded[v];
    }
    if let Some(w) = find_bad(&ex, &m, &concrete) {
        return Liveness::NotLive(w);
    }
    let all: Vec<bool> = ex.expanded.clone();
    if find_bad(&ex, &m, &all).is_some() {
        return Liveness::Unknown(String::from("a fair non-live path exists in the queue abstraction only"));
    }
    if ex.cut {
        return Liveness::Unknown(format!("state budget of {} exhausted", cfg.max_states));
    }
    Liveness::Live
}

/// Outcome of replacing one entry of a live environment by a subtype.
#[derive(Clone, Debug)]
pub struct EntryRefinement {
    pub subtype: SubtypeVerdict,
    pub before: Liveness,
    pub after: Liveness,
    /// True when the entry is a subtype and the original was live, so the
    /// new environment must be live as well.
    pub predicted_live: bool,
    /// Prediction contradicted by the model checker.
    pub alarm: bool,
}

pub fn refine_entry_live(
    g: &TypingEnv,
    p: &str,
    replacement: (QueueType, Type),
    live: &LiveConfig,
    sub: &subtyping::Config,
) -> EntryRefinement {
    let (q0, t0) = g.get(p);
    let mut sv = subtyping::subtype(&replacement.1, &t0, sub);
    if !replacement.0.congruent(&q0) && sv.answer() == crate::Answer::Yes {
        sv = SubtypeVerdict::Unknown(String::from("queue types differ"));
    }
    let before = check_live(g, live);
    let mut g2 = g.clone();
    let (q1, t1) = replacement;
    if TypingEnv::is_idle(&q1, &t1) && !g.entries.contains_key(p) {
        // nothing to add
    } else {
        g2.entries.insert(name(p), (q1, t1));
    }
    let after = check_live(&g2, live);
    let predicted_live = sv.answer() == crate::Answer::Yes && before == Liveness::Live;
    let alarm = predicted_live && matches!(after, Liveness::NotLive(_));
    EntryRefinement { subtype: sv, before, after, predicted_live, alarm }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(s: &str) -> TypingEnv {
        TypingEnv::parse(s).unwrap()
    }

    #[test]
    fn single_steps() {
        let g = env("p : [] q!l(nat).end\nq : [] p?l(nat).end");
        let s = env_step(&g);
        assert_eq!(s.len(), 1);
        assert_eq!(format!("{}", s[0].0), "p:q!l");
        let s2 = env_step(&s[0].1);
        assert_eq!(s2.len(), 1);
        assert_eq!(format!("{}", s2[0].0), "q:p?l");
        let g = env("p : [q!m(nat)] end\nq : [] p?l(nat).end");
        assert!(env_step(&g).is_empty());
    }

    #[test]
    fn producer_consumer_is_live() {
        let g = env("p : [] rec t . q!l(nat).t\nq : [] rec t . p?l(nat).t");
        assert_eq!(check_live(&g, &LiveConfig::default()), Liveness::Live);
        assert_eq!(check_live(&env("p : [] end"), &LiveConfig::default()), Liveness::Live);
    }

    #[test]
    fn starving_participant() {
        let g = env(
            "p : [] rec t . q+{l(nat).t, m(nat).r!m(nat).t}\n\
             q : [] rec t . p&{l(nat).t, m(nat).t}\n\
             r : [] rec t . p?m(nat).t",
        );
        let Liveness::NotLive(w) = check_live(&g, &LiveConfig::default()) else { panic!() };
        assert_eq!(w.violated, Obligation::Receive { who: name("r"), from: name("p") });
        assert!(w.cycle.iter().all(|a| &*a.who != "r"));
        assert!(!w.cycle.is_empty());
    }

    #[test]
    fn orphan_message() {
        let g = env("p : [q!l(nat)] end\nq : [] end");
        let Liveness::NotLive(w) = check_live(&g, &LiveConfig::default()) else { panic!() };
        assert!(w.cycle.is_empty());
        assert!(matches!(w.violated, Obligation::Consume { .. }));
    }
}
