//! Asynchronous subtyping `T ≤ T′` by quantified decomposition.
//!
//! `T ≤ T′` holds when for every SO decomposition `U` of `T` and every SI
//! decomposition `V′` of `T′` some `W ∈ [[U]]_SI` and `W′ ∈ [[V′]]_SO` are
//! related by `≲`. The grid of `(U, V′)` cells is evaluated in enumeration
//! order. A cell is refuted with an inductive derivation of `U ≰ V′` built
//! from the shape rules below, which is sound on its own; a cell is proved
//! by a refinement certificate for one SISO pair.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use hashbrown::HashSet;

use crate::decomposition::{input_prefix, is_exhaustive, prepend, si_decompositions, siso_decompositions, so_decompositions};
use crate::graph::{canonical_key, GNode, TypeGraph};
use crate::refinement::{refine, Budget, RefinementCertificate, Refutation, Verdict};
use crate::types::{actions, subsort, type_equal, Action, Branch, Dir, Name, Node, Type};
use crate::word::{Act, Lasso};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    /// Unrolling bound of the outer decompositions.
    pub unroll_bound: usize,
    /// Maximal number of `(U, V′)` cells.
    pub max_pairs: usize,
    pub refine: Budget,
    /// Consecutive certified indices required before generalizing a family.
    pub family_threshold: usize,
    /// SISO pairs tried per cell.
    pub cell_attempts: usize,
    /// Recursive calls allowed to one shape derivation search.
    pub uv_fuel: usize,
}

impl Default for Config {
    fn default() -> Config {
        Config { unroll_bound: 8, max_pairs: 200, refine: Budget::default(), family_threshold: 3, cell_attempts: 256, uv_fuel: 2_000 }
    }
}

/// Rules of the table of shapes of unrelated SO/SI trees, in table order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UvRule {
    OutAct,
    InpAct,
    OutActR,
    InpActR,
    Inp,
    A,
    InOut1,
    InOut2,
    Out,
    C,
}

impl UvRule {
    pub const ALL: [UvRule; 10] = [
        UvRule::OutAct,
        UvRule::InpAct,
        UvRule::OutActR,
        UvRule::InpActR,
        UvRule::Inp,
        UvRule::A,
        UvRule::InOut1,
        UvRule::InOut2,
        UvRule::Out,
        UvRule::C,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            UvRule::OutAct => "n-UV-out-act",
            UvRule::InpAct => "n-UV-inp-act",
            UvRule::OutActR => "n-UV-out-act-R",
            UvRule::InpActR => "n-UV-inp-act-R",
            UvRule::Inp => "n-UV-inp",
            UvRule::A => "n-UV-A",
            UvRule::InOut1 => "n-UV-in-out-1",
            UvRule::InOut2 => "n-UV-in-out-2",
            UvRule::Out => "n-UV-out",
            UvRule::C => "n-UV-C",
        }
    }

    pub fn from_str(s: &str) -> Option<UvRule> {
        UvRule::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

/// A finite derivation of `U ≰ V′`. Premises are the recursive
/// disjuncts actually used; label and sort mismatches need none.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UvDerivation {
    pub rule: UvRule,
    pub lhs: Type,
    pub rhs: Type,
    pub premises: Vec<UvDerivation>,
}

impl UvDerivation {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|d| d.size()).sum::<usize>()
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        writeln!(f, "{:indent$}{}  [{}]  {}", "", self.lhs, self.rule.as_str(), self.rhs, indent = 2 * depth)?;
        for d in &self.premises {
            d.write(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for UvDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

fn head(t: &Type) -> Option<(Dir, &Name, &[Branch])> {
    match t.node() {
        Node::Comm(d, p, bs) => Some((*d, p, bs)),
        _ => None,
    }
}

fn act_of(d: Dir, p: &Name, b: &Branch) -> Act {
    Act { dir: d, peer: p.clone(), label: b.label.clone(), sort: b.sort }
}

/// Holes of a nonempty context `C^p`: the projected prefix leading to each
/// hole and the `p`-selection found there.
fn c_holes(v: &Type, p: &Name) -> Option<Vec<(Vec<Act>, Vec<Branch>)>> {
    fn go(t: &Type, p: &Name, pre: &mut Vec<Act>, out: &mut Vec<(Vec<Act>, Vec<Branch>)>, bound: usize) -> bool {
        if pre.len() > bound {
            return false;
        }
        let t = t.unfold();
        let pout = Action { peer: p.clone(), dir: Dir::Out };
        match t.node() {
            Node::Comm(Dir::Out, q, bs) if q == p => {
                if pre.is_empty() {
                    return false;
                }
                out.push((pre.clone(), bs.clone()));
                true
            }
            Node::Comm(Dir::In, q, bs) if bs.len() == 1 => {
                pre.push(act_of(Dir::In, q, &bs[0]));
                let ok = go(&bs[0].cont, p, pre, out, bound);
                pre.pop();
                ok
            }
            Node::Comm(Dir::Out, r, bs) => {
                for b in bs {
                    if !actions(&b.cont).contains(&pout) {
                        continue;
                    }
                    pre.push(act_of(Dir::Out, r, b));
                    let ok = go(&b.cont, p, pre, out, bound);
                    pre.pop();
                    if !ok {
                        return false;
                    }
                }
                true
            }
            _ => false,
        }
    }
    let mut out = Vec::new();
    go(v, p, &mut Vec::new(), &mut out, 3 * v.size() + 3).then_some(out)
}

struct UvSearch {
    fuel: usize,
    path: HashSet<(TypeGraph, TypeGraph)>,
}

impl UvSearch {
    fn go(&mut self, u: &Type, v: &Type) -> Option<UvDerivation> {
        if self.fuel == 0 {
            return None;
        }
        self.fuel -= 1;
        let key = (canonical_key(u), canonical_key(v));
        if !self.path.insert(key.clone()) {
            // inductive: a derivation never revisits its own goal
            return None;
        }
        let r = self.rules(u, v);
        self.path.remove(&key);
        r
    }

    /// Premises of a matched prefix: every alternative must mismatch in
    /// label or sort, or be refuted recursively.
    fn all_refuted(&mut self, pairs: Vec<(bool, Type, Type)>) -> Option<Vec<UvDerivation>> {
        let mut prem = Vec::new();
        for (matched, a, b) in pairs {
            if matched {
                prem.push(self.go(&a, &b)?);
            }
        }
        Some(prem)
    }

    fn rules(&mut self, u: &Type, v: &Type) -> Option<UvDerivation> {
        let uu = u.unfold();
        let vv = v.unfold();
        let au = actions(&uu);
        let av = actions(&vv);
        let mk = |rule, premises| Some(UvDerivation { rule, lhs: u.clone(), rhs: v.clone(), premises });
        let uh = head(&uu);
        let vh = head(&vv);
        let has = |set: &crate::types::ActionSet, p: &Name, d: Dir| set.contains(&Action { peer: p.clone(), dir: d });

        if let Some((Dir::Out, p, _)) = uh {
            if !has(&av, p, Dir::Out) {
                return mk(UvRule::OutAct, vec![]);
            }
        }
        if let Some((Dir::In, p, _)) = uh {
            if !has(&av, p, Dir::In) {
                return mk(UvRule::InpAct, vec![]);
            }
        }
        if let Some((Dir::Out, p, _)) = vh {
            if !has(&au, p, Dir::Out) {
                return mk(UvRule::OutActR, vec![]);
            }
        }
        if let Some((Dir::In, p, _)) = vh {
            if !has(&au, p, Dir::In) {
                return mk(UvRule::InpActR, vec![]);
            }
        }
        if let (Some((Dir::In, p, ubs)), Some((Dir::In, q, [vb]))) = (uh, vh) {
            if p == q {
                let pairs = ubs
                    .iter()
                    .map(|ub| (ub.label == vb.label && subsort(vb.sort, ub.sort), ub.cont.clone(), vb.cont.clone()))
                    .collect();
                if let Some(prem) = self.all_refuted(pairs) {
                    return mk(UvRule::Inp, prem);
                }
            }
        }
        if let Some((Dir::In, p, ubs)) = uh {
            if let Some((pre, rest)) = input_prefix(&vv, p, false) {
                if let Node::Comm(Dir::In, _, vbs) = rest.node() {
                    let vb = &vbs[0];
                    let pairs = ubs
                        .iter()
                        .map(|ub| (ub.label == vb.label && subsort(vb.sort, ub.sort), ub.cont.clone(), prepend(&pre, vb.cont.clone())))
                        .collect();
                    if let Some(prem) = self.all_refuted(pairs) {
                        return mk(UvRule::A, prem);
                    }
                }
            }
        }
        if let (Some((Dir::In, _, _)), Some((Dir::Out, _, _))) = (uh, vh) {
            return mk(UvRule::InOut1, vec![]);
        }
        if let Some((Dir::In, p, _)) = uh {
            if input_prefix(&vv, p, true).is_some() {
                return mk(UvRule::InOut2, vec![]);
            }
        }
        if let Some((Dir::Out, p, [ub])) = uh {
            if let Some((Dir::Out, q, vbs)) = vh {
                if p == q {
                    let pairs = vbs
                        .iter()
                        .map(|vb| (ub.label == vb.label && subsort(ub.sort, vb.sort), ub.cont.clone(), vb.cont.clone()))
                        .collect();
                    if let Some(prem) = self.all_refuted(pairs) {
                        return mk(UvRule::Out, prem);
                    }
                }
            }
            if let Some(holes) = c_holes(&vv, p) {
                let mut pairs = Vec::new();
                for (pre, vbs) in &holes {
                    for vb in vbs {
                        pairs.push((ub.label == vb.label && subsort(ub.sort, vb.sort), ub.cont.clone(), prepend(pre, vb.cont.clone())));
                    }
                }
                if let Some(prem) = self.all_refuted(pairs) {
                    return mk(UvRule::C, prem);
                }
            }
        }
        None
    }
}

/// Searches an inductive derivation of `U ≰ V′` for an SO term `u` and an
/// SI term `v`. Rules are tried in table order.
pub fn uv_negate(u: &Type, v: &Type, fuel: usize) -> Option<UvDerivation> {
    UvSearch { fuel, path: HashSet::new() }.go(u, v)
}

/// Re-checks a shape derivation rule by rule.
pub fn check_uv(d: &UvDerivation) -> Result<(), String> {
    fn has(t: &Type, p: &Name, d: Dir) -> bool {
        actions(t).contains(&Action { peer: p.clone(), dir: d })
    }
    let uu = d.lhs.unfold();
    let vv = d.rhs.unfold();
    let fail = |why: &str| Err(format!("{}: {} vs {}: {}", d.rule.as_str(), d.lhs, d.rhs, why));
    // the premises the rule demands, as (lhs, rhs) pairs
    let need: Vec<(Type, Type)> = match (d.rule, head(&uu), head(&vv)) {
        (UvRule::OutAct, Some((Dir::Out, p, [_])), _) if !has(&vv, p, Dir::Out) => vec![],
        (UvRule::InpAct, Some((Dir::In, p, _)), _) if !has(&vv, p, Dir::In) => vec![],
        (UvRule::OutActR, _, Some((Dir::Out, p, _))) if !has(&uu, p, Dir::Out) => vec![],
        (UvRule::InpActR, _, Some((Dir::In, p, [_]))) if !has(&uu, p, Dir::In) => vec![],
        (UvRule::Inp, Some((Dir::In, p, ubs)), Some((Dir::In, q, [vb]))) if p == q => ubs
            .iter()
            .filter(|ub| ub.label == vb.label && subsort(vb.sort, ub.sort))
            .map(|ub| (ub.cont.clone(), vb.cont.clone()))
            .collect(),
        (UvRule::A, Some((Dir::In, p, ubs)), _) => match input_prefix(&vv, p, false) {
            Some((pre, rest)) => {
                let Some((_, _, [vb])) = head(&rest) else { return fail("no A-prefix") };
                ubs.iter()
                    .filter(|ub| ub.label == vb.label && subsort(vb.sort, ub.sort))
                    .map(|ub| (ub.cont.clone(), prepend(&pre, vb.cont.clone())))
                    .collect()
            }
            None => return fail("no A-prefix"),
        },
        (UvRule::InOut1, Some((Dir::In, _, _)), Some((Dir::Out, _, _))) => vec![],
        (UvRule::InOut2, Some((Dir::In, p, _)), _) if input_prefix(&vv, p, true).is_some() => vec![],
        (UvRule::Out, Some((Dir::Out, p, [ub])), Some((Dir::Out, q, vbs))) if p == q => vbs
            .iter()
            .filter(|vb| ub.label == vb.label && subsort(ub.sort, vb.sort))
            .map(|vb| (ub.cont.clone(), vb.cont.clone()))
            .collect(),
        (UvRule::C, Some((Dir::Out, p, [ub])), _) => match c_holes(&vv, p) {
            Some(holes) => holes
                .iter()
                .flat_map(|(pre, vbs)| {
                    vbs.iter()
                        .filter(|vb| ub.label == vb.label && subsort(ub.sort, vb.sort))
                        .map(|vb| (ub.cont.clone(), prepend(pre, vb.cont.clone())))
                        .collect::<Vec<_>>()
                })
                .collect(),
            None => return fail("no context"),
        },
        _ => return fail("shape does not match"),
    };
    if need.len() != d.premises.len() {
        return fail("wrong number of premises");
    }
    for ((a, b), sub) in need.iter().zip(&d.premises) {
        if !type_equal(a, &sub.lhs) || !type_equal(b, &sub.rhs) {
            return fail("premise does not match");
        }
        check_uv(sub)?;
    }
    Ok(())
}

/// Proof of one cell.
#[derive(Clone, Debug)]
pub struct CellProof {
    pub u: usize,
    pub v: usize,
    pub w: Lasso,
    pub w2: Lasso,
    pub cert: RefinementCertificate,
}

/// Which side of the grid a family extends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Sub,
    Super,
}

/// `X(n+1) = insert(X(n), pos, word)` on the truncated side, with the
/// witnesses growing the same way and certificates growing by a constant.
#[derive(Clone, Debug)]
pub struct Family {
    pub side: Side,
    pub member: Lasso,
    pub insert_pos: usize,
    pub word: Vec<Act>,
    pub witness_pos: usize,
    pub witness_word: Vec<Act>,
    pub growth: isize,
}

#[derive(Clone, Debug)]
pub struct SubtypeProof {
    /// Set when a synchronous simulation closes the question: the related
    /// pairs of graph nodes of `t` and `t2`.
    pub simulation: Option<Vec<(usize, usize)>>,
    pub cells: Vec<CellProof>,
    pub families: Vec<Family>,
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub u: Type,
    pub v: Type,
    /// Shape derivation; absent only when the cell was refuted by complete
    /// enumeration of both finite SISO sets.
    pub derivation: Option<UvDerivation>,
    /// One refuted SISO pair.
    pub sample: Option<(Lasso, Lasso, Refutation)>,
}

impl Counterexample {
    pub fn rule(&self) -> &'static str {
        self.derivation.as_ref().map(|d| d.rule.as_str()).unwrap_or("exhaustive")
    }
}

#[derive(Clone, Debug)]
pub enum SubtypeVerdict {
    Yes(SubtypeProof),
    No(Box<Counterexample>),
    Unknown(String),
}

impl SubtypeVerdict {
    pub fn answer(&self) -> crate::Answer {
        match self {
            SubtypeVerdict::Yes(_) => crate::Answer::Yes,
            SubtypeVerdict::No(_) => crate::Answer::No,
            SubtypeVerdict::Unknown(_) => crate::Answer::Unknown,
        }
    }
}

enum Cell {
    Yes(Lasso, Lasso, RefinementCertificate),
    No(Counterexample),
    Unknown(String),
}

/// Lazily pulled stream with a buffer.
struct Buffered<I: Iterator<Item = Lasso>> {
    it: I,
    buf: Vec<Lasso>,
    done: bool,
}

impl<I: Iterator<Item = Lasso>> Buffered<I> {
    fn get(&mut self, i: usize) -> Option<&Lasso> {
        while self.buf.len() <= i && !self.done {
            match self.it.next() {
                Some(x) => self.buf.push(x),
                None => self.done = true,
            }
        }
        self.buf.get(i)
    }
}

fn cell(u: &Type, v: &Type, cfg: &Config) -> Cell {
    let inner = cfg.unroll_bound + 2;
    let mut ws = Buffered { it: siso_decompositions(u, inner), buf: Vec::new(), done: false };
    let mut w2s = Buffered { it: siso_decompositions(v, inner), buf: Vec::new(), done: false };
    let mut tried = 0;
    let mut all_no = true;
    let mut sample = None;
    let mut complete = false;
    // dovetail over diagonals so that neither stream starves the other
    'outer: for d in 0.. {
        let mut any = false;
        for i in 0..=d {
            let Some(w) = ws.get(i).cloned() else { continue };
            let Some(w2) = w2s.get(d - i).cloned() else { continue };
            any = true;
            if tried == cfg.cell_attempts {
                break 'outer;
            }
            tried += 1;
            match refine(&w, &w2, &cfg.refine) {
                Verdict::Yes(c) => return Cell::Yes(w, w2, c),
                Verdict::No(r) => {
                    if sample.is_none() {
                        sample = Some((w, w2, r));
                    }
                }
                Verdict::Unknown(_) => all_no = false,
            }
        }
        if !any && ws.done && w2s.done && d > ws.buf.len() + w2s.buf.len() {
            complete = true;
            break;
        }
    }
    if let Some(der) = uv_negate(u, v, cfg.uv_fuel) {
        return Cell::No(Counterexample { u: u.clone(), v: v.clone(), derivation: Some(der), sample });
    }
    let finite = is_exhaustive(u, Dir::In) && is_exhaustive(v, Dir::Out);
    if complete && all_no && finite && tried > 0 {
        return Cell::No(Counterexample { u: u.clone(), v: v.clone(), derivation: None, sample });
    }
    Cell::Unknown(format!("no certificate for {} vs {} after {} SISO pairs", u, v, tried))
}

fn sim_pair_ok(ga: &TypeGraph, x: usize, gb: &TypeGraph, y: usize, mut next: impl FnMut(usize, usize)) -> bool {
    match (&ga.nodes[x], &gb.nodes[y]) {
        (GNode::End, GNode::End) => true,
        (GNode::Comm { dir: d1, peer: p1, branches: b1 }, GNode::Comm { dir: d2, peer: p2, branches: b2 }) if d1 == d2 && p1 == p2 => {
            // outputs: every choice of the subtype exists above; inputs:
            // every branch above is handled below
            let (small, large) = if *d1 == Dir::Out { (b1, b2) } else { (b2, b1) };
            for (l, s, c) in small {
                let Some((_, s2, c2)) = large.iter().find(|b| b.0 == *l) else { return false };
                if !subsort(*s, *s2) {
                    return false;
                }
                if *d1 == Dir::Out {
                    next(*c, *c2)
                } else {
                    next(*c2, *c)
                }
            }
            true
        }
        _ => false,
    }
}

/// Synchronous subtyping (fewer outputs, more inputs, payload sorts
/// co/contravariant) as a simulation between the graphs of `t` and `t2`.
/// It is contained in `≤`: following the outputs of an SO decomposition
/// and the inputs of an SI one gives a common path, related to itself.
/// The relation is forced (labels pick the successor), so one traversal
/// decides it.
pub fn sync_simulation(t: &Type, t2: &Type) -> Option<Vec<(usize, usize)>> {
    let (ga, gb) = (t.to_graph(), t2.to_graph());
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut order = Vec::new();
    let mut stack = vec![(ga.root, gb.root)];
    while let Some((x, y)) = stack.pop() {
        if !seen.insert((x, y)) {
            continue;
        }
        order.push((x, y));
        if !sim_pair_ok(&ga, x, &gb, y, |a, b| stack.push((a, b))) {
            return None;
        }
    }
    Some(order)
}

/// Checks a relation produced by [`sync_simulation`].
pub fn check_simulation(t: &Type, t2: &Type, rel: &[(usize, usize)]) -> Result<(), String> {
    let (ga, gb) = (t.to_graph(), t2.to_graph());
    let set: HashSet<(usize, usize)> = rel.iter().copied().collect();
    if !set.contains(&(ga.root, gb.root)) {
        return Err(String::from("simulation does not relate the roots"));
    }
    for &(x, y) in rel {
        if x >= ga.nodes.len() || y >= gb.nodes.len() {
            return Err(format!("pair ({}, {}) names no nodes", x, y));
        }
        let mut missing = None;
        if !sim_pair_ok(&ga, x, &gb, y, |a, b| {
            if !set.contains(&(a, b)) {
                missing.get_or_insert((a, b));
            }
        }) {
            return Err(format!("pair ({}, {}) is not a simulation step", x, y));
        }
        if let Some((a, b)) = missing {
            return Err(format!("successor pair ({}, {}) of ({}, {}) is missing", a, b, x, y));
        }
    }
    Ok(())
}

/// Decides `t ≤ t2` within the configured bounds.
pub fn subtype(t: &Type, t2: &Type, cfg: &Config) -> SubtypeVerdict {
    if let Some(rel) = sync_simulation(t, t2) {
        return SubtypeVerdict::Yes(SubtypeProof { simulation: Some(rel), cells: Vec::new(), families: Vec::new() });
    }
    let us: Vec<Type> = so_decompositions(t, cfg.unroll_bound).take(cfg.max_pairs + 1).collect();
    let vs: Vec<Type> = si_decompositions(t2, cfg.unroll_bound).take(cfg.max_pairs + 1).collect();
    let mut cells = Vec::new();
    let mut unknown: Option<String> = None;
    let mut count = 0;
    for (i, u) in us.iter().enumerate() {
        for (j, v) in vs.iter().enumerate() {
            if count == cfg.max_pairs {
                return SubtypeVerdict::Unknown(unknown.unwrap_or_else(|| format!("more than {} decomposition pairs", cfg.max_pairs)));
            }
            count += 1;
            match cell(u, v, cfg) {
                Cell::Yes(w, w2, cert) => cells.push(CellProof { u: i, v: j, w, w2, cert }),
                Cell::No(c) => return SubtypeVerdict::No(Box::new(c)),
                Cell::Unknown(why) => {
                    unknown.get_or_insert(why);
                }
            }
        }
    }
    if let Some(why) = unknown {
        return SubtypeVerdict::Unknown(why);
    }
    let ex_u = is_exhaustive(t, Dir::Out);
    let ex_v = is_exhaustive(t2, Dir::In);
    let families = match (ex_u, ex_v) {
        (true, true) => Vec::new(),
        (true, false) => match extend(Side::Super, t2, &us, &vs, &cells, cfg) {
            Ok(f) => f,
            Err(why) => return SubtypeVerdict::Unknown(why),
        },
        (false, true) => match extend(Side::Sub, t, &us, &vs, &cells, cfg) {
            Ok(f) => f,
            Err(why) => return SubtypeVerdict::Unknown(why),
        },
        (false, false) => return SubtypeVerdict::Unknown(String::from("both decomposition sets are infinite")),
    };
    SubtypeVerdict::Yes(SubtypeProof { simulation: None, cells, families })
}

/// The pair `(U, V′)` and shape rule witnessing `t ≰ t2`.
pub fn find_counterexample_pair(t: &Type, t2: &Type, cfg: &Config) -> Option<(Type, Type, &'static str)> {
    match subtype(t, t2, cfg) {
        SubtypeVerdict::No(c) => {
            let rule = c.rule();
            Some((c.u, c.v, rule))
        }
        _ => None,
    }
}

/// `b = insert(a, pos, word)` with the shortest word, then leftmost pos.
fn find_insertion(a: &Lasso, b: &Lasso) -> Option<(usize, Vec<Act>)> {
    for k in 1..=b.stem.len() {
        for pos in 0..=a.stem.len().min(b.stem.len() - k) {
            let word = b.prefix(pos + k)[pos..].to_vec();
            if a.insert(pos, &word) == *b {
                return Some((pos, word));
            }
        }
    }
    None
}

fn remove_at(x: &Lasso, pos: usize, word: &[Act]) -> Option<Lasso> {
    if x.prefix(pos + word.len()).get(pos..)? != word {
        return None;
    }
    let mut stem = x.prefix(pos);
    let rest = x.drop(pos + word.len());
    stem.extend(rest.stem);
    let y = Lasso::new(stem, rest.cycle);
    (y.insert(pos, word) == *x).then_some(y)
}

/// Certifies the members that the bounded enumeration of the truncated
/// side misses: every new member at the next bound must extend a chain of
/// `family_threshold` certified members by the same insertion, with
/// witnesses and certificates growing uniformly, and its own cells must
/// be certified the same way.
fn extend(side: Side, t: &Type, us: &[Type], vs: &[Type], cells: &[CellProof], cfg: &Config) -> Result<Vec<Family>, String> {
    let (known, others) = match side {
        Side::Sub => (us, vs),
        Side::Super => (vs, us),
    };
    let next: Vec<Type> = match side {
        Side::Sub => so_decompositions(t, cfg.unroll_bound + 1).take(cfg.max_pairs + 1).collect(),
        Side::Super => si_decompositions(t, cfg.unroll_bound + 1).take(cfg.max_pairs + 1).collect(),
    };
    let keys: HashSet<TypeGraph> = known.iter().map(canonical_key).collect();
    let fresh: Vec<Type> = next.into_iter().filter(|x| !keys.contains(&canonical_key(x))).collect();
    if fresh.is_empty() {
        return Err(String::from("truncated decomposition without a visible family"));
    }
    if fresh.len() * others.len() > cfg.max_pairs {
        return Err(format!("more than {} family cells", cfg.max_pairs));
    }
    let known_l: Vec<Option<Lasso>> = known.iter().map(Lasso::from_type).collect();
    let cell_of = |k: usize, o: usize| -> Option<&CellProof> {
        cells.iter().find(|c| match side {
            Side::Sub => c.u == k && c.v == o,
            Side::Super => c.v == k && c.u == o,
        })
    };
    let mut families = Vec::new();
    for x in &fresh {
        let Some(xl) = Lasso::from_type(x) else { return Err(format!("{} is not a single path", x)) };
        let mut found = None;
        'cand: for (k, cand) in known_l.iter().enumerate() {
            let Some(top) = cand else { continue };
            let Some((pos, word)) = find_insertion(top, &xl) else { continue };
            // chain top = m_0, m_1 = top minus word, ... all known
            let mut chain = vec![k];
            let mut cur = top.clone();
            while chain.len() < cfg.family_threshold {
                let Some(y) = remove_at(&cur, pos, &word) else { continue 'cand };
                let Some(j) = known_l.iter().position(|m| m.as_ref() == Some(&y)) else { continue 'cand };
                chain.push(j);
                cur = y;
            }
            chain.reverse();
            let mut fams = Vec::new();
            for o in 0..others.len() {
                let proofs: Option<Vec<&CellProof>> = chain.iter().map(|&m| cell_of(m, o)).collect();
                let Some(proofs) = proofs else { continue 'cand };
                let wit = |c: &CellProof| match side {
                    Side::Sub => c.w.clone(),
                    Side::Super => c.w2.clone(),
                };
                let Some((wpos, wword)) = find_insertion(&wit(proofs[0]), &wit(proofs[1])) else { continue 'cand };
                let growth = proofs[1].cert.steps.len() as isize - proofs[0].cert.steps.len() as isize;
                for pair in proofs.windows(2) {
                    if wit(pair[0]).insert(wpos, &wword) != wit(pair[1])
                        || pair[1].cert.steps.len() as isize - pair[0].cert.steps.len() as isize != growth
                        || pair[0].cert.kind() != pair[1].cert.kind()
                    {
                        continue 'cand;
                    }
                }
                let last = proofs[proofs.len() - 1];
                let (cu, cv) = match side {
                    Side::Sub => (x, &others[o]),
                    Side::Super => (&others[o], x),
                };
                let Cell::Yes(w, w2, cert) = cell(cu, cv, cfg) else { continue 'cand };
                let new_wit = match side {
                    Side::Sub => w,
                    Side::Super => w2,
                };
                if wit(last).insert(wpos, &wword) != new_wit
                    || cert.steps.len() as isize - last.cert.steps.len() as isize != growth
                    || cert.kind() != last.cert.kind()
                {
                    continue 'cand;
                }
                fams.push(Family { side, member: xl.clone(), insert_pos: pos, word: word.clone(), witness_pos: wpos, witness_word: wword, growth });
            }
            found = Some(fams);
            break;
        }
        match found {
            Some(f) => families.extend(f),
            None => return Err(format!("no family covers {}", x)),
        }
    }
    Ok(families)
}

impl fmt::Display for SubtypeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubtypeVerdict::Yes(p) => {
                if let Some(rel) = &p.simulation {
                    return writeln!(f, "yes: synchronous simulation of {} node pairs", rel.len());
                }
                writeln!(f, "yes: {} cells certified", p.cells.len())?;
                for c in &p.cells {
                    writeln!(f, "  [{},{}] {} ≲ {}  ({}, {} steps)", c.u, c.v, c.w, c.w2, c.cert.kind(), c.cert.steps.len())?;
                }
                for fam in &p.families {
                    let side = if fam.side == Side::Sub { "subtype" } else { "supertype" };
                    writeln!(
                        f,
                        "  family on the {} side: insert {} at {} (witness: insert {} at {}), +{} steps per member",
                        side,
                        crate::word::word_to_string(&fam.word),
                        fam.insert_pos,
                        crate::word::word_to_string(&fam.witness_word),
                        fam.witness_pos,
                        fam.growth
                    )?;
                }
                Ok(())
            }
            SubtypeVerdict::No(c) => {
                writeln!(f, "no: {}", c.rule())?;
                writeln!(f, "  U  = {}", c.u)?;
                writeln!(f, "  V' = {}", c.v)?;
                if let Some(d) = &c.derivation {
                    for line in format!("{}", d).lines() {
                        writeln!(f, "  {}", line)?;
                    }
                }
                Ok(())
            }
            SubtypeVerdict::Unknown(why) => writeln!(f, "unknown: {}", why),
        }
    }
}
