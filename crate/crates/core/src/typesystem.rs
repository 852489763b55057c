//! Typing of expressions, processes, queues and sessions.
//!
//! A process is checked against a target type by first synthesising a
//! minimal type for it (one communication per prefix) and then asking one
//! subtyping query, which plays the role of subsumption at the root.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::calculus::{Expr, Process, Queue, Session, Value};
use crate::environment::TypingEnv;
use crate::subtyping::{self, SubtypeVerdict};
use crate::types::{name, subsort, type_equal, Dir, MsgType, Name, Node, QueueType, RawType, Sort, Type};
use crate::Answer;

/// `Θ`: process variables and value variables in scope.
#[derive(Clone, Debug, Default)]
pub struct VarEnv {
    pub procs: BTreeMap<Name, Type>,
    pub vals: BTreeMap<Name, Sort>,
}

impl VarEnv {
    pub fn new() -> VarEnv {
        VarEnv::default()
    }
}

pub fn value_sort(v: &Value) -> Sort {
    match v {
        Value::Int(n) if *n > 0 => Sort::Nat,
        Value::Int(_) => Sort::Int,
        Value::Bool(_) => Sort::Bool,
        Value::Unit => Sort::Unit,
    }
}

/// Principal sort of an expression, if it is typable.
pub fn type_expr(vals: &BTreeMap<Name, Sort>, e: &Expr) -> Option<Sort> {
    let arg = |e: &Expr, want: Sort| type_expr(vals, e).filter(|s| subsort(*s, want));
    match e {
        Expr::Var(x) => vals.get(x).copied(),
        Expr::Val(v) => Some(value_sort(v)),
        Expr::Succ(e) => arg(e, Sort::Nat).map(|_| Sort::Nat),
        Expr::Inv(e) => arg(e, Sort::Int).map(|_| Sort::Int),
        Expr::Not(e) => arg(e, Sort::Bool).map(|_| Sort::Bool),
        Expr::Pos(e) => arg(e, Sort::Int).map(|_| Sort::Bool),
        Expr::IsUnit(e) => arg(e, Sort::Unit).map(|_| Sort::Bool),
    }
}

/// Principal queue type: each message typed by the sort of its value.
pub fn type_queue(h: &Queue) -> QueueType {
    QueueType(h.0.iter().map(|m| MsgType { to: m.to.clone(), label: m.label.clone(), sort: value_sort(&m.value) }).collect())
}

/// `⊢ h : σ`, up to congruence and subsorting of payloads.
pub fn queue_has_type(h: &Queue, sigma: &QueueType) -> bool {
    let a = type_queue(h).canonical();
    let b = sigma.canonical();
    a.0.len() == b.0.len() && a.0.iter().zip(&b.0).all(|(x, y)| x.to == y.to && x.label == y.label && subsort(x.sort, y.sort))
}

/// A node of a typing derivation. Types of inner nodes may mention the
/// enclosing recursion variables.
#[derive(Clone, Debug)]
pub struct TypeDerivation {
    pub rule: &'static str,
    pub subject: String,
    pub ty: String,
    pub children: Vec<TypeDerivation>,
    /// The subtyping query `(synthesized, target)` and its verdict,
    /// justifying a `t-sub` step.
    pub sub: Option<(Type, Type, SubtypeVerdict)>,
}

impl TypeDerivation {
    fn leaf(rule: &'static str, subject: String, ty: String) -> TypeDerivation {
        TypeDerivation { rule, subject, ty, children: Vec::new(), sub: None }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.size()).sum::<usize>()
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        for _ in 0..depth {
            f.write_str("  ")?;
        }
        let mut subj = self.subject.clone();
        if subj.chars().count() > 60 {
            subj = subj.chars().take(57).collect::<String>() + "...";
        }
        writeln!(f, "[{}] {} : {}", self.rule, subj, self.ty)?;
        for c in &self.children {
            c.write(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for TypeDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

#[derive(Clone, Debug)]
pub enum Typing {
    Derived(TypeDerivation),
    Fails(String),
    Unknown(String),
}

impl Typing {
    pub fn answer(&self) -> Answer {
        match self {
            Typing::Derived(_) => Answer::Yes,
            Typing::Fails(_) => Answer::No,
            Typing::Unknown(_) => Answer::Unknown,
        }
    }
}

/// Why synthesis stopped.
enum Stop {
    Fails(String),
    Unknown(String),
}

pub fn raw_to_string(t: &RawType) -> String {
    match t {
        RawType::End => "end".to_string(),
        RawType::Var(v) => v.to_string(),
        RawType::Rec(v, b) => format!("rec {} . {}", v, raw_to_string(b)),
        RawType::Comm(d, p, bs) => {
            let br = |(l, s, c): &(Name, Sort, RawType)| {
                let pay = if *s == Sort::Unit { String::new() } else { format!("({})", s) };
                format!("{}{}.{}", l, pay, raw_to_string(c))
            };
            let sym = d.symbol();
            if bs.len() == 1 {
                format!("{}{}{}", p, sym, br(&bs[0]))
            } else {
                let inner: Vec<String> = bs.iter().map(br).collect();
                let op = if *d == Dir::Out { '+' } else { '&' };
                format!("{}{}{{{}}}", p, op, inner.join(", "))
            }
        }
    }
}

/// Open term of a closed type; binders get names that cannot clash with
/// process variables.
fn to_raw(t: &Type) -> RawType {
    fn go(t: &Type, depth: usize) -> RawType {
        match t.node() {
            Node::End => RawType::End,
            Node::Var(i, _) => RawType::Var(name(&format!("'{}", depth - 1 - i))),
            Node::Rec(_, b) => RawType::Rec(name(&format!("'{}", depth)), Box::new(go(b, depth + 1))),
            Node::Comm(d, p, bs) => {
                RawType::Comm(*d, p.clone(), bs.iter().map(|b| (b.label.clone(), b.sort, go(&b.cont, depth))).collect())
            }
        }
    }
    go(t, 0)
}

/// Least common supertype of two synthesised types, where one exists in
/// the shape we look for.
fn join(a: &RawType, b: &RawType) -> Option<RawType> {
    match (a, b) {
        _ if a == b => Some(a.clone()),
        (RawType::Rec(x, s), RawType::Rec(y, t)) if x == y => Some(RawType::Rec(x.clone(), Box::new(join(s, t)?))),
        (RawType::Comm(Dir::Out, p, bs), RawType::Comm(Dir::Out, q, cs)) if p == q => {
            let mut out = bs.clone();
            for (l, s, c) in cs {
                match out.iter_mut().find(|(l2, _, _)| l2 == l) {
                    Some(slot) => {
                        slot.1 = slot.1.lub(*s)?;
                        slot.2 = join(&slot.2, c)?;
                    }
                    None => out.push((l.clone(), *s, c.clone())),
                }
            }
            out.sort_by(|x, y| x.0.cmp(&y.0));
            Some(RawType::Comm(Dir::Out, p.clone(), out))
        }
        (RawType::Comm(Dir::In, p, bs), RawType::Comm(Dir::In, q, cs)) if p == q && bs.len() == cs.len() => {
            let mut out = Vec::new();
            for (l, s, c) in bs {
                let (_, s2, c2) = cs.iter().find(|(l2, _, _)| l2 == l)?;
                out.push((l.clone(), s.glb(*s2)?, join(c, c2)?));
            }
            Some(RawType::Comm(Dir::In, p.clone(), out))
        }
        _ => None,
    }
}

/// Sorts `x` may take so that every expression of `body` mentioning it is
/// typable (conditions must be boolean). Expressions have at most one
/// variable, so this is a per-binder question.
fn binder_sorts(x: &Name, body: &Process) -> Vec<Sort> {
    fn exprs<'a>(p: &'a Process, x: &Name, out: &mut Vec<(&'a Expr, bool)>) {
        match p {
            Process::Inact | Process::Var(_) => {}
            Process::Out { expr, cont, .. } => {
                out.push((expr, false));
                exprs(cont, x, out);
            }
            Process::Branch { branches, .. } => {
                for b in branches {
                    if &b.var != x {
                        exprs(&b.body, x, out);
                    }
                }
            }
            Process::Cond { cond, then, els } => {
                out.push((cond, true));
                exprs(then, x, out);
                exprs(els, x, out);
            }
            Process::Rec(_, b) => exprs(b, x, out),
        }
    }
    let mut es = Vec::new();
    exprs(body, x, &mut es);
    let uses: Vec<(&Expr, bool)> = es
        .into_iter()
        .filter(|(e, _)| {
            let mut fv = Vec::new();
            e.free_vars(&mut fv);
            fv.contains(x)
        })
        .collect();
    [Sort::Int, Sort::Nat, Sort::Bool, Sort::Unit]
        .into_iter()
        .filter(|s| {
            let mut vals = BTreeMap::new();
            vals.insert(x.clone(), *s);
            uses.iter().all(|(e, is_cond)| match type_expr(&vals, e) {
                Some(r) => !is_cond || r == Sort::Bool,
                None => false,
            })
        })
        .collect()
}

/// Sorts of `p?l(S)` inputs occurring in a target type.
fn input_hints(t: &Type) -> BTreeMap<(Name, Name), Vec<Sort>> {
    let g = t.to_graph();
    let mut out: BTreeMap<(Name, Name), Vec<Sort>> = BTreeMap::new();
    for n in &g.nodes {
        if let crate::graph::GNode::Comm { dir: Dir::In, peer, branches } = n {
            for (l, s, _) in branches {
                let v = out.entry((peer.clone(), l.clone())).or_default();
                if !v.contains(s) {
                    v.push(*s);
                }
            }
        }
    }
    out
}

/// Maximum number of input-sort combinations tried before giving up.
const MAX_SORT_CHOICES: usize = 16;

struct Synth<'a> {
    procs: &'a BTreeMap<Name, Type>,
    hints: BTreeMap<(Name, Name), Vec<Sort>>,
    /// Choice made at each input binder, in visiting order.
    picks: Vec<usize>,
    /// Number of candidates seen at each binder.
    arity: Vec<usize>,
}

impl Synth<'_> {
    fn candidates(&self, peer: &Name, label: &Name, x: &Name, body: &Process) -> Vec<Sort> {
        let ok = binder_sorts(x, body);
        let mut out: Vec<Sort> = Vec::new();
        if let Some(h) = self.hints.get(&(peer.clone(), label.clone())) {
            for s in h {
                // a hinted sort is usable when some typable sort lies below it
                if let Some(t) = ok.iter().find(|t| subsort(**t, *s) && subsort(*s, **t)).or(ok.iter().find(|t| subsort(*s, **t))) {
                    if !out.contains(t) {
                        out.push(*t);
                    }
                }
            }
        }
        for s in ok {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }

    fn go(&mut self, p: &Process, vals: &BTreeMap<Name, Sort>, bound: &BTreeSet<Name>) -> Result<(RawType, TypeDerivation), Stop> {
        let subj = || format!("{}", p);
        match p {
            Process::Inact => Ok((RawType::End, TypeDerivation::leaf("t-0", subj(), "end".into()))),
            Process::Var(x) => {
                let t = if bound.contains(x) {
                    RawType::Var(x.clone())
                } else if let Some(t) = self.procs.get(x) {
                    to_raw(t)
                } else {
                    return Err(Stop::Fails(format!("unbound process variable {}", x)));
                };
                let ty = raw_to_string(&t);
                Ok((t, TypeDerivation::leaf("t-var", subj(), ty)))
            }
            Process::Rec(x, body) => {
                let mut b2 = bound.clone();
                b2.insert(x.clone());
                let (t, d) = self.go(body, vals, &b2)?;
                let t = RawType::Rec(x.clone(), Box::new(t));
                let ty = raw_to_string(&t);
                Ok((t, TypeDerivation { rule: "t-rec", subject: subj(), ty, children: alloc::vec![d], sub: None }))
            }
            Process::Out { peer, label, expr, cont } => {
                let s = type_expr(vals, expr).ok_or_else(|| Stop::Fails(format!("expression {} is not typable", expr)))?;
                let (t, d) = self.go(cont, vals, bound)?;
                let t = RawType::Comm(Dir::Out, peer.clone(), alloc::vec![(label.clone(), s, t)]);
                let ty = raw_to_string(&t);
                Ok((t, TypeDerivation { rule: "t-out", subject: subj(), ty, children: alloc::vec![d], sub: None }))
            }
            Process::Branch { peer, branches } => {
                let mut out = Vec::new();
                let mut kids = Vec::new();
                for b in branches {
                    let cands = if &*b.var == "_" {
                        // the payload is discarded, any sort will do; prefer the target's
                        let mut c: Vec<Sort> = self.hints.get(&(peer.clone(), b.label.clone())).cloned().unwrap_or_default();
                        c.push(Sort::Int);
                        c.dedup();
                        c
                    } else {
                        self.candidates(peer, &b.label, &b.var, &b.body)
                    };
                    if cands.is_empty() {
                        return Err(Stop::Fails(format!("no sort types the uses of {} in branch {}", b.var, b.label)));
                    }
                    let k = self.arity.len();
                    self.arity.push(cands.len());
                    let pick = self.picks.get(k).copied().unwrap_or(0).min(cands.len() - 1);
                    let s = cands[pick];
                    let mut v2 = vals.clone();
                    v2.insert(b.var.clone(), s);
                    let (t, d) = self.go(&b.body, &v2, bound)?;
                    out.push((b.label.clone(), s, t));
                    kids.push(d);
                }
                let t = RawType::Comm(Dir::In, peer.clone(), out);
                let ty = raw_to_string(&t);
                Ok((t, TypeDerivation { rule: "t-ext", subject: subj(), ty, children: kids, sub: None }))
            }
            Process::Cond { cond, then, els } => {
                if type_expr(vals, cond) != Some(Sort::Bool) {
                    return Err(Stop::Fails(format!("condition {} is not boolean", cond)));
                }
                let (a, da) = self.go(then, vals, bound)?;
                let (b, db) = self.go(els, vals, bound)?;
                let t = join(&a, &b).ok_or_else(|| {
                    Stop::Unknown(format!("no common type for the branches of a conditional: {} and {}", raw_to_string(&a), raw_to_string(&b)))
                })?;
                let ty = raw_to_string(&t);
                Ok((t, TypeDerivation { rule: "t-cond", subject: subj(), ty, children: alloc::vec![da, db], sub: None }))
            }
        }
    }
}

/// `Θ ⊢ P : T`.
pub fn check_process(env: &VarEnv, p: &Process, t: &Type, cfg: &subtyping::Config) -> Typing {
    // a conditional at the root is checked arm by arm against the target
    if let Process::Cond { cond, then, els } = p {
        if type_expr(&env.vals, cond) != Some(Sort::Bool) {
            return Typing::Fails(format!("condition {} is not boolean", cond));
        }
        let a = check_process(env, then, t, cfg);
        let b = check_process(env, els, t, cfg);
        return match (a, b) {
            (Typing::Derived(da), Typing::Derived(db)) => Typing::Derived(TypeDerivation {
                rule: "t-cond",
                subject: format!("{}", p),
                ty: format!("{}", t),
                children: alloc::vec![da, db],
                sub: None,
            }),
            (Typing::Fails(m), _) | (_, Typing::Fails(m)) => Typing::Fails(m),
            (Typing::Unknown(m), _) | (_, Typing::Unknown(m)) => Typing::Unknown(m),
        };
    }
    let mut s = Synth { procs: &env.procs, hints: input_hints(t), picks: Vec::new(), arity: Vec::new() };
    let mut unknown: Option<String> = None;
    let mut last_no: Option<String> = None;
    for _ in 0..MAX_SORT_CHOICES {
        s.arity.clear();
        match s.go(p, &env.vals, &BTreeSet::new()) {
            Err(Stop::Fails(m)) => return Typing::Fails(m),
            Err(Stop::Unknown(m)) => return Typing::Unknown(m),
            Ok((raw, d)) => {
                let m = match raw.close() {
                    Ok(m) => m,
                    Err(e) => return Typing::Fails(format!("synthesised type is ill-formed: {}", e)),
                };
                if type_equal(&m, t) {
                    return Typing::Derived(d);
                }
                let v = subtyping::subtype(&m, t, cfg);
                match v.answer() {
                    Answer::Yes => {
                        return Typing::Derived(TypeDerivation {
                            rule: "t-sub",
                            subject: format!("{}", p),
                            ty: format!("{}", t),
                            children: alloc::vec![d],
                            sub: Some((m.clone(), t.clone(), v)),
                        })
                    }
                    Answer::No => last_no = Some(format!("{} is not a subtype of {}: {}", m, t, v)),
                    Answer::Unknown => unknown = Some(format!("subtyping {} against {} is undecided: {}", m, t, v)),
                }
            }
        }
        // next combination of input sorts, odometer style
        let mut picks: Vec<usize> = (0..s.arity.len()).map(|i| s.picks.get(i).copied().unwrap_or(0)).collect();
        let mut i = picks.len();
        let advanced = loop {
            if i == 0 {
                break false;
            }
            i -= 1;
            if picks[i] + 1 < s.arity[i] {
                picks[i] += 1;
                break true;
            }
            picks[i] = 0;
        };
        if !advanced {
            return match unknown {
                Some(m) => Typing::Unknown(m),
                None => Typing::Fails(last_no.unwrap_or_else(|| "no typing found".into())),
            };
        }
        s.picks = picks;
    }
    Typing::Unknown(unknown.or(last_no).unwrap_or_default() + " (input sort choices exhausted the bound)")
}

/// `Γ ⊢ M`: participants agree, and every process and queue is typed by
/// its entry. As in both congruences, an idle participant (`0` with an
/// empty queue, or `end` with an empty queue type) counts as absent.
pub fn check_session(gamma: &TypingEnv, m: &Session, cfg: &subtyping::Config) -> Typing {
    let idle_g = |p: &Name| {
        let (q, t) = gamma.get(p);
        q.is_empty() && t.unfold().is_end()
    };
    let idle_m = |p: &Name| {
        m.parts.get(p).is_none_or(|(proc_, h)| *proc_ == Process::Inact && h.0.is_empty())
    };
    let ks: BTreeSet<&Name> = gamma.entries.keys().filter(|p| !idle_g(p)).collect();
    let ms: BTreeSet<&Name> = m.parts.keys().filter(|p| !idle_m(p)).collect();
    let only_g: Vec<String> = ks.difference(&ms).filter(|p| !m.parts.contains_key(**p)).map(|n| n.to_string()).collect();
    let only_m: Vec<String> = ms.difference(&ks).filter(|p| !gamma.entries.contains_key(**p)).map(|n| n.to_string()).collect();
    if !only_g.is_empty() || !only_m.is_empty() {
        return Typing::Fails(format!(
            "participants differ: only in the environment [{}], only in the session [{}]",
            only_g.join(", "),
            only_m.join(", ")
        ));
    }
    let mut kids = Vec::new();
    let mut unknown = None;
    for (p, (proc_, h)) in &m.parts {
        let (sigma, t) = gamma.get(p);
        if !queue_has_type(h, &sigma) {
            return Typing::Fails(format!("queue of {} has type {}, expected {}", p, type_queue(h), sigma));
        }
        kids.push(TypeDerivation::leaf("t-queue", h.0.iter().map(|m| format!("{}", m)).collect::<Vec<_>>().join(" · "), format!("{}", sigma)));
        match check_process(&VarEnv::new(), proc_, &t, cfg) {
            Typing::Derived(d) => kids.push(d),
            Typing::Fails(m) => return Typing::Fails(format!("{}: {}", p, m)),
            Typing::Unknown(m) => unknown = Some(format!("{}: {}", p, m)),
        }
    }
    match unknown {
        Some(m) => Typing::Unknown(m),
        None => Typing::Derived(TypeDerivation { rule: "t-sess", subject: format!("{}", m), ty: format!("{}", gamma), children: kids, sub: None }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> Type {
        Type::parse(s).unwrap()
    }

    fn chk(p: &str, t: &str) -> Answer {
        check_process(&VarEnv::new(), &Process::parse(p).unwrap(), &ty(t), &subtyping::Config::default()).answer()
    }

    #[test]
    fn expressions() {
        let v = BTreeMap::new();
        assert_eq!(type_expr(&v, &Expr::int(3)), Some(Sort::Nat));
        assert_eq!(type_expr(&v, &Expr::int(0)), Some(Sort::Int));
        assert_eq!(type_expr(&v, &crate::syntax::parse_expr("succ 1").unwrap()), Some(Sort::Nat));
        assert_eq!(type_expr(&v, &crate::syntax::parse_expr("succ (inv 1)").unwrap()), None);
        assert_eq!(type_expr(&v, &crate::syntax::parse_expr("inv 1 > 0").unwrap()), Some(Sort::Bool));
        assert_eq!(type_expr(&v, &crate::syntax::parse_expr("not ()").unwrap()), None);
    }

    #[test]
    fn processes() {
        assert_eq!(chk("0", "end"), Answer::Yes);
        assert_eq!(chk("p!a<1>.0", "p!a(int).end"), Answer::Yes);
        assert_eq!(chk("p!a<inv 1>.0", "p!a(nat).end"), Answer::No);
        assert_eq!(chk("p?{a(x).q!b<succ x>.0}", "p?a(nat).q!b(nat).end"), Answer::Yes);
        assert_eq!(chk("p?{a(x).q!b<x>.0}", "p?a(nat).q!b(nat).end"), Answer::Yes);
        assert_eq!(chk("p?{a(x).0, b(y).0}", "p?a(nat).end"), Answer::Yes);
        assert_eq!(chk("p?{a(x).0}", "p&{a(nat).end, b.end}"), Answer::No);
        // anticipated output
        assert_eq!(chk("q!m<1>.p?{l(x).0}", "p?l(nat).q!m(nat).end"), Answer::Yes);
        assert_eq!(chk("rec X . p!a<true>.X", "rec t . p!a(bool).t"), Answer::Yes);
        assert_eq!(chk("if true then p!a<1>.0 else p!b<true>.0", "p+{a(nat).end, b(bool).end}"), Answer::Yes);
        assert_eq!(chk("q?{c(z).if z then p!a<1>.0 else p!b<true>.0}", "q?c(bool).p+{a(nat).end, b(bool).end}"), Answer::Yes);
        assert_eq!(chk("if 1 then 0 else 0", "end"), Answer::No);
    }

    #[test]
    fn joins() {
        let a = RawType::Comm(Dir::Out, name("p"), alloc::vec![(name("a"), Sort::Nat, RawType::End)]);
        let b = RawType::Comm(Dir::Out, name("p"), alloc::vec![(name("a"), Sort::Int, RawType::End)]);
        let j = join(&a, &b).unwrap();
        assert_eq!(j, b);
        let c = RawType::Comm(Dir::In, name("p"), alloc::vec![(name("a"), Sort::Nat, RawType::End)]);
        assert!(join(&a, &c).is_none());
    }

    #[test]
    fn sessions() {
        let cfg = subtyping::Config::default();
        let g = TypingEnv::parse("p : q!a(nat).end\nq : p?a(int).end").unwrap();
        let m = Session::parse("p |> q!a<1>.0\nq |> p?{a(x).0}").unwrap();
        assert_eq!(check_session(&g, &m, &cfg).answer(), Answer::Yes);
        let g2 = TypingEnv::parse("p : q!a(nat).end").unwrap();
        assert_eq!(check_session(&g2, &m, &cfg).answer(), Answer::No);
    }
}
