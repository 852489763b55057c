//! The asynchronous session calculus: values, expressions, processes,
//! output queues, structural congruence, reduction and error detection.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::types::{Action, ActionSet, Dir, Name};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    /// Positive integers are naturals; zero and negatives are only ints.
    Int(i64),
    Bool(bool),
    Unit,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{}", i),
            Value::Bool(b) => write!(f, "{}", b),
            Value::Unit => f.write_str("()"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Var(Name),
    Val(Value),
    Succ(Box<Expr>),
    Inv(Box<Expr>),
    Not(Box<Expr>),
    /// `e > 0`
    Pos(Box<Expr>),
    /// `e ≈ ()`
    IsUnit(Box<Expr>),
}

impl Expr {
    pub fn int(i: i64) -> Expr {
        Expr::Val(Value::Int(i))
    }

    pub fn var(x: &str) -> Expr {
        Expr::Var(Name::from(x))
    }

    fn subst(&self, x: &str, v: &Value) -> Expr {
        let rec = |e: &Expr| Box::new(e.subst(x, v));
        match self {
            Expr::Var(y) if &**y == x => Expr::Val(v.clone()),
            Expr::Var(_) | Expr::Val(_) => self.clone(),
            Expr::Succ(e) => Expr::Succ(rec(e)),
            Expr::Inv(e) => Expr::Inv(rec(e)),
            Expr::Not(e) => Expr::Not(rec(e)),
            Expr::Pos(e) => Expr::Pos(rec(e)),
            Expr::IsUnit(e) => Expr::IsUnit(rec(e)),
        }
    }

    pub fn free_vars(&self, out: &mut Vec<Name>) {
        match self {
            Expr::Var(x) => out.push(x.clone()),
            Expr::Val(_) => {}
            Expr::Succ(e) | Expr::Inv(e) | Expr::Not(e) | Expr::Pos(e) | Expr::IsUnit(e) => e.free_vars(out),
        }
    }
}

/// Big-step evaluation; `None` when no rule applies.
pub fn eval(e: &Expr) -> Option<Value> {
    match e {
        Expr::Var(_) => None,
        Expr::Val(v) => Some(v.clone()),
        Expr::Succ(e) => match eval(e)? {
            Value::Int(n) if n > 0 => n.checked_add(1).map(Value::Int),
            _ => None,
        },
        Expr::Inv(e) => match eval(e)? {
            Value::Int(i) => i.checked_neg().map(Value::Int),
            _ => None,
        },
        Expr::Not(e) => match eval(e)? {
            Value::Bool(b) => Some(Value::Bool(!b)),
            _ => None,
        },
        Expr::Pos(e) => match eval(e)? {
            Value::Int(i) => Some(Value::Bool(i > 0)),
            _ => None,
        },
        Expr::IsUnit(e) => match eval(e)? {
            Value::Unit => Some(Value::Bool(true)),
            _ => None,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PBranch {
    pub label: Name,
    pub var: Name,
    pub body: Arc<Process>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    Inact,
    Out { peer: Name, label: Name, expr: Expr, cont: Arc<Process> },
    Branch { peer: Name, branches: Vec<PBranch> },
    Cond { cond: Expr, then: Arc<Process>, els: Arc<Process> },
    Rec(Name, Arc<Process>),
    Var(Name),
}

impl Process {
    pub fn out(peer: &str, label: &str, expr: Expr, cont: Process) -> Process {
        Process::Out { peer: Name::from(peer), label: Name::from(label), expr, cont: Arc::new(cont) }
    }

    pub fn parse(src: &str) -> Result<Process, crate::syntax::ParseError> {
        crate::syntax::parse_process(src)
    }

    /// `P{v/x}`, respecting binders.
    pub fn subst_value(&self, x: &str, v: &Value) -> Process {
        match self {
            Process::Inact | Process::Var(_) => self.clone(),
            Process::Out { peer, label, expr, cont } => Process::Out {
                peer: peer.clone(),
                label: label.clone(),
                expr: expr.subst(x, v),
                cont: Arc::new(cont.subst_value(x, v)),
            },
            Process::Branch { peer, branches } => Process::Branch {
                peer: peer.clone(),
                branches: branches
                    .iter()
                    .map(|b| PBranch {
                        label: b.label.clone(),
                        var: b.var.clone(),
                        body: if &*b.var == x { b.body.clone() } else { Arc::new(b.body.subst_value(x, v)) },
                    })
                    .collect(),
            },
            Process::Cond { cond, then, els } => Process::Cond {
                cond: cond.subst(x, v),
                then: Arc::new(then.subst_value(x, v)),
                els: Arc::new(els.subst_value(x, v)),
            },
            Process::Rec(y, b) => Process::Rec(y.clone(), Arc::new(b.subst_value(x, v))),
        }
    }

    /// `P{R/X}`, respecting binders.
    pub fn subst_proc(&self, x: &str, r: &Process) -> Process {
        match self {
            Process::Inact => self.clone(),
            Process::Var(y) => {
                if &**y == x {
                    r.clone()
                } else {
                    self.clone()
                }
            }
            Process::Out { peer, label, expr, cont } => Process::Out {
                peer: peer.clone(),
                label: label.clone(),
                expr: expr.clone(),
                cont: Arc::new(cont.subst_proc(x, r)),
            },
            Process::Branch { peer, branches } => Process::Branch {
                peer: peer.clone(),
                branches: branches
                    .iter()
                    .map(|b| PBranch { label: b.label.clone(), var: b.var.clone(), body: Arc::new(b.body.subst_proc(x, r)) })
                    .collect(),
            },
            Process::Cond { cond, then, els } => Process::Cond {
                cond: cond.clone(),
                then: Arc::new(then.subst_proc(x, r)),
                els: Arc::new(els.subst_proc(x, r)),
            },
            Process::Rec(y, b) => {
                if &**y == x {
                    self.clone()
                } else {
                    Process::Rec(y.clone(), Arc::new(b.subst_proc(x, r)))
                }
            }
        }
    }

    /// Unfolds top-level recursion (bounded, in case of an unguarded term
    /// built by hand).
    pub fn unfold(&self) -> Process {
        let mut p = self.clone();
        for _ in 0..64 {
            match &p {
                Process::Rec(x, b) => p = b.subst_proc(x, &p),
                _ => break,
            }
        }
        p
    }

    /// `act(P)`.
    pub fn actions(&self) -> ActionSet {
        let mut acts = ActionSet::new();
        self.collect_actions(&mut acts);
        acts
    }

    fn collect_actions(&self, acts: &mut ActionSet) {
        match self {
            Process::Inact | Process::Var(_) => {}
            Process::Out { peer, cont, .. } => {
                acts.insert(Action { peer: peer.clone(), dir: Dir::Out });
                cont.collect_actions(acts);
            }
            Process::Branch { peer, branches } => {
                acts.insert(Action { peer: peer.clone(), dir: Dir::In });
                for b in branches {
                    b.body.collect_actions(acts);
                }
            }
            Process::Cond { then, els, .. } => {
                then.collect_actions(acts);
                els.collect_actions(acts);
            }
            Process::Rec(_, b) => b.collect_actions(acts),
        }
    }

    pub fn has_action(&self, peer: &str, dir: Dir) -> bool {
        self.actions().contains(&Action { peer: Name::from(peer), dir })
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::syntax::print::write_process(f, self)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::syntax::print::write_expr(f, self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Msg {
    pub to: Name,
    pub label: Name,
    pub value: Value,
}

impl fmt::Display for Msg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}!{}<{}>", self.to, self.label, self.value)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Queue(pub Vec<Msg>);

impl Queue {
    pub fn canonical(&self) -> Queue {
        let mut v = self.0.clone();
        v.sort_by(|a, b| a.to.cmp(&b.to));
        Queue(v)
    }

    pub fn position_for(&self, to: &str) -> Option<usize> {
        self.0.iter().position(|m| &*m.to == to)
    }
}

/// A session `∏ p◁P | p◁h`. Absent participants stand for `p◁0 | p◁∅`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Session {
    pub parts: BTreeMap<Name, (Process, Queue)>,
}

impl Session {
    pub fn new() -> Session {
        Session::default()
    }

    pub fn with(mut self, p: &str, proc_: Process) -> Session {
        self.parts.insert(Name::from(p), (proc_, Queue::default()));
        self
    }

    pub fn parse(src: &str) -> Result<Session, crate::syntax::ParseError> {
        crate::syntax::parse_session(src)
    }

    /// Representative of the congruence class.
    pub fn canonical(&self) -> Session {
        let mut parts = BTreeMap::new();
        for (p, (proc_, q)) in &self.parts {
            let proc_ = proc_.unfold();
            let q = q.canonical();
            if proc_ == Process::Inact && q.0.is_empty() {
                continue;
            }
            parts.insert(p.clone(), (proc_, q));
        }
        Session { parts }
    }

    fn get(&self, p: &str) -> (Process, Queue) {
        self.parts.get(p).cloned().unwrap_or((Process::Inact, Queue::default()))
    }

    fn set(&mut self, p: &Name, proc_: Process, q: Queue) {
        self.parts.insert(p.clone(), (proc_, q));
    }

    fn is_empty(&self) -> bool {
        self.parts.values().all(|(p, q)| *p == Process::Inact && q.0.is_empty())
    }
}

impl fmt::Display for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::syntax::print::write_session(f, self)
    }
}

/// Structural congruence.
pub fn congruent(a: &Session, b: &Session) -> bool {
    a.canonical() == b.canonical()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Send,
    Rcv,
    CondT,
    CondF,
    ErrMism,
    ErrOphn,
    ErrStrv,
    ErrEval,
    ErrEval2,
    ErrDlock,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Send => "r-send",
            Rule::Rcv => "r-rcv",
            Rule::CondT => "r-cond-T",
            Rule::CondF => "r-cond-F",
            Rule::ErrMism => "err-mism",
            Rule::ErrOphn => "err-ophn",
            Rule::ErrStrv => "err-strv",
            Rule::ErrEval => "err-eval",
            Rule::ErrEval2 => "err-eval2",
            Rule::ErrDlock => "err-dlock",
        }
    }

    pub fn is_error(self) -> bool {
        matches!(
            self,
            Rule::ErrMism | Rule::ErrOphn | Rule::ErrStrv | Rule::ErrEval | Rule::ErrEval2 | Rule::ErrDlock
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduct {
    Session(Session),
    Error,
}

/// One reduction: the rule, the participant that moved and what it did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: Rule,
    pub participant: Name,
    pub action: String,
    pub result: Reduct,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} {}", self.rule, self.participant, self.action)
    }
}

/// All one-step reducts of `m`, up to congruence. Successor sessions are
/// returned in canonical form.
pub fn step(m: &Session) -> Vec<Step> {
    let m = m.canonical();
    let mut out = Vec::new();
    let err = |rule: Rule, p: &Name, action: String, out: &mut Vec<Step>| {
        out.push(Step { rule, participant: p.clone(), action, result: Reduct::Error });
    };
    for (p, (proc_, h)) in &m.parts {
        match proc_ {
            Process::Out { peer, label, expr, cont } => match eval(expr) {
                Some(v) => {
                    let mut m2 = m.clone();
                    let mut h2 = h.clone();
                    h2.0.push(Msg { to: peer.clone(), label: label.clone(), value: v.clone() });
                    m2.set(p, (**cont).clone(), h2);
                    out.push(Step {
                        rule: Rule::Send,
                        participant: p.clone(),
                        action: format!("{}!{}<{}>", peer, label, v),
                        result: Reduct::Session(m2.canonical()),
                    });
                }
                None => err(Rule::ErrEval2, p, format!("{}!{}<{}>", peer, label, expr), &mut out),
            },
            Process::Cond { cond, then, els } => match eval(cond) {
                Some(Value::Bool(b)) => {
                    let mut m2 = m.clone();
                    let next = if b { (**then).clone() } else { (**els).clone() };
                    m2.set(p, next, h.clone());
                    out.push(Step {
                        rule: if b { Rule::CondT } else { Rule::CondF },
                        participant: p.clone(),
                        action: format!("if {}", cond),
                        result: Reduct::Session(m2.canonical()),
                    });
                }
                _ => err(Rule::ErrEval, p, format!("if {}", cond), &mut out),
            },
            Process::Branch { peer, branches } => {
                let (qproc, hq) = m.get(peer);
                match hq.position_for(p) {
                    Some(i) => {
                        let msg = &hq.0[i];
                        match branches.iter().find(|b| b.label == msg.label) {
                            Some(b) => {
                                let mut m2 = m.clone();
                                let mut hq2 = hq.clone();
                                hq2.0.remove(i);
                                m2.set(peer, qproc.clone(), hq2);
                                m2.set(p, b.body.subst_value(&b.var, &msg.value), h.clone());
                                out.push(Step {
                                    rule: Rule::Rcv,
                                    participant: p.clone(),
                                    action: format!("{}?{}<{}>", peer, msg.label, msg.value),
                                    result: Reduct::Session(m2.canonical()),
                                });
                            }
                            None => err(Rule::ErrMism, p, format!("{}?{}", peer, msg.label), &mut out),
                        }
                    }
                    None => {
                        if !qproc.has_action(p, Dir::Out) {
                            err(Rule::ErrStrv, p, format!("{}?", peer), &mut out);
                        }
                    }
                }
            }
            Process::Inact | Process::Rec(..) | Process::Var(_) => {}
        }
    }
    // orphan messages: q holds a message for p, and p never reads from q
    for (q, (_, hq)) in &m.parts {
        let mut seen: Vec<&Name> = Vec::new();
        for msg in &hq.0 {
            if seen.contains(&&msg.to) {
                continue;
            }
            seen.push(&msg.to);
            let (pp, _) = m.get(&msg.to);
            if !pp.has_action(q, Dir::In) {
                err(Rule::ErrOphn, &msg.to, format!("orphan {}!{} from {}", msg.to, msg.label, q), &mut out);
            }
        }
    }
    if is_deadlock(&m) {
        let waiting = m.parts.iter().find(|(_, (p, _))| matches!(p, Process::Branch { .. })).map(|x| x.0.clone());
        if let Some(w) = waiting {
            err(Rule::ErrDlock, &w, String::from("deadlock"), &mut out);
        }
    }
    out
}

/// err-dlock: every participant is an input or inactive, at least one is
/// an input, and no input participant finds a message from the peer it
/// waits on. Messages queued for a participant that waits on someone else
/// do not unblock anything.
fn is_deadlock(m: &Session) -> bool {
    let mut waiting = Vec::new();
    for (p, (proc_, _)) in &m.parts {
        match proc_ {
            Process::Branch { peer, .. } => waiting.push((p, peer)),
            Process::Inact => {}
            _ => return false,
        }
    }
    !waiting.is_empty() && waiting.iter().all(|(p, q)| m.get(q).1.position_for(p).is_none())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheduler {
    Exhaustive,
    Random(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    /// Exploration finished without reaching `error`. `stuck` counts
    /// reachable states with no reduct that are not the empty session.
    Terminated { states: usize, stuck: usize },
    Error { rule: Rule, trace: Vec<String> },
    LimitReached { states: usize, frontier: usize },
}

impl RunOutcome {
    pub fn is_error(&self) -> bool {
        matches!(self, RunOutcome::Error { .. })
    }
}

/// Runs a session. Exhaustive mode explores canonical states breadth-first
/// and reports the first error found with a shortest trace. Random mode
/// follows one weakly fair trace.
pub fn run(m: &Session, scheduler: Scheduler, step_limit: usize) -> RunOutcome {
    match scheduler {
        Scheduler::Exhaustive => run_exhaustive(m, step_limit),
        Scheduler::Random(seed) => run_random(m, seed, step_limit),
    }
}

fn run_exhaustive(m: &Session, limit: usize) -> RunOutcome {
    let start = m.canonical();
    let mut index: HashMap<Session, usize> = HashMap::new();
    let mut parent: Vec<Option<(usize, String)>> = vec![None];
    let mut states = vec![start.clone()];
    index.insert(start, 0);
    let mut queue = VecDeque::from([0usize]);
    let mut stuck = 0;
    let trace_to = |mut i: usize, parent: &Vec<Option<(usize, String)>>| {
        let mut t = Vec::new();
        while let Some((j, s)) = &parent[i] {
            t.push(s.clone());
            i = *j;
        }
        t.reverse();
        t
    };
    while let Some(i) = queue.pop_front() {
        let cur = states[i].clone();
        let steps = step(&cur);
        if steps.is_empty() && !cur.is_empty() {
            stuck += 1;
        }
        for s in steps {
            match s.result {
                Reduct::Error => {
                    let mut trace = trace_to(i, &parent);
                    trace.push(format!("{}: {} {}", s.rule, s.participant, s.action));
                    return RunOutcome::Error { rule: s.rule, trace };
                }
                Reduct::Session(next) => {
                    if index.contains_key(&next) {
                        continue;
                    }
                    if states.len() >= limit {
                        return RunOutcome::LimitReached { states: states.len(), frontier: queue.len() + 1 };
                    }
                    let j = states.len();
                    index.insert(next.clone(), j);
                    states.push(next);
                    parent.push(Some((i, format!("{}: {} {}", s.rule, s.participant, s.action))));
                    queue.push_back(j);
                }
            }
        }
    }
    RunOutcome::Terminated { states: states.len(), stuck }
}

/// Window within which a continuously enabled participant must move.
pub const FAIRNESS_WINDOW: usize = 64;

fn run_random(m: &Session, seed: u64, limit: usize) -> RunOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = m.canonical();
    let mut trace = Vec::new();
    let mut waiting: BTreeMap<Name, usize> = BTreeMap::new();
    for _ in 0..limit {
        let steps = step(&cur);
        if steps.is_empty() {
            let stuck = usize::from(!cur.is_empty());
            return RunOutcome::Terminated { states: trace.len() + 1, stuck };
        }
        if let Some(e) = steps.iter().find(|s| s.result == Reduct::Error) {
            trace.push(format!("{}", e));
            return RunOutcome::Error { rule: e.rule, trace };
        }
        let enabled: Vec<Name> = {
            let mut v: Vec<Name> = steps.iter().map(|s| s.participant.clone()).collect();
            v.dedup();
            v
        };
        waiting.retain(|p, _| enabled.contains(p));
        for p in &enabled {
            *waiting.entry(p.clone()).or_insert(0) += 1;
        }
        let overdue = waiting.iter().filter(|(_, n)| **n >= FAIRNESS_WINDOW).map(|(p, _)| p.clone()).next();
        let chosen = match overdue {
            Some(p) => steps.iter().filter(|s| s.participant == p).collect::<Vec<_>>().choose(&mut rng).copied(),
            None => steps.choose(&mut rng),
        }
        .expect("nonempty");
        waiting.remove(&chosen.participant);
        trace.push(format!("{}", chosen));
        if let Reduct::Session(s) = &chosen.result {
            cur = s.clone();
        }
    }
    RunOutcome::LimitReached { states: limit, frontier: 1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(src: &str) -> Session {
        Session::parse(src).unwrap()
    }

    #[test]
    fn eval_table() {
        assert_eq!(eval(&Expr::Succ(Box::new(Expr::int(1)))), Some(Value::Int(2)));
        assert_eq!(eval(&Expr::Not(Box::new(Expr::Val(Value::Bool(true))))), Some(Value::Bool(false)));
        assert_eq!(eval(&Expr::Succ(Box::new(Expr::Val(Value::Bool(true))))), None);
        assert_eq!(eval(&Expr::IsUnit(Box::new(Expr::Val(Value::Unit)))), Some(Value::Bool(true)));
        assert_eq!(eval(&Expr::Succ(Box::new(Expr::int(0)))), None);
        assert_eq!(eval(&Expr::Inv(Box::new(Expr::int(0)))), Some(Value::Int(0)));
        assert_eq!(eval(&Expr::Pos(Box::new(Expr::int(-3)))), Some(Value::Bool(false)));
        assert_eq!(eval(&Expr::IsUnit(Box::new(Expr::int(1)))), None);
    }

    #[test]
    fn reduction_example() {
        let m = s("r |> if true then q!cont<42>.p?{success(x).0, error(y).0} else q!stop.p?{success(x).0, error(y).0}");
        let st = step(&m);
        assert_eq!(st.len(), 1);
        assert_eq!(st[0].rule, Rule::CondT);
        let Reduct::Session(m1) = &st[0].result else { panic!() };
        let st2 = step(m1);
        let send = st2.iter().find(|x| x.rule == Rule::Send).unwrap();
        let Reduct::Session(m2) = &send.result else { panic!() };
        let expected = s("r |> p?{success(x).0, error(y).0}\nr <| [q!cont<42>]");
        assert!(congruent(m2, &expected));
    }

    #[test]
    fn mismatch_is_error() {
        let m = s("p |> q?{l(x).0}\nq |> 0\nq <| [p!m<1>]");
        assert!(step(&m).iter().any(|x| x.rule == Rule::ErrMism));
    }

    #[test]
    fn terminated_session() {
        let m = s("p |> 0");
        assert!(step(&m).is_empty());
        assert_eq!(run(&m, Scheduler::Exhaustive, 100), RunOutcome::Terminated { states: 1, stuck: 0 });
    }

    #[test]
    fn congruence_examples() {
        let a = s("p |> 0\np <| [q1!a<1>, q2!b<2>]");
        let b = s("p |> 0\np <| [q2!b<2>, q1!a<1>]");
        assert!(congruent(&a, &b));
        let c = s("p |> 0\np <| [q!a<1>, q!b<2>]");
        let d = s("p |> 0\np <| [q!b<2>, q!a<1>]");
        assert!(!congruent(&c, &d));
        let e = s("p |> q!a<1>.0\nr |> 0");
        let f = s("p |> q!a<1>.0");
        assert!(congruent(&e, &f));
    }

    #[test]
    fn orphan_and_starvation() {
        let m = s("p |> q!l<1>.0\nq |> 0");
        assert!(matches!(run(&m, Scheduler::Exhaustive, 100), RunOutcome::Error { rule: Rule::ErrOphn, .. }));
        let m = s("p |> q?{l(x).0}\nq |> 0");
        assert!(step(&m).iter().any(|x| x.rule == Rule::ErrStrv));
    }

    #[test]
    fn deadlock() {
        let m = s("p |> q?{l(x).q!l<1>.0}\nq |> p?{l(x).p!l<1>.0}");
        assert!(step(&m).iter().any(|x| x.rule == Rule::ErrDlock));
        // a message for p that p is not waiting for does not help
        let m = s("r |> p?{a(x).0}\nr <| [p!a<1>]\np |> q?{a(x).0}\nq |> r?{a(x).0}");
        assert!(step(&m).iter().any(|x| x.rule == Rule::ErrDlock));
    }

    #[test]
    fn random_run_terminates() {
        let m = s("p |> q!l<1>.q!l<2>.0\nq |> p?{l(x).p?{l(y).0}}");
        assert!(matches!(run(&m, Scheduler::Random(7), 100), RunOutcome::Terminated { stuck: 0, .. }));
    }
}
