//! Characteristic processes and sessions.
//!
//! `P(U)` behaves exactly as the SO type `U` prescribes and crashes on any
//! payload of the wrong sort. The characteristic session of an SI type `V′`
//! is a ring of peers that is live against a participant `r` of type `V′`;
//! placing `r ◁ P(U)` next to it reduces to `error` whenever `U ≰ V′`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::calculus::{run, Expr, PBranch, Process, Queue, Rule, RunOutcome, Scheduler, Session, Value};
use crate::environment::TypingEnv;
use crate::types::{name, participants, Branch, Dir, Name, Node, QueueType, Sort, Type};

pub const ORACLE_STEP_LIMIT: usize = 50_000;

pub fn val(s: Sort) -> Value {
    match s {
        Sort::Nat => Value::Int(1),
        Sort::Int => Value::Int(-1),
        Sort::Bool => Value::Bool(true),
        Sort::Unit => Value::Unit,
    }
}

/// A boolean expression that evaluates only when `x` has sort `s`.
pub fn expr_for(x: &Name, s: Sort) -> Expr {
    let x = Box::new(Expr::Var(x.clone()));
    match s {
        Sort::Nat => Expr::Pos(Box::new(Expr::Succ(x))),
        Sort::Int => Expr::Pos(Box::new(Expr::Inv(x))),
        Sort::Bool => Expr::Not(x),
        Sort::Unit => Expr::IsUnit(x),
    }
}

/// `P(U)` for an SO type `U`. Recursion variables become `X0, X1, ...` by
/// binder depth.
pub fn char_process(u: &Type) -> Result<Process, String> {
    fn go(t: &Type, depth: usize) -> Result<Process, String> {
        Ok(match t.node() {
            Node::End => Process::Inact,
            Node::Var(i, _) => Process::Var(name(&format!("X{}", depth - 1 - i))),
            Node::Rec(_, b) => Process::Rec(name(&format!("X{}", depth)), Arc::new(go(b, depth + 1)?)),
            Node::Comm(Dir::Out, p, bs) => {
                if bs.len() != 1 {
                    return Err(format!("{} selects among {} labels; characteristic processes need single outputs", p, bs.len()));
                }
                let b = &bs[0];
                Process::Out { peer: p.clone(), label: b.label.clone(), expr: Expr::Val(val(b.sort)), cont: Arc::new(go(&b.cont, depth)?) }
            }
            Node::Comm(Dir::In, p, bs) => {
                let x = name("x");
                let mut out = Vec::new();
                for b in bs {
                    let k = Arc::new(go(&b.cont, depth)?);
                    let body = Process::Cond { cond: expr_for(&x, b.sort), then: k.clone(), els: k };
                    out.push(PBranch { label: b.label.clone(), var: x.clone(), body: Arc::new(body) });
                }
                Process::Branch { peer: p.clone(), branches: out }
            }
        })
    }
    go(u, 0)
}

/// Target participant `r`, SI type `V′` and the ring `p_1..p_m` of its
/// participants in order of first occurrence.
#[derive(Clone, Debug)]
pub struct CharContext {
    pub r: Name,
    pub v: Type,
    pub ring: Vec<Name>,
}

impl CharContext {
    pub fn new(r: &str, v: &Type) -> Result<CharContext, String> {
        let mut ring: Vec<Name> = Vec::new();
        fn walk(t: &Type, ring: &mut Vec<Name>) {
            match t.node() {
                Node::End | Node::Var(..) => {}
                Node::Rec(_, b) => walk(b, ring),
                Node::Comm(_, p, bs) => {
                    if !ring.contains(p) {
                        ring.push(p.clone());
                    }
                    for b in bs {
                        walk(&b.cont, ring);
                    }
                }
            }
        }
        walk(v, &mut ring);
        if ring.iter().any(|p| &**p == r) {
            return Err(format!("{} occurs in the target type", r));
        }
        Ok(CharContext { r: name(r), v: v.clone(), ring })
    }

    fn at(&self, k: isize) -> &Name {
        let m = self.ring.len() as isize;
        &self.ring[k.rem_euclid(m) as usize]
    }
}

/// `cyclic(V′)_{p_k}` (ring index `k` counts from 0).
pub fn char_session_type(ctx: &CharContext, k: usize) -> Type {
    let m = ctx.ring.len();
    let me = &ctx.ring[k];
    let ki = k as isize;
    let next = ctx.at(ki + 1).clone();
    let prev = ctx.at(ki - 1).clone();
    let one = |d: Dir, p: &Name, l: &Name, s: Sort, c: Type| Type::single(d, p.clone(), l.clone(), s, c);
    // `p_{k+1}!l(bool).p_{k-1}?l(bool).c`, omitted when m = 1
    let relay_out_in = |l: &Name, c: Type| {
        if m == 1 {
            c
        } else {
            one(Dir::Out, &next, l, Sort::Bool, one(Dir::In, &prev, l, Sort::Bool, c))
        }
    };
    let relay_in_out = |l: &Name, c: Type| one(Dir::In, &prev, l, Sort::Bool, one(Dir::Out, &next, l, Sort::Bool, c));
    fn go(t: &Type, f: &dyn Fn(&Dir, &Name, &[Branch], &dyn Fn(&Type) -> Type) -> Type) -> Type {
        match t.node() {
            Node::End | Node::Var(..) => t.clone(),
            Node::Rec(v, b) => Type::rec(v.clone(), go(b, f)),
            Node::Comm(d, p, bs) => f(d, p, bs, &|c: &Type| go(c, f)),
        }
    }
    let clause = |d: &Dir, p: &Name, bs: &[Branch], rec: &dyn Fn(&Type) -> Type| -> Type {
        match d {
            Dir::In => {
                // SI: a single input
                let b = &bs[0];
                if p == me {
                    one(Dir::Out, &ctx.r, &b.label, b.sort, relay_out_in(&b.label, rec(&b.cont)))
                } else {
                    relay_in_out(&b.label, rec(&b.cont))
                }
            }
            Dir::Out => {
                let out: Vec<Branch> = bs
                    .iter()
                    .map(|b| {
                        if p == me {
                            Branch { label: b.label.clone(), sort: b.sort, cont: relay_out_in(&b.label, rec(&b.cont)) }
                        } else {
                            Branch { label: b.label.clone(), sort: Sort::Bool, cont: one(Dir::Out, &next, &b.label, Sort::Bool, rec(&b.cont)) }
                        }
                    })
                    .collect();
                let from = if p == me { ctx.r.clone() } else { prev.clone() };
                Type::comm(Dir::In, from, out)
            }
        }
    };
    go(&ctx.v, &clause)
}

/// `Γ = {r:(ε, V′)} ∪ {p:(ε, cyclic(V′)_p)}`.
pub fn char_env(ctx: &CharContext) -> TypingEnv {
    let mut g = TypingEnv::new().with(&ctx.r, QueueType::empty(), ctx.v.clone());
    for (k, p) in ctx.ring.iter().enumerate() {
        g = g.with(p, QueueType::empty(), char_session_type(ctx, k));
    }
    g
}

/// `M_{r,V′}`.
pub fn char_session(ctx: &CharContext) -> Session {
    let mut m = Session::new();
    for (k, p) in ctx.ring.iter().enumerate() {
        let proc_ = char_process(&char_session_type(ctx, k)).expect("characteristic session types are SO");
        m.parts.insert(p.clone(), (proc_, Queue::default()));
    }
    m
}

/// A participant name occurring in neither type.
pub fn fresh_participant(u: &Type, v: &Type) -> Name {
    let used = participants(u).into_iter().chain(participants(v)).collect::<alloc::collections::BTreeSet<_>>();
    let mut i = 0;
    loop {
        let n = if i == 0 { name("r") } else { name(&format!("r{}", i)) };
        if !used.contains(&n) {
            return n;
        }
        i += 1;
    }
}

/// `r ◁ P(U) | r ◁ ∅ | M_{r,V′}` with a fresh `r`.
pub fn oracle_session(u: &Type, v: &Type) -> Result<(CharContext, Session), String> {
    let r = fresh_participant(u, v);
    let ctx = CharContext::new(&r, v)?;
    let mut m = char_session(&ctx);
    m.parts.insert(r, (char_process(u)?, Queue::default()));
    Ok((ctx, m))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    ErrorReached { rule: Rule, trace: Vec<String> },
    /// `exhausted` is true when the whole state space was explored.
    NoErrorWithinLimit { states: usize, exhausted: bool },
}

impl OracleOutcome {
    pub fn is_error(&self) -> bool {
        matches!(self, OracleOutcome::ErrorReached { .. })
    }
}

/// Explores the oracle session exhaustively for an error.
pub fn completeness_oracle(u: &Type, v: &Type, step_limit: usize) -> Result<OracleOutcome, String> {
    let (_, m) = oracle_session(u, v)?;
    Ok(match run(&m, Scheduler::Exhaustive, step_limit) {
        RunOutcome::Error { rule, trace } => OracleOutcome::ErrorReached { rule, trace },
        RunOutcome::Terminated { states, .. } => OracleOutcome::NoErrorWithinLimit { states, exhausted: true },
        RunOutcome::LimitReached { states, .. } => OracleOutcome::NoErrorWithinLimit { states, exhausted: false },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subtyping::{self, SubtypeVerdict};
    use crate::types::type_equal;

    fn ty(s: &str) -> Type {
        Type::parse(s).unwrap()
    }

    #[test]
    fn processes() {
        assert_eq!(char_process(&ty("end")).unwrap(), Process::Inact);
        assert_eq!(format!("{}", char_process(&ty("p!l(nat).end")).unwrap()), format!("{}", Process::parse("p!l<1>.0").unwrap()));
        let p = char_process(&ty("p?l(bool).end")).unwrap();
        assert_eq!(p, Process::parse("p?{l(x).if not x then 0 else 0}").unwrap());
        assert!(char_process(&ty("p+{a.end, b.end}")).is_err());
    }

    #[test]
    fn ring_types() {
        let v = ty("rec t . q+{l2(nat).p?l1(nat).t, l3(nat).p?l4(nat).t}");
        let ctx = CharContext::new("r", &v).unwrap();
        assert_eq!(ctx.ring, alloc::vec![name("q"), name("p")]);
        let up = ty("rec t . q&{l2(bool).q!l2(bool).r!l1(nat).q!l1(bool).q?l1(bool).t, l3(bool).q!l3(bool).r!l4(nat).q!l4(bool).q?l4(bool).t}");
        let uq = ty("rec t . r&{l2(nat).p!l2(bool).p?l2(bool).p?l1(bool).p!l1(bool).t, l3(nat).p!l3(bool).p?l3(bool).p?l4(bool).p!l4(bool).t}");
        assert!(type_equal(&char_session_type(&ctx, 1), &up), "{}", char_session_type(&ctx, 1));
        assert!(type_equal(&char_session_type(&ctx, 0), &uq), "{}", char_session_type(&ctx, 0));
        let single = CharContext::new("r", &ty("p?l(int).end")).unwrap();
        assert!(type_equal(&char_session_type(&single, 0), &ty("r!l(int).end")));
        assert!(CharContext::new("p", &v).is_err());
        let e = CharContext::new("r", &Type::end()).unwrap();
        assert!(char_session(&e).parts.is_empty());
    }

    #[test]
    fn environment_is_live() {
        let v = ty("rec t . q+{l2(nat).p?l1(nat).t, l3(nat).p?l4(nat).t}");
        let ctx = CharContext::new("r", &v).unwrap();
        let g = char_env(&ctx);
        let live = crate::environment::check_live(&g, &crate::environment::LiveConfig::default());
        assert_eq!(live.answer(), crate::Answer::Yes);
    }

    #[test]
    fn oracle() {
        let cfg = subtyping::Config::default();
        // intro: the reverse direction fails
        let t = ty("q!b(bool).p?a(nat).end");
        let tp = ty("p?a(nat).q!b(bool).end");
        assert!(matches!(subtyping::subtype(&t, &tp, &cfg), SubtypeVerdict::Yes(_)));
        assert!(!completeness_oracle(&t, &tp, ORACLE_STEP_LIMIT).unwrap().is_error());
        assert!(completeness_oracle(&tp, &t, ORACLE_STEP_LIMIT).unwrap().is_error());
        // disjoint actions
        let o = completeness_oracle(&ty("p!l(nat).end"), &ty("q?l(nat).end"), ORACLE_STEP_LIMIT).unwrap();
        assert!(o.is_error(), "{:?}", o);
        // sort mismatch
        let o = completeness_oracle(&ty("p?l(nat).end"), &ty("p?l(int).end"), ORACLE_STEP_LIMIT).unwrap();
        assert!(matches!(o, OracleOutcome::ErrorReached { rule: Rule::ErrEval, .. }), "{:?}", o);
    }
}
