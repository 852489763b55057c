//! Printers producing text the parser accepts back.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::calculus::{Expr, Process, Session};
use crate::environment::TypingEnv;
use crate::types::{Branch, Dir, Name, Node, Sort, Type};

pub fn write_type(f: &mut dyn Write, t: &Type) -> fmt::Result {
    go(f, t, &mut Vec::new())
}

fn fresh(hint: &Name, env: &[String]) -> String {
    if !env.iter().any(|x| x == &**hint) {
        return String::from(&**hint);
    }
    (1..).map(|i| format!("{}{}", hint, i)).find(|c| !env.contains(c)).unwrap()
}

fn payload(f: &mut dyn Write, s: Sort) -> fmt::Result {
    if s == Sort::Unit {
        Ok(())
    } else {
        write!(f, "({})", s)
    }
}

fn go(f: &mut dyn Write, t: &Type, env: &mut Vec<String>) -> fmt::Result {
    match t.node() {
        Node::End => f.write_str("end"),
        Node::Var(i, _) => f.write_str(&env[env.len() - 1 - i]),
        Node::Rec(h, b) => {
            let n = fresh(h, env);
            write!(f, "rec {} . ", n)?;
            env.push(n);
            let r = go(f, b, env);
            env.pop();
            r
        }
        Node::Comm(d, p, bs) => {
            let branch = |f: &mut dyn Write, b: &Branch, env: &mut Vec<String>| -> fmt::Result {
                f.write_str(&b.label)?;
                payload(f, b.sort)?;
                f.write_str(".")?;
                go(f, &b.cont, env)
            };
            if bs.len() == 1 {
                write!(f, "{}{}", p, d.symbol())?;
                branch(f, &bs[0], env)
            } else {
                write!(f, "{}{}{{", p, if *d == Dir::In { '&' } else { '+' })?;
                for (i, b) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    branch(f, b, env)?;
                }
                f.write_str("}")
            }
        }
    }
}

pub fn write_expr(f: &mut dyn Write, e: &Expr) -> fmt::Result {
    match e {
        Expr::Var(x) => f.write_str(x),
        Expr::Val(v) => write!(f, "{}", v),
        Expr::Succ(a) => {
            f.write_str("succ ")?;
            unary(f, a)
        }
        Expr::Inv(a) => {
            f.write_str("inv ")?;
            unary(f, a)
        }
        Expr::Not(a) => {
            f.write_str("not ")?;
            unary(f, a)
        }
        Expr::Pos(a) => {
            unary(f, a)?;
            f.write_str(" > 0")
        }
        Expr::IsUnit(a) => {
            unary(f, a)?;
            f.write_str(" == ()")
        }
    }
}

fn unary(f: &mut dyn Write, e: &Expr) -> fmt::Result {
    if matches!(e, Expr::Pos(_) | Expr::IsUnit(_)) {
        f.write_str("(")?;
        write_expr(f, e)?;
        f.write_str(")")
    } else {
        write_expr(f, e)
    }
}

pub fn write_process(f: &mut dyn Write, p: &Process) -> fmt::Result {
    match p {
        Process::Inact => f.write_str("0"),
        Process::Var(x) => f.write_str(x),
        Process::Rec(x, b) => {
            write!(f, "rec {} . ", x)?;
            write_process(f, b)
        }
        Process::Out { peer, label, expr, cont } => {
            write!(f, "{}!{}<", peer, label)?;
            write_expr(f, expr)?;
            f.write_str(">.")?;
            write_process(f, cont)
        }
        Process::Branch { peer, branches } => {
            write!(f, "{}?{{", peer)?;
            for (i, b) in branches.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}({}).", b.label, b.var)?;
                write_process(f, &b.body)?;
            }
            f.write_str("}")
        }
        Process::Cond { cond, then, els } => {
            f.write_str("if ")?;
            write_expr(f, cond)?;
            f.write_str(" then ")?;
            write_process(f, then)?;
            f.write_str(" else ")?;
            write_process(f, els)
        }
    }
}

pub fn write_session(f: &mut dyn Write, m: &Session) -> fmt::Result {
    for (p, (proc_, q)) in &m.parts {
        write!(f, "{} |> ", p)?;
        write_process(f, proc_)?;
        f.write_str("\n")?;
        if !q.0.is_empty() {
            write!(f, "{} <| [", p)?;
            for (i, msg) in q.0.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", msg)?;
            }
            f.write_str("]\n")?;
        }
    }
    Ok(())
}

pub fn write_env(f: &mut dyn Write, g: &TypingEnv) -> fmt::Result {
    for (p, (q, t)) in &g.entries {
        write!(f, "{} : {} ", p, q)?;
        write_type(f, t)?;
        f.write_str("\n")?;
    }
    Ok(())
}

pub fn type_to_string(t: &Type) -> String {
    let mut s = String::new();
    let _ = write_type(&mut s, t);
    s
}
