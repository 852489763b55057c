//! Surface syntax for types, processes, sessions and typing environments.
//!
//! ```text
//! sort  ::= nat | int | bool | unit
//! type  ::= end | t | rec t . type
//!         | p&{ l(S).type, ... } | p+{ l(S).type, ... }
//!         | p?l(S).type | p!l(S).type | ( type )
//! proc  ::= 0 | X | rec X . proc | p!l<e>.proc
//!         | p?{ l(x).proc, ... } | p?l(x).proc
//!         | if e then proc else proc | ( proc )
//! expr  ::= n | -n | true | false | () | x | succ e | inv e | not e
//!         | e > 0 | e == () | ( e )
//! ```
//!
//! `(unit)` payloads and `.end` / `.0` continuations may be omitted.
//! Session files hold `p |> proc` lines and optional `p <| [q!l<v>, ...]`
//! queue lines; environment files hold `p : [q!l(S), ...] type` lines.
//! Lines that do not start a new entry continue the previous one. `//` and
//! `#` start comments.

pub mod print;

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::calculus::{Expr, Msg, PBranch, Process, Queue, Session, Value};
use crate::environment::TypingEnv;
use crate::types::{name, Dir, MsgType, Name, QueueType, RawType, Sort, Type};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    UnknownSort,
    DuplicateLabel,
    Unguarded,
    Unbound,
    DuplicateParticipant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMS: [&str; 22] = [
    "|>", "<|", "==", "(", ")", "{", "}", "[", "]", "<", ">", ".", ",", "&", "+", "?", "!", ":", "-", ";", "≈", "¬",
];

fn lex(src: &str, line0: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = line0;
    let mut col = 1;
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l, cc) = (line, col);
        if c.is_ascii_digit() {
            let st = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[st..i].iter().collect();
            let n = s.parse::<i64>().map_err(|_| err(ErrorKind::Syntax, l, cc, "integer literal too large"))?;
            col += i - st;
            out.push(Token { tok: Tok::Int(n), line: l, col: cc });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            col += i - st;
            out.push(Token { tok: Tok::Ident(chars[st..i].iter().collect()), line: l, col: cc });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                let n = s.chars().count();
                i += n;
                col += n;
                out.push(Token { tok: Tok::Sym(s), line: l, col: cc });
            }
            None => return Err(err(ErrorKind::Syntax, l, cc, &format!("unexpected character `{}`", c))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

fn err(kind: ErrorKind, line: usize, col: usize, msg: &str) -> ParseError {
    ParseError { kind, line, col, msg: msg.to_owned() }
}

const KEYWORDS: [&str; 10] = ["end", "rec", "if", "then", "else", "true", "false", "succ", "inv", "not"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(src: &str, line0: usize) -> Result<Parser, ParseError> {
        Ok(Parser { toks: lex(src, line0)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, kind: ErrorKind, msg: &str) -> Result<T, ParseError> {
        let (l, c) = self.here();
        Err(err(kind, l, c, msg))
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{}`", s),
            Tok::Int(n) => format!("`{}`", n),
            Tok::Sym(s) => format!("`{}`", s),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.fail(ErrorKind::Syntax, &format!("expected `{}`, found {}", s, self.describe()))
        }
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn ident(&mut self, what: &str) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) || what == "label" => {
                self.bump();
                Ok(name(&s))
            }
            _ => self.fail(ErrorKind::Syntax, &format!("expected {}, found {}", what, self.describe())),
        }
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            self.fail(ErrorKind::Syntax, &format!("unexpected {}", self.describe()))
        }
    }

    fn sort(&mut self) -> Result<Sort, ParseError> {
        let here = self.here();
        match self.bump() {
            Tok::Ident(s) => Sort::from_str(&s)
                .ok_or_else(|| err(ErrorKind::UnknownSort, here.0, here.1, &format!("unknown sort `{}`", s))),
            _ => Err(err(ErrorKind::UnknownSort, here.0, here.1, "expected a sort")),
        }
    }

    /// `(S)`, defaulting to unit.
    fn payload(&mut self) -> Result<Sort, ParseError> {
        if self.eat("(") {
            if self.eat(")") {
                return Ok(Sort::Unit);
            }
            let s = self.sort()?;
            self.expect(")")?;
            Ok(s)
        } else {
            Ok(Sort::Unit)
        }
    }

    fn ty(&mut self, env: &mut Vec<Name>) -> Result<RawType, ParseError> {
        if self.eat("(") {
            let t = self.ty(env)?;
            self.expect(")")?;
            return Ok(t);
        }
        if self.is_kw("end") {
            self.bump();
            return Ok(RawType::End);
        }
        if self.is_kw("rec") || matches!(self.peek(), Tok::Ident(s) if s == "μ") {
            let here = self.here();
            self.bump();
            let v = self.ident("recursion variable")?;
            self.expect(".")?;
            env.push(v.clone());
            let body = self.ty(env);
            env.pop();
            let body = body?;
            if matches!(body, RawType::Var(_) | RawType::Rec(..)) && unguarded(&body, &v) {
                return Err(err(ErrorKind::Unguarded, here.0, here.1, &format!("unguarded recursion on `{}`", v)));
            }
            return Ok(RawType::Rec(v, Box::new(body)));
        }
        let here = self.here();
        let id = self.ident("a type")?;
        let dir = if self.is_sym("&") || self.is_sym("?") {
            Dir::In
        } else if self.is_sym("+") || self.is_sym("!") {
            Dir::Out
        } else {
            if env.contains(&id) {
                return Ok(RawType::Var(id));
            }
            return Err(err(ErrorKind::Unbound, here.0, here.1, &format!("unbound recursion variable `{}`", id)));
        };
        let single = self.is_sym("?") || self.is_sym("!");
        self.bump();
        let mut branches: Vec<(Name, Sort, RawType)> = Vec::new();
        if single {
            branches.push(self.ty_branch(env)?);
        } else {
            self.expect("{")?;
            loop {
                let here = self.here();
                let b = self.ty_branch(env)?;
                if branches.iter().any(|x| x.0 == b.0) {
                    return Err(err(ErrorKind::DuplicateLabel, here.0, here.1, &format!("duplicate label `{}`", b.0)));
                }
                branches.push(b);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("}")?;
        }
        Ok(RawType::Comm(dir, id, branches))
    }

    fn ty_branch(&mut self, env: &mut Vec<Name>) -> Result<(Name, Sort, RawType), ParseError> {
        let l = self.ident("label")?;
        let s = self.payload()?;
        let cont = if self.eat(".") { self.ty(env)? } else { RawType::End };
        Ok((l, s, cont))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let e = self.unary()?;
        if self.is_sym(">") && *self.peek_at(1) == Tok::Int(0) {
            self.bump();
            self.bump();
            return Ok(Expr::Pos(Box::new(e)));
        }
        if self.is_sym("==") || self.is_sym("≈") {
            self.bump();
            self.expect("(")?;
            self.expect(")")?;
            return Ok(Expr::IsUnit(Box::new(e)));
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_kw("succ") {
            self.bump();
            return Ok(Expr::Succ(Box::new(self.unary()?)));
        }
        if self.is_kw("inv") {
            self.bump();
            return Ok(Expr::Inv(Box::new(self.unary()?)));
        }
        if self.is_kw("not") || self.is_sym("¬") {
            self.bump();
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Val(Value::Int(n)))
            }
            Tok::Sym("-") => {
                self.bump();
                match self.bump() {
                    Tok::Int(n) => Ok(Expr::Val(Value::Int(-n))),
                    _ => self.fail(ErrorKind::Syntax, "expected an integer after `-`"),
                }
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat(")") {
                    return Ok(Expr::Val(Value::Unit));
                }
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Expr::Val(Value::Bool(s == "true")))
            }
            Tok::Ident(_) => Ok(Expr::Var(self.ident("expression")?)),
            _ => self.fail(ErrorKind::Syntax, &format!("expected an expression, found {}", self.describe())),
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        match self.expr()? {
            Expr::Val(v) => Ok(v),
            _ => self.fail(ErrorKind::Syntax, "expected a value"),
        }
    }

    fn process(&mut self, env: &mut Vec<Name>) -> Result<Process, ParseError> {
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Process::Inact)
            }
            Tok::Sym("(") => {
                self.bump();
                let p = self.process(env)?;
                self.expect(")")?;
                Ok(p)
            }
            Tok::Ident(k) if k == "if" => {
                self.bump();
                let cond = self.expr()?;
                if !self.is_kw("then") {
                    return self.fail(ErrorKind::Syntax, "expected `then`");
                }
                self.bump();
                let then = self.process(env)?;
                if !self.is_kw("else") {
                    return self.fail(ErrorKind::Syntax, "expected `else`");
                }
                self.bump();
                let els = self.process(env)?;
                Ok(Process::Cond { cond, then: Arc::new(then), els: Arc::new(els) })
            }
            Tok::Ident(k) if k == "rec" || k == "μ" => {
                let here = self.here();
                self.bump();
                let x = self.ident("process variable")?;
                self.expect(".")?;
                env.push(x.clone());
                let body = self.process(env);
                env.pop();
                let body = body?;
                if reaches_unguarded(&body, &x) {
                    return Err(err(ErrorKind::Unguarded, here.0, here.1, &format!("unguarded recursion on `{}`", x)));
                }
                Ok(Process::Rec(x, Arc::new(body)))
            }
            Tok::Ident(_) => {
                let here = self.here();
                let id = self.ident("a process")?;
                if self.eat("!") {
                    let l = self.ident("label")?;
                    let e = if self.eat("<") {
                        let e = self.expr()?;
                        self.expect(">")?;
                        e
                    } else {
                        Expr::Val(Value::Unit)
                    };
                    let cont = if self.eat(".") { self.process(env)? } else { Process::Inact };
                    return Ok(Process::Out { peer: id, label: l, expr: e, cont: Arc::new(cont) });
                }
                if self.eat("?") {
                    let mut branches: Vec<PBranch> = Vec::new();
                    if self.eat("{") {
                        loop {
                            let here = self.here();
                            let b = self.proc_branch(env)?;
                            if branches.iter().any(|x| x.label == b.label) {
                                return Err(err(
                                    ErrorKind::DuplicateLabel,
                                    here.0,
                                    here.1,
                                    &format!("duplicate label `{}`", b.label),
                                ));
                            }
                            branches.push(b);
                            if !self.eat(",") {
                                break;
                            }
                        }
                        self.expect("}")?;
                    } else {
                        branches.push(self.proc_branch(env)?);
                    }
                    return Ok(Process::Branch { peer: id, branches });
                }
                if env.contains(&id) {
                    Ok(Process::Var(id))
                } else {
                    Err(err(ErrorKind::Unbound, here.0, here.1, &format!("unbound process variable `{}`", id)))
                }
            }
            _ => self.fail(ErrorKind::Syntax, &format!("expected a process, found {}", self.describe())),
        }
    }

    fn proc_branch(&mut self, env: &mut Vec<Name>) -> Result<PBranch, ParseError> {
        let l = self.ident("label")?;
        let var = if self.eat("(") {
            if self.eat(")") {
                name("_")
            } else {
                let v = self.ident("variable")?;
                self.expect(")")?;
                v
            }
        } else {
            name("_")
        };
        let body = if self.eat(".") { self.process(env)? } else { Process::Inact };
        Ok(PBranch { label: l, var, body: Arc::new(body) })
    }

    /// `[q!l(S), ...]` or `[]`.
    fn queue_type(&mut self) -> Result<QueueType, ParseError> {
        self.expect("[")?;
        let mut v = Vec::new();
        if !self.eat("]") {
            loop {
                let to = self.ident("participant")?;
                self.expect("!")?;
                let label = self.ident("label")?;
                let sort = self.payload()?;
                v.push(MsgType { to, label, sort });
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("]")?;
        }
        Ok(QueueType(v))
    }

    /// `[q!l<v>, ...]` or `[]`.
    fn queue(&mut self) -> Result<Queue, ParseError> {
        self.expect("[")?;
        let mut v = Vec::new();
        if !self.eat("]") {
            loop {
                let to = self.ident("participant")?;
                self.expect("!")?;
                let label = self.ident("label")?;
                let value = if self.eat("<") {
                    let x = self.value()?;
                    self.expect(">")?;
                    x
                } else {
                    Value::Unit
                };
                v.push(Msg { to, label, value });
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("]")?;
        }
        Ok(Queue(v))
    }
}

fn unguarded(t: &RawType, v: &Name) -> bool {
    match t {
        RawType::Var(x) => x == v,
        RawType::Rec(_, b) => unguarded(b, v),
        _ => false,
    }
}

fn reaches_unguarded(p: &Process, x: &Name) -> bool {
    match p {
        Process::Var(y) => y == x,
        Process::Rec(y, b) => y != x && reaches_unguarded(b, x),
        Process::Cond { then, els, .. } => reaches_unguarded(then, x) || reaches_unguarded(els, x),
        _ => false,
    }
}

pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(src, 1)?;
    let raw = p.ty(&mut Vec::new())?;
    p.finish()?;
    raw.close().map_err(|e| err(ErrorKind::Syntax, 1, 1, &e.to_string()))
}

pub fn parse_process(src: &str) -> Result<Process, ParseError> {
    let mut p = Parser::new(src, 1)?;
    let proc_ = p.process(&mut Vec::new())?;
    p.finish()?;
    Ok(proc_)
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src, 1)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_queue_type(src: &str) -> Result<QueueType, ParseError> {
    let mut p = Parser::new(src, 1)?;
    let q = p.queue_type()?;
    p.finish()?;
    Ok(q)
}

/// Splits a file into entries; a line continues the previous entry unless
/// `starts` says it opens a new one. Returns (first line number, text).
fn entries(src: &str, starts: impl Fn(&str) -> bool) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            if let Some(last) = out.last_mut() {
                last.1.push('\n');
            }
            continue;
        }
        if starts(line) || out.is_empty() {
            out.push((i + 1, String::from(line)));
        } else {
            let last = out.last_mut().unwrap();
            last.1.push('\n');
            last.1.push_str(line);
        }
    }
    out
}

fn strip_comment(line: &str) -> &str {
    let mut end = line.len();
    if let Some(i) = line.find('#') {
        end = end.min(i);
    }
    if let Some(i) = line.find("//") {
        end = end.min(i);
    }
    &line[..end]
}

fn leading_ident_then(line: &str, sym: &str) -> bool {
    let t = line.trim_start();
    let n = t.chars().take_while(|c| c.is_alphanumeric() || *c == '_' || *c == '\'').map(|c| c.len_utf8()).sum();
    n > 0 && t[n..].trim_start().starts_with(sym)
}

/// Session files: `p |> proc` and `p <| [msgs]` entries.
pub fn parse_session(src: &str) -> Result<Session, ParseError> {
    let mut parts: BTreeMap<Name, (Option<Process>, Option<Queue>)> = BTreeMap::new();
    for (line, text) in entries(src, |l| leading_ident_then(l, "|>") || leading_ident_then(l, "<|")) {
        let mut p = Parser::new(&text, line)?;
        let here = p.here();
        let who = p.ident("participant")?;
        let slot = parts.entry(who.clone()).or_insert((None, None));
        if p.eat("|>") {
            if slot.0.is_some() {
                return Err(err(ErrorKind::DuplicateParticipant, here.0, here.1, &format!("`{}` defined twice", who)));
            }
            slot.0 = Some(p.process(&mut Vec::new())?);
        } else if p.eat("<|") {
            if slot.1.is_some() {
                return Err(err(ErrorKind::DuplicateParticipant, here.0, here.1, &format!("queue of `{}` given twice", who)));
            }
            slot.1 = Some(p.queue()?);
        } else {
            return p.fail(ErrorKind::Syntax, "expected `|>` or `<|`");
        }
        p.finish()?;
    }
    Ok(Session {
        parts: parts
            .into_iter()
            .map(|(k, (pr, q))| (k, (pr.unwrap_or(Process::Inact), q.unwrap_or_default())))
            .collect(),
    })
}

/// Environment files: `p : [queue] type` entries; the queue may be omitted.
pub fn parse_env(src: &str) -> Result<TypingEnv, ParseError> {
    let mut env = TypingEnv::default();
    for (line, text) in entries(src, |l| leading_ident_then(l, ":")) {
        let mut p = Parser::new(&text, line)?;
        let here = p.here();
        let who = p.ident("participant")?;
        p.expect(":")?;
        let paren = p.eat("(");
        let q = if p.is_sym("[") { p.queue_type()? } else { QueueType::empty() };
        if paren {
            p.eat(",");
        }
        let raw = p.ty(&mut Vec::new())?;
        if paren {
            p.expect(")")?;
        }
        p.finish()?;
        let t = raw.close().map_err(|e| err(ErrorKind::Syntax, here.0, here.1, &e.to_string()))?;
        if env.entries.insert(who.clone(), (q, t)).is_some() {
            return Err(err(ErrorKind::DuplicateParticipant, here.0, here.1, &format!("`{}` defined twice", who)));
        }
    }
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::type_equal;

    #[test]
    fn parses_types() {
        let t = parse_type("rec t . p?l(nat).t").unwrap();
        assert!(matches!(t.node(), crate::types::Node::Rec(..)));
        let u = parse_type("q+{cont(int).p&{success(int).end, error(bool).end}, stop.end}").unwrap();
        assert_eq!(u.depth(), 2);
        assert!(parse_type("p!l").is_ok());
    }

    #[test]
    fn diagnostics() {
        let e = parse_type("p&{l1(nat).end, l1(int).end}").unwrap_err();
        assert_eq!(e.kind, ErrorKind::DuplicateLabel);
        assert_eq!((e.line, e.col), (1, 17));
        let e = parse_type("rec t . t").unwrap_err();
        assert_eq!(e.kind, ErrorKind::Unguarded);
        let e = parse_type("rec t . rec s . t").unwrap_err();
        assert_eq!(e.kind, ErrorKind::Unguarded);
        assert_eq!(parse_type("p!l(float).end").unwrap_err().kind, ErrorKind::UnknownSort);
        assert_eq!(parse_type("p!l.x").unwrap_err().kind, ErrorKind::Unbound);
        assert_eq!(parse_type("p!l.end end").unwrap_err().kind, ErrorKind::Syntax);
        assert_eq!(parse_process("rec X . if true then X else 0").unwrap_err().kind, ErrorKind::Unguarded);
    }

    #[test]
    fn print_parse_round_trip() {
        for s in [
            "end",
            "rec t . p?l(nat).t",
            "q+{cont(int).p&{success(int).end, error(bool).end}, stop.p&{success(int).end, error(bool).end}}",
            "rec t . p!a(nat).rec t . q!b(bool).p&{x.t, y(int).end}",
        ] {
            let t = parse_type(s).unwrap();
            let printed = alloc::format!("{}", t);
            let back = parse_type(&printed).unwrap();
            assert!(type_equal(&t, &back), "{} -> {}", s, printed);
            assert_eq!(t, back);
        }
    }

    #[test]
    fn processes_and_expressions() {
        let p = parse_process("rec X . q!l<x > 0>.p?{a(y).X, b(z).if not z then 0 else X}").unwrap();
        let printed = alloc::format!("{}", p);
        assert_eq!(parse_process(&printed).unwrap(), p);
        assert_eq!(parse_expr("succ x > 0").unwrap(), Expr::Pos(Box::new(Expr::Succ(Box::new(Expr::var("x"))))));
        assert_eq!(parse_expr("inv -3").unwrap(), Expr::Inv(Box::new(Expr::int(-3))));
        assert_eq!(parse_expr("x == ()").unwrap(), Expr::IsUnit(Box::new(Expr::var("x"))));
    }

    #[test]
    fn sessions_and_envs() {
        let m = parse_session("p |> q!l<1>.\n   0\nq |> p?l(x).0\np <| [q!m<true>]  # queued").unwrap();
        assert_eq!(m.parts.len(), 2);
        assert_eq!(m.parts[&name("p")].1 .0.len(), 1);
        let g = parse_env("p : [q!l(nat)] rec t . q!l(nat).t\nq : rec t .\n  p?l(nat).t").unwrap();
        assert_eq!(g.entries.len(), 2);
        assert_eq!(g.entries[&name("p")].0 .0.len(), 1);
        let e = parse_session("p |> 0\np |> 0").unwrap_err();
        assert_eq!(e.kind, ErrorKind::DuplicateParticipant);
        assert_eq!(e.line, 2);
    }
}
