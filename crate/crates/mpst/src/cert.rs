//! JSON form of verdicts and certificates, and the `certify` re-check.
//!
//! Words are written as `{"stem": [...], "cycle": [...]}` with one string
//! per letter (`p!l(nat)`, `q?m`), so a decoded lasso is exactly the one
//! that was encoded. Types are written in surface syntax.

use mpst_core::decomposition::is_decomposition_of;
use mpst_core::refinement::{
    check_certificate, check_negation, refine, Budget, CertStep, Closure, Judgment, NegRule, NegStep, NegationDerivation,
    RefRule, RefinementCertificate, Refutation, Verdict,
};
use mpst_core::subtyping::{check_simulation, check_uv, subtype, CellProof, Counterexample, Side, SubtypeVerdict, UvDerivation, UvRule};
use mpst_core::types::type_equal;
use mpst_core::word::{Act, Lasso};
use mpst_core::{Answer, Dir, Sort, Type};
use serde_json::{json, Map, Value};

use crate::config::RunConfig;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct DecodeError(pub String);

fn bad<T>(msg: impl Into<String>) -> Result<T, DecodeError> {
    Err(DecodeError(msg.into()))
}

pub fn answer_str(a: Answer) -> &'static str {
    match a {
        Answer::Yes => "yes",
        Answer::No => "no",
        Answer::Unknown => "unknown",
    }
}

fn answer_of(s: &str) -> Result<Answer, DecodeError> {
    match s {
        "yes" => Ok(Answer::Yes),
        "no" => Ok(Answer::No),
        "unknown" => Ok(Answer::Unknown),
        _ => bad(format!("bad verdict {:?}", s)),
    }
}

// ---------------------------------------------------------------- encoding

pub fn act(a: &Act) -> Value {
    Value::String(a.to_string())
}

pub fn word(w: &[Act]) -> Value {
    Value::Array(w.iter().map(act).collect())
}

pub fn lasso(l: &Lasso) -> Value {
    json!({ "stem": word(&l.stem), "cycle": word(&l.cycle) })
}

fn sorts(p: (Sort, Sort)) -> Value {
    json!([p.0.as_str(), p.1.as_str()])
}

fn judgment(j: &Judgment) -> (Value, Value) {
    (lasso(&j.lhs), lasso(&j.rhs))
}

pub fn certificate(c: &RefinementCertificate) -> Value {
    let steps: Vec<Value> = c
        .steps
        .iter()
        .map(|s| {
            let (l, r) = judgment(&s.judgment);
            json!({ "rule": s.rule.as_str(), "lhs": l, "rhs": r, "pos": s.pos, "sorts": sorts(s.sorts) })
        })
        .collect();
    let closure = match &c.closure {
        Closure::End => json!({ "kind": "end" }),
        Closure::Back(i) => json!({ "kind": "back", "to": i }),
        Closure::Pump { base, insert_pos, word: w } => {
            json!({ "kind": "pump", "base": base, "insert_pos": insert_pos, "word": word(w) })
        }
    };
    json!({ "shape": c.kind(), "steps": steps, "closure": closure })
}

pub fn negation(d: &NegationDerivation) -> Value {
    let steps: Vec<Value> = d
        .steps
        .iter()
        .map(|s| {
            let (l, r) = judgment(&s.judgment);
            json!({
                "rule": s.rule.as_str(),
                "lhs": l,
                "rhs": r,
                "pos": s.pos,
                "sorts": s.sorts.map(sorts).unwrap_or(Value::Null),
            })
        })
        .collect();
    json!({ "steps": steps })
}

pub fn refutation(r: &Refutation) -> Value {
    match r {
        Refutation::Negation(d) => json!({ "kind": "negation", "derivation": negation(d) }),
        Refutation::SyncFailure(walk) => {
            let w: Vec<Value> = walk
                .iter()
                .map(|j| {
                    let (l, r) = judgment(j);
                    json!({ "lhs": l, "rhs": r })
                })
                .collect();
            json!({ "kind": "sync-failure", "walk": w })
        }
    }
}

pub fn uv(d: &UvDerivation) -> Value {
    json!({
        "rule": d.rule.as_str(),
        "lhs": d.lhs.to_string(),
        "rhs": d.rhs.to_string(),
        "children": d.premises.iter().map(uv).collect::<Vec<_>>(),
    })
}

pub fn refine_doc(w: &Lasso, w2: &Lasso, v: &Verdict, cfg: &RunConfig) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), "refine".into());
    m.insert("config".into(), cfg.to_json());
    m.insert("w".into(), lasso(w));
    m.insert("w2".into(), lasso(w2));
    m.insert("answer".into(), answer_str(v.answer()).into());
    match v {
        Verdict::Yes(c) => {
            m.insert("certificate".into(), certificate(c));
        }
        Verdict::No(r) => {
            m.insert("refutation".into(), refutation(r));
        }
        Verdict::Unknown(why) => {
            m.insert("reason".into(), why.as_str().into());
        }
    }
    Value::Object(m)
}

/// The SO and SI decompositions named by the cell indices, recomputed the
/// way the engine enumerates them.
fn cell_types(t: &Type, t2: &Type, cells: &[CellProof], cfg: &RunConfig) -> (Vec<Type>, Vec<Type>) {
    let nu = cells.iter().map(|c| c.u + 1).max().unwrap_or(0);
    let nv = cells.iter().map(|c| c.v + 1).max().unwrap_or(0);
    let b = cfg.subtyping().unroll_bound;
    let us = mpst_core::decomposition::so_decompositions(t, b).take(nu).collect();
    let vs = mpst_core::decomposition::si_decompositions(t2, b).take(nv).collect();
    (us, vs)
}

pub fn counterexample(c: &Counterexample) -> Value {
    json!({
        "U": c.u.to_string(),
        "V": c.v.to_string(),
        "rule": c.rule(),
        "derivation": c.derivation.as_ref().map(uv).unwrap_or(Value::Null),
        "sample": c.sample.as_ref().map(|(w, w2, r)| json!({ "w": lasso(w), "w2": lasso(w2), "refutation": refutation(r) }))
            .unwrap_or(Value::Null),
    })
}

pub fn subtype_doc(t: &Type, t2: &Type, v: &SubtypeVerdict, cfg: &RunConfig) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), "subtype".into());
    m.insert("config".into(), cfg.to_json());
    m.insert("t".into(), t.to_string().into());
    m.insert("t2".into(), t2.to_string().into());
    m.insert("answer".into(), answer_str(v.answer()).into());
    match v {
        SubtypeVerdict::Yes(p) => {
            let (us, vs) = cell_types(t, t2, &p.cells, cfg);
            m.insert(
                "simulation".into(),
                p.simulation.as_ref().map(|r| r.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>().into()).unwrap_or(Value::Null),
            );
            let cells: Vec<Value> = p
                .cells
                .iter()
                .map(|c| {
                    json!({
                        "u": c.u,
                        "v": c.v,
                        "U": us[c.u].to_string(),
                        "V": vs[c.v].to_string(),
                        "w": lasso(&c.w),
                        "w2": lasso(&c.w2),
                        "certificate": certificate(&c.cert),
                    })
                })
                .collect();
            m.insert("cells".into(), cells.into());
            let fams: Vec<Value> = p
                .families
                .iter()
                .map(|f| {
                    json!({
                        "side": if f.side == Side::Sub { "sub" } else { "super" },
                        "member": lasso(&f.member),
                        "insert_pos": f.insert_pos,
                        "word": word(&f.word),
                        "witness_pos": f.witness_pos,
                        "witness_word": word(&f.witness_word),
                        "growth": f.growth,
                    })
                })
                .collect();
            m.insert("families".into(), fams.into());
        }
        SubtypeVerdict::No(c) => {
            m.insert("counterexample".into(), counterexample(c));
        }
        SubtypeVerdict::Unknown(why) => {
            m.insert("reason".into(), why.as_str().into());
        }
    }
    Value::Object(m)
}

// ---------------------------------------------------------------- decoding

fn field<'a>(v: &'a Value, k: &str) -> Result<&'a Value, DecodeError> {
    v.get(k).ok_or_else(|| DecodeError(format!("missing field {:?}", k)))
}

fn string<'a>(v: &'a Value, k: &str) -> Result<&'a str, DecodeError> {
    field(v, k)?.as_str().ok_or_else(|| DecodeError(format!("field {:?} is not a string", k)))
}

fn usize_of(v: &Value, k: &str) -> Result<usize, DecodeError> {
    field(v, k)?.as_u64().map(|n| n as usize).ok_or_else(|| DecodeError(format!("field {:?} is not a number", k)))
}

fn array<'a>(v: &'a Value, k: &str) -> Result<&'a Vec<Value>, DecodeError> {
    field(v, k)?.as_array().ok_or_else(|| DecodeError(format!("field {:?} is not an array", k)))
}

pub fn parse_act(s: &str) -> Result<Act, DecodeError> {
    let i = s.find(['!', '?']).ok_or_else(|| DecodeError(format!("bad letter {:?}", s)))?;
    let dir = if s.as_bytes()[i] == b'!' { Dir::Out } else { Dir::In };
    let (peer, rest) = (&s[..i], &s[i + 1..]);
    let (label, sort) = match rest.find('(') {
        Some(j) if rest.ends_with(')') => {
            let so = &rest[j + 1..rest.len() - 1];
            (&rest[..j], Sort::from_str(so).ok_or_else(|| DecodeError(format!("bad sort in {:?}", s)))?)
        }
        Some(_) => return bad(format!("bad letter {:?}", s)),
        None => (rest, Sort::Unit),
    };
    if peer.is_empty() || label.is_empty() {
        return bad(format!("bad letter {:?}", s));
    }
    Ok(Act::new(dir, peer, label, sort))
}

fn dec_word(v: &Value) -> Result<Vec<Act>, DecodeError> {
    let a = v.as_array().ok_or_else(|| DecodeError("word is not an array".into()))?;
    a.iter()
        .map(|x| x.as_str().ok_or_else(|| DecodeError("letter is not a string".into())).and_then(parse_act))
        .collect()
}

pub fn dec_lasso(v: &Value) -> Result<Lasso, DecodeError> {
    Ok(Lasso { stem: dec_word(field(v, "stem")?)?, cycle: dec_word(field(v, "cycle")?)? })
}

fn dec_sorts(v: &Value) -> Result<(Sort, Sort), DecodeError> {
    let a = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| DecodeError("sorts must be a pair".into()))?;
    let s = |x: &Value| x.as_str().and_then(Sort::from_str).ok_or_else(|| DecodeError("bad sort".into()));
    Ok((s(&a[0])?, s(&a[1])?))
}

fn dec_judgment(v: &Value) -> Result<Judgment, DecodeError> {
    Ok(Judgment::new(dec_lasso(field(v, "lhs")?)?, dec_lasso(field(v, "rhs")?)?))
}

pub fn dec_certificate(v: &Value) -> Result<RefinementCertificate, DecodeError> {
    let mut steps = Vec::new();
    for s in array(v, "steps")? {
        let rule = RefRule::from_str(string(s, "rule")?).ok_or_else(|| DecodeError("unknown refinement rule".into()))?;
        steps.push(CertStep { judgment: dec_judgment(s)?, rule, pos: usize_of(s, "pos")?, sorts: dec_sorts(field(s, "sorts")?)? });
    }
    let c = field(v, "closure")?;
    let closure = match string(c, "kind")? {
        "end" => Closure::End,
        "back" => Closure::Back(usize_of(c, "to")?),
        "pump" => Closure::Pump {
            base: usize_of(c, "base")?,
            insert_pos: usize_of(c, "insert_pos")?,
            word: dec_word(field(c, "word")?)?,
        },
        k => return bad(format!("unknown closure {:?}", k)),
    };
    if steps.is_empty() {
        return bad("certificate without steps");
    }
    Ok(RefinementCertificate { steps, closure })
}

pub fn dec_negation(v: &Value) -> Result<NegationDerivation, DecodeError> {
    let mut steps = Vec::new();
    for s in array(v, "steps")? {
        let rule = NegRule::from_str(string(s, "rule")?).ok_or_else(|| DecodeError("unknown negation rule".into()))?;
        let so = field(s, "sorts")?;
        let sorts = if so.is_null() { None } else { Some(dec_sorts(so)?) };
        steps.push(NegStep { judgment: dec_judgment(s)?, rule, pos: usize_of(s, "pos")?, sorts });
    }
    if steps.is_empty() {
        return bad("negation derivation without steps");
    }
    Ok(NegationDerivation { steps })
}

fn dec_type(v: &Value, k: &str) -> Result<Type, DecodeError> {
    let s = string(v, k)?;
    Type::parse(s).map_err(|e| DecodeError(format!("field {:?}: {}", k, e)))
}

pub fn dec_uv(v: &Value) -> Result<UvDerivation, DecodeError> {
    let rule = UvRule::from_str(string(v, "rule")?).ok_or_else(|| DecodeError("unknown shape rule".into()))?;
    let premises = array(v, "children")?.iter().map(dec_uv).collect::<Result<_, _>>()?;
    Ok(UvDerivation { rule, lhs: dec_type(v, "lhs")?, rhs: dec_type(v, "rhs")?, premises })
}

// ---------------------------------------------------------------- certify

/// Outcome of re-validating a document: the number of certificates and
/// derivations checked, or the first failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Check {
    Valid { checked: usize },
    Invalid(String),
}

fn validate_refutation(v: &Value, w: &Lasso, w2: &Lasso) -> Result<usize, String> {
    let root = Judgment::new(w.clone(), w2.clone());
    match string(v, "kind").map_err(|e| e.0)? {
        "negation" => {
            let d = dec_negation(field(v, "derivation").map_err(|e| e.0)?).map_err(|e| e.0)?;
            if *d.root() != root {
                return Err(format!("negation root {} is not {}", d.root(), root));
            }
            check_negation(&d).map(|_| 1)
        }
        "sync-failure" => {
            // replayed by re-running the synchronous walk
            let v = refine(w, w2, &Budget { sync: true, ..Budget::default() });
            if v.answer() == Answer::No {
                Ok(1)
            } else {
                Err(String::from("synchronous walk does not fail"))
            }
        }
        k => Err(format!("unknown refutation {:?}", k)),
    }
}

fn validate_cert(v: &Value, w: &Lasso, w2: &Lasso) -> Result<usize, String> {
    let c = dec_certificate(v).map_err(|e| e.0)?;
    let root = Judgment::new(w.clone(), w2.clone());
    if *c.root() != root {
        return Err(format!("certificate root {} is not {}", c.root(), root));
    }
    check_certificate(&c).map(|_| 1)
}

fn certify_refine(doc: &Value, cfg: &RunConfig) -> Result<usize, String> {
    let w = dec_lasso(field(doc, "w").map_err(|e| e.0)?).map_err(|e| e.0)?;
    let w2 = dec_lasso(field(doc, "w2").map_err(|e| e.0)?).map_err(|e| e.0)?;
    let claimed = answer_of(string(doc, "answer").map_err(|e| e.0)?).map_err(|e| e.0)?;
    let n = match claimed {
        Answer::Yes => validate_cert(field(doc, "certificate").map_err(|e| e.0)?, &w, &w2)?,
        Answer::No => validate_refutation(field(doc, "refutation").map_err(|e| e.0)?, &w, &w2)?,
        Answer::Unknown => 0,
    };
    let again = refine(&w, &w2, &cfg.budget()).answer();
    if again != claimed {
        return Err(format!("recomputed verdict is {}, document claims {}", answer_str(again), answer_str(claimed)));
    }
    Ok(n)
}

fn certify_subtype(doc: &Value, cfg: &RunConfig) -> Result<usize, String> {
    let e = |e: DecodeError| e.0;
    let t = dec_type(doc, "t").map_err(e)?;
    let t2 = dec_type(doc, "t2").map_err(e)?;
    let claimed = answer_of(string(doc, "answer").map_err(e)?).map_err(e)?;
    let mut n = 0;
    match claimed {
        Answer::Yes => {
            let sim = field(doc, "simulation").map_err(e)?;
            if !sim.is_null() {
                let pairs = sim.as_array().ok_or("simulation is not an array")?;
                let mut rel = Vec::new();
                for p in pairs {
                    match p.as_array().map(|a| (a.first().and_then(Value::as_u64), a.get(1).and_then(Value::as_u64))) {
                        Some((Some(a), Some(b))) => rel.push((a as usize, b as usize)),
                        _ => return Err(String::from("simulation pairs must be pairs of node numbers")),
                    }
                }
                check_simulation(&t, &t2, &rel)?;
                n += 1;
            }
            for (i, c) in array(doc, "cells").map_err(e)?.iter().enumerate() {
                let u = dec_type(c, "U").map_err(e)?;
                let v = dec_type(c, "V").map_err(e)?;
                let w = dec_lasso(field(c, "w").map_err(e)?).map_err(e)?;
                let w2 = dec_lasso(field(c, "w2").map_err(e)?).map_err(e)?;
                if !is_decomposition_of(&u, &t, Dir::Out) || !is_decomposition_of(&v, &t2, Dir::In) {
                    return Err(format!("cell {}: U or V' is not a decomposition of the input types", i));
                }
                if !is_decomposition_of(&w.to_type(), &u, Dir::In) || !is_decomposition_of(&w2.to_type(), &v, Dir::Out) {
                    return Err(format!("cell {}: the SISO words are not paths of U and V'", i));
                }
                n += validate_cert(field(c, "certificate").map_err(e)?, &w, &w2).map_err(|m| format!("cell {}: {}", i, m))?;
            }
        }
        Answer::No => {
            let c = field(doc, "counterexample").map_err(e)?;
            let u = dec_type(c, "U").map_err(e)?;
            let v = dec_type(c, "V").map_err(e)?;
            if !is_decomposition_of(&u, &t, Dir::Out) || !is_decomposition_of(&v, &t2, Dir::In) {
                return Err(String::from("counterexample pair is not a pair of decompositions"));
            }
            let d = field(c, "derivation").map_err(e)?;
            if !d.is_null() {
                let d = dec_uv(d).map_err(e)?;
                if !type_equal(&d.lhs, &u) || !type_equal(&d.rhs, &v) {
                    return Err(String::from("shape derivation is about another pair"));
                }
                check_uv(&d)?;
                n += 1;
            }
            let s = field(c, "sample").map_err(e)?;
            if !s.is_null() {
                let w = dec_lasso(field(s, "w").map_err(e)?).map_err(e)?;
                let w2 = dec_lasso(field(s, "w2").map_err(e)?).map_err(e)?;
                if !is_decomposition_of(&w.to_type(), &u, Dir::In) || !is_decomposition_of(&w2.to_type(), &v, Dir::Out) {
                    return Err(String::from("sample words are not paths of U and V'"));
                }
                n += validate_refutation(field(s, "refutation").map_err(e)?, &w, &w2)?;
            }
        }
        Answer::Unknown => {}
    }
    let again = subtype(&t, &t2, &cfg.subtyping()).answer();
    if again != claimed {
        return Err(format!("recomputed verdict is {}, document claims {}", answer_str(again), answer_str(claimed)));
    }
    Ok(n)
}

/// Re-validates a document produced by `subtype` or `refine` (or a
/// `typecheck` document, whose `t-sub` verdicts are checked one by one).
/// The verdict is recomputed under the configuration recorded in the
/// document and must agree with it.
pub fn certify(doc: &Value) -> Check {
    let cfg = match doc.get("config") {
        Some(c) => match RunConfig::from_json(c) {
            Ok(c) => c,
            Err(e) => return Check::Invalid(e.0),
        },
        None => RunConfig::default(),
    };
    let r = match doc.get("command").and_then(Value::as_str) {
        Some("refine") => certify_refine(doc, &cfg),
        Some("subtype") => certify_subtype(doc, &cfg),
        Some("typecheck") => certify_typing(doc, &cfg),
        Some(k) => Err(format!("nothing to certify in a {:?} document", k)),
        None => Err(String::from("not a verdict document")),
    };
    match r {
        Ok(checked) => Check::Valid { checked },
        Err(m) => Check::Invalid(m),
    }
}

fn certify_typing(doc: &Value, cfg: &RunConfig) -> Result<usize, String> {
    fn walk(v: &Value, cfg: &RunConfig, n: &mut usize) -> Result<(), String> {
        if let Some(s) = v.get("subtype") {
            *n += certify_subtype(s, cfg)?;
            if s.get("answer").and_then(Value::as_str) != Some("yes") {
                return Err(String::from("t-sub node without a yes verdict"));
            }
        }
        if let Some(cs) = v.get("children").and_then(Value::as_array) {
            for c in cs {
                walk(c, cfg, n)?;
            }
        }
        Ok(())
    }
    let mut n = 0;
    if let Some(d) = doc.get("derivation") {
        walk(d, cfg, &mut n)?;
    }
    Ok(n)
}

/// Documents for every one-edge mutant of the certificates and negation
/// derivations in `doc`, plus every simulation with one pair dropped (the
/// `certify` mutation test).
pub fn mutants(doc: &Value) -> Vec<Value> {
    let mut out = Vec::new();
    collect_mutants(doc, &mut Vec::new(), doc, &mut out);
    out
}

fn collect_mutants(root: &Value, path: &mut Vec<PathSeg>, here: &Value, out: &mut Vec<Value>) {
    let replace = |root: &Value, path: &[PathSeg], new: Value| {
        let mut r = root.clone();
        let mut cur = &mut r;
        for seg in path {
            cur = match seg {
                PathSeg::Key(k) => cur.get_mut(k.as_str()).expect("path exists"),
                PathSeg::Idx(i) => cur.get_mut(*i).expect("path exists"),
            };
        }
        *cur = new;
        r
    };
    if here.get("closure").is_some() && here.get("steps").is_some() {
        if let Ok(c) = dec_certificate(here) {
            for m in mpst_core::refinement::certificate_mutants(&c) {
                out.push(replace(root, path, certificate(&m)));
            }
        }
        return;
    }
    if here.get("steps").is_some() && here.get("closure").is_none() {
        if let Ok(d) = dec_negation(here) {
            for m in mpst_core::refinement::negation_mutants(&d) {
                out.push(replace(root, path, negation(&m)));
            }
        }
        return;
    }
    match here {
        Value::Object(m) => {
            // a simulation loses one pair at a time
            if let Some(Value::Array(rel)) = m.get("simulation") {
                for i in 0..rel.len() {
                    let mut r = rel.clone();
                    r.remove(i);
                    path.push(PathSeg::Key(String::from("simulation")));
                    out.push(replace(root, path, Value::Array(r)));
                    path.pop();
                }
            }
            for (k, v) in m {
                path.push(PathSeg::Key(k.clone()));
                collect_mutants(root, path, v, out);
                path.pop();
            }
        }
        Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                path.push(PathSeg::Idx(i));
                collect_mutants(root, path, v, out);
                path.pop();
            }
        }
        _ => {}
    }
}

enum PathSeg {
    Key(String),
    Idx(usize),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letters_round_trip() {
        for s in ["p!l(nat)", "q?m", "r?x(bool)", "p!a(int)"] {
            assert_eq!(act(&parse_act(s).unwrap()), Value::String(s.into()));
        }
        assert!(parse_act("p!").is_err());
        assert!(parse_act("pl(nat)").is_err());
        assert!(parse_act("p!l(real)").is_err());
    }

    #[test]
    fn refine_documents_certify() {
        let cfg = RunConfig::default();
        let w = Lasso::parse("q!b(nat).p?a(nat).end").unwrap();
        let w2 = Lasso::parse("p?a(nat).q!b(nat).end").unwrap();
        for (x, y, ans) in [(&w, &w2, Answer::Yes), (&w2, &w, Answer::No)] {
            let v = refine(x, y, &cfg.budget());
            assert_eq!(v.answer(), ans);
            let doc = refine_doc(x, y, &v, &cfg);
            let text = serde_json::to_string(&doc).unwrap();
            let back: Value = serde_json::from_str(&text).unwrap();
            assert!(matches!(certify(&back), Check::Valid { checked: 1 }), "{:?}", certify(&back));
            // a document with the other verdict is rejected
            let mut liar = back.clone();
            liar["answer"] = Value::String(answer_str(if ans == Answer::Yes { Answer::No } else { Answer::Yes }).into());
            assert!(matches!(certify(&liar), Check::Invalid(_)));
        }
    }
}
