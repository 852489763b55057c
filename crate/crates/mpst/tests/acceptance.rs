//! Acceptance criteria 1 to 9. Prints one line per criterion and fails if
//! any criterion fails. Runtime limits are pinned below.

#[path = "../../core/tests/props/mod.rs"]
mod props;

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use mpst::cert::{self, Check};
use mpst::config::RunConfig;
use mpst_core::calculus::{run, RunOutcome, Scheduler, Session};
use mpst_core::characteristic::{completeness_oracle, ORACLE_STEP_LIMIT};
use mpst_core::corpus::{brute_force_subtype, corpus_pairs, examples, CaseKind};
use mpst_core::decomposition::{si_decompositions, so_decompositions};
use mpst_core::environment::{check_live, LiveConfig, Liveness, Obligation, TypingEnv};
use mpst_core::refinement::{NegRule, Refutation};
use mpst_core::subtyping::{subtype, Config, SubtypeVerdict};
use mpst_core::typesystem::{check_session, Typing};
use mpst_core::{Answer, Dir, Type};
use serde_json::Value;

const INTRO_LIMIT: Duration = Duration::from_secs(1);
const ACTION_LIMIT: Duration = Duration::from_secs(1);
const CONCUR19_LIMIT: Duration = Duration::from_secs(10);
const DBUF_LIMIT: Duration = Duration::from_secs(30);
const LIVE_LIMIT: Duration = Duration::from_secs(5);
const CORPUS_LIMIT: Duration = Duration::from_secs(300);
/// States explored by the double-buffering run.
const DBUF_STATES: usize = 10_000;
/// Queue bound of the double-buffering liveness check.
const DBUF_K: usize = 4;

fn ex(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "examples", name].iter().collect()
}

fn src(name: &str) -> String {
    std::fs::read_to_string(ex(name)).unwrap()
}

fn ty(name: &str) -> Type {
    Type::parse(&src(name)).unwrap()
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: String) -> Outcome {
    Outcome { ok: true, detail }
}

fn fail(detail: String) -> Outcome {
    Outcome { ok: false, detail }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let el = t.elapsed();
    if el > limit {
        o.ok = false;
        o.detail = format!("{}; took {:.2?}, limit {:?}", o.detail, el, limit);
    } else {
        o.detail = format!("{} ({:.2?})", o.detail, el);
    }
    o
}

fn sample_leaf(v: &SubtypeVerdict) -> Option<NegRule> {
    match v {
        SubtypeVerdict::No(c) => match &c.sample {
            Some((_, _, Refutation::Negation(d))) => Some(d.leaf()),
            _ => None,
        },
        _ => None,
    }
}

fn doc_ok(doc: &Value) -> Result<(), String> {
    match cert::certify(doc) {
        Check::Valid { .. } => Ok(()),
        Check::Invalid(why) => Err(why),
    }
}

fn criterion1() -> Outcome {
    let cfg = Config::default();
    let (t, t2) = (ty("intro_Tp.st"), ty("intro_T.st"));
    let yes = timed(INTRO_LIMIT, || {
        let v = subtype(&t, &t2, &cfg);
        if v.answer() != Answer::Yes {
            return fail(format!("T' <= T answered {:?}", v.answer()));
        }
        match doc_ok(&cert::subtype_doc(&t, &t2, &v, &RunConfig::default())) {
            Ok(()) => pass(String::from("T' <= T yes, certificate valid")),
            Err(e) => fail(format!("certificate rejected: {}", e)),
        }
    });
    let no = timed(INTRO_LIMIT, || {
        let v = subtype(&t2, &t, &cfg);
        let SubtypeVerdict::No(c) = &v else { return fail(format!("T <= T' answered {:?}", v.answer())) };
        match sample_leaf(&v) {
            Some(NegRule::Io1) => pass(format!("T <= T' no with U = {} and V' = {}, leaf n-i-o-1", c.u, c.v)),
            other => fail(format!("T <= T' no, but the refutation leaf is {:?}", other.map(|r| r.as_str()))),
        }
    });
    Outcome { ok: yes.ok && no.ok, detail: format!("{}; {}", yes.detail, no.detail) }
}

fn criterion2() -> Outcome {
    timed(ACTION_LIMIT, || {
        let mut notes = Vec::new();
        for p in ["input", "output"] {
            let (t, t2) = (ty(&format!("forget_{}_T.st", p)), ty(&format!("forget_{}_Tp.st", p)));
            let v = subtype(&t, &t2, &Config::default());
            match sample_leaf(&v) {
                Some(r) if r.is_action_axiom() => notes.push(format!("{}: no, leaf {}", p, r.as_str())),
                other => return fail(format!("{}: {:?}, leaf {:?}", p, v.answer(), other.map(|r| r.as_str()))),
            }
        }
        pass(notes.join(", "))
    })
}

fn criterion3() -> Outcome {
    timed(CONCUR19_LIMIT, || {
        let (t, t2) = (ty("concur19_T.st"), ty("concur19_Tp.st"));
        let v = subtype(&t, &t2, &Config::default());
        let SubtypeVerdict::Yes(p) = &v else { return fail(format!("answered {:?}", v.answer())) };
        let pumped = p.cells.iter().filter(|c| c.cert.kind() == "pumped").count();
        if pumped == 0 || p.families.is_empty() {
            return fail(format!("yes, but {} pumped certificates and {} families", pumped, p.families.len()));
        }
        match doc_ok(&cert::subtype_doc(&t, &t2, &v, &RunConfig::default())) {
            Ok(()) => pass(format!("yes, {} cells ({} pumped), {} family", p.cells.len(), pumped, p.families.len())),
            Err(e) => fail(format!("certificate rejected: {}", e)),
        }
    })
}

fn criterion4() -> Outcome {
    timed(DBUF_LIMIT, || {
        let cfg = Config::default();
        let v = subtype(&ty("dbuf_ctl_opt.st"), &ty("dbuf_ctl.st"), &cfg);
        if v.answer() != Answer::Yes {
            return fail(format!("T*_ctl <= T_ctl answered {:?}", v.answer()));
        }
        let g = TypingEnv::parse(&src("dbuf.env")).unwrap();
        let l = check_live(&g, &LiveConfig { queue_bound: DBUF_K, ..LiveConfig::default() });
        if l != Liveness::Live {
            return fail(format!("environment: {:?}", l.answer()));
        }
        let m = Session::parse(&src("dbuf.sess")).unwrap();
        if !matches!(check_session(&g, &m, &cfg), Typing::Derived(_)) {
            return fail(String::from("session does not type-check"));
        }
        match run(&m, Scheduler::Exhaustive, DBUF_STATES) {
            RunOutcome::Error { rule, .. } => fail(format!("run reaches {}", rule)),
            RunOutcome::Terminated { states, .. } => pass(format!("subtype yes, live with K = {}, typed, {} states without error (all)", DBUF_K, states)),
            RunOutcome::LimitReached { states, .. } => pass(format!("subtype yes, live with K = {}, typed, {} states without error", DBUF_K, states)),
        }
    })
}

fn criterion5() -> Outcome {
    timed(LIVE_LIMIT, || {
        let live = check_live(&TypingEnv::parse(&src("live_pq.env")).unwrap(), &LiveConfig::default());
        if live != Liveness::Live {
            return fail(format!("Γ answered {:?}", live.answer()));
        }
        match check_live(&TypingEnv::parse(&src("starving_r.env")).unwrap(), &LiveConfig::default()) {
            Liveness::NotLive(w) => {
                let r_inputs = w.cycle.iter().any(|a| &*a.who == "r" && a.dir == Dir::In);
                let starves = matches!(&w.violated, Obligation::Receive { who, .. } if &**who == "r");
                if !w.cycle.is_empty() && starves && !r_inputs {
                    pass(format!("Γ live; Γ' not live, lasso {}", w))
                } else {
                    fail(format!("Γ' not live, but the lasso does not starve r: {}", w))
                }
            }
            other => fail(format!("Γ' answered {:?}", other.answer())),
        }
    })
}

/// Criteria 6, 7 and the corpus half of 9 share one pass.
struct CorpusRun {
    pairs: usize,
    yes: usize,
    no: usize,
    unknown: usize,
    disagreements: Vec<String>,
    oracle_misses: Vec<String>,
    oracle_runs: usize,
    certified: usize,
    cert_failures: Vec<String>,
    mutants: usize,
    mutants_accepted: usize,
    elapsed: Duration,
}

fn corpus_pass() -> CorpusRun {
    let t = Instant::now();
    let cfg = Config::default();
    let rc = RunConfig::default();
    let pairs = corpus_pairs();
    let mut r = CorpusRun {
        pairs: pairs.len(),
        yes: 0,
        no: 0,
        unknown: 0,
        disagreements: Vec::new(),
        oracle_misses: Vec::new(),
        oracle_runs: 0,
        certified: 0,
        cert_failures: Vec::new(),
        mutants: 0,
        mutants_accepted: 0,
        elapsed: Duration::ZERO,
    };
    for (a, b) in &pairs {
        let v = subtype(a, b, &cfg);
        let bf = brute_force_subtype(a, b).unwrap();
        match &v {
            SubtypeVerdict::Yes(_) => {
                r.yes += 1;
                if !bf {
                    r.disagreements.push(format!("{} <= {}: yes, brute force no", a, b));
                }
                for u in so_decompositions(a, cfg.unroll_bound) {
                    for w in si_decompositions(b, cfg.unroll_bound) {
                        r.oracle_runs += 1;
                        if completeness_oracle(&u, &w, ORACLE_STEP_LIMIT).unwrap().is_error() {
                            r.oracle_misses.push(format!("{} <= {}: yes, but ({}, {}) errs", a, b, u, w));
                        }
                    }
                }
            }
            SubtypeVerdict::No(c) => {
                r.no += 1;
                if bf {
                    r.disagreements.push(format!("{} <= {}: no, brute force yes", a, b));
                }
                r.oracle_runs += 1;
                if !completeness_oracle(&c.u, &c.v, ORACLE_STEP_LIMIT).unwrap().is_error() {
                    r.oracle_misses.push(format!("{} <= {}: no, but ({}, {}) does not err", a, b, c.u, c.v));
                }
            }
            SubtypeVerdict::Unknown(_) => {
                r.unknown += 1;
                r.disagreements.push(format!("{} <= {}: unknown", a, b));
            }
        }
        let doc = cert::subtype_doc(a, b, &v, &rc);
        r.certified += 1;
        if let Err(e) = doc_ok(&doc) {
            r.cert_failures.push(format!("{} <= {}: {}", a, b, e));
        }
        for m in cert::mutants(&doc) {
            r.mutants += 1;
            if doc_ok(&m).is_ok() {
                r.mutants_accepted += 1;
            }
        }
    }
    r.elapsed = t.elapsed();
    r
}

fn first(v: &[String]) -> String {
    v.first().cloned().unwrap_or_default()
}

fn criterion6(c: &CorpusRun) -> Outcome {
    let detail = format!(
        "{} pairs ({} yes, {} no), {} oracle runs, {} mismatches",
        c.pairs,
        c.yes,
        c.no,
        c.oracle_runs,
        c.oracle_misses.len()
    );
    let ok = c.oracle_misses.is_empty() && c.unknown == 0 && c.elapsed <= CORPUS_LIMIT;
    Outcome {
        ok,
        detail: if ok {
            format!("{} ({:.2?} for the shared corpus pass)", detail, c.elapsed)
        } else {
            format!("{}; {} unknown; {:.2?} (limit {:?}); {}", detail, c.unknown, c.elapsed, CORPUS_LIMIT, first(&c.oracle_misses))
        },
    }
}

fn criterion7(c: &CorpusRun) -> Outcome {
    let detail = format!("{} pairs, {} disagreements with brute force", c.pairs, c.disagreements.len());
    if c.disagreements.is_empty() {
        pass(detail)
    } else {
        fail(format!("{}; {}", detail, first(&c.disagreements)))
    }
}

fn criterion8() -> Outcome {
    // minimal share of cases meeting each property's premise, per mille
    let min = [1000, 100, 100, 100, 100, 1000, 1000, 700];
    let t = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    for ((name, f), m) in props::SUITES.iter().zip(min) {
        match f() {
            Ok(s) if s.exercised * 1000 >= m * s.cases => notes.push(format!("{} {}/{}", name, s.exercised, s.cases)),
            Ok(s) => {
                ok = false;
                notes.push(format!("{} vacuous ({}/{})", name, s.exercised, s.cases));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("{} VIOLATED: {}", name, e.lines().next().unwrap_or("")));
            }
        }
    }
    Outcome { ok, detail: format!("{} ({:.2?})", notes.join(", "), t.elapsed()) }
}

fn mpst(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mpst")).args(args).env_remove("MPST_FORMAT").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

/// Replays every example case through the command line in JSON mode,
/// certifies each emitted document with its mutants, and folds in the
/// corpus documents.
fn criterion9(c: &CorpusRun) -> Outcome {
    let dir = std::env::temp_dir().join(format!("mpst-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (mut docs, mut mutants, mut problems) = (0, 0, Vec::new());
    let mut replay = |name: &str, args: Vec<String>, expected: Answer| {
        let mut full = vec![String::from("--format"), String::from("json")];
        full.extend(args);
        let refs: Vec<&str> = full.iter().map(String::as_str).collect();
        let (code, out) = mpst(&refs);
        let want = match expected {
            Answer::Yes => 0,
            Answer::No => 1,
            Answer::Unknown => 2,
        };
        if code != want {
            problems.push(format!("{}: exit {} instead of {}", name, code, want));
            return;
        }
        let f = dir.join(format!("{}.json", name));
        std::fs::write(&f, &out).unwrap();
        let cmd = serde_json::from_str::<Value>(&out).ok().and_then(|d| d["command"].as_str().map(String::from));
        if !matches!(cmd.as_deref(), Some("subtype" | "refine" | "typecheck")) {
            return;
        }
        let (code, out) = mpst(&["--format", "json", "certify", "--mutants", f.to_str().unwrap()]);
        let d: Value = serde_json::from_str(&out).unwrap();
        docs += 1;
        mutants += d["mutants"]["generated"].as_u64().unwrap_or(0);
        if code != 0 {
            problems.push(format!("{}: certify says {}", name, d["result"]["reason"]));
        }
    };
    for case in examples() {
        let files: Vec<String> = case.files.iter().map(|f| ex(f).to_string_lossy().into_owned()).collect();
        let cmd = match case.kind {
            CaseKind::Subtype => "subtype",
            CaseKind::Typecheck => "typecheck",
            CaseKind::Live => "live",
            CaseKind::Run => "run",
        };
        let mut args = vec![cmd.to_string()];
        args.extend(files);
        if case.kind == CaseKind::Run {
            args.extend([String::from("--step-limit"), DBUF_STATES.to_string()]);
        }
        replay(case.name, args, case.expected);
    }
    // refine documents for the single-path pairs
    for p in ["input", "output"] {
        let args = vec![
            String::from("refine"),
            ex(&format!("forget_{}_T.st", p)).to_string_lossy().into_owned(),
            ex(&format!("forget_{}_Tp.st", p)).to_string_lossy().into_owned(),
        ];
        replay(&format!("refine-forget-{}", p), args, Answer::No);
    }
    problems.extend(c.cert_failures.iter().take(3).cloned());
    if c.mutants_accepted > 0 {
        problems.push(format!("{} corpus mutants accepted", c.mutants_accepted));
    }
    let detail = format!(
        "{} example documents with {} mutants via the command line, {} corpus documents with {} mutants; {} problems",
        docs,
        mutants,
        c.certified,
        c.mutants,
        problems.len() + c.cert_failures.len().saturating_sub(3)
    );
    if problems.is_empty() {
        pass(detail)
    } else {
        fail(format!("{}; {}", detail, problems.join("; ")))
    }
}

#[test]
fn acceptance() {
    let mut results = vec![
        ("intro subtyping", criterion1()),
        ("action-clause rejections", criterion2()),
        ("CONCUR19 pumping", criterion3()),
        ("double buffering", criterion4()),
        ("liveness examples", criterion5()),
    ];
    let corpus = corpus_pass();
    results.push(("oracle dichotomy", criterion6(&corpus)));
    results.push(("brute-force equivalence", criterion7(&corpus)));
    results.push(("property suites", criterion8()));
    results.push(("certificate integrity", criterion9(&corpus)));
    for (i, (name, o)) in results.iter().enumerate() {
        println!("criterion {} [{}]: {} {}", i + 1, name, if o.ok { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, (_, o))| !o.ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {:?}", failed);
}
