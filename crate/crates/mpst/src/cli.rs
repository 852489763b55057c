use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use mpst_core::calculus::{run, RunOutcome, Scheduler, Session};
use mpst_core::characteristic::{oracle_session, OracleOutcome};
use mpst_core::environment::{check_live, Liveness, TypingEnv};
use mpst_core::refinement::{refine, Verdict};
use mpst_core::subtyping::subtype;
use mpst_core::syntax::ParseError;
use mpst_core::typesystem::{check_session, TypeDerivation, Typing};
use mpst_core::word::Lasso;
use mpst_core::{Answer, Type};
use serde_json::{json, Value};

use crate::cert::{self, answer_str, Check};
use crate::config::{Format, RunConfig};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mpst", version, about = "Asynchronous multiparty session subtyping")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide T <= T' (exit 0 yes, 1 no, 2 unknown)
    Subtype { sub: PathBuf, sup: PathBuf },
    /// Decide W refines W' for single-path types
    Refine { sub: PathBuf, sup: PathBuf },
    /// Type-check a session against an environment
    Typecheck { session: PathBuf, env: PathBuf },
    /// Explore the reductions of a session (exit 1 when error is reachable)
    Run {
        session: PathBuf,
        /// Follow one fair random trace instead of exploring every state
        #[arg(long)]
        random: bool,
    },
    /// Check liveness of a typing environment
    Live { env: PathBuf },
    /// Run the characteristic session of (U, V') looking for an error
    Oracle { sub: PathBuf, sup: PathBuf },
    /// Re-validate a JSON document emitted by subtype, refine or typecheck
    Certify {
        file: PathBuf,
        /// Also check that every one-edge mutant of its certificates is rejected
        #[arg(long)]
        mutants: bool,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", file.display())]
    Io { file: PathBuf, source: std::io::Error },
    #[error("{}:{err}", file.display())]
    Parse { file: PathBuf, err: ParseError },
    #[error("{0}")]
    Usage(String),
}

/// What an invocation prints and how it exits.
#[derive(Debug)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn read(file: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(file).map_err(|source| CliError::Io { file: file.to_path_buf(), source })
}

fn parse_with<T>(file: &Path, f: impl Fn(&str) -> Result<T, ParseError>) -> Result<T, CliError> {
    let src = read(file)?;
    f(&src).map_err(|err| CliError::Parse { file: file.to_path_buf(), err })
}

fn load_type(file: &Path) -> Result<Type, CliError> {
    parse_with(file, Type::parse)
}

fn code(a: Answer) -> i32 {
    match a {
        Answer::Yes => EXIT_YES,
        Answer::No => EXIT_NO,
        Answer::Unknown => EXIT_UNKNOWN,
    }
}

struct Report {
    answer: Answer,
    human: String,
    json: Value,
}

pub fn run_cli<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let ok = matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion);
            let text = e.render().to_string();
            return if ok {
                Output { code: 0, stdout: text, stderr: String::new() }
            } else {
                Output { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok(r) => {
            let stdout = match cli.config.format {
                Format::Human => r.human,
                Format::Json => serde_json::to_string_pretty(&r.json).expect("serializable") + "\n",
            };
            Output { code: code(r.answer), stdout, stderr: String::new() }
        }
        Err(e) => Output { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {}\n", e) },
    }
}

fn execute(cli: &Cli) -> Result<Report, CliError> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Subtype { sub, sup } => {
            let (t, t2) = (load_type(sub)?, load_type(sup)?);
            let v = subtype(&t, &t2, &cfg.subtyping());
            Ok(Report { answer: v.answer(), human: v.to_string(), json: cert::subtype_doc(&t, &t2, &v, cfg) })
        }
        Command::Refine { sub, sup } => {
            let siso = |f: &Path| -> Result<Lasso, CliError> {
                let t = load_type(f)?;
                Lasso::from_type(&t).ok_or_else(|| CliError::Usage(format!("{}: not a single-path type", f.display())))
            };
            let (w, w2) = (siso(sub)?, siso(sup)?);
            let v = refine(&w, &w2, &cfg.budget());
            let mut h = String::new();
            match &v {
                Verdict::Yes(c) => {
                    let _ = writeln!(h, "yes: {} certificate, {} steps", c.kind(), c.steps.len());
                    for s in &c.steps {
                        let _ = writeln!(h, "  [{}] {}", s.rule.as_str(), s.judgment);
                    }
                }
                Verdict::No(r) => {
                    let _ = writeln!(h, "no");
                    match r {
                        mpst_core::refinement::Refutation::Negation(d) => {
                            for s in &d.steps {
                                let _ = writeln!(h, "  [{}] {}", s.rule.as_str(), s.judgment);
                            }
                        }
                        mpst_core::refinement::Refutation::SyncFailure(walk) => {
                            for j in walk {
                                let _ = writeln!(h, "  {}", j);
                            }
                        }
                    }
                }
                Verdict::Unknown(why) => {
                    let _ = writeln!(h, "unknown: {}", why);
                }
            }
            Ok(Report { answer: v.answer(), human: h, json: cert::refine_doc(&w, &w2, &v, cfg) })
        }
        Command::Typecheck { session, env } => {
            let m = parse_with(session, Session::parse)?;
            let g = parse_with(env, TypingEnv::parse)?;
            let r = check_session(&g, &m, &cfg.subtyping());
            let (human, detail) = match &r {
                Typing::Derived(d) => (format!("well typed\n{}", d), json!({ "derivation": derivation(d, cfg) })),
                Typing::Fails(why) => (format!("ill typed: {}\n", why), json!({ "reason": why })),
                Typing::Unknown(why) => (format!("unknown: {}\n", why), json!({ "reason": why })),
            };
            let mut doc = json!({ "command": "typecheck", "config": cfg.to_json(), "answer": answer_str(r.answer()) });
            merge(&mut doc, detail);
            Ok(Report { answer: r.answer(), human, json: doc })
        }
        Command::Run { session, random } => {
            let m = parse_with(session, Session::parse)?;
            let sched = if *random { Scheduler::Random(cfg.seed) } else { Scheduler::Exhaustive };
            let out = run(&m, sched, cfg.step_limit as usize);
            Ok(run_report(&out, cfg))
        }
        Command::Live { env } => {
            let g = parse_with(env, TypingEnv::parse)?;
            let l = check_live(&g, &cfg.live());
            let (human, detail) = match &l {
                Liveness::Live => (String::from("live\n"), json!({})),
                Liveness::NotLive(w) => (
                    format!("not live\n  {}\n", w),
                    json!({ "witness": {
                        "stem": w.stem.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                        "cycle": w.cycle.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                        "violated": w.violated.to_string(),
                    }}),
                ),
                Liveness::Unknown(why) => (format!("unknown: {}\n", why), json!({ "reason": why })),
            };
            let mut doc = json!({ "command": "live", "config": cfg.to_json(), "answer": answer_str(l.answer()) });
            merge(&mut doc, detail);
            Ok(Report { answer: l.answer(), human, json: doc })
        }
        Command::Oracle { sub, sup } => {
            let (u, v) = (load_type(sub)?, load_type(sup)?);
            let (_, m) = oracle_session(&u, &v).map_err(CliError::Usage)?;
            let out = match run(&m, Scheduler::Exhaustive, cfg.step_limit as usize) {
                RunOutcome::Error { rule, trace } => OracleOutcome::ErrorReached { rule, trace },
                RunOutcome::Terminated { states, .. } => OracleOutcome::NoErrorWithinLimit { states, exhausted: true },
                RunOutcome::LimitReached { states, .. } => OracleOutcome::NoErrorWithinLimit { states, exhausted: false },
            };
            let mut h = format!("session:\n{}\n", m);
            let (answer, detail) = match &out {
                // an error refutes the subtyping question, hence exit 1
                OracleOutcome::ErrorReached { rule, trace } => {
                    let _ = writeln!(h, "error reached by {} after {} steps:", rule, trace.len());
                    for s in trace {
                        let _ = writeln!(h, "  {}", s);
                    }
                    (Answer::No, json!({ "outcome": "error", "rule": rule.as_str(), "trace": trace }))
                }
                OracleOutcome::NoErrorWithinLimit { states, exhausted } => {
                    let _ = writeln!(h, "no error in {} states{}", states, if *exhausted { "" } else { " (limit reached)" });
                    let a = if *exhausted { Answer::Yes } else { Answer::Unknown };
                    (a, json!({ "outcome": "no-error", "states": states, "exhausted": exhausted }))
                }
            };
            let mut doc = json!({ "command": "oracle", "config": cfg.to_json(), "answer": answer_str(answer), "session": m.to_string() });
            merge(&mut doc, detail);
            Ok(Report { answer, human: h, json: doc })
        }
        Command::Certify { file, mutants } => {
            let src = read(file)?;
            let doc: Value = serde_json::from_str(&src).map_err(|e| CliError::Usage(format!("{}: {}", file.display(), e)))?;
            let mut h = String::new();
            let mut answer = Answer::Yes;
            let verdict = match cert::certify(&doc) {
                Check::Valid { checked } => {
                    let _ = writeln!(h, "valid: {} certificates and derivations checked, verdict confirmed", checked);
                    json!({ "valid": true, "checked": checked })
                }
                Check::Invalid(why) => {
                    answer = Answer::No;
                    let _ = writeln!(h, "invalid: {}", why);
                    json!({ "valid": false, "reason": why })
                }
            };
            let mut out = json!({ "command": "certify", "answer": answer_str(answer), "result": verdict });
            if *mutants {
                let ms = cert::mutants(&doc);
                let accepted = ms.iter().filter(|m| matches!(cert::certify(m), Check::Valid { .. })).count();
                let _ = writeln!(h, "mutants: {} generated, {} rejected", ms.len(), ms.len() - accepted);
                if accepted > 0 {
                    answer = Answer::No;
                }
                out["answer"] = answer_str(answer).into();
                out["mutants"] = json!({ "generated": ms.len(), "rejected": ms.len() - accepted });
            }
            Ok(Report { answer, human: h, json: out })
        }
    }
}

fn merge(doc: &mut Value, extra: Value) {
    if let (Value::Object(d), Value::Object(e)) = (doc, extra) {
        d.extend(e);
    }
}

fn derivation(d: &TypeDerivation, cfg: &RunConfig) -> Value {
    let mut v = json!({
        "rule": d.rule,
        "subject": d.subject,
        "type": d.ty,
        "children": d.children.iter().map(|c| derivation(c, cfg)).collect::<Vec<_>>(),
    });
    if let Some((m, t, s)) = &d.sub {
        v["subtype"] = cert::subtype_doc(m, t, s, cfg);
    }
    v
}

fn run_report(out: &RunOutcome, cfg: &RunConfig) -> Report {
    let (answer, human, detail) = match out {
        RunOutcome::Terminated { states, stuck } => (
            Answer::Yes,
            format!("no error: {} states explored, {} stuck\n", states, stuck),
            json!({ "outcome": "no-error", "states": states, "stuck": stuck }),
        ),
        RunOutcome::Error { rule, trace } => {
            let mut h = format!("error reached by {}:\n", rule);
            for s in trace {
                let _ = writeln!(h, "  {}", s);
            }
            (Answer::No, h, json!({ "outcome": "error", "rule": rule.as_str(), "trace": trace }))
        }
        RunOutcome::LimitReached { states, frontier } => (
            Answer::Unknown,
            format!("no error within {} states ({} still unexplored)\n", states, frontier),
            json!({ "outcome": "limit", "states": states, "frontier": frontier }),
        ),
    };
    let mut doc = json!({ "command": "run", "config": cfg.to_json(), "answer": answer_str(answer) });
    merge(&mut doc, detail);
    Report { answer, human, json: doc }
}
