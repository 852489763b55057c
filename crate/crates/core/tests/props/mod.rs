//! Property suites shared by `properties.rs` and the acceptance target.
//! Every suite runs a fixed number of cases from a fixed seed and returns
//! how many cases exercised the property non-vacuously.

use std::cell::Cell;

use mpst_core::calculus::{step, Queue, Reduct, Session};
use mpst_core::characteristic::{char_env, char_process, char_session, CharContext};
use mpst_core::corpus::{gen_regular_types, shrink};
use mpst_core::decomposition::{si_decompositions, so_decompositions};
use mpst_core::environment::{check_live, env_step, refine_entry_live, LiveConfig, Liveness, TypingEnv};
use mpst_core::refinement::{check_certificate, refine, Budget, Verdict};
use mpst_core::subtyping::{self, subtype, SubtypeVerdict};
use mpst_core::types::type_equal;
use mpst_core::typesystem::{check_process, check_session, Typing, VarEnv};
use mpst_core::word::{Act, Lasso};
use mpst_core::{Answer, Dir, QueueType, Sort, Type};
use proptest::prelude::*;
use proptest::strategy::{NewTree, ValueTree};
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

pub const CASES: u32 = 1000;

/// `MPST_PROPTEST_CASES` lowers the case count for quick local runs.
pub fn cases() -> u32 {
    std::env::var("MPST_PROPTEST_CASES").ok().and_then(|s| s.parse().ok()).unwrap_or(CASES)
}

pub fn runner(seed: u64) -> TestRunner {
    TestRunner::new(Config {
        cases: cases(),
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        max_shrink_iters: 256,
        ..Config::default()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stats {
    pub cases: u32,
    /// Cases where the premise of the property held.
    pub exercised: u32,
}

fn finish(r: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>, exercised: &Cell<u32>) -> Result<Stats, String> {
    r.map_err(|e| format!("{}", e))?;
    Ok(Stats { cases: cases(), exercised: exercised.get() })
}

// ------------------------------------------------------------------ types

/// Random types from the corpus generator; shrinking replaces subterms by
/// `end`.
#[derive(Clone, Debug)]
pub struct Types {
    pub size: usize,
    pub participants: &'static [&'static str],
    pub labels: &'static [&'static str],
    pub sorts: &'static [Sort],
}

pub const NB: &[Sort] = &[Sort::Nat, Sort::Bool];

pub fn types(size: usize, participants: &'static [&'static str]) -> Types {
    Types { size, participants, labels: &["a", "b"], sorts: NB }
}

pub struct TypeTree {
    cur: Type,
    cands: Vec<Type>,
    idx: usize,
    prev: Option<(Type, Vec<Type>, usize)>,
}

impl ValueTree for TypeTree {
    type Value = Type;

    fn current(&self) -> Type {
        self.cur.clone()
    }

    fn simplify(&mut self) -> bool {
        if self.idx < self.cands.len() {
            let c = self.cands[self.idx].clone();
            self.idx += 1;
            let cands = shrink(&c);
            let old = std::mem::replace(&mut self.cur, c);
            let old_c = std::mem::replace(&mut self.cands, cands);
            self.prev = Some((old, old_c, self.idx));
            self.idx = 0;
            return true;
        }
        false
    }

    fn complicate(&mut self) -> bool {
        match self.prev.take() {
            Some((c, cs, i)) => {
                self.cur = c;
                self.cands = cs;
                self.idx = i;
                true
            }
            None => false,
        }
    }
}

impl Strategy for Types {
    type Tree = TypeTree;
    type Value = Type;

    fn new_tree(&self, runner: &mut TestRunner) -> NewTree<Self> {
        let seed = runner.rng().next_u64();
        let t = gen_regular_types(seed, self.size, self.participants, self.labels).with_sorts(self.sorts).next().unwrap();
        Ok(TypeTree { cands: shrink(&t), cur: t, idx: 0, prev: None })
    }
}

fn letter() -> impl Strategy<Value = Act> {
    (any::<bool>(), 0..2usize, 0..2usize, 0..3usize).prop_map(|(o, p, l, s)| {
        Act::new(if o { Dir::Out } else { Dir::In }, ["p", "q"][p], ["a", "b"][l], [Sort::Nat, Sort::Int, Sort::Bool][s])
    })
}

pub fn lassos() -> impl Strategy<Value = Lasso> {
    (prop::collection::vec(letter(), 0..5), prop::collection::vec(letter(), 0..3)).prop_map(|(s, c)| Lasso::new(s, c))
}

/// A word and a random permutation of it, with occasional sort changes.
fn permuted_words() -> impl Strategy<Value = (Lasso, Lasso)> {
    prop::collection::vec(letter(), 1..5).prop_flat_map(|w| {
        let n = w.len();
        (Just(w), Just((0..n).collect::<Vec<_>>()).prop_shuffle(), prop::option::weighted(0.2, (0..n, 0..3usize)))
            .prop_map(|(w, perm, flip)| {
                let mut w2: Vec<Act> = perm.iter().map(|&i| w[i].clone()).collect();
                if let Some((i, s)) = flip {
                    w2[i].sort = [Sort::Nat, Sort::Int, Sort::Bool][s];
                }
                (Lasso::new(w, vec![]), Lasso::new(w2, vec![]))
            })
    })
}

/// Bounds for the suites: smaller than the defaults so that 1000 random
/// cases stay quick in debug builds. Smaller bounds only turn answers
/// into unknown, which no property counts as a violation.
pub fn cfg() -> subtyping::Config {
    subtyping::Config {
        unroll_bound: 3,
        max_pairs: 16,
        refine: Budget { nodes: 2_000, prefix: 32, sync: false },
        family_threshold: 3,
        cell_attempts: 16,
        uv_fuel: 500,
    }
}

pub fn live_cfg() -> LiveConfig {
    LiveConfig { queue_bound: 2, max_states: 5_000 }
}

fn dual(t: &Type, me: &str, peer: &str) -> Type {
    let s = t.to_string();
    let mut out = String::new();
    let b: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < b.len() {
        let here: String = b[i..].iter().take(peer.len() + 1).collect();
        let sym = here.chars().last();
        let start = i == 0 || !b[i - 1].is_alphanumeric();
        if start && here.starts_with(peer) && matches!(sym, Some('!' | '?' | '&' | '+')) {
            out.push_str(me);
            out.push(match sym.unwrap() {
                '!' => '?',
                '?' => '!',
                '&' => '+',
                _ => '&',
            });
            i += peer.len() + 1;
        } else {
            out.push(b[i]);
            i += 1;
        }
    }
    Type::parse(&out).unwrap()
}

// ------------------------------------------------------------------ suites

/// `W ≲ W` for every word, with a certificate that checks.
pub fn refine_reflexivity() -> Result<Stats, String> {
    let n = Cell::new(0);
    let r = runner(0x5eed_0001).run(&lassos(), |w| {
        match refine(&w, &w, &Budget::default()) {
            Verdict::Yes(c) => {
                check_certificate(&c).map_err(|e| TestCaseError::fail(format!("{}: {}", w, e)))?;
                n.set(n.get() + 1);
                Ok(())
            }
            v => Err(TestCaseError::fail(format!("{} not related to itself: {:?}", w, v.answer()))),
        }
    });
    finish(r, &n)
}

/// `T1 ≤ T2` and `T2 ≤ T3` never come with `T1 ≰ T3`. Triples mix
/// permutations of one word (where yes is common) and random types.
pub fn bounded_transitivity() -> Result<Stats, String> {
    let n = Cell::new(0);
    let words = (permuted_words(), permuted_words()).prop_map(|((a, b), (_, c))| {
        let b2 = b.clone();
        (a.to_type(), b2.to_type(), if c.stem.len() == b.stem.len() { c.to_type() } else { a.to_type() })
    });
    let tri = (permuted_words(), prop::collection::vec(0..4usize, 4)).prop_map(|((a, b), sw)| {
        // third word: b with an adjacent swap
        let mut c = b.stem.clone();
        let k = sw[0] % c.len().max(1);
        if k + 1 < c.len() {
            c.swap(k, k + 1);
        }
        (a.to_type(), b.to_type(), Lasso::new(c, vec![]).to_type())
    });
    let rnd = (types(4, &["p", "q"]), types(4, &["p", "q"]), types(4, &["p", "q"]));
    let strat = prop_oneof![1 => words, 2 => tri, 1 => rnd];
    let r = runner(0x5eed_0002).run(&strat, |(a, b, c)| {
        let c0 = cfg();
        if subtype(&a, &b, &c0).answer() == Answer::Yes && subtype(&b, &c, &c0).answer() == Answer::Yes {
            n.set(n.get() + 1);
            if subtype(&a, &c, &c0).answer() == Answer::No {
                return Err(TestCaseError::fail(format!("{} ≤ {} ≤ {} but not transitively", a, b, c)));
            }
        }
        Ok(())
    });
    finish(r, &n)
}

fn projection(w: &Lasso, p: &str, d: Dir) -> Lasso {
    let keep = |v: &[Act]| v.iter().filter(|a| &*a.peer == p && a.dir == d).cloned().collect::<Vec<_>>();
    let cyc = keep(&w.cycle);
    let mut stem = keep(&w.stem);
    if cyc.is_empty() && !w.cycle.is_empty() {
        // the projection is finite; the cycle contributes nothing
        stem = keep(&w.stem);
    }
    Lasso::new(stem, cyc)
}

fn unsorted(w: &Lasso) -> Lasso {
    w.map(|a| Act { sort: Sort::Unit, ..a.clone() })
}

fn sorted_ok(lhs: &Lasso, rhs: &Lasso, d: Dir) -> bool {
    // walk both ω-words far enough to cover stems and one round of cycles
    let len = lhs.horizon().max(rhs.horizon()) * 2 + 2;
    (0..len).all(|i| match (lhs.get(i), rhs.get(i)) {
        (Some(a), Some(b)) => match d {
            Dir::Out => mpst_core::types::subsort(a.sort, b.sort),
            Dir::In => mpst_core::types::subsort(b.sort, a.sort),
        },
        (None, None) => true,
        _ => false,
    })
}

/// Under yes, every certified pair of paths sends the same labels to each
/// participant in the same order, and receives likewise; sorts vary only
/// in the allowed direction.
pub fn projection_order() -> Result<Stats, String> {
    let n = Cell::new(0);
    let pairs = prop_oneof![
        permuted_words().prop_map(|(a, b)| (a.to_type(), b.to_type())),
        (lassos(), lassos()).prop_map(|(a, b)| (a.to_type(), b.to_type())),
        (types(5, &["p", "q"]), types(5, &["p", "q"])),
    ];
    let r = runner(0x5eed_0003).run(&pairs, |(t, t2)| {
        let SubtypeVerdict::Yes(proof) = subtype(&t, &t2, &cfg()) else { return Ok(()) };
        n.set(n.get() + 1);
        for c in &proof.cells {
            for p in ["p", "q"] {
                for d in [Dir::In, Dir::Out] {
                    let (a, b) = (projection(&c.w, p, d), projection(&c.w2, p, d));
                    if unsorted(&a) != unsorted(&b) || !sorted_ok(&a, &b, d) {
                        return Err(TestCaseError::fail(format!(
                            "{} ≤ {}: projections onto {}{} differ: {} vs {}",
                            t,
                            t2,
                            p,
                            d.symbol(),
                            a,
                            b
                        )));
                    }
                }
            }
        }
        Ok(())
    });
    finish(r, &n)
}

/// A well-typed session sample: a binary session of characteristic
/// processes of SO paths of `T` and its dual, or a characteristic ring
/// session whose free participant runs a subtype of its entry.
#[derive(Clone, Debug)]
pub struct Sample {
    pub gamma: TypingEnv,
    pub m: Session,
}

fn so_pick(t: &Type, k: usize) -> Type {
    let ds: Vec<Type> = so_decompositions(t, 3).take(4).collect();
    ds[k % ds.len()].clone()
}

fn si_pick(t: &Type, k: usize) -> Type {
    let ds: Vec<Type> = si_decompositions(t, 3).take(4).collect();
    ds[k % ds.len()].clone()
}

pub fn samples() -> impl Strategy<Value = Sample> {
    let binary = (types(5, &["q"]), 0..4usize, 0..4usize).prop_map(|(t, i, j)| {
        let d = dual(&t, "p", "q");
        let gamma = TypingEnv::new().with("p", QueueType::empty(), t.clone()).with("q", QueueType::empty(), d.clone());
        let m = Session::new().with("p", char_process(&so_pick(&t, i)).unwrap()).with("q", char_process(&so_pick(&d, j)).unwrap());
        Sample { gamma, m }
    });
    let ring = (types(4, &["p", "q"]), 0..4usize).prop_map(|(t, i)| {
        // V' is an SI decomposition; r runs an SO path of it, a subtype
        let v = si_pick(&t, i);
        let u = so_pick(&v, i);
        let ctx = CharContext::new("r", &v).unwrap();
        let mut gamma = char_env(&ctx);
        let mut m = char_session(&ctx);
        gamma = gamma.with("r", QueueType::empty(), v.clone());
        m.parts.insert(mpst_core::types::name("r"), (char_process(&u).unwrap(), Queue::default()));
        Sample { gamma, m }
    });
    prop_oneof![binary, ring]
}

fn typed(g: &TypingEnv, m: &Session) -> bool {
    matches!(check_session(g, m, &cfg()), Typing::Derived(_))
}

fn live(g: &TypingEnv) -> Liveness {
    check_live(g, &live_cfg())
}

/// Every reduct of a well-typed session over a live environment is
/// well-typed by the environment or one of its reducts, and no reduct is
/// an error. Followed along a random path of up to 12 steps.
pub fn subject_reduction() -> Result<Stats, String> {
    let n = Cell::new(0);
    let strat = (samples(), prop::collection::vec(any::<u16>(), 12));
    let r = runner(0x5eed_0004).run(&strat, |(s, picks)| {
        // characteristic processes repeat their continuation in both arms of
        // each conditional, so nested inputs grow the printed term
        // exponentially; very large terms are skipped
        if s.m.to_string().len() > 20_000 || live(&s.gamma) != Liveness::Live || !typed(&s.gamma, &s.m) {
            return Ok(());
        }
        n.set(n.get() + 1);
        let (mut g, mut m) = (s.gamma.clone(), s.m.clone());
        for pick in picks {
            let steps = step(&m);
            if steps.is_empty() {
                break;
            }
            let mut next = None;
            for st in &steps {
                let Reduct::Session(m2) = &st.result else {
                    return Err(TestCaseError::fail(format!("{}\nreaches error by {}", m, st)));
                };
                let cands = std::iter::once(g.clone()).chain(env_step(&g).into_iter().map(|x| x.1));
                let Some(g2) = cands.into_iter().find(|g2| typed(g2, m2)) else {
                    return Err(TestCaseError::fail(format!("{}\n--{}-->\n{}\nhas no typing environment reachable from\n{}", m, st, m2, g)));
                };
                next.get_or_insert_with(Vec::new).push((g2, m2.clone()));
            }
            let next = next.unwrap();
            let (g2, m2) = next[pick as usize % next.len()].clone();
            g = g2;
            m = m2;
        }
        Ok(())
    });
    finish(r, &n)
}

/// Live environments stay live along `env_step` (random walks of up to 6
/// steps) and when an entry is replaced by a subtype.
pub fn liveness_preservation() -> Result<Stats, String> {
    let n = Cell::new(0);
    let strat = (samples(), prop::collection::vec(any::<u16>(), 6), 0..4usize, types(4, &["p", "q", "r"]));
    let r = runner(0x5eed_0005).run(&strat, |(s, picks, k, other)| {
        let g0 = s.gamma;
        if live(&g0) != Liveness::Live {
            return Ok(());
        }
        n.set(n.get() + 1);
        let mut g = g0.clone();
        for pick in picks {
            let succ = env_step(&g);
            if succ.is_empty() {
                break;
            }
            for (a, g2) in &succ {
                if let Liveness::NotLive(w) = live(g2) {
                    return Err(TestCaseError::fail(format!("{}\n--{}--> not live: {}", g, a, w)));
                }
            }
            g = succ[pick as usize % succ.len()].1.clone();
        }
        // entry replacement: an SO path of the entry, or a random type
        let ps: Vec<_> = g0.entries.keys().cloned().collect();
        let p = &ps[k % ps.len()];
        let (q, t) = g0.get(p);
        for cand in [so_pick(&t, k), other] {
            let e = refine_entry_live(&g0, p, (q.clone(), cand.clone()), &live_cfg(), &cfg());
            if e.alarm {
                return Err(TestCaseError::fail(format!("{}\nreplacing {} by {} breaks liveness", g0, p, cand)));
            }
        }
        Ok(())
    });
    finish(r, &n)
}

/// Printing then parsing gives back an equal type, a congruent session and
/// a congruent environment.
pub fn print_parse_round_trip() -> Result<Stats, String> {
    let n = Cell::new(0);
    let strat = (types(6, &["p", "q", "r"]), samples());
    let r = runner(0x5eed_0006).run(&strat, |(t, s)| {
        let t2 = Type::parse(&t.to_string()).map_err(|e| TestCaseError::fail(format!("{}: {}", t, e)))?;
        prop_assert!(type_equal(&t, &t2), "{} vs {}", t, t2);
        let m2 = Session::parse(&s.m.to_string()).map_err(|e| TestCaseError::fail(format!("{}: {}", s.m, e)))?;
        prop_assert!(mpst_core::calculus::congruent(&s.m, &m2), "{} vs {}", s.m, m2);
        let g2 = TypingEnv::parse(&s.gamma.to_string()).map_err(|e| TestCaseError::fail(format!("{}: {}", s.gamma, e)))?;
        prop_assert!(s.gamma.congruent(&g2), "{} vs {}", s.gamma, g2);
        n.set(n.get() + 1);
        Ok(())
    });
    finish(r, &n)
}

/// `⊢ P(U) : T` for every SO decomposition `U` of `T`.
pub fn characteristic_typability() -> Result<Stats, String> {
    let n = Cell::new(0);
    let r = runner(0x5eed_0007).run(&types(5, &["p", "q"]), |t| {
        for u in so_decompositions(&t, 3).take(4) {
            let p = char_process(&u).map_err(TestCaseError::fail)?;
            match check_process(&VarEnv::new(), &p, &t, &cfg()) {
                Typing::Derived(_) => n.set(n.get() + 1),
                other => return Err(TestCaseError::fail(format!("P({}) against {}: {:?}", u, t, other.answer()))),
            }
        }
        Ok(())
    });
    finish(r, &n)
}

/// The characteristic environment of an SI decomposition is never found
/// not live.
pub fn characteristic_liveness() -> Result<Stats, String> {
    let n = Cell::new(0);
    let r = runner(0x5eed_0008).run(&(types(5, &["p", "q"]), 0..4usize), |(t, k)| {
        let v = si_pick(&t, k);
        let ctx = CharContext::new("r", &v).map_err(TestCaseError::fail)?;
        // unbounded relay queues can leave the abstraction undecided
        match live(&char_env(&ctx)) {
            Liveness::Live => n.set(n.get() + 1),
            Liveness::Unknown(_) => {}
            Liveness::NotLive(w) => return Err(TestCaseError::fail(format!("characteristic environment of {}: {}", v, w))),
        }
        Ok(())
    });
    finish(r, &n)
}

#[allow(dead_code)] // only the acceptance target iterates the table
pub const SUITES: [(&str, fn() -> Result<Stats, String>); 8] = [
    ("refine reflexivity", refine_reflexivity),
    ("bounded transitivity", bounded_transitivity),
    ("projection order under yes", projection_order),
    ("subject reduction", subject_reduction),
    ("liveness preservation", liveness_preservation),
    ("print/parse round trip", print_parse_round_trip),
    ("characteristic typability", characteristic_typability),
    ("characteristic liveness", characteristic_liveness),
];
