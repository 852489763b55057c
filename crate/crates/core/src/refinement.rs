//! SISO refinement `W ≲ W′`: the rule function, a certificate-producing
//! semi-decision procedure, and the inductive negation `W ⋪ W′`.
//!
//! The search follows the rule function deterministically. Success is a
//! revisited judgment (a regular infinite derivation), a pumped recurrence
//! (the judgment comes back with one more copy of a fixed word inserted in
//! the right-hand side), or `end ≲ end`. Failure is turned into a
//! derivation of `⋪` that is checked independently.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;

use crate::types::{subsort, Dir, Sort};
use crate::word::{Act, Lasso, Letter};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximal number of judgments visited by one walk.
    pub nodes: usize,
    /// Maximal length of the right-hand stem (the accumulated prefix).
    pub prefix: usize,
    /// Disables `ref-𝒜` / `ref-ℬ`, leaving synchronous refinement.
    pub sync: bool,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { nodes: 10_000, prefix: 64, sync: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Judgment {
    pub lhs: Lasso,
    pub rhs: Lasso,
}

impl Judgment {
    pub fn new(lhs: Lasso, rhs: Lasso) -> Judgment {
        Judgment { lhs, rhs }
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ≲ {}", self.lhs, self.rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RefRule {
    In,
    A,
    Out,
    B,
    End,
}

impl RefRule {
    pub fn as_str(self) -> &'static str {
        match self {
            RefRule::In => "ref-in",
            RefRule::A => "ref-A",
            RefRule::Out => "ref-out",
            RefRule::B => "ref-B",
            RefRule::End => "ref-end",
        }
    }

    pub fn from_str(s: &str) -> Option<RefRule> {
        [RefRule::In, RefRule::A, RefRule::Out, RefRule::B, RefRule::End].into_iter().find(|r| r.as_str() == s)
    }
}

/// Result of the rule function on one judgment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Phi<A: Letter = Act> {
    True,
    False,
    Premise {
        rule: RefRule,
        /// Position of the matched right-hand letter.
        pos: usize,
        /// Payload sorts of the left and right matched letters.
        sorts: (Sort, Sort),
        lhs: Lasso,
        rhs: Lasso<A>,
    },
}

/// Position of the letter the left head must be matched with: the first
/// input from `p` not preceded by an output (for `p?`), or the first output
/// to `p` (for `p!`).
fn target<A: Letter>(head: &Act, rhs: &Lasso<A>) -> Option<usize> {
    for j in 0..rhs.horizon() {
        let b = rhs.get(j)?.act();
        match head.dir {
            Dir::In => {
                if b.dir == Dir::Out {
                    return None;
                }
                if b.peer == head.peer {
                    return Some(j);
                }
            }
            Dir::Out => {
                if b.dir == Dir::Out && b.peer == head.peer {
                    return Some(j);
                }
            }
        }
    }
    None
}

fn sort_ok(dir: Dir, lhs: Sort, rhs: Sort) -> bool {
    match dir {
        Dir::In => subsort(rhs, lhs),
        Dir::Out => subsort(lhs, rhs),
    }
}

/// The rule function. At most one clause applies; the `𝒜`/`ℬ` factorization
/// is the shortest one.
pub fn phi<A: Letter>(lhs: &Lasso, rhs: &Lasso<A>, sync: bool) -> Phi<A> {
    let Some(a) = lhs.head() else {
        return if rhs.is_end() { Phi::True } else { Phi::False };
    };
    let Some(j) = target(a, rhs) else { return Phi::False };
    if sync && j > 0 {
        return Phi::False;
    }
    let b = rhs.get(j).expect("target exists").act();
    if b.label != a.label || !sort_ok(a.dir, a.sort, b.sort) {
        return Phi::False;
    }
    let w = lhs.tail();
    let w2 = rhs.remove(j);
    if j > 0 && w.actions() != w2.actions() {
        return Phi::False;
    }
    let rule = match (a.dir, j) {
        (Dir::In, 0) => RefRule::In,
        (Dir::In, _) => RefRule::A,
        (Dir::Out, 0) => RefRule::Out,
        (Dir::Out, _) => RefRule::B,
    };
    Phi::Premise { rule, pos: j, sorts: (a.sort, b.sort), lhs: w, rhs: w2 }
}

/// `Φ` on a judgment.
pub fn rule_step(j: &Judgment) -> Phi {
    phi(&j.lhs, &j.rhs, false)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertStep {
    pub judgment: Judgment,
    pub rule: RefRule,
    pub pos: usize,
    /// Left and right payload sorts of the matched letters (the subsorting
    /// edge used by the step).
    pub sorts: (Sort, Sort),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Closure {
    /// The last step is `ref-end`.
    End,
    /// The premise of the last step is the judgment of step `back`.
    Back(usize),
    /// The premise of the last step is step `base` with `word` inserted in
    /// its right-hand side at `insert_pos`; the segment from `base` repeats
    /// forever, inserting one more copy each time.
    Pump { base: usize, insert_pos: usize, word: Vec<Act> },
}

/// A finite witness of a (possibly infinite) successful derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementCertificate {
    pub steps: Vec<CertStep>,
    pub closure: Closure,
}

impl RefinementCertificate {
    pub fn root(&self) -> &Judgment {
        &self.steps[0].judgment
    }

    pub fn kind(&self) -> &'static str {
        match self.closure {
            Closure::End => "finite",
            Closure::Back(_) => "cycle",
            Closure::Pump { .. } => "pumped",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NegRule {
    Out,
    Inp,
    OutR,
    InpR,
    InpL,
    InpS,
    InpW,
    AL,
    AS,
    AW,
    Io1,
    Io2,
    OutL,
    OutS,
    OutW,
    BL,
    BS,
    BW,
}

impl NegRule {
    pub const ALL: [NegRule; 18] = [
        NegRule::Out,
        NegRule::Inp,
        NegRule::OutR,
        NegRule::InpR,
        NegRule::InpL,
        NegRule::InpS,
        NegRule::InpW,
        NegRule::AL,
        NegRule::AS,
        NegRule::AW,
        NegRule::Io1,
        NegRule::Io2,
        NegRule::OutL,
        NegRule::OutS,
        NegRule::OutW,
        NegRule::BL,
        NegRule::BS,
        NegRule::BW,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NegRule::Out => "n-out",
            NegRule::Inp => "n-inp",
            NegRule::OutR => "n-out-R",
            NegRule::InpR => "n-inp-R",
            NegRule::InpL => "n-inp-l",
            NegRule::InpS => "n-inp-S",
            NegRule::InpW => "n-inp-W",
            NegRule::AL => "n-A-l",
            NegRule::AS => "n-A-S",
            NegRule::AW => "n-A-W",
            NegRule::Io1 => "n-i-o-1",
            NegRule::Io2 => "n-i-o-2",
            NegRule::OutL => "n-out-l",
            NegRule::OutS => "n-out-S",
            NegRule::OutW => "n-out-W",
            NegRule::BL => "n-B-l",
            NegRule::BS => "n-B-S",
            NegRule::BW => "n-B-W",
        }
    }

    pub fn from_str(s: &str) -> Option<NegRule> {
        NegRule::ALL.into_iter().find(|r| r.as_str() == s)
    }

    pub fn is_axiom(self) -> bool {
        !matches!(self, NegRule::InpW | NegRule::AW | NegRule::OutW | NegRule::BW)
    }

    /// The four axioms about disjoint action sets.
    pub fn is_action_axiom(self) -> bool {
        matches!(self, NegRule::Out | NegRule::Inp | NegRule::OutR | NegRule::InpR)
    }

    fn uses_sorts(self) -> bool {
        matches!(
            self,
            NegRule::InpS | NegRule::InpW | NegRule::AS | NegRule::AW | NegRule::OutS | NegRule::OutW | NegRule::BS | NegRule::BW
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegStep {
    pub judgment: Judgment,
    pub rule: NegRule,
    /// Position of the right-hand letter the rule talks about.
    pub pos: usize,
    /// Left and right payload sorts, for the rules with a sort premise.
    pub sorts: Option<(Sort, Sort)>,
}

/// A derivation of `W ⋪ W′`. Every rule of the table has at most one
/// premise, so derivations are chains; the last step is an axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegationDerivation {
    pub steps: Vec<NegStep>,
}

impl NegationDerivation {
    pub fn root(&self) -> &Judgment {
        &self.steps[0].judgment
    }

    pub fn leaf(&self) -> NegRule {
        self.steps.last().expect("nonempty").rule
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Refutation {
    Negation(NegationDerivation),
    /// Synchronous mode: the failing walk itself (the `⋪` table describes
    /// the asynchronous relation only).
    SyncFailure(Vec<Judgment>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Yes(RefinementCertificate),
    No(Refutation),
    Unknown(String),
}

impl Verdict {
    pub fn answer(&self) -> crate::Answer {
        match self {
            Verdict::Yes(_) => crate::Answer::Yes,
            Verdict::No(_) => crate::Answer::No,
            Verdict::Unknown(_) => crate::Answer::Unknown,
        }
    }
}

/// How many earlier judgments with the same left-hand side are compared
/// when looking for a pump.
const PUMP_CANDIDATES: usize = 8;

/// Decides `w ≲ w2` within the budget.
pub fn refine(w: &Lasso, w2: &Lasso, budget: &Budget) -> Verdict {
    let mut steps: Vec<CertStep> = Vec::new();
    let mut seen: HashMap<Judgment, usize> = HashMap::new();
    let mut by_lhs: HashMap<Lasso, Vec<usize>> = HashMap::new();
    let mut cur = Judgment::new(w.clone(), w2.clone());
    loop {
        let i = steps.len();
        if let Some(&b) = seen.get(&cur) {
            return Verdict::Yes(RefinementCertificate { steps, closure: Closure::Back(b) });
        }
        if let Some(cands) = by_lhs.get(&cur.lhs) {
            for &k in cands.iter().rev().take(PUMP_CANDIDATES) {
                if cur.rhs.stem.len() <= steps[k].judgment.rhs.stem.len() && cur.rhs.cycle.len() == steps[k].judgment.rhs.cycle.len() {
                    continue;
                }
                for (pos, word) in insertions(&steps[k].judgment.rhs, &cur.rhs) {
                    if replay_pump(&steps[k].judgment, pos, &word, i - k, budget.sync) {
                        return Verdict::Yes(RefinementCertificate {
                            steps,
                            closure: Closure::Pump { base: k, insert_pos: pos, word },
                        });
                    }
                }
            }
        }
        if i >= budget.nodes {
            return Verdict::Unknown(format!("node budget of {} judgments exhausted", budget.nodes));
        }
        if cur.rhs.stem.len() > budget.prefix {
            return Verdict::Unknown(format!("right-hand prefix exceeded {} letters", budget.prefix));
        }
        seen.insert(cur.clone(), i);
        by_lhs.entry(cur.lhs.clone()).or_default().push(i);
        match phi(&cur.lhs, &cur.rhs, budget.sync) {
            Phi::True => {
                steps.push(CertStep { judgment: cur, rule: RefRule::End, pos: 0, sorts: (Sort::Unit, Sort::Unit) });
                return Verdict::Yes(RefinementCertificate { steps, closure: Closure::End });
            }
            Phi::False => {
                if budget.sync {
                    let mut walk: Vec<Judgment> = steps.into_iter().map(|s| s.judgment).collect();
                    walk.push(cur);
                    return Verdict::No(Refutation::SyncFailure(walk));
                }
                return match negate(w, w2, budget) {
                    Some(d) if check_negation(&d).is_ok() => Verdict::No(Refutation::Negation(d)),
                    _ => Verdict::Unknown(String::from("failing walk without a negation derivation")),
                };
            }
            Phi::Premise { rule, pos, sorts, lhs, rhs } => {
                let next = Judgment::new(lhs, rhs);
                steps.push(CertStep { judgment: core::mem::replace(&mut cur, next), rule, pos, sorts });
            }
        }
    }
}

/// All ways of reading `b` as `a` with a nonempty word inserted.
fn insertions(a: &Lasso, b: &Lasso) -> Vec<(usize, Vec<Act>)> {
    let mut out = Vec::new();
    let c = a.cycle.len();
    if c != b.cycle.len() {
        return out;
    }
    let base = b.stem.len() as isize - a.stem.len() as isize;
    let ds: Vec<usize> = if c == 0 {
        if base > 0 {
            alloc::vec![base as usize]
        } else {
            Vec::new()
        }
    } else {
        (0..3).map(|t| base + (t * c) as isize).filter(|d| *d > 0).map(|d| d as usize).collect()
    };
    for d in ds {
        for pos in 0..=a.horizon() {
            if a.prefix(pos).len() < pos {
                break;
            }
            if b.prefix(pos) != a.prefix(pos) {
                break;
            }
            if b.drop(pos + d) == a.drop(pos) {
                let word: Vec<Act> = (pos..pos + d).map(|i| b.get(i).expect("inserted letters exist").clone()).collect();
                out.push((pos, word));
            }
        }
    }
    out
}

fn tagged(j: &Judgment, pos: usize, word: &[Act], copies: usize) -> Lasso<(Act, bool)> {
    let base = j.rhs.map(|a| (a.clone(), false));
    let mut ins = Vec::new();
    for _ in 0..copies {
        ins.extend(word.iter().map(|a| (a.clone(), true)));
    }
    base.insert(pos, &ins)
}

/// Replays the segment of `m` steps starting from `base` with 1, 2 and 3
/// tagged copies of `word` inserted: every step must be a premise that
/// consumes no tagged letter, and each run must end at the same judgment
/// with one more copy.
fn replay_pump(base: &Judgment, pos: usize, word: &[Act], m: usize, sync: bool) -> bool {
    if word.is_empty() || m == 0 {
        return false;
    }
    for n in 1..=3 {
        let mut lhs = base.lhs.clone();
        let mut rhs = tagged(base, pos, word, n);
        for _ in 0..m {
            match phi(&lhs, &rhs, sync) {
                Phi::Premise { pos: j, lhs: l2, rhs: r2, .. } => {
                    if rhs.get(j).is_none_or(|x| x.1) {
                        return false;
                    }
                    lhs = l2;
                    rhs = r2;
                }
                _ => return false,
            }
        }
        if lhs != base.lhs {
            return false;
        }
        let expect = tagged(base, pos, word, n + 1).untag();
        if rhs.untag() != expect {
            return false;
        }
    }
    true
}

/// Next judgment of a rule instance, after checking the rule's side
/// conditions directly against the definition of `≲`.
fn apply_ref_rule(step: &CertStep) -> Result<Option<Judgment>, String> {
    let Judgment { lhs, rhs } = &step.judgment;
    if step.rule == RefRule::End {
        return if lhs.is_end() && rhs.is_end() { Ok(None) } else { Err(String::from("ref-end on non-end trees")) };
    }
    let a = lhs.head().ok_or("rule applied to end")?;
    let j = step.pos;
    let b = rhs.get(j).ok_or("matched position beyond the right-hand tree")?;
    let want = match step.rule {
        RefRule::In | RefRule::A => Dir::In,
        _ => Dir::Out,
    };
    if a.dir != want || b.dir != want || a.peer != b.peer || a.label != b.label {
        return Err(format!("{}: heads {} and {} do not match", step.rule.as_str(), a, b));
    }
    if step.sorts != (a.sort, b.sort) {
        return Err(format!("{}: recorded sorts differ from the payloads", step.rule.as_str()));
    }
    if !sort_ok(want, a.sort, b.sort) {
        return Err(format!("{}: payload sorts {} / {} violate subsorting", step.rule.as_str(), a.sort, b.sort));
    }
    match step.rule {
        RefRule::In | RefRule::Out => {
            if j != 0 {
                return Err(format!("{} must match the head", step.rule.as_str()));
            }
        }
        RefRule::A => {
            if j == 0 {
                return Err(String::from("ref-A needs a nonempty prefix"));
            }
            for k in 0..j {
                let c = rhs.get(k).expect("inside horizon");
                if c.dir != Dir::In || c.peer == a.peer {
                    return Err(format!("ref-A: prefix letter {} is not an input from another participant", c));
                }
            }
        }
        RefRule::B => {
            if j == 0 {
                return Err(String::from("ref-B needs a nonempty prefix"));
            }
            for k in 0..j {
                let c = rhs.get(k).expect("inside horizon");
                if c.dir == Dir::Out && c.peer == a.peer {
                    return Err(format!("ref-B: prefix letter {} outputs to the same participant", c));
                }
            }
        }
        RefRule::End => unreachable!(),
    }
    let w = lhs.tail();
    let w2 = rhs.remove(j);
    if j > 0 && w.actions() != w2.actions() {
        return Err(format!("{}: action sets differ", step.rule.as_str()));
    }
    Ok(Some(Judgment::new(w, w2)))
}

/// Independent validation of a refinement certificate.
pub fn check_certificate(c: &RefinementCertificate) -> Result<(), String> {
    if c.steps.is_empty() {
        return Err(String::from("empty certificate"));
    }
    let mut last_next = None;
    for (i, s) in c.steps.iter().enumerate() {
        let next = apply_ref_rule(s).map_err(|e| format!("step {}: {}", i, e))?;
        if i + 1 < c.steps.len() {
            if next.as_ref() != Some(&c.steps[i + 1].judgment) {
                return Err(format!("step {}: premise is not the next judgment", i));
            }
        } else {
            last_next = next;
        }
    }
    match &c.closure {
        Closure::End => {
            if c.steps.last().expect("nonempty").rule != RefRule::End {
                return Err(String::from("finite certificate does not end with ref-end"));
            }
        }
        Closure::Back(b) => {
            let target = c.steps.get(*b).ok_or("back edge out of range")?;
            if last_next.as_ref() != Some(&target.judgment) {
                return Err(format!("last premise is not judgment {}", b));
            }
        }
        Closure::Pump { base, insert_pos, word } => {
            let b = c.steps.get(*base).ok_or("pump base out of range")?;
            let expect = Judgment::new(b.judgment.lhs.clone(), b.judgment.rhs.insert(*insert_pos, word));
            if last_next.as_ref() != Some(&expect) {
                return Err(String::from("last premise is not the base judgment with the pumped word inserted"));
            }
            if !replay_pump(&b.judgment, *insert_pos, word, c.steps.len() - base, false) {
                return Err(String::from("pump replay failed"));
            }
        }
    }
    Ok(())
}

fn first_in_from_others_then<'a>(head: &Act, rhs: &'a Lasso) -> Option<(usize, &'a Act)> {
    // skips inputs from participants other than head.peer
    for j in 0..rhs.horizon() {
        let b = rhs.get(j)?;
        if b.dir == Dir::In && b.peer != head.peer {
            continue;
        }
        return Some((j, b));
    }
    None
}

/// Tries the axioms in table order, then the structural rule.
fn neg_rule(j: &Judgment) -> Option<NegStep> {
    let Judgment { lhs, rhs } = j;
    let mk = |rule: NegRule, pos: usize, sorts: Option<(Sort, Sort)>| {
        Some(NegStep { judgment: j.clone(), rule, pos, sorts })
    };
    let lacts = lhs.actions();
    let rhead = rhs.head();
    if let Some(a) = lhs.head() {
        match a.dir {
            Dir::Out if !rhs.has_action(&a.peer, Dir::Out) => return mk(NegRule::Out, 0, None),
            Dir::In if !rhs.has_action(&a.peer, Dir::In) => return mk(NegRule::Inp, 0, None),
            _ => {}
        }
    }
    if let Some(b) = rhead {
        if !lacts.contains(&b.action()) {
            return mk(if b.dir == Dir::Out { NegRule::OutR } else { NegRule::InpR }, 0, None);
        }
    }
    let a = lhs.head()?;
    let b = rhead?;
    match a.dir {
        Dir::In => {
            if b.dir == Dir::In && b.peer == a.peer {
                if b.label != a.label {
                    return mk(NegRule::InpL, 0, None);
                }
                if !subsort(b.sort, a.sort) {
                    return mk(NegRule::InpS, 0, Some((a.sort, b.sort)));
                }
            }
            let found = first_in_from_others_then(a, rhs);
            if let Some((k, c)) = found {
                if k > 0 && c.dir == Dir::In {
                    if c.label != a.label {
                        return mk(NegRule::AL, k, None);
                    }
                    if !subsort(c.sort, a.sort) {
                        return mk(NegRule::AS, k, Some((a.sort, c.sort)));
                    }
                }
            }
            if b.dir == Dir::Out {
                return mk(NegRule::Io1, 0, None);
            }
            if let Some((k, c)) = found {
                if k > 0 && c.dir == Dir::Out {
                    return mk(NegRule::Io2, k, None);
                }
                if c.dir == Dir::In && c.label == a.label && subsort(c.sort, a.sort) {
                    let r = if k == 0 { NegRule::InpW } else { NegRule::AW };
                    return mk(r, k, Some((a.sort, c.sort)));
                }
            }
            None
        }
        Dir::Out => {
            if b.dir == Dir::Out && b.peer == a.peer {
                if b.label != a.label {
                    return mk(NegRule::OutL, 0, None);
                }
                if !subsort(a.sort, b.sort) {
                    return mk(NegRule::OutS, 0, Some((a.sort, b.sort)));
                }
            }
            let k = target(a, rhs)?;
            let c = rhs.get(k).expect("target exists");
            if k > 0 {
                if c.label != a.label {
                    return mk(NegRule::BL, k, None);
                }
                if !subsort(a.sort, c.sort) {
                    return mk(NegRule::BS, k, Some((a.sort, c.sort)));
                }
            }
            if c.label == a.label && subsort(a.sort, c.sort) {
                let r = if k == 0 { NegRule::OutW } else { NegRule::BW };
                return mk(r, k, Some((a.sort, c.sort)));
            }
            None
        }
    }
}

/// Builds a derivation of `w ⋪ w2`, if one exists within the budget.
pub fn negate(w: &Lasso, w2: &Lasso, budget: &Budget) -> Option<NegationDerivation> {
    let mut steps = Vec::new();
    let mut seen: hashbrown::HashSet<Judgment> = hashbrown::HashSet::new();
    let mut cur = Judgment::new(w.clone(), w2.clone());
    loop {
        if !seen.insert(cur.clone()) || steps.len() >= budget.nodes {
            return None;
        }
        let s = neg_rule(&cur)?;
        let axiom = s.rule.is_axiom();
        let next = if axiom { None } else { Some(Judgment::new(cur.lhs.tail(), cur.rhs.remove(s.pos))) };
        steps.push(s);
        match next {
            None => return Some(NegationDerivation { steps }),
            Some(n) => cur = n,
        }
    }
}

/// Checks one step of a `⋪` derivation against its rule.
fn check_neg_step(s: &NegStep) -> Result<Option<Judgment>, String> {
    let Judgment { lhs, rhs } = &s.judgment;
    let name = s.rule.as_str();
    let bad = |why: &str| Err(format!("{}: {}", name, why));
    if s.rule.uses_sorts() != s.sorts.is_some() {
        return bad("sort annotation missing or spurious");
    }
    let lacts = lhs.actions();
    let a = lhs.head();
    let at = |k: usize| rhs.get(k);
    match s.rule {
        NegRule::Out | NegRule::Inp => {
            let want = if s.rule == NegRule::Out { Dir::Out } else { Dir::In };
            match a {
                Some(a) if a.dir == want && !rhs.has_action(&a.peer, want) => return Ok(None),
                _ => return bad("left head action occurs on the right"),
            }
        }
        NegRule::OutR | NegRule::InpR => {
            let want = if s.rule == NegRule::OutR { Dir::Out } else { Dir::In };
            match rhs.head() {
                Some(b) if b.dir == want && !lacts.contains(&b.action()) => return Ok(None),
                _ => return bad("right head action occurs on the left"),
            }
        }
        _ => {}
    }
    let a = a.ok_or("left tree is end")?;
    let b = at(s.pos).ok_or("position beyond the right-hand tree")?;
    let lhs_dir = match s.rule {
        NegRule::OutL | NegRule::OutS | NegRule::OutW | NegRule::BL | NegRule::BS | NegRule::BW => Dir::Out,
        _ => Dir::In,
    };
    if a.dir != lhs_dir {
        return bad("wrong left head direction");
    }
    // shape of the right-hand prefix
    let prefix_ok = match s.rule {
        NegRule::InpL | NegRule::InpS | NegRule::InpW | NegRule::OutL | NegRule::OutS | NegRule::OutW | NegRule::Io1 => {
            s.pos == 0
        }
        NegRule::AL | NegRule::AS | NegRule::AW | NegRule::Io2 => {
            s.pos > 0 && (0..s.pos).all(|k| at(k).is_some_and(|c| c.dir == Dir::In && c.peer != a.peer))
        }
        NegRule::BL | NegRule::BS | NegRule::BW => {
            s.pos > 0 && (0..s.pos).all(|k| at(k).is_some_and(|c| !(c.dir == Dir::Out && c.peer == a.peer)))
        }
        _ => unreachable!(),
    };
    if !prefix_ok {
        return bad("right-hand prefix has the wrong shape");
    }
    if matches!(s.rule, NegRule::Io1 | NegRule::Io2) {
        return if b.dir == Dir::Out { Ok(None) } else { bad("right letter is not an output") };
    }
    if b.dir != a.dir || b.peer != a.peer {
        return bad("matched letters differ in participant or direction");
    }
    let label_rule = matches!(s.rule, NegRule::InpL | NegRule::AL | NegRule::OutL | NegRule::BL);
    if label_rule {
        return if a.label != b.label { Ok(None) } else { bad("labels are equal") };
    }
    if a.label != b.label {
        return bad("labels differ");
    }
    let sorts = s.sorts.expect("checked above");
    if sorts != (a.sort, b.sort) {
        return bad("recorded sorts differ from the payloads");
    }
    let related = sort_ok(a.dir, a.sort, b.sort);
    match s.rule {
        NegRule::InpS | NegRule::AS | NegRule::OutS | NegRule::BS => {
            if related {
                bad("sorts are related")
            } else {
                Ok(None)
            }
        }
        _ => {
            if !related {
                return bad("sorts are not related");
            }
            Ok(Some(Judgment::new(lhs.tail(), rhs.remove(s.pos))))
        }
    }
}

/// Independent validation of a `⋪` derivation.
pub fn check_negation(d: &NegationDerivation) -> Result<(), String> {
    if d.steps.is_empty() {
        return Err(String::from("empty derivation"));
    }
    for (i, s) in d.steps.iter().enumerate() {
        let next = check_neg_step(s).map_err(|e| format!("step {}: {}", i, e))?;
        let last = i + 1 == d.steps.len();
        match (next, last) {
            (None, true) => {}
            (None, false) => return Err(format!("step {}: axiom with further steps", i)),
            (Some(_), true) => return Err(format!("step {}: derivation ends on a non-axiom", i)),
            (Some(n), false) => {
                if n != d.steps[i + 1].judgment {
                    return Err(format!("step {}: premise is not the next judgment", i));
                }
            }
        }
    }
    Ok(())
}

/// Replacement for `s` not related to it in either direction.
pub fn unrelated_sort(s: Sort) -> Sort {
    match s {
        Sort::Bool => Sort::Nat,
        Sort::Nat | Sort::Int | Sort::Unit => Sort::Bool,
    }
}

fn flip_pair(p: (Sort, Sort)) -> (Sort, Sort) {
    if p.0 != p.1 {
        (p.1, p.0)
    } else {
        (p.0, unrelated_sort(p.1))
    }
}

fn set_sort(w: &Lasso, pos: usize, s: Sort) -> Lasso {
    let mut a = w.get(pos).expect("position exists").clone();
    a.sort = s;
    w.remove(pos).insert(pos, &[a])
}

/// Mutants flipping one subsorting edge (one per step that records one):
/// the recorded sort pair and the judgment's payloads are changed together.
pub fn certificate_mutants(c: &RefinementCertificate) -> Vec<RefinementCertificate> {
    let mut out = Vec::new();
    for (i, s) in c.steps.iter().enumerate() {
        if s.rule == RefRule::End {
            continue;
        }
        let mut m = c.clone();
        let (l, r) = flip_pair(s.sorts);
        let st = &mut m.steps[i];
        st.sorts = (l, r);
        st.judgment.lhs = set_sort(&st.judgment.lhs, 0, l);
        st.judgment.rhs = set_sort(&st.judgment.rhs, st.pos, r);
        out.push(m);
    }
    out
}

pub fn negation_mutants(d: &NegationDerivation) -> Vec<NegationDerivation> {
    let mut out = Vec::new();
    for (i, s) in d.steps.iter().enumerate() {
        let Some(p) = s.sorts else { continue };
        let mut m = d.clone();
        let (l, r) = flip_pair(p);
        let st = &mut m.steps[i];
        st.sorts = Some((l, r));
        st.judgment.lhs = set_sort(&st.judgment.lhs, 0, l);
        st.judgment.rhs = set_sort(&st.judgment.rhs, st.pos, r);
        out.push(m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Lasso {
        Lasso::parse(s).unwrap()
    }

    fn j(a: &str, b: &str) -> Judgment {
        Judgment::new(w(a), w(b))
    }

    #[test]
    fn phi_examples() {
        assert_eq!(rule_step(&j("end", "end")), Phi::True);
        assert_eq!(rule_step(&j("p?l(nat).end", "p?l(int).end")), Phi::False);
        match rule_step(&j("p?l(int).end", "p?l(nat).end")) {
            Phi::Premise { rule: RefRule::In, lhs, rhs, .. } => assert!(lhs.is_end() && rhs.is_end()),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn input_anticipation_cycle() {
        let v = refine(&w("rec t . p?l(nat).q?m(bool).t"), &w("rec t . q?m(bool).p?l(nat).t"), &Budget::default());
        let Verdict::Yes(c) = v else { panic!("{:?}", v) };
        assert!(matches!(c.closure, Closure::Back(_)));
        assert_eq!(c.steps.len(), 2);
        assert_eq!(c.steps[0].rule, RefRule::A);
        assert_eq!(c.steps[1].rule, RefRule::In);
        check_certificate(&c).unwrap();
    }

    #[test]
    fn forgotten_input_is_refuted() {
        let v = refine(&w("rec t . p?l(nat).t"), &w("q?m(bool).rec t . p?l(nat).t"), &Budget::default());
        let Verdict::No(Refutation::Negation(d)) = v else { panic!("{:?}", v) };
        assert!(d.leaf().is_action_axiom());
        check_negation(&d).unwrap();
    }

    #[test]
    fn intro_pair_refuted_by_io1() {
        let d = negate(&w("p?success(int).q!cont(int).end"), &w("q!cont(int).p?success(int).end"), &Budget::default())
            .unwrap();
        assert_eq!(d.steps.len(), 1);
        assert_eq!(d.leaf(), NegRule::Io1);
    }

    #[test]
    fn n_out_axiom() {
        let d = negate(&w("p!l(nat).end"), &w("q?m.end"), &Budget::default()).unwrap();
        assert_eq!(d.leaf(), NegRule::Out);
        assert!(negate(&w("end"), &w("end"), &Budget::default()).is_none());
    }

    #[test]
    fn mutants_are_rejected() {
        let v = refine(&w("p?l(int).q!m(nat).end"), &w("p?l(nat).q!m(int).end"), &Budget::default());
        let Verdict::Yes(c) = v else { panic!() };
        check_certificate(&c).unwrap();
        let ms = certificate_mutants(&c);
        assert_eq!(ms.len(), 2);
        for m in ms {
            assert!(check_certificate(&m).is_err());
        }
    }

    #[test]
    fn sync_mode_disables_anticipation() {
        let b = Budget { sync: true, ..Budget::default() };
        let v = refine(&w("p?a.q?b.end"), &w("q?b.p?a.end"), &b);
        assert!(matches!(v, Verdict::No(Refutation::SyncFailure(_))));
    }
}
