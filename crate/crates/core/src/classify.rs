//! Syntactic membership tests for the decidable fragments, with level
//! computation for the fluted and forward fragments.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{Formula, FormulaError, SelfGuard, Var};
use crate::syntax::print;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FragmentId {
    #[serde(rename = "FO2")]
    Fo2,
    #[serde(rename = "GFO")]
    Gfo,
    #[serde(rename = "GNFO_PRIMITIVE")]
    GnfoPrimitive,
    #[serde(rename = "GNFO_UCQ")]
    GnfoUcq,
    #[serde(rename = "UNFO")]
    Unfo,
    #[serde(rename = "CQ")]
    Cq,
    #[serde(rename = "UCQ")]
    Ucq,
    #[serde(rename = "EXISTS_AND")]
    ExistsAnd,
    #[serde(rename = "FL")]
    Fl,
    #[serde(rename = "FF")]
    Ff,
}

impl FragmentId {
    pub const ALL: [FragmentId; 10] = [
        FragmentId::Fo2,
        FragmentId::Gfo,
        FragmentId::GnfoPrimitive,
        FragmentId::GnfoUcq,
        FragmentId::Unfo,
        FragmentId::Cq,
        FragmentId::Ucq,
        FragmentId::ExistsAnd,
        FragmentId::Fl,
        FragmentId::Ff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FragmentId::Fo2 => "FO2",
            FragmentId::Gfo => "GFO",
            FragmentId::GnfoPrimitive => "GNFO_PRIMITIVE",
            FragmentId::GnfoUcq => "GNFO_UCQ",
            FragmentId::Unfo => "UNFO",
            FragmentId::Cq => "CQ",
            FragmentId::Ucq => "UCQ",
            FragmentId::ExistsAnd => "EXISTS_AND",
            FragmentId::Fl => "FL",
            FragmentId::Ff => "FF",
        }
    }

    pub fn has_levels(self) -> bool {
        matches!(self, FragmentId::Fl | FragmentId::Ff)
    }
}

impl fmt::Display for FragmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown fragment {0}")]
pub struct UnknownFragment(pub String);

impl FromStr for FragmentId {
    type Err = UnknownFragment;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        let id = match key.as_str() {
            "FO2" => FragmentId::Fo2,
            "GFO" | "GF" => FragmentId::Gfo,
            "GNFO" | "GNFO_PRIMITIVE" => FragmentId::GnfoPrimitive,
            "GNFO_UCQ" => FragmentId::GnfoUcq,
            "UNFO" => FragmentId::Unfo,
            "CQ" => FragmentId::Cq,
            "UCQ" => FragmentId::Ucq,
            "EXISTS_AND" | "FO_EXISTS_AND" => FragmentId::ExistsAnd,
            "FL" => FragmentId::Fl,
            "FF" => FragmentId::Ff,
            _ => return Err(UnknownFragment(s.to_owned())),
        };
        Ok(id)
    }
}

/// A set of levels `n`: either finite, or every `n` from some bound upward.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelSet {
    Finite(BTreeSet<u32>),
    From(u32),
}

impl LevelSet {
    pub fn empty() -> Self {
        LevelSet::Finite(BTreeSet::new())
    }

    pub fn single(n: u32) -> Self {
        LevelSet::Finite([n].into_iter().collect())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, LevelSet::Finite(s) if s.is_empty())
    }

    pub fn contains(&self, n: u32) -> bool {
        match self {
            LevelSet::Finite(s) => s.contains(&n),
            LevelSet::From(m) => n >= *m,
        }
    }

    pub fn intersect(&self, other: &LevelSet) -> LevelSet {
        match (self, other) {
            (LevelSet::Finite(a), LevelSet::Finite(b)) => {
                LevelSet::Finite(a.intersection(b).copied().collect())
            }
            (LevelSet::Finite(a), LevelSet::From(m)) | (LevelSet::From(m), LevelSet::Finite(a)) => {
                LevelSet::Finite(a.iter().copied().filter(|n| n >= m).collect())
            }
            (LevelSet::From(a), LevelSet::From(b)) => LevelSet::From(*a.max(b)),
        }
    }

    pub fn is_subset(&self, other: &LevelSet) -> bool {
        match (self, other) {
            (LevelSet::Finite(a), _) => a.iter().all(|n| other.contains(*n)),
            (LevelSet::From(_), LevelSet::Finite(_)) => false,
            (LevelSet::From(a), LevelSet::From(b)) => a >= b,
        }
    }
}

impl fmt::Display for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelSet::Finite(s) => {
                let items: Vec<String> = s.iter().map(u32::to_string).collect();
                write!(f, "{{{}}}", items.join(","))
            }
            LevelSet::From(m) => write!(f, "{{n>={m}}}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MembershipResult {
    pub member: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<LevelSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl MembershipResult {
    fn yes() -> Self {
        Self {
            member: true,
            levels: None,
            reason: None,
        }
    }

    fn from_check(r: Result<(), String>) -> Self {
        match r {
            Ok(()) => Self::yes(),
            Err(reason) => Self {
                member: false,
                levels: None,
                reason: Some(reason),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("unsupported construct: {0}")]
    UnsupportedConstruct(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

type Check = Result<(), String>;

fn at(f: &Formula, what: &str) -> String {
    format!("{what} at {}", print(f))
}

pub fn fragment_membership(f: &Formula, id: FragmentId) -> Result<MembershipResult, ClassifyError> {
    if !f.is_first_order() {
        return Err(ClassifyError::UnsupportedConstruct(
            "second-order quantifier".into(),
        ));
    }
    let sig = f.sig()?;
    let result = match id {
        FragmentId::Fo2 => {
            if let Some((name, k)) = sig.iter().find(|(_, k)| *k == 0 || *k > 2) {
                MembershipResult::from_check(Err(format!("relation {name} has arity {k}")))
            } else {
                let vars = f.all_vars();
                MembershipResult::from_check(if vars.len() <= 2 {
                    Ok(())
                } else {
                    Err(format!("{} distinct variables", vars.len()))
                })
            }
        }
        FragmentId::Gfo => MembershipResult::from_check(gfo(f)),
        FragmentId::GnfoPrimitive => MembershipResult::from_check(gnfo(f)),
        FragmentId::GnfoUcq => MembershipResult::from_check(gnfo_ucq(f)),
        FragmentId::Unfo => MembershipResult::from_check(unfo(f)),
        FragmentId::Cq => MembershipResult::from_check(cq(f)),
        FragmentId::Ucq => MembershipResult::from_check(ucq(f)),
        FragmentId::ExistsAnd => MembershipResult::from_check(exists_and(f)),
        FragmentId::Fl | FragmentId::Ff => {
            let mode = if id == FragmentId::Fl { Order::Fluted } else { Order::Forward };
            match levels(f, mode) {
                Ok(levels) if !levels.is_empty() => MembershipResult {
                    member: true,
                    levels: Some(levels),
                    reason: None,
                },
                Ok(levels) => MembershipResult {
                    member: false,
                    levels: Some(levels),
                    reason: Some("no common level".into()),
                },
                Err(reason) => MembershipResult {
                    member: false,
                    levels: Some(LevelSet::empty()),
                    reason: Some(reason),
                },
            }
        }
    };
    Ok(result)
}

pub fn is_member(f: &Formula, id: FragmentId) -> bool {
    fragment_membership(f, id).is_ok_and(|r| r.member)
}

fn guarded_by_atom(conjuncts: &[&Formula], body: &Formula) -> bool {
    let need = body.free_vars();
    conjuncts
        .iter()
        .any(|c| c.is_atomic() && c.free_vars().is_superset(&need))
}

fn gfo(f: &Formula) -> Check {
    use Formula::*;
    match f {
        Top | Rel(..) | Eq(..) => Ok(()),
        And(a, b) | Or(a, b) => gfo(a).and_then(|_| gfo(b)),
        Not(a) => gfo(a),
        Exists(..) => {
            let mut body = f;
            while let Exists(_, inner) = body {
                body = inner;
            }
            let parts = body.conjuncts();
            if parts.len() == 1 && body.is_atomic() {
                return Ok(());
            }
            let guard = parts.iter().enumerate().find(|(i, c)| {
                c.is_atomic()
                    && parts
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| j != i)
                        .all(|(_, d)| c.free_vars().is_superset(&d.free_vars()))
            });
            if guard.is_none() {
                return Err(at(f, "unguarded quantifier"));
            }
            parts.iter().try_for_each(|c| gfo(c))
        }
        Bottom => Err(at(f, "falsum outside the grammar")),
        Forall(..) => Err(at(f, "universal quantifier outside the grammar")),
        Implies(..) | Iff(..) => Err(at(f, "connective outside the grammar")),
        ExistsSo(..) | ForallSo(..) => Err(at(f, "second-order quantifier")),
    }
}

fn gnfo(f: &Formula) -> Check {
    use Formula::*;
    match f {
        Top | Rel(..) | Eq(..) => Ok(()),
        And(..) => {
            let parts = f.conjuncts();
            parts.iter().try_for_each(|c| match c {
                Not(inner) => {
                    if guarded_by_atom(&parts, inner) {
                        gnfo(inner)
                    } else {
                        Err(at(c, "unguarded negation"))
                    }
                }
                other => gnfo(other),
            })
        }
        Or(a, b) => gnfo(a).and_then(|_| gnfo(b)),
        Exists(_, a) => gnfo(a),
        Not(_) => Err(at(f, "unguarded negation")),
        Bottom => Err(at(f, "falsum outside the grammar")),
        Forall(..) => Err(at(f, "universal quantifier outside the grammar")),
        Implies(..) | Iff(..) => Err(at(f, "connective outside the grammar")),
        ExistsSo(..) | ForallSo(..) => Err(at(f, "second-order quantifier")),
    }
}

/// The UCQ syntax: a disjunction of ∃/∧-trees whose leaves are atoms,
/// guarded negations, or self-guarded members.
fn gnfo_ucq(f: &Formula) -> Check {
    use Formula::*;
    match f {
        Rel(..) | Eq(..) => Ok(()),
        Or(..) | And(..) | Exists(..) => f.disjuncts().into_iter().try_for_each(ucq_branch),
        Not(_) => Err(at(f, "unguarded negation")),
        _ => Err(at(f, "construct outside the grammar")),
    }
}

fn ucq_branch(f: &Formula) -> Check {
    use Formula::*;
    let mut body = f;
    while let Exists(_, inner) = body {
        body = inner;
    }
    let parts = body.conjuncts();
    for c in &parts {
        match c {
            Rel(..) | Eq(..) => {}
            Not(inner) => {
                if !guarded_by_atom(&parts, inner) {
                    return Err(at(c, "unguarded negation"));
                }
                gnfo_ucq(inner)?;
            }
            Exists(..) | And(..) => ucq_branch(c)?,
            Or(..) => {
                if matches!(c.self_guard(), SelfGuard::NotSelfGuarded) {
                    return Err(at(c, "argument not self-guarded"));
                }
                gnfo_ucq(c)?;
            }
            _ => return Err(at(c, "construct outside the grammar")),
        }
    }
    Ok(())
}

fn unfo(f: &Formula) -> Check {
    use Formula::*;
    match f {
        Top | Rel(..) | Eq(..) => Ok(()),
        And(a, b) | Or(a, b) => unfo(a).and_then(|_| unfo(b)),
        Exists(_, a) => unfo(a),
        Not(a) => {
            if a.free_vars().len() <= 1 {
                unfo(a)
            } else {
                Err(at(f, "negation of a formula with several free variables"))
            }
        }
        Bottom => Err(at(f, "falsum outside the grammar")),
        Forall(..) => Err(at(f, "universal quantifier outside the grammar")),
        Implies(..) | Iff(..) => Err(at(f, "connective outside the grammar")),
        ExistsSo(..) | ForallSo(..) => Err(at(f, "second-order quantifier")),
    }
}

fn cq(f: &Formula) -> Check {
    let mut body = f;
    while let Formula::Exists(_, inner) = body {
        body = inner;
    }
    match body.conjuncts().into_iter().find(|c| !c.is_atomic()) {
        None => Ok(()),
        Some(bad) => Err(at(bad, "non-atomic conjunct")),
    }
}

fn ucq(f: &Formula) -> Check {
    f.disjuncts().into_iter().try_for_each(cq)
}

fn exists_and(f: &Formula) -> Check {
    use Formula::*;
    match f {
        Rel(..) | Eq(..) => Ok(()),
        And(a, b) => exists_and(a).and_then(|_| exists_and(b)),
        Exists(_, a) => exists_and(a),
        _ => Err(at(f, "construct outside the grammar")),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Order {
    Fluted,
    Forward,
}

/// Contiguous ascending run of indices, returning its last index.
fn ascending_run(args: &[Var]) -> Option<u32> {
    let first = args.first()?.index();
    args.iter()
        .enumerate()
        .all(|(i, v)| v.index() == first + i as u32)
        .then(|| first + args.len() as u32 - 1)
}

fn levels(f: &Formula, mode: Order) -> Result<LevelSet, String> {
    use Formula::*;
    match f {
        Rel(name, args) => {
            if args.is_empty() {
                return Err(at(f, &format!("0-ary relation {name}")));
            }
            match (ascending_run(args), mode) {
                (Some(n), Order::Fluted) => Ok(LevelSet::single(n)),
                (Some(k), Order::Forward) => Ok(LevelSet::From(k)),
                (None, Order::Fluted) => Err(at(f, "not a suffix atom")),
                (None, Order::Forward) => Err(at(f, "not an infix atom")),
            }
        }
        Eq(..) => Err(at(f, "equality")),
        Top | Bottom => Err(at(f, "constant outside the grammar")),
        Not(a) => levels(a, mode),
        And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
            let la = levels(a, mode)?;
            let lb = levels(b, mode)?;
            Ok(la.intersect(&lb))
        }
        Exists(v, a) | Forall(v, a) => {
            let inner = levels(a, mode)?;
            if inner.contains(v.index()) {
                Ok(LevelSet::single(v.index() - 1))
            } else {
                Err(at(f, &format!("quantifier over {v} outside level {inner}")))
            }
        }
        ExistsSo(..) | ForallSo(..) => Err(at(f, "second-order quantifier")),
    }
}

fn level_set(f: &Formula, mode: Order) -> Result<LevelSet, ClassifyError> {
    if !f.is_first_order() {
        return Err(ClassifyError::UnsupportedConstruct(
            "second-order quantifier".into(),
        ));
    }
    f.sig()?;
    Ok(levels(f, mode).unwrap_or_else(|_| LevelSet::empty()))
}

/// Levels `n` with `f ∈ FLⁿ`; empty when `f` is not fluted.
pub fn fl_level(f: &Formula) -> Result<LevelSet, ClassifyError> {
    level_set(f, Order::Fluted)
}

/// Levels `n` with `f ∈ FFⁿ`; empty when `f` is not forward.
pub fn ff_level(f: &Formula) -> Result<LevelSet, ClassifyError> {
    level_set(f, Order::Forward)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Yes {
        #[serde(skip_serializing_if = "Option::is_none")]
        levels: Option<LevelSet>,
    },
    No {
        #[serde(skip_serializing_if = "Option::is_none")]
        levels: Option<LevelSet>,
        reason: String,
    },
    NotApplicable {
        reason: String,
    },
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes { .. })
    }

    pub fn from_result(r: Result<MembershipResult, ClassifyError>) -> Self {
        match r {
            Ok(m) if m.member => Verdict::Yes { levels: m.levels },
            Ok(m) => Verdict::No {
                levels: m.levels,
                reason: m.reason.unwrap_or_default(),
            },
            Err(e) => Verdict::NotApplicable {
                reason: e.to_string(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FragmentLine {
    pub fragment: FragmentId,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl fmt::Display for FragmentLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            Verdict::Yes { levels } => {
                write!(f, "{}: yes", self.fragment)?;
                if let Some(l) = levels {
                    write!(f, " {l}")?;
                }
                Ok(())
            }
            Verdict::No { reason, .. } => write!(f, "{}: no ({reason})", self.fragment),
            Verdict::NotApplicable { reason } => write!(f, "{}: n/a ({reason})", self.fragment),
        }
    }
}

pub fn classify_one(f: &Formula, id: FragmentId) -> FragmentLine {
    FragmentLine {
        fragment: id,
        verdict: Verdict::from_result(fragment_membership(f, id)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassificationReport {
    pub formula: String,
    pub gfv: u32,
    pub clean: bool,
    pub self_guarded: String,
    pub fragments: Vec<FragmentLine>,
}

impl ClassificationReport {
    pub fn verdict(&self, id: FragmentId) -> &Verdict {
        &self
            .fragments
            .iter()
            .find(|l| l.fragment == id)
            .expect("every fragment is reported")
            .verdict
    }
}

impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.fragments {
            writeln!(f, "{line}")?;
        }
        writeln!(f, "gfv: {}", self.gfv)?;
        writeln!(f, "clean: {}", if self.clean { "yes" } else { "no" })?;
        write!(f, "self-guarded: {}", self.self_guarded)
    }
}

pub fn classify_all(f: &Formula) -> ClassificationReport {
    let self_guarded = match f.self_guard() {
        SelfGuard::Sentence => "sentence".to_owned(),
        SelfGuard::GuardedBy(alpha) => format!("guarded by {}", print(&alpha)),
        SelfGuard::NotSelfGuarded => "no".to_owned(),
    };
    ClassificationReport {
        formula: print(f),
        gfv: f.gfv(),
        clean: f.is_clean(),
        self_guarded,
        fragments: FragmentId::ALL.iter().map(|id| classify_one(f, *id)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn member(s: &str, id: FragmentId) -> bool {
        fragment_membership(&p(s), id).unwrap().member
    }

    #[test]
    fn cycle_sentence() {
        let s = "E x1. E x2. (R(x1,x2) & R(x2,x1))";
        assert!(member(s, FragmentId::Gfo));
        assert!(member(s, FragmentId::Fo2));
        assert!(member(s, FragmentId::Unfo));
        assert!(!member(s, FragmentId::Ff));
        assert!(!member(s, FragmentId::Fl));
    }

    #[test]
    fn substitution_breaks_guardedness() {
        assert!(member("E x1. E x2. (R(x1,x2) & !S(x1,x2))", FragmentId::Gfo));
        assert!(!member(
            "E x1. E x2. (x1=x1 & x2=x2 & !S(x1,x2))",
            FragmentId::Gfo
        ));
        assert!(!member(
            "E x1. E x2. (x1=x1 & x2=x2 & !S(x1,x2))",
            FragmentId::GnfoPrimitive
        ));
    }

    #[test]
    fn fluted_conjunction() {
        assert!(member("P(x1)", FragmentId::Fl));
        assert!(member("P(x2)", FragmentId::Fl));
        let r = fragment_membership(&p("P(x1) & P(x2)"), FragmentId::Fl).unwrap();
        assert!(!r.member);
        assert_eq!(r.reason.as_deref(), Some("no common level"));
        assert!(member("P(x1) & P(x2)", FragmentId::Ff));
    }

    #[test]
    fn level_examples() {
        assert_eq!(fl_level(&p("P(x1)")).unwrap(), LevelSet::single(1));
        assert_eq!(fl_level(&p("P(x2)")).unwrap(), LevelSet::single(2));
        assert_eq!(ff_level(&p("R(x1,x2)")).unwrap(), LevelSet::From(2));
        assert_eq!(ff_level(&p("E x3. S(x1,x2,x3)")).unwrap(), LevelSet::single(2));
        assert!(ff_level(&p("R(x2,x1)")).unwrap().is_empty());
        assert!(fl_level(&p("x1=x1")).unwrap().is_empty());
        assert!(fl_level(&p("E2 P/1. P(x1)")).is_err());
    }

    #[test]
    fn level_set_algebra() {
        let a = LevelSet::From(2);
        let b: LevelSet = LevelSet::Finite([1, 2, 5].into_iter().collect());
        assert_eq!(a.intersect(&b), LevelSet::Finite([2, 5].into_iter().collect()));
        assert_eq!(a.intersect(&LevelSet::From(4)), LevelSet::From(4));
        assert!(LevelSet::single(3).is_subset(&a));
        assert!(!a.is_subset(&b));
        assert_eq!(a.to_string(), "{n>=2}");
        assert_eq!(b.to_string(), "{1,2,5}");
    }

    #[test]
    fn top_is_guarded() {
        assert!(member("true", FragmentId::Gfo));
        assert!(member("true", FragmentId::GnfoPrimitive));
    }

    #[test]
    fn second_order_is_not_applicable() {
        let report = classify_all(&p("E2 P/1. P(x1)"));
        assert!(report
            .fragments
            .iter()
            .all(|l| matches!(l.verdict, Verdict::NotApplicable { .. })));
    }

    #[test]
    fn guarded_negation_and_cq_shapes() {
        assert!(member("R(x1,x2) & !S(x1,x2)", FragmentId::GnfoPrimitive));
        assert!(member("R(x1,x2) & !S(x1,x2)", FragmentId::GnfoUcq));
        assert!(!member("!(E x1. P(x1))", FragmentId::GnfoPrimitive));
        assert!(member("E x2. (R(x1,x2) & x2=x1)", FragmentId::Cq));
        assert!(!member("P(x1) & E x2. R(x1,x2)", FragmentId::Cq));
        assert!(member("P(x1) & E x2. R(x1,x2)", FragmentId::ExistsAnd));
        assert!(member("P(x1) | E x2. R(x1,x2)", FragmentId::Ucq));
        assert!(!member("!P(x1) & !R(x1,x2)", FragmentId::Unfo));
        assert!(member("!P(x1) & E x2. !R(x2,x2)", FragmentId::Unfo));
    }

    #[test]
    fn fo2_counts_distinct_indices() {
        assert!(member("E x3. (R(x3,x5) & A x5. P(x5))", FragmentId::Fo2));
        assert!(!member("T(x1,x2,x1)", FragmentId::Fo2));
        assert!(!member("Z()", FragmentId::Fo2));
    }

    #[test]
    fn report_lines() {
        let report = classify_all(&p("P(x1) & P(x2)"));
        let text = report.to_string();
        assert!(text.contains("FL: no (no common level)"));
        assert!(text.contains("FF: yes {n>=2}"));
    }
}
