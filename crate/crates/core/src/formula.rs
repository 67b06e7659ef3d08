//! The formula AST shared by every other module, plus the purely syntactic
//! queries over it (free variables, signatures, cleanliness, guards).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A variable `x_i` of the fixed sequence `x1, x2, ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var(u32);

impl Var {
    /// Panics on index 0; use [`Var::try_new`] for untrusted input.
    pub fn new(index: u32) -> Self {
        assert!(index >= 1, "variable indices start at 1");
        Var(index)
    }

    pub fn try_new(index: u32) -> Option<Self> {
        (index >= 1).then_some(Var(index))
    }

    pub fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Shorthand for `Var::new`.
pub fn x(index: u32) -> Var {
    Var::new(index)
}

/// Relational signature: relation name to arity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature(BTreeMap<String, usize>);

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.0.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    /// Adds `name` with `arity`, rejecting a conflicting earlier arity.
    pub fn insert(&mut self, name: &str, arity: usize) -> Result<(), FormulaError> {
        match self.0.get(name) {
            Some(&a) if a != arity => Err(FormulaError::ArityConflict {
                name: name.to_owned(),
                first: a,
                second: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.0.insert(name.to_owned(), arity);
                Ok(())
            }
        }
    }

    pub fn remove(&mut self, name: &str) -> Option<usize> {
        self.0.remove(name)
    }

    /// Union of two signatures; fails if they disagree on an arity.
    pub fn union(&self, other: &Signature) -> Result<Signature, FormulaError> {
        let mut out = self.clone();
        for (name, arity) in other.iter() {
            out.insert(name, arity)?;
        }
        Ok(out)
    }
}

impl<S: Into<String>> FromIterator<(S, usize)> for Signature {
    fn from_iter<I: IntoIterator<Item = (S, usize)>>(iter: I) -> Self {
        Signature(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("relation {name} used with arity {first} and arity {second}")]
    ArityConflict {
        name: String,
        first: usize,
        second: usize,
    },
    #[error("relation {name} has arity {expected} but {found} was supplied")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("predicate renaming is not injective: {0} and {1} share a target")]
    NonInjective(String, String),
    #[error("replacement for {name} has free variable {var} outside its parameter list")]
    ParameterMismatch { name: String, var: Var },
    #[error("parameter list for {0} repeats a variable")]
    RepeatedParameter(String),
}

/// First-order formulas over a relational signature, with second-order
/// predicate quantifiers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    Bottom,
    Rel(String, Vec<Var>),
    Eq(Var, Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
    /// Second-order existential over a relation name of the given arity.
    ExistsSo(String, usize, Box<Formula>),
    ForallSo(String, usize, Box<Formula>),
}

/// Verdict of [`Formula::self_guard`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SelfGuard {
    Sentence,
    GuardedBy(Formula),
    NotSelfGuarded,
}

impl Formula {
    pub fn rel<S: Into<String>>(name: S, args: impl IntoIterator<Item = u32>) -> Formula {
        Formula::Rel(name.into(), args.into_iter().map(Var::new).collect())
    }

    pub fn eq(a: Var, b: Var) -> Formula {
        Formula::Eq(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Forall(v, Box::new(body))
    }

    /// `∃v1 ∃v2 ... body`, outermost first.
    pub fn exists_all(vars: impl IntoIterator<Item = Var>, body: Formula) -> Formula {
        let vars: Vec<Var> = vars.into_iter().collect();
        vars.into_iter()
            .rev()
            .fold(body, |acc, v| Formula::exists(v, acc))
    }

    pub fn forall_all(vars: impl IntoIterator<Item = Var>, body: Formula) -> Formula {
        let vars: Vec<Var> = vars.into_iter().collect();
        vars.into_iter()
            .rev()
            .fold(body, |acc, v| Formula::forall(v, acc))
    }

    pub fn exists_so<S: Into<String>>(name: S, arity: usize, body: Formula) -> Formula {
        Formula::ExistsSo(name.into(), arity, Box::new(body))
    }

    pub fn forall_so<S: Into<String>>(name: S, arity: usize, body: Formula) -> Formula {
        Formula::ForallSo(name.into(), arity, Box::new(body))
    }

    /// Left-nested conjunction; the empty conjunction is `Top`.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::Top,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Left-nested disjunction; the empty disjunction is `Bottom`.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::Bottom,
            Some(first) => it.fold(first, Formula::or),
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Rel(..) | Formula::Eq(..))
    }

    pub fn is_first_order(&self) -> bool {
        !self.any_node(&mut |f| matches!(f, Formula::ExistsSo(..) | Formula::ForallSo(..)))
    }

    pub fn has_equality(&self) -> bool {
        self.any_node(&mut |f| matches!(f, Formula::Eq(..)))
    }

    /// Direct subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            Top | Bottom | Rel(..) | Eq(..) => vec![],
            Not(a) | Exists(_, a) | Forall(_, a) | ExistsSo(_, _, a) | ForallSo(_, _, a) => {
                vec![a]
            }
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => vec![a, b],
        }
    }

    /// Pre-order search for a node satisfying `pred`.
    pub fn any_node(&self, pred: &mut impl FnMut(&Formula) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        self.children().into_iter().any(|c| c.any_node(pred))
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable occurring anywhere, free or bound, including binders.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.any_node(&mut |f| {
            match f {
                Formula::Rel(_, args) => out.extend(args.iter().copied()),
                Formula::Eq(a, b) => {
                    out.insert(*a);
                    out.insert(*b);
                }
                Formula::Exists(v, _) | Formula::Forall(v, _) => {
                    out.insert(*v);
                }
                _ => {}
            }
            false
        });
        out
    }

    /// Variables bound by some first-order quantifier.
    pub fn bound_vars(&self) -> BTreeSet<Var> {
        self.binders().into_iter().collect()
    }

    /// Binder variables in pre-order, with repetitions.
    pub fn binders(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.any_node(&mut |f| {
            if let Formula::Exists(v, _) | Formula::Forall(v, _) = f {
                out.push(*v);
            }
            false
        });
        out
    }

    pub fn max_var_index(&self) -> u32 {
        self.all_vars().iter().map(|v| v.index()).max().unwrap_or(0)
    }

    /// Greatest index of a free variable, 0 for sentences.
    pub fn gfv(&self) -> u32 {
        self.free_vars()
            .iter()
            .map(|v| v.index())
            .max()
            .unwrap_or(0)
    }

    /// Relation names occurring free (not under a second-order binder for
    /// the same name), with their arities.
    pub fn sig(&self) -> Result<Signature, FormulaError> {
        let mut out = Signature::new();
        let mut bound: Vec<(&str, usize)> = Vec::new();
        collect_sig(self, &mut bound, &mut out)?;
        Ok(out)
    }

    /// Every relation name in the formula, bound or free.
    pub fn relation_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.any_node(&mut |f| {
            match f {
                Formula::Rel(n, _) | Formula::ExistsSo(n, _, _) | Formula::ForallSo(n, _, _) => {
                    out.insert(n.clone());
                }
                _ => {}
            }
            false
        });
        out
    }

    /// No free variable also occurs bound, and no variable is bound twice.
    pub fn is_clean(&self) -> bool {
        let binders = self.binders();
        let distinct: BTreeSet<Var> = binders.iter().copied().collect();
        if distinct.len() != binders.len() {
            return false;
        }
        self.free_vars().is_disjoint(&distinct)
    }

    /// Self-guardedness: a sentence, an (∃-quantified) atom standing alone, or
    /// `α ∧ ψ` where `α` is an ∃-guard whose free variables cover the whole
    /// formula.
    pub fn self_guard(&self) -> SelfGuard {
        if self.is_sentence() {
            return SelfGuard::Sentence;
        }
        if is_exists_guard(self) {
            return SelfGuard::GuardedBy(self.clone());
        }
        if let Formula::And(alpha, _) = self {
            if is_exists_guard(alpha) && alpha.free_vars().is_superset(&self.free_vars()) {
                return SelfGuard::GuardedBy((**alpha).clone());
            }
        }
        SelfGuard::NotSelfGuarded
    }

    /// Rewrites `→`, `↔` and `⊥` into `¬`, `∧`, `∨`, `⊤`.
    pub fn desugar(&self) -> Formula {
        use Formula::*;
        match self {
            Top | Rel(..) | Eq(..) => self.clone(),
            Bottom => Formula::not(Top),
            Not(a) => Formula::not(a.desugar()),
            And(a, b) => Formula::and(a.desugar(), b.desugar()),
            Or(a, b) => Formula::or(a.desugar(), b.desugar()),
            Implies(a, b) => Formula::or(Formula::not(a.desugar()), b.desugar()),
            Iff(a, b) => {
                let (a, b) = (a.desugar(), b.desugar());
                Formula::and(
                    Formula::or(Formula::not(a.clone()), b.clone()),
                    Formula::or(Formula::not(b), a),
                )
            }
            Exists(v, a) => Formula::exists(*v, a.desugar()),
            Forall(v, a) => Formula::forall(*v, a.desugar()),
            ExistsSo(n, k, a) => Formula::exists_so(n.clone(), *k, a.desugar()),
            ForallSo(n, k, a) => Formula::forall_so(n.clone(), *k, a.desugar()),
        }
    }

    /// Flattens nested `And` nodes into their conjunct list.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        flatten_and(self, &mut out);
        out
    }

    /// Flattens nested `Or` nodes into their disjunct list.
    pub fn disjuncts(&self) -> Vec<&Formula> {
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::Or(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                other => out.push(other),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }
}

fn flatten_and<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::And(a, b) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        other => out.push(other),
    }
}

/// A possibly-existentially-quantified atomic formula.
pub fn is_exists_guard(f: &Formula) -> bool {
    match f {
        Formula::Exists(_, body) => is_exists_guard(body),
        other => other.is_atomic(),
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    use Formula::*;
    match f {
        Top | Bottom => {}
        Rel(_, args) => out.extend(args.iter().filter(|v| !bound.contains(v)).copied()),
        Eq(a, b) => {
            for v in [a, b] {
                if !bound.contains(v) {
                    out.insert(*v);
                }
            }
        }
        Exists(v, body) | Forall(v, body) => {
            bound.push(*v);
            collect_free(body, bound, out);
            bound.pop();
        }
        _ => {
            for c in f.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

fn collect_sig<'a>(
    f: &'a Formula,
    bound: &mut Vec<(&'a str, usize)>,
    out: &mut Signature,
) -> Result<(), FormulaError> {
    use Formula::*;
    match f {
        Rel(name, args) => {
            if let Some(&(_, k)) = bound.iter().rev().find(|(n, _)| *n == name) {
                if k != args.len() {
                    return Err(FormulaError::ArityConflict {
                        name: name.clone(),
                        first: k,
                        second: args.len(),
                    });
                }
            } else {
                out.insert(name, args.len())?;
            }
            Ok(())
        }
        ExistsSo(name, k, body) | ForallSo(name, k, body) => {
            bound.push((name, *k));
            let r = collect_sig(body, bound, out);
            bound.pop();
            r
        }
        _ => {
            for c in f.children() {
                collect_sig(c, bound, out)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn vars(ix: &[u32]) -> BTreeSet<Var> {
        ix.iter().map(|&i| x(i)).collect()
    }

    #[test]
    fn free_vars_basic() {
        assert_eq!(p("R(x1,x2)").free_vars(), vars(&[1, 2]));
        assert_eq!(p("E x2. R(x1,x2)").free_vars(), vars(&[1]));
        assert_eq!(p("E2 P/1. P(x3)").free_vars(), vars(&[3]));
    }

    #[test]
    fn signature_excludes_second_order_bound_names() {
        let s = p("R(x1,x2) & P(x1)").sig().unwrap();
        assert_eq!(s, [("R", 2), ("P", 1)].into_iter().collect());
        assert!(p("E2 P/1. P(x1)").sig().unwrap().is_empty());
        assert!(p("x1=x2").sig().unwrap().is_empty());
    }

    #[test]
    fn signature_arity_conflict() {
        let err = p("R(x1) & R(x1,x2)").sig().unwrap_err();
        assert!(matches!(err, FormulaError::ArityConflict { .. }));
        // a bound P/1 used with two arguments is also a conflict
        assert!(p("E2 P/1. P(x1,x2)").sig().is_err());
    }

    #[test]
    fn gfv_cases() {
        assert_eq!(p("R(x1,x3)").gfv(), 3);
        assert_eq!(p("E x1. P(x1)").gfv(), 0);
        assert_eq!(p("P(x2) & Q(x5)").gfv(), 5);
    }

    #[test]
    fn cleanliness() {
        assert!(p("E x2. R(x1,x2)").is_clean());
        assert!(!p("P(x1) & E x1. Q(x1)").is_clean());
        assert!(!p("(E x2. P(x2)) & (E x2. Q(x2))").is_clean());
    }

    #[test]
    fn desugar_cases() {
        assert_eq!(p("P(x1) -> Q(x1)").desugar(), p("!P(x1) | Q(x1)"));
        assert_eq!(Formula::Bottom.desugar(), Formula::not(Formula::Top));
        let d = p("!P(x1) | (Q(x1) & true)");
        assert_eq!(d.desugar(), d);
        let iff = p("P(x1) <-> Q(x1)").desugar();
        assert_eq!(iff.desugar(), iff);
    }

    #[test]
    fn self_guard_cases() {
        let f = p("x1=x1 & P(x1)");
        assert_eq!(f.self_guard(), SelfGuard::GuardedBy(p("x1=x1")));
        assert_eq!(p("E x1. P(x1)").self_guard(), SelfGuard::Sentence);
        assert_eq!(p("P(x1) & Q(x2)").self_guard(), SelfGuard::NotSelfGuarded);
        assert_eq!(
            p("(E x3. G(x1,x2,x3)) & !S(x1,x2)").self_guard(),
            SelfGuard::GuardedBy(p("E x3. G(x1,x2,x3)"))
        );
        assert_eq!(
            p("S(x1,x2)").self_guard(),
            SelfGuard::GuardedBy(p("S(x1,x2)"))
        );
    }
}
