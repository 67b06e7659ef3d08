//! Formula constructions: BIND, relativization to singleton predicates,
//! interpolation sandwiches, UCQ application and the transitivity wrapper.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::classify::{is_member, FragmentId};
use crate::formula::{Formula, FormulaError, SelfGuard, Var};
use crate::gallery::transitivity;
use crate::rewrite::{
    rename_free_vars, rename_predicates, substitute_atoms, substitute_open, FreshNamePool,
    PredicateRenaming, Replacement, Substitution, VariableRenaming,
};
use crate::structure::{Assignment, Structure};
use crate::syntax::print;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("formula is not clean")]
    NotClean,
    #[error("formula is not in the existential-conjunctive fragment")]
    NotExistsAnd,
    #[error("{vars} variables but {preds} predicates")]
    LengthMismatch { vars: usize, preds: usize },
    #[error("variable {0} listed twice")]
    RepeatedVariable(Var),
    #[error("variable {0} is bound in the formula")]
    BoundVariable(Var),
    #[error("predicate {0} is not fresh")]
    NotFresh(String),
    #[error("predicate {0} is not unary")]
    PredicateNotUnary(String),
    #[error("predicate {0} does not occur in the formula")]
    PredicateAbsent(String),
    #[error("formula contains a second-order quantifier")]
    NotFirstOrder,
    #[error("renaming is not total on the free variables: {0} unmapped")]
    RenamingNotTotal(Var),
    #[error("renaming is not injective ({0} and {1} share an image); see the stored countermodel for the non-injective case")]
    NonInjectiveRenaming(Var, Var),
    #[error("query is not a union of conjunctive queries")]
    NotUcq,
    #[error("argument for {0} is not self-guarded")]
    NotSelfGuarded(String),
    #[error("variable lists overlap at {0}")]
    Overlap(Var),
    #[error("free variable {0} not covered by the supplied variables")]
    Uncovered(Var),
    #[error("relations {0} and {1} must be distinct")]
    SameRelation(String, String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

fn check_distinct(vars: &[Var]) -> Result<(), TransformError> {
    let mut seen = BTreeSet::new();
    for v in vars {
        if !seen.insert(*v) {
            return Err(TransformError::RepeatedVariable(*v));
        }
    }
    Ok(())
}

fn check_exists_and_clean(phi: &Formula) -> Result<(), TransformError> {
    if !phi.is_clean() {
        return Err(TransformError::NotClean);
    }
    if !is_member(phi, FragmentId::ExistsAnd) {
        return Err(TransformError::NotExistsAnd);
    }
    Ok(())
}

/// `BIND_{ȳ↦P̄}(φ)` for a clean existential-conjunctive `φ`. The `y_i`
/// must be distinct and not bound in `φ`; the `P_i` must be fresh.
pub fn bind(phi: &Formula, ys: &[Var], ps: &[String]) -> Result<Formula, TransformError> {
    check_exists_and_clean(phi)?;
    check_distinct(ys)?;
    if ys.len() != ps.len() {
        return Err(TransformError::LengthMismatch {
            vars: ys.len(),
            preds: ps.len(),
        });
    }
    let bound = phi.bound_vars();
    if let Some(y) = ys.iter().find(|y| bound.contains(y)) {
        return Err(TransformError::BoundVariable(*y));
    }
    let names = phi.relation_names();
    let mut seen = BTreeSet::new();
    if let Some(p) = ps.iter().find(|p| names.contains(*p) || !seen.insert(*p)) {
        return Err(TransformError::NotFresh(p.clone()));
    }
    Ok(bind_recursive(phi, ys, ps))
}

/// The recursion of BIND without precondition checks; used when composing
/// BIND with itself, where the inner result is no longer clean.
pub fn bind_recursive(phi: &Formula, ys: &[Var], ps: &[String]) -> Formula {
    match phi {
        Formula::And(a, b) => Formula::and(bind_recursive(a, ys, ps), bind_recursive(b, ys, ps)),
        Formula::Exists(z, body) => Formula::exists(*z, bind_recursive(body, ys, ps)),
        atom => {
            let free = atom.free_vars();
            let hits: Vec<(Var, &String)> = ys
                .iter()
                .zip(ps)
                .filter(|(y, _)| free.contains(y))
                .map(|(y, p)| (*y, p))
                .collect();
            if hits.is_empty() {
                return atom.clone();
            }
            let body = Formula::conj(
                std::iter::once(atom.clone())
                    .chain(hits.iter().map(|(y, p)| Formula::Rel((*p).clone(), vec![*y]))),
            );
            Formula::exists_all(hits.iter().map(|(y, _)| *y), body)
        }
    }
}

/// Relativization of the free variables to fresh singleton predicates,
/// together with the variable-to-predicate pairing.
pub fn relativize_with(
    phi: &Formula,
    pool: &mut FreshNamePool,
) -> Result<(Formula, Vec<(Var, String)>), TransformError> {
    if !phi.is_first_order() {
        return Err(TransformError::NotFirstOrder);
    }
    let free: Vec<Var> = phi.free_vars().into_iter().collect();
    if free.is_empty() {
        return Ok((phi.clone(), Vec::new()));
    }
    let y = Var::new(phi.max_var_index() + 1);
    let pairs: Vec<(Var, String)> = free.iter().map(|v| (*v, pool.fresh("P"))).collect();
    let mut parts = Vec::new();
    for (v, p) in &pairs {
        parts.push(Formula::Rel(p.clone(), vec![*v]));
        parts.push(Formula::forall(
            y,
            Formula::implies(Formula::Rel(p.clone(), vec![y]), Formula::eq(y, *v)),
        ));
    }
    parts.push(phi.clone());
    Ok((Formula::exists_all(free, Formula::conj(parts)), pairs))
}

/// `∃x̄ (⋀ (P_i(x_i) ∧ ∀y (P_i(y) → y = x_i)) ∧ φ)` with fresh unary `P_i`;
/// sentences are returned unchanged.
pub fn relativize(phi: &Formula) -> Result<Formula, TransformError> {
    let mut pool = FreshNamePool::avoiding([phi]);
    Ok(relativize_with(phi, &mut pool)?.0)
}

/// A pair `γ ⊨ χ` with predicates hidden on each side, and the formula both
/// second-order closures should be equivalent to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sandwich {
    pub gamma: Formula,
    pub chi: Formula,
    pub hidden_exists: Vec<(String, usize)>,
    pub hidden_forall: Vec<(String, usize)>,
    pub target: Formula,
}

impl Sandwich {
    pub fn exists_closure(&self) -> Formula {
        self.hidden_exists
            .iter()
            .rev()
            .fold(self.gamma.clone(), |acc, (n, k)| Formula::exists_so(n.clone(), *k, acc))
    }

    pub fn forall_closure(&self) -> Formula {
        self.hidden_forall
            .iter()
            .rev()
            .fold(self.chi.clone(), |acc, (n, k)| Formula::forall_so(n.clone(), *k, acc))
    }

    /// Hidden names occur only on their own side and not in the target.
    pub fn is_well_formed(&self) -> bool {
        let g = self.gamma.relation_names();
        let c = self.chi.relation_names();
        let t = self.target.relation_names();
        self.hidden_exists
            .iter()
            .all(|(n, _)| !c.contains(n) && !t.contains(n))
            && self
                .hidden_forall
                .iter()
                .all(|(n, _)| !g.contains(n) && !t.contains(n))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let hidden = |h: &[(String, usize)]| -> Vec<String> {
            h.iter().map(|(n, k)| format!("{n}/{k}")).collect()
        };
        serde_json::json!({
            "gamma": print(&self.gamma),
            "chi": print(&self.chi),
            "hidden_exists": hidden(&self.hidden_exists),
            "hidden_forall": hidden(&self.hidden_forall),
            "target": print(&self.target),
        })
    }
}

impl Serialize for Sandwich {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl fmt::Display for Sandwich {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |h: &[(String, usize)]| {
            h.iter()
                .map(|(n, k)| format!("{n}/{k}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        writeln!(f, "gamma: {}", print(&self.gamma))?;
        writeln!(f, "chi: {}", print(&self.chi))?;
        writeln!(
            f,
            "hidden: exists [{}] forall [{}]",
            list(&self.hidden_exists),
            list(&self.hidden_forall)
        )?;
        write!(f, "target: {}", print(&self.target))
    }
}

/// One step of lifting a relativized formula: `γ = ψ ∧ P(x1)` and
/// `χ = (P′(x1) ∧ ∀x2 (P′(x2) → x2 = x1)) → ψ[P ↦ P′]`, sandwiching `ψ`
/// with `P` read as `{x1}`.
pub fn thm31_step(psi: &Formula, target_pred: &str, primed_pred: &str) -> Result<Sandwich, TransformError> {
    let sig = psi.sig()?;
    match sig.arity(target_pred) {
        None => return Err(TransformError::PredicateAbsent(target_pred.to_owned())),
        Some(1) => {}
        Some(_) => return Err(TransformError::PredicateNotUnary(target_pred.to_owned())),
    }
    if sig.contains(primed_pred) || psi.relation_names().contains(primed_pred) {
        return Err(TransformError::NotFresh(primed_pred.to_owned()));
    }
    let (x, y) = (Var::new(1), Var::new(2));
    let gamma = Formula::and(psi.clone(), Formula::Rel(target_pred.to_owned(), vec![x]));
    let primed = rename_predicates(psi, &PredicateRenaming::new([(target_pred, primed_pred)]))?;
    let singleton = Formula::and(
        Formula::Rel(primed_pred.to_owned(), vec![x]),
        Formula::forall(
            y,
            Formula::implies(Formula::Rel(primed_pred.to_owned(), vec![y]), Formula::eq(y, x)),
        ),
    );
    let chi = Formula::implies(singleton, primed);
    let mut subst = Substitution::new();
    let param = Var::new(psi.max_var_index().max(1) + 1);
    subst.insert(
        target_pred.to_owned(),
        Replacement::new(vec![param], Formula::eq(param, x)),
    );
    let target = substitute_open(psi, &subst);
    Ok(Sandwich {
        gamma,
        chi,
        hidden_exists: vec![(target_pred.to_owned(), 1)],
        hidden_forall: vec![(primed_pred.to_owned(), 1)],
        target,
    })
}

fn check_disjoint(groups: &[&[Var]]) -> Result<(), TransformError> {
    let mut seen = BTreeSet::new();
    for g in groups {
        for v in *g {
            if !seen.insert(*v) {
                return Err(TransformError::Overlap(*v));
            }
        }
    }
    Ok(())
}

fn check_covered(phi: &Formula, allowed: &[&[Var]]) -> Result<(), TransformError> {
    let allowed: BTreeSet<Var> = allowed.iter().flat_map(|g| g.iter().copied()).collect();
    match phi.free_vars().into_iter().find(|v| !allowed.contains(v)) {
        Some(v) => Err(TransformError::Uncovered(v)),
        None => Ok(()),
    }
}

fn unary_atoms(ps: &[String], vs: &[Var]) -> Vec<Formula> {
    ps.iter()
        .zip(vs)
        .map(|(p, v)| Formula::Rel(p.clone(), vec![*v]))
        .collect()
}

fn guarded_implication(antecedent: Vec<Formula>, consequent: Formula) -> Formula {
    if antecedent.is_empty() {
        consequent
    } else {
        Formula::implies(Formula::conj(antecedent), consequent)
    }
}

/// `γ(x̄) = ∃z (G(x̄,z) ∧ BIND_{ȳ↦P̄}(ψ))` and
/// `χ(x̄) = ⋀ Q_i(x_i) → ∃z (z = z ∧ BIND_{x̄ȳ↦Q̄P̄}(ψ))`, both sandwiching
/// `∃z BIND_{ȳ↦P̄}(ψ)`.
pub fn bindexp_sandwich(psi: &Formula, xs: &[Var], ys: &[Var], z: Var) -> Result<Sandwich, TransformError> {
    check_exists_and_clean(psi)?;
    check_disjoint(&[xs, ys, &[z]])?;
    check_covered(psi, &[xs, ys, &[z]])?;
    if psi.bound_vars().contains(&z) {
        return Err(TransformError::BoundVariable(z));
    }
    let mut pool = FreshNamePool::avoiding([psi]);
    let g = pool.fresh("G");
    let ps = pool.fresh_many("P", ys.len());
    let qs = pool.fresh_many("Q", xs.len());
    let bound_y = bind(psi, ys, &ps)?;
    let mut g_args = xs.to_vec();
    g_args.push(z);
    let gamma = Formula::exists(z, Formula::and(Formula::Rel(g.clone(), g_args), bound_y.clone()));
    let xy: Vec<Var> = xs.iter().chain(ys).copied().collect();
    let qp: Vec<String> = qs.iter().chain(&ps).cloned().collect();
    let bound_xy = bind(psi, &xy, &qp)?;
    let chi = guarded_implication(
        unary_atoms(&qs, xs),
        Formula::exists(z, Formula::and(Formula::eq(z, z), bound_xy)),
    );
    Ok(Sandwich {
        gamma,
        chi,
        hidden_exists: vec![(g, xs.len() + 1)],
        hidden_forall: qs.into_iter().map(|q| (q, 1)).collect(),
        target: Formula::exists(z, bound_y),
    })
}

/// `γ(ȳ) = ∃x (G(x,ȳ) ∧ ψ)` and `χ(ȳ) = ⋀ P_i(y_i) → ∃x (x = x ∧
/// BIND_{ȳ↦P̄}(ψ))`, both sandwiching `∃x ψ`.
pub fn cq_sandwich(psi: &Formula, x: Var, ys: &[Var]) -> Result<Sandwich, TransformError> {
    check_exists_and_clean(psi)?;
    check_distinct(ys)?;
    check_disjoint(&[&[x], ys])?;
    check_covered(psi, &[&[x], ys])?;
    if psi.bound_vars().contains(&x) {
        return Err(TransformError::BoundVariable(x));
    }
    let mut pool = FreshNamePool::avoiding([psi]);
    let g = pool.fresh("G");
    let ps = pool.fresh_many("P", ys.len());
    let mut g_args = vec![x];
    g_args.extend_from_slice(ys);
    let gamma = Formula::exists(x, Formula::and(Formula::Rel(g.clone(), g_args), psi.clone()));
    let chi = guarded_implication(
        unary_atoms(&ps, ys),
        Formula::exists(x, Formula::and(Formula::eq(x, x), bind(psi, ys, &ps)?)),
    );
    Ok(Sandwich {
        gamma,
        chi,
        hidden_exists: vec![(g, ys.len() + 1)],
        hidden_forall: ps.into_iter().map(|p| (p, 1)).collect(),
        target: Formula::exists(x, psi.clone()),
    })
}

fn shuffle_parts(phi: &Formula, pi: &VariableRenaming) -> Result<(Vec<Var>, Vec<Var>), TransformError> {
    if !phi.is_first_order() {
        return Err(TransformError::NotFirstOrder);
    }
    let free: Vec<Var> = phi.free_vars().into_iter().collect();
    if let Some(v) = free.iter().find(|v| !pi.domain().any(|d| d == **v)) {
        return Err(TransformError::RenamingNotTotal(*v));
    }
    let images = free.iter().map(|v| pi.apply(*v)).collect();
    Ok((free, images))
}

fn shuffle_build(phi: &Formula, free: &[Var], outside: &[Var], inside: &[Var], target: Formula) -> Sandwich {
    if free.is_empty() {
        return Sandwich {
            gamma: phi.clone(),
            chi: phi.clone(),
            hidden_exists: Vec::new(),
            hidden_forall: Vec::new(),
            target,
        };
    }
    let mut pool = FreshNamePool::avoiding([phi]);
    let gs = pool.fresh_many("G", free.len());
    let ps = pool.fresh_many("P", free.len());
    let gamma = Formula::and(
        Formula::conj(unary_atoms(&gs, outside)),
        Formula::forall_all(
            free.iter().copied(),
            Formula::implies(Formula::conj(unary_atoms(&gs, inside)), phi.clone()),
        ),
    );
    let chi = Formula::implies(
        Formula::conj(unary_atoms(&ps, outside)),
        Formula::exists_all(
            free.iter().copied(),
            Formula::and(phi.clone(), Formula::conj(unary_atoms(&ps, inside))),
        ),
    );
    Sandwich {
        gamma,
        chi,
        hidden_exists: gs.into_iter().map(|g| (g, 1)).collect(),
        hidden_forall: ps.into_iter().map(|p| (p, 1)).collect(),
        target,
    }
}

/// Sandwich for renaming the free variables `x_{i_1} < … < x_{i_k}` of `φ`
/// by an injective `π`: `γ = ⋀ G_m(x_{π(i_m)}) ∧ ∀x̄ (⋀ G_m(x_{i_m}) → φ)`
/// and `χ = ⋀ P_m(x_{π(i_m)}) → ∃x̄ (φ ∧ ⋀ P_m(x_{i_m}))`.
pub fn shuffle_sandwich(phi: &Formula, pi: &VariableRenaming) -> Result<Sandwich, TransformError> {
    let (free, images) = shuffle_parts(phi, pi)?;
    for (a, i) in free.iter().enumerate() {
        for j in &free[a + 1..] {
            if pi.apply(*i) == pi.apply(*j) {
                return Err(TransformError::NonInjectiveRenaming(*i, *j));
            }
        }
    }
    let target = rename_free_vars(phi, pi);
    Ok(shuffle_build(phi, &free, &images, &free, target))
}

/// The same construction with the unary atoms placed the other way round:
/// `γ = ⋀ G_m(x_{i_m}) ∧ ∀x̄ (⋀ G_m(x_{π(i_m)}) → φ)` and
/// `χ = ⋀ P_m(x_{i_m}) → ∃x̄ (φ ∧ ⋀ P_m(x_{π(i_m)}))`. No injectivity
/// check; for non-injective `π` the entailment `γ ⊨ χ` fails.
pub fn shuffle_sandwich_swapped(phi: &Formula, pi: &VariableRenaming) -> Result<Sandwich, TransformError> {
    let (free, images) = shuffle_parts(phi, pi)?;
    let target = rename_free_vars(phi, pi);
    Ok(shuffle_build(phi, &free, &free, &images, target))
}

/// The documented failure of the swapped construction for the
/// non-injective `π = {1↦1, 2↦1}` on `R(x1,x2)`: a two-element structure
/// with `R = ∅`, `G1 = P1 = {0}`, `G2 = P2 = {1}` and `x1 = 0`, `x2 = 1`
/// satisfies `γ` and falsifies `χ`.
pub fn stored_non_injective_witness() -> (Formula, VariableRenaming, Structure, Assignment) {
    let phi = Formula::rel("R", [1, 2]);
    let pi = VariableRenaming::from_pairs([(1, 1), (2, 1)]);
    let m = Structure::new(2)
        .and_then(|m| m.with_relation("R", 2, []))
        .and_then(|m| m.with_relation("G1", 1, [vec![0]]))
        .and_then(|m| m.with_relation("G2", 1, [vec![1]]))
        .and_then(|m| m.with_relation("P1", 1, [vec![0]]))
        .and_then(|m| m.with_relation("P2", 1, [vec![1]]))
        .expect("witness tuples lie in the domain");
    let g = Assignment::new().bind(Var::new(1), 0).bind(Var::new(2), 1);
    (phi, pi, m, g)
}

/// `q[φ₁/R₁, …]` for a UCQ `q` and self-guarded arguments.
pub fn ucq_apply(q: &Formula, args: &Substitution) -> Result<Formula, TransformError> {
    if !is_member(q, FragmentId::Ucq) {
        return Err(TransformError::NotUcq);
    }
    for (name, rep) in args {
        if matches!(rep.body.self_guard(), SelfGuard::NotSelfGuarded) {
            return Err(TransformError::NotSelfGuarded(name.clone()));
        }
    }
    Ok(substitute_atoms(q, args)?)
}

/// `φ ∧ χ₁ ∧ χ₂` where `χ_i` states that `R_i` is transitive.
pub fn transitive_wrap(phi: &Formula, r1: &str, r2: &str) -> Result<Formula, TransformError> {
    if r1 == r2 {
        return Err(TransformError::SameRelation(r1.to_owned(), r2.to_owned()));
    }
    let sig = phi.sig()?;
    for r in [r1, r2] {
        if let Some(k) = sig.arity(r) {
            if k != 2 {
                return Err(FormulaError::ArityMismatch {
                    name: r.to_owned(),
                    expected: 2,
                    found: k,
                }
                .into());
            }
        }
    }
    let trans = transitivity();
    let chi1 = rename_predicates(&trans, &PredicateRenaming::new([("R", r1)]))?;
    let chi2 = rename_predicates(&trans, &PredicateRenaming::new([("R", r2)]))?;
    let mut parts = Vec::new();
    if *phi != Formula::Top {
        parts.push(phi.clone());
    }
    parts.push(chi1);
    parts.push(chi2);
    Ok(Formula::conj(parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::x;
    use crate::syntax::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn bind_examples() {
        assert_eq!(
            bind(&p("R(x1,x2)"), &[x(2)], &names(&["P"])).unwrap(),
            p("E x2. (R(x1,x2) & P(x2))")
        );
        assert_eq!(bind(&p("Q(x1)"), &[x(2)], &names(&["P"])).unwrap(), p("Q(x1)"));
        assert_eq!(
            bind(&p("E x3. (R(x1,x2) & S(x2,x3))"), &[x(1)], &names(&["P"])).unwrap(),
            p("E x3. ((E x1. (R(x1,x2) & P(x1))) & S(x2,x3))")
        );
        let out = bind(&p("R(x1,x2)"), &[x(2)], &names(&["P"])).unwrap();
        assert_eq!(out.free_vars(), [x(1)].into_iter().collect());
    }

    #[test]
    fn bind_preconditions() {
        assert_eq!(
            bind(&p("P(x1) & E x1. Q(x1)"), &[x(1)], &names(&["P1"])),
            Err(TransformError::NotClean)
        );
        assert_eq!(
            bind(&p("!R(x1,x2)"), &[x(1)], &names(&["P"])),
            Err(TransformError::NotExistsAnd)
        );
        assert!(matches!(
            bind(&p("R(x1,x2)"), &[x(1)], &names(&["P", "Q"])),
            Err(TransformError::LengthMismatch { .. })
        ));
        assert_eq!(
            bind(&p("R(x1,x2) & P(x1)"), &[x(1)], &names(&["P"])),
            Err(TransformError::NotFresh("P".into()))
        );
    }

    #[test]
    fn relativize_shape() {
        let expected = Formula::exists_all(
            [x(1), x(2)],
            Formula::conj([
                p("P1(x1)"),
                p("A x3. (P1(x3) -> x3=x1)"),
                p("P2(x2)"),
                p("A x3. (P2(x3) -> x3=x2)"),
                p("R(x1,x2)"),
            ]),
        );
        assert_eq!(relativize(&p("R(x1,x2)")).unwrap(), expected);
        let s = p("E x1. P(x1)");
        assert_eq!(relativize(&s).unwrap(), s);
    }

    #[test]
    fn thm31_hidden_names_are_disjoint() {
        let psi = relativize(&p("R(x1,x2)")).unwrap();
        let s = thm31_step(&psi, "P2", "P3").unwrap();
        assert!(s.is_well_formed());
        assert!(!s.chi.relation_names().contains("P2"));
        assert!(!s.gamma.relation_names().contains("P3"));
        assert_eq!(
            thm31_step(&psi, "R", "P3"),
            Err(TransformError::PredicateNotUnary("R".into()))
        );
        assert_eq!(
            thm31_step(&psi, "P2", "P1"),
            Err(TransformError::NotFresh("P1".into()))
        );
    }

    #[test]
    fn stored_non_injective_witness_refutes_swapped_sandwich() {
        use crate::semantics::eval;
        let (phi, pi, m, g) = stored_non_injective_witness();
        assert!(matches!(
            shuffle_sandwich(&phi, &pi),
            Err(TransformError::NonInjectiveRenaming(..))
        ));
        let s = shuffle_sandwich_swapped(&phi, &pi).unwrap();
        assert!(eval(&m, &g, &s.gamma).unwrap());
        assert!(!eval(&m, &g, &s.chi).unwrap());
        let fixed = shuffle_sandwich(&phi, &VariableRenaming::from_pairs([(1, 1), (2, 2)])).unwrap();
        assert!(!(eval(&m, &g, &fixed.gamma).unwrap() && !eval(&m, &g, &fixed.chi).unwrap()));
    }

    #[test]
    fn shuffle_swap_shape() {
        let pi = VariableRenaming::from_pairs([(1, 2), (2, 1)]);
        let s = shuffle_sandwich(&p("R(x1,x2)"), &pi).unwrap();
        assert_eq!(s.target, p("R(x2,x1)"));
        assert_eq!(
            s.gamma,
            p("(G1(x2) & G2(x1)) & A x1. A x2. ((G1(x1) & G2(x2)) -> R(x1,x2))")
        );
        assert!(s.is_well_formed());
        let bad = VariableRenaming::from_pairs([(1, 1), (2, 1)]);
        assert!(matches!(
            shuffle_sandwich(&p("R(x1,x2)"), &bad),
            Err(TransformError::NonInjectiveRenaming(..))
        ));
    }

    #[test]
    fn identity_shuffle_targets_input() {
        let pi = VariableRenaming::from_pairs([(1, 1), (2, 2)]);
        let s = shuffle_sandwich(&p("R(x1,x2)"), &pi).unwrap();
        assert_eq!(s.target, p("R(x1,x2)"));
    }

    #[test]
    fn ucq_apply_cases() {
        let q = p("E x1. E x2. R(x1,x2)");
        let mut args = Substitution::new();
        args.insert(
            "R".into(),
            Replacement::new(vec![x(1), x(2)], p("S(x1,x2) & !T(x1,x2)")),
        );
        let out = ucq_apply(&q, &args).unwrap();
        assert_eq!(out, p("E x1. E x2. (S(x1,x2) & !T(x1,x2))"));
        assert!(is_member(&out, FragmentId::GnfoPrimitive));

        let mut id = Substitution::new();
        id.insert("R".into(), Replacement::identity("R", 2));
        assert_eq!(ucq_apply(&q, &id).unwrap(), q);

        let mut loose = Substitution::new();
        loose.insert("R".into(), Replacement::new(vec![x(1), x(2)], p("P(x1) & Q(x2)")));
        assert_eq!(
            ucq_apply(&q, &loose),
            Err(TransformError::NotSelfGuarded("R".into()))
        );
        assert_eq!(ucq_apply(&p("!R(x1,x2)"), &id), Err(TransformError::NotUcq));
    }

    #[test]
    fn transitive_wrap_shape() {
        let out = transitive_wrap(&Formula::Top, "R1", "R2").unwrap();
        assert_eq!(
            out,
            p("(A x1. A x2. A x3. ((R1(x1,x2) & R1(x2,x3)) -> R1(x1,x3))) & (A x1. A x2. A x3. ((R2(x1,x2) & R2(x2,x3)) -> R2(x1,x3)))")
        );
        assert!(matches!(
            transitive_wrap(&p("R1(x1)"), "R1", "R2"),
            Err(TransformError::Formula(FormulaError::ArityMismatch { .. }))
        ));
        assert!(transitive_wrap(&Formula::Top, "R1", "R1").is_err());
    }
}
