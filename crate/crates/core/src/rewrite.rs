//! Renamings and substitutions: α-renaming, free-variable renaming,
//! predicate renaming, and uniform substitution of formulas for atoms.

use std::collections::{BTreeMap, BTreeSet};

use crate::formula::{Formula, FormulaError, Signature, Var};

/// A map on variable indices. Variables outside its domain are left alone.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VariableRenaming {
    map: BTreeMap<Var, Var>,
}

impl VariableRenaming {
    pub fn new(map: BTreeMap<Var, Var>) -> Self {
        Self { map }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        Self {
            map: pairs
                .into_iter()
                .map(|(a, b)| (Var::new(a), Var::new(b)))
                .collect(),
        }
    }

    pub fn apply(&self, v: Var) -> Var {
        self.map.get(&v).copied().unwrap_or(v)
    }

    pub fn domain(&self) -> impl Iterator<Item = Var> + '_ {
        self.map.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Var)> + '_ {
        self.map.iter().map(|(a, b)| (*a, *b))
    }

    pub fn is_total_on(&self, vars: &BTreeSet<Var>) -> bool {
        vars.iter().all(|v| self.map.contains_key(v))
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }

    /// Injectivity over the stated domain.
    pub fn is_injective(&self) -> bool {
        let image: BTreeSet<Var> = self.map.values().copied().collect();
        image.len() == self.map.len()
    }

    /// Restriction to `vars`.
    pub fn restrict(&self, vars: &BTreeSet<Var>) -> VariableRenaming {
        VariableRenaming {
            map: self
                .map
                .iter()
                .filter(|(k, _)| vars.contains(k))
                .map(|(a, b)| (*a, *b))
                .collect(),
        }
    }
}

/// A map on relation names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PredicateRenaming {
    map: BTreeMap<String, String>,
}

impl PredicateRenaming {
    pub fn new<S: Into<String>, T: Into<String>>(pairs: impl IntoIterator<Item = (S, T)>) -> Self {
        Self {
            map: pairs
                .into_iter()
                .map(|(a, b)| (a.into(), b.into()))
                .collect(),
        }
    }

    pub fn apply<'a>(&'a self, name: &'a str) -> &'a str {
        self.map.get(name).map(String::as_str).unwrap_or(name)
    }

    /// Checks that the renaming is injective on `source` (names outside the
    /// domain map to themselves) and, when `target` is given, that every
    /// image keeps its arity there.
    pub fn check(&self, source: &Signature, target: Option<&Signature>) -> Result<(), FormulaError> {
        let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
        for (name, arity) in source.iter() {
            let image = self.apply(name);
            if let Some(prev) = seen.insert(image, name) {
                return Err(FormulaError::NonInjective(prev.to_owned(), name.to_owned()));
            }
            if let Some(k) = target.and_then(|t| t.arity(image)) {
                if k != arity {
                    return Err(FormulaError::ArityMismatch {
                        name: image.to_owned(),
                        expected: k,
                        found: arity,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Deterministic source of relation names absent from a growing used-set.
#[derive(Clone, Debug, Default)]
pub struct FreshNamePool {
    used: BTreeSet<String>,
}

impl FreshNamePool {
    pub fn new<S: Into<String>>(used: impl IntoIterator<Item = S>) -> Self {
        Self {
            used: used.into_iter().map(Into::into).collect(),
        }
    }

    /// Pool avoiding every relation name of the given formulas.
    pub fn avoiding<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Self {
        let mut pool = Self::default();
        for f in formulas {
            pool.used.extend(f.relation_names());
        }
        pool
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_owned());
    }

    pub fn is_used(&self, name: &str) -> bool {
        self.used.contains(name)
    }

    /// `base` followed by the smallest positive suffix not yet used.
    pub fn fresh(&mut self, base: &str) -> String {
        let name = (1..)
            .map(|i| format!("{base}{i}"))
            .find(|n| !self.used.contains(n))
            .expect("unbounded suffixes");
        self.used.insert(name.clone());
        name
    }

    pub fn fresh_many(&mut self, base: &str, n: usize) -> Vec<String> {
        (0..n).map(|_| self.fresh(base)).collect()
    }
}

/// Renames every first-order binder, in pre-order, to `next`, `next+1`, ...
/// and returns the rewritten formula with the next unused index.
pub fn alpha_rename_all(f: &Formula, next: u32) -> (Formula, u32) {
    let mut counter = next;
    let mut scope = Vec::new();
    let out = alpha_go(f, &mut scope, &mut counter);
    (out, counter)
}

fn alpha_go(f: &Formula, scope: &mut Vec<(Var, Var)>, counter: &mut u32) -> Formula {
    use Formula::*;
    let look = |scope: &Vec<(Var, Var)>, v: Var| {
        scope
            .iter()
            .rev()
            .find(|(old, _)| *old == v)
            .map(|(_, new)| *new)
            .unwrap_or(v)
    };
    match f {
        Top | Bottom => f.clone(),
        Rel(n, args) => Rel(n.clone(), args.iter().map(|v| look(scope, *v)).collect()),
        Eq(a, b) => Eq(look(scope, *a), look(scope, *b)),
        Exists(v, body) | Forall(v, body) => {
            let fresh = Var::new(*counter);
            *counter += 1;
            scope.push((*v, fresh));
            let body = alpha_go(body, scope, counter);
            scope.pop();
            if matches!(f, Exists(..)) {
                Formula::exists(fresh, body)
            } else {
                Formula::forall(fresh, body)
            }
        }
        _ => map_children(f, |c| alpha_go(c, scope, counter)),
    }
}

/// Rebuilds `f` with each direct child transformed by `g`.
pub(crate) fn map_children(f: &Formula, mut g: impl FnMut(&Formula) -> Formula) -> Formula {
    use Formula::*;
    match f {
        Top | Bottom | Rel(..) | Eq(..) => f.clone(),
        Not(a) => Formula::not(g(a)),
        And(a, b) => {
            let a = g(a);
            Formula::and(a, g(b))
        }
        Or(a, b) => {
            let a = g(a);
            Formula::or(a, g(b))
        }
        Implies(a, b) => {
            let a = g(a);
            Formula::implies(a, g(b))
        }
        Iff(a, b) => {
            let a = g(a);
            Formula::iff(a, g(b))
        }
        Exists(v, a) => Formula::exists(*v, g(a)),
        Forall(v, a) => Formula::forall(*v, g(a)),
        ExistsSo(n, k, a) => Formula::exists_so(n.clone(), *k, g(a)),
        ForallSo(n, k, a) => Formula::forall_so(n.clone(), *k, g(a)),
    }
}

/// Equivalent clean formula. Clean input is returned unchanged; otherwise
/// every binder is renamed, in pre-order, to indices above the largest
/// variable index occurring in `f`.
pub fn cleanify(f: &Formula) -> Formula {
    if f.is_clean() {
        return f.clone();
    }
    alpha_rename_all(f, f.max_var_index() + 1).0
}

/// Replaces free occurrences only; no capture check.
fn rename_free_raw(f: &Formula, map: &BTreeMap<Var, Var>) -> Formula {
    use Formula::*;
    if map.is_empty() {
        return f.clone();
    }
    let get = |v: &Var| map.get(v).copied().unwrap_or(*v);
    match f {
        Rel(n, args) => Rel(n.clone(), args.iter().map(get).collect()),
        Eq(a, b) => Eq(get(a), get(b)),
        Exists(v, body) | Forall(v, body) => {
            let body = if map.contains_key(v) {
                let mut inner = map.clone();
                inner.remove(v);
                rename_free_raw(body, &inner)
            } else {
                rename_free_raw(body, map)
            };
            if matches!(f, Exists(..)) {
                Formula::exists(*v, body)
            } else {
                Formula::forall(*v, body)
            }
        }
        _ => map_children(f, |c| rename_free_raw(c, map)),
    }
}

/// Would renaming the free occurrences of `f` through `map` move one of them
/// under a binder for its new name?
fn would_capture(f: &Formula, map: &BTreeMap<Var, Var>, bound: &mut Vec<Var>) -> bool {
    use Formula::*;
    let hit = |v: &Var, bound: &Vec<Var>| {
        !bound.contains(v) && map.get(v).is_some_and(|t| t != v && bound.contains(t))
    };
    match f {
        Rel(_, args) => args.iter().any(|v| hit(v, bound)),
        Eq(a, b) => hit(a, bound) || hit(b, bound),
        Exists(v, body) | Forall(v, body) => {
            bound.push(*v);
            let r = would_capture(body, map, bound);
            bound.pop();
            r
        }
        _ => f.children().into_iter().any(|c| would_capture(c, map, bound)),
    }
}

/// Capture-avoiding renaming of free variables. When a renamed occurrence
/// would be captured, all binders are first α-renamed to indices above both
/// the formula's variables and the targets.
pub fn rename_free_vars(f: &Formula, pi: &VariableRenaming) -> Formula {
    let free = f.free_vars();
    let map: BTreeMap<Var, Var> = pi.restrict(&free).iter().filter(|(a, b)| a != b).collect();
    if map.is_empty() {
        return f.clone();
    }
    if would_capture(f, &map, &mut Vec::new()) {
        let top = map
            .values()
            .map(|v| v.index())
            .max()
            .unwrap_or(0)
            .max(f.max_var_index());
        let (renamed, _) = alpha_rename_all(f, top + 1);
        return rename_free_raw(&renamed, &map);
    }
    rename_free_raw(f, &map)
}

/// Renames free relation symbols through `rho`, after checking injectivity
/// on `sig(f)`. Second-order binders whose name collides with an image are
/// renamed out of the way first.
pub fn rename_predicates(f: &Formula, rho: &PredicateRenaming) -> Result<Formula, FormulaError> {
    let sig = f.sig()?;
    rho.check(&sig, None)?;
    let images: BTreeSet<String> = sig.names().map(|n| rho.apply(n).to_owned()).collect();
    let mut pool = FreshNamePool::avoiding([f]);
    for n in &images {
        pool.reserve(n);
    }
    Ok(rename_preds_go(f, rho, &images, &mut pool, &mut Vec::new()))
}

fn rename_preds_go(
    f: &Formula,
    rho: &PredicateRenaming,
    images: &BTreeSet<String>,
    pool: &mut FreshNamePool,
    so_scope: &mut Vec<(String, String)>,
) -> Formula {
    use Formula::*;
    match f {
        Rel(n, args) => {
            let name = match so_scope.iter().rev().find(|(old, _)| old == n) {
                Some((_, new)) => new.clone(),
                None => rho.apply(n).to_owned(),
            };
            Rel(name, args.clone())
        }
        ExistsSo(n, k, body) | ForallSo(n, k, body) => {
            let new = if images.contains(n) {
                pool.fresh(n)
            } else {
                n.clone()
            };
            so_scope.push((n.clone(), new.clone()));
            let body = rename_preds_go(body, rho, images, pool, so_scope);
            so_scope.pop();
            if matches!(f, ExistsSo(..)) {
                Formula::exists_so(new, *k, body)
            } else {
                Formula::forall_so(new, *k, body)
            }
        }
        _ => map_children(f, |c| rename_preds_go(c, rho, images, pool, so_scope)),
    }
}

/// A formula with an ordered parameter list, standing in for an atom
/// `R(z1..zk)` by instantiating parameter `i` to `zi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replacement {
    pub params: Vec<Var>,
    pub body: Formula,
}

impl Replacement {
    pub fn new(params: Vec<Var>, body: Formula) -> Self {
        Self { params, body }
    }

    /// `R(x1..xk)` for itself.
    pub fn identity(name: &str, arity: usize) -> Self {
        let params: Vec<Var> = (1..=arity as u32).map(Var::new).collect();
        Self {
            body: Formula::Rel(name.to_owned(), params.clone()),
            params,
        }
    }

    fn instantiate(&self, args: &[Var]) -> Formula {
        let pi = VariableRenaming::new(self.params.iter().copied().zip(args.iter().copied()).collect());
        rename_free_vars(&self.body, &pi)
    }
}

pub type Substitution = BTreeMap<String, Replacement>;

/// Uniform substitution of each `subst[R]` for the atoms of `R` in `f`.
///
/// Every parameter list must match the arity of its relation in `f`, repeat
/// no variable, and cover the free variables of its body.
pub fn substitute_atoms(f: &Formula, subst: &Substitution) -> Result<Formula, FormulaError> {
    let sig = f.sig()?;
    for (name, rep) in subst {
        let distinct: BTreeSet<Var> = rep.params.iter().copied().collect();
        if distinct.len() != rep.params.len() {
            return Err(FormulaError::RepeatedParameter(name.clone()));
        }
        if let Some(arity) = sig.arity(name) {
            if arity != rep.params.len() {
                return Err(FormulaError::ArityMismatch {
                    name: name.clone(),
                    expected: arity,
                    found: rep.params.len(),
                });
            }
        }
        if let Some(v) = rep.body.free_vars().difference(&distinct).next() {
            return Err(FormulaError::ParameterMismatch {
                name: name.clone(),
                var: *v,
            });
        }
    }
    Ok(substitute_open(f, subst))
}

/// Substitution where bodies may also mention free variables outside their
/// parameters; those refer to the surrounding context and are protected
/// from capture by α-renaming `f`'s binders.
pub fn substitute_open(f: &Formula, subst: &Substitution) -> Formula {
    let extra: BTreeSet<Var> = subst
        .values()
        .flat_map(|r| {
            let params: BTreeSet<Var> = r.params.iter().copied().collect();
            r.body
                .free_vars()
                .into_iter()
                .filter(move |v| !params.contains(v))
        })
        .collect();
    let target = if f.binders().iter().any(|v| extra.contains(v)) {
        let top = subst
            .values()
            .map(|r| r.body.max_var_index())
            .chain(extra.iter().map(|v| v.index()))
            .max()
            .unwrap_or(0)
            .max(f.max_var_index());
        alpha_rename_all(f, top + 1).0
    } else {
        f.clone()
    };
    subst_go(&target, subst, &mut Vec::new())
}

fn subst_go(f: &Formula, subst: &Substitution, so_bound: &mut Vec<String>) -> Formula {
    use Formula::*;
    match f {
        Rel(n, args) if !so_bound.contains(n) => match subst.get(n) {
            Some(rep) => rep.instantiate(args),
            None => f.clone(),
        },
        ExistsSo(n, _, _) | ForallSo(n, _, _) => {
            so_bound.push(n.clone());
            let out = map_children(f, |c| subst_go(c, subst, so_bound));
            so_bound.pop();
            out
        }
        _ => map_children(f, |c| subst_go(c, subst, so_bound)),
    }
}
