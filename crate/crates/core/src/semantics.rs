//! Evaluation over finite structures and bounded entailment checking.
//!
//! Formulas are compiled against a fixed relation order; relation extents
//! are bitsets indexed by the base-`n` encoding of a tuple.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::formula::{Formula, FormulaError, Signature, Var};
use crate::rewrite::Substitution;
use crate::structure::{Assignment, Structure, StructureError};
use crate::transform::Sandwich;

/// Largest number of tuples a single relation may have (one `u128` word).
const MAX_RELATION_CELLS: u64 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_domain: u32,
    /// Cap on `n^arity` for every predicate enumerated by a second-order
    /// quantifier.
    pub max_expansion_cells: u64,
    /// Cap on the total number of tuple cells of an enumerated structure.
    pub max_structure_cells: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_domain: 3,
            max_expansion_cells: 16,
            max_structure_cells: 24,
        }
    }
}

impl Budget {
    pub fn with_max_domain(self, max_domain: u32) -> Self {
        Self { max_domain, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("variable {0} is not bound by the assignment")]
    UnboundVariable(Var),
    #[error("relation {0} is not interpreted by the structure")]
    MissingRelation(String),
    #[error("element {element} assigned to {var} lies outside the domain")]
    ElementOutOfRange { var: Var, element: u32 },
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

fn pow(n: u32, k: usize) -> u64 {
    (n as u64).pow(k as u32)
}

#[derive(Clone, Debug)]
enum Node {
    Const(bool),
    Rel { slot: usize, args: Vec<usize> },
    Eq(usize, usize),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Exists(usize, Box<Node>),
    Forall(usize, Box<Node>),
    ExistsSo { slot: usize, arity: usize, body: Box<Node> },
    ForallSo { slot: usize, arity: usize, body: Box<Node> },
}

/// A formula compiled against an ordered signature. Slots `0..sig.len()`
/// hold the free relations; second-order binders get further slots.
#[derive(Clone, Debug)]
struct Compiled {
    root: Node,
    slots: usize,
    vars: usize,
    so_arities: Vec<usize>,
}

struct Compiler<'a> {
    sig: &'a [(String, usize)],
    scope: Vec<(String, usize)>,
    next_slot: usize,
    max_var: usize,
    so_arities: Vec<usize>,
}

impl Compiler<'_> {
    fn go(&mut self, f: &Formula) -> Result<Node, SemanticsError> {
        use Formula::*;
        let mut var = |v: &Var| {
            let i = v.index() as usize;
            self.max_var = self.max_var.max(i);
            i
        };
        Ok(match f {
            Top => Node::Const(true),
            Bottom => Node::Const(false),
            Rel(name, args) => {
                let args: Vec<usize> = args.iter().map(&mut var).collect();
                let slot = match self.scope.iter().rev().find(|(n, _)| n == name) {
                    Some((_, s)) => *s,
                    None => self
                        .sig
                        .iter()
                        .position(|(n, _)| n == name)
                        .ok_or_else(|| SemanticsError::MissingRelation(name.clone()))?,
                };
                Node::Rel { slot, args }
            }
            Eq(a, b) => {
                let a = var(a);
                Node::Eq(a, var(b))
            }
            Not(a) => Node::Not(Box::new(self.go(a)?)),
            And(..) => Node::And(
                f.conjuncts()
                    .into_iter()
                    .map(|c| self.go(c))
                    .collect::<Result<_, _>>()?,
            ),
            Or(..) => Node::Or(
                f.disjuncts()
                    .into_iter()
                    .map(|c| self.go(c))
                    .collect::<Result<_, _>>()?,
            ),
            Implies(a, b) => Node::Implies(Box::new(self.go(a)?), Box::new(self.go(b)?)),
            Iff(a, b) => Node::Iff(Box::new(self.go(a)?), Box::new(self.go(b)?)),
            Exists(v, a) => {
                let i = var(v);
                Node::Exists(i, Box::new(self.go(a)?))
            }
            Forall(v, a) => {
                let i = var(v);
                Node::Forall(i, Box::new(self.go(a)?))
            }
            ExistsSo(name, arity, a) | ForallSo(name, arity, a) => {
                let slot = self.next_slot;
                self.next_slot += 1;
                self.so_arities.push(*arity);
                self.scope.push((name.clone(), slot));
                let body = Box::new(self.go(a)?);
                self.scope.pop();
                let arity = *arity;
                if matches!(f, ExistsSo(..)) {
                    Node::ExistsSo { slot, arity, body }
                } else {
                    Node::ForallSo { slot, arity, body }
                }
            }
        })
    }
}

fn compile(f: &Formula, sig: &[(String, usize)]) -> Result<Compiled, SemanticsError> {
    let own = f.sig()?;
    for (name, arity) in own.iter() {
        match sig.iter().find(|(n, _)| n == name) {
            None => return Err(SemanticsError::MissingRelation(name.to_owned())),
            Some((_, k)) if *k != arity => {
                return Err(FormulaError::ArityMismatch {
                    name: name.to_owned(),
                    expected: *k,
                    found: arity,
                }
                .into())
            }
            _ => {}
        }
    }
    let mut c = Compiler {
        sig,
        scope: Vec::new(),
        next_slot: sig.len(),
        max_var: 0,
        so_arities: Vec::new(),
    };
    let root = c.go(f)?;
    Ok(Compiled {
        root,
        slots: c.next_slot,
        vars: c.max_var + 1,
        so_arities: c.so_arities,
    })
}

impl Compiled {
    fn check_budget(&self, n: u32, budget: &Budget) -> Result<(), SemanticsError> {
        for &k in &self.so_arities {
            let cells = pow(n, k);
            if cells > budget.max_expansion_cells || cells > 63 {
                return Err(SemanticsError::BudgetExceeded(format!(
                    "second-order quantifier of arity {k} needs 2^{cells} expansions at size {n}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Env {
    n: u32,
    rels: Vec<u128>,
    vals: Vec<u32>,
}

impl Env {
    fn new(n: u32, slots: usize, vars: usize) -> Self {
        Self {
            n,
            rels: vec![0; slots],
            vals: vec![0; vars],
        }
    }
}

fn eval_node(node: &Node, env: &mut Env) -> bool {
    match node {
        Node::Const(b) => *b,
        Node::Rel { slot, args } => {
            let mut cell = 0u32;
            for a in args {
                cell = cell * env.n + env.vals[*a];
            }
            (env.rels[*slot] >> cell) & 1 == 1
        }
        Node::Eq(a, b) => env.vals[*a] == env.vals[*b],
        Node::Not(a) => !eval_node(a, env),
        Node::And(cs) => cs.iter().all(|c| eval_node(c, env)),
        Node::Or(cs) => cs.iter().any(|c| eval_node(c, env)),
        Node::Implies(a, b) => !eval_node(a, env) || eval_node(b, env),
        Node::Iff(a, b) => eval_node(a, env) == eval_node(b, env),
        Node::Exists(v, body) => {
            let saved = env.vals[*v];
            let mut found = false;
            for e in 0..env.n {
                env.vals[*v] = e;
                if eval_node(body, env) {
                    found = true;
                    break;
                }
            }
            env.vals[*v] = saved;
            found
        }
        Node::Forall(v, body) => {
            let saved = env.vals[*v];
            let mut all = true;
            for e in 0..env.n {
                env.vals[*v] = e;
                if !eval_node(body, env) {
                    all = false;
                    break;
                }
            }
            env.vals[*v] = saved;
            all
        }
        Node::ExistsSo { slot, arity, body } | Node::ForallSo { slot, arity, body } => {
            let want = matches!(node, Node::ExistsSo { .. });
            let cells = pow(env.n, *arity);
            let saved = env.rels[*slot];
            let mut result = !want;
            for mask in 0..(1u64 << cells) {
                env.rels[*slot] = mask as u128;
                if eval_node(body, env) == want {
                    result = want;
                    break;
                }
            }
            env.rels[*slot] = saved;
            result
        }
    }
}

fn relation_bits(m: &Structure, name: &str, arity: usize) -> Result<u128, SemanticsError> {
    let r = m
        .relation(name)
        .ok_or_else(|| SemanticsError::MissingRelation(name.to_owned()))?;
    if r.arity != arity {
        return Err(FormulaError::ArityMismatch {
            name: name.to_owned(),
            expected: r.arity,
            found: arity,
        }
        .into());
    }
    let n = m.domain_size();
    if pow(n, arity) > MAX_RELATION_CELLS {
        return Err(SemanticsError::BudgetExceeded(format!(
            "relation {name} has more than {MAX_RELATION_CELLS} cells"
        )));
    }
    Ok(r.tuples.iter().fold(0u128, |acc, t| {
        let cell = t.iter().fold(0u32, |c, e| c * n + e);
        acc | (1u128 << cell)
    }))
}

fn bits_to_tuples(bits: u128, n: u32, arity: usize) -> Vec<Vec<u32>> {
    (0..pow(n, arity) as u32)
        .filter(|c| (bits >> c) & 1 == 1)
        .map(|c| {
            let mut t = vec![0; arity];
            let mut rest = c;
            for slot in t.iter_mut().rev() {
                *slot = rest % n;
                rest /= n;
            }
            t
        })
        .collect()
}

fn sig_order(sig: &Signature) -> Vec<(String, usize)> {
    sig.iter().map(|(n, k)| (n.to_owned(), k)).collect()
}

/// `M, g ⊨ φ` under the default expansion budget.
pub fn eval(m: &Structure, g: &Assignment, f: &Formula) -> Result<bool, SemanticsError> {
    eval_with(m, g, f, &Budget::default())
}

pub fn eval_with(
    m: &Structure,
    g: &Assignment,
    f: &Formula,
    budget: &Budget,
) -> Result<bool, SemanticsError> {
    let order = sig_order(&f.sig()?);
    let compiled = compile(f, &order)?;
    let n = m.domain_size();
    compiled.check_budget(n, budget)?;
    let mut env = Env::new(n, compiled.slots, compiled.vars);
    for (i, (name, arity)) in order.iter().enumerate() {
        env.rels[i] = relation_bits(m, name, *arity)?;
    }
    for v in f.free_vars() {
        let e = g.get(v).ok_or(SemanticsError::UnboundVariable(v))?;
        if e >= n {
            return Err(SemanticsError::ElementOutOfRange { var: v, element: e });
        }
        env.vals[v.index() as usize] = e;
    }
    Ok(eval_node(&compiled.root, &mut env))
}

/// `⟦ψ⟧^M`: the tuples over `params` satisfying `ψ`.
pub fn interpret(
    m: &Structure,
    f: &Formula,
    params: &[Var],
) -> Result<BTreeSet<Vec<u32>>, SemanticsError> {
    let n = m.domain_size();
    let k = params.len();
    if pow(n, k) > MAX_RELATION_CELLS {
        return Err(SemanticsError::BudgetExceeded(format!(
            "{k}-ary interpretation over a domain of size {n}"
        )));
    }
    let mut out = BTreeSet::new();
    for t in bits_to_tuples(u128::MAX, n, k) {
        let g: Assignment = params.iter().copied().zip(t.iter().copied()).collect();
        if eval(m, &g, f)? {
            out.insert(t);
        }
    }
    Ok(out)
}

/// `M[R₁/ψ₁, …]`: each substituted relation reinterpreted, simultaneously,
/// as the extent of its replacement in the original structure.
pub fn apply_substitution_structure(
    m: &Structure,
    subst: &Substitution,
) -> Result<Structure, SemanticsError> {
    let mut out = m.clone();
    for (name, rep) in subst {
        if let Some(r) = m.relation(name) {
            if r.arity != rep.params.len() {
                return Err(FormulaError::ArityMismatch {
                    name: name.clone(),
                    expected: r.arity,
                    found: rep.params.len(),
                }
                .into());
            }
        }
        let tuples = interpret(m, &rep.body, &rep.params)?;
        out.set_relation(name, rep.params.len(), tuples)?;
    }
    Ok(out)
}

fn layout(order: &[(String, usize)], n: u32) -> Vec<u64> {
    order.iter().map(|(_, k)| pow(n, *k)).collect()
}

fn decode_into(index: u64, cells: &[u64], slots: &[usize], rels: &mut [u128]) {
    let mut rest = index;
    for (c, s) in cells.iter().zip(slots) {
        let mask = if *c >= 64 { u64::MAX } else { (1u64 << c) - 1 };
        rels[*s] = (rest & mask) as u128;
        rest = if *c >= 64 { 0 } else { rest >> c };
    }
}

fn build_structure(order: &[(String, usize)], n: u32, rels: &[u128]) -> Structure {
    let mut m = Structure::new(n).expect("positive domain");
    for (i, (name, k)) in order.iter().enumerate() {
        m.set_relation(name, *k, bits_to_tuples(rels[i], n, *k))
            .expect("decoded tuples fit the domain");
    }
    m
}

fn check_cells(total: u64, n: u32, budget: &Budget) -> Result<(), SemanticsError> {
    if total > budget.max_structure_cells || total > 63 {
        return Err(SemanticsError::BudgetExceeded(format!(
            "{total} relation cells at size {n} (cap {})",
            budget.max_structure_cells
        )));
    }
    Ok(())
}

/// Every `sig`-structure with domain `{0,…,n-1}`, in order of the
/// concatenated relation bitmasks (first relation lowest).
pub fn enumerate_structures(
    sig: &Signature,
    n: u32,
    budget: &Budget,
) -> Result<impl Iterator<Item = Structure>, SemanticsError> {
    if n == 0 {
        return Err(StructureError::EmptyDomain.into());
    }
    let order = sig_order(sig);
    let cells = layout(&order, n);
    let total: u64 = cells.iter().sum();
    check_cells(total, n, budget)?;
    let slots: Vec<usize> = (0..order.len()).collect();
    Ok((0..1u64 << total).map(move |i| {
        let mut rels = vec![0u128; order.len()];
        decode_into(i, &cells, &slots, &mut rels);
        build_structure(&order, n, &rels)
    }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    /// No countermodel among structures of size `1..=k`. Evidence, not proof.
    Verified { up_to: u32 },
    Countermodel {
        structure: Structure,
        assignment: Assignment,
        note: String,
    },
}

impl CheckOutcome {
    pub fn is_verified(&self) -> bool {
        matches!(self, CheckOutcome::Verified { .. })
    }

    pub fn to_json(&self) -> Value {
        match self {
            CheckOutcome::Verified { up_to } => json!({
                "status": "verified-up-to",
                "k": up_to,
            }),
            CheckOutcome::Countermodel {
                structure,
                assignment,
                note,
            } => json!({
                "status": "countermodel",
                "structure": structure.to_json(),
                "assignment": assignment.to_json(),
                "note": note,
            }),
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckOutcome::Verified { up_to } => {
                write!(f, "verified-up-to({up_to}) [bounded evidence, not a proof]")
            }
            CheckOutcome::Countermodel {
                structure,
                assignment,
                note,
            } => write!(
                f,
                "countermodel ({note}): structure {structure} assignment {assignment}"
            ),
        }
    }
}

impl Serialize for CheckOutcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Two formulas compiled over a shared relation order.
struct Pair {
    order: Vec<(String, usize)>,
    lhs: Compiled,
    rhs: Compiled,
    vars: Vec<Var>,
    /// Relation slots occurring in the left formula.
    outer: Vec<usize>,
    inner: Vec<usize>,
}

impl Pair {
    fn new(lhs: &Formula, rhs: &Formula) -> Result<Self, SemanticsError> {
        let sl = lhs.sig()?;
        let sig = sl.union(&rhs.sig()?)?;
        let order = sig_order(&sig);
        let (outer, inner): (Vec<usize>, Vec<usize>) =
            (0..order.len()).partition(|i| sl.contains(&order[*i].0));
        let vars: Vec<Var> = lhs
            .free_vars()
            .union(&rhs.free_vars())
            .copied()
            .collect();
        Ok(Self {
            lhs: compile(lhs, &order)?,
            rhs: compile(rhs, &order)?,
            order,
            vars,
            outer,
            inner,
        })
    }

    fn env(&self, n: u32) -> Env {
        let slots = self.lhs.slots.max(self.rhs.slots);
        let vars = self
            .lhs
            .vars
            .max(self.rhs.vars)
            .max(self.vars.iter().map(|v| v.index() as usize + 1).max().unwrap_or(0));
        Env::new(n, slots, vars)
    }

    fn set_assignment(&self, env: &mut Env, mut index: u64) {
        let n = env.n as u64;
        for v in &self.vars {
            env.vals[v.index() as usize] = (index % n) as u32;
            index /= n;
        }
    }

    fn assignment(&self, env: &Env) -> Assignment {
        self.vars
            .iter()
            .map(|v| (*v, env.vals[v.index() as usize]))
            .collect()
    }

    fn witness(&self, env: &Env, note: &str) -> CheckOutcome {
        CheckOutcome::Countermodel {
            structure: build_structure(&self.order, env.n, &env.rels),
            assignment: self.assignment(env),
            note: note.to_owned(),
        }
    }

    /// Smallest (structure, assignment) at size `n` with lhs true and rhs
    /// false, in enumeration order.
    fn search(&self, n: u32, budget: &Budget, note: &str) -> Result<Option<CheckOutcome>, SemanticsError> {
        self.lhs.check_budget(n, budget)?;
        self.rhs.check_budget(n, budget)?;
        let cells = layout(&self.order, n);
        let outer_cells: Vec<u64> = self.outer.iter().map(|i| cells[*i]).collect();
        let inner_cells: Vec<u64> = self.inner.iter().map(|i| cells[*i]).collect();
        let outer_total: u64 = outer_cells.iter().sum();
        let inner_total: u64 = inner_cells.iter().sum();
        check_cells(outer_total + inner_total, n, budget)?;
        let assignments = (n as u64).pow(self.vars.len() as u32);
        let found = (0..1u64 << outer_total)
            .into_par_iter()
            .map_init(
                || self.env(n),
                |env, io| {
                    decode_into(io, &outer_cells, &self.outer, &mut env.rels);
                    for ig in 0..assignments {
                        self.set_assignment(env, ig);
                        if !eval_node(&self.lhs.root, env) {
                            continue;
                        }
                        for ii in 0..1u64 << inner_total {
                            decode_into(ii, &inner_cells, &self.inner, &mut env.rels);
                            if !eval_node(&self.rhs.root, env) {
                                return Some(self.witness(env, note));
                            }
                        }
                    }
                    None
                },
            )
            .find_map_first(|o| o);
        Ok(found)
    }

    /// Like [`Pair::search`] but over the given full-signature structures.
    fn search_in(&self, n: u32, indices: &[u64], budget: &Budget, note: &str) -> Result<Option<CheckOutcome>, SemanticsError> {
        self.lhs.check_budget(n, budget)?;
        self.rhs.check_budget(n, budget)?;
        let cells = layout(&self.order, n);
        let all: Vec<usize> = (0..self.order.len()).collect();
        let assignments = (n as u64).pow(self.vars.len() as u32);
        Ok(indices
            .par_iter()
            .map_init(
                || self.env(n),
                |env, idx| {
                    decode_into(*idx, &cells, &all, &mut env.rels);
                    for ig in 0..assignments {
                        self.set_assignment(env, ig);
                        if eval_node(&self.lhs.root, env) && !eval_node(&self.rhs.root, env) {
                            return Some(self.witness(env, note));
                        }
                    }
                    None
                },
            )
            .find_map_first(|o| o))
    }

    fn total_cells(&self, n: u32) -> u64 {
        layout(&self.order, n).iter().sum()
    }
}

/// Searches structures of sizes `1..=max_domain` and all assignments for
/// one satisfying `φ` and falsifying `ψ`.
pub fn entails_upto(phi: &Formula, psi: &Formula, budget: &Budget) -> Result<CheckOutcome, SemanticsError> {
    let pair = Pair::new(phi, psi)?;
    for n in 1..=budget.max_domain {
        if let Some(w) = pair.search(n, budget, "left holds, right fails")? {
            return Ok(w);
        }
    }
    Ok(CheckOutcome::Verified {
        up_to: budget.max_domain,
    })
}

/// Both entailments, interleaved by size so the smallest witness wins.
pub fn equiv_upto(phi: &Formula, psi: &Formula, budget: &Budget) -> Result<CheckOutcome, SemanticsError> {
    let forward = Pair::new(phi, psi)?;
    let backward = Pair::new(psi, phi)?;
    for n in 1..=budget.max_domain {
        if let Some(w) = forward.search(n, budget, "left holds, right fails")? {
            return Ok(w);
        }
        if let Some(w) = backward.search(n, budget, "right holds, left fails")? {
            return Ok(w);
        }
    }
    Ok(CheckOutcome::Verified {
        up_to: budget.max_domain,
    })
}

/// Entailment over `samples` random structures of size `n`; every
/// assignment is tried on each.
pub fn entails_sampled<R: Rng>(
    phi: &Formula,
    psi: &Formula,
    n: u32,
    samples: usize,
    rng: &mut R,
    budget: &Budget,
) -> Result<CheckOutcome, SemanticsError> {
    let pair = Pair::new(phi, psi)?;
    let total = pair.total_cells(n);
    check_cells(total, n, &Budget { max_structure_cells: 63, ..*budget })?;
    let indices: Vec<u64> = (0..samples)
        .map(|_| if total == 0 { 0 } else { rng.gen::<u64>() >> (64 - total) })
        .collect();
    Ok(pair
        .search_in(n, &indices, budget, "left holds, right fails")?
        .unwrap_or(CheckOutcome::Verified { up_to: n }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubCheck {
    pub name: String,
    pub max_size: u32,
    pub outcome: CheckOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SandwichReport {
    pub checks: Vec<SubCheck>,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome.is_verified())
    }
}

impl fmt::Display for SandwichReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.checks.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{} (size <= {}): {}", c.name, c.max_size, c.outcome)?;
        }
        Ok(())
    }
}

fn size_for(hidden: &[(String, usize)], budget: &Budget) -> u32 {
    if hidden.iter().any(|(_, k)| *k >= 2) {
        budget.max_domain.min(2)
    } else {
        budget.max_domain
    }
}

/// The three checks of an interpolation sandwich: `γ ⊨ χ`,
/// `∃(hidden_exists) γ ≡ target` and `∀(hidden_forall) χ ≡ target`.
/// A sub-check enumerating a hidden predicate of arity ≥ 2 runs at size at
/// most 2.
pub fn sandwich_check(s: &Sandwich, budget: &Budget) -> Result<SandwichReport, SemanticsError> {
    let all_hidden: Vec<(String, usize)> = s
        .hidden_exists
        .iter()
        .chain(&s.hidden_forall)
        .cloned()
        .collect();
    let mut checks = Vec::new();
    let k1 = size_for(&all_hidden, budget);
    checks.push(SubCheck {
        name: "gamma entails chi".into(),
        max_size: k1,
        outcome: entails_upto(&s.gamma, &s.chi, &budget.with_max_domain(k1))?,
    });
    let k2 = size_for(&s.hidden_exists, budget);
    checks.push(SubCheck {
        name: "exists-closure of gamma equivalent to target".into(),
        max_size: k2,
        outcome: equiv_upto(&s.exists_closure(), &s.target, &budget.with_max_domain(k2))?,
    });
    let k3 = size_for(&s.hidden_forall, budget);
    checks.push(SubCheck {
        name: "forall-closure of chi equivalent to target".into(),
        max_size: k3,
        outcome: equiv_upto(&s.forall_closure(), &s.target, &budget.with_max_domain(k3))?,
    });
    Ok(SandwichReport { checks })
}

/// Re-evaluates a countermodel of `φ ⊨ ψ`: true iff `φ` holds and `ψ`
/// fails on the witness.
pub fn reverify_entailment_witness(
    phi: &Formula,
    psi: &Formula,
    outcome: &CheckOutcome,
) -> Result<bool, SemanticsError> {
    match outcome {
        CheckOutcome::Verified { .. } => Ok(false),
        CheckOutcome::Countermodel {
            structure,
            assignment,
            ..
        } => Ok(eval(structure, assignment, phi)? && !eval(structure, assignment, psi)?),
    }
}

/// Re-evaluates a countermodel of `φ ≡ ψ`: true iff the two sides differ.
pub fn reverify_equivalence_witness(
    phi: &Formula,
    psi: &Formula,
    outcome: &CheckOutcome,
) -> Result<bool, SemanticsError> {
    match outcome {
        CheckOutcome::Verified { .. } => Ok(false),
        CheckOutcome::Countermodel {
            structure,
            assignment,
            ..
        } => Ok(eval(structure, assignment, phi)? != eval(structure, assignment, psi)?),
    }
}

/// All assignments of `vars` over a domain of size `n`.
pub fn assignments(vars: &[Var], n: u32) -> impl Iterator<Item = Assignment> + '_ {
    let count = (n as u64).pow(vars.len() as u32);
    (0..count).map(move |mut i| {
        let mut g = BTreeMap::new();
        for v in vars {
            g.insert(*v, (i % n as u64) as u32);
            i /= n as u64;
        }
        g.into_iter().collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::x;
    use crate::syntax::parse;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn two() -> Structure {
        Structure::new(2)
            .unwrap()
            .with_relation("R", 2, [vec![0, 1]])
            .unwrap()
    }

    #[test]
    fn eval_basics() {
        let g = Assignment::new().bind(x(1), 0).bind(x(2), 1);
        assert!(eval(&two(), &g, &p("R(x1,x2)")).unwrap());
        assert!(!eval(&two(), &g, &p("R(x2,x1)")).unwrap());
        assert!(eval(&two(), &g, &p("E2 P/1. P(x1)")).unwrap());
        assert!(eval(&two(), &g, &p("A2 P/1. (P(x1) | !P(x1))")).unwrap());
        assert_eq!(
            eval(&two(), &Assignment::new(), &p("R(x1,x2)")),
            Err(SemanticsError::UnboundVariable(x(1)))
        );
        assert_eq!(
            eval(&two(), &g, &p("S(x1)")),
            Err(SemanticsError::MissingRelation("S".into()))
        );
    }

    #[test]
    fn expansion_budget_is_enforced() {
        let m = Structure::new(3).unwrap();
        let f = p("E2 Q/3. Q(x1,x1,x1)");
        let g = Assignment::new().bind(x(1), 0);
        assert!(matches!(eval(&m, &g, &f), Err(SemanticsError::BudgetExceeded(_))));
    }

    #[test]
    fn interpret_examples() {
        let ext = interpret(&two(), &p("E x2. R(x1,x2)"), &[x(1)]).unwrap();
        assert_eq!(ext, [vec![0]].into_iter().collect());
        let diag = interpret(&two(), &p("x1=x1"), &[x(1)]).unwrap();
        assert_eq!(diag.len(), 2);
        assert!(interpret(&two(), &p("false"), &[x(1)]).unwrap().is_empty());
    }

    #[test]
    fn structure_counts() {
        let b = Budget::default();
        let p1: Signature = [("P", 1)].into_iter().collect();
        let r2: Signature = [("R", 2)].into_iter().collect();
        assert_eq!(enumerate_structures(&p1, 2, &b).unwrap().count(), 4);
        assert_eq!(enumerate_structures(&r2, 2, &b).unwrap().count(), 16);
        assert_eq!(enumerate_structures(&Signature::new(), 3, &b).unwrap().count(), 1);
        let all: BTreeSet<String> = enumerate_structures(&r2, 2, &b)
            .unwrap()
            .map(|m| m.to_string())
            .collect();
        assert_eq!(all.len(), 16);
    }

    #[test]
    fn entailment_countermodel() {
        let b = Budget::default().with_max_domain(1);
        let out = entails_upto(&p("P(x1)"), &p("Q(x1)"), &b).unwrap();
        let expected = Structure::new(1)
            .unwrap()
            .with_relation("P", 1, [vec![0]])
            .unwrap()
            .with_relation("Q", 1, [])
            .unwrap();
        match &out {
            CheckOutcome::Countermodel { structure, .. } => assert_eq!(structure, &expected),
            other => panic!("expected countermodel, got {other}"),
        }
        assert!(reverify_entailment_witness(&p("P(x1)"), &p("Q(x1)"), &out).unwrap());
    }

    #[test]
    fn double_negation_equivalence() {
        let b = Budget::default().with_max_domain(2);
        assert_eq!(
            equiv_upto(&p("P(x1)"), &p("!!P(x1)"), &b).unwrap(),
            CheckOutcome::Verified { up_to: 2 }
        );
    }

    #[test]
    fn substitution_structure() {
        let mut s = Substitution::new();
        s.insert(
            "R".into(),
            crate::rewrite::Replacement::new(vec![x(1), x(2)], p("x1=x2")),
        );
        let out = apply_substitution_structure(&two(), &s).unwrap();
        assert_eq!(
            out.relation("R").unwrap().tuples,
            [vec![0, 0], vec![1, 1]].into_iter().collect()
        );
    }
}
