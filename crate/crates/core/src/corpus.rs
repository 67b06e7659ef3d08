//! Seeded random formula generators.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{Formula, Var};
use crate::rewrite::VariableRenaming;

#[derive(Clone, Debug)]
pub struct ExistsAndConfig {
    pub max_atoms: usize,
    pub max_vars: u32,
    pub signature: Vec<(String, usize)>,
    /// Probability that an atom is an equality.
    pub eq_prob: f64,
    /// Probability that an occurring variable gets an existential binder.
    pub bind_prob: f64,
}

impl Default for ExistsAndConfig {
    fn default() -> Self {
        Self {
            max_atoms: 4,
            max_vars: 4,
            signature: vec![("R".into(), 2), ("T".into(), 1)],
            eq_prob: 0.1,
            bind_prob: 0.4,
        }
    }
}

fn random_atom<R: Rng>(rng: &mut R, sig: &[(String, usize)], max_vars: u32, eq_prob: f64) -> Formula {
    let var = |rng: &mut R| Var::new(rng.gen_range(1..=max_vars));
    if sig.is_empty() || rng.gen_bool(eq_prob) {
        let a = var(rng);
        return Formula::eq(a, var(rng));
    }
    let (name, arity) = &sig[rng.gen_range(0..sig.len())];
    Formula::Rel(name.clone(), (0..*arity).map(|_| var(rng)).collect())
}

enum Shape {
    Leaf(Formula),
    And(usize, usize),
}

struct Tree {
    nodes: Vec<(Shape, Vec<Var>)>,
}

impl Tree {
    fn build<R: Rng>(&mut self, rng: &mut R, mut atoms: Vec<Formula>) -> usize {
        if atoms.len() == 1 {
            self.nodes.push((Shape::Leaf(atoms.pop().unwrap()), Vec::new()));
            return self.nodes.len() - 1;
        }
        let split = rng.gen_range(1..atoms.len());
        let right = atoms.split_off(split);
        let l = self.build(rng, atoms);
        let r = self.build(rng, right);
        self.nodes.push((Shape::And(l, r), Vec::new()));
        self.nodes.len() - 1
    }

    fn contains(&self, node: usize, v: Var) -> bool {
        match &self.nodes[node].0 {
            Shape::Leaf(f) => f.free_vars().contains(&v),
            Shape::And(l, r) => self.contains(*l, v) || self.contains(*r, v),
        }
    }

    /// Root-to-LCA path of the atoms mentioning `v`.
    fn path_to_lca(&self, root: usize, v: Var) -> Vec<usize> {
        let mut path = vec![root];
        let mut at = root;
        while let Shape::And(l, r) = &self.nodes[at].0 {
            let (in_l, in_r) = (self.contains(*l, v), self.contains(*r, v));
            at = match (in_l, in_r) {
                (true, false) => *l,
                (false, true) => *r,
                _ => break,
            };
            path.push(at);
        }
        path
    }

    fn to_formula(&self, node: usize) -> Formula {
        let (shape, binders) = &self.nodes[node];
        let inner = match shape {
            Shape::Leaf(f) => f.clone(),
            Shape::And(l, r) => Formula::and(self.to_formula(*l), self.to_formula(*r)),
        };
        Formula::exists_all(binders.iter().copied(), inner)
    }
}

/// A clean formula built from atoms with `∧` and `∃` only.
pub fn exists_and_formula<R: Rng>(rng: &mut R, cfg: &ExistsAndConfig) -> Formula {
    let n = rng.gen_range(1..=cfg.max_atoms);
    let atoms: Vec<Formula> = (0..n)
        .map(|_| random_atom(rng, &cfg.signature, cfg.max_vars, cfg.eq_prob))
        .collect();
    let mut tree = Tree { nodes: Vec::new() };
    let root = tree.build(rng, atoms);
    let root_formula = tree.to_formula(root);
    for v in root_formula.free_vars() {
        if !rng.gen_bool(cfg.bind_prob) {
            continue;
        }
        let path = tree.path_to_lca(root, v);
        let at = if rng.gen_bool(0.5) {
            *path.last().unwrap()
        } else {
            *path.choose(rng).unwrap()
        };
        tree.nodes[at].1.push(v);
    }
    tree.to_formula(root)
}

pub fn exists_and_corpus<R: Rng>(rng: &mut R, cfg: &ExistsAndConfig, count: usize) -> Vec<Formula> {
    (0..count).map(|_| exists_and_formula(rng, cfg)).collect()
}

#[derive(Clone, Debug)]
pub struct FoConfig {
    pub max_depth: u32,
    pub max_vars: u32,
    pub signature: Vec<(String, usize)>,
    pub allow_equality: bool,
    pub allow_constants: bool,
    pub allow_second_order: bool,
    /// Probability that an atom's arguments form an ascending run.
    pub ascending_bias: f64,
}

impl Default for FoConfig {
    fn default() -> Self {
        Self {
            max_depth: 4,
            max_vars: 4,
            signature: vec![("R".into(), 2), ("S".into(), 2), ("T".into(), 1), ("U".into(), 3)],
            allow_equality: true,
            allow_constants: true,
            allow_second_order: false,
            ascending_bias: 0.0,
        }
    }
}

fn fo_atom<R: Rng>(rng: &mut R, cfg: &FoConfig, extra: &[(String, usize)]) -> Formula {
    if cfg.allow_constants && rng.gen_bool(0.05) {
        return if rng.gen() { Formula::Top } else { Formula::Bottom };
    }
    let names: Vec<&(String, usize)> = cfg.signature.iter().chain(extra).collect();
    if names.is_empty() || (cfg.allow_equality && rng.gen_bool(0.12)) {
        let a = Var::new(rng.gen_range(1..=cfg.max_vars));
        return Formula::eq(a, Var::new(rng.gen_range(1..=cfg.max_vars)));
    }
    let (name, arity) = names[rng.gen_range(0..names.len())];
    let args: Vec<Var> = if *arity > 0 && rng.gen_bool(cfg.ascending_bias) {
        let last = rng.gen_range(*arity as u32..=cfg.max_vars.max(*arity as u32));
        (last + 1 - *arity as u32..=last).map(Var::new).collect()
    } else {
        (0..*arity)
            .map(|_| Var::new(rng.gen_range(1..=cfg.max_vars)))
            .collect()
    };
    Formula::Rel(name.clone(), args)
}

fn fo_go<R: Rng>(rng: &mut R, cfg: &FoConfig, depth: u32, extra: &mut Vec<(String, usize)>) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return fo_atom(rng, cfg, extra);
    }
    let kinds = if cfg.allow_second_order { 9 } else { 7 };
    let d = depth - 1;
    let var = |rng: &mut R| Var::new(rng.gen_range(1..=cfg.max_vars));
    match rng.gen_range(0..kinds) {
        0 => Formula::not(fo_go(rng, cfg, d, extra)),
        1 => {
            let a = fo_go(rng, cfg, d, extra);
            Formula::and(a, fo_go(rng, cfg, d, extra))
        }
        2 => {
            let a = fo_go(rng, cfg, d, extra);
            Formula::or(a, fo_go(rng, cfg, d, extra))
        }
        3 => {
            let a = fo_go(rng, cfg, d, extra);
            Formula::implies(a, fo_go(rng, cfg, d, extra))
        }
        4 => {
            let a = fo_go(rng, cfg, d, extra);
            Formula::iff(a, fo_go(rng, cfg, d, extra))
        }
        5 => {
            let v = var(rng);
            Formula::exists(v, fo_go(rng, cfg, d, extra))
        }
        6 => {
            let v = var(rng);
            Formula::forall(v, fo_go(rng, cfg, d, extra))
        }
        k => {
            let name = format!("Z{}", extra.len() + 1);
            let arity = rng.gen_range(0..=2);
            extra.push((name.clone(), arity));
            let body = fo_go(rng, cfg, d, extra);
            extra.pop();
            if k == 7 {
                Formula::exists_so(name, arity, body)
            } else {
                Formula::forall_so(name, arity, body)
            }
        }
    }
}

/// A formula over all connectives, quantifiers on random variables.
pub fn fo_formula<R: Rng>(rng: &mut R, cfg: &FoConfig) -> Formula {
    fo_go(rng, cfg, cfg.max_depth, &mut Vec::new())
}

/// A formula whose free variables number between 1 and `max_free`.
pub fn fo_formula_with_free<R: Rng>(rng: &mut R, cfg: &FoConfig, max_free: usize) -> Formula {
    loop {
        let f = fo_formula(rng, cfg);
        let k = f.free_vars().len();
        if (1..=max_free).contains(&k) {
            return f;
        }
    }
}

/// An injective map from the free variables of `f` into `1..=max_index`.
pub fn injective_renaming<R: Rng>(rng: &mut R, f: &Formula, max_index: u32) -> VariableRenaming {
    let free: Vec<Var> = f.free_vars().into_iter().collect();
    let mut targets: Vec<u32> = (1..=max_index.max(free.len() as u32)).collect();
    targets.shuffle(rng);
    VariableRenaming::new(
        free.iter()
            .zip(targets)
            .map(|(v, t)| (*v, Var::new(t)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{is_member, FragmentId};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn exists_and_output_is_clean_and_in_fragment() {
        let mut rng = StdRng::seed_from_u64(7);
        let cfg = ExistsAndConfig::default();
        for f in exists_and_corpus(&mut rng, &cfg, 300) {
            assert!(f.is_clean(), "{f}");
            assert!(is_member(&f, FragmentId::ExistsAnd), "{f}");
            assert!(f.max_var_index() <= cfg.max_vars);
            assert!(f.conjuncts().len() <= cfg.max_atoms);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let cfg = FoConfig::default();
        let a = fo_formula(&mut StdRng::seed_from_u64(3), &cfg);
        let b = fo_formula(&mut StdRng::seed_from_u64(3), &cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn renamings_are_injective_and_total() {
        let mut rng = StdRng::seed_from_u64(11);
        let cfg = FoConfig::default();
        for _ in 0..50 {
            let f = fo_formula_with_free(&mut rng, &cfg, 2);
            let pi = injective_renaming(&mut rng, &f, 3);
            assert!(pi.is_injective());
            assert!(pi.is_total_on(&f.free_vars()));
        }
    }
}
