#![allow(dead_code)]

use fraglab_core::formula::{Formula, Var};
use fraglab_core::structure::{Assignment, Structure};
use rand::Rng;

pub fn random_structure<R: Rng>(rng: &mut R, sig: &[(String, usize)], n: u32) -> Structure {
    let mut m = Structure::new(n).unwrap();
    for (name, k) in sig {
        let cells = (n as usize).pow(*k as u32);
        let tuples: Vec<Vec<u32>> = (0..cells)
            .filter(|_| rng.gen_bool(0.5))
            .map(|mut c| {
                let mut t = vec![0; *k];
                for slot in t.iter_mut().rev() {
                    *slot = (c % n as usize) as u32;
                    c /= n as usize;
                }
                t
            })
            .collect();
        m.set_relation(name, *k, tuples).unwrap();
    }
    m
}

pub fn random_assignment<R: Rng>(rng: &mut R, vars: impl IntoIterator<Item = Var>, n: u32) -> Assignment {
    vars.into_iter().map(|v| (v, rng.gen_range(0..n))).collect()
}

/// Applies `f` to every variable occurrence, bound or free.
pub fn map_all_vars(phi: &Formula, f: &impl Fn(Var) -> Var) -> Formula {
    use Formula::*;
    match phi {
        Top | Bottom => phi.clone(),
        Rel(name, args) => Rel(name.clone(), args.iter().map(|v| f(*v)).collect()),
        Eq(a, b) => Eq(f(*a), f(*b)),
        Not(a) => Formula::not(map_all_vars(a, f)),
        And(a, b) => Formula::and(map_all_vars(a, f), map_all_vars(b, f)),
        Or(a, b) => Formula::or(map_all_vars(a, f), map_all_vars(b, f)),
        Implies(a, b) => Formula::implies(map_all_vars(a, f), map_all_vars(b, f)),
        Iff(a, b) => Formula::iff(map_all_vars(a, f), map_all_vars(b, f)),
        Exists(v, a) => Formula::exists(f(*v), map_all_vars(a, f)),
        Forall(v, a) => Formula::forall(f(*v), map_all_vars(a, f)),
        ExistsSo(p, k, a) => Formula::exists_so(p.clone(), *k, map_all_vars(a, f)),
        ForallSo(p, k, a) => Formula::forall_so(p.clone(), *k, map_all_vars(a, f)),
    }
}

pub fn sig(pairs: &[(&str, usize)]) -> Vec<(String, usize)> {
    pairs.iter().map(|(n, k)| (n.to_string(), *k)).collect()
}
