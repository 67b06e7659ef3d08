mod common;

use std::collections::BTreeSet;

use fraglab_core::classify::{ff_level, fl_level, is_member, FragmentId};
use fraglab_core::corpus::{exists_and_formula, fo_formula, fo_formula_with_free, injective_renaming, ExistsAndConfig, FoConfig};
use fraglab_core::formula::{Formula, Var};
use fraglab_core::rewrite::{cleanify, rename_free_vars, substitute_atoms, Replacement, Substitution};
use fraglab_core::semantics::{
    apply_substitution_structure, entails_upto, enumerate_structures, equiv_upto, eval,
    reverify_entailment_witness, reverify_equivalence_witness, Budget,
};
use fraglab_core::structure::Structure;
use fraglab_core::syntax::{parse, print};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{map_all_vars, random_assignment, random_structure, sig};

fn small_fo() -> FoConfig {
    FoConfig {
        max_depth: 3,
        max_vars: 3,
        signature: sig(&[("R", 2), ("T", 1)]),
        ..FoConfig::default()
    }
}

fn size2() -> Budget {
    Budget::default().with_max_domain(2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let cfg = FoConfig { allow_second_order: true, ..FoConfig::default() };
        let f = fo_formula(&mut StdRng::seed_from_u64(seed), &cfg);
        let text = print(&f);
        prop_assert_eq!(parse(&text).unwrap(), f.clone());
        prop_assert_eq!(print(&parse(&text).unwrap()), text);
    }

    #[test]
    fn cleanify_is_clean_and_equivalent(seed in any::<u64>()) {
        let f = fo_formula(&mut StdRng::seed_from_u64(seed), &small_fo());
        let c = cleanify(&f);
        prop_assert!(c.is_clean());
        prop_assert_eq!(c.free_vars(), f.free_vars());
        prop_assert_eq!(cleanify(&c), c.clone());
        prop_assert!(equiv_upto(&f, &c, &size2()).unwrap().is_verified());
    }

    #[test]
    fn desugar_is_idempotent_and_equivalent(seed in any::<u64>()) {
        let f = fo_formula(&mut StdRng::seed_from_u64(seed), &small_fo());
        let d = f.desugar();
        prop_assert_eq!(d.desugar(), d.clone());
        prop_assert!(!d.any_node(&mut |n| matches!(n, Formula::Implies(..) | Formula::Iff(..))));
        prop_assert!(equiv_upto(&f, &d, &size2()).unwrap().is_verified());
    }

    #[test]
    fn renaming_free_variables_moves_the_assignment(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = fo_formula_with_free(&mut rng, &small_fo(), 2);
        let pi = injective_renaming(&mut rng, &f, 3);
        let g = rename_free_vars(&f, &pi);
        let images: BTreeSet<Var> = f.free_vars().iter().map(|v| pi.apply(*v)).collect();
        prop_assert_eq!(g.free_vars(), images);
        let s = sig(&[("R", 2), ("T", 1)]);
        for _ in 0..8 {
            let m = random_structure(&mut rng, &s, 3);
            let target = random_assignment(&mut rng, g.free_vars(), 3);
            let source = f.free_vars().iter().map(|v| (*v, target.get(pi.apply(*v)).unwrap())).collect();
            prop_assert_eq!(eval(&m, &source, &f).unwrap(), eval(&m, &target, &g).unwrap());
        }
    }

    #[test]
    fn evaluation_ignores_unused_relations(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = fo_formula(&mut rng, &small_fo());
        let m = random_structure(&mut rng, &sig(&[("R", 2), ("T", 1)]), 3);
        let g = random_assignment(&mut rng, f.free_vars(), 3);
        let extra = random_structure(&mut rng, &sig(&[("Extra", 2)]), 3);
        let mut expanded = m.clone();
        let r = extra.relation("Extra").unwrap();
        expanded.set_relation("Extra", 2, r.tuples.iter().cloned()).unwrap();
        prop_assert_eq!(eval(&m, &g, &f).unwrap(), eval(&expanded, &g, &f).unwrap());
    }

    #[test]
    fn syntactic_and_semantic_substitution_agree(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = fo_formula(&mut rng, &small_fo());
        let body_cfg = FoConfig { max_vars: 2, max_depth: 2, allow_constants: false, ..small_fo() };
        let body = fo_formula(&mut rng, &body_cfg);
        let mut sub = Substitution::new();
        sub.insert("R".to_owned(), Replacement::new(vec![Var::new(1), Var::new(2)], body));
        let replaced = substitute_atoms(&f, &sub).unwrap();
        let s = sig(&[("R", 2), ("T", 1)]);
        for _ in 0..6 {
            let m = random_structure(&mut rng, &s, 3);
            let g = random_assignment(&mut rng, f.free_vars(), 3);
            let m2 = apply_substitution_structure(&m, &sub).unwrap();
            prop_assert_eq!(eval(&m, &g, &replaced).unwrap(), eval(&m2, &g, &f).unwrap());
        }
    }

    #[test]
    fn fluted_levels_are_forward_levels(seed in any::<u64>()) {
        let cfg = FoConfig {
            allow_equality: false,
            allow_constants: false,
            ascending_bias: 0.7,
            ..FoConfig::default()
        };
        let f = fo_formula(&mut StdRng::seed_from_u64(seed), &cfg);
        prop_assert!(fl_level(&f).unwrap().is_subset(&ff_level(&f).unwrap()));
    }

    #[test]
    fn two_variable_membership_survives_index_swap(seed in any::<u64>()) {
        let cfg = FoConfig { max_vars: 3, ..FoConfig::default() };
        let f = fo_formula(&mut StdRng::seed_from_u64(seed), &cfg);
        let swap = |v: Var| match v.index() {
            1 => Var::new(2),
            2 => Var::new(1),
            _ => v,
        };
        let g = map_all_vars(&f, &swap);
        prop_assert_eq!(is_member(&f, FragmentId::Fo2), is_member(&g, FragmentId::Fo2));
    }

    #[test]
    fn query_classes_nest(seed in any::<u64>()) {
        let f = exists_and_formula(&mut StdRng::seed_from_u64(seed), &ExistsAndConfig { eq_prob: 0.0, ..ExistsAndConfig::default() });
        prop_assert!(is_member(&f, FragmentId::ExistsAnd));
        if is_member(&f, FragmentId::Cq) {
            prop_assert!(is_member(&f, FragmentId::Ucq));
            prop_assert!(is_member(&f, FragmentId::GnfoUcq));
        }
        let negated = Formula::not(f.clone());
        prop_assert!(!is_member(&negated, FragmentId::Cq));
        prop_assert!(!is_member(&negated, FragmentId::ExistsAnd));
    }

    #[test]
    fn second_order_quantifiers_are_dual(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = FoConfig { signature: sig(&[("R", 2), ("Z", 1)]), ..small_fo() };
        let body = fo_formula(&mut rng, &cfg);
        let all = Formula::forall_so("Z", 1, body.clone());
        let dual = Formula::not(Formula::exists_so("Z", 1, Formula::not(body)));
        let m = random_structure(&mut rng, &sig(&[("R", 2)]), 3);
        let g = random_assignment(&mut rng, all.free_vars(), 3);
        prop_assert_eq!(eval(&m, &g, &all).unwrap(), eval(&m, &g, &dual).unwrap());
    }

    #[test]
    fn countermodels_reverify(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = fo_formula(&mut rng, &small_fo());
        let b = fo_formula(&mut rng, &small_fo());
        let o = entails_upto(&a, &b, &size2()).unwrap();
        if !o.is_verified() {
            prop_assert!(reverify_entailment_witness(&a, &b, &o).unwrap());
        }
        let o = equiv_upto(&a, &b, &size2()).unwrap();
        if !o.is_verified() {
            prop_assert!(reverify_equivalence_witness(&a, &b, &o).unwrap());
        }
    }
}

/// Second-order existentials against a direct loop over all expansions.
#[test]
fn existential_second_order_matches_direct_enumeration() {
    let mut rng = StdRng::seed_from_u64(17);
    for k in 1..=2usize {
        let cfg = FoConfig { signature: sig(&[("R", 2), ("Z", k)]), max_depth: 3, max_vars: 2, ..FoConfig::default() };
        for _ in 0..20 {
            let body = fo_formula(&mut rng, &cfg);
            let closed = Formula::exists_so("Z", k, body.clone());
            for n in 1..=2u32 {
                let m = random_structure(&mut rng, &sig(&[("R", 2)]), n);
                let g = random_assignment(&mut rng, closed.free_vars(), n);
                let expansions = enumerate_structures(&[("Z".to_owned(), k)].into_iter().collect(), n, &Budget::default()).unwrap();
                let direct = expansions.into_iter().any(|z: Structure| {
                    let mut e = m.clone();
                    let r = z.relation("Z").unwrap();
                    e.set_relation("Z", k, r.tuples.iter().cloned()).unwrap();
                    eval(&e, &g, &body).unwrap()
                });
                assert_eq!(eval(&m, &g, &closed).unwrap(), direct, "{body} at size {n}");
            }
        }
    }
}

#[test]
fn enumeration_counts_and_distinctness() {
    let s = sig(&[("R", 2), ("T", 1)]);
    let signature = s.iter().cloned().collect();
    for n in 1..=2u32 {
        let all: Vec<Structure> = enumerate_structures(&signature, n, &Budget::default()).unwrap().collect();
        let expected = 1usize << ((n * n) + n);
        assert_eq!(all.len(), expected);
        let distinct: BTreeSet<String> = all.iter().map(|m| m.to_json().to_string()).collect();
        assert_eq!(distinct.len(), expected);
    }
}
