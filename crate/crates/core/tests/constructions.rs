mod common;

use fraglab_core::formula::{x, Formula};
use fraglab_core::rewrite::{Replacement, Substitution, VariableRenaming};
use fraglab_core::semantics::{eval, entails_upto, equiv_upto, sandwich_check, Budget};
use fraglab_core::structure::{Assignment, Structure};
use fraglab_core::syntax::{parse, print};
use fraglab_core::transform::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{random_structure, sig};

fn p(s: &str) -> Formula {
    parse(s).unwrap()
}

fn budget(k: u32) -> Budget {
    Budget::default().with_max_domain(k)
}

#[test]
fn bind_documented_cases() {
    assert_eq!(
        print(&bind(&p("R(x1,x2)"), &[x(2)], &["P".into()]).unwrap()),
        "(E x2. (R(x1,x2) & P(x2)))"
    );
    assert_eq!(bind(&p("Q(x1)"), &[x(2)], &["P".into()]).unwrap(), p("Q(x1)"));
    assert_eq!(
        bind(&p("E x3. (R(x1,x2) & S(x2,x3))"), &[x(1)], &["P".into()]).unwrap(),
        p("E x3. ((E x1. (R(x1,x2) & P(x1))) & S(x2,x3))")
    );
    assert!(matches!(
        bind(&p("E x1. R(x1,x1) & E x1. T(x1)"), &[], &[]),
        Err(TransformError::NotClean)
    ));
    assert!(matches!(
        bind(&p("!R(x1,x2)"), &[x(1)], &["P".into()]),
        Err(TransformError::NotExistsAnd)
    ));
}

#[test]
fn bind_agrees_with_its_definition_semantically() {
    let phi = p("R(x1,x2)");
    let bound = bind(&phi, &[x(2)], &["P".into()]).unwrap();
    let unfolded = p("E x2. (R(x1,x2) & P(x2))");
    assert!(equiv_upto(&bound, &unfolded, &budget(3)).unwrap().is_verified());
}

#[test]
fn relativize_documented_shape_and_sentence_case() {
    let got = relativize(&p("R(x1,x2)")).unwrap();
    let want = p(
        "E x1. E x2. ((((P1(x1) & A x3. (P1(x3) -> x3=x1)) & P2(x2)) & A x3. (P2(x3) -> x3=x2)) & R(x1,x2))",
    );
    assert_eq!(got, want);
    let sentence = p("E x1. T(x1)");
    assert_eq!(relativize(&sentence).unwrap(), sentence);
}

#[test]
fn relativize_holds_exactly_at_the_singleton_points() {
    let phi = p("R(x1,x2) & !T(x2)");
    let rel = relativize(&phi).unwrap();
    let mut rng = StdRng::seed_from_u64(5);
    for n in 1..=3u32 {
        for _ in 0..20 {
            let m = random_structure(&mut rng, &sig(&[("R", 2), ("T", 1)]), n);
            for a in 0..n {
                for b in 0..n {
                    let mut e = m.clone();
                    e.set_relation("P1", 1, [vec![a]]).unwrap();
                    e.set_relation("P2", 1, [vec![b]]).unwrap();
                    let g = Assignment::new().bind(x(1), a).bind(x(2), b);
                    assert_eq!(
                        eval(&e, &Assignment::new(), &rel).unwrap(),
                        eval(&m, &g, &phi).unwrap()
                    );
                }
            }
        }
    }
}

#[test]
fn thm31_step_on_a_relativized_edge() {
    let psi = relativize(&p("R(x1,x2)")).unwrap();
    let s = thm31_step(&psi, "P1", "Q").unwrap();
    assert!(s.is_well_formed());
    assert!(!s.chi.relation_names().contains("P1"));
    assert!(!s.gamma.relation_names().contains("Q"));
    assert!(entails_upto(&s.gamma, &s.chi, &budget(3)).unwrap().is_verified());
    assert!(equiv_upto(&s.exists_closure(), &s.forall_closure(), &budget(2))
        .unwrap()
        .is_verified());
    assert!(sandwich_check(&s, &budget(2)).unwrap().passed());
    assert!(matches!(
        thm31_step(&psi, "R", "Q"),
        Err(TransformError::PredicateNotUnary(_))
    ));
    assert!(matches!(
        thm31_step(&psi, "P1", "P2"),
        Err(TransformError::NotFresh(_))
    ));
}

#[test]
fn bindexp_documented_case() {
    let psi = p("R(x1,x2) & S(x2,x3)");
    let s = bindexp_sandwich(&psi, &[x(1)], &[x(2)], x(3)).unwrap();
    assert!(s.is_well_formed());
    assert_eq!(s.hidden_exists, vec![("G1".to_owned(), 2)]);
    let report = sandwich_check(&s, &budget(2)).unwrap();
    assert!(report.passed(), "{report}");
}

#[test]
fn cq_documented_case() {
    let s = cq_sandwich(&p("R(x1,x2)"), x(1), &[x(2)]).unwrap();
    assert_eq!(s.target, p("E x1. R(x1,x2)"));
    assert!(entails_upto(&s.gamma, &s.chi, &budget(3)).unwrap().is_verified());
    let report = sandwich_check(&s, &budget(3)).unwrap();
    assert!(report.passed(), "{report}");
    assert_eq!(report.checks[1].max_size, 2);
    assert!(matches!(
        cq_sandwich(&p("R(x1,x2)"), x(1), &[x(1)]),
        Err(TransformError::Overlap(_))
    ));
}

#[test]
fn shuffle_swap_and_identity() {
    let phi = p("R(x1,x2)");
    let swap = shuffle_sandwich(&phi, &VariableRenaming::from_pairs([(1, 2), (2, 1)])).unwrap();
    assert_eq!(swap.target, p("R(x2,x1)"));
    assert!(sandwich_check(&swap, &budget(3)).unwrap().passed());
    let id = shuffle_sandwich(&phi, &VariableRenaming::from_pairs([(1, 1), (2, 2)])).unwrap();
    assert_eq!(id.target, phi);
    assert!(entails_upto(&id.gamma, &id.chi, &budget(3)).unwrap().is_verified());
}

#[test]
fn shuffle_rejects_non_injective_and_the_swapped_form_fails() {
    let phi = p("R(x1,x2)");
    let pi = VariableRenaming::from_pairs([(1, 1), (2, 1)]);
    assert!(matches!(
        shuffle_sandwich(&phi, &pi),
        Err(TransformError::NonInjectiveRenaming(..))
    ));
    let s = shuffle_sandwich_swapped(&phi, &pi).unwrap();
    assert!(!entails_upto(&s.gamma, &s.chi, &budget(2)).unwrap().is_verified());
    let (_, _, m, g) = stored_non_injective_witness();
    assert!(eval(&m, &g, &s.gamma).unwrap());
    assert!(!eval(&m, &g, &s.chi).unwrap());
}

#[test]
fn ucq_apply_checks_self_guarding() {
    let q = p("E x1. (R(x1,x2) & T(x1))");
    let mut args = Substitution::new();
    args.insert(
        "R".into(),
        Replacement::new(vec![x(1), x(2)], p("S(x1,x2) & !U(x1)")),
    );
    let out = ucq_apply(&q, &args).unwrap();
    assert_eq!(out, p("E x1. ((S(x1,x2) & !U(x1)) & T(x1))"));
    let mut bad = Substitution::new();
    bad.insert("R".into(), Replacement::new(vec![x(1), x(2)], p("!S(x1,x2)")));
    assert!(matches!(ucq_apply(&q, &bad), Err(TransformError::NotSelfGuarded(_))));
    assert!(matches!(ucq_apply(&p("!T(x1)"), &args), Err(TransformError::NotUcq)));
}

#[test]
fn transitive_wrap_adds_two_transitivity_sentences() {
    let phi = p("E x1. E x2. (R1(x1,x2) & R2(x2,x1))");
    let wrapped = transitive_wrap(&phi, "R1", "R2").unwrap();
    let m = Structure::new(2)
        .unwrap()
        .with_relation("R1", 2, [vec![0, 1], vec![1, 0]])
        .unwrap()
        .with_relation("R2", 2, [vec![1, 0]])
        .unwrap();
    assert!(eval(&m, &Assignment::new(), &phi).unwrap());
    assert!(!eval(&m, &Assignment::new(), &wrapped).unwrap());
    assert!(matches!(
        transitive_wrap(&phi, "R1", "R1"),
        Err(TransformError::SameRelation(..))
    ));
}

#[test]
fn fresh_names_avoid_existing_predicates() {
    let psi = p("R(x1,x2) & G1(x1) & P1(x2)");
    let s = cq_sandwich(&psi, x(1), &[x(2)]).unwrap();
    assert_eq!(s.hidden_exists[0].0, "G2");
    assert_eq!(s.hidden_forall[0].0, "P2");
}
