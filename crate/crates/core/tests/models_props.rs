use std::sync::Arc;

use lawvere_core::finset::Budget;
use lawvere_core::models::{
    check_model, enumerate_models, free_model, free_model_homs, functor_check, model_homs, Model,
};
use lawvere_core::theory::Presentation;
use proptest::prelude::*;

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn labeled(p: &Arc<Presentation>, n: usize) -> Vec<Model> {
    enumerate_models(p, n, false, Budget::default()).unwrap()
}

fn classes(p: &Arc<Presentation>, n: usize) -> Vec<Model> {
    enumerate_models(p, n, true, Budget::default()).unwrap()
}

#[test]
fn orbit_counting_recovers_labeled_counts() {
    for p in [Presentation::cmon(), Presentation::monoid(), Presentation::pointed_set(), Presentation::group()] {
        let p = Arc::new(p);
        for n in 0..=3 {
            let orbits: usize = classes(&p, n).iter().map(|m| factorial(n) / m.automorphism_count()).sum();
            assert_eq!(orbits, labeled(&p, n).len(), "{} at size {n}", p.name());
        }
    }
}

// Associativity and two-sided unit, checked straight off the tables.
fn is_monoid(n: usize, unit: usize, mul: &[usize], commutative: bool) -> bool {
    let m = |a: usize, b: usize| mul[a * n + b];
    (0..n).all(|a| m(unit, a) == a && m(a, unit) == a)
        && (0..n).all(|a| (0..n).all(|b| !commutative || m(a, b) == m(b, a)))
        && (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| m(m(a, b), c) == m(a, m(b, c)))))
}

#[test]
fn enumeration_matches_table_sweep() {
    for (p, commutative) in [(Presentation::monoid(), false), (Presentation::cmon(), true)] {
        let p = Arc::new(p);
        for n in 1..=3usize {
            let cells = n * n;
            let mut count = 0;
            for unit in 0..n {
                for code in 0..n.pow(cells as u32) {
                    let mul: Vec<usize> = (0..cells).map(|i| code / n.pow(i as u32) % n).collect();
                    count += usize::from(is_monoid(n, unit, &mul, commutative));
                }
            }
            assert_eq!(labeled(&p, n).len(), count, "{} at size {n}", p.name());
        }
    }
    let mon = Arc::new(Presentation::monoid());
    let cmon = Arc::new(Presentation::cmon());
    assert_eq!(classes(&mon, 2).len(), classes(&cmon, 2).len());
    assert_eq!((labeled(&mon, 3).len(), classes(&mon, 3).len()), (33, 7));
    assert_eq!((labeled(&cmon, 3).len(), classes(&cmon, 3).len()), (27, 5));
}

#[test]
fn bijective_endomorphisms_are_automorphisms() {
    for p in [Presentation::monoid(), Presentation::cmon(), Presentation::group()] {
        let p = Arc::new(p);
        for n in 1..=3 {
            for m in classes(&p, n) {
                let homs = model_homs(&m, &m, Budget::default()).unwrap();
                let bijective = homs.iter().filter(|h| h.map.is_bijective()).count();
                assert_eq!(bijective, m.automorphism_count());
            }
        }
    }
}

#[test]
fn iso_classes_are_pairwise_distinct() {
    let p = Arc::new(Presentation::monoid());
    for n in 1..=3 {
        let reps = classes(&p, n);
        for (i, a) in reps.iter().enumerate() {
            for b in &reps[i + 1..] {
                assert!(!a.is_isomorphic(b));
                // an isomorphism would show up among the homs
                let homs = model_homs(a, b, Budget::default()).unwrap();
                assert!(homs.iter().all(|h| !h.map.is_bijective()));
            }
        }
    }
}

#[test]
fn free_models_represent_the_underlying_set() {
    let cases = [(Presentation::cmon(), 4, 2), (Presentation::abelian_group(), 3, 2)];
    for (p, bound1, bound2) in cases {
        let p = Arc::new(p);
        let one = free_model(&p, 1, bound1, Budget::default()).unwrap();
        let two = free_model(&p, 2, bound2, Budget::default()).unwrap();
        for n in 1..=3 {
            for m in classes(&p, n) {
                assert_eq!(free_model_homs(&one, &m, Budget::default()).unwrap().len(), n);
                assert_eq!(free_model_homs(&two, &m, Budget::default()).unwrap().len(), n * n);
            }
        }
    }
}

fn table_model(p: &Arc<Presentation>, n: usize, codes: &[usize]) -> Model {
    let tables = p
        .ops()
        .iter()
        .zip(codes)
        .map(|(op, &code)| {
            let len = n.pow(op.arity as u32);
            (0..len).map(|i| (code >> (2 * i)) % n).collect()
        })
        .collect();
    Model::new(p.clone(), n, tables).unwrap()
}

proptest! {
    // The functor a table determines passes the functor check exactly when
    // the table is a model.
    #[test]
    fn functor_dictionary(which in 0usize..3, n in 1usize..=3, codes in prop::collection::vec(any::<usize>(), 3)) {
        let p = Arc::new([Presentation::monoid(), Presentation::cmon(), Presentation::group()][which].clone());
        let m = table_model(&p, n, &codes);
        prop_assert_eq!(functor_check(&p, &m.to_functor(3)), check_model(&m));
    }
}

#[test]
fn functor_dictionary_on_every_model() {
    for p in [Presentation::monoid(), Presentation::cmon(), Presentation::pointed_set(), Presentation::group()] {
        let p = Arc::new(p);
        for n in 0..=3 {
            for m in labeled(&p, n) {
                assert!(functor_check(&p, &m.to_functor(3)));
            }
        }
    }
}

#[test]
fn yoneda_at_bound_zero() {
    // only constants are reachable, so each cmon hom sends generators to e
    let p = Arc::new(Presentation::cmon());
    for m in 0..=2 {
        let r = lawvere_core::models::yoneda_report(&p, m, 2, 0, 20, Budget::default()).unwrap();
        assert!(r.passed);
        assert_eq!((r.model_homs, r.theory_morphisms), (1, 1));
    }
}
