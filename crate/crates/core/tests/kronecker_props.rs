use std::collections::BTreeSet;
use std::sync::Arc;

use lawvere_core::finset::Budget;
use lawvere_core::kronecker::{
    bimodel_check, day_tensor_fgf, eckmann_hilton_report, kronecker_presentation, unit_law_check,
    InterchangeEquation,
};
use lawvere_core::models::{enumerate_models, Model};
use lawvere_core::semimat::{mat_mul, Semiring, SemiringMatrix};
use lawvere_core::theory::{OpSym, Presentation};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_theories() -> Vec<Presentation> {
    vec![Presentation::trivial(), Presentation::pointed_set(), Presentation::monoid(), Presentation::cmon()]
}

fn labeled(p: &Presentation, n: usize) -> Vec<Model> {
    enumerate_models(&Arc::new(p.clone()), n, false, Budget::default()).unwrap()
}

fn decode(mut code: usize, n: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = code % n;
        code /= n;
    }
    out
}

// Interchange checked by running over every p×q grid, written
// independently of the library's table walker.
fn interchange_holds(a: &Model, b: &Model) -> bool {
    let n = a.carrier();
    a.presentation().ops().iter().enumerate().all(|(fi, f)| {
        b.presentation().ops().iter().enumerate().all(|(gi, g)| {
            let cells = f.arity * g.arity;
            (0..n.pow(cells as u32)).all(|code| {
                let grid = decode(code, n, cells);
                let cell = |i: usize, j: usize| grid[i * g.arity + j];
                let rows: Vec<usize> =
                    (0..f.arity).map(|i| b.apply(gi, &(0..g.arity).map(|j| cell(i, j)).collect::<Vec<_>>())).collect();
                let cols: Vec<usize> =
                    (0..g.arity).map(|j| a.apply(fi, &(0..f.arity).map(|i| cell(i, j)).collect::<Vec<_>>())).collect();
                a.apply(fi, &rows) == b.apply(gi, &cols)
            })
        })
    })
}

#[test]
fn unit_law_on_both_sides() {
    for p in small_theories().into_iter().chain([Presentation::group()]) {
        assert!(unit_law_check(&p, 3, Budget::default()).unwrap(), "{}", p.name());
        let right = kronecker_presentation(&p, &Presentation::trivial()).unwrap();
        for n in 0..=3 {
            let a: Vec<Vec<usize>> = labeled(&right, n).iter().map(Model::serialized).collect();
            let b: Vec<Vec<usize>> = labeled(&p, n).iter().map(Model::serialized).collect();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn product_is_symmetric_up_to_reordering() {
    let theories = small_theories();
    for p1 in &theories {
        for p2 in &theories {
            let ab = kronecker_presentation(p1, p2).unwrap();
            let ba = kronecker_presentation(p2, p1).unwrap();
            let k = p1.ops().len();
            for n in 0..=3 {
                let swapped: BTreeSet<Vec<Vec<usize>>> = labeled(&ab, n)
                    .iter()
                    .map(|m| m.tables()[k..].iter().chain(&m.tables()[..k]).cloned().collect())
                    .collect();
                let direct: BTreeSet<Vec<Vec<usize>>> = labeled(&ba, n).iter().map(|m| m.tables().to_vec()).collect();
                assert_eq!(swapped, direct, "{} and {} at size {n}", p1.name(), p2.name());
            }
        }
    }
}

#[test]
fn models_are_commuting_pairs() {
    let theories = small_theories();
    for p1 in &theories {
        for p2 in &theories {
            let product = kronecker_presentation(p1, p2).unwrap();
            for n in 0..=3 {
                let mut pairs = BTreeSet::new();
                for a in labeled(p1, n) {
                    for b in labeled(p2, n) {
                        if interchange_holds(&a, &b) {
                            pairs.insert([a.tables(), b.tables()].concat());
                        }
                    }
                }
                let models: BTreeSet<Vec<Vec<usize>>> = labeled(&product, n).iter().map(|m| m.tables().to_vec()).collect();
                assert_eq!(models, pairs, "{} and {} at size {n}", p1.name(), p2.name());
            }
            assert!(bimodel_check(p1, p2, 2).unwrap());
        }
    }
}

#[test]
fn commuting_monoid_structures_collapse() {
    let mon = Presentation::monoid();
    let cmon = Presentation::cmon();
    for n in 1..=3 {
        let monoids = labeled(&mon, n);
        let mut pairs = 0;
        for a in &monoids {
            for b in &monoids {
                if interchange_holds(a, b) {
                    pairs += 1;
                    assert_eq!(a.tables(), b.tables());
                    let t = &a.tables()[1];
                    assert!((0..n).all(|x| (0..n).all(|y| t[x * n + y] == t[y * n + x])));
                }
            }
        }
        assert_eq!(pairs, labeled(&cmon, n).len());
    }
    let report = eckmann_hilton_report(3, Budget::default()).unwrap();
    let counts: Vec<usize> = report.rows.iter().map(|r| r.product_classes).collect();
    assert_eq!(counts, vec![1, 2, 5]);
    assert!(report.passed);
}

#[test]
fn pointed_points_are_identified() {
    let p = Presentation::pointed_set();
    let product = kronecker_presentation(&p, &p).unwrap();
    for n in 0..=3 {
        let models = labeled(&product, n);
        assert_eq!(models.len(), n);
        assert!(models.iter().all(|m| m.tables()[0] == m.tables()[1]));
    }
}

proptest! {
    #[test]
    fn interchange_equation_shape(p in 0usize..4, q in 0usize..4) {
        let eq = InterchangeEquation::new(OpSym::new("f", p), OpSym::new("g", q)).equation();
        prop_assert_eq!(eq.context, p * q);
        prop_assert_eq!(eq.lhs.count_op("f"), 1);
        prop_assert_eq!(eq.lhs.count_op("g"), p);
        prop_assert_eq!(eq.rhs.count_op("f"), q);
        prop_assert_eq!(eq.rhs.count_op("g"), 1);
        // each grid variable is used once on each side
        prop_assert_eq!(eq.lhs.vars().len(), p * q);
        prop_assert_eq!(eq.rhs.vars().len(), p * q);
        prop_assert_eq!(eq.lhs.size(), 1 + p + p * q);
        prop_assert_eq!(eq.rhs.size(), 1 + q + p * q);
    }
}

#[test]
fn day_tensor_is_bifunctorial() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for r in [Semiring::Naturals, Semiring::ZMod(4), Semiring::Boolean, Semiring::Tropical] {
        let elems = r.sample_elements(3);
        let mut random = |rows: usize, cols: usize| {
            let e = (0..rows * cols).map(|_| *elems.choose(&mut rng).unwrap()).collect();
            SemiringMatrix::new(r.clone(), rows, cols, e).unwrap()
        };
        for k in 0..50 {
            let d: Vec<usize> = (0..6).map(|i| (k * 7 + i * 5) % 3 + 1).collect();
            let (a, b, c, e) = (random(d[0], d[1]), random(d[2], d[3]), random(d[1], d[4]), random(d[3], d[5]));
            let left = mat_mul(&day_tensor_fgf(&r, &a, &b).unwrap(), &day_tensor_fgf(&r, &c, &e).unwrap()).unwrap();
            let right = day_tensor_fgf(&r, &mat_mul(&a, &c).unwrap(), &mat_mul(&b, &e).unwrap()).unwrap();
            assert_eq!(left, right);
        }
        let unit = SemiringMatrix::identity(&r, 1);
        let a = random(3, 2);
        assert_eq!(day_tensor_fgf(&r, &unit, &a).unwrap(), a);
        assert_eq!(day_tensor_fgf(&r, &a, &unit).unwrap(), a);
    }
}
