use lawvere_core::semimat::{kron, mat_add, mat_mul, FiniteSemiring, Semiring, SemiringMatrix};
use lawvere_core::spancat::{compose_spans, matrix_span, span_matrix, SpanClass};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_semirings() -> Vec<Semiring> {
    vec![
        Semiring::Naturals,
        Semiring::Integers,
        Semiring::ZMod(2),
        Semiring::ZMod(3),
        Semiring::ZMod(4),
        Semiring::Boolean,
        Semiring::Tropical,
    ]
}

fn random_matrix(rng: &mut ChaCha8Rng, r: &Semiring, rows: usize, cols: usize) -> SemiringMatrix {
    let elems = r.sample_elements(3);
    let entries = (0..rows * cols).map(|_| *elems.choose(rng).unwrap()).collect();
    SemiringMatrix::new(r.clone(), rows, cols, entries).unwrap()
}

// Sum of products written out directly, used as the oracle for products.
fn expand_product(r: &Semiring, a: &SemiringMatrix, b: &SemiringMatrix) -> Vec<i64> {
    let mut out = Vec::new();
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let terms = (0..a.cols()).map(|k| r.mul(a.get(i, k), b.get(k, j)));
            out.push(terms.fold(r.zero(), |s, t| r.add(s, t)));
        }
    }
    out
}

#[test]
fn product_distributes_over_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r in all_semirings() {
        for _ in 0..100 {
            let (m, n, k) = (rng.gen_range(0..4), rng.gen_range(0..4), rng.gen_range(0..4));
            let a = random_matrix(&mut rng, &r, m, n);
            let b = random_matrix(&mut rng, &r, n, k);
            let c = random_matrix(&mut rng, &r, n, k);
            let left = mat_mul(&a, &mat_add(&b, &c).unwrap()).unwrap();
            let right = mat_add(&mat_mul(&a, &b).unwrap(), &mat_mul(&a, &c).unwrap()).unwrap();
            assert_eq!(left, right, "{r}");
            let d = random_matrix(&mut rng, &r, m, n);
            let left = mat_mul(&mat_add(&a, &d).unwrap(), &b).unwrap();
            let right = mat_add(&mat_mul(&a, &b).unwrap(), &mat_mul(&d, &b).unwrap()).unwrap();
            assert_eq!(left, right, "{r}");
        }
    }
}

#[test]
fn product_matches_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for r in all_semirings() {
        for _ in 0..50 {
            let (m, n, k) = (rng.gen_range(0..4), rng.gen_range(0..4), rng.gen_range(0..4));
            let a = random_matrix(&mut rng, &r, m, n);
            let b = random_matrix(&mut rng, &r, n, k);
            assert_eq!(mat_mul(&a, &b).unwrap().entries(), expand_product(&r, &a, &b).as_slice());
        }
    }
}

#[test]
fn kron_is_associative() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let rings = [Semiring::Naturals, Semiring::ZMod(4), Semiring::Boolean, Semiring::Tropical];
    for r in &rings {
        for _ in 0..200 {
            let dims: Vec<usize> = (0..6).map(|_| rng.gen_range(0..3)).collect();
            let a = random_matrix(&mut rng, r, dims[0], dims[1]);
            let b = random_matrix(&mut rng, r, dims[2], dims[3]);
            let c = random_matrix(&mut rng, r, dims[4], dims[5]);
            let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
            let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
            assert_eq!(left, right, "{r}");
            // entry ((i,k,p),(j,l,q)) is a_ij b_kl c_pq under lexicographic pairing
            for i in 0..a.rows() {
                for k in 0..b.rows() {
                    for p in 0..c.rows() {
                        for j in 0..a.cols() {
                            for l in 0..b.cols() {
                                for q in 0..c.cols() {
                                    let row = (i * b.rows() + k) * c.rows() + p;
                                    let col = (j * b.cols() + l) * c.cols() + q;
                                    let want = r.mul(r.mul(a.get(i, j), b.get(k, l)), c.get(p, q));
                                    assert_eq!(left.get(row, col), want);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn kron_interchange() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let rings = [Semiring::Naturals, Semiring::ZMod(4), Semiring::Boolean, Semiring::Tropical];
    for r in &rings {
        for _ in 0..200 {
            let d: Vec<usize> = (0..6).map(|_| rng.gen_range(0..3)).collect();
            let a = random_matrix(&mut rng, r, d[0], d[1]);
            let b = random_matrix(&mut rng, r, d[2], d[3]);
            let c = random_matrix(&mut rng, r, d[1], d[4]);
            let e = random_matrix(&mut rng, r, d[3], d[5]);
            let ab = kron(&a, &b).unwrap();
            let ce = kron(&c, &e).unwrap();
            let left = expand_product(r, &ab, &ce);
            let right = kron(&mat_mul(&a, &c).unwrap(), &mat_mul(&b, &e).unwrap()).unwrap();
            assert_eq!(left.as_slice(), right.entries(), "{r}");
        }
    }
}

#[test]
fn kron_symmetric_up_to_swap() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for r in all_semirings() {
        for _ in 0..50 {
            let d: Vec<usize> = (0..4).map(|_| rng.gen_range(0..4)).collect();
            let a = random_matrix(&mut rng, &r, d[0], d[1]);
            let b = random_matrix(&mut rng, &r, d[2], d[3]);
            let ab = kron(&a, &b).unwrap();
            let ba = kron(&b, &a).unwrap();
            // (b ⊗ a)[(k,i),(l,j)] = (a ⊗ b)[(i,k),(j,l)]
            for i in 0..d[0] {
                for k in 0..d[2] {
                    for j in 0..d[1] {
                        for l in 0..d[3] {
                            assert_eq!(
                                ba.get(k * d[0] + i, l * d[1] + j),
                                ab.get(i * d[2] + k, j * d[3] + l)
                            );
                        }
                    }
                }
            }
            let left = SemiringMatrix::commutation(&r, d[0], d[2]);
            let right = SemiringMatrix::commutation(&r, d[1], d[3]);
            assert_eq!(mat_mul(&left, &ab).unwrap(), mat_mul(&ba, &right).unwrap());
        }
    }
}

#[test]
fn natural_product_matches_span_composite() {
    let a = SemiringMatrix::from_rows(Semiring::Naturals, 1, &[vec![2], vec![1]]).unwrap();
    let b = SemiringMatrix::from_rows(Semiring::Naturals, 2, &[vec![1, 1]]).unwrap();
    let ab = mat_mul(&a, &b).unwrap();
    assert_eq!(ab.row_vecs(), vec![vec![2, 2], vec![1, 1]]);
    // [[1,1]] : 2 -> 1 then [[2],[1]] : 1 -> 2
    let first = SpanClass::new(2, 1, vec![1, 1]).unwrap();
    let second = SpanClass::new(1, 2, vec![2, 1]).unwrap();
    let composite = span_matrix(&compose_spans(&matrix_span(&first), &matrix_span(&second)).unwrap());
    assert_eq!(SemiringMatrix::from_span_class(&composite), ab);
}

#[test]
fn boolean_product_is_relation_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let r = Semiring::Boolean;
    for _ in 0..50 {
        let (m, n, k) = (rng.gen_range(0..5), rng.gen_range(0..5), rng.gen_range(0..5));
        let rel1: Vec<(usize, usize)> =
            (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|_| rng.gen_bool(0.4)).collect();
        let rel2: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (0..k).map(move |j| (i, j))).filter(|_| rng.gen_bool(0.4)).collect();
        let as_matrix = |rows: usize, cols: usize, rel: &[(usize, usize)]| {
            let mut e = vec![0; rows * cols];
            for &(i, j) in rel {
                e[i * cols + j] = 1;
            }
            SemiringMatrix::new(r.clone(), rows, cols, e).unwrap()
        };
        let mut composite = Vec::new();
        for &(a, b) in &rel1 {
            for &(c, d) in &rel2 {
                if b == c && !composite.contains(&(a, d)) {
                    composite.push((a, d));
                }
            }
        }
        let product = mat_mul(&as_matrix(m, n, &rel1), &as_matrix(n, k, &rel2)).unwrap();
        assert_eq!(product, as_matrix(m, k, &composite));
    }
}

// Axioms restated directly for 2-element tables.
fn satisfies_axioms(add: &[usize], mul: &[usize], zero: usize, one: usize) -> bool {
    let a = |x: usize, y: usize| add[2 * x + y];
    let m = |x: usize, y: usize| mul[2 * x + y];
    let els = [0usize, 1];
    let triples: Vec<(usize, usize, usize)> =
        (0..8).map(|code| (code >> 2, (code >> 1) & 1, code & 1)).collect();
    let pairs_ok = els.iter().all(|&x| {
        a(zero, x) == x
            && a(x, zero) == x
            && m(one, x) == x
            && m(x, one) == x
            && m(zero, x) == zero
            && m(x, zero) == zero
            && els.iter().all(|&y| a(x, y) == a(y, x))
    });
    pairs_ok
        && triples.iter().all(|&(x, y, z)| a(a(x, y), z) == a(x, a(y, z)) && m(m(x, y), z) == m(x, m(y, z)))
        && triples.iter().all(|&(x, y, z)| m(x, a(y, z)) == a(m(x, y), m(x, z)))
        && triples.iter().all(|&(x, y, z)| m(a(x, y), z) == a(m(x, z), m(y, z)))
}

#[test]
fn two_element_axiom_checker_is_exact() {
    let table = |code: usize| (0..4).map(|bit| (code >> bit) & 1).collect::<Vec<usize>>();
    let mut accepted = Vec::new();
    for add in 0..16 {
        for mul in 0..16 {
            for zero in 0..2 {
                for one in 0..2 {
                    let (at, mt) = (table(add), table(mul));
                    let ok = FiniteSemiring::new("t", 2, at.clone(), mt.clone(), zero, one).is_ok();
                    assert_eq!(ok, satisfies_axioms(&at, &mt, zero, one), "add {at:?} mul {mt:?} 0={zero} 1={one}");
                    if ok {
                        accepted.push((at, mt, zero, one));
                    }
                }
            }
        }
    }
    let boolean = Semiring::Boolean.to_finite().unwrap();
    let z2 = Semiring::ZMod(2).to_finite().unwrap();
    for s in [boolean, z2] {
        assert!(accepted.contains(&(s.add.clone(), s.mul.clone(), s.zero, s.one)));
    }
}
