use lawvere_core::finset::FinMap;
use lawvere_core::semimat::{mat_mul, SemiringMatrix};
use lawvere_core::spancat::{
    add_spans, compose_spans, identity_span, injection, matrix_span, projection, span_matrix, tensor_spans, Span,
    SpanClass,
};
use proptest::prelude::*;

fn span(x: usize, y: usize) -> impl Strategy<Value = Span> {
    // an empty endpoint forces an empty middle
    let max_middle = if x == 0 || y == 0 { 1 } else { 5 };
    (0usize..max_middle).prop_flat_map(move |t| {
        (prop::collection::vec(0..x.max(1), t), prop::collection::vec(0..y.max(1), t))
            .prop_map(move |(l, r)| Span::new(FinMap::from_table(x, l).unwrap(), FinMap::from_table(y, r).unwrap()).unwrap())
    })
}

fn composable() -> impl Strategy<Value = (Span, Span)> {
    (0usize..4, 0usize..4, 0usize..4).prop_flat_map(|(x, y, z)| (span(x, y), span(y, z)))
}

/// Matrix product computed entrywise, independent of the library.
fn naive_product(b: &SpanClass, a: &SpanClass) -> Vec<u64> {
    let mut out = vec![0; b.target() * a.source()];
    for z in 0..b.target() {
        for x in 0..a.source() {
            out[z * a.source() + x] = (0..a.target()).map(|y| b.get(z, y) * a.get(y, x)).sum();
        }
    }
    out
}

fn parallel() -> impl Strategy<Value = (Span, Span)> {
    (0usize..4, 0usize..4).prop_flat_map(|(x, y)| (span(x, y), span(x, y)))
}

proptest! {
    #[test]
    fn composition_is_matrix_product((s, t) in composable()) {
        let c = span_matrix(&compose_spans(&s, &t).unwrap());
        let expected = naive_product(&span_matrix(&t), &span_matrix(&s));
        prop_assert_eq!(c.entries(), expected.as_slice());
    }

    #[test]
    fn canonical_span_round_trips((s, _) in composable()) {
        let class = span_matrix(&s);
        prop_assert_eq!(span_matrix(&matrix_span(&class)), class);
    }

    #[test]
    fn addition_is_entrywise((s, t) in parallel()) {
        let sum = span_matrix(&add_spans(&s, &t).unwrap());
        let expected: Vec<u64> = span_matrix(&s).entries().iter().zip(span_matrix(&t).entries()).map(|(a, b)| a + b).collect();
        prop_assert_eq!(sum.entries(), expected.as_slice());
    }

    #[test]
    fn tensor_is_block_diagonal((s, t) in composable()) {
        let class = span_matrix(&tensor_spans(&s, &t));
        prop_assert_eq!(class, span_matrix(&s).block_diag(&span_matrix(&t)));
    }

    #[test]
    fn identity_spans_are_units((s, _) in composable()) {
        let c = span_matrix(&s);
        prop_assert_eq!(span_matrix(&compose_spans(&identity_span(s.source()), &s).unwrap()), c.clone());
        prop_assert_eq!(span_matrix(&compose_spans(&s, &identity_span(s.target())).unwrap()), c);
    }
}

#[test]
fn span_to_matrix_is_bijective_and_functorial() {
    // objects ≤ 3, entries ≤ 3
    for x in 0..=3 {
        for y in 0..=3 {
            let classes = SpanClass::enumerate(x, y, 3);
            let matrices: std::collections::BTreeSet<Vec<i64>> =
                classes.iter().map(|c| SemiringMatrix::from_span_class(c).entries().to_vec()).collect();
            assert_eq!(matrices.len(), classes.len());
            assert_eq!(classes.len() as u64, 4u64.pow((x * y) as u32));
        }
    }
    for a in SpanClass::enumerate(2, 2, 2) {
        for b in SpanClass::enumerate(2, 1, 2) {
            let composite = SemiringMatrix::from_span_class(&a.then(&b).unwrap());
            let product = mat_mul(&SemiringMatrix::from_span_class(&b), &SemiringMatrix::from_span_class(&a)).unwrap();
            assert_eq!(composite, product);
        }
    }
}

#[test]
fn biproduct_identities() {
    for (x, y) in [(1, 2), (2, 2), (0, 3)] {
        let (p1, p2) = (projection(x, y, true), projection(x, y, false));
        let (i1, i2) = (injection(x, y, true), injection(x, y, false));
        assert_eq!(i1.then(&p1).unwrap(), SpanClass::identity(x));
        assert_eq!(i2.then(&p2).unwrap(), SpanClass::identity(y));
        assert_eq!(i1.then(&p2).unwrap(), SpanClass::zero(x, y));
        let sum = p1.then(&i1).unwrap().add(&p2.then(&i2).unwrap()).unwrap();
        assert_eq!(sum, SpanClass::identity(x + y));
    }
}
