//! Spans of finite sets up to isomorphism of the middle, composed by
//! pullback.
//!
//! A span `X <- T -> Y` is read as a morphism `X -> Y`. Its class is the
//! `|Y| × |X|` matrix of fiber counts, and `compose_spans(s, t)` (apply `s`
//! first) has class `M(t) · M(s)`. That ordering is used throughout the
//! crate.

use std::fmt;

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finset::{self, FinMap, FinSet};

/// A span `source <- middle -> target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Span {
    left: FinMap,
    right: FinMap,
}

impl Span {
    pub fn new(left: FinMap, right: FinMap) -> Result<Self> {
        if left.dom().size() != right.dom().size() {
            return Err(Error::InvalidMap(format!(
                "span legs have middles of size {} and {}",
                left.dom().size(),
                right.dom().size()
            )));
        }
        Ok(Span { left, right })
    }

    pub fn left(&self) -> &FinMap {
        &self.left
    }

    pub fn right(&self) -> &FinMap {
        &self.right
    }

    pub fn source(&self) -> &FinSet {
        self.left.cod()
    }

    pub fn target(&self) -> &FinSet {
        self.right.cod()
    }

    pub fn middle(&self) -> &FinSet {
        self.left.dom()
    }
}

/// Isomorphism class of a span, as the matrix of fiber counts. Entry
/// `(y, x)` counts middle elements over the pair `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanClass {
    source: usize,
    target: usize,
    entries: Vec<u64>,
}

impl SpanClass {
    /// Build from row-major entries: `target` rows of `source` columns.
    pub fn new(source: usize, target: usize, entries: Vec<u64>) -> Result<Self> {
        if entries.len() != source * target {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {target}×{source} matrix",
                entries.len()
            )));
        }
        Ok(SpanClass { source, target, entries })
    }

    /// Build from rows. `source` is needed because a matrix with no rows
    /// does not record its width.
    pub fn from_rows(source: usize, rows: &[Vec<u64>]) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != source) {
            return Err(Error::DimensionMismatch(format!(
                "row of length {} in a matrix with {source} columns",
                r.len()
            )));
        }
        SpanClass::new(source, rows.len(), rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        SpanClass { source: n, target: n, entries }
    }

    pub fn zero(source: usize, target: usize) -> Self {
        SpanClass { source, target, entries: vec![0; source * target] }
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn get(&self, y: usize, x: usize) -> u64 {
        self.entries[y * self.source + x]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        (0..self.target)
            .map(|y| self.entries[y * self.source..(y + 1) * self.source].to_vec())
            .collect()
    }

    /// Middle cardinality of any representative.
    pub fn total(&self) -> u64 {
        self.entries.iter().sum()
    }

    /// Class of `self` followed by `next`, i.e. the matrix `next · self`.
    pub fn then(&self, next: &SpanClass) -> Result<SpanClass> {
        if self.target != next.source {
            return Err(Error::CompositionMismatch { left: self.target, right: next.source });
        }
        let (m, k, n) = (self.source, self.target, next.target);
        let mut entries = vec![0; m * n];
        for z in 0..n {
            for y in 0..k {
                let b = next.entries[z * k + y];
                if b == 0 {
                    continue;
                }
                for x in 0..m {
                    entries[z * m + x] += b * self.entries[y * m + x];
                }
            }
        }
        Ok(SpanClass { source: m, target: n, entries })
    }

    pub fn add(&self, other: &SpanClass) -> Result<SpanClass> {
        if (self.source, self.target) != (other.source, other.target) {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}×{} and {}×{} span classes",
                self.target, self.source, other.target, other.source
            )));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(SpanClass { source: self.source, target: self.target, entries })
    }

    /// Block-diagonal sum, the class of `tensor_spans`.
    pub fn block_diag(&self, other: &SpanClass) -> SpanClass {
        let source = self.source + other.source;
        let target = self.target + other.target;
        let mut entries = vec![0; source * target];
        for y in 0..self.target {
            for x in 0..self.source {
                entries[y * source + x] = self.get(y, x);
            }
        }
        for y in 0..other.target {
            for x in 0..other.source {
                entries[(self.target + y) * source + self.source + x] = other.get(y, x);
            }
        }
        SpanClass { source, target, entries }
    }

    /// Every class `source -> target` with entries at most `max_entry`, in
    /// lexicographic order of the row-major entries.
    pub fn enumerate(source: usize, target: usize, max_entry: u64) -> Vec<SpanClass> {
        let len = source * target;
        let mut out = Vec::new();
        let mut entries = vec![0u64; len];
        loop {
            out.push(SpanClass { source, target, entries: entries.clone() });
            let mut i = len;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if entries[i] < max_entry {
                    entries[i] += 1;
                    break;
                }
                entries[i] = 0;
            }
        }
    }
}

impl Serialize for SpanClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.target))?;
        for row in self.rows() {
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl fmt::Display for SpanClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{} {:?}", self.source, self.target, self.rows())
    }
}

/// `s` then `t`; the middle is the pullback of `s.right` and `t.left`.
pub fn compose_spans(s: &Span, t: &Span) -> Result<Span> {
    if s.target().size() != t.source().size() {
        return Err(Error::CompositionMismatch {
            left: s.target().size(),
            right: t.source().size(),
        });
    }
    let (_, p, q) = finset::pullback(&s.right, &t.left)?;
    let left = finset::compose_maps(&p, &s.left)?;
    let right = finset::compose_maps(&q, &t.right)?;
    Span::new(left, right)
}

pub fn identity_span(x: &FinSet) -> Span {
    let id = FinMap::identity(x);
    Span { left: id.clone(), right: id }
}

/// The span with empty middle, the unit of `add_spans`.
pub fn zero_span(x: &FinSet, y: &FinSet) -> Span {
    Span { left: FinMap::empty(x), right: FinMap::empty(y) }
}

/// Hom-monoid addition: disjoint union of middles.
pub fn add_spans(s: &Span, t: &Span) -> Result<Span> {
    if s.source().size() != t.source().size() || s.target().size() != t.target().size() {
        return Err(Error::DimensionMismatch(format!(
            "cannot add spans {}->{} and {}->{}",
            s.source().size(),
            s.target().size(),
            t.source().size(),
            t.target().size()
        )));
    }
    Span::new(finset::copairing(&s.left, &t.left)?, finset::copairing(&s.right, &t.right)?)
}

/// `s ⊔ t : X ⊔ X' -> Y ⊔ Y'`, the cartesian product of span morphisms.
pub fn tensor_spans(s: &Span, t: &Span) -> Span {
    Span {
        left: finset::coproduct_maps(&s.left, &t.left),
        right: finset::coproduct_maps(&s.right, &t.right),
    }
}

pub fn span_matrix(s: &Span) -> SpanClass {
    let (m, n) = (s.source().size(), s.target().size());
    let mut entries = vec![0; m * n];
    for t in s.middle().elements() {
        entries[s.right.apply(t) * m + s.left.apply(t)] += 1;
    }
    SpanClass { source: m, target: n, entries }
}

/// Canonical representative: middle ordered by (column, row, copy).
pub fn matrix_span(c: &SpanClass) -> Span {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for x in 0..c.source {
        for y in 0..c.target {
            for _ in 0..c.get(y, x) {
                left.push(x);
                right.push(y);
            }
        }
    }
    let middle = FinSet::new(left.len());
    Span {
        left: FinMap::new(middle.clone(), FinSet::new(c.source), left).expect("legs in range"),
        right: FinMap::new(middle, FinSet::new(c.target), right).expect("legs in range"),
    }
}

/// Projection `X ⊔ Y -> X` (`first`) or `X ⊔ Y -> Y` as a span class.
pub fn projection(x: usize, y: usize, first: bool) -> SpanClass {
    let (n, offset) = if first { (x, 0) } else { (y, x) };
    let mut c = SpanClass::zero(x + y, n);
    for i in 0..n {
        c.entries[i * (x + y) + offset + i] = 1;
    }
    c
}

/// Injection `X -> X ⊔ Y` (`first`) or `Y -> X ⊔ Y` as a span class.
pub fn injection(x: usize, y: usize, first: bool) -> SpanClass {
    let (n, offset) = if first { (x, 0) } else { (y, x) };
    let mut c = SpanClass::zero(n, x + y);
    for i in 0..n {
        c.entries[(offset + i) * n + i] = 1;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(source: usize, target: usize, left: &[usize], right: &[usize]) -> Span {
        Span::new(
            FinMap::from_table(source, left.to_vec()).unwrap(),
            FinMap::from_table(target, right.to_vec()).unwrap(),
        )
        .unwrap()
    }

    fn class(source: usize, rows: &[&[u64]]) -> SpanClass {
        SpanClass::from_rows(source, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let s = span(2, 3, &[0, 1, 1], &[2, 0, 0]);
        let left = compose_spans(&identity_span(&FinSet::new(2)), &s).unwrap();
        let right = compose_spans(&s, &identity_span(&FinSet::new(3))).unwrap();
        assert_eq!(span_matrix(&left), span_matrix(&s));
        assert_eq!(span_matrix(&right), span_matrix(&s));
    }

    #[test]
    fn identity_classes() {
        assert_eq!(span_matrix(&identity_span(&FinSet::new(1))), class(1, &[&[1]]));
        assert_eq!(span_matrix(&identity_span(&FinSet::new(3))), SpanClass::identity(3));
        let empty = span_matrix(&identity_span(&FinSet::new(0)));
        assert_eq!((empty.source(), empty.target()), (0, 0));
        assert!(empty.entries().is_empty());
    }

    #[test]
    fn doubling_span_squares_to_four() {
        let s = span(1, 1, &[0, 0], &[0, 0]);
        let c = compose_spans(&s, &s).unwrap();
        assert_eq!(c.middle().size(), 4);
        assert_eq!(span_matrix(&c), class(1, &[&[4]]));
    }

    #[test]
    fn fold_then_split() {
        // 2 <- 2 -> 1 with the fold leg, then 1 <- 3 -> 2 hitting (0, 0, 1).
        let s = span(2, 1, &[0, 1], &[0, 0]);
        let t = span(1, 2, &[0, 0, 0], &[0, 0, 1]);
        assert_eq!(span_matrix(&s), class(2, &[&[1, 1]]));
        assert_eq!(span_matrix(&t), class(1, &[&[2], &[1]]));
        let c = compose_spans(&s, &t).unwrap();
        assert_eq!(span_matrix(&c), class(2, &[&[2, 2], &[1, 1]]));
    }

    #[test]
    fn composition_mismatch() {
        let s = span(1, 2, &[0], &[1]);
        let t = span(3, 1, &[2], &[0]);
        assert!(matches!(compose_spans(&s, &t), Err(Error::CompositionMismatch { .. })));
    }

    #[test]
    fn addition() {
        let s = matrix_span(&class(2, &[&[1, 1]]));
        let t = matrix_span(&class(2, &[&[2, 0]]));
        let z = zero_span(&FinSet::new(2), &FinSet::new(1));
        assert_eq!(span_matrix(&add_spans(&s, &z).unwrap()), span_matrix(&s));
        assert_eq!(span_matrix(&add_spans(&s, &t).unwrap()), class(2, &[&[3, 1]]));
        assert_eq!(
            span_matrix(&add_spans(&s, &t).unwrap()),
            span_matrix(&add_spans(&t, &s).unwrap())
        );
        let u = matrix_span(&class(1, &[&[1]]));
        assert!(add_spans(&s, &u).is_err());
    }

    #[test]
    fn tensor_is_block_diagonal() {
        let a = matrix_span(&class(1, &[&[2]]));
        let b = matrix_span(&class(1, &[&[3]]));
        assert_eq!(span_matrix(&tensor_spans(&a, &b)), class(2, &[&[2, 0], &[0, 3]]));
        let unit = identity_span(&FinSet::new(0));
        assert_eq!(span_matrix(&tensor_spans(&a, &unit)), span_matrix(&a));
        assert_eq!(span_matrix(&tensor_spans(&unit, &b)), span_matrix(&b));
    }

    #[test]
    fn generating_spans() {
        // unit 0 <- 0 -> 1 and multiplication 2 <- 2 -> 1
        let unit = span(0, 1, &[], &[]);
        let c = span_matrix(&unit);
        assert_eq!((c.source(), c.target()), (0, 1));
        assert!(c.entries().is_empty());
        assert_eq!(serde_json::to_string(&c).unwrap(), "[[]]");
        let mul = span(2, 1, &[0, 1], &[0, 0]);
        assert_eq!(span_matrix(&mul), class(2, &[&[1, 1]]));
    }

    #[test]
    fn canonical_representative() {
        assert_eq!(matrix_span(&class(1, &[&[1]])), identity_span(&FinSet::new(1)));
        let s = matrix_span(&class(2, &[&[2, 2], &[1, 1]]));
        assert_eq!(s.middle().size(), 6);
        assert_eq!(s.left().table(), &[0, 0, 0, 1, 1, 1]);
        assert_eq!(s.right().table(), &[0, 0, 1, 0, 0, 1]);
    }

    #[test]
    fn serializes_as_rows() {
        let c = class(2, &[&[2, 2], &[1, 1]]);
        assert_eq!(serde_json::to_string(&c).unwrap(), "[[2,2],[1,1]]");
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(SpanClass::enumerate(2, 2, 2).len(), 81);
        assert_eq!(SpanClass::enumerate(0, 3, 5).len(), 1);
    }

    #[test]
    fn biproduct_identities() {
        for x in 0..3 {
            for y in 0..3 {
                let p1 = projection(x, y, true);
                let p2 = projection(x, y, false);
                let i1 = injection(x, y, true);
                let i2 = injection(x, y, false);
                assert_eq!(i1.then(&p1).unwrap(), SpanClass::identity(x));
                assert_eq!(i2.then(&p2).unwrap(), SpanClass::identity(y));
                assert_eq!(i1.then(&p2).unwrap(), SpanClass::zero(x, y));
                assert_eq!(i2.then(&p1).unwrap(), SpanClass::zero(y, x));
                let sum = p1.then(&i1).unwrap().add(&p2.then(&i2).unwrap()).unwrap();
                assert_eq!(sum, SpanClass::identity(x + y));
            }
        }
    }
}
