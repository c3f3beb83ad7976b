//! Exact semirings and the matrix categories over them.
//!
//! Objects of the matrix category over `R` are naturals, a morphism
//! `m -> n` is an `n × m` matrix, and composition is matrix product. As in
//! the span dictionary, `mat_mul(b, a)` is "apply `a`, then `b`".

use std::fmt;

use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spancat::{self, SpanClass};

/// Infinity of the min-plus semiring.
pub const TROPICAL_INF: i64 = i64::MAX;

/// Semiring given by finite operation tables over `0..size`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteSemiring {
    pub name: String,
    pub size: usize,
    /// Row-major `size × size` addition table.
    pub add: Vec<usize>,
    /// Row-major `size × size` multiplication table.
    pub mul: Vec<usize>,
    pub zero: usize,
    pub one: usize,
}

impl FiniteSemiring {
    /// Validates every semiring axiom exhaustively.
    pub fn new(
        name: impl Into<String>,
        size: usize,
        add: Vec<usize>,
        mul: Vec<usize>,
        zero: usize,
        one: usize,
    ) -> Result<Self> {
        let s = FiniteSemiring { name: name.into(), size, add, mul, zero, one };
        s.check_axioms()?;
        Ok(s)
    }

    fn a(&self, x: usize, y: usize) -> usize {
        self.add[x * self.size + y]
    }

    fn m(&self, x: usize, y: usize) -> usize {
        self.mul[x * self.size + y]
    }

    pub fn check_axioms(&self) -> Result<()> {
        let n = self.size;
        let fail = |msg: String| Err(Error::AxiomFailure(msg));
        if self.add.len() != n * n || self.mul.len() != n * n {
            return fail(format!("tables must have {} entries", n * n));
        }
        if self.add.iter().chain(&self.mul).any(|&v| v >= n) || self.zero >= n || self.one >= n {
            return fail("table entry outside the carrier".into());
        }
        for x in 0..n {
            if self.a(self.zero, x) != x {
                return fail(format!("0 + {x} != {x}"));
            }
            if self.m(self.one, x) != x || self.m(x, self.one) != x {
                return fail(format!("1 is not a two-sided unit at {x}"));
            }
            if self.m(self.zero, x) != self.zero || self.m(x, self.zero) != self.zero {
                return fail(format!("0 does not annihilate {x}"));
            }
            for y in 0..n {
                if self.a(x, y) != self.a(y, x) {
                    return fail(format!("{x} + {y} != {y} + {x}"));
                }
                for z in 0..n {
                    if self.a(self.a(x, y), z) != self.a(x, self.a(y, z)) {
                        return fail(format!("addition not associative at ({x}, {y}, {z})"));
                    }
                    if self.m(self.m(x, y), z) != self.m(x, self.m(y, z)) {
                        return fail(format!("multiplication not associative at ({x}, {y}, {z})"));
                    }
                    if self.m(x, self.a(y, z)) != self.a(self.m(x, y), self.m(x, z)) {
                        return fail(format!("left distributivity fails at ({x}, {y}, {z})"));
                    }
                    if self.m(self.a(x, y), z) != self.a(self.m(x, z), self.m(y, z)) {
                        return fail(format!("right distributivity fails at ({x}, {y}, {z})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Brute-force search for a bijection preserving both operations and
    /// both constants.
    pub fn isomorphic(&self, other: &FiniteSemiring) -> bool {
        if self.size != other.size {
            return false;
        }
        let n = self.size;
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            let ok = perm[self.zero] == other.zero
                && perm[self.one] == other.one
                && (0..n).all(|x| {
                    (0..n).all(|y| {
                        perm[self.a(x, y)] == other.a(perm[x], perm[y])
                            && perm[self.m(x, y)] == other.m(perm[x], perm[y])
                    })
                });
            if ok {
                return true;
            }
            if !next_permutation(&mut perm) {
                return false;
            }
        }
    }
}

pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// The built-in exact semirings plus arbitrary finite tables. Elements are
/// `i64`; the min-plus semiring uses [`TROPICAL_INF`] for infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Semiring {
    Naturals,
    Integers,
    /// `Z/k` with `k ≥ 1`.
    ZMod(u32),
    Boolean,
    /// Min-plus over `N ∪ {∞}`.
    Tropical,
    Finite(FiniteSemiring),
}

impl Semiring {
    /// Parses `nat`, `int`, `bool`, `tropical` or `z<k>`.
    pub fn from_name(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        match lower.as_str() {
            "nat" | "n" | "naturals" => Ok(Semiring::Naturals),
            "int" | "z" | "integers" => Ok(Semiring::Integers),
            "bool" | "boolean" | "b" => Ok(Semiring::Boolean),
            "tropical" | "minplus" | "min-plus" => Ok(Semiring::Tropical),
            _ => {
                let digits = lower.strip_prefix("z/").or_else(|| lower.strip_prefix('z'));
                match digits.and_then(|d| d.parse::<u32>().ok()) {
                    Some(k) if k >= 1 => Ok(Semiring::ZMod(k)),
                    _ => Err(Error::Configuration(format!("unknown semiring `{name}`"))),
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Semiring::Naturals => "nat".into(),
            Semiring::Integers => "int".into(),
            Semiring::ZMod(k) => format!("z{k}"),
            Semiring::Boolean => "bool".into(),
            Semiring::Tropical => "tropical".into(),
            Semiring::Finite(f) => f.name.clone(),
        }
    }

    /// The finite built-ins, used for exhaustive sweeps.
    pub fn finite_builtins() -> Vec<Semiring> {
        vec![Semiring::Boolean, Semiring::ZMod(2), Semiring::ZMod(3), Semiring::ZMod(4)]
    }

    pub fn zero(&self) -> i64 {
        match self {
            Semiring::Tropical => TROPICAL_INF,
            Semiring::Finite(f) => f.zero as i64,
            _ => 0,
        }
    }

    pub fn one(&self) -> i64 {
        match self {
            Semiring::Tropical => 0,
            Semiring::Finite(f) => f.one as i64,
            _ => 1,
        }
    }

    pub fn add(&self, a: i64, b: i64) -> i64 {
        match self {
            Semiring::Naturals | Semiring::Integers => a + b,
            Semiring::ZMod(k) => (a + b) % i64::from(*k),
            Semiring::Boolean => a | b,
            Semiring::Tropical => a.min(b),
            Semiring::Finite(f) => f.a(a as usize, b as usize) as i64,
        }
    }

    pub fn mul(&self, a: i64, b: i64) -> i64 {
        match self {
            Semiring::Naturals | Semiring::Integers => a * b,
            Semiring::ZMod(k) => (a * b) % i64::from(*k),
            Semiring::Boolean => a & b,
            Semiring::Tropical => {
                if a == TROPICAL_INF || b == TROPICAL_INF {
                    TROPICAL_INF
                } else {
                    a + b
                }
            }
            Semiring::Finite(f) => f.m(a as usize, b as usize) as i64,
        }
    }

    /// Additive inverse where one exists.
    pub fn negate(&self, a: i64) -> Option<i64> {
        match self {
            Semiring::Integers => Some(-a),
            Semiring::ZMod(k) => Some((i64::from(*k) - a) % i64::from(*k)),
            Semiring::Naturals | Semiring::Tropical if a == self.zero() => Some(a),
            Semiring::Boolean if a == 0 => Some(0),
            Semiring::Finite(f) => {
                (0..f.size).find(|&b| f.a(a as usize, b) == f.zero).map(|b| b as i64)
            }
            _ => None,
        }
    }

    pub fn contains(&self, a: i64) -> bool {
        match self {
            Semiring::Naturals => a >= 0,
            Semiring::Integers => true,
            Semiring::ZMod(k) => (0..i64::from(*k)).contains(&a),
            Semiring::Boolean => a == 0 || a == 1,
            Semiring::Tropical => a >= 0,
            Semiring::Finite(f) => (0..f.size as i64).contains(&a),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Semiring::ZMod(_) | Semiring::Boolean | Semiring::Finite(_))
    }

    /// All elements of a finite semiring, `None` otherwise.
    pub fn elements(&self) -> Option<Vec<i64>> {
        match self {
            Semiring::ZMod(k) => Some((0..i64::from(*k)).collect()),
            Semiring::Boolean => Some(vec![0, 1]),
            Semiring::Finite(f) => Some((0..f.size as i64).collect()),
            _ => None,
        }
    }

    /// All elements when finite; otherwise the representatives with
    /// magnitude at most `bound` (plus infinity for min-plus).
    pub fn sample_elements(&self, bound: i64) -> Vec<i64> {
        if let Some(all) = self.elements() {
            return all;
        }
        match self {
            Semiring::Integers => (-bound..=bound).collect(),
            Semiring::Tropical => (0..=bound).chain([TROPICAL_INF]).collect(),
            _ => (0..=bound).collect(),
        }
    }

    /// Table form of a finite semiring.
    pub fn to_finite(&self) -> Option<FiniteSemiring> {
        if let Semiring::Finite(f) = self {
            return Some(f.clone());
        }
        let elems = self.elements()?;
        let n = elems.len();
        let mut add = Vec::with_capacity(n * n);
        let mut mul = Vec::with_capacity(n * n);
        for &a in &elems {
            for &b in &elems {
                add.push(self.add(a, b) as usize);
                mul.push(self.mul(a, b) as usize);
            }
        }
        Some(FiniteSemiring {
            name: self.name(),
            size: n,
            add,
            mul,
            zero: self.zero() as usize,
            one: self.one() as usize,
        })
    }

    fn fmt_elem(&self, a: i64) -> String {
        if matches!(self, Semiring::Tropical) && a == TROPICAL_INF {
            "inf".into()
        } else {
            a.to_string()
        }
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// A matrix over a semiring, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SemiringMatrix {
    semiring: Semiring,
    rows: usize,
    cols: usize,
    entries: Vec<i64>,
}

impl SemiringMatrix {
    pub fn new(semiring: Semiring, rows: usize, cols: usize, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}×{cols} matrix",
                entries.len()
            )));
        }
        if let Some(&bad) = entries.iter().find(|&&e| !semiring.contains(e)) {
            return Err(Error::DimensionMismatch(format!("{bad} is not an element of {semiring}")));
        }
        Ok(SemiringMatrix { semiring, rows, cols, entries })
    }

    pub fn from_rows(semiring: Semiring, cols: usize, rows: &[Vec<i64>]) -> Result<Self> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!("ragged rows for {cols} columns")));
        }
        SemiringMatrix::new(semiring, rows.len(), cols, rows.concat())
    }

    pub fn identity(semiring: &Semiring, n: usize) -> Self {
        let mut entries = vec![semiring.zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = semiring.one();
        }
        SemiringMatrix { semiring: semiring.clone(), rows: n, cols: n, entries }
    }

    pub fn zero(semiring: &Semiring, rows: usize, cols: usize) -> Self {
        SemiringMatrix {
            semiring: semiring.clone(),
            rows,
            cols,
            entries: vec![semiring.zero(); rows * cols],
        }
    }

    /// 1×1 matrix.
    pub fn scalar(semiring: &Semiring, a: i64) -> Self {
        SemiringMatrix { semiring: semiring.clone(), rows: 1, cols: 1, entries: vec![a] }
    }

    /// Matrix over the naturals with the same entries as a span class.
    pub fn from_span_class(c: &SpanClass) -> Self {
        SemiringMatrix {
            semiring: Semiring::Naturals,
            rows: c.target(),
            cols: c.source(),
            entries: c.entries().iter().map(|&e| e as i64).collect(),
        }
    }

    /// Inverse of [`SemiringMatrix::from_span_class`], for matrices over the naturals.
    pub fn to_span_class(&self) -> Option<SpanClass> {
        if self.semiring != Semiring::Naturals {
            return None;
        }
        SpanClass::new(self.cols, self.rows, self.entries.iter().map(|&e| e as u64).collect()).ok()
    }

    /// Permutation matrix of `σ : 0..n -> 0..n`, sending basis vector `i`
    /// to basis vector `σ(i)`.
    pub fn permutation(semiring: &Semiring, sigma: &[usize]) -> Self {
        let n = sigma.len();
        let mut m = SemiringMatrix::zero(semiring, n, n);
        for (i, &j) in sigma.iter().enumerate() {
            m.entries[j * n + i] = semiring.one();
        }
        m
    }

    /// The swap `m ⊗ n -> n ⊗ m`, `(i, j) ↦ (j, i)`.
    pub fn commutation(semiring: &Semiring, m: usize, n: usize) -> Self {
        let sigma: Vec<usize> = (0..m * n).map(|k| (k % n) * m + k / n).collect();
        SemiringMatrix::permutation(semiring, &sigma)
    }

    pub fn semiring(&self) -> &Semiring {
        &self.semiring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.entries[r * self.cols + c]
    }

    pub fn row_vecs(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|r| self.entries[r * self.cols..(r + 1) * self.cols].to_vec()).collect()
    }

    /// All `rows × cols` matrices whose entries are drawn from `elems`, in
    /// lexicographic order.
    pub fn enumerate(semiring: &Semiring, rows: usize, cols: usize, elems: &[i64]) -> Vec<Self> {
        let len = rows * cols;
        let mut idx = vec![0usize; len];
        let mut out = Vec::new();
        if elems.is_empty() && len > 0 {
            return out;
        }
        loop {
            out.push(SemiringMatrix {
                semiring: semiring.clone(),
                rows,
                cols,
                entries: idx.iter().map(|&i| elems[i]).collect(),
            });
            let mut k = len;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if idx[k] + 1 < elems.len() {
                    idx[k] += 1;
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

impl Serialize for SemiringMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<serde_json::Value>> = self
            .row_vecs()
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|a| {
                        if matches!(self.semiring, Semiring::Tropical) && a == TROPICAL_INF {
                            serde_json::Value::from("inf")
                        } else {
                            serde_json::Value::from(a)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut st = serializer.serialize_struct("SemiringMatrix", 4)?;
        st.serialize_field("semiring", &self.semiring.name())?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        st.serialize_field("entries", &rows)?;
        st.end()
    }
}

impl fmt::Display for SemiringMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ", ")?;
            }
            let row: Vec<String> =
                (0..self.cols).map(|c| self.semiring.fmt_elem(self.get(r, c))).collect();
            write!(f, "[{}]", row.join(", "))?;
        }
        write!(f, "] over {}", self.semiring)
    }
}

fn same_semiring(a: &SemiringMatrix, b: &SemiringMatrix) -> Result<()> {
    if a.semiring != b.semiring {
        return Err(Error::SemiringMismatch { left: a.semiring.name(), right: b.semiring.name() });
    }
    Ok(())
}

/// Standard product `a · b`; requires `a.cols == b.rows`.
pub fn mat_mul(a: &SemiringMatrix, b: &SemiringMatrix) -> Result<SemiringMatrix> {
    same_semiring(a, b)?;
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}×{} by {}×{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let r = &a.semiring;
    let mut entries = Vec::with_capacity(a.rows * b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut acc = r.zero();
            for k in 0..a.cols {
                acc = r.add(acc, r.mul(a.get(i, k), b.get(k, j)));
            }
            entries.push(acc);
        }
    }
    Ok(SemiringMatrix { semiring: r.clone(), rows: a.rows, cols: b.cols, entries })
}

pub fn mat_add(a: &SemiringMatrix, b: &SemiringMatrix) -> Result<SemiringMatrix> {
    same_semiring(a, b)?;
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(Error::DimensionMismatch(format!(
            "cannot add {}×{} and {}×{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let r = &a.semiring;
    let entries = a.entries.iter().zip(&b.entries).map(|(&x, &y)| r.add(x, y)).collect();
    Ok(SemiringMatrix { semiring: r.clone(), rows: a.rows, cols: a.cols, entries })
}

/// `a - b`, defined when every entry of `b` has an additive inverse.
pub fn mat_sub(a: &SemiringMatrix, b: &SemiringMatrix) -> Result<SemiringMatrix> {
    same_semiring(a, b)?;
    let negated: Option<Vec<i64>> = b.entries.iter().map(|&e| b.semiring.negate(e)).collect();
    let negated = negated.ok_or_else(|| {
        Error::AxiomFailure(format!("{} has no additive inverses", b.semiring))
    })?;
    mat_add(a, &SemiringMatrix { entries: negated, ..b.clone() })
}

/// Kronecker product; row `(i, k)` and column `(j, l)` sit at
/// `i * b.rows + k` and `j * b.cols + l`.
pub fn kron(a: &SemiringMatrix, b: &SemiringMatrix) -> Result<SemiringMatrix> {
    same_semiring(a, b)?;
    let r = &a.semiring;
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut entries = vec![r.zero(); rows * cols];
    for i in 0..a.rows {
        for j in 0..a.cols {
            for k in 0..b.rows {
                for l in 0..b.cols {
                    entries[(i * b.rows + k) * cols + j * b.cols + l] =
                        r.mul(a.get(i, j), b.get(k, l));
                }
            }
        }
    }
    Ok(SemiringMatrix { semiring: r.clone(), rows, cols, entries })
}

/// The category whose endomorphisms of the unit object are extracted.
#[derive(Debug, Clone)]
pub enum UnitCategory {
    /// Span classes; infinite hom-sets are sampled on middles of size
    /// `0..=representatives`.
    SpanClasses { representatives: u64 },
    /// Matrices over a semiring; infinite carriers are sampled with
    /// magnitude at most `representatives`.
    Matrices { semiring: Semiring, representatives: i64 },
}

fn check_sampled_semiring<T: Clone + PartialEq + fmt::Debug>(
    elems: &[T],
    zero: &T,
    one: &T,
    add: impl Fn(&T, &T) -> Result<T>,
    mul: impl Fn(&T, &T) -> Result<T>,
) -> Result<()> {
    let fail = |msg: String| Err(Error::AxiomFailure(msg));
    for x in elems {
        if add(zero, x)? != *x {
            return fail(format!("0 + {x:?} != {x:?}"));
        }
        if mul(one, x)? != *x || mul(x, one)? != *x {
            return fail(format!("1 is not a unit at {x:?}"));
        }
        if mul(zero, x)? != *zero || mul(x, zero)? != *zero {
            return fail(format!("0 does not annihilate {x:?}"));
        }
        for y in elems {
            if add(x, y)? != add(y, x)? {
                return fail(format!("addition not commutative at {x:?}, {y:?}"));
            }
            for z in elems {
                if add(&add(x, y)?, z)? != add(x, &add(y, z)?)? {
                    return fail(format!("addition not associative at {x:?}, {y:?}, {z:?}"));
                }
                if mul(&mul(x, y)?, z)? != mul(x, &mul(y, z)?)? {
                    return fail(format!("multiplication not associative at {x:?}, {y:?}, {z:?}"));
                }
                if mul(x, &add(y, z)?)? != add(&mul(x, y)?, &mul(x, z)?)? {
                    return fail(format!("left distributivity fails at {x:?}, {y:?}, {z:?}"));
                }
                if mul(&add(x, y)?, z)? != add(&mul(x, z)?, &mul(y, z)?)? {
                    return fail(format!("right distributivity fails at {x:?}, {y:?}, {z:?}"));
                }
            }
        }
    }
    Ok(())
}

/// `End(1)` with hom-monoid addition and composition as multiplication.
///
/// For span classes the result is identified with the naturals by
/// `[[k]] ↦ k`, and that identification is checked on the sample. For a
/// finite matrix category the tables are read off the 1×1 matrices.
pub fn end_of_unit(cat: &UnitCategory) -> Result<Semiring> {
    match cat {
        UnitCategory::SpanClasses { representatives } => {
            let elems: Vec<SpanClass> = (0..=*representatives)
                .map(|k| SpanClass::new(1, 1, vec![k]).expect("1×1"))
                .collect();
            let add = |x: &SpanClass, y: &SpanClass| {
                let s = spancat::add_spans(&spancat::matrix_span(x), &spancat::matrix_span(y))?;
                Ok(spancat::span_matrix(&s))
            };
            let mul = |x: &SpanClass, y: &SpanClass| {
                let s =
                    spancat::compose_spans(&spancat::matrix_span(y), &spancat::matrix_span(x))?;
                Ok(spancat::span_matrix(&s))
            };
            check_sampled_semiring(&elems, &elems[0], &SpanClass::identity(1), add, mul)?;
            let n = Semiring::Naturals;
            for x in &elems {
                for y in &elems {
                    let (a, b) = (x.get(0, 0) as i64, y.get(0, 0) as i64);
                    if add(x, y)?.get(0, 0) as i64 != n.add(a, b)
                        || mul(x, y)?.get(0, 0) as i64 != n.mul(a, b)
                    {
                        return Err(Error::AxiomFailure(format!(
                            "span classes {a} and {b} do not behave like naturals"
                        )));
                    }
                }
            }
            Ok(Semiring::Naturals)
        }
        UnitCategory::Matrices { semiring, representatives } => {
            let elems: Vec<SemiringMatrix> = semiring
                .sample_elements(*representatives)
                .into_iter()
                .map(|a| SemiringMatrix::scalar(semiring, a))
                .collect();
            let zero = SemiringMatrix::scalar(semiring, semiring.zero());
            let one = SemiringMatrix::identity(semiring, 1);
            if semiring.is_finite() {
                let n = elems.len();
                let index = |m: &SemiringMatrix| m.get(0, 0) as usize;
                let mut add = Vec::with_capacity(n * n);
                let mut mul = Vec::with_capacity(n * n);
                for x in &elems {
                    for y in &elems {
                        add.push(index(&mat_add(x, y)?));
                        mul.push(index(&mat_mul(x, y)?));
                    }
                }
                let name = format!("End(1) of Burn_{}", semiring.name());
                let f = FiniteSemiring::new(name, n, add, mul, index(&zero), index(&one))?;
                Ok(Semiring::Finite(f))
            } else {
                check_sampled_semiring(&elems, &zero, &one, |x, y| mat_add(x, y), |x, y| {
                    mat_mul(x, y)
                })?;
                Ok(semiring.clone())
            }
        }
    }
}

/// Maximum number of matrices per shape checked by `semiadditive_check`.
const HOM_SWEEP_LIMIT: usize = 1 << 18;

/// Biproduct identities and `hom(m, n) ≅ R^{mn}` for all `m, n ≤ max_size`.
/// Infinite semirings use the elements with magnitude at most 2.
pub fn semiadditive_check(r: &Semiring, max_size: usize) -> bool {
    semiadditive_witness(r, max_size).is_ok()
}

/// Like [`semiadditive_check`], reporting the first failing identity.
pub fn semiadditive_witness(r: &Semiring, max_size: usize) -> Result<()> {
    let fail = |msg: String| Err(Error::AxiomFailure(msg));
    let unit = |n: usize, i: usize, column: bool| {
        let mut e = vec![r.zero(); n];
        e[i] = r.one();
        if column {
            SemiringMatrix { semiring: r.clone(), rows: n, cols: 1, entries: e }
        } else {
            SemiringMatrix { semiring: r.clone(), rows: 1, cols: n, entries: e }
        }
    };
    // Binary biproducts m ⊕ n = m + n.
    for m in 0..=max_size {
        for n in 0..=max_size {
            let s = m + n;
            let mut i1 = SemiringMatrix::zero(r, s, m);
            let mut i2 = SemiringMatrix::zero(r, s, n);
            let mut p1 = SemiringMatrix::zero(r, m, s);
            let mut p2 = SemiringMatrix::zero(r, n, s);
            for k in 0..m {
                i1.entries[k * m + k] = r.one();
                p1.entries[k * s + k] = r.one();
            }
            for k in 0..n {
                i2.entries[(m + k) * n + k] = r.one();
                p2.entries[k * s + m + k] = r.one();
            }
            if mat_mul(&p1, &i1)? != SemiringMatrix::identity(r, m)
                || mat_mul(&p2, &i2)? != SemiringMatrix::identity(r, n)
            {
                return fail(format!("p_i ∘ ι_i is not the identity for {m} ⊕ {n}"));
            }
            if mat_mul(&p1, &i2)? != SemiringMatrix::zero(r, m, n)
                || mat_mul(&p2, &i1)? != SemiringMatrix::zero(r, n, m)
            {
                return fail(format!("p_i ∘ ι_j is not zero for {m} ⊕ {n}"));
            }
            let sum = mat_add(&mat_mul(&i1, &p1)?, &mat_mul(&i2, &p2)?)?;
            if sum != SemiringMatrix::identity(r, s) {
                return fail(format!("ι_1 p_1 + ι_2 p_2 is not the identity for {m} ⊕ {n}"));
            }
        }
    }
    // hom(m, n) ≅ R^{mn}: a matrix is recovered from its 1×1 components.
    let elems = r.sample_elements(2);
    for m in 0..=max_size {
        for n in 0..=max_size {
            let mats = SemiringMatrix::enumerate(r, n, m, &elems);
            for a in mats.iter().take(HOM_SWEEP_LIMIT) {
                let mut rebuilt = SemiringMatrix::zero(r, n, m);
                for y in 0..n {
                    for x in 0..m {
                        let component = mat_mul(&mat_mul(&unit(n, y, false), a)?, &unit(m, x, true))?;
                        if component.get(0, 0) != a.get(y, x) {
                            return fail(format!("component ({y}, {x}) of {a} is wrong"));
                        }
                        let term = mat_mul(&mat_mul(&unit(n, y, true), &component)?, &unit(m, x, false))?;
                        rebuilt = mat_add(&rebuilt, &term)?;
                    }
                }
                if rebuilt != *a {
                    return fail(format!("{a} is not the sum of its components"));
                }
            }
        }
    }
    Ok(())
}

/// Entrywise inclusion `N ↪ Z` of a span class.
pub fn group_complete(c: &SpanClass) -> SemiringMatrix {
    SemiringMatrix {
        semiring: Semiring::Integers,
        rows: c.target(),
        cols: c.source(),
        entries: c.entries().iter().map(|&e| e as i64).collect(),
    }
}

/// The virtual span `s - t` as an integer matrix.
pub fn virtual_difference(s: &SpanClass, t: &SpanClass) -> Result<SemiringMatrix> {
    mat_sub(&group_complete(s), &group_complete(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat(cols: usize, rows: &[&[i64]]) -> SemiringMatrix {
        let rows: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        SemiringMatrix::from_rows(Semiring::Naturals, cols, &rows).unwrap()
    }

    #[test]
    fn parse_names() {
        assert_eq!(Semiring::from_name("z3").unwrap(), Semiring::ZMod(3));
        assert_eq!(Semiring::from_name("Z/4").unwrap(), Semiring::ZMod(4));
        assert_eq!(Semiring::from_name("bool").unwrap(), Semiring::Boolean);
        assert!(Semiring::from_name("z0").is_err());
        assert!(Semiring::from_name("reals").is_err());
    }

    #[test]
    fn identity_is_neutral() {
        let a = nat(3, &[&[1, 2, 0], &[0, 1, 5]]);
        assert_eq!(mat_mul(&SemiringMatrix::identity(&Semiring::Naturals, 2), &a).unwrap(), a);
        assert_eq!(mat_mul(&a, &SemiringMatrix::identity(&Semiring::Naturals, 3)).unwrap(), a);
    }

    #[test]
    fn split_after_fold() {
        let b = nat(1, &[&[2], &[1]]);
        let a = nat(2, &[&[1, 1]]);
        assert_eq!(mat_mul(&b, &a).unwrap(), nat(2, &[&[2, 2], &[1, 1]]));
    }

    #[test]
    fn mismatches() {
        let a = nat(2, &[&[1, 1]]);
        assert!(matches!(mat_mul(&a, &a), Err(Error::DimensionMismatch(_))));
        let b = SemiringMatrix::identity(&Semiring::Boolean, 2);
        assert!(matches!(mat_mul(&a, &b), Err(Error::SemiringMismatch { .. })));
        assert!(mat_add(&a, &nat(1, &[&[1]])).is_err());
        assert!(SemiringMatrix::new(Semiring::ZMod(3), 1, 1, vec![3]).is_err());
    }

    #[test]
    fn kron_examples() {
        let a = nat(2, &[&[1, 1]]);
        assert_eq!(kron(&a, &a).unwrap(), nat(4, &[&[1, 1, 1, 1]]));
        let id1 = SemiringMatrix::identity(&Semiring::Naturals, 1);
        let b = nat(2, &[&[1, 2], &[3, 4], &[0, 7]]);
        assert_eq!(kron(&id1, &b).unwrap(), b);
        assert_eq!(kron(&b, &id1).unwrap(), b);
    }

    #[test]
    fn commutation_swaps_factors() {
        let r = Semiring::Naturals;
        let a = nat(2, &[&[1, 2], &[3, 4], &[5, 6]]);
        let b = nat(1, &[&[7], &[8]]);
        let ab = kron(&a, &b).unwrap();
        let ba = kron(&b, &a).unwrap();
        let left = SemiringMatrix::commutation(&r, 3, 2);
        let right = SemiringMatrix::commutation(&r, 1, 2);
        // swap ∘ (a ⊗ b) = (b ⊗ a) ∘ swap
        assert_eq!(mat_mul(&left, &ab).unwrap(), mat_mul(&ba, &right).unwrap());
    }

    #[test]
    fn builtin_tables_are_semirings() {
        for r in Semiring::finite_builtins() {
            r.to_finite().unwrap().check_axioms().unwrap();
        }
    }

    #[test]
    fn z2_end_of_unit() {
        let cat = UnitCategory::Matrices { semiring: Semiring::ZMod(2), representatives: 0 };
        let Semiring::Finite(f) = end_of_unit(&cat).unwrap() else { panic!("finite expected") };
        assert_eq!(f.size, 2);
        assert_eq!(f.add, vec![0, 1, 1, 0]);
        assert_eq!(f.mul, vec![0, 0, 0, 1]);
    }

    #[test]
    fn span_end_of_unit_is_naturals() {
        let cat = UnitCategory::SpanClasses { representatives: 4 };
        assert_eq!(end_of_unit(&cat).unwrap(), Semiring::Naturals);
    }

    #[test]
    fn semiadditive_edge_cases() {
        assert!(semiadditive_check(&Semiring::Boolean, 0));
        let z = SemiringMatrix::zero(&Semiring::Boolean, 0, 3);
        assert_eq!(z.entries().len(), 0);
        let w = SemiringMatrix::zero(&Semiring::Boolean, 3, 0);
        assert_eq!(mat_mul(&w, &z).unwrap(), SemiringMatrix::zero(&Semiring::Boolean, 3, 3));
        assert_eq!(mat_mul(&z, &w).unwrap(), SemiringMatrix::zero(&Semiring::Boolean, 0, 0));
    }

    #[test]
    fn non_semiring_rejected() {
        // "and" for both operations: the additive unit does not annihilate.
        let err = FiniteSemiring::new("bad", 2, vec![0, 0, 0, 1], vec![0, 0, 0, 1], 1, 1);
        assert!(matches!(err, Err(Error::AxiomFailure(_))));
    }

    #[test]
    fn completion_of_identity() {
        let id = group_complete(&SpanClass::identity(3));
        assert_eq!(id, SemiringMatrix::identity(&Semiring::Integers, 3));
    }

    #[test]
    fn tropical_serializes_infinity() {
        let m = SemiringMatrix::zero(&Semiring::Tropical, 1, 1);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"semiring":"tropical","rows":1,"cols":1,"entries":[["inf"]]}"#);
    }
}
