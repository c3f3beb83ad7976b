//! Canonical finite sets `{0, .., n-1}` and the total functions between them.
//!
//! Every construction here fixes a lexicographic element order so that
//! results are reproducible byte for byte.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of candidates a single enumeration may visit.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Upper bound on enumeration work, counted in candidates or search nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    pub fn check(self, needed: u128) -> Result<()> {
        if needed > u128::from(self.0) {
            Err(Error::BudgetExceeded { needed, budget: self.0 })
        } else {
            Ok(())
        }
    }
}

/// `base^exp` without overflow, saturating at `u128::MAX`.
pub(crate) fn checked_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = match acc.checked_mul(base as u128) {
            Some(v) => v,
            None => return u128::MAX,
        };
        if acc == 0 {
            return 0;
        }
    }
    acc
}

/// A finite set with elements `0..size`. The label is for display only and
/// is ignored by equality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinSet {
    size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl PartialEq for FinSet {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
    }
}

impl Eq for FinSet {}

impl std::hash::Hash for FinSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.size.hash(state);
    }
}

impl FinSet {
    pub fn new(size: usize) -> Self {
        FinSet { size, label: None }
    }

    pub fn labeled(size: usize, label: impl Into<String>) -> Self {
        FinSet { size, label: Some(label.into()) }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.size
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "{l}(|{}|)", self.size),
            None => write!(f, "|{}|", self.size),
        }
    }
}

/// A total function `dom -> cod` stored as its table of values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinMap {
    dom: FinSet,
    cod: FinSet,
    table: Vec<usize>,
}

impl FinMap {
    pub fn new(dom: FinSet, cod: FinSet, table: Vec<usize>) -> Result<Self> {
        if table.len() != dom.size {
            return Err(Error::InvalidMap(format!(
                "table has length {} but the domain has size {}",
                table.len(),
                dom.size
            )));
        }
        if let Some((x, &y)) = table.iter().enumerate().find(|(_, &y)| y >= cod.size) {
            return Err(Error::InvalidMap(format!(
                "element {x} maps to {y}, outside a codomain of size {}",
                cod.size
            )));
        }
        Ok(FinMap { dom, cod, table })
    }

    /// Shorthand for `FinMap::new(FinSet::new(table.len()), FinSet::new(cod), table)`.
    pub fn from_table(cod: usize, table: Vec<usize>) -> Result<Self> {
        FinMap::new(FinSet::new(table.len()), FinSet::new(cod), table)
    }

    pub fn identity(set: &FinSet) -> Self {
        FinMap { dom: set.clone(), cod: set.clone(), table: set.elements().collect() }
    }

    /// The unique map out of the empty set.
    pub fn empty(cod: &FinSet) -> Self {
        FinMap { dom: FinSet::new(0), cod: cod.clone(), table: Vec::new() }
    }

    pub fn constant(dom: &FinSet, cod: &FinSet, value: usize) -> Result<Self> {
        FinMap::new(dom.clone(), cod.clone(), vec![value; dom.size])
    }

    pub fn dom(&self) -> &FinSet {
        &self.dom
    }

    pub fn cod(&self) -> &FinSet {
        &self.cod
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    /// Number of elements mapping to each point of the codomain.
    pub fn fiber_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cod.size];
        for &y in &self.table {
            sizes[y] += 1;
        }
        sizes
    }

    pub fn is_injective(&self) -> bool {
        self.fiber_sizes().iter().all(|&n| n <= 1)
    }

    pub fn is_surjective(&self) -> bool {
        self.fiber_sizes().iter().all(|&n| n >= 1)
    }

    pub fn is_bijective(&self) -> bool {
        self.dom.size == self.cod.size && self.is_injective()
    }

    /// Inverse of a bijection.
    pub fn inverse(&self) -> Option<FinMap> {
        if !self.is_bijective() {
            return None;
        }
        let mut table = vec![0; self.cod.size];
        for (x, &y) in self.table.iter().enumerate() {
            table[y] = x;
        }
        Some(FinMap { dom: self.cod.clone(), cod: self.dom.clone(), table })
    }
}

impl fmt::Display for FinMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} {:?}", self.dom, self.cod, self.table)
    }
}

/// `g ∘ f`, i.e. apply `f` first.
pub fn compose_maps(f: &FinMap, g: &FinMap) -> Result<FinMap> {
    if f.cod.size != g.dom.size {
        return Err(Error::CompositionMismatch { left: f.cod.size, right: g.dom.size });
    }
    let table = f.table.iter().map(|&y| g.table[y]).collect();
    Ok(FinMap { dom: f.dom.clone(), cod: g.cod.clone(), table })
}

/// `a × b` with the pair `(i, j)` stored at index `i * |b| + j`.
pub fn product(a: &FinSet, b: &FinSet) -> (FinSet, FinMap, FinMap) {
    let p = FinSet::new(a.size * b.size);
    let mut left = Vec::with_capacity(p.size);
    let mut right = Vec::with_capacity(p.size);
    for i in a.elements() {
        for j in b.elements() {
            left.push(i);
            right.push(j);
        }
    }
    (
        p.clone(),
        FinMap { dom: p.clone(), cod: a.clone(), table: left },
        FinMap { dom: p, cod: b.clone(), table: right },
    )
}

/// The mediating map `x ↦ (f(x), g(x))` into `product(f.cod, g.cod)`.
pub fn pairing(f: &FinMap, g: &FinMap) -> Result<FinMap> {
    if f.dom.size != g.dom.size {
        return Err(Error::CompositionMismatch { left: f.dom.size, right: g.dom.size });
    }
    let cod = FinSet::new(f.cod.size * g.cod.size);
    let table = f.table.iter().zip(&g.table).map(|(&a, &b)| a * g.cod.size + b).collect();
    Ok(FinMap { dom: f.dom.clone(), cod, table })
}

/// `a ⊔ b` with `a` as the first block.
pub fn coproduct(a: &FinSet, b: &FinSet) -> (FinSet, FinMap, FinMap) {
    let s = FinSet::new(a.size + b.size);
    (
        s.clone(),
        FinMap { dom: a.clone(), cod: s.clone(), table: a.elements().collect() },
        FinMap { dom: b.clone(), cod: s, table: b.elements().map(|j| a.size + j).collect() },
    )
}

/// The mediating map `[f, g]` out of `coproduct(f.dom, g.dom)`.
pub fn copairing(f: &FinMap, g: &FinMap) -> Result<FinMap> {
    if f.cod.size != g.cod.size {
        return Err(Error::CompositionMismatch { left: f.cod.size, right: g.cod.size });
    }
    let dom = FinSet::new(f.dom.size + g.dom.size);
    let table = f.table.iter().chain(&g.table).copied().collect();
    Ok(FinMap { dom, cod: f.cod.clone(), table })
}

/// `f ⊔ g : a ⊔ a' -> b ⊔ b'`.
pub fn coproduct_maps(f: &FinMap, g: &FinMap) -> FinMap {
    let shift = f.cod.size;
    let table = f.table.iter().copied().chain(g.table.iter().map(|&y| y + shift)).collect();
    FinMap {
        dom: FinSet::new(f.dom.size + g.dom.size),
        cod: FinSet::new(f.cod.size + g.cod.size),
        table,
    }
}

/// Pullback of the cospan `f: A -> C <- B: g`, as the set of pairs
/// `(a, b)` with `f(a) = g(b)` in lexicographic order.
pub fn pullback(f: &FinMap, g: &FinMap) -> Result<(FinSet, FinMap, FinMap)> {
    if f.cod.size != g.cod.size {
        return Err(Error::PullbackMismatch { left: f.cod.size, right: g.cod.size });
    }
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); g.cod.size];
    for (b, &c) in g.table.iter().enumerate() {
        fibers[c].push(b);
    }
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (a, &c) in f.table.iter().enumerate() {
        for &b in &fibers[c] {
            left.push(a);
            right.push(b);
        }
    }
    let p = FinSet::new(left.len());
    Ok((
        p.clone(),
        FinMap { dom: p.clone(), cod: f.dom.clone(), table: left },
        FinMap { dom: p, cod: g.dom.clone(), table: right },
    ))
}

/// Iterator over all maps `a -> b` in lexicographic table order.
#[derive(Debug, Clone)]
pub struct MapIter {
    dom: FinSet,
    cod: FinSet,
    next: Option<Vec<usize>>,
}

impl Iterator for MapIter {
    type Item = FinMap;

    fn next(&mut self) -> Option<FinMap> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut advanced = false;
        for slot in succ.iter_mut().rev() {
            if *slot + 1 < self.cod.size {
                *slot += 1;
                advanced = true;
                break;
            }
            *slot = 0;
        }
        if advanced {
            self.next = Some(succ);
        }
        Some(FinMap { dom: self.dom.clone(), cod: self.cod.clone(), table: current })
    }
}

/// All `|b|^|a|` maps `a -> b`, refusing up front when that exceeds `budget`.
pub fn enumerate_maps(a: &FinSet, b: &FinSet, budget: Budget) -> Result<MapIter> {
    let count = checked_pow(b.size, a.size);
    budget.check(count)?;
    let next = if count == 0 { None } else { Some(vec![0; a.size]) };
    Ok(MapIter { dom: a.clone(), cod: b.clone(), next })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(cod: usize, table: &[usize]) -> FinMap {
        FinMap::from_table(cod, table.to_vec()).unwrap()
    }

    #[test]
    fn identity_composition() {
        let id3 = FinMap::identity(&FinSet::new(3));
        assert_eq!(compose_maps(&id3, &id3).unwrap(), id3);
    }

    #[test]
    fn constant_composition() {
        let f = map(1, &[0, 0]);
        let g = map(3, &[2]);
        assert_eq!(compose_maps(&f, &g).unwrap().table(), &[2, 2]);
    }

    #[test]
    fn composition_mismatch() {
        let f = map(2, &[0, 1]);
        let g = map(3, &[0, 1, 2]);
        assert_eq!(
            compose_maps(&f, &g),
            Err(Error::CompositionMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn invalid_tables_are_rejected() {
        assert!(FinMap::from_table(2, vec![0, 2]).is_err());
        assert!(FinMap::new(FinSet::new(3), FinSet::new(2), vec![0, 1]).is_err());
    }

    #[test]
    fn product_shapes() {
        let (p, l, r) = product(&FinSet::new(2), &FinSet::new(3));
        assert_eq!(p.size(), 6);
        for x in 0..6 {
            assert_eq!(l.apply(x), x / 3);
            assert_eq!(r.apply(x), x % 3);
        }
        let (p, _, _) = product(&FinSet::new(0), &FinSet::new(5));
        assert_eq!(p.size(), 0);
    }

    #[test]
    fn coproduct_shapes() {
        let (s, i, j) = coproduct(&FinSet::new(2), &FinSet::new(3));
        assert_eq!(s.size(), 5);
        assert_eq!(i.table(), &[0, 1]);
        assert_eq!(j.table(), &[2, 3, 4]);
        let (s, i, j) = coproduct(&FinSet::new(0), &FinSet::new(4));
        assert_eq!(s.size(), 4);
        assert!(i.table().is_empty());
        assert_eq!(j, FinMap::identity(&FinSet::new(4)));
    }

    #[test]
    fn pullback_of_identities() {
        let id = FinMap::identity(&FinSet::new(3));
        let (p, l, r) = pullback(&id, &id).unwrap();
        assert_eq!(p.size(), 3);
        assert_eq!(l, id);
        assert_eq!(r, id);
    }

    #[test]
    fn pullback_over_terminal_is_product() {
        let f = map(1, &[0, 0]);
        let g = map(1, &[0, 0, 0]);
        let (p, l, r) = pullback(&f, &g).unwrap();
        let (q, ql, qr) = product(&FinSet::new(2), &FinSet::new(3));
        assert_eq!(p, q);
        assert_eq!(l.table(), ql.table());
        assert_eq!(r.table(), qr.table());
    }

    #[test]
    fn pullback_mismatch() {
        let f = map(2, &[0]);
        let g = map(3, &[0]);
        assert!(matches!(pullback(&f, &g), Err(Error::PullbackMismatch { .. })));
    }

    #[test]
    fn enumeration_counts() {
        let b = Budget::default();
        assert_eq!(enumerate_maps(&FinSet::new(2), &FinSet::new(2), b).unwrap().count(), 4);
        let empty: Vec<_> = enumerate_maps(&FinSet::new(0), &FinSet::new(5), b).unwrap().collect();
        assert_eq!(empty.len(), 1);
        assert!(empty[0].table().is_empty());
        let none = enumerate_maps(&FinSet::new(2), &FinSet::new(0), b).unwrap().count();
        assert_eq!(none, 0);
        let all: Vec<_> = enumerate_maps(&FinSet::new(3), &FinSet::new(2), b).unwrap().collect();
        assert_eq!(all.len(), 8);
        let mut tables: Vec<_> = all.iter().map(|m| m.table().to_vec()).collect();
        assert!(tables.windows(2).all(|w| w[0] < w[1]));
        tables.dedup();
        assert_eq!(tables.len(), 8);
    }

    #[test]
    fn enumeration_budget() {
        let err = enumerate_maps(&FinSet::new(10), &FinSet::new(10), Budget(1000)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn bijections_invert() {
        let f = map(3, &[2, 0, 1]);
        let inv = f.inverse().unwrap();
        assert_eq!(compose_maps(&f, &inv).unwrap(), FinMap::identity(&FinSet::new(3)));
        assert!(map(3, &[0, 0, 1]).inverse().is_none());
    }
}
