//! Kronecker product of presentations.
//!
//! The product has both signatures and, for every pair of operations, the
//! interchange law saying each operation of one side is a homomorphism for
//! each operation of the other.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finset::Budget;
use crate::models::{enumerate_models, Model};
use crate::semimat::{kron, SemiringMatrix, Semiring};
use crate::theory::{Equation, OpSym, Presentation, Term};

/// The interchange law between `f` (first theory) and `g` (second).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterchangeEquation {
    pub f: OpSym,
    pub g: OpSym,
}

impl InterchangeEquation {
    pub fn new(f: OpSym, g: OpSym) -> Self {
        InterchangeEquation { f, g }
    }

    /// `f(g(x_{0,*}), .., g(x_{p-1,*})) = g(f(x_{*,0}), .., f(x_{*,q-1}))`
    /// with `x_{i,j}` the variable `i·q + j`.
    pub fn equation(&self) -> Equation {
        let (p, q) = (self.f.arity, self.g.arity);
        let x = |i: usize, j: usize| Term::Var(i * q + j);
        let lhs = Term::App(
            self.f.name.clone(),
            (0..p).map(|i| Term::App(self.g.name.clone(), (0..q).map(|j| x(i, j)).collect())).collect(),
        );
        let rhs = Term::App(
            self.g.name.clone(),
            (0..q).map(|j| Term::App(self.f.name.clone(), (0..p).map(|i| x(i, j)).collect())).collect(),
        );
        Equation::new(p * q, lhs, rhs)
    }
}

/// Operation names of the two factors after disjointification: unchanged
/// when already disjoint, otherwise suffixed `_l` and `_r`.
pub fn disjoint_names(p1: &Presentation, p2: &Presentation) -> Result<(Presentation, Presentation)> {
    let names = |p: &Presentation| p.ops().iter().map(|o| o.name.clone()).collect::<BTreeSet<_>>();
    if names(p1).is_disjoint(&names(p2)) {
        return Ok((p1.clone(), p2.clone()));
    }
    let left = p1.renamed(p1.name(), |s| format!("{s}_l"));
    let right = p2.renamed(p2.name(), |s| format!("{s}_r"));
    if !names(&left).is_disjoint(&names(&right)) {
        return Err(Error::Configuration(format!(
            "operation names of `{}` and `{}` still clash after suffixing",
            p1.name(),
            p2.name()
        )));
    }
    Ok((left, right))
}

pub fn kronecker_presentation(p1: &Presentation, p2: &Presentation) -> Result<Presentation> {
    let (left, right) = disjoint_names(p1, p2)?;
    let mut ops: Vec<OpSym> = left.ops().to_vec();
    ops.extend(right.ops().iter().cloned());
    let mut eqs: Vec<Equation> = left.eqs().to_vec();
    eqs.extend(right.eqs().iter().cloned());
    for f in left.ops() {
        for g in right.ops() {
            eqs.push(InterchangeEquation::new(f.clone(), g.clone()).equation());
        }
    }
    Presentation::new(format!("{}_tensor_{}", p1.name(), p2.name()), ops, eqs)
}

/// True when every operation of `a` is a homomorphism for every operation
/// of `b` (same carrier), checked directly on the tables.
pub fn commutes(a: &Model, b: &Model) -> bool {
    let n = a.carrier();
    for (fi, f) in a.presentation().ops().iter().enumerate() {
        for (gi, g) in b.presentation().ops().iter().enumerate() {
            let (p, q) = (f.arity, g.arity);
            let cells = p * q;
            let count = n.checked_pow(cells as u32).unwrap_or(usize::MAX);
            let mut grid = vec![0usize; cells];
            for code in 0..count {
                let mut c = code;
                for slot in grid.iter_mut().rev() {
                    *slot = c % n;
                    c /= n;
                }
                let rows: Vec<usize> = (0..p).map(|i| b.apply(gi, &grid[i * q..(i + 1) * q])).collect();
                let cols: Vec<usize> = (0..q)
                    .map(|j| a.apply(fi, &(0..p).map(|i| grid[i * q + j]).collect::<Vec<_>>()))
                    .collect();
                if a.apply(fi, &rows) != b.apply(gi, &cols) {
                    return false;
                }
            }
        }
    }
    true
}

/// Per-size comparison of product models with bimodels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BimodelRow {
    pub size: usize,
    pub product_models: usize,
    pub bimodels: usize,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BimodelReport {
    pub left: String,
    pub right: String,
    pub rows: Vec<BimodelRow>,
    pub passed: bool,
}

/// Compares, for every carrier up to `size`, the labeled models of the
/// Kronecker product with the pairs (p1-model, p2-model) whose operations
/// commute. Both sides are enumerated independently.
pub fn bimodel_report(p1: &Presentation, p2: &Presentation, size: usize, budget: Budget) -> Result<BimodelReport> {
    let product = Arc::new(kronecker_presentation(p1, p2)?);
    let (left, right) = disjoint_names(p1, p2)?;
    let (left, right) = (Arc::new(left), Arc::new(right));
    let mut rows = Vec::new();
    for n in 0..=size {
        let joint: BTreeSet<Vec<usize>> = enumerate_models(&product, n, false, budget)?
            .iter()
            .map(Model::serialized)
            .collect();
        let lm = enumerate_models(&left, n, false, budget)?;
        let rm = enumerate_models(&right, n, false, budget)?;
        let pairs: Vec<Vec<usize>> = lm
            .par_iter()
            .flat_map_iter(|a| {
                rm.iter().filter(move |b| commutes(a, b)).map(move |b| {
                    let mut key = a.serialized();
                    key.extend(b.serialized());
                    key
                })
            })
            .collect();
        let bimodels: BTreeSet<Vec<usize>> = pairs.into_iter().collect();
        rows.push(BimodelRow { size: n, product_models: joint.len(), bimodels: bimodels.len(), equal: joint == bimodels });
    }
    let passed = rows.iter().all(|r| r.equal);
    Ok(BimodelReport { left: p1.name().to_string(), right: p2.name().to_string(), rows, passed })
}

pub fn bimodel_check(p1: &Presentation, p2: &Presentation, size: usize) -> Result<bool> {
    Ok(bimodel_report(p1, p2, size, Budget::default())?.passed)
}

/// Models of `trivial ⊗ p` against models of `p`, as labeled structures.
pub fn unit_law_check(p: &Presentation, size: usize, budget: Budget) -> Result<bool> {
    let product = Arc::new(kronecker_presentation(&Presentation::trivial(), p)?);
    let plain = Arc::new(p.clone());
    for n in 0..=size {
        let a: Vec<Vec<usize>> = enumerate_models(&product, n, false, budget)?.iter().map(Model::serialized).collect();
        let b: Vec<Vec<usize>> = enumerate_models(&plain, n, false, budget)?.iter().map(Model::serialized).collect();
        if a != b {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EckmannHiltonRow {
    pub size: usize,
    /// Isomorphism classes of models of `monoid ⊗ monoid`.
    pub product_classes: usize,
    /// Isomorphism classes of commutative monoids.
    pub cmon_classes: usize,
    /// Labeled product models whose two units and multiplications coincide.
    pub collapsed: usize,
    pub labeled_product_models: usize,
    /// Every labeled product model has a commutative multiplication.
    pub commutative: bool,
    /// Dropping the second structure maps product classes onto cmon classes.
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EckmannHiltonReport {
    pub rows: Vec<EckmannHiltonRow>,
    pub passed: bool,
}

pub fn eckmann_hilton_report(size: usize, budget: Budget) -> Result<EckmannHiltonReport> {
    let mon = Presentation::monoid();
    let product = Arc::new(kronecker_presentation(&mon, &mon)?);
    let cmon = Arc::new(Presentation::cmon());
    let mut rows = Vec::new();
    for n in 1..=size {
        let labeled = enumerate_models(&product, n, false, budget)?;
        let (e1, m1) = (product.op_index("e_l").expect("op"), product.op_index("m_l").expect("op"));
        let (e2, m2) = (product.op_index("e_r").expect("op"), product.op_index("m_r").expect("op"));
        let collapsed = labeled
            .iter()
            .filter(|m| m.tables()[e1] == m.tables()[e2] && m.tables()[m1] == m.tables()[m2])
            .count();
        let commutative = labeled.iter().all(|m| {
            let t = &m.tables()[m1];
            (0..n).all(|a| (0..n).all(|b| t[a * n + b] == t[b * n + a]))
        });
        let classes = enumerate_models(&product, n, true, budget)?;
        let cmon_classes = enumerate_models(&cmon, n, true, budget)?;
        let image: BTreeSet<Vec<usize>> = classes
            .iter()
            .map(|m| {
                let single = Model::new(cmon.clone(), n, vec![m.tables()[e1].clone(), m.tables()[m1].clone()])?;
                Ok(single.canonical().serialized())
            })
            .collect::<Result<_>>()?;
        let expected: BTreeSet<Vec<usize>> = cmon_classes.iter().map(Model::serialized).collect();
        rows.push(EckmannHiltonRow {
            size: n,
            product_classes: classes.len(),
            cmon_classes: cmon_classes.len(),
            collapsed,
            labeled_product_models: labeled.len(),
            commutative,
            matched: image == expected && image.len() == classes.len(),
        });
    }
    let passed = rows.iter().all(|r| {
        r.product_classes == r.cmon_classes && r.collapsed == r.labeled_product_models && r.commutative && r.matched
    });
    Ok(EckmannHiltonReport { rows, passed })
}

/// Day convolution on finitely generated free modules: the Kronecker
/// matrix product, with unit object 1.
pub fn day_tensor_fgf(r: &Semiring, a: &SemiringMatrix, b: &SemiringMatrix) -> Result<SemiringMatrix> {
    for m in [a, b] {
        if m.semiring() != r {
            return Err(Error::SemiringMismatch { left: r.name(), right: m.semiring().name() });
        }
    }
    kron(a, b)
}
