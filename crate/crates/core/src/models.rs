//! Models of presentations in finite sets.
//!
//! A model is a carrier `{0, .., n-1}` with one full table per operation.
//! Tables are row-major with the first argument most significant, which is
//! the same order `finset::product` uses for `n^k`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finset::{self, checked_pow, Budget, FinMap, FinSet};
use crate::semimat::next_permutation;
use crate::spancat::SpanClass;
use crate::theory::{
    compose_morphisms, enumerate_normal_forms, hom_iter, normal_form, normal_term, Degree,
    Morphism, NormalForm, Presentation, Term,
};

/// A term with operation names resolved to table indices.
#[derive(Debug, Clone)]
enum Compiled {
    Var(usize),
    App(usize, Vec<Compiled>),
}

fn compile(t: &Term, p: &Presentation) -> Result<Compiled> {
    match t {
        Term::Var(i) => Ok(Compiled::Var(*i)),
        Term::App(f, args) => {
            let idx = p.op_index(f).ok_or_else(|| Error::UnknownSymbol(f.clone()))?;
            let args = args.iter().map(|a| compile(a, p)).collect::<Result<_>>()?;
            Ok(Compiled::App(idx, args))
        }
    }
}

fn tuple_index(args: &[usize], n: usize) -> usize {
    args.iter().fold(0, |acc, &a| acc * n + a)
}

fn decode_tuple(mut idx: usize, n: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for slot in out.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
    out
}

fn eval_total(t: &Compiled, env: &[usize], tables: &[Vec<usize>], n: usize) -> usize {
    match t {
        Compiled::Var(i) => env[*i],
        Compiled::App(op, args) => {
            let idx = args.iter().fold(0, |acc, a| acc * n + eval_total(a, env, tables, n));
            tables[*op][idx]
        }
    }
}

/// A finite model: carrier size plus one table per operation.
#[derive(Debug, Clone)]
pub struct Model {
    presentation: Arc<Presentation>,
    carrier: usize,
    tables: Vec<Vec<usize>>,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.carrier == other.carrier && self.tables == other.tables
    }
}

impl Eq for Model {}

impl Model {
    /// Checks table shapes only; use [`check_model`] for the equations.
    pub fn new(presentation: Arc<Presentation>, carrier: usize, tables: Vec<Vec<usize>>) -> Result<Self> {
        if tables.len() != presentation.ops().len() {
            return Err(Error::NotAModel(format!(
                "{} tables for {} operations",
                tables.len(),
                presentation.ops().len()
            )));
        }
        for (op, table) in presentation.ops().iter().zip(&tables) {
            let expected = checked_pow(carrier, op.arity);
            if table.len() as u128 != expected {
                return Err(Error::NotAModel(format!(
                    "table of `{}` has {} entries, expected {expected}",
                    op.name,
                    table.len()
                )));
            }
            if table.iter().any(|&v| v >= carrier) {
                return Err(Error::NotAModel(format!("table of `{}` leaves the carrier", op.name)));
            }
        }
        Ok(Model { presentation, carrier, tables })
    }

    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.presentation
    }

    pub fn carrier(&self) -> usize {
        self.carrier
    }

    pub fn tables(&self) -> &[Vec<usize>] {
        &self.tables
    }

    pub fn table(&self, op: &str) -> Option<&[usize]> {
        self.presentation.op_index(op).map(|i| self.tables[i].as_slice())
    }

    /// Value of operation `op` (by index) at `args`.
    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        self.tables[op][tuple_index(args, self.carrier)]
    }

    /// Evaluates a term under an assignment of its variables.
    pub fn eval(&self, t: &Term, env: &[usize]) -> Result<usize> {
        let c = compile(t, &self.presentation)?;
        if t.context() > env.len() {
            return Err(Error::UnboundVariable { var: t.context() - 1, context: env.len() });
        }
        Ok(eval_total(&c, env, &self.tables, self.carrier))
    }

    /// Tables concatenated in operation order.
    pub fn serialized(&self) -> Vec<usize> {
        self.tables.concat()
    }

    /// The model transported along the bijection `perm`.
    pub fn relabel(&self, perm: &[usize]) -> Model {
        let n = self.carrier;
        let tables = self
            .presentation
            .ops()
            .iter()
            .zip(&self.tables)
            .map(|(op, table)| {
                let mut out = vec![0; table.len()];
                for (idx, &v) in table.iter().enumerate() {
                    let args = decode_tuple(idx, n, op.arity);
                    let moved: Vec<usize> = args.iter().map(|&a| perm[a]).collect();
                    out[tuple_index(&moved, n)] = perm[v];
                }
                out
            })
            .collect();
        Model { presentation: self.presentation.clone(), carrier: n, tables }
    }

    /// Representative with the lexicographically least serialization over
    /// all relabelings of the carrier.
    pub fn canonical(&self) -> Model {
        let mut perm: Vec<usize> = (0..self.carrier).collect();
        let mut best = self.clone();
        let mut best_key = best.serialized();
        while next_permutation(&mut perm) {
            let cand = self.relabel(&perm);
            let key = cand.serialized();
            if key < best_key {
                best_key = key;
                best = cand;
            }
        }
        best
    }

    pub fn automorphism_count(&self) -> usize {
        let mut perm: Vec<usize> = (0..self.carrier).collect();
        let mut count = 1;
        while next_permutation(&mut perm) {
            if self.relabel(&perm) == *self {
                count += 1;
            }
        }
        count
    }

    pub fn is_isomorphic(&self, other: &Model) -> bool {
        self.carrier == other.carrier
            && self.tables.len() == other.tables.len()
            && self.canonical() == other.canonical()
    }

    /// Reads the JSON produced by `serde_json::to_value(model)`.
    pub fn from_json(presentation: Arc<Presentation>, value: &serde_json::Value) -> Result<Model> {
        let bad = |msg: &str| Error::NotAModel(msg.to_string());
        let carrier = value.get("carrier").and_then(|c| c.as_u64()).ok_or_else(|| bad("missing carrier"))?;
        let entries = value.get("tables").and_then(|t| t.as_array()).ok_or_else(|| bad("missing tables"))?;
        let mut by_name = HashMap::new();
        for e in entries {
            let name = e.get("op").and_then(|o| o.as_str()).ok_or_else(|| bad("table without op"))?;
            let table: Vec<usize> = e
                .get("table")
                .and_then(|t| t.as_array())
                .ok_or_else(|| bad("table without entries"))?
                .iter()
                .map(|v| v.as_u64().map(|v| v as usize).ok_or_else(|| bad("non-integer table entry")))
                .collect::<Result<_>>()?;
            by_name.insert(name.to_string(), table);
        }
        let tables = presentation
            .ops()
            .iter()
            .map(|op| by_name.remove(&op.name).ok_or_else(|| Error::NotAModel(format!("no table for `{}`", op.name))))
            .collect::<Result<_>>()?;
        Model::new(presentation, carrier as usize, tables)
    }

    /// Underlying-set functor data on the objects `0..=max_object`.
    pub fn to_functor(&self, max_object: usize) -> FunctorData {
        let n = self.carrier;
        let objects: Vec<usize> = (0..=max_object).map(|k| n.pow(k as u32)).collect();
        let projections = (0..=max_object)
            .map(|k| {
                (0..k)
                    .map(|i| {
                        let table = (0..objects[k]).map(|z| decode_tuple(z, n, k)[i]).collect();
                        FinMap::new(FinSet::new(objects[k]), FinSet::new(n), table).expect("in range")
                    })
                    .collect()
            })
            .collect();
        let operations = self
            .tables
            .iter()
            .map(|t| FinMap::new(FinSet::new(t.len()), FinSet::new(n), t.clone()).expect("in range"))
            .collect();
        FunctorData { objects, projections, operations }
    }
}

impl Serialize for Model {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Table<'a>(&'a str, usize, &'a [usize]);
        impl Serialize for Table<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut st = s.serialize_struct("Table", 3)?;
                st.serialize_field("op", self.0)?;
                st.serialize_field("arity", &self.1)?;
                st.serialize_field("table", self.2)?;
                st.end()
            }
        }
        let tables: Vec<Table<'_>> = self
            .presentation
            .ops()
            .iter()
            .zip(&self.tables)
            .map(|(op, t)| Table(&op.name, op.arity, t))
            .collect();
        let mut st = serializer.serialize_struct("Model", 2)?;
        st.serialize_field("carrier", &self.carrier)?;
        st.serialize_field("tables", &tables)?;
        st.end()
    }
}

/// True iff every equation holds under every assignment.
pub fn check_model(candidate: &Model) -> bool {
    model_witness(candidate).is_ok()
}

/// Like [`check_model`], naming the first failing equation instance.
pub fn model_witness(candidate: &Model) -> Result<()> {
    let p = &candidate.presentation;
    let n = candidate.carrier;
    for eq in p.eqs() {
        let lhs = compile(&eq.lhs, p)?;
        let rhs = compile(&eq.rhs, p)?;
        let count = checked_pow(n, eq.context) as usize;
        for a in 0..count {
            let env = decode_tuple(a, n, eq.context);
            if eval_total(&lhs, &env, &candidate.tables, n) != eval_total(&rhs, &env, &candidate.tables, n) {
                return Err(Error::NotAModel(format!("{eq} fails at {env:?}")));
            }
        }
    }
    Ok(())
}

/// Structure-preserving map between two models of one presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelHom {
    pub source: Model,
    pub target: Model,
    pub map: FinMap,
}

fn is_hom(a: &Model, b: &Model, f: &[usize]) -> bool {
    let n = a.carrier;
    a.presentation.ops().iter().enumerate().all(|(op, sym)| {
        a.tables[op].iter().enumerate().all(|(idx, &v)| {
            let args = decode_tuple(idx, n, sym.arity);
            let moved: Vec<usize> = args.iter().map(|&x| f[x]).collect();
            b.apply(op, &moved) == f[v]
        })
    })
}

/// Every homomorphism `a -> b`, by brute force over all maps of carriers.
pub fn model_homs(a: &Model, b: &Model, budget: Budget) -> Result<Vec<ModelHom>> {
    if a.presentation.ops() != b.presentation.ops() {
        return Err(Error::Configuration("models of different signatures".into()));
    }
    Ok(finset::enumerate_maps(&FinSet::new(a.carrier), &FinSet::new(b.carrier), budget)?
        .filter(|f| is_hom(a, b, f.table()))
        .map(|map| ModelHom { source: a.clone(), target: b.clone(), map })
        .collect())
}

/// Outcome of evaluating one equation instance against a partial table.
enum Eval {
    Holds,
    Fails,
    Blocked(usize),
}

const UNSET: usize = usize::MAX;

struct Search<'a> {
    n: usize,
    eqs: Vec<(usize, Compiled, Compiled)>,
    /// First cell index of each operation.
    offsets: &'a [usize],
    /// Total number of table cells.
    cells: usize,
}

impl Search<'_> {
    fn eval(&self, t: &Compiled, env: &[usize], values: &[usize]) -> std::result::Result<usize, usize> {
        match t {
            Compiled::Var(i) => Ok(env[*i]),
            Compiled::App(op, args) => {
                let mut idx = 0;
                for a in args {
                    idx = idx * self.n + self.eval(a, env, values)?;
                }
                let cell = self.offsets[*op] + idx;
                match values[cell] {
                    UNSET => Err(cell),
                    v => Ok(v),
                }
            }
        }
    }

    fn instance(&self, inst: (u32, u32), values: &[usize]) -> Eval {
        let (eq, a) = (inst.0 as usize, inst.1 as usize);
        let (ctx, lhs, rhs) = &self.eqs[eq];
        let env = decode_tuple(a, self.n, *ctx);
        let l = match self.eval(lhs, &env, values) {
            Ok(v) => v,
            Err(c) => return Eval::Blocked(c),
        };
        match self.eval(rhs, &env, values) {
            Ok(r) if r == l => Eval::Holds,
            Ok(_) => Eval::Fails,
            Err(c) => Eval::Blocked(c),
        }
    }

    /// Assigns `value` to cell `d`, re-examining the instances waiting on
    /// it. Returns false on a violated equation; moved instances are
    /// recorded on `trail` either way.
    fn assign(
        &self,
        d: usize,
        value: usize,
        values: &mut [usize],
        buckets: &mut [Vec<(u32, u32)>],
        trail: &mut Vec<usize>,
    ) -> bool {
        values[d] = value;
        let len = buckets[d].len();
        for i in 0..len {
            let inst = buckets[d][i];
            match self.instance(inst, values) {
                Eval::Holds => {}
                Eval::Fails => return false,
                Eval::Blocked(b) => {
                    buckets[b].push(inst);
                    trail.push(b);
                }
            }
        }
        true
    }

    fn undo(&self, mark: usize, buckets: &mut [Vec<(u32, u32)>], trail: &mut Vec<usize>) {
        while trail.len() > mark {
            let b = trail.pop().expect("non-empty");
            buckets[b].pop();
        }
    }

    fn dfs(
        &self,
        d: usize,
        values: &mut Vec<usize>,
        buckets: &mut [Vec<(u32, u32)>],
        trail: &mut Vec<usize>,
        nodes: &AtomicU64,
        budget: Budget,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        if d == self.cells {
            out.push(values.clone());
            return Ok(());
        }
        for v in 0..self.n {
            let used = nodes.fetch_add(1, Ordering::Relaxed) + 1;
            budget.check(u128::from(used))?;
            let mark = trail.len();
            if self.assign(d, v, values, buckets, trail) {
                self.dfs(d + 1, values, buckets, trail, nodes, budget, out)?;
            }
            self.undo(mark, buckets, trail);
            values[d] = UNSET;
        }
        Ok(())
    }
}

/// All labeled models on a carrier of `size`, in lexicographic order of
/// their tables. Search nodes are charged against `budget`.
fn labeled_models(p: &Arc<Presentation>, size: usize, budget: Budget) -> Result<Vec<Model>> {
    let n = size;
    let ops = p.ops();
    let mut offsets = Vec::with_capacity(ops.len());
    let mut cells = 0usize;
    for op in ops {
        offsets.push(cells);
        let c = checked_pow(n, op.arity);
        budget.check(c)?;
        cells += c as usize;
    }
    let eqs = p
        .eqs()
        .iter()
        .map(|e| Ok((e.context, compile(&e.lhs, p)?, compile(&e.rhs, p)?)))
        .collect::<Result<Vec<_>>>()?;
    let search = Search { n, eqs, offsets: &offsets, cells };

    let values = vec![UNSET; cells];
    let mut buckets: Vec<Vec<(u32, u32)>> = vec![Vec::new(); cells];
    let mut instances = 0u128;
    for (e, (ctx, _, _)) in search.eqs.iter().enumerate() {
        let count = checked_pow(n, *ctx);
        instances += count;
        budget.check(instances)?;
        for a in 0..count as usize {
            match search.instance((e as u32, a as u32), &values) {
                Eval::Holds => {}
                Eval::Fails => return Ok(Vec::new()),
                Eval::Blocked(b) => buckets[b].push((e as u32, a as u32)),
            }
        }
    }

    // Fix a short prefix of cells per task; the tasks are independent and
    // their results concatenate in prefix order.
    let prefix_len = cells.min(2);
    let prefixes: Vec<Vec<usize>> = (0..checked_pow(n, prefix_len) as usize)
        .map(|code| decode_tuple(code, n, prefix_len))
        .collect();
    let nodes = AtomicU64::new(0);
    let results: Vec<Result<Vec<Vec<usize>>>> = prefixes
        .par_iter()
        .map(|prefix| {
            let mut values = values.clone();
            let mut buckets = buckets.clone();
            let mut trail = Vec::new();
            let mut out = Vec::new();
            for (d, &v) in prefix.iter().enumerate() {
                let used = nodes.fetch_add(1, Ordering::Relaxed) + 1;
                budget.check(u128::from(used))?;
                if !search.assign(d, v, &mut values, &mut buckets, &mut trail) {
                    return Ok(out);
                }
            }
            search.dfs(prefix_len, &mut values, &mut buckets, &mut trail, &nodes, budget, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut models = Vec::new();
    for r in results {
        for cellvals in r? {
            let tables = offsets
                .iter()
                .zip(ops)
                .map(|(&off, op)| cellvals[off..off + checked_pow(n, op.arity) as usize].to_vec())
                .collect();
            models.push(Model { presentation: p.clone(), carrier: n, tables });
        }
    }
    Ok(models)
}

/// Models on a carrier of exactly `size` elements. With `up_to_iso`, one
/// canonical representative per isomorphism class, sorted by serialization.
pub fn enumerate_models(p: &Arc<Presentation>, size: usize, up_to_iso: bool, budget: Budget) -> Result<Vec<Model>> {
    let labeled = labeled_models(p, size, budget)?;
    if !up_to_iso {
        return Ok(labeled);
    }
    let canon: BTreeMap<Vec<usize>, Model> = labeled
        .par_iter()
        .map(|m| {
            let c = m.canonical();
            (c.serialized(), c)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    Ok(canon.into_values().collect())
}

/// Truncated free model: normal forms in `generators` variables of total
/// degree at most `bound`. Table entries whose value leaves the truncation
/// are `None`.
#[derive(Debug, Clone)]
pub struct FreeModel {
    presentation: Arc<Presentation>,
    generators: usize,
    bound: u64,
    elements: Vec<NormalForm>,
    index: HashMap<NormalForm, usize>,
    tables: Vec<Vec<Option<usize>>>,
}

impl FreeModel {
    pub fn carrier(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn elements(&self) -> &[NormalForm] {
        &self.elements
    }

    pub fn tables(&self) -> &[Vec<Option<usize>>] {
        &self.tables
    }

    pub fn index_of(&self, nf: &NormalForm) -> Option<usize> {
        self.index.get(nf).copied()
    }

    /// Index of the generator `x_i`.
    pub fn generator(&self, i: usize) -> usize {
        let t = Term::Var(i);
        let nf = normal_form(&t, &self.presentation, self.generators).expect("generator normalizes");
        self.index[&nf]
    }

    pub fn term(&self, element: usize) -> Term {
        let n = self.presentation.normalizer().expect("free models have normalizers");
        normal_term(&self.elements[element], n)
    }

    /// True when no operation leaves the truncation.
    pub fn is_total(&self) -> bool {
        self.tables.iter().all(|t| t.iter().all(Option::is_some))
    }

    /// Inputs whose output falls outside the truncation, as `(op, args)`.
    pub fn unsafe_entries(&self) -> Vec<(usize, Vec<usize>)> {
        let n = self.carrier();
        let mut out = Vec::new();
        for (op, sym) in self.presentation.ops().iter().enumerate() {
            for (idx, v) in self.tables[op].iter().enumerate() {
                if v.is_none() {
                    out.push((op, decode_tuple(idx, n, sym.arity)));
                }
            }
        }
        out
    }

    pub fn to_model(&self) -> Option<Model> {
        let tables = self.tables.iter().map(|t| t.iter().copied().collect::<Option<Vec<_>>>()).collect::<Option<Vec<_>>>()?;
        Some(Model { presentation: self.presentation.clone(), carrier: self.carrier(), tables })
    }

    /// Evaluates a term with variables sent to carrier elements; `None` if
    /// some step leaves the truncation.
    pub fn eval(&self, t: &Term, env: &[usize]) -> Result<Option<usize>> {
        let c = compile(t, &self.presentation)?;
        fn go(fm: &FreeModel, t: &Compiled, env: &[usize]) -> Option<usize> {
            match t {
                Compiled::Var(i) => Some(env[*i]),
                Compiled::App(op, args) => {
                    let mut idx = 0;
                    for a in args {
                        idx = idx * fm.carrier() + go(fm, a, env)?;
                    }
                    fm.tables[*op][idx]
                }
            }
        }
        Ok(go(self, &c, env))
    }
}

/// The free model on `generators` generators truncated at total degree
/// `bound`. For `cmon` the carrier is the vectors in `N^generators` with
/// coordinate sum at most `bound`.
pub fn free_model(p: &Arc<Presentation>, generators: usize, bound: u64, budget: Budget) -> Result<FreeModel> {
    let normalizer = p.normalizer().ok_or(Error::NoNormalizer)?.clone();
    let elements = enumerate_normal_forms(p, generators, bound, Degree::Total, budget)?;
    let index: HashMap<NormalForm, usize> = elements.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
    let n = elements.len();
    let terms: Vec<Term> = elements.iter().map(|f| normal_term(f, &normalizer)).collect();
    let mut tables = Vec::with_capacity(p.ops().len());
    for op in p.ops() {
        let count = checked_pow(n, op.arity);
        budget.check(count)?;
        let table = (0..count as usize)
            .into_par_iter()
            .map(|idx| {
                let args = decode_tuple(idx, n, op.arity).into_iter().map(|a| terms[a].clone()).collect();
                let nf = normal_form(&Term::App(op.name.clone(), args), p, generators)?;
                Ok(index.get(&nf).copied())
            })
            .collect::<Result<Vec<_>>>()?;
        tables.push(table);
    }
    Ok(FreeModel { presentation: p.clone(), generators, bound, elements, index, tables })
}

/// Every map `source -> target` sending generator `i` to `images[i]` and
/// commuting with every operation wherever the source table is defined
/// (the target must then be defined too).
pub fn extend_homs(source: &FreeModel, target: &FreeModel, images: &[usize]) -> Vec<Vec<usize>> {
    extend_into(source, &target.tables, target.carrier(), images)
}

/// [`extend_homs`] into a finite model.
pub fn extend_to_model(source: &FreeModel, target: &Model, images: &[usize]) -> Vec<Vec<usize>> {
    let tables: Vec<Vec<Option<usize>>> = target.tables.iter().map(|t| t.iter().map(|&v| Some(v)).collect()).collect();
    extend_into(source, &tables, target.carrier, images)
}

/// All homomorphisms from a truncated free model into a finite model, one
/// batch per assignment of the generators in lexicographic order.
pub fn free_model_homs(source: &FreeModel, target: &Model, budget: Budget) -> Result<Vec<FinMap>> {
    let g = source.generators;
    budget.check(checked_pow(target.carrier, g))?;
    let mut out = Vec::new();
    for code in 0..checked_pow(target.carrier, g) as usize {
        let images = decode_tuple(code, target.carrier.max(1), g);
        for table in extend_to_model(source, target, &images) {
            out.push(FinMap::new(FinSet::new(source.carrier()), FinSet::new(target.carrier), table)?);
        }
    }
    Ok(out)
}

fn extend_into(source: &FreeModel, target_tables: &[Vec<Option<usize>>], target_size: usize, images: &[usize]) -> Vec<Vec<usize>> {
    let n = source.carrier();
    let ops = source.presentation.ops();
    let mut forced = vec![None; n];
    for (i, &img) in images.iter().enumerate().take(source.generators) {
        forced[source.generator(i)] = Some(img);
    }
    // generators first, then by degree
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&e| (forced[e].is_none(), source.elements[e].degree(Degree::Total), e));
    let mut position = vec![0; n];
    for (k, &e) in order.iter().enumerate() {
        position[e] = k;
    }
    // constraints (op, args, result), filed under the last element assigned
    let mut waiting: Vec<Vec<(usize, Vec<usize>, usize)>> = vec![Vec::new(); n];
    for (op, sym) in ops.iter().enumerate() {
        for (idx, v) in source.tables[op].iter().enumerate() {
            if let Some(r) = v {
                let args = decode_tuple(idx, n, sym.arity);
                let last = args.iter().chain([r]).map(|&e| position[e]).max().expect("non-empty");
                waiting[last].push((op, args, *r));
            }
        }
    }
    let target_at = |op: usize, args: &[usize], phi: &[usize]| -> Option<usize> {
        let idx = args.iter().fold(0, |acc, &a| acc * target_size + phi[a]);
        target_tables[op][idx]
    };
    let mut out = Vec::new();
    let mut phi = vec![UNSET; n];
    fn go(
        k: usize,
        order: &[usize],
        forced: &[Option<usize>],
        waiting: &[Vec<(usize, Vec<usize>, usize)>],
        phi: &mut Vec<usize>,
        target_size: usize,
        target_at: &dyn Fn(usize, &[usize], &[usize]) -> Option<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if k == order.len() {
            out.push(phi.clone());
            return;
        }
        let e = order[k];
        // a constraint with all arguments assigned pins the value
        let pinned = waiting[k]
            .iter()
            .find(|(_, args, r)| *r == e && args.iter().all(|&a| phi[a] != UNSET))
            .map(|(op, args, _)| target_at(*op, args, phi));
        let candidates: Vec<usize> = match (forced[e], pinned) {
            (_, Some(None)) => return,
            (Some(f), Some(Some(p))) if f != p => return,
            (Some(f), _) => vec![f],
            (None, Some(Some(p))) => vec![p],
            (None, None) => (0..target_size).collect(),
        };
        for v in candidates {
            phi[e] = v;
            let ok = waiting[k].iter().all(|(op, args, r)| target_at(*op, args, phi) == Some(phi[*r]));
            if ok {
                go(k + 1, order, forced, waiting, phi, target_size, target_at, out);
            }
        }
        phi[e] = UNSET;
    }
    go(0, &order, &forced, &waiting, &mut phi, target_size, &target_at, &mut out);
    out
}

/// Result of comparing free-model homomorphisms with syntactic morphisms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct YonedaReport {
    pub theory: String,
    pub m: usize,
    pub n: usize,
    pub bound: u64,
    /// Truncation-compatible homomorphisms `free(m) -> free(n)`.
    pub model_homs: usize,
    /// Morphisms `n -> m` of the syntactic category.
    pub theory_morphisms: usize,
    /// Generator assignments that did not extend to exactly one homomorphism.
    pub non_unique_extensions: usize,
    pub bijective: bool,
    pub composition_pairs: usize,
    pub composition_failures: usize,
    pub passed: bool,
}

/// Generator images of every truncation-compatible homomorphism
/// `free(m) -> free(n)` whose images have entry degree at most `bound`,
/// together with the homomorphism's full table.
fn free_homs(
    p: &Arc<Presentation>,
    m: usize,
    n: usize,
    bound: u64,
    budget: Budget,
) -> Result<(FreeModel, Vec<(Vec<usize>, usize)>)> {
    // the source must contain its generators even when images are constants
    let source = free_model(p, m, bound.max(1), budget)?;
    let small = enumerate_normal_forms(p, n, bound, Degree::Entry, budget)?;
    let reach = small.iter().map(|f| f.degree(Degree::Total)).max().unwrap_or(0).max(1);
    let target = free_model(p, n, bound.max(1) * reach, budget)?;
    let candidates: Vec<usize> = small
        .iter()
        .map(|f| target.index_of(f).ok_or_else(|| Error::Truncation("image outside target".into())))
        .collect::<Result<_>>()?;
    budget.check(checked_pow(candidates.len(), m))?;
    let mut homs = Vec::new();
    let total = checked_pow(candidates.len(), m) as usize;
    for code in 0..total {
        let images: Vec<usize> = decode_tuple(code, candidates.len().max(1), m).into_iter().map(|i| candidates[i]).collect();
        let ext = extend_homs(&source, &target, &images);
        homs.push((images, ext.len()));
    }
    Ok((target, homs))
}

/// Compares truncation-compatible homomorphisms `free(m) -> free(n)` with
/// the morphisms `n -> m` of the syntactic category, and checks that
/// composition matches contravariantly on up to `samples` composable
/// pairs through a third arity `k ≤ 2`.
pub fn yoneda_report(p: &Arc<Presentation>, m: usize, n: usize, bound: u64, samples: usize, budget: Budget) -> Result<YonedaReport> {
    let normalizer = p.normalizer().ok_or(Error::NoNormalizer)?.clone();
    let (target, homs) = free_homs(p, m, n, bound, budget)?;
    let non_unique = homs.iter().filter(|(_, c)| *c != 1).count();
    let to_morphism = |fm: &FreeModel, images: &[usize], src: usize| -> Result<Morphism> {
        Morphism::new(p, src, images.iter().map(|&e| fm.term(e)).collect())
    };
    let left: BTreeSet<Morphism> = homs
        .iter()
        .filter(|(_, c)| *c == 1)
        .map(|(img, _)| to_morphism(&target, img, n))
        .collect::<Result<_>>()?;
    let right: Vec<Morphism> = hom_iter(p, n, m, bound, budget)?.collect();
    let right_set: BTreeSet<Morphism> = right.iter().cloned().collect();
    let bijective = non_unique == 0 && left.len() == homs.len() && right_set.len() == right.len() && left == right_set;

    // composition: φ: free(m) -> free(n), ψ: free(n) -> free(k)
    let mut pairs = 0;
    let mut failures = 0;
    let phis: Vec<&Vec<usize>> = homs.iter().filter(|(_, c)| *c == 1).map(|(i, _)| i).collect();
    for k in 0..=2usize {
        if pairs >= samples {
            break;
        }
        let (psi_target, psi_homs) = free_homs(p, n, k, bound, budget)?;
        let psis: Vec<&Vec<usize>> = psi_homs.iter().filter(|(_, c)| *c == 1).map(|(i, _)| i).collect();
        if phis.is_empty() || psis.is_empty() {
            continue;
        }
        let total = phis.len() * psis.len();
        let want = (samples - pairs).div_ceil(3 - k).min(total);
        let stride = (total / want.max(1)).max(1);
        let reach_phi = phis.iter().flat_map(|img| img.iter()).map(|&e| target.elements[e].degree(Degree::Total)).max().unwrap_or(0);
        let reach_psi = psis.iter().flat_map(|img| img.iter()).map(|&e| psi_target.elements[e].degree(Degree::Total)).max().unwrap_or(0);
        let big = free_model(p, k, reach_phi.max(1) * reach_psi.max(1), budget)?;
        for idx in (0..total).step_by(stride).take(want) {
            let (phi, psi) = (phis[idx / psis.len()], psis[idx % psis.len()]);
            // ψ∘φ on generators: evaluate the term φ(x_i) at the ψ-images
            let env: Vec<usize> = psi
                .iter()
                .map(|&e| big.index_of(&psi_target.elements[e]).ok_or_else(|| Error::Truncation("ψ image".into())))
                .collect::<Result<_>>()?;
            let mut composite = Vec::with_capacity(m);
            for &e in phi.iter() {
                let v = big
                    .eval(&target.term(e), &env)?
                    .ok_or_else(|| Error::Truncation("composite leaves the truncation".into()))?;
                composite.push(normal_term(&big.elements[v], &normalizer));
            }
            let semantic = Morphism::new(p, k, composite)?;
            let syntactic = compose_morphisms(p, &to_morphism(&psi_target, psi, k)?, &to_morphism(&target, phi, n)?)?;
            pairs += 1;
            if semantic != syntactic {
                failures += 1;
            }
        }
    }
    Ok(YonedaReport {
        theory: p.name().to_string(),
        m,
        n,
        bound,
        model_homs: homs.len(),
        theory_morphisms: right.len(),
        non_unique_extensions: non_unique,
        bijective,
        composition_pairs: pairs,
        composition_failures: failures,
        passed: bijective && failures == 0,
    })
}

/// Default number of composable pairs sampled by [`yoneda_check`].
pub const YONEDA_SAMPLES: usize = 60;

pub fn yoneda_check(p: &Arc<Presentation>, m: usize, n: usize, bound: u64) -> Result<bool> {
    Ok(yoneda_report(p, m, n, bound, YONEDA_SAMPLES, Budget::default())?.passed)
}

/// A candidate functor from the syntactic category into finite sets,
/// given on the objects `0..objects.len()` together with the images of the
/// product projections and of the generating operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctorData {
    /// `|F(k)|`.
    pub objects: Vec<usize>,
    /// `projections[k][i] : F(k) -> F(1)`.
    pub projections: Vec<Vec<FinMap>>,
    /// `operations[f] : F(arity f) -> F(1)`, in presentation order.
    pub operations: Vec<FinMap>,
}

/// Checks identities, composition (every equation holds as an equality of
/// composites) and that `F(k)` is the `k`-fold product of `F(1)` through
/// the projection images.
pub fn functor_check(p: &Presentation, f: &FunctorData) -> bool {
    functor_witness(p, f).is_ok()
}

pub fn functor_witness(p: &Presentation, f: &FunctorData) -> Result<()> {
    let max = f.objects.len().checked_sub(1).ok_or_else(|| Error::NotFunctorial("no objects".into()))?;
    let one = *f.objects.get(1).ok_or_else(|| Error::NotFunctorial("object 1 missing".into()))?;
    if f.projections.len() != f.objects.len() || f.operations.len() != p.ops().len() {
        return Err(Error::NotFunctorial("wrong number of morphism images".into()));
    }
    // comparison F(k) -> F(1)^k must be a bijection
    let mut inverse: Vec<HashMap<Vec<usize>, usize>> = Vec::new();
    for k in 0..=max {
        if f.projections[k].len() != k {
            return Err(Error::NotFunctorial(format!("object {k} needs {k} projections")));
        }
        for (i, pr) in f.projections[k].iter().enumerate() {
            if pr.dom().size() != f.objects[k] || pr.cod().size() != one {
                return Err(Error::NotFunctorial(format!("projection {i} of object {k} has the wrong type")));
            }
        }
        if k == 1 && f.projections[1][0] != FinMap::identity(&FinSet::new(one)) {
            return Err(Error::NotFunctorial("F(id_1) is not the identity".into()));
        }
        let mut inv = HashMap::new();
        for z in 0..f.objects[k] {
            let coords: Vec<usize> = f.projections[k].iter().map(|pr| pr.apply(z)).collect();
            if let Some(w) = inv.insert(coords.clone(), z) {
                return Err(Error::NotProductPreserving(format!(
                    "elements {w} and {z} of F({k}) have the same coordinates {coords:?}"
                )));
            }
        }
        if inv.len() as u128 != checked_pow(one, k) {
            return Err(Error::NotProductPreserving(format!(
                "F({k}) has {} elements but F(1)^{k} has {}",
                inv.len(),
                checked_pow(one, k)
            )));
        }
        inverse.push(inv);
    }
    for (sym, op) in p.ops().iter().zip(&f.operations) {
        if sym.arity > max {
            return Err(Error::NotFunctorial(format!("object {} is not given", sym.arity)));
        }
        if op.dom().size() != f.objects[sym.arity] || op.cod().size() != one {
            return Err(Error::NotFunctorial(format!("F({}) has the wrong type", sym.name)));
        }
    }
    fn value(t: &Term, z: usize, ctx: usize, p: &Presentation, f: &FunctorData, inverse: &[HashMap<Vec<usize>, usize>]) -> usize {
        match t {
            Term::Var(i) => f.projections[ctx][*i].apply(z),
            Term::App(op, args) => {
                let coords: Vec<usize> = args.iter().map(|a| value(a, z, ctx, p, f, inverse)).collect();
                let w = inverse[coords.len()][&coords];
                f.operations[p.op_index(op).expect("declared")].apply(w)
            }
        }
    }
    for eq in p.eqs() {
        if eq.context > max {
            return Err(Error::NotFunctorial(format!("object {} is not given", eq.context)));
        }
        for z in 0..f.objects[eq.context] {
            let l = value(&eq.lhs, z, eq.context, p, f, &inverse);
            let r = value(&eq.rhs, z, eq.context, p, f, &inverse);
            if l != r {
                return Err(Error::NotFunctorial(format!("the two composites of {eq} differ at {z}")));
            }
        }
    }
    Ok(())
}

/// Steps a nondecreasing sequence over `0..letters` to its successor.
fn next_multiset(seq: &mut [usize], letters: usize) -> bool {
    for i in (0..seq.len()).rev() {
        if seq[i] + 1 < letters {
            let v = seq[i] + 1;
            seq[i..].iter_mut().for_each(|slot| *slot = v);
            return true;
        }
    }
    false
}

/// Candidate functors for the theory with no operations, on objects
/// `0, 1, 2`, with `|F(1)| ≤ max_value`. `F(0)` ranges over sizes `0..=2`
/// and `F(2)` over every multiset of coordinate pairs of size at most
/// `|F(1)|² + 1`, so both non-injective and non-surjective comparison maps
/// occur. Returns `(candidates examined, candidates passing)`.
pub fn trivial_theory_functors(max_value: usize, budget: Budget) -> Result<(usize, Vec<FunctorData>)> {
    let triv = Presentation::trivial();
    let mut examined = 0usize;
    let mut passing = Vec::new();
    for s in 0..=max_value {
        let pairs = s * s;
        for zero in 0..=2 {
            for t in 0..=pairs + 1 {
                if pairs == 0 && t > 0 {
                    // no pairs to choose from
                    break;
                }
                // nondecreasing sequences of pair codes of length t
                let mut seq = vec![0usize; t];
                loop {
                    examined += 1;
                    budget.check(examined as u128)?;
                    let first = seq.iter().map(|&c| c / s.max(1)).collect();
                    let second = seq.iter().map(|&c| c % s.max(1)).collect();
                    let data = FunctorData {
                        objects: vec![zero, s, t],
                        projections: vec![
                            vec![],
                            vec![FinMap::identity(&FinSet::new(s))],
                            vec![FinMap::from_table(s, first)?, FinMap::from_table(s, second)?],
                        ],
                        operations: vec![],
                    };
                    if functor_check(&triv, &data) {
                        passing.push(data);
                    }
                    if !next_multiset(&mut seq, pairs) {
                        break;
                    }
                }
            }
        }
    }
    Ok((examined, passing))
}

/// Functor data from span classes to finite sets: `k ↦ F(1)^k` for
/// `k ≤ max_object`, and a map for every span class between such objects
/// with entries at most `max_entry`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanFunctor {
    pub carrier: usize,
    pub max_object: usize,
    pub max_entry: u64,
    pub maps: BTreeMap<SpanClass, FinMap>,
}

impl SpanFunctor {
    pub fn object(&self, k: usize) -> usize {
        self.carrier.pow(k as u32)
    }

    pub fn get(&self, c: &SpanClass) -> Option<&FinMap> {
        self.maps.get(c)
    }

    /// Identities, composition on all composable pairs whose factors have
    /// entries at most `check_entry`, and product preservation at 0 and 2.
    pub fn check(&self, check_entry: u64) -> Result<()> {
        let lookup = |c: &SpanClass| {
            self.maps.get(c).ok_or_else(|| Error::NotFunctorial(format!("no image for {c}")))
        };
        for k in 0..=self.max_object {
            if *lookup(&SpanClass::identity(k))? != FinMap::identity(&FinSet::new(self.object(k))) {
                return Err(Error::NotFunctorial(format!("F(id_{k}) is not the identity")));
            }
        }
        if self.object(0) != 1 {
            return Err(Error::NotProductPreserving("F(0) is not a singleton".into()));
        }
        if self.max_object >= 2 {
            let p1 = lookup(&SpanClass::new(2, 1, vec![1, 0]).expect("1×2"))?;
            let p2 = lookup(&SpanClass::new(2, 1, vec![0, 1]).expect("1×2"))?;
            if !finset::pairing(p1, p2)?.is_bijective() {
                return Err(Error::NotProductPreserving(
                    "F(2) -> F(1) × F(1) induced by the projections is not a bijection".into(),
                ));
            }
        }
        for a in 0..=self.max_object {
            for b in 0..=self.max_object {
                for c in 0..=self.max_object {
                    for first in SpanClass::enumerate(a, b, check_entry) {
                        let f = lookup(&first)?;
                        for second in SpanClass::enumerate(b, c, check_entry) {
                            let composite = first.then(&second)?;
                            let expected = finset::compose_maps(f, lookup(&second)?)?;
                            if *lookup(&composite)? != expected {
                                return Err(Error::NotFunctorial(format!(
                                    "F({second} ∘ {first}) != F({second}) ∘ F({first})"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn require_cmon_signature(p: &Presentation) -> Result<(usize, usize)> {
    let e = p.op("e").filter(|o| o.arity == 0).and_then(|_| p.op_index("e"));
    let m = p.op("m").filter(|o| o.arity == 2).and_then(|_| p.op_index("m"));
    match (e, m) {
        (Some(e), Some(m)) if p.ops().len() == 2 => Ok((e, m)),
        _ => Err(Error::Configuration("expected the signature {e : 0, m : 2}".into())),
    }
}

/// The span functor of a commutative monoid: a class `A : x -> y` acts on
/// `M^x` by `v ↦ (Σ_x A[y][x]·v_x)_y`.
pub fn cmon_to_spanfunctor(model: &Model, max_object: usize, max_entry: u64) -> Result<SpanFunctor> {
    let (e, m) = require_cmon_signature(&model.presentation)?;
    if !Presentation::cmon().same_structure(&model.presentation) {
        return Err(Error::Configuration("not the commutative monoid presentation".into()));
    }
    model_witness(model)?;
    let n = model.carrier;
    let unit = model.tables[e][0];
    let add = |a: usize, b: usize| model.tables[m][a * n + b];
    let scale = |k: u64, v: usize| (0..k).fold(unit, |acc, _| add(acc, v));
    let mut maps = BTreeMap::new();
    for src in 0..=max_object {
        for tgt in 0..=max_object {
            let dom = n.pow(src as u32);
            for class in SpanClass::enumerate(src, tgt, max_entry) {
                let table = (0..dom)
                    .map(|z| {
                        let v = decode_tuple(z, n, src);
                        let out: Vec<usize> = (0..tgt)
                            .map(|y| (0..src).fold(unit, |acc, x| add(acc, scale(class.get(y, x), v[x]))))
                            .collect();
                        tuple_index(&out, n)
                    })
                    .collect();
                let map = FinMap::new(FinSet::new(dom), FinSet::new(n.pow(tgt as u32)), table)?;
                maps.insert(class, map);
            }
        }
    }
    Ok(SpanFunctor { carrier: n, max_object, max_entry, maps })
}

/// Reads a commutative monoid off a product-preserving span functor: the
/// unit is the image of `0 <- 0 -> 1`, the addition that of `2 <- 2 -> 1`.
pub fn spanfunctor_to_cmon(f: &SpanFunctor, check_entry: u64) -> Result<Model> {
    if f.max_object < 2 {
        return Err(Error::Configuration("need objects up to 2".into()));
    }
    f.check(check_entry)?;
    let n = f.carrier;
    let unit_map = f.get(&SpanClass::zero(0, 1)).ok_or_else(|| Error::NotFunctorial("no unit".into()))?;
    let fold = f
        .get(&SpanClass::new(2, 1, vec![1, 1]).expect("1×2"))
        .ok_or_else(|| Error::NotFunctorial("no addition".into()))?;
    let p1 = &f.maps[&SpanClass::new(2, 1, vec![1, 0]).expect("1×2")];
    let p2 = &f.maps[&SpanClass::new(2, 1, vec![0, 1]).expect("1×2")];
    let pair = finset::pairing(p1, p2)?.inverse().expect("checked bijective");
    let add: Vec<usize> = (0..n * n).map(|ab| fold.apply(pair.apply(ab))).collect();
    let p = Arc::new(Presentation::cmon());
    let model = Model::new(p, n, vec![vec![unit_map.apply(0)], add])?;
    model_witness(&model)?;
    Ok(model)
}
