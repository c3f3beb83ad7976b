//! Finite groups acting on finite sets (on the right), orbit decompositions,
//! tables of marks, equivariant spans and the Burnside semiring.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finset::{self, Budget, FinMap, FinSet};
use crate::spancat::Span;

/// A group given by its Cayley table, `table[a * order + b] = a·b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    pub fn new(order: usize, table: Vec<usize>, identity: usize) -> Result<Self> {
        let bad = |m: String| Error::InvalidGroup(m);
        if order == 0 {
            return Err(bad("a group has at least one element".into()));
        }
        if order > 64 {
            return Err(bad(format!("order {order} exceeds the supported 64")));
        }
        if table.len() != order * order {
            return Err(bad(format!("table has {} entries, expected {}", table.len(), order * order)));
        }
        if identity >= order || table.iter().any(|&v| v >= order) {
            return Err(bad("entry outside the group".into()));
        }
        let mul = |a: usize, b: usize| table[a * order + b];
        for a in 0..order {
            if mul(identity, a) != a || mul(a, identity) != a {
                return Err(bad(format!("{identity} is not a two-sided identity at {a}")));
            }
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                        return Err(bad(format!("associativity fails at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        let inverses = (0..order)
            .map(|a| (0..order).find(|&b| mul(a, b) == identity && mul(b, a) == identity))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| bad("some element has no inverse".into()))?;
        Ok(FiniteGroup { name: format!("G{order}"), order, table, identity, inverses })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn trivial() -> Self {
        Self::cyclic(1).named("trivial")
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n * n).map(|i| (i / n + i % n) % n).collect();
        Self::new(n, table, 0).expect("cyclic group").named(format!("C{n}"))
    }

    pub fn klein() -> Self {
        let table = (0..16).map(|i| (i / 4) ^ (i % 4)).collect();
        Self::new(4, table, 0).expect("Klein group").named("C2xC2")
    }

    /// Permutations of three letters in lexicographic order; `a·b` applies
    /// `a` first.
    pub fn s3() -> Self {
        let perms: Vec<[usize; 3]> =
            vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("permutation");
        let mut table = Vec::with_capacity(36);
        for a in &perms {
            for b in &perms {
                table.push(index([b[a[0]], b[a[1]], b[a[2]]]));
            }
        }
        Self::new(6, table, 0).expect("S3").named("S3")
    }

    pub fn builtins() -> Vec<FiniteGroup> {
        vec![Self::cyclic(2), Self::cyclic(3), Self::cyclic(4), Self::klein(), Self::s3()]
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "trivial" | "c1" | "e" => Ok(Self::trivial()),
            "c2" => Ok(Self::cyclic(2)),
            "c3" => Ok(Self::cyclic(3)),
            "c4" => Ok(Self::cyclic(4)),
            "c2xc2" | "v4" | "klein" => Ok(Self::klein()),
            "s3" => Ok(Self::s3()),
            other => Err(Error::Configuration(format!("unknown built-in group `{other}`"))),
        }
    }

    /// Reads `{order, table, identity}` with the table flat or as rows.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidGroup(m.to_string());
        let order = value.get("order").and_then(|v| v.as_u64()).ok_or_else(|| bad("missing order"))? as usize;
        let identity = value.get("identity").and_then(|v| v.as_u64()).unwrap_or(0) as usize;
        let raw = value.get("table").and_then(|v| v.as_array()).ok_or_else(|| bad("missing table"))?;
        let mut table = Vec::with_capacity(order * order);
        for entry in raw {
            match entry {
                serde_json::Value::Array(row) => {
                    for v in row {
                        table.push(v.as_u64().ok_or_else(|| bad("non-integer entry"))? as usize);
                    }
                }
                v => table.push(v.as_u64().ok_or_else(|| bad("non-integer entry"))? as usize),
            }
        }
        let g = Self::new(order, table, identity)?;
        Ok(match value.get("name").and_then(|v| v.as_str()) {
            Some(name) => g.named(name),
            None => g,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn elements_of(&self, mask: u64) -> Vec<usize> {
        (0..self.order).filter(|&i| mask >> i & 1 == 1).collect()
    }

    pub fn full_mask(&self) -> u64 {
        if self.order == 64 {
            u64::MAX
        } else {
            (1u64 << self.order) - 1
        }
    }

    /// Smallest subgroup containing `mask`.
    pub fn closure(&self, mask: u64) -> u64 {
        let mut set = mask | 1 << self.identity;
        loop {
            let elems = self.elements_of(set);
            let mut next = set;
            for &a in &elems {
                for &b in &elems {
                    next |= 1 << self.mul(a, b);
                }
            }
            if next == set {
                return set;
            }
            set = next;
        }
    }

    /// `g⁻¹ H g`, the stabilizer of `x·g` when `H` stabilizes `x`.
    pub fn conjugate(&self, mask: u64, g: usize) -> u64 {
        self.elements_of(mask)
            .into_iter()
            .fold(0, |acc, h| acc | 1 << self.mul(self.mul(self.inv(g), h), g))
    }

    pub fn is_subgroup(&self, mask: u64) -> bool {
        mask >> self.identity & 1 == 1 && self.closure(mask) == mask
    }

    /// All subgroups, ordered by size then mask.
    pub fn subgroups(&self) -> Vec<u64> {
        let start = 1u64 << self.identity;
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(h) = queue.pop_front() {
            for x in 0..self.order {
                if h >> x & 1 == 0 {
                    let k = self.closure(h | 1 << x);
                    if seen.insert(k) {
                        queue.push_back(k);
                    }
                }
            }
        }
        let mut out: Vec<u64> = seen.into_iter().collect();
        out.sort_by_key(|&m| (m.count_ones(), m));
        out
    }
}

impl Serialize for FiniteGroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[usize]> = self.table.chunks(self.order).collect();
        let mut st = s.serialize_struct("FiniteGroup", 4)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("table", &rows)?;
        st.serialize_field("identity", &self.identity)?;
        st.end()
    }
}

/// Displays a subgroup as its sorted element list, e.g. `{0,3}`.
pub fn subgroup_name(g: &FiniteGroup, mask: u64) -> String {
    let elems: Vec<String> = g.elements_of(mask).iter().map(|e| e.to_string()).collect();
    format!("{{{}}}", elems.join(","))
}

/// A conjugacy class of subgroups with its least mask as representative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubgroupClass {
    pub representative: u64,
    pub order: usize,
    pub conjugates: Vec<u64>,
    pub name: String,
}

pub fn subgroup_classes(g: &FiniteGroup) -> Vec<SubgroupClass> {
    let mut seen = BTreeSet::new();
    let mut classes = Vec::new();
    for h in g.subgroups() {
        if seen.contains(&h) {
            continue;
        }
        let conjugates: BTreeSet<u64> = (0..g.order()).map(|x| g.conjugate(h, x)).collect();
        seen.extend(conjugates.iter().copied());
        let representative = *conjugates.iter().next().expect("non-empty");
        classes.push(SubgroupClass {
            representative,
            order: h.count_ones() as usize,
            conjugates: conjugates.into_iter().collect(),
            name: subgroup_name(g, representative),
        });
    }
    classes.sort_by_key(|c| (c.order, c.representative));
    classes
}

fn class_index(classes: &[SubgroupClass], mask: u64) -> usize {
    classes.iter().position(|c| c.conjugates.contains(&mask)).expect("every subgroup has a class")
}

/// A finite set with a right action, `action[x * |G| + g] = x·g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GSet {
    group: Arc<FiniteGroup>,
    size: usize,
    action: Vec<usize>,
}

impl GSet {
    pub fn new(group: Arc<FiniteGroup>, size: usize, action: Vec<usize>) -> Result<Self> {
        let n = group.order();
        if action.len() != size * n || action.iter().any(|&v| v >= size) {
            return Err(Error::InvalidAction("action table has the wrong shape".into()));
        }
        for x in 0..size {
            if action[x * n + group.identity()] != x {
                return Err(Error::InvalidAction(format!("{x}·e != {x}")));
            }
            for a in 0..n {
                for b in 0..n {
                    if action[action[x * n + a] * n + b] != action[x * n + group.mul(a, b)] {
                        return Err(Error::InvalidAction(format!("({x}·{a})·{b} != {x}·({a}{b})")));
                    }
                }
            }
        }
        Ok(GSet { group, size, action })
    }

    pub fn trivial_action(group: Arc<FiniteGroup>, size: usize) -> Self {
        let action = (0..size).flat_map(|x| std::iter::repeat(x).take(group.order())).collect();
        GSet { group, size, action }
    }

    pub fn regular(group: Arc<FiniteGroup>) -> Self {
        let n = group.order();
        let action = (0..n * n).map(|i| group.mul(i / n, i % n)).collect();
        GSet { group, size: n, action }
    }

    /// Right cosets `Hx`, numbered by their least element.
    pub fn coset_space(group: Arc<FiniteGroup>, subgroup: u64) -> Result<Self> {
        if !group.is_subgroup(subgroup) {
            return Err(Error::InvalidGroup(format!("{} is not a subgroup", subgroup_name(&group, subgroup))));
        }
        let n = group.order();
        let (coset_of, reps) = right_cosets(&group, subgroup);
        let action = reps.iter().flat_map(|&r| (0..n).map(|g| coset_of[group.mul(r, g)]).collect::<Vec<_>>()).collect();
        Ok(GSet { size: reps.len(), group, action })
    }

    pub fn empty(group: Arc<FiniteGroup>) -> Self {
        GSet { group, size: 0, action: Vec::new() }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn underlying(&self) -> FinSet {
        FinSet::new(self.size)
    }

    pub fn act(&self, x: usize, g: usize) -> usize {
        self.action[x * self.group.order() + g]
    }

    pub fn stabilizer(&self, x: usize) -> u64 {
        (0..self.group.order()).filter(|&g| self.act(x, g) == x).fold(0, |acc, g| acc | 1 << g)
    }

    pub fn fixed_points(&self, subgroup: u64) -> usize {
        let ks = self.group.elements_of(subgroup);
        (0..self.size).filter(|&x| ks.iter().all(|&k| self.act(x, k) == x)).count()
    }

    /// Orbits as sorted point lists, ordered by least point.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.size];
        let mut out = Vec::new();
        for x in 0..self.size {
            if !seen[x] {
                let orbit: BTreeSet<usize> = (0..self.group.order()).map(|g| self.act(x, g)).collect();
                for &y in &orbit {
                    seen[y] = true;
                }
                out.push(orbit.into_iter().collect());
            }
        }
        out
    }

    pub fn is_equivariant(&self, target: &GSet, map: &FinMap) -> bool {
        (0..self.size).all(|x| (0..self.group.order()).all(|g| map.apply(self.act(x, g)) == target.act(map.apply(x), g)))
    }
}

/// Coset index of every element, and the least element of every coset.
fn right_cosets(group: &FiniteGroup, subgroup: u64) -> (Vec<usize>, Vec<usize>) {
    let h = group.elements_of(subgroup);
    let mut coset_of = vec![usize::MAX; group.order()];
    let mut reps = Vec::new();
    for x in 0..group.order() {
        if coset_of[x] == usize::MAX {
            for &k in &h {
                coset_of[group.mul(k, x)] = reps.len();
            }
            reps.push(x);
        }
    }
    (coset_of, reps)
}

/// Disjoint union with the two injections.
pub fn gset_coproduct(a: &GSet, b: &GSet) -> Result<(GSet, GMap, GMap)> {
    same_group(a, b)?;
    let (sum, i1, i2) = finset::coproduct(&a.underlying(), &b.underlying());
    let n = a.group.order();
    let mut action = a.action.clone();
    action.extend(b.action.iter().map(|&y| y + a.size));
    let sum = GSet { group: a.group.clone(), size: sum.size(), action };
    let i1 = GMap { source: a.clone(), target: sum.clone(), map: i1 };
    let i2 = GMap { source: b.clone(), target: sum.clone(), map: i2 };
    debug_assert_eq!(sum.action.len(), sum.size * n);
    Ok((sum, i1, i2))
}

/// Cartesian product with the diagonal action; `(x, y)` sits at `x·|b| + y`.
pub fn gset_product(a: &GSet, b: &GSet) -> Result<GSet> {
    same_group(a, b)?;
    let n = a.group.order();
    let mut action = Vec::with_capacity(a.size * b.size * n);
    for x in 0..a.size {
        for y in 0..b.size {
            for g in 0..n {
                action.push(a.act(x, g) * b.size + b.act(y, g));
            }
        }
    }
    Ok(GSet { group: a.group.clone(), size: a.size * b.size, action })
}

fn same_group(a: &GSet, b: &GSet) -> Result<()> {
    if a.group != b.group {
        return Err(Error::InvalidAction(format!("groups {} and {} differ", a.group.name(), b.group.name())));
    }
    Ok(())
}

/// One orbit of a decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Orbit {
    pub points: Vec<usize>,
    pub base: usize,
    pub stabilizer: u64,
    /// Index into [`subgroup_classes`].
    pub class: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitDecomposition {
    pub orbits: Vec<Orbit>,
    /// `⊔ G/Stab(base)` over the orbits.
    pub model: GSet,
    /// Equivariant bijection `model -> X`, `Stab(base)·g ↦ base·g`.
    pub iso: GMap,
}

impl OrbitDecomposition {
    /// Number of orbits of each subgroup class.
    pub fn multiplicities(&self, classes: usize) -> Vec<u64> {
        let mut out = vec![0; classes];
        for o in &self.orbits {
            out[o.class] += 1;
        }
        out
    }
}

pub fn orbit_decompose(x: &GSet) -> Result<OrbitDecomposition> {
    let g = x.group.clone();
    let classes = subgroup_classes(&g);
    let mut model = GSet::empty(g.clone());
    let mut table = Vec::new();
    let mut orbits = Vec::new();
    for points in x.orbits() {
        let base = points[0];
        let stabilizer = x.stabilizer(base);
        let cosets = GSet::coset_space(g.clone(), stabilizer)?;
        // the coset with least element r goes to base·r
        let (_, reps) = right_cosets(&g, stabilizer);
        table.extend(reps.iter().map(|&r| x.act(base, r)));
        model = gset_coproduct(&model, &cosets)?.0;
        orbits.push(Orbit { class: class_index(&classes, stabilizer), points, base, stabilizer });
    }
    let map = FinMap::new(model.underlying(), x.underlying(), table)?;
    let iso = GMap::new(model.clone(), x.clone(), map)?;
    if !iso.map.is_bijective() {
        return Err(Error::NotEquivariant("orbit reconstruction is not bijective".into()));
    }
    Ok(OrbitDecomposition { orbits, model, iso })
}

/// `marks[H][K] = |(G/H)^K|` over subgroup classes in canonical order.
pub fn table_of_marks(g: &FiniteGroup) -> Vec<Vec<u64>> {
    let g = Arc::new(g.clone());
    let classes = subgroup_classes(&g);
    classes
        .iter()
        .map(|h| {
            let cosets = GSet::coset_space(g.clone(), h.representative).expect("subgroup");
            classes.iter().map(|k| cosets.fixed_points(k.representative) as u64).collect()
        })
        .collect()
}

/// Marks keyed by class names, for reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarksTable {
    pub group: String,
    pub classes: Vec<String>,
    pub marks: Vec<Vec<u64>>,
}

pub fn marks_table(g: &FiniteGroup) -> MarksTable {
    MarksTable {
        group: g.name().to_string(),
        classes: subgroup_classes(g).into_iter().map(|c| c.name).collect(),
        marks: table_of_marks(g),
    }
}

/// An equivariant map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GMap {
    source: GSet,
    target: GSet,
    map: FinMap,
}

impl GMap {
    pub fn new(source: GSet, target: GSet, map: FinMap) -> Result<Self> {
        same_group(&source, &target)?;
        if map.dom().size() != source.size || map.cod().size() != target.size {
            return Err(Error::InvalidMap("map does not match the G-sets".into()));
        }
        if !source.is_equivariant(&target, &map) {
            return Err(Error::NotEquivariant("f(x·g) != f(x)·g".into()));
        }
        Ok(GMap { source, target, map })
    }

    pub fn identity(x: &GSet) -> Self {
        GMap { source: x.clone(), target: x.clone(), map: FinMap::identity(&x.underlying()) }
    }

    pub fn source(&self) -> &GSet {
        &self.source
    }

    pub fn target(&self) -> &GSet {
        &self.target
    }

    pub fn map(&self) -> &FinMap {
        &self.map
    }
}

/// `g ∘ f`.
pub fn compose_gmaps(f: &GMap, g: &GMap) -> Result<GMap> {
    Ok(GMap { source: f.source.clone(), target: g.target.clone(), map: finset::compose_maps(&f.map, &g.map)? })
}

/// Every equivariant map `a -> b`, in lexicographic order of tables.
pub fn equivariant_maps(a: &GSet, b: &GSet, budget: Budget) -> Result<Vec<GMap>> {
    same_group(a, b)?;
    Ok(finset::enumerate_maps(&a.underlying(), &b.underlying(), budget)?
        .filter(|m| a.is_equivariant(b, m))
        .map(|map| GMap { source: a.clone(), target: b.clone(), map })
        .collect())
}

/// Pullback with the diagonal action, and its two projections.
pub fn gset_pullback(f: &GMap, g: &GMap) -> Result<(GSet, GMap, GMap)> {
    same_group(&f.source, &g.source)?;
    let (p, p1, p2) = finset::pullback(&f.map, &g.map)?;
    let index: HashMap<(usize, usize), usize> = (0..p.size()).map(|i| ((p1.apply(i), p2.apply(i)), i)).collect();
    let n = f.source.group.order();
    let mut action = Vec::with_capacity(p.size() * n);
    for i in 0..p.size() {
        for e in 0..n {
            action.push(index[&(f.source.act(p1.apply(i), e), g.source.act(p2.apply(i), e))]);
        }
    }
    let pb = GSet { group: f.source.group.clone(), size: p.size(), action };
    let pr1 = GMap::new(pb.clone(), f.source.clone(), p1)?;
    let pr2 = GMap::new(pb.clone(), g.source.clone(), p2)?;
    Ok((pb, pr1, pr2))
}

/// An equivariant span `source <- middle -> target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GSpan {
    left: GMap,
    right: GMap,
}

impl GSpan {
    pub fn new(left: GMap, right: GMap) -> Result<Self> {
        if left.source != right.source {
            return Err(Error::InvalidMap("legs have different middles".into()));
        }
        Ok(GSpan { left, right })
    }

    pub fn identity(x: &GSet) -> Self {
        GSpan { left: GMap::identity(x), right: GMap::identity(x) }
    }

    pub fn left(&self) -> &GMap {
        &self.left
    }

    pub fn right(&self) -> &GMap {
        &self.right
    }

    pub fn source(&self) -> &GSet {
        &self.left.target
    }

    pub fn target(&self) -> &GSet {
        &self.right.target
    }

    pub fn middle(&self) -> &GSet {
        &self.left.source
    }

    /// The underlying span of finite sets.
    pub fn forget(&self) -> Span {
        Span::new(self.left.map.clone(), self.right.map.clone()).expect("shared middle")
    }
}

/// `s` followed by `t`.
pub fn compose_gspans(s: &GSpan, t: &GSpan) -> Result<GSpan> {
    if s.target() != t.source() {
        return Err(Error::CompositionMismatch { left: s.target().size, right: t.source().size });
    }
    let (_, p1, p2) = gset_pullback(&s.right, &t.left)?;
    GSpan::new(compose_gmaps(&p1, &s.left)?, compose_gmaps(&p2, &t.right)?)
}

/// Middle disjoint union of two spans with the same endpoints.
pub fn add_gspans(s: &GSpan, t: &GSpan) -> Result<GSpan> {
    if s.source() != t.source() || s.target() != t.target() {
        return Err(Error::DimensionMismatch("spans with different endpoints".into()));
    }
    let (sum, _, _) = gset_coproduct(s.middle(), t.middle())?;
    let left = GMap::new(sum.clone(), s.source().clone(), finset::copairing(&s.left.map, &t.left.map)?)?;
    let right = GMap::new(sum, s.target().clone(), finset::copairing(&s.right.map, &t.right.map)?)?;
    GSpan::new(left, right)
}

/// The empty span between two G-sets.
pub fn zero_gspan(x: &GSet, y: &GSet) -> GSpan {
    let empty = GSet::empty(x.group.clone());
    let left = GMap { source: empty.clone(), target: x.clone(), map: FinMap::empty(&x.underlying()) };
    let right = GMap { source: empty, target: y.clone(), map: FinMap::empty(&y.underlying()) };
    GSpan { left, right }
}

/// Isomorphism class of an equivariant span with fixed endpoints: the
/// sorted multiset of orbit types `(point of X × Y, stabilizer)`, each
/// taken in its least form over the group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GSpanClass {
    pub source: usize,
    pub target: usize,
    pub orbits: Vec<(usize, u64)>,
}

pub fn gspan_class(s: &GSpan) -> GSpanClass {
    let g = &s.middle().group;
    let (x, y) = (s.source(), s.target());
    let mut orbits: Vec<(usize, u64)> = s
        .middle()
        .orbits()
        .into_iter()
        .map(|o| {
            let t = o[0];
            let h = s.middle().stabilizer(t);
            let (a, b) = (s.left.map.apply(t), s.right.map.apply(t));
            (0..g.order())
                .map(|e| (x.act(a, e) * y.size + y.act(b, e), g.conjugate(h, e)))
                .min()
                .expect("non-empty group")
        })
        .collect();
    orbits.sort_unstable();
    GSpanClass { source: x.size, target: y.size, orbits }
}

/// One representative per isomorphism class of G-sets of each size up to
/// `max_size`, with its orbit multiplicities per subgroup class.
pub fn gsets_up_to_iso(g: &Arc<FiniteGroup>, max_size: usize) -> Result<Vec<(Vec<u64>, GSet)>> {
    let classes = subgroup_classes(g);
    let orbits: Vec<GSet> = classes.iter().map(|c| GSet::coset_space(g.clone(), c.representative)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    fn go(
        i: usize,
        room: usize,
        counts: &mut Vec<u64>,
        current: GSet,
        orbits: &[GSet],
        out: &mut Vec<(Vec<u64>, GSet)>,
    ) -> Result<()> {
        if i == orbits.len() {
            out.push((counts.clone(), current));
            return Ok(());
        }
        let mut set = current;
        let mut left = room;
        let mut k = 0;
        loop {
            counts[i] = k;
            go(i + 1, left, counts, set.clone(), orbits, out)?;
            if orbits[i].size() > left {
                break;
            }
            left -= orbits[i].size();
            set = gset_coproduct(&set, &orbits[i])?.0;
            k += 1;
        }
        counts[i] = 0;
        Ok(())
    }
    let mut counts = vec![0; orbits.len()];
    go(0, max_size, &mut counts, GSet::empty(g.clone()), &orbits, &mut out)?;
    out.sort_by(|a, b| (a.1.size, &a.0).cmp(&(b.1.size, &b.0)));
    Ok(out)
}

/// Isomorphism classes of finite G-sets: N-combinations of the orbits
/// `G/H`, with disjoint union and cartesian product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BurnsideSemiring {
    group: Arc<FiniteGroup>,
    classes: Vec<SubgroupClass>,
    marks: Vec<Vec<u64>>,
    /// `structure[i][j][k]`: copies of `G/H_k` in `G/H_i × G/H_j`.
    structure: Vec<Vec<Vec<u64>>>,
}

pub fn burnside_semiring(g: &FiniteGroup) -> Result<BurnsideSemiring> {
    let group = Arc::new(g.clone());
    let classes = subgroup_classes(&group);
    let orbits: Vec<GSet> =
        classes.iter().map(|c| GSet::coset_space(group.clone(), c.representative)).collect::<Result<_>>()?;
    let mut structure = Vec::new();
    for a in &orbits {
        let mut row = Vec::new();
        for b in &orbits {
            row.push(orbit_decompose(&gset_product(a, b)?)?.multiplicities(classes.len()));
        }
        structure.push(row);
    }
    Ok(BurnsideSemiring { marks: table_of_marks(&group), group, classes, structure })
}

impl BurnsideSemiring {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn classes(&self) -> &[SubgroupClass] {
        &self.classes
    }

    pub fn rank(&self) -> usize {
        self.classes.len()
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.rank()]
    }

    /// `[G/G]`, the class of a point.
    pub fn one(&self) -> Vec<u64> {
        let top = class_index(&self.classes, self.group.full_mask());
        self.basis(top)
    }

    pub fn basis(&self, i: usize) -> Vec<u64> {
        let mut v = self.zero();
        v[i] = 1;
        v
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out = self.zero();
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                if x * y != 0 {
                    for (k, c) in self.structure[i][j].iter().enumerate() {
                        out[k] += x * y * c;
                    }
                }
            }
        }
        out
    }

    /// Fixed-point counts `|X^K|` for every class `K`.
    pub fn marks(&self, a: &[u64]) -> Vec<u64> {
        (0..self.rank()).map(|k| a.iter().zip(&self.marks).map(|(x, row)| x * row[k]).sum()).collect()
    }

    pub fn class_of(&self, x: &GSet) -> Result<Vec<u64>> {
        Ok(orbit_decompose(x)?.multiplicities(self.rank()))
    }

    pub fn realize(&self, a: &[u64]) -> Result<GSet> {
        let mut out = GSet::empty(self.group.clone());
        for (c, &k) in self.classes.iter().zip(a) {
            let orbit = GSet::coset_space(self.group.clone(), c.representative)?;
            for _ in 0..k {
                out = gset_coproduct(&out, &orbit)?.0;
            }
        }
        Ok(out)
    }

    /// Coefficient vectors with every entry at most `bound`.
    pub fn elements(&self, bound: u64) -> Vec<Vec<u64>> {
        let mut out = vec![Vec::new()];
        for _ in 0..self.rank() {
            out = out.into_iter().flat_map(|v| (0..=bound).map(move |c| [v.clone(), vec![c]].concat())).collect();
        }
        out
    }
}

impl Serialize for BurnsideSemiring {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let names: Vec<&str> = self.classes.iter().map(|c| c.name.as_str()).collect();
        let mut products: BTreeMap<String, BTreeMap<&str, u64>> = BTreeMap::new();
        for (i, a) in names.iter().enumerate() {
            for (j, b) in names.iter().enumerate() {
                let terms = self.structure[i][j]
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(k, &c)| (names[k], c))
                    .collect();
                products.insert(format!("{a}*{b}"), terms);
            }
        }
        let mut st = s.serialize_struct("BurnsideSemiring", 5)?;
        st.serialize_field("group", self.group.name())?;
        st.serialize_field("classes", &names)?;
        st.serialize_field("one", names[class_index(&self.classes, self.group.full_mask())])?;
        st.serialize_field("marks", &self.marks)?;
        st.serialize_field("products", &products)?;
        st.end()
    }
}

/// The orbit category: the orbits `G/H` over class representatives and
/// all equivariant maps between them.
#[derive(Debug, Clone)]
pub struct OrbitCategory {
    pub orbits: Vec<GSet>,
    /// `(source, target, map)`.
    pub morphisms: Vec<(usize, usize, GMap)>,
}

pub fn orbit_category(g: &Arc<FiniteGroup>, budget: Budget) -> Result<OrbitCategory> {
    let orbits: Vec<GSet> = subgroup_classes(g)
        .iter()
        .map(|c| GSet::coset_space(g.clone(), c.representative))
        .collect::<Result<_>>()?;
    let mut morphisms = Vec::new();
    for (i, a) in orbits.iter().enumerate() {
        for (j, b) in orbits.iter().enumerate() {
            for f in equivariant_maps(a, b, budget)? {
                morphisms.push((i, j, f));
            }
        }
    }
    Ok(OrbitCategory { orbits, morphisms })
}

/// A presheaf on the orbit category: a set per orbit and a restriction
/// `P(target) -> P(source)` per morphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presheaf {
    pub sizes: Vec<usize>,
    pub maps: Vec<FinMap>,
}

fn morphism_index(cat: &OrbitCategory, i: usize, j: usize, map: &FinMap) -> usize {
    cat.morphisms
        .iter()
        .position(|(s, t, f)| *s == i && *t == j && f.map == *map)
        .expect("closed under composition")
}

/// Every presheaf with all values of size at most `max_size`.
pub fn presheaves(cat: &OrbitCategory, max_size: usize, budget: Budget) -> Result<Vec<Presheaf>> {
    let k = cat.orbits.len();
    let count = (max_size as u128 + 1).saturating_pow(k as u32);
    budget.check(count)?;
    // composable pairs (f: a -> b, g: b -> c) with the index of g∘f
    let mut relations = Vec::new();
    for (fi, (a, b, f)) in cat.morphisms.iter().enumerate() {
        for (gi, (b2, c, g)) in cat.morphisms.iter().enumerate() {
            if b == b2 {
                let h = finset::compose_maps(&f.map, &g.map)?;
                relations.push((fi, gi, morphism_index(cat, *a, *c, &h)));
            }
        }
    }
    let mut out = Vec::new();
    let mut examined = 0u128;
    for code in 0..count as usize {
        let sizes: Vec<usize> = (0..k).map(|i| code / (max_size + 1).pow(i as u32) % (max_size + 1)).collect();
        let mut choices: Vec<Vec<FinMap>> = Vec::new();
        for (a, b, f) in &cat.morphisms {
            let (dom, cod) = (FinSet::new(sizes[*b]), FinSet::new(sizes[*a]));
            if a == b && f.map == FinMap::identity(&f.source.underlying()) {
                choices.push(vec![FinMap::identity(&dom)]);
                continue;
            }
            choices.push(finset::enumerate_maps(&dom, &cod, budget)?.collect());
        }
        let total: u128 = choices.iter().map(|c| c.len() as u128).product();
        if total == 0 {
            continue;
        }
        examined += total;
        budget.check(examined)?;
        let mut pick = vec![0usize; choices.len()];
        'outer: loop {
            let maps: Vec<&FinMap> = pick.iter().zip(&choices).map(|(&i, c)| &c[i]).collect();
            let ok = relations.iter().all(|&(f, g, h)| {
                // P(g∘f) = P(f) ∘ P(g)
                finset::compose_maps(maps[g], maps[f]).map(|m| m == *maps[h]).unwrap_or(false)
            });
            if ok {
                out.push(Presheaf { sizes: sizes.clone(), maps: maps.into_iter().cloned().collect() });
            }
            for i in (0..pick.len()).rev() {
                pick[i] += 1;
                if pick[i] < choices[i].len() {
                    continue 'outer;
                }
                pick[i] = 0;
            }
            break;
        }
    }
    Ok(out)
}

/// A functor on G-sets with at most two orbits, contravariant in maps.
#[derive(Debug, Clone)]
pub struct GFunctor {
    /// G-sets as multisets of orbit indices, with the sets themselves.
    pub objects: Vec<(Vec<usize>, GSet)>,
    pub values: Vec<usize>,
    /// `(source, target, h, F(h) : F(target) -> F(source))`.
    pub maps: Vec<(usize, usize, GMap, FinMap)>,
    /// For two-orbit objects: the objects of the summands and the indices
    /// of the two injections in `maps`.
    pub splittings: Vec<Option<(usize, usize, usize, usize)>>,
    /// For an extended presheaf: evaluation at the identity,
    /// `F(O_j) -> P(O_j)`, per orbit.
    pub restriction: Vec<FinMap>,
}

impl GFunctor {
    /// `F(∅)` a point, `F(A ⊔ B) -> F(A) × F(B)` bijective, identities,
    /// and composition on every composable pair.
    pub fn check(&self) -> Result<()> {
        let index: HashMap<(usize, usize, &FinMap), usize> =
            self.maps.iter().enumerate().map(|(i, (s, t, h, _))| ((*s, *t, &h.map), i)).collect();
        for (s, t, h, fh) in &self.maps {
            if fh.dom().size() != self.values[*t] || fh.cod().size() != self.values[*s] {
                return Err(Error::NotFunctorial(format!("F of a map {s} -> {t} has the wrong type")));
            }
            if s == t && h.map == FinMap::identity(&h.source.underlying()) && *fh != FinMap::identity(&FinSet::new(self.values[*s])) {
                return Err(Error::NotFunctorial(format!("F(id) is not the identity on object {s}")));
            }
        }
        for (o, (orbits, _)) in self.objects.iter().enumerate() {
            if orbits.is_empty() && self.values[o] != 1 {
                return Err(Error::NotProductPreserving(format!("F(∅) has {} elements", self.values[o])));
            }
        }
        for (o, split) in self.splittings.iter().enumerate() {
            if let Some((_, _, i1, i2)) = split {
                let comparison = finset::pairing(&self.maps[*i1].3, &self.maps[*i2].3)?;
                if !comparison.is_bijective() {
                    return Err(Error::NotProductPreserving(format!(
                        "F({:?}) -> F × F is not a bijection",
                        self.objects[o].0
                    )));
                }
            }
        }
        for (a, b, f, ff) in &self.maps {
            for (b2, c, g, fg) in &self.maps {
                if b != b2 {
                    continue;
                }
                let gf = finset::compose_maps(&f.map, &g.map)?;
                let h = index[&(*a, *c, &gf)];
                if finset::compose_maps(fg, ff)? != self.maps[h].3 {
                    return Err(Error::NotFunctorial(format!(
                        "F(g∘f) != F(f)∘F(g) for maps {a} -> {b} -> {c}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Extends a presheaf to G-sets with at most two orbits by
/// `F(X) = Nat(Hom(-, X), P)`, computed by enumeration.
pub fn extend_presheaf(cat: &OrbitCategory, p: &Presheaf, budget: Budget) -> Result<GFunctor> {
    let g = cat.orbits.first().map(|o| o.group.clone()).ok_or_else(|| Error::Configuration("empty orbit category".into()))?;
    let k = cat.orbits.len();
    let mut objects: Vec<(Vec<usize>, GSet)> = vec![(vec![], GSet::empty(g.clone()))];
    for i in 0..k {
        objects.push((vec![i], cat.orbits[i].clone()));
    }
    for i in 0..k {
        for j in i..k {
            objects.push((vec![i, j], gset_coproduct(&cat.orbits[i], &cat.orbits[j])?.0));
        }
    }
    // natural transformations Hom(-, X) => P
    let mut elements: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut orbit_maps: Vec<Vec<Vec<GMap>>> = Vec::new();
    for (_, x) in &objects {
        let homs: Vec<Vec<GMap>> = cat.orbits.iter().map(|o| equivariant_maps(o, x, budget)).collect::<Result<_>>()?;
        let slots: Vec<(usize, usize)> = homs.iter().enumerate().flat_map(|(i, h)| (0..h.len()).map(move |u| (i, u))).collect();
        let count: u128 = slots.iter().map(|&(i, _)| p.sizes[i] as u128).product();
        budget.check(count)?;
        let mut nats = Vec::new();
        for code in 0..count as usize {
            let mut c = code;
            let mut alpha = Vec::with_capacity(slots.len());
            for &(i, _) in &slots {
                alpha.push(c % p.sizes[i]);
                c /= p.sizes[i];
            }
            let value = |i: usize, u: usize| alpha[slots.iter().position(|&s| s == (i, u)).expect("slot")];
            // α_i(u ∘ f) = P(f)(α_j(u)) for f: O_i -> O_j
            let natural = cat.morphisms.iter().enumerate().all(|(mi, (i, j, f))| {
                (0..homs[*j].len()).all(|u| {
                    let composite = finset::compose_maps(&f.map, &homs[*j][u].map).expect("composable");
                    let v = homs[*i].iter().position(|h| h.map == composite).expect("equivariant");
                    value(*i, v) == p.maps[mi].apply(value(*j, u))
                })
            });
            if natural {
                nats.push(alpha);
            }
        }
        elements.push(nats);
        orbit_maps.push(homs);
    }
    let mut restriction = Vec::with_capacity(k);
    for j in 0..k {
        let homs = &orbit_maps[1 + j];
        let offset: usize = homs[..j].iter().map(Vec::len).sum();
        let id = FinMap::identity(&cat.orbits[j].underlying());
        let slot = offset + homs[j].iter().position(|h| h.map == id).expect("identity is equivariant");
        let table = elements[1 + j].iter().map(|alpha| alpha[slot]).collect();
        restriction.push(FinMap::from_table(p.sizes[j], table)?);
    }
    let values: Vec<usize> = elements.iter().map(Vec::len).collect();
    let lookup: Vec<HashMap<&Vec<usize>, usize>> =
        elements.iter().map(|e| e.iter().enumerate().map(|(i, a)| (a, i)).collect()).collect();
    let mut maps = Vec::new();
    for (s, (_, x)) in objects.iter().enumerate() {
        for (t, (_, y)) in objects.iter().enumerate() {
            for h in equivariant_maps(x, y, budget)? {
                // (F(h) α)_i(u) = α_i(h ∘ u)
                let table = elements[t]
                    .iter()
                    .map(|alpha| {
                        let mut out = Vec::new();
                        for (i, homs) in orbit_maps[s].iter().enumerate() {
                            for u in homs {
                                let hu = finset::compose_maps(&u.map, &h.map).expect("composable");
                                let v = orbit_maps[t][i].iter().position(|w| w.map == hu).expect("equivariant");
                                let offset: usize = orbit_maps[t][..i].iter().map(Vec::len).sum();
                                out.push(alpha[offset + v]);
                            }
                        }
                        lookup[s][&out]
                    })
                    .collect();
                maps.push((s, t, h, FinMap::from_table(values[s], table)?));
            }
        }
    }
    let splittings = objects
        .iter()
        .map(|(orbits, _)| {
            if orbits.len() != 2 {
                return None;
            }
            let (a, b) = (1 + orbits[0], 1 + orbits[1]);
            let (_, i1, i2) = gset_coproduct(&objects[a].1, &objects[b].1).ok()?;
            let find = |src: usize, inj: &GMap| {
                maps.iter().position(|(s, t, h, _)| *s == src && objects[*t].0 == *orbits && h.map == inj.map)
            };
            Some((a, b, find(a, &i1)?, find(b, &i2)?))
        })
        .collect();
    Ok(GFunctor { objects, values, maps, splittings, restriction })
}

/// Evaluation at the identity is a bijection `F(O_j) -> P(O_j)` carrying
/// `F(f)` to `P(f)` for every orbit map `f`.
fn restriction_recovers(cat: &OrbitCategory, p: &Presheaf, f: &GFunctor) -> bool {
    if f.restriction.len() != cat.orbits.len() || !f.restriction.iter().all(FinMap::is_bijective) {
        return false;
    }
    cat.morphisms.iter().enumerate().all(|(mi, (i, j, h))| {
        let Some((_, _, _, fh)) = f.maps.iter().find(|(s, t, g, _)| *s == 1 + i && *t == 1 + j && g.map == h.map) else {
            return false;
        };
        (0..f.values[1 + j]).all(|alpha| f.restriction[*i].apply(fh.apply(alpha)) == p.maps[mi].apply(f.restriction[*j].apply(alpha)))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElmendorfReport {
    pub group: String,
    pub size: usize,
    pub presheaves: usize,
    pub extensions_passing: usize,
    pub restrictions_recover: usize,
    pub passed: bool,
}

/// Presheaves on the orbit category with values of size at most `size`
/// against product-preserving functors on G-sets with at most two orbits.
pub fn elmendorf_report(g: &FiniteGroup, size: usize, budget: Budget) -> Result<ElmendorfReport> {
    let group = Arc::new(g.clone());
    let cat = orbit_category(&group, budget)?;
    let ps = presheaves(&cat, size, budget)?;
    let mut passing = 0;
    let mut recovered = 0;
    for p in &ps {
        let f = extend_presheaf(&cat, p, budget)?;
        if f.check().is_ok() {
            passing += 1;
        }
        if restriction_recovers(&cat, p, &f) {
            recovered += 1;
        }
    }
    Ok(ElmendorfReport {
        group: g.name().to_string(),
        size,
        presheaves: ps.len(),
        extensions_passing: passing,
        restrictions_recover: recovered,
        passed: passing == ps.len() && recovered == ps.len(),
    })
}

pub fn elmendorf_shadow(g: &FiniteGroup, size: usize) -> Result<bool> {
    Ok(elmendorf_report(g, size, Budget::default())?.passed)
}
