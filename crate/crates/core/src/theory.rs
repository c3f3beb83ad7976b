//! Single-sorted presentations: signatures, terms, equations, and the
//! syntactic category they generate.
//!
//! A morphism `m -> n` of the syntactic category is an `n`-tuple of terms in
//! the variables `x0 .. x{m-1}`. Composition substitutes. Term equality is
//! decided by a registered normalizer when there is one, and otherwise only
//! semidecided by [`bounded_eq`].

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::finset::{checked_pow, Budget};
use crate::semimat::Semiring;

/// A term: a variable or an operation applied to exactly `arity` arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(i: usize) -> Term {
        Term::Var(i)
    }

    pub fn app(op: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(op.into(), args)
    }

    pub fn constant(op: impl Into<String>) -> Term {
        Term::App(op.into(), Vec::new())
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Smallest context containing every variable of the term.
    pub fn context(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::App(_, args) => args.iter().map(Term::context).max().unwrap_or(0),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Term::Var(i) => {
                out.insert(*i);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Number of `op` nodes.
    pub fn count_op(&self, op: &str) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(f, args) => {
                usize::from(f == op) + args.iter().map(|a| a.count_op(op)).sum::<usize>()
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{i}"),
            Term::App(op, args) if args.is_empty() => f.write_str(op),
            Term::App(op, args) => {
                write!(f, "{op}(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Capture-free simultaneous substitution `x_i := env[i]`.
pub fn substitute(t: &Term, env: &[Term]) -> Result<Term> {
    match t {
        Term::Var(i) => env
            .get(*i)
            .cloned()
            .ok_or(Error::UnboundVariable { var: *i, context: env.len() }),
        Term::App(op, args) => {
            let args = args.iter().map(|a| substitute(a, env)).collect::<Result<_>>()?;
            Ok(Term::App(op.clone(), args))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpSym {
    pub name: String,
    pub arity: usize,
}

impl OpSym {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        OpSym { name: name.into(), arity }
    }
}

/// `lhs = rhs` in the variables `x0 .. x{context-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Equation {
    pub context: usize,
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(context: usize, lhs: Term, rhs: Term) -> Self {
        Equation { context, lhs, rhs }
    }

    /// The equation with sides ordered, so that `a = b` and `b = a` agree.
    fn unoriented(&self) -> (usize, Term, Term) {
        if self.lhs <= self.rhs {
            (self.context, self.lhs.clone(), self.rhs.clone())
        } else {
            (self.context, self.rhs.clone(), self.lhs.clone())
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "eq ({}) {} = {};", self.context, self.lhs, self.rhs)
    }
}

/// Built-in decision procedures for term equality. Each assumes the
/// operation names of the matching built-in presentation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Normalizer {
    Trivial,
    PointedSet,
    Monoid,
    CMon,
    Group,
    AbelianGroup,
    /// Semimodules over a finite semiring; scalar `r` acts through `s{r}`.
    ModuleOver(Semiring),
}

impl Normalizer {
    pub fn name(&self) -> String {
        match self {
            Normalizer::Trivial => "trivial".into(),
            Normalizer::PointedSet => "pointed-set".into(),
            Normalizer::Monoid => "monoid".into(),
            Normalizer::CMon => "cmon".into(),
            Normalizer::Group => "group".into(),
            Normalizer::AbelianGroup => "abelian-group".into(),
            Normalizer::ModuleOver(r) => format!("module-over({})", r.name()),
        }
    }
}

/// Canonical forms produced by the built-in normalizers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormalForm {
    Var(usize),
    /// `None` is the base point.
    Pointed(Option<usize>),
    Word(Vec<usize>),
    Exponents(Vec<u64>),
    /// Freely reduced word of `(variable, inverted)` letters.
    Reduced(Vec<(usize, bool)>),
    Integers(Vec<i64>),
    Coefficients(Vec<i64>),
}

/// How the size of a normal form is measured when truncating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degree {
    /// Largest absolute entry of a vector; length of a word.
    Entry,
    /// Sum of absolute entries of a vector; length of a word.
    Total,
}

impl NormalForm {
    pub fn degree(&self, how: Degree) -> u64 {
        let fold = |it: &mut dyn Iterator<Item = u64>| match how {
            Degree::Entry => it.max().unwrap_or(0),
            Degree::Total => it.sum(),
        };
        match self {
            NormalForm::Var(_) | NormalForm::Pointed(_) => 0,
            NormalForm::Word(w) => w.len() as u64,
            NormalForm::Reduced(w) => w.len() as u64,
            NormalForm::Exponents(v) => fold(&mut v.iter().copied()),
            NormalForm::Integers(v) => fold(&mut v.iter().map(|e| e.unsigned_abs())),
            NormalForm::Coefficients(_) => 0,
        }
    }
}

/// A finite presentation of a single-sorted algebraic theory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    name: String,
    ops: Vec<OpSym>,
    eqs: Vec<Equation>,
    normalizer: Option<Normalizer>,
}

fn check_term(t: &Term, ops: &[OpSym], context: usize) -> Result<()> {
    match t {
        Term::Var(i) if *i < context => Ok(()),
        Term::Var(i) => Err(Error::UnboundVariable { var: *i, context }),
        Term::App(f, args) => {
            let op = ops
                .iter()
                .find(|o| &o.name == f)
                .ok_or_else(|| Error::UnknownSymbol(f.clone()))?;
            if op.arity != args.len() {
                return Err(Error::ArityMismatch(format!(
                    "`{f}` has arity {} but is applied to {} arguments",
                    op.arity,
                    args.len()
                )));
            }
            args.iter().try_for_each(|a| check_term(a, ops, context))
        }
    }
}

fn x(i: usize) -> Term {
    Term::Var(i)
}

fn bin(op: &str, a: Term, b: Term) -> Term {
    Term::app(op, vec![a, b])
}

fn un(op: &str, a: Term) -> Term {
    Term::app(op, vec![a])
}

fn cst(op: &str) -> Term {
    Term::constant(op)
}

impl Presentation {
    /// Validates that symbols are unique and every equation is well formed.
    pub fn new(name: impl Into<String>, ops: Vec<OpSym>, eqs: Vec<Equation>) -> Result<Self> {
        let mut seen = HashSet::new();
        for op in &ops {
            if !seen.insert(op.name.as_str()) {
                return Err(Error::Configuration(format!("duplicate operation `{}`", op.name)));
            }
        }
        for eq in &eqs {
            check_term(&eq.lhs, &ops, eq.context)?;
            check_term(&eq.rhs, &ops, eq.context)?;
        }
        Ok(Presentation { name: name.into(), ops, eqs, normalizer: None })
    }

    /// Attaches a normalizer after checking the signature it expects.
    pub fn with_normalizer(mut self, normalizer: Normalizer) -> Result<Self> {
        let expected = Presentation::builtin_for(&normalizer)?;
        if expected.ops != self.ops {
            return Err(Error::Configuration(format!(
                "normalizer {} expects the operations of the built-in presentation",
                normalizer.name()
            )));
        }
        self.normalizer = Some(normalizer);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ops(&self) -> &[OpSym] {
        &self.ops
    }

    pub fn eqs(&self) -> &[Equation] {
        &self.eqs
    }

    pub fn normalizer(&self) -> Option<&Normalizer> {
        self.normalizer.as_ref()
    }

    pub fn op(&self, name: &str) -> Option<&OpSym> {
        self.ops.iter().find(|o| o.name == name)
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name == name)
    }

    pub fn check_term(&self, t: &Term, context: usize) -> Result<()> {
        check_term(t, &self.ops, context)
    }

    /// Same operations and the same equations up to order and orientation.
    pub fn same_structure(&self, other: &Presentation) -> bool {
        let ops = |p: &Presentation| p.ops.iter().cloned().collect::<BTreeSet<_>>();
        let eqs = |p: &Presentation| p.eqs.iter().map(Equation::unoriented).collect::<BTreeSet<_>>();
        ops(self) == ops(other) && eqs(self) == eqs(other)
    }

    /// The built-in normalizer whose presentation this one matches, if any.
    pub fn detect_normalizer(&self) -> Option<Normalizer> {
        let mut candidates = vec![
            Normalizer::Trivial,
            Normalizer::PointedSet,
            Normalizer::Monoid,
            Normalizer::CMon,
            Normalizer::Group,
            Normalizer::AbelianGroup,
        ];
        candidates.extend(Semiring::finite_builtins().into_iter().map(Normalizer::ModuleOver));
        candidates.into_iter().find(|n| {
            Presentation::builtin_for(n).map(|b| b.same_structure(self)).unwrap_or(false)
        })
    }

    /// Re-orders the operations to the built-in order and attaches the
    /// detected normalizer, when there is one.
    pub fn with_detected_normalizer(self) -> Self {
        match self.detect_normalizer() {
            Some(n) => {
                let builtin = Presentation::builtin_for(&n).expect("detected built-in exists");
                Presentation { name: self.name, ops: builtin.ops, eqs: self.eqs, normalizer: Some(n) }
            }
            None => self,
        }
    }

    /// No operations, no equations: the initial theory.
    pub fn trivial() -> Self {
        Presentation {
            name: "trivial".into(),
            ops: Vec::new(),
            eqs: Vec::new(),
            normalizer: Some(Normalizer::Trivial),
        }
    }

    pub fn pointed_set() -> Self {
        Presentation {
            name: "pointed".into(),
            ops: vec![OpSym::new("p", 0)],
            eqs: Vec::new(),
            normalizer: Some(Normalizer::PointedSet),
        }
    }

    pub fn monoid() -> Self {
        Presentation {
            name: "monoid".into(),
            ops: vec![OpSym::new("e", 0), OpSym::new("m", 2)],
            eqs: vec![
                Equation::new(3, bin("m", bin("m", x(0), x(1)), x(2)), bin("m", x(0), bin("m", x(1), x(2)))),
                Equation::new(1, bin("m", cst("e"), x(0)), x(0)),
                Equation::new(1, bin("m", x(0), cst("e")), x(0)),
            ],
            normalizer: Some(Normalizer::Monoid),
        }
    }

    pub fn cmon() -> Self {
        Presentation {
            name: "cmon".into(),
            ops: vec![OpSym::new("e", 0), OpSym::new("m", 2)],
            eqs: vec![
                Equation::new(2, bin("m", x(0), x(1)), bin("m", x(1), x(0))),
                Equation::new(3, bin("m", bin("m", x(0), x(1)), x(2)), bin("m", x(0), bin("m", x(1), x(2)))),
                Equation::new(1, bin("m", cst("e"), x(0)), x(0)),
            ],
            normalizer: Some(Normalizer::CMon),
        }
    }

    pub fn group() -> Self {
        Presentation {
            name: "group".into(),
            ops: vec![OpSym::new("e", 0), OpSym::new("m", 2), OpSym::new("i", 1)],
            eqs: vec![
                Equation::new(3, bin("m", bin("m", x(0), x(1)), x(2)), bin("m", x(0), bin("m", x(1), x(2)))),
                Equation::new(1, bin("m", cst("e"), x(0)), x(0)),
                Equation::new(1, bin("m", x(0), cst("e")), x(0)),
                Equation::new(1, bin("m", un("i", x(0)), x(0)), cst("e")),
                Equation::new(1, bin("m", x(0), un("i", x(0))), cst("e")),
            ],
            normalizer: Some(Normalizer::Group),
        }
    }

    pub fn abelian_group() -> Self {
        Presentation {
            name: "abgroup".into(),
            ops: vec![OpSym::new("e", 0), OpSym::new("a", 2), OpSym::new("inv", 1)],
            eqs: vec![
                Equation::new(2, bin("a", x(0), x(1)), bin("a", x(1), x(0))),
                Equation::new(3, bin("a", bin("a", x(0), x(1)), x(2)), bin("a", x(0), bin("a", x(1), x(2)))),
                Equation::new(1, bin("a", cst("e"), x(0)), x(0)),
                Equation::new(1, bin("a", x(0), un("inv", x(0))), cst("e")),
            ],
            normalizer: Some(Normalizer::AbelianGroup),
        }
    }

    /// Semimodules over a finite semiring, with one unary scalar operation
    /// `s{r}` per element `r`.
    pub fn module_over(r: &Semiring) -> Result<Self> {
        let elems = r.elements().ok_or_else(|| {
            Error::Configuration(format!("module-over needs a finite semiring, got {r}"))
        })?;
        let s = |k: i64| format!("s{k}");
        let mut ops = vec![OpSym::new("e", 0), OpSym::new("a", 2)];
        ops.extend(elems.iter().map(|&k| OpSym::new(s(k), 1)));
        let mut eqs = vec![
            Equation::new(2, bin("a", x(0), x(1)), bin("a", x(1), x(0))),
            Equation::new(3, bin("a", bin("a", x(0), x(1)), x(2)), bin("a", x(0), bin("a", x(1), x(2)))),
            Equation::new(1, bin("a", cst("e"), x(0)), x(0)),
            Equation::new(1, un(&s(r.one()), x(0)), x(0)),
            Equation::new(1, un(&s(r.zero()), x(0)), cst("e")),
        ];
        for &k in &elems {
            eqs.push(Equation::new(
                2,
                un(&s(k), bin("a", x(0), x(1))),
                bin("a", un(&s(k), x(0)), un(&s(k), x(1))),
            ));
            eqs.push(Equation::new(0, un(&s(k), cst("e")), cst("e")));
            for &l in &elems {
                eqs.push(Equation::new(1, un(&s(k), un(&s(l), x(0))), un(&s(r.mul(k, l)), x(0))));
                eqs.push(Equation::new(
                    1,
                    bin("a", un(&s(k), x(0)), un(&s(l), x(0))),
                    un(&s(r.add(k, l)), x(0)),
                ));
            }
        }
        Ok(Presentation {
            name: format!("module_{}", r.name().replace('/', "")),
            ops,
            eqs,
            normalizer: Some(Normalizer::ModuleOver(r.clone())),
        })
    }

    pub fn builtin_for(n: &Normalizer) -> Result<Self> {
        Ok(match n {
            Normalizer::Trivial => Presentation::trivial(),
            Normalizer::PointedSet => Presentation::pointed_set(),
            Normalizer::Monoid => Presentation::monoid(),
            Normalizer::CMon => Presentation::cmon(),
            Normalizer::Group => Presentation::group(),
            Normalizer::AbelianGroup => Presentation::abelian_group(),
            Normalizer::ModuleOver(r) => Presentation::module_over(r)?,
        })
    }

    /// Looks up `trivial`, `pointed-set`, `monoid`, `cmon`, `group`,
    /// `abelian-group` or `module-over(<semiring>)`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "trivial" => Ok(Presentation::trivial()),
            "pointed-set" | "pointed" => Ok(Presentation::pointed_set()),
            "monoid" | "mon" => Ok(Presentation::monoid()),
            "cmon" => Ok(Presentation::cmon()),
            "group" => Ok(Presentation::group()),
            "abelian-group" | "abgroup" => Ok(Presentation::abelian_group()),
            _ => {
                let inner = name.strip_prefix("module-over(").and_then(|s| s.strip_suffix(')'));
                match inner {
                    Some(r) => Presentation::module_over(&Semiring::from_name(r)?),
                    None => Err(Error::Configuration(format!("unknown built-in theory `{name}`"))),
                }
            }
        }
    }

    /// A copy with every operation renamed by `rename` (no normalizer).
    pub fn renamed(&self, name: impl Into<String>, rename: impl Fn(&str) -> String) -> Self {
        fn go(t: &Term, rename: &dyn Fn(&str) -> String) -> Term {
            match t {
                Term::Var(i) => Term::Var(*i),
                Term::App(f, args) => Term::App(rename(f), args.iter().map(|a| go(a, rename)).collect()),
            }
        }
        Presentation {
            name: name.into(),
            ops: self.ops.iter().map(|o| OpSym::new(rename(&o.name), o.arity)).collect(),
            eqs: self
                .eqs
                .iter()
                .map(|e| Equation::new(e.context, go(&e.lhs, &rename), go(&e.rhs, &rename)))
                .collect(),
            normalizer: None,
        }
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "theory {} {{", self.name)?;
        for op in &self.ops {
            write!(f, " op {} : {};", op.name, op.arity)?;
        }
        for eq in &self.eqs {
            write!(f, " {eq}")?;
        }
        f.write_str(" }")
    }
}

fn unknown(t: &Term) -> Error {
    match t {
        Term::App(f, _) => Error::UnknownSymbol(f.clone()),
        Term::Var(i) => Error::UnknownSymbol(format!("x{i}")),
    }
}

fn arg<'a>(args: &'a [Term], k: usize, op: &str) -> Result<&'a Term> {
    args.get(k).ok_or_else(|| Error::ArityMismatch(format!("`{op}` is missing argument {k}")))
}

fn reduce_push(word: &mut Vec<(usize, bool)>, letter: (usize, bool)) {
    match word.last() {
        Some(&(v, inv)) if v == letter.0 && inv != letter.1 => {
            word.pop();
        }
        _ => word.push(letter),
    }
}

/// Normal form of `t` in a context of `context` variables.
pub fn normal_form(t: &Term, p: &Presentation, context: usize) -> Result<NormalForm> {
    let n = p.normalizer.as_ref().ok_or(Error::NoNormalizer)?;
    p.check_term(t, context)?;
    normal_form_unchecked(t, n, context)
}

fn normal_form_unchecked(t: &Term, n: &Normalizer, context: usize) -> Result<NormalForm> {
    match n {
        Normalizer::Trivial => match t {
            Term::Var(i) => Ok(NormalForm::Var(*i)),
            _ => Err(unknown(t)),
        },
        Normalizer::PointedSet => match t {
            Term::Var(i) => Ok(NormalForm::Pointed(Some(*i))),
            Term::App(f, _) if f == "p" => Ok(NormalForm::Pointed(None)),
            _ => Err(unknown(t)),
        },
        Normalizer::Monoid => {
            fn flatten(t: &Term, out: &mut Vec<usize>) -> Result<()> {
                match t {
                    Term::Var(i) => out.push(*i),
                    Term::App(f, _) if f == "e" => {}
                    Term::App(f, args) if f == "m" => {
                        flatten(arg(args, 0, f)?, out)?;
                        flatten(arg(args, 1, f)?, out)?;
                    }
                    _ => return Err(unknown(t)),
                }
                Ok(())
            }
            let mut w = Vec::new();
            flatten(t, &mut w)?;
            Ok(NormalForm::Word(w))
        }
        Normalizer::CMon => {
            fn count(t: &Term, out: &mut [u64]) -> Result<()> {
                match t {
                    Term::Var(i) => out[*i] += 1,
                    Term::App(f, _) if f == "e" => {}
                    Term::App(f, args) if f == "m" => {
                        count(arg(args, 0, f)?, out)?;
                        count(arg(args, 1, f)?, out)?;
                    }
                    _ => return Err(unknown(t)),
                }
                Ok(())
            }
            let mut v = vec![0; context];
            count(t, &mut v)?;
            Ok(NormalForm::Exponents(v))
        }
        Normalizer::Group => {
            fn word(t: &Term) -> Result<Vec<(usize, bool)>> {
                match t {
                    Term::Var(i) => Ok(vec![(*i, false)]),
                    Term::App(f, _) if f == "e" => Ok(Vec::new()),
                    Term::App(f, args) if f == "m" => {
                        let mut w = word(arg(args, 0, f)?)?;
                        for l in word(arg(args, 1, f)?)? {
                            reduce_push(&mut w, l);
                        }
                        Ok(w)
                    }
                    Term::App(f, args) if f == "i" => {
                        Ok(word(arg(args, 0, f)?)?.into_iter().rev().map(|(v, b)| (v, !b)).collect())
                    }
                    _ => Err(unknown(t)),
                }
            }
            Ok(NormalForm::Reduced(word(t)?))
        }
        Normalizer::AbelianGroup => {
            fn count(t: &Term, sign: i64, out: &mut [i64]) -> Result<()> {
                match t {
                    Term::Var(i) => out[*i] += sign,
                    Term::App(f, _) if f == "e" => {}
                    Term::App(f, args) if f == "a" => {
                        count(arg(args, 0, f)?, sign, out)?;
                        count(arg(args, 1, f)?, sign, out)?;
                    }
                    Term::App(f, args) if f == "inv" => count(arg(args, 0, f)?, -sign, out)?,
                    _ => return Err(unknown(t)),
                }
                Ok(())
            }
            let mut v = vec![0; context];
            count(t, 1, &mut v)?;
            Ok(NormalForm::Integers(v))
        }
        Normalizer::ModuleOver(r) => {
            fn coeffs(t: &Term, r: &Semiring, context: usize) -> Result<Vec<i64>> {
                match t {
                    Term::Var(i) => {
                        let mut v = vec![r.zero(); context];
                        v[*i] = r.one();
                        Ok(v)
                    }
                    Term::App(f, _) if f == "e" => Ok(vec![r.zero(); context]),
                    Term::App(f, args) if f == "a" => {
                        let a = coeffs(arg(args, 0, f)?, r, context)?;
                        let b = coeffs(arg(args, 1, f)?, r, context)?;
                        Ok(a.iter().zip(&b).map(|(&x, &y)| r.add(x, y)).collect())
                    }
                    Term::App(f, args) => {
                        let k = f
                            .strip_prefix('s')
                            .and_then(|d| d.parse::<i64>().ok())
                            .filter(|&k| r.contains(k))
                            .ok_or_else(|| unknown(t))?;
                        let v = coeffs(arg(args, 0, f)?, r, context)?;
                        Ok(v.into_iter().map(|c| r.mul(k, c)).collect())
                    }
                }
            }
            Ok(NormalForm::Coefficients(coeffs(t, r, context)?))
        }
    }
}

fn fold_right(op: &str, unit: &str, mut letters: Vec<Term>) -> Term {
    let Some(mut acc) = letters.pop() else {
        return cst(unit);
    };
    while let Some(t) = letters.pop() {
        acc = bin(op, t, acc);
    }
    acc
}

/// The canonical term of a normal form.
pub fn normal_term(nf: &NormalForm, n: &Normalizer) -> Term {
    match nf {
        NormalForm::Var(i) => x(*i),
        NormalForm::Pointed(Some(i)) => x(*i),
        NormalForm::Pointed(None) => cst("p"),
        NormalForm::Word(w) => fold_right("m", "e", w.iter().map(|&i| x(i)).collect()),
        NormalForm::Exponents(v) => fold_right(
            "m",
            "e",
            v.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat(x(i)).take(k as usize)).collect(),
        ),
        NormalForm::Reduced(w) => fold_right(
            "m",
            "e",
            w.iter().map(|&(i, inv)| if inv { un("i", x(i)) } else { x(i) }).collect(),
        ),
        NormalForm::Integers(v) => fold_right(
            "a",
            "e",
            v.iter()
                .enumerate()
                .flat_map(|(i, &k)| {
                    let letter = if k < 0 { un("inv", x(i)) } else { x(i) };
                    std::iter::repeat(letter).take(k.unsigned_abs() as usize)
                })
                .collect(),
        ),
        NormalForm::Coefficients(v) => {
            let Normalizer::ModuleOver(r) = n else {
                unreachable!("coefficient vectors only come from module normalizers")
            };
            fold_right(
                "a",
                "e",
                v.iter()
                    .enumerate()
                    .filter(|(_, &c)| c != r.zero())
                    .map(|(i, &c)| if c == r.one() { x(i) } else { un(&format!("s{c}"), x(i)) })
                    .collect(),
            )
        }
    }
}

/// Canonical representative of `t` (in its own smallest context).
pub fn normalize(t: &Term, p: &Presentation) -> Result<Term> {
    let n = p.normalizer.as_ref().ok_or(Error::NoNormalizer)?;
    Ok(normal_term(&normal_form(t, p, t.context())?, n))
}

/// Every normal form in `vars` variables of degree at most `bound`, in a
/// deterministic order.
pub fn enumerate_normal_forms(
    p: &Presentation,
    vars: usize,
    bound: u64,
    how: Degree,
    budget: Budget,
) -> Result<Vec<NormalForm>> {
    let n = p.normalizer.as_ref().ok_or(Error::NoNormalizer)?;
    let words = |letters: usize| -> Result<Vec<Vec<usize>>> {
        let total: u128 = (0..=bound as usize).map(|l| checked_pow(letters, l)).sum();
        budget.check(total)?;
        let mut out = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..bound {
            let mut next = Vec::new();
            for w in &layer {
                for l in 0..letters {
                    let mut w2: Vec<usize> = w.clone();
                    w2.push(l);
                    next.push(w2);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        Ok(out)
    };
    let vectors = |lo: i64, hi: i64| -> Result<Vec<Vec<i64>>> {
        budget.check(checked_pow((hi - lo + 1) as usize, vars))?;
        let mut out = Vec::new();
        let mut v = vec![lo; vars];
        loop {
            out.push(v.clone());
            let mut k = vars;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                if v[k] < hi {
                    v[k] += 1;
                    break;
                }
                v[k] = lo;
            }
        }
    };
    let b = bound as i64;
    let forms = match n {
        Normalizer::Trivial => (0..vars).map(NormalForm::Var).collect(),
        Normalizer::PointedSet => std::iter::once(NormalForm::Pointed(None))
            .chain((0..vars).map(|i| NormalForm::Pointed(Some(i))))
            .collect(),
        Normalizer::Monoid => words(vars)?.into_iter().map(NormalForm::Word).collect(),
        Normalizer::Group => words(2 * vars)?
            .into_iter()
            .filter(|w| w.windows(2).all(|p| p[0] / 2 != p[1] / 2 || p[0] == p[1]))
            .map(|w| NormalForm::Reduced(w.into_iter().map(|l| (l / 2, l % 2 == 1)).collect()))
            .collect(),
        Normalizer::CMon => vectors(0, b)?
            .into_iter()
            .map(|v| NormalForm::Exponents(v.into_iter().map(|e| e as u64).collect()))
            .collect(),
        Normalizer::AbelianGroup => vectors(-b, b)?.into_iter().map(NormalForm::Integers).collect(),
        Normalizer::ModuleOver(r) => {
            let elems = r.elements().expect("module normalizers use finite semirings");
            let count = elems.len() as i64;
            vectors(0, count - 1)?
                .into_iter()
                .map(|v| NormalForm::Coefficients(v.into_iter().map(|i| elems[i as usize]).collect()))
                .collect()
        }
    };
    let mut forms: Vec<NormalForm> = forms;
    forms.retain(|f| f.degree(how) <= bound);
    Ok(forms)
}

/// Outcome of [`bounded_eq`]. `Unknown` never means "different".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Equal,
    Unknown,
}

/// Default cap on the number of terms explored by [`bounded_eq`].
pub const DEFAULT_REWRITE_LIMIT: usize = 200_000;

fn match_pattern(pattern: &Term, t: &Term, binding: &mut Vec<Option<Term>>) -> bool {
    match pattern {
        Term::Var(i) => match &binding[*i] {
            Some(bound) => bound == t,
            None => {
                binding[*i] = Some(t.clone());
                true
            }
        },
        Term::App(f, pargs) => match t {
            Term::App(g, targs) if f == g && pargs.len() == targs.len() => {
                pargs.iter().zip(targs).all(|(pa, ta)| match_pattern(pa, ta, binding))
            }
            _ => false,
        },
    }
}

fn subterm_paths(t: &Term, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    out.push(prefix.clone());
    if let Term::App(_, args) = t {
        for (k, a) in args.iter().enumerate() {
            prefix.push(k);
            subterm_paths(a, prefix, out);
            prefix.pop();
        }
    }
}

fn at<'a>(t: &'a Term, path: &[usize]) -> &'a Term {
    path.iter().fold(t, |t, &k| match t {
        Term::App(_, args) => &args[k],
        Term::Var(_) => unreachable!("paths only descend through applications"),
    })
}

fn replace_at(t: &Term, path: &[usize], with: Term) -> Term {
    match path.split_first() {
        None => with,
        Some((&k, rest)) => match t {
            Term::App(f, args) => {
                let mut args = args.clone();
                args[k] = replace_at(&args[k], rest, with);
                Term::App(f.clone(), args)
            }
            Term::Var(_) => unreachable!("paths only descend through applications"),
        },
    }
}

/// Every term reachable from `t` by one rewrite with an equation in either
/// direction. Variables occurring only on the produced side are filled
/// with the variables `x0 .. x{fill_context-1}`.
fn one_step(t: &Term, p: &Presentation, fill_context: usize) -> Vec<Term> {
    let mut paths = Vec::new();
    subterm_paths(t, &mut Vec::new(), &mut paths);
    let mut out = Vec::new();
    for path in &paths {
        let sub = at(t, path);
        for eq in &p.eqs {
            for (from, to) in [(&eq.lhs, &eq.rhs), (&eq.rhs, &eq.lhs)] {
                let mut binding = vec![None; eq.context];
                if !match_pattern(from, sub, &mut binding) {
                    continue;
                }
                let free: Vec<usize> = (0..eq.context).filter(|&i| binding[i].is_none()).collect();
                let fills = checked_pow(fill_context.max(1), free.len());
                for mut code in 0..fills.min(4096) as usize {
                    let mut env = binding.clone();
                    for &i in &free {
                        env[i] = Some(Term::Var(code % fill_context.max(1)));
                        code /= fill_context.max(1);
                    }
                    let env: Vec<Term> = env.into_iter().map(|b| b.expect("filled")).collect();
                    let replacement = substitute(to, &env).expect("env covers the context");
                    out.push(replace_at(t, path, replacement));
                }
            }
        }
    }
    out
}

/// Semidecision of `t1 = t2`: explores the closure of `{t1}` under
/// rewriting in both directions, restricted to terms of at most
/// `size_bound` nodes.
pub fn bounded_eq(t1: &Term, t2: &Term, p: &Presentation, size_bound: usize) -> Verdict {
    bounded_eq_with_limit(t1, t2, p, size_bound, DEFAULT_REWRITE_LIMIT)
}

pub fn bounded_eq_with_limit(
    t1: &Term,
    t2: &Term,
    p: &Presentation,
    size_bound: usize,
    limit: usize,
) -> Verdict {
    if t1 == t2 {
        return Verdict::Equal;
    }
    if t1.size() > size_bound || t2.size() > size_bound {
        return Verdict::Unknown;
    }
    let fill = t1.context().max(t2.context());
    let mut seen: HashSet<Term> = HashSet::from([t1.clone()]);
    let mut queue = VecDeque::from([t1.clone()]);
    while let Some(t) = queue.pop_front() {
        for next in one_step(&t, p, fill) {
            if next.size() > size_bound || seen.contains(&next) {
                continue;
            }
            if &next == t2 {
                return Verdict::Equal;
            }
            if seen.len() >= limit {
                return Verdict::Unknown;
            }
            seen.insert(next.clone());
            queue.push_back(next);
        }
    }
    Verdict::Unknown
}

/// Every term over the signature of `p` in `vars` variables with at most
/// `max_size` nodes, ordered by size and then structurally.
pub fn enumerate_terms(p: &Presentation, vars: usize, max_size: usize, budget: Budget) -> Result<Vec<Term>> {
    // by_size[s] holds the terms with exactly s nodes
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new(); max_size + 1];
    let mut total: u128 = 0;
    for s in 1..=max_size {
        let mut layer = Vec::new();
        if s == 1 {
            layer.extend((0..vars).map(Term::Var));
        }
        for op in &p.ops {
            if op.arity == 0 {
                if s == 1 {
                    layer.push(cst(&op.name));
                }
                continue;
            }
            // distribute s - 1 nodes over the arguments
            let mut stack: Vec<(Vec<Term>, usize)> = vec![(Vec::new(), s - 1)];
            while let Some((args, left)) = stack.pop() {
                if args.len() == op.arity {
                    if left == 0 {
                        layer.push(Term::App(op.name.clone(), args));
                    }
                    continue;
                }
                let remaining = op.arity - args.len() - 1;
                for size in (1..=left.saturating_sub(remaining)).rev() {
                    for t in by_size[size].iter().rev() {
                        let mut a = args.clone();
                        a.push(t.clone());
                        stack.push((a, left - size));
                    }
                }
            }
        }
        layer.sort();
        total += layer.len() as u128;
        budget.check(total)?;
        by_size[s] = layer;
    }
    Ok(by_size.into_iter().flatten().collect())
}

/// A morphism `source -> target` of the syntactic category: `target` terms
/// in `source` variables, kept in normal form when the theory has a
/// normalizer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Morphism {
    source: usize,
    target: usize,
    components: Vec<Term>,
}

impl Morphism {
    pub fn new(p: &Presentation, source: usize, components: Vec<Term>) -> Result<Self> {
        let components = components
            .into_iter()
            .map(|c| {
                p.check_term(&c, source)?;
                match &p.normalizer {
                    Some(n) => Ok(normal_term(&normal_form_unchecked(&c, n, source)?, n)),
                    None => Ok(c),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Morphism { source, target: components.len(), components })
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn components(&self) -> &[Term] {
        &self.components
    }
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let comps: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "{} -> {} ({})", self.source, self.target, comps.join(", "))
    }
}

/// `(x0, .., x{n-1})`.
pub fn identity_morphism(n: usize) -> Morphism {
    Morphism { source: n, target: n, components: (0..n).map(Term::Var).collect() }
}

/// `g ∘ f`: substitute the components of `f` into those of `g`.
pub fn compose_morphisms(p: &Presentation, f: &Morphism, g: &Morphism) -> Result<Morphism> {
    if f.target != g.source {
        return Err(Error::ArityMismatch(format!(
            "cannot compose {} -> {} with {} -> {}",
            f.source, f.target, g.source, g.target
        )));
    }
    let comps = g.components.iter().map(|c| substitute(c, &f.components)).collect::<Result<_>>()?;
    Morphism::new(p, f.source, comps)
}

/// Deterministic stream of the morphisms `source -> target`.
#[derive(Debug, Clone)]
pub struct HomIter {
    source: usize,
    candidates: Vec<Term>,
    odometer: Option<Vec<usize>>,
}

impl Iterator for HomIter {
    type Item = Morphism;

    fn next(&mut self) -> Option<Morphism> {
        let current = self.odometer.take()?;
        let mut succ = current.clone();
        let mut advanced = false;
        for slot in succ.iter_mut().rev() {
            if *slot + 1 < self.candidates.len() {
                *slot += 1;
                advanced = true;
                break;
            }
            *slot = 0;
        }
        if advanced {
            self.odometer = Some(succ);
        }
        Some(Morphism {
            source: self.source,
            target: current.len(),
            components: current.iter().map(|&i| self.candidates[i].clone()).collect(),
        })
    }
}

/// Morphisms `source -> target`. With a normalizer every component ranges
/// over the normal forms of entry degree at most `bound`, which is exact.
/// Without one, components are terms of at most `bound` nodes, deduplicated
/// by [`bounded_eq`]; distinct outputs may then still be equal.
pub fn hom_iter(p: &Presentation, source: usize, target: usize, bound: u64, budget: Budget) -> Result<HomIter> {
    let candidates: Vec<Term> = match &p.normalizer {
        Some(n) => enumerate_normal_forms(p, source, bound, Degree::Entry, budget)?
            .iter()
            .map(|nf| normal_term(nf, n))
            .collect(),
        None => {
            let mut reps: Vec<Term> = Vec::new();
            for t in enumerate_terms(p, source, bound as usize, budget)? {
                if !reps.iter().any(|r| bounded_eq(r, &t, p, bound as usize) == Verdict::Equal) {
                    reps.push(t);
                }
            }
            reps
        }
    };
    budget.check(checked_pow(candidates.len(), target))?;
    let odometer = if candidates.is_empty() && target > 0 { None } else { Some(vec![0; target]) };
    Ok(HomIter { source, candidates, odometer })
}
