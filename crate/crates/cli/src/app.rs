//! Command definitions and execution. Everything here returns the text to
//! print instead of printing, so tests can drive the binary in-process.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use lawvere_core::finset::{Budget, DEFAULT_BUDGET};
use lawvere_core::gsets::{burnside_semiring, elmendorf_report, marks_table, FiniteGroup};
use lawvere_core::kronecker::{bimodel_report, eckmann_hilton_report, kronecker_presentation};
use lawvere_core::models::{check_model, enumerate_models, free_model, model_homs, model_witness, yoneda_report, Model};
use lawvere_core::semimat::{end_of_unit, kron, mat_mul, semiadditive_check, Semiring, SemiringMatrix, UnitCategory};
use lawvere_core::spancat::{compose_spans, matrix_span, span_matrix, SpanClass};
use lawvere_core::theory::Presentation;
use lawvere_core::Error;

use crate::dsl::{parse_theory, print_theory, ErrorKind};

pub const DEFAULT_SEED: u64 = 0x5eed_1a77;

#[derive(Debug, Parser)]
#[command(name = "lawvere", version, about = "Finite models of algebraic theories, spans and G-sets")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Seed for every random choice.
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0, global = true)]
    pub jobs: usize,
    /// Cap on enumerated candidates.
    #[arg(long, default_value_t = DEFAULT_BUDGET, global = true)]
    pub budget: u64,
    /// Include wall-clock timings (makes output run-dependent).
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate models on a carrier of the given size.
    Models {
        /// Theory file, or `builtin:NAME`.
        #[arg(long)]
        theory: String,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        up_to_iso: bool,
    },
    /// Count homomorphisms between the models of a given size, up to iso.
    Homs {
        #[arg(long)]
        theory: String,
        #[arg(long)]
        size: usize,
    },
    /// Compose span classes, or test composition on random pairs.
    Spans {
        /// First matrix as JSON rows, e.g. `[[1],[1]]`.
        #[arg(long)]
        first: Option<String>,
        /// Second matrix, applied after the first.
        #[arg(long)]
        second: Option<String>,
        #[arg(long, default_value = "nat")]
        semiring: String,
        /// Number of random composable pairs to test.
        #[arg(long)]
        random: Option<usize>,
        /// Check semiadditivity of the matrix category up to this size.
        #[arg(long)]
        semiadditive: Option<usize>,
    },
    /// Kronecker product of two theories.
    Kron {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        /// Compare product models with bimodels.
        #[arg(long)]
        check_bimodels: bool,
        /// Compare monoid ⊗ monoid with commutative monoids.
        #[arg(long)]
        eckmann_hilton: bool,
        #[arg(long, default_value_t = 3)]
        size: usize,
    },
    /// Truncated free model.
    Free {
        #[arg(long)]
        theory: String,
        #[arg(long)]
        generators: usize,
        #[arg(long)]
        bound: u64,
    },
    /// Compare free-model homomorphisms with morphisms of the theory.
    Yoneda {
        #[arg(long)]
        theory: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = 60)]
        samples: usize,
    },
    /// Table of marks of a group.
    Marks {
        /// Group JSON file, or `builtin:NAME`.
        #[arg(long)]
        group: String,
    },
    /// Burnside semiring of a group.
    Burnside {
        #[arg(long)]
        group: String,
    },
    /// Check a model file against a theory, or the orbit-category comparison.
    Check {
        #[arg(long)]
        theory: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        group: Option<String>,
        /// Value bound for the orbit-category comparison.
        #[arg(long)]
        elmendorf: Option<usize>,
    },
}

impl Command {
    fn verb(&self) -> &'static str {
        match self {
            Command::Models { .. } => "models",
            Command::Homs { .. } => "homs",
            Command::Spans { .. } => "spans",
            Command::Kron { .. } => "kron",
            Command::Free { .. } => "free",
            Command::Yoneda { .. } => "yoneda",
            Command::Marks { .. } => "marks",
            Command::Burnside { .. } => "burnside",
            Command::Check { .. } => "check",
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure {
    kind: &'static str,
    code: i32,
    message: String,
}

impl Failure {
    fn semantic(message: impl Into<String>) -> Self {
        Failure { kind: "semantic", code: 3, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => Failure { kind: "budget", code: 4, message: e.to_string() },
            e => Failure::semantic(e.to_string()),
        }
    }
}

struct Outcome {
    inputs: Value,
    results: Value,
    table: String,
    /// Set when a check ran and failed.
    failed: Option<String>,
}

fn read(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(Path::new(path))
        .map_err(|e| Failure { kind: "io", code: 3, message: format!("{path}: {e}") })
}

fn load_theory(arg: &str) -> Result<Presentation, Failure> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return Ok(Presentation::builtin(name)?);
    }
    let src = read(arg)?;
    parse_theory(&src).map_err(|e| match e.kind {
        ErrorKind::Syntax => Failure { kind: "syntax", code: 2, message: format!("{arg}:{e}") },
        ErrorKind::Semantic => Failure { kind: "semantic", code: 3, message: format!("{arg}:{e}") },
    })
}

fn load_group(arg: &str) -> Result<FiniteGroup, Failure> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return Ok(FiniteGroup::builtin(name)?);
    }
    let value: Value = serde_json::from_str(&read(arg)?)
        .map_err(|e| Failure { kind: "syntax", code: 2, message: format!("{arg}: {e}") })?;
    Ok(FiniteGroup::from_json(&value)?)
}

fn parse_rows(text: &str) -> Result<Vec<Vec<i64>>, Failure> {
    serde_json::from_str(text).map_err(|e| Failure { kind: "syntax", code: 2, message: format!("matrix `{text}`: {e}") })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn table_rows<T: std::fmt::Display>(rows: &[Vec<T>]) -> String {
    rows.iter()
        .map(|r| r.iter().map(|v| format!("{v:>4}")).collect::<String>())
        .collect::<Vec<_>>()
        .join("\n")
}

fn models_outcome(theory: &str, size: usize, up_to_iso: bool, budget: Budget) -> Result<Outcome, Failure> {
    let p = Arc::new(load_theory(theory)?);
    let models = enumerate_models(&p, size, up_to_iso, budget)?;
    let mut table = format!("theory {}  size {size}  models {}\n", p.name(), models.len());
    for (i, m) in models.iter().enumerate() {
        let _ = writeln!(table, "#{i}");
        for (op, t) in p.ops().iter().zip(m.tables()) {
            let _ = writeln!(table, "  {} : {:?}", op.name, t);
        }
    }
    Ok(Outcome {
        inputs: json!({"theory": theory, "size": size, "up_to_iso": up_to_iso}),
        results: json!({"theory": p.name(), "count": models.len(), "models": to_value(&models)}),
        table,
        failed: None,
    })
}

fn homs_outcome(theory: &str, size: usize, budget: Budget) -> Result<Outcome, Failure> {
    let p = Arc::new(load_theory(theory)?);
    let models = enumerate_models(&p, size, true, budget)?;
    let counts = models
        .iter()
        .map(|a| models.iter().map(|b| Ok(model_homs(a, b, budget)?.len())).collect::<Result<Vec<_>, Failure>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Outcome {
        inputs: json!({"theory": theory, "size": size}),
        table: format!("hom counts between the {} models of size {size}\n{}\n", models.len(), table_rows(&counts)),
        results: json!({"theory": p.name(), "models": to_value(&models), "hom_counts": counts}),
        failed: None,
    })
}

fn random_class(rng: &mut ChaCha8Rng, source: usize, target: usize) -> SpanClass {
    let entries = (0..source * target).map(|_| rng.gen_range(0..=3)).collect();
    SpanClass::new(source, target, entries).expect("shape")
}

fn spans_outcome(
    first: Option<String>,
    second: Option<String>,
    semiring: &str,
    random: Option<usize>,
    semiadditive: Option<usize>,
    seed: u64,
) -> Result<Outcome, Failure> {
    let r = Semiring::from_name(semiring)?;
    let mut results = serde_json::Map::new();
    let mut table = String::new();
    let mut failed = None;
    let inputs = json!({"first": first, "second": second, "semiring": semiring, "random": random, "semiadditive": semiadditive, "seed": seed});
    if let (Some(a), Some(b)) = (&first, &second) {
        let (ra, rb) = (parse_rows(a)?, parse_rows(b)?);
        let cols = |rows: &[Vec<i64>]| rows.first().map_or(0, Vec::len);
        let ma = SemiringMatrix::from_rows(r.clone(), cols(&ra), &ra)?;
        let mb = SemiringMatrix::from_rows(r.clone(), cols(&rb), &rb)?;
        let product = mat_mul(&mb, &ma)?;
        results.insert("product".into(), to_value(&product));
        results.insert("tensor".into(), to_value(&kron(&ma, &mb)?));
        let _ = writeln!(table, "second · first over {r}\n{product}");
        if r == Semiring::Naturals {
            let (ca, cb) = (ma.to_span_class().expect("naturals"), mb.to_span_class().expect("naturals"));
            let composite = compose_spans(&matrix_span(&ca), &matrix_span(&cb))?;
            let class = span_matrix(&composite);
            let agrees = SemiringMatrix::from_span_class(&class) == product;
            results.insert("composite".into(), to_value(&class));
            results.insert("middle".into(), json!(composite.middle().size()));
            results.insert("agrees_with_product".into(), json!(agrees));
            let _ = writeln!(table, "pullback composite has {} middle elements; agrees: {agrees}", composite.middle().size());
            if !agrees {
                failed = Some("span composite differs from the matrix product".to_string());
            }
        }
    } else if first.is_some() || second.is_some() {
        return Err(Failure { kind: "usage", code: 2, message: "--first and --second go together".into() });
    }
    if let Some(count) = random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut agree = 0;
        for _ in 0..count {
            let (x, y, z) = (rng.gen_range(0..=4), rng.gen_range(0..=4), rng.gen_range(0..=4));
            let (s, t) = (random_class(&mut rng, x, y), random_class(&mut rng, y, z));
            let composite = span_matrix(&compose_spans(&matrix_span(&s), &matrix_span(&t))?);
            if composite == s.then(&t)? && span_matrix(&matrix_span(&s)) == s {
                agree += 1;
            }
        }
        results.insert("random_pairs".into(), json!(count));
        results.insert("random_agree".into(), json!(agree));
        let _ = writeln!(table, "random composable pairs: {agree}/{count} agree");
        if agree != count {
            failed = Some(format!("{} random pairs disagree", count - agree));
        }
    }
    if let Some(size) = semiadditive {
        let ok = semiadditive_check(&r, size);
        let unit = if r == Semiring::Naturals {
            end_of_unit(&UnitCategory::SpanClasses { representatives: 10 })?
        } else {
            end_of_unit(&UnitCategory::Matrices { semiring: r.clone(), representatives: 10 })?
        };
        results.insert("semiadditive".into(), json!(ok));
        results.insert("end_of_unit".into(), json!(unit.name()));
        let _ = writeln!(table, "semiadditive up to {size}: {ok}; End(1) = {unit}");
        if !ok {
            failed = Some(format!("matrices over {r} fail the semiadditive check"));
        }
    }
    Ok(Outcome { inputs, results: Value::Object(results), table, failed })
}

fn kron_outcome(
    left: &str,
    right: &str,
    check_bimodels: bool,
    eckmann_hilton: bool,
    size: usize,
    budget: Budget,
) -> Result<Outcome, Failure> {
    let (p1, p2) = (load_theory(left)?, load_theory(right)?);
    let product = kronecker_presentation(&p1, &p2)?;
    let text = print_theory(&product);
    let mut results = json!({
        "presentation": text,
        "ops": product.ops().len(),
        "eqs": product.eqs().len(),
    });
    let mut table = format!("{text}\n");
    let mut failed = None;
    if check_bimodels {
        let report = bimodel_report(&p1, &p2, size, budget)?;
        for row in &report.rows {
            let _ = writeln!(table, "size {}: product models {}, bimodels {}, equal {}", row.size, row.product_models, row.bimodels, row.equal);
        }
        if !report.passed {
            failed = Some("product models differ from bimodels".to_string());
        }
        results["bimodels"] = to_value(&report);
    }
    if eckmann_hilton {
        let report = eckmann_hilton_report(size, budget)?;
        for row in &report.rows {
            let _ = writeln!(table, "size {}: monoid⊗monoid classes {}, cmon classes {}", row.size, row.product_classes, row.cmon_classes);
        }
        if !report.passed {
            failed = Some("Eckmann-Hilton comparison failed".to_string());
        }
        results["eckmann_hilton"] = to_value(&report);
    }
    Ok(Outcome {
        inputs: json!({"left": left, "right": right, "check_bimodels": check_bimodels, "eckmann_hilton": eckmann_hilton, "size": size}),
        results,
        table,
        failed,
    })
}

fn free_outcome(theory: &str, generators: usize, bound: u64, budget: Budget) -> Result<Outcome, Failure> {
    let p = Arc::new(load_theory(theory)?);
    let fm = free_model(&p, generators, bound, budget)?;
    let elements: Vec<String> = (0..fm.carrier()).map(|i| fm.term(i).to_string()).collect();
    let unsafe_entries = fm.unsafe_entries().len();
    Ok(Outcome {
        inputs: json!({"theory": theory, "generators": generators, "bound": bound}),
        table: format!(
            "free {} model on {generators} generators, bound {bound}: {} elements, {unsafe_entries} entries leave the truncation\n{}\n",
            p.name(),
            elements.len(),
            elements.join("\n")
        ),
        results: json!({
            "theory": p.name(),
            "carrier": fm.carrier(),
            "elements": elements,
            "total": fm.is_total(),
            "unsafe_entries": unsafe_entries,
        }),
        failed: None,
    })
}

fn yoneda_outcome(theory: &str, m: usize, n: usize, bound: u64, samples: usize, budget: Budget) -> Result<Outcome, Failure> {
    let p = Arc::new(load_theory(theory)?);
    let report = yoneda_report(&p, m, n, bound, samples, budget)?;
    Ok(Outcome {
        inputs: json!({"theory": theory, "m": m, "n": n, "bound": bound, "samples": samples}),
        table: format!(
            "homs free({m}) -> free({n}): {}; morphisms {n} -> {m}: {}; bijective {}; composition {}/{} pairs agree\n",
            report.model_homs,
            report.theory_morphisms,
            report.bijective,
            report.composition_pairs - report.composition_failures,
            report.composition_pairs
        ),
        failed: (!report.passed).then(|| "free-model homomorphisms do not match the theory".to_string()),
        results: to_value(&report),
    })
}

fn marks_outcome(group: &str) -> Result<Outcome, Failure> {
    let g = load_group(group)?;
    let t = marks_table(&g);
    Ok(Outcome {
        inputs: json!({"group": group}),
        table: format!("classes {}\n{}\n", t.classes.join(" "), table_rows(&t.marks)),
        results: to_value(&t),
        failed: None,
    })
}

fn burnside_outcome(group: &str) -> Result<Outcome, Failure> {
    let g = load_group(group)?;
    let b = burnside_semiring(&g)?;
    let value = to_value(&b);
    let mut table = String::new();
    if let Some(products) = value["products"].as_object() {
        for (k, v) in products {
            let terms: Vec<String> = v.as_object().into_iter().flatten().map(|(c, n)| format!("{n}[G/{c}]")).collect();
            let _ = writeln!(table, "{k} = {}", if terms.is_empty() { "0".to_string() } else { terms.join(" + ") });
        }
    }
    Ok(Outcome { inputs: json!({"group": group}), results: value, table, failed: None })
}

fn check_outcome(
    theory: Option<String>,
    model: Option<String>,
    group: Option<String>,
    elmendorf: Option<usize>,
    budget: Budget,
) -> Result<Outcome, Failure> {
    let inputs = json!({"theory": theory, "model": model, "group": group, "elmendorf": elmendorf});
    match (theory, model, group, elmendorf) {
        (Some(t), Some(m), None, None) => {
            let p = Arc::new(load_theory(&t)?);
            let value: Value = serde_json::from_str(&read(&m)?)
                .map_err(|e| Failure { kind: "syntax", code: 2, message: format!("{m}: {e}") })?;
            let model = Model::from_json(p, &value)?;
            let ok = check_model(&model);
            let witness = model_witness(&model).err().map(|e| e.to_string());
            Ok(Outcome {
                inputs,
                table: format!("model satisfies the theory: {ok}\n"),
                results: json!({"satisfied": ok, "witness": witness}),
                failed: witness.map(|w| format!("model check failed: {w}")),
            })
        }
        (None, None, Some(g), Some(size)) => {
            let grp = load_group(&g)?;
            let report = elmendorf_report(&grp, size, budget)?;
            Ok(Outcome {
                inputs,
                table: format!(
                    "presheaves {}; extensions passing {}; restrictions recovering {}\n",
                    report.presheaves, report.extensions_passing, report.restrictions_recover
                ),
                failed: (!report.passed).then(|| "orbit-category comparison failed".to_string()),
                results: to_value(&report),
            })
        }
        _ => Err(Failure {
            kind: "usage",
            code: 2,
            message: "check takes --theory with --model, or --group with --elmendorf".into(),
        }),
    }
}

fn execute(cmd: Command, global: &Global) -> Result<Outcome, Failure> {
    let budget = Budget(global.budget);
    match cmd {
        Command::Models { theory, size, up_to_iso } => models_outcome(&theory, size, up_to_iso, budget),
        Command::Homs { theory, size } => homs_outcome(&theory, size, budget),
        Command::Spans { first, second, semiring, random, semiadditive } => {
            spans_outcome(first, second, &semiring, random, semiadditive, global.seed)
        }
        Command::Kron { left, right, check_bimodels, eckmann_hilton, size } => {
            kron_outcome(&left, &right, check_bimodels, eckmann_hilton, size, budget)
        }
        Command::Free { theory, generators, bound } => free_outcome(&theory, generators, bound, budget),
        Command::Yoneda { theory, m, n, bound, samples } => yoneda_outcome(&theory, m, n, bound, samples, budget),
        Command::Marks { group } => marks_outcome(&group),
        Command::Burnside { group } => burnside_outcome(&group),
        Command::Check { theory, model, group, elmendorf } => check_outcome(theory, model, group, elmendorf, budget),
    }
}

fn diagnostic(f: &Failure) -> String {
    format!("error[{}]: {}\n", f.kind, f.message.replace('\n', " "))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                let code = if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
                return Execution { code, stdout: e.to_string(), stderr: String::new() };
            }
            let first = e.to_string().lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ").to_string();
            let f = Failure { kind: "usage", code: 2, message: first };
            return Execution { code: 2, stdout: String::new(), stderr: diagnostic(&f) };
        }
    };
    let verb = cli.command.verb();
    let global = cli.global;
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(global.jobs).build() {
        Ok(pool) => pool,
        Err(e) => {
            let f = Failure { kind: "usage", code: 2, message: format!("thread pool: {e}") };
            return Execution { code: 2, stdout: String::new(), stderr: diagnostic(&f) };
        }
    };
    let start = Instant::now();
    let outcome = pool.install(|| execute(cli.command, &global));
    let elapsed = start.elapsed();
    match outcome {
        Err(f) => Execution { code: f.code, stdout: String::new(), stderr: diagnostic(&f) },
        Ok(o) => {
            let stdout = match global.format {
                Format::Json => {
                    let mut inputs = o.inputs;
                    inputs["budget"] = json!(global.budget);
                    let timings = if global.timings { json!({"elapsed_ms": elapsed.as_secs_f64() * 1e3}) } else { Value::Null };
                    let report = json!({"command": verb, "inputs": inputs, "results": o.results, "timings": timings});
                    format!("{}\n", serde_json::to_string_pretty(&report).expect("json"))
                }
                Format::Table => {
                    let mut t = o.table;
                    if global.timings {
                        let _ = writeln!(t, "elapsed {:.1} ms", elapsed.as_secs_f64() * 1e3);
                    }
                    t
                }
            };
            match o.failed {
                Some(msg) => Execution {
                    code: 1,
                    stdout,
                    stderr: diagnostic(&Failure { kind: "check", code: 1, message: msg }),
                },
                None => Execution { code: 0, stdout, stderr: String::new() },
            }
        }
    }
}
