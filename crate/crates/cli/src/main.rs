//! `indukt`: validate documents, build induced representations and run the
//! verification scenarios.
//!
//! Every file argument also accepts `catalog:NAME`. Exit status is 0 when all
//! checks pass, 1 when a check fails and 2 for unusable input.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use indukt::groupoid::{CosetSpace, WideSubgroupoid};
use indukt::induction::{induce, verify_mackey, verify_stages};
use indukt::intertwiner::{basis_residual, intertwiners, is_equivalent, verify_frobenius};
use indukt::io::{self, IoError, Object, Over, Scenario};
use indukt::measure::{counting_haar, solve_equivariant, validate_equivariant, validate_haar};
use indukt::rep::{validate_representation, Representation};
use indukt::tolerance::operator_tol;
use indukt::ValidationReport;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "indukt", version, about = "Induced representations of finite groupoids")]
struct Cli {
    /// Print a machine-readable report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a document against the axioms of its kind.
    Validate { file: String },
    /// Induce a representation of a subgroupoid up to the whole groupoid.
    Induce {
        /// Ambient groupoid; must match the parent of the subgroupoid.
        #[arg(long)]
        groupoid: Option<String>,
        #[arg(long)]
        subgroupoid: String,
        /// Representation of the subgroupoid.
        #[arg(long)]
        rep: String,
        /// Equivariant system on the cosets (default: weight 1 everywhere).
        #[arg(long)]
        mu: Option<String>,
        /// Haar system on the subgroupoid (default: normalized counting).
        #[arg(long)]
        haar: Option<String>,
        /// Where to write the induced representation (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Basis of the intertwiners between two representations.
    Intertwiners { rep_a: String, rep_b: String },
    /// Run a scenario document.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
        scenario: String,
    },
    /// List catalog entries, or print one.
    Catalog { name: Option<String> },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Stages,
    Mackey,
    Frobenius,
}

impl CheckKind {
    fn name(self) -> &'static str {
        match self {
            CheckKind::Stages => "stages",
            CheckKind::Mackey => "mackey",
            CheckKind::Frobenius => "frobenius",
        }
    }
}

thread_local! {
    static STDOUT: std::cell::RefCell<String> = const { std::cell::RefCell::new(String::new()) };
}

// Output is collected and written once so that a closed pipe is not a panic.
macro_rules! out {
    ($($fmt:tt)*) => { STDOUT.with(|s| std::fmt::Write::write_fmt(&mut *s.borrow_mut(), format_args!($($fmt)*)).unwrap()) };
}

macro_rules! outln {
    ($($fmt:tt)*) => {{ out!($($fmt)*); out!("\n"); }};
}

fn flush_stdout() {
    use std::io::Write;
    let text = STDOUT.with(|s| std::mem::take(&mut *s.borrow_mut()));
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush());
}

/// Bad input; exits with status 2.
struct InputError(String);

impl From<IoError> for InputError {
    fn from(e: IoError) -> Self {
        InputError(e.to_string())
    }
}

macro_rules! input_err {
    ($($fmt:tt)+) => { InputError(format!($($fmt)+)) };
}

fn to_input<E: std::fmt::Display>(e: E) -> InputError {
    InputError(e.to_string())
}

type Verdict = Result<bool, InputError>;

fn load(arg: &str) -> Result<Object, IoError> {
    io::resolve_str(arg, None)
}

fn reference(arg: &str) -> Value {
    Value::String(arg.to_string())
}

fn emit_json(value: &Value) {
    out!("{}", io::to_canonical_string(value));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { file } => validate(file, cli.json),
        Command::Induce { groupoid, subgroupoid, rep, mu, haar, output } => {
            induce_cmd(groupoid.as_deref(), subgroupoid, rep, mu.as_deref(), haar.as_deref(), output.as_ref(), cli.json)
        }
        Command::Intertwiners { rep_a, rep_b } => intertwiners_cmd(rep_a, rep_b, cli.json),
        Command::Check { kind, scenario } => check(*kind, scenario, cli.json),
        Command::Catalog { name } => catalog_cmd(name.as_deref(), cli.json),
    };
    flush_stdout();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn validate(file: &str, json: bool) -> Verdict {
    let obj = match load(file) {
        Ok(obj) => obj,
        Err(e) if e.is_validation_failure() => {
            if json {
                emit_json(&json!({"file": file, "passed": false, "error": e.to_string()}));
            } else {
                outln!("{file}: FAIL\n  {e}");
            }
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let kind = obj.kind();
    let report = match &obj {
        Object::Groupoid(g) => g.validate(),
        Object::Subgroupoid(h) => {
            let mut report = CosetSpace::new(h).validate();
            report.subject = "subgroupoid cosets".into();
            report
        }
        Object::Haar { haar, .. } => validate_haar(haar),
        Object::Equivariant(mu) => validate_equivariant(mu),
        Object::Representation { rep, .. } => validate_representation(rep),
        Object::Scenario { doc, base } => {
            io::resolve_scenario(doc, base.as_deref())?;
            ValidationReport::new("scenario references")
        }
    };
    if json {
        emit_json(&json!({"file": file, "kind": kind, "passed": report.passed(), "report": report}));
    } else {
        out!("{file} ({kind}): {report}");
    }
    Ok(report.passed())
}

/// A representation that must be defined on `sub`.
fn sigma_on(arg: &str, sub: &WideSubgroupoid) -> Result<Representation, InputError> {
    let (_, rep) = io::resolve_representation(&reference(arg), None)?;
    if rep.groupoid().as_ref() != sub.groupoid().as_ref() {
        return Err(input_err!("{arg} is not a representation of the subgroupoid"));
    }
    Ok(rep)
}

fn induce_cmd(
    groupoid: Option<&str>,
    subgroupoid: &str,
    rep: &str,
    mu: Option<&str>,
    haar: Option<&str>,
    output: Option<&PathBuf>,
    json: bool,
) -> Verdict {
    let sub = io::resolve_subgroupoid(&reference(subgroupoid), None)?;
    if let Some(g) = groupoid {
        let g = io::resolve_groupoid(&reference(g), None)?;
        if g.as_ref() != sub.parent().as_ref() {
            return Err(input_err!("the subgroupoid does not live in {}", groupoid.unwrap_or_default()));
        }
    }
    let sigma = sigma_on(rep, &sub)?;
    let mu = match mu {
        Some(arg) => match load(arg)? {
            Object::Equivariant(mu) => {
                let other = mu.cosets().sub();
                if other.parent().as_ref() != sub.parent().as_ref() || other.members() != sub.members() {
                    return Err(input_err!("{arg} is an equivariant system for a different subgroupoid"));
                }
                mu
            }
            other => return Err(input_err!("{arg} is a {} document, expected equivariant", other.kind())),
        },
        None => solve_equivariant(Arc::new(CosetSpace::new(&sub)), None).map_err(to_input)?,
    };
    let haar = match haar {
        Some(arg) => match load(arg)? {
            Object::Haar { haar, .. } if haar.groupoid().as_ref() == sub.groupoid().as_ref() => haar,
            Object::Haar { .. } => return Err(input_err!("{arg} is a Haar system on a different groupoid")),
            other => return Err(input_err!("{arg} is a {} document, expected haar", other.kind())),
        },
        None => counting_haar(sub.groupoid().clone(), true).map_err(to_input)?,
    };
    let ind = induce(&sigma, &mu, &haar).map_err(to_input)?;
    let report = validate_representation(ind.base());
    let doc = io::to_value(&Object::Representation { over: Over::Groupoid(sub.parent().clone()), rep: ind.base().clone() });
    let dims: serde_json::Map<String, Value> =
        sub.parent().units().iter().map(|&u| (u.to_string(), json!(ind.base().dim(u)))).collect();
    match output {
        Some(path) => {
            std::fs::write(path, io::to_canonical_string(&doc)).map_err(|e| input_err!("{}: {e}", path.display()))?;
            if json {
                emit_json(&json!({"output": path.display().to_string(), "dims": dims, "passed": report.passed(), "report": report}));
            } else {
                outln!("wrote {}", path.display());
                outln!("fiber dimensions: {}", Value::Object(dims));
                out!("{report}");
            }
        }
        None => emit_json(&doc),
    }
    Ok(report.passed())
}

fn intertwiners_cmd(a: &str, b: &str, json: bool) -> Verdict {
    let (_, pi) = io::resolve_representation(&reference(a), None)?;
    let (_, pi_prime) = io::resolve_representation(&reference(b), None)?;
    if pi.groupoid().as_ref() != pi_prime.groupoid().as_ref() {
        return Err(input_err!("{a} and {b} live on different groupoids"));
    }
    let basis = intertwiners(&pi, &pi_prime).map_err(to_input)?;
    let residual = basis_residual(&basis, &pi, &pi_prime);
    let eq = is_equivalent(&pi, &pi_prime).map_err(to_input)?;
    let passed = residual < operator_tol();
    if json {
        emit_json(&json!({
            "dimension": basis.len(),
            "basis_residual": residual,
            "equivalence": eq,
            "passed": passed,
        }));
    } else {
        outln!("dim Mor = {}", basis.len());
        outln!("basis residual {residual:.3e}");
        match (eq.equivalent, eq.witness_residual) {
            (true, Some(r)) => outln!("unitarily equivalent (witness residual {r:.3e})"),
            _ => outln!("not unitarily equivalent"),
        }
    }
    Ok(passed)
}

fn check(kind: CheckKind, arg: &str, json: bool) -> Verdict {
    let (doc, base) = match load(arg)? {
        Object::Scenario { doc, base } => (doc, base),
        other => return Err(input_err!("{arg} is a {} document, expected scenario", other.kind())),
    };
    let scenario = io::resolve_scenario(&doc, base.as_deref())?;
    if scenario.check() != kind.name() {
        return Err(input_err!("{arg} is a {} scenario", scenario.check()));
    }
    match scenario {
        Scenario::Frobenius { sub, pi, sigma, expected } => frobenius(&sub, &pi, &sigma, expected.as_deref(), json),
        Scenario::Stages { h, k, sigma, mu_g_orbits, mu_h_orbits } => {
            let out = verify_stages(&h, &k, &sigma, mu_g_orbits.as_deref(), mu_h_orbits.as_deref()).map_err(to_input)?;
            let passed = out.report.passed();
            if json {
                emit_json(&json!({"check": "stages", "passed": passed, "result": out}));
            } else {
                outln!("fiber dimensions: direct {:?}, in stages {:?}", out.dims_direct, out.dims_staged);
                outln!("unitarity defect {:.3e}, intertwining residual {:.3e}", out.unitarity_defect, out.intertwining_residual);
                out!("{}", out.report);
            }
            Ok(passed)
        }
        Scenario::Mackey { left, right, trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = verify_mackey(&left, &right, trials, &mut rng).map_err(to_input)?;
            let passed = out.report.passed();
            if json {
                emit_json(&json!({"check": "mackey", "passed": passed, "seed": seed, "result": out}));
            } else {
                outln!("fiber dimensions: product {:?}, induced {:?}", out.dims_outer, out.dims_product);
                outln!("unitarity defect {:.3e}, intertwining residual {:.3e}", out.unitarity_defect, out.intertwining_residual);
                outln!("factorization residual {:.3e} over {} trials", out.factorization_residual, out.trials);
                out!("{}", out.report);
            }
            Ok(passed)
        }
    }
}

fn frobenius(
    sub: &WideSubgroupoid,
    pis: &[(String, Representation)],
    sigmas: &[(String, Representation)],
    expected: Option<&[Vec<usize>]>,
    json: bool,
) -> Verdict {
    let mu = solve_equivariant(Arc::new(CosetSpace::new(sub)), None).map_err(to_input)?;
    let haar = counting_haar(sub.groupoid().clone(), true).map_err(to_input)?;
    let induced = sigmas
        .iter()
        .map(|(_, s)| induce(s, &mu, &haar).map_err(to_input))
        .collect::<Result<Vec<_>, _>>()?;
    let mut matrix = vec![vec![0usize; sigmas.len()]; pis.len()];
    let mut entries = Vec::new();
    let mut passed = true;
    for (i, (pi_name, pi)) in pis.iter().enumerate() {
        for (j, ind) in induced.iter().enumerate() {
            let out = verify_frobenius(pi, ind).map_err(|e| input_err!("{pi_name} with {}: {e}", sigmas[j].0))?;
            passed &= out.report.passed();
            matrix[i][j] = out.dim_induced;
            entries.push((pi_name.clone(), sigmas[j].0.clone(), out));
        }
    }
    let matches = expected.is_none_or(|e| e == matrix.as_slice());
    passed &= matches;
    if json {
        let entries: Vec<Value> = entries
            .iter()
            .map(|(p, s, out)| json!({"pi": p, "sigma": s, "result": out}))
            .collect();
        emit_json(&json!({
            "check": "frobenius",
            "matrix": matrix,
            "expected": expected,
            "passed": passed,
            "entries": entries,
        }));
    } else {
        outln!("dim Mor(π, ind σ), rows π, columns σ:");
        let width = pis.iter().map(|(p, _)| p.len()).max().unwrap_or(0);
        for (i, (p, _)) in pis.iter().enumerate() {
            let row: Vec<String> = matrix[i].iter().map(|d| d.to_string()).collect();
            outln!("  {p:width$}  [{}]", row.join(", "));
        }
        outln!("columns: {}", sigmas.iter().map(|(s, _)| s.as_str()).collect::<Vec<_>>().join(", "));
        let worst = entries
            .iter()
            .map(|(_, _, o)| o.round_trip_induced.max(o.round_trip_restricted))
            .fold(0.0, f64::max);
        outln!("largest round-trip deviation {worst:.3e}");
        if !matches {
            outln!("matrix differs from the expected {:?}", expected.unwrap_or_default());
        }
        for (p, s, out) in &entries {
            if !out.report.passed() {
                out!("{p} with {s}: {}", out.report);
            }
        }
        outln!("{}", if passed { "pass" } else { "FAIL" });
    }
    Ok(passed)
}

fn catalog_cmd(name: Option<&str>, json: bool) -> Verdict {
    match name {
        None => {
            let entries: Vec<(&str, &str)> = indukt::catalog::names()
                .into_iter()
                .map(|n| (n, indukt::catalog::lookup(n).map(|o| o.kind()).unwrap_or("?")))
                .collect();
            if json {
                let list: Vec<Value> = entries.iter().map(|(n, k)| json!({"name": n, "kind": k})).collect();
                emit_json(&Value::Array(list));
            } else {
                for (n, k) in entries {
                    outln!("{n:18} {k}");
                }
            }
            Ok(true)
        }
        Some(n) => {
            let n = n.strip_prefix("catalog:").unwrap_or(n);
            let obj = indukt::catalog::lookup(n).ok_or_else(|| input_err!("no catalog entry named `{n}`"))?;
            emit_json(&io::to_value(&obj));
            Ok(true)
        }
    }
}
