//! Command-line driver: `dualize`, `bound`, `solve`, `verify`.
//!
//! Exit codes:
//! 0 success; 1 unreadable or invalid input (or bad flags); 2 diagnostic
//! failure (non-primitive lattice, degenerate system, failed certificate);
//! 3 solver failure; 4 the two sides of a pair have mismatched solutions.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::One;
use serde_json::{json, Value};

use crate::desksolver::{
    format_point, solve_master, solve_sparse, verify_isomorphism, IsomorphismReport, SolutionSet,
    SolverConfig, SolverError,
};
use crate::exactlat::{quotient_images, saturate, ExponentMatrix, WeightBasis};
use crate::galecore::{
    check_gale_pair, dualize_master_to_poly, dualize_poly_to_master,
    render_lambda, GaleError, GalePair, GaleReport,
};
use crate::latpoly::{
    euler_characteristic, fewnomial_bound, format_sig4, kouchnirenko_bound, FewnomialVariant,
};
use crate::sysmodel::json::{format_rational, parse_system, MasterJson, SparseJson, SystemFile};
use crate::sysmodel::{clear_denominators, diagonalize, MasterSystem, SparseSystem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_DIAGNOSTIC: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Compute the Gale dual of a sparse or master system and certify the pair.
    Dualize,
    /// Kouchnirenko bound, Euler characteristic and fewnomial bounds.
    Bound,
    /// Solve a two-variable sparse or master system numerically.
    Solve,
    /// Dualize, solve both sides and match their solutions.
    Verify,
}

#[derive(Debug, Parser)]
#[command(name = "galedual", version, about = "Gale duality for sparse polynomial systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// System file (JSON, sparse or master schema)
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol_cluster: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_verify: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// verify: also require the solution counts to reach the Kouchnirenko bound
    #[arg(long, global = true)]
    generic: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobConfig {
    pub command: Command,
    pub input_path: PathBuf,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub solver: SolverConfig,
    pub generic: bool,
}

impl JobConfig {
    pub fn seed(&self) -> u64 {
        self.solver.seed
    }
}

/// A finished command: exit code plus the report in both renderings.
struct Outcome {
    code: i32,
    json: Value,
    text: String,
}

impl Outcome {
    fn input_error(command: &str, message: String) -> Self {
        Outcome {
            code: EXIT_INPUT,
            json: json!({"command": command, "status": "input-error", "error": message}),
            text: format!("error: {message}\n"),
        }
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let Some(input_path) = cli.input else {
        eprintln!("error: --input is required");
        return EXIT_INPUT;
    };
    let cfg = JobConfig {
        command: cli.command,
        input_path,
        output_path: cli.output,
        format: cli.format,
        solver: SolverConfig {
            cluster_tol: cli.tol_cluster,
            verify_tol: cli.tol_verify,
            seed: cli.seed,
            ..SolverConfig::default()
        },
        generic: cli.generic,
    };
    run_job(&cfg)
}

pub fn run_job(cfg: &JobConfig) -> i32 {
    let outcome = execute(cfg);
    let body = match cfg.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&outcome.json).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => outcome.text.clone(),
    };
    match &cfg.output_path {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &body) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return EXIT_INPUT;
            }
        }
        None => print!("{body}"),
    }
    if outcome.code != EXIT_OK {
        if let Some(msg) = outcome.json.get("error").and_then(Value::as_str) {
            eprintln!("error: {msg}");
        }
    }
    outcome.code
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Dualize => "dualize",
        Command::Bound => "bound",
        Command::Solve => "solve",
        Command::Verify => "verify",
    }
}

fn execute(cfg: &JobConfig) -> Outcome {
    let name = command_name(cfg.command);
    let text = match std::fs::read_to_string(&cfg.input_path) {
        Ok(t) => t,
        Err(e) => return Outcome::input_error(name, format!("cannot read {}: {e}", cfg.input_path.display())),
    };
    let system = match parse_system(&text) {
        Ok(s) => s,
        Err(e) => return Outcome::input_error(name, e.to_string()),
    };
    match cfg.command {
        Command::Dualize => cmd_dualize(&system),
        Command::Bound => cmd_bound(&system),
        Command::Solve => cmd_solve(&system, &cfg.solver),
        Command::Verify => cmd_verify(&system, cfg),
    }
}

// ---------------------------------------------------------------------------
// JSON pieces

fn index_json(i: &Option<BigInt>) -> Value {
    i.as_ref().map_or(Value::Null, |v| Value::String(v.to_string()))
}

fn report_json(r: &GaleReport) -> Value {
    json!({
        "support_saturation_index": index_json(&r.support_index),
        "weights_saturation_index": index_json(&r.weights_index),
        "dims_consistent": r.dims_consistent,
        "annihilation": r.annihilation,
        "pullback_vanishes": r.pullback_vanishes,
        "lambdas_define_poly": r.lambdas_define_poly,
        "essential": r.essential,
        "odd_indices": r.odd_indices(),
        "all_pass": r.all_pass,
        "failures": r.failures(),
    })
}

fn sparse_lines(s: &SparseSystem) -> Vec<String> {
    (0..s.num_equations()).map(|i| s.render_equation(i)).collect()
}

fn master_lines(ms: &MasterSystem) -> Vec<String> {
    (0..ms.weights().len())
        .map(|j| format!("{} = 1", ms.render_master_function(j)))
        .collect()
}

fn binomial_lines(ms: &MasterSystem) -> Vec<String> {
    (0..ms.weights().len())
        .map(|j| format!("{} = 0", clear_denominators(ms, j).render(ms.arrangement(), ms.variables())))
        .collect()
}

fn form_lines(ms: &MasterSystem) -> Vec<String> {
    ms.arrangement()
        .forms()
        .iter()
        .enumerate()
        .map(|(i, f)| format!("p{} = {}", i + 1, f.render(ms.variables())))
        .collect()
}

fn pair_json(gp: &GalePair, direction: &str, report: &GaleReport) -> Value {
    let lambdas: Vec<Vec<String>> = gp
        .lambdas
        .row_vecs()
        .iter()
        .map(|r| r.iter().map(format_rational).collect())
        .collect();
    let diagonalized: Vec<String> = match diagonalize(&gp.poly) {
        Ok(d) => (0..gp.poly.num_equations()).map(|i| d.render_equation(i)).collect(),
        Err(_) => Vec::new(),
    };
    json!({
        "direction": direction,
        "sparse": SparseJson::from_system(&gp.poly),
        "master": MasterJson::from_system(&gp.master),
        "lambdas": lambdas,
        "variable_sources": gp.variable_sources,
        "report": report_json(report),
        "rendered": {
            "sparse_equations": sparse_lines(&gp.poly),
            "diagonalized": diagonalized,
            "forms": form_lines(&gp.master),
            "master_functions": master_lines(&gp.master),
            "cleared_binomials": binomial_lines(&gp.master),
            "lambdas": (0..gp.lambdas.rows()).map(|j| render_lambda(gp, j)).collect::<Vec<_>>(),
        },
    })
}

fn pair_text(gp: &GalePair, direction: &str, report: &GaleReport) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "direction: {direction}");
    let _ = writeln!(t, "sparse system:");
    for l in sparse_lines(&gp.poly) {
        let _ = writeln!(t, "  {l} = 0");
    }
    if let Ok(d) = diagonalize(&gp.poly) {
        let _ = writeln!(t, "diagonalized:");
        for i in 0..gp.poly.num_equations() {
            let _ = writeln!(t, "  {}", d.render_equation(i));
        }
    }
    let _ = writeln!(t, "arrangement:");
    for (l, src) in form_lines(&gp.master).iter().zip(std::iter::repeat(())) {
        let _ = src;
        let _ = writeln!(t, "  {l}");
    }
    if !gp.variable_sources.is_empty() {
        let pairs: Vec<String> = gp
            .master
            .variables()
            .iter()
            .zip(&gp.variable_sources)
            .map(|(v, s)| format!("{v} = {s}"))
            .collect();
        let _ = writeln!(t, "variables: {}", pairs.join(", "));
    }
    let _ = writeln!(t, "master functions:");
    for l in master_lines(&gp.master) {
        let _ = writeln!(t, "  {l}");
    }
    let _ = writeln!(t, "cleared:");
    for l in binomial_lines(&gp.master) {
        let _ = writeln!(t, "  {l}");
    }
    let _ = writeln!(t, "weights: {:?}", gp.master.weights().matrix().to_i64_rows().unwrap_or_default());
    t.push_str(&report_text(report));
    t
}

fn report_text(r: &GaleReport) -> String {
    let idx = |i: &Option<BigInt>| i.as_ref().map_or("undefined".to_string(), |v| v.to_string());
    let mut t = String::new();
    let _ = writeln!(
        t,
        "certificate: {} (support index {}, weights index {})",
        if r.all_pass { "pass" } else { "FAIL" },
        idx(&r.support_index),
        idx(&r.weights_index)
    );
    for f in r.failures() {
        let _ = writeln!(t, "  - {f}");
    }
    t
}

fn diagnostic_failure(command: &str, e: &GaleError) -> Outcome {
    let index = match e {
        GaleError::NotPrimitive { index, .. } => Some(index.clone()),
        _ => None,
    };
    let odd = index.as_ref().map(|i| i.bit(0));
    let mut text = format!("diagnostic failure: {e}\n");
    if let Some(i) = &index {
        let _ = writeln!(text, "saturation index: {i}");
    }
    Outcome {
        code: EXIT_DIAGNOSTIC,
        json: json!({
            "command": command,
            "status": "diagnostic-failure",
            "error": e.to_string(),
            "saturation_index": index_json(&index),
            "odd_index": odd,
        }),
        text,
    }
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_dualize(system: &SystemFile) -> Outcome {
    let (result, direction) = match system {
        SystemFile::Sparse(s) => (dualize_poly_to_master(s), "sparse-to-master"),
        SystemFile::Master(ms) => (dualize_master_to_poly(ms), "master-to-sparse"),
    };
    let gp = match result {
        Ok(gp) => gp,
        Err(e) => return diagnostic_failure("dualize", &e),
    };
    let report = check_gale_pair(&gp);
    let mut value = pair_json(&gp, direction, &report);
    let code = if report.all_pass { EXIT_OK } else { EXIT_DIAGNOSTIC };
    value["command"] = json!("dualize");
    value["status"] = json!(if report.all_pass { "ok" } else { "diagnostic-failure" });
    Outcome {
        code,
        json: value,
        text: pair_text(&gp, direction, &report),
    }
}

struct Bounds {
    dims: (usize, usize, usize),
    kouchnirenko: BigInt,
    euler: BigInt,
}

fn bounds_for(w: &ExponentMatrix, b: &WeightBasis) -> Result<Bounds, String> {
    let kouchnirenko = kouchnirenko_bound(w).map_err(|e| e.to_string())?;
    let euler = euler_characteristic(b).map_err(|e| e.to_string())?;
    Ok(Bounds {
        dims: w.dims(),
        kouchnirenko,
        euler,
    })
}

fn cmd_bound(system: &SystemFile) -> Outcome {
    let computed = match system {
        SystemFile::Sparse(s) => {
            let b = s.support().relations();
            bounds_for(s.support(), &b)
        }
        SystemFile::Master(ms) => {
            let b = ms.weights();
            if !b.is_primitive() {
                let e = GaleError::NotPrimitive {
                    what: "weights",
                    index: b.saturation_index(),
                };
                return diagnostic_failure("bound", &e);
            }
            match quotient_images(b) {
                Ok(w) => bounds_for(&w, b),
                Err(e) => Err(e.to_string()),
            }
        }
    };
    let bounds = match computed {
        Ok(b) => b,
        Err(message) => {
            return Outcome {
                code: EXIT_DIAGNOSTIC,
                json: json!({"command": "bound", "status": "diagnostic-failure", "error": message}),
                text: format!("diagnostic failure: {message}\n"),
            }
        }
    };
    let (l, m, n) = bounds.dims;
    let variants = [
        ("positive_orthant", fewnomial_bound(l, n, FewnomialVariant::PositiveOrthant)),
        ("all_real", fewnomial_bound(l, n, FewnomialVariant::AllReal)),
        ("betti", fewnomial_bound(l, n, FewnomialVariant::Betti { m })),
    ];
    let mut fewnomial = serde_json::Map::new();
    let mut text = format!(
        "dims (l, m, n) = ({l}, {m}, {n})\nkouchnirenko bound: {}\neuler characteristic: {}\n",
        bounds.kouchnirenko, bounds.euler
    );
    for (key, b) in &variants {
        fewnomial.insert(
            key.to_string(),
            json!({"value": b.value, "rounded": format_sig4(b.value), "expression": b.expression}),
        );
        let _ = writeln!(text, "fewnomial {key}: {} = {}", b.expression, format_sig4(b.value));
    }
    Outcome {
        code: EXIT_OK,
        json: json!({
            "command": "bound",
            "status": "ok",
            "dims": {"l": l, "m": m, "n": n},
            "kouchnirenko_bound": bounds.kouchnirenko.to_string(),
            "euler_characteristic": bounds.euler.to_string(),
            "fewnomial": fewnomial,
        }),
        text,
    }
}

fn complex_json(z: &num_complex::Complex64) -> Value {
    json!([z.re, z.im])
}

fn solutions_json(set: &SolutionSet) -> Value {
    let sols: Vec<Value> = set
        .solutions
        .iter()
        .map(|s| {
            json!({
                "point": s.point.iter().map(complex_json).collect::<Vec<_>>(),
                "residual": s.residual,
                "multiplicity": s.multiplicity,
                "is_real": s.is_real,
                "location": s.location.as_str(),
            })
        })
        .collect();
    json!({
        "variables": set.variables,
        "elimination": set.elimination.to_string(),
        "resultant_degree": set.resultant_degree,
        "count": set.count(),
        "real_count": set.real_count(),
        "max_residual": set.max_residual(),
        "solutions": sols,
        "diagnostics": set.diagnostics,
    })
}

fn solutions_text(title: &str, set: &SolutionSet) -> String {
    let mut t = format!(
        "{title}: {} solutions ({} real), max residual {:.3e}\n",
        set.count(),
        set.real_count(),
        set.max_residual()
    );
    for (k, s) in set.solutions.iter().enumerate() {
        let _ = writeln!(
            t,
            "  [{k}] {} {} mult {} residual {:.3e}{}",
            s.location.as_str(),
            format_point(&s.point),
            s.multiplicity,
            s.residual,
            if s.is_real { " real" } else { "" }
        );
    }
    for d in &set.diagnostics {
        let _ = writeln!(t, "  note: {d}");
    }
    t
}

fn solver_failure(command: &str, e: &SolverError) -> Outcome {
    Outcome {
        code: EXIT_SOLVER,
        json: json!({"command": command, "status": "solver-failure", "error": e.to_string()}),
        text: format!("solver failure: {e}\n"),
    }
}

fn cmd_solve(system: &SystemFile, cfg: &SolverConfig) -> Outcome {
    let result = match system {
        SystemFile::Sparse(s) => solve_sparse(s, cfg),
        SystemFile::Master(ms) => solve_master(ms, cfg),
    };
    let set = match result {
        Ok(s) => s,
        Err(e) => return solver_failure("solve", &e),
    };
    let verified = set.all_verified(cfg.verify_tol);
    let mut value = json!({"command": "solve", "status": if verified { "ok" } else { "solver-failure" }});
    value["solutions"] = solutions_json(&set);
    let mut text = solutions_text("solutions", &set);
    if !verified {
        value["error"] = json!("some residuals exceed the verification tolerance");
        text.push_str("some residuals exceed the verification tolerance\n");
    }
    Outcome {
        code: if verified { EXIT_OK } else { EXIT_SOLVER },
        json: value,
        text,
    }
}

/// The pair to verify. Non-primitive weights are not rejected: the sparse
/// side is built from the saturated lattice so the mismatch shows up in the
/// solution counts.
fn pair_for_verify(system: &SystemFile) -> Result<GalePair, GaleError> {
    match system {
        SystemFile::Sparse(s) => dualize_poly_to_master(s),
        SystemFile::Master(ms) => {
            let b = ms.weights();
            if b.saturation_index().is_one() {
                dualize_master_to_poly(ms)
            } else {
                let sat = ms.with_weights(saturate(b.matrix()))?;
                let mut gp = dualize_master_to_poly(&sat)?;
                gp.master = ms.clone();
                Ok(gp)
            }
        }
    }
}

fn matches_json(rep: &IsomorphismReport) -> Value {
    let m: Vec<Value> = rep
        .matching
        .iter()
        .map(|m| {
            json!({
                "poly": m.poly,
                "master": m.master,
                "distance": m.distance,
                "consistency": m.consistency,
                "real_preserved": m.real_preserved,
                "multiplicity_preserved": m.multiplicity_preserved,
            })
        })
        .collect();
    Value::Array(m)
}

fn cmd_verify(system: &SystemFile, cfg: &JobConfig) -> Outcome {
    let gp = match pair_for_verify(system) {
        Ok(gp) => gp,
        Err(e) => return diagnostic_failure("verify", &e),
    };
    let certificate = check_gale_pair(&gp);
    let rep = match verify_isomorphism(&gp, &cfg.solver) {
        Ok(r) => r,
        Err(e) => return solver_failure("verify", &e),
    };
    let bound = kouchnirenko_bound(gp.poly.support()).ok();
    let poly_count = rep.poly_solutions.count_with_multiplicity();
    let master_count = rep.master_solutions.count_with_multiplicity();
    let counts_match_bound = bound
        .as_ref()
        .is_some_and(|b| *b == BigInt::from(poly_count) && *b == BigInt::from(master_count));
    let verified = rep.poly_solutions.all_verified(cfg.solver.verify_tol)
        && rep.master_solutions.all_verified(cfg.solver.verify_tol);
    let perfect = rep.is_perfect();
    let code = if !verified {
        EXIT_SOLVER
    } else if !perfect || (cfg.generic && !counts_match_bound) {
        EXIT_MISMATCH
    } else {
        EXIT_OK
    };
    let status = match code {
        EXIT_OK => "ok",
        EXIT_SOLVER => "solver-failure",
        _ => "mismatch",
    };
    let value = json!({
        "command": "verify",
        "status": status,
        "certificate": report_json(&certificate),
        "kouchnirenko_bound": bound.as_ref().map(|b| b.to_string()),
        "poly_count": poly_count,
        "master_count": master_count,
        "poly_real_count": rep.poly_solutions.real_count(),
        "master_real_count": rep.master_solutions.real_count(),
        "counts_match_bound": counts_match_bound,
        "bijection": rep.is_bijection(),
        "preserves_reality": rep.preserves_reality(),
        "max_match_distance": rep.max_distance(),
        "match_tol": rep.match_tol,
        "matching": matches_json(&rep),
        "unmatched_poly": rep.unmatched_poly,
        "unmatched_master": rep.unmatched_master,
        "poly_solutions": solutions_json(&rep.poly_solutions),
        "master_solutions": solutions_json(&rep.master_solutions),
    });
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{status}: {poly_count} sparse solutions ({} real) <-> {master_count} master solutions ({} real); bound {}",
        rep.poly_solutions.real_count(),
        rep.master_solutions.real_count(),
        bound.map_or("undefined".to_string(), |b| b.to_string())
    );
    let _ = writeln!(
        text,
        "matched {} pairs, max distance {:.3e}, unmatched {} / {}",
        rep.matching.len(),
        rep.max_distance(),
        rep.unmatched_poly.len(),
        rep.unmatched_master.len()
    );
    text.push_str(&report_text(&certificate));
    text.push_str(&solutions_text("sparse side", &rep.poly_solutions));
    text.push_str(&solutions_text("master side", &rep.master_solutions));
    Outcome { code, json: value, text }
}
