//! Command-line driver. Argument parsing, dispatch, exit codes, and output
//! formatting live here; the mathematics is all in the library modules.
//!
//! Exit codes: 0 independent / non-degenerate / nonzero; 1 dependent /
//! degenerate / zero; 2 the method refused or stayed inconclusive; 3 hard
//! errors and cross-method disagreement.

use std::ffi::OsString;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::fq::{FqContext, FqElem};
use crate::galois::GrContext;
use crate::hitting::{hitting_set, HittingParams};
use crate::interp::{algo5_independence_full, circuit_coeff, Algo5Mode, Algo5Report};
use crate::oracle::independence_oracle_full;
use crate::poly::{parse_poly, ExponentVec, SparsePoly};
use crate::textio::{CircuitFile, ProblemFile};
use crate::witt::{universal_witt_polys, witt_to_galois, WittRing, WITT_LEVEL_CAP};
use crate::wj::{
    classical_jacobian_independent, is_degenerate, lift_poly, padic_jacobian_necessity,
    witt_jacobian_independent, wjp, ColexSubsets, DegeneracyMode, IndependenceVerdict,
    NecessityVerdict, WJP_TERM_CAP,
};

pub const EXIT_INDEPENDENT: i32 = 0;
pub const EXIT_DEPENDENT: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

/// Deliberate "cannot decide within caps" outcomes, as opposed to bad input.
fn refusal(e: &Error) -> bool {
    matches!(
        e,
        Error::CharacteristicTooSmall { .. }
            | Error::MatrixCapExceeded { .. }
            | Error::TermCapExceeded { .. }
            | Error::TooLarge(_)
            | Error::FieldTooSmall { .. }
            | Error::PrecisionTooSmall { .. }
            | Error::LevelCapExceeded { .. }
            | Error::SearchExhausted(_)
    )
}

#[derive(Parser)]
#[command(
    name = "wjtool",
    version,
    about = "algebraic independence over finite fields of any characteristic"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide algebraic independence of the polynomials in a problem file
    Indep(IndepArgs),
    /// Circuit-level independence by interpolation, without expansion
    Algo5(Algo5Args),
    /// Inspection and construction utilities
    #[command(subcommand)]
    Tools(Tool),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// p-adic criterion: lift, scale the Jacobian, test degeneracy
    Wj,
    /// classical Jacobian rank, valid only for large characteristic
    Jacobian,
    /// brute-force annihilating-polynomial search within degree bounds
    Perron,
    /// necessity screen: degenerate everywhere is inconclusive
    Padic,
    /// interpolation on circuits built from the polynomials
    Algo5,
    /// every applicable method; disagreement is a hard error
    All,
}

#[derive(Args)]
struct IndepArgs {
    /// problem file; `-` reads stdin
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Wj)]
    method: MethodArg,
    /// characteristic, when the file header has no p=
    #[arg(long)]
    p: Option<u64>,
    /// extension degree, when the header has no e=
    #[arg(long)]
    e: Option<usize>,
    /// one JSON object instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exhaustive,
    SupportGuided,
}

impl From<ModeArg> for Algo5Mode {
    fn from(m: ModeArg) -> Algo5Mode {
        match m {
            ModeArg::Exhaustive => Algo5Mode::Exhaustive,
            ModeArg::SupportGuided => Algo5Mode::SupportGuided,
        }
    }
}

#[derive(Args)]
struct Algo5Args {
    /// circuit file (gate lists); `-` reads stdin
    #[arg(long)]
    circuits: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
    mode: ModeArg,
    /// fix the arity instead of inferring it from variable indices
    #[arg(long)]
    arity: Option<usize>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    e: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Tool {
    /// Scaled p-adic Jacobian determinant for one index set
    Wjp(WjpArgs),
    /// Divisibility-threshold test on polynomials over Z/p^m or a Galois ring
    Degeneracy(DegeneracyArgs),
    /// Stream hitting-set points as JSON lines
    HittingSet(HittingSetArgs),
    /// One coefficient of the polynomial a circuit computes
    Coeff(CoeffArgs),
    /// Witt-vector arithmetic walkthrough
    WittDemo(WittDemoArgs),
    /// Seeded random cross-validation of the criterion against the oracle
    Crosscheck(CrosscheckArgs),
}

#[derive(Args)]
struct WjpArgs {
    /// problem file with the polynomial system
    #[arg(long)]
    input: PathBuf,
    /// 1-based variable indices, e.g. 1,3
    #[arg(long)]
    index_set: String,
    #[arg(long)]
    level: usize,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    e: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DegModeArg {
    Bounded,
    Unbounded,
}

#[derive(Args)]
struct DegeneracyArgs {
    /// polynomials over the lifted ring, one per line
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    level: usize,
    /// ring precision m; defaults to level + 1
    #[arg(long)]
    precision: Option<usize>,
    #[arg(long, value_enum, default_value_t = DegModeArg::Bounded)]
    mode: DegModeArg,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    e: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct HittingSetArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    e: usize,
    /// number of variables
    #[arg(long)]
    n: usize,
    /// transcendence-degree bound
    #[arg(long)]
    r: usize,
    /// sparsity bound on the inner polynomials
    #[arg(long)]
    s: u64,
    /// degree bound on the inner polynomials
    #[arg(long)]
    delta: u64,
    /// degree bound on the outer circuit
    #[arg(long)]
    d: u64,
    #[arg(long)]
    override_s1: Option<u64>,
    #[arg(long)]
    override_s2: Option<u64>,
    /// prime modulus limit override (certified formula value otherwise)
    #[arg(long)]
    override_n: Option<u64>,
    /// stop after this many points
    #[arg(long)]
    limit: Option<u64>,
}

#[derive(Args)]
struct CoeffArgs {
    /// file with exactly one gate-list circuit
    #[arg(long)]
    circuit: PathBuf,
    /// exponent vector, e.g. 2,0,1
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    e: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct WittDemoArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    t: usize,
    /// Witt-vector length (= ring precision)
    #[arg(long, default_value_t = 3)]
    len: usize,
}

#[derive(Args)]
struct CrosscheckArgs {
    #[arg(long, default_value_t = 2)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    e: usize,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    r: usize,
    #[arg(long, default_value_t = 2)]
    delta: u32,
    /// terms per polynomial
    #[arg(long, default_value_t = 2)]
    s: usize,
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Parse and dispatch; returns the process exit code instead of exiting, so
/// tests can drive the full surface in-process.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // --help and --version arrive as "errors" but exit successfully
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let json = cli.wants_json();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            let refused = refusal(&e);
            if json {
                println!(
                    "{}",
                    serde_json::json!({ "error": e.to_string(), "refused": refused })
                );
            } else {
                eprintln!("error: {e}");
            }
            if refused {
                EXIT_INCONCLUSIVE
            } else {
                EXIT_ERROR
            }
        }
    }
}

impl Cli {
    fn wants_json(&self) -> bool {
        match &self.cmd {
            Cmd::Indep(a) => a.json,
            Cmd::Algo5(a) => a.json,
            Cmd::Tools(Tool::Wjp(a)) => a.json,
            Cmd::Tools(Tool::Degeneracy(a)) => a.json,
            Cmd::Tools(Tool::HittingSet(_)) => true,
            Cmd::Tools(Tool::Coeff(a)) => a.json,
            Cmd::Tools(Tool::WittDemo(_)) => false,
            Cmd::Tools(Tool::Crosscheck(a)) => a.json,
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Indep(a) => cmd_indep(a),
        Cmd::Algo5(a) => cmd_algo5(a),
        Cmd::Tools(Tool::Wjp(a)) => cmd_wjp(a),
        Cmd::Tools(Tool::Degeneracy(a)) => cmd_degeneracy(a),
        Cmd::Tools(Tool::HittingSet(a)) => cmd_hitting_set(a),
        Cmd::Tools(Tool::Coeff(a)) => cmd_coeff(a),
        Cmd::Tools(Tool::WittDemo(a)) => cmd_witt_demo(a),
        Cmd::Tools(Tool::Crosscheck(a)) => cmd_crosscheck(a),
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidInput(format!("bad {what} entry {t:?}")))
        })
        .collect()
}

fn witness_text(v: &IndependenceVerdict) -> String {
    match &v.witness {
        Some(w) => format!(
            "; witness I={{{}}} alpha=({}) valuation {} < {}",
            w.index_set
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(","),
            w.alpha
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(","),
            w.coeff_valuation,
            w.threshold
        ),
        None => String::new(),
    }
}

fn verdict_exit(independent: bool) -> i32 {
    if independent {
        EXIT_INDEPENDENT
    } else {
        EXIT_DEPENDENT
    }
}

fn print_verdict(
    v: &IndependenceVerdict,
    extra: &[(&str, serde_json::Value)],
    json: bool,
) -> i32 {
    if json {
        let mut obj = v.to_json();
        for (k, val) in extra {
            obj[*k] = val.clone();
        }
        println!("{obj}");
    } else {
        let status = if v.independent { "independent" } else { "dependent" };
        let level = v.level.map(|l| format!(", level {l}")).unwrap_or_default();
        println!(
            "{status} ({}{level}{})",
            v.method.as_str(),
            witness_text(v)
        );
        for (k, val) in extra {
            println!("  {k}: {val}");
        }
    }
    verdict_exit(v.independent)
}

/// Exhaustive interpolation when the caps allow it, support-guided otherwise.
fn algo5_auto(cs: &[Circuit<FqContext>]) -> Result<(IndependenceVerdict, Algo5Report)> {
    match algo5_independence_full(cs, Algo5Mode::Exhaustive) {
        Err(Error::TooLarge(_)) => algo5_independence_full(cs, Algo5Mode::SupportGuided),
        other => other,
    }
}

fn cmd_indep(a: IndepArgs) -> Result<i32> {
    let text = read_input(&a.input)?;
    let pf = ProblemFile::parse(&text, a.p, a.e)?;
    let fs = pf.systems();
    match a.method {
        MethodArg::Wj => Ok(print_verdict(&witt_jacobian_independent(&fs)?, &[], a.json)),
        MethodArg::Jacobian => Ok(print_verdict(
            &classical_jacobian_independent(&fs)?,
            &[],
            a.json,
        )),
        MethodArg::Perron => {
            let (v, ann) = independence_oracle_full(&fs)?;
            let extra = [(
                "annihilator",
                ann.map(|a| a.to_json()).unwrap_or(serde_json::Value::Null),
            )];
            Ok(print_verdict(&v, &extra, a.json))
        }
        MethodArg::Algo5 => {
            let cs: Vec<Circuit<FqContext>> = fs.iter().map(Circuit::from_sparse_poly).collect();
            let (v, report) = algo5_auto(&cs)?;
            Ok(print_verdict(&v, &[("report", report.to_json())], a.json))
        }
        MethodArg::Padic => {
            let n = fs[0].arity();
            for index_set in ColexSubsets::new(n, fs.len()) {
                if let NecessityVerdict::Independent(w) =
                    padic_jacobian_necessity(&fs, &index_set)?
                {
                    let v = IndependenceVerdict {
                        independent: true,
                        method: crate::wj::Method::WittJacobian,
                        level: None,
                        witness: Some(w),
                    };
                    if a.json {
                        let mut obj = v.to_json();
                        obj["method"] = serde_json::json!("padic");
                        println!("{obj}");
                    } else {
                        println!("independent (padic{})", witness_text(&v));
                    }
                    return Ok(EXIT_INDEPENDENT);
                }
            }
            if a.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "independent": null,
                        "method": "padic",
                        "conclusive": false,
                    })
                );
            } else {
                println!("inconclusive (padic): every candidate determinant is degenerate");
            }
            Ok(EXIT_INCONCLUSIVE)
        }
        MethodArg::All => cmd_indep_all(&text, &pf, &fs, a.json),
    }
}

fn cmd_indep_all(
    text: &str,
    pf: &ProblemFile,
    fs: &[SparsePoly<FqContext>],
    json: bool,
) -> Result<i32> {
    struct Entry {
        name: &'static str,
        vote: Option<bool>,
        detail: serde_json::Value,
    }
    let mut entries: Vec<Entry> = Vec::new();

    let wj = witt_jacobian_independent(fs)?;
    entries.push(Entry { name: "wj", vote: Some(wj.independent), detail: wj.to_json() });

    match independence_oracle_full(fs) {
        Ok((v, ann)) => {
            let mut detail = v.to_json();
            detail["annihilator"] =
                ann.map(|a| a.to_json()).unwrap_or(serde_json::Value::Null);
            entries.push(Entry { name: "perron", vote: Some(v.independent), detail });
        }
        Err(e) if refusal(&e) => entries.push(Entry {
            name: "perron",
            vote: None,
            detail: serde_json::json!({ "skipped": e.to_string() }),
        }),
        Err(e) => return Err(e),
    }

    match classical_jacobian_independent(fs) {
        Ok(v) => entries.push(Entry { name: "jacobian", vote: Some(v.independent), detail: v.to_json() }),
        Err(e) if refusal(&e) => entries.push(Entry {
            name: "jacobian",
            vote: None,
            detail: serde_json::json!({ "skipped": e.to_string() }),
        }),
        Err(e) => return Err(e),
    }

    let cs: Vec<Circuit<FqContext>> = fs.iter().map(Circuit::from_sparse_poly).collect();
    match algo5_auto(&cs) {
        Ok((v, report)) => {
            let mut detail = v.to_json();
            detail["report"] = report.to_json();
            entries.push(Entry { name: "algo5", vote: Some(v.independent), detail });
        }
        Err(e) if refusal(&e) => entries.push(Entry {
            name: "algo5",
            vote: None,
            detail: serde_json::json!({ "skipped": e.to_string() }),
        }),
        Err(e) => return Err(e),
    }

    // the necessity screen only ever votes "independent"
    let n = fs[0].arity();
    let mut padic_vote = None;
    for index_set in ColexSubsets::new(n, fs.len()) {
        if let NecessityVerdict::Independent(w) = padic_jacobian_necessity(fs, &index_set)? {
            padic_vote = Some(w);
            break;
        }
    }
    entries.push(match padic_vote {
        Some(w) => Entry {
            name: "padic",
            vote: Some(true),
            detail: serde_json::json!({
                "independent": true,
                "witness": { "I": w.index_set, "alpha": w.alpha },
            }),
        },
        None => Entry {
            name: "padic",
            vote: None,
            detail: serde_json::json!({ "skipped": "necessity screen inconclusive" }),
        },
    });

    let votes: Vec<bool> = entries.iter().filter_map(|e| e.vote).collect();
    let agreed = votes.windows(2).all(|w| w[0] == w[1]);
    let methods_json: Vec<serde_json::Value> = entries
        .iter()
        .map(|e| {
            serde_json::json!({
                "method": e.name,
                "verdict": e.vote,
                "detail": e.detail,
            })
        })
        .collect();
    if !agreed {
        let artifact = serde_json::json!({
            "disagreement": true,
            "input": text,
            "p": pf.ctx.p(),
            "e": pf.ctx.t(),
            "vars": pf.vars,
            "methods": methods_json,
        });
        let path = "wjtool-disagreement.json";
        std::fs::write(path, format!("{artifact:#}"))?;
        eprintln!("error: methods disagree; full record written to {path}");
        return Ok(EXIT_ERROR);
    }
    let independent = votes[0];
    if json {
        println!(
            "{}",
            serde_json::json!({
                "independent": independent,
                "methods": methods_json,
            })
        );
    } else {
        for e in &entries {
            let line = match e.vote {
                Some(true) => "independent".into(),
                Some(false) => "dependent".into(),
                None => format!("skipped ({})", e.detail["skipped"].as_str().unwrap_or("")),
            };
            println!("{:>9}: {line}", e.name);
        }
        println!(
            "verdict: {}",
            if independent { "independent" } else { "dependent" }
        );
    }
    Ok(verdict_exit(independent))
}

fn cmd_algo5(a: Algo5Args) -> Result<i32> {
    let cf = CircuitFile::parse(&read_input(&a.circuits)?, a.p, a.e, a.arity)?;
    let (v, report) = algo5_independence_full(&cf.circuits, a.mode.into())?;
    Ok(print_verdict(&v, &[("report", report.to_json())], a.json))
}

fn cmd_wjp(a: WjpArgs) -> Result<i32> {
    let pf = ProblemFile::parse(&read_input(&a.input)?, a.p, a.e)?;
    let fs = pf.systems();
    let one_based: Vec<usize> = parse_list(&a.index_set, "index")?;
    let n = fs[0].arity();
    let mut index_set = Vec::with_capacity(one_based.len());
    for i in &one_based {
        if *i == 0 || *i > n {
            return Err(Error::InvalidInput(format!(
                "index {i} outside 1..={n}"
            )));
        }
        index_set.push(i - 1);
    }
    let gr = GrContext::new(&pf.ctx, a.level + 1)?;
    let gs: Vec<SparsePoly<GrContext>> =
        fs.iter().map(|f| lift_poly(f, &gr)).collect::<Result<_>>()?;
    let w = wjp(&gs, &index_set, a.level, WJP_TERM_CAP)?;
    let report = is_degenerate(&w, a.level, DegeneracyMode::Bounded)?;
    let text = w.to_text(&pf.vars);
    if a.json {
        println!(
            "{}",
            serde_json::json!({
                "wjp": text,
                "level": a.level,
                "precision": a.level + 1,
                "degenerate": report.degenerate,
                "witness": report.witness.as_ref().map(|(e, v, t)| serde_json::json!({
                    "alpha": e.as_slice(),
                    "coeff_valuation": v,
                    "threshold": t,
                })),
            })
        );
    } else {
        println!("wjp = {text}");
        match &report.witness {
            Some((e, v, t)) => println!(
                "not {}-degenerate: alpha=({}) has valuation {v} < {t}",
                a.level + 1,
                e.as_slice()
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            None => println!("{}-degenerate", a.level + 1),
        }
    }
    Ok(if report.degenerate {
        EXIT_DEPENDENT
    } else {
        EXIT_INDEPENDENT
    })
}

fn cmd_degeneracy(a: DegeneracyArgs) -> Result<i32> {
    let text = read_input(&a.input)?;
    let precision = a.precision.unwrap_or(a.level + 1);
    let mode = match a.mode {
        DegModeArg::Bounded => DegeneracyMode::Bounded,
        DegModeArg::Unbounded => DegeneracyMode::Unbounded,
    };
    let header = crate::textio::header_fields(&text)?;
    let p = header.p.or(a.p).ok_or_else(|| {
        Error::InvalidInput("characteristic not given (header p= or --p)".into())
    })?;
    let e = header.e.or(a.e).unwrap_or(1);
    let fq = FqContext::new(p, e)?;
    let gr = GrContext::new(&fq, precision)?;
    let body: Vec<(usize, String)> = text
        .lines()
        .enumerate()
        .skip(header.body_start)
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim().to_string()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    if body.is_empty() {
        return Err(Error::InvalidInput("no polynomials in input".into()));
    }
    let vars = match header.vars {
        Some(v) => v,
        None => {
            let k = body
                .iter()
                .map(|(_, l)| crate::textio::max_var_index(l))
                .max()
                .unwrap_or(0);
            (1..=k).map(|i| format!("x{i}")).collect()
        }
    };
    let mut all_clear = true;
    for (idx, (line, l)) in body.iter().enumerate() {
        let (name, src) = match l.split_once('=') {
            Some((lhs, rhs)) if crate::textio::is_identifier(lhs.trim()) => {
                (lhs.trim().to_string(), rhs.trim().to_string())
            }
            _ => (format!("f{}", idx + 1), l.clone()),
        };
        let f = parse_poly(&gr, &vars, &src).map_err(|err| match err {
            Error::Parse { msg, .. } => Error::Parse { line: *line, msg },
            other => Error::Parse { line: *line, msg: other.to_string() },
        })?;
        let report = is_degenerate(&f, a.level, mode)?;
        all_clear &= !report.degenerate;
        if a.json {
            println!(
                "{}",
                serde_json::json!({
                    "name": name,
                    "level": a.level,
                    "degenerate": report.degenerate,
                    "witness": report.witness.as_ref().map(|(e, v, t)| serde_json::json!({
                        "alpha": e.as_slice(),
                        "coeff_valuation": v,
                        "threshold": t,
                    })),
                })
            );
        } else {
            match &report.witness {
                Some((e, v, t)) => println!(
                    "{name}: not {}-degenerate (alpha=({}), valuation {v} < {t})",
                    a.level + 1,
                    e.as_slice()
                        .iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                ),
                None => println!("{name}: {}-degenerate", a.level + 1),
            }
        }
    }
    Ok(if all_clear {
        EXIT_INDEPENDENT
    } else {
        EXIT_DEPENDENT
    })
}

fn cmd_hitting_set(a: HittingSetArgs) -> Result<i32> {
    let fq = FqContext::new(a.p, a.e)?;
    let params = HittingParams::new(a.n, a.r, a.s, a.delta, a.d)?.with_overrides(
        a.override_s1,
        a.override_s2,
        a.override_n,
    )?;
    let mut emitted = 0u64;
    let mut truncated = false;
    for pt in hitting_set(&params, &fq)? {
        if a.limit.is_some_and(|l| emitted >= l) {
            truncated = true;
            break;
        }
        println!("{}", pt.to_json());
        emitted += 1;
    }
    println!(
        "{}",
        serde_json::json!({
            "summary": true,
            "points": emitted,
            "truncated": truncated,
            "mode": params.mode(),
            "params": params.to_json(),
        })
    );
    Ok(EXIT_INDEPENDENT)
}

fn cmd_coeff(a: CoeffArgs) -> Result<i32> {
    let cf = CircuitFile::parse(&read_input(&a.circuit)?, a.p, a.e, None)?;
    if cf.circuits.len() != 1 {
        return Err(Error::InvalidInput(format!(
            "expected one circuit, found {}",
            cf.circuits.len()
        )));
    }
    let alpha: Vec<u32> = parse_list(&a.alpha, "exponent")?;
    let c = circuit_coeff(&cf.circuits[0], &alpha)?;
    if a.json {
        println!(
            "{}",
            serde_json::json!({
                "alpha": alpha,
                "coeff": c.to_string(),
                "zero": c.is_zero(),
            })
        );
    } else {
        println!("coeff = {c}");
    }
    Ok(if c.is_zero() {
        EXIT_DEPENDENT
    } else {
        EXIT_INDEPENDENT
    })
}

fn cmd_witt_demo(a: WittDemoArgs) -> Result<i32> {
    if a.len == 0 {
        return Err(Error::InvalidInput("length must be at least 1".into()));
    }
    let fq = FqContext::new(a.p, a.t)?;
    println!(
        "Witt vectors of length {} over F_{}^{}",
        a.len, a.p, a.t
    );
    if a.len - 1 <= WITT_LEVEL_CAP {
        let uni = universal_witt_polys(a.p, a.len - 1)?;
        for i in 0..a.len {
            println!(
                "  level {i}: sum polynomial {} terms, product {} terms",
                uni.sums[i].terms().count(),
                uni.prods[i].terms().count(),
            );
        }
    } else {
        println!(
            "  (universal polynomials capped at level {WITT_LEVEL_CAP}; skipping term counts)"
        );
    }
    let wr = WittRing::new(&fq, a.p, a.len)?;
    let g = fq.generator();
    let xs: Vec<FqElem> = (0..a.len as u64).map(|i| g.pow(i)).collect();
    let ys: Vec<FqElem> = (0..a.len as u64).map(|i| g.pow(i + 1)).collect();
    let x = wr.from_coords(xs)?;
    let y = wr.from_coords(ys)?;
    let coords = |w: &crate::witt::WittVec<FqContext>| {
        w.coords()
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    println!("  x       = ({})", coords(&x));
    println!("  y       = ({})", coords(&y));
    let sum = x.add(&y)?;
    let prod = x.mul(&y)?;
    println!("  x + y   = ({})", coords(&sum));
    println!("  x * y   = ({})", coords(&prod));
    println!("  -x      = ({})", coords(&x.neg()?));
    let gr = GrContext::new(&fq, a.len)?;
    let phi = |w: &crate::witt::WittVec<FqContext>| witt_to_galois(w, &gr);
    let add_ok = phi(&sum)? == phi(&x)?.add(&phi(&y)?);
    let mul_ok = phi(&prod)? == phi(&x)?.mul(&phi(&y)?);
    println!(
        "  ghost-map check in the Galois ring: add {}, mul {}",
        if add_ok { "ok" } else { "MISMATCH" },
        if mul_ok { "ok" } else { "MISMATCH" },
    );
    Ok(if add_ok && mul_ok {
        EXIT_INDEPENDENT
    } else {
        EXIT_ERROR
    })
}

/// Minimal deterministic generator so reruns with one seed are reproducible.
struct Lcg64(u64);

impl Lcg64 {
    fn new(seed: u64) -> Self {
        Lcg64(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1))
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    fn below(&mut self, m: u64) -> u64 {
        self.next_u64() % m.max(1)
    }
}

fn random_system(
    rng: &mut Lcg64,
    ctx: &FqContext,
    n: usize,
    r: usize,
    delta: u32,
    s: usize,
) -> Vec<SparsePoly<FqContext>> {
    let size = ctx.size();
    let elem = |rng: &mut Lcg64| {
        let k = rng.below(size);
        ctx.elements().nth(k as usize).unwrap()
    };
    (0..r)
        .map(|_| {
            let mut f = SparsePoly::zero(ctx, n);
            for _ in 0..s {
                let mut alpha = vec![0u32; n];
                loop {
                    for a in alpha.iter_mut() {
                        *a = rng.below(delta as u64 + 1) as u32;
                    }
                    if alpha.iter().map(|&a| a as u64).sum::<u64>() <= delta as u64 {
                        break;
                    }
                }
                f.add_term(ExponentVec::from_slice(&alpha), elem(rng));
            }
            f
        })
        .collect()
}

fn cmd_crosscheck(a: CrosscheckArgs) -> Result<i32> {
    let ctx = FqContext::new(a.p, a.e)?;
    let mut rng = Lcg64::new(a.seed);
    let mut agreed = 0usize;
    let mut oracle_refused = 0usize;
    for i in 0..a.count {
        let fs = random_system(&mut rng, &ctx, a.n, a.r, a.delta, a.s);
        let wj = witt_jacobian_independent(&fs)?;
        match independence_oracle_full(&fs) {
            Ok((or, _)) => {
                if or.independent != wj.independent {
                    let rendered: Vec<String> = fs
                        .iter()
                        .map(|f| {
                            f.to_text(
                                &(1..=a.n).map(|j| format!("x{j}")).collect::<Vec<_>>(),
                            )
                        })
                        .collect();
                    eprintln!(
                        "disagreement at instance {i} (seed {}): wj={} oracle={} system={:?}",
                        a.seed, wj.independent, or.independent, rendered
                    );
                    return Ok(EXIT_ERROR);
                }
                agreed += 1;
            }
            Err(e) if refusal(&e) => oracle_refused += 1,
            Err(e) => return Err(e),
        }
    }
    if a.json {
        println!(
            "{}",
            serde_json::json!({
                "instances": a.count,
                "agreed": agreed,
                "oracle_refused": oracle_refused,
                "seed": a.seed,
            })
        );
    } else {
        println!(
            "{} instances: {agreed} agreed, {oracle_refused} oracle refusals (seed {})",
            a.count, a.seed
        );
    }
    Ok(EXIT_INDEPENDENT)
}
