//! `srr`: command-line front end for the service rate region solvers.
//!
//! Results go to stdout (or `--out`) as JSON, boundary traces as CSV. Exit
//! codes: 0 success, 2 invalid input, 3 resource budget exceeded.

mod input;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use srr_core::bounds::{bounds_report, search_qn, SearchOptions};
use srr_core::nq::{brute_force_nq, solve_nq, Mode, NqInstance};
use srr_core::projective::ProjectiveSpace;
use srr_core::recovery::{ambient_recovery_sets, projective_recovery_sets, recovery_sets_of_matrix, sets_to_json};
use srr_core::region::{boundary_csv, membership, reduce, trace_boundary};
use srr_core::{Budget, FieldSpec};

use input::{budget_from_env, demand_set, generator_matrix, load_demands, load_matrix, ProblemFile};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(srr_core::Error),
}

impl From<srr_core::Error> for CliError {
    fn from(e: srr_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_budget() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "srr", version, about = "Exact service rate region solvers for linear coded storage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Field order (a prime power).
    #[arg(long, global = true)]
    q: Option<u64>,
    /// Field characteristic; use with --r.
    #[arg(long, global = true, requires = "r")]
    p: Option<u32>,
    /// Extension degree; use with --p.
    #[arg(long, global = true, requires = "p")]
    r: Option<u32>,
    /// Number of objects.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Demand set: a JSON array of points or a problem file.
    #[arg(long, global = true, value_name = "FILE")]
    demands: Option<PathBuf>,
    /// Generator matrix: a JSON array of columns or a problem file.
    #[arg(long, global = true, value_name = "FILE")]
    matrix: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Projective)]
    mode: ModeArg,
    /// Hyperplane cuts in the n_q program.
    #[arg(long, global = true, value_enum, default_value_t = Switch::On)]
    cuts: Switch,
    /// Server count for `qn` and `bounds`.
    #[arg(long, global = true)]
    n: Option<u64>,
    /// Largest field tried by `qn`.
    #[arg(long = "q-max", global = true, default_value_t = 64)]
    q_max: u64,
    /// Largest server count tried by `oracle`.
    #[arg(long = "n-max", global = true, default_value_t = 6)]
    n_max: u64,
    /// Rays per face for `region`.
    #[arg(long, global = true, default_value_t = 9)]
    resolution: usize,
    /// Object for `recovery` (all objects when omitted).
    #[arg(long, global = true)]
    object: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for data-parallel loops.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Accepted for interface stability; every algorithm is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether each demand point lies in the region of a matrix.
    Membership,
    /// Trace the region boundary along a fan of rays (k = 2 or 3).
    Region,
    /// List minimal recovery sets.
    Recovery,
    /// Compute n_q(S) with a certificate.
    Nq,
    /// Search for the smallest field q_n(S).
    Qn,
    /// Closed-form bounds.
    Bounds,
    /// Drop demand points inside the convex hull of the others.
    Reduce,
    /// Brute-force n_q(S) for small instances.
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ambient,
    Projective,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Ambient => Mode::Ambient,
            ModeArg::Projective => Mode::Projective,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

struct Ctx {
    common: Common,
    budget: Budget,
}

impl Ctx {
    /// Field from the flags, else from the given problem file.
    fn field(&self, file: Option<&ProblemFile>) -> Result<FieldSpec, CliError> {
        match (self.common.q, self.common.p, self.common.r) {
            (Some(_), Some(_), _) => Err(CliError::Input("give either --q or --p/--r, not both".into())),
            (Some(q), None, _) => Ok(FieldSpec::of_order(q)?),
            (None, Some(p), Some(r)) => Ok(FieldSpec::new(p, r)?),
            _ => match file.and_then(|f| f.field.clone()) {
                Some(f) => f.resolve(),
                None => Err(CliError::Input("no field: pass --q or --p/--r".into())),
            },
        }
    }

    fn demands_file(&self) -> Result<ProblemFile, CliError> {
        let path = self.common.demands.as_ref().ok_or_else(|| CliError::Input("--demands is required".into()))?;
        load_demands(path)
    }

    fn matrix_file(&self) -> Result<ProblemFile, CliError> {
        let path = self.common.matrix.as_ref().ok_or_else(|| CliError::Input("--matrix is required".into()))?;
        load_matrix(path)
    }

    fn instance(&self) -> Result<NqInstance, CliError> {
        let file = self.demands_file()?;
        let field = self.field(Some(&file))?;
        Ok(NqInstance::new(&field, demand_set(&file)?)?
            .with_mode(self.common.mode.into())
            .with_cuts(self.common.cuts == Switch::On)
            .with_budget(self.budget))
    }

    fn require_json(&self) -> Result<(), CliError> {
        match self.common.format {
            Some(Format::Csv) => Err(CliError::Input("this command only writes JSON".into())),
            _ => Ok(()),
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn field_json(f: &FieldSpec) -> Value {
    serde_json::to_value(f).expect("serializable")
}

fn cmd_membership(ctx: &Ctx) -> Result<String, CliError> {
    ctx.require_json()?;
    let mfile = ctx.matrix_file()?;
    let dfile = ctx.demands_file()?;
    let field = ctx.field(Some(&mfile)).or_else(|_| ctx.field(Some(&dfile)))?;
    let g = generator_matrix(&mfile, &field)?;
    let s = demand_set(&dfile)?;
    let mut results = Vec::new();
    for p in &s.points {
        let m = membership(&g, p)?;
        let verified = match (m.allocation(), m.certificate()) {
            (Some(a), _) => a.verify(&g, p),
            (_, Some(c)) => c.verify(&g, p),
            _ => false,
        };
        let mut entry = serde_json::to_value(&m).expect("serializable");
        entry["point"] = serde_json::to_value(p).expect("serializable");
        entry["verified"] = json!(verified);
        results.push(entry);
    }
    Ok(to_json(&json!({
        "field": field_json(&field),
        "k": g.k(),
        "all_supported": results.iter().all(|r| r["supported"] == json!(true)),
        "results": results,
    })))
}

fn cmd_region(ctx: &Ctx) -> Result<String, CliError> {
    let mfile = ctx.matrix_file()?;
    let field = ctx.field(Some(&mfile))?;
    let g = generator_matrix(&mfile, &field)?;
    let trace = trace_boundary(&g, ctx.common.resolution)?;
    match ctx.common.format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(boundary_csv(&trace)),
        Format::Json => Ok(to_json(&json!({ "k": g.k(), "rays": trace }))),
    }
}

fn cmd_recovery(ctx: &Ctx) -> Result<String, CliError> {
    ctx.require_json()?;
    let mut sets = BTreeMap::new();
    if ctx.common.matrix.is_some() {
        let mfile = ctx.matrix_file()?;
        let field = ctx.field(Some(&mfile))?;
        let g = generator_matrix(&mfile, &field)?;
        let objects: Vec<usize> = ctx.common.object.map_or_else(|| (1..=g.k()).collect(), |i| vec![i]);
        for i in objects {
            sets.insert(i.to_string(), sets_to_json(&recovery_sets_of_matrix(&g, i)?));
        }
        return Ok(to_json(&json!({ "field": field_json(&field), "k": g.k(), "sets": sets })));
    }
    let field = ctx.field(None)?;
    let k = ctx.common.k.ok_or_else(|| CliError::Input("--k is required without --matrix".into()))?;
    let objects: Vec<usize> = ctx.common.object.map_or_else(|| (1..=k).collect(), |i| vec![i]);
    let mode: Mode = ctx.common.mode.into();
    let space = match mode {
        Mode::Projective => Some(ProjectiveSpace::new(&field, k)?),
        Mode::Ambient => None,
    };
    for i in objects {
        let list = match &space {
            Some(space) => projective_recovery_sets(space, i, &ctx.budget)?,
            None => ambient_recovery_sets(k, &field, i, &ctx.budget)?,
        };
        sets.insert(i.to_string(), sets_to_json(&list));
    }
    Ok(to_json(&json!({ "field": field_json(&field), "k": k, "mode": mode, "sets": sets })))
}

fn cmd_nq(ctx: &Ctx) -> Result<String, CliError> {
    ctx.require_json()?;
    let inst = ctx.instance()?;
    let cert = solve_nq(&inst)?;
    Ok(to_json(&json!({
        "n_q": cert.n,
        "field": field_json(&inst.field),
        "k": inst.k,
        "demands": inst.demands.points,
        "matrix": cert.matrix().column_labels(),
        "certificate": cert,
    })))
}

fn cmd_qn(ctx: &Ctx) -> Result<String, CliError> {
    ctx.require_json()?;
    let file = ctx.demands_file()?;
    let s = demand_set(&file)?;
    let n = ctx.common.n.ok_or_else(|| CliError::Input("--n is required".into()))?;
    let opts = SearchOptions {
        q_max: ctx.common.q_max,
        mode: ctx.common.mode.into(),
        cuts: ctx.common.cuts == Switch::On,
        budget: ctx.budget,
    };
    Ok(to_json(&search_qn(&s, n, &opts)?))
}

fn cmd_bounds(ctx: &Ctx) -> Result<String, CliError> {
    ctx.require_json()?;
    let file = ctx.demands_file()?;
    let s = demand_set(&file)?;
    let qs: Vec<u64> = match (ctx.common.q, ctx.common.p, ctx.common.r) {
        (Some(q), _, _) => vec![q],
        (None, Some(p), Some(r)) => vec![FieldSpec::new(p, r)?.q() as u64],
        _ => vec![2, 3, 4, 5],
    };
    Ok(to_json(&bounds_report(&s, &qs, ctx.common.n)?))
}

fn cmd_reduce(ctx: &Ctx) -> Result<String, CliError> {
    ctx.require_json()?;
    let file = ctx.demands_file()?;
    let s = demand_set(&file)?;
    let r = reduce(&s)?;
    Ok(to_json(&json!({ "demands": r.points, "removed": s.len() - r.len() })))
}

fn cmd_oracle(ctx: &Ctx) -> Result<String, CliError> {
    ctx.require_json()?;
    let inst = ctx.instance()?;
    let n = brute_force_nq(&inst, ctx.common.n_max)?;
    Ok(to_json(&json!({ "n_q": n, "n_max": ctx.common.n_max })))
}

#[cfg(feature = "parallel")]
fn configure_jobs(jobs: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Input("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot configure {n} workers: {e}")))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_jobs(_jobs: Option<usize>) -> Result<(), CliError> {
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_jobs(cli.common.jobs)?;
    let ctx = Ctx {
        budget: budget_from_env()?,
        common: cli.common,
    };
    let output = match cli.command {
        Command::Membership => cmd_membership(&ctx),
        Command::Region => cmd_region(&ctx),
        Command::Recovery => cmd_recovery(&ctx),
        Command::Nq => cmd_nq(&ctx),
        Command::Qn => cmd_qn(&ctx),
        Command::Bounds => cmd_bounds(&ctx),
        Command::Reduce => cmd_reduce(&ctx),
        Command::Oracle => cmd_oracle(&ctx),
    }?;
    match &ctx.common.out {
        Some(path) => fs::write(path, output).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{output}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("srr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
