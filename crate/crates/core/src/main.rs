use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use ramify::error::{Error, Result};
use ramify::pgroups::identify_h11;
use ramify::ramification::{HasseArf, TheoremVerdict};
use ramify::tower::{StepKind, TowerModel, TowerSpec, MIN_PRECISION};
use ramify::witness::{
    catalog, construct_cp, construct_h11_over, construct_s3, construct_split_product,
    disjoint_composite, random_disjoint_pairs, Analysis, WitnessReport, PRECISION_ENV,
};

const DEFAULT_SEED: u64 = 0x5eed;

/// Ramification filtrations of Artin-Schreier and Kummer towers over F_q((t)).
#[derive(Parser)]
#[command(name = "ramify", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Fixed working precision; without it precision is raised until the
    /// computation certifies.
    #[arg(long, global = true, env = PRECISION_ENV)]
    precision: Option<i64>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct SpecArg {
    /// Spec file, inline JSON, or a catalog name.
    #[arg(long)]
    spec: String,
}

#[derive(Subcommand)]
enum Command {
    /// Build the tower and summarize it.
    Build(SpecArg),
    /// Lower, upper and non-log breaks.
    Breaks(SpecArg),
    /// Galois group table and identification.
    Galois(SpecArg),
    /// Check a statement and report a verdict.
    #[command(subcommand)]
    Verify(Verify),
    /// List the built-in specs, or print one.
    Catalog { name: Option<String> },
}

#[derive(Subcommand)]
enum Verify {
    /// Abelian groups have integral upper breaks.
    HasseArf(SpecArg),
    /// Abelian wild part and integral non-log breaks force an abelian group.
    Imperfect(SpecArg),
    /// The H(1,1) witness with breaks b, a, a + b/p.
    Converse {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        a: u64,
        /// Residue degree over F_p.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Coefficient c in beta = c t^-b.
        #[arg(long, default_value_t = 1)]
        beta: u64,
    },
    /// Composite of two towers with disjoint breaks; with --random, seeded
    /// random pairs.
    Composite {
        #[arg(long, required_unless_present = "random")]
        spec: Option<String>,
        #[arg(long, required_unless_present = "random")]
        with: Option<String>,
        #[arg(long, conflicts_with_all = ["spec", "with"])]
        random: Option<usize>,
    },
    /// C_p with break b.
    Cp {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        b: u64,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Tame step of degree m under a wild C_p step.
    S3 {
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 2)]
        m: u64,
    },
    /// P x C_m from a wild spec over the base.
    Split {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        spec: String,
    },
}

fn load_spec(arg: &str) -> Result<TowerSpec> {
    let text = arg.trim_start();
    if text.starts_with('{') {
        return TowerSpec::from_json(text);
    }
    if !Path::new(arg).exists() {
        if let Some(spec) = catalog().remove(arg) {
            return Ok(spec);
        }
    }
    let text = std::fs::read_to_string(arg).map_err(|e| Error::Io(format!("{arg}: {e}")))?;
    TowerSpec::from_json(&text)
}

fn build_json(model: &TowerModel) -> Result<Value> {
    model.check_relations()?;
    let p = model.field().p() as u64;
    let steps: Vec<Value> = model
        .steps()
        .iter()
        .map(|step| match &step.kind {
            StepKind::ArtinSchreier { rhs, break_, .. } => json!({
                "type": "artin_schreier",
                "rhs": rhs.to_string(),
                "break": break_,
                "degree": step.degree(p),
            }),
            StepKind::Tame { m, .. } => json!({"type": "tame", "m": m, "degree": m}),
        })
        .collect();
    Ok(json!({
        "field": {"p": p, "n": model.field().degree(), "modulus": model.field().modulus()},
        "degree": model.degree(),
        "e": model.ramification_index(),
        "steps": steps,
        "precision": model.precision(),
    }))
}

/// Runs a command: report and exit status.
fn run(cli: &Cli) -> Result<(Value, u8)> {
    let prec = cli.precision;
    match &cli.command {
        Command::Build(s) => {
            let spec = load_spec(&s.spec)?;
            let n = prec.or(spec.precision).unwrap_or(MIN_PRECISION);
            let model = TowerModel::build(&spec, n)?;
            Ok((build_json(&model)?, 0))
        }
        Command::Breaks(s) => {
            let a = Analysis::run(&load_spec(&s.spec)?, prec)?;
            Ok((a.report_json()?, 0))
        }
        Command::Galois(s) => {
            let spec = load_spec(&s.spec)?;
            let a = Analysis::run(&spec, prec)?;
            let g = &a.group;
            let autos: Vec<Value> = (0..g.order()).map(|k| g.automorphism_json(k)).collect();
            let inv = g.table().invariants();
            let rank = inv.rank.map_or(Value::Null, |r| json!(r));
            let p = a.p();
            Ok((
                json!({
                    "group": a.name(),
                    "order": g.order(),
                    "h11": identify_h11(g.table(), p),
                    "abelian": inv.abelian,
                    "exponent": inv.exponent,
                    "center": inv.center,
                    "derived": inv.derived,
                    "rank": rank,
                    "table": g.table().to_json(),
                    "automorphisms": autos,
                }),
                0,
            ))
        }
        Command::Catalog { name } => {
            let cat = catalog();
            match name {
                Some(n) => {
                    let spec = cat
                        .get(n.as_str())
                        .ok_or_else(|| Error::InvalidSpec(format!("no catalog entry `{n}`")))?;
                    Ok((serde_json::to_value(spec).expect("spec serializes"), 0))
                }
                None => Ok((serde_json::to_value(&cat).expect("specs serialize"), 0)),
            }
        }
        Command::Verify(v) => verify(v, prec, cli.seed),
    }
}

fn witness(r: WitnessReport) -> Result<(Value, u8)> {
    let status = if r.passed() { 0 } else { 1 };
    Ok((r.to_json()?, status))
}

fn verify(v: &Verify, prec: Option<i64>, seed: u64) -> Result<(Value, u8)> {
    match v {
        Verify::HasseArf(s) => {
            let a = Analysis::run(&load_spec(&s.spec)?, prec)?;
            let ha = a.hasse_arf();
            let mut out = a.report_json()?;
            out["abelian"] = json!(ha.abelian);
            out["integral"] = json!(ha.integral);
            Ok((out, u8::from(ha.verdict == HasseArf::Fail)))
        }
        Verify::Imperfect(s) => {
            let a = Analysis::run(&load_spec(&s.spec)?, prec)?;
            let verdict = a.theorem()?;
            Ok((a.report_json()?, u8::from(verdict == TheoremVerdict::Violation)))
        }
        Verify::Converse { p, b, a, n, beta } => {
            let r = construct_h11_over(*p, *n, *b, *a, *beta, prec)?;
            let status = if r.passed() && r.converse() { 0 } else { 1 };
            Ok((r.to_json()?, status))
        }
        Verify::Cp { p, b, n } => witness(construct_cp(*p, *n, *b, prec)?),
        Verify::S3 { p, m } => witness(construct_s3(*p, *m, prec)?),
        Verify::Split { p, n, m, spec } => {
            witness(construct_split_product(*p, *n, *m, &load_spec(spec)?, prec)?)
        }
        Verify::Composite { spec, with, random } => match random {
            None => {
                let s1 = load_spec(spec.as_deref().expect("clap requires --spec"))?;
                let s2 = load_spec(with.as_deref().expect("clap requires --with"))?;
                witness(disjoint_composite(&s1, &s2, prec)?)
            }
            Some(count) => {
                let mut reports = Vec::new();
                let mut status = 0;
                for (s1, s2) in random_disjoint_pairs(seed, *count) {
                    let r = disjoint_composite(&s1, &s2, prec)?;
                    if !r.passed() {
                        status = 1;
                    }
                    reports.push(r.to_json()?);
                }
                Ok((json!({"seed": seed, "pairs": reports}), status))
            }
        },
    }
}

fn error_json(e: &Error) -> Value {
    let mut out = Map::new();
    out.insert("error".into(), json!(e.root().to_string()));
    out.insert("message".into(), json!(e.to_string()));
    if let Error::Step { index, .. } = e {
        out.insert("step".into(), json!(index));
    }
    if let Some(h) = e.hint() {
        out.insert("hint".into(), json!(h));
    }
    Value::Object(out)
}

fn table(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Object(map) => {
            let width = map.keys().map(|k| k.len()).max().unwrap_or(0);
            for (k, val) in map {
                let shown = match val {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                out.push_str(&format!("{k:width$}  {shown}\n"));
            }
        }
        other => {
            out.push_str(&other.to_string());
            out.push('\n');
        }
    }
    out
}

fn emit(v: &Value, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(v).expect("json")),
        Format::Table => print!("{}", table(v)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, status)) => {
            emit(&report, cli.format);
            ExitCode::from(status)
        }
        Err(e) => {
            emit(&error_json(&e), cli.format);
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
