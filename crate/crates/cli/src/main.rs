//! `mld`: exact minimal log discrepancies from the command line.
//!
//! Exit codes: 0 success or passing suite, 1 computation error, 2 failing
//! suite, 3 unreadable input or arguments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use mld_core::discrepancy::{pld, solve_discrepancies, Pld, PldOptions};
use mld_core::germ_file::{self, Germ};
use mld_core::mld_engine::{
    constants_for, gamma_of_set, mld_singular, mld_smooth, witness_set_singular, witness_set_smooth, SingularGerm,
};
use mld_core::par::{self, Execution};
use mld_core::rational::{fmt_q, parse_q};
use mld_core::theorem_lab::{self, run_example, VerificationReport};

/// Default worker count for suites when `--threads` is absent.
const THREADS_ENV: &str = "MLD_THREADS";

#[derive(Parser)]
#[command(name = "mld", version, about = "Exact minimal log discrepancies of surface germs")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Partial log discrepancy of a singular germ file.
    Pld { file: PathBuf },
    /// Minimal log discrepancy with one witness divisor.
    Mld { file: PathBuf },
    /// Every witness divisor within a blow-up depth.
    Witnesses {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Run a seeded verification suite.
    Verify(VerifyArgs),
    /// Compare a worked example with its closed form.
    Example {
        name: String,
        #[arg(long)]
        k: u32,
        /// Last k of a range starting at `--k`.
        #[arg(long)]
        k_max: Option<u32>,
    },
    /// gamma, N0, epsilon and delta for a coefficient set or a given gamma.
    Constants {
        #[arg(long, conflicts_with = "coeffs", required_unless_present = "coeffs")]
        gamma: Option<String>,
        #[arg(long, value_delimiter = ',')]
        coeffs: Option<Vec<String>>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// One of tower-identity, fib-bound, weight-lemma, nak-bounds, pld-acc.
    suite: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// Evaluate cases on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

enum Failure {
    Compute(String, String),
    Parse(String, String),
}

type Outcome = Result<(Value, bool), Failure>;

fn parse_err(code: &str, detail: impl ToString) -> Failure {
    Failure::Parse(code.to_string(), detail.to_string())
}

fn compute_err(code: &str, detail: impl ToString) -> Failure {
    Failure::Compute(code.to_string(), detail.to_string())
}

fn read_germ(path: &Path) -> Result<Germ, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| parse_err("io", format!("{}: {e}", path.display())))?;
    germ_file::parse(&text).map_err(|e| parse_err("germ_file", e))
}

/// Per-curve data keyed by file position; internal ids are listed alongside.
fn curve_table(g: &SingularGerm) -> Result<Value, Failure> {
    let graph = g.graph().map_err(|e| compute_err("graph", e))?;
    let inc = g.incidence().map_err(|e| compute_err("boundary", e))?;
    let d = solve_discrepancies(&graph, &inc).map_err(|e| compute_err("discrepancy", e))?;
    let rows: Vec<Value> = graph
        .vertices()
        .enumerate()
        .map(|(i, v)| {
            json!({
                "index": i,
                "id": v.to_string(),
                "weight": graph.weight(v),
                "a": fmt_q(&d.a[&v]),
                "a0": fmt_q(&d.a0[&v]),
            })
        })
        .collect();
    Ok(json!({"determinant": d.determinant.to_string(), "curves": rows}))
}

fn cmd_pld(file: &Path) -> Outcome {
    match read_germ(file)? {
        Germ::Smooth(_) => Ok((json!({"pld": "smooth"}), true)),
        Germ::Singular(g) => {
            let graph = g.graph().map_err(|e| compute_err("graph", e))?;
            let inc = g.incidence().map_err(|e| compute_err("boundary", e))?;
            let p = pld(&graph, &inc, PldOptions::default()).map_err(|e| compute_err("pld", e))?;
            let mut out = Map::new();
            out.insert("pld".into(), json!(match p {
                Pld::Smooth => "smooth".to_string(),
                Pld::Value(v) => fmt_q(&v),
            }));
            if let Value::Object(t) = curve_table(&g)? {
                out.extend(t);
            }
            Ok((Value::Object(out), true))
        }
    }
}

fn cmd_mld(file: &Path) -> Outcome {
    match read_germ(file)? {
        Germ::Smooth(g) => {
            let r = mld_smooth(&g).map_err(|e| compute_err("mld", e))?;
            Ok((r.to_json(), true))
        }
        Germ::Singular(g) => {
            let r = mld_singular(&g).map_err(|e| compute_err("mld", e))?;
            let mut v = r.result.to_json();
            v["pld"] = json!(fmt_q(&r.pld));
            Ok((v, true))
        }
    }
}

fn cmd_witnesses(file: &Path, depth: usize) -> Outcome {
    let w = match read_germ(file)? {
        Germ::Smooth(g) => witness_set_smooth(&g, depth),
        Germ::Singular(g) => witness_set_singular(&g, depth),
    }
    .map_err(|e| compute_err("witnesses", e))?;
    Ok((w.to_json(), true))
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| parse_err("env", format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

fn report_outcome(r: &VerificationReport) -> (Value, bool) {
    (r.to_json(), r.passed())
}

fn cmd_verify(a: &VerifyArgs) -> Result<VerificationReport, Failure> {
    let threads = match a.threads {
        Some(n) => Some(n),
        None => threads_from_env()?,
    };
    if let Some(n) = threads {
        par::set_num_threads(n);
    }
    let mut spec = theorem_lab::default_spec(&a.suite).map_err(|e| parse_err("unknown_suite", e))?;
    spec.seed = a.seed;
    if let Some(t) = a.trials {
        spec.trials = t;
    }
    if a.sequential {
        spec.execution = Execution::Sequential;
    }
    theorem_lab::run_suite(&a.suite, &spec).map_err(|e| compute_err("suite", e))
}

fn cmd_constants(gamma: &Option<String>, coeffs: &Option<Vec<String>>) -> Outcome {
    let gamma = match (gamma, coeffs) {
        (Some(g), _) => parse_q(g).map_err(|e| parse_err("rational", e))?,
        (None, Some(cs)) => {
            let cs = cs.iter().map(|c| parse_q(c)).collect::<Result<Vec<_>, _>>().map_err(|e| parse_err("rational", e))?;
            gamma_of_set(&cs, 1).map_err(|e| compute_err("gamma", e))?
        }
        (None, None) => unreachable!("clap requires one of --gamma and --coeffs"),
    };
    let c = constants_for(&gamma).map_err(|e| compute_err("constants", e))?;
    Ok((serde_json::to_value(c).expect("constants"), true))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Flat objects become a header plus one row; arrays of objects under a key
/// (curves, witnesses) become one row each.
fn to_csv(v: &Value) -> String {
    let Value::Object(m) = v else {
        return format!("{}\n", csv_escape(&scalar(v)));
    };
    let table = m.iter().find_map(|(k, x)| match x {
        Value::Array(rows) if rows.first().is_some_and(Value::is_object) => Some((k, rows)),
        _ => None,
    });
    let mut out = String::new();
    let line = |cells: Vec<String>| cells.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(",") + "\n";
    match table {
        Some((_, rows)) => {
            let Value::Object(first) = &rows[0] else { unreachable!() };
            out += &line(first.keys().cloned().collect());
            for r in rows {
                out += &line(first.keys().map(|k| scalar(&r[k])).collect());
            }
        }
        None => {
            out += &line(m.keys().cloned().collect());
            out += &line(m.values().map(scalar).collect());
        }
    }
    out
}

fn to_text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match x {
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        to_text(x, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(x))),
                }
            }
        }
        Value::Array(xs) => {
            for x in xs {
                match x {
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{pad}-\n"));
                        to_text(x, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}- {}\n", scalar(x))),
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar(v))),
    }
}

fn render(format: Format, v: &Value, report: Option<&VerificationReport>) -> String {
    match format {
        Format::Json => format!("{v}\n"),
        Format::Csv => match report {
            Some(r) => r.to_csv(),
            None => to_csv(v),
        },
        Format::Text => {
            let mut s = String::new();
            to_text(v, 0, &mut s);
            s
        }
    }
}

fn emit_error(code: &str, detail: &str) {
    eprintln!("{}", json!({"error": code, "detail": detail}));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            emit_error("usage", e.to_string().trim());
            return ExitCode::from(3);
        }
    };
    let mut report = None;
    let outcome = match &cli.command {
        Command::Pld { file } => cmd_pld(file),
        Command::Mld { file } => cmd_mld(file),
        Command::Witnesses { file, depth } => cmd_witnesses(file, *depth),
        Command::Verify(a) => cmd_verify(a).map(|r| {
            let out = report_outcome(&r);
            report = Some(r);
            out
        }),
        Command::Example { name, k, k_max } => run_example(name, (*k, k_max.unwrap_or(*k)))
            .map_err(|e| match e {
                theorem_lab::LabError::UnknownExample(_) | theorem_lab::LabError::BadParameter(_) => {
                    parse_err("example", e)
                }
                other => compute_err("example", other),
            })
            .map(|r| {
                let out = report_outcome(&r);
                report = Some(r);
                out
            }),
        Command::Constants { gamma, coeffs } => cmd_constants(gamma, coeffs),
    };
    match outcome {
        Ok((v, pass)) => {
            print!("{}", render(cli.format, &v, report.as_ref()));
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(Failure::Compute(code, detail)) => {
            emit_error(&code, &detail);
            ExitCode::from(1)
        }
        Err(Failure::Parse(code, detail)) => {
            emit_error(&code, &detail);
            ExitCode::from(3)
        }
    }
}
