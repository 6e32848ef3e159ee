//! Command-line front end: operator application, basis expansions, digit
//! tools, p-adic tools, Wronskian certificates, and the verification suites.
//!
//! Exit codes: 0 success, 2 parse failure, 3 precondition violation,
//! 4 indeterminate verdict.

use std::fs;
use std::path::Path;

use clap::{Parser, Subcommand};

use crate::digit::{digit_eval, evaluate_digit_expansion, expand_continuous, ContinuousFunc};
use crate::error::{Error, Result};
use crate::fq::Field;
use crate::linbasis::{evaluate_expansion, expand, transition, BasisId, LinearFunc};
use crate::operators::{cartier_delta, hasse, ipow, phi, psi, shift};
use crate::padic::{mahler_coeffs, padic_cartier, residue_vector, PadicInt, PadicKind};
use crate::series::TruncatedLaurent;
use crate::verify;
use crate::wronskian::{
    find_certificate, independent_over_km, wronskian, EpsVector, Outcome, WronskianKind,
};

#[derive(Parser)]
#[command(
    name = "cartier",
    about = "Cartier-type operators, basis expansions and Wronskian criteria over F_q((t))"
)]
pub struct Cli {
    /// Base field, given as a prime power `p^e` (or a prime `p`).
    #[arg(long = "q", global = true, default_value = "2")]
    pub q: String,
    /// Working precision for inexact series.
    #[arg(long, global = true, default_value_t = 32)]
    pub prec: i64,
    /// Table depth for linear-function tables.
    #[arg(long, global = true, default_value_t = 16)]
    pub depth: usize,
    /// Window (polynomial degree bound) for continuous-function tables.
    #[arg(long, global = true, default_value_t = 2)]
    pub window: u32,
    /// Seed for the randomized verification suites.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Emit machine-readable JSON where supported.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Apply an operator to a series.
    Apply {
        /// Operator: phi | psi | hasse | shift | delta.
        #[arg(long)]
        op: String,
        /// Operator index `n` (component index `r` for delta).
        #[arg(long, default_value_t = 0)]
        n: u64,
        /// Level `m` for the delta component operator.
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Series, inline or a file path.
        series: String,
    },
    /// Expand a tabulated function in one of the bases.
    Expand {
        /// Basis: carlitz | hasse | shift | phi | psi.
        #[arg(long)]
        basis: String,
        /// Number of coefficients (defaults to the table depth/window size).
        #[arg(long)]
        count: Option<usize>,
        /// Function JSON (linear or continuous table), inline or a file path.
        function: String,
    },
    /// Expand a tabulated function and evaluate the partial sum at a point.
    Eval {
        #[arg(long)]
        basis: String,
        #[arg(long)]
        count: Option<usize>,
        /// Function JSON, inline or a file path.
        function: String,
        /// Evaluation point (series text).
        point: String,
    },
    /// Print the transition matrix between two bases.
    Transition {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Matrix size; must be a power of q.
        #[arg(long)]
        size: u64,
    },
    /// Evaluate a digit-product family member.
    Digit {
        /// Base family: phi | psi | carlitz | hasse | shift.
        #[arg(long)]
        base: String,
        #[arg(long)]
        n: u64,
        /// Use the starred variant.
        #[arg(long)]
        starred: bool,
        series: String,
    },
    /// p-adic integer tools (the prime is taken from --q).
    Padic {
        #[command(subcommand)]
        sub: PadicCmd,
    },
    /// Wronskian determinants and independence certificates.
    Wronskian {
        /// Operator kind: phi | psi | hasse.
        #[arg(long, default_value = "phi")]
        kind: String,
        /// Fixed index vector, comma-separated; searched when omitted.
        #[arg(long)]
        eps: Option<String>,
        /// Search bound on the largest index.
        #[arg(long, default_value_t = 12)]
        bound: u64,
        /// Test independence over the level-m kernel field instead.
        #[arg(long)]
        km: Option<u32>,
        /// Two or more series, inline or file paths.
        series: Vec<String>,
    },
    /// Run verification suites.
    Verify {
        /// Suite name or "all".
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Subcommand)]
pub enum PadicCmd {
    /// Apply a p-adic shift operator to an integer.
    Cartier {
        /// Operator kind: phi | psi.
        #[arg(long, default_value = "phi")]
        kind: String,
        #[arg(long)]
        n: u64,
        /// Integer, plain or as comma-separated base-p digits.
        x: String,
    },
    /// Print a Mahler coefficient row.
    Mahler {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        jmax: u64,
    },
    /// Enumerate the residue map at a level and confirm it is a bijection.
    Bijection {
        #[arg(long)]
        n: usize,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::FieldMismatch(_, _)
        | Error::NotPrime(_)
        | Error::BadExponent
        | Error::FieldTooLarge(_) => 2,
        Error::Indeterminate(_) => 4,
        _ => 3,
    }
}

/// Read the argument as a file when it names one, otherwise take it inline.
fn read_arg(arg: &str) -> Result<String> {
    if Path::new(arg).is_file() {
        fs::read_to_string(arg).map_err(|e| Error::Parse(format!("cannot read {arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

/// Human rendering with the uppercase variable used on the command line.
fn human(x: &TruncatedLaurent) -> String {
    x.to_human().replace('t', "T")
}

fn parse_series(field: &Field, arg: &str, prec: i64) -> Result<TruncatedLaurent> {
    let text = read_arg(arg)?;
    let x = TruncatedLaurent::parse(field, text.trim())?;
    Ok(x.truncate(prec.min(x.prec())))
}

enum FuncTable {
    Linear(LinearFunc),
    Continuous(ContinuousFunc),
}

fn parse_function(field: &Field, arg: &str) -> Result<FuncTable> {
    let text = read_arg(arg)?;
    let lin = LinearFunc::from_json(&text);
    if let Ok(lf) = lin {
        if &lf.field != field {
            return Err(Error::FieldMismatch(field.to_string(), lf.field.to_string()));
        }
        return Ok(FuncTable::Linear(lf));
    }
    match ContinuousFunc::from_json(&text) {
        Ok(cf) => {
            if &cf.field != field {
                return Err(Error::FieldMismatch(field.to_string(), cf.field.to_string()));
            }
            Ok(FuncTable::Continuous(cf))
        }
        Err(e) => Err(e),
    }
}

pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let field = Field::parse(&cli.q)?;
    match &cli.cmd {
        Cmd::Apply { op, n, m, series } => {
            let x = parse_series(&field, series, cli.prec)?;
            let out = match op.as_str() {
                "phi" => phi(*n, &x),
                "psi" => psi(*n, &x)?,
                "hasse" => hasse(*n, &x),
                "shift" => shift(*n, &x)?,
                "delta" => cartier_delta(*n, *m, &x)?,
                other => return Err(Error::Parse(format!("unknown operator {other:?}"))),
            };
            if cli.json {
                println!("{}", serde_json::json!({ "series": out.to_text() }));
            } else {
                println!("{}", human(&out));
            }
            Ok(0)
        }
        Cmd::Expand { basis, count, function } => {
            let basis = BasisId::parse(basis)?;
            let coeffs = match parse_function(&field, function)? {
                FuncTable::Linear(lf) => {
                    let count = count.unwrap_or_else(|| lf.depth().min(cli.depth));
                    expand(&lf, basis, count)?.coeffs
                }
                FuncTable::Continuous(cf) => {
                    let ex = expand_continuous(&cf, basis)?;
                    let count = count.unwrap_or(ex.coeffs.len());
                    ex.coeffs.into_iter().take(count).collect()
                }
            };
            if cli.json {
                let arr: Vec<String> = coeffs.iter().map(|c| c.to_text()).collect();
                println!("{}", serde_json::json!({ "basis": basis.name(), "coeffs": arr }));
            } else {
                for (i, c) in coeffs.iter().enumerate() {
                    println!("c{i}: {}", human(c));
                }
            }
            Ok(0)
        }
        Cmd::Eval { basis, count, function, point } => {
            let basis = BasisId::parse(basis)?;
            let x = parse_series(&field, point, cli.prec)?;
            let out = match parse_function(&field, function)? {
                FuncTable::Linear(lf) => {
                    let count = count.unwrap_or_else(|| lf.depth().min(cli.depth));
                    let ex = expand(&lf, basis, count)?;
                    evaluate_expansion(&ex, &x, count)?
                }
                FuncTable::Continuous(cf) => {
                    let ex = expand_continuous(&cf, basis)?;
                    evaluate_digit_expansion(&ex, &x)?
                }
            };
            if cli.json {
                println!("{}", serde_json::json!({ "value": out.to_text() }));
            } else {
                println!("{}", human(&out));
            }
            Ok(0)
        }
        Cmd::Transition { from, to, size } => {
            let from = BasisId::parse(from)?;
            let to = BasisId::parse(to)?;
            let t = transition(&field, from, to, *size)?;
            if cli.json {
                let rows: Vec<Vec<String>> = t
                    .iter()
                    .map(|row| row.iter().map(|c| c.to_text()).collect())
                    .collect();
                println!(
                    "{}",
                    serde_json::json!({ "from": from.name(), "to": to.name(), "rows": rows })
                );
            } else {
                for row in &t {
                    let cells: Vec<String> = row.iter().map(human).collect();
                    println!("[{}]", cells.join(", "));
                }
            }
            Ok(0)
        }
        Cmd::Digit { base, n, starred, series } => {
            let base = BasisId::parse(base)?;
            let x = parse_series(&field, series, cli.prec)?;
            let out = digit_eval(base, *n, *starred, &x)?;
            if cli.json {
                println!("{}", serde_json::json!({ "series": out.to_text() }));
            } else {
                println!("{}", human(&out));
            }
            Ok(0)
        }
        Cmd::Padic { sub } => run_padic(&field, sub, cli.json),
        Cmd::Wronskian { kind, eps, bound, km, series } => {
            let kind = WronskianKind::parse(kind)?;
            if series.len() < 2 && km.is_none() {
                return Err(Error::IndexRange("need at least two series".into()));
            }
            // exact inputs stay exact here so dependencies are decidable
            let xs = series
                .iter()
                .map(|s| Ok(TruncatedLaurent::parse(&field, read_arg(s)?.trim())?))
                .collect::<Result<Vec<_>>>()?;
            if let Some(eps) = eps {
                let eps = EpsVector::new(
                    eps.split(',')
                        .map(|s| {
                            s.trim().parse::<u64>().map_err(|_| {
                                Error::Parse(format!("bad index {s:?} in eps vector"))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                )?;
                let det = wronskian(kind, &eps, &xs)?;
                print_eps_det(&eps, &det, cli.json);
                return Ok(0);
            }
            let cert = if let Some(m) = km {
                independent_over_km(&xs, *m, kind)?
            } else {
                find_certificate(kind, &xs, *bound)?
            };
            match cert.outcome {
                Outcome::Independent { eps, det } => {
                    print_eps_det(&eps, &det, cli.json);
                    Ok(0)
                }
                Outcome::Dependent { relation } => {
                    if cli.json {
                        let rel: Vec<String> = relation.iter().map(|c| c.to_text()).collect();
                        println!("{}", serde_json::json!({ "dependent": rel }));
                    } else {
                        let rel: Vec<String> = relation.iter().map(human).collect();
                        println!("dependent ({})", rel.join(", "));
                    }
                    Ok(0)
                }
                Outcome::NoCertificate { bound } => Err(Error::Indeterminate(format!(
                    "no certificate below bound {bound}"
                ))),
            }
        }
        Cmd::Verify { suite } => {
            let names: Vec<String> = if suite == "all" {
                verify::ALL_SUITES.iter().map(|s| s.to_string()).collect()
            } else {
                vec![suite.clone()]
            };
            let report = verify::run(&names, &field, cli.seed)?;
            if cli.json {
                println!("{}", report.to_json());
            } else {
                println!("field {}  seed {}", report.field, report.seed);
                for s in &report.suites {
                    let verdict = if s.failed == 0 { "pass" } else { "FAIL" };
                    println!("suite {:<12} {} ({} checks, {} failed)", s.name, verdict, s.passed + s.failed, s.failed);
                    for note in &s.notes {
                        println!("    {note}");
                    }
                }
                println!("total: {} passed, {} failed", report.passed, report.failed);
            }
            Ok(if report.ok() { 0 } else { 1 })
        }
    }
}

fn print_eps_det(eps: &EpsVector, det: &TruncatedLaurent, json: bool) {
    if json {
        println!(
            "{}",
            serde_json::json!({ "eps": eps.0, "det": det.to_text() })
        );
    } else {
        let idx: Vec<String> = eps.0.iter().map(|e| e.to_string()).collect();
        println!("eps=({}) det={}", idx.join(","), human(det));
    }
}

fn run_padic(field: &Field, sub: &PadicCmd, json: bool) -> Result<i32> {
    let p = field.p;
    match sub {
        PadicCmd::Cartier { kind, n, x } => {
            let kind = PadicKind::parse(kind)?;
            let x = PadicInt::parse(p, &read_arg(x)?)?;
            let out = padic_cartier(kind, *n, &x);
            if json {
                println!("{}", serde_json::json!({ "p": p, "digits": out.to_text() }));
            } else {
                println!("{out}");
            }
            Ok(0)
        }
        PadicCmd::Mahler { n, jmax } => {
            let row = mahler_coeffs(p, *n, *jmax)?;
            if json {
                let coeffs: Vec<String> = row.coeffs.iter().map(|c| c.to_string()).collect();
                println!("{}", serde_json::json!({ "p": p, "n": n, "coeffs": coeffs }));
            } else {
                for (j, c) in row.coeffs.iter().enumerate() {
                    println!("a{j}: {c}");
                }
            }
            Ok(0)
        }
        PadicCmd::Bijection { n } => {
            let pn = ipow(p, *n as u32);
            let mut seen = vec![false; pn as usize];
            let mut rows = Vec::new();
            for v in 0..pn {
                let x = PadicInt::from_u128(p, n + 1, v as u128);
                let vec = residue_vector(&x, *n)?;
                let mut idx = 0u64;
                for (i, d) in vec.iter().enumerate() {
                    idx += d * ipow(p, i as u32);
                }
                seen[idx as usize] = true;
                rows.push((v, vec));
            }
            let bijective = seen.iter().all(|&b| b);
            if json {
                let table: Vec<_> = rows
                    .iter()
                    .map(|(v, vec)| serde_json::json!({ "x": v, "residues": vec }))
                    .collect();
                println!(
                    "{}",
                    serde_json::json!({ "p": p, "level": n, "bijective": bijective, "table": table })
                );
            } else {
                for (v, vec) in &rows {
                    let ds: Vec<String> = vec.iter().map(|d| d.to_string()).collect();
                    println!("{v} -> ({})", ds.join(","));
                }
                println!("bijective: {bijective}");
            }
            Ok(if bijective { 0 } else { 1 })
        }
    }
}
