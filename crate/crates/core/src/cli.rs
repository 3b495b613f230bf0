//! Command-line front end. `main.rs` only forwards to [`run`].

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::pipeline::{self, DecomposeOptions, DecomposeReport};
use crate::poly::text::{complex_pairs, format_poly, parse_input};
use crate::poly::{Decomposition, HomogeneousPoly, Term};
use crate::sylvester::{binary_decompose, BinaryForm};

#[derive(Parser, Debug)]
#[command(name = "symtensor", version, about = "Waring decomposition of symmetric tensors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Relative residual accepted for a decomposition.
    #[arg(long, global = true, default_value_t = 1e-7, value_parser = positive)]
    pub tol: f64,
    /// Largest rank tried.
    #[arg(long, global = true)]
    pub max_rank: Option<usize>,
    /// Seed for every random choice; equal seeds give identical reports.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for extension restarts.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Minimal sum of powers of linear forms.
    Decompose(InputArg),
    /// Waring rank only.
    Rank(InputArg),
    /// Rank and projective class of a ternary cubic.
    Classify(InputArg),
    /// Sylvester's algorithm on a binary form.
    Sylvester(InputArg),
    /// Residual of a decomposition file against a form.
    Verify {
        #[command(flatten)]
        input: InputArg,
        /// JSON decomposition: `{"degree": d, "terms": [{"weight": [re, im], "form": [[re, im], ...]}]}`.
        #[arg(long)]
        decomposition: String,
    },
}

#[derive(Args, Debug)]
pub struct InputArg {
    /// File path, inline polynomial, or `-` for stdin (the default).
    pub input: Option<String>,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

/// Reads a file, stdin (`-` or nothing), or takes the argument literally.
pub fn read_source(arg: Option<&str>) -> Result<String> {
    match arg {
        None | Some("-") => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| Error::InvalidInput(format!("reading stdin: {e}")))?;
            Ok(buf)
        }
        Some(s) if Path::new(s).is_file() => {
            std::fs::read_to_string(s).map_err(|e| Error::InvalidInput(format!("reading {s}: {e}")))
        }
        Some(s) => Ok(s.to_string()),
    }
}

/// Exit status: 0 on success, 1 for unusable input, 2 when no valid
/// decomposition was produced.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Parse { .. } => 1,
        _ => 2,
    }
}

#[derive(Serialize)]
struct TermOut<'a> {
    #[serde(with = "crate::poly::text::complex_pair")]
    weight: crate::linalg::C64,
    #[serde(with = "complex_pairs")]
    form: &'a [crate::linalg::C64],
}

fn terms_json(terms: &[Term]) -> Vec<TermOut<'_>> {
    terms.iter().map(|t| TermOut { weight: t.weight, form: &t.form }).collect()
}

fn options(common: &Common) -> DecomposeOptions {
    DecomposeOptions {
        tol: common.tol,
        max_rank: common.max_rank,
        seed: common.seed,
        jobs: common.jobs.max(1),
        ..DecomposeOptions::default()
    }
}

fn fmt_c(z: &crate::linalg::C64) -> String {
    if z.im == 0.0 {
        format!("{:.8}", z.re)
    } else {
        format!("({:.8}{:+.8}i)", z.re, z.im)
    }
}

fn terms_text(terms: &[Term], d: u32) -> String {
    let mut out = String::new();
    for t in terms {
        let form: Vec<String> = t.form.iter().map(fmt_c).collect();
        out.push_str(&format!("  {} * [{}]^{}\n", fmt_c(&t.weight), form.join(", "), d));
    }
    out
}

fn report_json(rep: &DecomposeReport, seed: u64) -> serde_json::Value {
    json!({
        "rank": rep.rank,
        "degree": rep.decomposition.degree,
        "method": rep.method,
        "terms": terms_json(rep.decomposition.terms()),
        "residual": rep.residual,
        "basis": rep.basis,
        "essential_vars": rep.essential_vars,
        "free_count": rep.free_count,
        "retries": rep.retries,
        "seed": seed,
    })
}

fn report_text(f: &HomogeneousPoly, rep: &DecomposeReport) -> String {
    let mut out = format!("rank {} ({:?})\n", rep.rank, rep.method);
    out.push_str(&format!("f = {}\n", format_poly(f)));
    out.push_str(&terms_text(rep.decomposition.terms(), rep.decomposition.degree));
    if !rep.basis.is_empty() {
        out.push_str(&format!("basis {{{}}}\n", rep.basis.join(", ")));
    }
    out.push_str(&format!("residual {:.3e}\n", rep.residual));
    out
}

fn sylvester_report(f: &HomogeneousPoly, common: &Common) -> Result<DecomposeReport> {
    if f.n_vars() != 2 {
        return Err(Error::InvalidInput(format!("sylvester needs a binary form, got {} variables", f.n_vars())));
    }
    let mut dec = binary_decompose(&BinaryForm::from_poly(f)?, common.seed, common.tol)?;
    let check = pipeline::verify(f, &dec)?;
    if check.residual >= common.tol {
        return Err(Error::DecompositionInvalid(check.residual));
    }
    dec.residual = Some(check.residual);
    Ok(DecomposeReport {
        rank: dec.rank(),
        decomposition: dec,
        method: pipeline::Method::Sylvester,
        essential_vars: 2,
        basis: Vec::new(),
        free_count: 0,
        retries: 0,
        residual: check.residual,
    })
}

/// Runs one command and returns the text to print on stdout.
pub fn execute(cli: &Cli) -> Result<String> {
    let common = &cli.common;
    let input = match &cli.command {
        Command::Decompose(i) | Command::Rank(i) | Command::Classify(i) | Command::Sylvester(i) => i,
        Command::Verify { input, .. } => input,
    };
    let f = parse_input(&read_source(input.input.as_deref())?)?;
    let json_out = common.format == Format::Json;
    let out = match &cli.command {
        Command::Decompose(_) | Command::Sylvester(_) => {
            let rep = if matches!(cli.command, Command::Sylvester(_)) {
                sylvester_report(&f, common)?
            } else {
                pipeline::decompose(&f, &options(common))?
            };
            if json_out {
                report_json(&rep, common.seed).to_string()
            } else {
                report_text(&f, &rep)
            }
        }
        Command::Rank(_) => {
            let r = pipeline::rank(&f, &options(common))?;
            if json_out {
                json!({ "rank": r, "seed": common.seed }).to_string()
            } else {
                format!("{r}\n")
            }
        }
        Command::Classify(_) => {
            let c = pipeline::classify_ternary_cubic(&f, &options(common))?;
            if json_out {
                serde_json::to_string(&c).expect("classification serializes")
            } else {
                format!("{} (rank {})\n", c.class, c.rank)
            }
        }
        Command::Verify { decomposition, .. } => {
            let src = read_source(Some(decomposition))?;
            let dec: Decomposition = serde_json::from_str(&src)
                .map_err(|e| Error::Parse { pos: e.column(), msg: format!("decomposition: {e}") })?;
            let rep = pipeline::verify(&f, &dec)?;
            let out = if json_out {
                json!({
                    "residual": rep.residual,
                    "max_coeff_error": rep.max_coeff_error,
                    "collisions": rep.collisions,
                    "rank": dec.rank(),
                })
                .to_string()
            } else {
                format!(
                    "residual {:.3e}, max coefficient error {:.3e}, {} terms, {} proportional pairs\n",
                    rep.residual,
                    rep.max_coeff_error,
                    dec.rank(),
                    rep.collisions.len()
                )
            };
            if rep.residual >= common.tol {
                // still show the numbers before failing
                print!("{}", with_newline(out));
                return Err(Error::DecompositionInvalid(rep.residual));
            }
            out
        }
    };
    Ok(with_newline(out))
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

/// Parses `args`, runs the command, prints, and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.as_bytes());
            0
        }
        Err(e) => {
            if cli.common.format == Format::Json {
                println!("{}", json!({ "error": { "code": e.code(), "message": e.to_string() } }));
            }
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("symtensor").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_after_subcommand() {
        let cli = parse(&["rank", "x0^3", "--tol", "1e-6", "--format", "json", "--jobs", "2", "--seed", "9"]);
        assert_eq!(cli.common.format, Format::Json);
        assert_eq!(cli.common.seed, 9);
        assert_eq!(cli.common.jobs, 2);
        assert!((cli.common.tol - 1e-6).abs() < 1e-20);
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(Cli::try_parse_from(["symtensor", "rank", "x0^3", "--tol", "0"]).is_err());
    }

    #[test]
    fn classify_json_shape() {
        let out = execute(&parse(&["classify", "x0^3", "--format", "json"])).unwrap();
        assert_eq!(out, "{\"class\":\"Cube\",\"rank\":1}\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Parse { pos: 0, msg: String::new() }), 1);
        assert_eq!(exit_code(&Error::DecompositionFailed(String::new())), 2);
    }

    #[test]
    fn sylvester_rejects_ternary() {
        let e = execute(&parse(&["sylvester", "x0*x1*x2"])).unwrap_err();
        assert_eq!(exit_code(&e), 1);
    }
}
