//! Decomposes a form given as a file path or inline string.
//!
//! ```text
//! cargo run --example decompose -- crates/core/fixtures/ex61.txt
//! cargo run --example decompose -- "x0^2*x1 + x0*x2^2"
//! ```

use std::time::Instant;

use symtensor::pipeline::{decompose, DecomposeOptions};
use symtensor::poly::text::{format_poly, parse_input};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let arg = std::env::args().nth(1).unwrap_or_else(|| "x0^2*x1 + x0*x2^2".into());
    let src = std::fs::read_to_string(&arg).unwrap_or(arg);
    let f = parse_input(&src)?;
    println!("f = {}", format_poly(&f));

    let start = Instant::now();
    let report = decompose(&f, &DecomposeOptions::default())?;
    println!("rank {} via {:?} in {:.3?}", report.rank, report.method, start.elapsed());
    if !report.basis.is_empty() {
        println!("basis {{{}}}, {} free unknowns, {} retries", report.basis.join(", "), report.free_count, report.retries);
    }
    for t in report.decomposition.terms() {
        let form: Vec<String> = t.form.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
        println!("  {:.6}{:+.6}i * ({})^{}", t.weight.re, t.weight.im, form.join(", "), f.degree());
    }
    println!("relative residual {:.3e}", report.residual);
    Ok(())
}
