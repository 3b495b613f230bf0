//! A symmetric tensor given as a flat array of entries becomes a form with
//! multinomial weights, and is then decomposed.

use symtensor::pipeline::{decompose, DecomposeOptions};
use symtensor::poly::text::{format_poly, parse_input};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // e0^3 + e1^3 + (e0 + e1)^3 as a 2x2x2 array; three terms, but rank 2
    let mut entries = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let ones = i + j + k;
                let v = if ones == 0 || ones == 3 { 2.0 } else { 1.0 };
                entries.push(format!("[{v},0]"));
            }
        }
    }
    let json = format!(r#"{{"tensor":{{"dim":2,"order":3,"entries":[{}]}}}}"#, entries.join(","));
    let f = parse_input(&json)?;
    println!("form: {}", format_poly(&f));
    let rep = decompose(&f, &DecomposeOptions::default())?;
    println!("rank {} with residual {:.2e}", rep.rank, rep.residual);
    Ok(())
}
