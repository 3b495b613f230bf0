//! Rank and projective class of the six canonical ternary cubics.

use symtensor::pipeline::{classify_ternary_cubic, DecomposeOptions};
use symtensor::poly::text::parse_input;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cubics = [
        "x0^3",
        "x0^2*x1 + x0*x1^2",
        "x0^2*x1",
        "x0^3 + x1^3 + x2^3",
        "150*x0^2*x2 + x1^2*x2 + x2^3 - 12*x0^3",
        "x0^2*x1 + x0*x2^2",
    ];
    let opts = DecomposeOptions::default();
    for src in cubics {
        let c = classify_ternary_cubic(&parse_input(src)?, &opts)?;
        println!("{src:<42} rank {}  {}", c.rank, c.class);
    }
    Ok(())
}
