//! Checks decompositions stored as JSON against their forms: an exact one,
//! and one transcribed to about four significant digits.

use symtensor::pipeline::verify;
use symtensor::poly::text::parse_input;
use symtensor::poly::Decomposition;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        ("quintic, exact weights", include_str!("../fixtures/ex61.txt"), include_str!("../fixtures/ex61_exact.json")),
        ("quartic, rounded", include_str!("../fixtures/ex62.txt"), include_str!("../fixtures/ex62_printed.json")),
    ];
    for (name, form, dec) in cases {
        let f = parse_input(form)?;
        let dec: Decomposition = serde_json::from_str(dec)?;
        let rep = verify(&f, &dec)?;
        println!(
            "{name}: {} terms, residual {:.3e}, max coefficient error {:.3e}, proportional pairs {:?}",
            dec.rank(),
            rep.residual,
            rep.max_coeff_error,
            rep.collisions
        );
    }
    Ok(())
}
