//! Sylvester's algorithm on binary forms, including one whose rank exceeds
//! half its degree and one with a root at infinity.

use symtensor::sylvester::{binary_decompose, hankel_slice, BinaryForm};
use symtensor::poly::text::{format_poly, parse_input};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for src in ["x0^3 + x1^3", "x0^2*x1", "x0^4 + 6*x0^2*x1^2 + x1^4", "x0^5 + (0,2)*x0*x1^4 + 3*x1^5"] {
        let f = parse_input(src)?;
        let p = BinaryForm::from_poly(&f)?;
        let dec = binary_decompose(&p, 0, 1e-10)?;
        println!("{} has rank {}", format_poly(&f), dec.rank());
        println!("  H[{}] =\n{:.3}", dec.rank(), hankel_slice(&p, dec.rank().min(p.degree() as usize))?);
        for t in dec.terms() {
            let (a, b) = (t.form[0], t.form[1]);
            println!("  {:.4}{:+.4}i * (({:.4}{:+.4}i) x + ({:.4}{:+.4}i) y)^{}", t.weight.re, t.weight.im, a.re, a.im, b.re, b.im, p.degree());
        }
    }
    Ok(())
}
