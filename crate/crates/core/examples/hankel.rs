//! Quasi-Hankel matrices of the quintic example: the known block, its
//! catalecticant rank, a nonsingular principal minor, and the matrix indexed
//! by a basis of size 4 with unknown moments `h[α]`.

use symtensor::hankel::{build_hankel, catalecticant_rank, full_rank_principal_minor, shifted_matrix, MonomialBasis, RANK_TOL};
use symtensor::poly::text::parse_input;
use symtensor::poly::{to_dual, Exponent};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = parse_input(include_str!("../fixtures/ex61.txt"))?;
    let l = to_dual(&f, 0)?;
    println!("catalecticant rank: {}", catalecticant_rank(&l, RANK_TOL));

    let half = Exponent::all_up_to(2, 2);
    let known = build_hankel(&l, &half, &half);
    let (b0, minor) = full_rank_principal_minor(&known, RANK_TOL)?;
    println!("principal minor on {b0}:\n{minor:.1}");

    let basis = MonomialBasis::new(2, ["00", "10", "01", "20"].iter().map(|s| parse_exp(s)).collect())?;
    let plus = basis.plus();
    let names: Vec<String> = plus.iter().map(|e| e.format_with_offset(1)).collect();
    println!("B+ = {{{}}}", names.join(", "));
    println!("H on B x B+:\n{}", build_hankel(&l, basis.monomials(), &plus));
    for var in 0..=2 {
        let m = shifted_matrix(&l, &basis, var)?;
        let unknowns: Vec<String> = m.unknowns().iter().map(|e| e.to_string()).collect();
        println!("shifted matrix {var} has unknowns [{}]", unknowns.join(" "));
    }
    Ok(())
}

fn parse_exp(s: &str) -> Exponent {
    Exponent::new(s.bytes().map(|b| u32::from(b - b'0')).collect())
}
