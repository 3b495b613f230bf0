//! Flat extension of the quartic example: the commutation system on the basis
//! {1, x1, x2, x1^2, x1 x2, x2^2}, one solution, the commuting multiplication
//! matrices, and the six points read off their common eigenvectors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symtensor::extension::{commutation_system, numeric_family, solve_extension, SolverOptions};
use symtensor::hankel::{multiplication_matrices, MonomialBasis};
use symtensor::poly::text::parse_input;
use symtensor::poly::{to_dual, Exponent};
use symtensor::spectral::{points_from_family, solve_weights};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = parse_input(include_str!("../fixtures/ex62.txt"))?;
    let l = to_dual(&f, 0)?;
    let basis = MonomialBasis::new(2, Exponent::all_up_to(2, 2))?;

    let sys = commutation_system(&l, &basis)?;
    let moments: Vec<String> = sys.active_moments().iter().map(|e| format!("h[{e}]")).collect();
    println!("{} equations of degree <= {} in {}", sys.len(), sys.max_degree(), moments.join(" "));

    let sol = solve_extension(&sys, &SolverOptions { seed: 7, ..SolverOptions::default() })?;
    println!("residual {:.2e}, {} unknowns fixed at random", sol.residual, sol.free_count);
    for (e, v) in &sol.assignment {
        println!("  h[{e}] = {:.4}{:+.4}i", v.re, v.im);
    }

    let ext = l.with_assignment(&sol.assignment);
    let family = numeric_family(&ext, &basis)?;
    let mults = multiplication_matrices(&family[0], &family[1..])?;
    let (m1, m2) = (&mults[0].matrix, &mults[1].matrix);
    let comm = (m1 * m2 - m2 * m1).norm() / (m1.norm() * m2.norm());
    println!("relative commutator norm {comm:.2e}");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (points, shifts) = points_from_family(&family, &basis, 8, 1e-6, &mut rng)?;
    let (weights, res) = solve_weights(&points, &l, 1e-6)?;
    println!("{} points after {shifts} shift(s), weight residual {res:.2e}", points.points.len());
    for (p, w) in points.points.iter().zip(&weights) {
        println!("  {:.4}{:+.4}i at ({:.4}{:+.4}i, {:.4}{:+.4}i)", w.re, w.im, p[0].re, p[0].im, p[1].re, p[1].im);
    }
    Ok(())
}
