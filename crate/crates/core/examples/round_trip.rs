//! Plants a random decomposition of rank r, expands it, and recovers r.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symtensor::linalg::{random_complex_gaussian, C64};
use symtensor::pipeline::{decompose, DecomposeOptions};
use symtensor::poly::{expand_power_sum, Decomposition, Term};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n_vars, d) = (3, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for r in 1..=4 {
        let terms = (0..r)
            .map(|_| Term {
                weight: random_complex_gaussian(&mut rng),
                form: (0..n_vars).map(|_| random_complex_gaussian(&mut rng)).collect::<Vec<C64>>(),
            })
            .collect();
        let f = expand_power_sum(&Decomposition::new(terms, d), n_vars, d)?;
        let rep = decompose(&f, &DecomposeOptions { seed: r as u64, ..DecomposeOptions::default() })?;
        println!("planted {r}, recovered {} ({:?}), residual {:.2e}", rep.rank, rep.method, rep.residual);
    }
    Ok(())
}
