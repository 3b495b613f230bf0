#![allow(dead_code)]

use rand::Rng;
use symtensor::linalg::{random_complex_gaussian, C64};
use symtensor::poly::text::parse_input;
use symtensor::poly::{expand_power_sum, Decomposition, HomogeneousPoly, Term};

pub fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn form(name: &str) -> HomogeneousPoly {
    parse_input(&fixture(name)).unwrap()
}

pub fn decomposition(name: &str) -> Decomposition {
    serde_json::from_str(&fixture(name)).unwrap()
}

/// Random weights and forms with Gaussian entries.
pub fn planted<R: Rng>(rng: &mut R, n_vars: usize, d: u32, r: usize) -> (Decomposition, HomogeneousPoly) {
    let terms = (0..r)
        .map(|_| Term {
            weight: random_complex_gaussian(rng),
            form: (0..n_vars).map(|_| random_complex_gaussian(rng)).collect::<Vec<C64>>(),
        })
        .collect();
    let dec = Decomposition::new(terms, d);
    let f = expand_power_sum(&dec, n_vars, d).unwrap();
    (dec, f)
}

pub fn report(criterion: &str, pass: bool, detail: &str) {
    println!("[{}] {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
}
