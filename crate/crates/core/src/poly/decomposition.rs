use serde::{Deserialize, Serialize};

use crate::linalg::C64;

/// One summand `weight * (form . x)^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "crate::poly::text::complex_pair")]
    pub weight: C64,
    #[serde(with = "crate::poly::text::complex_pairs")]
    pub form: Vec<C64>,
}

/// A power-sum decomposition `sum_i lambda_i (k_i . x)^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub terms: Vec<Term>,
    pub degree: u32,
    /// Relative coefficient-norm error of the re-expansion against the source form,
    /// once it has been checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

impl Decomposition {
    pub fn new(terms: Vec<Term>, degree: u32) -> Self {
        Decomposition { terms, degree, residual: None }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    pub fn n_vars(&self) -> Option<usize> {
        self.terms.first().map(|t| t.form.len())
    }

    /// Pairs `(i, j)` of forms that are proportional within `tol` (chordal distance).
    pub fn proportional_pairs(&self, tol: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.terms.len() {
            for j in i + 1..self.terms.len() {
                if chordal_distance(&self.terms[i].form, &self.terms[j].form) < tol {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// `sqrt(1 - |<u,v>|^2 / (|u|^2 |v|^2))`, the projective distance between two directions.
pub fn chordal_distance(u: &[C64], v: &[C64]) -> f64 {
    let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let ip: C64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    (1.0 - ip.norm_sqr() / (nu * nv)).max(0.0).sqrt()
}
