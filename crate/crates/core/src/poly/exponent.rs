use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Multi-index `α`, the exponent vector of a monomial `x^α`.
///
/// Ordering is graded: total degree first, then lexicographic with the
/// earlier variables dominating, so `1 < x1 < x2 < x1^2 < x1*x2 < x2^2 < ...`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(parts: Vec<u32>) -> Self {
        Exponent(parts)
    }

    pub fn zeros(nvars: usize) -> Self {
        Exponent(vec![0; nvars])
    }

    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut p = vec![0; nvars];
        p[var] = 1;
        Exponent(p)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, var: usize) -> u32 {
        self.0[var]
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        debug_assert_eq!(self.nvars(), other.nvars());
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn shift(&self, var: usize) -> Exponent {
        let mut p = self.0.clone();
        p[var] += 1;
        Exponent(p)
    }

    /// `self / x_var`, if `x_var` divides the monomial.
    pub fn unshift(&self, var: usize) -> Option<Exponent> {
        if self.0[var] == 0 {
            return None;
        }
        let mut p = self.0.clone();
        p[var] -= 1;
        Some(Exponent(p))
    }

    /// Prepends the exponent of a homogenizing variable so the total degree is `d`.
    pub fn homogenize(&self, d: u32) -> Exponent {
        let mut p = Vec::with_capacity(self.nvars() + 1);
        p.push(d - self.degree());
        p.extend_from_slice(&self.0);
        Exponent(p)
    }

    /// Drops the exponent of `var`.
    pub fn remove_var(&self, var: usize) -> Exponent {
        let mut p = self.0.clone();
        p.remove(var);
        Exponent(p)
    }

    /// All exponents in `nvars` variables of total degree exactly `d`, in graded order.
    pub fn all_of_degree(nvars: usize, d: u32) -> Vec<Exponent> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; nvars];
        fn rec(out: &mut Vec<Exponent>, cur: &mut Vec<u32>, pos: usize, left: u32) {
            let n = cur.len();
            if pos + 1 == n {
                cur[pos] = left;
                out.push(Exponent(cur.clone()));
                return;
            }
            for a in (0..=left).rev() {
                cur[pos] = a;
                rec(out, cur, pos + 1, left - a);
            }
        }
        if nvars == 0 {
            if d == 0 {
                out.push(Exponent(Vec::new()));
            }
            return out;
        }
        rec(&mut out, &mut cur, 0, d);
        out
    }

    /// All exponents of total degree at most `d`, in graded order.
    pub fn all_up_to(nvars: usize, d: u32) -> Vec<Exponent> {
        (0..=d).flat_map(|k| Exponent::all_of_degree(nvars, k)).collect()
    }

    /// `prod_i point[i]^alpha_i`.
    pub fn eval(&self, point: &[crate::linalg::C64]) -> crate::linalg::C64 {
        let mut v = crate::linalg::C64::new(1.0, 0.0);
        for (z, &a) in point.iter().zip(&self.0) {
            if a > 0 {
                v *= z.powu(a);
            }
        }
        v
    }

    /// Text form using affine names `x1..xn` (offset 1) or homogeneous names (offset 0).
    pub fn format_with_offset(&self, offset: usize) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (i, &a) in self.0.iter().enumerate() {
            match a {
                0 => {}
                1 => parts.push(format!("x{}", i + offset)),
                _ => parts.push(format!("x{}^{}", i + offset, a)),
            }
        }
        parts.join("*")
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "{}", s.join(""))
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(v: Vec<u32>) -> Self {
        Exponent(v)
    }
}
