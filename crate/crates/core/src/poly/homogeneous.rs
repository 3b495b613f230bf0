use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use super::{Decomposition, Exponent, LinearChange};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};

/// `d! / prod(alpha_i!)`, computed exactly.
pub fn multinomial(d: u32, alpha: &Exponent) -> Result<BigUint> {
    if alpha.degree() != d {
        return Err(Error::InvalidInput(format!(
            "multinomial: |alpha| = {} but d = {}",
            alpha.degree(),
            d
        )));
    }
    let fact = |k: u32| -> BigUint { (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i)) };
    let mut den = BigUint::one();
    for &a in alpha.parts() {
        den *= fact(a);
    }
    Ok(fact(d) / den)
}

pub(crate) fn multinomial_f64(alpha: &Exponent) -> f64 {
    multinomial(alpha.degree(), alpha)
        .expect("degree matches by construction")
        .to_f64()
        .unwrap_or(f64::INFINITY)
}

/// A homogeneous form of degree `d` in `n_vars` variables `x0..x{n_vars-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousPoly {
    n_vars: usize,
    degree: u32,
    coeffs: BTreeMap<Exponent, C64>,
}

impl HomogeneousPoly {
    /// Builds a form, summing repeated exponents and dropping exact zeros.
    pub fn new(
        n_vars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (Exponent, C64)>,
    ) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::InvalidInput("need at least one variable".into()));
        }
        if degree == 0 {
            return Err(Error::InvalidInput("degree must be at least 1".into()));
        }
        let mut coeffs: BTreeMap<Exponent, C64> = BTreeMap::new();
        for (e, c) in terms {
            if e.nvars() != n_vars {
                return Err(Error::InvalidInput(format!(
                    "exponent {:?} has {} parts, expected {}",
                    e.parts(),
                    e.nvars(),
                    n_vars
                )));
            }
            if e.degree() != degree {
                return Err(Error::InvalidInput(format!(
                    "non-homogeneous term {} of degree {} in a degree-{} form",
                    e.format_with_offset(0),
                    e.degree(),
                    degree
                )));
            }
            *coeffs.entry(e).or_insert(C64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c| *c != C64::new(0.0, 0.0));
        Ok(HomogeneousPoly { n_vars, degree, coeffs })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &BTreeMap<Exponent, C64> {
        &self.coeffs
    }

    pub fn coeff(&self, e: &Exponent) -> C64 {
        self.coeffs.get(e).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.norm() == 0.0)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).fold(0.0, |a, b| a + b).sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, point: &[C64]) -> C64 {
        self.coeffs.iter().map(|(e, c)| c * e.eval(point)).sum()
    }

    pub fn scale(&self, s: C64) -> HomogeneousPoly {
        HomogeneousPoly {
            n_vars: self.n_vars,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|(e, c)| (e.clone(), c * s)).filter(|(_, c)| c.norm() != 0.0).collect(),
        }
    }

    pub fn sub(&self, other: &HomogeneousPoly) -> Result<HomogeneousPoly> {
        self.check_compatible(other)?;
        let terms = self
            .coeffs
            .iter()
            .map(|(e, c)| (e.clone(), *c))
            .chain(other.coeffs.iter().map(|(e, c)| (e.clone(), -c)));
        HomogeneousPoly::new(self.n_vars, self.degree, terms)
    }

    fn check_compatible(&self, other: &HomogeneousPoly) -> Result<()> {
        if self.n_vars != other.n_vars || self.degree != other.degree {
            return Err(Error::InvalidInput(format!(
                "incompatible forms: ({} vars, degree {}) vs ({} vars, degree {})",
                self.n_vars, self.degree, other.n_vars, other.degree
            )));
        }
        Ok(())
    }

    /// Apolar pairing `sum_alpha f_alpha g_alpha / multinomial(d, alpha)`.
    pub fn apolar(&self, other: &HomogeneousPoly) -> Result<C64> {
        self.check_compatible(other)?;
        Ok(self
            .coeffs
            .iter()
            .filter_map(|(e, c)| other.coeffs.get(e).map(|g| c * g / multinomial_f64(e)))
            .sum())
    }

    /// `f(1, x_1, ...)` with respect to `var`.
    pub fn dehomogenize(&self, var: usize) -> Result<AffinePoly> {
        if var >= self.n_vars {
            return Err(Error::InvalidInput(format!("variable index {var} out of range")));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, c)| (e.remove_var(var), *c))
            .collect();
        Ok(AffinePoly { n_vars: self.n_vars - 1, coeffs })
    }

    /// `(k . x)^d` expanded with the multinomial theorem.
    pub fn power_of_linear_form(k: &[C64], d: u32) -> Result<HomogeneousPoly> {
        let terms = Exponent::all_of_degree(k.len(), d)
            .into_iter()
            .map(|e| {
                let v = e.eval(k) * multinomial_f64(&e);
                (e, v)
            });
        HomogeneousPoly::new(k.len(), d, terms)
    }

    /// `f(A x)`: substitutes `x_i <- sum_j A_ij x_j` and collects terms.
    pub fn change_coordinates(&self, change: &LinearChange) -> Result<HomogeneousPoly> {
        let a = change.matrix();
        if a.nrows() != self.n_vars {
            return Err(Error::InvalidInput(format!(
                "coordinate change of size {} applied to a form in {} variables",
                a.nrows(),
                self.n_vars
            )));
        }
        let n = self.n_vars;
        // powers[i][p] = (row i of A . y)^p, built incrementally
        let linear: Vec<BTreeMap<Exponent, C64>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| a[(i, j)] != C64::new(0.0, 0.0))
                    .map(|j| (Exponent::unit(n, j), a[(i, j)]))
                    .collect()
            })
            .collect();
        let mut powers: Vec<Vec<BTreeMap<Exponent, C64>>> = Vec::with_capacity(n);
        for lin in &linear {
            let mut ps = vec![BTreeMap::from([(Exponent::zeros(n), C64::new(1.0, 0.0))])];
            for p in 1..=self.degree as usize {
                let next = mul_sparse(&ps[p - 1], lin);
                ps.push(next);
            }
            powers.push(ps);
        }
        let mut acc: BTreeMap<Exponent, C64> = BTreeMap::new();
        for (e, coef) in &self.coeffs {
            let mut term = BTreeMap::from([(Exponent::zeros(n), *coef)]);
            for (i, &p) in e.parts().iter().enumerate() {
                if p > 0 {
                    term = mul_sparse(&term, &powers[i][p as usize]);
                }
            }
            for (k, v) in term {
                *acc.entry(k).or_default() += v;
            }
        }
        // drop cancellation noise relative to the result scale
        let scale = acc.values().map(|c| c.norm()).fold(0.0, f64::max);
        HomogeneousPoly::new(
            n,
            self.degree,
            acc.into_iter().filter(|(_, c)| c.norm() > 1e-15 * scale),
        )
    }

    /// Restricts to the first `count` variables, requiring all other exponents to vanish.
    pub fn restrict_leading(&self, count: usize) -> Result<HomogeneousPoly> {
        let scale = self.max_abs_coeff();
        let mut terms = Vec::new();
        for (e, c) in &self.coeffs {
            if e.parts()[count..].iter().any(|&a| a > 0) {
                if c.norm() > 1e-9 * scale {
                    return Err(Error::NumericalRank(format!(
                        "term {} survives the essential-variable reduction",
                        e.format_with_offset(0)
                    )));
                }
                continue;
            }
            terms.push((Exponent::new(e.parts()[..count].to_vec()), *c));
        }
        HomogeneousPoly::new(count, self.degree, terms)
    }

    /// Pads with extra variables that do not occur.
    pub fn embed(&self, n_vars: usize) -> Result<HomogeneousPoly> {
        let terms = self.coeffs.iter().map(|(e, c)| {
            let mut p = e.parts().to_vec();
            p.resize(n_vars, 0);
            (Exponent::new(p), *c)
        });
        HomogeneousPoly::new(n_vars, self.degree, terms)
    }

    /// First-order catalecticant: row `i` holds the coefficients of `d/dx_i f`
    /// over the degree-(d-1) monomials.
    pub fn first_catalecticant(&self) -> CMat {
        let cols = Exponent::all_of_degree(self.n_vars, self.degree - 1);
        CMat::from_fn(self.n_vars, cols.len(), |i, j| {
            let e = cols[j].shift(i);
            self.coeff(&e) * (e.get(i) as f64)
        })
    }

    /// Number of essential variables and a change of coordinates `A` such that
    /// `f(A y)` only involves `y_0..y_{count-1}`.
    pub fn essential_vars(&self) -> Result<(usize, LinearChange)> {
        if self.is_zero() {
            return Err(Error::InvalidInput("zero polynomial has no essential variables".into()));
        }
        let cat = self.first_catalecticant();
        let count = linalg::numerical_rank(&cat, 1e-8);
        if count == self.n_vars {
            return Ok((count, LinearChange::identity(self.n_vars)));
        }
        let svd = cat.svd(true, false);
        let u = svd.u.expect("u requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
        // u is n x min(n, cols); complete it to a unitary basis when needed
        let mut basis: Vec<linalg::CVec> = order.iter().map(|&k| u.column(k).into_owned()).collect();
        let n = self.n_vars;
        if basis.len() < n {
            for j in 0..n {
                if basis.len() == n {
                    break;
                }
                let mut v = linalg::CVec::zeros(n);
                v[j] = C64::new(1.0, 0.0);
                for b in &basis {
                    let p = b.dotc(&v);
                    v -= b * p;
                }
                let nv = v.norm();
                if nv > 1e-8 {
                    basis.push(v.unscale(nv));
                }
            }
        }
        let a = CMat::from_fn(n, n, |i, j| basis[j][i].conj());
        Ok((count, LinearChange::new(a)?))
    }
}

fn mul_sparse(a: &BTreeMap<Exponent, C64>, b: &BTreeMap<Exponent, C64>) -> BTreeMap<Exponent, C64> {
    let mut out: BTreeMap<Exponent, C64> = BTreeMap::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            *out.entry(ea.add(eb)).or_default() += ca * cb;
        }
    }
    out
}

/// `sum_i lambda_i (k_i . x)^d` expanded exactly.
pub fn expand_power_sum(dec: &Decomposition, n_vars: usize, d: u32) -> Result<HomogeneousPoly> {
    let mut acc: BTreeMap<Exponent, C64> = BTreeMap::new();
    for t in dec.terms() {
        if t.form.len() != n_vars {
            return Err(Error::InvalidInput(format!(
                "linear form of length {} in a {}-variable expansion",
                t.form.len(),
                n_vars
            )));
        }
        for e in Exponent::all_of_degree(n_vars, d) {
            let v = t.weight * e.eval(&t.form) * multinomial_f64(&e);
            *acc.entry(e).or_default() += v;
        }
    }
    HomogeneousPoly::new(n_vars, d, acc)
}

/// A (not necessarily homogeneous) polynomial, as produced by dehomogenization.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinePoly {
    pub n_vars: usize,
    pub coeffs: BTreeMap<Exponent, C64>,
}

impl AffinePoly {
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|e| e.degree()).max().unwrap_or(0)
    }

    pub fn coeff(&self, e: &Exponent) -> C64 {
        self.coeffs.get(e).copied().unwrap_or_default()
    }

    pub fn eval(&self, point: &[C64]) -> C64 {
        self.coeffs.iter().map(|(e, c)| c * e.eval(point)).sum()
    }
}
