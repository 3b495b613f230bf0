//! Sylvester's algorithm for binary forms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hankel::RANK_TOL;
use crate::linalg::{self, CMat, CVec, C64};
use crate::poly::{chordal_distance, Decomposition, Exponent, HomogeneousPoly, Term};
use crate::spectral::{cancellation, MAX_CANCELLATION};

/// Random kernel combinations tried per rank before moving on.
pub const KERNEL_RETRIES: usize = 16;

/// Minimal chordal distance between distinct projective roots.
pub const ROOT_SEPARATION: f64 = 1e-8;

/// `p = Σ_i a_i x^i y^{d-i}` in two variables `x, y`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryForm {
    a: Vec<C64>,
}

fn binomial(d: u32, i: u32) -> f64 {
    (0..i).fold(1.0, |acc, k| acc * f64::from(d - k) / f64::from(k + 1))
}

impl BinaryForm {
    /// `a[i]` is the coefficient of `x^i y^{d-i}`.
    pub fn new(a: Vec<C64>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::InvalidInput("a binary form needs degree at least 1".into()));
        }
        if a.iter().all(|z| *z == C64::default()) {
            return Err(Error::InvalidInput("zero binary form".into()));
        }
        Ok(BinaryForm { a })
    }

    /// Reads a two-variable form, with the first variable as `x`.
    pub fn from_poly(f: &HomogeneousPoly) -> Result<Self> {
        if f.n_vars() != 2 {
            return Err(Error::InvalidInput(format!("expected 2 variables, got {}", f.n_vars())));
        }
        let d = f.degree();
        BinaryForm::new((0..=d).map(|i| f.coeff(&Exponent::new(vec![i, d - i]))).collect())
    }

    pub fn degree(&self) -> u32 {
        (self.a.len() - 1) as u32
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.a
    }

    /// `c_i = a_i / binom(d, i)`.
    pub fn moments(&self) -> Vec<C64> {
        let d = self.degree();
        self.a.iter().enumerate().map(|(i, a)| a / binomial(d, i as u32)).collect()
    }

    pub fn to_poly(&self) -> Result<HomogeneousPoly> {
        let d = self.degree();
        HomogeneousPoly::new(2, d, self.a.iter().enumerate().map(|(i, c)| (Exponent::new(vec![i as u32, d - i as u32]), *c)))
    }
}

/// The `(d-r+1) × (r+1)` Hankel matrix `H[r]_{ij} = c_{i+j}`.
pub fn hankel_slice(p: &BinaryForm, r: usize) -> Result<CMat> {
    let d = p.degree() as usize;
    if r == 0 || r > d {
        return Err(Error::InvalidInput(format!("slice index {r} outside 1..={d}")));
    }
    let c = p.moments();
    Ok(CMat::from_fn(d - r + 1, r + 1, |i, j| c[i + j]))
}

/// Roots `(α : β)` of `q(x, y) = Σ q_i x^i y^{r-i}`, as unit vectors; a drop in
/// degree contributes roots at `(1 : 0)`.
pub fn projective_roots(q: &[C64]) -> Result<Vec<[C64; 2]>> {
    let r = q.len() - 1;
    let scale = q.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::InvalidInput("zero polynomial has no roots".into()));
    }
    let deg = (0..=r).rev().find(|&i| q[i].norm() > 1e-12 * scale).unwrap_or(0);
    let mut roots = Vec::with_capacity(r);
    if deg > 0 {
        // companion matrix of the monic t^deg + ... in t = x / y
        let lead = q[deg];
        let mut comp = CMat::zeros(deg, deg);
        for i in 1..deg {
            comp[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..deg {
            comp[(i, deg - 1)] = -q[i] / lead;
        }
        let (vals, _) =
            linalg::eigen(&comp).ok_or_else(|| Error::DecompositionFailed("companion eigenvalues failed".into()))?;
        for t in vals {
            let n = (t.norm_sqr() + 1.0).sqrt();
            roots.push([t / n, C64::new(1.0 / n, 0.0)]);
        }
    }
    for _ in deg..r {
        roots.push([C64::new(1.0, 0.0), C64::default()]);
    }
    Ok(roots)
}

fn roots_distinct(roots: &[[C64; 2]]) -> bool {
    (0..roots.len()).all(|i| ((i + 1)..roots.len()).all(|j| chordal_distance(&roots[i], &roots[j]) > ROOT_SEPARATION))
}

/// Weights with `c_i = Σ_j λ_j α_j^i β_j^{d-i}`, and the relative residual.
fn vandermonde_weights(c: &[C64], roots: &[[C64; 2]]) -> (Vec<C64>, f64) {
    let d = c.len() - 1;
    let a = CMat::from_fn(d + 1, roots.len(), |i, j| roots[j][0].powu(i as u32) * roots[j][1].powu((d - i) as u32));
    let b = CVec::from_column_slice(c);
    let x = linalg::lstsq(&a, &b);
    let res = (&a * &x - &b).norm() / b.norm();
    (x.iter().copied().collect(), res)
}

/// Sylvester's algorithm: for `r = 1, 2, ...` take a random element `q` of the
/// kernel of `H[r]`; if its `r` projective roots are distinct they are the
/// forms `α x + β y`, and the weights solve a Vandermonde system. Fits whose
/// terms nearly cancel are rejected as in [`crate::spectral::cancellation`].
pub fn binary_decompose(p: &BinaryForm, seed: u64, tol: f64) -> Result<Decomposition> {
    let d = p.degree() as usize;
    let c = p.moments();
    let f = p.to_poly()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in 1..=d {
        let h = hankel_slice(p, r)?;
        let kernel = linalg::null_space(&h, RANK_TOL);
        if kernel.ncols() == 0 {
            continue;
        }
        let tries = if kernel.ncols() == 1 { 1 } else { KERNEL_RETRIES };
        for _ in 0..tries {
            let mu: CVec = if kernel.ncols() == 1 {
                CVec::from_element(1, C64::new(1.0, 0.0))
            } else {
                linalg::random_unit_sphere(&mut rng, kernel.ncols())
            };
            let q = &kernel * mu;
            let roots = projective_roots(q.as_slice())?;
            if !roots_distinct(&roots) {
                continue;
            }
            let (weights, res) = vandermonde_weights(&c, &roots);
            let forms: Vec<Vec<C64>> = roots.iter().map(|r| r.to_vec()).collect();
            if res < tol && cancellation(&f, &weights, &forms)? <= MAX_CANCELLATION {
                let terms = weights
                    .into_iter()
                    .zip(roots)
                    .map(|(w, [al, be])| Term { weight: w, form: vec![al, be] })
                    .collect();
                let mut dec = Decomposition::new(terms, d as u32);
                dec.residual = Some(res);
                return Ok(dec);
            }
        }
    }
    Err(Error::DecompositionFailed(format!("no distinct-root kernel element up to rank {d}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use crate::poly::expand_power_sum;
    use crate::poly::text::parse_input;

    fn check_reexpansion(f: &HomogeneousPoly, dec: &Decomposition) {
        let g = expand_power_sum(dec, 2, f.degree()).unwrap();
        let err = f.sub(&g).unwrap().norm() / f.norm();
        assert!(err < 1e-8, "re-expansion error {err:e}");
    }

    #[test]
    fn slice_indexing() {
        // c = (1, 0, 0, 1)
        let p = BinaryForm::new(vec![re(1.0), re(0.0), re(0.0), re(1.0)]).unwrap();
        let h = hankel_slice(&p, 2).unwrap();
        assert_eq!(h, CMat::from_row_slice(2, 3, &[re(1.0), re(0.0), re(0.0), re(0.0), re(0.0), re(1.0)]));
        let top = hankel_slice(&p, 3).unwrap();
        assert_eq!(top.shape(), (1, 4));
        assert!(hankel_slice(&p, 4).is_err());
    }

    #[test]
    fn sum_of_two_cubes() {
        let f = parse_input("x0^3 + x1^3").unwrap();
        let dec = binary_decompose(&BinaryForm::from_poly(&f).unwrap(), 1, 1e-10).unwrap();
        assert_eq!(dec.rank(), 2);
        for t in dec.terms() {
            let on_axis = t.form[0].norm() < 1e-10 || t.form[1].norm() < 1e-10;
            assert!(on_axis, "{:?}", t.form);
            assert!((t.weight - re(1.0)).norm() < 1e-8);
        }
        check_reexpansion(&f, &dec);
    }

    #[test]
    fn product_of_three_lines_has_rank_two() {
        let f = parse_input("x0^2*x1 + x0*x1^2").unwrap();
        let dec = binary_decompose(&BinaryForm::from_poly(&f).unwrap(), 3, 1e-10).unwrap();
        assert_eq!(dec.rank(), 2);
        check_reexpansion(&f, &dec);
    }

    #[test]
    fn square_times_line_has_rank_three() {
        let f = parse_input("x0^2*x1").unwrap();
        let dec = binary_decompose(&BinaryForm::from_poly(&f).unwrap(), 5, 1e-10).unwrap();
        assert_eq!(dec.rank(), 3);
        check_reexpansion(&f, &dec);
    }

    #[test]
    fn roots_at_infinity() {
        // q = x y: roots (0 : 1) and (1 : 0)
        let roots = projective_roots(&[re(0.0), re(1.0), re(0.0)]).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().any(|r| r[1].norm() < 1e-15));
    }
}
