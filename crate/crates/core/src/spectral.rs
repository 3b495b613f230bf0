//! Points from the eigenstructure of Hankel pencils, and their weights.

use rand::Rng;

use crate::error::{Error, Result};
use crate::hankel::{MonomialBasis, MultiplicationMatrix};
use crate::linalg::{self, CMat, CVec, C64};
use crate::poly::{chordal_distance, DualForm, Exponent, HomogeneousPoly};

/// Relative separation below which eigenvalues or points count as equal.
pub const DISTINCT_TOL: f64 = 1e-6;

/// Eigenvalues and eigenvectors (columns) of a pencil.
#[derive(Clone, Debug)]
pub struct PencilEigen {
    pub values: Vec<C64>,
    pub vectors: CMat,
    pub simple: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    pub points: Vec<Vec<C64>>,
    pub simple: bool,
}

fn min_separation(values: &[C64]) -> f64 {
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut sep = f64::INFINITY;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            sep = sep.min((values[i] - values[j]).norm() / scale);
        }
    }
    sep
}

/// Eigenpairs of `D1 D0^{-1}`, i.e. `(D1 - λ D0) u = 0` with `v = D0 u`.
/// For Hankel pencils the `v` are the evaluation vectors `[b(ζ)]_{b ∈ B}`;
/// each is scaled so its first coordinate (the monomial 1) equals 1, unless
/// that coordinate vanishes.
pub fn generalized_eigen(d1: &CMat, d0: &CMat) -> Result<PencilEigen> {
    let inv = linalg::inverse(d0).ok_or_else(|| Error::NumericalRank("pencil matrix D0 is singular".into()))?;
    let n = d1 * inv;
    let (values, mut vectors) =
        linalg::eigen(&n).ok_or_else(|| Error::NonSimpleSpectrum("eigenvalue iteration did not converge".into()))?;
    for j in 0..vectors.ncols() {
        let lead = vectors[(0, j)];
        let size = vectors.column(j).norm();
        let scaled = if lead.norm() > 1e-12 * size {
            vectors.column(j) / lead
        } else {
            vectors.column(j) / C64::new(size, 0.0)
        };
        vectors.set_column(j, &scaled);
    }
    let simple = min_separation(&values) > DISTINCT_TOL;
    Ok(PencilEigen { values, vectors, simple })
}

/// Reads the points off normalized eigenvectors: directly from the coordinate
/// of `x_i` when it lies in the basis, otherwise as the Rayleigh quotient of
/// `M_iᵀ`. Every coordinate must then agree with `b(ζ)` within `tol`.
pub fn extract_points(
    vectors: &CMat,
    basis: &MonomialBasis,
    mults: &[MultiplicationMatrix],
    tol: f64,
) -> Result<PointSet> {
    let n = basis.nvars();
    let mut points = Vec::with_capacity(vectors.ncols());
    for j in 0..vectors.ncols() {
        let v: CVec = vectors.column(j).into_owned();
        let mut zeta = Vec::with_capacity(n);
        for i in 0..n {
            let coord = match basis.index_of(&Exponent::unit(n, i)) {
                Some(k) => v[k],
                None => {
                    let m = mults
                        .iter()
                        .find(|m| m.variable == i + 1)
                        .ok_or_else(|| Error::InvalidInput(format!("no multiplication matrix for x{}", i + 1)))?;
                    let mv = m.matrix.transpose() * &v;
                    v.dotc(&mv) / v.dotc(&v)
                }
            };
            zeta.push(coord);
        }
        for (k, b) in basis.monomials().iter().enumerate() {
            let expect = b.eval(&zeta);
            if (v[k] - expect).norm() > tol * expect.norm().max(v[k].norm()).max(1.0) {
                return Err(Error::Degenerate(format!(
                    "eigenvector {j}: coordinate of {} is {} but the point gives {}",
                    b.format_with_offset(1),
                    v[k],
                    expect
                )));
            }
        }
        points.push(zeta);
    }
    let simple = distinct_points(&points);
    Ok(PointSet { points, simple })
}

fn distinct_points(points: &[Vec<C64>]) -> bool {
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let scale = points[i].iter().chain(&points[j]).map(|z| z.norm()).fold(1.0, f64::max);
            let gap = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if gap <= DISTINCT_TOL * scale {
                return false;
            }
        }
    }
    true
}

/// Points of the functional whose shifted matrices are `family = [Δ_0, ..., Δ_n]`,
/// via the pencil `(Σ t_i Δ_i, Δ_0)` for random `t` on the unit sphere,
/// retried up to `shifts` times until the spectrum is simple.
pub fn points_from_family<R: Rng + ?Sized>(
    family: &[CMat],
    basis: &MonomialBasis,
    shifts: usize,
    tol: f64,
    rng: &mut R,
) -> Result<(PointSet, usize)> {
    let n = family.len() - 1;
    let mults = crate::hankel::multiplication_matrices(&family[0], &family[1..])?;
    let mut last = Error::NonSimpleSpectrum("no shift attempted".into());
    for attempt in 1..=shifts {
        let t = linalg::random_unit_sphere(rng, n);
        let mut d1 = CMat::zeros(family[0].nrows(), family[0].ncols());
        for i in 0..n {
            d1 += &family[i + 1] * t[i];
        }
        let eig = match generalized_eigen(&d1, &family[0]) {
            Ok(e) => e,
            Err(e) => {
                last = e;
                continue;
            }
        };
        if !eig.simple {
            last = Error::NonSimpleSpectrum(format!("repeated eigenvalue (shift {attempt})"));
            continue;
        }
        match extract_points(&eig.vectors, basis, &mults, tol) {
            Ok(p) if p.simple => return Ok((p, attempt)),
            Ok(_) => last = Error::NonSimpleSpectrum("recovered points collide".into()),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Least-squares weights with `Σ_j λ_j ζ_j^α = c_α` for every `|α| <= d`.
/// Returns the weights and the relative residual; errors if it exceeds `tol`.
pub fn solve_weights(points: &PointSet, l: &DualForm, tol: f64) -> Result<(Vec<C64>, f64)> {
    let rows = Exponent::all_up_to(l.n_vars(), l.degree_known());
    let a = CMat::from_fn(rows.len(), points.points.len(), |i, j| rows[i].eval(&points.points[j]));
    let b = CVec::from_iterator(rows.len(), rows.iter().map(|e| l.get(e).unwrap_or_default()));
    finish_lstsq(&a, &b, tol)
}

/// Least-squares weights with `Σ_j λ_j (k_j · x)^d = f`, matched coefficient by
/// coefficient in the apolar-normalized basis.
pub fn solve_form_weights(f: &HomogeneousPoly, forms: &[Vec<C64>], tol: f64) -> Result<(Vec<C64>, f64)> {
    let rows = Exponent::all_of_degree(f.n_vars(), f.degree());
    let inv_mult: Vec<f64> = rows
        .iter()
        .map(|e| 1.0 / crate::poly::multinomial_f64(e))
        .collect();
    let a = CMat::from_fn(rows.len(), forms.len(), |i, j| rows[i].eval(&forms[j]));
    let b = CVec::from_iterator(rows.len(), rows.iter().zip(&inv_mult).map(|(e, w)| f.coeff(e) * *w));
    finish_lstsq(&a, &b, tol)
}

fn finish_lstsq(a: &CMat, b: &CVec, tol: f64) -> Result<(Vec<C64>, f64)> {
    let x = linalg::lstsq(a, b);
    let res = (a * &x - b).norm() / b.norm().max(f64::MIN_POSITIVE);
    if !res.is_finite() || res > tol {
        return Err(Error::DecompositionInvalid(res));
    }
    Ok((x.iter().copied().collect(), res))
}

/// Largest `Σ_j ‖λ_j k_j^d‖ / ‖f‖` accepted by default. Terms that nearly
/// cancel are how approximations of a form by sums of fewer powers (points
/// of the border) show up numerically; genuine decompositions of
/// well-scaled forms stay within a small factor of one.
pub const MAX_CANCELLATION: f64 = 50.0;

/// `Σ_j ‖λ_j k_j^d‖ / ‖f‖` in coefficient norm.
pub fn cancellation(f: &HomogeneousPoly, weights: &[C64], forms: &[Vec<C64>]) -> Result<f64> {
    let mut total = 0.0;
    for (w, k) in weights.iter().zip(forms) {
        total += w.norm() * HomogeneousPoly::power_of_linear_form(k, f.degree())?.norm();
    }
    Ok(total / f.norm().max(f64::MIN_POSITIVE))
}

/// True if no two forms are proportional (chordal distance above `tol`).
pub fn forms_distinct(forms: &[Vec<C64>], tol: f64) -> bool {
    (0..forms.len()).all(|i| ((i + 1)..forms.len()).all(|j| chordal_distance(&forms[i], &forms[j]) > tol))
}
