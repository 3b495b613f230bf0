//! The rank loop: essential variables, affine charts, flat extensions,
//! eigenvector extraction and verification. Also the ternary-cubic classifier.

use std::collections::BTreeMap;
use std::fmt;

use log::{debug, info};
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{
    commutation_system, numeric_family, solve_extension, EquationSystem, ExtensionSolution, PencilSystem,
    SolverOptions,
};
use crate::hankel::{build_hankel, catalecticant_rank, extend_basis, full_rank_principal_minor, shifted_matrix, MonomialBasis, RANK_TOL};
use crate::linalg::{self, CMat, C64};
use crate::poly::{multinomial_f64, expand_power_sum, Decomposition, DualForm, Exponent, HomogeneousPoly, LinearChange, Term};
use crate::spectral::{cancellation, points_from_family, solve_form_weights, MAX_CANCELLATION};
use crate::sylvester::{binary_decompose, BinaryForm};

#[derive(Clone, Debug)]
pub struct DecomposeOptions {
    /// Acceptance threshold on the relative re-expansion residual.
    pub tol: f64,
    /// Largest rank tried; `None` means the dimension of the space of forms.
    pub max_rank: Option<usize>,
    pub seed: u64,
    /// Worker threads for extension restarts.
    pub jobs: usize,
    /// Random affine charts tried per rank after the identity chart.
    pub charts: usize,
    /// Alternative bases tried per chart.
    pub bases: usize,
    /// Random pencil combinations tried per extension.
    pub shifts: usize,
    /// Extensions solved per basis (with fresh seeds) when the spectral or
    /// weight step rejects the previous one.
    pub extension_retries: usize,
    /// Largest accepted `Σ_j ‖λ_j k_j^d‖ / ‖f‖`; see [`cancellation`].
    pub max_cancellation: f64,
    pub solver: SolverOptions,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            tol: 1e-7,
            max_rank: None,
            seed: 0,
            jobs: 1,
            charts: 4,
            bases: 3,
            shifts: 8,
            extension_retries: 3,
            max_cancellation: MAX_CANCELLATION,
            solver: SolverOptions::default(),
        }
    }
}

/// Which route produced the decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// A power of a single linear form.
    Power,
    Sylvester,
    Hankel,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecomposeReport {
    pub rank: usize,
    pub decomposition: Decomposition,
    pub method: Method,
    pub essential_vars: usize,
    /// Affine basis of the quotient algebra, written with `x1..xn`.
    pub basis: Vec<String>,
    pub free_count: usize,
    /// Failed (chart, basis, extension, spectrum) attempts before success.
    pub retries: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    /// `‖f - g‖ / ‖f‖` over the coefficient vectors.
    pub residual: f64,
    /// `max_α |f_α - g_α| / max_α |f_α|`.
    pub max_coeff_error: f64,
    /// Pairs of proportional forms.
    pub collisions: Vec<(usize, usize)>,
}

/// Compares `f` with the re-expansion of `dec`.
pub fn verify(f: &HomogeneousPoly, dec: &Decomposition) -> Result<VerifyReport> {
    if dec.degree != f.degree() {
        return Err(Error::InvalidInput(format!(
            "decomposition has degree {} but the form has degree {}",
            dec.degree,
            f.degree()
        )));
    }
    let g = expand_power_sum(dec, f.n_vars(), f.degree())?;
    let diff = f.sub(&g)?;
    let fnorm = f.norm().max(f64::MIN_POSITIVE);
    Ok(VerifyReport {
        residual: diff.norm() / fnorm,
        max_coeff_error: diff.max_abs_coeff() / f.max_abs_coeff().max(f64::MIN_POSITIVE),
        collisions: dec.proportional_pairs(1e-8),
    })
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Decomposes `f` as a sum of `d`-th powers of linear forms of minimal length.
pub fn decompose(f: &HomogeneousPoly, opts: &DecomposeOptions) -> Result<DecomposeReport> {
    if f.is_zero() {
        return Err(Error::InvalidInput("the zero form has no decomposition".into()));
    }
    let d = f.degree();
    let (count, reducer) = f.essential_vars()?;
    let g = f.change_coordinates(&reducer)?.restrict_leading(count)?;
    info!("{count} essential variables out of {}", f.n_vars());
    let (terms, method, basis, free_count, retries) = match count {
        1 => {
            let a = g.coeff(&Exponent::new(vec![d]));
            (vec![Term { weight: a, form: vec![C64::new(1.0, 0.0)] }], Method::Power, Vec::new(), 0, 0)
        }
        2 => {
            let dec = binary_decompose(&BinaryForm::from_poly(&g)?, opts.seed, opts.tol)?;
            (dec.terms, Method::Sylvester, Vec::new(), 0, 0)
        }
        _ => {
            let found = hankel_decompose(&g, opts)?;
            let names = found.basis.monomials().iter().map(|m| m.format_with_offset(1)).collect();
            (found.terms, Method::Hankel, names, found.free_count, found.retries)
        }
    };
    // lift the forms back to the original variables
    let forms: Vec<Vec<C64>> = terms
        .iter()
        .map(|t| {
            let mut m = t.form.clone();
            m.resize(f.n_vars(), C64::default());
            reducer.pullback(&m)
        })
        .collect();
    let weights = match solve_form_weights(f, &forms, f64::INFINITY) {
        Ok((w, _)) => w,
        Err(_) => terms.iter().map(|t| t.weight).collect(),
    };
    let terms: Vec<Term> = weights.into_iter().zip(forms).map(|(weight, form)| Term { weight, form }).collect();
    let mut dec = Decomposition::new(terms, d);
    let report = verify(f, &dec)?;
    if report.residual >= opts.tol {
        return Err(Error::DecompositionInvalid(report.residual));
    }
    dec.residual = Some(report.residual);
    Ok(DecomposeReport {
        rank: dec.rank(),
        decomposition: dec,
        method,
        essential_vars: count,
        basis,
        free_count,
        retries,
        residual: report.residual,
    })
}

/// The rank of `f`, as found by [`decompose`].
pub fn rank(f: &HomogeneousPoly, opts: &DecomposeOptions) -> Result<usize> {
    decompose(f, opts).map(|r| r.rank)
}

struct Found {
    terms: Vec<Term>,
    basis: MonomialBasis,
    free_count: usize,
    retries: usize,
}

/// Scale `s` for the affine variables making the moments of each degree
/// comparable, and the overall factor `t` bringing them to order one.
fn balancing_scale(l: &DualForm) -> (f64, f64) {
    let prof = l.degree_profile();
    let top = prof.iter().copied().fold(0.0, f64::max);
    let reference = if prof[0] > 0.0 { prof[0] } else { top };
    let mut rho: f64 = 0.0;
    for (k, &p) in prof.iter().enumerate().skip(1) {
        if p > 0.0 {
            rho = rho.max((p / reference).powf(1.0 / k as f64));
        }
    }
    let s = if rho > 0.0 && rho.is_finite() { 1.0 / rho } else { 1.0 };
    let scaled_top = prof.iter().enumerate().map(|(k, p)| p * s.powi(k as i32)).fold(0.0, f64::max);
    (s, 1.0 / scaled_top.max(f64::MIN_POSITIVE))
}

/// Gram matrix `⟨∂_i h, ∂_j h⟩` of the partial derivatives in the apolar
/// inner product, under which unitary changes act isometrically.
fn derivative_gram(h: &HomogeneousPoly) -> CMat {
    let n = h.n_vars();
    let mut parts: Vec<BTreeMap<Exponent, C64>> = vec![BTreeMap::new(); n];
    for (e, c) in h.coeffs() {
        for (i, part) in parts.iter_mut().enumerate() {
            if let Some(lower) = e.unshift(i) {
                *part.entry(lower).or_default() += c * f64::from(e.get(i));
            }
        }
    }
    CMat::from_fn(n, n, |i, j| {
        parts[i]
            .iter()
            .filter_map(|(e, c)| parts[j].get(e).map(|q| c * q.conj() / multinomial_f64(e)))
            .sum()
    })
}

/// A change `B` making the derivative Gram matrix of `g(B y)` close to a
/// multiple of the identity, so that a badly scaled input does not inflate
/// the condition of its Hankel matrices. Forms without such a balanced
/// representative make the iteration drift; it is then cut short.
fn equilibrate(g: &HomogeneousPoly) -> Result<LinearChange> {
    let n = g.n_vars();
    let d = f64::from(g.degree());
    let mut b = CMat::identity(n, n);
    let mut best = (f64::INFINITY, b.clone());
    for _ in 0..24 {
        let h = g.change_coordinates(&LinearChange::new(b.clone())?)?;
        let eig = SymmetricEigen::new(derivative_gram(&h));
        let (lo, hi) = eig.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &p| (lo.min(p), hi.max(p)));
        // NaN eigenvalues stop the iteration too
        if lo.is_nan() || lo <= 0.0 || linalg::inverse_condition(&b) < 1e-6 {
            break;
        }
        if hi / lo < best.0 {
            best = (hi / lo, b.clone());
        }
        if hi / lo < 1.2 {
            break;
        }
        let geo = (eig.eigenvalues.iter().map(|p| p.ln()).sum::<f64>() / n as f64).exp();
        let u = &eig.eigenvectors;
        let diag = CMat::from_diagonal(&eig.eigenvalues.map(|p| C64::new((p / geo).powf(-0.5 / d), 0.0)));
        b = &b * (u * diag * u.adjoint()).conjugate();
    }
    LinearChange::new(best.1)
}

/// Chart 0 is the identity; later ones are `pre` followed by a random
/// unitary change (none for chart 1).
fn chart<R: Rng + ?Sized>(pre: &LinearChange, index: usize, rng: &mut R) -> Result<LinearChange> {
    let n = pre.dim();
    match index {
        0 => Ok(LinearChange::identity(n)),
        1 => Ok(pre.clone()),
        _ => LinearChange::new(pre.matrix() * linalg::random_unitary(rng, n)),
    }
}

fn mix(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(seed ^ 0x51_7C_C1_B7_27_22_0A_95, |acc, p| {
        (acc ^ p).wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(29)
    })
}

/// One extension attempt on a fixed basis: the polynomial commutation system
/// when `Δ_0` is known, the pencil form otherwise. The coefficients of the
/// polynomial system inherit the rounding of `Δ_0^{-1}`, so its tolerance is
/// raised to a small multiple of `ε · cond(Δ_0)` when that is larger.
fn extend(l: &DualForm, basis: &MonomialBasis, solver: &SolverOptions) -> Result<ExtensionSolution> {
    match shifted_matrix(l, basis, 0)?.to_known() {
        Some(delta0) => {
            debug!("known Δ0 with inverse condition {:.2e}", linalg::inverse_condition(&delta0));
            let floor = 10.0 * f64::EPSILON / linalg::inverse_condition(&delta0).max(f64::MIN_POSITIVE);
            let sys = commutation_system(l, basis)?;
            solve_extension(&sys, &SolverOptions { tol: solver.tol.max(floor), ..solver.clone() })
        }
        None => {
            let sys = PencilSystem::new(l, basis)?;
            debug!("pencil system with {} unknowns", sys.unknowns().len());
            solve_extension(&sys, solver)
        }
    }
}

fn hankel_decompose(g: &HomogeneousPoly, opts: &DecomposeOptions) -> Result<Found> {
    let nv = g.n_vars();
    let d = g.degree();
    let r0 = catalecticant_rank(&DualForm::from_form(g, 0)?, RANK_TOL).max(1);
    let max_rank = opts.max_rank.unwrap_or(usize::MAX).min(binomial(nv + d as usize - 1, d as usize));
    info!("rank search from {r0} to {max_rank}");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut retries = 0;
    let half = Exponent::all_up_to(nv - 1, d / 2);
    let pre = equilibrate(g)?;
    for r in r0..=max_rank {
        for c in 0..=opts.charts {
            let a = chart(&pre, c, &mut rng)?;
            let h = g.change_coordinates(&a)?;
            let raw = DualForm::from_form(&h, 0)?;
            let (s, t) = balancing_scale(&raw);
            let l = raw.rescaled(s, t);
            let b0 = match full_rank_principal_minor(&build_hankel(&l, &half, &half), RANK_TOL) {
                Ok((b, _)) if b.len() <= r => b,
                _ => {
                    retries += 1;
                    continue;
                }
            };
            for alt in 0..opts.bases.max(1) {
                if alt > 0 && b0.len() == r {
                    break;
                }
                let basis = match extend_basis(&l, &b0, r, alt, &mut rng) {
                    Ok(b) => b,
                    Err(_) => break,
                };
                for pass in 0..opts.extension_retries.max(1) {
                    let solver = SolverOptions {
                        seed: mix(opts.seed, &[r as u64, c as u64, alt as u64, pass as u64]),
                        jobs: opts.jobs,
                        ..opts.solver.clone()
                    };
                    let sol = match extend(&l, &basis, &solver) {
                        Ok(sol) => sol,
                        Err(e) => {
                            debug!("rank {r}, chart {c}, basis {basis}: {e}");
                            retries += 1;
                            break;
                        }
                    };
                    let attempt = (|| {
                        let ext = l.with_assignment(&sol.assignment);
                        let family = numeric_family(&ext, &basis)?;
                        let (points, _) = points_from_family(&family, &basis, opts.shifts, 1e-6, &mut rng)?;
                        let forms: Vec<Vec<C64>> = points
                            .points
                            .iter()
                            .map(|z| {
                                let mut m = Vec::with_capacity(nv);
                                m.push(C64::new(1.0, 0.0));
                                m.extend(z.iter().map(|v| v / s));
                                a.pullback(&m)
                            })
                            .collect();
                        let (weights, res) = solve_form_weights(g, &forms, opts.tol)?;
                        let kappa = cancellation(g, &weights, &forms)?;
                        if kappa > opts.max_cancellation {
                            return Err(Error::Degenerate(format!("terms cancel (ratio {kappa:.1e})")));
                        }
                        debug!("rank {r}: accepted with weight residual {res:e}, cancellation {kappa:.2}");
                        Ok((weights, forms))
                    })();
                    match attempt {
                        Ok((weights, forms)) => {
                            let terms =
                                weights.into_iter().zip(forms).map(|(weight, form)| Term { weight, form }).collect();
                            return Ok(Found { terms, basis, free_count: sol.free_count, retries });
                        }
                        Err(e) => {
                            debug!("rank {r}, chart {c}, basis {basis}, pass {pass}: {e}");
                            retries += 1;
                        }
                    }
                }
            }
        }
    }
    Err(Error::DecompositionFailed(format!("no decomposition of rank at most {max_rank} found")))
}

/// Projective classes of ternary cubics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitClass {
    Cube,
    SumTwoCubes,
    SquareTimesLine,
    Fermat,
    Generic,
    Maximal,
}

impl OrbitClass {
    pub fn rank(self) -> usize {
        match self {
            OrbitClass::Cube => 1,
            OrbitClass::SumTwoCubes => 2,
            OrbitClass::SquareTimesLine | OrbitClass::Fermat => 3,
            OrbitClass::Generic => 4,
            OrbitClass::Maximal => 5,
        }
    }
}

impl fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: OrbitClass,
    pub rank: usize,
}

/// Random lines through the projective plane used by the square-free test.
pub const SQUARE_FREE_LINES: usize = 8;

/// Whether `f` has no repeated factor: every restriction to a random line
/// must have distinct roots, judged by the Sylvester matrix of the
/// restriction and its derivative.
pub fn is_square_free(f: &HomogeneousPoly, seed: u64) -> Result<bool> {
    let n = f.n_vars();
    if n < 2 {
        return Ok(f.degree() <= 1);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SQUARE_FREE_LINES {
        let a = LinearChange::new(linalg::random_unitary(&mut rng, n))?;
        let line = f.change_coordinates(&a)?;
        let d = f.degree();
        // g(s) = f(s p + q) with p, q the first two columns
        let g: Vec<C64> = (0..=d)
            .map(|i| {
                let mut parts = vec![0u32; n];
                parts[0] = i;
                parts[1] = d - i;
                line.coeff(&Exponent::new(parts))
            })
            .collect();
        if sylvester_gap(&g) <= 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `σ_min / σ_max` of the Sylvester matrix of `g` and `g'` (coefficients in
/// increasing degree).
fn sylvester_gap(g: &[C64]) -> f64 {
    let m = g.len() - 1;
    if m < 2 {
        return 1.0;
    }
    let dg: Vec<C64> = (1..=m).map(|i| g[i] * i as f64).collect();
    let n = m - 1;
    let size = m + n;
    let mut s = CMat::zeros(size, size);
    for row in 0..n {
        for (k, c) in g.iter().rev().enumerate() {
            s[(row, row + k)] = *c;
        }
    }
    for row in 0..m {
        for (k, c) in dg.iter().rev().enumerate() {
            s[(n + row, row + k)] = *c;
        }
    }
    linalg::inverse_condition(&s)
}

/// Rank and projective class of a ternary cubic.
pub fn classify_ternary_cubic(f: &HomogeneousPoly, opts: &DecomposeOptions) -> Result<Classification> {
    if f.degree() != 3 {
        return Err(Error::InvalidInput(format!("expected a cubic, got degree {}", f.degree())));
    }
    let (count, _) = f.essential_vars()?;
    if count > 3 {
        return Err(Error::InvalidInput(format!("{count} essential variables; a ternary cubic has at most 3")));
    }
    let r = rank(f, opts)?;
    let class = match r {
        1 => OrbitClass::Cube,
        2 => OrbitClass::SumTwoCubes,
        3 => {
            if is_square_free(f, opts.seed)? {
                OrbitClass::Fermat
            } else {
                OrbitClass::SquareTimesLine
            }
        }
        4 => OrbitClass::Generic,
        5 => OrbitClass::Maximal,
        other => {
            return Err(Error::DecompositionFailed(format!("a ternary cubic cannot have rank {other}")));
        }
    };
    Ok(Classification { class, rank: r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use crate::poly::text::parse_input;

    fn form(src: &str) -> HomogeneousPoly {
        parse_input(src).unwrap()
    }

    #[test]
    fn power_of_a_form() {
        let f = form("x0^4 + 4*x0^3*x1 + 6*x0^2*x1^2 + 4*x0*x1^3 + x1^4");
        let rep = decompose(&f, &DecomposeOptions::default()).unwrap();
        assert_eq!(rep.rank, 1);
        assert_eq!(rep.method, Method::Power);
        assert!(rep.residual < 1e-12);
    }

    #[test]
    fn binary_goes_through_sylvester() {
        let f = form("x0^3 + x1^3");
        let rep = decompose(&f, &DecomposeOptions::default()).unwrap();
        assert_eq!(rep.method, Method::Sylvester);
        assert_eq!(rep.rank, 2);
    }

    #[test]
    fn quintic_example() {
        let f = form(include_str!("../fixtures/ex61.txt"));
        let rep = decompose(&f, &DecomposeOptions::default()).unwrap();
        assert_eq!(rep.rank, 4);
        assert_eq!(rep.method, Method::Hankel);
        assert!(rep.residual < 1e-7);
    }

    #[test]
    fn exact_decomposition_verifies() {
        let f = form(include_str!("../fixtures/ex61.txt"));
        let dec: Decomposition = serde_json::from_str(include_str!("../fixtures/ex61_exact.json")).unwrap();
        let rep = verify(&f, &dec).unwrap();
        assert!(rep.residual < 1e-12, "{}", rep.residual);
        assert!(rep.collisions.is_empty());
    }

    #[test]
    fn sylvester_gap_detects_double_roots() {
        // (s - 1)^2 (s + 2) = s^3 - 3 s + 2
        assert!(sylvester_gap(&[re(2.0), re(-3.0), re(0.0), re(1.0)]) < 1e-12);
        // (s - 1)(s + 1)(s - 3)
        assert!(sylvester_gap(&[re(3.0), re(-1.0), re(-3.0), re(1.0)]) > 1e-4);
    }

    #[test]
    fn square_free_test() {
        assert!(!is_square_free(&form("x0^2*x1"), 3).unwrap());
        assert!(!is_square_free(&form("x0^2*x2 + 2*x0*x1*x2 + x1^2*x2"), 3).unwrap());
        assert!(is_square_free(&form("x0^3 + x1^3 + x2^3"), 3).unwrap());
    }
}
