//! Damped Gauss-Newton (Levenberg-Marquardt) with random restarts and random
//! specialization of free unknowns.

use std::collections::BTreeMap;

use log::{debug, trace};
use nalgebra::Cholesky;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64};
use crate::poly::Exponent;

use super::system::{moment_values, EquationSystem, Unknown};

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Worker threads for restarts; 1 runs serially.
    pub jobs: usize,
    /// Magnitude of random starting values and specializations.
    pub init_scale: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { restarts: 32, tol: 1e-10, max_iter: 200, seed: 0, jobs: 1, init_scale: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionSolution {
    /// Values of the moment unknowns.
    pub assignment: BTreeMap<Exponent, C64>,
    /// Values of every unknown of the system, in order.
    pub values: Vec<C64>,
    /// Relative `max |F|` at the solution.
    pub residual: f64,
    /// Unknowns fixed to random values because the solution set is not
    /// zero-dimensional there.
    pub free_count: usize,
    /// Index of the successful restart.
    pub restart: usize,
}

fn rel_residual<S: EquationSystem + ?Sized>(sys: &S, u: &[C64], f: &CVec) -> f64 {
    let m = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return f64::INFINITY;
    }
    m / sys.residual_scale(u)
}

/// Levenberg-Marquardt on the unknowns flagged in `free`. Returns the final
/// relative residual.
fn levenberg_marquardt<S: EquationSystem + ?Sized>(
    sys: &S,
    u: &mut [C64],
    free: &[usize],
    opts: &SolverOptions,
) -> f64 {
    let mut f = sys.residual(u);
    let mut res = rel_residual(sys, u, &f);
    if free.is_empty() || !res.is_finite() {
        return res;
    }
    let mut cost = f.norm_squared();
    let mut mu: Option<f64> = None;
    for it in 0..opts.max_iter {
        if res < opts.tol {
            break;
        }
        let jac = sys.jacobian(u).select_columns(free.iter());
        let jh = jac.adjoint();
        let a = &jh * &jac;
        let g = &jh * &f;
        let diag_max = (0..a.nrows()).map(|i| a[(i, i)].re).fold(0.0, f64::max).max(1e-300);
        let mut m = mu.unwrap_or(1e-3 * diag_max);
        let mut accepted = false;
        for _ in 0..12 {
            let damped = &a + CMat::identity(a.nrows(), a.ncols()) * C64::new(m, 0.0);
            let Some(chol) = Cholesky::new(damped) else {
                m *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let mut trial = u.to_vec();
            for (s, &k) in free.iter().enumerate() {
                trial[k] += step[s];
            }
            let ft = sys.residual(&trial);
            let ct = ft.norm_squared();
            if ct.is_finite() && ct < cost {
                u.copy_from_slice(&trial);
                f = ft;
                cost = ct;
                res = rel_residual(sys, u, &f);
                m = (m / 3.0).max(1e-16 * diag_max);
                accepted = true;
                break;
            }
            m *= 4.0;
        }
        mu = Some(m);
        if !accepted {
            trace!("stalled at iteration {it} with residual {res:e}");
            break;
        }
    }
    res
}

/// Greedy column selection: indices of columns that raise the rank, in order.
fn pivot_columns(jac: &CMat, rel_tol: f64) -> Vec<usize> {
    let scale = linalg::singular_values(jac).first().copied().unwrap_or(0.0);
    let mut chosen: Vec<usize> = Vec::new();
    if scale == 0.0 {
        return chosen;
    }
    for k in 0..jac.ncols() {
        let mut trial = chosen.clone();
        trial.push(k);
        let sub = jac.select_columns(trial.iter());
        let s = linalg::singular_values(&sub);
        if s.last().copied().unwrap_or(0.0) > rel_tol * scale {
            chosen = trial;
        }
    }
    chosen
}

enum Attempt {
    Solved(ExtensionSolution),
    Failed(f64),
}

fn attempt<S: EquationSystem + ?Sized>(
    sys: &S,
    opts: &SolverOptions,
    restart: usize,
    fixed: &BTreeMap<usize, C64>,
) -> Attempt {
    let n = sys.unknowns().len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut u: Vec<C64> = (0..n)
        .map(|k| fixed.get(&k).copied().unwrap_or_else(|| linalg::random_complex_gaussian(&mut rng) * opts.init_scale))
        .collect();
    let free: Vec<usize> = (0..n).filter(|k| !fixed.contains_key(k)).collect();
    let res = levenberg_marquardt(sys, &mut u, &free, opts);
    if res >= opts.tol {
        return Attempt::Failed(res);
    }
    // positive-dimensional solution set: pin the directions the Jacobian misses
    let jac = sys.jacobian(&u).select_columns(free.iter());
    let pivots = pivot_columns(&jac, 1e-8);
    let mut free_count = 0;
    if pivots.len() < free.len() {
        let pinned: Vec<usize> = (0..free.len()).filter(|p| !pivots.contains(p)).map(|p| free[p]).collect();
        for _ in 0..3 {
            let mut v = u.clone();
            for &k in &pinned {
                v[k] = linalg::random_unit_disk(&mut rng) * opts.init_scale;
            }
            let rest: Vec<usize> = pivots.iter().map(|&p| free[p]).collect();
            let r = levenberg_marquardt(sys, &mut v, &rest, opts);
            if r < opts.tol && sys.admissible(&v) {
                u = v;
                free_count = pinned.len();
                break;
            }
        }
        if free_count == 0 {
            // the converged point is itself a solution; the pivot test can
            // misread a badly conditioned direction as free
            trace!("restart {restart}: specialization failed, keeping the converged point");
        }
    }
    if !sys.admissible(&u) {
        debug!("restart {restart}: solution rejected by the determinant guard");
        return Attempt::Failed(res);
    }
    let f = sys.residual(&u);
    let residual = rel_residual(sys, &u, &f);
    Attempt::Solved(ExtensionSolution {
        assignment: moment_values(sys.unknowns(), &u),
        values: u,
        residual,
        free_count,
        restart,
    })
}

/// Solves an extension system, returning the first restart (in index order)
/// that converges to an admissible solution.
pub fn solve_extension<S: EquationSystem + ?Sized>(sys: &S, opts: &SolverOptions) -> Result<ExtensionSolution> {
    solve_with_fixed(sys, &BTreeMap::new(), opts)
}

/// As [`solve_extension`], with some unknowns (by position) held at given values.
pub fn solve_with_fixed<S: EquationSystem + ?Sized>(
    sys: &S,
    fixed: &BTreeMap<usize, C64>,
    opts: &SolverOptions,
) -> Result<ExtensionSolution> {
    let n = sys.unknowns().len();
    if n == fixed.len() {
        let u: Vec<C64> = (0..n).map(|k| fixed[&k]).collect();
        let f = sys.residual(&u);
        let residual = if f.is_empty() { 0.0 } else { rel_residual(sys, &u, &f) };
        if residual < opts.tol && sys.admissible(&u) {
            return Ok(ExtensionSolution {
                assignment: moment_values(sys.unknowns(), &u),
                values: u,
                residual,
                free_count: 0,
                restart: 0,
            });
        }
        return Err(Error::Infeasible { restarts: 0, best_residual: residual });
    }
    let mut best = f64::INFINITY;
    let chunk = opts.jobs.max(1);
    let pool = (chunk > 1)
        .then(|| rayon::ThreadPoolBuilder::new().num_threads(chunk).build().ok())
        .flatten();
    let mut start = 0;
    while start < opts.restarts {
        let end = (start + chunk).min(opts.restarts);
        let results: Vec<Attempt> = match &pool {
            Some(p) => p.install(|| (start..end).into_par_iter().map(|k| attempt(sys, opts, k, fixed)).collect()),
            None => (start..end).map(|k| attempt(sys, opts, k, fixed)).collect(),
        };
        for r in results {
            match r {
                Attempt::Solved(s) => {
                    debug!("extension solved at restart {} (residual {:e}, free {})", s.restart, s.residual, s.free_count);
                    return Ok(s);
                }
                Attempt::Failed(res) => best = best.min(res),
            }
        }
        start = end;
    }
    debug!("extension infeasible after {} restarts, best residual {best:e}", opts.restarts);
    Err(Error::Infeasible { restarts: opts.restarts, best_residual: best })
}

/// Position of a moment unknown in a system.
pub fn unknown_position(unknowns: &[Unknown], e: &Exponent) -> Option<usize> {
    unknowns.iter().position(|u| matches!(u, Unknown::Moment(m) if m == e))
}
