//! Equation systems whose solutions are flat extensions of a truncated
//! moment sequence.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::hankel::{build_hankel, shifted_matrix, MonomialBasis, QuasiHankelMatrix};
use crate::linalg::{self, CMat, CVec, C64};
use crate::poly::{DualForm, Exponent, Moment};

use super::sparse::{PolyMat, SparsePoly};

/// Smallest admissible `σ_min / σ_max` of `H^B` at a solution.
pub const DET_GUARD: f64 = 1e-10;

/// A variable of an extension system.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Unknown {
    /// The moment `h_α` beyond the known degree.
    Moment(Exponent),
    /// Entry `(row, col)` of the factor `W` in `H^{B,∂B} = H^B W`.
    Factor { row: usize, col: usize },
}

impl fmt::Display for Unknown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unknown::Moment(e) => write!(f, "h[{e}]"),
            Unknown::Factor { row, col } => write!(f, "w[{row},{col}]"),
        }
    }
}

/// Residual and Jacobian access used by the solver.
pub trait EquationSystem: Sync {
    fn unknowns(&self) -> &[Unknown];

    fn residual(&self, u: &[C64]) -> CVec;

    fn jacobian(&self, u: &[C64]) -> CMat;

    /// Divisor that turns `max |F|` into the relative residual compared with
    /// the tolerance.
    fn residual_scale(&self, _u: &[C64]) -> f64 {
        1.0
    }

    /// Side conditions a solution must meet (nonsingular `H^B`).
    fn admissible(&self, _u: &[C64]) -> bool {
        true
    }
}

/// Relative size below which a coefficient of an assembled system is taken
/// for rounding noise. Moments of coordinate-changed inputs carry relative
/// errors well above machine precision, and the products forming the
/// commutators amplify them further.
pub const PRUNE_TOL: f64 = 1e-9;

/// Polynomial equations in a list of unknowns, each normalized so its largest
/// coefficient has modulus 1.
#[derive(Clone, Debug)]
pub struct PolySystem {
    unknowns: Vec<Unknown>,
    equations: Vec<SparsePoly>,
    guard: Option<QuasiHankelMatrix>,
}

impl PolySystem {
    /// Drops coefficients below `PRUNE_TOL` of the largest one in the system
    /// and removes equations that vanish identically.
    pub fn new(unknowns: Vec<Unknown>, equations: Vec<SparsePoly>, guard: Option<QuasiHankelMatrix>) -> Self {
        Self::with_reference(unknowns, equations, guard, 0.0)
    }

    /// As [`PolySystem::new`], with coefficients below `PRUNE_TOL * reference`
    /// treated as rounding noise even when no equation is larger.
    pub fn with_reference(
        unknowns: Vec<Unknown>,
        equations: Vec<SparsePoly>,
        guard: Option<QuasiHankelMatrix>,
        reference: f64,
    ) -> Self {
        let scale = equations.iter().map(|e| e.max_coeff()).fold(reference, f64::max);
        let equations = equations
            .into_iter()
            .filter_map(|mut e| {
                e.prune(PRUNE_TOL * scale);
                let m = e.max_coeff();
                (m > 0.0).then(|| e.scale(C64::new(1.0 / m, 0.0)))
            })
            .collect();
        PolySystem { unknowns, equations, guard }
    }

    pub fn equations(&self) -> &[SparsePoly] {
        &self.equations
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.equations.iter().map(|e| e.degree()).max().unwrap_or(0)
    }

    /// Moment unknowns that actually occur in some equation.
    pub fn active_moments(&self) -> Vec<Exponent> {
        let mut used = vec![false; self.unknowns.len()];
        for e in &self.equations {
            for v in e.variables() {
                used[v as usize] = true;
            }
        }
        self.unknowns
            .iter()
            .zip(used)
            .filter_map(|(u, on)| match (u, on) {
                (Unknown::Moment(e), true) => Some(e.clone()),
                _ => None,
            })
            .collect()
    }

    /// Largest `|e(u)| / Σ |terms of e at u|` over the equations, at an
    /// assignment of the moment unknowns; other unknowns default to zero.
    pub fn max_residual_at(&self, values: &BTreeMap<Exponent, C64>) -> f64 {
        let u: Vec<C64> = self
            .unknowns
            .iter()
            .map(|x| match x {
                Unknown::Moment(e) => values.get(e).copied().unwrap_or_default(),
                Unknown::Factor { .. } => C64::default(),
            })
            .collect();
        self.equations
            .iter()
            .map(|e| {
                e.eval(&u).norm() / term_size(e, &u).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }
}

/// `Σ |c_k u^k|` over the terms of `e`.
fn term_size(e: &SparsePoly, u: &[C64]) -> f64 {
    e.terms()
        .iter()
        .map(|(k, c)| k.iter().fold(c.norm(), |acc, &i| acc * u[i as usize].norm()))
        .fold(0.0, |a, b| a + b)
}

impl EquationSystem for PolySystem {
    fn unknowns(&self) -> &[Unknown] {
        &self.unknowns
    }

    fn residual(&self, u: &[C64]) -> CVec {
        CVec::from_iterator(self.equations.len(), self.equations.iter().map(|e| e.eval(u)))
    }

    fn jacobian(&self, u: &[C64]) -> CMat {
        let n = self.unknowns.len();
        let mut j = CMat::zeros(self.equations.len(), n);
        let mut row = vec![C64::default(); n];
        for (i, e) in self.equations.iter().enumerate() {
            row.iter_mut().for_each(|x| *x = C64::default());
            e.accumulate_gradient(u, &mut row);
            for (k, v) in row.iter().enumerate() {
                j[(i, k)] = *v;
            }
        }
        j
    }

    /// The size of the largest equation's terms, so that rounding in
    /// cancelling terms does not read as a residual.
    fn residual_scale(&self, u: &[C64]) -> f64 {
        self.equations.iter().map(|e| term_size(e, u)).fold(1.0, f64::max)
    }

    fn admissible(&self, u: &[C64]) -> bool {
        match &self.guard {
            None => true,
            Some(h) => {
                let values = moment_values(&self.unknowns, u);
                h.evaluate(&values)
                    .is_some_and(|m| linalg::inverse_condition(&m) > DET_GUARD)
            }
        }
    }
}

pub(crate) fn moment_values(unknowns: &[Unknown], u: &[C64]) -> BTreeMap<Exponent, C64> {
    unknowns
        .iter()
        .zip(u)
        .filter_map(|(x, v)| match x {
            Unknown::Moment(e) => Some((e.clone(), *v)),
            Unknown::Factor { .. } => None,
        })
        .collect()
}

fn to_polymat(h: &QuasiHankelMatrix, index: &BTreeMap<Exponent, u32>) -> PolyMat {
    let (r, c) = h.shape();
    let mut out = PolyMat::zeros(r, c);
    for i in 0..r {
        for j in 0..c {
            *out.get_mut(i, j) = match h.entry(i, j) {
                Moment::Known(v) => SparsePoly::constant(*v),
                Moment::Unknown(e) => SparsePoly::var(index[e]),
            };
        }
    }
    out
}

/// The matrices `Δ_0, Δ_1, ..., Δ_n` for a basis.
pub fn shifted_family(l: &DualForm, basis: &MonomialBasis) -> Result<Vec<QuasiHankelMatrix>> {
    (0..=l.n_vars()).map(|i| shifted_matrix(l, basis, i)).collect()
}

/// Most unknown rows of `Δ_0` the symbolic elimination handles.
pub const MAX_SYMBOLIC_UNKNOWN_ROWS: usize = 4;

/// The entries of `Δ_i Δ_0^{-1} Δ_j Δ_0^{-1} - Δ_j Δ_0^{-1} Δ_i Δ_0^{-1}` for
/// all `i < j`, cleared of denominators.
///
/// The rows of the basis whose diagonal moment is known form a fully known
/// block `A` of `Δ_0`. When other rows exist, `Δ_0^{-1}` is written through the
/// Schur complement `S` of `A` as `X / det(S)` with polynomial `X`, and the
/// commutator is multiplied by `det(S)^2`.
pub fn commutation_system(l: &DualForm, basis: &MonomialBasis) -> Result<PolySystem> {
    let family = shifted_family(l, basis)?;
    let mut index: BTreeMap<Exponent, u32> = BTreeMap::new();
    for h in &family {
        for e in h.unknowns() {
            let next = index.len() as u32;
            index.entry(e).or_insert(next);
        }
    }
    // graded order of the unknowns
    let ordered: Vec<Exponent> = index.keys().cloned().collect();
    for (k, e) in ordered.iter().enumerate() {
        index.insert(e.clone(), k as u32);
    }
    let unknowns: Vec<Unknown> = ordered.iter().cloned().map(Unknown::Moment).collect();

    let delta0 = &family[0];
    let r = basis.len();
    let known: Vec<usize> = (0..r).filter(|&i| matches!(delta0.entry(i, i), Moment::Known(_))).collect();
    let open: Vec<usize> = (0..r).filter(|&i| !matches!(delta0.entry(i, i), Moment::Known(_))).collect();
    if open.len() > MAX_SYMBOLIC_UNKNOWN_ROWS {
        return Err(Error::InvalidInput(format!(
            "{} rows of H^B carry unknowns; symbolic elimination supports at most {MAX_SYMBOLIC_UNKNOWN_ROWS}",
            open.len()
        )));
    }
    let a = delta0
        .principal(&known)
        .to_known()
        .ok_or_else(|| Error::NumericalRank("known block of H^B has unknown entries".into()))?;
    if linalg::inverse_condition(&a) <= DET_GUARD {
        return Err(Error::NumericalRank("known block of H^B is singular".into()));
    }
    let a_inv = PolyMat::from_numeric(&linalg::inverse(&a).expect("checked nonsingular"));
    let d0 = to_polymat(delta0, &index);

    let x = if open.is_empty() {
        a_inv
    } else {
        let b = d0.select(&known, &open);
        let c = d0.select(&open, &open);
        let ainv_b = a_inv.mul(&b);
        let s = c.sub(&b.transpose().mul(&ainv_b));
        let adj = s.adjugate();
        let det = s.determinant();
        let top_right = ainv_b.mul(&adj);
        let top_left = a_inv.scale(&det);
        let top_left = {
            let mut t = top_left;
            let corr = top_right.mul(&ainv_b.transpose());
            for (o, v) in t.data.iter_mut().zip(&corr.data) {
                o.add_assign(v);
            }
            t
        };
        let mut x = PolyMat::zeros(r, r);
        for (p, &i) in known.iter().enumerate() {
            for (q, &j) in known.iter().enumerate() {
                *x.get_mut(i, j) = top_left.get(p, q).clone();
            }
            for (q, &j) in open.iter().enumerate() {
                let v = top_right.get(p, q).scale(C64::new(-1.0, 0.0));
                *x.get_mut(j, i) = v.clone();
                *x.get_mut(i, j) = v;
            }
        }
        for (p, &i) in open.iter().enumerate() {
            for (q, &j) in open.iter().enumerate() {
                *x.get_mut(i, j) = adj.get(p, q).clone();
            }
        }
        x
    };

    let deltas: Vec<PolyMat> = family.iter().map(|h| to_polymat(h, &index)).collect();
    let mut equations = Vec::new();
    for i in 1..deltas.len() {
        let ni = deltas[i].mul(&x);
        for dj in &deltas[i + 1..] {
            let nj = dj.mul(&x);
            let comm = ni.mul(&nj).sub(&nj.mul(&ni));
            equations.extend(comm.data);
        }
    }
    let guard = (!delta0.is_known()).then(|| delta0.clone());
    let entry_scale = deltas
        .iter()
        .flat_map(|m| m.data.iter())
        .map(|p| p.max_coeff())
        .fold(1.0, f64::max);
    let x_scale = x.data.iter().map(|p| p.max_coeff()).fold(0.0, f64::max);
    let reference = (r as f64 * entry_scale * x_scale).powi(2);
    Ok(PolySystem::with_reference(unknowns, equations, guard, reference))
}

/// `H^{B,∂B} - H^B W = 0` and the upper triangle of
/// `H^{∂B,∂B} - Wᵀ H^B W = 0`, in the moment unknowns and the entries of `W`.
pub fn wfactor_system(l: &DualForm, basis: &MonomialBasis) -> Result<PolySystem> {
    let b = basis.monomials();
    let border = basis.border();
    let hb = build_hankel(l, b, b);
    let g = build_hankel(l, b, &border);
    let j = build_hankel(l, &border, &border);
    let mut moments: Vec<Exponent> = hb.unknowns().into_iter().collect();
    moments.extend(g.unknowns());
    moments.extend(j.unknowns());
    moments.sort();
    moments.dedup();
    let index: BTreeMap<Exponent, u32> =
        moments.iter().enumerate().map(|(k, e)| (e.clone(), k as u32)).collect();
    let mut unknowns: Vec<Unknown> = moments.into_iter().map(Unknown::Moment).collect();
    let offset = unknowns.len() as u32;
    let mut w = PolyMat::zeros(b.len(), border.len());
    for row in 0..b.len() {
        for col in 0..border.len() {
            *w.get_mut(row, col) = SparsePoly::var(offset + (row * border.len() + col) as u32);
            unknowns.push(Unknown::Factor { row, col });
        }
    }
    let hb_p = to_polymat(&hb, &index);
    let g_p = to_polymat(&g, &index);
    let j_p = to_polymat(&j, &index);
    let hw = hb_p.mul(&w);
    let mut equations: Vec<SparsePoly> = g_p.sub(&hw).data;
    let whw = w.transpose().mul(&hw);
    let jr = j_p.sub(&whw);
    for r in 0..border.len() {
        for c in r..border.len() {
            equations.push(jr.get(r, c).clone());
        }
    }
    let guard = (!hb.is_known()).then(|| hb.clone());
    Ok(PolySystem::new(unknowns, equations, guard))
}

/// Commutation conditions evaluated numerically through `N_i = Δ_i Δ_0^{-1}`:
/// residual entries of `N_i N_j - N_j N_i`, with the exact Jacobian
/// `dN_i = (dΔ_i - N_i dΔ_0) Δ_0^{-1}`. Suits bases where `Δ_0` has unknowns.
#[derive(Clone, Debug)]
pub struct PencilSystem {
    unknowns: Vec<Unknown>,
    family: Vec<QuasiHankelMatrix>,
    /// `slots[m][k]`: positions of unknown `k` in `Δ_m`.
    slots: Vec<Vec<Vec<(usize, usize)>>>,
}

impl PencilSystem {
    pub fn new(l: &DualForm, basis: &MonomialBasis) -> Result<Self> {
        let family = shifted_family(l, basis)?;
        let mut moments: Vec<Exponent> = family.iter().flat_map(|h| h.unknowns()).collect();
        moments.sort();
        moments.dedup();
        let index: BTreeMap<&Exponent, usize> = moments.iter().enumerate().map(|(k, e)| (e, k)).collect();
        let r = basis.len();
        let mut slots = vec![vec![Vec::new(); moments.len()]; family.len()];
        for (m, h) in family.iter().enumerate() {
            for i in 0..r {
                for j in 0..r {
                    if let Moment::Unknown(e) = h.entry(i, j) {
                        slots[m][index[e]].push((i, j));
                    }
                }
            }
        }
        let unknowns = moments.into_iter().map(Unknown::Moment).collect();
        Ok(PencilSystem { unknowns, family, slots })
    }

    pub fn family(&self) -> &[QuasiHankelMatrix] {
        &self.family
    }

    fn matrices(&self, u: &[C64]) -> Vec<CMat> {
        let values = moment_values(&self.unknowns, u);
        self.family.iter().map(|h| h.evaluate(&values).expect("all unknowns valued")).collect()
    }

    fn products(&self, u: &[C64]) -> Option<(CMat, Vec<CMat>)> {
        let mats = self.matrices(u);
        let inv = linalg::inverse(&mats[0])?;
        let ns = mats[1..].iter().map(|d| d * &inv).collect();
        Some((inv, ns))
    }

    fn pair_count(&self) -> usize {
        let n = self.family.len() - 1;
        n * n.saturating_sub(1) / 2
    }
}

impl EquationSystem for PencilSystem {
    fn unknowns(&self) -> &[Unknown] {
        &self.unknowns
    }

    fn residual(&self, u: &[C64]) -> CVec {
        let r = self.family[0].shape().0;
        let len = self.pair_count() * r * r;
        let Some((_, ns)) = self.products(u) else {
            return CVec::from_element(len, C64::new(f64::NAN, 0.0));
        };
        let mut out = Vec::with_capacity(len);
        for i in 0..ns.len() {
            for j in (i + 1)..ns.len() {
                let c = &ns[i] * &ns[j] - &ns[j] * &ns[i];
                out.extend(c.iter().copied());
            }
        }
        CVec::from_vec(out)
    }

    fn jacobian(&self, u: &[C64]) -> CMat {
        let r = self.family[0].shape().0;
        let rows = self.pair_count() * r * r;
        let nu = self.unknowns.len();
        let mut jac = CMat::zeros(rows, nu);
        let Some((inv, ns)) = self.products(u) else {
            return jac;
        };
        for k in 0..nu {
            // dN_i for this unknown
            let dn: Vec<CMat> = (0..ns.len())
                .map(|i| {
                    let mut e = CMat::zeros(r, r);
                    for &(a, b) in &self.slots[i + 1][k] {
                        e[(a, b)] += C64::new(1.0, 0.0);
                    }
                    let mut e0 = CMat::zeros(r, r);
                    for &(a, b) in &self.slots[0][k] {
                        e0[(a, b)] += C64::new(1.0, 0.0);
                    }
                    (e - &ns[i] * e0) * &inv
                })
                .collect();
            let mut row = 0;
            for i in 0..ns.len() {
                for j in (i + 1)..ns.len() {
                    let d = &dn[i] * &ns[j] + &ns[i] * &dn[j] - &dn[j] * &ns[i] - &ns[j] * &dn[i];
                    for (q, v) in d.iter().enumerate() {
                        jac[(row + q, k)] = *v;
                    }
                    row += r * r;
                }
            }
        }
        jac
    }

    fn residual_scale(&self, u: &[C64]) -> f64 {
        match self.products(u) {
            Some((_, ns)) => 1.0 + ns.iter().map(|n| n.norm_squared()).fold(0.0, f64::max),
            None => 1.0,
        }
    }

    fn admissible(&self, u: &[C64]) -> bool {
        let mats = self.matrices(u);
        linalg::inverse_condition(&mats[0]) > DET_GUARD
    }
}
