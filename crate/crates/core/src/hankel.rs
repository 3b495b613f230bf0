//! Quasi-Hankel matrices of a dual form, monomial bases connected to 1, and
//! multiplication operators.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::poly::{AffinePoly, DualForm, Exponent, Moment};

/// Default relative threshold for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// A set of affine monomials connected to 1, kept in graded order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    nvars: usize,
    monomials: Vec<Exponent>,
}

impl MonomialBasis {
    pub fn new(nvars: usize, mut monomials: Vec<Exponent>) -> Result<Self> {
        if monomials.iter().any(|m| m.nvars() != nvars) {
            return Err(Error::InvalidInput(format!("basis monomials must have {nvars} variables")));
        }
        monomials.sort();
        if monomials.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate monomial in basis".into()));
        }
        if !is_connected_to_one(&monomials) {
            return Err(Error::InvalidInput("basis is not connected to 1".into()));
        }
        Ok(MonomialBasis { nvars, monomials })
    }

    /// The first `size` monomials in graded order.
    pub fn graded(nvars: usize, size: usize) -> Self {
        let mut monomials = Vec::with_capacity(size);
        let mut d = 0;
        while monomials.len() < size {
            for e in Exponent::all_of_degree(nvars, d) {
                if monomials.len() == size {
                    break;
                }
                monomials.push(e);
            }
            d += 1;
        }
        MonomialBasis { nvars, monomials }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn monomials(&self) -> &[Exponent] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index_of(&self, e: &Exponent) -> Option<usize> {
        self.monomials.binary_search(e).ok()
    }

    pub fn contains(&self, e: &Exponent) -> bool {
        self.index_of(e).is_some()
    }

    /// `B ∪ x_1 B ∪ ... ∪ x_n B`, graded.
    pub fn plus(&self) -> Vec<Exponent> {
        let mut set: BTreeSet<Exponent> = self.monomials.iter().cloned().collect();
        for m in &self.monomials {
            for i in 0..self.nvars {
                set.insert(m.shift(i));
            }
        }
        set.into_iter().collect()
    }

    /// `∂B = B⁺ \ B`.
    pub fn border(&self) -> Vec<Exponent> {
        self.plus().into_iter().filter(|m| !self.contains(m)).collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.monomials.iter().map(|m| m.degree()).max().unwrap_or(0)
    }
}

impl fmt::Display for MonomialBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.monomials.iter().map(|m| m.format_with_offset(1)).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

/// Every monomial is 1 or `x_i m'` with `m'` in the set.
pub fn is_connected_to_one(monomials: &[Exponent]) -> bool {
    let set: BTreeSet<&Exponent> = monomials.iter().collect();
    monomials.iter().all(|m| {
        m.is_one() || (0..m.nvars()).any(|i| m.unshift(i).is_some_and(|p| set.contains(&p)))
    })
}

/// The matrix `(Λ(x^{α+β}))` with rows `α` and columns `β`; entries beyond the
/// known degree are unknown slots named by their exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiHankelMatrix {
    rows: Vec<Exponent>,
    cols: Vec<Exponent>,
    entries: Vec<Moment>,
}

impl QuasiHankelMatrix {
    pub fn rows(&self) -> &[Exponent] {
        &self.rows
    }

    pub fn cols(&self) -> &[Exponent] {
        &self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn entry(&self, i: usize, j: usize) -> &Moment {
        &self.entries[i * self.cols.len() + j]
    }

    pub fn unknowns(&self) -> BTreeSet<Exponent> {
        self.entries
            .iter()
            .filter_map(|m| match m {
                Moment::Unknown(e) => Some(e.clone()),
                Moment::Known(_) => None,
            })
            .collect()
    }

    pub fn is_known(&self) -> bool {
        self.entries.iter().all(|m| matches!(m, Moment::Known(_)))
    }

    /// Numeric matrix with unknown slots filled from `values`; `None` if a slot
    /// has no value.
    pub fn evaluate(&self, values: &BTreeMap<Exponent, C64>) -> Option<CMat> {
        let (r, c) = self.shape();
        let mut out = CMat::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                out[(i, j)] = match self.entry(i, j) {
                    Moment::Known(v) => *v,
                    Moment::Unknown(e) => *values.get(e)?,
                };
            }
        }
        Some(out)
    }

    pub fn to_known(&self) -> Option<CMat> {
        self.evaluate(&BTreeMap::new())
    }

    /// The principal submatrix on the given row/column positions.
    pub fn principal(&self, idx: &[usize]) -> QuasiHankelMatrix {
        let rows: Vec<Exponent> = idx.iter().map(|&i| self.rows[i].clone()).collect();
        let cols: Vec<Exponent> = idx.iter().map(|&j| self.cols[j].clone()).collect();
        let entries = idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.entry(i, j).clone())
            .collect();
        QuasiHankelMatrix { rows, cols, entries }
    }
}

fn format_scalar(z: C64) -> String {
    let clean = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    let (a, b) = (clean(z.re), clean(z.im));
    if b == 0.0 {
        format!("{}", (a * 1e6).round() / 1e6)
    } else {
        format!("({},{})", (a * 1e6).round() / 1e6, (b * 1e6).round() / 1e6)
    }
}

impl fmt::Display for QuasiHankelMatrix {
    /// Text grid; unknown slots print as `h[α]` with the affine exponent digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (r, c) = self.shape();
        let cells: Vec<String> = self
            .entries
            .iter()
            .map(|m| match m {
                Moment::Known(v) => format_scalar(*v),
                Moment::Unknown(e) => format!("h[{e}]"),
            })
            .collect();
        let width = cells.iter().map(|s| s.len()).max().unwrap_or(1);
        for i in 0..r {
            let line: Vec<String> =
                (0..c).map(|j| format!("{:>width$}", cells[i * c + j])).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

pub fn build_hankel(l: &DualForm, rows: &[Exponent], cols: &[Exponent]) -> QuasiHankelMatrix {
    let entries = rows
        .iter()
        .flat_map(|a| cols.iter().map(move |b| l.moment(&a.add(b))))
        .collect();
    QuasiHankelMatrix { rows: rows.to_vec(), cols: cols.to_vec(), entries }
}

/// `H^B_{x_var ⋆ Λ}`: entry `(α, β)` is the slot at `α + β + e_var`. Variables
/// are numbered `1..=n` as `x_1..x_n`; `var = 0` gives `H^B_Λ` itself.
pub fn shifted_matrix(l: &DualForm, basis: &MonomialBasis, var: usize) -> Result<QuasiHankelMatrix> {
    if var > l.n_vars() {
        return Err(Error::InvalidInput(format!("no affine variable x{var}")));
    }
    let cols: Vec<Exponent> = if var == 0 {
        basis.monomials().to_vec()
    } else {
        basis.monomials().iter().map(|m| m.shift(var - 1)).collect()
    };
    let mut h = build_hankel(l, basis.monomials(), &cols);
    h.cols = basis.monomials().to_vec();
    Ok(h)
}

/// Selects, among the rows whose diagonal slot is known, a connected set of
/// monomials whose rows are linearly independent and span the known block, in
/// graded order. For a symmetric block this principal minor is nonsingular.
pub fn full_rank_principal_minor(m: &QuasiHankelMatrix, tol: f64) -> Result<(MonomialBasis, CMat)> {
    if m.rows != m.cols {
        return Err(Error::InvalidInput("principal minor needs equal row and column labels".into()));
    }
    let known: Vec<usize> =
        (0..m.rows.len()).filter(|&i| matches!(m.entry(i, i), Moment::Known(_))).collect();
    let block = m.principal(&known);
    let numeric = block.to_known().ok_or_else(|| {
        Error::NumericalRank("known diagonal block contains unknown entries".into())
    })?;
    let scale = linalg::singular_values(&numeric).first().copied().unwrap_or(0.0);
    if scale == 0.0 {
        return Err(Error::RankDeficient(0));
    }
    let mut chosen: Vec<usize> = Vec::new();
    let mut chosen_set: BTreeSet<Exponent> = BTreeSet::new();
    for (pos, label) in block.rows.iter().enumerate() {
        let connected =
            label.is_one() || (0..label.nvars()).any(|i| label.unshift(i).is_some_and(|p| chosen_set.contains(&p)));
        if !connected {
            continue;
        }
        let mut trial = chosen.clone();
        trial.push(pos);
        let rows = numeric.select_rows(trial.iter());
        let s = linalg::singular_values(&rows);
        if s.last().copied().unwrap_or(0.0) > tol * scale {
            chosen = trial;
            chosen_set.insert(label.clone());
        }
    }
    if chosen.is_empty() {
        return Err(Error::RankDeficient(0));
    }
    let nvars = m.rows[0].nvars();
    let basis = MonomialBasis::new(nvars, chosen.iter().map(|&i| block.rows[i].clone()).collect())?;
    let d0 = numeric.select_rows(chosen.iter()).select_columns(chosen.iter());
    if linalg::inverse_condition(&d0) <= tol {
        return Err(Error::RankDeficient(chosen.len()));
    }
    Ok((basis, d0))
}

/// Grows `start` to `size` monomials, adding candidates in graded order that
/// keep the basis connected and `H^B` generically nonsingular (unknown slots
/// are filled with random values for the test). The first `skip` acceptable
/// candidates are passed over, which yields alternative bases.
pub fn extend_basis<R: Rng + ?Sized>(
    l: &DualForm,
    start: &MonomialBasis,
    size: usize,
    skip: usize,
    rng: &mut R,
) -> Result<MonomialBasis> {
    let n = l.n_vars();
    let mut current: Vec<Exponent> = start.monomials().to_vec();
    if current.len() > size {
        return Err(Error::InvalidInput(format!(
            "starting basis has {} monomials, more than {size}",
            current.len()
        )));
    }
    let scale = l.degree_profile().iter().copied().fold(0.0, f64::max).max(1e-300);
    let mut fill: BTreeMap<Exponent, C64> = BTreeMap::new();
    let mut skipped = 0;
    let mut degree = 0;
    let max_degree = l.degree_known() + size as u32;
    while current.len() < size {
        let mut added = false;
        for cand in Exponent::all_of_degree(n, degree) {
            if current.len() == size {
                break;
            }
            if current.contains(&cand)
                || !(0..n).any(|i| cand.unshift(i).is_some_and(|p| current.contains(&p)))
            {
                continue;
            }
            let mut trial = current.clone();
            trial.push(cand.clone());
            let h = build_hankel(l, &trial, &trial);
            for e in h.unknowns() {
                fill.entry(e).or_insert_with(|| linalg::random_complex_gaussian(rng) * scale);
            }
            let numeric = h.evaluate(&fill).expect("all slots filled");
            if linalg::inverse_condition(&numeric) > 1e-10 {
                if skipped < skip {
                    skipped += 1;
                    continue;
                }
                current = trial;
                added = true;
            }
        }
        if !added {
            degree += 1;
            if degree > max_degree {
                return Err(Error::RankDeficient(current.len()));
            }
        }
    }
    MonomialBasis::new(n, current)
}

/// Rank of the most square fully known catalecticant `H^{B_{≤k}, B_{≤d-k}}`,
/// `k = ⌊d/2⌋`; a lower bound for the rank of the form.
pub fn catalecticant_rank(l: &DualForm, tol: f64) -> usize {
    let d = l.degree_known();
    let k = d / 2;
    let rows = Exponent::all_up_to(l.n_vars(), k);
    let cols = Exponent::all_up_to(l.n_vars(), d - k);
    let h = build_hankel(l, &rows, &cols).to_known().expect("catalecticant entries are known");
    linalg::numerical_rank(&h, tol)
}

/// Matrix of multiplication by `x_variable` in the quotient basis.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicationMatrix {
    pub variable: usize,
    pub matrix: CMat,
}

/// `M_i = Δ_0^{-1} Δ_i` for `i = 1..=n`; `deltas[i-1]` is `Δ_i`.
pub fn multiplication_matrices(delta0: &CMat, deltas: &[CMat]) -> Result<Vec<MultiplicationMatrix>> {
    let inv = linalg::inverse(delta0)
        .ok_or_else(|| Error::NumericalRank("Hankel block is singular".into()))?;
    Ok(deltas
        .iter()
        .enumerate()
        .map(|(k, d)| MultiplicationMatrix { variable: k + 1, matrix: &inv * d })
        .collect())
}

/// Generators `m - Σ_b W_{b,m} b`, one per border monomial `m`, where
/// `W = (H^B)^{-1} H^{B,∂B}`. They span the kernel of `H^{B⁺}` and generate
/// the ideal of the functional when it has a flat extension.
pub fn kernel_generators(l: &DualForm, basis: &MonomialBasis) -> Result<Vec<AffinePoly>> {
    let border = basis.border();
    let hb = build_hankel(l, basis.monomials(), basis.monomials())
        .to_known()
        .ok_or_else(|| Error::InvalidInput("H^B has unassigned entries".into()))?;
    let hbd = build_hankel(l, basis.monomials(), &border)
        .to_known()
        .ok_or_else(|| Error::InvalidInput("H^{B,∂B} has unassigned entries".into()))?;
    if linalg::inverse_condition(&hb) <= RANK_TOL {
        return Err(Error::NumericalRank("H^B is singular".into()));
    }
    let w = hb
        .clone()
        .lu()
        .solve(&hbd)
        .ok_or_else(|| Error::NumericalRank("H^B is singular".into()))?;
    let mut out = Vec::with_capacity(border.len());
    for (j, m) in border.iter().enumerate() {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(m.clone(), C64::new(1.0, 0.0));
        for (i, b) in basis.monomials().iter().enumerate() {
            let v = -w[(i, j)];
            if v != C64::new(0.0, 0.0) {
                coeffs.insert(b.clone(), v);
            }
        }
        out.push(AffinePoly { n_vars: l.n_vars(), coeffs });
    }
    Ok(out)
}
