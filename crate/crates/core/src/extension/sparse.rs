//! Sparse polynomials over numbered unknowns, and small matrices of them.

use std::collections::BTreeMap;

use crate::linalg::{CMat, C64};

/// A polynomial in unknowns `u_0, u_1, ...`; each monomial is the sorted
/// multiset of unknown indices it contains.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparsePoly {
    terms: BTreeMap<Vec<u32>, C64>,
}

impl SparsePoly {
    pub fn zero() -> Self {
        SparsePoly::default()
    }

    pub fn constant(c: C64) -> Self {
        let mut p = SparsePoly::zero();
        if c != C64::default() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn var(i: u32) -> Self {
        let mut p = SparsePoly::zero();
        p.terms.insert(vec![i], C64::new(1.0, 0.0));
        p
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, C64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn variables(&self) -> impl Iterator<Item = u32> + '_ {
        self.terms.keys().flat_map(|k| k.iter().copied())
    }

    pub fn add_assign(&mut self, other: &SparsePoly) {
        for (k, c) in &other.terms {
            *self.terms.entry(k.clone()).or_default() += c;
        }
    }

    pub fn add_scaled(&mut self, other: &SparsePoly, s: C64) {
        if s == C64::default() {
            return;
        }
        for (k, c) in &other.terms {
            *self.terms.entry(k.clone()).or_default() += c * s;
        }
    }

    pub fn scale(&self, s: C64) -> SparsePoly {
        SparsePoly { terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect() }
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut k = Vec::with_capacity(ka.len() + kb.len());
                k.extend_from_slice(ka);
                k.extend_from_slice(kb);
                k.sort_unstable();
                *out.terms.entry(k).or_default() += ca * cb;
            }
        }
        out
    }

    /// Drops coefficients with modulus at most `abs_tol`.
    pub fn prune(&mut self, abs_tol: f64) {
        self.terms.retain(|_, c| c.norm() > abs_tol);
    }

    pub fn eval(&self, u: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(k, c)| k.iter().fold(*c, |acc, &i| acc * u[i as usize]))
            .sum()
    }

    /// Adds `∂p/∂u_j` at `u` into `grad[j]`.
    pub fn accumulate_gradient(&self, u: &[C64], grad: &mut [C64]) {
        for (k, c) in &self.terms {
            for pos in 0..k.len() {
                if pos > 0 && k[pos] == k[pos - 1] {
                    continue;
                }
                // d/du of u^m is m u^{m-1}: count the multiplicity once
                let mult = k.iter().filter(|&&v| v == k[pos]).count() as f64;
                let mut v = c * mult;
                let mut skipped = false;
                for (q, &i) in k.iter().enumerate() {
                    if !skipped && i == k[pos] && q >= pos {
                        skipped = true;
                        continue;
                    }
                    v *= u[i as usize];
                }
                grad[k[pos] as usize] += v;
            }
        }
    }
}

/// Dense row-major matrix of sparse polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<SparsePoly>,
}

impl PolyMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMat { rows, cols, data: vec![SparsePoly::zero(); rows * cols] }
    }

    pub fn from_numeric(m: &CMat) -> Self {
        let mut out = PolyMat::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.data[i * m.ncols() + j] = SparsePoly::constant(m[(i, j)]);
            }
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> &SparsePoly {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut SparsePoly {
        &mut self.data[i * self.cols + j]
    }

    pub fn mul(&self, other: &PolyMat) -> PolyMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = PolyMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.mul(b);
                    out.get_mut(i, j).add_assign(&prod);
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &PolyMat) -> PolyMat {
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            o.add_scaled(b, C64::new(-1.0, 0.0));
        }
        out
    }

    pub fn scale(&self, s: &SparsePoly) -> PolyMat {
        PolyMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|p| p.mul(s)).collect() }
    }

    pub fn transpose(&self) -> PolyMat {
        let mut out = PolyMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.get_mut(j, i) = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> PolyMat {
        let mut out = PolyMat::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                *out.get_mut(a, b) = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn determinant(&self) -> SparsePoly {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let idx: Vec<usize> = (0..self.rows).collect();
        self.minor_det(&idx, &idx)
    }

    fn minor_det(&self, rows: &[usize], cols: &[usize]) -> SparsePoly {
        match rows.len() {
            0 => SparsePoly::constant(C64::new(1.0, 0.0)),
            1 => self.get(rows[0], cols[0]).clone(),
            _ => {
                let mut acc = SparsePoly::zero();
                let sub_rows = &rows[1..];
                for (pos, &c) in cols.iter().enumerate() {
                    let entry = self.get(rows[0], c);
                    if entry.is_zero() {
                        continue;
                    }
                    let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                    let m = self.minor_det(sub_rows, &sub_cols);
                    acc.add_scaled(&entry.mul(&m), C64::new(sign, 0.0));
                }
                acc
            }
        }
    }

    /// Classical adjugate, `adj(A) A = det(A) I`.
    pub fn adjugate(&self) -> PolyMat {
        let n = self.rows;
        let mut out = PolyMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                *out.get_mut(i, j) = self.minor_det(&rows, &cols).scale(C64::new(sign, 0.0));
            }
        }
        out
    }

    pub fn eval(&self, u: &[C64]) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval(u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn product_and_gradient() {
        // p = (u0 + 2)(u0 u1) = u0^2 u1 + 2 u0 u1
        let p = SparsePoly::var(0).mul(&SparsePoly::var(1));
        let q = SparsePoly::var(0);
        let mut s = q.clone();
        s.add_assign(&SparsePoly::constant(re(2.0)));
        let r = s.mul(&p);
        let u = [re(3.0), re(5.0)];
        assert_eq!(r.eval(&u), re(75.0));
        let mut g = vec![re(0.0); 2];
        r.accumulate_gradient(&u, &mut g);
        // d/du0 = 2 u0 u1 + 2 u1 = 40; d/du1 = u0^2 + 2 u0 = 15
        assert_eq!(g, vec![re(40.0), re(15.0)]);
        assert_eq!(r.degree(), 3);
    }

    #[test]
    fn adjugate_identity() {
        let mut m = PolyMat::zeros(2, 2);
        *m.get_mut(0, 0) = SparsePoly::var(0);
        *m.get_mut(0, 1) = SparsePoly::constant(re(2.0));
        *m.get_mut(1, 0) = SparsePoly::constant(re(2.0));
        *m.get_mut(1, 1) = SparsePoly::var(1);
        let u = [re(3.0), re(7.0)];
        let prod = m.adjugate().mul(&m).eval(&u);
        let det = m.determinant().eval(&u);
        assert_eq!(det, re(17.0));
        assert!((prod - CMat::identity(2, 2) * det).norm() < 1e-12);
    }
}
