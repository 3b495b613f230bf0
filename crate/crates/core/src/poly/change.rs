use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64};

/// Invertible change of coordinates `x <- A x`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearChange {
    matrix: CMat,
    inverse_transpose: CMat,
}

impl LinearChange {
    pub fn new(matrix: CMat) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidInput("coordinate change must be square".into()));
        }
        if linalg::inverse_condition(&matrix) < 1e-13 {
            return Err(Error::InvalidInput("coordinate change is singular".into()));
        }
        let inv = linalg::inverse(&matrix)
            .ok_or_else(|| Error::InvalidInput("coordinate change is singular".into()))?;
        Ok(LinearChange { inverse_transpose: inv.transpose(), matrix })
    }

    pub fn identity(n: usize) -> Self {
        LinearChange { matrix: CMat::identity(n, n), inverse_transpose: CMat::identity(n, n) }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn inverse_transpose(&self) -> &CMat {
        &self.inverse_transpose
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == CMat::identity(self.dim(), self.dim())
    }

    /// Maps a linear form `m` found for `f(A x)` to the form `A^{-T} m` for `f`.
    pub fn pullback(&self, m: &[C64]) -> Vec<C64> {
        let v = &self.inverse_transpose * CVec::from_column_slice(m);
        v.iter().copied().collect()
    }

    pub fn pullback_points(&self, points: &[Vec<C64>]) -> Vec<Vec<C64>> {
        points.iter().map(|p| self.pullback(p)).collect()
    }

    /// The change `x <- A (B x)`, i.e. first `self`, then `inner`.
    pub fn compose(&self, inner: &LinearChange) -> LinearChange {
        LinearChange {
            matrix: &self.matrix * &inner.matrix,
            inverse_transpose: &self.inverse_transpose * &inner.inverse_transpose,
        }
    }
}
