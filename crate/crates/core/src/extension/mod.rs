//! Flat extension of truncated moment sequences: unknown moments `h_α` are
//! chosen so that the quasi-Hankel matrix keeps rank `|B|`.

mod solver;
mod sparse;
mod system;

pub use solver::{solve_extension, solve_with_fixed, unknown_position, ExtensionSolution, SolverOptions};
pub use sparse::{PolyMat, SparsePoly};
pub use system::{
    commutation_system, shifted_family, wfactor_system, EquationSystem, PencilSystem, PolySystem, Unknown,
    DET_GUARD, MAX_SYMBOLIC_UNKNOWN_ROWS, PRUNE_TOL,
};

use crate::error::{Error, Result};
use crate::hankel::{multiplication_matrices, MonomialBasis};
use crate::linalg::{CMat, C64};
use crate::poly::{DualForm, Exponent};

/// Numeric `Δ_0, Δ_1, ..., Δ_n` once every slot has a value.
pub fn numeric_family(l: &DualForm, basis: &MonomialBasis) -> Result<Vec<CMat>> {
    shifted_family(l, basis)?
        .iter()
        .map(|h| {
            h.evaluate(l.assigned())
                .ok_or_else(|| Error::InvalidInput("shifted matrices still contain unknowns".into()))
        })
        .collect()
}

/// `Λ̃(x^α)` of the rank-`|B|` extension: the `(1, 1)` entry of `Δ_0 α(M)`
/// with `M_i = Δ_0^{-1} Δ_i`. The basis must start with the monomial 1.
pub fn extended_moment(delta0: &CMat, mults: &[CMat], alpha: &Exponent) -> C64 {
    let r = delta0.nrows();
    let mut v = CMat::zeros(r, 1);
    v[(0, 0)] = C64::new(1.0, 0.0);
    for (i, &k) in alpha.parts().iter().enumerate() {
        for _ in 0..k {
            v = &mults[i] * v;
        }
    }
    (delta0.row(0) * v)[(0, 0)]
}

/// The functional with every moment of degree at most `degree` that is not
/// yet assigned filled in from the flat extension determined by `basis`.
pub fn flat_extension(l: &DualForm, basis: &MonomialBasis, degree: u32) -> Result<DualForm> {
    let fam = numeric_family(l, basis)?;
    let mults: Vec<CMat> = multiplication_matrices(&fam[0], &fam[1..])?.into_iter().map(|m| m.matrix).collect();
    let fill: Vec<(Exponent, C64)> = Exponent::all_up_to(l.n_vars(), degree)
        .into_iter()
        .filter(|e| l.get(e).is_none())
        .map(|e| {
            let v = extended_moment(&fam[0], &mults, &e);
            (e, v)
        })
        .collect();
    Ok(l.with_assignment(fill.iter().map(|(e, v)| (e, v))))
}
