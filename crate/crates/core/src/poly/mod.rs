//! Forms, their apolar duals, and coordinate changes.

mod change;
mod decomposition;
mod dual;
mod exponent;
mod homogeneous;
pub mod text;

pub use change::LinearChange;
pub use decomposition::{chordal_distance, Decomposition, Term};
pub use dual::{DualForm, Moment};
pub use exponent::Exponent;
pub use homogeneous::{expand_power_sum, multinomial, AffinePoly, HomogeneousPoly};
pub(crate) use homogeneous::multinomial_f64;

use crate::error::Result;

/// Moment table of `f` with respect to `distinguished_var` (usually `x0`).
pub fn to_dual(f: &HomogeneousPoly, distinguished_var: usize) -> Result<DualForm> {
    DualForm::from_form(f, distinguished_var)
}

/// `f(A x)`.
pub fn change_coordinates(f: &HomogeneousPoly, change: &LinearChange) -> Result<HomogeneousPoly> {
    f.change_coordinates(change)
}

/// Recovered forms `m_i` of `f(A x)` mapped back to forms of `f`.
pub fn pullback_points(points: &[Vec<crate::linalg::C64>], change: &LinearChange) -> Vec<Vec<crate::linalg::C64>> {
    change.pullback_points(points)
}
