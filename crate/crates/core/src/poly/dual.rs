use std::collections::BTreeMap;

use super::homogeneous::multinomial_f64;
use super::{Exponent, HomogeneousPoly};
use crate::error::{Error, Result};
use crate::linalg::C64;

/// The linear functional `Λ` on affine polynomials induced by a form under
/// apolarity: `Λ(x^β) = c_β` for `|β| <= d`, plus any higher moments that
/// an extension has assigned.
#[derive(Clone, Debug, PartialEq)]
pub struct DualForm {
    n_vars: usize,
    degree_known: u32,
    moments: BTreeMap<Exponent, C64>,
    assigned: BTreeMap<Exponent, C64>,
}

/// Value of a moment slot: a known scalar or the unknown `h_α`.
#[derive(Clone, Debug, PartialEq)]
pub enum Moment {
    Known(C64),
    Unknown(Exponent),
}

impl DualForm {
    /// Moment table of `f` with `distinguished_var` playing the role of `x_0`:
    /// `c_β = a_{(d-|β|, β)} / multinomial`.
    pub fn from_form(f: &HomogeneousPoly, distinguished_var: usize) -> Result<Self> {
        if distinguished_var >= f.n_vars() {
            return Err(Error::InvalidInput(format!(
                "distinguished variable {distinguished_var} out of range for {} variables",
                f.n_vars()
            )));
        }
        let n = f.n_vars() - 1;
        let d = f.degree();
        let moments = Exponent::all_up_to(n, d)
            .into_iter()
            .map(|beta| {
                let mut parts = beta.parts().to_vec();
                parts.insert(distinguished_var, d - beta.degree());
                let alpha = Exponent::new(parts);
                let c = f.coeff(&alpha) / multinomial_f64(&alpha);
                (beta, c)
            })
            .collect();
        Ok(DualForm { n_vars: n, degree_known: d, moments, assigned: BTreeMap::new() })
    }

    /// Builds the moments of `sum_j w_j 1_{ζ_j}` up to degree `d`.
    pub fn from_points(points: &[Vec<C64>], weights: &[C64], d: u32) -> Result<Self> {
        let n = points.first().map(|p| p.len()).unwrap_or(0);
        if points.len() != weights.len() || points.iter().any(|p| p.len() != n) {
            return Err(Error::InvalidInput("points and weights must agree in shape".into()));
        }
        let moments = Exponent::all_up_to(n, d)
            .into_iter()
            .map(|e| {
                let v = points.iter().zip(weights).map(|(p, w)| w * e.eval(p)).sum();
                (e, v)
            })
            .collect();
        Ok(DualForm { n_vars: n, degree_known: d, moments, assigned: BTreeMap::new() })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn degree_known(&self) -> u32 {
        self.degree_known
    }

    pub fn moments(&self) -> &BTreeMap<Exponent, C64> {
        &self.moments
    }

    pub fn assigned(&self) -> &BTreeMap<Exponent, C64> {
        &self.assigned
    }

    pub fn get(&self, e: &Exponent) -> Option<C64> {
        if e.degree() <= self.degree_known {
            Some(self.moments.get(e).copied().unwrap_or_default())
        } else {
            self.assigned.get(e).copied()
        }
    }

    pub fn moment(&self, e: &Exponent) -> Moment {
        match self.get(e) {
            Some(v) => Moment::Known(v),
            None => Moment::Unknown(e.clone()),
        }
    }

    /// A copy with additional high-degree moments fixed.
    pub fn with_assignment<'a>(&self, values: impl IntoIterator<Item = (&'a Exponent, &'a C64)>) -> DualForm {
        let mut out = self.clone();
        for (e, v) in values {
            if e.degree() > self.degree_known {
                out.assigned.insert(e.clone(), *v);
            }
        }
        out
    }

    /// Rescales `x_i -> s x_i` and the whole functional by `t`:
    /// `c'_α = t c_α s^{|α|}`.
    pub fn rescaled(&self, s: f64, t: f64) -> DualForm {
        let map = |m: &BTreeMap<Exponent, C64>| {
            m.iter().map(|(e, c)| (e.clone(), c * t * s.powi(e.degree() as i32))).collect()
        };
        DualForm {
            n_vars: self.n_vars,
            degree_known: self.degree_known,
            moments: map(&self.moments),
            assigned: map(&self.assigned),
        }
    }

    /// Largest absolute known moment of each degree `0..=d`.
    pub fn degree_profile(&self) -> Vec<f64> {
        let mut prof = vec![0.0; self.degree_known as usize + 1];
        for (e, c) in &self.moments {
            let k = e.degree() as usize;
            prof[k] = f64::max(prof[k], c.norm());
        }
        prof
    }

    /// Re-weights the moments into the homogeneous form they came from,
    /// with the distinguished variable placed first.
    pub fn to_form(&self) -> Result<HomogeneousPoly> {
        let d = self.degree_known;
        HomogeneousPoly::new(
            self.n_vars + 1,
            d,
            self.moments.iter().map(|(beta, c)| {
                let alpha = beta.homogenize(d);
                let w = multinomial_f64(&alpha);
                (alpha, c * w)
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn point_moments() {
        let l = DualForm::from_points(&[vec![re(2.0)]], &[re(3.0)], 3).unwrap();
        assert_eq!(l.get(&Exponent::new(vec![2])), Some(re(12.0)));
        assert_eq!(l.get(&Exponent::new(vec![4])), None);
        assert_eq!(l.moment(&Exponent::new(vec![4])), Moment::Unknown(Exponent::new(vec![4])));
    }

    #[test]
    fn distinguished_variable_choice() {
        let f = HomogeneousPoly::new(
            2,
            2,
            [(Exponent::new(vec![2, 0]), re(1.0)), (Exponent::new(vec![1, 1]), re(4.0))],
        )
        .unwrap();
        let l0 = DualForm::from_form(&f, 0).unwrap();
        assert_eq!(l0.get(&Exponent::new(vec![0])), Some(re(1.0)));
        assert_eq!(l0.get(&Exponent::new(vec![1])), Some(re(2.0)));
        let l1 = DualForm::from_form(&f, 1).unwrap();
        assert_eq!(l1.get(&Exponent::new(vec![2])), Some(re(1.0)));
        assert_eq!(l1.get(&Exponent::new(vec![0])), Some(re(0.0)));
        assert!(DualForm::from_form(&f, 2).is_err());
    }
}
