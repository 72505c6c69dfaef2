use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use super::grid::{AxisGrid, AxisKind, GridSet};
use super::kernel::dense_field;
use super::OracleError;

/// One rank-1 field term `amp * f_x (x) f_y (x) f_omega` in weighted form.
#[derive(Debug, Clone)]
pub struct FieldTerm {
    pub amp: Complex64,
    pub factors: Vec<Arc<DVector<f64>>>,
}

/// A discretized parameter function as a sum of rank-1 terms.
#[derive(Debug, Clone)]
pub struct FieldVector {
    grids: Arc<GridSet>,
    terms: Vec<FieldTerm>,
}

/// Seed profile `c exp(-r x^2 / 4)` with `c` normalizing under `dx/(2 pi)`.
fn seed_factor(axis: &AxisGrid) -> DVector<f64> {
    match axis.kind {
        AxisKind::Point => DVector::from_element(1, 1.0),
        AxisKind::Gaussian { ratio } => {
            let c = (2.0 * PI / (2.0 * PI / ratio).sqrt()).sqrt();
            DVector::from_iterator(
                axis.len(),
                axis.points
                    .iter()
                    .zip(&axis.weights)
                    .map(|(&x, &w)| w.sqrt() * c * (-ratio * x * x / 4.0).exp()),
            )
        }
    }
}

impl FieldVector {
    pub fn from_terms(grids: &Arc<GridSet>, terms: Vec<FieldTerm>) -> Self {
        FieldVector {
            grids: grids.clone(),
            terms,
        }
    }

    pub fn zero(grids: &Arc<GridSet>) -> Self {
        Self::from_terms(grids, Vec::new())
    }

    /// Gaussian seed with the continuum normalization `||xi||^2 = n_seed`;
    /// the grid norm differs only by the quadrature error.
    pub fn analytic_seed(grids: &Arc<GridSet>, n_seed: f64) -> Self {
        let factors = grids.axes.iter().map(|a| Arc::new(seed_factor(a))).collect();
        Self::from_terms(
            grids,
            vec![FieldTerm {
                amp: Complex64::new(n_seed.sqrt(), 0.0),
                factors,
            }],
        )
    }

    /// Gaussian seed normalized on the grid so that `||xi||^2 = n_seed` exactly.
    pub fn seed(grids: &Arc<GridSet>, n_seed: f64) -> Result<Self, OracleError> {
        if !(n_seed.is_finite() && n_seed > 0.0) {
            return Err(OracleError::InvalidGrid(format!("seed photon number must be > 0, got {n_seed}")));
        }
        let factors: Vec<_> = grids
            .axes
            .iter()
            .map(|a| {
                let f = seed_factor(a);
                let n = f.norm();
                Arc::new(f / n)
            })
            .collect();
        Ok(Self::from_terms(
            grids,
            vec![FieldTerm {
                amp: Complex64::new(n_seed.sqrt(), 0.0),
                factors,
            }],
        ))
    }

    pub fn grids(&self) -> &Arc<GridSet> {
        &self.grids
    }

    pub fn terms(&self) -> &[FieldTerm] {
        &self.terms
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.amp = t.amp.conj();
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.amp *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, OracleError> {
        if !self.grids.same_as(&other.grids) {
            return Err(OracleError::GridMismatch);
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self::from_terms(&self.grids, terms))
    }

    /// `<self, other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64, OracleError> {
        if !self.grids.same_as(&other.grids) {
            return Err(OracleError::GridMismatch);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                let overlap: f64 = a.factors.iter().zip(&b.factors).map(|(x, y)| x.dot(y)).product();
                acc += a.amp.conj() * b.amp * overlap;
            }
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).expect("same grids").re
    }

    pub fn to_dense(&self) -> DVector<Complex64> {
        dense_field(&self.terms, self.grids.total_points())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DimensionlessParams;
    use crate::oracle::grid::{build_grids, GridSpec};
    use crate::oracle::kernel::SeparableKernel;

    fn grids(n: usize, extent: f64, nu: f64, mu: f64) -> Arc<GridSet> {
        let p = DimensionlessParams::new(0.5, nu, mu, 1.0).unwrap();
        build_grids(&GridSpec { n_points: n, extent }, &p).unwrap()
    }

    #[test]
    fn analytic_norm_on_grid() {
        let g = grids(48, 5.0, 1.0, 0.5);
        let xi = FieldVector::analytic_seed(&g, 100.0);
        assert!((xi.norm_sq() - 100.0).abs() < 1e-6 * 100.0);
    }

    #[test]
    fn extent_doubling_keeps_norm() {
        // Same spacing, twice the half width.
        let a = FieldVector::analytic_seed(&grids(48, 5.0, 1.0, 1.0), 1.0).norm_sq();
        let b = FieldVector::analytic_seed(&grids(95, 10.0, 1.0, 1.0), 1.0).norm_sq();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn normalized_seed_hits_photon_number() {
        let g = grids(16, 4.0, 0.25, 0.0);
        let xi = FieldVector::seed(&g, 37.0).unwrap();
        assert!((xi.norm_sq() - 37.0).abs() < 1e-12);
        assert!(FieldVector::seed(&g, 0.0).is_err());
    }

    #[test]
    fn identity_leaves_field_unchanged() {
        let g = grids(12, 4.0, 1.0, 1.0);
        let xi = FieldVector::seed(&g, 5.0).unwrap();
        let out = SeparableKernel::identity(&g).apply(&xi).unwrap();
        assert!((out.to_dense() - xi.to_dense()).norm() < 1e-12);
    }

    #[test]
    fn dense_inner_matches() {
        let g = grids(8, 4.0, 1.0, 1.0);
        let xi = FieldVector::seed(&g, 2.0).unwrap().scale(Complex64::new(0.6, 0.8));
        let k = SeparableKernel::power(&g, 3, Complex64::new(0.2, -1.0));
        let kx = k.apply(&xi).unwrap();
        let dense = k.to_dense().unwrap() * xi.to_dense();
        assert!((kx.to_dense() - &dense).norm() < 1e-12);
        let ip = xi.inner(&kx).unwrap();
        let dense_ip = xi.to_dense().dotc(&dense);
        assert!((ip - dense_ip).norm() < 1e-12);
        // Conjugation flips the phase of the amplitude only.
        assert!((xi.conj().inner(&xi.conj()).unwrap() - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }
}
