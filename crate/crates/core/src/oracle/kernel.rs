use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::field::{FieldTerm, FieldVector};
use super::grid::GridSet;
use super::OracleError;

/// Largest total grid size for which dense forms are built.
pub const DENSE_LIMIT: usize = 12 * 12 * 12;

const EPS: f64 = f64::EPSILON;

/// One rank-1 term `coeff * F_x (x) F_y (x) F_omega`.
///
/// Terms that are powers of the grid generator carry `power`; their factors
/// are the shared cached matrices and equal powers merge exactly. All factors
/// are real, so conjugation acts on `coeff` alone.
#[derive(Debug, Clone)]
pub struct Term {
    pub coeff: Complex64,
    /// Running bound on the accumulated rounding error in `coeff`.
    pub err: f64,
    pub power: Option<usize>,
    pub factors: Arc<Vec<Arc<DMatrix<f64>>>>,
}

#[derive(Debug, Clone)]
pub struct SeparableKernel {
    grids: Arc<GridSet>,
    terms: Vec<Term>,
}

impl SeparableKernel {
    pub fn zero(grids: &Arc<GridSet>) -> Self {
        SeparableKernel {
            grids: grids.clone(),
            terms: Vec::new(),
        }
    }

    pub fn identity(grids: &Arc<GridSet>) -> Self {
        Self::power(grids, 0, Complex64::new(1.0, 0.0))
    }

    /// `coeff * P^m` with `P` the grid generator.
    pub fn power(grids: &Arc<GridSet>, m: usize, coeff: Complex64) -> Self {
        SeparableKernel {
            grids: grids.clone(),
            terms: vec![Term {
                coeff,
                err: 0.0,
                power: Some(m),
                factors: grids.power(m),
            }],
        }
        .canonicalize()
    }

    /// A general rank-1 kernel; factors must match the axis sizes.
    pub fn from_factors(
        grids: &Arc<GridSet>,
        coeff: Complex64,
        factors: Vec<DMatrix<f64>>,
    ) -> Result<Self, OracleError> {
        let dims = grids.dims();
        if factors.len() != 3 || factors.iter().zip(dims).any(|(f, n)| f.shape() != (n, n)) {
            return Err(OracleError::InvalidGrid("factor shapes do not match the grids".into()));
        }
        Ok(SeparableKernel {
            grids: grids.clone(),
            terms: vec![Term {
                coeff,
                err: 0.0,
                power: None,
                factors: Arc::new(factors.into_iter().map(Arc::new).collect()),
            }],
        })
    }

    pub fn grids(&self) -> &Arc<GridSet> {
        &self.grids
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    fn check(&self, other: &GridSet) -> Result<(), OracleError> {
        if self.grids.same_as(other) {
            Ok(())
        } else {
            Err(OracleError::GridMismatch)
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let coeff = t.coeff * s;
                Term {
                    coeff,
                    err: s.norm() * t.err + 4.0 * EPS * coeff.norm(),
                    ..t.clone()
                }
            })
            .collect();
        SeparableKernel {
            grids: self.grids.clone(),
            terms,
        }
        .canonicalize()
    }

    pub fn add(&self, other: &Self) -> Result<Self, OracleError> {
        self.check(&other.grids)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(SeparableKernel {
            grids: self.grids.clone(),
            terms,
        }
        .canonicalize())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, OracleError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Diamond contraction `self <> other`: per-axis products, ranks multiply.
    pub fn diamond(&self, other: &Self) -> Result<Self, OracleError> {
        self.check(&other.grids)?;
        let mut terms = Vec::with_capacity(self.rank() * other.rank());
        for a in &self.terms {
            for b in &other.terms {
                let coeff = a.coeff * b.coeff;
                let err = a.coeff.norm() * b.err
                    + b.coeff.norm() * a.err
                    + a.err * b.err
                    + 4.0 * EPS * coeff.norm();
                let (power, factors) = match (a.power, b.power) {
                    (Some(p), Some(q)) => (Some(p + q), self.grids.power(p + q)),
                    _ => (
                        None,
                        Arc::new(
                            a.factors
                                .iter()
                                .zip(b.factors.iter())
                                .map(|(f, g)| Arc::new(f.as_ref() * g.as_ref()))
                                .collect(),
                        ),
                    ),
                };
                terms.push(Term {
                    coeff,
                    err,
                    power,
                    factors,
                });
            }
        }
        Ok(SeparableKernel {
            grids: self.grids.clone(),
            terms,
        }
        .canonicalize())
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff = t.coeff.conj();
        }
        out
    }

    /// Generator powers are symmetric, so only general terms change.
    pub fn transpose(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            if t.power.is_none() {
                t.factors = Arc::new(t.factors.iter().map(|f| Arc::new(f.transpose())).collect());
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    /// Merges equal generator powers and drops coefficients that are zero
    /// within their rounding bound. General terms are kept as they are.
    pub fn canonicalize(self) -> Self {
        let mut merged: BTreeMap<usize, (Complex64, f64, f64, usize)> = BTreeMap::new();
        let mut general = Vec::new();
        for t in self.terms {
            match t.power {
                Some(m) => {
                    let e = merged.entry(m).or_insert((Complex64::new(0.0, 0.0), 0.0, 0.0, 0));
                    e.0 += t.coeff;
                    e.1 += t.err;
                    e.2 += t.coeff.norm();
                    e.3 += 1;
                }
                None if t.coeff != Complex64::new(0.0, 0.0) => general.push(t),
                None => {}
            }
        }
        let mut terms: Vec<Term> = merged
            .into_iter()
            .filter_map(|(m, (coeff, err, mag, count))| {
                let err = err + count as f64 * EPS * mag;
                (coeff.norm() > err).then(|| Term {
                    coeff,
                    err,
                    power: Some(m),
                    factors: self.grids.power(m),
                })
            })
            .collect();
        terms.extend(general);
        SeparableKernel {
            grids: self.grids,
            terms,
        }
    }

    /// Coefficients by generator power when every term is a power.
    pub fn polynomial(&self) -> Option<BTreeMap<usize, Complex64>> {
        let mut out = BTreeMap::new();
        for t in &self.terms {
            *out.entry(t.power?).or_insert(Complex64::new(0.0, 0.0)) += t.coeff;
        }
        Some(out)
    }

    /// Hilbert-Schmidt inner product `tr(self^dagger other)` on the grid.
    pub fn hs_inner(&self, other: &Self) -> Result<Complex64, OracleError> {
        self.check(&other.grids)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                let overlap: f64 = a
                    .factors
                    .iter()
                    .zip(b.factors.iter())
                    .map(|(f, g)| f.dot(g))
                    .product();
                acc += a.coeff.conj() * b.coeff * overlap;
            }
        }
        Ok(acc)
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_inner(self).expect("same grids").re.max(0.0).sqrt()
    }

    /// HS norm relative to that of the identity on the same grids.
    pub fn relative_hs_norm(&self) -> f64 {
        self.hs_norm() / (self.grids.total_points() as f64).sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coeff * t.factors.iter().map(|f| f.trace()).product::<f64>())
            .sum()
    }

    /// Contraction `self <> f`.
    pub fn apply(&self, f: &FieldVector) -> Result<FieldVector, OracleError> {
        self.check(f.grids())?;
        let mut terms = Vec::with_capacity(self.rank() * f.terms().len());
        for t in &self.terms {
            for v in f.terms() {
                terms.push(FieldTerm {
                    amp: t.coeff * v.amp,
                    factors: t
                        .factors
                        .iter()
                        .zip(&v.factors)
                        .map(|(m, x)| Arc::new(m.as_ref() * x.as_ref()))
                        .collect(),
                });
            }
        }
        Ok(FieldVector::from_terms(f.grids(), terms))
    }

    /// Dense matrix over the product grid, axis 0 slowest.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>, OracleError> {
        let dim = self.grids.total_points();
        if dim > DENSE_LIMIT {
            return Err(OracleError::DenseTooLarge { dim, limit: DENSE_LIMIT });
        }
        let mut out = DMatrix::<Complex64>::zeros(dim, dim);
        for t in &self.terms {
            let k = t.factors[0].kronecker(&t.factors[1]).kronecker(t.factors[2].as_ref());
            out += k.map(|x| t.coeff * x);
        }
        Ok(out)
    }
}

/// Dense vector of a separable field, same ordering as [`SeparableKernel::to_dense`].
pub(super) fn dense_field(terms: &[FieldTerm], dim: usize) -> DVector<Complex64> {
    let mut out = DVector::<Complex64>::zeros(dim);
    for t in terms {
        let v = t.factors[0].kronecker(&t.factors[1]).kronecker(t.factors[2].as_ref());
        out += v.map(|x| t.amp * x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DimensionlessParams;
    use crate::oracle::grid::{build_grids, GridSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small_grids() -> Arc<GridSet> {
        let p = DimensionlessParams::new(0.25, 1.0, 0.5, 1.0).unwrap();
        build_grids(&GridSpec { n_points: 8, extent: 4.0 }, &p).unwrap()
    }

    fn general(grids: &Arc<GridSet>, seed: u64) -> SeparableKernel {
        // Deterministic non-symmetric factors.
        let f = |n: usize, k: u64| {
            DMatrix::from_fn(n, n, |i, j| (((i * 7 + j * 3) as u64 + k) % 11) as f64 / 11.0 - 0.4)
        };
        let dims = grids.dims();
        let a = SeparableKernel::from_factors(grids, c(0.3, -0.7), vec![f(dims[0], seed), f(dims[1], seed + 1), f(dims[2], seed + 2)]).unwrap();
        let b = SeparableKernel::from_factors(grids, c(-1.1, 0.2), vec![f(dims[0], seed + 5), f(dims[1], seed + 3), f(dims[2], seed + 4)]).unwrap();
        a.add(&b).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let g = small_grids();
        let k = general(&g, 1);
        let one = SeparableKernel::identity(&g);
        let left = one.diamond(&k).unwrap().to_dense().unwrap();
        let right = k.diamond(&one).unwrap().to_dense().unwrap();
        let dense = k.to_dense().unwrap();
        assert!((left - &dense).norm() < 1e-12 * dense.norm());
        assert!((right - &dense).norm() < 1e-12 * dense.norm());
    }

    #[test]
    fn adjoint_reverses_products() {
        let g = small_grids();
        let k1 = general(&g, 1);
        let k2 = general(&g, 9);
        let lhs = k1.diamond(&k2).unwrap().adjoint().to_dense().unwrap();
        let rhs = k2.adjoint().diamond(&k1.adjoint()).unwrap().to_dense().unwrap();
        assert!((&lhs - rhs).norm() < 1e-12 * lhs.norm());
        let t = k1.transpose().to_dense().unwrap();
        assert!((t - k1.to_dense().unwrap().transpose()).norm() < 1e-14);
    }

    #[test]
    fn dense_product_matches_separable() {
        let g = small_grids();
        let k1 = general(&g, 2);
        let k2 = general(&g, 4).add(&SeparableKernel::power(&g, 3, c(0.5, 0.5))).unwrap();
        let sep = k1.diamond(&k2).unwrap().to_dense().unwrap();
        let dense = k1.to_dense().unwrap() * k2.to_dense().unwrap();
        assert!((&sep - &dense).norm() < 1e-12 * dense.norm());
        // HS norm and trace agree with their dense versions.
        let d1 = k1.to_dense().unwrap();
        assert!((k1.hs_norm() - d1.norm()).abs() < 1e-12 * d1.norm());
        assert!((k1.trace() - d1.trace()).norm() < 1e-12);
    }

    #[test]
    fn powers_merge_and_cancel() {
        let g = small_grids();
        let a = SeparableKernel::power(&g, 2, c(1.0, 0.0));
        let b = SeparableKernel::power(&g, 1, c(1.0, 0.0)).diamond(&SeparableKernel::power(&g, 1, c(1.0, 0.0))).unwrap();
        assert_eq!(b.rank(), 1);
        assert_eq!(b.terms()[0].power, Some(2));
        let diff = b.sub(&a).unwrap();
        assert_eq!(diff.rank(), 0);
        // Genuine differences survive.
        let third = SeparableKernel::power(&g, 2, c(1.0 / 3.0, 0.0));
        let s = third.add(&third).unwrap().add(&third).unwrap().sub(&a).unwrap();
        assert_eq!(s.rank(), 0, "1/3 + 1/3 + 1/3 - 1 is rounding only");
        let tiny = a.scale(c(1e-40, 0.0)).add(&a).unwrap().sub(&a).unwrap();
        assert_eq!(tiny.rank(), 0, "below the rounding level of a");
        let kept = a.scale(c(1e-40, 0.0));
        assert_eq!(kept.rank(), 1);
        assert!(kept.hs_norm() > 0.0);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let g1 = small_grids();
        let p = DimensionlessParams::new(0.25, 0.5, 0.5, 1.0).unwrap();
        let g2 = build_grids(&GridSpec { n_points: 8, extent: 4.0 }, &p).unwrap();
        let a = SeparableKernel::identity(&g1);
        let b = SeparableKernel::identity(&g2);
        assert_eq!(a.diamond(&b).unwrap_err(), OracleError::GridMismatch);
    }

    #[test]
    fn dense_limit_enforced() {
        let p = DimensionlessParams::new(0.25, 1.0, 1.0, 1.0).unwrap();
        let g = build_grids(&GridSpec { n_points: 13, extent: 4.0 }, &p).unwrap();
        assert!(matches!(
            SeparableKernel::identity(&g).to_dense(),
            Err(OracleError::DenseTooLarge { .. })
        ));
    }
}
