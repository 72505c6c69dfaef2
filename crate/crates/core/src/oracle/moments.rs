use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::Serialize;

use super::compose::{modulated_chains, ComposedKernels};
use super::crystal::CrystalKernels;
use super::field::FieldVector;
use super::kernel::SeparableKernel;
use super::OracleError;

/// Central-difference step for the fringe slope.
pub const FD_STEP: f64 = 1e-4;

/// Relative cutoff on `|A*|` eigenvalues in the purity check.
const PURITY_CUTOFF: f64 = 1e-10;

/// `eta1 = A0^dagger xi` and `eta2 = B0^T xi*`, one register per beam.
pub fn modulated_displacement(
    seed: &FieldVector,
    composed: &ComposedKernels,
) -> Result<(FieldVector, FieldVector), OracleError> {
    displacement(seed, &composed.a0, &composed.b0)
}

fn displacement(
    seed: &FieldVector,
    a0: &SeparableKernel,
    b0: &SeparableKernel,
) -> Result<(FieldVector, FieldVector), OracleError> {
    Ok((a0.adjoint().apply(seed)?, b0.transpose().apply(&seed.conj())?))
}

fn mean_photons(
    seed: &FieldVector,
    c1: &CrystalKernels,
    c2: &CrystalKernels,
    phi0: f64,
    phi_delta: f64,
) -> Result<f64, OracleError> {
    let (a0, b0) = modulated_chains(c1, c2, phi0, phi_delta)?;
    let (eta1, eta2) = displacement(seed, &a0, &b0)?;
    Ok(eta1.norm_sq() + eta2.norm_sq())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericG {
    pub g0: f64,
    pub g1_re: f64,
    pub g1_im: f64,
    pub g1_abs: f64,
    pub gamma1: f64,
}

impl NumericG {
    pub fn g1(&self) -> Complex64 {
        Complex64::new(self.g1_re, self.g1_im)
    }
}

/// `G0 = <xi, (A1 A1 + B1 B1*) xi>` and `G1 = <xi, U1 B2 V1* xi>`.
pub fn numeric_g(
    seed: &FieldVector,
    c1: &CrystalKernels,
    c2: &CrystalKernels,
) -> Result<NumericG, OracleError> {
    let a1 = c1.u.diamond(&c1.u)?.add(&c1.v.diamond(&c1.v.conj())?)?;
    let b1 = c1.u.diamond(&c1.v)?.add(&c1.v.diamond(&c1.u.conj())?)?;
    let b2 = c2.u.diamond(&c2.v)?.add(&c2.v.diamond(&c2.u.conj())?)?;
    let k0 = a1.diamond(&a1)?.add(&b1.diamond(&b1.conj())?)?;
    let k1 = c1.u.diamond(&b2)?.diamond(&c1.v.conj())?;
    let g0 = seed.inner(&k0.apply(seed)?)?.re;
    let g1 = seed.inner(&k1.apply(seed)?)?;
    Ok(NumericG {
        g0,
        g1_re: g1.re,
        g1_im: g1.im,
        g1_abs: g1.norm(),
        gamma1: if g1.norm() > 0.0 { g1.arg() } else { 0.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeededMoments {
    pub mean: f64,
    pub variance: f64,
    /// `-4 |G1| sin(2 phi0 - gamma1)` from the contraction values.
    pub slope_analytic: f64,
    /// Central difference of the mean in `phi0`.
    pub slope_fd: f64,
}

/// First and second moments of the seeded output, background dropped.
pub fn seeded_moments(
    seed: &FieldVector,
    c1: &CrystalKernels,
    c2: &CrystalKernels,
    g: &NumericG,
    phi0: f64,
    phi_delta: f64,
) -> Result<SeededMoments, OracleError> {
    let mean = mean_photons(seed, c1, c2, phi0, phi_delta)?;
    let up = mean_photons(seed, c1, c2, phi0 + FD_STEP, phi_delta)?;
    let down = mean_photons(seed, c1, c2, phi0 - FD_STEP, phi_delta)?;
    Ok(SeededMoments {
        mean,
        variance: phi0.cos().powi(2) * seed.norm_sq() + phi0.sin().powi(2) * g.g0,
        slope_analytic: -4.0 * g.g1_abs * (2.0 * phi0 - g.gamma1).sin(),
        slope_fd: (up - down) / (2.0 * FD_STEP),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnseededMoments {
    pub mean: f64,
    pub variance: f64,
}

/// `<n> = tr(A - 1)/2` and `sigma^2 = tr(A A - 1)/2` on the grid.
///
/// Even-order terms are translation invariant, so both traces grow with
/// the grid extent; they are grid-dependent quantities.
pub fn unseeded_moments(composed: &ComposedKernels) -> Result<UnseededMoments, OracleError> {
    let one = SeparableKernel::identity(composed.a.grids());
    let mean = 0.5 * composed.a.sub(&one)?.trace().re;
    let variance = 0.5 * composed.a.diamond(&composed.a)?.sub(&one)?.trace().re;
    Ok(UnseededMoments { mean, variance })
}

/// Joint eigenvalues of the generator over the product grid.
fn generator_spectrum(kernel: &SeparableKernel) -> Vec<f64> {
    let g = kernel.grids().power(1);
    let per_axis: Vec<Vec<f64>> = g
        .iter()
        .map(|m| SymmetricEigen::new(m.as_ref().clone()).eigenvalues.iter().copied().collect())
        .collect();
    let mut out = Vec::with_capacity(kernel.grids().total_points());
    for &x in &per_axis[0] {
        for &y in &per_axis[1] {
            for &w in &per_axis[2] {
                out.push(x * y * w);
            }
        }
    }
    out
}

fn eval_poly(coeffs: &[(usize, Complex64)], lambda: f64) -> Complex64 {
    coeffs.iter().map(|&(m, c)| c * lambda.powi(m as i32)).sum()
}

/// `||A (A - B (A*)^{-1} B*) - 1||`, relative to the identity.
///
/// Every composed kernel is a polynomial in the generator, so the inverse is
/// taken mode by mode in its eigenbasis.
pub fn purity_residual(composed: &ComposedKernels) -> Result<f64, OracleError> {
    const UNSUPPORTED: &str = "purity check needs kernels built from generator powers";
    let a: Vec<_> = composed.a.polynomial().ok_or(OracleError::Unsupported(UNSUPPORTED))?.into_iter().collect();
    let b: Vec<_> = composed.b.polynomial().ok_or(OracleError::Unsupported(UNSUPPORTED))?.into_iter().collect();
    let spectrum = generator_spectrum(&composed.a);
    let values: Vec<(Complex64, Complex64)> = spectrum.iter().map(|&l| (eval_poly(&a, l), eval_poly(&b, l))).collect();
    // A* has the conjugate coefficients; the eigenvalues are real.
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), (av, _)| (lo.min(av.norm()), hi.max(av.norm())));
    if lo <= PURITY_CUTOFF * hi {
        return Err(OracleError::IllConditioned { condition: hi / lo });
    }
    let sum: f64 = values
        .iter()
        .map(|&(av, bv)| (av * (av - bv * bv.conj() / av.conj()) - 1.0).norm_sqr())
        .sum();
    Ok((sum / spectrum.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrystalResiduals {
    /// `||U U - V V* - 1||`
    pub uu_vv: f64,
    /// `||U V - V U*||`
    pub uv_vu: f64,
}

pub fn crystal_residuals(c: &CrystalKernels) -> Result<CrystalResiduals, OracleError> {
    let one = SeparableKernel::identity(c.u.grids());
    let r1 = c.u.diamond(&c.u)?.sub(&c.v.diamond(&c.v.conj())?)?.sub(&one)?;
    let r2 = c.u.diamond(&c.v)?.sub(&c.v.diamond(&c.u.conj())?)?;
    Ok(CrystalResiduals {
        uu_vv: r1.relative_hs_norm(),
        uv_vu: r2.relative_hs_norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompositionResiduals {
    /// `||A0^dagger A0 - B0^T B0* - 1||`
    pub a0a0_b0b0: f64,
    /// `||A0^dagger B0 - B0^T A0*||`
    pub a0b0_b0a0: f64,
    pub a_hermitian: f64,
    pub b_symmetric: f64,
}

pub fn composition_residuals(k: &ComposedKernels) -> Result<CompositionResiduals, OracleError> {
    let one = SeparableKernel::identity(k.a0.grids());
    let a0d = k.a0.adjoint();
    let b0t = k.b0.transpose();
    let r1 = a0d.diamond(&k.a0)?.sub(&b0t.diamond(&k.b0.conj())?)?.sub(&one)?;
    let r2 = a0d.diamond(&k.b0)?.sub(&b0t.diamond(&k.a0.conj())?)?;
    Ok(CompositionResiduals {
        a0a0_b0b0: r1.relative_hs_norm(),
        a0b0_b0a0: r2.relative_hs_norm(),
        a_hermitian: k.a.sub(&k.a.adjoint())?.relative_hs_norm(),
        b_symmetric: k.b.sub(&k.b.transpose())?.relative_hs_norm(),
    })
}
