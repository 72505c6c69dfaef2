use num_complex::Complex64;

use super::crystal::CrystalKernels;
use super::kernel::SeparableKernel;
use super::OracleError;

/// Two-crystal kernels with the phase modulation inserted between crystals.
///
/// With `phi1 = phi0 + phi_delta/2` and `phi2 = phi0 - phi_delta/2`:
///
/// ```text
/// A0 = e^{-i phi1} U1 U2 + e^{i phi2} V1 V2*
/// B0 = e^{-i phi1} U1 V2 + e^{i phi2} V1 U2*
/// A  = A0^dagger A0 + B0^T B0*
/// B  = A0^dagger B0 + B0^T A0*
/// ```
///
/// `A1, B1` are the first crystal composed with itself and `B2` the second.
#[derive(Debug, Clone)]
pub struct ComposedKernels {
    pub a0: SeparableKernel,
    pub b0: SeparableKernel,
    pub a1: SeparableKernel,
    pub b1: SeparableKernel,
    pub b2: SeparableKernel,
    pub a: SeparableKernel,
    pub b: SeparableKernel,
    pub phi0: f64,
    pub phi_delta: f64,
}

fn pair(u: &SeparableKernel, v: &SeparableKernel) -> Result<(SeparableKernel, SeparableKernel), OracleError> {
    let a = u.diamond(u)?.add(&v.diamond(&v.conj())?)?;
    let b = u.diamond(v)?.add(&v.diamond(&u.conj())?)?;
    Ok((a, b))
}

/// Modulated chains `(A0, B0)` only, for phase scans.
pub(super) fn modulated_chains(
    c1: &CrystalKernels,
    c2: &CrystalKernels,
    phi0: f64,
    phi_delta: f64,
) -> Result<(SeparableKernel, SeparableKernel), OracleError> {
    let e1 = Complex64::from_polar(1.0, -(phi0 + 0.5 * phi_delta));
    let e2 = Complex64::from_polar(1.0, phi0 - 0.5 * phi_delta);
    let a0 = c1
        .u
        .diamond(&c2.u)?
        .scale(e1)
        .add(&c1.v.diamond(&c2.v.conj())?.scale(e2))?;
    let b0 = c1
        .u
        .diamond(&c2.v)?
        .scale(e1)
        .add(&c1.v.diamond(&c2.u.conj())?.scale(e2))?;
    Ok((a0, b0))
}

pub fn compose(
    c1: &CrystalKernels,
    c2: &CrystalKernels,
    phi0: f64,
    phi_delta: f64,
) -> Result<ComposedKernels, OracleError> {
    let (a0, b0) = modulated_chains(c1, c2, phi0, phi_delta)?;
    let (a1, b1) = pair(&c1.u, &c1.v)?;
    let (_, b2) = pair(&c2.u, &c2.v)?;
    let a0d = a0.adjoint();
    let b0t = b0.transpose();
    let a = a0d.diamond(&a0)?.add(&b0t.diamond(&b0.conj())?)?;
    let b = a0d.diamond(&b0)?.add(&b0t.diamond(&a0.conj())?)?;
    Ok(ComposedKernels {
        a0,
        b0,
        a1,
        b1,
        b2,
        a,
        b,
        phi0,
        phi_delta,
    })
}
