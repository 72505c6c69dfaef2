use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::grid::{closed_form_factor, GridSet};
use super::kernel::SeparableKernel;
use super::OracleError;

/// Closed-form `P_m` sampled on the grids, as a general (untagged) kernel.
///
/// Odd orders are Gaussian in `x + y` (peak on the `omega_1 + omega_2 = omega_p`
/// ridge), even orders in `x - y` (peak on `omega_1 = omega_2`).
pub fn kernel_h(m: usize, grids: &Arc<GridSet>) -> Result<SeparableKernel, OracleError> {
    if m == 0 {
        return Err(OracleError::InvalidOrder(0));
    }
    let factors = grids.axes.iter().map(|a| closed_form_factor(a, m)).collect();
    SeparableKernel::from_factors(grids, Complex64::new(1.0, 0.0), factors)
}

/// Largest per-axis relative deviation between the m-th grid power of the
/// generator and the sampled closed form `P_m`, over the central half of
/// each axis. Rows near the grid edge lose part of every intermediate
/// contraction, so they are excluded.
pub fn contraction_deviation(m: usize, grids: &Arc<GridSet>) -> Result<f64, OracleError> {
    if m == 0 {
        return Err(OracleError::InvalidOrder(0));
    }
    let powers = grids.power(m);
    Ok(grids
        .axes
        .iter()
        .zip(powers.iter())
        .map(|(a, p)| {
            let closed = closed_form_factor(a, m);
            let limit = 0.5 * a.half_width();
            let inner: Vec<usize> = (0..a.len()).filter(|&i| a.points[i].abs() <= limit).collect();
            let (mut num, mut den) = (0.0, 0.0);
            for &i in &inner {
                for &j in &inner {
                    num += (p[(i, j)] - closed[(i, j)]).powi(2);
                    den += closed[(i, j)].powi(2);
                }
            }
            (num / den).sqrt()
        })
        .fold(0.0, f64::max))
}

/// The generator `P = P_1` as a power term.
pub fn generator(grids: &Arc<GridSet>) -> SeparableKernel {
    SeparableKernel::power(grids, 1, Complex64::new(1.0, 0.0))
}

#[derive(Debug, Clone)]
pub struct CrystalKernels {
    pub u: SeparableKernel,
    pub v: SeparableKernel,
    pub n_max: usize,
    pub pump_phase: f64,
    /// Gain `Xi / 2` multiplying the generator.
    pub gain: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrystalSummary {
    pub n_max: usize,
    pub pump_phase: f64,
    pub rank_u: usize,
    pub rank_v: usize,
}

impl CrystalKernels {
    pub fn summary(&self) -> CrystalSummary {
        CrystalSummary {
            n_max: self.n_max,
            pump_phase: self.pump_phase,
            rank_u: self.u.rank(),
            rank_v: self.v.rank(),
        }
    }
}

/// `U = sum_{n=0}^{n_max} g^{2n}/(2n)! P^{2n}` and
/// `V = i e^{i phi_p} sum_{n=1}^{n_max} g^{2n-1}/(2n-1)! P^{2n-1}`, `g = Xi/2`.
pub fn bogoliubov_uv(
    xi: f64,
    pump_phase: f64,
    n_max: usize,
    grids: &Arc<GridSet>,
) -> Result<CrystalKernels, OracleError> {
    if n_max == 0 {
        return Err(OracleError::InvalidOrder(n_max));
    }
    if !(xi.is_finite() && xi >= 0.0) {
        return Err(OracleError::InvalidGrid(format!("squeezing parameter must be >= 0, got {xi}")));
    }
    let g = 0.5 * xi;
    let phase = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, pump_phase);
    let mut u = SeparableKernel::identity(grids);
    let mut v = SeparableKernel::zero(grids);
    let mut weight = 1.0;
    for m in 1..=2 * n_max {
        weight *= g / m as f64;
        let term = SeparableKernel::power(grids, m, Complex64::new(weight, 0.0));
        if m % 2 == 0 {
            u = u.add(&term)?;
        } else {
            v = v.add(&term)?;
        }
    }
    Ok(CrystalKernels {
        u,
        v: v.scale(phase),
        n_max,
        pump_phase,
        gain: g,
    })
}
