use serde::Serialize;

use super::compose::compose;
use super::crystal::{bogoliubov_uv, contraction_deviation};
use super::field::FieldVector;
use super::grid::{build_grids, GridSpec};
use super::moments::{
    composition_residuals, crystal_residuals, numeric_g, purity_residual, seeded_moments,
    unseeded_moments, CompositionResiduals, CrystalResiduals, SeededMoments, UnseededMoments,
};
use super::OracleError;
use crate::analytic::{compute_g, Method};
use crate::model::{normalize_angle, DimensionlessParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative tolerance on G0 and |G1|.
    pub g_rel: f64,
    /// Absolute tolerance on gamma1 [rad].
    pub gamma1_abs: f64,
    /// Bound on every identity residual.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            g_rel: 1e-2,
            gamma1_abs: 1e-6,
            residual: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    pub grid: GridSpec,
    pub n_max: usize,
    pub tolerances: Tolerances,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            grid: GridSpec::default(),
            n_max: 10,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub analytic: f64,
    pub numeric: f64,
    pub error: f64,
    pub pass: bool,
}

impl Comparison {
    fn relative(analytic: f64, numeric: f64, tol: f64) -> Self {
        let error = if analytic == numeric {
            0.0
        } else {
            (analytic - numeric).abs() / analytic.abs()
        };
        Comparison {
            analytic,
            numeric,
            error,
            pass: error <= tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    pub crystal1: CrystalResiduals,
    pub crystal2: CrystalResiduals,
    pub composition: CompositionResiduals,
    pub purity: f64,
    /// Per-axis deviation of the squared grid generator from the closed form
    /// of the second order (reported, not a pass criterion).
    pub contraction_h2: f64,
    pub pass: bool,
}

impl Residuals {
    fn max(&self) -> f64 {
        [
            self.crystal1.uu_vv,
            self.crystal1.uv_vu,
            self.crystal2.uu_vv,
            self.crystal2.uv_vu,
            self.composition.a0a0_b0b0,
            self.composition.a0b0_b0a0,
            self.composition.a_hermitian,
            self.composition.b_symmetric,
            self.purity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub params: DimensionlessParams,
    pub config: OracleConfig,
    pub grid_dims: [usize; 3],
    pub grid_half_widths: [f64; 3],
    pub analytic_method: Method,
    pub g0: Comparison,
    pub g1_abs: Comparison,
    pub gamma1: Comparison,
    /// `(G0 - Ns) / (4 |G1|)` of the contractions; 1 for the thin-crystal algebra.
    pub excess_over_4g1: Option<f64>,
    pub seeded: SeededMoments,
    pub unseeded: UnseededMoments,
    pub residuals: Residuals,
    pub pass: bool,
}

/// Builds both crystals on one grid, contracts, and compares with the series.
pub fn run_oracle(params: &DimensionlessParams, config: &OracleConfig) -> Result<OracleReport, OracleError> {
    let p = params.validate()?;
    let tol = config.tolerances;
    let grids = build_grids(&config.grid, &p)?;
    let seed = FieldVector::seed(&grids, p.n_seed)?;
    let c1 = bogoliubov_uv(p.xi, p.pump_phase_1, config.n_max, &grids)?;
    let c2 = bogoliubov_uv(p.xi, p.pump_phase_2, config.n_max, &grids)?;
    let composed = compose(&c1, &c2, p.phi0, p.phi_delta)?;

    let numeric = numeric_g(&seed, &c1, &c2)?;
    let analytic = compute_g(&p)?;

    let g0 = Comparison::relative(analytic.g0, numeric.g0, tol.g_rel);
    let g1_abs = Comparison::relative(analytic.g1_abs, numeric.g1_abs, tol.g_rel);
    let gamma1 = if analytic.g1_abs == 0.0 && numeric.g1_abs == 0.0 {
        // No fringe, no phase to compare.
        Comparison {
            analytic: analytic.gamma1,
            numeric: numeric.gamma1,
            error: 0.0,
            pass: true,
        }
    } else {
        let error = normalize_angle(analytic.gamma1 - numeric.gamma1).abs();
        Comparison {
            analytic: analytic.gamma1,
            numeric: numeric.gamma1,
            error,
            pass: error <= tol.gamma1_abs,
        }
    };

    let mut residuals = Residuals {
        crystal1: crystal_residuals(&c1)?,
        crystal2: crystal_residuals(&c2)?,
        composition: composition_residuals(&composed)?,
        purity: purity_residual(&composed)?,
        contraction_h2: contraction_deviation(2, &grids)?,
        pass: false,
    };
    residuals.pass = residuals.max() <= tol.residual;

    let pass = g0.pass && g1_abs.pass && gamma1.pass && residuals.pass;
    Ok(OracleReport {
        params: p,
        config: *config,
        grid_dims: grids.dims(),
        grid_half_widths: [0, 1, 2].map(|k| grids.axes[k].half_width()),
        analytic_method: analytic.method,
        g0,
        g1_abs,
        gamma1,
        excess_over_4g1: (numeric.g1_abs > 0.0).then(|| (numeric.g0 - p.n_seed) / (4.0 * numeric.g1_abs)),
        seeded: seeded_moments(&seed, &c1, &c2, &numeric, p.phi0, p.phi_delta)?,
        unseeded: unseeded_moments(&composed)?,
        residuals,
        pass,
    })
}
