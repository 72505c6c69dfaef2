//! Discretized thin-crystal kernel algebra.
//!
//! Kernels live on a product of three axis grids (two transverse wavevector
//! axes and frequency) and are stored as sums of rank-1 tensor products of
//! per-axis matrices, in the symmetric weighted form `sqrt(w) K sqrt(w)` so
//! that the diamond contraction is a plain matrix product per axis.
//!
//! Coordinates are scaled by the pump: `x = w_p k` transversely and
//! `s = (omega - omega_p/2) / delta_p` in frequency. In these units the
//! single-crystal generator is `P = prod_axes sqrt(pi) exp(-(x + y)^2 / 4)`
//! with measure `dx / (2 pi)` per axis, and its diamond powers form the
//! closed family
//!
//! ```text
//! P_m = prod_axes sqrt(pi/m) exp(-(x -+ y)^2 / (4m))     (- for even m)
//! ```
//!
//! The Bogoliubov kernels of one crystal are `U = cosh(Xi P / 2)` and
//! `V = i exp(i phi_p) sinh(Xi P / 2)`, truncated after `n_max` terms.

mod compose;
mod crystal;
mod field;
mod grid;
mod kernel;
mod moments;
mod report;

pub use compose::{compose, ComposedKernels};
pub use crystal::{bogoliubov_uv, contraction_deviation, generator, kernel_h, CrystalKernels, CrystalSummary};
pub use field::{FieldTerm, FieldVector};
pub use grid::{build_grids, AxisGrid, AxisKind, GridSet, GridSpec, SEED_CUTOFF};
pub use kernel::{SeparableKernel, Term, DENSE_LIMIT};
pub use moments::{
    composition_residuals, crystal_residuals, modulated_displacement, numeric_g, purity_residual,
    seeded_moments, unseeded_moments, CompositionResiduals, CrystalResiduals, NumericG,
    SeededMoments, UnseededMoments, FD_STEP,
};
pub use report::{run_oracle, Comparison, OracleConfig, OracleReport, Residuals, Tolerances};

use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("invalid truncation order n_max = {0} (need >= 1)")]
    InvalidOrder(usize),
    #[error("ill-conditioned inverse: condition estimate {condition:.3e}")]
    IllConditioned { condition: f64 },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("dense form of dimension {dim} exceeds the limit {limit}")]
    DenseTooLarge { dim: usize, limit: usize },
}
