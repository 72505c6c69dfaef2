//! Phase sensitivity of the seeded SU(1,1) interferometer in all spatiotemporal
//! degrees of freedom.
//!
//! - [`model`]: laboratory and dimensionless parameters.
//! - [`special`]: gain series, 1F2 and Gauss-Hermite primitives.
//! - [`analytic`]: G0, |G1|, phase sensitivity, Mach-Zehnder baseline, SQL crossings.
//! - [`oracle`]: discretized thin-crystal Bogoliubov kernels as an independent check.
//! - [`cli`]: sweep, crossing, figure, curve and oracle commands.

pub mod model;
pub mod special;
pub mod analytic;
pub mod oracle;
pub mod cli;
