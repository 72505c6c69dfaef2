//! Analytic phase sensitivity of the seeded interferometer.
//!
//! With `G0` and `|G1|` from the gain series the common-phase sensitivity is
//!
//! ```text
//! dphi0^2 = [cos^2(phi0) Ns + sin^2(phi0) G0] / [16 |G1|^2 sin^2(2 phi0 - gamma1)]
//! ```
//!
//! minimized at `phi0 = 0`, `gamma1 = +-pi/2`. The ratio to the Mach-Zehnder
//! shot-noise limit with the same number of input photons is independent of
//! `Ns` and is evaluated per seed photon throughout.

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{normalize_angle, DimensionlessParams, ModelError};
use crate::special::{
    g1_mu_integral, gauss_hermite_rule, hyp_1f2, sum_g_series, QuadratureRule, SeriesOptions,
    SpecialError, DEFAULT_HERMITE_ORDER,
};

/// Scale ratios at or below this are treated as exactly zero.
pub const ZERO_RATIO: f64 = 1e-12;

/// `|sin(2 phi0 - gamma1)|` below this is a point without fringe slope.
const SINGULAR_SIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("singular phase: sin(2 phi0 - gamma1) = 0 at phi0 = {phi0}, gamma1 = {gamma1}")]
    SingularPhase { phi0: f64, gamma1: f64 },
    #[error("zero signal: |G1| = 0 (no squeezing)")]
    ZeroSignal,
    #[error("no SQL crossing for nu = {nu}, mu = {mu} up to Xi = {xi_max} (rho = {rho_at_max})")]
    NoCrossing {
        nu: f64,
        mu: f64,
        xi_max: f64,
        rho_at_max: f64,
    },
    #[error("method {method} does not apply: {reason}")]
    MethodDomain { method: Method, reason: &'static str },
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },
}

/// Evaluation branch used for the gain sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Hypergeometric,
    Quadrature,
    RawSeries,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::ClosedForm,
        Method::Hypergeometric,
        Method::Quadrature,
        Method::RawSeries,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Hypergeometric => "hypergeometric",
            Method::Quadrature => "quadrature",
            Method::RawSeries => "raw-series",
        }
    }

    /// Branch picked for the given scale ratios.
    pub fn select(nu: f64, mu: f64) -> Method {
        match (nu <= ZERO_RATIO, mu <= ZERO_RATIO) {
            (true, true) => Method::ClosedForm,
            (false, true) => Method::Hypergeometric,
            (true, false) => Method::Quadrature,
            (false, false) => Method::RawSeries,
        }
    }

    pub fn applies(self, nu: f64, mu: f64) -> bool {
        match self {
            Method::ClosedForm => nu <= ZERO_RATIO && mu <= ZERO_RATIO,
            Method::Hypergeometric => mu <= ZERO_RATIO && nu > ZERO_RATIO,
            Method::Quadrature => nu <= ZERO_RATIO,
            Method::RawSeries => true,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// G0 and |G1| in photons, with the pump phase difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GPair {
    pub g0: f64,
    pub g1_abs: f64,
    pub gamma1: f64,
    pub method: Method,
    pub n_seed: f64,
}

impl GPair {
    pub fn g0_per_photon(&self) -> f64 {
        self.g0 / self.n_seed
    }

    pub fn g1_per_photon(&self) -> f64 {
        self.g1_abs / self.n_seed
    }
}

/// Per-seed-photon gain sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerPhoton {
    pub g0: f64,
    pub g1: f64,
}

/// Holds the series options and quadrature rule shared by all evaluations.
#[derive(Debug, Clone)]
pub struct GainEvaluator {
    pub series: SeriesOptions,
    rule: QuadratureRule,
}

impl Default for GainEvaluator {
    fn default() -> Self {
        GainEvaluator {
            series: SeriesOptions::default(),
            rule: gauss_hermite_rule(DEFAULT_HERMITE_ORDER).expect("default order is supported"),
        }
    }
}

impl GainEvaluator {
    pub fn new(series: SeriesOptions, quadrature_order: usize) -> Result<Self, AnalyticError> {
        series.validate()?;
        Ok(GainEvaluator {
            series,
            rule: gauss_hermite_rule(quadrature_order)?,
        })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Gain sums through an explicit branch.
    pub fn per_photon_with(
        &self,
        xi: f64,
        nu: f64,
        mu: f64,
        method: Method,
    ) -> Result<PerPhoton, AnalyticError> {
        for (name, v) in [("xi", xi), ("nu", nu), ("mu", mu)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(AnalyticError::InvalidArgument {
                    name,
                    reason: format!("must be finite and >= 0, got {v}"),
                });
            }
        }
        if !method.applies(nu, mu) {
            let reason = match method {
                Method::ClosedForm => "requires nu = mu = 0",
                Method::Hypergeometric => "requires mu = 0 < nu",
                Method::Quadrature => "requires nu = 0",
                Method::RawSeries => unreachable!(),
            };
            return Err(AnalyticError::MethodDomain { method, reason });
        }
        let out = match method {
            Method::ClosedForm => PerPhoton {
                g0: (2.0 * xi).cosh(),
                g1: 2.0 * xi.sinh().powi(2),
            },
            Method::Hypergeometric => {
                let a = 1.0 / nu;
                let f = hyp_1f2(a, 0.5, 1.0 + a, xi * xi, &self.series)?;
                PerPhoton { g0: f, g1: f - 1.0 }
            }
            Method::Quadrature => {
                let g1 = g1_mu_integral(xi, mu, &self.rule)?;
                PerPhoton { g0: 1.0 + g1, g1 }
            }
            Method::RawSeries => {
                let g1 = sum_g_series(xi, nu, mu, 1, &self.series)?;
                PerPhoton { g0: 1.0 + g1, g1 }
            }
        };
        Ok(out)
    }

    pub fn per_photon(&self, xi: f64, nu: f64, mu: f64) -> Result<(PerPhoton, Method), AnalyticError> {
        let method = Method::select(nu, mu);
        Ok((self.per_photon_with(xi, nu, mu, method)?, method))
    }

    pub fn compute_g_with(&self, params: &DimensionlessParams, method: Method) -> Result<GPair, AnalyticError> {
        let p = params.validate()?;
        let pp = self.per_photon_with(p.xi, p.nu, p.mu, method)?;
        Ok(GPair {
            g0: p.n_seed * pp.g0,
            g1_abs: p.n_seed * pp.g1,
            gamma1: p.gamma1(),
            method,
            n_seed: p.n_seed,
        })
    }

    pub fn compute_g(&self, params: &DimensionlessParams) -> Result<GPair, AnalyticError> {
        self.compute_g_with(params, Method::select(params.nu, params.mu))
    }

    /// Ratio of the minimum SU(1,1) sensitivity to the shot-noise limit at
    /// equal input photon number.
    pub fn rho(&self, xi: f64, nu: f64, mu: f64) -> Result<f64, AnalyticError> {
        let (pp, _) = self.per_photon(xi, nu, mu)?;
        rho_from_per_photon(pp.g1)
    }

    /// Squeezing parameter at which `rho = 1`, by bisection.
    pub fn sql_crossing(&self, nu: f64, mu: f64) -> Result<CrossingResult, AnalyticError> {
        const XI_LIMIT: f64 = 160.0;
        // A gain sum that underflows to zero is an unbounded rho, not an error.
        let f = |xi: f64| -> Result<f64, AnalyticError> {
            match self.rho(xi, nu, mu) {
                Ok(r) => Ok(r - 1.0),
                Err(AnalyticError::ZeroSignal) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            }
        };
        let lo0 = 1e-3;
        let mut hi = 5.0;
        if f(lo0)? <= 0.0 {
            return Err(AnalyticError::InvalidArgument {
                name: "bracket",
                reason: format!("rho already below 1 at Xi = {lo0}"),
            });
        }
        let mut f_hi = f(hi)?;
        while f_hi > 0.0 {
            if hi >= XI_LIMIT {
                return Err(AnalyticError::NoCrossing {
                    nu,
                    mu,
                    xi_max: hi,
                    rho_at_max: f_hi + 1.0,
                });
            }
            hi *= 2.0;
            f_hi = f(hi)?;
        }
        let bracket = (lo0, hi);
        let mut lo = lo0;
        let mut iterations = 0;
        while hi - lo > 4.0 * f64::EPSILON * hi && iterations < 200 {
            let mid = 0.5 * (lo + hi);
            iterations += 1;
            if f(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let xi_star = 0.5 * (lo + hi);
        Ok(CrossingResult {
            xi_star,
            bracket,
            iterations,
            residual: f(xi_star)?.abs(),
        })
    }

    pub fn penalty_factor(&self, nu: f64, mu: f64) -> Result<f64, AnalyticError> {
        Ok(self.sql_crossing(nu, mu)?.xi_star / self.sql_crossing(0.0, 0.0)?.xi_star)
    }
}

fn default_evaluator() -> &'static GainEvaluator {
    static EVAL: OnceLock<GainEvaluator> = OnceLock::new();
    EVAL.get_or_init(GainEvaluator::default)
}

fn rho_from_per_photon(g1: f64) -> Result<f64, AnalyticError> {
    if g1 <= 0.0 {
        return Err(AnalyticError::ZeroSignal);
    }
    Ok(1.0 / (4.0 * g1))
}

/// G0 and |G1| with the branch chosen from (nu, mu).
pub fn compute_g(params: &DimensionlessParams) -> Result<GPair, AnalyticError> {
    default_evaluator().compute_g(params)
}

pub fn compute_g_with(params: &DimensionlessParams, method: Method) -> Result<GPair, AnalyticError> {
    default_evaluator().compute_g_with(params, method)
}

/// Common-phase sensitivity squared at an explicit `phi0`.
pub fn phase_sensitivity_sq_at(params: &DimensionlessParams, g: &GPair, phi0: f64) -> Result<f64, AnalyticError> {
    let s = (2.0 * phi0 - g.gamma1).sin();
    if s.abs() < SINGULAR_SIN || g.g1_abs == 0.0 {
        return Err(AnalyticError::SingularPhase {
            phi0,
            gamma1: g.gamma1,
        });
    }
    let numerator = phi0.cos().powi(2) * params.n_seed + phi0.sin().powi(2) * g.g0;
    Ok(numerator / (16.0 * g.g1_abs * g.g1_abs * s * s))
}

/// Common-phase sensitivity squared at `params.phi0`.
pub fn phase_sensitivity_sq(params: &DimensionlessParams, g: &GPair) -> Result<f64, AnalyticError> {
    phase_sensitivity_sq_at(params, g, params.phi0)
}

/// Minimum common-phase sensitivity `sqrt(Ns) / (4|G1|)`, reached at
/// `phi0 = 0` under the optimal pump phase difference `gamma1 = +-pi/2`.
pub fn min_sensitivity(params: &DimensionlessParams, g: &GPair) -> Result<f64, AnalyticError> {
    if g.g1_abs <= 0.0 {
        return Err(AnalyticError::ZeroSignal);
    }
    Ok(params.n_seed.sqrt() / (4.0 * g.g1_abs))
}

/// Slope of the mean photon number in the common phase, `-4|G1| sin(2 phi0 - gamma1)`.
pub fn fringe_slope(g: &GPair, phi0: f64) -> f64 {
    -4.0 * g.g1_abs * (2.0 * phi0 - g.gamma1).sin()
}

fn check_photons(n_in: f64) -> Result<(), AnalyticError> {
    if n_in.is_finite() && n_in > 0.0 {
        Ok(())
    } else {
        Err(AnalyticError::InvalidArgument {
            name: "n_in",
            reason: format!("must be > 0, got {n_in}"),
        })
    }
}

/// Mach-Zehnder relative-phase sensitivity squared, `2(1 + cos)/(N sin^2)`,
/// evaluated as `2 / (N (1 - cos))` so that `phi = pi` gives the limit `1/N`.
pub fn mz_sensitivity_sq(n_in: f64, phi_delta: f64) -> Result<f64, AnalyticError> {
    check_photons(n_in)?;
    let one_minus_cos = 1.0 - normalize_angle(phi_delta).cos();
    if one_minus_cos < 1e-24 {
        return Err(AnalyticError::SingularPhase {
            phi0: phi_delta,
            gamma1: 0.0,
        });
    }
    Ok(2.0 / (n_in * one_minus_cos))
}

/// Shot-noise limit `1 / sqrt(N)`.
pub fn mz_min(n_in: f64) -> Result<f64, AnalyticError> {
    check_photons(n_in)?;
    Ok(1.0 / n_in.sqrt())
}

/// `rho = dphi0_min / dphi_delta_min` with `N_in = Ns`.
pub fn rho_ratio(params: &DimensionlessParams) -> Result<f64, AnalyticError> {
    let p = params.validate()?;
    default_evaluator().rho(p.xi, p.nu, p.mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingResult {
    pub xi_star: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub residual: f64,
}

pub fn sql_crossing(nu: f64, mu: f64) -> Result<CrossingResult, AnalyticError> {
    default_evaluator().sql_crossing(nu, mu)
}

/// Squeezing needed at (nu, mu) relative to the ideal case, at the SQL crossing.
pub fn penalty_factor(nu: f64, mu: f64) -> Result<f64, AnalyticError> {
    default_evaluator().penalty_factor(nu, mu)
}

/// Full analytic result for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityResult {
    pub params: DimensionlessParams,
    pub g: GPair,
    pub dphi_min: f64,
    pub mz_min: f64,
    pub rho: f64,
}

impl SensitivityResult {
    pub fn dphi0_sq_at(&self, phi0: f64) -> Result<f64, AnalyticError> {
        phase_sensitivity_sq_at(&self.params, &self.g, phi0)
    }
}

/// Requires `Xi > 0`.
pub fn analyze(params: &DimensionlessParams) -> Result<SensitivityResult, AnalyticError> {
    let p = params.validate()?;
    let g = compute_g(&p)?;
    let dphi_min = min_sensitivity(&p, &g)?;
    let mz = mz_min(p.n_seed)?;
    Ok(SensitivityResult {
        params: p,
        g,
        dphi_min,
        mz_min: mz,
        rho: rho_from_per_photon(g.g1_per_photon())?,
    })
}

/// Optimal pump phase difference assumed by [`min_sensitivity`].
pub const OPTIMAL_GAMMA1: f64 = PI / 2.0;
