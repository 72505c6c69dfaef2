//! Parameter types for the seeded SU(1,1) interferometer.
//!
//! The laboratory description ([`PhysicalSetup`], [`SeedSpec`], [`PumpSpec`])
//! reduces to [`DimensionlessParams`], which is the only input the analytic
//! layer and the kernel oracle consume.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::InvalidParameter {
        field,
        reason: reason.into(),
    }
}

fn require_positive(field: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite and > 0, got {value}")))
    }
}

fn require_nonnegative(field: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite and >= 0, got {value}")))
    }
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(angle: f64) -> f64 {
    if !angle.is_finite() {
        return angle;
    }
    let two_pi = 2.0 * PI;
    let mut a = angle.rem_euclid(two_pi);
    if a > PI {
        a -= two_pi;
    }
    a
}

/// Thin-crystal ratios at or above this value are flagged.
pub const THIN_CRYSTAL_WARNING: f64 = 0.1;

/// Laboratory description of the two (identical) crystals, pump and seed scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSetup {
    /// Pump beam waist at the crystal [m].
    pub w_p: f64,
    /// Seed beam waist [m].
    pub w_s: f64,
    /// Pump bandwidth [rad/s].
    pub delta_p: f64,
    /// Seed bandwidth [rad/s].
    pub delta_s: f64,
    /// Pump center frequency [rad/s].
    pub omega_p: f64,
    /// Crystal length [m].
    #[serde(rename = "L", alias = "l")]
    pub l: f64,
    /// Type-I nonlinear coefficient expressed as a cross-section [m^2].
    pub sigma_ooe: f64,
    /// Magnitude of the pump parameter function.
    pub psi0_mag: f64,
    /// Speed of light [m/s].
    pub c: f64,
}

impl PhysicalSetup {
    pub fn validate(&self) -> Result<(), ModelError> {
        require_positive("w_p", self.w_p)?;
        require_positive("w_s", self.w_s)?;
        require_positive("delta_p", self.delta_p)?;
        require_positive("delta_s", self.delta_s)?;
        require_positive("omega_p", self.omega_p)?;
        require_positive("L", self.l)?;
        require_positive("sigma_ooe", self.sigma_ooe)?;
        require_positive("psi0_mag", self.psi0_mag)?;
        require_positive("c", self.c)?;
        Ok(())
    }

    /// Vacuum Rayleigh range of the pump, `w_p^2 omega_p / (2c)`.
    pub fn pump_rayleigh_range(&self) -> f64 {
        self.w_p * self.w_p * self.omega_p / (2.0 * self.c)
    }

    /// Crystal length over pump Rayleigh range; the thin-crystal expansion parameter.
    pub fn thin_crystal_ratio(&self) -> f64 {
        self.l / self.pump_rayleigh_range()
    }

    pub fn pump(&self, phase: f64) -> PumpSpec {
        PumpSpec {
            psi0_mag: self.psi0_mag,
            w_p: self.w_p,
            omega_p: self.omega_p,
            delta_p: self.delta_p,
            phase: normalize_angle(phase),
        }
    }

    /// Squeezing parameter of one crystal.
    pub fn squeezing_parameter(&self) -> f64 {
        self.l * self.psi0_mag * self.sigma_ooe * self.omega_p.powf(1.5) * self.delta_p.sqrt()
            / (2f64.sqrt() * PI.powf(0.75) * self.c * self.c * self.w_p)
    }
}

/// Coherent seed: Gaussian angular spectrum with a normalized Gaussian spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    /// Seed magnitude `||xi||`; the seed photon number is its square.
    pub xi0_mag: f64,
    pub w_s: f64,
    pub omega_s: f64,
    pub delta_s: f64,
}

impl SeedSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        require_positive("xi0_mag", self.xi0_mag)?;
        require_positive("w_s", self.w_s)?;
        require_positive("omega_s", self.omega_s)?;
        require_positive("delta_s", self.delta_s)?;
        Ok(())
    }

    pub fn photon_number(&self) -> f64 {
        self.xi0_mag * self.xi0_mag
    }
}

/// Coherent pump of one crystal, described by the same Gaussian convention as the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSpec {
    pub psi0_mag: f64,
    pub w_p: f64,
    pub omega_p: f64,
    pub delta_p: f64,
    /// Global pump phase [rad].
    pub phase: f64,
}

impl PumpSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        require_positive("psi0_mag", self.psi0_mag)?;
        require_positive("w_p", self.w_p)?;
        require_positive("omega_p", self.omega_p)?;
        require_positive("delta_p", self.delta_p)?;
        if !self.phase.is_finite() {
            return Err(invalid("phase", "must be finite"));
        }
        Ok(())
    }
}

/// The experiment reduced to its dimensionless scale parameters and phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionlessParams {
    /// Squeezing parameter, shared by both crystals.
    pub xi: f64,
    /// Squared seed-to-pump beam-waist ratio.
    pub nu: f64,
    /// Squared pump-to-seed bandwidth ratio.
    pub mu: f64,
    /// Seed photon number.
    pub n_seed: f64,
    /// Common phase modulation [rad].
    #[serde(default)]
    pub phi0: f64,
    /// Relative phase modulation [rad].
    #[serde(default)]
    pub phi_delta: f64,
    #[serde(default)]
    pub pump_phase_1: f64,
    #[serde(default = "default_pump_phase_2")]
    pub pump_phase_2: f64,
}

fn default_pump_phase_2() -> f64 {
    PI / 2.0
}

impl DimensionlessParams {
    /// Builds validated parameters with the optimal pump phase difference of pi/2
    /// and the modulation phases at zero.
    pub fn new(xi: f64, nu: f64, mu: f64, n_seed: f64) -> Result<Self, ModelError> {
        DimensionlessParams {
            xi,
            nu,
            mu,
            n_seed,
            phi0: 0.0,
            phi_delta: 0.0,
            pump_phase_1: 0.0,
            pump_phase_2: PI / 2.0,
        }
        .validate()
    }

    pub fn with_phases(mut self, phi0: f64, phi_delta: f64) -> Self {
        self.phi0 = normalize_angle(phi0);
        self.phi_delta = normalize_angle(phi_delta);
        self
    }

    pub fn with_pump_phases(mut self, first: f64, second: f64) -> Self {
        self.pump_phase_1 = normalize_angle(first);
        self.pump_phase_2 = normalize_angle(second);
        self
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    /// Pump phase of the second crystal relative to the first, in (-pi, pi].
    pub fn gamma1(&self) -> f64 {
        normalize_angle(self.pump_phase_2 - self.pump_phase_1)
    }

    /// Returns the parameters with angles normalized if every invariant holds.
    pub fn validate(self) -> Result<Self, ModelError> {
        require_nonnegative("xi", self.xi)?;
        require_nonnegative("nu", self.nu)?;
        require_nonnegative("mu", self.mu)?;
        require_positive("n_seed", self.n_seed)?;
        for (field, v) in [
            ("phi0", self.phi0),
            ("phi_delta", self.phi_delta),
            ("pump_phase_1", self.pump_phase_1),
            ("pump_phase_2", self.pump_phase_2),
        ] {
            if !v.is_finite() {
                return Err(invalid(field, "must be finite"));
            }
        }
        Ok(DimensionlessParams {
            phi0: normalize_angle(self.phi0),
            phi_delta: normalize_angle(self.phi_delta),
            pump_phase_1: normalize_angle(self.pump_phase_1),
            pump_phase_2: normalize_angle(self.pump_phase_2),
            ..self
        })
    }
}

/// Result of reducing a physical setup: the parameters plus the thin-crystal diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derived {
    pub params: DimensionlessParams,
    pub thin_crystal_ratio: f64,
    pub warnings: Vec<String>,
}

/// Reduces a laboratory setup to dimensionless parameters.
///
/// The seed must sit at the degenerate frequency `omega_p / 2` and share the
/// setup's seed waist and bandwidth.
pub fn derive_dimensionless(
    setup: &PhysicalSetup,
    pump_phases: (f64, f64),
    seed: &SeedSpec,
) -> Result<Derived, ModelError> {
    setup.validate()?;
    seed.validate()?;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
    if rel(seed.w_s, setup.w_s) > 1e-12 {
        return Err(invalid("w_s", "seed waist differs from the setup's w_s"));
    }
    if rel(seed.delta_s, setup.delta_s) > 1e-12 {
        return Err(invalid("delta_s", "seed bandwidth differs from the setup's delta_s"));
    }
    if rel(seed.omega_s, setup.omega_p / 2.0) > 1e-6 {
        return Err(invalid(
            "omega_s",
            format!(
                "non-degenerate seed: omega_s = {} but omega_p/2 = {}",
                seed.omega_s,
                setup.omega_p / 2.0
            ),
        ));
    }
    setup.pump(pump_phases.0).validate()?;
    setup.pump(pump_phases.1).validate()?;

    let params = DimensionlessParams {
        xi: setup.squeezing_parameter(),
        nu: (setup.w_s / setup.w_p).powi(2),
        mu: (setup.delta_p / setup.delta_s).powi(2),
        n_seed: seed.photon_number(),
        phi0: 0.0,
        phi_delta: 0.0,
        pump_phase_1: pump_phases.0,
        pump_phase_2: pump_phases.1,
    }
    .validate()?;

    let ratio = setup.thin_crystal_ratio();
    let mut warnings = Vec::new();
    if ratio >= THIN_CRYSTAL_WARNING {
        warnings.push(format!(
            "thin-crystal ratio L/z_R = {ratio:.3e} >= {THIN_CRYSTAL_WARNING}; kernels are outside their regime"
        ));
    }
    Ok(Derived {
        params,
        thin_crystal_ratio: ratio,
        warnings,
    })
}
